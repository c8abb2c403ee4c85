//! Recovery of an exact quadratic variety from a set with many additive cubes.
//!
//! Step 1 finds a subspace W_a for most a from the popular differences of
//! V ∩ (V − a). Step 2 solves for bilinear forms vanishing on the incidences
//! (a, W_a). Step 3 turns the forms into a variety and picks the level set
//! that best matches V.

mod step1;
mod step2;
mod step3;

use serde::{Deserialize, Serialize};

pub use step1::{candidate_elements, step1_build_family, Step1Diagnostics};
pub use step2::{consensus_scores, step2_fit_bilinear, step2_good_quadruple_census, QuadrupleCensus, Step2Diagnostics};
pub use step3::{step3_extract_variety, Step3Diagnostics, Step3Output};

use crate::error::Result;
use crate::forms::{BilinearMap, QuadraticVariety};
use crate::group::GSubset;
use crate::linalg::AffineMap;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct RecoveryConfig {
    pub seed: u64,
    /// Step 1 refuses sets whose cube density is below this.
    pub c0_min: f64,
    /// Largest |G| for which the cube count is exact rather than sampled.
    pub c0_exact_limit: usize,
    /// Regularity tolerance.
    pub eta: f64,
    /// Minimum L² mass of the shifted self-convolution, in units of δ⁷.
    pub xi: f64,
    /// Popularity threshold as a fraction of c'δ³.
    pub tau_scale: f64,
    /// W_a may be at most this factor larger or smaller than δ|G|.
    pub k_cap: f64,
    /// Fraction of the greedy span that must consist of popular differences.
    pub span_support: f64,
    pub max_elements: usize,
    pub regularity_samples: usize,
    pub regularity_exact_limit: usize,
    pub c1: f64,
    pub quality_samples: usize,
    pub quality_max_r: usize,
    /// Largest acceptable family constant; p³ when unset.
    pub k_max: Option<f64>,
    /// Number of bilinear forms to fit; the family codimension when unset.
    pub d_out: Option<usize>,
    pub consensus_threshold: f64,
    pub consensus_quadruples: usize,
    pub consensus_tries: usize,
    pub ransac_trials: usize,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            c0_min: 0.5,
            c0_exact_limit: 19683,
            eta: 0.1,
            xi: 0.5,
            tau_scale: 0.3,
            k_cap: 4.0,
            span_support: 0.75,
            max_elements: 512,
            regularity_samples: 200,
            regularity_exact_limit: 243,
            c1: 0.5,
            quality_samples: 64,
            quality_max_r: 9,
            k_max: None,
            d_out: None,
            consensus_threshold: 0.5,
            consensus_quadruples: 24,
            consensus_tries: 4000,
            ransac_trials: 64,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RecoveryDiagnostics {
    pub step1: Step1Diagnostics,
    pub step2: Option<Step2Diagnostics>,
    pub step3: Step3Diagnostics,
}

#[derive(Clone, Debug)]
pub struct RecoveryResult {
    /// The fitted bilinear map before symmetrization.
    pub beta_fit: BilinearMap,
    /// ½γ(x,x) − ψ(x) = μ defines Q.
    pub gamma: BilinearMap,
    pub psi: AffineMap,
    pub mu: Vec<u32>,
    /// The same variety in the γ(x,x) − ψ'(x) = μ' normal form.
    pub variety: QuadraticVariety,
    pub q_set: GSubset,
    pub consensus: Vec<usize>,
    pub overlap: f64,
    pub size_ratio: f64,
    pub d_tilde: usize,
    pub low_confidence: bool,
    pub diagnostics: RecoveryDiagnostics,
}

/// Serializable view of a recovery result.
#[derive(Clone, Debug, Serialize)]
pub struct RecoveryReport {
    pub d_tilde: usize,
    pub gamma: Vec<Vec<Vec<u32>>>,
    pub psi_linear: Vec<Vec<u32>>,
    pub psi_offset: Vec<u32>,
    pub mu: Vec<u32>,
    pub variety_size: u64,
    pub overlap: f64,
    pub size_ratio: f64,
    pub low_confidence: bool,
    pub consensus_size: usize,
    pub diagnostics: RecoveryDiagnostics,
}

impl RecoveryResult {
    pub fn report(&self) -> RecoveryReport {
        RecoveryReport {
            d_tilde: self.d_tilde,
            gamma: self.gamma.matrices().iter().map(|m| m.row_vecs()).collect(),
            psi_linear: self.psi.linear.matrix().row_vecs(),
            psi_offset: self.psi.offset.clone(),
            mu: self.mu.clone(),
            variety_size: self.q_set.len(),
            overlap: self.overlap,
            size_ratio: self.size_ratio,
            low_confidence: self.low_confidence,
            consensus_size: self.consensus.len(),
            diagnostics: self.diagnostics.clone(),
        }
    }
}

/// Runs the three steps. Failures carry the name of the stage that refused.
pub fn recover(v: &GSubset, cfg: &RecoveryConfig) -> Result<RecoveryResult> {
    let ctx = v.ctx();
    let (family, d1) = step1_build_family(v, cfg)?;
    let (beta, consensus, d2) = if family.codim() == 0 {
        // every W_a is G: only the zero form vanishes, so Q = G
        (BilinearMap::zero(ctx, 0), family.iter().map(|(&a, _)| a).collect(), None)
    } else {
        let d_out = cfg.d_out.unwrap_or(family.codim());
        let (beta, consensus, d2) = step2_fit_bilinear(&family, d_out, cfg)?;
        (beta, consensus, Some(d2))
    };
    let out = step3_extract_variety(v, &beta, cfg)?;
    Ok(RecoveryResult {
        beta_fit: beta,
        gamma: out.gamma,
        psi: out.psi,
        mu: out.mu,
        variety: out.variety,
        q_set: out.set,
        consensus,
        overlap: out.overlap,
        size_ratio: out.size_ratio,
        d_tilde: out.diagnostics.d_tilde,
        low_confidence: out.diagnostics.low_confidence,
        diagnostics: RecoveryDiagnostics { step1: d1, step2: d2, step3: out.diagnostics },
    })
}
