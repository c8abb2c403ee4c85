//! Per-element regularity of a set V.
//!
//! For a ∈ G write B = V ∩ (V − a). The element a is η-regular when
//! (i)   ½δ²|G| ≤ |B| ≤ 2δ²|G|,
//! (ii)  |B ∩ (B − b)| ≤ 2δ³|G| for all but η|G| values of b,
//! (iii) |B ∩ (B − d1) ∩ (B − d1 + d2) ∩ (B − d3)| ≤ 2δ⁵|G| for all but
//!       η|G|³ triples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::FourierPlan;
use crate::group::{Adder, GSubset};

#[derive(Clone, Debug, Serialize)]
pub struct RegularityOptions {
    pub eta: f64,
    /// Sampled triples per element for (iii) above the exact limit.
    pub samples: u64,
    pub seed: u64,
    /// Largest |G| for which (iii) is evaluated over all triples.
    pub exact_limit: usize,
}

impl Default for RegularityOptions {
    fn default() -> Self {
        Self { eta: 0.1, samples: 10_000, seed: 0, exact_limit: 243 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ElementRegularity {
    pub element: usize,
    /// |V ∩ (V − a)|.
    pub intersection: u64,
    pub cond_i: bool,
    /// Number of b violating the four-fold bound.
    pub ii_violations: u64,
    pub cond_ii: bool,
    /// None when (i) or (ii) already failed.
    pub cond_iii: Option<bool>,
    /// Fraction of triples violating the eight-term bound (estimate if sampled).
    pub iii_violation_fraction: Option<f64>,
    pub iii_sampled: bool,
    /// Whether the sampled verdict for (iii) holds at 99% confidence.
    pub iii_confident: bool,
    pub regular: bool,
}

#[derive(Clone, Debug)]
pub struct RegularityReport {
    pub eta: f64,
    pub elements: Vec<ElementRegularity>,
    pub regular_set: GSubset,
}

impl RegularityReport {
    pub fn regular_fraction(&self) -> f64 {
        if self.elements.is_empty() {
            return 0.0;
        }
        self.elements.iter().filter(|e| e.regular).count() as f64 / self.elements.len() as f64
    }
}

/// The set B = V ∩ (V − a) and its difference counts |B ∩ (B − b)|.
#[derive(Clone, Debug)]
pub struct ShiftAnalysis {
    pub element: usize,
    pub b: GSubset,
    pub counts: Vec<u64>,
}

impl ShiftAnalysis {
    /// 1_B ⋆ 1_B(b).
    pub fn conv(&self, b: usize) -> f64 {
        self.counts[b] as f64 / self.b.ctx().size() as f64
    }

    /// E_b (1_B ⋆ 1_B(b))².
    pub fn l2_mass(&self) -> f64 {
        let g = self.b.ctx().size() as f64;
        self.counts.iter().map(|&c| (c as f64) * (c as f64)).sum::<f64>() / (g * g * g)
    }
}

pub fn analyze_shift(plan: &FourierPlan, v: &GSubset, a: usize) -> ShiftAnalysis {
    let b = v.intersection(&v.translate(a)).expect("same context");
    let counts = plan.autocorrelation_counts(&b);
    ShiftAnalysis { element: a, b, counts }
}

fn cond_i(s: u128, g: u128, r: u128) -> bool {
    s * s <= 2 * g * r && r * g <= 2 * s * s
}

/// Count N·|G|⁴ > 2|V|⁵ means the eight-term average exceeds 2δ⁵.
fn iii_exceeds(n: u64, g: u128, s: u128) -> bool {
    (n as u128) * g.pow(4) > 2 * s.pow(5)
}

/// (iii) over all triples. N depends on {d1, d1 − d2, d3} only through the
/// four-fold intersection B ∩ (B − u) ∩ (B − w) ∩ (B − d3), so for fixed
/// (u, w) the counts over d3 are one correlation of D = B ∩ (B−u) ∩ (B−w) with B.
fn iii_exact(b: &GSubset, ad: &Adder, g: usize, s: u128) -> u64 {
    let elems: Vec<usize> = b.iter().collect();
    let g128 = g as u128;
    let mut violations = 0u64;
    let mut counts = vec![0u64; g];
    for u in 0..g {
        let cu: Vec<usize> = elems.iter().copied().filter(|&x| b.contains(ad.add(x, u))).collect();
        if !iii_exceeds(cu.len() as u64, g128, s) {
            continue;
        }
        for w in 0..g {
            let dw: Vec<usize> = cu.iter().copied().filter(|&x| b.contains(ad.add(x, w))).collect();
            if !iii_exceeds(dw.len() as u64, g128, s) {
                continue;
            }
            counts.iter_mut().for_each(|c| *c = 0);
            for &x in &dw {
                for &y in &elems {
                    counts[ad.sub(y, x)] += 1;
                }
            }
            violations += counts.iter().filter(|&&c| iii_exceeds(c, g128, s)).count() as u64;
        }
    }
    violations
}

fn iii_sampled(b: &GSubset, ad: &Adder, g: usize, s: u128, samples: u64, seed: u64) -> u64 {
    let elems: Vec<usize> = b.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    for _ in 0..samples {
        let d1 = rng.gen_range(0..g);
        let d2 = rng.gen_range(0..g);
        let d3 = rng.gen_range(0..g);
        let w = ad.sub(d1, d2);
        let n = elems
            .iter()
            .filter(|&&x| b.contains(ad.add(x, d1)) && b.contains(ad.add(x, w)) && b.contains(ad.add(x, d3)))
            .count() as u64;
        violations += iii_exceeds(n, g as u128, s) as u64;
    }
    violations
}

/// Classifies the given elements; (iii) is only evaluated where (i) and (ii) hold.
pub fn classify_elements(v: &GSubset, elements: &[usize], opts: &RegularityOptions) -> Result<Vec<ElementRegularity>> {
    if !(opts.eta > 0.0) {
        return Err(Error::InvalidParameter(format!("η = {} must be positive", opts.eta)));
    }
    let ctx = v.ctx();
    let g = ctx.size();
    let plan = FourierPlan::new(ctx);
    let ad = Adder::new(ctx);
    let s = v.len() as u128;
    let g128 = g as u128;
    let full_r = plan.autocorrelation_counts(v);
    let out = elements
        .par_iter()
        .map(|&a| {
            let r = full_r[a];
            let ci = cond_i(s, g128, r as u128);
            let mut e = ElementRegularity {
                element: a,
                intersection: r,
                cond_i: ci,
                ii_violations: 0,
                cond_ii: false,
                cond_iii: None,
                iii_violation_fraction: None,
                iii_sampled: false,
                iii_confident: true,
                regular: false,
            };
            let sh = analyze_shift(&plan, v, a);
            e.ii_violations = sh.counts.iter().filter(|&&c| (c as u128) * g128 * g128 > 2 * s.pow(3)).count() as u64;
            e.cond_ii = (e.ii_violations as f64) <= opts.eta * g as f64;
            if !(e.cond_i && e.cond_ii) {
                return e;
            }
            let (frac, ok) = if g <= opts.exact_limit {
                let viol = iii_exact(&sh.b, &ad, g, s);
                let frac = viol as f64 / (g as f64).powi(3);
                (frac, frac <= opts.eta)
            } else {
                let seed = opts.seed.wrapping_add((a as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                let k = iii_sampled(&sh.b, &ad, g, s, opts.samples, seed);
                let n = opts.samples.max(1) as f64;
                let est = k as f64 / n;
                // 99% interval: normal approximation, or −ln(0.01)/n when nothing was seen
                let half = if k == 0 { 4.6 / n } else { 2.576 * (est * (1.0 - est) / n).sqrt() };
                e.iii_sampled = true;
                e.iii_confident = if est <= opts.eta { est + half <= opts.eta } else { est - half > opts.eta };
                (est, est <= opts.eta)
            };
            e.iii_violation_fraction = Some(frac);
            e.cond_iii = Some(ok);
            e.regular = ok;
            e
        })
        .collect();
    Ok(out)
}

pub fn regularity_classify(v: &GSubset, opts: &RegularityOptions) -> Result<RegularityReport> {
    let all: Vec<usize> = (0..v.ctx().size()).collect();
    let elements = classify_elements(v, &all, opts)?;
    let regular_set = GSubset::from_indices(v.ctx(), elements.iter().filter(|e| e.regular).map(|e| e.element));
    Ok(RegularityReport { eta: opts.eta, elements, regular_set })
}
