//! Bilinear forms vanishing on the incidences b ∈ W_a.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::SubspaceFamily;
use crate::forms::BilinearMap;
use crate::generators::rng_from_seed;
use crate::group::{Adder, VectorSpaceCtx};
use crate::linalg::{quadruple_isomorphisms, LinearMap, Matrix, QuadrupleSizes, Subspace};

use super::RecoveryConfig;

#[derive(Clone, Debug, Default, Serialize)]
pub struct Step2Diagnostics {
    pub family_size: usize,
    /// Elements with too few quadruples to be scored; they are kept.
    pub unscored: usize,
    pub below_threshold: usize,
    pub rejected_by_solve: usize,
    pub consensus_size: usize,
    pub solution_dim: usize,
    pub d_out: usize,
    pub direction_ranks: Vec<usize>,
    pub mean_score: f64,
}

/// Up to `want` additive quadruples (a, a2, a3, a + a2 − a3) of distinct
/// family elements, found by seeded random search.
fn quadruples_through(a: usize, keys: &[usize], family: &SubspaceFamily, ad: &Adder, want: usize, tries: usize, seed: u64) -> Vec<[usize; 4]> {
    let mut rng = rng_from_seed(seed);
    let mut out = Vec::new();
    for _ in 0..tries {
        if out.len() >= want {
            break;
        }
        let a2 = keys[rng.gen_range(0..keys.len())];
        let a3 = keys[rng.gen_range(0..keys.len())];
        let a4 = ad.sub(ad.add(a, a2), a3);
        let q = [a, a2, a3, a4];
        let distinct = (0..4).all(|i| (i + 1..4).all(|j| q[i] != q[j]));
        if distinct && family.get(a4).is_some() {
            out.push(q);
        }
    }
    out
}

fn perps(family: &SubspaceFamily, q: &[usize; 4]) -> [Subspace; 4] {
    q.map(|x| family.get(x).unwrap().orthogonal_complement())
}

/// Whether the quadruple satisfies the good-quadruple size conditions with K = 1.
fn good_at_k1(family: &SubspaceFamily, q: &[usize; 4]) -> bool {
    QuadrupleSizes::measure(&perps(family, q)).map(|s| s.log_p_k() == 0).unwrap_or(false)
}

/// Fraction of sampled quadruples through each element that are good at K = 1.
pub fn consensus_scores(family: &SubspaceFamily, cfg: &RecoveryConfig) -> BTreeMap<usize, Option<f64>> {
    let ad = Adder::new(family.ctx());
    let keys: Vec<usize> = family.iter().map(|(&a, _)| a).collect();
    let scores: Vec<(usize, Option<f64>)> = keys
        .par_iter()
        .map(|&a| {
            let seed = cfg.seed.wrapping_add((a as u64).wrapping_mul(0x2545_F491_4F6C_DD1D));
            let qs = quadruples_through(a, &keys, family, &ad, cfg.consensus_quadruples, cfg.consensus_tries, seed);
            if qs.len() < 4 {
                return (a, None);
            }
            let good = qs.iter().filter(|q| good_at_k1(family, q)).count();
            (a, Some(good as f64 / qs.len() as f64))
        })
        .collect();
    scores.into_iter().collect()
}

fn constraint_rows(ctx: VectorSpaceCtx, a: usize, w: &Subspace) -> Vec<Vec<u32>> {
    let p = ctx.p();
    let av = ctx.decode(a);
    w.basis_vecs()
        .iter()
        .map(|b| av.iter().flat_map(|&ai| b.iter().map(move |&bk| crate::field::mul(ai, bk, p))).collect())
        .collect()
}

fn forms_from_rows(ctx: VectorSpaceCtx, rows: &[Vec<u32>]) -> Vec<Matrix> {
    let n = ctx.n() as usize;
    rows.iter().map(|r| Matrix::from_fn(ctx.p(), n, n, |i, k| r[i * n + k])).collect()
}

/// Bilinear β of dimension d_out with β(a, b) = 0 for b ∈ W_a over a
/// consensus subset of the family.
pub fn step2_fit_bilinear(
    family: &SubspaceFamily,
    d_out: usize,
    cfg: &RecoveryConfig,
) -> Result<(BilinearMap, Vec<usize>, Step2Diagnostics)> {
    let stage = "step2";
    let ctx = family.ctx();
    let n = ctx.n() as usize;
    if family.is_empty() {
        return Err(Error::Stage { stage, reason: "empty family".into() });
    }
    if d_out == 0 || family.codim() == 0 {
        return Err(Error::Stage { stage, reason: "trivial solution space: only the zero form vanishes on W_a = G".into() });
    }
    let mut diag = Step2Diagnostics { family_size: family.len(), d_out, ..Default::default() };
    let scores = consensus_scores(family, cfg);
    let scored: Vec<f64> = scores.values().flatten().copied().collect();
    diag.mean_score = if scored.is_empty() { 0.0 } else { scored.iter().sum::<f64>() / scored.len() as f64 };
    let mut order: Vec<(usize, f64)> = Vec::new();
    for (&a, s) in &scores {
        match s {
            None => {
                diag.unscored += 1;
                order.push((a, 1.0));
            }
            Some(s) if *s >= cfg.consensus_threshold => order.push((a, *s)),
            Some(_) => diag.below_threshold += 1,
        }
    }
    order.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap().then(x.0.cmp(&y.0)));

    let total = n * n;
    let mut constraints = Subspace::zero(ctx.p(), total);
    let mut consensus = Vec::new();
    for &(a, _) in &order {
        let rows = constraint_rows(ctx, a, family.get(a).unwrap());
        let cand = constraints.sum(&Subspace::span(ctx.p(), total, &rows))?;
        if total - cand.dim() >= d_out {
            constraints = cand;
            consensus.push(a);
        } else {
            diag.rejected_by_solve += 1;
        }
    }
    consensus.sort_unstable();
    diag.consensus_size = consensus.len();
    if consensus.is_empty() {
        return Err(Error::Stage { stage, reason: "empty consensus set".into() });
    }
    let solution = constraints.orthogonal_complement();
    diag.solution_dim = solution.dim();
    if solution.dim() == 0 {
        return Err(Error::Stage { stage, reason: "trivial solution space".into() });
    }
    let forms = forms_from_rows(ctx, &solution.basis_vecs());
    let mut ranked: Vec<(usize, usize)> = forms.iter().enumerate().map(|(i, m)| (m.rank(), i)).collect();
    ranked.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
    ranked.truncate(d_out);
    diag.direction_ranks = ranked.iter().map(|r| r.0).collect();
    let chosen: Vec<Matrix> = ranked.iter().map(|&(_, i)| forms[i].clone()).collect();
    Ok((BilinearMap::new(ctx, chosen)?, consensus, diag))
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct QuadrupleCensus {
    pub sampled: usize,
    pub good_k1: usize,
    pub fraction_good: f64,
    /// defect rank → count.
    pub defect_histogram: BTreeMap<usize, usize>,
    pub bound_violations: usize,
    pub max_log_p_k: usize,
}

/// Runs the quadruple isomorphism construction on sampled additive
/// quadruples of the family, with U_i = W_{a_i}^⊥.
pub fn step2_good_quadruple_census(family: &SubspaceFamily, samples: usize, seed: u64) -> Result<QuadrupleCensus> {
    let mut census = QuadrupleCensus::default();
    if family.len() < 4 {
        return Ok(census);
    }
    let ad = Adder::new(family.ctx());
    let keys: Vec<usize> = family.iter().map(|(&a, _)| a).collect();
    let mut rng = rng_from_seed(seed);
    let mut quads = Vec::new();
    for _ in 0..samples * 50 {
        if quads.len() >= samples {
            break;
        }
        let a = keys[rng.gen_range(0..keys.len())];
        let found = quadruples_through(a, &keys, family, &ad, 1, 1, rng.gen());
        quads.extend(found);
    }
    let results: Vec<Result<(usize, usize, bool)>> = quads
        .par_iter()
        .map(|q| {
            let us = perps(family, q);
            let phi4 = LinearMap::basis_map(&us[3]);
            let iso = quadruple_isomorphisms(&us, &phi4, None)?;
            Ok((iso.defect_rank, iso.log_p_k, iso.defect_rank <= iso.bound()))
        })
        .collect();
    for r in results {
        let (defect, log_k, ok) = r?;
        census.sampled += 1;
        census.good_k1 += (log_k == 0) as usize;
        *census.defect_histogram.entry(defect).or_default() += 1;
        census.bound_violations += (!ok) as usize;
        census.max_log_p_k = census.max_log_p_k.max(log_k);
    }
    census.fraction_good = if census.sampled == 0 { 0.0 } else { census.good_k1 as f64 / census.sampled as f64 };
    Ok(census)
}
