//! Exact censuses of additive patterns.
//!
//! Fast paths work through the character transform but only ever round
//! quantities bounded by |G| (autocorrelations and cross-correlations), then
//! combine them in integer arithmetic.

mod naive;
mod regularity;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::{BigRational, Ratio};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::SubspaceFamily;
use crate::fourier::{round_count, FourierPlan};
use crate::group::{Adder, GSubset};
use crate::linalg::{Matrix, Subspace};

pub use naive::{config10_count_naive, cube_census_naive, cube_count_naive, quadruple_count_naive};
pub use regularity::{
    analyze_shift, classify_elements, regularity_classify, ElementRegularity, RegularityOptions, RegularityReport, ShiftAnalysis,
};

/// Counts of the three patterns on one set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PatternCensus {
    pub quadruples: u128,
    pub cubes: u128,
    pub seven_point: u128,
    pub config10: Option<u128>,
}

/// Rounded |G| · inverse(f̂ · conj(ĝ)): the counts Σ_y f(y + d) g(y).
pub fn correlation_counts(plan: &FourierPlan, f_spec: &[Complex64], g_spec: &[Complex64]) -> Vec<u64> {
    let size = plan.ctx().size() as f64;
    let mut v: Vec<Complex64> = f_spec.iter().zip(g_spec).map(|(a, b)| a * b.conj() * size).collect();
    plan.inverse_in_place(&mut v);
    v.iter().map(|c| round_count(c.re)).collect()
}

/// R(d) = |A ∩ (A − d)| for every d.
pub fn difference_counts(a: &GSubset) -> Vec<u64> {
    FourierPlan::new(a.ctx()).autocorrelation_counts(a)
}

/// #{(x, y, z, w) ∈ A⁴ : x + y = z + w} = Σ_d R(d)².
pub fn quadruple_count(a: &GSubset) -> u128 {
    difference_counts(a).iter().map(|&r| (r as u128) * (r as u128)).sum()
}

/// |G|³ Σ_r |1̂_A(r)|⁴ evaluated in floating point.
pub fn quadruple_count_spectral(a: &GSubset) -> f64 {
    let plan = FourierPlan::new(a.ctx());
    let s: f64 = plan.forward_set(a).iter().map(|c| c.norm_sqr() * c.norm_sqr()).sum();
    s * (a.ctx().size() as f64).powi(3)
}

fn shifted_intersection(v: &GSubset, shift: &[u32]) -> Vec<Complex64> {
    (0..v.ctx().size())
        .map(|x| {
            let inside = v.contains(x) && v.contains(shift[x] as usize);
            Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)
        })
        .collect()
}

/// Number of (x, a, b, c) with all eight cube points in V.
///
/// Summed over c as quadruple counts of V ∩ (V − c); c and −c contribute equally.
pub fn cube_count(v: &GSubset) -> u128 {
    let ctx = v.ctx();
    let plan = FourierPlan::new(ctx);
    let neg = ctx.neg_table();
    let reps: Vec<usize> = (0..ctx.size()).filter(|&c| c <= neg[c] as usize).collect();
    reps.par_iter()
        .map(|&c| {
            let mut b = shifted_intersection(v, &ctx.shift_table(c));
            plan.forward_in_place(&mut b);
            let q: u128 = plan.counts_from_power(&b).iter().map(|&r| (r as u128) * (r as u128)).sum();
            if c == neg[c] as usize {
                q
            } else {
                2 * q
            }
        })
        .sum()
}

/// Cubes together with seven-point configurations (all points but x+a+b+c).
pub fn cube_census(v: &GSubset) -> (u128, u128) {
    let ctx = v.ctx();
    let plan = FourierPlan::new(ctx);
    let v_spec = plan.forward_set(v);
    let per_c: Vec<(u128, u128)> = (0..ctx.size())
        .into_par_iter()
        .map(|c| {
            let mut b = shifted_intersection(v, &ctx.shift_table(c));
            plan.forward_in_place(&mut b);
            let r = plan.counts_from_power(&b);
            let cross = correlation_counts(&plan, &v_spec, &b);
            let q = r.iter().map(|&x| (x as u128) * (x as u128)).sum();
            let s = r.iter().zip(&cross).map(|(&x, &y)| (x as u128) * (y as u128)).sum();
            (q, s)
        })
        .collect();
    per_c.iter().fold((0, 0), |acc, &(q, s)| (acc.0 + q, acc.1 + s))
}

/// P(x+a+b+c ∈ V | the other seven cube points are in V), exactly.
pub fn cube_completion_probability(v: &GSubset) -> Result<Ratio<u128>> {
    let (cubes, seven) = cube_census(v);
    if seven == 0 {
        return Err(Error::Precondition("no seven-point configurations (empty set)".into()));
    }
    Ok(Ratio::new(cubes, seven))
}

/// c₀ = cubes / (δ⁷ |G|⁴) = cubes · |G|³ / |V|⁷.
pub fn c0_from_cubes(v: &GSubset, cubes: u128) -> BigRational {
    let g = BigInt::from(v.ctx().size());
    let s = BigInt::from(v.len());
    BigRational::new(BigInt::from(cubes) * g.pow(3), s.pow(7))
}

/// Σ_z 1_A(z) 1_A(t − z) for every t.
pub fn sum_counts(a: &GSubset) -> Vec<u64> {
    let plan = FourierPlan::new(a.ctx());
    let spec = plan.forward_set(a);
    let size = a.ctx().size() as f64;
    let mut v: Vec<Complex64> = spec.iter().map(|c| c * c * size).collect();
    plan.inverse_in_place(&mut v);
    v.iter().map(|c| round_count(c.re)).collect()
}

/// Number of (b1, b2, b3, x2, y3, z1) with all ten configuration points in A.
///
/// Equals Σ over (b1, b2, b3) with b1+b2−b3 ∈ A of R(b3−b2)·R(b1−b3)·s(b1+b2),
/// where R is the difference count and s the sum count of A.
pub fn config10_count(a: &GSubset) -> u128 {
    let ad = Adder::new(a.ctx());
    let r = difference_counts(a);
    let s = sum_counts(a);
    let elems: Vec<usize> = a.iter().collect();
    elems
        .par_iter()
        .map(|&b1| {
            let mut acc = 0u128;
            for &b2 in &elems {
                let t = ad.add(b1, b2);
                let st = s[t] as u128;
                if st == 0 {
                    continue;
                }
                for &b3 in &elems {
                    if !a.contains(ad.sub(t, b3)) {
                        continue;
                    }
                    acc += r[ad.sub(b3, b2)] as u128 * r[ad.sub(b1, b3)] as u128 * st;
                }
            }
            acc
        })
        .sum()
}

/// Whether count ≥ c³² |G|⁶ with c = |A|/|G|, compared exactly.
pub fn config10_meets_density_bound(a: &GSubset, count: u128) -> bool {
    let g = BigInt::from(a.ctx().size());
    let s = BigInt::from(a.len());
    BigInt::from(count) * g.pow(26) >= s.pow(32)
}

pub fn pattern_census(a: &GSubset, with_config10: bool) -> PatternCensus {
    let (cubes, seven_point) = cube_census(a);
    PatternCensus {
        quadruples: quadruple_count(a),
        cubes,
        seven_point,
        config10: with_config10.then(|| config10_count(a)),
    }
}

/// Same census by direct enumeration.
pub fn pattern_census_naive(a: &GSubset, with_config10: bool) -> PatternCensus {
    let (cubes, seven_point) = cube_census_naive(a);
    PatternCensus {
        quadruples: quadruple_count_naive(a),
        cubes,
        seven_point,
        config10: with_config10.then(|| config10_count_naive(a)),
    }
}

/// {b : 1_{V∩V−a} ⋆ 1_{V∩V−a}(b) ≥ τ}.
pub fn popular_difference_set(v: &GSubset, a: usize, tau: f64) -> Result<GSubset> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!("τ = {tau} must be positive")));
    }
    let b = v.intersection(&v.translate(a))?;
    let counts = difference_counts(&b);
    let size = v.ctx().size() as f64;
    Ok(GSubset::from_index_predicate(v.ctx(), |x| counts[x] as f64 >= tau * size))
}

/// E_{a1..ar} (|V ∩ (V−a1) ∩ … ∩ (V−ar)|/|G| − δ^{r+1})², exactly.
///
/// Expanding the square leaves Σ_d R(d)^{r+1} / |G|^{r+2} − δ^{2r+2}.
pub fn intersection_variance(v: &GSubset, r: u32) -> BigRational {
    let g = BigInt::from(v.ctx().size());
    let s = BigInt::from(v.len());
    let moment: BigInt = difference_counts(v).iter().map(|&x| BigInt::from(x).pow(r + 1)).sum();
    BigRational::new(moment, g.pow(r + 2)) - BigRational::new(s.pow(2 * r + 2), g.pow(2 * r + 2))
}

/// Result of the ten-point census restricted by a subspace family.
#[derive(Clone, Debug, Serialize)]
pub struct Config10Census {
    /// Tuples with all ten points in A and in the family's index set.
    pub counted: u128,
    /// Counted tuples whose ten-fold W-intersection has size ≥ threshold·|G|.
    pub qualifying: u128,
    /// Tuples with all points in A but some point outside the family.
    pub skipped: u128,
    pub sampled: bool,
    pub samples: u64,
}

/// Exact enumeration when the number of b-triples is at most this.
const CENSUS_EXACT_LIMIT: u128 = 2_000_000;

/// Counts ten-point configurations in A whose subspaces W_t intersect in at
/// least threshold·|G| points. Large instances are sampled uniformly over
/// A⁶ with the given seed; counts are then scaled estimates.
pub fn config10_subspace_census(
    a: &GSubset,
    family: &SubspaceFamily,
    threshold: f64,
    samples: u64,
    seed: u64,
) -> Result<Config10Census> {
    let ctx = a.ctx();
    ctx.check_same(&family.ctx())?;
    let ad = Adder::new(ctx);
    let elems: Vec<usize> = a.iter().collect();
    let perps: std::collections::BTreeMap<usize, Matrix> =
        family.iter().map(|(&x, w)| (x, w.orthogonal_complement().basis().clone())).collect();
    let n = ctx.n() as usize;
    let p = ctx.p();
    let min_size = threshold * ctx.size() as f64;
    let judge = |pts: &[usize; 10]| -> Option<bool> {
        let mut rows: Option<Matrix> = None;
        for x in pts {
            let m = perps.get(x)?;
            rows = Some(match rows {
                None => m.clone(),
                Some(r) => r.vstack(m).unwrap(),
            });
        }
        let rank = rows.map(|r| r.rank()).unwrap_or(0);
        let dim = n - rank;
        Some((p as f64).powi(dim as i32) >= min_size)
    };
    let points = |b1: usize, b2: usize, b3: usize, x2: usize, y3: usize, z1: usize| -> [usize; 10] {
        let s = ad.add(b1, b2);
        [b1, b2, b3, ad.sub(s, b3), x2, ad.add(ad.sub(x2, b2), b3), y3, ad.add(ad.sub(y3, b3), b1), z1, ad.sub(s, z1)]
    };
    let mut out = Config10Census { counted: 0, qualifying: 0, skipped: 0, sampled: false, samples: 0 };
    let m = elems.len() as u128;
    if m.pow(3) <= CENSUS_EXACT_LIMIT && m.pow(6) <= CENSUS_EXACT_LIMIT * 64 {
        for &b1 in &elems {
            for &b2 in &elems {
                for &b3 in &elems {
                    for &x2 in &elems {
                        for &y3 in &elems {
                            for &z1 in &elems {
                                let pts = points(b1, b2, b3, x2, y3, z1);
                                if !pts.iter().all(|&t| a.contains(t)) {
                                    continue;
                                }
                                match judge(&pts) {
                                    None => out.skipped += 1,
                                    Some(q) => {
                                        out.counted += 1;
                                        out.qualifying += q as u128;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        return Ok(out);
    }
    if elems.is_empty() {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut counted, mut qualifying, mut skipped) = (0u64, 0u64, 0u64);
    for _ in 0..samples {
        let mut pick = || elems[rng.gen_range(0..elems.len())];
        let pts = points(pick(), pick(), pick(), pick(), pick(), pick());
        if !pts.iter().all(|&t| a.contains(t)) {
            continue;
        }
        match judge(&pts) {
            None => skipped += 1,
            Some(q) => {
                counted += 1;
                qualifying += q as u64;
            }
        }
    }
    let scale = |c: u64| ((c as f64 / samples.max(1) as f64) * (m as f64).powi(6)).round() as u128;
    out.counted = scale(counted);
    out.qualifying = scale(qualifying);
    out.skipped = scale(skipped);
    out.sampled = true;
    out.samples = samples;
    Ok(out)
}

/// Subspace membership of a set, as a helper for census corpora.
pub fn subspace_set(ctx: crate::group::VectorSpaceCtx, s: &Subspace) -> Result<GSubset> {
    s.to_subset(ctx)
}
