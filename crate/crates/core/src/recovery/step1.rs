//! Subspaces W_a from the popular differences of V ∩ (V − a).

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::Serialize;

use crate::counting::{analyze_shift, cube_count, quadruple_count, classify_elements, RegularityOptions, ShiftAnalysis};
use crate::error::{Error, Result};
use crate::family::{FamilyQuality, SubspaceFamily};
use crate::fourier::{iterated_convolution, FourierPlan, RealTable};
use crate::generators::rng_from_seed;
use crate::group::{Adder, GSubset};
use crate::linalg::Subspace;

use super::RecoveryConfig;

#[derive(Clone, Debug, Default, Serialize)]
pub struct Step1Diagnostics {
    /// Cube density, exact or estimated from the candidate shifts.
    pub c0: f64,
    pub c0_sampled: bool,
    pub candidates: usize,
    pub regular: usize,
    pub l2_rejected: usize,
    pub empty_popular: usize,
    pub span_too_small: usize,
    /// codimension → number of elements, before trimming.
    pub codim_histogram: BTreeMap<usize, usize>,
    pub d: usize,
    pub dropped_high_codim: usize,
    pub trimmed: usize,
    pub family_size: usize,
    pub star8_threshold: f64,
    pub star8_checked: u64,
    pub star8_failures: u64,
    pub star8_failing_elements: usize,
    pub quality: Option<FamilyQuality>,
    pub k_max: f64,
}

struct Extracted {
    a: usize,
    w: Subspace,
}

enum Outcome {
    LowMass,
    EmptyPopular,
    SmallSpan,
    Ok(Extracted),
}

/// Greedy span over P, strongest differences first. A generator is kept when
/// the enlarged span stays within the density cap and is mostly popular.
fn greedy_span(sh: &ShiftAnalysis, popular: &[usize], cfg: &RecoveryConfig, max_size: f64, ad: &Adder) -> Vec<usize> {
    let ctx = sh.b.ctx();
    let p = ctx.p() as usize;
    let is_popular = GSubset::from_indices(ctx, popular.iter().copied());
    let mut order = popular.to_vec();
    order.sort_by(|&x, &y| sh.counts[y].cmp(&sh.counts[x]).then(x.cmp(&y)));
    let mut in_w = vec![false; ctx.size()];
    in_w[0] = true;
    let mut members = vec![0usize];
    let mut gens = Vec::new();
    let mut hits = is_popular.contains(0) as usize;
    for &b in &order {
        if in_w[b] {
            continue;
        }
        if (members.len() * p) as f64 > max_size {
            break;
        }
        let new_size = members.len() * p;
        let allowed_miss = ((1.0 - cfg.span_support) * new_size as f64).floor() as usize;
        let mut misses = members.len() - hits;
        let mut added = Vec::with_capacity(new_size - members.len());
        let mut ok = misses <= allowed_miss;
        let mut new_hits = 0usize;
        let mut shift = b;
        'outer: for _ in 1..p {
            for &m in &members {
                let y = ad.add(m, shift);
                if is_popular.contains(y) {
                    new_hits += 1;
                } else {
                    misses += 1;
                    if misses > allowed_miss {
                        ok = false;
                        break 'outer;
                    }
                }
                added.push(y);
            }
            shift = ad.add(shift, b);
        }
        if ok {
            for &y in &added {
                in_w[y] = true;
            }
            members.extend(added);
            hits += new_hits;
            gens.push(b);
        }
    }
    gens
}

fn extract(v: &GSubset, plan: &FourierPlan, ad: &Adder, a: usize, cfg: &RecoveryConfig, delta: f64) -> Outcome {
    let ctx = v.ctx();
    let g = ctx.size() as f64;
    let sh = analyze_shift(plan, v, a);
    let mass = sh.l2_mass();
    let d7 = delta.powi(7);
    if mass < cfg.xi * d7 {
        return Outcome::LowMass;
    }
    let c_prime = mass / d7;
    let tau = cfg.tau_scale * c_prime * delta.powi(3);
    let popular: Vec<usize> = (0..ctx.size()).filter(|&b| sh.counts[b] as f64 >= tau * g).collect();
    if popular.is_empty() {
        return Outcome::EmptyPopular;
    }
    let gens = greedy_span(&sh, &popular, cfg, cfg.k_cap * delta * g, ad);
    let w = Subspace::span_indices(ctx, &gens);
    let size = (ctx.p() as f64).powi(w.dim() as i32);
    if size < delta * g / cfg.k_cap {
        return Outcome::SmallSpan;
    }
    Outcome::Ok(Extracted { a, w })
}

/// Cuts W down to codimension d with the lowest-index coordinate hyperplanes
/// that reduce it.
fn trim_to_codim(w: &Subspace, d: usize) -> Subspace {
    let n = w.ambient_dim();
    let p = w.p();
    let mut cur = w.clone();
    for i in 0..n {
        if cur.codim() >= d {
            break;
        }
        let mut e = vec![0u32; n];
        e[i] = 1;
        let h = Subspace::span(p, n, &[e]).orthogonal_complement();
        let next = cur.intersect(&h).unwrap();
        if next.dim() < cur.dim() {
            cur = next;
        }
    }
    cur
}

/// c0 = cubes / (δ⁷|G|⁴). Above `exact_limit` the cube count is estimated as
/// |G| times the mean of |V ∩ (V − c)|-quadruples over the given shifts.
fn cube_density(v: &GSubset, shifts: &[usize], exact_limit: usize) -> (f64, bool) {
    let ctx = v.ctx();
    let g = ctx.size() as f64;
    let s = v.len() as f64;
    let norm = s.powi(7) / g.powi(3);
    if ctx.size() <= exact_limit {
        return (cube_count(v) as f64 / norm, false);
    }
    let total: f64 = shifts
        .par_iter()
        .map(|&c| quadruple_count(&v.intersection(&v.translate(c)).unwrap()) as f64)
        .sum();
    (g * total / shifts.len() as f64 / norm, true)
}

/// Elements examined: all of G, or a seeded sample when G is larger than the cap.
pub fn candidate_elements(size: usize, max_elements: usize, seed: u64) -> Vec<usize> {
    if size <= max_elements {
        return (0..size).collect();
    }
    let mut rng = rng_from_seed(seed ^ 0x5151_7E11);
    let mut v = sample(&mut rng, size, max_elements).into_vec();
    v.sort_unstable();
    v
}

pub fn step1_build_family(v: &GSubset, cfg: &RecoveryConfig) -> Result<(SubspaceFamily, Step1Diagnostics)> {
    let stage = "step1";
    if v.is_empty() {
        return Err(Error::Stage { stage, reason: "empty input set".into() });
    }
    let ctx = v.ctx();
    let delta = v.density_f64();
    let mut diag = Step1Diagnostics::default();
    let candidates = candidate_elements(ctx.size(), cfg.max_elements, cfg.seed);
    diag.candidates = candidates.len();
    let (c0, sampled) = cube_density(v, &candidates, cfg.c0_exact_limit);
    diag.c0 = c0;
    diag.c0_sampled = sampled;
    if c0 < cfg.c0_min {
        return Err(Error::Stage {
            stage,
            reason: format!("cube density c0 = {c0:.4} is below {}: not an approximate variety", cfg.c0_min),
        });
    }
    let opts = RegularityOptions {
        eta: cfg.eta,
        samples: cfg.regularity_samples as u64,
        seed: cfg.seed,
        exact_limit: cfg.regularity_exact_limit,
    };
    let reg = classify_elements(v, &candidates, &opts)?;
    let regular: Vec<usize> = reg.iter().filter(|e| e.regular).map(|e| e.element).collect();
    diag.regular = regular.len();
    if regular.is_empty() {
        return Err(Error::Stage { stage, reason: "no regular elements".into() });
    }
    let plan = FourierPlan::new(ctx);
    let ad = Adder::new(ctx);
    let outcomes: Vec<Outcome> = regular.par_iter().map(|&a| extract(v, &plan, &ad, a, cfg, delta)).collect();
    let mut found = Vec::new();
    for o in outcomes {
        match o {
            Outcome::LowMass => diag.l2_rejected += 1,
            Outcome::EmptyPopular => diag.empty_popular += 1,
            Outcome::SmallSpan => diag.span_too_small += 1,
            Outcome::Ok(e) => found.push(e),
        }
    }
    if found.is_empty() {
        return Err(Error::Stage {
            stage,
            reason: format!(
                "no subspace found: {} low L² mass, {} without popular differences, {} with too small a span",
                diag.l2_rejected, diag.empty_popular, diag.span_too_small
            ),
        });
    }
    for e in &found {
        *diag.codim_histogram.entry(e.w.codim()).or_default() += 1;
    }
    // most frequent codimension, smaller on ties
    let d = diag.codim_histogram.iter().max_by(|x, y| x.1.cmp(y.1).then(y.0.cmp(x.0))).map(|(&c, _)| c).unwrap();
    diag.d = d;
    let mut members = BTreeMap::new();
    for e in found {
        let c = e.w.codim();
        if c > d {
            diag.dropped_high_codim += 1;
            continue;
        }
        let w = if c < d {
            diag.trimmed += 1;
            trim_to_codim(&e.w, d)
        } else {
            e.w
        };
        members.insert(e.a, w);
    }
    let mut family = SubspaceFamily::new(ctx, members)?;
    diag.family_size = family.len();

    // ⋆^(8) 1_{V∩V−a}(b) for b ∈ W_a
    let threshold = cfg.c1 * delta.powi(15);
    diag.star8_threshold = threshold;
    let checks: Vec<(u64, u64)> = family
        .iter()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(&a, w)| {
            let b = v.intersection(&v.translate(a)).unwrap();
            let star = iterated_convolution(&RealTable::indicator(&b), 8).unwrap();
            let pts = w.indices(ctx).unwrap();
            let fails = pts.iter().filter(|&&x| star.values()[x] < threshold).count() as u64;
            (pts.len() as u64, fails)
        })
        .collect();
    for (c, f) in checks {
        diag.star8_checked += c;
        diag.star8_failures += f;
        diag.star8_failing_elements += (f > 0) as usize;
    }

    let k_max = cfg.k_max.unwrap_or((ctx.p() as f64).powi(3));
    diag.k_max = k_max;
    let q = family.measure_quality(cfg.quality_max_r, cfg.quality_samples, cfg.k_cap, cfg.seed).clone();
    diag.quality = Some(q.clone());
    if q.k > k_max {
        return Err(Error::Stage {
            stage,
            reason: format!("family intersections exceed generic size by K = {:.3} > {k_max}", q.k),
        });
    }
    Ok((family, diag))
}
