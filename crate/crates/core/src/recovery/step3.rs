//! From a bilinear map to a quadratic variety: symmetrize, read off the
//! preferred value of γ(a, ·) on V ∩ (V − a), fit an affine map to it, and
//! pick the best level set.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field;
use crate::forms::{decode_vec, encode_vec, BilinearMap, QuadraticVariety};
use crate::generators::rng_from_seed;
use crate::group::GSubset;
use crate::linalg::{AffineMap, LinearMap, Matrix};

use super::RecoveryConfig;

#[derive(Clone, Debug, Default, Serialize)]
pub struct Step3Diagnostics {
    pub d_fit: usize,
    pub gated: usize,
    pub agreement: usize,
    pub agreement_fraction: f64,
    pub low_confidence: bool,
    pub trials: usize,
    /// Coordinates of γ kept after pruning.
    pub kept_directions: Vec<usize>,
    pub d_tilde: usize,
}

#[derive(Clone, Debug)]
pub struct Step3Output {
    pub gamma: BilinearMap,
    pub psi: AffineMap,
    pub mu: Vec<u32>,
    pub variety: QuadraticVariety,
    pub set: GSubset,
    pub overlap: f64,
    pub size_ratio: f64,
    pub diagnostics: Step3Diagnostics,
}

/// Lexicographic order on vectors of F_p^d given as little-endian codes.
fn lex_key(p: u32, d: usize, code: usize) -> Vec<u32> {
    decode_vec(p, d, code)
}

/// Solves ψ(x) = Lx + c through n + 1 points; None if they are affinely dependent.
fn affine_through(p: u32, n: usize, d: usize, pts: &[Vec<u32>], vals: &[Vec<u32>]) -> Option<AffineMap> {
    let rows: Vec<Vec<u32>> = pts
        .iter()
        .map(|x| {
            let mut r = x.clone();
            r.push(1);
            r
        })
        .collect();
    let m = Matrix::from_rows(p, n + 1, &rows);
    let inv = m.inverse()?;
    // column j of the solution holds the coefficients of output coordinate j
    let rhs = Matrix::from_fn(p, n + 1, d, |i, j| vals[i][j]);
    let sol = inv.mul(&rhs).ok()?;
    let linear = Matrix::from_fn(p, d, n, |j, k| sol.get(k, j));
    let offset: Vec<u32> = (0..d).map(|j| sol.get(n, j)).collect();
    AffineMap::new(LinearMap::new(linear), offset).ok()
}

pub fn step3_extract_variety(v: &GSubset, beta: &BilinearMap, cfg: &RecoveryConfig) -> Result<Step3Output> {
    let stage = "step3";
    let ctx = v.ctx();
    ctx.check_same(&beta.ctx())?;
    if v.is_empty() {
        return Err(Error::Stage { stage, reason: "empty input set".into() });
    }
    let p = ctx.p();
    let n = ctx.n() as usize;
    let size = ctx.size();
    let gamma = beta.symmetrize();
    let d = gamma.d();
    let mut diag = Step3Diagnostics { d_fit: d, ..Default::default() };
    let half = field::half(p);
    let coords: Vec<Vec<u32>> = (0..size).map(|x| ctx.decode(x)).collect();
    // q(x) = ½γ(x, x)
    let q: Vec<Vec<u32>> =
        coords.iter().map(|x| gamma.eval(x, x).into_iter().map(|c| field::mul(c, half, p)).collect()).collect();
    let delta = v.density_f64();
    let gate = 0.5 * delta * delta * size as f64;
    let codes = (p as usize).pow(d as u32);

    // μ̃(a) = argmax_μ ρ_a(μ) + q(a) for a passing the density gate
    let per_a: Vec<Option<Vec<u32>>> = (0..size)
        .into_par_iter()
        .map(|a| {
            let shift = ctx.shift_table(a);
            let b: Vec<usize> = v.iter().filter(|&x| v.contains(shift[x] as usize)).collect();
            if (b.len() as f64) < gate {
                return None;
            }
            let rows: Vec<Vec<u32>> = gamma.matrices().iter().map(|m| m.transpose().mul_vec(&coords[a])).collect();
            let mut rho = vec![0u32; codes];
            for &x in &b {
                let val: Vec<u32> = rows
                    .iter()
                    .map(|r| r.iter().zip(&coords[x]).fold(0, |acc, (&s, &t)| field::add(acc, field::mul(s, t, p), p)))
                    .collect();
                rho[encode_vec(p, &val)] += 1;
            }
            let best = (0..codes)
                .max_by(|&i, &j| rho[i].cmp(&rho[j]).then_with(|| lex_key(p, d, j).cmp(&lex_key(p, d, i))))
                .unwrap();
            let mu = decode_vec(p, d, best);
            Some(mu.iter().zip(&q[a]).map(|(&m, &qa)| field::add(m, qa, p)).collect())
        })
        .collect();
    let gated: Vec<usize> = (0..size).filter(|&a| per_a[a].is_some()).collect();
    diag.gated = gated.len();
    if gated.is_empty() {
        return Err(Error::Stage { stage, reason: "no element passes the density gate".into() });
    }

    // affine fit by random minimal samples, keeping the best agreement
    let mut best: Option<(usize, AffineMap)> = None;
    let mut rng = rng_from_seed(cfg.seed ^ 0xA5A5_0003);
    let mut trials = 0;
    if d == 0 {
        best = Some((gated.len(), AffineMap::zero(p, n, 0)));
    } else if gated.len() > n {
        for _ in 0..cfg.ransac_trials {
            let mut fit = None;
            for _ in 0..20 {
                let pick = rand::seq::index::sample(&mut rng, gated.len(), n + 1);
                let pts: Vec<Vec<u32>> = pick.iter().map(|i| coords[gated[i]].clone()).collect();
                let vals: Vec<Vec<u32>> = pick.iter().map(|i| per_a[gated[i]].clone().unwrap()).collect();
                if let Some(f) = affine_through(p, n, d, &pts, &vals) {
                    fit = Some(f);
                    break;
                }
            }
            let Some(f) = fit else { continue };
            trials += 1;
            let agree = gated.iter().filter(|&&a| f.apply(&coords[a]) == *per_a[a].as_ref().unwrap()).count();
            if best.as_ref().map_or(true, |(b, _)| agree > *b) {
                best = Some((agree, f));
            }
        }
    }
    diag.trials = trials;
    let (agree, psi) = best.unwrap_or((0, AffineMap::zero(p, n, d)));
    diag.agreement = agree;
    diag.agreement_fraction = agree as f64 / gated.len() as f64;
    diag.low_confidence = diag.agreement_fraction < 0.1;

    // residual r(x) = q(x) − ψ(x); choose the level most populated by V
    let resid: Vec<usize> = (0..size)
        .map(|x| {
            let l = psi.apply(&coords[x]);
            let r: Vec<u32> = q[x].iter().zip(&l).map(|(&a, &b)| field::sub(a, b, p)).collect();
            encode_vec(p, &r)
        })
        .collect();
    let mut level = vec![0u64; codes];
    for x in v.iter() {
        level[resid[x]] += 1;
    }
    let mu_code = (0..codes)
        .max_by(|&i, &j| level[i].cmp(&level[j]).then_with(|| lex_key(p, d, j).cmp(&lex_key(p, d, i))))
        .unwrap();
    let mu = decode_vec(p, d, mu_code);

    // keep the subset of coordinates whose level set best matches V
    let masks = 1usize << d;
    let mut zero_g = vec![0u64; masks];
    let mut zero_v = vec![0u64; masks];
    for x in 0..size {
        let r = decode_vec(p, d, resid[x]);
        let z = (0..d).filter(|&i| r[i] == mu[i]).fold(0usize, |acc, i| acc | (1 << i));
        zero_g[z] += 1;
        if v.contains(x) {
            zero_v[z] += 1;
        }
    }
    let vs = v.len() as f64;
    let mut best_mask = 0usize;
    let mut best_score = f64::MIN;
    for mask in 0..masks {
        let (mut qg, mut qv) = (0u64, 0u64);
        for z in 0..masks {
            if z & mask == mask {
                qg += zero_g[z];
                qv += zero_v[z];
            }
        }
        let score = if qg == 0 { 0.0 } else { (qv as f64).powi(2) / (qg as f64 * vs) };
        let better = score > best_score + 1e-12
            || ((score - best_score).abs() <= 1e-12 && mask.count_ones() > best_mask.count_ones());
        if better {
            best_score = score;
            best_mask = mask;
        }
    }
    let kept: Vec<usize> = (0..d).filter(|&i| best_mask >> i & 1 == 1).collect();
    diag.kept_directions = kept.clone();
    diag.d_tilde = kept.len();

    let gamma_k = gamma.select(&kept);
    let psi_k = AffineMap::new(
        LinearMap::new(psi.linear.matrix().select_rows(&kept)),
        kept.iter().map(|&i| psi.offset[i]).collect(),
    )?;
    let mu_k: Vec<u32> = kept.iter().map(|&i| mu[i]).collect();
    // ½γ(x,x) − ψ(x) = μ  ⇔  γ(x,x) − 2ψ(x) = 2μ
    let two = 2 % p;
    let psi2 = AffineMap::new(
        LinearMap::new(psi_k.linear.matrix().scale(two)),
        psi_k.offset.iter().map(|&c| field::mul(c, two, p)).collect(),
    )?;
    let mu2: Vec<u32> = mu_k.iter().map(|&c| field::mul(c, two, p)).collect();
    let variety = QuadraticVariety::new(gamma_k.clone(), psi2, mu2)?;
    let set = variety.membership();
    let inter = set.intersection(v)?.len() as f64;
    Ok(Step3Output {
        gamma: gamma_k,
        psi: psi_k,
        mu: mu_k,
        overlap: inter / vs,
        size_ratio: set.len() as f64 / vs,
        variety,
        set,
        diagnostics: diag,
    })
}
