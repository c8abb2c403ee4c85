//! Character transform on F_p^n, convolutions and Gowers norms.
//!
//! Conventions: f̂(r) = E_x f(x) ω^{−r·x} with ω = exp(2πi/p), and
//! f⋆g(x) = E_y f(y + x) conj(g(y)), so that (f⋆g)^ = f̂ · conj(ĝ).

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::{GSubset, VectorSpaceCtx};
use crate::linalg::Subspace;

/// Real-valued function on G.
#[derive(Clone, Debug, PartialEq)]
pub struct RealTable {
    ctx: VectorSpaceCtx,
    values: Vec<f64>,
}

impl RealTable {
    pub fn new(ctx: VectorSpaceCtx, values: Vec<f64>) -> Result<Self> {
        if values.len() != ctx.size() {
            return Err(Error::BadLength { expected: ctx.size(), got: values.len() });
        }
        Ok(Self { ctx, values })
    }

    pub fn constant(ctx: VectorSpaceCtx, c: f64) -> Self {
        Self { ctx, values: vec![c; ctx.size()] }
    }

    pub fn indicator(set: &GSubset) -> Self {
        Self { ctx: set.ctx(), values: set.indicator() }
    }

    pub fn from_fn(ctx: VectorSpaceCtx, f: impl Fn(usize) -> f64) -> Self {
        Self { ctx, values: (0..ctx.size()).map(f).collect() }
    }

    pub fn ctx(&self) -> VectorSpaceCtx {
        self.ctx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Pointwise f − c.
    pub fn shifted(&self, c: f64) -> Self {
        Self { ctx: self.ctx, values: self.values.iter().map(|v| v - c).collect() }
    }
}

/// Fourier coefficients f̂(r), indexed like G.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierTable {
    ctx: VectorSpaceCtx,
    values: Vec<Complex64>,
}

impl FourierTable {
    pub fn ctx(&self) -> VectorSpaceCtx {
        self.ctx
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, r: usize) -> Complex64 {
        self.values[r]
    }

    /// max_{r ≠ 0} |f̂(r)|.
    pub fn max_nontrivial(&self) -> f64 {
        self.values[1..].iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn fourth_moment(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr() * v.norm_sqr()).sum()
    }
}

/// Twiddle factors and dimensions for repeated transforms on one group.
#[derive(Clone, Debug)]
pub struct FourierPlan {
    ctx: VectorSpaceCtx,
    roots: Vec<Complex64>,
}

impl FourierPlan {
    pub fn new(ctx: VectorSpaceCtx) -> Self {
        let p = ctx.p() as usize;
        let roots = (0..p)
            .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / p as f64))
            .collect();
        Self { ctx, roots }
    }

    pub fn ctx(&self) -> VectorSpaceCtx {
        self.ctx
    }

    /// ω^k for k in [0, p).
    pub fn root(&self, k: usize) -> Complex64 {
        self.roots[k]
    }

    /// In place: v ↦ Σ_x v(x) ω^{sign·r·x}, unnormalised.
    fn transform(&self, v: &mut [Complex64], sign: i64) {
        let p = self.ctx.p() as usize;
        let size = self.ctx.size();
        assert_eq!(v.len(), size);
        let tw: Vec<Complex64> = (0..p).map(|k| self.roots[((sign * k as i64).rem_euclid(p as i64)) as usize]).collect();
        let mut line = vec![Complex64::new(0.0, 0.0); p];
        let mut stride = 1usize;
        for _ in 0..self.ctx.n() {
            let block = stride * p;
            for start in (0..size).step_by(block) {
                for j in 0..stride {
                    let base = start + j;
                    for (k, l) in line.iter_mut().enumerate() {
                        *l = v[base + k * stride];
                    }
                    if p == 3 {
                        let (a, b, c) = (line[0], line[1], line[2]);
                        v[base] = a + b + c;
                        v[base + stride] = a + b * tw[1] + c * tw[2];
                        v[base + 2 * stride] = a + b * tw[2] + c * tw[1];
                    } else {
                        for r in 0..p {
                            let mut acc = Complex64::new(0.0, 0.0);
                            let mut e = 0usize;
                            for l in line.iter() {
                                acc += l * tw[e];
                                e += r;
                                if e >= p {
                                    e -= p;
                                }
                            }
                            v[base + r * stride] = acc;
                        }
                    }
                }
            }
            stride = block;
        }
    }

    /// Normalised forward transform in place.
    pub fn forward_in_place(&self, v: &mut [Complex64]) {
        self.transform(v, -1);
        let scale = 1.0 / self.ctx.size() as f64;
        for x in v.iter_mut() {
            *x *= scale;
        }
    }

    /// Inverse transform in place: f(x) = Σ_r f̂(r) ω^{r·x}.
    pub fn inverse_in_place(&self, v: &mut [Complex64]) {
        self.transform(v, 1);
    }

    pub fn forward_real(&self, f: &[f64]) -> Vec<Complex64> {
        let mut v: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward_in_place(&mut v);
        v
    }

    /// Fourier coefficients of an indicator.
    pub fn forward_set(&self, set: &GSubset) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); self.ctx.size()];
        for x in set.iter() {
            v[x] = Complex64::new(1.0, 0.0);
        }
        self.forward_in_place(&mut v);
        v
    }

    /// |G| · (1_B ⋆ 1_B)(b) for every b, computed through the spectrum.
    pub fn autocorrelation_counts(&self, set: &GSubset) -> Vec<u64> {
        let spec = self.forward_set(set);
        self.counts_from_power(&spec)
    }

    /// Rounds |G|² · inverse(|f̂|²) to integers; used for autocorrelations.
    pub fn counts_from_power(&self, spec: &[Complex64]) -> Vec<u64> {
        let size = self.ctx.size() as f64;
        let mut v: Vec<Complex64> = spec.iter().map(|c| Complex64::new(c.norm_sqr() * size, 0.0)).collect();
        self.inverse_in_place(&mut v);
        v.iter().map(|c| round_count(c.re)).collect()
    }
}

/// Rounds a value that must be a nonnegative integer, asserting closeness.
pub fn round_count(x: f64) -> u64 {
    let r = x.round();
    let tol = 1e-6_f64.max(1e-12 * x.abs());
    assert!((x - r).abs() <= tol && r >= 0.0, "value {x} is not within {tol} of a nonnegative integer");
    r as u64
}

pub fn fourier(f: &RealTable) -> FourierTable {
    let plan = FourierPlan::new(f.ctx);
    FourierTable { ctx: f.ctx, values: plan.forward_real(&f.values) }
}

pub fn fourier_set(set: &GSubset) -> FourierTable {
    let plan = FourierPlan::new(set.ctx());
    FourierTable { ctx: set.ctx(), values: plan.forward_set(set) }
}

pub fn inverse_fourier(t: &FourierTable) -> Vec<Complex64> {
    let plan = FourierPlan::new(t.ctx);
    let mut v = t.values.clone();
    plan.inverse_in_place(&mut v);
    v
}

/// Inverse transform keeping real parts; the caller knows the result is real.
pub fn inverse_fourier_real(t: &FourierTable) -> RealTable {
    RealTable { ctx: t.ctx, values: inverse_fourier(t).iter().map(|c| c.re).collect() }
}

pub fn convolve(f: &RealTable, g: &RealTable) -> Result<RealTable> {
    f.ctx.check_same(&g.ctx)?;
    let plan = FourierPlan::new(f.ctx);
    let ff = plan.forward_real(&f.values);
    let gg = plan.forward_real(&g.values);
    let mut prod: Vec<Complex64> = ff.iter().zip(&gg).map(|(a, b)| a * b.conj()).collect();
    plan.inverse_in_place(&mut prod);
    Ok(RealTable { ctx: f.ctx, values: prod.iter().map(|c| c.re).collect() })
}

/// ⋆^(2k) f(a) = E f(x1)…f(x_{2k−1}) f(x1 − x2 + … + x_{2k−1} − a).
///
/// Its spectrum is |f̂|^{2k}, read off at −a.
pub fn iterated_convolution(f: &RealTable, order: usize) -> Result<RealTable> {
    if order < 2 || order % 2 == 1 {
        return Err(Error::InvalidParameter(format!("iterated convolution order {order} must be even and ≥ 2")));
    }
    let k = (order / 2) as i32;
    let plan = FourierPlan::new(f.ctx);
    let spec = plan.forward_real(&f.values);
    let mut v: Vec<Complex64> = spec.iter().map(|c| Complex64::new(c.norm_sqr().powi(k), 0.0)).collect();
    plan.inverse_in_place(&mut v);
    let ctx = f.ctx;
    Ok(RealTable { ctx, values: (0..ctx.size()).map(|a| v[ctx.neg_idx(a)].re).collect() })
}

/// ‖f‖_{U²}⁴ = Σ_r |f̂(r)|⁴.
pub fn u2_norm4(f: &RealTable) -> f64 {
    fourier(f).fourth_moment()
}

pub fn u2_norm(f: &RealTable) -> f64 {
    u2_norm4(f).max(0.0).powf(0.25)
}

/// ‖f‖_{U³}⁸ = E_c ‖Δ_c f‖_{U²}⁴ with Δ_c f(x) = f(x + c) f(x).
pub fn u3_norm8(f: &RealTable) -> f64 {
    let ctx = f.ctx;
    let plan = FourierPlan::new(ctx);
    let per_c: Vec<f64> = (0..ctx.size())
        .into_par_iter()
        .map(|c| {
            let t = ctx.shift_table(c);
            let mut v: Vec<Complex64> =
                (0..ctx.size()).map(|x| Complex64::new(f.values[t[x] as usize] * f.values[x], 0.0)).collect();
            plan.forward_in_place(&mut v);
            v.iter().map(|z| z.norm_sqr() * z.norm_sqr()).sum()
        })
        .collect();
    per_c.iter().sum::<f64>() / ctx.size() as f64
}

pub fn u3_norm(f: &RealTable) -> f64 {
    u3_norm8(f).max(0.0).powf(0.125)
}

/// max over k ∉ K^⊥ of |E_{x∈K} 1_A(x + t) ω^{−k·x}|.
///
/// Such coefficients depend on k only through the character it induces on
/// K, so the maximum is taken over the nontrivial characters of K ≅ F_p^m.
pub fn restricted_fourier_max(a: &GSubset, k: &Subspace, t: usize) -> Result<f64> {
    let ctx = a.ctx();
    if k.p() != ctx.p() || k.ambient_dim() != ctx.n() as usize {
        return Err(Error::DimensionMismatch("subspace and set live in different groups".into()));
    }
    if k.dim() == 0 {
        return Ok(0.0);
    }
    let local = VectorSpaceCtx::new(ctx.p(), k.dim() as u32)?;
    let coset = k.coset_indices(ctx, t)?;
    let g = RealTable { ctx: local, values: coset.iter().map(|&x| if a.contains(x) { 1.0 } else { 0.0 }).collect() };
    Ok(fourier(&g).max_nontrivial())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ctx(p: u32, n: u32) -> VectorSpaceCtx {
        VectorSpaceCtx::new(p, n).unwrap()
    }

    // Direct O(|G|²) evaluation of the defining sum.
    fn brute_fourier(f: &RealTable) -> Vec<Complex64> {
        let g = f.ctx;
        let plan = FourierPlan::new(g);
        (0..g.size())
            .map(|r| {
                let mut acc = Complex64::new(0.0, 0.0);
                for x in 0..g.size() {
                    let e = (g.p() - g.dot_idx(r, x)) % g.p();
                    acc += plan.root(e as usize) * f.values[x];
                }
                acc / g.size() as f64
            })
            .collect()
    }

    fn random_table(g: VectorSpaceCtx, rng: &mut impl Rng) -> RealTable {
        RealTable::new(g, (0..g.size()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn matches_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (p, n) in [(3, 1), (3, 3), (5, 2), (7, 2)] {
            let f = random_table(ctx(p, n), &mut rng);
            let fast = fourier(&f);
            for (a, b) in fast.values().iter().zip(brute_fourier(&f)) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_and_subspace() {
        let g = ctx(3, 2);
        let t = fourier(&RealTable::constant(g, 2.5));
        assert!((t.get(0).re - 2.5).abs() < 1e-12);
        assert!(t.values()[1..].iter().all(|c| c.norm() < 1e-12));
        let h = Subspace::span(3, 2, &[vec![1, 2]]);
        let hp = h.orthogonal_complement();
        let t = fourier_set(&h.to_subset(g).unwrap());
        for r in 0..g.size() {
            let expect = if hp.contains(&g.decode(r)) { 1.0 / 3.0 } else { 0.0 };
            assert!((t.get(r) - Complex64::new(expect, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn inversion_and_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for i in 0..100 {
            let g = ctx([3, 5][i % 2], 1 + (i % 4) as u32);
            let f = random_table(g, &mut rng);
            let t = fourier(&f);
            let back = inverse_fourier_real(&t);
            for (a, b) in back.values().iter().zip(f.values()) {
                assert!((a - b).abs() < 1e-9);
            }
            let lhs: f64 = t.values().iter().map(|c| c.norm_sqr()).sum();
            let rhs = f.values().iter().map(|v| v * v).sum::<f64>() / g.size() as f64;
            assert!((lhs - rhs).abs() < 1e-9);
        }
    }

    #[test]
    fn convolution_examples() {
        let g = ctx(3, 2);
        let one = RealTable::constant(g, 1.0);
        assert!(convolve(&one, &one).unwrap().values().iter().all(|v| (v - 1.0).abs() < 1e-12));
        let h = Subspace::span(3, 2, &[vec![1, 1]]).to_subset(g).unwrap();
        let c = convolve(&RealTable::indicator(&h), &RealTable::indicator(&h)).unwrap();
        for x in 0..g.size() {
            let expect = if h.contains(x) { 1.0 / 3.0 } else { 0.0 };
            assert!((c.values()[x] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn convolution_matches_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = ctx(5, 2);
        let f = random_table(g, &mut rng);
        let h = random_table(g, &mut rng);
        let c = convolve(&f, &h).unwrap();
        for x in 0..g.size() {
            let direct: f64 =
                (0..g.size()).map(|y| f.values()[g.add_idx(y, x)] * h.values()[y]).sum::<f64>() / g.size() as f64;
            assert!((c.values()[x] - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn iterated_examples() {
        let g = ctx(3, 2);
        let one = RealTable::constant(g, 1.0);
        assert!(iterated_convolution(&one, 6).unwrap().values().iter().all(|v| (v - 1.0).abs() < 1e-9));
        assert!(iterated_convolution(&one, 3).is_err());
        assert!(iterated_convolution(&one, 0).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = random_table(g, &mut rng);
        let it2 = iterated_convolution(&f, 2).unwrap();
        let conv = convolve(&f, &f).unwrap();
        for a in 0..g.size() {
            assert!((it2.values()[a] - conv.values()[g.neg_idx(a)]).abs() < 1e-12);
        }
        let h = Subspace::span(3, 2, &[vec![1, 0]]).to_subset(g).unwrap();
        let it8 = iterated_convolution(&RealTable::indicator(&h), 8).unwrap();
        for b in 0..g.size() {
            let expect = if h.contains(b) { (1.0f64 / 3.0).powi(7) } else { 0.0 };
            assert!((it8.values()[b] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn norms_of_constants_and_subspace_balance() {
        let g = ctx(3, 3);
        let c = RealTable::constant(g, 0.7);
        assert!((u2_norm(&c) - 0.7).abs() < 1e-9);
        assert!((u3_norm(&c) - 0.7).abs() < 1e-9);
        let h = Subspace::span(3, 3, &[vec![1, 0, 0], vec![0, 1, 1]]).to_subset(g).unwrap();
        let f = RealTable::indicator(&h).shifted(1.0 / 3.0);
        let expect = (2.0 * (1.0f64 / 3.0).powi(4)).powf(0.25);
        assert!((u2_norm(&f) - expect).abs() < 1e-9);
    }

    #[test]
    fn u2_below_u3() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for i in 0..100 {
            let g = ctx(3, 1 + (i % 3) as u32);
            let f = random_table(g, &mut rng);
            assert!(u2_norm(&f) <= u3_norm(&f) + 1e-9);
        }
    }

    #[test]
    fn restricted_max_examples() {
        let g = ctx(3, 3);
        let full_k = Subspace::full(3, 3);
        assert!(restricted_fourier_max(&GSubset::full(g), &full_k, 0).unwrap() < 1e-12);
        let k = Subspace::span(3, 3, &[vec![1, 1, 0]]);
        let coset = GSubset::from_indices(g, k.coset_indices(g, 5).unwrap());
        assert!(restricted_fourier_max(&coset, &k, 5).unwrap() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = GSubset::from_index_predicate(g, |_| rng.gen_bool(0.5));
        let direct = fourier_set(&a).max_nontrivial();
        assert!((restricted_fourier_max(&a, &full_k, 0).unwrap() - direct).abs() < 1e-12);
    }
}
