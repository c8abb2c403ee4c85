//! Bilinear maps G × G → F_p^d, quadratic varieties, and the approximate
//! variety report.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::counting::{c0_from_cubes, cube_count, quadruple_count};
use crate::error::{Error, Result};
use crate::field;
use crate::fourier::FourierPlan;
use crate::group::{GSubset, VectorSpaceCtx};
use crate::linalg::{AffineMap, Matrix, Subspace};

/// Largest codomain dimension handled.
pub const MAX_D: usize = 8;

/// β(x, y)_i = xᵀ M_i y.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BilinearMap {
    ctx: VectorSpaceCtx,
    matrices: Vec<Matrix>,
}

/// Encodes a vector of F_p^d little-endian, as group indices are.
pub fn encode_vec(p: u32, v: &[u32]) -> usize {
    v.iter().rev().fold(0usize, |acc, &c| acc * p as usize + c as usize)
}

pub fn decode_vec(p: u32, d: usize, mut idx: usize) -> Vec<u32> {
    (0..d)
        .map(|_| {
            let c = (idx % p as usize) as u32;
            idx /= p as usize;
            c
        })
        .collect()
}

impl BilinearMap {
    pub fn new(ctx: VectorSpaceCtx, matrices: Vec<Matrix>) -> Result<Self> {
        let n = ctx.n() as usize;
        if matrices.len() > MAX_D {
            return Err(Error::TooLarge(format!("codomain dimension {} exceeds {MAX_D}", matrices.len())));
        }
        for m in &matrices {
            if m.p() != ctx.p() || m.rows() != n || m.cols() != n {
                return Err(Error::DimensionMismatch(format!("form matrices must be {n}x{n} over F_{}", ctx.p())));
            }
        }
        Ok(Self { ctx, matrices })
    }

    pub fn zero(ctx: VectorSpaceCtx, d: usize) -> Self {
        let n = ctx.n() as usize;
        Self { ctx, matrices: vec![Matrix::zeros(ctx.p(), n, n); d] }
    }

    pub fn ctx(&self) -> VectorSpaceCtx {
        self.ctx
    }

    pub fn d(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.matrices
    }

    pub fn eval(&self, x: &[u32], y: &[u32]) -> Vec<u32> {
        let p = self.ctx.p();
        self.matrices
            .iter()
            .map(|m| {
                let my = m.mul_vec(y);
                x.iter().zip(&my).fold(0, |acc, (&a, &b)| field::add(acc, field::mul(a, b, p), p))
            })
            .collect()
    }

    pub fn eval_idx(&self, x: usize, y: usize) -> Vec<u32> {
        self.eval(&self.ctx.decode(x), &self.ctx.decode(y))
    }

    /// β(x, x) for every x, encoded in F_p^d.
    pub fn diagonal_table(&self) -> Vec<usize> {
        let p = self.ctx.p();
        let mut coords = vec![0u32; self.ctx.n() as usize];
        (0..self.ctx.size())
            .map(|x| {
                self.ctx.decode_into(x, &mut coords);
                encode_vec(p, &self.eval(&coords, &coords))
            })
            .collect()
    }

    /// The scalar form λ·β, as one matrix.
    pub fn direction(&self, lambda: &[u32]) -> Result<Matrix> {
        if lambda.len() != self.d() {
            return Err(Error::DimensionMismatch(format!("λ has length {}, d = {}", lambda.len(), self.d())));
        }
        let n = self.ctx.n() as usize;
        let mut acc = Matrix::zeros(self.ctx.p(), n, n);
        for (m, &l) in self.matrices.iter().zip(lambda) {
            if l != 0 {
                acc = acc.add(&m.scale(l))?;
            }
        }
        Ok(acc)
    }

    pub fn rank_of_direction(&self, lambda: &[u32]) -> Result<usize> {
        if lambda.iter().all(|&l| l % self.ctx.p() == 0) {
            return Err(Error::InvalidParameter("rank of the zero direction".into()));
        }
        Ok(self.direction(lambda)?.rank())
    }

    /// E_{x,y} ω^{λ·β(x,y)} = p^{−rank(λ·β)}.
    pub fn bias(&self, lambda: &[u32]) -> Result<f64> {
        let r = self.direction(lambda)?.rank();
        Ok((self.ctx.p() as f64).powi(-(r as i32)))
    }

    /// The same average by direct summation over G × G.
    pub fn bias_character_sum(&self, lambda: &[u32]) -> Result<f64> {
        let m = self.direction(lambda)?;
        let p = self.ctx.p();
        let size = self.ctx.size();
        let roots: Vec<Complex64> =
            (0..p).map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / p as f64)).collect();
        let mut total = Complex64::new(0.0, 0.0);
        for x in 0..size {
            let xt = m.transpose().mul_vec(&self.ctx.decode(x));
            for y in 0..size {
                let yv = self.ctx.decode(y);
                let v = xt.iter().zip(&yv).fold(0, |acc, (&a, &b)| field::add(acc, field::mul(a, b, p), p));
                total += roots[v as usize];
            }
        }
        Ok(total.re / (size as f64 * size as f64))
    }

    /// Smallest rank over nonzero directions; None when d = 0.
    pub fn min_direction_rank(&self) -> Option<usize> {
        let p = self.ctx.p();
        let total = (p as usize).pow(self.d() as u32);
        (1..total).map(|k| self.direction(&decode_vec(p, self.d(), k)).unwrap().rank()).min()
    }

    pub fn is_symmetric(&self) -> bool {
        self.matrices.iter().all(|m| *m == m.transpose())
    }

    /// ½(β(x, y) + β(y, x)).
    pub fn symmetrize(&self) -> Self {
        let p = self.ctx.p();
        let half = field::half(p);
        let matrices = self.matrices.iter().map(|m| m.add(&m.transpose()).unwrap().scale(half)).collect();
        Self { ctx: self.ctx, matrices }
    }

    /// Span of the component forms, each flattened to a vector of length n².
    pub fn form_space(&self) -> Subspace {
        let n = self.ctx.n() as usize;
        let rows: Vec<Vec<u32>> = self.matrices.iter().map(|m| (0..n * n).map(|k| m.get(k / n, k % n)).collect()).collect();
        Subspace::span(self.ctx.p(), n * n, &rows)
    }

    /// Keeps the components with the given indices.
    pub fn select(&self, idx: &[usize]) -> Self {
        Self { ctx: self.ctx, matrices: idx.iter().map(|&i| self.matrices[i].clone()).collect() }
    }
}

/// {x : γ(x, x) − ψ(x) = μ}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticVariety {
    pub gamma: BilinearMap,
    pub psi: AffineMap,
    pub mu: Vec<u32>,
}

impl QuadraticVariety {
    pub fn new(gamma: BilinearMap, psi: AffineMap, mu: Vec<u32>) -> Result<Self> {
        let d = gamma.d();
        let n = gamma.ctx().n() as usize;
        if !gamma.is_symmetric() {
            return Err(Error::Precondition("γ must be symmetric".into()));
        }
        if psi.linear.domain_dim() != n || psi.linear.codomain_dim() != d || mu.len() != d {
            return Err(Error::DimensionMismatch(format!("ψ and μ must map F_p^{n} to F_p^{d}")));
        }
        Ok(Self { gamma, psi, mu })
    }

    /// Q = G.
    pub fn whole(ctx: VectorSpaceCtx) -> Self {
        let n = ctx.n() as usize;
        Self { gamma: BilinearMap::zero(ctx, 0), psi: AffineMap::zero(ctx.p(), n, 0), mu: Vec::new() }
    }

    pub fn ctx(&self) -> VectorSpaceCtx {
        self.gamma.ctx()
    }

    pub fn d(&self) -> usize {
        self.gamma.d()
    }

    pub fn contains(&self, x: &[u32]) -> bool {
        let p = self.ctx().p();
        let q = self.gamma.eval(x, x);
        let l = self.psi.apply(x);
        q.iter().zip(&l).zip(&self.mu).all(|((&a, &b), &m)| field::sub(a, b, p) == m)
    }

    pub fn membership(&self) -> GSubset {
        GSubset::from_predicate(self.ctx(), |x| self.contains(x))
    }

    pub fn size(&self) -> u64 {
        self.membership().len()
    }
}

/// Measured parameters of a set viewed as an approximate quadratic variety.
#[derive(Clone, Debug, Serialize)]
pub struct ApproxVarietyReport {
    pub size: u64,
    pub delta: f64,
    pub delta_exact: String,
    /// ‖1_V − δ‖_{U²}.
    pub epsilon_u2: f64,
    /// ε⁴ as an exact fraction.
    pub epsilon4_exact: String,
    pub quadruple_count: String,
    pub cube_count: String,
    pub c0: f64,
    pub c0_exact: String,
    /// max_{r≠0} |1̂_V(r)|.
    pub spectral_max: f64,
    /// log_δ(spectral_max) − 1, when defined.
    pub theta_exponent: Option<f64>,
}

impl ApproxVarietyReport {
    /// Whether V is a (c0, δ, ε)-approximate variety for the given thresholds.
    pub fn verdict(&self, c0_min: f64, epsilon_max: f64) -> bool {
        self.c0 >= c0_min && self.epsilon_u2 <= epsilon_max
    }
}

fn ratio_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn approx_variety_verdict(v: &GSubset) -> Result<ApproxVarietyReport> {
    if v.is_empty() {
        return Err(Error::Precondition("approximate variety report of an empty set".into()));
    }
    let g = v.ctx().size();
    let s = v.len();
    let quads = quadruple_count(v);
    let cubes = cube_count(v);
    let gb = BigInt::from(g);
    let eps4 = BigRational::new(BigInt::from(quads) * &gb - BigInt::from(s).pow(4), gb.pow(4));
    let c0 = c0_from_cubes(v, cubes);
    let plan = FourierPlan::new(v.ctx());
    let spec = plan.forward_set(v);
    let spectral_max = spec.iter().skip(1).map(|c| c.norm()).fold(0.0, f64::max);
    let delta = s as f64 / g as f64;
    let theta = (delta < 1.0 && spectral_max > 1e-12).then(|| spectral_max.ln() / delta.ln() - 1.0);
    Ok(ApproxVarietyReport {
        size: s,
        delta,
        delta_exact: format!("{}", v.density()),
        epsilon_u2: ratio_f64(&eps4).max(0.0).powf(0.25),
        epsilon4_exact: format!("{eps4}"),
        quadruple_count: quads.to_string(),
        cube_count: cubes.to_string(),
        c0: ratio_f64(&c0),
        c0_exact: format!("{c0}"),
        spectral_max,
        theta_exponent: theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::LinearMap;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ctx(p: u32, n: u32) -> VectorSpaceCtx {
        VectorSpaceCtx::new(p, n).unwrap()
    }

    fn random_form(g: VectorSpaceCtx, d: usize, rng: &mut impl Rng) -> BilinearMap {
        let n = g.n() as usize;
        let ms = (0..d).map(|_| Matrix::from_fn(g.p(), n, n, |_, _| rng.gen_range(0..g.p()))).collect();
        BilinearMap::new(g, ms).unwrap()
    }

    #[test]
    fn bias_examples() {
        let g = ctx(3, 2);
        let id = BilinearMap::new(g, vec![Matrix::identity(3, 2)]).unwrap();
        assert!((id.bias(&[1]).unwrap() - 1.0 / 9.0).abs() < 1e-12);
        assert!((id.bias_character_sum(&[1]).unwrap() - 1.0 / 9.0).abs() < 1e-9);
        assert_eq!(id.bias(&[0]).unwrap(), 1.0);
        assert!(id.rank_of_direction(&[0]).is_err());
    }

    #[test]
    fn bias_matches_character_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=3 {
            let g = ctx(3, n);
            let f = random_form(g, 2, &mut rng);
            for k in 1..9 {
                let l = decode_vec(3, 2, k);
                assert!((f.bias(&l).unwrap() - f.bias_character_sum(&l).unwrap()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn symmetrize_examples() {
        let g = ctx(3, 2);
        let m = Matrix::from_rows(3, 2, &[vec![0, 1], vec![0, 0]]);
        let s = BilinearMap::new(g, vec![m]).unwrap().symmetrize();
        assert_eq!(s.matrices()[0], Matrix::from_rows(3, 2, &[vec![0, 2], vec![2, 0]]));
        assert_eq!(s.symmetrize(), s);
        let anti = Matrix::from_rows(3, 2, &[vec![0, 1], vec![2, 0]]);
        assert!(BilinearMap::new(g, vec![anti]).unwrap().symmetrize().matrices()[0].is_zero());
    }

    #[test]
    fn variety_examples() {
        let g = ctx(3, 2);
        assert_eq!(QuadraticVariety::whole(g).size(), 9);
        let gamma = BilinearMap::new(g, vec![Matrix::identity(3, 2)]).unwrap();
        let q = QuadraticVariety::new(gamma, AffineMap::zero(3, 2, 1), vec![0]).unwrap();
        // x1² + x2² = 0 over F_3 only at the origin
        assert_eq!(q.size(), 1);
        let gamma = BilinearMap::new(g, vec![Matrix::zeros(3, 2, 2)]).unwrap();
        let q = QuadraticVariety::new(gamma, AffineMap::zero(3, 2, 1), vec![1]).unwrap();
        assert_eq!(q.size(), 0);
        let psi = AffineMap::new(LinearMap::zero(3, 2, 1), vec![2]).unwrap();
        let gamma = BilinearMap::new(g, vec![Matrix::zeros(3, 2, 2)]).unwrap();
        assert_eq!(QuadraticVariety::new(gamma, psi, vec![1]).unwrap().size(), 9);
    }

    #[test]
    fn report_of_full_and_subspace() {
        let g = ctx(3, 3);
        let r = approx_variety_verdict(&GSubset::full(g)).unwrap();
        assert_eq!(r.delta, 1.0);
        assert_eq!(r.epsilon_u2, 0.0);
        assert_eq!(r.c0, 1.0);
        let h = Subspace::span(3, 3, &[vec![1, 0, 0], vec![0, 1, 0]]).to_subset(g).unwrap();
        let r = approx_variety_verdict(&h).unwrap();
        let delta: f64 = 1.0 / 3.0;
        let expected = (2.0 * delta.powi(4)).powf(0.25);
        assert!((r.epsilon_u2 - expected).abs() < 1e-12);
        // cubes = |H|⁴, so c0 = |H|⁴|G|³/|H|⁷ = δ⁻³
        assert!((r.c0 - 27.0).abs() < 1e-9);
        assert!(approx_variety_verdict(&GSubset::empty(g)).is_err());
    }
}
