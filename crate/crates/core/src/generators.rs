//! Synthetic inputs: layer varieties, the Sidon construction, pullbacks of
//! quadratic maps, noise, and the random-subspace probability law.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field;
use crate::forms::{decode_vec, BilinearMap};
use crate::group::{GSubset, VectorSpaceCtx};
use crate::linalg::{Matrix, Subspace};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// V = {x : γ(x, x) ∈ Λ}.
pub fn gen_layer_variety(gamma: &BilinearMap, lambda: &Subspace) -> Result<GSubset> {
    if !gamma.is_symmetric() {
        return Err(Error::Precondition("layer variety needs a symmetric form".into()));
    }
    if lambda.p() != gamma.ctx().p() || lambda.ambient_dim() != gamma.d() {
        return Err(Error::DimensionMismatch("Λ must be a subspace of F_p^d".into()));
    }
    let p = gamma.ctx().p();
    let d = gamma.d();
    let in_lambda: Vec<bool> = (0..(p as usize).pow(d as u32)).map(|k| lambda.contains(&decode_vec(p, d, k))).collect();
    let diag = gamma.diagonal_table();
    Ok(GSubset::from_index_predicate(gamma.ctx(), |x| in_lambda[diag[x]]))
}

/// Symmetrized uniform random form, redrawn until every nonzero direction has
/// rank at least `min_rank`.
pub fn random_high_rank_symmetric(
    ctx: VectorSpaceCtx,
    d: usize,
    min_rank: usize,
    rng: &mut impl Rng,
) -> Result<BilinearMap> {
    let n = ctx.n() as usize;
    if min_rank > n {
        return Err(Error::InvalidParameter(format!("rank {min_rank} exceeds n = {n}")));
    }
    for _ in 0..10_000 {
        let ms = (0..d).map(|_| Matrix::from_fn(ctx.p(), n, n, |_, _| rng.gen_range(0..ctx.p()))).collect();
        let gamma = BilinearMap::new(ctx, ms)?.symmetrize();
        if gamma.min_direction_rank().map_or(true, |r| r >= min_rank) {
            return Ok(gamma);
        }
    }
    Err(Error::Precondition(format!("no form with all direction ranks ≥ {min_rank} found")))
}

/// The default rank floor n − 2.
pub fn random_symmetric_form(ctx: VectorSpaceCtx, d: usize, rng: &mut impl Rng) -> Result<BilinearMap> {
    random_high_rank_symmetric(ctx, d, (ctx.n() as usize).saturating_sub(2), rng)
}

fn poly_rem(a: &[u32], f: &[u32], p: u32) -> Vec<u32> {
    // f monic, coefficients low to high
    let mut r = a.to_vec();
    let df = f.len() - 1;
    while r.len() > df {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - df;
        if lead != 0 {
            for (i, &c) in f.iter().enumerate() {
                r[shift + i] = field::sub(r[shift + i], field::mul(lead, c, p), p);
            }
        }
        r.pop();
    }
    r
}

fn monic_polys(p: u32, deg: usize) -> impl Iterator<Item = Vec<u32>> {
    (0..(p as usize).pow(deg as u32)).map(move |k| {
        let mut c = decode_vec(p, deg, k);
        c.push(1);
        c
    })
}

/// Smallest monic irreducible polynomial of degree m over F_p, low to high.
pub fn irreducible_poly(p: u32, m: usize) -> Vec<u32> {
    assert!(m >= 1);
    monic_polys(p, m)
        .find(|f| (1..=m / 2).all(|k| monic_polys(p, k).all(|g| poly_rem(f, &g, p).iter().any(|&c| c != 0))))
        .expect("irreducible polynomials exist in every degree")
}

/// t² in F_{p^m} = F_p[x]/(f), with t given by coefficients.
fn field_square(t: &[u32], f: &[u32], p: u32) -> Vec<u32> {
    let m = t.len();
    let mut prod = vec![0u32; 2 * m - 1];
    for i in 0..m {
        for j in 0..m {
            prod[i + j] = field::add(prod[i + j], field::mul(t[i], t[j], p), p);
        }
    }
    let mut r = poly_rem(&prod, f, p);
    r.resize(m, 0);
    r
}

/// S = {(t, t²) : t ∈ F_{p^m}} ⊂ F_p^{2m}, a set with only trivial additive quadruples.
pub fn sidon_set(p: u32, m: usize) -> Vec<Vec<u32>> {
    let f = irreducible_poly(p, m);
    (0..(p as usize).pow(m as u32))
        .map(|k| {
            let t = decode_vec(p, m, k);
            let mut v = t.clone();
            v.extend(field_square(&t, &f, p));
            v
        })
        .collect()
}

fn sidon_split(ctx: VectorSpaceCtx, t_dim: usize) -> Result<(usize, usize)> {
    let n = ctx.n() as usize;
    if t_dim < 2 || t_dim > n {
        return Err(Error::InvalidParameter(format!("dim T = {t_dim} must be in [2, {n}]")));
    }
    if t_dim % 2 == 1 {
        return Err(Error::InvalidParameter(format!("dim T = {t_dim} must be even")));
    }
    Ok((n - t_dim, t_dim / 2))
}

/// S embedded in the last t_dim coordinates.
pub fn sidon_part(ctx: VectorSpaceCtx, t_dim: usize) -> Result<GSubset> {
    let (u_dim, m) = sidon_split(ctx, t_dim)?;
    let idx = sidon_set(ctx.p(), m).into_iter().map(|s| {
        let mut v = vec![0u32; u_dim];
        v.extend(s);
        ctx.encode(&v)
    });
    Ok(GSubset::from_indices(ctx, idx))
}

/// V = U + S with U the first n − t_dim coordinates and S ⊂ T Sidon.
pub fn gen_sidon_counterexample(ctx: VectorSpaceCtx, t_dim: usize) -> Result<GSubset> {
    let (u_dim, m) = sidon_split(ctx, t_dim)?;
    let tctx = VectorSpaceCtx::new(ctx.p(), t_dim as u32)?;
    let s = GSubset::from_indices(tctx, sidon_set(ctx.p(), m).iter().map(|v| tctx.encode(v)));
    Ok(GSubset::from_predicate(ctx, |x| s.contains(tctx.encode(&x[u_dim..]))))
}

/// Uniform invertible n × n matrix.
pub fn random_invertible(p: u32, n: usize, rng: &mut impl Rng) -> Matrix {
    loop {
        let m = Matrix::from_fn(p, n, n, |_, _| rng.gen_range(0..p));
        if m.rank() == n {
            return m;
        }
    }
}

/// U = L(U0) with U0 = {y : y_0 = … = y_{d−1} = 0} and L uniform in GL.
pub fn random_codim_subspace(p: u32, h: usize, d: usize, rng: &mut impl Rng) -> Result<Subspace> {
    if d > h {
        return Err(Error::InvalidParameter(format!("codimension {d} exceeds dimension {h}")));
    }
    let l = random_invertible(p, h, rng);
    let cols: Vec<Vec<u32>> = (d..h).map(|j| l.col(j)).collect();
    Ok(Subspace::span(p, h, &cols))
}

/// V = {x ∈ A : F(x) ∈ U}, F(x)_i = xᵀ M_i x, U random of codimension d in F_p^h.
pub fn gen_polynomial_pullback(a: &GSubset, f: &BilinearMap, d: usize, rng: &mut impl Rng) -> Result<GSubset> {
    a.ctx().check_same(&f.ctx())?;
    let h = f.d();
    if d > h {
        return Err(Error::InvalidParameter(format!("d = {d} exceeds dim H = {h}")));
    }
    let p = a.ctx().p();
    let u = random_codim_subspace(p, h, d, rng)?;
    let perp = u.orthogonal_complement().basis().clone();
    let mut coords = vec![0u32; a.ctx().n() as usize];
    Ok(GSubset::from_index_predicate(a.ctx(), |x| {
        if !a.contains(x) {
            return false;
        }
        a.ctx().decode_into(x, &mut coords);
        perp.mul_vec(&f.eval(&coords, &coords)).iter().all(|&c| c == 0)
    }))
}

/// Probability that m given independent vectors of F_p^n lie in a uniformly
/// random subspace of codimension d.
pub fn random_coset_probability(p: u32, n: u32, d: u32, m: u32) -> Result<BigRational> {
    if m + d > n {
        return Err(Error::InvalidParameter(format!("m + d = {} exceeds n = {n}", m + d)));
    }
    let pb = BigInt::from(p);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for k in 0..m {
        num *= pb.pow(n - d) - pb.pow(k);
        den *= pb.pow(n) - pb.pow(k);
    }
    Ok(BigRational::new(num, den))
}

/// (lower, upper) = (p^{−md} − 4p^{m+d−n}, p^{−md}).
pub fn coset_probability_sandwich(p: u32, n: u32, d: u32, m: u32) -> (BigRational, BigRational) {
    let pb = BigInt::from(p);
    let upper = BigRational::new(BigInt::one(), pb.pow(m * d));
    let correction = if m + d >= n {
        BigRational::from_integer(BigInt::from(4) * pb.pow(m + d - n))
    } else {
        BigRational::new(BigInt::from(4), pb.pow(n - m - d))
    };
    (upper.clone() - correction, upper)
}

/// Monte Carlo estimate of the same probability: the first m columns of a
/// uniform invertible matrix are a uniform independent m-tuple, tested
/// against the fixed subspace with d leading zero coordinates.
pub fn random_coset_probability_mc(p: u32, n: u32, d: u32, m: u32, samples: u64, seed: u64) -> Result<f64> {
    if m + d > n {
        return Err(Error::InvalidParameter(format!("m + d = {} exceeds n = {n}", m + d)));
    }
    let mut rng = rng_from_seed(seed);
    let (n, d, m) = (n as usize, d as usize, m as usize);
    let mut hits = 0u64;
    for _ in 0..samples {
        let mut cols: Vec<Vec<u32>> = Vec::with_capacity(m);
        while cols.len() < m {
            let v: Vec<u32> = (0..n).map(|_| rng.gen_range(0..p)).collect();
            let mut trial = cols.clone();
            trial.push(v);
            if Matrix::from_rows(p, n, &trial).rank() == trial.len() {
                cols = trial;
            }
        }
        hits += cols.iter().all(|c| c[..d].iter().all(|&x| x == 0)) as u64;
    }
    Ok(hits as f64 / samples.max(1) as f64)
}

/// Flips each membership bit independently with probability rho.
pub fn perturb(v: &GSubset, rho: f64, rng: &mut impl Rng) -> Result<GSubset> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::InvalidParameter(format!("noise rate {rho} outside [0, 1]")));
    }
    Ok(GSubset::from_index_predicate(v.ctx(), |x| v.contains(x) ^ rng.gen_bool(rho)))
}

pub fn random_set(ctx: VectorSpaceCtx, density: f64, rng: &mut impl Rng) -> Result<GSubset> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::InvalidParameter(format!("density {density} outside [0, 1]")));
    }
    Ok(GSubset::from_index_predicate(ctx, |_| rng.gen_bool(density)))
}

/// Uniform random quadratic map G → F_p^h as h (not necessarily symmetric) matrices.
pub fn random_quadratic_map(ctx: VectorSpaceCtx, h: usize, rng: &mut impl Rng) -> Result<BilinearMap> {
    let n = ctx.n() as usize;
    let ms = (0..h).map(|_| Matrix::from_fn(ctx.p(), n, n, |_, _| rng.gen_range(0..ctx.p()))).collect();
    BilinearMap::new(ctx, ms)
}

/// Instance description, fully determined by its fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// V = {γ(x, x) ∈ Λ} with γ random high-rank symmetric and dim Λ = lambda_dim.
    LayerVariety { p: u32, n: u32, d: usize, lambda_dim: usize, seed: u64 },
    SidonSum { p: u32, n: u32, t_dim: usize },
    Perturbed { base: Box<GeneratorSpec>, noise: f64, seed: u64 },
    /// A random of density density_a, F random quadratic G → F_p^h.
    PolynomialPullback { p: u32, n: u32, h: usize, d: usize, density_a: f64, seed: u64 },
    Random { p: u32, n: u32, density: f64, seed: u64 },
}

/// Ground truth of a layer variety.
#[derive(Clone, Debug)]
pub struct LayerTruth {
    pub gamma: BilinearMap,
    pub lambda: Subspace,
}

#[derive(Clone, Debug)]
pub struct Generated {
    pub set: GSubset,
    pub truth: Option<LayerTruth>,
}

/// γ and Λ for a layer-variety spec, drawn in that order from the seed.
pub fn layer_truth(p: u32, n: u32, d: usize, lambda_dim: usize, seed: u64) -> Result<LayerTruth> {
    if lambda_dim > d {
        return Err(Error::InvalidParameter(format!("dim Λ = {lambda_dim} exceeds d = {d}")));
    }
    let ctx = VectorSpaceCtx::new(p, n)?;
    let mut rng = rng_from_seed(seed);
    let gamma = random_symmetric_form(ctx, d, &mut rng)?;
    let lambda = Subspace::random(p, d, lambda_dim, &mut rng);
    Ok(LayerTruth { gamma, lambda })
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<Generated> {
        match self {
            Self::LayerVariety { p, n, d, lambda_dim, seed } => {
                let truth = layer_truth(*p, *n, *d, *lambda_dim, *seed)?;
                let set = gen_layer_variety(&truth.gamma, &truth.lambda)?;
                Ok(Generated { set, truth: Some(truth) })
            }
            Self::SidonSum { p, n, t_dim } => {
                Ok(Generated { set: gen_sidon_counterexample(VectorSpaceCtx::new(*p, *n)?, *t_dim)?, truth: None })
            }
            Self::Perturbed { base, noise, seed } => {
                let inner = base.generate()?;
                let set = perturb(&inner.set, *noise, &mut rng_from_seed(*seed))?;
                Ok(Generated { set, truth: inner.truth })
            }
            Self::PolynomialPullback { p, n, h, d, density_a, seed } => {
                let ctx = VectorSpaceCtx::new(*p, *n)?;
                let mut rng = rng_from_seed(*seed);
                let a = random_set(ctx, *density_a, &mut rng)?;
                let f = random_quadratic_map(ctx, *h, &mut rng)?;
                Ok(Generated { set: gen_polynomial_pullback(&a, &f, *d, &mut rng)?, truth: None })
            }
            Self::Random { p, n, density, seed } => {
                let ctx = VectorSpaceCtx::new(*p, *n)?;
                Ok(Generated { set: random_set(ctx, *density, &mut rng_from_seed(*seed))?, truth: None })
            }
        }
    }
}

/// True iff every additive quadruple of the set is trivial.
pub fn is_sidon(s: &GSubset) -> bool {
    let k = s.len() as u128;
    crate::counting::quadruple_count(s) == (2 * k * k).saturating_sub(k)
}
