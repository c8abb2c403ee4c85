use rand::Rng;

use crate::error::{Error, Result};
use crate::field;
use crate::group::{GSubset, VectorSpaceCtx};

use super::Matrix;

/// A subspace of F_p^n held as its reduced row-echelon basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subspace {
    basis: Matrix,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(p: u32, n: usize) -> Self {
        Self { basis: Matrix::zeros(p, 0, n), pivots: Vec::new() }
    }

    pub fn full(p: u32, n: usize) -> Self {
        Self::from_matrix(&Matrix::identity(p, n))
    }

    /// The span of the rows of `m`.
    pub fn from_matrix(m: &Matrix) -> Self {
        let (r, pivots) = m.rref();
        let basis = r.select_rows(&(0..pivots.len()).collect::<Vec<_>>());
        Self { basis, pivots }
    }

    pub fn span(p: u32, n: usize, vectors: &[Vec<u32>]) -> Self {
        Self::from_matrix(&Matrix::from_rows(p, n, vectors))
    }

    /// Span of group elements given by canonical index.
    pub fn span_indices(ctx: VectorSpaceCtx, elems: &[usize]) -> Self {
        let vecs: Vec<Vec<u32>> = elems.iter().map(|&x| ctx.decode(x)).collect();
        Self::span(ctx.p(), ctx.n() as usize, &vecs)
    }

    /// Uniformly random subspace of the given dimension.
    pub fn random(p: u32, n: usize, dim: usize, rng: &mut impl Rng) -> Self {
        assert!(dim <= n);
        loop {
            let m = Matrix::from_fn(p, dim, n, |_, _| rng.gen_range(0..p));
            let s = Self::from_matrix(&m);
            if s.dim() == dim {
                return s;
            }
        }
    }

    pub fn p(&self) -> u32 {
        self.basis.p()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn codim(&self) -> usize {
        self.ambient_dim() - self.dim()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn basis_vecs(&self) -> Vec<Vec<u32>> {
        self.basis.row_vecs()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.p() != other.p() || self.ambient_dim() != other.ambient_dim() {
            return Err(Error::DimensionMismatch(format!(
                "subspaces of F_{}^{} and F_{}^{}",
                self.p(),
                self.ambient_dim(),
                other.p(),
                other.ambient_dim()
            )));
        }
        Ok(())
    }

    /// Coordinates of `v` in the echelon basis, or None if v is not in the span.
    pub fn coords_of(&self, v: &[u32]) -> Option<Vec<u32>> {
        let p = self.p();
        let c: Vec<u32> = self.pivots.iter().map(|&pc| v[pc] % p).collect();
        let mut r: Vec<u32> = v.iter().map(|&x| x % p).collect();
        for (i, &ci) in c.iter().enumerate() {
            if ci == 0 {
                continue;
            }
            for (k, rk) in r.iter_mut().enumerate() {
                *rk = field::sub(*rk, field::mul(ci, self.basis.get(i, k), p), p);
            }
        }
        r.iter().all(|&x| x == 0).then_some(c)
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        self.coords_of(v).is_some()
    }

    pub fn contains_subspace(&self, other: &Self) -> bool {
        other.basis_vecs().iter().all(|v| self.contains(v))
    }

    /// Linear combination Σ c_i b_i of the basis.
    pub fn combine(&self, c: &[u32]) -> Vec<u32> {
        assert_eq!(c.len(), self.dim());
        let p = self.p();
        let mut out = vec![0u32; self.ambient_dim()];
        for (i, &ci) in c.iter().enumerate() {
            if ci == 0 {
                continue;
            }
            for (k, o) in out.iter_mut().enumerate() {
                *o = field::add(*o, field::mul(ci, self.basis.get(i, k), p), p);
            }
        }
        out
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self::from_matrix(&self.basis.vstack(&other.basis)?))
    }

    /// A^⊥ = {r : r·a = 0 for all a ∈ A}.
    pub fn orthogonal_complement(&self) -> Self {
        if self.dim() == 0 {
            return Self::full(self.p(), self.ambient_dim());
        }
        Self::span(self.p(), self.ambient_dim(), &self.basis.kernel())
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.orthogonal_complement().sum(&other.orthogonal_complement())?.orthogonal_complement())
    }

    /// Extends this subspace's basis greedily by the given candidates, in order,
    /// and returns the span of the candidates that were taken.
    pub fn complement_from(&self, candidates: &[Vec<u32>]) -> Self {
        let p = self.p();
        let n = self.ambient_dim();
        let mut current = self.clone();
        let mut taken = Vec::new();
        for v in candidates {
            if !current.contains(v) {
                taken.push(v.clone());
                current = Self::from_matrix(&current.basis.vstack(&Matrix::from_rows(p, n, &[v.clone()])).unwrap());
            }
        }
        Self::span(p, n, &taken)
    }

    /// Complement in the ambient space using smallest-index standard vectors.
    pub fn standard_complement(&self) -> Self {
        let n = self.ambient_dim();
        let std: Vec<Vec<u32>> = (0..n)
            .map(|i| {
                let mut e = vec![0u32; n];
                e[i] = 1;
                e
            })
            .collect();
        self.complement_from(&std)
    }

    /// Complement of `self` inside `outer`, drawn from `outer`'s echelon basis.
    pub fn complement_within(&self, outer: &Self) -> Result<Self> {
        self.check_same(outer)?;
        if !outer.contains_subspace(self) {
            return Err(Error::Precondition("subspace is not contained in the outer space".into()));
        }
        Ok(self.complement_from(&outer.basis_vecs()))
    }

    /// All vectors of the coset offset + A, as canonical group indices.
    pub fn coset_indices(&self, ctx: VectorSpaceCtx, offset: usize) -> Result<Vec<usize>> {
        if ctx.p() != self.p() || ctx.n() as usize != self.ambient_dim() {
            return Err(Error::DimensionMismatch("subspace and group context".into()));
        }
        let gens: Vec<usize> = self.basis_vecs().iter().map(|v| ctx.encode(v)).collect();
        let mut out = vec![offset];
        for &g in &gens {
            let prev = out.clone();
            let mut mult = g;
            for _ in 1..ctx.p() {
                out.extend(prev.iter().map(|&x| ctx.add_idx(x, mult)));
                mult = ctx.add_idx(mult, g);
            }
        }
        Ok(out)
    }

    pub fn indices(&self, ctx: VectorSpaceCtx) -> Result<Vec<usize>> {
        self.coset_indices(ctx, 0)
    }

    pub fn to_subset(&self, ctx: VectorSpaceCtx) -> Result<GSubset> {
        Ok(GSubset::from_indices(ctx, self.indices(ctx)?))
    }

    /// Number of elements as a power of p.
    pub fn size_log_p(&self) -> usize {
        self.dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, i: usize) -> Vec<u32> {
        let mut v = vec![0; n];
        v[i] = 1;
        v
    }

    #[test]
    fn spec_examples() {
        let a = Subspace::span(3, 2, &[e(2, 0)]);
        let b = Subspace::span(3, 2, &[e(2, 1)]);
        assert_eq!(a.intersect(&b).unwrap(), Subspace::zero(3, 2));
        assert_eq!(a.sum(&b).unwrap(), Subspace::full(3, 2));
        let d = Subspace::span(3, 2, &[vec![1, 1]]);
        assert_eq!(d.orthogonal_complement(), Subspace::span(3, 2, &[vec![1, 2]]));
    }

    #[test]
    fn canonical_basis() {
        let s1 = Subspace::span(5, 3, &[vec![1, 2, 3], vec![0, 1, 1]]);
        let s2 = Subspace::span(5, 3, &[vec![1, 3, 4], vec![2, 4, 1], vec![1, 2, 3]]);
        assert_eq!(s1, s2);
    }

    #[test]
    fn coset_enumeration() {
        let ctx = VectorSpaceCtx::new(3, 3).unwrap();
        let s = Subspace::span(3, 3, &[vec![1, 1, 0], vec![0, 0, 1]]);
        let mut idx = s.indices(ctx).unwrap();
        idx.sort();
        idx.dedup();
        assert_eq!(idx.len(), 9);
        for &x in &idx {
            assert!(s.contains(&ctx.decode(x)));
        }
    }
}
