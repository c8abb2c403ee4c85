//! Isomorphisms respecting an additive quadruple of subspaces, and the
//! matching uniqueness bound.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::field;

use super::maps::repair_into;
use super::{LinearMap, Matrix, Subspace};

const TRIPLES: [[usize; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];

/// Subspace sum sizes of a quadruple, as exponents of p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadrupleSizes {
    pub d: usize,
    pub triple_dims: [usize; 4],
    pub total_dim: usize,
}

impl QuadrupleSizes {
    pub fn measure(us: &[Subspace; 4]) -> Result<Self> {
        let d = us[0].dim();
        for u in us.iter() {
            if u.dim() != d {
                return Err(Error::DimensionMismatch("quadruple subspaces differ in dimension".into()));
            }
            if u.p() != us[0].p() || u.ambient_dim() != us[0].ambient_dim() {
                return Err(Error::DimensionMismatch("quadruple subspaces in different spaces".into()));
            }
        }
        let mut triple_dims = [0; 4];
        for (t, tr) in TRIPLES.iter().enumerate() {
            triple_dims[t] = us[tr[0]].sum(&us[tr[1]])?.sum(&us[tr[2]])?.dim();
        }
        let total_dim = us[0].sum(&us[1])?.sum(&us[2])?.sum(&us[3])?.dim();
        Ok(Self { d, triple_dims, total_dim })
    }

    /// The least k with p^k admissible as K.
    pub fn log_p_k(&self) -> usize {
        let min_triple = *self.triple_dims.iter().min().unwrap();
        (3 * self.d).saturating_sub(min_triple).max(self.total_dim.saturating_sub(3 * self.d))
    }

    /// Checks the hypotheses against a caller-supplied K.
    pub fn check(&self, p: u32, k: Ratio<u64>) -> Result<()> {
        if k < Ratio::from_integer(1) {
            return Err(Error::InvalidParameter("K must be at least 1".into()));
        }
        let (num, den) = (*k.numer() as u128, *k.denom() as u128);
        let pw = |e: usize| (p as u128).checked_pow(e as u32);
        let base = pw(3 * self.d).ok_or_else(|| Error::TooLarge("p^{3d}".into()))?;
        for (t, tr) in TRIPLES.iter().enumerate() {
            let size = pw(self.triple_dims[t]).unwrap();
            if base * den > size * num {
                return Err(Error::QuadruplePrecondition {
                    triple: [tr[0] + 1, tr[1] + 1, tr[2] + 1],
                    reason: format!("|sum| = {}^{} < p^(3d)/K", p, self.triple_dims[t]),
                });
            }
        }
        let total = pw(self.total_dim).unwrap();
        if total * den > base * num {
            return Err(Error::Precondition(format!("|U1+U2+U3+U4| = {}^{} exceeds K p^(3d)", p, self.total_dim)));
        }
        Ok(())
    }
}

/// Ceiling of log_p of a rational K ≥ 1; exact when K is a power of p.
pub fn log_p_ceil(p: u32, k: Ratio<u64>) -> u32 {
    let mut e = 0u32;
    let mut pw = Ratio::from_integer(1u128);
    let k = Ratio::new(*k.numer() as u128, *k.denom() as u128);
    while pw < k {
        pw *= p as u128;
        e += 1;
    }
    e
}

#[derive(Clone, Debug)]
pub struct QuadrupleIsomorphisms {
    pub phis: [LinearMap; 3],
    pub defect_rank: usize,
    /// log_p of the K measured from the subspace sums.
    pub log_p_k: usize,
    pub sizes: QuadrupleSizes,
}

impl QuadrupleIsomorphisms {
    pub fn bound(&self) -> usize {
        20 * self.log_p_k
    }
}

/// Isomorphisms φ_i: F_p^d → U_i with rank(φ1 + φ2 − φ3 − φ4) small.
///
/// Follows the complement/projection construction: V_i complements
/// U_i ∩ (U_j + U_k) in U_i, S = V1 ⊕ V2 ⊕ V3 with s = π1(s) + π2(s) − π3(s),
/// φ'_i = π_i ∘ φ4 on φ4^{-1}(S), then each φ'_i is repaired. Off that
/// preimage φ'_i is chosen to decompose φ4 inside U1 + U2 + U3 when possible.
/// When `k` is supplied the hypotheses are checked against it; the bound is
/// always stated for the measured K.
pub fn quadruple_isomorphisms(
    us: &[Subspace; 4],
    phi4: &LinearMap,
    k: Option<Ratio<u64>>,
) -> Result<QuadrupleIsomorphisms> {
    let sizes = QuadrupleSizes::measure(us)?;
    let d = sizes.d;
    let p = us[0].p();
    let n = us[0].ambient_dim();
    if let Some(k) = k {
        sizes.check(p, k)?;
    }
    if phi4.domain_dim() != d || phi4.codomain_dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "φ4 must map F_p^{d} into F_p^{n}, got {}x{}",
            phi4.codomain_dim(),
            phi4.domain_dim()
        )));
    }
    if !phi4.maps_into(&us[3]) || phi4.rank() != d {
        return Err(Error::Precondition("φ4 is not a bijection onto U4".into()));
    }

    let mut vs = Vec::with_capacity(3);
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let inner = us[i].intersect(&us[j].sum(&us[k])?)?;
        vs.push(inner.complement_within(&us[i])?);
    }
    let mut s_rows = Vec::new();
    let mut owner = Vec::new();
    for (i, v) in vs.iter().enumerate() {
        for row in v.basis_vecs() {
            s_rows.push(row);
            owner.push(i);
        }
    }
    let s_basis_t = Matrix::from_cols(p, n, &s_rows);
    let s = Subspace::span(p, n, &s_rows);
    debug_assert_eq!(s.dim(), s_rows.len());

    // X = φ4^{-1}(U4 ∩ S): kernel of (S^⊥ rows) · φ4.
    let perp = s.orthogonal_complement();
    let x = if perp.dim() == 0 {
        Subspace::full(p, d)
    } else {
        let m = perp.basis().mul(phi4.matrix())?;
        Subspace::span(p, d, &m.kernel())
    };
    let y = x.standard_complement();

    let mut domain_basis = Vec::new();
    let mut images: [Vec<Vec<u32>>; 3] = Default::default();
    for xv in x.basis_vecs() {
        let sv = phi4.apply(&xv);
        let c = s_basis_t.solve(&sv).expect("φ4(x) lies in S");
        let mut parts = vec![vec![0u32; n]; 3];
        for (coef, (row, &i)) in c.iter().zip(s_rows.iter().zip(&owner)) {
            for (t, &r) in parts[i].iter_mut().zip(row) {
                *t = field::add(*t, field::mul(*coef, r, p), p);
            }
        }
        parts[2] = parts[2].iter().map(|&v| field::neg(v, p)).collect();
        for i in 0..3 {
            images[i].push(parts[i].clone());
        }
        domain_basis.push(xv);
    }
    // Decompose φ4(y) = u1 + u2 − u3 with u_i ∈ U_i where possible.
    let mut gens = Vec::new();
    for i in 0..3 {
        let b = us[i].basis();
        gens.push(if i == 2 { b.neg() } else { b.clone() });
    }
    let stacked = gens[0].vstack(&gens[1])?.vstack(&gens[2])?.transpose();
    for yv in y.basis_vecs() {
        let w = phi4.apply(&yv);
        match stacked.solve(&w) {
            Some(c) => {
                let mut off = 0;
                for i in 0..3 {
                    let coeffs = &c[off..off + d];
                    images[i].push(us[i].combine(coeffs));
                    off += d;
                }
            }
            None => {
                for img in images.iter_mut() {
                    img.push(vec![0; n]);
                }
            }
        }
        domain_basis.push(yv);
    }
    let change = Matrix::from_cols(p, d, &domain_basis).inverse().expect("X ⊕ Y spans F_p^d");
    let mut phis = Vec::with_capacity(3);
    for i in 0..3 {
        let raw = LinearMap::new(Matrix::from_cols(p, n, &images[i]).mul(&change)?);
        phis.push(repair_into(&raw, &us[i])?);
    }
    let total = phis[0].add(&phis[1])?.sub(&phis[2])?.sub(phi4)?;
    let defect_rank = total.rank();
    let phis: [LinearMap; 3] = phis.try_into().unwrap();
    Ok(QuadrupleIsomorphisms { phis, defect_rank, log_p_k: sizes.log_p_k(), sizes })
}

/// Checks rank θ ≤ r + log_p K with K = |W ∩ (U1 + U2 + V1 + V2)|.
///
/// `maps` is (φ1, φ2, ψ1, ψ2, θ) and `spaces` is (U1, U2, V1, V2, W).
pub fn uniqueness_defect_bound_check(maps: &[LinearMap; 5], spaces: &[Subspace; 5], r: usize) -> Result<bool> {
    let (dom, cod) = (maps[0].domain_dim(), maps[0].codomain_dim());
    for m in maps.iter() {
        if m.domain_dim() != dom || m.codomain_dim() != cod || m.p() != maps[0].p() {
            return Err(Error::DimensionMismatch("maps differ in shape".into()));
        }
    }
    for s in spaces.iter() {
        if s.ambient_dim() != cod || s.p() != maps[0].p() {
            return Err(Error::DimensionMismatch("subspace outside the codomain".into()));
        }
    }
    for (i, (m, s)) in maps.iter().zip(spaces).enumerate() {
        if !m.maps_into(s) {
            return Err(Error::Precondition(format!("map {} leaves its subspace", i + 1)));
        }
    }
    let mut total = maps[0].clone();
    for m in &maps[1..] {
        total = total.add(m)?;
    }
    if total.rank() > r {
        return Err(Error::Precondition(format!("rank of the sum is {} > r = {}", total.rank(), r)));
    }
    let sum = spaces[0].sum(&spaces[1])?.sum(&spaces[2])?.sum(&spaces[3])?;
    let log_k = spaces[4].intersect(&sum)?.dim();
    Ok(maps[4].rank() <= r + log_k)
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
    fn coordinate_lines_exact() {
        let us = [
            Subspace::span(3, 3, &[e(3, 0)]),
            Subspace::span(3, 3, &[e(3, 1)]),
            Subspace::span(3, 3, &[e(3, 2)]),
            Subspace::span(3, 3, &[vec![1, 1, 1]]),
        ];
        for scale in 1..3u32 {
            let phi4 = LinearMap::from_images(3, 3, &[vec![scale; 3]]);
            let q = quadruple_isomorphisms(&us, &phi4, Some(Ratio::from_integer(1))).unwrap();
            assert_eq!(q.log_p_k, 0);
            assert_eq!(q.defect_rank, 0);
            for (phi, u) in q.phis.iter().zip(&us) {
                assert!(phi.maps_into(u) && phi.rank() == 1);
            }
        }
    }

    #[test]
    fn equal_subspaces() {
        let u = Subspace::span(5, 4, &[vec![1, 2, 0, 3], vec![0, 1, 1, 1]]);
        let us = [u.clone(), u.clone(), u.clone(), u.clone()];
        let phi4 = LinearMap::from_images(5, 4, &[vec![1, 3, 1, 4], vec![2, 4, 0, 1]]);
        let q = quadruple_isomorphisms(&us, &phi4, None).unwrap();
        assert_eq!(q.defect_rank, 0);
        assert_eq!(q.log_p_k, 4);
    }

    #[test]
    fn precondition_names_triple() {
        let us = [
            Subspace::span(3, 3, &[e(3, 0)]),
            Subspace::span(3, 3, &[e(3, 0)]),
            Subspace::span(3, 3, &[e(3, 2)]),
            Subspace::span(3, 3, &[e(3, 2)]),
        ];
        let phi4 = LinearMap::from_images(3, 3, &[e(3, 2)]);
        match quadruple_isomorphisms(&us, &phi4, Some(Ratio::from_integer(1))) {
            Err(Error::QuadruplePrecondition { triple, .. }) => assert_eq!(triple, [1, 2, 3]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn log_ceil() {
        assert_eq!(log_p_ceil(3, Ratio::from_integer(1)), 0);
        assert_eq!(log_p_ceil(3, Ratio::from_integer(9)), 2);
        assert_eq!(log_p_ceil(3, Ratio::from_integer(10)), 3);
        assert_eq!(log_p_ceil(3, Ratio::new(7, 2)), 2);
    }

    #[test]
    fn uniqueness_trivial() {
        let z = LinearMap::zero(3, 2, 4);
        let s = Subspace::zero(3, 4);
        let maps = [z.clone(), z.clone(), z.clone(), z.clone(), z];
        let spaces = [s.clone(), s.clone(), s.clone(), s.clone(), s];
        assert!(uniqueness_defect_bound_check(&maps, &spaces, 0).unwrap());
    }
}
