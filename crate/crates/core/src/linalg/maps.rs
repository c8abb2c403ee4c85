use crate::error::{Error, Result};
use crate::field;

use super::{Matrix, Subspace};

/// A linear map F_p^{domain} → F_p^{codomain}, acting on column vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearMap {
    matrix: Matrix,
}

impl LinearMap {
    pub fn new(matrix: Matrix) -> Self {
        Self { matrix }
    }

    pub fn zero(p: u32, domain: usize, codomain: usize) -> Self {
        Self::new(Matrix::zeros(p, codomain, domain))
    }

    pub fn identity(p: u32, d: usize) -> Self {
        Self::new(Matrix::identity(p, d))
    }

    /// The map sending e_j to `images[j]`.
    pub fn from_images(p: u32, codomain: usize, images: &[Vec<u32>]) -> Self {
        Self::new(Matrix::from_cols(p, codomain, images))
    }

    /// The map F_p^d → U sending e_j to the j-th echelon basis vector of U.
    pub fn basis_map(u: &Subspace) -> Self {
        Self::new(u.basis().transpose())
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn p(&self) -> u32 {
        self.matrix.p()
    }

    pub fn domain_dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn codomain_dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn apply(&self, x: &[u32]) -> Vec<u32> {
        self.matrix.mul_vec(x)
    }

    pub fn rank(&self) -> usize {
        self.matrix.rank()
    }

    pub fn nullity(&self) -> usize {
        self.domain_dim() - self.rank()
    }

    pub fn kernel(&self) -> Subspace {
        Subspace::span(self.p(), self.domain_dim(), &self.matrix.kernel())
    }

    pub fn image(&self) -> Subspace {
        Subspace::from_matrix(&self.matrix.transpose())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self::new(self.matrix.add(&other.matrix)?))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(Self::new(self.matrix.sub(&other.matrix)?))
    }

    pub fn neg(&self) -> Self {
        Self::new(self.matrix.neg())
    }

    /// self ∘ other.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        Ok(Self::new(self.matrix.mul(&other.matrix)?))
    }

    pub fn is_invertible(&self) -> bool {
        self.domain_dim() == self.codomain_dim() && self.rank() == self.domain_dim()
    }

    /// Whether every image vector lies in `u`.
    pub fn maps_into(&self, u: &Subspace) -> bool {
        self.matrix.col_vecs().iter().all(|c| u.contains(c))
    }

    /// Rewrites a map with image inside `u` in the echelon coordinates of `u`.
    pub fn in_coordinates(&self, u: &Subspace) -> Result<Self> {
        let cols: Option<Vec<Vec<u32>>> = self.matrix.col_vecs().iter().map(|c| u.coords_of(c)).collect();
        let cols = cols.ok_or_else(|| Error::Precondition("map leaves the target subspace".into()))?;
        Ok(Self::from_images(self.p(), u.dim(), &cols))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineMap {
    pub linear: LinearMap,
    pub offset: Vec<u32>,
}

impl AffineMap {
    pub fn new(linear: LinearMap, offset: Vec<u32>) -> Result<Self> {
        if offset.len() != linear.codomain_dim() {
            return Err(Error::DimensionMismatch("affine offset length".into()));
        }
        Ok(Self { linear, offset })
    }

    pub fn zero(p: u32, domain: usize, codomain: usize) -> Self {
        Self { linear: LinearMap::zero(p, domain, codomain), offset: vec![0; codomain] }
    }

    pub fn apply(&self, x: &[u32]) -> Vec<u32> {
        let p = self.linear.p();
        self.linear.apply(x).iter().zip(&self.offset).map(|(&a, &b)| field::add(a, b, p)).collect()
    }
}

/// Replaces a square map by an isomorphism differing from it in rank equal to
/// its nullity.
///
/// With K = ker φ, a complement U of K, the projection π onto K along U, a
/// complement V of im φ and an isomorphism θ: K → V, the result is φ + θ∘π.
/// Complements are taken greedily from standard basis vectors.
pub fn repair_to_isomorphism(phi: &LinearMap) -> Result<LinearMap> {
    let d = phi.domain_dim();
    if phi.codomain_dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "repair needs a square map, got {}x{}",
            phi.codomain_dim(),
            d
        )));
    }
    let p = phi.p();
    let kernel = phi.kernel();
    let l = kernel.dim();
    if l == 0 {
        return Ok(phi.clone());
    }
    let u = kernel.standard_complement();
    let mut cols = kernel.basis_vecs();
    cols.extend(u.basis_vecs());
    let change = Matrix::from_cols(p, d, &cols).inverse().expect("K ⊕ U spans the domain");
    let v = phi.image().standard_complement();
    debug_assert_eq!(v.dim(), l);
    let mut theta_cols = v.basis_vecs();
    theta_cols.extend(std::iter::repeat(vec![0; d]).take(d - l));
    let theta_pi = Matrix::from_cols(p, d, &theta_cols).mul(&change)?;
    Ok(LinearMap::new(phi.matrix().add(&theta_pi)?))
}

/// Repair for a map F_p^d → U with dim U = d, done in U's coordinates.
pub fn repair_into(phi: &LinearMap, u: &Subspace) -> Result<LinearMap> {
    let local = phi.in_coordinates(u)?;
    let fixed = repair_to_isomorphism(&local)?;
    LinearMap::basis_map(u).compose(&fixed)
}
