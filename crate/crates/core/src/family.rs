//! Families a ↦ W_a of subspaces indexed by elements of a set.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{GSubset, VectorSpaceCtx};
use crate::linalg::{Matrix, Subspace};

/// Intersection statistics of a family.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyQuality {
    /// Max over r of the 95th percentile of |W_{a1} ∩ … ∩ W_{ar}| / max(p^{n−rd}, 1).
    pub k: f64,
    /// Fraction of sampled tuples whose ratio exceeds the cap.
    pub eta: f64,
    /// 95th percentile ratio for r = 1, 2, ….
    pub per_r: Vec<f64>,
    pub samples_per_r: usize,
}

#[derive(Clone, Debug)]
pub struct SubspaceFamily {
    ctx: VectorSpaceCtx,
    codim: usize,
    members: BTreeMap<usize, Subspace>,
    pub quality: Option<FamilyQuality>,
}

impl SubspaceFamily {
    /// All members must have the same codimension.
    pub fn new(ctx: VectorSpaceCtx, members: BTreeMap<usize, Subspace>) -> Result<Self> {
        let n = ctx.n() as usize;
        let mut codim = None;
        for (&a, w) in &members {
            if a >= ctx.size() || w.p() != ctx.p() || w.ambient_dim() != n {
                return Err(Error::DimensionMismatch(format!("family member at {a}")));
            }
            match codim {
                None => codim = Some(w.codim()),
                Some(c) if c != w.codim() => {
                    return Err(Error::Precondition(format!("member {a} has codim {} instead of {c}", w.codim())))
                }
                _ => {}
            }
        }
        Ok(Self { ctx, codim: codim.unwrap_or(0), members, quality: None })
    }

    /// The family x ↦ W for every x in the index set.
    pub fn constant(index: &GSubset, w: &Subspace) -> Result<Self> {
        Self::new(index.ctx(), index.iter().map(|a| (a, w.clone())).collect())
    }

    pub fn ctx(&self) -> VectorSpaceCtx {
        self.ctx
    }

    pub fn codim(&self) -> usize {
        self.codim
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn get(&self, a: usize) -> Option<&Subspace> {
        self.members.get(&a)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&usize, &Subspace)> {
        self.members.iter()
    }

    pub fn index_set(&self) -> GSubset {
        GSubset::from_indices(self.ctx, self.members.keys().copied())
    }

    /// Restriction to the given elements (absent ones are ignored).
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let members = keep.iter().filter_map(|a| self.members.get(a).map(|w| (*a, w.clone()))).collect();
        Self { ctx: self.ctx, codim: self.codim, members, quality: None }
    }

    /// Samples r-tuples of distinct indices for r = 1..=max_r and records
    /// how far the intersections exceed the generic size p^{n−rd}.
    pub fn measure_quality(&mut self, max_r: usize, samples: usize, k_cap: f64, seed: u64) -> &FamilyQuality {
        let keys: Vec<usize> = self.members.keys().copied().collect();
        let perps: Vec<Matrix> =
            keys.iter().map(|a| self.members[a].orthogonal_complement().basis().clone()).collect();
        let n = self.ctx.n() as i32;
        let p = self.ctx.p() as f64;
        let d = self.codim as i32;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut per_r = Vec::new();
        let (mut over, mut total) = (0usize, 0usize);
        for r in 1..=max_r.min(keys.len()) {
            let generic = p.powi((n - r as i32 * d).max(0));
            let mut ratios = Vec::with_capacity(samples);
            for _ in 0..samples {
                let pick = rand::seq::index::sample(&mut rng, keys.len(), r);
                let mut rows = perps[pick.index(0)].clone();
                for i in 1..r {
                    rows = rows.vstack(&perps[pick.index(i)]).unwrap();
                }
                let dim = n - rows.rank() as i32;
                let ratio = p.powi(dim) / generic;
                over += (ratio > k_cap) as usize;
                total += 1;
                ratios.push(ratio);
            }
            ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let idx = ((ratios.len() as f64 * 0.95).ceil() as usize).clamp(1, ratios.len()) - 1;
            per_r.push(ratios[idx]);
        }
        let k = per_r.iter().copied().fold(1.0, f64::max);
        let eta = if total == 0 { 0.0 } else { over as f64 / total as f64 };
        self.quality = Some(FamilyQuality { k, eta, per_r, samples_per_r: samples });
        self.quality.as_ref().unwrap()
    }
}
