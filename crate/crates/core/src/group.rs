//! The ambient group G = F_p^n, its elements and dense subsets.
//!
//! Elements are addressed by a little-endian base-p index, so coordinate 0
//! varies fastest. Subsets are bitsets over that index.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field;

/// Largest permitted group order.
pub const MAX_SIZE: u64 = 1 << 31;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VectorSpaceCtx {
    p: u32,
    n: u32,
    size: usize,
}

impl VectorSpaceCtx {
    pub fn new(p: u32, n: u32) -> Result<Self> {
        if p < 3 || !field::is_prime(p as u64) {
            return Err(Error::NotOddPrime(p as u64));
        }
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut size = 1u64;
        for _ in 0..n {
            size *= p as u64;
            if size > MAX_SIZE {
                return Err(Error::SizeOverflow { p: p as u64, n: n as u64 });
            }
        }
        Ok(Self { p, n, size: size as usize })
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn check_same(&self, other: &Self) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ContextMismatch(self.p, self.n, other.p, other.n))
        }
    }

    /// p^i for i ≤ n.
    pub fn stride(&self, i: u32) -> usize {
        (self.p as usize).pow(i)
    }

    pub fn decode_into(&self, mut idx: usize, out: &mut [u32]) {
        let p = self.p as usize;
        for c in out.iter_mut().take(self.n as usize) {
            *c = (idx % p) as u32;
            idx /= p;
        }
    }

    pub fn decode(&self, idx: usize) -> Vec<u32> {
        let mut out = vec![0; self.n as usize];
        self.decode_into(idx, &mut out);
        out
    }

    /// Index of a coordinate vector; entries are reduced mod p.
    pub fn encode(&self, coords: &[u32]) -> usize {
        let p = self.p as usize;
        let mut idx = 0usize;
        for &c in coords.iter().rev() {
            idx = idx * p + (c as usize % p);
        }
        idx
    }

    pub fn element(&self, idx: usize) -> GroupElement {
        GroupElement { ctx: *self, coords: self.decode(idx) }
    }

    pub fn add_idx(&self, a: usize, b: usize) -> usize {
        self.combine(a, b, |x, y| field::add(x, y, self.p))
    }

    pub fn sub_idx(&self, a: usize, b: usize) -> usize {
        self.combine(a, b, |x, y| field::sub(x, y, self.p))
    }

    pub fn neg_idx(&self, a: usize) -> usize {
        self.combine(a, 0, |x, _| field::neg(x, self.p))
    }

    pub fn scale_idx(&self, k: u32, a: usize) -> usize {
        let k = k % self.p;
        self.combine(a, 0, |x, _| field::mul(k, x, self.p))
    }

    /// The pairing r·x = Σ r_i x_i mod p.
    pub fn dot_idx(&self, r: usize, x: usize) -> u32 {
        let p = self.p as usize;
        let (mut r, mut x) = (r, x);
        let mut acc = 0u64;
        for _ in 0..self.n {
            acc += ((r % p) * (x % p)) as u64;
            r /= p;
            x /= p;
        }
        (acc % p as u64) as u32
    }

    fn combine(&self, mut a: usize, mut b: usize, f: impl Fn(u32, u32) -> u32) -> usize {
        let p = self.p as usize;
        let mut out = 0usize;
        let mut pw = 1usize;
        for _ in 0..self.n {
            out += f((a % p) as u32, (b % p) as u32) as usize * pw;
            a /= p;
            b /= p;
            pw *= p;
        }
        out
    }

    /// Table x ↦ index(x + c), built without per-entry division.
    pub fn shift_table(&self, c: usize) -> Vec<u32> {
        let cd = self.decode(c);
        let p = self.p as usize;
        let mut table = vec![0u32; self.size];
        table[0] = 0;
        let mut len = 1usize;
        for &ci in cd.iter() {
            for digit in (0..p).rev() {
                let shifted = ((digit + ci as usize) % p) * len;
                for j in 0..len {
                    table[digit * len + j] = table[j] + shifted as u32;
                }
            }
            len *= p;
        }
        table
    }

    /// Table x ↦ index(−x).
    pub fn neg_table(&self) -> Vec<u32> {
        (0..self.size).map(|x| self.neg_idx(x) as u32).collect()
    }

    /// Full addition table, row-major, for groups small enough to tabulate.
    pub fn add_table(&self) -> Result<Vec<u32>> {
        if self.size > 1 << 12 {
            return Err(Error::TooLarge(format!("addition table for |G| = {}", self.size)));
        }
        let mut t = Vec::with_capacity(self.size * self.size);
        for c in 0..self.size {
            t.extend(self.shift_table(c));
        }
        Ok(t)
    }
}

/// Fast index arithmetic through addition tables: one full table for small
/// groups, otherwise tables on the low and high halves of the coordinates.
#[derive(Clone, Debug)]
pub struct Adder {
    ctx: VectorSpaceCtx,
    full: Vec<u32>,
    full_neg: Vec<u32>,
    split: usize,
    lo: usize,
    hi: usize,
    add_lo: Vec<u32>,
    add_hi: Vec<u32>,
    neg_lo: Vec<u32>,
    neg_hi: Vec<u32>,
}

impl Adder {
    const MAX_HALF: usize = 2187;
    const MAX_FULL: usize = 729;

    pub fn new(ctx: VectorSpaceCtx) -> Self {
        let empty = Self {
            ctx,
            full: vec![],
            full_neg: vec![],
            split: 0,
            lo: 0,
            hi: 0,
            add_lo: vec![],
            add_hi: vec![],
            neg_lo: vec![],
            neg_hi: vec![],
        };
        if ctx.size <= Self::MAX_FULL {
            let (full, full_neg) = Self::tables(ctx.p, ctx.size);
            return Self { full, full_neg, ..empty };
        }
        let h = ctx.n / 2;
        let lo = ctx.stride(h);
        let hi = ctx.size / lo;
        if hi > Self::MAX_HALF {
            return empty;
        }
        let (add_lo, neg_lo) = Self::tables(ctx.p, lo);
        let (add_hi, neg_hi) = Self::tables(ctx.p, hi);
        Self { split: lo, lo, hi, add_lo, add_hi, neg_lo, neg_hi, ..empty }
    }

    fn tables(p: u32, m: usize) -> (Vec<u32>, Vec<u32>) {
        let p = p as usize;
        let digits: Vec<Vec<usize>> = (0..m)
            .map(|mut x| {
                let mut d = Vec::new();
                let mut k = 1;
                while k < m {
                    d.push(x % p);
                    x /= p;
                    k *= p;
                }
                d
            })
            .collect();
        let encode = |d: &mut dyn Iterator<Item = usize>| -> u32 {
            let mut idx = 0usize;
            let mut pw = 1usize;
            for v in d {
                idx += v * pw;
                pw *= p;
            }
            idx as u32
        };
        let mut add = vec![0u32; m * m];
        for a in 0..m {
            for b in 0..m {
                add[a * m + b] = encode(&mut digits[a].iter().zip(&digits[b]).map(|(x, y)| (x + y) % p));
            }
        }
        let neg = (0..m).map(|a| encode(&mut digits[a].iter().map(|x| (p - x) % p))).collect();
        (add, neg)
    }

    pub fn ctx(&self) -> VectorSpaceCtx {
        self.ctx
    }

    #[inline]
    pub fn add(&self, x: usize, y: usize) -> usize {
        if !self.full.is_empty() {
            return self.full[x * self.ctx.size + y] as usize;
        }
        if self.split == 0 {
            return self.ctx.add_idx(x, y);
        }
        let (xh, xl) = (x / self.split, x % self.split);
        let (yh, yl) = (y / self.split, y % self.split);
        self.add_lo[xl * self.lo + yl] as usize + self.add_hi[xh * self.hi + yh] as usize * self.split
    }

    #[inline]
    pub fn neg(&self, x: usize) -> usize {
        if !self.full.is_empty() {
            return self.full_neg[x] as usize;
        }
        if self.split == 0 {
            return self.ctx.neg_idx(x);
        }
        self.neg_lo[x % self.split] as usize + self.neg_hi[x / self.split] as usize * self.split
    }

    #[inline]
    pub fn sub(&self, x: usize, y: usize) -> usize {
        self.add(x, self.neg(y))
    }
}

impl fmt::Display for VectorSpaceCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{}", self.p, self.n)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupElement {
    ctx: VectorSpaceCtx,
    coords: Vec<u32>,
}

impl GroupElement {
    pub fn new(ctx: VectorSpaceCtx, coords: Vec<u32>) -> Result<Self> {
        if coords.len() != ctx.n as usize {
            return Err(Error::BadLength { expected: ctx.n as usize, got: coords.len() });
        }
        let coords = coords.into_iter().map(|c| c % ctx.p).collect();
        Ok(Self { ctx, coords })
    }

    pub fn zero(ctx: VectorSpaceCtx) -> Self {
        Self { ctx, coords: vec![0; ctx.n as usize] }
    }

    pub fn ctx(&self) -> VectorSpaceCtx {
        self.ctx
    }

    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    pub fn index(&self) -> usize {
        self.ctx.encode(&self.coords)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.ctx.check_same(&other.ctx)?;
        let p = self.ctx.p;
        let coords = self.coords.iter().zip(&other.coords).map(|(&a, &b)| field::add(a, b, p)).collect();
        Ok(Self { ctx: self.ctx, coords })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let p = self.ctx.p;
        Self { ctx: self.ctx, coords: self.coords.iter().map(|&a| field::neg(a, p)).collect() }
    }

    pub fn scale(&self, k: u32) -> Self {
        let p = self.ctx.p;
        let k = k % p;
        Self { ctx: self.ctx, coords: self.coords.iter().map(|&a| field::mul(k, a, p)).collect() }
    }
}

/// A subset of G stored as a bitset over canonical indices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GSubset {
    ctx: VectorSpaceCtx,
    words: Vec<u64>,
    count: u64,
}

impl fmt::Debug for GSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GSubset({}, {}/{})", self.ctx, self.count, self.ctx.size)
    }
}

impl GSubset {
    pub fn empty(ctx: VectorSpaceCtx) -> Self {
        Self { ctx, words: vec![0; ctx.size.div_ceil(64)], count: 0 }
    }

    pub fn full(ctx: VectorSpaceCtx) -> Self {
        Self::from_index_predicate(ctx, |_| true)
    }

    pub fn from_index_predicate(ctx: VectorSpaceCtx, mut pred: impl FnMut(usize) -> bool) -> Self {
        let mut s = Self::empty(ctx);
        for x in 0..ctx.size {
            if pred(x) {
                s.words[x >> 6] |= 1 << (x & 63);
            }
        }
        s.recount();
        s
    }

    /// Membership decided by a predicate on coordinates.
    pub fn from_predicate(ctx: VectorSpaceCtx, mut pred: impl FnMut(&[u32]) -> bool) -> Self {
        let mut buf = vec![0u32; ctx.n as usize];
        Self::from_index_predicate(ctx, |x| {
            ctx.decode_into(x, &mut buf);
            pred(&buf)
        })
    }

    pub fn from_indices(ctx: VectorSpaceCtx, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(ctx);
        for x in indices {
            assert!(x < ctx.size, "index {x} out of range");
            s.words[x >> 6] |= 1 << (x & 63);
        }
        s.recount();
        s
    }

    fn recount(&mut self) {
        self.count = self.words.iter().map(|w| w.count_ones() as u64).sum();
    }

    pub fn ctx(&self) -> VectorSpaceCtx {
        self.ctx
    }

    #[inline]
    pub fn contains(&self, x: usize) -> bool {
        (self.words[x >> 6] >> (x & 63)) & 1 == 1
    }

    pub fn len(&self) -> u64 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// |V| / |G| as an exact fraction.
    pub fn density(&self) -> Ratio<u64> {
        Ratio::new(self.count, self.ctx.size as u64)
    }

    pub fn density_f64(&self) -> f64 {
        self.count as f64 / self.ctx.size as f64
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub fn indicator(&self) -> Vec<f64> {
        (0..self.ctx.size).map(|x| if self.contains(x) { 1.0 } else { 0.0 }).collect()
    }

    pub fn complement(&self) -> Self {
        Self::from_index_predicate(self.ctx, |x| !self.contains(x))
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.ctx.check_same(&other.ctx)?;
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        let mut s = Self { ctx: self.ctx, words, count: 0 };
        s.recount();
        Ok(s)
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.ctx.check_same(&other.ctx)?;
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect();
        let mut s = Self { ctx: self.ctx, words, count: 0 };
        s.recount();
        Ok(s)
    }

    pub fn symmetric_difference(&self, other: &Self) -> Result<Self> {
        self.ctx.check_same(&other.ctx)?;
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect();
        let mut s = Self { ctx: self.ctx, words, count: 0 };
        s.recount();
        Ok(s)
    }

    /// V − c = {x : x + c ∈ V}.
    pub fn translate(&self, c: usize) -> Self {
        let t = self.ctx.shift_table(c);
        Self::from_index_predicate(self.ctx, |x| self.contains(t[x] as usize))
    }

    /// |V ∩ (V − c)| by direct enumeration.
    pub fn overlap_with_shift(&self, c: usize) -> u64 {
        let t = self.ctx.shift_table(c);
        self.iter().filter(|&x| self.contains(t[x] as usize)).count() as u64
    }

    // ==== persistence ====

    pub const MAGIC: [u8; 8] = *b"FPNSET1\0";

    pub fn to_bytes(&self) -> Vec<u8> {
        let nbytes = self.ctx.size.div_ceil(8);
        let mut out = Vec::with_capacity(24 + nbytes);
        out.extend_from_slice(&Self::MAGIC);
        out.extend_from_slice(&self.ctx.p.to_le_bytes());
        out.extend_from_slice(&self.ctx.n.to_le_bytes());
        out.extend_from_slice(&self.count.to_le_bytes());
        for k in 0..nbytes {
            out.push((self.words[k / 8] >> ((k % 8) * 8)) as u8);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 || bytes[..8] != Self::MAGIC {
            return Err(Error::BadMagic);
        }
        if bytes.len() < 24 {
            return Err(Error::Truncated { expected: 24, found: bytes.len() });
        }
        let p = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        let n = u32::from_le_bytes(bytes[12..16].try_into().unwrap());
        let popcount = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
        let ctx = VectorSpaceCtx::new(p, n)?;
        let nbytes = ctx.size.div_ceil(8);
        let payload = &bytes[24..];
        if payload.len() < nbytes {
            return Err(Error::Truncated { expected: nbytes, found: payload.len() });
        }
        let mut s = Self::empty(ctx);
        for (k, &b) in payload[..nbytes].iter().enumerate() {
            s.words[k / 8] |= (b as u64) << ((k % 8) * 8);
        }
        let tail = ctx.size % 64;
        if tail != 0 {
            let last = s.words.len() - 1;
            if s.words[last] >> tail != 0 {
                return Err(Error::PaddingBits(ctx.size));
            }
        }
        s.recount();
        if s.count != popcount {
            return Err(Error::PopcountMismatch { header: popcount, actual: s.count });
        }
        Ok(s)
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        Self::from_bytes(&buf)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}
