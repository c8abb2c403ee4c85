//! Direct enumeration oracles for the pattern counts.
//!
//! These loop over group elements and test membership; they share nothing
//! with the transform-based paths beyond index arithmetic.

use crate::group::{Adder, GSubset};

/// #{(x, y, z, w) ∈ A⁴ : x + y = z + w}.
pub fn quadruple_count_naive(a: &GSubset) -> u128 {
    let ad = Adder::new(a.ctx());
    let elems: Vec<usize> = a.iter().collect();
    let mut total = 0u128;
    for &x in &elems {
        for &y in &elems {
            let s = ad.add(x, y);
            for &z in &elems {
                if a.contains(ad.sub(s, z)) {
                    total += 1;
                }
            }
        }
    }
    total
}

/// (cubes, seven-point configurations): the number of (x, a, b, c) with all
/// eight cube points in V, and with the seven points other than x+a+b+c in V.
pub fn cube_census_naive(v: &GSubset) -> (u128, u128) {
    let ad = Adder::new(v.ctx());
    let elems: Vec<usize> = v.iter().collect();
    let (mut cubes, mut seven) = (0u128, 0u128);
    for &x in &elems {
        for &xa in &elems {
            for &xb in &elems {
                let b = ad.sub(xb, x);
                let xab = ad.add(xa, b);
                if !v.contains(xab) {
                    continue;
                }
                for &xc in &elems {
                    let c = ad.sub(xc, x);
                    if v.contains(ad.add(xa, c)) && v.contains(ad.add(xb, c)) {
                        seven += 1;
                        if v.contains(ad.add(xab, c)) {
                            cubes += 1;
                        }
                    }
                }
            }
        }
    }
    (cubes, seven)
}

pub fn cube_count_naive(v: &GSubset) -> u128 {
    cube_census_naive(v).0
}

/// Number of (b1, b2, b3, x2, y3, z1) whose ten points
/// b1, b2, b3, b1+b2−b3, x2, x2−b2+b3, y3, y3+b1−b3, z1, b1+b2−z1 lie in A.
///
/// For each (b1, b2, b3) the three remaining variables are constrained
/// independently, so their loops are run one after another and multiplied.
pub fn config10_count_naive(a: &GSubset) -> u128 {
    let ad = Adder::new(a.ctx());
    let elems: Vec<usize> = a.iter().collect();
    let mut total = 0u128;
    for &b1 in &elems {
        for &b2 in &elems {
            let s = ad.add(b1, b2);
            let z_count = elems.iter().filter(|&&z| a.contains(ad.sub(s, z))).count() as u128;
            if z_count == 0 {
                continue;
            }
            for &b3 in &elems {
                if !a.contains(ad.sub(s, b3)) {
                    continue;
                }
                let e = ad.sub(b3, b2);
                let f = ad.sub(b1, b3);
                let x_count = elems.iter().filter(|&&x| a.contains(ad.add(x, e))).count() as u128;
                let y_count = elems.iter().filter(|&&y| a.contains(ad.add(y, f))).count() as u128;
                total += x_count * y_count * z_count;
            }
        }
    }
    total
}
