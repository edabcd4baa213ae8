//! Linear algebra over GF(2) with bit-packed rows.
//!
//! Vectors of length at most 32 are `u32` words with coordinate `i` in bit `i`.
//! A [`GfSubspace`] keeps its basis in fully reduced echelon form with pivots
//! at the lowest set bit of each row, rows sorted by pivot, so two subspaces
//! are equal exactly when their bases are bitwise equal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};

/// Reduces `rows` in place to canonical reduced echelon form and drops zero rows.
fn canonicalize(rows: &mut Vec<u32>) {
    let mut basis: Vec<u32> = Vec::with_capacity(rows.len());
    for &r in rows.iter() {
        let mut v = r;
        for &b in &basis {
            if v & (b & b.wrapping_neg()) != 0 {
                v ^= b;
            }
        }
        if v == 0 {
            continue;
        }
        let pivot = v & v.wrapping_neg();
        for b in basis.iter_mut() {
            if *b & pivot != 0 {
                *b ^= v;
            }
        }
        basis.push(v);
    }
    basis.sort_unstable_by_key(|b| b.trailing_zeros());
    *rows = basis;
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GfSubspace {
    ambient: u32,
    basis: Vec<u32>,
}

impl GfSubspace {
    pub fn zero(ambient: u32) -> Self {
        GfSubspace { ambient, basis: Vec::new() }
    }

    pub fn full(ambient: u32) -> Self {
        GfSubspace { ambient, basis: (0..ambient).map(|i| 1 << i).collect() }
    }

    /// The span of arbitrary rows of length `ambient`.
    pub fn from_rows(ambient: u32, rows: impl IntoIterator<Item = u32>) -> Result<Self> {
        let mask = if ambient >= 32 { u32::MAX } else { (1u32 << ambient) - 1 };
        let mut rows: Vec<u32> = rows.into_iter().collect();
        if let Some(&bad) = rows.iter().find(|&&r| r & !mask != 0) {
            return Err(Error::DimensionMismatch { left: ambient, right: 32 - bad.leading_zeros() });
        }
        canonicalize(&mut rows);
        Ok(GfSubspace { ambient, basis: rows })
    }

    pub fn ambient(&self) -> u32 {
        self.ambient
    }

    pub fn basis(&self) -> &[u32] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Projective dimension, `rank - 1`.
    pub fn projective_dim(&self) -> i64 {
        self.rank() as i64 - 1
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    /// Canonical representative of the coset `v + self`: `v` with every pivot bit cleared.
    pub fn reduce(&self, v: u32) -> u32 {
        let mut v = v;
        for &b in &self.basis {
            if v & (b & b.wrapping_neg()) != 0 {
                v ^= b;
            }
        }
        v
    }

    pub fn contains(&self, v: u32) -> bool {
        self.reduce(v) == 0
    }

    pub fn contains_subspace(&self, other: &GfSubspace) -> bool {
        other.basis.iter().all(|&b| self.contains(b))
    }

    fn check_ambient(&self, other: &GfSubspace) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(Error::DimensionMismatch { left: self.ambient, right: other.ambient });
        }
        Ok(())
    }

    /// Smallest subspace containing every input.
    pub fn span<'a>(subspaces: impl IntoIterator<Item = &'a GfSubspace>) -> Result<GfSubspace> {
        let mut iter = subspaces.into_iter();
        let first = iter.next().ok_or_else(|| Error::Format("span of an empty list".into()))?;
        let mut rows = first.basis.clone();
        for s in iter {
            first.check_ambient(s)?;
            rows.extend_from_slice(&s.basis);
        }
        canonicalize(&mut rows);
        Ok(GfSubspace { ambient: first.ambient, basis: rows })
    }

    pub fn join(&self, other: &GfSubspace) -> Result<GfSubspace> {
        GfSubspace::span([self, other])
    }

    /// Adds the vector `v` to the subspace.
    pub fn with_vector(&self, v: u32) -> GfSubspace {
        let mut rows = self.basis.clone();
        rows.push(v);
        canonicalize(&mut rows);
        GfSubspace { ambient: self.ambient, basis: rows }
    }

    /// Intersection, computed with the Zassenhaus sum/intersection scheme on
    /// doubled rows `(a | a)` and `(b | 0)`.
    pub fn meet(&self, other: &GfSubspace) -> Result<GfSubspace> {
        self.check_ambient(other)?;
        let w = self.ambient;
        // Left half in the high bits so the elimination clears it first.
        let rows: Vec<u64> = self
            .basis
            .iter()
            .map(|&a| ((a as u64) << w) | a as u64)
            .chain(other.basis.iter().map(|&b| (b as u64) << w))
            .collect();
        // echelon form keyed by leading bit, kept in descending order
        let mut pivot_rows: Vec<u64> = Vec::new();
        for r in rows {
            let mut v = r;
            for &p in &pivot_rows {
                if v >> (63 - p.leading_zeros()) & 1 == 1 {
                    v ^= p;
                }
            }
            if v != 0 {
                let top = v.leading_zeros();
                let pos = pivot_rows.partition_point(|&p| p.leading_zeros() < top);
                pivot_rows.insert(pos, v);
            }
        }
        let low_mask = (1u64 << w) - 1;
        let meet_rows = pivot_rows.iter().filter(|&&r| r >> w == 0).map(|&r| (r & low_mask) as u32);
        GfSubspace::from_rows(w, meet_rows)
    }

    /// Every vector of the subspace, zero included, in Gray-code order.
    pub fn vectors(&self) -> Vec<u32> {
        let r = self.rank();
        let mut out = Vec::with_capacity(1 << r);
        let mut v = 0u32;
        out.push(v);
        for i in 1u32..(1 << r) {
            v ^= self.basis[i.trailing_zeros() as usize];
            out.push(v);
        }
        out
    }

    /// A complement spanned by coordinate unit vectors.
    pub fn coordinate_complement(&self) -> GfSubspace {
        let mut current = self.clone();
        let mut units = Vec::new();
        for i in 0..self.ambient {
            let e = 1u32 << i;
            if !current.contains(e) {
                current = current.with_vector(e);
                units.push(e);
            }
        }
        GfSubspace::from_rows(self.ambient, units).expect("unit vectors fit the ambient space")
    }

    /// Coordinates of `v` with respect to `basis`, if `v` lies in its span.
    /// `basis` must be linearly independent; bit `i` of the result is the coefficient of `basis[i]`.
    pub fn coordinates_in(basis: &[u32], v: u32) -> Option<u32> {
        // eliminate on augmented rows (vector | coefficient tag)
        let mut rows: Vec<(u32, u32)> = basis.iter().enumerate().map(|(i, &b)| (b, 1u32 << i)).collect();
        let mut reduced: Vec<(u32, u32)> = Vec::new();
        for (mut b, mut tag) in rows.drain(..) {
            for &(p, pt) in &reduced {
                if b & (p & p.wrapping_neg()) != 0 {
                    b ^= p;
                    tag ^= pt;
                }
            }
            debug_assert!(b != 0, "basis must be independent");
            reduced.push((b, tag));
        }
        let (mut v, mut coeffs) = (v, 0u32);
        for &(p, pt) in &reduced {
            if v & (p & p.wrapping_neg()) != 0 {
                v ^= p;
                coeffs ^= pt;
            }
        }
        (v == 0).then_some(coeffs)
    }
}

/// Field reduction: the projective point `<v>` of PG(2, 2^n) becomes the
/// (n-1)-space `{ lambda v }` of PG(3n-1, 2). Component `i` of `v` occupies
/// bits `i*n .. (i+1)*n` in the polynomial basis of the field.
pub fn field_reduce(field: &Field, v: [FieldElement; 3]) -> Result<GfSubspace> {
    if v == [0, 0, 0] {
        return Err(Error::ZeroVector);
    }
    let n = field.degree();
    let rows = (0..n).map(|i| {
        let lambda = 1u8 << i;
        embed_vector(field, [field.mul(lambda, v[0]), field.mul(lambda, v[1]), field.mul(lambda, v[2])])
    });
    GfSubspace::from_rows(3 * n, rows)
}

/// The GF(2)-coordinates of a vector of GF(2^n)^3.
pub fn embed_vector(field: &Field, v: [FieldElement; 3]) -> u32 {
    let n = field.degree();
    v.iter().enumerate().fold(0u32, |acc, (i, &c)| acc | (field.to_bits(c) << (i as u32 * n)))
}

/// A square matrix over GF(2); row `i` is the word `rows[i]`. Vectors act on the left: `v * M`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BitMatrix {
    n: u32,
    rows: Vec<u32>,
}

impl BitMatrix {
    pub fn zero(n: u32) -> Self {
        BitMatrix { n, rows: vec![0; n as usize] }
    }

    pub fn identity(n: u32) -> Self {
        BitMatrix { n, rows: (0..n).map(|i| 1 << i).collect() }
    }

    pub fn from_rows(n: u32, rows: Vec<u32>) -> Self {
        assert_eq!(rows.len(), n as usize);
        BitMatrix { n, rows }
    }

    /// Matrix of `x -> x * a` on GF(2^n) in the polynomial basis.
    pub fn multiplication_by(field: &Field, a: FieldElement) -> Self {
        let n = field.degree();
        BitMatrix { n, rows: (0..n).map(|i| field.mul(1 << i, a) as u32).collect() }
    }

    pub fn dim(&self) -> u32 {
        self.n
    }

    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|&r| r == 0)
    }

    /// Row vector times matrix.
    pub fn apply(&self, v: u32) -> u32 {
        let mut out = 0;
        let mut v = v;
        while v != 0 {
            out ^= self.rows[v.trailing_zeros() as usize];
            v &= v - 1;
        }
        out
    }

    pub fn add(&self, other: &BitMatrix) -> BitMatrix {
        BitMatrix { n: self.n, rows: self.rows.iter().zip(&other.rows).map(|(a, b)| a ^ b).collect() }
    }

    /// `self * other`, so that `v * (A * B) = (v * A) * B`.
    pub fn mul(&self, other: &BitMatrix) -> BitMatrix {
        BitMatrix { n: self.n, rows: self.rows.iter().map(|&r| other.apply(r)).collect() }
    }

    pub fn rank(&self) -> usize {
        GfSubspace::from_rows(self.n, self.rows.iter().copied()).map(|s| s.rank()).unwrap_or(0)
    }

    pub fn is_invertible(&self) -> bool {
        self.rank() == self.n as usize
    }

    pub fn inverse(&self) -> Result<BitMatrix> {
        let n = self.n as usize;
        let mut a = self.rows.clone();
        let mut inv: Vec<u32> = (0..n).map(|i| 1u32 << i).collect();
        for col in 0..n {
            let bit = 1u32 << col;
            let p = (col..n).find(|&r| a[r] & bit != 0).ok_or(Error::SingularMatrix)?;
            a.swap(col, p);
            inv.swap(col, p);
            for r in 0..n {
                if r != col && a[r] & bit != 0 {
                    a[r] ^= a[col];
                    inv[r] ^= inv[col];
                }
            }
        }
        Ok(BitMatrix { n: self.n, rows: inv })
    }

    pub fn transpose(&self) -> BitMatrix {
        let n = self.n;
        let rows = (0..n)
            .map(|j| (0..n).fold(0u32, |acc, i| acc | (((self.rows[i as usize] >> j) & 1) << i)))
            .collect();
        BitMatrix { n, rows }
    }
}
