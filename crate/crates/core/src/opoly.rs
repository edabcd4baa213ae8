//! Functions on GF(q) stored as value tables, the o-permutation predicate,
//! interpolation, and the oval point set `D(f)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};

pub const MAX_Q: usize = 64;

/// A function `GF(q) -> GF(q)` as its value table, indexed by bit pattern.
///
/// Entries past `q` are always zero, so the derived `Ord` is the
/// lexicographic order on the table and `Hash`/`Eq` compare tables.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FuncTable {
    len: u8,
    values: [FieldElement; MAX_Q],
}

impl fmt::Debug for FuncTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.values()).finish()
    }
}

impl Serialize for FuncTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.values().serialize(s)
    }
}

impl<'de> Deserialize<'de> for FuncTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<u8> = Vec::deserialize(d)?;
        FuncTable::from_values(&v).map_err(serde::de::Error::custom)
    }
}

impl FuncTable {
    pub fn zero(q: usize) -> Self {
        assert!(q <= MAX_Q && q.is_power_of_two());
        FuncTable { len: q as u8, values: [0; MAX_Q] }
    }

    pub fn from_values(values: &[FieldElement]) -> Result<Self> {
        let q = values.len();
        if q == 0 || q > MAX_Q || !q.is_power_of_two() {
            return Err(Error::Format(format!("table length {q} is not a field order")));
        }
        if let Some(&v) = values.iter().find(|&&v| v as usize >= q) {
            return Err(Error::Format(format!("value {v} outside GF({q})")));
        }
        let mut t = FuncTable::zero(q);
        t.values[..q].copy_from_slice(values);
        Ok(t)
    }

    pub fn from_fn(field: &Field, f: impl Fn(FieldElement) -> FieldElement) -> Self {
        let mut t = FuncTable::zero(field.order());
        for x in field.elements() {
            t.values[x as usize] = f(x);
        }
        t
    }

    /// `x -> x^e`, with `0 -> 0`.
    pub fn monomial(field: &Field, e: u64) -> Self {
        FuncTable::from_fn(field, |x| if x == 0 { 0 } else { field.pow(x, e) })
    }

    pub fn identity(field: &Field) -> Self {
        FuncTable::from_fn(field, |x| x)
    }

    /// Evaluates a coefficient vector (`coeffs[i]` multiplies `x^i`).
    pub fn from_coefficients(field: &Field, coeffs: &[FieldElement]) -> Self {
        FuncTable::from_fn(field, |x| evaluate(field, coeffs, x))
    }

    pub fn q(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn get(&self, x: FieldElement) -> FieldElement {
        self.values[x as usize]
    }

    pub fn set(&mut self, x: FieldElement, v: FieldElement) {
        self.values[x as usize] = v;
    }

    pub fn values(&self) -> &[FieldElement] {
        &self.values[..self.len as usize]
    }

    /// Membership in the space of functions vanishing at zero.
    pub fn vanishes_at_zero(&self) -> bool {
        self.values[0] == 0
    }

    pub fn add(&self, other: &FuncTable) -> FuncTable {
        let mut t = *self;
        for (a, b) in t.values.iter_mut().zip(other.values.iter()) {
            *a ^= b;
        }
        t
    }

    pub fn scale(&self, field: &Field, lambda: FieldElement) -> FuncTable {
        let mut t = *self;
        for v in t.values[..self.q()].iter_mut() {
            *v = field.mul(*v, lambda);
        }
        t
    }

    /// Coefficient-wise `f^gamma` for `gamma: x -> x^(2^e)`, i.e. `x -> gamma(f(gamma^-1(x)))`.
    pub fn conjugate(&self, field: &Field, e: u32) -> FuncTable {
        let k = field.degree();
        let back = (k - e % k) % k;
        FuncTable::from_fn(field, |x| field.frobenius(self.get(field.frobenius(x, back)), e))
    }

    /// Functional inverse of a permutation.
    pub fn inverse(&self) -> Option<FuncTable> {
        let q = self.q();
        let mut t = FuncTable::zero(q);
        let mut seen = 0u64;
        for x in 0..q {
            let y = self.values[x];
            if seen >> y & 1 == 1 {
                return None;
            }
            seen |= 1 << y;
            t.values[y as usize] = x as u8;
        }
        Some(t)
    }

    pub fn is_permutation(&self) -> bool {
        let mut seen = 0u64;
        for &y in self.values() {
            seen |= 1 << y;
        }
        seen.count_ones() as usize == self.q()
    }

    /// One byte per value.
    pub fn to_bytes(&self) -> &[u8] {
        self.values()
    }

    /// Number of bytes used by [`FuncTable::pack`] for a table over GF(2^k).
    pub fn packed_len(k: u32) -> usize {
        ((k as usize) << k).div_ceil(8)
    }

    /// Bit-packs the table, `k` bits per value, least significant bit first.
    pub fn pack(&self, k: u32, out: &mut Vec<u8>) {
        let start = out.len();
        out.resize(start + Self::packed_len(k), 0);
        let buf = &mut out[start..];
        for (i, &v) in self.values().iter().enumerate() {
            for b in 0..k as usize {
                if v >> b & 1 == 1 {
                    let pos = i * k as usize + b;
                    buf[pos / 8] |= 1 << (pos % 8);
                }
            }
        }
    }

    /// Inverse of [`FuncTable::pack`].
    pub fn unpack(k: u32, bytes: &[u8]) -> Result<Self> {
        if !(1..=6).contains(&k) || bytes.len() != Self::packed_len(k) {
            return Err(Error::Format(format!("packed table of {} bytes for k = {k}", bytes.len())));
        }
        let mut t = FuncTable::zero(1 << k);
        for i in 0..1usize << k {
            let mut v = 0u8;
            for b in 0..k as usize {
                let pos = i * k as usize + b;
                v |= (bytes[pos / 8] >> (pos % 8) & 1) << b;
            }
            t.values[i] = v;
        }
        Ok(t)
    }

    /// A 128-bit hash of the table, used as a compact membership key for
    /// large orbits. Two independent multiply-xorshift lanes over 8-byte words.
    pub fn fingerprint(&self) -> u128 {
        let mut h1: u64 = 0x9e37_79b9_7f4a_7c15 ^ self.len as u64;
        let mut h2: u64 = 0xc2b2_ae3d_27d4_eb4f ^ (self.len as u64) << 32;
        for chunk in self.values[..self.q().max(8)].chunks(8) {
            let mut w = [0u8; 8];
            w[..chunk.len()].copy_from_slice(chunk);
            let w = u64::from_le_bytes(w);
            h1 = mix(h1 ^ w).wrapping_mul(0xff51_afd7_ed55_8ccd);
            h2 = mix(h2.rotate_left(23) ^ w.wrapping_mul(0x94d0_49bb_1331_11eb)).wrapping_add(0x2545_f491_4f6c_dd1d);
        }
        ((mix(h1) as u128) << 64) | mix(h2 ^ h1) as u128
    }
}

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Horner evaluation of `sum coeffs[i] x^i`.
pub fn evaluate(field: &Field, coeffs: &[FieldElement], x: FieldElement) -> FieldElement {
    coeffs.iter().rev().fold(0, |acc, &c| field.mul(acc, x) ^ c)
}

/// Table of the difference quotient `f_s(x) = (f(x+s) + f(s)) / x` on nonzero `x`.
/// Index 0 of the result is unused and left zero.
pub fn difference_quotient(field: &Field, f: &FuncTable, s: FieldElement) -> FuncTable {
    let fs = f.get(s);
    FuncTable::from_fn(field, |x| if x == 0 { 0 } else { field.mul(f.get(x ^ s) ^ fs, field.inv_unchecked(x)) })
}

/// Why a function fails to be an o-permutation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OPermFailure {
    NonzeroAtZero,
    NotPermutation { x: FieldElement, y: FieldElement },
    /// `f_s(x) = f_s(y)` for distinct nonzero `x`, `y`.
    QuotientCollision { s: FieldElement, x: FieldElement, y: FieldElement },
}

impl fmt::Display for OPermFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OPermFailure::NonzeroAtZero => write!(f, "f(0) != 0"),
            OPermFailure::NotPermutation { x, y } => write!(f, "f({x}) = f({y})"),
            OPermFailure::QuotientCollision { s, x, y } => write!(f, "f_{s}({x}) = f_{s}({y})"),
        }
    }
}

/// Full o-permutation test returning the first witness of failure.
///
/// Checks `s` in increasing order with a seen-mask per `s` and returns on the first repeat.
pub fn check_o_permutation(field: &Field, f: &FuncTable) -> std::result::Result<(), OPermFailure> {
    if !f.vanishes_at_zero() {
        return Err(OPermFailure::NonzeroAtZero);
    }
    let q = field.order();
    let mut owner = [0u8; MAX_Q];
    let mut seen = 0u64;
    for x in 0..q {
        let y = f.values[x];
        if seen >> y & 1 == 1 {
            return Err(OPermFailure::NotPermutation { x: owner[y as usize], y: x as u8 });
        }
        seen |= 1 << y;
        owner[y as usize] = x as u8;
    }
    for s in field.elements() {
        let fs = f.get(s);
        let mut seen = 0u64;
        for x in field.nonzero() {
            let v = field.mul(f.get(x ^ s) ^ fs, field.inv_unchecked(x));
            if seen >> v & 1 == 1 {
                let first = field.nonzero().find(|&y| field.mul(f.get(y ^ s) ^ fs, field.inv_unchecked(y)) == v).unwrap();
                return Err(OPermFailure::QuotientCollision { s, x: first, y: x });
            }
            seen |= 1 << v;
        }
    }
    Ok(())
}

/// Whether `f` is an o-permutation: a permutation fixing zero all of whose
/// difference quotients permute the nonzero elements. `f(1) = 1` is not required.
pub fn is_o_permutation(field: &Field, f: &FuncTable) -> bool {
    if f.values[0] != 0 {
        return false;
    }
    // a zero quotient means f(x+s) = f(s), so excluding it also forces f to be injective
    for s in field.elements() {
        let fs = f.get(s);
        let mut seen = 1u64;
        for x in field.nonzero() {
            let v = field.mul(f.get(x ^ s) ^ fs, field.inv_unchecked(x));
            let bit = 1u64 << v;
            if seen & bit != 0 {
                return false;
            }
            seen |= bit;
        }
    }
    true
}

/// An o-permutation normalized to `f(1) = 1`, with its coefficient vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OPolynomial {
    pub table: FuncTable,
    pub coefficients: Vec<FieldElement>,
}

impl OPolynomial {
    pub fn degree(&self) -> Option<usize> {
        self.coefficients.iter().rposition(|&c| c != 0)
    }
}

/// Scales an o-permutation to the unique o-polynomial in its scalar class.
pub fn normalize(field: &Field, f: &FuncTable) -> Result<OPolynomial> {
    check_o_permutation(field, f).map_err(|w| Error::NotOPermutation(w.to_string()))?;
    let table = normalize_table(field, f);
    Ok(OPolynomial { table, coefficients: interpolate(field, &table) })
}

/// `(1/f(1)) f` without the o-permutation check. Returns `f` unchanged when `f(1) = 0`.
#[inline]
pub fn normalize_table(field: &Field, f: &FuncTable) -> FuncTable {
    match f.get(1) {
        0 | 1 => *f,
        v => f.scale(field, field.inv_unchecked(v)),
    }
}

/// Coefficients of the unique polynomial of degree at most `q-1` agreeing with the table.
///
/// In characteristic 2, `(X + a)^(q-1) = sum_j X^j a^(q-1-j)`, so the coefficient of
/// `X^j` for `j >= 1` is `sum_a f(a) a^(q-1-j)` and the constant term is `f(0)`.
pub fn interpolate(field: &Field, f: &FuncTable) -> Vec<FieldElement> {
    let q = field.order();
    let mut coeffs = vec![0u8; q];
    coeffs[0] = f.get(0);
    for (j, c) in coeffs.iter_mut().enumerate().skip(1) {
        let e = (q - 1 - j) as u64;
        *c = field.elements().fold(0, |acc, a| {
            let pw = if e == 0 { 1 } else { field.pow(a, e) };
            acc ^ field.mul(f.get(a), pw)
        });
    }
    coeffs
}

/// Projective points of PG(2,q) as representative triples.
pub type Point = [FieldElement; 3];

/// `D(f) = {(1, t, f(t))} ∪ {(0, 1, 0)}`, listed with `t` in bit-pattern order and `(0,1,0)` last.
pub fn oval_points(field: &Field, f: &FuncTable) -> Vec<Point> {
    field.elements().map(|t| [1, t, f.get(t)]).chain(std::iter::once([0, 1, 0])).collect()
}

pub const NUCLEUS: Point = [0, 0, 1];

pub fn det3(field: &Field, a: Point, b: Point, c: Point) -> FieldElement {
    let m = |x, y| field.mul(x, y);
    let t0 = m(a[0], m(b[1], c[2]) ^ m(b[2], c[1]));
    let t1 = m(a[1], m(b[0], c[2]) ^ m(b[2], c[0]));
    let t2 = m(a[2], m(b[0], c[1]) ^ m(b[1], c[0]));
    t0 ^ t1 ^ t2
}

pub fn collinear(field: &Field, a: Point, b: Point, c: Point) -> bool {
    det3(field, a, b, c) == 0
}

/// First collinear triple among `points`, by index.
pub fn find_collinear_triple(field: &Field, points: &[Point]) -> Option<(usize, usize, usize)> {
    let n = points.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if collinear(field, points[i], points[j], points[k]) {
                    return Some((i, j, k));
                }
            }
        }
    }
    None
}

/// The `q+1` lines through a point `p`, each given by its coordinate vector `[a,b,c]`
/// (line `a x + b y + c z = 0`).
pub fn lines_through(field: &Field, p: Point) -> Vec<Point> {
    let mut lines = Vec::new();
    for a in field.elements() {
        for b in field.elements() {
            for c in field.elements() {
                let l = [a, b, c];
                if l == [0, 0, 0] || !is_normalized(l) {
                    continue;
                }
                if field.mul(a, p[0]) ^ field.mul(b, p[1]) ^ field.mul(c, p[2]) == 0 {
                    lines.push(l);
                }
            }
        }
    }
    lines
}

/// First nonzero coordinate equal to 1.
pub fn is_normalized(v: Point) -> bool {
    v.iter().find(|&&c| c != 0) == Some(&1)
}

pub fn normalize_point(field: &Field, v: Point) -> Point {
    match v.iter().find(|&&c| c != 0) {
        Some(&lead) => {
            let inv = field.inv_unchecked(lead);
            [field.mul(v[0], inv), field.mul(v[1], inv), field.mul(v[2], inv)]
        }
        None => v,
    }
}

/// Depth-first enumeration of every o-permutation over GF(q), `q <= 16`.
///
/// Values are assigned to `x = 1, 2, ...` in order; a partial assignment is
/// extended only while every slope set from an assigned point stays injective.
/// This does not use the magic action and serves as an independent oracle.
pub fn brute_force_opermutations(field: &Field) -> Result<Vec<FuncTable>> {
    let q = field.order();
    if q > 16 {
        return Err(Error::FieldTooLarge(q));
    }
    let mut out = Vec::new();
    let mut state = Dfs {
        field,
        q,
        values: [0; 16],
        slopes: [0; 16],
        used: 1, // value 0 is taken by x = 0
    };
    state.values[0] = 0;
    state.search(1, &mut out);
    out.sort();
    Ok(out)
}

struct Dfs<'a> {
    field: &'a Field,
    q: usize,
    values: [FieldElement; 16],
    /// bitmask of slopes seen from each assigned point
    slopes: [u32; 16],
    used: u32,
}

impl Dfs<'_> {
    fn search(&mut self, x: usize, out: &mut Vec<FuncTable>) {
        if x == self.q {
            out.push(FuncTable::from_values(&self.values[..self.q]).expect("valid table"));
            return;
        }
        let f = self.field;
        let saved = self.slopes;
        'candidate: for v in 0..self.q {
            if self.used >> v & 1 == 1 {
                continue;
            }
            let mut own = 0u32;
            for s in 0..x {
                let slope = f.mul(v as u8 ^ self.values[s], f.inv_unchecked(x as u8 ^ s as u8));
                let bit = 1u32 << slope;
                if self.slopes[s] & bit != 0 || own & bit != 0 {
                    self.slopes = saved;
                    continue 'candidate;
                }
                own |= bit;
                self.slopes[s] |= bit;
            }
            self.slopes[x] = own;
            self.values[x] = v as u8;
            self.used |= 1 << v;
            self.search(x + 1, out);
            self.used &= !(1 << v);
            self.slopes = saved;
        }
    }
}
