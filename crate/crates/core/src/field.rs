//! Arithmetic in GF(2^k) for 1 <= k <= 6.
//!
//! Elements are bit patterns `0..2^k` read as polynomials over GF(2) modulo the
//! field's defining polynomial. Every operation is a table lookup; the full
//! multiplication table is at most 64 x 64 bytes.

use std::fmt;

use crate::error::{Error, Result};

/// An element of GF(2^k), stored as its bit pattern.
pub type FieldElement = u8;

pub const MAX_DEGREE: u32 = 6;

/// Default defining polynomials, indexed by degree. Bit `i` is the coefficient of `x^i`.
///
/// GF(2): x+1, GF(4): x^2+x+1, GF(8): x^3+x+1, GF(16): x^4+x+1,
/// GF(32): x^5+x^2+1, GF(64): x^6+x+1.
pub const DEFAULT_MODULI: [u32; 7] = [0, 0b11, 0b111, 0b1011, 0b1_0011, 0b10_0101, 0b100_0011];

/// Carry-less product of two polynomials over GF(2).
pub(crate) fn clmul(a: u32, b: u32) -> u32 {
    let mut acc = 0;
    let mut b = b;
    let mut shift = 0;
    while b != 0 {
        if b & 1 != 0 {
            acc ^= a << shift;
        }
        b >>= 1;
        shift += 1;
    }
    acc
}

fn poly_degree(p: u32) -> u32 {
    31 - p.leading_zeros()
}

/// Remainder of `a` modulo `m` over GF(2).
pub(crate) fn poly_rem(mut a: u32, m: u32) -> u32 {
    let dm = poly_degree(m);
    while a != 0 && poly_degree(a) >= dm {
        a ^= m << (poly_degree(a) - dm);
    }
    a
}

/// Returns a nontrivial factor of `p` if one exists.
pub fn find_factor(p: u32) -> Option<u32> {
    let d = poly_degree(p);
    (2u32..(1 << (d / 2 + 1)))
        .filter(|&c| poly_degree(c) <= d / 2)
        .find(|&c| poly_rem(p, c) == 0)
}

#[derive(Clone, PartialEq, Eq)]
pub struct Field {
    k: u32,
    modulus: u32,
    primitive: FieldElement,
    exp: Vec<FieldElement>,
    log: Vec<u8>,
    mul: Vec<FieldElement>,
    inv: Vec<FieldElement>,
    sqrt: Vec<FieldElement>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}) mod {:#b}", self.order(), self.modulus)
    }
}

impl Field {
    /// Builds GF(2^k) from a defining polynomial, rejecting reducible moduli.
    pub fn new(k: u32, modulus: u32) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&k) {
            return Err(Error::InvalidDegree(k));
        }
        if modulus == 0 || poly_degree(modulus) != k {
            return Err(Error::WrongModulusDegree { k, modulus });
        }
        if let Some(factor) = find_factor(modulus) {
            return Err(Error::ReducibleModulus { modulus, factor });
        }

        let q = 1usize << k;
        let mut mul = vec![0u8; q * q];
        for a in 0..q {
            for b in a..q {
                let p = poly_rem(clmul(a as u32, b as u32), modulus) as u8;
                mul[a * q + b] = p;
                mul[b * q + a] = p;
            }
        }

        let order = q - 1;
        let mult_order = |g: usize| {
            let mut x = g;
            let mut n = 1;
            while x != 1 {
                x = mul[x * q + g] as usize;
                n += 1;
            }
            n
        };
        let primitive = (1..q).find(|&g| mult_order(g) == order).expect("a finite field has a primitive element");

        let mut exp = vec![0u8; 2 * order];
        let mut log = vec![0u8; q];
        let mut x = 1usize;
        for i in 0..order {
            exp[i] = x as u8;
            exp[i + order] = x as u8;
            log[x] = i as u8;
            x = mul[x * q + primitive] as usize;
        }

        let mut inv = vec![0u8; q];
        for a in 1..q {
            inv[a] = exp[(order - log[a] as usize) % order];
        }

        // Squaring is a bijection in characteristic 2.
        let mut sqrt = vec![0u8; q];
        for a in 0..q {
            sqrt[mul[a * q + a] as usize] = a as u8;
        }

        Ok(Field { k, modulus, primitive: primitive as u8, exp, log, mul, inv, sqrt })
    }

    /// GF(2^k) with the crate's fixed default modulus.
    pub fn standard(k: u32) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&k) {
            return Err(Error::InvalidDegree(k));
        }
        Field::new(k, DEFAULT_MODULI[k as usize])
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// Number of elements, `2^k`.
    pub fn order(&self) -> usize {
        1 << self.k
    }

    /// The smallest (by bit pattern) generator of the multiplicative group.
    pub fn primitive(&self) -> FieldElement {
        self.primitive
    }

    /// The element `x` of the polynomial basis (bit pattern 2), or 1 in GF(2).
    pub fn generator_x(&self) -> FieldElement {
        poly_rem(2, self.modulus) as u8
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + Clone {
        (0..self.order()).map(|x| x as u8)
    }

    pub fn nonzero(&self) -> impl Iterator<Item = FieldElement> + Clone {
        (1..self.order()).map(|x| x as u8)
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.mul[((a as usize) << self.k) | b as usize]
    }

    /// Multiplicative inverse; zero is a domain error.
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a == 0 {
            Err(Error::ZeroInverse)
        } else {
            Ok(self.inv[a as usize])
        }
    }

    /// Inverse without the zero check. `inv_unchecked(0)` is 0.
    #[inline]
    pub fn inv_unchecked(&self, a: FieldElement) -> FieldElement {
        self.inv[a as usize]
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: FieldElement, e: u64) -> FieldElement {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let order = (self.order() - 1) as u64;
        self.exp[((self.log[a as usize] as u64 * (e % order)) % order) as usize]
    }

    /// The unique square root, `a^(q/2)`.
    #[inline]
    pub fn sqrt(&self, a: FieldElement) -> FieldElement {
        self.sqrt[a as usize]
    }

    /// The automorphism `a -> a^(2^e)`.
    pub fn frobenius(&self, a: FieldElement, e: u32) -> FieldElement {
        let mut x = a;
        for _ in 0..(e % self.k) {
            x = self.mul(x, x);
        }
        x
    }

    /// Discrete log base [`Field::primitive`]; `None` for zero.
    pub fn log(&self, a: FieldElement) -> Option<u32> {
        (a != 0).then(|| self.log[a as usize] as u32)
    }

    pub fn exp(&self, i: u32) -> FieldElement {
        self.exp[(i as usize) % (self.order() - 1)]
    }

    /// Multiplicative order of a nonzero element.
    pub fn multiplicative_order(&self, a: FieldElement) -> Result<u32> {
        if a == 0 {
            return Err(Error::ZeroInverse);
        }
        let mut x = a;
        let mut n = 1;
        while x != 1 {
            x = self.mul(x, a);
            n += 1;
        }
        Ok(n)
    }

    /// Absolute trace to GF(2).
    pub fn trace(&self, a: FieldElement) -> FieldElement {
        let mut t = 0;
        let mut x = a;
        for _ in 0..self.k {
            t ^= x;
            x = self.mul(x, x);
        }
        t
    }

    /// One subfield per divisor `d` of `k`, each the fixed set of `x -> x^(2^d)`.
    pub fn subfields(&self) -> Vec<Subfield> {
        (1..=self.k)
            .filter(|d| self.k % d == 0)
            .map(|d| Subfield {
                degree: d,
                elements: self.elements().filter(|&x| self.frobenius(x, d) == x).collect(),
            })
            .collect()
    }

    pub fn subfield(&self, d: u32) -> Option<Subfield> {
        self.subfields().into_iter().find(|s| s.degree == d)
    }

    /// Coordinates of `a` in the polynomial basis `1, x, ..., x^(k-1)`.
    #[inline]
    pub fn to_bits(&self, a: FieldElement) -> u32 {
        a as u32
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subfield {
    pub degree: u32,
    pub elements: Vec<FieldElement>,
}
