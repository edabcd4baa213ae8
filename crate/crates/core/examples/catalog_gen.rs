//! Regenerates the hyperoval catalog files under `data/` from closed-form
//! constructions. Usage: `cargo run --release --example catalog_gen -- <k>`.

use pseudoval::field::{Field, FieldElement};
use pseudoval::opoly::{interpolate, is_o_permutation, normalize_table, FuncTable};

fn monomials(field: &Field, terms: &[(u64, FieldElement)]) -> FuncTable {
    FuncTable::from_fn(field, |x| {
        terms.iter().fold(0, |acc, &(e, c)| acc ^ field.mul(c, if x == 0 { 0 } else { field.pow(x, e) }))
    })
}

/// GF(2^12) by `x^12 + x^6 + x^4 + x + 1`, enough for the Adelaide construction over GF(64).
struct Gf4096;

impl Gf4096 {
    const MODULUS: u32 = 0b1_0000_0101_0011;

    fn mul(a: u32, b: u32) -> u32 {
        let (mut a, mut b, mut r) = (a, b, 0);
        while b > 0 {
            if b & 1 == 1 {
                r ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & 0x1000 != 0 {
                a ^= Self::MODULUS;
            }
        }
        r
    }

    fn pow(a: u32, mut e: u64) -> u32 {
        let (mut r, mut b) = (1, a);
        while e > 0 {
            if e & 1 == 1 {
                r = Self::mul(r, b);
            }
            b = Self::mul(b, b);
            e >>= 1;
        }
        r
    }

    fn inv(a: u32) -> u32 {
        Self::pow(a, 4094)
    }
}

/// Subiaco frame o-polynomial for parameter `d` (requires `Tr(1/d) = 1`).
fn subiaco(field: &Field, d: FieldElement) -> (FuncTable, FuncTable) {
    let m = |a, b| field.mul(a, b);
    let (d2, d3) = (m(d, d), m(m(d, d), d));
    let d4 = m(d2, d2);
    let w = 1 ^ d ^ d2;
    let den = |t: FieldElement| {
        let t2 = m(t, t);
        m(t2, t2) ^ m(d2, t2) ^ 1
    };
    let f = FuncTable::from_fn(field, |t| {
        let (t2, t4) = (m(t, t), m(m(t, t), m(t, t)));
        let t3 = m(t2, t);
        m(m(d2, t4 ^ t) ^ m(m(d2, w), t3 ^ t2), field.inv_unchecked(den(t))) ^ field.sqrt(t)
    });
    let g = FuncTable::from_fn(field, |t| {
        let (t2, t4) = (m(t, t), m(m(t, t), m(t, t)));
        let t3 = m(t2, t);
        let num = m(d4, t4) ^ m(m(d3, 1 ^ d2 ^ d4), t3) ^ m(m(d3, 1 ^ d2), t);
        m(num, field.inv_unchecked(m(w, den(t)))) ^ m(m(field.sqrt(d), field.sqrt(t)), field.inv_unchecked(w))
    });
    (f, g)
}

/// Adelaide frame o-polynomial over GF(64) for `beta` of order 65 in GF(4096).
fn adelaide(field: &Field, beta: u32) -> FuncTable {
    let root = (2..4096u32).find(|&r| Gf4096::pow(r, 6) ^ r ^ 1 == 0).unwrap();
    let embed: Vec<u32> =
        (0..64u32).map(|a| (0..6).filter(|i| a >> i & 1 == 1).fold(0, |s, i| s ^ Gf4096::pow(root, i))).collect();
    let mut back = vec![None; 4096];
    for (a, &e) in embed.iter().enumerate() {
        back[e as usize] = Some(a as FieldElement);
    }
    let trace = |x: u32| x ^ Gf4096::pow(x, 64);
    let tb = trace(beta);
    FuncTable::from_fn(field, |t| {
        let (te, st) = (embed[t as usize], embed[field.sqrt(t) as usize]);
        let a = Gf4096::mul(Gf4096::mul(trace(Gf4096::pow(beta, 21)), te ^ 1), Gf4096::inv(tb));
        let den = Gf4096::mul(tb, Gf4096::pow(te ^ Gf4096::mul(tb, st) ^ 1, 20));
        let b = Gf4096::mul(trace(Gf4096::pow(Gf4096::mul(beta, te) ^ Gf4096::pow(beta, 64), 21)), Gf4096::inv(den));
        back[(a ^ b ^ st) as usize].expect("Adelaide value outside GF(64)")
    })
}

fn entries(k: u32) -> Vec<(&'static str, FuncTable, usize)> {
    let field = Field::standard(k).unwrap();
    let q = field.order() as u64;
    let eta = field.generator_x();
    let conic = ("conic", monomials(&field, &[(q / 2, 1)]), 2);
    match k {
        3 => vec![conic],
        4 => {
            let e = |i| field.pow(eta, i);
            let ls = monomials(&field, &[(12, 1), (10, 1), (8, e(11)), (6, 1), (4, e(2)), (2, e(9))]);
            vec![conic, ("Lunelli-Sce", ls, 1)]
        }
        5 => {
            let e = |i| field.pow(eta, i);
            let mut okp = vec![(4, 1), (16, 1), (28, 1), (8, e(20)), (20, e(20)), (12, e(6)), (24, e(6))];
            okp.extend([6, 10, 14, 18, 22, 26].map(|x| (x, e(11))));
            vec![
                conic,
                ("translation", monomials(&field, &[(4, 1)]), 3),
                ("Segre", monomials(&field, &[(6, 1)]), 2),
                ("Payne", monomials(&field, &[(26, 1), (16, 1), (6, 1)]), 6),
                ("Cherowitzo", monomials(&field, &[(8, 1), (10, 1), (28, 1)]), 10),
                ("O'Keefe-Penttila", monomials(&field, &okp), 12),
            ]
        }
        6 => {
            let (f, g) = subiaco(&field, eta);
            let g = g.scale(&field, field.inv_unchecked(g.get(1)));
            // A second member of the Subiaco herd lying on the other Subiaco hyperoval.
            let sqrt = FuncTable::from_fn(&field, |t| field.sqrt(t));
            let f2 = f.add(&g).add(&sqrt.scale(&field, 41));
            let beta = (2..4096u32).find(|&b| Gf4096::pow(b, 65) == 1).unwrap();
            vec![conic, ("Subiaco-1", f, 3), ("Subiaco-2", f2, 6), ("Adelaide", adelaide(&field, beta), 8)]
        }
        _ => panic!("no catalog for k = {k}"),
    }
}

fn main() {
    let k: u32 = std::env::args().nth(1).and_then(|s| s.parse().ok()).expect("usage: catalog_gen <k>");
    let field = Field::standard(k).unwrap();
    println!("# hyperoval frame o-polynomials over GF({}), modulus {}", field.order(), field.modulus());
    println!("# k modulus name exponent:coefficient,... expected-oval-classes");
    for (name, table, classes) in entries(k) {
        assert!(is_o_permutation(&field, &table), "{name} is not an o-permutation");
        let coeffs = interpolate(&field, &normalize_table(&field, &table));
        let terms: Vec<String> =
            coeffs.iter().enumerate().filter(|(_, &c)| c != 0).map(|(e, c)| format!("{e}:{c}")).collect();
        println!("{k} {} {} {} {classes}", field.modulus(), name.replace(' ', "_"), terms.join(","));
    }
}
