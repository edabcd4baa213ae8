//! The magic action of PΓL(2,q) on functions vanishing at zero.
//!
//! For `psi = (A, gamma)` with `A = (a b; c d)`,
//!
//! ```text
//! psi f(x) = |A|^(-1/2) [ (bx+d) f^gamma((ax+c)/(bx+d)) + b x f^gamma(a/b) + d f^gamma(c/d) ]
//! ```
//!
//! where every term `v f(u/v)` with `v = 0` is taken to be zero. Writing
//! `F(u, v) = v f(u/v)` for the homogenized function, `psi f` is the unique
//! function vanishing at `0` and `1` (in the projective sense) that agrees with
//! `|A|^(-1/2) F((x,1) A)` up to a linear term. From that description the
//! composition law follows: `(A, gamma)(B, delta) = (A B^gamma, gamma delta)`,
//! with the right-hand factor applied first.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};
use crate::opoly::{self, normalize_table, FuncTable, OPolynomial};

/// An element `(A, gamma)` of PΓL(2,q); `gamma` is `x -> x^(2^frobenius)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MagicElement {
    /// Row-major `a, b, c, d`.
    pub matrix: [FieldElement; 4],
    pub frobenius: u32,
}

impl MagicElement {
    pub fn new(field: &Field, matrix: [FieldElement; 4], frobenius: u32) -> Result<Self> {
        let m = MagicElement { matrix, frobenius: frobenius % field.degree() };
        if m.det(field) == 0 {
            return Err(Error::SingularMatrix);
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        MagicElement { matrix: [1, 0, 0, 1], frobenius: 0 }
    }

    pub fn det(&self, field: &Field) -> FieldElement {
        let [a, b, c, d] = self.matrix;
        field.mul(a, d) ^ field.mul(b, c)
    }

    /// `self ∘ other`: `other` acts first.
    pub fn compose(&self, field: &Field, other: &MagicElement) -> MagicElement {
        let [a, b, c, d] = self.matrix;
        let [e, f, g, h] = other.matrix.map(|x| field.frobenius(x, self.frobenius));
        let m = |x, y| field.mul(x, y);
        MagicElement {
            matrix: [m(a, e) ^ m(b, g), m(a, f) ^ m(b, h), m(c, e) ^ m(d, g), m(c, f) ^ m(d, h)],
            frobenius: (self.frobenius + other.frobenius) % field.degree(),
        }
    }

    /// The unipotent lower-triangular generator `(1 0; 1 1)`.
    pub fn transvection() -> Self {
        MagicElement { matrix: [1, 0, 1, 1], frobenius: 0 }
    }

    /// `(g 0; 0 1)` for the field's primitive element `g`.
    pub fn diagonal(field: &Field) -> Self {
        MagicElement { matrix: [field.primitive(), 0, 0, 1], frobenius: 0 }
    }

    /// The coordinate swap `(0 1; 1 0)`.
    pub fn swap() -> Self {
        MagicElement { matrix: [0, 1, 1, 0], frobenius: 0 }
    }

    /// `(I, x -> x^2)`.
    pub fn frobenius_map() -> Self {
        MagicElement { matrix: [1, 0, 0, 1], frobenius: 1 }
    }

    /// Generators of PΓL(2,q) used for orbit closure.
    pub fn generators(field: &Field) -> Vec<MagicElement> {
        let mut g = vec![MagicElement::transvection(), MagicElement::diagonal(field), MagicElement::swap()];
        if field.degree() > 1 {
            g.push(MagicElement::frobenius_map());
        }
        g
    }
}

/// Applies `psi` to `f`. Fails only for a singular matrix.
pub fn magic_apply(field: &Field, psi: &MagicElement, f: &FuncTable) -> Result<FuncTable> {
    let det = psi.det(field);
    if det == 0 {
        return Err(Error::SingularMatrix);
    }
    Ok(apply_unchecked(field, psi, field.sqrt(field.inv_unchecked(det)), f))
}

#[inline]
fn apply_unchecked(field: &Field, psi: &MagicElement, scale: FieldElement, f: &FuncTable) -> FuncTable {
    let g = if psi.frobenius == 0 { *f } else { f.conjugate(field, psi.frobenius) };
    let homog = |u: FieldElement, v: FieldElement| if v == 0 { 0 } else { field.mul(v, g.get(field.mul(u, field.inv_unchecked(v)))) };
    let [a, b, c, d] = psi.matrix;
    let gab = homog(a, b);
    let gcd = homog(c, d);
    FuncTable::from_fn(field, |x| {
        let u = field.mul(a, x) ^ c;
        let v = field.mul(b, x) ^ d;
        field.mul(scale, homog(u, v) ^ field.mul(x, gab) ^ gcd)
    })
}

/// Precomputed generator data for repeated orbit work.
struct GeneratorSet {
    elements: Vec<(MagicElement, FieldElement)>,
}

impl GeneratorSet {
    fn new(field: &Field, elements: Vec<MagicElement>) -> Self {
        let elements = elements.into_iter().map(|m| (m, field.sqrt(field.inv_unchecked(m.det(field))))).collect();
        GeneratorSet { elements }
    }

    fn images<'a>(&'a self, field: &'a Field, f: &'a FuncTable) -> impl Iterator<Item = FuncTable> + 'a {
        self.elements.iter().map(move |(m, s)| normalize_table(field, &apply_unchecked(field, m, *s, f)))
    }
}

/// The magic-action orbit of `<f>`, as the sorted list of its o-polynomials (`f(1) = 1`).
///
/// Breadth-first closure over [`MagicElement::generators`]; each frontier is
/// expanded in parallel and merged into the visited set.
pub fn normalized_orbit(field: &Field, f: &FuncTable) -> Vec<FuncTable> {
    normalized_orbit_with(field, f, MagicElement::generators(field))
}

pub fn normalized_orbit_with(field: &Field, f: &FuncTable, generators: Vec<MagicElement>) -> Vec<FuncTable> {
    let gens = GeneratorSet::new(field, generators);
    let start = normalize_table(field, f);
    let mut visited: HashSet<FuncTable> = HashSet::from([start]);
    let mut frontier = vec![start];
    while !frontier.is_empty() {
        let images: Vec<FuncTable> = if frontier.len() > 256 {
            frontier.par_iter().flat_map_iter(|t| gens.images(field, t).collect::<Vec<_>>()).collect()
        } else {
            frontier.iter().flat_map(|t| gens.images(field, t)).collect()
        };
        frontier = images.into_iter().filter(|t| visited.insert(*t)).collect();
    }
    let mut out: Vec<FuncTable> = visited.into_iter().collect();
    out.sort_unstable();
    out
}

/// The full orbit of o-permutations: every nonzero scalar multiple of every
/// member of [`normalized_orbit`]. Sorted.
pub fn orbit(field: &Field, f: &FuncTable) -> Vec<FuncTable> {
    let mut out: Vec<FuncTable> =
        normalized_orbit(field, f).iter().flat_map(|t| field.nonzero().map(move |l| t.scale(field, l))).collect();
    out.sort_unstable();
    out
}

/// Whether `psi f` lies in `<g>` for some `psi`.
pub fn equivalent(field: &Field, f: &FuncTable, g: &FuncTable) -> bool {
    let target = normalize_table(field, g);
    normalized_orbit(field, f).binary_search(&target).is_ok()
}

/// The lexicographically least o-polynomial in the class of `f`.
pub fn class_label(field: &Field, f: &FuncTable) -> OPolynomial {
    let table = normalized_orbit(field, f)[0];
    OPolynomial { table, coefficients: opoly::interpolate(field, &table) }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassInfo {
    pub label: FuncTable,
    /// Number of o-polynomials in the class; the class holds `(q-1) * size` o-permutations.
    pub size: usize,
}

/// Incremental classifier over o-polynomials.
///
/// Each class keeps only its label and the sorted 128-bit fingerprints of its
/// members (16 bytes per o-polynomial, about 280 MB for GF(64)); orbits are
/// regenerated from the label when the tables themselves are needed.
pub struct ClassIndex {
    field: Field,
    classes: Vec<ClassInfo>,
    fingerprints: Vec<Vec<u128>>,
}

impl ClassIndex {
    pub fn new(field: Field) -> Self {
        ClassIndex { field, classes: Vec::new(), fingerprints: Vec::new() }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Class id of `f`, computing its orbit on first sight.
    pub fn classify(&mut self, f: &FuncTable) -> usize {
        if let Some(id) = self.lookup(f) {
            return id;
        }
        let orbit = normalized_orbit(&self.field, f);
        self.insert_orbit(&orbit)
    }

    /// Registers a precomputed orbit (sorted, normalized). Returns its class id.
    pub fn insert_orbit(&mut self, orbit: &[FuncTable]) -> usize {
        if let Some(id) = orbit.first().and_then(|t| self.lookup(t)) {
            return id;
        }
        let mut fps: Vec<u128> = orbit.iter().map(FuncTable::fingerprint).collect();
        fps.sort_unstable();
        self.classes.push(ClassInfo { label: orbit[0], size: orbit.len() });
        self.fingerprints.push(fps);
        self.classes.len() - 1
    }

    pub fn lookup(&self, f: &FuncTable) -> Option<usize> {
        let fp = normalize_table(&self.field, f).fingerprint();
        self.fingerprints.iter().position(|v| v.binary_search(&fp).is_ok())
    }

    pub fn classes(&self) -> &[ClassInfo] {
        &self.classes
    }

    /// Regenerates the sorted orbit of class `id`.
    pub fn orbit(&self, id: usize) -> Vec<FuncTable> {
        normalized_orbit(&self.field, &self.classes[id].label)
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    /// Total number of o-polynomials over all registered classes.
    pub fn num_opolynomials(&self) -> usize {
        self.classes.iter().map(|c| c.size).sum()
    }

    /// Total number of o-permutations, `(q-1)` per o-polynomial.
    pub fn num_opermutations(&self) -> usize {
        self.num_opolynomials() * (self.field.order() - 1)
    }

    /// Reorders classes by label so ids are independent of discovery order.
    pub fn sort_by_label(&mut self) {
        let mut order: Vec<usize> = (0..self.classes.len()).collect();
        order.sort_by_key(|&i| self.classes[i].label);
        self.classes = order.iter().map(|&i| self.classes[i].clone()).collect();
        self.fingerprints = order.iter().map(|&i| std::mem::take(&mut self.fingerprints[i])).collect();
    }

    /// Every o-polynomial, class-label-major then lexicographic.
    pub fn all_opolynomials(&self) -> Vec<FuncTable> {
        (0..self.classes.len()).flat_map(|id| self.orbit(id)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opoly::{brute_force_opermutations, is_o_permutation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gf(k: u32) -> Field {
        Field::standard(k).unwrap()
    }

    fn random_element(field: &Field, rng: &mut impl Rng) -> MagicElement {
        loop {
            let q = field.order() as u8;
            let m = [rng.gen_range(0..q), rng.gen_range(0..q), rng.gen_range(0..q), rng.gen_range(0..q)];
            if let Ok(e) = MagicElement::new(field, m, rng.gen_range(0..field.degree())) {
                return e;
            }
        }
    }

    #[test]
    fn identity_acts_trivially() {
        let f = gf(4);
        let t = FuncTable::monomial(&f, 6);
        assert_eq!(magic_apply(&f, &MagicElement::identity(), &t).unwrap(), t);
    }

    #[test]
    fn scalar_matrices_act_trivially() {
        let f = gf(3);
        for t in brute_force_opermutations(&f).unwrap() {
            for c in f.nonzero() {
                let psi = MagicElement::new(&f, [c, 0, 0, c], 0).unwrap();
                assert_eq!(magic_apply(&f, &psi, &t).unwrap(), t);
            }
        }
    }

    #[test]
    fn frobenius_element_conjugates_coefficients() {
        let f = gf(5);
        let t = FuncTable::from_coefficients(&f, &[0, 0, 3, 0, 9, 0, 1]);
        let out = magic_apply(&f, &MagicElement::frobenius_map(), &t).unwrap();
        let coeffs = opoly::interpolate(&f, &t);
        let squared: Vec<u8> = coeffs.iter().map(|&c| f.mul(c, c)).collect();
        assert_eq!(opoly::interpolate(&f, &out), squared);
    }

    #[test]
    fn singular_matrix_rejected() {
        let f = gf(3);
        assert!(matches!(MagicElement::new(&f, [1, 1, 1, 1], 0), Err(Error::SingularMatrix)));
        let bad = MagicElement { matrix: [2, 4, 1, 2], frobenius: 0 };
        assert!(magic_apply(&f, &bad, &FuncTable::monomial(&f, 2)).is_err());
    }

    #[test]
    fn results_vanish_at_zero() {
        let f = gf(4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let psi = random_element(&f, &mut rng);
            let vals: Vec<u8> = (0..16).map(|x| if x == 0 { 0 } else { rng.gen_range(0..16) }).collect();
            let t = FuncTable::from_values(&vals).unwrap();
            assert!(magic_apply(&f, &psi, &t).unwrap().vanishes_at_zero());
        }
    }

    #[test]
    fn composition_law_random() {
        let f = gf(4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let psi = random_element(&f, &mut rng);
            let phi = random_element(&f, &mut rng);
            let vals: Vec<u8> = (0..16).map(|x| if x == 0 { 0 } else { rng.gen_range(0..16) }).collect();
            let t = FuncTable::from_values(&vals).unwrap();
            let lhs = magic_apply(&f, &psi.compose(&f, &phi), &t).unwrap();
            let rhs = magic_apply(&f, &psi, &magic_apply(&f, &phi, &t).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn gf8_orbits_partition_the_70() {
        let f = gf(3);
        let conic = FuncTable::monomial(&f, 4);
        let pointed = FuncTable::monomial(&f, 2);
        let a = orbit(&f, &conic);
        let b = orbit(&f, &pointed);
        assert_eq!(a.len() + b.len(), 70);
        assert!(a.iter().all(|t| b.binary_search(t).is_err()));
        assert!(a.iter().all(|t| is_o_permutation(&f, t)));
        // closure: generators add nothing new
        let norm = normalized_orbit(&f, &conic);
        for t in &norm {
            for g in MagicElement::generators(&f) {
                let img = normalize_table(&f, &magic_apply(&f, &g, t).unwrap());
                assert!(norm.binary_search(&img).is_ok());
            }
        }
    }

    #[test]
    fn equivalence_examples() {
        let f = gf(3);
        let conic = FuncTable::monomial(&f, 4);
        let pointed = FuncTable::monomial(&f, 2);
        assert!(equivalent(&f, &pointed, &pointed.scale(&f, 5)));
        assert!(!equivalent(&f, &pointed, &conic));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let psi = random_element(&f, &mut rng);
            assert!(equivalent(&f, &conic, &magic_apply(&f, &psi, &conic).unwrap()));
        }
    }

    #[test]
    fn class_label_is_idempotent() {
        let f = gf(4);
        let t = FuncTable::monomial(&f, 2);
        let l = class_label(&f, &t);
        assert_eq!(class_label(&f, &l.table), l);
        assert_eq!(l.table.get(1), 1);
    }
}
