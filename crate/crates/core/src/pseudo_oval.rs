//! Pseudo-ovals in PG(3n-1, 2): elementary construction by field reduction,
//! axiom checks, tangents, the nucleus swap, projection spreads, spread sets
//! and matrix coordinates of the form `D(z) = (h(z), g(z), I)`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::{field_reduce, BitMatrix, GfSubspace};
use crate::opoly::{check_o_permutation, interpolate, oval_points, FuncTable, NUCLEUS};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PseudoOval {
    pub n: u32,
    pub elements: Vec<GfSubspace>,
    pub nucleus: Option<GfSubspace>,
}

/// A concrete reason a set of subspaces is not a pseudo-oval.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PseudoOvalFailure {
    WrongCount { expected: usize, found: usize },
    WrongRank { element: usize, rank: usize },
    WrongAmbient { element: usize, ambient: u32 },
    /// Three elements whose span is a proper subspace.
    TripleDeficient { elements: [usize; 3], rank: usize },
    /// A tangent `span(X, N)` that is not of rank `2n` or meets another element.
    BadTangent { element: usize, other: Option<usize> },
}

impl fmt::Display for PseudoOvalFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PseudoOvalFailure::WrongCount { expected, found } => write!(f, "expected {expected} elements, found {found}"),
            PseudoOvalFailure::WrongRank { element, rank } => write!(f, "element {element} has rank {rank}"),
            PseudoOvalFailure::WrongAmbient { element, ambient } => write!(f, "element {element} lives in rank {ambient}"),
            PseudoOvalFailure::TripleDeficient { elements: [a, b, c], rank } => {
                write!(f, "elements {a}, {b}, {c} span only rank {rank}")
            }
            PseudoOvalFailure::BadTangent { element, other: Some(o) } => {
                write!(f, "tangent at element {element} meets element {o}")
            }
            PseudoOvalFailure::BadTangent { element, other: None } => write!(f, "tangent at element {element} has wrong rank"),
        }
    }
}

/// Field reduction of `D(f)` with nucleus `(0,0,1)`. Elements follow
/// [`oval_points`]: `(1,t,f(t))` in bit-pattern order of `t`, then `(0,1,0)`.
pub fn elementary(field: &Field, f: &FuncTable) -> Result<PseudoOval> {
    check_o_permutation(field, f).map_err(|w| Error::NotOPermutation(w.to_string()))?;
    let elements = oval_points(field, f).into_iter().map(|p| field_reduce(field, p)).collect::<Result<Vec<_>>>()?;
    let o = PseudoOval { n: field.degree(), elements, nucleus: Some(field_reduce(field, NUCLEUS)?) };
    if let Err(w) = verify(&o) {
        return Err(Error::InvariantViolation(format!("elementary pseudo-oval failed verification: {w}")));
    }
    Ok(o)
}

impl PseudoOval {
    pub fn ambient(&self) -> u32 {
        3 * self.n
    }

    /// `span(X, N)` for every element `X`. Requires the nucleus.
    pub fn tangents(&self) -> Result<Vec<GfSubspace>> {
        let nuc = self.nucleus.as_ref().ok_or_else(|| Error::InvariantViolation("nucleus unknown".into()))?;
        self.elements.iter().map(|x| x.join(nuc)).collect()
    }

    pub fn position(&self, x: &GfSubspace) -> Option<usize> {
        self.elements.iter().position(|e| e == x)
    }
}

/// Checks element count, ranks, that every three elements span the whole
/// space, and, when the nucleus is known, that each `span(X, N)` has rank
/// `2n` and meets no other element.
pub fn verify(o: &PseudoOval) -> std::result::Result<(), PseudoOvalFailure> {
    let n = o.n as usize;
    let expected = (1usize << n) + 1;
    if o.elements.len() != expected {
        return Err(PseudoOvalFailure::WrongCount { expected, found: o.elements.len() });
    }
    for (i, x) in o.elements.iter().enumerate() {
        if x.ambient() != o.ambient() {
            return Err(PseudoOvalFailure::WrongAmbient { element: i, ambient: x.ambient() });
        }
        if x.rank() != n {
            return Err(PseudoOvalFailure::WrongRank { element: i, rank: x.rank() });
        }
    }
    let m = o.elements.len();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    // first failing triple in lexicographic order
    let bad = pairs
        .par_iter()
        .filter_map(|&(i, j)| {
            let ij = o.elements[i].join(&o.elements[j]).ok()?;
            (j + 1..m).find_map(|k| {
                let r = ij.join(&o.elements[k]).map(|s| s.rank()).unwrap_or(0);
                (r != 3 * n).then_some(PseudoOvalFailure::TripleDeficient { elements: [i, j, k], rank: r })
            })
        })
        .min_by_key(|w| match w {
            PseudoOvalFailure::TripleDeficient { elements, .. } => *elements,
            _ => [usize::MAX; 3],
        });
    if let Some(w) = bad {
        return Err(w);
    }
    if let Some(nuc) = &o.nucleus {
        for (i, x) in o.elements.iter().enumerate() {
            let t = x.join(nuc).map_err(|_| PseudoOvalFailure::BadTangent { element: i, other: None })?;
            if t.rank() != 2 * n {
                return Err(PseudoOvalFailure::BadTangent { element: i, other: None });
            }
            for (j, y) in o.elements.iter().enumerate() {
                if j != i && t.join(y).map(|s| s.rank()).unwrap_or(0) != 3 * n {
                    return Err(PseudoOvalFailure::BadTangent { element: i, other: Some(j) });
                }
            }
        }
    }
    Ok(())
}

/// Replaces element `index` by the nucleus; the removed element becomes the new nucleus.
pub fn nucleus_swap(o: &PseudoOval, index: usize) -> Result<PseudoOval> {
    let nuc = o.nucleus.clone().ok_or_else(|| Error::InvariantViolation("nucleus unknown".into()))?;
    if index >= o.elements.len() {
        return Err(Error::InvariantViolation(format!("no element {index}")));
    }
    let mut elements = o.elements.clone();
    let old = std::mem::replace(&mut elements[index], nuc);
    Ok(PseudoOval { n: o.n, elements, nucleus: Some(old) })
}

/// Exchanges coordinate blocks `a` and `b` (each `n` bits) of every subspace.
pub fn swap_blocks(o: &PseudoOval, a: u32, b: u32) -> PseudoOval {
    let n = o.n;
    let mask = (1u32 << n) - 1;
    let map = |v: u32| {
        let (va, vb) = ((v >> (a * n)) & mask, (v >> (b * n)) & mask);
        (v & !(mask << (a * n)) & !(mask << (b * n))) | (va << (b * n)) | (vb << (a * n))
    };
    let conv = |s: &GfSubspace| GfSubspace::from_rows(s.ambient(), s.basis().iter().map(|&v| map(v))).unwrap();
    PseudoOval { n, elements: o.elements.iter().map(conv).collect(), nucleus: o.nucleus.as_ref().map(conv) }
}

/// A spread of the rank-`2n` space `space`, given by subspaces of it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spread {
    pub space: GfSubspace,
    pub elements: Vec<GfSubspace>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpreadFailure {
    WrongCount { expected: usize, found: usize },
    WrongRank { element: usize },
    OutsideSpace { element: usize },
    Overlap { first: usize, second: usize, vector: u32 },
    Uncovered { vector: u32 },
}

impl fmt::Display for SpreadFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpreadFailure::WrongCount { expected, found } => write!(f, "expected {expected} elements, found {found}"),
            SpreadFailure::WrongRank { element } => write!(f, "element {element} has the wrong rank"),
            SpreadFailure::OutsideSpace { element } => write!(f, "element {element} leaves the spread's space"),
            SpreadFailure::Overlap { first, second, vector } => {
                write!(f, "elements {first} and {second} share vector {vector:#b}")
            }
            SpreadFailure::Uncovered { vector } => write!(f, "vector {vector:#b} is in no element"),
        }
    }
}

/// Projects every element of `o` other than `X = o.elements[index]` from `X`
/// onto `complement` and adds `T(X) ∩ complement`. When `complement` is
/// `None`, the coordinate complement of `X` is used.
pub fn projection_spread(o: &PseudoOval, index: usize, complement: Option<&GfSubspace>) -> Result<Spread> {
    let x = o.elements.get(index).ok_or_else(|| Error::InvariantViolation(format!("no element {index}")))?;
    let space = complement.cloned().unwrap_or_else(|| x.coordinate_complement());
    if space.rank() != 2 * o.n as usize || !x.meet(&space)?.is_zero() {
        return Err(Error::InvariantViolation("projection target is not a complement".into()));
    }
    let nuc = o.nucleus.as_ref().ok_or_else(|| Error::InvariantViolation("nucleus unknown".into()))?;
    let mut elements = Vec::with_capacity(o.elements.len());
    for (i, y) in o.elements.iter().enumerate() {
        let through = if i == index { x.join(nuc)? } else { x.join(y)? };
        elements.push(through.meet(&space)?);
    }
    Ok(Spread { space, elements })
}

/// Checks that the elements are `2^n + 1` rank-`n` subspaces of the space
/// partitioning its nonzero vectors.
pub fn verify_spread(s: &Spread) -> std::result::Result<(), SpreadFailure> {
    let n = s.space.rank() / 2;
    let expected = (1usize << n) + 1;
    if s.elements.len() != expected {
        return Err(SpreadFailure::WrongCount { expected, found: s.elements.len() });
    }
    let space_vectors = s.space.vectors();
    let mut owner = std::collections::HashMap::with_capacity(space_vectors.len());
    for (i, e) in s.elements.iter().enumerate() {
        if e.rank() != n {
            return Err(SpreadFailure::WrongRank { element: i });
        }
        if !s.space.contains_subspace(e) {
            return Err(SpreadFailure::OutsideSpace { element: i });
        }
        for v in e.vectors().into_iter().filter(|&v| v != 0) {
            if let Some(&j) = owner.get(&v) {
                return Err(SpreadFailure::Overlap { first: j, second: i, vector: v });
            }
            owner.insert(v, i);
        }
    }
    match space_vectors.into_iter().find(|&v| v != 0 && !owner.contains_key(&v)) {
        Some(v) => Err(SpreadFailure::Uncovered { vector: v }),
        None => Ok(()),
    }
}

/// A spread set: `2^n` matrices, indexed by their first row, with `0` at index 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpreadSet {
    pub n: u32,
    pub matrices: Vec<BitMatrix>,
}

impl SpreadSet {
    /// Orders `matrices` by first row. Fails if two share a first row or the count is wrong.
    pub fn from_matrices(n: u32, matrices: Vec<BitMatrix>) -> Result<Self> {
        let size = 1usize << n;
        if matrices.len() != size {
            return Err(Error::InvariantViolation(format!("{} matrices, expected {size}", matrices.len())));
        }
        let mut slots: Vec<Option<BitMatrix>> = vec![None; size];
        for m in matrices {
            let z = m.rows()[0] as usize;
            if slots[z].replace(m).is_some() {
                return Err(Error::InvariantViolation(format!("two matrices with first row {z:#b}")));
            }
        }
        Ok(SpreadSet { n, matrices: slots.into_iter().map(Option::unwrap).collect() })
    }

    /// Whether every difference of distinct members is invertible.
    pub fn is_spread_set(&self) -> bool {
        let m = &self.matrices;
        (0..m.len()).all(|i| (i + 1..m.len()).all(|j| m[i].add(&m[j]).is_invertible()))
    }

    /// Right-multiplies by the inverse of the member with first row `unit`, so it becomes `I`.
    pub fn normalized(&self, unit: usize) -> Result<SpreadSet> {
        let inv = self.matrices[unit].inverse()?;
        SpreadSet::from_matrices(self.n, self.matrices.iter().map(|m| m.mul(&inv)).collect())
    }
}

/// Spread-set coordinates of `spread` with `E_0 = elements[zero]` and
/// `E_inf = elements[infinity]`: each other element is `{x + x M : x ∈ E_0}`
/// with `x M` read in the basis of `E_inf`.
pub fn spread_set(spread: &Spread, zero: usize, infinity: usize) -> Result<SpreadSet> {
    let e0 = spread.elements.get(zero).ok_or_else(|| Error::InvariantViolation("no zero axis".into()))?;
    let einf = spread.elements.get(infinity).ok_or_else(|| Error::InvariantViolation("no infinite axis".into()))?;
    let n = e0.rank() as u32;
    let basis: Vec<u32> = e0.basis().iter().chain(einf.basis()).copied().collect();
    let lo = (1u32 << n) - 1;
    let mut matrices = Vec::new();
    for (i, y) in spread.elements.iter().enumerate() {
        if i == infinity {
            continue;
        }
        let mut rows = vec![0u32; n as usize];
        let mut hit = 0u32;
        for v in y.vectors() {
            let c = GfSubspace::coordinates_in(&basis, v)
                .ok_or_else(|| Error::InvariantViolation(format!("element {i} leaves the axes' span")))?;
            let (x, z) = (c & lo, c >> n);
            if x.count_ones() == 1 {
                rows[x.trailing_zeros() as usize] = z;
                hit |= x;
            }
        }
        if hit != lo {
            return Err(Error::InvariantViolation(format!("element {i} meets the infinite axis")));
        }
        matrices.push(BitMatrix::from_rows(n, rows));
    }
    SpreadSet::from_matrices(n, matrices)
}

/// Field criterion: after normalizing by some member (the first nonzero one
/// if `unit` is `None`), the set contains `0` and `I`, is closed under
/// addition and multiplication, and is commutative.
pub fn is_desarguesian(s: &SpreadSet, unit: Option<usize>) -> bool {
    let Ok(t) = s.normalized(unit.unwrap_or(1)) else { return false };
    let id = BitMatrix::identity(t.n);
    let m = &t.matrices;
    let member = |x: &BitMatrix| m.get(x.rows()[0] as usize) == Some(x);
    if !m[0].is_zero() || !member(&id) {
        return false;
    }
    m.iter().all(|a| {
        m.iter().all(|b| {
            let ab = a.mul(b);
            member(&a.add(b)) && member(&ab) && ab == b.mul(a)
        })
    })
}

/// Matrix coordinates of a pseudo-oval with nucleus, in the frame with
/// `X_inf` first, the nucleus second and `X_0` third: every other element is
/// `{ (y h(z), y g(z), y) }`, indexed by `z`, the first row of `h(z)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SteinkeCoordinates {
    pub n: u32,
    /// Basis of the frame: `X_inf`, `N`, `X_0`, each `n` rows.
    pub frame: Vec<u32>,
    pub h: Vec<BitMatrix>,
    pub g: Vec<BitMatrix>,
    /// Element index of `X_z` in the source pseudo-oval, by `z`.
    pub element_of: Vec<usize>,
    pub infinity: usize,
}

pub fn steinke_coordinates(o: &PseudoOval, infinity: usize, zero: usize) -> Result<SteinkeCoordinates> {
    let n = o.n;
    let nuc = o.nucleus.as_ref().ok_or_else(|| Error::InvariantViolation("nucleus unknown".into()))?;
    let (xi, x0) = (&o.elements[infinity], &o.elements[zero]);
    let frame: Vec<u32> = xi.basis().iter().chain(nuc.basis()).chain(x0.basis()).copied().collect();
    if GfSubspace::from_rows(3 * n, frame.iter().copied())?.rank() != 3 * n as usize {
        return Err(Error::SingularMatrix);
    }
    let lo = (1u32 << n) - 1;
    let size = 1usize << n;
    let mut h = vec![None; size];
    let mut g = vec![BitMatrix::zero(n); size];
    let mut element_of = vec![usize::MAX; size];
    for (i, x) in o.elements.iter().enumerate() {
        if i == infinity {
            continue;
        }
        let (mut hr, mut gr) = (vec![0u32; n as usize], vec![0u32; n as usize]);
        let mut hit = 0u32;
        for v in x.vectors() {
            let c = GfSubspace::coordinates_in(&frame, v).ok_or(Error::SingularMatrix)?;
            let y = (c >> (2 * n)) & lo;
            if y.count_ones() == 1 {
                let r = y.trailing_zeros() as usize;
                hr[r] = c & lo;
                gr[r] = (c >> n) & lo;
                hit |= y;
            }
        }
        if hit != lo {
            return Err(Error::InvariantViolation(format!("element {i} meets the tangent at infinity")));
        }
        let hm = BitMatrix::from_rows(n, hr);
        let z = hm.rows()[0] as usize;
        if h[z].is_some() {
            return Err(Error::InvariantViolation(format!("two elements share the label {z}")));
        }
        h[z] = Some(hm);
        g[z] = BitMatrix::from_rows(n, gr);
        element_of[z] = i;
    }
    let h: Vec<BitMatrix> = h.into_iter().map(|m| m.ok_or_else(|| Error::InvariantViolation("label gap".into()))).collect::<Result<_>>()?;
    Ok(SteinkeCoordinates { n, frame, h, g, element_of, infinity })
}

impl SteinkeCoordinates {
    /// `g` as a spread set.
    pub fn g_spread_set(&self) -> Result<SpreadSet> {
        SpreadSet::from_matrices(self.n, self.g.clone())
    }
}

/// File form of a pseudo-oval: `n`, `q`, source o-polynomial coefficients, class label and bases.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PseudoOvalFile {
    pub n: u32,
    pub q: usize,
    pub source: Vec<(usize, u8)>,
    pub class_label: Option<Vec<(usize, u8)>>,
    pub elements: Vec<Vec<u32>>,
    pub nucleus: Option<Vec<u32>>,
}

impl PseudoOvalFile {
    pub fn from_oval(field: &Field, f: &FuncTable, o: &PseudoOval, label: Option<&FuncTable>) -> Self {
        let terms = |t: &FuncTable| interpolate(field, t).into_iter().enumerate().filter(|&(_, c)| c != 0).collect();
        PseudoOvalFile {
            n: o.n,
            q: 1 << o.n,
            source: terms(f),
            class_label: label.map(terms),
            elements: o.elements.iter().map(|e| e.basis().to_vec()).collect(),
            nucleus: o.nucleus.as_ref().map(|e| e.basis().to_vec()),
        }
    }

    /// Rebuilds the subspaces from their rows; rows are re-reduced, not trusted.
    pub fn to_pseudo_oval(&self) -> Result<PseudoOval> {
        let amb = 3 * self.n;
        let elements = self.elements.iter().map(|r| GfSubspace::from_rows(amb, r.iter().copied())).collect::<Result<_>>()?;
        let nucleus = self.nucleus.as_ref().map(|r| GfSubspace::from_rows(amb, r.iter().copied())).transpose()?;
        Ok(PseudoOval { n: self.n, elements, nucleus })
    }
}
