//! Hyperoval representatives and their expansion into every oval class.
//!
//! A catalog is a line-oriented text file. Each record reads
//!
//! ```text
//! <k> <modulus> <name> <exponent>:<coefficient>,... [expected-oval-classes]
//! ```
//!
//! with coefficients as field elements in bit-pattern encoding. Blank lines and
//! lines starting with `#` are ignored. The coefficients give the frame
//! o-polynomial of the hyperoval `D(f) ∪ {(0,0,1)}`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};
use crate::magic::{magic_apply, normalized_orbit, ClassIndex, MagicElement};
use crate::opoly::{check_o_permutation, find_collinear_triple, oval_points, FuncTable, OPermFailure, Point, NUCLEUS};

const BUILTIN_GF8: &str = include_str!("../data/catalog-gf8.txt");
const BUILTIN_GF16: &str = include_str!("../data/catalog-gf16.txt");
const BUILTIN_GF32: &str = include_str!("../data/catalog-gf32.txt");
const BUILTIN_GF64: &str = include_str!("../data/catalog-gf64.txt");

/// Number of oval classes in PG(2, 2^k), for the fields the catalog covers.
pub fn expected_class_count(k: u32) -> Option<usize> {
    match k {
        3 => Some(2),
        4 => Some(3),
        5 => Some(35),
        6 => Some(19),
        _ => None,
    }
}

/// Published o-permutation totals for GF(32) and GF(64). These equal the
/// number of o-polynomials (`f(1) = 1`), not the number of o-permutations.
pub fn published_total(k: u32) -> Option<usize> {
    match k {
        3 => Some(70),
        4 => Some(30870),
        5 => Some(3_537_700),
        6 => Some(17_297_346),
        _ => None,
    }
}

/// The bundled catalog text for GF(2^k).
pub fn builtin_text(k: u32) -> Option<&'static str> {
    match k {
        3 => Some(BUILTIN_GF8),
        4 => Some(BUILTIN_GF16),
        5 => Some(BUILTIN_GF32),
        6 => Some(BUILTIN_GF64),
        _ => None,
    }
}

pub fn builtin(k: u32) -> Result<Vec<CatalogEntry>> {
    let text = builtin_text(k).ok_or_else(|| Error::Format(format!("no bundled catalog for k = {k}")))?;
    parse(text)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub k: u32,
    pub modulus: u32,
    pub name: String,
    /// `(exponent, coefficient)` pairs.
    pub terms: Vec<(usize, FieldElement)>,
    pub expected_classes: Option<usize>,
}

impl CatalogEntry {
    pub fn new(field: &Field, name: &str, table: &FuncTable) -> Self {
        let terms = crate::opoly::interpolate(field, table)
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c != 0)
            .collect();
        CatalogEntry { k: field.degree(), modulus: field.modulus(), name: name.to_string(), terms, expected_classes: None }
    }

    pub fn field(&self) -> Result<Field> {
        Field::new(self.k, self.modulus)
    }

    /// The value table; the field must match the entry's declaration.
    pub fn table(&self, field: &Field) -> Result<FuncTable> {
        if field.degree() != self.k || field.modulus() != self.modulus {
            return Err(Error::InvalidEntry {
                name: self.name.clone(),
                reason: format!("declared over ({}, {}), used over ({}, {})", self.k, self.modulus, field.degree(), field.modulus()),
            });
        }
        let q = field.order();
        let mut coeffs = vec![0; q];
        for &(e, c) in &self.terms {
            if e >= q || c as usize >= q {
                return Err(Error::InvalidEntry { name: self.name.clone(), reason: format!("term {e}:{c} out of range") });
            }
            coeffs[e] ^= c;
        }
        Ok(FuncTable::from_coefficients(field, &coeffs))
    }
}

impl fmt::Display for CatalogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self.terms.iter().map(|(e, c)| format!("{e}:{c}")).collect();
        write!(f, "{} {} {} {}", self.k, self.modulus, self.name, terms.join(","))?;
        if let Some(n) = self.expected_classes {
            write!(f, " {n}")?;
        }
        Ok(())
    }
}

pub fn parse(text: &str) -> Result<Vec<CatalogEntry>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::CatalogParse { line: i + 1, msg };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(4..=5).contains(&fields.len()) {
            return Err(err(format!("expected 4 or 5 fields, found {}", fields.len())));
        }
        let k = fields[0].parse().map_err(|_| err(format!("bad degree '{}'", fields[0])))?;
        let modulus = fields[1].parse().map_err(|_| err(format!("bad modulus '{}'", fields[1])))?;
        let mut terms = Vec::new();
        for t in fields[3].split(',') {
            let (e, c) = t.split_once(':').ok_or_else(|| err(format!("bad term '{t}'")))?;
            let e = e.parse().map_err(|_| err(format!("bad exponent in '{t}'")))?;
            let c = c.parse().map_err(|_| err(format!("bad coefficient in '{t}'")))?;
            terms.push((e, c));
        }
        let expected_classes = match fields.get(4) {
            Some(s) => Some(s.parse().map_err(|_| err(format!("bad class count '{s}'")))?),
            None => None,
        };
        out.push(CatalogEntry { k, modulus, name: fields[2].to_string(), terms, expected_classes });
    }
    Ok(out)
}

/// SHA-256 over the canonical rendering of the entries.
pub fn digest(entries: &[CatalogEntry]) -> String {
    let mut h = Sha256::new();
    for e in entries {
        h.update(e.to_string().as_bytes());
        h.update(b"\n");
    }
    format!("{:x}", h.finalize())
}

/// Why an entry does not describe a hyperoval.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HyperovalFailure {
    NotOPermutation(OPermFailure),
    Collinear([Point; 3]),
}

impl fmt::Display for HyperovalFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HyperovalFailure::NotOPermutation(w) => write!(f, "not an o-permutation: {w}"),
            HyperovalFailure::Collinear(p) => write!(f, "collinear points {:?} {:?} {:?}", p[0], p[1], p[2]),
        }
    }
}

/// Checks that `f` is an o-permutation and that `D(f)` plus the nucleus has no three collinear points.
pub fn check_hyperoval(field: &Field, f: &FuncTable) -> std::result::Result<(), HyperovalFailure> {
    check_o_permutation(field, f).map_err(HyperovalFailure::NotOPermutation)?;
    let mut pts = oval_points(field, f);
    pts.push(NUCLEUS);
    match find_collinear_triple(field, &pts) {
        Some((i, j, k)) => Err(HyperovalFailure::Collinear([pts[i], pts[j], pts[k]])),
        None => Ok(()),
    }
}

/// The entry's table once it has passed [`check_hyperoval`].
pub fn validate(entry: &CatalogEntry) -> Result<FuncTable> {
    let field = entry.field().map_err(|e| Error::InvalidEntry { name: entry.name.clone(), reason: e.to_string() })?;
    let f = entry.table(&field)?;
    check_hyperoval(&field, &f).map_err(|w| Error::InvalidEntry { name: entry.name.clone(), reason: w.to_string() })?;
    Ok(f)
}

/// The frame o-permutations of the `q+2` ovals inside the hyperoval of `f`.
///
/// Deleting the nucleus leaves `D(f)`; deleting `(0,1,0)` and exchanging the
/// last two coordinates gives `D(f^-1)`. For the point `(1,t,f(t))`, the
/// element `((t 1; 1 0), id)` moves it to `(0,1,0)`, after which the same
/// exchange applies.
pub fn deleted_ovals(field: &Field, f: &FuncTable) -> Result<Vec<FuncTable>> {
    let inv = |g: &FuncTable| g.inverse().ok_or_else(|| Error::NotOPermutation("not a permutation".into()));
    let mut out = vec![*f, inv(f)?];
    for t in field.elements() {
        let psi = MagicElement::new(field, [t, 1, 1, 0], 0)?;
        out.push(inv(&magic_apply(field, &psi, f)?)?);
    }
    Ok(out)
}

/// Sorted class ids of every oval inside the hyperoval of `f`, registering new classes in `index`.
pub fn ovals_from_hyperoval(index: &mut ClassIndex, f: &FuncTable) -> Result<Vec<usize>> {
    let field = index.field().clone();
    let ovals = deleted_ovals(&field, f)?;
    let ids: BTreeSet<usize> = ovals.iter().map(|g| index.classify(g)).collect();
    Ok(ids.into_iter().collect())
}

/// Slow cross-check of [`ovals_from_hyperoval`]: the classes of `f` and of
/// `g^-1` for every `g` in the orbit of `f`.
pub fn ovals_from_hyperoval_by_orbit(index: &mut ClassIndex, f: &FuncTable) -> Result<Vec<usize>> {
    let field = index.field().clone();
    let mut ids = BTreeSet::from([index.classify(f)]);
    for g in normalized_orbit(&field, f) {
        let g_inv = g.inverse().ok_or_else(|| Error::NotOPermutation("not a permutation".into()))?;
        ids.insert(index.classify(&g_inv));
    }
    Ok(ids.into_iter().collect())
}

/// Result of expanding a catalog into all oval classes of its field.
pub struct Expansion {
    pub index: ClassIndex,
    /// Per entry: name and the sorted class ids of its ovals (after label sorting).
    pub per_entry: Vec<(String, Vec<usize>)>,
}

impl Expansion {
    pub fn field(&self) -> &Field {
        self.index.field()
    }
}

/// Validates every entry, expands each hyperoval into its oval classes and
/// sorts classes by label. Fails on an invalid entry, on an entry whose
/// class count differs from its declared one, or when the total differs from
/// [`expected_class_count`].
pub fn expand(entries: &[CatalogEntry]) -> Result<Expansion> {
    let first = entries.first().ok_or(Error::EmptyPool)?;
    let field = first.field()?;
    let mut index = ClassIndex::new(field.clone());
    let mut raw = Vec::new();
    for e in entries {
        let f = validate(e)?;
        let f = crate::opoly::normalize_table(&field, &f);
        let ids = ovals_from_hyperoval(&mut index, &f)?;
        if let Some(n) = e.expected_classes {
            if n != ids.len() {
                return Err(Error::InvalidEntry {
                    name: e.name.clone(),
                    reason: format!("declares {n} oval classes, found {}", ids.len()),
                });
            }
        }
        raw.push((e.name.clone(), ids));
    }
    let before: Vec<FuncTable> = index.classes().iter().map(|c| c.label).collect();
    index.sort_by_label();
    let remap: Vec<usize> = before.iter().map(|l| index.classes().iter().position(|c| c.label == *l).unwrap()).collect();
    let per_entry = raw
        .into_iter()
        .map(|(n, ids)| {
            let mut ids: Vec<usize> = ids.into_iter().map(|i| remap[i]).collect();
            ids.sort_unstable();
            (n, ids)
        })
        .collect();
    if let Some(expected) = expected_class_count(field.degree()) {
        if index.num_classes() != expected {
            return Err(Error::ClassCountMismatch { q: field.order(), expected, found: index.num_classes() });
        }
    }
    Ok(Expansion { index, per_entry })
}

/// Every o-permutation over the catalog's field, sorted. Intended for `q <= 32`.
pub fn all_opermutations(expansion: &Expansion) -> Vec<FuncTable> {
    let field = expansion.field();
    let mut out: Vec<FuncTable> = expansion
        .index
        .all_opolynomials()
        .iter()
        .flat_map(|t| field.nonzero().map(move |l| t.scale(field, l)))
        .collect();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_catalogs_parse_and_round_trip() {
        for k in 3..=6 {
            let entries = builtin(k).unwrap();
            assert!(!entries.is_empty());
            let text: String = entries.iter().map(|e| format!("{e}\n")).collect();
            assert_eq!(parse(&text).unwrap(), entries);
        }
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = parse("# header\n3 11 conic 4:x 2\n").unwrap_err();
        assert!(matches!(err, Error::CatalogParse { line: 2, .. }));
        assert!(parse("3 11 conic\n").is_err());
    }

    #[test]
    fn identity_rejected_with_constant_quotient() {
        let f = Field::standard(3).unwrap();
        let id = FuncTable::identity(&f);
        match check_hyperoval(&f, &id) {
            Err(HyperovalFailure::NotOPermutation(OPermFailure::QuotientCollision { s: 0, .. })) => {}
            other => panic!("{other:?}"),
        }
        let entry = CatalogEntry::new(&f, "identity", &id);
        assert!(matches!(validate(&entry), Err(Error::InvalidEntry { .. })));
    }

    #[test]
    fn translation_gf32_is_hyperoval() {
        let f = Field::standard(5).unwrap();
        assert!(check_hyperoval(&f, &FuncTable::monomial(&f, 4)).is_ok());
    }

    #[test]
    fn gf16_deletion_matches_orbit_method() {
        let f = Field::standard(4).unwrap();
        let mut index = ClassIndex::new(f.clone());
        for e in builtin(4).unwrap() {
            let t = e.table(&f).unwrap();
            assert_eq!(
                ovals_from_hyperoval(&mut index, &t).unwrap(),
                ovals_from_hyperoval_by_orbit(&mut index, &t).unwrap()
            );
        }
    }
}
