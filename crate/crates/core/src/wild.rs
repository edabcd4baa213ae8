//! Wild subspaces of o-permutations and the search that bounds their kernels.
//!
//! A Wild subspace over GF(2^n) is an additive group of `2^n` functions whose
//! nonzero members are all o-permutations. Given an o-polynomial `f` and
//! `a ∉ {0,1}`, any Wild subspace through `f` with full value map at `1`
//! contains an o-polynomial `h` with `(1+a)^-1 (f + a h)` an o-permutation.
//! When the only such `h` in the pool of all o-polynomials is `f` itself, every
//! Wild subspace through `f` is `GF(2^n) f`, so its kernel is the whole field.

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::OrbitCache;
use crate::catalog::{self, CatalogEntry};
use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};
use crate::magic::normalized_orbit;
use crate::opoly::{interpolate, is_o_permutation, normalize_table, FuncTable};

/// All sums of subsets of `generators`, sorted and deduplicated.
pub fn additive_closure(generators: &[FuncTable]) -> Vec<FuncTable> {
    let q = generators.first().map_or(2, FuncTable::q);
    let mut set = BTreeSet::from([FuncTable::zero(q)]);
    for g in generators {
        let shifted: Vec<FuncTable> = set.iter().map(|t| t.add(g)).collect();
        set.extend(shifted);
    }
    set.into_iter().collect()
}

/// Whether the additive set `members` is Wild: every nonzero member is an
/// o-permutation and distinct members take distinct values at `1`.
pub fn is_wild(field: &Field, members: &[FuncTable]) -> bool {
    let mut at_one = 0u64;
    for t in members {
        let v = t.get(1);
        if at_one >> v & 1 == 1 {
            return false;
        }
        at_one |= 1 << v;
        if t.values().iter().any(|&x| x != 0) && !is_o_permutation(field, t) {
            return false;
        }
    }
    true
}

/// Degree of the largest subfield `GF(2^d)` with `GF(2^d) W ⊆ W`.
/// `members` must be sorted.
pub fn kernel(field: &Field, members: &[FuncTable]) -> u32 {
    let mut subs = field.subfields();
    subs.sort_by_key(|s| std::cmp::Reverse(s.degree));
    for s in subs {
        let closed = members
            .iter()
            .all(|w| s.elements.iter().all(|&l| members.binary_search(&w.scale(field, l)).is_ok()));
        if closed {
            return s.degree;
        }
    }
    1
}

/// Whether `(1+a)^-1 (f + a h)` is an o-permutation. The scalar does not
/// affect the property, so `f + a h` is tested directly.
#[inline]
pub fn passes(field: &Field, f: &FuncTable, a: FieldElement, h: &FuncTable) -> bool {
    let p = FuncTable::from_fn(field, |x| f.get(x) ^ field.mul(a, h.get(x)));
    is_o_permutation(field, &p)
}

/// Every `h` in `pool` with `(1+a)^-1 (f + a h)` an o-permutation, in pool order.
pub fn proposition_search(field: &Field, f: &FuncTable, a: FieldElement, pool: &[FuncTable]) -> Result<Vec<FuncTable>> {
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    if a == 0 || a == 1 {
        return Err(Error::InvariantViolation(format!("a = {a} must lie outside GF(2)")));
    }
    Ok(pool.par_iter().filter(|h| passes(field, f, a, h)).copied().collect())
}

/// Every Wild subspace with full value map at `1`, found by choosing for each
/// basis element `2^i` of GF(2^n) an o-permutation taking that value at `1`.
/// `opolys` must be all o-polynomials of the field. Feasible for `q <= 8`.
pub fn enumerate_wild_subspaces(field: &Field, opolys: &[FuncTable]) -> Result<Vec<Vec<FuncTable>>> {
    let n = field.degree();
    let combos = (opolys.len() as f64).powi(n as i32);
    if combos > 1e7 {
        return Err(Error::FieldTooLarge(field.order()));
    }
    let choices: Vec<Vec<FuncTable>> =
        (0..n).map(|i| opolys.iter().map(|t| t.scale(field, 1 << i)).collect()).collect();
    let mut found = BTreeSet::new();
    let mut idx = vec![0usize; n as usize];
    loop {
        let gens: Vec<FuncTable> = idx.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
        let members = additive_closure(&gens);
        if is_wild(field, &members) {
            found.insert(members);
        }
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return Ok(found.into_iter().collect());
            }
            idx[pos] += 1;
            if idx[pos] < opolys.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClassifyConfig {
    pub n: u32,
    /// Values of `a`; empty means the default for `n`.
    pub a_values: Vec<FieldElement>,
    pub all_a: bool,
    pub checkpoint: Option<PathBuf>,
    pub checkpoint_interval: usize,
    pub resume: bool,
    /// Stop after this many pool candidates in this invocation (interruption testing).
    pub stop_after: Option<usize>,
    pub timings: bool,
    /// Print progress and an ETA to stderr after each chunk.
    pub progress: bool,
}

impl ClassifyConfig {
    pub fn new(n: u32) -> Self {
        ClassifyConfig {
            n,
            a_values: Vec::new(),
            all_a: false,
            checkpoint: None,
            checkpoint_interval: 1 << 18,
            resume: false,
            stop_after: None,
            timings: true,
            progress: false,
        }
    }

    /// All `a ∉ {0,1}` for `n <= 4` or with `all_a`, otherwise the primitive element.
    pub fn resolved_a(&self, field: &Field) -> Vec<FieldElement> {
        if !self.a_values.is_empty() {
            return self.a_values.clone();
        }
        if self.all_a || self.n <= 4 {
            field.elements().filter(|&a| a > 1).collect()
        } else {
            vec![field.primitive()]
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSummary {
    /// Coefficients of the class label as `(exponent, coefficient)`.
    pub label: Vec<(usize, FieldElement)>,
    pub opolynomials: usize,
    /// Catalog entries whose hyperoval contains this class.
    pub hyperovals: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Survivor {
    pub class: usize,
    pub a: FieldElement,
    pub h: FuncTable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub class: usize,
    pub a: FieldElement,
    pub pool_size: usize,
    pub survivors: Vec<FuncTable>,
    pub only_f: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub n: u32,
    pub q: usize,
    pub modulus: u32,
    pub catalog_digest: String,
    pub classes: Vec<ClassSummary>,
    pub expected_classes: Option<usize>,
    pub opolynomials: usize,
    pub opermutations: usize,
    pub published_total: Option<usize>,
    pub a_values: Vec<FieldElement>,
    pub complete: bool,
    pub candidates_tested: usize,
    pub records: Vec<SearchRecord>,
    /// Every search returned exactly `{f}`.
    pub all_kernels_full: bool,
    pub non_elementary: Vec<Survivor>,
    /// Pseudo-ovals, TGQs and elation Laguerre planes counted by class.
    pub pseudo_ovals: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_seconds: Option<f64>,
}

impl ClassificationReport {
    /// Whether the class count equals the expected one and no extra survivors exist.
    pub fn passes(&self) -> bool {
        self.complete && self.all_kernels_full && Some(self.classes.len()) == self.expected_classes
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "GF({}): {} classes ({} expected), {} o-polynomials, {} o-permutations",
            self.q,
            self.classes.len(),
            self.expected_classes.map_or("?".into(), |e| e.to_string()),
            self.opolynomials,
            self.opermutations
        );
        if let Some(p) = self.published_total {
            s += &format!("; published total {p} {}", total_note(p, self.opolynomials, self.opermutations));
        }
        if !self.complete {
            s += &format!("\nincomplete: {} candidates tested", self.candidates_tested);
        } else if self.all_kernels_full {
            s += &format!("\nall Wild subspaces have kernel GF({}); {} pseudo-ovals, all elementary", self.q, self.pseudo_ovals);
        } else {
            s += &format!("\nnon-elementary candidate found: {} extra survivors", self.non_elementary.len());
        }
        if let Some(t) = self.wall_seconds {
            s += &format!("\nwall time {t:.1} s");
        }
        s
    }
}

/// How a published total relates to the computed counts.
pub fn total_note(published: usize, opolynomials: usize, opermutations: usize) -> &'static str {
    if published == opermutations {
        "matches the o-permutation count"
    } else if published == opolynomials {
        "matches the o-polynomial count, not the o-permutation count"
    } else {
        "matches neither count"
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Checkpoint {
    version: u32,
    n: u32,
    modulus: u32,
    catalog_digest: String,
    a_values: Vec<FieldElement>,
    /// Next class of the pool to scan and the offset inside its sorted orbit.
    class: usize,
    offset: usize,
    tested: usize,
    survivors: Vec<Survivor>,
}

/// Runs the full classification for GF(2^n) from the bundled catalog.
pub fn classify(config: &ClassifyConfig, cache: Option<&OrbitCache>) -> Result<ClassificationReport> {
    classify_with(&catalog::builtin(config.n)?, config, cache)
}

pub fn classify_with(entries: &[CatalogEntry], config: &ClassifyConfig, cache: Option<&OrbitCache>) -> Result<ClassificationReport> {
    let start = Instant::now();
    let expansion = catalog::expand(entries)?;
    let field = expansion.field().clone();
    if field.degree() != config.n {
        return Err(Error::InvalidEntry { name: entries[0].name.clone(), reason: format!("catalog is not over GF(2^{})", config.n) });
    }
    let digest = catalog::digest(entries);
    let a_values = config.resolved_a(&field);
    let labels: Vec<FuncTable> = expansion.index.classes().iter().map(|c| c.label).collect();
    let sizes: Vec<usize> = expansion.index.classes().iter().map(|c| c.size).collect();
    let pool_size: usize = sizes.iter().sum();

    let mut state = Checkpoint {
        version: 1,
        n: config.n,
        modulus: field.modulus(),
        catalog_digest: digest.clone(),
        a_values: a_values.clone(),
        class: 0,
        offset: 0,
        tested: 0,
        survivors: Vec::new(),
    };
    if config.resume {
        if let Some(path) = config.checkpoint.as_ref().filter(|p| p.exists()) {
            let saved: Checkpoint = serde_json::from_slice(&fs::read(path)?)?;
            if saved.n != state.n || saved.modulus != state.modulus || saved.catalog_digest != digest || saved.a_values != a_values {
                return Err(Error::Format("checkpoint was written for a different configuration".into()));
            }
            state = saved;
        }
    }
    let save = |state: &Checkpoint| -> Result<()> {
        if let Some(path) = &config.checkpoint {
            let tmp = path.with_extension("tmp");
            fs::write(&tmp, serde_json::to_vec(state)?)?;
            fs::rename(&tmp, path)?;
        }
        Ok(())
    };

    let mut budget = config.stop_after.unwrap_or(usize::MAX);
    let interval = config.checkpoint_interval.max(1);
    while state.class < labels.len() && budget > 0 {
        let orbit = match cache {
            Some(c) => c.orbit(&field, &labels[state.class])?,
            None => normalized_orbit(&field, &labels[state.class]),
        };
        while state.offset < orbit.len() && budget > 0 {
            let end = orbit.len().min(state.offset.saturating_add(interval)).min(state.offset.saturating_add(budget));
            let chunk = &orbit[state.offset..end];
            let (field, labels, a_values) = (&field, &labels, &a_values);
            let mut found: Vec<Survivor> = chunk
                .par_iter()
                .flat_map_iter(|h| {
                    let mut hits = Vec::new();
                    for (class, f) in labels.iter().enumerate() {
                        for &a in a_values {
                            if passes(field, f, a, h) {
                                hits.push(Survivor { class, a, h: *h });
                            }
                        }
                    }
                    hits
                })
                .collect();
            state.survivors.append(&mut found);
            budget -= end - state.offset;
            state.tested += end - state.offset;
            state.offset = end;
            save(&state)?;
            if config.progress {
                let done = state.tested as f64 / pool_size as f64;
                let elapsed = start.elapsed().as_secs_f64();
                let eta = if done > 0.0 { elapsed * (1.0 - done) / done } else { 0.0 };
                eprintln!(
                    "class {}/{} tested {}/{} ({:.1}%), {} survivors, elapsed {elapsed:.0} s, eta {eta:.0} s",
                    state.class + 1,
                    labels.len(),
                    state.tested,
                    pool_size,
                    100.0 * done,
                    state.survivors.len()
                );
            }
        }
        if state.offset == orbit.len() {
            state.class += 1;
            state.offset = 0;
            save(&state)?;
        }
    }
    let complete = state.class == labels.len();

    let mut records = Vec::new();
    let mut non_elementary = Vec::new();
    for (class, f) in labels.iter().enumerate() {
        for &a in &a_values {
            let survivors: Vec<FuncTable> =
                state.survivors.iter().filter(|s| s.class == class && s.a == a).map(|s| s.h).collect();
            let only_f = survivors == [*f];
            non_elementary.extend(state.survivors.iter().filter(|s| s.class == class && s.a == a && s.h != *f).cloned());
            records.push(SearchRecord { class, a, pool_size, survivors, only_f });
        }
    }
    let all_kernels_full = complete && records.iter().all(|r| r.only_f);

    let classes = labels
        .iter()
        .enumerate()
        .map(|(id, l)| ClassSummary {
            label: interpolate(&field, l).into_iter().enumerate().filter(|&(_, c)| c != 0).collect(),
            opolynomials: sizes[id],
            hyperovals: expansion.per_entry.iter().filter(|(_, ids)| ids.contains(&id)).map(|(n, _)| n.clone()).collect(),
        })
        .collect();
    Ok(ClassificationReport {
        n: config.n,
        q: field.order(),
        modulus: field.modulus(),
        catalog_digest: digest,
        classes,
        expected_classes: catalog::expected_class_count(config.n),
        opolynomials: pool_size,
        opermutations: pool_size * (field.order() - 1),
        published_total: catalog::published_total(config.n),
        a_values,
        complete,
        candidates_tested: state.tested,
        records,
        all_kernels_full,
        non_elementary,
        pseudo_ovals: if all_kernels_full { labels.len() } else { 0 },
        wall_seconds: config.timings.then(|| start.elapsed().as_secs_f64()),
    })
}

/// Survivors of [`proposition_search`] for one representative, normalized.
pub fn survivors_for(field: &Field, f: &FuncTable, a: FieldElement, pool: &[FuncTable]) -> Result<Vec<FuncTable>> {
    let f = normalize_table(field, f);
    proposition_search(field, &f, a, pool)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(k: u32) -> Field {
        Field::standard(k).unwrap()
    }

    #[test]
    fn scalar_space_is_wild_with_full_kernel() {
        let f = gf(3);
        let x4 = FuncTable::monomial(&f, 4);
        let w: Vec<FuncTable> = {
            let mut v: Vec<FuncTable> = f.elements().map(|l| x4.scale(&f, l)).collect();
            v.sort();
            v
        };
        assert!(is_wild(&f, &w));
        assert_eq!(kernel(&f, &w), 3);
    }

    #[test]
    fn one_dimensional_space() {
        let f = gf(3);
        let w = additive_closure(&[FuncTable::monomial(&f, 2)]);
        assert_eq!(w.len(), 2);
        assert!(is_wild(&f, &w));
        // n = 1 in the sense of the subfield GF(2) only
        let g1 = gf(1);
        let w1 = additive_closure(&[FuncTable::identity(&g1)]);
        assert!(is_wild(&g1, &w1));
        assert_eq!(kernel(&g1, &w1), 1);
    }

    #[test]
    fn mixed_space_matches_sum_test() {
        let f = gf(3);
        let (x4, x2) = (FuncTable::monomial(&f, 4), FuncTable::monomial(&f, 2));
        let w = additive_closure(&[x4, x2]);
        assert_eq!(is_wild(&f, &w), is_o_permutation(&f, &x4.add(&x2)));
    }

    #[test]
    fn f_always_survives() {
        let f = gf(4);
        let t = FuncTable::monomial(&f, 2);
        for a in 2..16 {
            assert!(passes(&f, &t, a, &t));
        }
        assert!(matches!(proposition_search(&f, &t, 2, &[]), Err(Error::EmptyPool)));
        assert!(proposition_search(&f, &t, 1, &[t]).is_err());
    }
}
