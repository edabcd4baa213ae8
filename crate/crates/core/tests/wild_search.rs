use pseudoval::catalog;
use pseudoval::field::Field;
use pseudoval::magic::ClassIndex;
use pseudoval::opoly::{is_o_permutation, FuncTable};
use pseudoval::wild::{self, ClassifyConfig};
use pseudoval::Error;

fn gf(k: u32) -> Field {
    Field::standard(k).unwrap()
}

fn pool(k: u32) -> (Field, ClassIndex) {
    let exp = catalog::expand(&catalog::builtin(k).unwrap()).unwrap();
    (exp.field().clone(), exp.index)
}

#[test]
fn is_wild_examples() {
    let f = gf(3);
    let conic = FuncTable::monomial(&f, 4);
    let pointed = FuncTable::monomial(&f, 2);
    let scalar: Vec<FuncTable> = f.elements().map(|l| conic.scale(&f, l)).collect();
    let mut sorted = scalar.clone();
    sorted.sort_unstable();
    assert!(wild::is_wild(&f, &sorted));
    assert_eq!(wild::kernel(&f, &sorted), 3);

    let mixed = wild::additive_closure(&[conic, pointed]);
    assert_eq!(mixed.len(), 4);
    assert_eq!(wild::is_wild(&f, &mixed), is_o_permutation(&f, &conic.add(&pointed)));

    let single = wild::additive_closure(&[pointed]);
    assert!(wild::is_wild(&f, &single));
    assert_eq!(wild::kernel(&f, &single), 1);
}

/// Every Wild subspace over GF(8), found without the fixed-`a` shortcut.
#[test]
fn direct_enumeration_gf8() {
    let (f, idx) = pool(3);
    let opolys = idx.all_opolynomials();
    assert_eq!(opolys.len(), 10);
    let spaces = wild::enumerate_wild_subspaces(&f, &opolys).unwrap();
    // one scalar space GF(8) h per o-polynomial h
    assert_eq!(spaces.len(), 10);
    for w in &spaces {
        assert_eq!(w.len(), 8);
        assert!(wild::is_wild(&f, w));
        assert_eq!(wild::kernel(&f, w), 3);
    }
    // 40^5 combinations is refused before any work
    let g = gf(5);
    assert!(wild::enumerate_wild_subspaces(&g, &vec![FuncTable::monomial(&g, 2); 40]).is_err());
}

/// The search returns exactly `{f}` for every o-polynomial over GF(8) and every `a`.
#[test]
fn every_representative_gf8() {
    let (f, idx) = pool(3);
    let opolys = idx.all_opolynomials();
    for g in &opolys {
        for a in 2..8u8 {
            assert_eq!(wild::proposition_search(&f, g, a, &opolys).unwrap(), vec![*g]);
        }
    }
}

#[test]
fn search_errors() {
    let f = gf(3);
    let g = FuncTable::monomial(&f, 2);
    assert!(matches!(wild::proposition_search(&f, &g, 2, &[]), Err(Error::EmptyPool)));
    assert!(wild::proposition_search(&f, &g, 1, &[g]).is_err());
    assert!(wild::proposition_search(&f, &g, 0, &[g]).is_err());
}

#[test]
fn classify_gf8_and_gf16() {
    for (n, classes) in [(3, 2), (4, 3)] {
        let mut cfg = ClassifyConfig::new(n);
        cfg.timings = false;
        let r = wild::classify(&cfg, None).unwrap();
        assert!(r.complete && r.passes());
        assert_eq!(r.classes.len(), classes);
        assert_eq!(r.pseudo_ovals, classes);
        assert!(r.all_kernels_full && r.non_elementary.is_empty());
        assert_eq!(r.a_values.len(), (1 << n) - 2);
        assert_eq!(r.records.len(), classes * r.a_values.len());
        for rec in &r.records {
            assert!(rec.only_f);
            assert_eq!(rec.survivors.len(), 1);
            assert_eq!(rec.pool_size, r.opolynomials);
        }
        // each pool member is tested against every class and every a
        assert_eq!(r.candidates_tested, r.opolynomials);
    }
}

#[test]
fn default_a_values() {
    let f5 = gf(5);
    assert_eq!(ClassifyConfig::new(5).resolved_a(&f5), vec![f5.primitive()]);
    let mut all = ClassifyConfig::new(5);
    all.all_a = true;
    assert_eq!(all.resolved_a(&f5).len(), 30);
    assert_eq!(ClassifyConfig::new(4).resolved_a(&gf(4)).len(), 14);
}

#[test]
fn resume_matches_uninterrupted_gf16() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("ck.json");
    let mut full = ClassifyConfig::new(4);
    full.timings = false;
    let expected = wild::classify(&full, None).unwrap();

    let mut part = full.clone();
    part.checkpoint = Some(ck.clone());
    part.checkpoint_interval = 300;
    part.stop_after = Some(700);
    let first = wild::classify(&part, None).unwrap();
    assert!(!first.complete);
    assert!(first.candidates_tested < expected.candidates_tested);

    let mut rest = part.clone();
    rest.stop_after = Some(900);
    rest.resume = true;
    let second = wild::classify(&rest, None).unwrap();
    assert!(!second.complete);
    rest.stop_after = None;
    let done = wild::classify(&rest, None).unwrap();
    assert_eq!(serde_json::to_string(&done).unwrap(), serde_json::to_string(&expected).unwrap());
}

#[test]
fn resume_rejects_foreign_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("ck.json");
    let mut a = ClassifyConfig::new(4);
    a.checkpoint = Some(ck.clone());
    a.stop_after = Some(100);
    a.checkpoint_interval = 50;
    wild::classify(&a, None).unwrap();
    let mut b = ClassifyConfig::new(3);
    b.checkpoint = Some(ck);
    b.resume = true;
    assert!(wild::classify(&b, None).is_err());
}
