use std::sync::Arc;

use coarse_cancel::action::{acylindricity_table, cylinder, stable_translation_length, translation_length, ActionWindow};
use coarse_cancel::grouptheory::{bass_serre_window, default_generators, AmalgamData, GroupTable, Letter};
use coarse_cancel::invariants::{build_ledger, injectivity_radius, Bound, LedgerOptions};
use coarse_cancel::magnitude::Magnitude;
use coarse_cancel::metric::hyperbolicity_delta;
use coarse_cancel::smallcancel::{certify_small_cancellation, family_stats, Constants};

fn z3_z5(radius: usize, max_len: usize) -> (Arc<AmalgamData>, ActionWindow) {
    let d = Arc::new(AmalgamData::free_product(GroupTable::cyclic(3), GroupTable::cyclic(5)));
    let gens = default_generators(&d);
    let w = bass_serre_window(d.clone(), &gens, radius, max_len).unwrap();
    (d, w)
}

fn letters_of(d: &AmalgamData, w: &ActionWindow, word: &[usize]) -> Vec<Letter> {
    let gens = default_generators(d);
    word.iter()
        .map(|&i| {
            let name = &w.generators()[i].name;
            let g = gens.iter().find(|g| &g.name == name || &g.inverse == name).unwrap();
            let t = d.factor(g.factor);
            let x = t.index_of(&g.element).unwrap();
            (g.factor, if &g.name == name { x } else { t.inv(x) })
        })
        .collect()
}

#[test]
fn tree_lengths_match_syllable_oracle() {
    // the exhaustive δ scan is quartic, so check it on a smaller ball
    assert_eq!(hyperbolicity_delta(&z3_z5(3, 1).1.space).delta, 0.0);
    let (d, w) = z3_z5(6, 4);
    let elems = w.elements(4);
    let mut lox = 0;
    for word in elems.iter().skip(1) {
        let len = translation_length(&w, word).unwrap().value;
        let syl = d.cyclic_syllable_length(&letters_of(&d, &w, word)) as f64;
        assert_eq!(len, syl, "word {}", w.format(word));
        if syl > 0.0 {
            lox += 1;
            let st = stable_translation_length(&w, word, 6).unwrap();
            assert_eq!(st.value, len, "stable length of {}", w.format(word));
        }
    }
    assert!(lox > 20);
}

#[test]
fn path_stabilizers_are_trivial() {
    let (_, w) = z3_z5(5, 4);
    let table = acylindricity_table(&w, 0.0).unwrap();
    for row in table.iter().filter(|r| r.d >= 3.0) {
        assert_eq!(row.n, 1, "d = {}", row.d);
    }
    // an edge is fixed only by C, a vertex by its factor
    assert_eq!(table.iter().find(|r| r.d == 1.0).unwrap().n, 1);
    assert!(table[0].n >= 5);
}

#[test]
fn rinj_and_ledger() {
    let (_, w) = z3_z5(4, 2);
    let r = injectivity_radius(&w, 2, 4).unwrap();
    assert_eq!(r.value, Magnitude::new(2.0));
    let opts = LedgerOptions { word_cap: 2, a_upper: Some(0.0), ..Default::default() };
    let ledger = build_ledger(&w, &opts).unwrap();
    assert_eq!(ledger.e.value, 1);
    assert_eq!(ledger.rinj.bound, Bound::Exact);
    assert_eq!(ledger.nu.bound, Bound::Upper);
    assert!(ledger.no_involution);
    ledger.require_sound().unwrap();
}

#[test]
fn family_of_cylinders() {
    let (_, w) = z3_z5(6, 6);
    let ab = w.parse("ab").unwrap();
    let ba = w.parse("ba").unwrap();
    let fam = vec![
        (cylinder(&w, &ab, 0.0).unwrap().members, vec![w.power(&ab, 2)]),
        (cylinder(&w, &ba, 0.0).unwrap().members, vec![w.power(&ba, 2)]),
    ];
    let stats = family_stats(&w, &fam, 0.0).unwrap();
    assert_eq!(stats.t_q, Magnitude::new(4.0));
    let single = family_stats(&w, &fam[..1], 0.0).unwrap();
    assert_eq!(single.delta_q, 0.0);
    // canonical δ₀ is tiny but δ = 0 passes; ρ₀ is astronomical so ρ = 1 fails
    let cert = certify_small_cancellation(0.0, 1.0, &stats, &Constants::canonical(1.0, 500.0));
    assert!(cert.checks[0].pass && !cert.checks[1].pass && !cert.overall);
}
