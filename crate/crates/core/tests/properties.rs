//! Property tests for the invariants of the metric, geodesy, action,
//! grouptheory, invariants and coneoff modules.

use std::sync::{Arc, OnceLock};

use proptest::prelude::*;

use coarse_cancel::action::{
    acylindricity_table, axis, cycle_rotation_window, free_group_window, stable_translation_length, translation_length,
    ActionWindow, Word,
};
use coarse_cancel::coneoff::{build_cone, build_coneoff, quotient_cone, verify_sandwich, ConePoint};
use coarse_cancel::geodesy::{ball, hull, intersection_diameter, neighborhood, quasi_convexity_constant};
use coarse_cancel::grouptheory::{
    automorphisms, bass_serre_window, default_generators, group_exponent, holomorph, holomorph_exponent, AmalgamData,
    AmalgamSpec, Factor, GroupTable, Letter,
};
use coarse_cancel::invariants::{invariant_e, overlap_a};
use coarse_cancel::metric::{hyperbolicity_delta, verify_four_point_forms, FiniteMetricSpace, GraphSpec};

const EPS: f64 = 1e-9;

/// Connected graph on n ≤ 8 vertices: a random spanning tree plus extra edges,
/// with lengths in quarters.
fn graphs() -> impl Strategy<Value = FiniteMetricSpace> {
    graph_specs().prop_map(|g| FiniteMetricSpace::from_graph(&g).unwrap())
}

/// Unit-length graphs with every edge cut in two, so that the sample contains
/// edge midpoints and its δ matches the metric graph.
fn geodesic_graphs() -> impl Strategy<Value = FiniteMetricSpace> {
    graph_specs().prop_map(|mut g| {
        let mut seen = std::collections::HashSet::new();
        g.edges.retain(|(a, b, _)| seen.insert(if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) }));
        g.edges.iter_mut().for_each(|e| e.2 = 1.0);
        FiniteMetricSpace::from_graph(&g.subdivide(2).unwrap()).unwrap()
    })
}

fn graph_specs() -> impl Strategy<Value = GraphSpec> {
    (2usize..=8, prop::collection::vec(any::<u16>(), 7), prop::collection::vec((0usize..8, 0usize..8), 0..6), prop::collection::vec(1u8..=8, 13))
        .prop_map(|(n, parents, extra, weights)| {
            let v: Vec<String> = (0..n).map(|i| i.to_string()).collect();
            let mut edges = vec![];
            let mut w = weights.into_iter().cycle();
            for i in 1..n {
                let p = parents[i - 1] as usize % i;
                edges.push((v[p].clone(), v[i].clone(), w.next().unwrap() as f64 / 4.0));
            }
            for (a, b) in extra {
                let (a, b) = (a % n, b % n);
                if a != b {
                    edges.push((v[a].clone(), v[b].clone(), w.next().unwrap() as f64 / 4.0));
                }
            }
            GraphSpec { vertices: v, edges }
        })
}

fn subset(n: usize, mask: u32) -> Vec<usize> {
    let ys: Vec<usize> = (0..n.min(32)).filter(|i| mask >> i & 1 == 1).collect();
    if ys.is_empty() {
        vec![0]
    } else {
        ys
    }
}

fn z3z5_window() -> &'static (Arc<AmalgamData>, ActionWindow) {
    static W: OnceLock<(Arc<AmalgamData>, ActionWindow)> = OnceLock::new();
    W.get_or_init(|| {
        let d = Arc::new(AmalgamData::free_product(GroupTable::cyclic(3), GroupTable::cyclic(5)));
        let w = bass_serre_window(d.clone(), &default_generators(&d), 6, 4).unwrap();
        (d, w)
    })
}

fn word(w: &ActionWindow, raw: &[usize]) -> Word {
    let g = w.generators().len();
    w.free_reduce(&raw.iter().map(|&i| i % g).collect::<Vec<_>>())
}

fn letters(d: &AmalgamData, w: &ActionWindow, word: &[usize]) -> Vec<Letter> {
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

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gromov_product_identity(sp in graphs(), a: u8, b: u8, c: u8) {
        let n = sp.len();
        let (x, y, z) = (a as usize % n, b as usize % n, c as usize % n);
        prop_assert!((sp.gp(x, y, z) + sp.gp(x, z, y) - sp.d(y, z)).abs() <= EPS);
    }

    #[test]
    fn four_point_forms_hold_at_delta(sp in graphs()) {
        let delta = hyperbolicity_delta(&sp).delta;
        let chk = verify_four_point_forms(&sp, delta);
        prop_assert!(chk.product_form_ok && chk.sum_form_ok);
        if delta > 0.0 {
            let below = verify_four_point_forms(&sp, delta - 1e-6);
            prop_assert!(!below.product_form_ok && !below.sum_form_ok);
        }
    }

    #[test]
    fn delta_is_isometry_invariant(sp in graphs(), shuffle in any::<u64>()) {
        let n = sp.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = shuffle;
        for i in (1..n).rev() {
            perm.swap(i, (s % (i as u64 + 1)) as usize);
            s /= i as u64 + 1;
        }
        let d = hyperbolicity_delta(&sp).delta;
        prop_assert_eq!(hyperbolicity_delta(&sp.permuted(&perm).unwrap()).delta, d);
        prop_assert_eq!(hyperbolicity_delta(&sp.transposed()).delta, d);
    }

    #[test]
    fn balls_are_2delta_quasi_convex(sp in geodesic_graphs(), x: u8, r in 0u8..16) {
        let delta = hyperbolicity_delta(&sp).delta;
        let b = ball(&sp, x as usize % sp.len(), r as f64 / 4.0);
        let q = quasi_convexity_constant(&sp, &b);
        prop_assert!(q <= 2.0 * delta + EPS, "n {} delta {} qc {} r {}", sp.len(), delta, q, r);
    }

    #[test]
    fn hulls_are_6delta_quasi_convex(sp in geodesic_graphs(), mask: u32) {
        let delta = hyperbolicity_delta(&sp).delta;
        let h = hull(&sp, &subset(sp.len(), mask), delta);
        let q = quasi_convexity_constant(&sp, &h);
        prop_assert!(q <= 6.0 * delta + EPS, "n {} delta {} qc {} ys {:?}", sp.len(), delta, q, subset(sp.len(), mask));
    }

    #[test]
    fn thick_neighborhoods_are_2delta_quasi_convex(sp in geodesic_graphs(), mask: u32, extra in 0u8..8) {
        let delta = hyperbolicity_delta(&sp).delta;
        let ys = subset(sp.len(), mask);
        let alpha = quasi_convexity_constant(&sp, &ys);
        let nb = neighborhood(&sp, &ys, alpha + extra as f64 / 4.0);
        let q = quasi_convexity_constant(&sp, &nb);
        prop_assert!(q <= 2.0 * delta + EPS, "n {} delta {} qc {} alpha {}", sp.len(), delta, q, alpha);
    }

    #[test]
    fn neighborhoods_and_intersections_grow(sp in graphs(), m1: u32, m2: u32, a in 0u8..12, da in 0u8..8) {
        let (a, b) = (a as f64 / 4.0, (a + da) as f64 / 4.0);
        let ys = vec![subset(sp.len(), m1), subset(sp.len(), m2)];
        let small = neighborhood(&sp, &ys[0], a);
        let big = neighborhood(&sp, &ys[0], b);
        prop_assert!(small.iter().all(|x| big.contains(x)));
        let d1 = intersection_diameter(&sp, &ys, a).unwrap().diameter;
        let d2 = intersection_diameter(&sp, &ys, b).unwrap().diameter;
        prop_assert!(d1 <= d2 + EPS);
    }

    #[test]
    fn intersection_of_thickened_quasi_convex_sets(sp in graphs(), m1: u32, m2: u32, a in 0u8..16) {
        let delta = hyperbolicity_delta(&sp).delta;
        let ys = vec![subset(sp.len(), m1), subset(sp.len(), m2)];
        let alpha = ys.iter().map(|y| quasi_convexity_constant(&sp, y)).fold(0.0, f64::max);
        let a = a as f64 / 4.0;
        let lhs = intersection_diameter(&sp, &ys, a).unwrap().diameter;
        let core = intersection_diameter(&sp, &ys, alpha + 3.0 * delta).unwrap();
        prop_assume!(!core.empty);
        prop_assert!(lhs <= core.diameter + 2.0 * a + 4.0 * delta + EPS);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tree_lengths_are_conjugation_invariant(g in prop::collection::vec(0usize..8, 1..=3), c in prop::collection::vec(0usize..8, 0..=1)) {
        let (_, w) = z3z5_window();
        let g = word(w, &g);
        let c = word(w, &c);
        let mut conj = c.clone();
        conj.extend_from_slice(&g);
        conj.extend(w.inverse(&c));
        let conj = w.free_reduce(&conj);
        prop_assert_eq!(translation_length(w, &conj).unwrap().value, translation_length(w, &g).unwrap().value);
    }

    #[test]
    fn tree_stable_lengths_scale_with_powers(g in prop::collection::vec(0usize..8, 1..=2), k in 1usize..=3) {
        let (_, w) = z3z5_window();
        let g = word(w, &g);
        prop_assume!(!g.is_empty() && translation_length(w, &g).unwrap().value > 0.0);
        let one = stable_translation_length(w, &g, 6).unwrap().value;
        let many = stable_translation_length(w, &w.power(&g, k), 2).unwrap().value;
        prop_assert!(one <= translation_length(w, &g).unwrap().value + EPS);
        prop_assert!((many - k as f64 * one).abs() <= EPS);
    }

    #[test]
    fn tree_lengths_match_syllables(g in prop::collection::vec(0usize..8, 1..=4)) {
        let (d, w) = z3z5_window();
        let g = word(w, &g);
        let len = translation_length(w, &g).unwrap().value;
        prop_assert_eq!(len, d.cyclic_syllable_length(&letters(d, w, &g)) as f64);
    }

    #[test]
    fn axes_realize_len_and_are_convex(g in prop::collection::vec(0usize..8, 1..=3)) {
        let (_, w) = z3z5_window();
        let g = word(w, &g);
        prop_assume!(!g.is_empty());
        let len = translation_length(w, &g).unwrap().value;
        let ax = axis(w, &g, 0.0).unwrap();
        prop_assert!(ax.iter().any(|&x| w.space.d(x, w.apply(&g, x).unwrap()) == len));
        prop_assert!(quasi_convexity_constant(&w.space, &ax) <= EPS);
    }

    #[test]
    fn displacement_is_quasi_convex(g in prop::collection::vec(0usize..6, 1..=3), pts in prop::collection::vec(any::<u16>(), 3)) {
        let w = free_group_window(2, 4, 3).unwrap();
        let g = word(&w, &g);
        let dom = w.domain(&g);
        prop_assume!(!dom.is_empty());
        let pick = |i: usize| dom[pts[i] as usize % dom.len()];
        let ((x, gx), (x2, gx2), (y, gy)) = (pick(0), pick(1), pick(2));
        let sp = &w.space;
        prop_assert!(sp.d(gy, y) <= sp.d(gx, x).max(sp.d(gx2, x2)) + 2.0 * sp.gp(x, x2, y) + EPS);
    }

    #[test]
    fn normal_forms_are_idempotent(raw in prop::collection::vec((any::<bool>(), 0usize..6), 0..10)) {
        let spec: AmalgamSpec = serde_json::from_str(
            r#"{"A": {"cyclic": 4}, "B": {"cyclic": 6}, "C": {"cyclic": 2}, "c_in_a": {"0": "0", "1": "2"}, "c_in_b": {"0": "0", "1": "3"}}"#,
        ).unwrap();
        let (d, _) = spec.build().unwrap();
        let word: Vec<Letter> = raw
            .iter()
            .map(|&(a, x)| if a { (Factor::A, x % 4) } else { (Factor::B, x % 6) })
            .collect();
        let nf = d.normal_form(&word);
        prop_assert_eq!(d.normal_form(&d.letters(&nf)), nf);
    }

    #[test]
    fn overlap_is_symmetric_and_shrinks(raw in prop::collection::vec(prop::collection::vec(0usize..8, 1..=3), 3)) {
        let (_, w) = z3z5_window();
        let ws: Vec<Word> = raw.iter().map(|r| word(w, r)).collect();
        prop_assume!(ws.iter().all(|x| !x.is_empty()));
        let two = overlap_a(w, &ws[..2], 0.0).unwrap();
        let swapped = overlap_a(w, &[ws[1].clone(), ws[0].clone()], 0.0).unwrap();
        let three = overlap_a(w, &ws, 0.0).unwrap();
        prop_assert_eq!(two, swapped);
        prop_assert!(three <= two + EPS);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn free_product_windows(p in 2usize..=5, q in 2usize..=5, radius in 2usize..=3) {
        let d = Arc::new(AmalgamData::free_product(GroupTable::cyclic(p), GroupTable::cyclic(q)));
        let w = bass_serre_window(d.clone(), &default_generators(&d), radius, 2).unwrap();
        prop_assert_eq!(hyperbolicity_delta(&w.space).delta, 0.0);
        let big = bass_serre_window(d.clone(), &default_generators(&d), 4, 2).unwrap();
        let table = acylindricity_table(&big, 0.0).unwrap();
        for pair in table.windows(2) {
            prop_assert!(pair[1].n <= pair[0].n);
        }
        prop_assert!(table.iter().all(|r| r.n >= 1));
        // C trivial is malnormal, so long paths have trivial stabilizers
        prop_assert!(table.iter().filter(|r| r.d >= 3.0).all(|r| r.n == 1));
    }

    #[test]
    fn holomorph_orders_and_exponents(n in 1usize..=12) {
        let f = GroupTable::cyclic(n);
        let aut = automorphisms(&f, 64).unwrap().len();
        let hol = holomorph(&f, 64).unwrap();
        prop_assert_eq!(hol.order(), n * aut);
        let e = group_exponent(&hol);
        prop_assert_eq!(e % group_exponent(&f), 0);
        prop_assert_eq!(invariant_e(&[f.clone()], 64).unwrap(), holomorph_exponent(&f, 64).unwrap());
    }

    #[test]
    fn cones_are_metrics_with_radial_apex_distance(n in 3usize..=8, rho in 0.2f64..3.0, radial in 1usize..=3) {
        let base = FiniteMetricSpace::from_graph(&GraphSpec::cycle(n)).unwrap();
        let cone = build_cone(&base, &(0..n).collect::<Vec<_>>(), rho, radial).unwrap();
        let sp = &cone.space;
        let apex = cone.index_of(ConePoint::Apex).unwrap();
        for (i, p) in cone.points.iter().enumerate() {
            prop_assert!((sp.d(i, apex) - p.r()).abs() <= EPS);
            for j in 0..sp.len() {
                prop_assert!((sp.d(i, j) - sp.d(j, i)).abs() <= EPS);
                for k in 0..sp.len() {
                    prop_assert!(sp.d(i, k) <= sp.d(i, j) + sp.d(j, k) + EPS);
                }
            }
        }
    }

    #[test]
    fn quotient_cones_never_stretch(k in 2usize..=4, rho in 0.1f64..0.6) {
        // Z/k rotating C_{6k} moves every point by 6
        let n = 6 * k;
        let base = FiniteMetricSpace::from_graph(&GraphSpec::cycle(n)).unwrap();
        let cone = build_cone(&base, &(0..n).collect::<Vec<_>>(), rho, 2).unwrap();
        let h: Vec<usize> = (0..n).map(|y| (y + 6) % n).collect();
        let q = quotient_cone(&cone, &h).unwrap();
        prop_assert!(q.max_increase <= EPS);
        prop_assert!(q.lemma_max_defect <= EPS);
    }

    #[test]
    fn coneoff_chain_metric_and_sandwich(sp in geodesic_graphs(), c1: u8, c2: u8, r1 in 0u8..4, r2 in 0u8..4, rho in 0.3f64..2.0) {
        let delta = hyperbolicity_delta(&sp).delta;
        let n = sp.len();
        let family = vec![ball(&sp, c1 as usize % n, r1 as f64 / 2.0), ball(&sp, c2 as usize % n, r2 as f64 / 2.0)];
        let c = build_coneoff(&sp, &family, rho, 2, delta).unwrap();
        prop_assert!(verify_sandwich(&c).holds);
        let m = &c.space;
        for i in 0..m.len() {
            for j in 0..m.len() {
                for k in 0..m.len() {
                    prop_assert!(m.d(i, k) <= m.d(i, j) + m.d(j, k) + EPS);
                }
            }
        }
    }
}

#[test]
fn rotation_windows_have_full_axes() {
    let w = cycle_rotation_window(8, 1, 3).unwrap();
    let r = w.parse("r").unwrap();
    assert_eq!(axis(&w, &r, 0.0).unwrap().len(), 8);
    assert_eq!(quasi_convexity_constant(&w.space, &axis(&w, &r, 0.0).unwrap()), 0.0);
}
