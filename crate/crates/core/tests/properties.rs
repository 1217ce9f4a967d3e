mod common;

use jsdm::angular::{AngularInterval, AngularSet};
use jsdm::channel::{covariance_from_clusters, effective_rank, ArrayGeometry, ClusterSpec, Covariance, RankPolicy};
use jsdm::grouping::{
    exhaustive_search, greedy_algorithm_1, greedy_algorithm_1_trace, greedy_algorithm_2,
    ConflictGraph, SearchObjective, SetFunction, EXHAUSTIVE_CAP,
};
use jsdm::linalg::{orthonormality_error, CMatrix};
use jsdm::precoding::{approximate_bd, bd_projections, zero_forcing, Width};
use num_complex::Complex64;
use proptest::prelude::*;

use common::distance;

const TOL: f64 = 1e-9;

fn set_strategy() -> impl Strategy<Value = AngularSet> {
    prop::collection::vec((-0.5f64..0.5, 0.001f64..0.45), 0..5).prop_map(|v| {
        AngularSet::from_intervals(v.into_iter().filter_map(|(lo, w)| AngularInterval::new(lo, lo + w).ok()))
    })
}

fn nonempty_set() -> impl Strategy<Value = AngularSet> {
    set_strategy().prop_filter("non-empty", |s| !s.is_empty())
}

fn points() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.5f64..0.5, 64)
}

proptest! {
    #[test]
    fn union_and_intersect_commute(a in set_strategy(), b in set_strategy()) {
        prop_assert!(distance(&a.union(&b), &b.union(&a)) <= TOL);
        prop_assert!(distance(&a.intersect(&b), &b.intersect(&a)) <= TOL);
    }

    #[test]
    fn union_and_intersect_associate(a in set_strategy(), b in set_strategy(), c in set_strategy()) {
        prop_assert!(distance(&a.union(&b).union(&c), &a.union(&b.union(&c))) <= TOL);
        prop_assert!(distance(&a.intersect(&b).intersect(&c), &a.intersect(&b.intersect(&c))) <= TOL);
    }

    #[test]
    fn de_morgan(a in set_strategy(), b in set_strategy()) {
        prop_assert!(distance(&a.union(&b).complement(), &a.complement().intersect(&b.complement())) <= TOL);
        prop_assert!(distance(&a.intersect(&b).complement(), &a.complement().union(&b.complement())) <= TOL);
    }

    #[test]
    fn difference_is_intersection_with_complement(a in set_strategy(), b in set_strategy()) {
        prop_assert!(distance(&a.difference(&b), &a.intersect(&b.complement())) <= TOL);
    }

    #[test]
    fn membership_matches_pointwise_logic(a in set_strategy(), b in set_strategy(), xs in points()) {
        let u = a.union(&b);
        let i = a.intersect(&b);
        let d = a.difference(&b);
        let c = a.complement();
        for x in xs {
            // skip points sitting on an endpoint, where rounding decides membership
            let near_edge = a.pieces().iter().chain(b.pieces()).any(|&(lo, hi)| (x - lo).abs() < 1e-9 || (x - hi).abs() < 1e-9);
            if near_edge {
                continue;
            }
            let (ia, ib) = (a.contains(x), b.contains(x));
            prop_assert_eq!(u.contains(x), ia || ib);
            prop_assert_eq!(i.contains(x), ia && ib);
            prop_assert_eq!(d.contains(x), ia && !ib);
            prop_assert_eq!(c.contains(x), !ia);
        }
    }

    #[test]
    fn measure_is_additive_and_monotone(a in set_strategy(), b in set_strategy()) {
        let lhs = a.union(&b).measure() + a.intersect(&b).measure();
        prop_assert!((lhs - a.measure() - b.measure()).abs() <= TOL);
        prop_assert!(a.intersect(&b).measure() <= a.measure() + TOL);
        prop_assert!(a.measure() <= a.union(&b).measure() + TOL);
        let m = a.measure();
        prop_assert!((0.0..=1.0).contains(&m));
    }

    #[test]
    fn canonical_form_is_stable(a in set_strategy()) {
        prop_assert_eq!(a.union(&AngularSet::empty()), a.clone());
        prop_assert_eq!(a.union(&a), a.clone());
        let rebuilt = AngularSet::from_bounds(a.pieces()).unwrap();
        prop_assert_eq!(rebuilt, a.clone());
        for w in a.pieces().windows(2) {
            prop_assert!(w[0].1 < w[1].0);
        }
    }

    #[test]
    fn translation_commutes_with_operations(a in set_strategy(), b in set_strategy(), t in -2.0f64..2.0) {
        let (ta, tb) = (a.translate(t), b.translate(t));
        prop_assert!((ta.measure() - a.measure()).abs() <= TOL);
        prop_assert!(distance(&ta.union(&tb), &a.union(&b).translate(t)) <= TOL);
        prop_assert!(distance(&ta.intersect(&tb), &a.intersect(&b).translate(t)) <= TOL);
        prop_assert!(distance(&ta.difference(&tb), &a.difference(&b).translate(t)) <= TOL);
    }
}

fn graph_strategy(max_nodes: usize) -> impl Strategy<Value = ConflictGraph> {
    prop::collection::vec(nonempty_set(), 1..=max_nodes).prop_map(ConflictGraph::from_supports)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn greedy_one_trajectory_increases_and_is_bounded(g in graph_strategy(8)) {
        let (result, trace) = greedy_algorithm_1_trace(&g, SetFunction::Measure);
        for w in trace.windows(2) {
            prop_assert!(w[1] > w[0]);
        }
        let best = exhaustive_search(&g, SearchObjective::Q1(SetFunction::Measure), EXHAUSTIVE_CAP).unwrap();
        prop_assert!(result.objective <= best.objective + 1e-12);
    }

    #[test]
    fn greedy_two_is_feasible_and_bounded(g in graph_strategy(8), eps in 0.0f64..0.05) {
        let r = greedy_algorithm_2(&g, eps);
        prop_assert!(g.is_feasible(&r.x, eps));
        for k in r.selected() {
            prop_assert!(r.retained[k].as_ref().unwrap().measure() >= eps);
        }
        let best = exhaustive_search(&g, SearchObjective::Q2 { eps }, EXHAUSTIVE_CAP).unwrap();
        prop_assert!(r.count() <= best.count());
    }

    #[test]
    fn exhaustive_q2_is_monotone_in_eps(g in graph_strategy(8), e1 in 0.0f64..0.05, e2 in 0.0f64..0.05) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let a = exhaustive_search(&g, SearchObjective::Q2 { eps: lo }, EXHAUSTIVE_CAP).unwrap();
        let b = exhaustive_search(&g, SearchObjective::Q2 { eps: hi }, EXHAUSTIVE_CAP).unwrap();
        prop_assert!(a.count() >= b.count());
    }

    #[test]
    fn retained_sets_are_disjoint(g in graph_strategy(8), eps in 0.0f64..0.05) {
        for r in [greedy_algorithm_1(&g, SetFunction::Measure), greedy_algorithm_2(&g, eps)] {
            let sel = r.selected();
            for (i, &k) in sel.iter().enumerate() {
                for &l in &sel[i + 1..] {
                    let jk = r.retained[k].as_ref().unwrap();
                    let jl = r.retained[l].as_ref().unwrap();
                    prop_assert!(jk.intersect(jl).measure() <= TOL);
                }
            }
            for k in 0..g.len() {
                prop_assert_eq!(r.x[k], r.retained[k].is_some());
            }
        }
    }

    #[test]
    fn relabeling_permutes_selection(sets in prop::collection::vec(nonempty_set(), 2..7)) {
        // the optimum does not depend on node order
        let g = ConflictGraph::from_supports(sets.clone());
        let mut rev = sets.clone();
        rev.reverse();
        let h = ConflictGraph::from_supports(rev);
        let a = exhaustive_search(&g, SearchObjective::Q1(SetFunction::Measure), EXHAUSTIVE_CAP).unwrap();
        let b = exhaustive_search(&h, SearchObjective::Q1(SetFunction::Measure), EXHAUSTIVE_CAP).unwrap();
        prop_assert!((a.objective - b.objective).abs() <= 1e-12);
    }
}

fn complex_matrix(rows: usize, cols: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), rows * cols)
        .prop_map(move |v| CMatrix::from_iterator(rows, cols, v.into_iter().map(|(re, im)| Complex64::new(re, im))))
}

fn zf_case() -> impl Strategy<Value = (CMatrix, f64)> {
    (1usize..6)
        .prop_flat_map(|k| (k..9).prop_map(move |b| (b, k)))
        .prop_flat_map(|(b, k)| (complex_matrix(b, k), 0.1f64..10.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zero_forcing_diagonalises((h, power) in zf_case()) {
        // random draws can be arbitrarily ill-conditioned; those are rejected by design
        if let Ok(p) = zero_forcing(&h, power, 0) {
            let k = h.ncols();
            let err = (h.adjoint() * &p.matrix - CMatrix::identity(k, k).scale(p.zeta_sq)).norm();
            prop_assert!(err <= 1e-8 * p.zeta_sq * (k as f64).sqrt());
            prop_assert!((p.matrix.norm_squared() - power).abs() <= 1e-9 * power);
        }
    }

    #[test]
    fn zero_forcing_scales_with_the_channel((h, power) in zf_case(), c in 0.1f64..10.0) {
        if let (Ok(p), Ok(q)) = (zero_forcing(&h, power, 0), zero_forcing(&h.scale(c), power, 0)) {
            prop_assert!((&p.matrix - &q.matrix).norm() <= 1e-8 * p.matrix.norm());
        }
    }
}

fn bd_case() -> impl Strategy<Value = Vec<(f64, f64)>> {
    // two or three clusters placed in disjoint sectors of the array
    (2usize..4).prop_flat_map(|g| {
        prop::collection::vec((0.1f64..0.9, 0.03f64..0.1), g).prop_map(move |v| {
            let width = 2.4 / g as f64;
            v.into_iter()
                .enumerate()
                .map(|(i, (pos, spread))| (-1.2 + width * (i as f64 + pos), spread))
                .collect()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn block_diagonalisation_nulls_other_groups(clusters in bd_case(), scale in 0.5f64..4.0) {
        let geometry = ArrayGeometry::new(48, 0.5).unwrap();
        let policy = RankPolicy::default();
        let covs: Vec<Covariance> = clusters
            .iter()
            .map(|&(az, sp)| covariance_from_clusters(&geometry, &[ClusterSpec::new(az, sp)]).unwrap())
            .collect();
        let refs: Vec<&Covariance> = covs.iter().collect();
        let widths = vec![Width::Auto { streams: 3 }; covs.len()];
        let bfs = approximate_bd(&refs, policy, &widths).unwrap();
        for bf in &bfs {
            prop_assert!(orthonormality_error(&bf.matrix) <= 1e-10);
            for (g, cov) in covs.iter().enumerate() {
                if g != bf.group {
                    let u = cov.dominant(effective_rank(cov, policy));
                    prop_assert!((u.adjoint() * &bf.matrix).norm() <= 1e-8);
                }
            }
        }
        // scaling every covariance leaves the nulled subspaces unchanged
        let scaled: Vec<Covariance> = covs
            .iter()
            .map(|c| Covariance::from_matrix(c.matrix().scale(scale)).unwrap())
            .collect();
        let srefs: Vec<&Covariance> = scaled.iter().collect();
        let a = bd_projections(&refs, policy).unwrap();
        let b = bd_projections(&srefs, policy).unwrap();
        for (pa, pb) in a.iter().zip(&b) {
            let qa = &pa.complement * pa.complement.adjoint();
            let qb = &pb.complement * pb.complement.adjoint();
            prop_assert!((qa - qb).norm() <= 1e-6);
        }
    }
}

#[test]
fn greedy_two_cardinality_is_not_monotone_in_eps() {
    // equal degrees, so the lowest id goes first; at the smaller eps that is
    // node 1, which then blocks both others, while the larger eps skips it
    let w = |lo, hi| AngularSet::from_bounds(&[(lo, hi)]).unwrap();
    let g = ConflictGraph::from_supports(vec![w(0.0, 0.1), w(-0.25, 0.05), w(0.0, 0.25)]);
    assert_eq!(greedy_algorithm_2(&g, 0.1).x, [true, false, false]);
    assert_eq!(greedy_algorithm_2(&g, 0.15).x, [false, true, true]);
}
