//! Conflict graph over user spectral supports and the selection algorithms
//! that run on it.
//!
//! Node `k` carries its support `W_k`; an edge joins `k` and `l` when the
//! supports intersect, weighted by `E_kl = W_k ∩ W_l`. With an active set of
//! nodes, the retained set of an active node is
//! `J_k = W_k \ ∪ { E_kl : l active neighbour }`.
//!
//! Two objectives are offered:
//!
//! - Q1 sums `f_k(J_k)` over active nodes, where `f_k` integrates the node's
//!   eigenvalue spectrum (or is the plain Lebesgue measure).
//! - Q2 counts active nodes subject to every active node retaining a
//!   non-empty set of measure at least `eps`.
//!
//! All tie-breaking goes to the lowest node index (greedy) or the
//! lexicographically smallest selection vector (exhaustive search).

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::angular::AngularSet;
use crate::channel::{spectral_support, ArrayGeometry, SpectralDensity, UserProfile};
use crate::error::{Error, Result};

/// Objective values within this distance compare as equal.
pub const TIE_TOL: f64 = 1e-12;

/// Default node-count cap for exhaustive search.
pub const EXHAUSTIVE_CAP: usize = 20;

#[derive(Debug, Clone)]
pub struct Node {
    pub id: String,
    pub support: AngularSet,
    pub density: Option<SpectralDensity>,
}

/// Set function used inside Q1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SetFunction {
    /// Integral of the node's eigenvalue spectrum; nodes built without a
    /// profile fall back to the measure.
    #[default]
    Density,
    /// Lebesgue measure `|X|`.
    Measure,
}

#[derive(Debug, Clone)]
pub struct ConflictGraph {
    nodes: Vec<Node>,
    edges: BTreeMap<(usize, usize), AngularSet>,
    neighbors: Vec<Vec<usize>>,
}

impl ConflictGraph {
    pub fn from_nodes(nodes: Vec<Node>) -> Self {
        let n = nodes.len();
        let mut edges = BTreeMap::new();
        let mut neighbors = vec![Vec::new(); n];
        for k in 0..n {
            for l in (k + 1)..n {
                let e = nodes[k].support.intersect(&nodes[l].support);
                if !e.is_empty() {
                    edges.insert((k, l), e);
                    neighbors[k].push(l);
                    neighbors[l].push(k);
                }
            }
        }
        Self {
            nodes,
            edges,
            neighbors,
        }
    }

    /// Graph over bare supports; Q1 then uses the measure.
    pub fn from_supports(supports: Vec<AngularSet>) -> Self {
        let nodes = supports
            .into_iter()
            .enumerate()
            .map(|(i, support)| Node {
                id: format!("{}", i + 1),
                support,
                density: None,
            })
            .collect();
        Self::from_nodes(nodes)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn neighbors(&self, k: usize) -> &[usize] {
        &self.neighbors[k]
    }

    pub fn degree(&self, k: usize) -> usize {
        self.neighbors[k].len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// `E_kl`, or `None` when the supports are disjoint.
    pub fn edge(&self, k: usize, l: usize) -> Option<&AngularSet> {
        let key = if k < l { (k, l) } else { (l, k) };
        self.edges.get(&key)
    }

    /// `J_k` given the active set (only active neighbours are removed).
    pub fn retained(&self, k: usize, active: &[bool]) -> AngularSet {
        let mut removed = AngularSet::empty();
        for &l in &self.neighbors[k] {
            if active[l] {
                if let Some(e) = self.edge(k, l) {
                    removed = removed.union(e);
                }
            }
        }
        self.nodes[k].support.difference(&removed)
    }

    fn value(&self, k: usize, set: &AngularSet, f: SetFunction) -> f64 {
        match (f, &self.nodes[k].density) {
            (SetFunction::Density, Some(d)) => d.integral(set),
            _ => set.measure(),
        }
    }

    /// `Q1(x) = sum_k f_k(x_k W_k \ ∪_{l in N_k} x_l E_kl)`.
    pub fn objective_q1(&self, x: &[bool], f: SetFunction) -> Result<f64> {
        self.check_len(x)?;
        Ok((0..self.len())
            .filter(|&k| x[k])
            .map(|k| self.value(k, &self.retained(k, x), f))
            .sum())
    }

    /// Every active node retains a non-empty set of measure at least `eps`.
    pub fn is_feasible(&self, x: &[bool], eps: f64) -> bool {
        (0..self.len())
            .filter(|&k| x[k])
            .all(|k| retains(&self.retained(k, x), eps))
    }

    fn check_len(&self, x: &[bool]) -> Result<()> {
        if x.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "selection vector has {} entries for {} nodes",
                x.len(),
                self.len()
            )));
        }
        Ok(())
    }

    /// Package a selection vector with its retained sets.
    pub fn result(&self, x: Vec<bool>, objective: f64) -> SelectionResult {
        let retained = (0..self.len())
            .map(|k| if x[k] { Some(self.retained(k, &x)) } else { None })
            .collect();
        SelectionResult {
            x,
            retained,
            objective,
        }
    }
}

fn retains(j: &AngularSet, eps: f64) -> bool {
    !j.is_empty() && !j.is_effectively_empty(eps)
}

/// Build the conflict graph from user profiles.
pub fn build_graph(profiles: &[UserProfile], geometry: &ArrayGeometry) -> Result<ConflictGraph> {
    let nodes = profiles
        .iter()
        .map(|p| {
            Ok(Node {
                id: p.id.clone(),
                support: spectral_support(geometry, p)?,
                density: Some(SpectralDensity::from_profile(geometry, p)?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConflictGraph::from_nodes(nodes))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub x: Vec<bool>,
    /// `J_k` for selected nodes, `None` otherwise.
    pub retained: Vec<Option<AngularSet>>,
    /// Q1 value for Q1 searches, cardinality for Q2 searches.
    pub objective: f64,
}

impl SelectionResult {
    pub fn selected(&self) -> Vec<usize> {
        (0..self.x.len()).filter(|&k| self.x[k]).collect()
    }

    pub fn count(&self) -> usize {
        self.x.iter().filter(|&&b| b).count()
    }
}

/// Greedy Algorithm 1 with its objective trajectory (one entry per accepted node).
pub fn greedy_algorithm_1_trace(
    graph: &ConflictGraph,
    f: SetFunction,
) -> (SelectionResult, Vec<f64>) {
    let n = graph.len();
    let mut x = vec![false; n];
    let mut current = 0.0;
    let mut trajectory = Vec::new();
    loop {
        let mut best: Option<(usize, f64)> = None;
        for k in 0..n {
            if x[k] {
                continue;
            }
            x[k] = true;
            let q = graph.objective_q1(&x, f).expect("length checked");
            x[k] = false;
            match best {
                Some((_, bq)) if q <= bq + TIE_TOL => {}
                _ => best = Some((k, q)),
            }
        }
        match best {
            Some((k, q)) if q > current + TIE_TOL => {
                x[k] = true;
                current = q;
                trajectory.push(q);
            }
            _ => break,
        }
    }
    (graph.result(x, current), trajectory)
}

/// Greedy Algorithm 1: add the node that most increases Q1 until no single
/// addition strictly increases it.
pub fn greedy_algorithm_1(graph: &ConflictGraph, f: SetFunction) -> SelectionResult {
    greedy_algorithm_1_trace(graph, f).0
}

/// Unselected nodes that keep every active node's retained set at measure
/// `>= eps` (and non-empty) once added.
pub fn feasible_set(graph: &ConflictGraph, current: &[usize], eps: f64) -> Vec<usize> {
    let n = graph.len();
    let mut active = vec![false; n];
    for &k in current {
        active[k] = true;
    }
    let mut out = Vec::new();
    for k in 0..n {
        if active[k] {
            continue;
        }
        active[k] = true;
        let ok = std::iter::once(k)
            .chain(current.iter().copied())
            .all(|m| retains(&graph.retained(m, &active), eps));
        active[k] = false;
        if ok {
            out.push(k);
        }
    }
    out
}

/// Greedy Algorithm 2: repeatedly add the feasible node of minimum degree.
pub fn greedy_algorithm_2(graph: &ConflictGraph, eps: f64) -> SelectionResult {
    let mut chosen: Vec<usize> = Vec::new();
    loop {
        let feasible = feasible_set(graph, &chosen, eps);
        // min_by_key keeps the first minimum, i.e. the lowest index
        match feasible.iter().copied().min_by_key(|&k| graph.degree(k)) {
            Some(k) => chosen.push(k),
            None => break,
        }
    }
    let mut x = vec![false; graph.len()];
    for &k in &chosen {
        x[k] = true;
    }
    let count = chosen.len() as f64;
    graph.result(x, count)
}

/// Objective for exhaustive search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SearchObjective {
    Q1(SetFunction),
    /// Maximum cardinality subject to the retained-set constraint at `eps`.
    Q2 { eps: f64 },
}

/// Enumerate all `2^K` selections. Ties go to the lexicographically smallest
/// selection vector (node 1 most significant, unselected before selected).
pub fn exhaustive_search(
    graph: &ConflictGraph,
    objective: SearchObjective,
    cap: usize,
) -> Result<SelectionResult> {
    let n = graph.len();
    if n > cap || n >= 63 {
        return Err(Error::SearchTooLarge { nodes: n, cap });
    }
    let to_x = |mask: u64| -> Vec<bool> { (0..n).map(|k| mask >> k & 1 == 1).collect() };
    let score = |mask: u64| -> Option<f64> {
        let x = to_x(mask);
        match objective {
            SearchObjective::Q1(f) => Some(graph.objective_q1(&x, f).expect("length")),
            SearchObjective::Q2 { eps } => {
                graph.is_feasible(&x, eps).then(|| x.iter().filter(|&&b| b).count() as f64)
            }
        }
    };
    let total: u64 = 1 << n;
    let best = (0..total)
        .into_par_iter()
        .filter_map(|mask| score(mask).map(|s| (mask, s)))
        .reduce_with(|a, b| if better(b, a, n) { b } else { a });
    // the empty selection is always feasible, so `best` exists
    let (mask, value) = best.unwrap_or((0, 0.0));
    Ok(graph.result(to_x(mask), value))
}

/// Is candidate `a` preferred over `b`?
fn better(a: (u64, f64), b: (u64, f64), n: usize) -> bool {
    if a.1 > b.1 + TIE_TOL {
        return true;
    }
    if b.1 > a.1 + TIE_TOL {
        return false;
    }
    lex_less(a.0, b.0, n)
}

/// Lexicographic order on `(x_1, ..., x_n)` with bit `k` holding `x_{k+1}`.
fn lex_less(a: u64, b: u64, n: usize) -> bool {
    for k in 0..n {
        let (ak, bk) = (a >> k & 1, b >> k & 1);
        if ak != bk {
            return ak < bk;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(b: &[(f64, f64)]) -> AngularSet {
        AngularSet::from_bounds(b).unwrap()
    }

    fn worked_example() -> ConflictGraph {
        ConflictGraph::from_supports(vec![
            set(&[(-0.1, 0.1), (0.2, 0.25)]),
            set(&[(-0.1, 0.1), (-0.4, -0.3)]),
        ])
    }

    #[test]
    fn example_graph_has_single_edge() {
        let g = worked_example();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edge(0, 1).unwrap(), &set(&[(-0.1, 0.1)]));
        assert_eq!(g.edge(1, 0), g.edge(0, 1));
    }

    #[test]
    fn example_q1_values() {
        let g = worked_example();
        let m = SetFunction::Measure;
        assert!((g.objective_q1(&[false, true], m).unwrap() - 0.3).abs() < 1e-12);
        assert!((g.objective_q1(&[true, true], m).unwrap() - 0.15).abs() < 1e-12);
        assert_eq!(g.objective_q1(&[false, false], m).unwrap(), 0.0);
        assert!(g.objective_q1(&[true], m).is_err());
    }

    #[test]
    fn example_greedy_selections() {
        let g = worked_example();
        assert_eq!(greedy_algorithm_1(&g, SetFunction::Measure).x, vec![false, true]);
        assert_eq!(greedy_algorithm_2(&g, 0.01).x, vec![true, true]);
        // without a profile the density falls back to the measure
        assert_eq!(greedy_algorithm_1(&g, SetFunction::Density).x, vec![false, true]);
    }

    #[test]
    fn example_feasibility() {
        let g = worked_example();
        assert_eq!(feasible_set(&g, &[], 0.01), vec![0, 1]);
        assert_eq!(feasible_set(&g, &[0], 0.01), vec![1]);
        let r = greedy_algorithm_2(&g, 0.01);
        assert_eq!(r.retained[0].as_ref().unwrap(), &set(&[(0.2, 0.25)]));
        assert_eq!(r.retained[1].as_ref().unwrap(), &set(&[(-0.4, -0.3)]));
    }

    #[test]
    fn example_exhaustive() {
        let g = worked_example();
        let q1 = exhaustive_search(&g, SearchObjective::Q1(SetFunction::Measure), 20).unwrap();
        assert_eq!(q1.x, vec![false, true]);
        assert!((q1.objective - 0.3).abs() < 1e-12);
        let q2 = exhaustive_search(&g, SearchObjective::Q2 { eps: 0.01 }, 20).unwrap();
        assert_eq!(q2.x, vec![true, true]);
        assert_eq!(q2.objective, 2.0);
    }

    #[test]
    fn edgeless_graph_selects_everything() {
        let g = ConflictGraph::from_supports(vec![
            set(&[(-0.3, -0.2)]),
            set(&[(0.0, 0.1)]),
            set(&[(0.3, 0.35)]),
        ]);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(greedy_algorithm_1(&g, SetFunction::Measure).count(), 3);
        assert_eq!(greedy_algorithm_2(&g, 0.01).count(), 3);
        let q2 = exhaustive_search(&g, SearchObjective::Q2 { eps: 0.01 }, 20).unwrap();
        assert_eq!(q2.count(), 3);
    }

    #[test]
    fn identical_nodes_select_one() {
        let w = set(&[(-0.2, 0.1)]);
        let g = ConflictGraph::from_supports(vec![w.clone(), w.clone(), w.clone()]);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.edge(0, 2).unwrap(), &w);
        assert_eq!(greedy_algorithm_1(&g, SetFunction::Measure).x, vec![true, false, false]);
        assert_eq!(greedy_algorithm_2(&g, 0.01).x, vec![true, false, false]);
        assert!(feasible_set(&g, &[0], 0.01).is_empty());
    }

    #[test]
    fn single_node() {
        let g = ConflictGraph::from_supports(vec![set(&[(0.0, 0.01)])]);
        assert_eq!(greedy_algorithm_2(&g, 0.05).count(), 0);
        assert_eq!(greedy_algorithm_2(&g, 0.0).count(), 1);
        assert_eq!(greedy_algorithm_1(&g, SetFunction::Measure).count(), 1);
    }

    #[test]
    fn zero_eps_requires_private_bin() {
        // two nodes sharing their only bin; a third with a private bin
        let b = set(&[(0.0, 0.01)]);
        let g = ConflictGraph::from_supports(vec![
            b.clone(),
            b.union(&set(&[(0.2, 0.21)])),
            set(&[(0.3, 0.31)]),
        ]);
        let r = greedy_algorithm_2(&g, 0.0);
        for k in r.selected() {
            assert!(!r.retained[k].as_ref().unwrap().is_empty());
        }
        assert_eq!(r.count(), 2);
    }

    #[test]
    fn exhaustive_cap() {
        let g = ConflictGraph::from_supports(vec![set(&[(0.0, 0.1)]); 4]);
        assert!(matches!(
            exhaustive_search(&g, SearchObjective::Q2 { eps: 0.0 }, 3),
            Err(Error::SearchTooLarge { .. })
        ));
    }

    #[test]
    fn lexicographic_order() {
        // x = (0, 1) < (1, 0)
        assert!(lex_less(0b10, 0b01, 2));
        assert!(!lex_less(0b01, 0b10, 2));
    }
}
