//! Color refinement for directed graphs and pairwise distinguishability.
//!
//! Five refinement variants share one engine: classic refinement on the
//! symmetrized neighbor set (`Wl1`), direction-blind aggregation over every
//! incident arc (`UWl`), separate out-/in-multisets (`DWl`), and the two
//! single-direction variants. Colors are canonical: each iteration interns
//! full signatures in first-seen order, so equal colors mean equal signatures
//! by construction and fixtures are bit-exact.

use std::collections::HashMap;

use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefineMode {
    /// Multiset over the symmetrized neighbor set (each neighbor once).
    Wl1,
    /// Direction-blind multiset with one entry per incident arc.
    UWl,
    /// Own color plus separate out- and in-neighbor multisets.
    DWl,
    /// Own color plus the out-neighbor multiset only.
    OutOnly,
    /// Own color plus the in-neighbor multiset only.
    InOnly,
}

impl RefineMode {
    pub fn name(self) -> &'static str {
        match self {
            RefineMode::Wl1 => "wl1",
            RefineMode::UWl => "uwl",
            RefineMode::DWl => "dwl",
            RefineMode::OutOnly => "out",
            RefineMode::InOnly => "in",
        }
    }
}

impl std::str::FromStr for RefineMode {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s {
            "wl1" => Ok(RefineMode::Wl1),
            "uwl" => Ok(RefineMode::UWl),
            "dwl" => Ok(RefineMode::DWl),
            "out" => Ok(RefineMode::OutOnly),
            "in" => Ok(RefineMode::InOnly),
            other => Err(crate::error::Error::invalid(format!(
                "unknown refinement mode {other:?} (wl1|uwl|dwl|out|in)"
            ))),
        }
    }
}

/// Color history of one refinement run. `rounds[0]` is the constant initial
/// coloring; colors of different rounds live in separate id namespaces.
#[derive(Debug, Clone)]
pub struct Coloring {
    pub rounds: Vec<Vec<u32>>,
    /// Number of refinement iterations executed before stability (the last
    /// round repeats the partition of the one before it).
    pub stable_iteration: usize,
    /// Sorted (color, count) pairs of the final round.
    pub histogram: Vec<(u32, usize)>,
}

impl Coloring {
    pub fn final_colors(&self) -> &[u32] {
        self.rounds.last().expect("at least the initial round")
    }

    pub fn num_classes(&self) -> usize {
        self.histogram.len()
    }
}

type Signature = (u32, Vec<u32>, Vec<u32>);

fn node_signature(g: &Graph, colors: &[u32], i: usize, mode: RefineMode) -> Signature {
    let own = colors[i];
    match mode {
        RefineMode::Wl1 => {
            // Symmetrized neighbor set: each adjacent node contributes once.
            let mut nbrs: Vec<usize> = g
                .out_neighbors(i)
                .iter()
                .chain(g.in_neighbors(i))
                .copied()
                .collect();
            nbrs.sort_unstable();
            nbrs.dedup();
            let mut cs: Vec<u32> = nbrs.into_iter().map(|j| colors[j]).collect();
            cs.sort_unstable();
            (own, cs, Vec::new())
        }
        RefineMode::UWl => {
            let mut cs: Vec<u32> = g
                .out_neighbors(i)
                .iter()
                .chain(g.in_neighbors(i))
                .map(|&j| colors[j])
                .collect();
            cs.sort_unstable();
            (own, cs, Vec::new())
        }
        RefineMode::DWl => {
            let mut outs: Vec<u32> = g.out_neighbors(i).iter().map(|&j| colors[j]).collect();
            outs.sort_unstable();
            let mut ins: Vec<u32> = g.in_neighbors(i).iter().map(|&j| colors[j]).collect();
            ins.sort_unstable();
            (own, outs, ins)
        }
        RefineMode::OutOnly => {
            let mut outs: Vec<u32> = g.out_neighbors(i).iter().map(|&j| colors[j]).collect();
            outs.sort_unstable();
            (own, outs, Vec::new())
        }
        RefineMode::InOnly => {
            let mut ins: Vec<u32> = g.in_neighbors(i).iter().map(|&j| colors[j]).collect();
            ins.sort_unstable();
            (own, ins, Vec::new())
        }
    }
}

/// Jointly refine several graphs with one shared signature-interning table per
/// iteration, so colors are comparable across them. Stops when the joint
/// color-class count stops growing or after `max_iters` iterations.
pub fn refine_jointly(graphs: &[&Graph], mode: RefineMode, max_iters: usize) -> Vec<Coloring> {
    let mut rounds_per_graph: Vec<Vec<Vec<u32>>> = graphs
        .iter()
        .map(|g| vec![vec![0u32; g.n()]])
        .collect();
    let mut class_count = 1usize;
    let mut stable_at = 0usize;
    for iter in 1..=max_iters {
        let mut intern: HashMap<Signature, u32> = HashMap::new();
        let mut new_rounds: Vec<Vec<u32>> = Vec::with_capacity(graphs.len());
        for (gi, g) in graphs.iter().enumerate() {
            let prev = rounds_per_graph[gi].last().unwrap();
            let mut next = Vec::with_capacity(g.n());
            for i in 0..g.n() {
                let sig = node_signature(g, prev, i, mode);
                let fresh = intern.len() as u32;
                let id = *intern.entry(sig).or_insert(fresh);
                next.push(id);
            }
            new_rounds.push(next);
        }
        let new_count = intern.len();
        for (gi, round) in new_rounds.into_iter().enumerate() {
            rounds_per_graph[gi].push(round);
        }
        stable_at = iter;
        if new_count == class_count {
            break;
        }
        class_count = new_count;
    }
    rounds_per_graph
        .into_iter()
        .map(|rounds| {
            let histogram = histogram_of(rounds.last().unwrap());
            Coloring {
                rounds,
                stable_iteration: stable_at,
                histogram,
            }
        })
        .collect()
}

fn histogram_of(colors: &[u32]) -> Vec<(u32, usize)> {
    let mut counts: HashMap<u32, usize> = HashMap::new();
    for &c in colors {
        *counts.entry(c).or_insert(0) += 1;
    }
    let mut out: Vec<(u32, usize)> = counts.into_iter().collect();
    out.sort_unstable();
    out
}

/// Refine one graph from a constant initial coloring until stability or
/// `max_iters` (pass `g.n()` for the default bound).
pub fn color_refine(g: &Graph, mode: RefineMode, max_iters: usize) -> Coloring {
    refine_jointly(&[g], mode, max_iters).pop().unwrap()
}

#[derive(Debug, Clone)]
pub struct ComparisonResult {
    pub distinguishable: bool,
    pub iterations: usize,
    pub histogram_left: Vec<(u32, usize)>,
    pub histogram_right: Vec<(u32, usize)>,
}

/// Refine both graphs jointly and compare final color histograms. Graphs with
/// different node counts are trivially distinguishable.
pub fn compare(g1: &Graph, g2: &Graph, mode: RefineMode) -> ComparisonResult {
    if g1.n() != g2.n() {
        return ComparisonResult {
            distinguishable: true,
            iterations: 0,
            histogram_left: Vec::new(),
            histogram_right: Vec::new(),
        };
    }
    let max_iters = g1.n() + g2.n() + 1;
    let colorings = refine_jointly(&[g1, g2], mode, max_iters);
    ComparisonResult {
        distinguishable: colorings[0].histogram != colorings[1].histogram,
        iterations: colorings[0].stable_iteration,
        histogram_left: colorings[0].histogram.clone(),
        histogram_right: colorings[1].histogram.clone(),
    }
}

pub fn distinguishable(g1: &Graph, g2: &Graph, mode: RefineMode) -> bool {
    compare(g1, g2, mode).distinguishable
}

#[cfg(test)]
mod tests {
    use super::*;

    fn directed_3cycle() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2), (2, 0)], true).unwrap()
    }

    /// Transitive tournament: 0->1, 0->2, 1->2.
    fn tournament3() -> Graph {
        Graph::from_edges(3, &[(0, 1), (0, 2), (1, 2)], true).unwrap()
    }

    #[test]
    fn dwl_cycle_stays_monochrome() {
        let c = color_refine(&directed_3cycle(), RefineMode::DWl, 3);
        for round in &c.rounds {
            assert!(round.iter().all(|&x| x == round[0]));
        }
        assert_eq!(c.num_classes(), 1);
    }

    #[test]
    fn dwl_tournament_splits_into_three() {
        let c = color_refine(&tournament3(), RefineMode::DWl, 3);
        let last = c.final_colors();
        assert_ne!(last[0], last[1]);
        assert_ne!(last[1], last[2]);
        assert_ne!(last[0], last[2]);
    }

    #[test]
    fn dwl_separates_cycle_from_tournament_uwl_does_not() {
        let g1 = directed_3cycle();
        let g2 = tournament3();
        assert!(distinguishable(&g1, &g2, RefineMode::DWl));
        assert!(!distinguishable(&g1, &g2, RefineMode::UWl));
    }

    #[test]
    fn joint_coloring_matches_published_pattern() {
        // One iteration after the constant round: cycle nodes all share one
        // color (one out, one in); tournament has a two-out node, a
        // one-out-one-in node (same color as the cycle's), and a two-in node.
        let g1 = directed_3cycle();
        let g2 = tournament3();
        let cs = refine_jointly(&[&g1, &g2], RefineMode::DWl, 4);
        let r1 = &cs[0].rounds[1];
        let r2 = &cs[1].rounds[1];
        assert!(r1.iter().all(|&c| c == r1[0]));
        assert_eq!(r2[1], r1[0]);
        assert_ne!(r2[0], r2[1]);
        assert_ne!(r2[2], r2[1]);
        assert_ne!(r2[0], r2[2]);
        assert_eq!(cs[0].num_classes(), 1);
        assert_eq!(cs[1].num_classes(), 3);
    }

    /// G1: two sources pointing at one sink plus an isolated node;
    /// G2: two separate source->sink pairs. Same out-degree sequences, but
    /// G1's sink has in-degree two.
    fn in_degree_two_pair() -> (Graph, Graph) {
        let g1 = Graph::from_edges(4, &[(2, 0), (3, 0)], true).unwrap();
        let g2 = Graph::from_edges(4, &[(2, 0), (3, 1)], true).unwrap();
        (g1, g2)
    }

    #[test]
    fn out_only_blind_to_in_degrees_dwl_is_not() {
        let (g1, g2) = in_degree_two_pair();
        assert!(!distinguishable(&g1, &g2, RefineMode::OutOnly));
        assert!(distinguishable(&g1, &g2, RefineMode::DWl));
    }

    #[test]
    fn wl1_blind_spot_triangles_vs_hexagon() {
        let two_triangles = Graph::from_edges(
            6,
            &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)],
            false,
        )
        .unwrap();
        let hexagon = Graph::from_edges(
            6,
            &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)],
            false,
        )
        .unwrap();
        assert!(!distinguishable(&two_triangles, &hexagon, RefineMode::Wl1));
    }

    #[test]
    fn unequal_node_counts_trivially_distinguishable() {
        let a = Graph::from_edges(3, &[(0, 1)], true).unwrap();
        let b = Graph::from_edges(4, &[(0, 1)], true).unwrap();
        assert!(distinguishable(&a, &b, RefineMode::DWl));
    }

    #[test]
    fn comparison_is_symmetric() {
        let (g1, g2) = in_degree_two_pair();
        for mode in [
            RefineMode::Wl1,
            RefineMode::UWl,
            RefineMode::DWl,
            RefineMode::OutOnly,
            RefineMode::InOnly,
        ] {
            assert_eq!(
                distinguishable(&g1, &g2, mode),
                distinguishable(&g2, &g1, mode),
                "{mode:?}"
            );
        }
    }

    #[test]
    fn isomorphic_permutations_never_distinguished() {
        use rand::rngs::StdRng;
        use rand::seq::SliceRandom;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(71);
        for _ in 0..20 {
            let n = rng.gen_range(3..10);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if i != j && rng.gen::<f64>() < 0.3 {
                        edges.push((i, j));
                    }
                }
            }
            let g = Graph::from_edges(n, &edges, true).unwrap();
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let permuted: Vec<(usize, usize)> =
                edges.iter().map(|&(s, d)| (perm[s], perm[d])).collect();
            let h = Graph::from_edges(n, &permuted, true).unwrap();
            for mode in [RefineMode::Wl1, RefineMode::UWl, RefineMode::DWl] {
                assert!(!distinguishable(&g, &h, mode), "{mode:?}");
            }
        }
    }

    #[test]
    fn class_count_nondecreasing_and_stabilizes() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(13);
        for _ in 0..10 {
            let n = rng.gen_range(2..12);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if i != j && rng.gen::<f64>() < 0.25 {
                        edges.push((i, j));
                    }
                }
            }
            let g = Graph::from_edges(n, &edges, true).unwrap();
            let c = color_refine(&g, RefineMode::DWl, n + 1);
            assert!(c.stable_iteration <= n + 1);
            let mut prev = 1usize;
            for round in &c.rounds[1..] {
                let mut classes: Vec<u32> = round.clone();
                classes.sort_unstable();
                classes.dedup();
                assert!(classes.len() >= prev);
                prev = classes.len();
            }
        }
    }

    #[test]
    fn dwl_refines_uwl() {
        // If two nodes share a D-WL color they share the U-WL color, per round.
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(29);
        for _ in 0..50 {
            let n = rng.gen_range(2..12);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if i != j && rng.gen::<f64>() < 0.3 {
                        edges.push((i, j));
                    }
                }
            }
            let g = Graph::from_edges(n, &edges, true).unwrap();
            let d = color_refine(&g, RefineMode::DWl, n);
            let u = color_refine(&g, RefineMode::UWl, n);
            let rounds = d.rounds.len().min(u.rounds.len());
            for t in 0..rounds {
                for i in 0..n {
                    for j in 0..n {
                        if d.rounds[t][i] == d.rounds[t][j] {
                            assert_eq!(u.rounds[t][i], u.rounds[t][j]);
                        }
                    }
                }
            }
        }
    }
}
