//! Minimum-cost spanning arborescences with laminar dual certificates.
//!
//! The engine solves
//!
//! ```text
//! min Σ c(e)·x(e)   s.t.  x(δ⁻(X)) ≥ 1  for all ∅ ≠ X ⊆ V ∖ {root},  x ≥ 0
//! ```
//!
//! by the contraction method and, along the way, extracts an *integral optimal
//! dual*: whenever a (super)node set `S` is processed, the minimum reduced cost
//! `θ` over edges entering `S` is charged to `y(S)` and subtracted from those
//! edges. The processed sets form a laminar family (singletons plus contraction
//! sets), every final arborescence edge is tight, and each processed set is
//! entered exactly once — so `Σ y = cost of the arborescence` certifies
//! optimality combinatorially. Everything is exact integer arithmetic, generic
//! over the cost type.
//!
//! Determinism: among equally cheap entering edges the smallest edge *index*
//! wins. Callers keep their edge vectors sorted by edge id, so "smallest index"
//! is "lexicographically smallest id".

use std::fmt::Debug;
use std::ops::{AddAssign, SubAssign};

use num_traits::Zero;
use thiserror::Error;

/// Integer-like cost: exact, ordered, additive. Implemented by `u64`, `u128`,
/// `num_bigint::BigUint`, ...
pub trait Cost:
    Clone + Ord + Zero + for<'a> AddAssign<&'a Self> + for<'a> SubAssign<&'a Self> + Debug
{
}
impl<T> Cost for T where
    T: Clone + Ord + Zero + for<'a> AddAssign<&'a Self> + for<'a> SubAssign<&'a Self> + Debug
{
}

/// A rooted multigraph over integer node indices. Parallel edges are allowed;
/// an edge is identified by its index in `edges`.
#[derive(Debug, Clone)]
pub struct RootedDigraph {
    pub n_nodes: usize,
    pub root: usize,
    /// `(tail, head)` pairs. Self-loops are ignored by the solver.
    pub edges: Vec<(usize, usize)>,
}

/// An optimal arborescence together with an optimal laminar dual.
#[derive(Debug, Clone)]
pub struct DualSolution<C> {
    /// Chosen incoming edge per node (`None` exactly for the root).
    pub parent_edge: Vec<Option<usize>>,
    /// The same edges as a sorted index list.
    pub arb_edges: Vec<usize>,
    pub total_cost: C,
    /// Laminar family `(sorted members, value)` with strictly positive values;
    /// `Σ value = total_cost`, and no edge's entered-sets exceed its cost.
    pub dual: Vec<(Vec<usize>, C)>,
}

#[derive(Debug, Clone, Error)]
#[error("no arborescence: node {node} cannot be reached from the root")]
pub struct Unreachable {
    pub node: usize,
}

/// Minimum-cost spanning arborescence of `g` under `costs` (one per edge),
/// with an optimal laminar dual certificate.
pub fn min_cost_arborescence<C: Cost>(
    g: &RootedDigraph,
    costs: &[C],
) -> Result<DualSolution<C>, Unreachable> {
    assert_eq!(g.edges.len(), costs.len(), "one cost per edge");
    let n = g.n_nodes;
    assert!(g.root < n);

    // Supernode bookkeeping. Ids 0..n are the original nodes; contractions
    // append fresh ids. `find` maps original nodes to their live supernode.
    let mut find: Vec<usize> = (0..n).collect();
    let mut members: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut chosen: Vec<Option<usize>> = vec![None; n];
    let mut live: Vec<usize> = (0..n).collect();
    let mut reduced: Vec<C> = costs.to_vec();
    let mut dual: Vec<(Vec<usize>, C)> = Vec::new();
    let mut fresh: Vec<usize> = (0..n).filter(|&v| v != g.root).collect();
    let root_sn = g.root;

    loop {
        // Charge each unprocessed supernode its cheapest entering edge.
        for &s in &fresh {
            let mut best: Option<usize> = None;
            for (i, &(u, v)) in g.edges.iter().enumerate() {
                if find[v] == s && find[u] != s {
                    if best.map_or(true, |b| reduced[i] < reduced[b]) {
                        best = Some(i);
                    }
                }
            }
            let best = best.ok_or(Unreachable {
                node: members[s][0],
            })?;
            let theta = reduced[best].clone();
            if !theta.is_zero() {
                dual.push((members[s].clone(), theta.clone()));
                for (i, &(u, v)) in g.edges.iter().enumerate() {
                    if find[v] == s && find[u] != s {
                        reduced[i] -= &theta;
                    }
                }
            }
            chosen[s] = Some(best);
        }

        // The chosen edges form a functional graph on live supernodes; find its
        // cycles and contract every one of them simultaneously.
        let next_of = |s: usize, chosen: &Vec<Option<usize>>| -> Option<usize> {
            chosen[s].map(|e| find[g.edges[e].0])
        };
        let mut color: Vec<u8> = vec![0; members.len()]; // 0 unseen, 1 on path, 2 done
        color[root_sn] = 2;
        let mut cycles: Vec<Vec<usize>> = Vec::new();
        for &start in &live {
            if color[start] != 0 {
                continue;
            }
            let mut path = Vec::new();
            let mut cur = start;
            loop {
                if color[cur] == 1 {
                    let pos = path.iter().position(|&x| x == cur).unwrap();
                    cycles.push(path[pos..].to_vec());
                    break;
                }
                if color[cur] == 2 {
                    break;
                }
                color[cur] = 1;
                path.push(cur);
                match next_of(cur, &chosen) {
                    Some(t) => cur = t,
                    None => break, // only the root is parentless; unreachable here
                }
            }
            for x in path {
                color[x] = 2;
            }
        }

        if cycles.is_empty() {
            break;
        }

        fresh = Vec::new();
        for cyc in cycles {
            let id = members.len();
            let mut mem: Vec<usize> = cyc.iter().flat_map(|&s| members[s].clone()).collect();
            mem.sort_unstable();
            for &v in &mem {
                find[v] = id;
            }
            members.push(mem);
            children.push(cyc.clone());
            chosen.push(None);
            live.retain(|s| !cyc.contains(s));
            live.push(id);
            fresh.push(id);
        }
    }

    // Unfold: take each live supernode's chosen edge; inside a contracted
    // supernode, keep the cycle edges except the one entering the child that
    // the external edge already enters.
    let mut parent_edge: Vec<Option<usize>> = vec![None; n];
    let mut stack: Vec<(usize, usize)> = live
        .iter()
        .filter(|&&s| s != root_sn)
        .map(|&s| (s, chosen[s].expect("live non-root supernode has a chosen edge")))
        .collect();
    while let Some((s, e)) = stack.pop() {
        if s < n {
            parent_edge[s] = Some(e);
            continue;
        }
        let h = g.edges[e].1;
        let inner = children[s]
            .iter()
            .copied()
            .find(|&c| members[c].binary_search(&h).is_ok())
            .expect("entering edge head lies in some child");
        stack.push((inner, e));
        for &c in &children[s] {
            if c != inner {
                stack.push((c, chosen[c].expect("cycle member has a chosen edge")));
            }
        }
    }

    let mut arb_edges: Vec<usize> = Vec::new();
    let mut total_cost = C::zero();
    for v in 0..n {
        if v == g.root {
            debug_assert!(parent_edge[v].is_none());
            continue;
        }
        let e = parent_edge[v].expect("arborescence spans every non-root node");
        arb_edges.push(e);
        total_cost += &costs[e];
    }
    arb_edges.sort_unstable();

    debug_assert_eq!(
        {
            let mut s = C::zero();
            for (_, y) in &dual {
                s += y;
            }
            s
        },
        total_cost,
        "strong duality must hold exactly"
    );

    Ok(DualSolution {
        parent_edge,
        arb_edges,
        total_cost,
        dual,
    })
}

/// A maximum-cardinality branching of a (rootless) digraph: every node keeps at
/// most one incoming edge, no cycles, as many edges as possible. Deterministic;
/// ties prefer smaller edge indices. Returns sorted edge indices.
pub fn max_cardinality_branching(n_nodes: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let root = n_nodes;
    let mut all = edges.to_vec();
    let mut costs: Vec<u64> = vec![0; edges.len()];
    for v in 0..n_nodes {
        all.push((root, v));
        costs.push(1);
    }
    let g = RootedDigraph {
        n_nodes: n_nodes + 1,
        root,
        edges: all,
    };
    let sol = min_cost_arborescence(&g, &costs)
        .expect("virtual root edges make every node reachable");
    sol.arb_edges
        .into_iter()
        .filter(|&e| e < edges.len())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    /// All spanning arborescences of `g`, as sorted edge-index sets (test-size
    /// graphs only).
    fn all_arborescences(g: &RootedDigraph) -> Vec<Vec<usize>> {
        let mut in_edges: Vec<Vec<usize>> = vec![Vec::new(); g.n_nodes];
        for (i, &(u, v)) in g.edges.iter().enumerate() {
            if u != v && v != g.root {
                in_edges[v].push(i);
            }
        }
        let non_root: Vec<usize> = (0..g.n_nodes).filter(|&v| v != g.root).collect();
        let mut out = Vec::new();
        let mut pick = vec![0usize; non_root.len()];
        'outer: loop {
            // materialize current selection if every node has an in-edge
            if non_root.iter().all(|&v| !in_edges[v].is_empty()) {
                let sel: Vec<usize> = non_root
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| in_edges[v][pick[i]])
                    .collect();
                // acyclicity: walk parents
                let mut parent: Vec<Option<usize>> = vec![None; g.n_nodes];
                for &e in &sel {
                    parent[g.edges[e].1] = Some(g.edges[e].0);
                }
                let mut acyclic = true;
                'nodes: for start in 0..g.n_nodes {
                    let mut seen = BTreeSet::new();
                    let mut cur = start;
                    while let Some(p) = parent[cur] {
                        if !seen.insert(cur) {
                            acyclic = false;
                            break 'nodes;
                        }
                        cur = p;
                    }
                }
                if acyclic {
                    let mut sel = sel;
                    sel.sort_unstable();
                    out.push(sel);
                }
            } else {
                break;
            }
            // odometer
            for i in (0..pick.len()).rev() {
                pick[i] += 1;
                if pick[i] < in_edges[non_root[i]].len() {
                    continue 'outer;
                }
                pick[i] = 0;
            }
            break;
        }
        out
    }

    fn check_dual<C: Cost>(g: &RootedDigraph, costs: &[C], sol: &DualSolution<C>) {
        // positive values, laminar, feasible, strong duality
        let mut total = C::zero();
        for (set, y) in &sol.dual {
            assert!(!y.is_zero());
            assert!(!set.contains(&g.root));
            total += y;
        }
        assert_eq!(total, sol.total_cost);
        for (a, _) in &sol.dual {
            for (b, _) in &sol.dual {
                let sa: BTreeSet<_> = a.iter().collect();
                let sb: BTreeSet<_> = b.iter().collect();
                let inter = sa.intersection(&sb).count();
                assert!(
                    inter == 0 || inter == sa.len() || inter == sb.len(),
                    "not laminar: {a:?} vs {b:?}"
                );
            }
        }
        for (i, &(u, v)) in g.edges.iter().enumerate() {
            let mut load = C::zero();
            for (set, y) in &sol.dual {
                if set.binary_search(&v).is_ok() && set.binary_search(&u).is_err() {
                    load += y;
                }
            }
            assert!(load <= costs[i], "edge {i} overloaded");
        }
    }

    #[test]
    fn single_edge() {
        let g = RootedDigraph {
            n_nodes: 2,
            root: 0,
            edges: vec![(0, 1)],
        };
        let sol = min_cost_arborescence(&g, &[5u64]).unwrap();
        assert_eq!(sol.total_cost, 5);
        assert_eq!(sol.arb_edges, vec![0]);
        assert_eq!(sol.dual, vec![(vec![1], 5)]);
    }

    #[test]
    fn cycle_contraction() {
        // root 0; cheap 2-cycle between 1 and 2, expensive root edges.
        let g = RootedDigraph {
            n_nodes: 3,
            root: 0,
            edges: vec![(0, 1), (0, 2), (1, 2), (2, 1)],
        };
        let costs = vec![10u64, 10, 1, 1];
        let sol = min_cost_arborescence(&g, &costs).unwrap();
        assert_eq!(sol.total_cost, 11);
        // deterministic: the contracted pair is entered via edge 0 (smallest index)
        assert_eq!(sol.arb_edges, vec![0, 2]);
        check_dual(&g, &costs, &sol);
        // the dual must contain the contracted set {1,2} with value 9
        assert!(sol.dual.contains(&(vec![1, 2], 9)));
    }

    #[test]
    fn nested_contraction() {
        // 0 = root; 3-cycle (1,2,3) of cost-0 edges, then an outer structure
        // forcing a second contraction: node 4 cheap-cycles with the 3-cycle.
        let g = RootedDigraph {
            n_nodes: 5,
            root: 0,
            edges: vec![
                (1, 2), // 0
                (2, 3), // 1
                (3, 1), // 2
                (3, 4), // 3
                (4, 1), // 4
                (0, 4), // 5
                (0, 1), // 6
            ],
        };
        let costs = vec![0u64, 0, 0, 2, 1, 7, 9];
        let sol = min_cost_arborescence(&g, &costs).unwrap();
        check_dual(&g, &costs, &sol);
        let best = all_arborescences(&g)
            .into_iter()
            .map(|sel| sel.iter().map(|&e| costs[e]).sum::<u64>())
            .min()
            .unwrap();
        assert_eq!(sol.total_cost, best);
    }

    #[test]
    fn unreachable_detected() {
        let g = RootedDigraph {
            n_nodes: 3,
            root: 0,
            edges: vec![(0, 1)],
        };
        let err = min_cost_arborescence(&g, &[1u64]).unwrap_err();
        assert_eq!(err.node, 2);
    }

    #[test]
    fn root_only() {
        let g = RootedDigraph {
            n_nodes: 1,
            root: 0,
            edges: vec![],
        };
        let sol = min_cost_arborescence::<u64>(&g, &[]).unwrap();
        assert_eq!(sol.total_cost, 0);
        assert!(sol.arb_edges.is_empty());
        assert!(sol.dual.is_empty());
    }

    #[test]
    fn edges_into_root_and_self_loops_ignored() {
        let g = RootedDigraph {
            n_nodes: 3,
            root: 0,
            edges: vec![(1, 0), (1, 1), (0, 1), (1, 2)],
        };
        let costs = vec![0u64, 0, 3, 4];
        let sol = min_cost_arborescence(&g, &costs).unwrap();
        assert_eq!(sol.arb_edges, vec![2, 3]);
        assert_eq!(sol.total_cost, 7);
        check_dual(&g, &costs, &sol);
    }

    #[test]
    fn biguint_costs_work() {
        use num_bigint::BigUint;
        let g = RootedDigraph {
            n_nodes: 3,
            root: 0,
            edges: vec![(0, 1), (0, 2), (1, 2), (2, 1)],
        };
        let costs: Vec<BigUint> = [10u32, 10, 1, 1].iter().map(|&c| BigUint::from(c)).collect();
        let sol = min_cost_arborescence(&g, &costs).unwrap();
        assert_eq!(sol.total_cost, BigUint::from(11u32));
        check_dual(&g, &costs, &sol);
    }

    #[test]
    fn max_cardinality_examples() {
        // path 0->1->2 plus 2->0 closing a cycle: max branching has 2 edges.
        let edges = vec![(0, 1), (1, 2), (2, 0)];
        let b = max_cardinality_branching(3, &edges);
        assert_eq!(b.len(), 2);
        assert_eq!(b, vec![0, 1], "ties must prefer smaller indices");
        // two disjoint 2-cycles: 2 edges max (one per cycle).
        let edges = vec![(0, 1), (1, 0), (2, 3), (3, 2)];
        let b = max_cardinality_branching(4, &edges);
        assert_eq!(b.len(), 2);
        assert_eq!(b, vec![0, 2]);
        // empty graph
        assert!(max_cardinality_branching(3, &[]).is_empty());
    }

    #[test]
    fn randomized_against_enumeration() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(7);
        for trial in 0..200 {
            let n = rng.random_range(2..=5);
            let m = rng.random_range(1..=10);
            let edges: Vec<(usize, usize)> = (0..m)
                .map(|_| (rng.random_range(0..n), rng.random_range(0..n)))
                .filter(|(u, v)| u != v)
                .collect();
            let costs: Vec<u64> = (0..edges.len()).map(|_| rng.random_range(0..8)).collect();
            let g = RootedDigraph {
                n_nodes: n,
                root: 0,
                edges,
            };
            let brute = all_arborescences(&g);
            match min_cost_arborescence(&g, &costs) {
                Ok(sol) => {
                    assert!(!brute.is_empty(), "trial {trial}: solver found one, brute none");
                    let best = brute
                        .iter()
                        .map(|sel| sel.iter().map(|&e| costs[e]).sum::<u64>())
                        .min()
                        .unwrap();
                    assert_eq!(sol.total_cost, best, "trial {trial}");
                    check_dual(&g, &costs, &sol);
                    let cost_of_sol: u64 = sol.arb_edges.iter().map(|&e| costs[e]).sum();
                    assert_eq!(cost_of_sol, sol.total_cost, "trial {trial}");
                }
                Err(_) => assert!(brute.is_empty(), "trial {trial}: brute found one, solver none"),
            }
        }
    }

    #[test]
    fn randomized_max_cardinality() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.random_range(1..=5);
            let m = rng.random_range(0..=8);
            let edges: Vec<(usize, usize)> = (0..m)
                .map(|_| (rng.random_range(0..n), rng.random_range(0..n)))
                .filter(|(u, v)| u != v)
                .collect();
            let got = max_cardinality_branching(n, &edges);
            // brute force: try all subsets
            let mut best = 0usize;
            for mask in 0u32..(1 << edges.len()) {
                let sel: Vec<usize> =
                    (0..edges.len()).filter(|i| mask >> i & 1 == 1).collect();
                // in-degree check
                let mut indeg = vec![0; n];
                for &e in &sel {
                    indeg[edges[e].1] += 1;
                }
                if indeg.iter().any(|&d| d > 1) {
                    continue;
                }
                // cycle check
                let mut parent = vec![None; n];
                for &e in &sel {
                    parent[edges[e].1] = Some(edges[e].0);
                }
                let mut ok = true;
                for start in 0..n {
                    let mut cur = start;
                    let mut steps = 0;
                    while let Some(p) = parent[cur] {
                        cur = p;
                        steps += 1;
                        if steps > n {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    best = best.max(sel.len());
                }
            }
            assert_eq!(got.len(), best);
            // verify got is itself a branching
            let mut indeg = vec![0; n];
            for &e in &got {
                indeg[edges[e].1] += 1;
            }
            assert!(indeg.iter().all(|&d| d <= 1));
        }
    }
}
