//! Structural view of the popular arborescences under weak rankings.
//!
//! Expanding every supernode of the contracted graph back into its member
//! nodes and safe edges yields a subgraph `D*` of the augmented instance. The
//! popular arborescences are then exactly the arborescences of `D*` that use
//! `|X| − 1` safe edges inside every supernode `X` — a purely structural
//! membership test ([`is_popular_structural`]), and the reason a cheapest
//! popular branching can be found by weighting the contracted graph with
//! cheapest inner trees ([`min_cost_popular_branching`]).
//!
//! The same structure is emitted as two linear-programming descriptions of the
//! popular-arborescence polytope, for inspection or external solvers:
//!
//! * [`emit_face_lp`]: the arborescence polytope of the full instance
//!   (subtour rows for every node set, in-degree equalities) intersected with
//!   the tight supernode equalities and `x_e = 0` off `D*`. Exponentially many
//!   rows, guarded by a node-count cutoff.
//! * [`emit_extended_lp`]: the flow-based compact formulation over `D*` — per
//!   destination node a unit of flow from the root, capacity and conservation
//!   rows, the total-cardinality row, and the tight supernode equalities.
//!   `Θ(mn)` rows, usable at any size.
//!
//! Text format: one row per line, `name: t1 + t2 - t3 {<=,=,>=} rhs`, with
//! variables `x_<edgeid>` and `f_<edgeid>_<node>`; comment lines start with
//! `\`. The objective is the constant zero — these are feasibility systems.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::arborescence::{min_cost_arborescence, RootedDigraph};
use crate::instance::{Arborescence, Branching, EdgeId, PrefClass, RootedInstance};
use crate::solver::{build_contraction, safe_edges, ContractionGraph, NotWeakRanking};

/// The expanded contracted graph: supernodes replaced by their members and
/// safe edges, contracted edges by their original counterparts.
#[derive(Debug, Clone)]
pub struct DStarGraph {
    /// Instance edge indices forming `E_{D*}`, ascending.
    pub edges: Vec<usize>,
    /// Safe edge sets `S(X)`, index-aligned with `contraction.supernodes`.
    pub safe: Vec<Vec<usize>>,
    /// The supernode structure this graph expands.
    pub contraction: ContractionGraph,
}

impl DStarGraph {
    /// Serialize as the edge-id list of `E_{D*}`.
    pub fn edge_ids(&self, rooted: &RootedInstance) -> Vec<EdgeId> {
        let inst = rooted.instance();
        self.edges.iter().map(|&e| inst.edge(e).id.clone()).collect()
    }
}

/// Expand the contracted graph of `rooted` into `D*`.
pub fn build_dstar(rooted: &RootedInstance) -> DStarGraph {
    let contraction = build_contraction(rooted);
    let safe: Vec<Vec<usize>> = contraction
        .supernodes
        .iter()
        .map(|x| safe_edges(rooted, x))
        .collect();
    let mut edges: BTreeSet<usize> = safe.iter().flatten().copied().collect();
    edges.extend(contraction.edges.iter().map(|d| d.preimage));
    DStarGraph {
        edges: edges.into_iter().collect(),
        safe,
        contraction,
    }
}

/// Structural popularity test: is `arb` an arborescence of `D*` using
/// `|X| − 1` safe edges inside each supernode `X`? Equivalent to popularity
/// under weak rankings.
pub fn is_popular_structural(
    rooted: &RootedInstance,
    arb: &Arborescence,
) -> Result<bool, NotWeakRanking> {
    let inst = rooted.instance();
    if inst.instance_class() == PrefClass::Partial {
        return Err(NotWeakRanking(inst.instance_class()));
    }
    let ds = build_dstar(rooted);
    let dstar: BTreeSet<usize> = ds.edges.iter().copied().collect();
    let chosen: BTreeSet<usize> = arb
        .edge_ids()
        .iter()
        .map(|id| inst.edge_index(id).expect("arborescence edges exist"))
        .collect();
    if !chosen.is_subset(&dstar) {
        return Ok(false);
    }
    for (i, x) in ds.contraction.supernodes.iter().enumerate() {
        let inside = ds.safe[i].iter().filter(|e| chosen.contains(e)).count();
        if inside != x.len() - 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Run the generic engine on a shifted copy of possibly-negative costs; the
/// shift keeps the engine in nonnegative territory and cancels exactly because
/// every spanning arborescence of the graph has the same edge count.
fn min_cost_shifted(
    g: &RootedDigraph,
    costs: &[i64],
) -> Option<(Vec<usize>, i64)> {
    let shift = costs.iter().copied().min().unwrap_or(0).min(0).unsigned_abs() as i128;
    let shifted: Vec<i128> = costs.iter().map(|&c| c as i128 + shift).collect();
    let sol = min_cost_arborescence(g, &shifted).ok()?;
    let real = sol.total_cost - shift * sol.arb_edges.len() as i128;
    Some((sol.arb_edges, i64::try_from(real).expect("cost fits i64")))
}

/// Cheapest popular branching: minimize a linear edge cost over all popular
/// arborescences. Costs are looked up by edge id (missing ids cost 0; root
/// edge ids participate like any other). Returns `None` when no popular
/// arborescence exists.
pub fn min_cost_popular_branching(
    rooted: &RootedInstance,
    costs: &BTreeMap<EdgeId, i64>,
) -> Result<Option<(Arborescence, i64)>, NotWeakRanking> {
    let inst = rooted.instance();
    if inst.instance_class() == PrefClass::Partial {
        return Err(NotWeakRanking(inst.instance_class()));
    }
    let ds = build_dstar(rooted);
    let cg = &ds.contraction;
    let cost_of = |e: usize| costs.get(&inst.edge(e).id).copied().unwrap_or(0);

    // Cheapest inner tree per (supernode, entry point): the safe edges of a
    // supernode span it from any entry point, so these always exist.
    let mut inner: BTreeMap<(usize, usize), (Vec<usize>, i64)> = BTreeMap::new();
    for (s, x) in cg.supernodes.iter().enumerate() {
        let members: Vec<usize> = x.iter().copied().collect();
        let local: BTreeMap<usize, usize> =
            members.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        for &entry in &cg.entry_points[s] {
            let g = RootedDigraph {
                n_nodes: members.len(),
                root: local[&entry],
                edges: ds.safe[s]
                    .iter()
                    .map(|&e| (local[&inst.edge(e).tail], local[&inst.edge(e).head]))
                    .collect(),
            };
            let local_costs: Vec<i64> = ds.safe[s].iter().map(|&e| cost_of(e)).collect();
            let (picked, total) = min_cost_shifted(&g, &local_costs)
                .expect("entry points span their supernode via safe edges");
            let picked: Vec<usize> = picked.iter().map(|&i| ds.safe[s][i]).collect();
            inner.insert((s, entry), (picked, total));
        }
    }

    // Weight each contracted edge with its own cost plus the cheapest inner
    // tree hanging off the entry point it targets.
    let s_count = cg.supernodes.len();
    let g = RootedDigraph {
        n_nodes: s_count + 1,
        root: s_count,
        edges: cg
            .edges
            .iter()
            .map(|d| (d.from.unwrap_or(s_count), d.to))
            .collect(),
    };
    let weights: Vec<i64> = cg
        .edges
        .iter()
        .map(|d| {
            let entry = inst.edge(d.preimage).head;
            cost_of(d.preimage) + inner[&(d.to, entry)].1
        })
        .collect();
    let Some((picked, total)) = min_cost_shifted(&g, &weights) else {
        return Ok(None);
    };

    let mut ids: Vec<&str> = Vec::new();
    for &i in &picked {
        let d = &cg.edges[i];
        ids.push(inst.edge(d.preimage).id.as_str());
        let entry = inst.edge(d.preimage).head;
        for &e in &inner[&(d.to, entry)].0 {
            ids.push(inst.edge(e).id.as_str());
        }
    }
    let b = Branching::from_edges(inst, ids).expect("expansion is a branching");
    let arb = Arborescence::new(rooted, b).expect("expansion spans");
    debug_assert!(matches!(is_popular_structural(rooted, &arb), Ok(true)));
    Ok(Some((arb, total)))
}

pub const DEFAULT_FACE_CUTOFF: usize = 16;

#[derive(Debug, Clone, Error)]
pub enum PolytopeError {
    #[error(transparent)]
    NotWeak(#[from] NotWeakRanking),
    #[error("face emission enumerates all node subsets; n = {n} exceeds the cutoff {cutoff}")]
    TooLarge { n: usize, cutoff: usize },
}

fn render_terms(terms: &[(i64, String)]) -> String {
    if terms.is_empty() {
        return "0".to_string();
    }
    let mut s = String::new();
    for (k, (c, v)) in terms.iter().enumerate() {
        if k == 0 {
            if *c < 0 {
                s.push_str("- ");
            }
        } else {
            s.push_str(if *c < 0 { " - " } else { " + " });
        }
        if c.abs() != 1 {
            let _ = write!(s, "{} ", c.abs());
        }
        s.push_str(v);
    }
    s
}

fn push_row(out: &mut String, name: &str, terms: &[(i64, String)], op: &str, rhs: i64) {
    let _ = writeln!(out, "{name}: {} {op} {rhs}", render_terms(terms));
}

fn set_label(rooted: &RootedInstance, x: &[usize]) -> String {
    let inst = rooted.instance();
    x.iter()
        .map(|&v| inst.node_name(v).as_str())
        .collect::<Vec<_>>()
        .join("_")
}

/// Visit all `size`-subsets of `items` in lexicographic order.
fn for_each_subset(items: &[usize], size: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(items: &[usize], start: usize, picked: &mut Vec<usize>, size: usize, f: &mut impl FnMut(&[usize])) {
        if picked.len() == size {
            f(picked);
            return;
        }
        for i in start..items.len() {
            picked.push(items[i]);
            rec(items, i + 1, picked, size, f);
            picked.pop();
        }
    }
    rec(items, 0, &mut Vec::new(), size, f);
}

/// Emit the face description of the popular-arborescence polytope: subtour
/// rows for every node set (sizes 2..=n), in-degree equalities, tight
/// supernode equalities, zero rows off `D*`, and nonnegativity bounds.
pub fn emit_face_lp(rooted: &RootedInstance, cutoff: usize) -> Result<String, PolytopeError> {
    let inst = rooted.instance();
    if inst.instance_class() == PrefClass::Partial {
        return Err(NotWeakRanking(inst.instance_class()).into());
    }
    let n = rooted.n();
    if n > cutoff {
        return Err(PolytopeError::TooLarge { n, cutoff });
    }
    let ds = build_dstar(rooted);
    let dstar: BTreeSet<usize> = ds.edges.iter().copied().collect();
    let ordinary: Vec<usize> = rooted.ordinary_nodes().collect();
    let x_var = |e: usize| format!("x_{}", inst.edge(e).id);

    let mut out = String::new();
    let _ = writeln!(out, "\\ branching face LP");
    let _ = writeln!(
        out,
        "\\ n={n} m={} supernodes={}",
        inst.n_edges(),
        ds.contraction.supernodes.len()
    );
    let _ = writeln!(out, "min: 0");

    for size in 2..=n {
        for_each_subset(&ordinary, size, &mut |x| {
            let inside: BTreeSet<usize> = x.iter().copied().collect();
            let terms: Vec<(i64, String)> = (0..inst.n_edges())
                .filter(|&e| {
                    inside.contains(&inst.edge(e).tail) && inside.contains(&inst.edge(e).head)
                })
                .map(|e| (1, x_var(e)))
                .collect();
            push_row(
                &mut out,
                &format!("subtour_{}", set_label(rooted, x)),
                &terms,
                "<=",
                size as i64 - 1,
            );
        });
    }

    for &v in &ordinary {
        let terms: Vec<(i64, String)> =
            inst.in_edges(v).iter().map(|&e| (1, x_var(e))).collect();
        push_row(
            &mut out,
            &format!("indeg_{}", inst.node_name(v)),
            &terms,
            "=",
            1,
        );
    }

    for x in &ds.contraction.supernodes {
        if x.len() < 2 {
            continue;
        }
        let terms: Vec<(i64, String)> = (0..inst.n_edges())
            .filter(|&e| x.contains(&inst.edge(e).tail) && x.contains(&inst.edge(e).head))
            .map(|e| (1, x_var(e)))
            .collect();
        let label = set_label(rooted, &x.iter().copied().collect::<Vec<_>>());
        push_row(&mut out, &format!("tight_{label}"), &terms, "=", x.len() as i64 - 1);
    }
    for e in 0..inst.n_edges() {
        if !dstar.contains(&e) {
            push_row(
                &mut out,
                &format!("zero_{}", inst.edge(e).id),
                &[(1, x_var(e))],
                "=",
                0,
            );
        }
    }
    for e in 0..inst.n_edges() {
        push_row(
            &mut out,
            &format!("bound_{}", inst.edge(e).id),
            &[(1, x_var(e))],
            ">=",
            0,
        );
    }
    Ok(out)
}

/// Emit the compact flow formulation over `D*`: per destination node, a unit
/// of root outflow with conservation elsewhere and flow capped by the edge
/// variables; plus the cardinality row and tight supernode equalities.
pub fn emit_extended_lp(rooted: &RootedInstance) -> Result<String, NotWeakRanking> {
    let inst = rooted.instance();
    if inst.instance_class() == PrefClass::Partial {
        return Err(NotWeakRanking(inst.instance_class()));
    }
    let n = rooted.n();
    let ds = build_dstar(rooted);
    let ordinary: Vec<usize> = rooted.ordinary_nodes().collect();
    let x_var = |e: usize| format!("x_{}", inst.edge(e).id);
    let f_var = |e: usize, v: usize| format!("f_{}_{}", inst.edge(e).id, inst.node_name(v));

    let mut out = String::new();
    let _ = writeln!(out, "\\ branching extended LP");
    let _ = writeln!(
        out,
        "\\ n={n} m={} supernodes={}",
        ds.edges.len(),
        ds.contraction.supernodes.len()
    );
    let _ = writeln!(out, "min: 0");

    for &v in &ordinary {
        for &e in &ds.edges {
            push_row(
                &mut out,
                &format!("cap_{}_{}", inst.edge(e).id, inst.node_name(v)),
                &[(1, f_var(e, v)), (-1, x_var(e))],
                "<=",
                0,
            );
        }
    }
    for &v in &ordinary {
        for &e in &ds.edges {
            push_row(
                &mut out,
                &format!("nn_{}_{}", inst.edge(e).id, inst.node_name(v)),
                &[(1, f_var(e, v))],
                ">=",
                0,
            );
        }
    }
    for &v in &ordinary {
        let terms: Vec<(i64, String)> = ds
            .edges
            .iter()
            .filter(|&&e| inst.edge(e).tail == rooted.root_ix())
            .map(|&e| (1, f_var(e, v)))
            .collect();
        push_row(
            &mut out,
            &format!("src_{}", inst.node_name(v)),
            &terms,
            "=",
            1,
        );
    }
    for &u in &ordinary {
        for &v in &ordinary {
            if u == v {
                continue;
            }
            let mut terms: Vec<(i64, String)> = ds
                .edges
                .iter()
                .filter(|&&e| inst.edge(e).tail == u)
                .map(|&e| (1, f_var(e, v)))
                .collect();
            terms.extend(
                ds.edges
                    .iter()
                    .filter(|&&e| inst.edge(e).head == u)
                    .map(|&e| (-1, f_var(e, v))),
            );
            push_row(
                &mut out,
                &format!("cons_{}_{}", inst.node_name(u), inst.node_name(v)),
                &terms,
                "=",
                0,
            );
        }
    }
    let terms: Vec<(i64, String)> = ds.edges.iter().map(|&e| (1, x_var(e))).collect();
    push_row(&mut out, "card", &terms, "=", n as i64);
    for x in &ds.contraction.supernodes {
        if x.len() < 2 {
            continue;
        }
        let terms: Vec<(i64, String)> = ds
            .edges
            .iter()
            .filter(|&&e| x.contains(&inst.edge(e).tail) && x.contains(&inst.edge(e).head))
            .map(|&e| (1, x_var(e)))
            .collect();
        let label = set_label(rooted, &x.iter().copied().collect::<Vec<_>>());
        push_row(&mut out, &format!("tight_{label}"), &terms, "=", x.len() as i64 - 1);
    }
    Ok(out)
}

/// Number of constraint rows in an emitted LP (excludes comments and the
/// objective line).
pub fn lp_row_count(text: &str) -> usize {
    text.lines()
        .filter(|l| !l.starts_with('\\') && !l.starts_with("min:") && !l.trim().is_empty())
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{complete_top_instance, random_instance, PrefModel};
    use crate::instance::{Instance, InstanceData};
    use crate::oracle::{BruteForcer, DEFAULT_ENUMERATION_BUDGET};
    use crate::popularity::is_popular;
    use crate::testutil::{four_cycle, star3, weak_tie};

    fn single_node() -> Instance {
        let data: InstanceData = serde_json::from_str(
            r#"{"nodes":["v"],"edges":[],"preferences":{}}"#,
        )
        .unwrap();
        Instance::from_data(&data).unwrap()
    }

    fn ids(rooted: &RootedInstance, ds: &DStarGraph) -> BTreeSet<String> {
        ds.edge_ids(rooted).into_iter().collect()
    }

    #[test]
    fn dstar_on_fixtures() {
        let inst = four_cycle();
        let rooted = inst.augment_root().unwrap();
        let ds = build_dstar(&rooted);
        let expect: BTreeSet<String> = ["ab", "ba", "cd", "dc", "ca", "db", "ac", "bd"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(ids(&rooted, &ds), expect);

        let inst = star3();
        let rooted = inst.augment_root().unwrap();
        let ds = build_dstar(&rooted);
        let expect: BTreeSet<String> = ["ab", "ac", "r->a"].iter().map(|s| s.to_string()).collect();
        assert_eq!(ids(&rooted, &ds), expect);

        let inst = single_node();
        let rooted = inst.augment_root().unwrap();
        let ds = build_dstar(&rooted);
        let expect: BTreeSet<String> = ["r->v"].iter().map(|s| s.to_string()).collect();
        assert_eq!(ids(&rooted, &ds), expect);
    }

    #[test]
    fn structural_test_agrees_with_popularity() {
        for (inst, label) in [
            (four_cycle(), "four_cycle"),
            (star3(), "star"),
            (weak_tie(), "weak_tie"),
        ] {
            let rooted = inst.augment_root().unwrap();
            let bf = BruteForcer::new(&inst, DEFAULT_ENUMERATION_BUDGET).unwrap();
            let mut structural_populars = 0usize;
            for i in 0..bf.count() {
                let arb = rooted.arborify(&bf.branching(i)).unwrap();
                let s = is_popular_structural(&rooted, &arb).unwrap();
                let (p, _) = is_popular(&rooted, &arb);
                assert_eq!(s, p, "{label}: disagreement on branching {i}");
                structural_populars += s as usize;
            }
            let expected = bf.popular_indices().len();
            assert_eq!(structural_populars, expected, "{label}");
        }
    }

    #[test]
    fn structural_test_gates_on_partial_orders() {
        let inst = random_instance(4, 8, PrefModel::Partial { density: 0.5 }, 7).unwrap();
        let rooted = inst.augment_root().unwrap();
        let b = Branching::from_edges(&inst, Vec::<&str>::new()).unwrap();
        let arb = rooted.arborify(&b).unwrap();
        assert!(is_popular_structural(&rooted, &arb).is_err());
        assert!(emit_face_lp(&rooted, DEFAULT_FACE_CUTOFF).is_err());
        assert!(emit_extended_lp(&rooted).is_err());
        assert!(min_cost_popular_branching(&rooted, &BTreeMap::new()).is_err());
    }

    #[test]
    fn min_cost_on_fixtures() {
        // star: the unique popular arborescence costs 3 under all-ones costs
        let inst = star3();
        let rooted = inst.augment_root().unwrap();
        let costs: BTreeMap<String, i64> = [("ab", 1), ("ac", 1), ("r->a", 1)]
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        let (arb, total) = min_cost_popular_branching(&rooted, &costs)
            .unwrap()
            .unwrap();
        assert_eq!(total, 3);
        assert_eq!(
            arb.edge_ids(),
            vec!["ab".to_string(), "ac".to_string(), "r->a".to_string()]
        );

        // no popular arborescence: None regardless of costs
        let inst = four_cycle();
        let rooted = inst.augment_root().unwrap();
        assert!(min_cost_popular_branching(&rooted, &BTreeMap::new())
            .unwrap()
            .is_none());
    }

    #[test]
    fn min_cost_matches_oracle_on_random_weak_instances() {
        let mut solved = 0;
        for seed in 0..25u64 {
            let n = 4 + (seed % 2) as usize;
            let m = (2 * n).min(n * (n - 1));
            let inst = random_instance(n, m, PrefModel::Weak { max_ties: 2 }, 300 + seed).unwrap();
            let rooted = inst.augment_root().unwrap();
            let dinst = rooted.instance();
            // pseudo-random signed costs derived from the seed, root edges too
            let costs: BTreeMap<String, i64> = (0..dinst.n_edges())
                .map(|e| {
                    let id = dinst.edge(e).id.clone();
                    let h = id.bytes().fold(seed, |a, b| {
                        a.wrapping_mul(31).wrapping_add(b as u64)
                    });
                    (id, (h % 7) as i64 - 3)
                })
                .collect();
            let got = min_cost_popular_branching(&rooted, &costs).unwrap();
            let bf = BruteForcer::new(&inst, DEFAULT_ENUMERATION_BUDGET).unwrap();
            let pops = bf.popular_indices();
            match got {
                None => assert!(pops.is_empty(), "seed {seed}"),
                Some((arb, total)) => {
                    assert!(is_popular_structural(&rooted, &arb).unwrap());
                    let best = pops
                        .iter()
                        .map(|&i| {
                            let arb = rooted.arborify(&bf.branching(i)).unwrap();
                            arb.edge_ids()
                                .iter()
                                .map(|id| costs.get(id).copied().unwrap_or(0))
                                .sum::<i64>()
                        })
                        .min()
                        .expect("nonempty");
                    assert_eq!(total, best, "seed {seed}");
                    solved += 1;
                }
            }
        }
        assert!(solved >= 5, "suite too degenerate: {solved} solvable");
    }

    #[test]
    fn face_lp_matches_golden_star() {
        let inst = star3();
        let rooted = inst.augment_root().unwrap();
        let text = emit_face_lp(&rooted, DEFAULT_FACE_CUTOFF).unwrap();
        assert_eq!(text, include_str!("../tests/golden/face_star.lp"));
        assert!(text.contains("subtour_b_c: 0 <= 1"));
        assert!(text.contains("tight_a_b_c: x_ab + x_ac = 2"));
        assert_eq!(lp_row_count(&text), 15);
    }

    #[test]
    fn extended_lp_matches_golden_star() {
        let inst = star3();
        let rooted = inst.augment_root().unwrap();
        let text = emit_extended_lp(&rooted).unwrap();
        assert_eq!(text, include_str!("../tests/golden/extended_star.lp"));
        assert_eq!(lp_row_count(&text), 29);
    }

    #[test]
    fn lp_sizes_on_edge_cases() {
        let inst = single_node();
        let rooted = inst.augment_root().unwrap();
        assert_eq!(
            lp_row_count(&emit_face_lp(&rooted, DEFAULT_FACE_CUTOFF).unwrap()),
            2
        );
        assert_eq!(lp_row_count(&emit_extended_lp(&rooted).unwrap()), 4);

        let big = random_instance(17, 40, PrefModel::Strict, 5).unwrap();
        let rooted = big.augment_root().unwrap();
        assert!(matches!(
            emit_face_lp(&rooted, DEFAULT_FACE_CUTOFF),
            Err(PolytopeError::TooLarge { n: 17, cutoff: 16 })
        ));
    }

    #[test]
    fn extended_row_count_formula_holds() {
        for (n, m, seed) in [(5, 10, 1u64), (10, 30, 2), (20, 60, 3)] {
            let inst = random_instance(n, m, PrefModel::Weak { max_ties: 2 }, seed).unwrap();
            let rooted = inst.augment_root().unwrap();
            let ds = build_dstar(&rooted);
            let md = ds.edges.len();
            let text = emit_extended_lp(&rooted).unwrap();
            let tights = ds
                .contraction
                .supernodes
                .iter()
                .filter(|x| x.len() >= 2)
                .count();
            assert_eq!(
                lp_row_count(&text),
                2 * md * n + n + n * (n - 1) + 1 + tights
            );
        }
    }

    /// On the everyone-is-top-choice instance each subtour row is irredundant:
    /// a directed cycle on X plus an arborescence on the rest satisfies every
    /// constraint except the subtour row of X itself.
    #[test]
    fn subtour_rows_are_facets_on_complete_top_instance() {
        let base = complete_top_instance(4).unwrap();
        let rooted = base.augment_root().unwrap();
        let inst = rooted.instance();
        let ds = build_dstar(&rooted);
        let dstar: BTreeSet<usize> = ds.edges.iter().copied().collect();
        assert_eq!(ds.contraction.supernodes.len(), 1, "X' = {{V}}");
        // D* = complete bidirected graph on V plus all root edges
        assert_eq!(dstar.len(), inst.n_edges());

        let nodes: Vec<usize> = rooted.ordinary_nodes().collect();
        let eix = |t: usize, h: usize| {
            let id = format!(
                "e_{}_{}",
                inst.node_name(t),
                inst.node_name(h)
            );
            inst.edge_index(&id).expect("complete graph edge")
        };
        let n = nodes.len();
        let mut tested = 0;
        for size in 2..n {
            for_each_subset(&nodes, size, &mut |x| {
                // integral point: directed cycle on x, path on the rest, root
                // edge into the path's head
                let mut chosen: BTreeSet<usize> = BTreeSet::new();
                for k in 0..x.len() {
                    chosen.insert(eix(x[k], x[(k + 1) % x.len()]));
                }
                let rest: Vec<usize> =
                    nodes.iter().copied().filter(|v| !x.contains(v)).collect();
                for w in rest.windows(2) {
                    chosen.insert(eix(w[0], w[1]));
                }
                let root_edge = rooted.root_edge_of(rest[0]).unwrap();
                chosen.insert(root_edge);

                // every constraint holds except the subtour row for x itself
                for v in &nodes {
                    let indeg = inst
                        .in_edges(*v)
                        .iter()
                        .filter(|e| chosen.contains(e))
                        .count();
                    assert_eq!(indeg, 1, "in-degree row violated");
                }
                assert!(chosen.iter().all(|e| dstar.contains(e)), "zero rows hold");
                let inside = |set: &BTreeSet<usize>| {
                    chosen
                        .iter()
                        .filter(|&&e| {
                            set.contains(&inst.edge(e).tail) && set.contains(&inst.edge(e).head)
                        })
                        .count()
                };
                let v_all: BTreeSet<usize> = nodes.iter().copied().collect();
                assert_eq!(inside(&v_all), n - 1, "tight supernode row holds");
                for size2 in 2..=n {
                    for_each_subset(&nodes, size2, &mut |y| {
                        let yset: BTreeSet<usize> = y.iter().copied().collect();
                        let count = inside(&yset);
                        if y == x {
                            assert_eq!(count, y.len(), "the designated row is violated");
                        } else {
                            assert!(count <= y.len() - 1, "row for {y:?} unexpectedly violated");
                        }
                    });
                }
                tested += 1;
            });
        }
        assert_eq!(tested, 10, "2^4 - 4 - 2 proper subsets");
    }
}
