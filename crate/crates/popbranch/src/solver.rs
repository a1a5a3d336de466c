//! Deciding whether a popular arborescence exists — constructing one together
//! with a size-`n` dual certificate when it does — and building a
//! minimum-unpopularity-margin arborescence under weak rankings.
//!
//! Both solvers run on the same *contraction graph* `D'`:
//!
//! 1. An edge `(u,v)` inside a node set `X` is *safe* if no edge inside `X`
//!    with head `v` strictly dominates it **and** it strictly dominates every
//!    edge entering `v` from outside `X`. Safe edges are the only ones a
//!    popular arborescence may use inside a tight set, and safety is monotone
//!    under growing `X`.
//! 2. For every node `v`, shrink `X_v` from the full ordinary node set to a
//!    fixed point of "nodes reachable from `v` along safe edges of `X_v`".
//! 3. The inclusion-maximal sets among the `X_v` partition the nodes; they are
//!    the supernodes. `v` is an *entry point* of its supernode `X` when
//!    `X_v = X`. Edges from outside into an entry point that are undominated
//!    among all external edges with the same head become the edges of `D'`
//!    (keeping their preimages; parallel edges stay).
//! 4. A popular arborescence exists iff `D'` has a spanning root-arborescence:
//!    take its preimages, then span each supernode from its used entry point
//!    with safe edges. The supernode sets of the used multi-node entry points,
//!    plus singletons for every other node, form the laminar certificate.
//! 5. The minimum-margin variant covers `D'` with a maximum-cardinality
//!    branching instead: every uncovered supernode costs exactly one margin
//!    unit and gets attached to the root directly.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::arborescence::{max_cardinality_branching, min_cost_arborescence, RootedDigraph};
use crate::instance::{
    Arborescence, Branching, EdgeId, NodeId, PrefClass, RootedInstance,
};
use crate::popularity::DualCertificate;

/// Safe edges of the node set `x` (ordinary node indices): edges inside `x`
/// that are undominated among inside edges with the same head and strictly
/// dominate every edge entering that head from outside `x` (root edges
/// included). Returned as sorted edge indices.
pub fn safe_edges(rooted: &RootedInstance, x: &BTreeSet<usize>) -> Vec<usize> {
    let inst = rooted.instance();
    let mut out = Vec::new();
    for &v in x {
        let (inside, outside): (Vec<usize>, Vec<usize>) = inst
            .in_edges(v)
            .iter()
            .partition(|&&e| x.contains(&inst.edge(e).tail));
        'cand: for &e in &inside {
            for &f in &inside {
                if inst.prefers(v, f, e) {
                    continue 'cand;
                }
            }
            for &g in &outside {
                if !inst.prefers(v, e, g) {
                    continue 'cand;
                }
            }
            out.push(e);
        }
    }
    out.sort_unstable();
    out
}

/// The fixed-point set `X_v`: start from all ordinary nodes and repeatedly
/// restrict to the nodes reachable from `v` along the current set's safe edges.
pub fn node_set(rooted: &RootedInstance, v: usize) -> BTreeSet<usize> {
    let inst = rooted.instance();
    let mut x: BTreeSet<usize> = rooted.ordinary_nodes().collect();
    debug_assert!(x.contains(&v));
    loop {
        let safe = safe_edges(rooted, &x);
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &e in &safe {
            adj.entry(inst.edge(e).tail).or_default().push(inst.edge(e).head);
        }
        let mut reach = BTreeSet::new();
        reach.insert(v);
        let mut queue = VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            if let Some(nexts) = adj.get(&u) {
                for &w in nexts {
                    if reach.insert(w) {
                        queue.push_back(w);
                    }
                }
            }
        }
        if reach == x {
            return x;
        }
        x = reach;
    }
}

/// One edge of the contraction graph `D'`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DPrimeEdge {
    /// Index of the original edge (in the rooted instance) this edge stands for.
    pub preimage: usize,
    /// Source supernode, `None` for the root.
    pub from: Option<usize>,
    /// Target supernode.
    pub to: usize,
}

/// The contraction graph: supernodes (the maximal fixed-point sets), their
/// entry points, all per-node fixed-point sets, and the `D'` edges.
#[derive(Debug, Clone)]
pub struct ContractionGraph {
    /// Maximal sets, sorted by smallest member; they partition the ordinary nodes.
    pub supernodes: Vec<BTreeSet<usize>>,
    /// Supernode position of each ordinary node.
    pub node_super: BTreeMap<usize, usize>,
    /// Entry points per supernode: members `v` with `X_v` equal to the supernode.
    pub entry_points: Vec<BTreeSet<usize>>,
    /// `X_v` for every ordinary node.
    pub x_sets: BTreeMap<usize, BTreeSet<usize>>,
    /// `D'` edges, ascending by preimage edge index.
    pub edges: Vec<DPrimeEdge>,
}

/// Build the contraction graph of a rooted instance.
pub fn build_contraction(rooted: &RootedInstance) -> ContractionGraph {
    let inst = rooted.instance();

    let x_sets: BTreeMap<usize, BTreeSet<usize>> = rooted
        .ordinary_nodes()
        .map(|v| (v, node_set(rooted, v)))
        .collect();

    // Inclusion-maximal distinct sets, sorted by smallest member.
    let mut distinct: Vec<&BTreeSet<usize>> = x_sets.values().collect();
    distinct.sort();
    distinct.dedup();
    let mut supernodes: Vec<BTreeSet<usize>> = distinct
        .iter()
        .filter(|x| {
            !distinct
                .iter()
                .any(|y| y.len() > x.len() && x.is_subset(y))
        })
        .map(|x| (*x).clone())
        .collect();
    supernodes.sort_by_key(|x| *x.first().expect("fixed-point sets are nonempty"));

    let mut node_super = BTreeMap::new();
    for (i, x) in supernodes.iter().enumerate() {
        for &v in x {
            let prev = node_super.insert(v, i);
            assert!(
                prev.is_none(),
                "maximal fixed-point sets must partition the nodes"
            );
        }
    }
    for v in rooted.ordinary_nodes() {
        assert!(
            node_super.contains_key(&v),
            "maximal fixed-point sets must cover every node"
        );
    }

    let entry_points: Vec<BTreeSet<usize>> = supernodes
        .iter()
        .enumerate()
        .map(|(i, x)| {
            x.iter()
                .copied()
                .filter(|v| &x_sets[v] == &supernodes[i])
                .collect()
        })
        .collect();

    let mut edges = Vec::new();
    for e in 0..inst.n_edges() {
        let (u, v) = (inst.edge(e).tail, inst.edge(e).head);
        if v == rooted.root_ix() {
            continue;
        }
        let i = node_super[&v];
        if !entry_points[i].contains(&v) {
            continue;
        }
        let x = &supernodes[i];
        let u_inside = u != rooted.root_ix() && x.contains(&u);
        if u_inside {
            continue;
        }
        // Undominated among external edges with the same head.
        let dominated = inst.in_edges(v).iter().any(|&f| {
            let t = inst.edge(f).tail;
            let external = t == rooted.root_ix() || !x.contains(&t);
            external && inst.prefers(v, f, e)
        });
        if dominated {
            continue;
        }
        edges.push(DPrimeEdge {
            preimage: e,
            from: if u == rooted.root_ix() {
                None
            } else {
                Some(node_super[&u])
            },
            to: i,
        });
    }

    ContractionGraph {
        supernodes,
        node_super,
        entry_points,
        x_sets,
        edges,
    }
}

/// Spanning arborescence of a supernode from a given entry point, using only
/// the set's safe edges: breadth-first, visiting out-edges in id order.
/// Returns the chosen edge indices.
fn inner_arborescence(rooted: &RootedInstance, x: &BTreeSet<usize>, entry: usize) -> Vec<usize> {
    let inst = rooted.instance();
    let safe = safe_edges(rooted, x);
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &e in &safe {
        adj.entry(inst.edge(e).tail).or_default().push(e);
    }
    let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
    let mut queue = VecDeque::from([entry]);
    let mut seen: BTreeSet<usize> = BTreeSet::from([entry]);
    while let Some(u) = queue.pop_front() {
        if let Some(es) = adj.get(&u) {
            for &e in es {
                let w = inst.edge(e).head;
                if seen.insert(w) {
                    parent.insert(w, e);
                    queue.push_back(w);
                }
            }
        }
    }
    assert_eq!(
        seen.len(),
        x.len(),
        "entry point reaches its whole fixed-point set along safe edges"
    );
    parent.into_values().collect()
}

fn certificate_from_entries(
    rooted: &RootedInstance,
    cg: &ContractionGraph,
    used_entries: &BTreeMap<usize, usize>, // supernode -> entry node
    attached_direct: &BTreeSet<usize>,     // nodes attached straight to the root
) -> DualCertificate {
    let inst = rooted.instance();
    let name_set = |s: &BTreeSet<usize>| -> BTreeSet<NodeId> {
        s.iter().map(|&v| inst.node_name(v).clone()).collect()
    };
    let mut cert = DualCertificate::new();
    let mut covered_by_set: BTreeSet<usize> = BTreeSet::new();
    for (&snode, &entry) in used_entries {
        let x = &cg.supernodes[snode];
        if x.len() >= 2 {
            cert.insert(name_set(x));
            covered_by_set.insert(entry);
        }
    }
    for v in rooted.ordinary_nodes() {
        if !covered_by_set.contains(&v) && !attached_direct.contains(&v) {
            cert.insert(name_set(&BTreeSet::from([v])));
        }
    }
    cert
}

/// Decide whether a popular arborescence exists; construct one with a size-`n`
/// dual certificate if so. Works for arbitrary partial-order preferences.
pub fn popular_arborescence(
    rooted: &RootedInstance,
) -> Option<(Arborescence, DualCertificate)> {
    let cg = build_contraction(rooted);
    let s = cg.supernodes.len();
    let g = RootedDigraph {
        n_nodes: s + 1,
        root: s,
        edges: cg
            .edges
            .iter()
            .map(|e| (e.from.unwrap_or(s), e.to))
            .collect(),
    };
    let costs = vec![0u64; g.edges.len()];
    let sol = match min_cost_arborescence(&g, &costs) {
        Ok(sol) => sol,
        Err(_) => return None,
    };

    let inst = rooted.instance();
    let mut ids: Vec<EdgeId> = Vec::new();
    let mut used_entries: BTreeMap<usize, usize> = BTreeMap::new();
    for &de in &sol.arb_edges {
        let pre = cg.edges[de].preimage;
        ids.push(inst.edge(pre).id.clone());
        let entry = inst.edge(pre).head;
        used_entries.insert(cg.edges[de].to, entry);
    }
    for (&snode, &entry) in &used_entries {
        for e in inner_arborescence(rooted, &cg.supernodes[snode], entry) {
            ids.push(inst.edge(e).id.clone());
        }
    }
    let branching = Branching::from_edges(inst, ids.iter())
        .expect("contracted solution expands to a branching");
    let arb = Arborescence::new(rooted, branching)
        .expect("contracted solution expands to a spanning arborescence");
    let cert = certificate_from_entries(rooted, &cg, &used_entries, &BTreeSet::new());
    debug_assert_eq!(cert.len(), rooted.n());
    Some((arb, cert))
}

#[derive(Debug, Clone, Error)]
#[error("operation requires weak rankings; instance classifies as {0}")]
pub struct NotWeakRanking(pub PrefClass);

#[derive(Debug, Clone, Error)]
pub enum MinMarginError {
    #[error(transparent)]
    NotWeak(#[from] NotWeakRanking),
    #[error("node '{0}' has no root edge to attach to")]
    MissingRootEdge(NodeId),
}

/// A minimum-unpopularity-margin arborescence with its certificate.
#[derive(Debug, Clone)]
pub struct MinMarginResult {
    pub arb: Arborescence,
    /// The achieved (optimal) unpopularity margin.
    pub margin: u64,
    /// Laminar dual family of size `n − margin` proving the margin bound.
    pub certificate: DualCertificate,
}

/// Construct an arborescence of minimum unpopularity margin (weak rankings
/// only): cover `D'` by a maximum-cardinality branching, attach every
/// uncovered supernode to the root at its smallest entry point, and span
/// supernodes with safe edges. The margin equals the number of uncovered
/// supernodes.
pub fn min_margin_arborescence(
    rooted: &RootedInstance,
) -> Result<MinMarginResult, MinMarginError> {
    let inst = rooted.instance();
    if inst.instance_class() == PrefClass::Partial {
        return Err(NotWeakRanking(inst.instance_class()).into());
    }

    let cg = build_contraction(rooted);
    let s = cg.supernodes.len();
    let dedges: Vec<(usize, usize)> = cg
        .edges
        .iter()
        .map(|e| (e.from.unwrap_or(s), e.to))
        .collect();
    let chosen = max_cardinality_branching(s + 1, &dedges);

    let mut ids: Vec<EdgeId> = Vec::new();
    let mut used_entries: BTreeMap<usize, usize> = BTreeMap::new();
    for &de in &chosen {
        let pre = cg.edges[de].preimage;
        ids.push(inst.edge(pre).id.clone());
        used_entries.insert(cg.edges[de].to, inst.edge(pre).head);
    }

    // Attach every uncovered supernode to the root at its smallest entry point.
    let mut attached: BTreeSet<usize> = BTreeSet::new();
    for i in 0..s {
        if used_entries.contains_key(&i) {
            continue;
        }
        let v = *cg.entry_points[i]
            .first()
            .expect("every supernode has an entry point");
        let e = rooted
            .root_edge_of(v)
            .ok_or_else(|| MinMarginError::MissingRootEdge(inst.node_name(v).clone()))?;
        ids.push(inst.edge(e).id.clone());
        used_entries.insert(i, v);
        attached.insert(v);
    }
    let margin = attached.len() as u64;

    for (&snode, &entry) in &used_entries {
        for e in inner_arborescence(rooted, &cg.supernodes[snode], entry) {
            ids.push(inst.edge(e).id.clone());
        }
    }
    let branching = Branching::from_edges(inst, ids.iter())
        .expect("covered solution expands to a branching");
    let arb = Arborescence::new(rooted, branching)
        .expect("covered solution expands to a spanning arborescence");

    // Certificate: supernode sets for branching-covered entries, singletons for
    // everyone not serving as an entry point of the cover.
    let name_set = |s: &BTreeSet<usize>| -> BTreeSet<NodeId> {
        s.iter().map(|&v| inst.node_name(v).clone()).collect()
    };
    let mut cert = DualCertificate::new();
    let mut excluded: BTreeSet<usize> = BTreeSet::new();
    for (&snode, &entry) in &used_entries {
        if attached.contains(&entry) {
            excluded.insert(entry); // uncovered supernode: entry gets no set
        } else {
            cert.insert(name_set(&cg.supernodes[snode]));
            excluded.insert(entry);
        }
    }
    for v in rooted.ordinary_nodes() {
        if !excluded.contains(&v) {
            cert.insert(name_set(&BTreeSet::from([v])));
        }
    }
    debug_assert_eq!(cert.len() as u64, rooted.n() as u64 - margin);

    Ok(MinMarginResult {
        arb,
        margin,
        certificate: cert,
    })
}
