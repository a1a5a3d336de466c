//! Popularity of branchings: head-to-head comparison, unpopularity margin,
//! the popularity test, and dual-certificate validation.
//!
//! Fix a spanning arborescence `A` of a rooted instance with `n` ordinary
//! nodes. Give every edge `e` into node `v` the *comparison cost*
//!
//! ```text
//! c_A(e) = 0  if v strictly prefers e to A(v)
//!          1  if e and A(v) tie or are incomparable (in particular e = A(v))
//!          2  if v strictly prefers A(v) to e
//! ```
//!
//! Then for any rival arborescence `A'` we have
//! `c_A(A') = n − (φ(A',A) − φ(A,A'))`, where `φ(X,Y)` counts nodes preferring
//! `X` over `Y`. Hence the unpopularity margin of `A` — the worst vote deficit
//! over all rivals — equals `n` minus the minimum comparison cost of an
//! arborescence, and `A` is popular iff it is itself minimum-cost under `c_A`.
//!
//! The engine's laminar dual certifies this combinatorially: a laminar family
//! `Y` of node sets such that every edge `e` enters at most `c_A(e)` members
//! proves margin(A) ≤ n − |Y|; a family of size `n` proves popularity.

use std::collections::BTreeSet;

use crate::arborescence::{min_cost_arborescence, RootedDigraph};
use crate::instance::{
    Arborescence, Branching, Comparison, Instance, NodeId, RootedInstance,
};

/// Outcome of a head-to-head vote between two branchings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComparisonResult {
    /// Nodes strictly preferring their first-branching edge.
    pub for_first: u64,
    /// Nodes strictly preferring their second-branching edge.
    pub for_second: u64,
}

impl ComparisonResult {
    /// Vote difference φ(first, second) − φ(second, first).
    pub fn delta(&self) -> i64 {
        self.for_first as i64 - self.for_second as i64
    }

    /// Is the first branching at least as popular as the second?
    pub fn first_holds(&self) -> bool {
        self.for_first >= self.for_second
    }
}

/// Node-by-node vote between two branchings of `inst`. A node with an edge in
/// one branching and none in the other strictly prefers having the edge;
/// otherwise its own preference order decides (ties and incomparabilities
/// contribute to neither side).
pub fn compare_branchings(inst: &Instance, first: &Branching, second: &Branching) -> ComparisonResult {
    let mut res = ComparisonResult {
        for_first: 0,
        for_second: 0,
    };
    for (v, name) in inst.nodes().iter().enumerate() {
        let e1 = first.parent_edge(name);
        let e2 = second.parent_edge(name);
        match (e1, e2) {
            (None, None) => {}
            (Some(_), None) => res.for_first += 1,
            (None, Some(_)) => res.for_second += 1,
            (Some(a), Some(b)) => {
                let ea = inst.edge_index(a).expect("branching edge exists");
                let eb = inst.edge_index(b).expect("branching edge exists");
                match inst.compare(v, ea, eb) {
                    Comparison::PrefersFirst => res.for_first += 1,
                    Comparison::PrefersSecond => res.for_second += 1,
                    Comparison::Neither => {}
                }
            }
        }
    }
    res
}

/// Comparison cost `c_A(e)` of one edge (by index into the rooted instance's
/// edge list) against arborescence `arb`.
pub fn comparison_cost(rooted: &RootedInstance, arb: &Arborescence, e: usize) -> u64 {
    let inst = rooted.instance();
    let head = inst.edge(e).head;
    debug_assert_ne!(head, rooted.root_ix(), "no edges enter the root");
    let a_id = arb
        .parent_edge(inst.node_name(head))
        .expect("spanning arborescence covers every ordinary node");
    let a = inst.edge_index(a_id).expect("arborescence edge exists");
    if a == e {
        return 1;
    }
    match inst.compare(head, e, a) {
        Comparison::PrefersFirst => 0,
        Comparison::Neither => 1,
        Comparison::PrefersSecond => 2,
    }
}

/// All comparison costs, indexed like the rooted instance's edge list.
pub(crate) fn cost_vector(rooted: &RootedInstance, arb: &Arborescence) -> Vec<u64> {
    (0..rooted.instance().n_edges())
        .map(|e| comparison_cost(rooted, arb, e))
        .collect()
}

/// View the rooted instance as a bare digraph for the arborescence engine.
/// Edge indices coincide with the instance's (id-sorted) edge indices.
pub(crate) fn to_digraph(rooted: &RootedInstance) -> RootedDigraph {
    RootedDigraph {
        n_nodes: rooted.instance().n_nodes(),
        root: rooted.root_ix(),
        edges: rooted
            .instance()
            .edges()
            .iter()
            .map(|e| (e.tail, e.head))
            .collect(),
    }
}

fn ids_to_arborescence(rooted: &RootedInstance, edges: &[usize]) -> Arborescence {
    let inst = rooted.instance();
    let ids: Vec<&str> = edges.iter().map(|&e| inst.edge(e).id.as_str()).collect();
    let b = Branching::from_edges(inst, ids).expect("engine output is a branching");
    Arborescence::new(rooted, b).expect("engine output spans")
}

/// The unpopularity margin of `arb` — the largest vote deficit any rival
/// arborescence can inflict — together with a rival achieving it.
pub fn unpopularity_margin(rooted: &RootedInstance, arb: &Arborescence) -> (u64, Arborescence) {
    let costs = cost_vector(rooted, arb);
    let g = to_digraph(rooted);
    let sol = min_cost_arborescence(&g, &costs)
        .expect("the given arborescence witnesses that one exists");
    let n = rooted.n() as u64;
    debug_assert!(sol.total_cost <= n, "no rival beats A by more than n");
    (n - sol.total_cost, ids_to_arborescence(rooted, &sol.arb_edges))
}

/// A popularity certificate: a laminar family of ordinary-node sets, each
/// carrying implicit value 1, such that every edge `e` enters at most `c_A(e)`
/// members. A family of size `n` proves `A` popular; size `n − k` proves
/// margin at most `k`.
pub type DualCertificate = BTreeSet<BTreeSet<NodeId>>;

/// Decide popularity; on success also return a size-`n` dual certificate.
pub fn is_popular(
    rooted: &RootedInstance,
    arb: &Arborescence,
) -> (bool, Option<DualCertificate>) {
    let costs = cost_vector(rooted, arb);
    let g = to_digraph(rooted);
    let sol = min_cost_arborescence(&g, &costs)
        .expect("the given arborescence witnesses that one exists");
    let n = rooted.n() as u64;
    if sol.total_cost < n {
        return (false, None);
    }
    assert_eq!(sol.total_cost, n, "comparison cost of A itself is exactly n");
    // Complementary slackness forces every dual value to 1 here: each of A's own
    // edges has cost 1 and every dual set is entered by at least one of them.
    let inst = rooted.instance();
    let mut cert = BTreeSet::new();
    for (set, y) in &sol.dual {
        assert_eq!(*y, 1, "popular arborescence duals are 0/1");
        cert.insert(
            set.iter()
                .map(|&v| inst.node_name(v).clone())
                .collect::<BTreeSet<NodeId>>(),
        );
    }
    assert_eq!(cert.len() as u64, n, "certificate has one set per node");
    (true, Some(cert))
}

/// Result of checking a claimed dual certificate.
#[derive(Debug, Clone)]
pub struct CertificateCheck {
    pub ok: bool,
    /// The margin bound `n − |Y|` the certificate proves when `ok`.
    pub bound: u64,
    /// Human-readable reasons when not `ok`.
    pub failures: Vec<String>,
}

/// Check that `cert` is a valid dual certificate for `arb`: nonempty sets of
/// ordinary nodes, laminar, and no edge enters more members than its
/// comparison cost allows. A valid certificate proves
/// `margin(arb) ≤ n − |cert|`.
pub fn validate_certificate(
    rooted: &RootedInstance,
    arb: &Arborescence,
    cert: &DualCertificate,
) -> CertificateCheck {
    let inst = rooted.instance();
    let root_name = rooted.root_id();
    let mut failures = Vec::new();

    let sets: Vec<&BTreeSet<NodeId>> = cert.iter().collect();
    for set in &sets {
        if set.is_empty() {
            failures.push("certificate contains an empty set".to_string());
        }
        for v in set.iter() {
            if v == root_name {
                failures.push(format!("certificate set contains the root '{v}'"));
            } else if inst.node_index(v).is_none() {
                failures.push(format!("certificate set contains unknown node '{v}'"));
            }
        }
    }
    for i in 0..sets.len() {
        for j in (i + 1)..sets.len() {
            let inter = sets[i].intersection(sets[j]).count();
            if inter != 0 && inter != sets[i].len() && inter != sets[j].len() {
                failures.push(format!(
                    "sets {:?} and {:?} cross (neither nested nor disjoint)",
                    sets[i], sets[j]
                ));
            }
        }
    }
    if failures.is_empty() {
        for e in 0..inst.n_edges() {
            let edge = inst.edge(e);
            let tail = inst.node_name(edge.tail);
            let head = inst.node_name(edge.head);
            if edge.head == rooted.root_ix() {
                continue; // rooted instances have no edges into the root
            }
            let entered = sets
                .iter()
                .filter(|s| s.contains(head) && !s.contains(tail))
                .count() as u64;
            let cap = comparison_cost(rooted, arb, e);
            if entered > cap {
                failures.push(format!(
                    "edge '{}' enters {} sets but its comparison cost is {}",
                    edge.id, entered, cap
                ));
            }
        }
    }

    let n = rooted.n() as u64;
    CertificateCheck {
        ok: failures.is_empty(),
        bound: n.saturating_sub(cert.len() as u64),
        failures,
    }
}
