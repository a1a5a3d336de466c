//! Unpopularity factor: multiplicative analogue of the margin.
//!
//! The unpopularity factor of a branching `B` is the supremum over rivals `B'`
//! of `φ(B',B) / φ(B,B')` — how lopsided a vote any rival can force. It is
//! `0` exactly when no rival ever receives a single vote against `B`
//! ([`Factor::Vacuous`]), `∞` when some rival receives votes while `B` receives
//! none ([`Factor::Infinite`]), and a rational `p/q` otherwise.
//!
//! Measuring is reduced to minimum-cost arborescences: for `t = p/q` give each
//! edge cost `0 / q / p+q` according to whether its head finds it better than,
//! tied with, or worse than its current edge. Then
//! `cost(A') = q·n − q·φ(A',A) + p·φ(A,A')`, so the factor is at most `t` iff
//! no arborescence costs less than `q·n`. Since every finite factor is a ratio
//! of two vote counts `≤ n`, the exact optimum is found by searching the grid
//! `{p/q : 1 ≤ p,q ≤ n}`.
//!
//! For strict rankings, [`low_factor_arborescence`] constructs an arborescence
//! with factor at most `⌊log₂ n⌋` in the worst case: every node repeatedly
//! reaches one step further out of its current horizon along most-preferred
//! edges; nodes swallowed by a bigger horizon retire and donate their previous
//! horizon to a layered dual family that certifies the bound.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_rational::Ratio;
use thiserror::Error;

use crate::arborescence::min_cost_arborescence;
use crate::instance::{
    Arborescence, Branching, NodeId, PrefClass, RootedInstance,
};
use crate::popularity::{comparison_cost, to_digraph};

/// An unpopularity factor value. Ordered: `Vacuous` (= 0) < any finite ratio
/// < `Infinite`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    /// No rival receives any vote against the branching; the factor is 0.
    Vacuous,
    Finite(Ratio<u64>),
    Infinite,
}

impl Factor {
    /// JSON value following the output schema: `"0"`, `"p/q"`, or `"inf"`.
    pub fn as_json_str(&self) -> String {
        match self {
            Factor::Vacuous => "0".to_string(),
            Factor::Finite(r) => format!("{}/{}", r.numer(), r.denom()),
            Factor::Infinite => "inf".to_string(),
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_json_str())
    }
}

impl PartialOrd for Factor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Factor {
    fn cmp(&self, other: &Self) -> Ordering {
        use Factor::*;
        match (self, other) {
            (Vacuous, Vacuous) | (Infinite, Infinite) => Ordering::Equal,
            (Vacuous, _) => Ordering::Less,
            (_, Vacuous) => Ordering::Greater,
            (Infinite, _) => Ordering::Greater,
            (_, Infinite) => Ordering::Less,
            (Finite(a), Finite(b)) => a.cmp(b),
        }
    }
}

#[derive(Debug, Clone, Error)]
#[error("operation requires strict rankings; instance classifies as {0}")]
pub struct NotStrictRanking(pub PrefClass);

#[derive(Debug, Clone, Error)]
pub enum FactorError {
    #[error(transparent)]
    NotStrict(#[from] NotStrictRanking),
    #[error("node '{0}' has no root edge to attach to")]
    MissingRootEdge(NodeId),
    #[error("horizon growth failed to converge (internal invariant violated)")]
    DidNotConverge,
}

/// Is the unpopularity factor of `arb` at most `t`? On "no", also return a
/// rival arborescence violating the bound.
pub fn check_unpop_factor(
    rooted: &RootedInstance,
    arb: &Arborescence,
    t: Ratio<u64>,
) -> (bool, Option<Arborescence>) {
    let (p, q) = (*t.numer() as u128, *t.denom() as u128);
    let costs: Vec<u128> = (0..rooted.instance().n_edges())
        .map(|e| match comparison_cost(rooted, arb, e) {
            0 => 0,
            1 => q,
            _ => p + q,
        })
        .collect();
    let g = to_digraph(rooted);
    let sol = min_cost_arborescence(&g, &costs)
        .expect("the given arborescence witnesses that one exists");
    let target = q * rooted.n() as u128;
    if sol.total_cost >= target {
        debug_assert_eq!(sol.total_cost, target, "A itself costs exactly q·n");
        (true, None)
    } else {
        let inst = rooted.instance();
        let ids: Vec<&str> = sol
            .arb_edges
            .iter()
            .map(|&e| inst.edge(e).id.as_str())
            .collect();
        let b = Branching::from_edges(inst, ids).expect("engine output is a branching");
        let rival = Arborescence::new(rooted, b).expect("engine output spans");
        (false, Some(rival))
    }
}

/// Exact unpopularity factor of `arb`, with a rival achieving it (`None` when
/// vacuous).
#[derive(Debug, Clone)]
pub struct FactorReport {
    pub factor: Factor,
    pub witness: Option<Arborescence>,
}

/// Measure the exact unpopularity factor of an arborescence (any preference
/// class).
pub fn unpopularity_factor(rooted: &RootedInstance, arb: &Arborescence) -> FactorReport {
    let n = rooted.n() as u64;
    if n == 0 {
        return FactorReport {
            factor: Factor::Vacuous,
            witness: None,
        };
    }

    // Vacuous? (factor ≤ 0)
    let (vacuous, _) = check_unpop_factor(rooted, arb, Ratio::new(0, 1));
    if vacuous {
        return FactorReport {
            factor: Factor::Vacuous,
            witness: None,
        };
    }

    // Infinite? Some rival takes votes while giving none: minimize with costs
    // {0, 1, n+1}; any rival that concedes even one vote costs more than n.
    let costs: Vec<u128> = (0..rooted.instance().n_edges())
        .map(|e| match comparison_cost(rooted, arb, e) {
            0 => 0u128,
            1 => 1,
            _ => n as u128 + 1,
        })
        .collect();
    let g = to_digraph(rooted);
    let sol = min_cost_arborescence(&g, &costs)
        .expect("the given arborescence witnesses that one exists");
    if sol.total_cost < n as u128 {
        let inst = rooted.instance();
        let ids: Vec<&str> = sol
            .arb_edges
            .iter()
            .map(|&e| inst.edge(e).id.as_str())
            .collect();
        let b = Branching::from_edges(inst, ids).expect("engine output is a branching");
        let witness = Arborescence::new(rooted, b).expect("engine output spans");
        return FactorReport {
            factor: Factor::Infinite,
            witness: Some(witness),
        };
    }

    // Finite: the factor is a ratio of two vote counts in 1..=n. Binary-search
    // the sorted candidate grid for the smallest t with factor ≤ t.
    let grid: Vec<Ratio<u64>> = {
        let mut s = BTreeSet::new();
        for p in 1..=n {
            for q in 1..=n {
                s.insert(Ratio::new(p, q));
            }
        }
        s.into_iter().collect()
    };
    let mut lo = 0usize; // invariant: everything below lo is "no"
    let mut hi = grid.len() - 1; // grid[n·n → n/1] is always "yes" for finite factors
    debug_assert!(check_unpop_factor(rooted, arb, grid[hi]).0);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if check_unpop_factor(rooted, arb, grid[mid]).0 {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let u = grid[lo];
    // Witness: re-check just below u. The gap to the previous candidate is more
    // than 1/(2·denom·n), so t' = u − 1/(2·denom·n) separates u from the rest
    // of the grid; the violating rival at t' must achieve exactly u.
    let (p, q) = (*u.numer(), *u.denom());
    let t_prime = Ratio::new(2 * p * n - 1, 2 * q * n);
    let (ok, witness) = check_unpop_factor(rooted, arb, t_prime);
    debug_assert!(!ok, "u is the factor, so a bound strictly below u must fail");
    FactorReport {
        factor: Factor::Finite(u),
        witness,
    }
}

/// A layered dual family: `(set, value, layer)` entries over ordinary nodes.
/// Values sum to `n`; the layer records the retirement round that donated the
/// set. Feasibility for a factor bound `t = p/q` means every edge `e` satisfies
/// `q · (total value of sets e enters) ≤ cost_t(e)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayeredFamily {
    pub entries: Vec<(BTreeSet<NodeId>, u64, u64)>,
}

impl LayeredFamily {
    pub fn total_value(&self) -> u64 {
        self.entries.iter().map(|(_, v, _)| v).sum()
    }
}

/// Check a layered family against a factor bound `t` for `arb`: sets must be
/// nonempty sets of ordinary nodes, the values must sum to `n`, and no edge
/// may be overloaded under the factor-`t` cost function. (Laminarity is *not*
/// required — layered families are duals, not contraction families.)
pub fn validate_factor_family(
    rooted: &RootedInstance,
    arb: &Arborescence,
    family: &LayeredFamily,
    t: Ratio<u64>,
) -> crate::popularity::CertificateCheck {
    let inst = rooted.instance();
    let root_name = rooted.root_id();
    let n = rooted.n() as u64;
    let mut failures = Vec::new();

    for (set, value, _) in &family.entries {
        if set.is_empty() {
            failures.push("family contains an empty set".into());
        }
        if *value == 0 {
            failures.push("family contains a zero-value entry".into());
        }
        for v in set {
            if v == root_name {
                failures.push(format!("family set contains the root '{v}'"));
            } else if inst.node_index(v).is_none() {
                failures.push(format!("family set contains unknown node '{v}'"));
            }
        }
    }
    if family.total_value() != n {
        failures.push(format!(
            "family values sum to {}, expected n = {n}",
            family.total_value()
        ));
    }
    if failures.is_empty() {
        let (p, q) = (*t.numer() as u128, *t.denom() as u128);
        for e in 0..inst.n_edges() {
            let edge = inst.edge(e);
            if edge.head == rooted.root_ix() {
                continue;
            }
            let head = inst.node_name(edge.head);
            let tail = inst.node_name(edge.tail);
            let load: u128 = family
                .entries
                .iter()
                .filter(|(s, _, _)| s.contains(head) && !s.contains(tail))
                .map(|(_, v, _)| *v as u128)
                .sum();
            let cap = match comparison_cost(rooted, arb, e) {
                0 => 0,
                1 => q,
                _ => p + q,
            };
            if q * load > cap {
                failures.push(format!(
                    "edge '{}' carries scaled load {} over capacity {}",
                    edge.id,
                    q * load,
                    cap
                ));
            }
        }
    }

    crate::popularity::CertificateCheck {
        ok: failures.is_empty(),
        bound: 0,
        failures,
    }
}

/// A low-unpopularity-factor arborescence with its certificate.
#[derive(Debug, Clone)]
pub struct LowFactorResult {
    pub arb: Arborescence,
    /// Certified factor bound (`iterations − 1`); at most `⌊log₂ n⌋` for
    /// dummy-root augmented instances.
    pub bound: u64,
    pub family: LayeredFamily,
    pub iterations: u64,
}

/// Construct an arborescence whose unpopularity factor is at most
/// `iterations − 1 ≤ ⌊log₂ n⌋`, together with a layered family certifying the
/// bound. Strict rankings only; every node needs a root edge.
pub fn low_factor_arborescence(
    rooted: &RootedInstance,
) -> Result<LowFactorResult, FactorError> {
    let inst = rooted.instance();
    if inst.instance_class() != PrefClass::Strict {
        return Err(NotStrictRanking(inst.instance_class()).into());
    }
    for v in rooted.ordinary_nodes() {
        if rooted.root_edge_of(v).is_none() {
            return Err(FactorError::MissingRootEdge(inst.node_name(v).clone()));
        }
    }
    let n = rooted.n();
    let root = rooted.root_ix();

    let mut active: BTreeSet<usize> = rooted.ordinary_nodes().collect();
    let mut horizon: BTreeMap<usize, BTreeSet<usize>> = rooted
        .ordinary_nodes()
        .map(|v| (v, BTreeSet::from([v])))
        .collect();
    let mut eprime: BTreeSet<usize> = BTreeSet::new();
    let mut entries: Vec<(BTreeSet<usize>, u64, u64)> = Vec::new();
    let mut iterations = 0u64;

    while !active.is_empty() {
        iterations += 1;
        if iterations > (n * n + n + 2) as u64 {
            return Err(FactorError::DidNotConverge);
        }

        // Every active node reaches for its most preferred edge from beyond its
        // current horizon (unique by strictness; the root edge is always a
        // candidate, so one exists).
        for &v in &active {
            let e = inst
                .in_edges(v)
                .iter()
                .copied()
                .filter(|&e| {
                    let t = inst.edge(e).tail;
                    t == root || !horizon[&v].contains(&t)
                })
                .min_by_key(|&e| inst.rank_of(e).expect("strict instance has ranks"))
                .expect("the root edge is always beyond the horizon");
            eprime.insert(e);
        }

        // Recompute horizons: forward reach along chosen edges.
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &e in &eprime {
            adj.entry(inst.edge(e).tail)
                .or_default()
                .push(inst.edge(e).head);
        }
        let reach = |start: usize| -> BTreeSet<usize> {
            let mut seen = BTreeSet::from([start]);
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                if let Some(ws) = adj.get(&u) {
                    for &w in ws {
                        if seen.insert(w) {
                            queue.push_back(w);
                        }
                    }
                }
            }
            seen
        };
        let grown: BTreeMap<usize, BTreeSet<usize>> =
            active.iter().map(|&v| (v, reach(v))).collect();
        let from_root = reach(root);

        // Maximal horizons (they partition the active nodes); in each, the
        // smallest *entry point* — an active node whose own horizon is the
        // whole set — carries on, every other active member retires and
        // donates its previous horizon at this layer. The survivor retires
        // too once the root reaches it.
        let mut maximal: Vec<&BTreeSet<usize>> = grown
            .values()
            .filter(|x| !grown.values().any(|y| y.len() > x.len() && x.is_subset(y)))
            .collect();
        maximal.sort();
        maximal.dedup();
        let mut progressed = false;
        for x in maximal {
            let members: Vec<usize> = active
                .iter()
                .copied()
                .filter(|v| x.contains(v))
                .collect();
            let Some(&survivor) = members
                .iter()
                .find(|v| &grown[v] == x)
                .or_else(|| members.first())
            else {
                continue;
            };
            for &u in &members {
                if u != survivor {
                    entries.push((horizon[&u].clone(), 1, iterations));
                    active.remove(&u);
                    progressed = true;
                }
            }
            if from_root.contains(&survivor) {
                entries.push((horizon[&survivor].clone(), 1, iterations));
                active.remove(&survivor);
                progressed = true;
            }
        }

        // Advance the horizons of whoever is still active.
        for (&v, x) in &grown {
            if active.contains(&v) {
                if !progressed && x.len() > horizon[&v].len() {
                    progressed = true;
                }
                horizon.insert(v, x.clone());
            }
        }
        if !progressed && !active.is_empty() {
            return Err(FactorError::DidNotConverge);
        }
    }

    // Merge donations of identical sets within the same layer.
    let mut merged: BTreeMap<(u64, BTreeSet<usize>), u64> = BTreeMap::new();
    for (set, value, layer) in entries {
        *merged.entry((layer, set)).or_insert(0) += value;
    }
    let family = LayeredFamily {
        entries: merged
            .into_iter()
            .map(|((layer, set), value)| {
                (
                    set.iter().map(|&v| inst.node_name(v).clone()).collect(),
                    value,
                    layer,
                )
            })
            .collect(),
    };
    debug_assert_eq!(family.total_value(), n as u64);

    // Spanning arborescence: breadth-first from the root along chosen edges,
    // visiting out-edges in id order.
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &e in &eprime {
        adj.entry(inst.edge(e).tail).or_default().push(e);
    }
    let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
    let mut queue = VecDeque::from([root]);
    let mut seen = BTreeSet::from([root]);
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
    let ids: Vec<&str> = parent.values().map(|&e| inst.edge(e).id.as_str()).collect();
    let b = Branching::from_edges(inst, ids).expect("chosen edges contain a branching");
    let arb = Arborescence::new(rooted, b)
        .expect("every node becomes root-reachable along chosen edges");

    Ok(LowFactorResult {
        arb,
        bound: iterations.saturating_sub(1),
        family,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{random_instance, PrefModel};
    use crate::oracle::{BruteForcer, DEFAULT_ENUMERATION_BUDGET};
    use crate::popularity::compare_branchings;
    use crate::testutil::{four_cycle, star3, weak_tie};

    fn set(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn factor_ordering_and_json() {
        let f1 = Factor::Vacuous;
        let f2 = Factor::Finite(Ratio::new(3, 2));
        let f3 = Factor::Finite(Ratio::new(2, 1));
        let f4 = Factor::Infinite;
        assert!(f1 < f2 && f2 < f3 && f3 < f4);
        assert_eq!(f1.as_json_str(), "0");
        assert_eq!(f2.as_json_str(), "3/2");
        assert_eq!(f4.as_json_str(), "inf");
    }

    #[test]
    fn four_cycle_low_factor_matches_frozen_trace() {
        let inst = four_cycle();
        let rooted = inst.augment_root().unwrap();
        let res = low_factor_arborescence(&rooted).unwrap();
        assert_eq!(res.iterations, 3);
        assert_eq!(res.bound, 2);
        assert_eq!(
            res.arb.edge_ids(),
            vec!["ab", "ac", "cd", "r->a"]
                .into_iter()
                .map(String::from)
                .collect::<Vec<_>>()
        );
        let expected = LayeredFamily {
            entries: vec![
                (set(&["b"]), 1, 1),
                (set(&["d"]), 1, 1),
                (set(&["c", "d"]), 1, 2),
                (set(&["a", "b", "c", "d"]), 1, 3),
            ],
        };
        assert_eq!(res.family, expected);
        let check =
            validate_factor_family(&rooted, &res.arb, &res.family, Ratio::new(res.bound, 1));
        assert!(check.ok, "{:?}", check.failures);
        // exact factor of this arborescence is 2, achieved by a real rival
        let rep = unpopularity_factor(&rooted, &res.arb);
        assert_eq!(rep.factor, Factor::Finite(Ratio::new(2, 1)));
        let w = rep.witness.unwrap();
        let votes = compare_branchings(
            rooted.instance(),
            w.branching(),
            res.arb.branching(),
        );
        assert_eq!((votes.for_first, votes.for_second), (2, 1));
        // and check_unpop_factor agrees on both sides of 2
        assert!(check_unpop_factor(&rooted, &res.arb, Ratio::new(2, 1)).0);
        let (ok, rival) = check_unpop_factor(&rooted, &res.arb, Ratio::new(199, 100));
        assert!(!ok);
        assert!(rival.is_some());
    }

    #[test]
    fn star_factor_is_vacuous() {
        let inst = star3();
        let rooted = inst.augment_root().unwrap();
        let res = low_factor_arborescence(&rooted).unwrap();
        let rep = unpopularity_factor(&rooted, &res.arb);
        assert_eq!(rep.factor, Factor::Vacuous);
        assert!(rep.witness.is_none());
        assert!(check_unpop_factor(&rooted, &res.arb, Ratio::new(0, 1)).0);
    }

    #[test]
    fn weak_instances_are_gated_but_measurable() {
        let inst = weak_tie();
        let rooted = inst.augment_root().unwrap();
        assert!(matches!(
            low_factor_arborescence(&rooted),
            Err(FactorError::NotStrict(_))
        ));
        // measuring still works: the popular arborescence has factor 1
        let (arb, _) = crate::solver::popular_arborescence(&rooted).unwrap();
        let rep = unpopularity_factor(&rooted, &arb);
        assert_eq!(rep.factor, Factor::Finite(Ratio::new(1, 1)));
    }

    #[test]
    fn factor_agrees_with_oracle_on_random_strict_instances() {
        for seed in 0..30u64 {
            let n = 4 + (seed % 2) as usize;
            let m = (2 * n).min(n * (n - 1));
            let inst = random_instance(n, m, PrefModel::Strict, 1000 + seed).unwrap();
            let rooted = inst.augment_root().unwrap();
            let res = low_factor_arborescence(&rooted).unwrap();
            let check =
                validate_factor_family(&rooted, &res.arb, &res.family, Ratio::new(res.bound, 1));
            assert!(check.ok, "seed {seed}: {:?}", check.failures);
            let rep = unpopularity_factor(&rooted, &res.arb);
            assert!(
                rep.factor <= Factor::Finite(Ratio::new(res.bound.max(1), 1)),
                "seed {seed}: factor {} exceeds bound {}",
                rep.factor,
                res.bound
            );
            // oracle agreement on the stripped branching
            let bf = BruteForcer::new(&inst, DEFAULT_ENUMERATION_BUDGET).unwrap();
            let stripped = rooted.strip_root(&res.arb);
            let ix = (0..bf.count())
                .find(|&i| bf.branching(i) == stripped)
                .expect("constructed branching is enumerated");
            assert_eq!(bf.factor_of_ix(ix), rep.factor, "seed {seed}");
        }
    }

    #[test]
    fn doubling_instance_reaches_the_log_bound() {
        let inst = crate::generators::tight_factor_instance(3).unwrap();
        let rooted = inst.augment_root().unwrap();
        let res = low_factor_arborescence(&rooted).unwrap();
        assert!(res.bound <= 3, "bound {} exceeds log2(8)", res.bound);
        let check =
            validate_factor_family(&rooted, &res.arb, &res.family, Ratio::new(res.bound, 1));
        assert!(check.ok, "{:?}", check.failures);
        let rep = unpopularity_factor(&rooted, &res.arb);
        // the doubling construction forces factor exactly log2(n) on every
        // branching, so the bound is tight here
        assert_eq!(rep.factor, Factor::Finite(Ratio::new(3, 1)));
    }

    #[test]
    fn infinite_factor_detected() {
        // b's unique in-edge: any branching missing it is infinitely unpopular
        // against {ab} if it takes no votes itself: compare {} vs {ab}.
        let inst = star3();
        let rooted = inst.augment_root().unwrap();
        // the all-root arborescence {r->a, r->b, r->c}: rival {r->a, ab, ac}
        // wins 2-0.
        let b = Branching::from_edges(&inst, Vec::<&str>::new()).unwrap();
        let arb = rooted.arborify(&b).unwrap();
        let rep = unpopularity_factor(&rooted, &arb);
        assert_eq!(rep.factor, Factor::Infinite);
        let w = rep.witness.unwrap();
        let votes = compare_branchings(rooted.instance(), w.branching(), arb.branching());
        assert!(votes.for_first > 0 && votes.for_second == 0);
        assert!(!check_unpop_factor(&rooted, &arb, Ratio::new(1000, 1)).0);
    }
}
