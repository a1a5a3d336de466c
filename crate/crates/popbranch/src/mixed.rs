//! Popular mixed branchings: lotteries over branchings that never lose an
//! expected pairwise vote.
//!
//! Working in the root-augmented graph, a lottery corresponds to a fractional
//! arborescence `x` (a point of the arborescence polytope), and the expected
//! vote margin between two fractional points is the bilinear form
//! `Δ(x,y) = Σ_u Σ_{e,e'∈δ⁻(u)} x_e y_{e'} vote_u(e,e')`. A popular fractional
//! arborescence — one with `Δ(x,y) ≥ 0` against every `y` — always exists;
//! one is found here by constraint generation over the two exponential
//! constraint families:
//!
//! * membership in the arborescence polytope, separated by exact min-cut
//!   computations ([`separate_membership`]);
//! * non-negativity of `Δ(x,A)` against every integral arborescence,
//!   separated by a min-cost arborescence under the comparison costs
//!   `c_x(e) = Σ_{e'≻e} x_{e'} − Σ_{e'≺e} x_{e'}` ([`separate_popularity`]).
//!
//! The solve maximizes the worst margin `z` with an exact rational simplex,
//! adding violated rows until both oracles accept, then decomposes the point
//! into an explicit lottery ([`decompose_fractional`]). Everything is exact —
//! no floating point, no tolerances.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::arborescence::min_cost_arborescence;
use crate::instance::{
    Arborescence, Branching, BranchingError, Comparison, EdgeId, NodeId, RootedInstance,
};
use crate::maxflow::max_flow;
use crate::popularity::to_digraph;
use crate::simplex::{solve as lp_solve, LpOutcome, LpProblem, Relation};

/// Edge weights in `[0,1]` summing to one at every node: a point of the
/// arborescence polytope when additionally every root cut carries weight ≥ 1.
/// Missing edges carry weight zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FractionalArborescence {
    pub x: BTreeMap<EdgeId, BigRational>,
}

impl FractionalArborescence {
    pub fn from_indicator(arb: &Arborescence) -> Self {
        FractionalArborescence {
            x: arb
                .edge_ids()
                .into_iter()
                .map(|id| (id, BigRational::from_integer(1.into())))
                .collect(),
        }
    }

    /// Weight of an edge id (zero when absent).
    pub fn weight(&self, id: &str) -> BigRational {
        self.x.get(id).cloned().unwrap_or_else(BigRational::zero)
    }
}

/// A lottery over branchings; weights are positive and sum to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedBranching {
    pub components: Vec<(Branching, BigRational)>,
}

impl MixedBranching {
    /// The fractional arborescence this lottery averages to (components are
    /// re-augmented with their root edges).
    pub fn to_fractional(
        &self,
        rooted: &RootedInstance,
    ) -> Result<FractionalArborescence, BranchingError> {
        let mut x: BTreeMap<EdgeId, BigRational> = BTreeMap::new();
        for (b, w) in &self.components {
            let arb = rooted.arborify(b)?;
            for id in arb.edge_ids() {
                *x.entry(id).or_insert_with(BigRational::zero) += w;
            }
        }
        x.retain(|_, w| !w.is_zero());
        Ok(FractionalArborescence { x })
    }

    /// `[{"branching": [edge ids], "weight": "p/q"}, ...]`
    pub fn to_json(&self) -> String {
        let arr: Vec<serde_json::Value> = self
            .components
            .iter()
            .map(|(b, w)| {
                serde_json::json!({
                    "branching": b.edge_ids(),
                    "weight": w.to_string(),
                })
            })
            .collect();
        serde_json::Value::Array(arr).to_string()
    }
}

#[derive(Debug, Clone, Error)]
pub enum MixedError {
    #[error("point is not a fractional arborescence: {0}")]
    InfeasiblePoint(String),
    #[error("instance has n = {n} nodes, above the mixed-solve budget of {budget}")]
    BudgetExceeded { n: usize, budget: usize },
    #[error("the rooted graph has no spanning arborescence")]
    NoArborescence,
    #[error("support decomposition needs {required} parent combinations, budget is {budget}")]
    SupportTooLarge { required: u128, budget: u64 },
    #[error("constraint generation stalled: {0}")]
    DidNotConverge(String),
}

/// Outcome of the membership oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MembershipCheck {
    Feasible,
    /// Unknown edge id or a negative weight.
    BadEdge { id: EdgeId, reason: String },
    /// Incoming weight of a node differs from one.
    DegreeViolation { node: NodeId, total: BigRational },
    /// A node set whose incoming weight is below one.
    CutViolation { set: BTreeSet<NodeId> },
}

impl MembershipCheck {
    pub fn is_feasible(&self) -> bool {
        *self == MembershipCheck::Feasible
    }
}

impl fmt::Display for MembershipCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MembershipCheck::Feasible => write!(f, "feasible"),
            MembershipCheck::BadEdge { id, reason } => write!(f, "edge '{id}': {reason}"),
            MembershipCheck::DegreeViolation { node, total } => {
                write!(f, "node '{node}' has incoming weight {total}, expected 1")
            }
            MembershipCheck::CutViolation { set } => {
                write!(f, "node set {set:?} has incoming weight below 1")
            }
        }
    }
}

/// Dense per-edge weights, or the invalid-input check that prevents them.
fn dense(
    rooted: &RootedInstance,
    x: &FractionalArborescence,
) -> Result<Vec<BigRational>, MembershipCheck> {
    let inst = rooted.instance();
    let mut v = vec![BigRational::zero(); inst.n_edges()];
    for (id, w) in &x.x {
        let Some(e) = inst.edge_index(id) else {
            return Err(MembershipCheck::BadEdge {
                id: id.clone(),
                reason: "unknown edge id".into(),
            });
        };
        if w.is_negative() {
            return Err(MembershipCheck::BadEdge {
                id: id.clone(),
                reason: format!("negative weight {w}"),
            });
        }
        v[e] = w.clone();
    }
    Ok(v)
}

fn membership_core(rooted: &RootedInstance, xs: &[BigRational]) -> MembershipCheck {
    let inst = rooted.instance();
    let one = BigRational::from_integer(1.into());
    for v in rooted.ordinary_nodes() {
        let total: BigRational = inst.in_edges(v).iter().map(|&e| xs[e].clone()).sum();
        if total != one {
            return MembershipCheck::DegreeViolation {
                node: inst.node_name(v).clone(),
                total,
            };
        }
    }
    // every root cut must carry weight ≥ 1: min r→t cut per possible sink
    let caps: Vec<(usize, usize, BigRational)> = (0..inst.n_edges())
        .map(|e| (inst.edge(e).tail, inst.edge(e).head, xs[e].clone()))
        .collect();
    for t in rooted.ordinary_nodes() {
        let res = max_flow(inst.n_nodes(), &caps, rooted.root_ix(), t);
        if res.value < one {
            let set: BTreeSet<NodeId> = rooted
                .ordinary_nodes()
                .filter(|&v| !res.source_side[v])
                .map(|v| inst.node_name(v).clone())
                .collect();
            return MembershipCheck::CutViolation { set };
        }
    }
    MembershipCheck::Feasible
}

/// Is `x` a point of the arborescence polytope? If not, report the first
/// failing degree equality or a root cut with weight below one.
pub fn separate_membership(
    rooted: &RootedInstance,
    x: &FractionalArborescence,
) -> MembershipCheck {
    match dense(rooted, x) {
        Ok(xs) => membership_core(rooted, &xs),
        Err(bad) => bad,
    }
}

fn vote(c: Comparison) -> i64 {
    match c {
        Comparison::PrefersFirst => 1,
        Comparison::PrefersSecond => -1,
        Comparison::Neither => 0,
    }
}

fn delta_core(rooted: &RootedInstance, xs: &[BigRational], ys: &[BigRational]) -> BigRational {
    let inst = rooted.instance();
    let mut total = BigRational::zero();
    for u in rooted.ordinary_nodes() {
        for &e in inst.in_edges(u) {
            if xs[e].is_zero() {
                continue;
            }
            for &f in inst.in_edges(u) {
                if ys[f].is_zero() {
                    continue;
                }
                let v = vote(inst.compare(u, e, f));
                if v != 0 {
                    total += &xs[e] * &ys[f] * BigRational::from_integer(v.into());
                }
            }
        }
    }
    total
}

/// Expected vote margin `Δ(x,y)` between two fractional arborescences:
/// positive when `x` is expected to beat `y`. Antisymmetric; on indicator
/// vectors it equals the pairwise branching comparison.
pub fn delta_mixed(
    rooted: &RootedInstance,
    x: &FractionalArborescence,
    y: &FractionalArborescence,
) -> Result<BigRational, MixedError> {
    let mut ds = Vec::new();
    for p in [x, y] {
        let d = dense(rooted, p).map_err(|c| MixedError::InfeasiblePoint(c.to_string()))?;
        let check = membership_core(rooted, &d);
        if !check.is_feasible() {
            return Err(MixedError::InfeasiblePoint(check.to_string()));
        }
        ds.push(d);
    }
    Ok(delta_core(rooted, &ds[0], &ds[1]))
}

/// Outcome of the popularity oracle.
#[derive(Debug, Clone)]
pub enum PopularitySeparation {
    /// `Δ(x,A) ≥ 0` for every arborescence `A`.
    Popular,
    /// An arborescence beating `x` in expectation; `margin = Δ(x,witness) < 0`.
    Beaten {
        witness: Arborescence,
        margin: BigRational,
    },
}

/// Minimize `Δ(x,A) = c_x(A)` over arborescences `A`. The rational costs are
/// scaled to integers by their common denominator and shifted per head node
/// into nonnegative territory (every arborescence takes exactly one edge per
/// head, so a per-head shift moves all totals equally).
fn popularity_core(rooted: &RootedInstance, xs: &[BigRational]) -> PopularitySeparation {
    let inst = rooted.instance();
    let m = inst.n_edges();

    let mut cx = vec![BigRational::zero(); m];
    for u in rooted.ordinary_nodes() {
        for &e in inst.in_edges(u) {
            let mut c = BigRational::zero();
            for &f in inst.in_edges(u) {
                if xs[f].is_zero() {
                    continue;
                }
                match inst.compare(u, f, e) {
                    Comparison::PrefersFirst => c += &xs[f],
                    Comparison::PrefersSecond => c -= &xs[f],
                    Comparison::Neither => {}
                }
            }
            cx[e] = c;
        }
    }

    let scale: BigInt = cx
        .iter()
        .fold(BigInt::from(1), |l, c| l.lcm(&c.denom().clone()));
    let ints: Vec<BigInt> = cx
        .iter()
        .map(|c| c.numer() * (&scale / c.denom()))
        .collect();
    let mut shift_total = BigInt::from(0);
    let mut costs: Vec<BigInt> = ints.clone();
    for u in rooted.ordinary_nodes() {
        let min = inst
            .in_edges(u)
            .iter()
            .map(|&e| ints[e].clone())
            .min()
            .expect("augmented nodes have in-edges");
        if min.is_negative() {
            let k = -min;
            for &e in inst.in_edges(u) {
                costs[e] += &k;
            }
            shift_total += k;
        }
    }
    let costs: Vec<num_bigint::BigUint> = costs
        .iter()
        .map(|c| c.to_biguint().expect("shifted costs are nonnegative"))
        .collect();

    let g = to_digraph(rooted);
    let sol = min_cost_arborescence(&g, &costs)
        .expect("a feasible fractional point implies spanning arborescences exist");
    let total = BigInt::from(sol.total_cost.clone()) - shift_total;
    let min_delta = BigRational::new(total, scale);
    if min_delta.is_negative() {
        let ids: Vec<&str> = sol
            .arb_edges
            .iter()
            .map(|&e| inst.edge(e).id.as_str())
            .collect();
        let b = Branching::from_edges(inst, ids).expect("engine output is a branching");
        let witness = Arborescence::new(rooted, b).expect("engine output spans");
        debug_assert_eq!(
            delta_core(rooted, xs, &dense(rooted, &FractionalArborescence::from_indicator(&witness)).unwrap()),
            min_delta,
            "comparison costs evaluate the bilinear form"
        );
        PopularitySeparation::Beaten {
            witness,
            margin: min_delta,
        }
    } else {
        PopularitySeparation::Popular
    }
}

/// Does any integral arborescence beat `x` in expectation? Exact; returns the
/// strongest such witness when one exists.
pub fn separate_popularity(
    rooted: &RootedInstance,
    x: &FractionalArborescence,
) -> Result<PopularitySeparation, MixedError> {
    let xs = dense(rooted, x).map_err(|c| MixedError::InfeasiblePoint(c.to_string()))?;
    let check = membership_core(rooted, &xs);
    if !check.is_feasible() {
        return Err(MixedError::InfeasiblePoint(check.to_string()));
    }
    Ok(popularity_core(rooted, &xs))
}

pub const DEFAULT_MIXED_BUDGET: usize = 12;
pub const DEFAULT_SUPPORT_BUDGET: u64 = 1_000_000;

/// Compute a popular mixed branching by constraint generation: maximize the
/// worst expected margin `z` subject to the degree equalities, generated cut
/// rows, and generated `Δ(x,A) ≥ z` rows, re-solving until both separation
/// oracles accept the optimum; then decompose it into an explicit lottery.
/// One always exists; `budget` caps the instance size this desk-scale solve
/// accepts.
pub fn popular_mixed_branching(
    rooted: &RootedInstance,
    budget: usize,
) -> Result<MixedBranching, MixedError> {
    let inst = rooted.instance();
    let n = rooted.n();
    if n > budget {
        return Err(MixedError::BudgetExceeded { n, budget });
    }

    // a popular arborescence, when one exists, is already a popular lottery
    if let Some((arb, _)) = crate::solver::popular_arborescence(rooted) {
        return Ok(MixedBranching {
            components: vec![(rooted.strip_root(&arb), BigRational::from_integer(1.into()))],
        });
    }

    let m = inst.n_edges();
    let g = to_digraph(rooted);
    let seed = min_cost_arborescence(&g, &vec![0u64; m]).map_err(|_| MixedError::NoArborescence)?;
    let seed_ids: Vec<&str> = seed
        .arb_edges
        .iter()
        .map(|&e| inst.edge(e).id.as_str())
        .collect();
    let seed_b = Branching::from_edges(inst, seed_ids).expect("engine output is a branching");
    let seed_arb = Arborescence::new(rooted, seed_b).expect("engine output spans");

    // rows are remembered by content to catch a stalling oracle
    let mut arb_pool: Vec<Vec<usize>> = Vec::new(); // per-arb sorted edge indices
    let mut arb_seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut cut_pool: Vec<BTreeSet<usize>> = Vec::new(); // node-index sets
    let mut cut_seen: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
    let remember_arb = |pool: &mut Vec<Vec<usize>>,
                            seen: &mut BTreeSet<Vec<usize>>,
                            arb: &Arborescence|
     -> bool {
        let ids: Vec<usize> = arb
            .edge_ids()
            .iter()
            .map(|id| inst.edge_index(id).expect("known edge"))
            .collect();
        if seen.insert(ids.clone()) {
            pool.push(ids);
            true
        } else {
            false
        }
    };
    remember_arb(&mut arb_pool, &mut arb_seen, &seed_arb);

    let zero = BigRational::zero;
    let one = || BigRational::from_integer(1.into());
    // variables: x_0..x_{m-1}, then z = z⁺ − z⁻
    let zp = m;
    let zn = m + 1;

    for _round in 0..2_000 {
        let mut rows: Vec<(Vec<BigRational>, Relation, BigRational)> = Vec::new();
        for v in rooted.ordinary_nodes() {
            let mut coef = vec![zero(); m + 2];
            for &e in inst.in_edges(v) {
                coef[e] = one();
            }
            rows.push((coef, Relation::Eq, one()));
        }
        for set in &cut_pool {
            let mut coef = vec![zero(); m + 2];
            for e in 0..m {
                if set.contains(&inst.edge(e).head) && !set.contains(&inst.edge(e).tail) {
                    coef[e] = one();
                }
            }
            rows.push((coef, Relation::Ge, one()));
        }
        for arb in &arb_pool {
            let head_edge: BTreeMap<usize, usize> =
                arb.iter().map(|&e| (inst.edge(e).head, e)).collect();
            let mut coef = vec![zero(); m + 2];
            for e in 0..m {
                let head = inst.edge(e).head;
                let a_e = head_edge[&head];
                let v = vote(inst.compare(head, e, a_e));
                if v != 0 {
                    coef[e] = BigRational::from_integer(v.into());
                }
            }
            coef[zp] = -one();
            coef[zn] = one();
            rows.push((coef, Relation::Ge, zero()));
        }
        let mut objective = vec![zero(); m + 2];
        objective[zp] = one();
        objective[zn] = -one();
        let outcome = lp_solve(&LpProblem {
            n_vars: m + 2,
            objective,
            rows,
        });
        let LpOutcome::Optimal { x: sol, value: z } = outcome else {
            return Err(MixedError::DidNotConverge(format!(
                "interim LP was {outcome:?}"
            )));
        };
        let xs: Vec<BigRational> = sol[..m].to_vec();

        match membership_core(rooted, &xs) {
            MembershipCheck::Feasible => {}
            MembershipCheck::CutViolation { set } => {
                let ixs: BTreeSet<usize> = set
                    .iter()
                    .map(|name| inst.node_index(name).expect("oracle names known nodes"))
                    .collect();
                if !cut_seen.insert(ixs.clone()) {
                    return Err(MixedError::DidNotConverge(
                        "membership oracle repeated a cut".into(),
                    ));
                }
                cut_pool.push(ixs);
                continue;
            }
            other => {
                return Err(MixedError::DidNotConverge(format!(
                    "LP point failed enforced constraints: {other}"
                )))
            }
        }
        match popularity_core(rooted, &xs) {
            PopularitySeparation::Beaten { witness, .. } => {
                if !remember_arb(&mut arb_pool, &mut arb_seen, &witness) {
                    return Err(MixedError::DidNotConverge(
                        "popularity oracle repeated an arborescence".into(),
                    ));
                }
                continue;
            }
            PopularitySeparation::Popular => {
                debug_assert!(!z.is_negative(), "relaxation optimum stays ≥ 0");
                let x = FractionalArborescence {
                    x: (0..m)
                        .filter(|&e| !xs[e].is_zero())
                        .map(|e| (inst.edge(e).id.clone(), xs[e].clone()))
                        .collect(),
                };
                return decompose_fractional(rooted, &x, DEFAULT_SUPPORT_BUDGET);
            }
        }
    }
    Err(MixedError::DidNotConverge(
        "row generation exceeded the round limit".into(),
    ))
}

/// Write a fractional arborescence exactly as a lottery over arborescences
/// contained in its support (at most one more component than the support
/// size). The support's parent combinations are enumerated under `budget`.
pub fn decompose_fractional(
    rooted: &RootedInstance,
    x: &FractionalArborescence,
    budget: u64,
) -> Result<MixedBranching, MixedError> {
    let inst = rooted.instance();
    let xs = dense(rooted, x).map_err(|c| MixedError::InfeasiblePoint(c.to_string()))?;
    let check = membership_core(rooted, &xs);
    if !check.is_feasible() {
        return Err(MixedError::InfeasiblePoint(check.to_string()));
    }

    let nodes: Vec<usize> = rooted.ordinary_nodes().collect();
    let cands: Vec<Vec<usize>> = nodes
        .iter()
        .map(|&v| {
            inst.in_edges(v)
                .iter()
                .copied()
                .filter(|&e| !xs[e].is_zero())
                .collect()
        })
        .collect();
    let required: u128 = cands.iter().map(|c| c.len() as u128).product();
    if required > budget as u128 {
        return Err(MixedError::SupportTooLarge { required, budget });
    }

    // enumerate support-contained parent maps, keep the arborescences
    let mut arbs: Vec<Vec<usize>> = Vec::new();
    let mut pick = vec![0usize; nodes.len()];
    loop {
        let parents: Vec<usize> = pick.iter().zip(&cands).map(|(&i, c)| c[i]).collect();
        if spans(rooted, &nodes, &parents) {
            arbs.push(parents);
        }
        let mut k = nodes.len();
        loop {
            if k == 0 {
                break;
            }
            k -= 1;
            pick[k] += 1;
            if pick[k] < cands[k].len() {
                break;
            }
            pick[k] = 0;
        }
        if pick.iter().all(|&i| i == 0) {
            break;
        }
    }
    if nodes.is_empty() {
        arbs.push(Vec::new());
    }

    // weights: λ ≥ 0, Σλ = 1, Σ λ_A · indicator(A) = x on the support
    let support: Vec<usize> = (0..inst.n_edges()).filter(|&e| !xs[e].is_zero()).collect();
    let zero = BigRational::zero;
    let one = || BigRational::from_integer(1.into());
    let mut rows: Vec<(Vec<BigRational>, Relation, BigRational)> = Vec::new();
    for &e in &support {
        let coef: Vec<BigRational> = arbs
            .iter()
            .map(|a| if a.contains(&e) { one() } else { zero() })
            .collect();
        rows.push((coef, Relation::Eq, xs[e].clone()));
    }
    rows.push((vec![one(); arbs.len()], Relation::Eq, one()));
    let outcome = lp_solve(&LpProblem {
        n_vars: arbs.len(),
        objective: vec![zero(); arbs.len()],
        rows,
    });
    let LpOutcome::Optimal { x: lambda, .. } = outcome else {
        unreachable!("points of the arborescence polytope decompose over their support");
    };

    let mut components: Vec<(Branching, BigRational)> = Vec::new();
    for (a, w) in arbs.iter().zip(&lambda) {
        if w.is_zero() {
            continue;
        }
        let ids: Vec<&str> = a.iter().map(|&e| inst.edge(e).id.as_str()).collect();
        let b = Branching::from_edges(inst, ids).expect("support parents form a branching");
        let arb = Arborescence::new(rooted, b).expect("spanning was checked");
        components.push((rooted.strip_root(&arb), w.clone()));
    }
    components.sort_by(|(a, _), (b, _)| a.edge_ids().cmp(&b.edge_ids()));
    let mixed = MixedBranching { components };
    debug_assert_eq!(
        mixed
            .to_fractional(rooted)
            .expect("components re-augment")
            .x,
        x.x.iter()
            .filter(|(_, w)| !w.is_zero())
            .map(|(k, w)| (k.clone(), w.clone()))
            .collect::<BTreeMap<_, _>>(),
        "decomposition re-sums to the input"
    );
    Ok(mixed)
}

/// Does the parent map (one in-edge per ordinary node) reach the root from
/// everywhere?
fn spans(rooted: &RootedInstance, nodes: &[usize], parents: &[usize]) -> bool {
    let inst = rooted.instance();
    let parent_of: BTreeMap<usize, usize> = nodes
        .iter()
        .zip(parents)
        .map(|(&v, &e)| (v, inst.edge(e).tail))
        .collect();
    // 0 = unknown, 1 = on current walk, 2 = reaches root
    let mut state: BTreeMap<usize, u8> = BTreeMap::new();
    for &start in nodes {
        let mut path = Vec::new();
        let mut cur = start;
        let ok = loop {
            if cur == rooted.root_ix() || state.get(&cur) == Some(&2) {
                break true;
            }
            if state.get(&cur) == Some(&1) {
                break false; // cycle
            }
            state.insert(cur, 1);
            path.push(cur);
            cur = parent_of[&cur];
        };
        if !ok {
            return false;
        }
        for v in path {
            state.insert(v, 2);
        }
    }
    true
}
