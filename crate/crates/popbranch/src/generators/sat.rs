//! Satisfiability gadget: encodes a 3-CNF formula (each clause 2–3 literals,
//! each variable at most 3 occurrences) as a preference digraph whose popular
//! branchings with at most 9 descendants per node correspond to satisfying
//! assignments.
//!
//! Per variable `x_i` the gadget is a directed 9-cycle `a_i_1 … a_i_9` plus
//! in-degree-0 nodes `t_i` and `f_i`; every cycle node top-ranks its cycle
//! in-neighbor and second-ranks `t_i` (at position 1) or `f_i` (elsewhere).
//! Per clause `c_j` with `h` literals the gadget is a directed `h`-cycle
//! `c_j_1 … c_j_h`; node `c_j_k` second-ranks `t_i` when the `k`-th literal is
//! `x_i` and `f_i` when it is `¬x_i`. [`assignment_to_branching`] builds, from
//! a satisfying assignment, the branching that breaks each variable cycle at
//! the chosen polarity and hangs each clause cycle off one true literal; it is
//! popular and every node has at most 9 descendants.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::instance::{Branching, EdgeData, Instance, InstanceData, PreferenceData};

#[derive(Debug, Clone, Error)]
pub enum SatError {
    #[error("bad formula: {0}")]
    BadFormula(String),
    #[error("assignment leaves clause {0} unsatisfied")]
    Unsatisfied(usize),
}

/// The gadget instance together with the literal structure needed to map
/// assignments to branchings. Clause literals are `(variable, positive)`
/// pairs with 1-based variable indices.
#[derive(Debug, Clone)]
pub struct SatReduction {
    pub instance: Instance,
    pub n_vars: usize,
    pub clauses: Vec<Vec<(usize, bool)>>,
}

fn a(i: usize, k: usize) -> String {
    format!("a_{i}_{k}")
}
fn c(j: usize, k: usize) -> String {
    format!("c_{j}_{k}")
}
fn edge(tail: &str, head: &str) -> EdgeData {
    EdgeData {
        id: format!("{tail}->{head}"),
        tail: tail.to_string(),
        head: head.to_string(),
    }
}

/// Parse a DIMACS CNF formula and build the gadget digraph. Rejects clause
/// widths outside `{2,3}` and variables occurring more than 3 times.
pub fn reduce_3sat(dimacs: &str) -> Result<SatReduction, SatError> {
    let bad = |msg: String| SatError::BadFormula(msg);
    let mut n_vars: Option<usize> = None;
    let mut literals: Vec<i64> = Vec::new();
    for line in dimacs.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('p') {
            if n_vars.is_some() {
                return Err(bad("duplicate problem line".into()));
            }
            let parts: Vec<&str> = rest.split_whitespace().collect();
            let [fmt, nv, _nc] = parts[..] else {
                return Err(bad(format!("malformed problem line '{line}'")));
            };
            if fmt != "cnf" {
                return Err(bad(format!("unsupported format '{fmt}'")));
            }
            n_vars = Some(
                nv.parse::<usize>()
                    .map_err(|_| bad(format!("bad variable count '{nv}'")))?,
            );
            continue;
        }
        if n_vars.is_none() {
            return Err(bad(format!("clause before problem line: '{line}'")));
        }
        for tok in line.split_whitespace() {
            literals.push(
                tok.parse::<i64>()
                    .map_err(|_| bad(format!("bad literal '{tok}'")))?,
            );
        }
    }
    let n_vars = n_vars.ok_or_else(|| bad("missing problem line".into()))?;

    let mut clauses: Vec<Vec<(usize, bool)>> = Vec::new();
    let mut cur: Vec<(usize, bool)> = Vec::new();
    for lit in literals {
        if lit == 0 {
            clauses.push(std::mem::take(&mut cur));
            continue;
        }
        let var = lit.unsigned_abs() as usize;
        if var == 0 || var > n_vars {
            return Err(bad(format!("variable {var} out of range 1..={n_vars}")));
        }
        cur.push((var, lit > 0));
    }
    if !cur.is_empty() {
        return Err(bad("unterminated clause (missing 0)".into()));
    }
    for (j, cl) in clauses.iter().enumerate() {
        if !(2..=3).contains(&cl.len()) {
            return Err(bad(format!(
                "clause {} has {} literals; widths 2 and 3 are supported",
                j + 1,
                cl.len()
            )));
        }
    }
    let mut occurrences = vec![0usize; n_vars + 1];
    for cl in &clauses {
        for &(var, _) in cl {
            occurrences[var] += 1;
        }
    }
    if let Some(var) = (1..=n_vars).find(|&v| occurrences[v] > 3) {
        return Err(bad(format!(
            "variable {var} occurs {} times; at most 3 occurrences are supported",
            occurrences[var]
        )));
    }

    let mut data = InstanceData {
        nodes: Vec::new(),
        edges: Vec::new(),
        preferences: BTreeMap::new(),
    };
    fn rank(
        prefs: &mut BTreeMap<String, PreferenceData>,
        node: String,
        first: &EdgeData,
        second: &EdgeData,
    ) {
        let ranks: BTreeMap<_, _> = [(first.id.clone(), 1u32), (second.id.clone(), 2u32)]
            .into_iter()
            .collect();
        prefs.insert(node, PreferenceData::Weak { ranks });
    }
    for i in 1..=n_vars {
        for k in 1..=9 {
            data.nodes.push(a(i, k));
        }
        data.nodes.push(format!("t_{i}"));
        data.nodes.push(format!("f_{i}"));
        for k in 1..=9usize {
            let prev = a(i, if k == 1 { 9 } else { k - 1 });
            let top = edge(&prev, &a(i, k));
            let tf = if k == 1 {
                format!("t_{i}")
            } else {
                format!("f_{i}")
            };
            let second = edge(&tf, &a(i, k));
            rank(&mut data.preferences, a(i, k), &top, &second);
            data.edges.push(top);
            data.edges.push(second);
        }
    }
    for (jx, cl) in clauses.iter().enumerate() {
        let j = jx + 1;
        let h = cl.len();
        for k in 1..=h {
            data.nodes.push(c(j, k));
        }
        for (kx, &(var, positive)) in cl.iter().enumerate() {
            let k = kx + 1;
            let prev = c(j, if k == 1 { h } else { k - 1 });
            let top = edge(&prev, &c(j, k));
            let tf = if positive {
                format!("t_{var}")
            } else {
                format!("f_{var}")
            };
            let second = edge(&tf, &c(j, k));
            rank(&mut data.preferences, c(j, k), &top, &second);
            data.edges.push(top);
            data.edges.push(second);
        }
    }
    let instance = Instance::from_data(&data)
        .unwrap_or_else(|e| unreachable!("gadget construction is valid: {e}"));
    Ok(SatReduction {
        instance,
        n_vars,
        clauses,
    })
}

/// The branching a satisfying assignment induces: popular, with at most 9
/// descendants per node. Per clause the first true literal is the chosen one.
pub fn assignment_to_branching(
    red: &SatReduction,
    assignment: &[bool],
) -> Result<Branching, SatError> {
    if assignment.len() != red.n_vars {
        return Err(SatError::BadFormula(format!(
            "assignment covers {} variables, formula has {}",
            assignment.len(),
            red.n_vars
        )));
    }
    let mut ids: Vec<String> = Vec::new();
    fn keep_cycle(ids: &mut Vec<String>, nodes: &[String], skip_head: usize) {
        let h = nodes.len();
        for k in 0..h {
            let head = (k + 1) % h;
            if head != skip_head {
                ids.push(format!("{}->{}", nodes[k], nodes[head]));
            }
        }
    }
    for i in 1..=red.n_vars {
        let cycle: Vec<String> = (1..=9).map(|k| a(i, k)).collect();
        if assignment[i - 1] {
            ids.push(format!("f_{i}->{}", a(i, 2)));
            keep_cycle(&mut ids, &cycle, 1); // drop the edge into a_i_2
        } else {
            ids.push(format!("t_{i}->{}", a(i, 1)));
            keep_cycle(&mut ids, &cycle, 0); // drop the edge into a_i_1
        }
    }
    for (jx, cl) in red.clauses.iter().enumerate() {
        let j = jx + 1;
        let kx = cl
            .iter()
            .position(|&(var, positive)| assignment[var - 1] == positive)
            .ok_or(SatError::Unsatisfied(j))?;
        let (var, positive) = cl[kx];
        let tf = if positive {
            format!("t_{var}")
        } else {
            format!("f_{var}")
        };
        ids.push(format!("{tf}->{}", c(j, kx + 1)));
        let cycle: Vec<String> = (1..=cl.len()).map(|k| c(j, k)).collect();
        keep_cycle(&mut ids, &cycle, kx);
    }
    Ok(Branching::from_edges(&red.instance, ids.iter().map(|s| s.as_str()))
        .unwrap_or_else(|e| unreachable!("the induced parent map is a branching: {e}")))
}

/// Largest number of strict descendants any node has in `b`.
pub fn max_descendants(inst: &Instance, b: &Branching) -> usize {
    let mut children: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (node, eid) in b.iter() {
        let head = inst.node_index(node).expect("branching node exists");
        let tail = inst.edge(inst.edge_index(eid).expect("branching edge exists")).tail;
        children.entry(tail).or_default().push(head);
    }
    let mut memo: Vec<Option<usize>> = vec![None; inst.n_nodes()];
    fn count(v: usize, children: &BTreeMap<usize, Vec<usize>>, memo: &mut Vec<Option<usize>>) -> usize {
        if let Some(d) = memo[v] {
            return d;
        }
        let d = children
            .get(&v)
            .map(|cs| cs.iter().map(|&c| 1 + count(c, children, memo)).sum())
            .unwrap_or(0);
        memo[v] = Some(d);
        d
    }
    (0..inst.n_nodes())
        .map(|v| count(v, &children, &mut memo))
        .max()
        .unwrap_or(0)
}
