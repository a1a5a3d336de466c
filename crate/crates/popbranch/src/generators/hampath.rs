//! Hamiltonian-path gadget: encodes a digraph with a universal in-degree-0
//! root as a preference digraph whose popular branchings with out-degree at
//! most 2 correspond to Hamiltonian paths from the root.
//!
//! Each original node `v` of in-degree `d_v` becomes a gadget: a core cycle
//! `c_v_1 … c_v_{d_v}` plus `d_v` pendant cycles `p_v_i_1 … p_v_i_{d_v}`. Core
//! node `c_v_j` top-ranks its cycle in-neighbor, then the entry nodes
//! `c_u_1` of `v`'s in-neighbors `u` in rotated order starting with the
//! `j`-th (the original root stands in for its own entry node). Pendant node
//! `p_v_i_j` top-ranks its cycle in-neighbor and second-ranks `c_v_j`. Two
//! extra nodes complete the graph: the original root and a sink `…_prime`
//! fed only by it. Length-1 cycles carry no self-loop.
//!
//! [`hampath_to_branching`] turns a Hamiltonian path into the branching that
//! enters each core cycle at the position of the path predecessor and hangs
//! every pendant cycle off a core node with spare out-degree; it is popular
//! and has out-degree at most 2.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::instance::{
    Branching, EdgeData, Instance, InstanceData, NodeId, PreferenceData, ROOT_ID,
};

#[derive(Debug, Clone, Error)]
pub enum HamError {
    #[error("bad digraph input: {0}")]
    BadInput(String),
    #[error("not a Hamiltonian path: {0}")]
    NotAPath(String),
}

/// The gadget instance together with the in-neighbor orderings that fix the
/// core-cycle preferences: `order[v][j-1]` is `v`'s `j`-th in-neighbor.
#[derive(Debug, Clone)]
pub struct HamReduction {
    pub instance: Instance,
    pub root: NodeId,
    pub order: BTreeMap<NodeId, Vec<NodeId>>,
}

fn core(v: &str, j: usize) -> String {
    format!("c_{v}_{j}")
}
fn pendant(v: &str, i: usize, j: usize) -> String {
    format!("p_{v}_{i}_{j}")
}

/// Build the gadget from a digraph given as instance JSON without
/// preferences. The input must have exactly one in-degree-0 node, with an
/// edge to every other node.
pub fn reduce_hampath(g: &InstanceData) -> Result<HamReduction, HamError> {
    let bad = |msg: String| HamError::BadInput(msg);
    let input = Instance::from_data(g).map_err(|e| bad(e.to_string()))?;
    let mut seen_pairs = BTreeSet::new();
    for e in 0..input.n_edges() {
        let pair = (input.edge(e).tail, input.edge(e).head);
        if !seen_pairs.insert(pair) {
            return Err(bad(format!(
                "parallel edges between '{}' and '{}'",
                input.node_name(pair.0),
                input.node_name(pair.1)
            )));
        }
    }
    let roots: Vec<usize> = (0..input.n_nodes())
        .filter(|&v| input.in_edges(v).is_empty())
        .collect();
    let [root_ix] = roots[..] else {
        return Err(bad(format!(
            "need exactly one in-degree-0 node, found {}",
            roots.len()
        )));
    };
    let root = input.node_name(root_ix).clone();
    if root == ROOT_ID {
        return Err(bad(format!(
            "input root may not use the reserved dummy-root name '{ROOT_ID}'"
        )));
    }
    for v in 0..input.n_nodes() {
        if v != root_ix
            && !input
                .in_edges(v)
                .iter()
                .any(|&e| input.edge(e).tail == root_ix)
        {
            return Err(bad(format!(
                "root '{root}' has no edge to '{}'",
                input.node_name(v)
            )));
        }
    }

    // in-neighbors in ascending edge-id order fix n(v, ·)
    let mut order: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for v in 0..input.n_nodes() {
        if v == root_ix {
            continue;
        }
        let tails: Vec<NodeId> = input
            .in_edges(v)
            .iter()
            .map(|&e| input.node_name(input.edge(e).tail).clone())
            .collect();
        order.insert(input.node_name(v).clone(), tails);
    }

    let mut data = InstanceData {
        nodes: vec![root.clone(), format!("{root}_prime")],
        edges: Vec::new(),
        preferences: BTreeMap::new(),
    };
    let entry = |u: &str| -> String {
        if u == root {
            root.clone()
        } else {
            core(u, 1)
        }
    };
    let add = |data: &mut InstanceData, tail: String, head: String, rank: u32| {
        data.edges.push(EdgeData {
            id: format!("{tail}->{head}"),
            tail,
            head: head.clone(),
        });
        let id = data.edges.last().unwrap().id.clone();
        match data
            .preferences
            .entry(head)
            .or_insert_with(|| PreferenceData::Weak {
                ranks: BTreeMap::new(),
            }) {
            PreferenceData::Weak { ranks } => ranks.insert(id, rank),
            PreferenceData::Partial { .. } => unreachable!(),
        };
    };
    add(
        &mut data,
        root.clone(),
        format!("{root}_prime"),
        1,
    );
    for (v, tails) in &order {
        let d = tails.len();
        for j in 1..=d {
            data.nodes.push(core(v, j));
            for i in 1..=d {
                data.nodes.push(pendant(v, i, j));
            }
        }
        for j in 1..=d {
            let mut rank = 1u32;
            if d >= 2 {
                let prev = if j == 1 { d } else { j - 1 };
                add(&mut data, core(v, prev), core(v, j), rank);
                rank += 1;
            }
            // rotated entry-node ranking: n(v,j), n(v,j+1), …, wrapping
            for step in 0..d {
                let u = &tails[(j - 1 + step) % d];
                add(&mut data, entry(u), core(v, j), rank);
                rank += 1;
            }
            for i in 1..=d {
                if d >= 2 {
                    let prev = if j == 1 { d } else { j - 1 };
                    add(&mut data, pendant(v, i, prev), pendant(v, i, j), 1);
                    add(&mut data, core(v, j), pendant(v, i, j), 2);
                } else {
                    add(&mut data, core(v, j), pendant(v, i, j), 1);
                }
            }
        }
    }
    let instance = Instance::from_data(&data).map_err(|e| bad(format!("gadget name clash: {e}")))?;
    Ok(HamReduction {
        instance,
        root,
        order,
    })
}

/// The branching a Hamiltonian path (root first, every other node once)
/// induces: popular, out-degree at most 2, an arborescence rooted at the
/// original root.
pub fn hampath_to_branching(red: &HamReduction, path: &[&str]) -> Result<Branching, HamError> {
    let not_path = |msg: String| HamError::NotAPath(msg);
    if path.first() != Some(&red.root.as_str()) {
        return Err(not_path(format!("path must start at the root '{}'", red.root)));
    }
    let rest: Vec<&str> = path[1..].to_vec();
    let covered: BTreeSet<&str> = rest.iter().copied().collect();
    let expected: BTreeSet<&str> = red.order.keys().map(|s| s.as_str()).collect();
    if covered.len() != rest.len() {
        return Err(not_path("a node repeats".into()));
    }
    if covered != expected {
        return Err(not_path("path must visit every non-root node exactly once".into()));
    }

    let mut ids: Vec<String> = Vec::new();
    let mut out: BTreeMap<String, usize> = BTreeMap::new();
    let add = |ids: &mut Vec<String>, out: &mut BTreeMap<String, usize>, tail: String, head: String| {
        *out.entry(tail.clone()).or_insert(0) += 1;
        ids.push(format!("{tail}->{head}"));
    };
    add(&mut ids, &mut out, red.root.clone(), format!("{}_prime", red.root));
    for w in 0..rest.len() {
        let u = if w == 0 { red.root.as_str() } else { rest[w - 1] };
        let v = rest[w];
        let tails = &red.order[v];
        let d = tails.len();
        let Some(jx) = tails.iter().position(|t| t == u) else {
            return Err(not_path(format!("'{u}' is not an in-neighbor of '{v}'")));
        };
        let j = jx + 1;
        let entry_tail = if u == red.root {
            red.root.clone()
        } else {
            core(u, 1)
        };
        add(&mut ids, &mut out, entry_tail, core(v, j));
        if d >= 2 {
            for k in 1..=d {
                if k != j {
                    let prev = if k == 1 { d } else { k - 1 };
                    add(&mut ids, &mut out, core(v, prev), core(v, k));
                }
            }
        }
    }
    // hang each pendant cycle off a core node with spare out-degree
    for (v, tails) in &red.order {
        let d = tails.len();
        for i in 1..=d {
            let k = (1..=d)
                .find(|&k| out.get(&core(v, k)).copied().unwrap_or(0) < 2)
                .expect("core cycles retain spare out-degree for every pendant");
            add(&mut ids, &mut out, core(v, k), pendant(v, i, k));
            if d >= 2 {
                for l in 1..=d {
                    if l != k {
                        let prev = if l == 1 { d } else { l - 1 };
                        add(&mut ids, &mut out, pendant(v, i, prev), pendant(v, i, l));
                    }
                }
            }
        }
    }
    debug_assert!(out.values().all(|&c| c <= 2), "out-degree stays at most 2");
    Ok(
        Branching::from_edges(&red.instance, ids.iter().map(|s| s.as_str()))
            .unwrap_or_else(|e| unreachable!("the induced parent map is a branching: {e}")),
    )
}
