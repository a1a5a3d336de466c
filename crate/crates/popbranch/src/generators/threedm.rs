//! Three-dimensional-matching gadget: encodes a 3DM instance as a rooted
//! preference digraph with genuinely partial (non-weak) orders, on which
//! deciding "margin at most k" reproduces the matching question.
//!
//! Each element `w` becomes a lower node `w_l` and an upper node `w_u`. The
//! root `r` feeds `w_l` through parallel edges `r_w_1`, `r_w_2` and `w_u`
//! through `r_w_3`; `w_u` feeds `w_l` through parallel edges `d_w_1`, `d_w_2`;
//! every other upper node feeds `w_u` (`u_{w'}_{w}`); and each triple `t_j`
//! containing `w` adds parallel edges `tj_w_1`, `tj_w_2` from `w_l` up to
//! `w_u`. Lower nodes order only `d_w_1 ≻ r_w_1` and `d_w_2 ≻ r_w_2`; upper
//! nodes place upper-to-upper edges above `r_w_3`, each `tj_w_1` above the
//! upper edges from outside the triple, and each `tj_w_2` above those from
//! inside it — all other pairs incomparable.
//!
//! [`matching_to_certificate`] maps a perfect matching to the arborescence
//! that enters every lower node from the root and every upper node from its
//! matched triple, plus a dual family of all upper singletons and one 6-node
//! set per matched triple — `4|X|` sets, certifying margin at most `2|X|`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{
    Arborescence, Branching, EdgeData, Instance, InstanceData, NodeId, PreferenceData,
    RootedInstance,
};
use crate::popularity::DualCertificate;

/// Raw 3DM input: three equal-cardinality element lists and the triple list
/// (each triple one element from `x`, `y`, `z` in that order).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThreeDmInput {
    pub x: Vec<String>,
    pub y: Vec<String>,
    pub z: Vec<String>,
    pub triples: Vec<[String; 3]>,
}

#[derive(Debug, Clone, Error)]
#[error("bad 3DM input: {0}")]
pub struct BadInput(pub String);

/// The gadget, rooted at its own node `r` (no dummy augmentation is needed).
/// `proof_valid` records whether the instance is large enough (`|X| > 3`)
/// for the documented margin equivalence.
#[derive(Debug)]
pub struct ThreeDmReduction {
    pub rooted: RootedInstance,
    pub triples: Vec<[NodeId; 3]>,
    pub proof_valid: bool,
}

fn lower(w: &str) -> String {
    format!("{w}_l")
}
fn upper(w: &str) -> String {
    format!("{w}_u")
}

pub fn reduce_3dm(input: &ThreeDmInput) -> Result<ThreeDmReduction, BadInput> {
    let s = input.x.len();
    if s == 0 || input.y.len() != s || input.z.len() != s {
        return Err(BadInput(format!(
            "element sets must be nonempty and equal-sized, got {}/{}/{}",
            input.x.len(),
            input.y.len(),
            input.z.len()
        )));
    }
    let all: Vec<&String> = input
        .x
        .iter()
        .chain(&input.y)
        .chain(&input.z)
        .collect();
    let mut seen = BTreeSet::new();
    for w in &all {
        if !seen.insert(w.as_str()) {
            return Err(BadInput(format!("element '{w}' repeats")));
        }
        if w.as_str() == "r" {
            return Err(BadInput("element name 'r' is reserved for the root".into()));
        }
    }
    let xs: BTreeSet<&str> = input.x.iter().map(|s| s.as_str()).collect();
    let ys: BTreeSet<&str> = input.y.iter().map(|s| s.as_str()).collect();
    let zs: BTreeSet<&str> = input.z.iter().map(|s| s.as_str()).collect();
    let mut covered: BTreeSet<&str> = BTreeSet::new();
    let mut seen_triples = BTreeSet::new();
    for (jx, t) in input.triples.iter().enumerate() {
        if !xs.contains(t[0].as_str()) || !ys.contains(t[1].as_str()) || !zs.contains(t[2].as_str())
        {
            return Err(BadInput(format!(
                "triple {} must pick from x, y, z in order: {t:?}",
                jx + 1
            )));
        }
        if !seen_triples.insert(t.clone()) {
            return Err(BadInput(format!("triple {t:?} repeats")));
        }
        covered.extend(t.iter().map(|s| s.as_str()));
    }
    if let Some(w) = all.iter().find(|w| !covered.contains(w.as_str())) {
        return Err(BadInput(format!("element '{w}' is in no triple")));
    }

    let mut data = InstanceData {
        nodes: vec!["r".to_string()],
        edges: Vec::new(),
        preferences: std::collections::BTreeMap::new(),
    };
    let push = |data: &mut InstanceData, id: String, tail: String, head: String| {
        data.edges.push(EdgeData { id, tail, head });
    };
    for w in &all {
        data.nodes.push(lower(w));
        data.nodes.push(upper(w));
    }
    for w in &all {
        push(&mut data, format!("d_{w}_1"), upper(w), lower(w));
        push(&mut data, format!("d_{w}_2"), upper(w), lower(w));
        push(&mut data, format!("r_{w}_1"), "r".into(), lower(w));
        push(&mut data, format!("r_{w}_2"), "r".into(), lower(w));
        push(&mut data, format!("r_{w}_3"), "r".into(), upper(w));
        for w2 in &all {
            if w2 != w {
                push(&mut data, format!("u_{w2}_{w}"), upper(w2), upper(w));
            }
        }
    }
    for (jx, t) in input.triples.iter().enumerate() {
        let j = jx + 1;
        for w in t {
            push(&mut data, format!("t{j}_{w}_1"), lower(w), upper(w));
            push(&mut data, format!("t{j}_{w}_2"), lower(w), upper(w));
        }
    }

    for w in &all {
        let dom_lower = vec![
            (format!("d_{w}_1"), format!("r_{w}_1")),
            (format!("d_{w}_2"), format!("r_{w}_2")),
        ];
        data.preferences
            .insert(lower(w), PreferenceData::Partial { dominates: dom_lower });

        let mut dom = Vec::new();
        for w2 in &all {
            if w2 != w {
                dom.push((format!("u_{w2}_{w}"), format!("r_{w}_3")));
            }
        }
        for (jx, t) in input.triples.iter().enumerate() {
            if !t.iter().any(|e| e == *w) {
                continue;
            }
            let j = jx + 1;
            let tbar: BTreeSet<&str> = t.iter().map(|s| s.as_str()).collect();
            for w2 in &all {
                if w2 == w {
                    continue;
                }
                let inside = tbar.contains(w2.as_str());
                let stronger = if inside {
                    format!("t{j}_{w}_2")
                } else {
                    format!("t{j}_{w}_1")
                };
                dom.push((stronger, format!("u_{w2}_{w}")));
            }
            dom.push((format!("t{j}_{w}_1"), format!("r_{w}_3")));
            dom.push((format!("t{j}_{w}_2"), format!("r_{w}_3")));
        }
        data.preferences
            .insert(upper(w), PreferenceData::Partial { dominates: dom });
    }

    let inst = Instance::from_data(&data).map_err(|e| BadInput(format!("name clash: {e}")))?;
    let rooted = RootedInstance::adopt_root(inst, "r")
        .unwrap_or_else(|e| unreachable!("gadget root has in-degree 0: {e}"));
    Ok(ThreeDmReduction {
        rooted,
        triples: input.triples.clone(),
        proof_valid: s > 3,
    })
}

/// Map a perfect matching (triple indices into the reduction) to the proof's
/// arborescence and dual family of `4|X|` sets; validating the certificate
/// yields the margin bound `2|X|`.
pub fn matching_to_certificate(
    red: &ThreeDmReduction,
    matching: &[usize],
) -> Result<(Arborescence, DualCertificate), BadInput> {
    let inst = red.rooted.instance();
    let s = (red.rooted.n()) / 6;
    if matching.len() != s {
        return Err(BadInput(format!(
            "a perfect matching has {s} triples, got {}",
            matching.len()
        )));
    }
    let mut covered: BTreeSet<&str> = BTreeSet::new();
    for &j in matching {
        let t = red
            .triples
            .get(j)
            .ok_or_else(|| BadInput(format!("triple index {j} out of range")))?;
        for w in t {
            if !covered.insert(w.as_str()) {
                return Err(BadInput(format!("element '{w}' is matched twice")));
            }
        }
    }

    let mut ids: Vec<String> = Vec::new();
    let mut cert: DualCertificate = BTreeSet::new();
    for v in red.rooted.ordinary_nodes() {
        let name = inst.node_name(v);
        if let Some(w) = name.strip_suffix("_l") {
            ids.push(format!("r_{w}_1"));
        } else if name.ends_with("_u") {
            cert.insert([name.clone()].into_iter().collect());
        }
    }
    for &j in matching {
        let t = &red.triples[j];
        for w in t {
            ids.push(format!("t{}_{w}_1", j + 1));
        }
        cert.insert(
            t.iter()
                .flat_map(|w| [lower(w), upper(w)])
                .collect::<BTreeSet<NodeId>>(),
        );
    }
    let b = Branching::from_edges(inst, ids.iter().map(|s| s.as_str()))
        .unwrap_or_else(|e| unreachable!("matching edges form a branching: {e}"));
    let arb = Arborescence::new(&red.rooted, b)
        .unwrap_or_else(|e| unreachable!("matching arborescence spans: {e}"));
    Ok((arb, cert))
}
