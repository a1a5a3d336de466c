//! Input model: digraphs whose nodes rank their incoming edges.
//!
//! Two layers:
//!
//! - [`InstanceData`] is the raw JSON schema (serde). Preferences are given either
//!   as a weak ranking (`{"kind":"weak","ranks":{...}}`, smaller rank = better) or
//!   as a strict-dominance list (`{"kind":"partial","dominates":[[better,worse],...]}`).
//! - [`Instance`] is the validated, canonicalized form: nodes and edges sorted,
//!   dominance relations transitively closed, and every node classified as
//!   strict / weak / partial *semantically* (a dominance list that happens to encode
//!   a total order classifies as strict).
//!
//! [`augment_root`](Instance::augment_root) adds a dummy root `r` with a
//! least-preferred edge into every node; branchings of the original graph then
//! correspond exactly to `r`-arborescences of the augmented graph, preserving all
//! popularity measures. [`RootedInstance::adopt_root`] instead designates an
//! existing in-degree-0 node as the root, for instances that carry their own root
//! structure (the hardness gadgets do).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type NodeId = String;
pub type EdgeId = String;

// ---------------------------------------------------------------------------
// Raw JSON schema
// ---------------------------------------------------------------------------

/// Raw instance as read from / written to JSON.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct InstanceData {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<EdgeData>,
    /// Per-node preference over *incoming* edges. Nodes may be omitted: an
    /// omitted node considers all its incoming edges tied.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub preferences: BTreeMap<NodeId, PreferenceData>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct EdgeData {
    pub id: EdgeId,
    pub tail: NodeId,
    pub head: NodeId,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PreferenceData {
    /// Weak ranking: every incoming edge gets a rank >= 1, smaller is better,
    /// equal ranks are ties. Ranks need not be contiguous on input; they are
    /// compressed to dense 1..k form internally.
    Weak { ranks: BTreeMap<EdgeId, u32> },
    /// Partial order given by strict-dominance pairs `[better, worse]`.
    /// The transitive closure is taken at parse time; cycles are rejected.
    Partial { dominates: Vec<(EdgeId, EdgeId)> },
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// How a node's (or instance's) preference structure classifies, semantically.
/// `Strict` ⊂ `Weak` ⊂ `Partial`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrefClass {
    Strict,
    Weak,
    Partial,
}

impl fmt::Display for PrefClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrefClass::Strict => write!(f, "strict"),
            PrefClass::Weak => write!(f, "weak"),
            PrefClass::Partial => write!(f, "partial"),
        }
    }
}

/// Result of validating raw [`InstanceData`].
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    /// Human-readable violations; empty iff the data is a valid instance.
    pub violations: Vec<String>,
    /// Semantic class per node (only meaningful when `violations` is empty).
    pub node_classes: BTreeMap<NodeId, PrefClass>,
    /// The coarsest node class, i.e. the class of the instance as a whole.
    pub instance_class: Option<PrefClass>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("json: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("invalid instance: {0}")]
    Semantic(String),
}

// ---------------------------------------------------------------------------
// Validated instance
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    pub tail: usize,
    pub head: usize,
}

/// Per-node preference structure over the node's incoming edges, in terms of
/// positions within the node's sorted in-edge list.
#[derive(Debug, Clone, PartialEq, Eq)]
struct NodePrefs {
    /// `dom[a][b]` iff the in-edge at position `a` is strictly preferred to the
    /// one at position `b`. Irreflexive, transitive (closed at construction).
    dom: Vec<Vec<bool>>,
    /// Dense 1-based ranks iff the relation is semantically a weak ranking.
    ranks: Option<Vec<u32>>,
}

impl NodePrefs {
    fn class(&self) -> PrefClass {
        match &self.ranks {
            None => PrefClass::Partial,
            Some(r) => {
                let distinct: BTreeSet<u32> = r.iter().copied().collect();
                if distinct.len() == r.len() {
                    PrefClass::Strict
                } else {
                    PrefClass::Weak
                }
            }
        }
    }
}

/// A validated, canonicalized instance.
///
/// Nodes are sorted lexicographically, edges sorted by id; all adjacency lists
/// hold edge indices in ascending (= id-lexicographic) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    nodes: Vec<NodeId>,
    edges: Vec<Edge>,
    node_ix: BTreeMap<NodeId, usize>,
    edge_ix: BTreeMap<EdgeId, usize>,
    in_edges: Vec<Vec<usize>>,
    out_edges: Vec<Vec<usize>>,
    prefs: Vec<NodePrefs>,
    instance_class: PrefClass,
}

/// Outcome of asking node `v` to compare two incoming options.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    PrefersFirst,
    PrefersSecond,
    /// Tie or incomparable (also returned when both options are the same edge).
    Neither,
}

#[derive(Debug, Error)]
pub enum CompareError {
    #[error("edge '{edge}' is not an incoming edge of node '{node}'")]
    WrongHead { node: NodeId, edge: EdgeId },
    #[error("unknown node '{0}'")]
    UnknownNode(NodeId),
    #[error("unknown edge '{0}'")]
    UnknownEdge(EdgeId),
}

/// Validate raw data, reporting all violations and per-node semantic classes.
pub fn validate(data: &InstanceData) -> ValidationReport {
    let mut violations = Vec::new();

    let mut node_set = BTreeSet::new();
    for n in &data.nodes {
        if !node_set.insert(n.clone()) {
            violations.push(format!("duplicate node id '{n}'"));
        }
    }

    let mut edge_set = BTreeSet::new();
    for e in &data.edges {
        if !edge_set.insert(e.id.clone()) {
            violations.push(format!("duplicate edge id '{}'", e.id));
        }
        if !node_set.contains(&e.tail) {
            violations.push(format!("edge '{}' has unknown tail '{}'", e.id, e.tail));
        }
        if !node_set.contains(&e.head) {
            violations.push(format!("edge '{}' has unknown head '{}'", e.id, e.head));
        }
        if e.tail == e.head {
            violations.push(format!("edge '{}' is a self-loop", e.id));
        }
    }

    // Incoming edges per node (only well-formed edges).
    let mut incoming: BTreeMap<&str, Vec<&EdgeData>> = BTreeMap::new();
    for e in &data.edges {
        if node_set.contains(&e.head) && node_set.contains(&e.tail) && e.tail != e.head {
            incoming.entry(e.head.as_str()).or_default().push(e);
        }
    }

    let mut node_classes = BTreeMap::new();

    for (node, pref) in &data.preferences {
        if !node_set.contains(node) {
            violations.push(format!("preferences given for unknown node '{node}'"));
            continue;
        }
        let inc: Vec<&EdgeId> = incoming
            .get(node.as_str())
            .map(|v| v.iter().map(|e| &e.id).collect())
            .unwrap_or_default();
        let inc_set: BTreeSet<&EdgeId> = inc.iter().copied().collect();
        match pref {
            PreferenceData::Weak { ranks } => {
                for (eid, rank) in ranks {
                    if !inc_set.contains(eid) {
                        violations.push(format!(
                            "node '{node}' ranks '{eid}', which is not one of its incoming edges"
                        ));
                    }
                    if *rank == 0 {
                        violations.push(format!("node '{node}' gives edge '{eid}' rank 0 (ranks start at 1)"));
                    }
                }
                for eid in &inc {
                    if !ranks.contains_key(*eid) {
                        violations.push(format!(
                            "node '{node}' has incoming edge '{eid}' without a rank"
                        ));
                    }
                }
            }
            PreferenceData::Partial { dominates } => {
                let mut ok_pairs = Vec::new();
                for (a, b) in dominates {
                    let mut pair_ok = true;
                    for eid in [a, b] {
                        if !inc_set.contains(eid) {
                            violations.push(format!(
                                "node '{node}' dominance references '{eid}', which is not one of its incoming edges"
                            ));
                            pair_ok = false;
                        }
                    }
                    if a == b {
                        violations.push(format!(
                            "node '{node}' has reflexive dominance on edge '{a}'"
                        ));
                        pair_ok = false;
                    }
                    if pair_ok {
                        ok_pairs.push((a.clone(), b.clone()));
                    }
                }
                // Detect cycles: transitive closure must stay irreflexive.
                let ids: Vec<&EdgeId> = inc_set.iter().copied().collect();
                let pos: BTreeMap<&EdgeId, usize> =
                    ids.iter().enumerate().map(|(i, e)| (*e, i)).collect();
                let k = ids.len();
                let mut dom = vec![vec![false; k]; k];
                for (a, b) in &ok_pairs {
                    dom[pos[a]][pos[b]] = true;
                }
                warshall(&mut dom);
                for (i, row) in dom.iter().enumerate() {
                    if row[i] {
                        violations.push(format!(
                            "node '{node}' has cyclic dominance involving edge '{}'",
                            ids[i]
                        ));
                    }
                }
            }
        }
    }

    if !violations.is_empty() {
        return ValidationReport {
            violations,
            node_classes,
            instance_class: None,
        };
    }

    // Classify every node (including ones without a preference entry).
    let mut worst = PrefClass::Strict;
    for node in &data.nodes {
        let inc: Vec<&EdgeId> = incoming
            .get(node.as_str())
            .map(|v| v.iter().map(|e| &e.id).collect())
            .unwrap_or_default();
        let class = classify_node(node, data.preferences.get(node), &inc);
        worst = worst.max(class);
        node_classes.insert(node.clone(), class);
    }

    ValidationReport {
        violations,
        node_classes,
        instance_class: Some(worst),
    }
}

/// Semantic class of one node, assuming the data already validated clean.
fn classify_node(_node: &NodeId, pref: Option<&PreferenceData>, inc: &[&EdgeId]) -> PrefClass {
    let k = inc.len();
    match pref {
        None => {
            // All incoming edges tied.
            if k <= 1 {
                PrefClass::Strict
            } else {
                PrefClass::Weak
            }
        }
        Some(PreferenceData::Weak { ranks }) => {
            let vals: BTreeSet<u32> = inc.iter().map(|e| ranks[*e]).collect();
            if vals.len() == k {
                PrefClass::Strict
            } else {
                PrefClass::Weak
            }
        }
        Some(PreferenceData::Partial { dominates }) => {
            let pos: BTreeMap<&EdgeId, usize> =
                inc.iter().enumerate().map(|(i, e)| (*e, i)).collect();
            let mut dom = vec![vec![false; k]; k];
            for (a, b) in dominates {
                dom[pos[a]][pos[b]] = true;
            }
            warshall(&mut dom);
            match weak_levels(&dom) {
                Some(levels) => {
                    let vals: BTreeSet<u32> = levels.iter().copied().collect();
                    if vals.len() == k {
                        PrefClass::Strict
                    } else {
                        PrefClass::Weak
                    }
                }
                None => PrefClass::Partial,
            }
        }
    }
}

/// Transitive closure in place.
fn warshall(dom: &mut [Vec<bool>]) {
    let k = dom.len();
    for mid in 0..k {
        for a in 0..k {
            if dom[a][mid] {
                for b in 0..k {
                    if dom[mid][b] {
                        dom[a][b] = true;
                    }
                }
            }
        }
    }
}

/// If `dom` is a weak order (incomparability transitive), return dense 1-based
/// levels such that `a ≻ b ⟺ level(a) < level(b)`; otherwise `None`.
fn weak_levels(dom: &[Vec<bool>]) -> Option<Vec<u32>> {
    let k = dom.len();
    // Candidate level: number of strict dominators.
    let mut raw = vec![0usize; k];
    for b in 0..k {
        raw[b] = (0..k).filter(|&a| dom[a][b]).count();
    }
    for a in 0..k {
        for b in 0..k {
            if a != b && dom[a][b] != (raw[a] < raw[b]) {
                return None;
            }
        }
    }
    // Compress to dense 1..=t.
    let distinct: Vec<usize> = {
        let s: BTreeSet<usize> = raw.iter().copied().collect();
        s.into_iter().collect()
    };
    Some(
        raw.iter()
            .map(|r| (distinct.binary_search(r).unwrap() + 1) as u32)
            .collect(),
    )
}

impl Instance {
    /// Build a validated instance, or report the (joined) violations.
    pub fn from_data(data: &InstanceData) -> Result<Instance, ParseError> {
        let report = validate(data);
        if !report.is_valid() {
            return Err(ParseError::Semantic(report.violations.join("; ")));
        }

        let mut nodes: Vec<NodeId> = data.nodes.clone();
        nodes.sort();
        let node_ix: BTreeMap<NodeId, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();

        let mut raw_edges: Vec<&EdgeData> = data.edges.iter().collect();
        raw_edges.sort_by(|a, b| a.id.cmp(&b.id));
        let edges: Vec<Edge> = raw_edges
            .iter()
            .map(|e| Edge {
                id: e.id.clone(),
                tail: node_ix[&e.tail],
                head: node_ix[&e.head],
            })
            .collect();
        let edge_ix: BTreeMap<EdgeId, usize> = edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.clone(), i))
            .collect();

        let mut in_edges = vec![Vec::new(); nodes.len()];
        let mut out_edges = vec![Vec::new(); nodes.len()];
        for (i, e) in edges.iter().enumerate() {
            in_edges[e.head].push(i);
            out_edges[e.tail].push(i);
        }
        // Edge indices are already in id order, so the pushes above are sorted.

        let mut prefs = Vec::with_capacity(nodes.len());
        let mut worst = PrefClass::Strict;
        for (v, name) in nodes.iter().enumerate() {
            let inc = &in_edges[v];
            let k = inc.len();
            let mut dom = vec![vec![false; k]; k];
            match data.preferences.get(name) {
                None => {
                    // all tied: dom stays empty
                }
                Some(PreferenceData::Weak { ranks }) => {
                    let r: Vec<u32> = inc.iter().map(|&e| ranks[&edges[e].id]).collect();
                    for a in 0..k {
                        for b in 0..k {
                            dom[a][b] = r[a] < r[b];
                        }
                    }
                }
                Some(PreferenceData::Partial { dominates }) => {
                    let pos: BTreeMap<&EdgeId, usize> = inc
                        .iter()
                        .enumerate()
                        .map(|(p, &e)| (&edges[e].id, p))
                        .collect();
                    for (a, b) in dominates {
                        dom[pos[a]][pos[b]] = true;
                    }
                    warshall(&mut dom);
                }
            }
            let ranks = weak_levels(&dom);
            let np = NodePrefs { dom, ranks };
            worst = worst.max(np.class());
            prefs.push(np);
        }

        Ok(Instance {
            nodes,
            edges,
            node_ix,
            edge_ix,
            in_edges,
            out_edges,
            prefs,
            instance_class: worst,
        })
    }

    pub fn from_json(text: &str) -> Result<Instance, ParseError> {
        let data: InstanceData = serde_json::from_str(text)?;
        Instance::from_data(&data)
    }

    /// Canonical raw form: weak nodes emit dense ranks, genuinely partial nodes
    /// emit the closed dominance list; nodes without incoming edges are omitted.
    pub fn to_data(&self) -> InstanceData {
        let mut preferences = BTreeMap::new();
        for (v, name) in self.nodes.iter().enumerate() {
            let inc = &self.in_edges[v];
            if inc.is_empty() {
                continue;
            }
            let p = &self.prefs[v];
            let entry = match &p.ranks {
                Some(r) => PreferenceData::Weak {
                    ranks: inc
                        .iter()
                        .enumerate()
                        .map(|(pos, &e)| (self.edges[e].id.clone(), r[pos]))
                        .collect(),
                },
                None => {
                    let mut pairs = Vec::new();
                    for (a, row) in p.dom.iter().enumerate() {
                        for (b, &d) in row.iter().enumerate() {
                            if d {
                                pairs.push((
                                    self.edges[inc[a]].id.clone(),
                                    self.edges[inc[b]].id.clone(),
                                ));
                            }
                        }
                    }
                    pairs.sort();
                    PreferenceData::Partial { dominates: pairs }
                }
            };
            preferences.insert(name.clone(), entry);
        }
        InstanceData {
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeData {
                    id: e.id.clone(),
                    tail: self.nodes[e.tail].clone(),
                    head: self.nodes[e.head].clone(),
                })
                .collect(),
            preferences,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_data()).expect("instance serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_data()).expect("instance serializes")
    }

    // -- accessors ----------------------------------------------------------

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, ix: usize) -> &Edge {
        &self.edges[ix]
    }

    pub fn node_name(&self, ix: usize) -> &NodeId {
        &self.nodes[ix]
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.node_ix.get(name).copied()
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edge_ix.get(id).copied()
    }

    /// Incoming edge indices of `v`, ascending by edge id.
    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.in_edges[v]
    }

    /// Outgoing edge indices of `v`, ascending by edge id.
    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out_edges[v]
    }

    pub fn node_class(&self, v: usize) -> PrefClass {
        self.prefs[v].class()
    }

    pub fn instance_class(&self) -> PrefClass {
        self.instance_class
    }

    /// Dense 1-based rank of in-edge `e` at its head, if the head's preferences
    /// are semantically weak.
    pub fn rank_of(&self, e: usize) -> Option<u32> {
        let v = self.edges[e].head;
        let pos = self.in_pos(v, e)?;
        self.prefs[v].ranks.as_ref().map(|r| r[pos])
    }

    fn in_pos(&self, v: usize, e: usize) -> Option<usize> {
        self.in_edges[v].binary_search(&e).ok()
    }

    /// Does node `v` strictly prefer in-edge `a` to in-edge `b`?
    /// Both must be incoming edges of `v` (panics otherwise; use [`Instance::compare_ids`]
    /// for the checked, id-based form).
    pub fn prefers(&self, v: usize, a: usize, b: usize) -> bool {
        let pa = self.in_pos(v, a).expect("edge a enters v");
        let pb = self.in_pos(v, b).expect("edge b enters v");
        self.prefs[v].dom[pa][pb]
    }

    /// Compare two incoming edges of `v` by index.
    pub fn compare(&self, v: usize, a: usize, b: usize) -> Comparison {
        if a == b {
            return Comparison::Neither;
        }
        if self.prefers(v, a, b) {
            Comparison::PrefersFirst
        } else if self.prefers(v, b, a) {
            Comparison::PrefersSecond
        } else {
            Comparison::Neither
        }
    }

    /// Checked, id-based comparison (the public API surface for callers that
    /// hold ids rather than indices).
    pub fn compare_ids(&self, node: &str, a: &str, b: &str) -> Result<Comparison, CompareError> {
        let v = self
            .node_index(node)
            .ok_or_else(|| CompareError::UnknownNode(node.to_string()))?;
        let ea = self
            .edge_index(a)
            .ok_or_else(|| CompareError::UnknownEdge(a.to_string()))?;
        let eb = self
            .edge_index(b)
            .ok_or_else(|| CompareError::UnknownEdge(b.to_string()))?;
        for e in [ea, eb] {
            if self.edges[e].head != v {
                return Err(CompareError::WrongHead {
                    node: node.to_string(),
                    edge: self.edges[e].id.clone(),
                });
            }
        }
        Ok(self.compare(v, ea, eb))
    }
}

// ---------------------------------------------------------------------------
// Branchings and arborescences
// ---------------------------------------------------------------------------

#[derive(Debug, Error)]
pub enum BranchingError {
    #[error("unknown edge '{0}'")]
    UnknownEdge(EdgeId),
    #[error("node '{0}' has more than one incoming edge")]
    DuplicateHead(NodeId),
    #[error("edge set contains a directed cycle through node '{0}'")]
    Cycle(NodeId),
    #[error("node '{0}' has no incoming edge (arborescence must span)")]
    NotSpanning(NodeId),
    #[error("root '{0}' must not have an incoming edge")]
    RootHasParent(NodeId),
    #[error("no root edge available for node '{0}'")]
    NoRootEdge(NodeId),
}

/// A branching, stored as the chosen incoming edge per covered node.
/// Edge ids are the identity, so a branching ports between an instance and its
/// root-augmented form.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Branching {
    parent: BTreeMap<NodeId, EdgeId>,
}

impl Branching {
    /// Validate an edge-id set as a branching of `inst`: every edge exists,
    /// heads are pairwise distinct, and no directed cycle arises.
    pub fn from_edges<I, S>(inst: &Instance, edges: I) -> Result<Branching, BranchingError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut parent: BTreeMap<NodeId, EdgeId> = BTreeMap::new();
        let mut parent_ix: BTreeMap<usize, usize> = BTreeMap::new();
        for id in edges {
            let id = id.as_ref();
            let e = inst
                .edge_index(id)
                .ok_or_else(|| BranchingError::UnknownEdge(id.to_string()))?;
            let head = inst.edge(e).head;
            if parent_ix.insert(head, e).is_some() {
                return Err(BranchingError::DuplicateHead(
                    inst.node_name(head).clone(),
                ));
            }
            parent.insert(inst.node_name(head).clone(), inst.edge(e).id.clone());
        }
        // Cycle check by walking parent chains with tricolor marks.
        let mut state = vec![0u8; inst.n_nodes()]; // 0 unseen, 1 on stack, 2 done
        for start in 0..inst.n_nodes() {
            let mut v = start;
            let mut path = Vec::new();
            while state[v] == 0 {
                state[v] = 1;
                path.push(v);
                match parent_ix.get(&v) {
                    Some(&e) => v = inst.edge(e).tail,
                    None => break,
                }
            }
            // The walk stopped either at a parentless node (fine), in territory
            // already cleared by an earlier walk (state 2, fine), or back on the
            // current path (state 1 with a parent still to follow): a cycle.
            if state[v] == 1 && parent_ix.contains_key(&v) {
                return Err(BranchingError::Cycle(inst.node_name(v).clone()));
            }
            for u in path {
                state[u] = 2;
            }
        }
        Ok(Branching { parent })
    }

    /// Edge ids, ascending.
    pub fn edge_ids(&self) -> Vec<EdgeId> {
        let mut ids: Vec<EdgeId> = self.parent.values().cloned().collect();
        ids.sort();
        ids
    }

    pub fn parent_edge(&self, node: &str) -> Option<&EdgeId> {
        self.parent.get(node)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&NodeId, &EdgeId)> {
        self.parent.iter()
    }

    pub fn contains_edge(&self, node: &str, edge: &str) -> bool {
        self.parent.get(node).map(|e| e.as_str()) == Some(edge)
    }
}

/// A spanning arborescence of a rooted instance: every non-root node has exactly
/// one incoming edge, the root none, and the edge set is acyclic (hence every
/// node is reachable from the root).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arborescence {
    branching: Branching,
}

impl Arborescence {
    pub fn new(rooted: &RootedInstance, branching: Branching) -> Result<Self, BranchingError> {
        let inst = rooted.instance();
        let root_name = rooted.root_id();
        if branching.parent.contains_key(root_name) {
            return Err(BranchingError::RootHasParent(root_name.clone()));
        }
        for v in inst.nodes() {
            if v != root_name && !branching.parent.contains_key(v) {
                return Err(BranchingError::NotSpanning(v.clone()));
            }
        }
        Ok(Arborescence { branching })
    }

    pub fn branching(&self) -> &Branching {
        &self.branching
    }

    pub fn parent_edge(&self, node: &str) -> Option<&EdgeId> {
        self.branching.parent_edge(node)
    }

    pub fn edge_ids(&self) -> Vec<EdgeId> {
        self.branching.edge_ids()
    }
}

// ---------------------------------------------------------------------------
// Rooted instances
// ---------------------------------------------------------------------------

pub const ROOT_ID: &str = "r";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootKind {
    /// Dummy root added by [`Instance::augment_root`]; every ordinary node has a
    /// synthesized, least-preferred root edge.
    Augmented,
    /// An existing in-degree-0 node designated as root; root edges (if any) are
    /// ordinary edges of the instance.
    Adopted,
}

#[derive(Debug, Error)]
pub enum RootError {
    #[error("node id '{}' already used by the instance", ROOT_ID)]
    IdClash,
    #[error("designated root '{0}' is not a node of the instance")]
    NoSuchRoot(NodeId),
    #[error("designated root '{0}' has incoming edges")]
    RootHasIncoming(NodeId),
}

/// An instance together with a distinguished root node, over which branchings of
/// the original graph correspond to root-arborescences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedInstance {
    inst: Instance,
    root: usize,
    kind: RootKind,
    /// Canonical root edge per ordinary node index: for augmented roots the
    /// synthesized edge (always present); for adopted roots the id-smallest
    /// root-tailed edge into the node, when one exists.
    root_edge_of: BTreeMap<usize, usize>,
}

impl Instance {
    /// Add a dummy root `r` with one new least-preferred edge into every node.
    ///
    /// Weak nodes rank the root edge strictly below everything (max rank + 1);
    /// partial nodes get dominance pairs `(e, root_edge)` for every existing
    /// incoming edge `e`. Nodes without incoming edges receive the root edge as
    /// their only (hence top) choice.
    pub fn augment_root(&self) -> Result<RootedInstance, RootError> {
        if self.node_ix.contains_key(ROOT_ID) {
            return Err(RootError::IdClash);
        }
        let mut data = self.to_data();
        data.nodes.push(ROOT_ID.to_string());
        let mut synthesized: BTreeMap<NodeId, EdgeId> = BTreeMap::new();
        for v in &self.nodes {
            let mut id = format!("r->{v}");
            let mut k = 1usize;
            while self.edge_ix.contains_key(&id) {
                k += 1;
                id = format!("r->{v}#{k}");
            }
            data.edges.push(EdgeData {
                id: id.clone(),
                tail: ROOT_ID.to_string(),
                head: v.clone(),
            });
            synthesized.insert(v.clone(), id);
        }
        for (vix, v) in self.nodes.iter().enumerate() {
            let root_edge = synthesized[v].clone();
            let inc = &self.in_edges[vix];
            let entry = match data.preferences.remove(v) {
                Some(PreferenceData::Weak { mut ranks }) => {
                    let worst = ranks.values().copied().max().unwrap_or(0);
                    ranks.insert(root_edge, worst + 1);
                    PreferenceData::Weak { ranks }
                }
                Some(PreferenceData::Partial { mut dominates }) => {
                    for &e in inc {
                        dominates.push((self.edges[e].id.clone(), root_edge.clone()));
                    }
                    dominates.sort();
                    PreferenceData::Partial { dominates }
                }
                None => {
                    // Node had no incoming edges (in-degree 0) or was all-tied;
                    // to_data() always emits an entry for nodes with incoming
                    // edges, so this is the in-degree-0 case.
                    let mut ranks = BTreeMap::new();
                    ranks.insert(root_edge, 1);
                    PreferenceData::Weak { ranks }
                }
            };
            data.preferences.insert(v.clone(), entry);
        }
        let inst = Instance::from_data(&data)
            .expect("root augmentation of a valid instance stays valid");
        let root = inst.node_index(ROOT_ID).unwrap();
        let root_edge_of = self
            .nodes
            .iter()
            .map(|v| {
                (
                    inst.node_index(v).unwrap(),
                    inst.edge_index(&synthesized[v]).unwrap(),
                )
            })
            .collect();
        Ok(RootedInstance {
            inst,
            root,
            kind: RootKind::Augmented,
            root_edge_of,
        })
    }
}

impl RootedInstance {
    /// Designate an existing in-degree-0 node of `inst` as the root.
    pub fn adopt_root(inst: Instance, root_id: &str) -> Result<RootedInstance, RootError> {
        let root = inst
            .node_index(root_id)
            .ok_or_else(|| RootError::NoSuchRoot(root_id.to_string()))?;
        if !inst.in_edges(root).is_empty() {
            return Err(RootError::RootHasIncoming(root_id.to_string()));
        }
        let mut root_edge_of = BTreeMap::new();
        for &e in inst.out_edges(root) {
            // out_edges is ascending by id, so the first hit per head is the
            // id-smallest root edge into that head.
            root_edge_of.entry(inst.edge(e).head).or_insert(e);
        }
        Ok(RootedInstance {
            inst,
            root,
            kind: RootKind::Adopted,
            root_edge_of,
        })
    }

    /// The full instance, root and root edges included.
    pub fn instance(&self) -> &Instance {
        &self.inst
    }

    pub fn root_ix(&self) -> usize {
        self.root
    }

    pub fn root_id(&self) -> &NodeId {
        self.inst.node_name(self.root)
    }

    pub fn kind(&self) -> RootKind {
        self.kind
    }

    /// Number of ordinary (non-root) nodes.
    pub fn n(&self) -> usize {
        self.inst.n_nodes() - 1
    }

    /// Ordinary node indices, ascending.
    pub fn ordinary_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.inst.n_nodes()).filter(move |&v| v != self.root)
    }

    pub fn is_root_edge(&self, e: usize) -> bool {
        self.inst.edge(e).tail == self.root
    }

    /// Canonical root edge into ordinary node `v`, if any.
    pub fn root_edge_of(&self, v: usize) -> Option<usize> {
        self.root_edge_of.get(&v).copied()
    }

    /// Complete a branching of the *original* instance into a spanning
    /// root-arborescence by attaching every parentless node to the root.
    /// Requires every ordinary node to have a root edge (always true for
    /// augmented roots).
    pub fn arborify(&self, b: &Branching) -> Result<Arborescence, BranchingError> {
        let mut ids: Vec<EdgeId> = Vec::new();
        for v in self.ordinary_nodes() {
            let name = self.inst.node_name(v);
            match b.parent_edge(name) {
                Some(e) => ids.push(e.clone()),
                None => {
                    let e = self
                        .root_edge_of(v)
                        .ok_or_else(|| BranchingError::NoRootEdge(name.clone()))?;
                    ids.push(self.inst.edge(e).id.clone());
                }
            }
        }
        let branching = Branching::from_edges(&self.inst, ids.iter())?;
        Arborescence::new(self, branching)
    }

    /// Drop root edges from an arborescence, leaving a branching of the
    /// original instance.
    pub fn strip_root(&self, arb: &Arborescence) -> Branching {
        let mut parent = BTreeMap::new();
        for (node, eid) in arb.branching().iter() {
            let e = self.inst.edge_index(eid).expect("arborescence edge exists");
            if !self.is_root_edge(e) {
                parent.insert(node.clone(), eid.clone());
            }
        }
        Branching { parent }
    }

    /// The original instance with the root node and its outgoing edges removed.
    pub fn project(&self) -> Instance {
        let data = self.inst.to_data();
        let root_name = self.root_id().clone();
        let kept: Vec<EdgeData> = data
            .edges
            .into_iter()
            .filter(|e| e.tail != root_name && e.head != root_name)
            .collect();
        let kept_ids: BTreeSet<&EdgeId> = kept.iter().map(|e| &e.id).collect();
        let nodes = data
            .nodes
            .into_iter()
            .filter(|n| *n != root_name)
            .collect();
        let mut preferences = BTreeMap::new();
        for (node, pref) in data.preferences {
            if node == root_name {
                continue;
            }
            let entry = match pref {
                PreferenceData::Weak { ranks } => {
                    let ranks: BTreeMap<EdgeId, u32> = ranks
                        .into_iter()
                        .filter(|(e, _)| kept_ids.contains(e))
                        .collect();
                    if ranks.is_empty() {
                        continue;
                    }
                    PreferenceData::Weak { ranks }
                }
                PreferenceData::Partial { dominates } => {
                    let dominates: Vec<(EdgeId, EdgeId)> = dominates
                        .into_iter()
                        .filter(|(a, b)| kept_ids.contains(a) && kept_ids.contains(b))
                        .collect();
                    PreferenceData::Partial { dominates }
                }
            };
            preferences.insert(node, entry);
        }
        let data = InstanceData {
            nodes,
            edges: kept,
            preferences,
        };
        Instance::from_data(&data).expect("projection of a valid instance stays valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{four_cycle, star3};

    #[test]
    fn parse_validate_roundtrip() {
        let inst = four_cycle();
        assert_eq!(inst.n_nodes(), 4);
        assert_eq!(inst.n_edges(), 8);
        assert_eq!(inst.instance_class(), PrefClass::Strict);
        let text = inst.to_json();
        let again = Instance::from_json(&text).unwrap();
        assert_eq!(inst, again);
    }

    #[test]
    fn semantic_classification_sees_through_encodings() {
        // A dominance list that happens to be a total order classifies strict.
        let data: InstanceData = serde_json::from_str(
            r#"{
              "nodes": ["a", "b", "c"],
              "edges": [
                {"id": "ba", "tail": "b", "head": "a"},
                {"id": "ca", "tail": "c", "head": "a"}
              ],
              "preferences": {
                "a": {"kind": "partial", "dominates": [["ba", "ca"]]}
              }
            }"#,
        )
        .unwrap();
        let report = validate(&data);
        assert!(report.is_valid(), "{:?}", report.violations);
        assert_eq!(report.node_classes["a"], PrefClass::Strict);
        assert_eq!(report.instance_class, Some(PrefClass::Strict));

        let inst = Instance::from_data(&data).unwrap();
        // Canonical form re-emits it as a weak ranking.
        match &inst.to_data().preferences["a"] {
            PreferenceData::Weak { ranks } => {
                assert_eq!(ranks["ba"], 1);
                assert_eq!(ranks["ca"], 2);
            }
            other => panic!("expected weak canonical form, got {other:?}"),
        }
    }

    #[test]
    fn genuinely_partial_is_detected() {
        // a ≻ b, a ≻ c, but b and c incomparable to each other AND d incomparable
        // to a — intransitive incomparability (d~a, a~? ...). Simplest: x≻y, z
        // incomparable to both but y ~ z and x ~ z, x ≻ y ⇒ incomparability not
        // transitive (z~x, x≻y, z~y is fine for partial but violates weakness when
        // levels collide).
        let data: InstanceData = serde_json::from_str(
            r#"{
              "nodes": ["a", "b", "c", "v"],
              "edges": [
                {"id": "e1", "tail": "a", "head": "v"},
                {"id": "e2", "tail": "b", "head": "v"},
                {"id": "e3", "tail": "c", "head": "v"}
              ],
              "preferences": {
                "v": {"kind": "partial", "dominates": [["e1", "e2"]]}
              }
            }"#,
        )
        .unwrap();
        let report = validate(&data);
        assert!(report.is_valid());
        assert_eq!(report.node_classes["v"], PrefClass::Partial);
        let inst = Instance::from_data(&data).unwrap();
        assert_eq!(inst.instance_class(), PrefClass::Partial);
        // e1 ≻ e2, everything else incomparable.
        assert_eq!(inst.compare_ids("v", "e1", "e2").unwrap(), Comparison::PrefersFirst);
        assert_eq!(inst.compare_ids("v", "e2", "e1").unwrap(), Comparison::PrefersSecond);
        assert_eq!(inst.compare_ids("v", "e1", "e3").unwrap(), Comparison::Neither);
        assert_eq!(inst.compare_ids("v", "e3", "e2").unwrap(), Comparison::Neither);
    }

    #[test]
    fn validation_catches_malformed_input() {
        let data: InstanceData = serde_json::from_str(
            r#"{
              "nodes": ["a", "a", "b"],
              "edges": [
                {"id": "e1", "tail": "a", "head": "b"},
                {"id": "e1", "tail": "b", "head": "a"},
                {"id": "e2", "tail": "a", "head": "a"},
                {"id": "e3", "tail": "a", "head": "zzz"}
              ],
              "preferences": {
                "ghost": {"kind": "weak", "ranks": {}},
                "b": {"kind": "weak", "ranks": {"e1": 0}}
              }
            }"#,
        )
        .unwrap();
        let report = validate(&data);
        let text = report.violations.join("\n");
        assert!(text.contains("duplicate node id 'a'"), "{text}");
        assert!(text.contains("duplicate edge id 'e1'"), "{text}");
        assert!(text.contains("self-loop"), "{text}");
        assert!(text.contains("unknown head 'zzz'"), "{text}");
        assert!(text.contains("unknown node 'ghost'"), "{text}");
        assert!(text.contains("rank 0"), "{text}");
        assert!(Instance::from_data(&data).is_err());
    }

    #[test]
    fn cyclic_dominance_rejected() {
        let data: InstanceData = serde_json::from_str(
            r#"{
              "nodes": ["a", "b", "c", "v"],
              "edges": [
                {"id": "e1", "tail": "a", "head": "v"},
                {"id": "e2", "tail": "b", "head": "v"},
                {"id": "e3", "tail": "c", "head": "v"}
              ],
              "preferences": {
                "v": {"kind": "partial",
                      "dominates": [["e1","e2"],["e2","e3"],["e3","e1"]]}
              }
            }"#,
        )
        .unwrap();
        let report = validate(&data);
        assert!(!report.is_valid());
        assert!(report.violations.iter().any(|v| v.contains("cyclic dominance")));
    }

    #[test]
    fn missing_rank_and_foreign_edge_rejected() {
        let data: InstanceData = serde_json::from_str(
            r#"{
              "nodes": ["a", "b", "c"],
              "edges": [
                {"id": "ab", "tail": "a", "head": "b"},
                {"id": "cb", "tail": "c", "head": "b"},
                {"id": "ac", "tail": "a", "head": "c"}
              ],
              "preferences": {
                "b": {"kind": "weak", "ranks": {"ab": 1, "ac": 2}}
              }
            }"#,
        )
        .unwrap();
        let report = validate(&data);
        let text = report.violations.join("\n");
        assert!(text.contains("'ac', which is not one of its incoming edges"), "{text}");
        assert!(text.contains("incoming edge 'cb' without a rank"), "{text}");
    }

    #[test]
    fn sparse_ranks_compress_dense() {
        let data: InstanceData = serde_json::from_str(
            r#"{
              "nodes": ["a", "b", "v"],
              "edges": [
                {"id": "e1", "tail": "a", "head": "v"},
                {"id": "e2", "tail": "b", "head": "v"}
              ],
              "preferences": {
                "v": {"kind": "weak", "ranks": {"e1": 3, "e2": 7}}
              }
            }"#,
        )
        .unwrap();
        let inst = Instance::from_data(&data).unwrap();
        let e1 = inst.edge_index("e1").unwrap();
        let e2 = inst.edge_index("e2").unwrap();
        assert_eq!(inst.rank_of(e1), Some(1));
        assert_eq!(inst.rank_of(e2), Some(2));
    }

    #[test]
    fn augment_root_shapes() {
        let inst = star3();
        let rooted = inst.augment_root().unwrap();
        assert_eq!(rooted.n(), 3);
        assert_eq!(rooted.instance().n_nodes(), 4);
        assert_eq!(rooted.instance().n_edges(), 2 + 3);
        assert_eq!(rooted.kind(), RootKind::Augmented);
        // Root edge is strictly worst at b: the real edge beats it.
        let ri = rooted.instance();
        let b = ri.node_index("b").unwrap();
        let ab = ri.edge_index("ab").unwrap();
        let rb = rooted.root_edge_of(b).unwrap();
        assert_eq!(ri.compare(b, ab, rb), Comparison::PrefersFirst);
        // 'a' has in-degree 0 originally: root edge is its only, top choice.
        let a = ri.node_index("a").unwrap();
        assert_eq!(ri.in_edges(a).len(), 1);
        // Projection gives back the original instance.
        assert_eq!(rooted.project(), inst);
    }

    #[test]
    fn augment_root_id_clash() {
        let data: InstanceData = serde_json::from_str(
            r#"{"nodes": ["r", "x"], "edges": [{"id": "rx", "tail": "r", "head": "x"}]}"#,
        )
        .unwrap();
        let inst = Instance::from_data(&data).unwrap();
        assert!(matches!(inst.augment_root(), Err(RootError::IdClash)));
        // But such an instance can adopt its own root.
        let rooted = RootedInstance::adopt_root(inst, "r").unwrap();
        assert_eq!(rooted.kind(), RootKind::Adopted);
        assert_eq!(rooted.n(), 1);
    }

    #[test]
    fn adopt_root_requires_indegree_zero() {
        let inst = star3();
        assert!(matches!(
            RootedInstance::adopt_root(inst.clone(), "b"),
            Err(RootError::RootHasIncoming(_))
        ));
        assert!(matches!(
            RootedInstance::adopt_root(inst.clone(), "nope"),
            Err(RootError::NoSuchRoot(_))
        ));
        assert!(RootedInstance::adopt_root(inst, "a").is_ok());
    }

    #[test]
    fn branching_validation() {
        let inst = four_cycle();
        // Valid: a->b, a->c, c->d.
        let b = Branching::from_edges(&inst, ["ab", "ac", "cd"]).unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!(b.parent_edge("b"), Some(&"ab".to_string()));
        // Two edges into the same head.
        assert!(matches!(
            Branching::from_edges(&inst, ["ab", "db"]),
            Err(BranchingError::DuplicateHead(_))
        ));
        // 2-cycle a <-> b.
        assert!(matches!(
            Branching::from_edges(&inst, ["ab", "ba"]),
            Err(BranchingError::Cycle(_))
        ));
        // Unknown edge.
        assert!(matches!(
            Branching::from_edges(&inst, ["nope"]),
            Err(BranchingError::UnknownEdge(_))
        ));
    }

    #[test]
    fn arborify_and_strip() {
        let inst = four_cycle();
        let rooted = inst.augment_root().unwrap();
        let b = Branching::from_edges(&inst, ["ab", "ac", "cd"]).unwrap();
        let arb = rooted.arborify(&b).unwrap();
        assert_eq!(arb.edge_ids().len(), 4); // 3 real + 1 root edge into 'a'
        assert!(arb.parent_edge("a").unwrap().starts_with("r->"));
        let back = rooted.strip_root(&arb);
        assert_eq!(back, b);
    }

    #[test]
    fn arborescence_must_span_and_be_acyclic() {
        let inst = four_cycle();
        let rooted = inst.augment_root().unwrap();
        let partial = Branching::from_edges(rooted.instance(), ["ab"]).unwrap();
        assert!(matches!(
            Arborescence::new(&rooted, partial),
            Err(BranchingError::NotSpanning(_))
        ));
    }
}
