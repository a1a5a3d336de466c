//! Shared fixtures for unit tests.

use crate::instance::{Instance, InstanceData};

/// The canonical 4-node instance without a popular branching.
///
/// `a`/`b` are each other's first choices, `c`/`d` are each other's first
/// choices, `a`/`c` are each other's second choices, `b`/`d` are each other's
/// second choices. All rankings strict. Minimum unpopularity margin 1, minimum
/// unpopularity factor 2.
pub fn four_cycle() -> Instance {
    let data: InstanceData = serde_json::from_str(
        r#"{
          "nodes": ["a", "b", "c", "d"],
          "edges": [
            {"id": "ab", "tail": "a", "head": "b"},
            {"id": "ba", "tail": "b", "head": "a"},
            {"id": "cd", "tail": "c", "head": "d"},
            {"id": "dc", "tail": "d", "head": "c"},
            {"id": "ac", "tail": "a", "head": "c"},
            {"id": "ca", "tail": "c", "head": "a"},
            {"id": "bd", "tail": "b", "head": "d"},
            {"id": "db", "tail": "d", "head": "b"}
          ],
          "preferences": {
            "a": {"kind": "weak", "ranks": {"ba": 1, "ca": 2}},
            "b": {"kind": "weak", "ranks": {"ab": 1, "db": 2}},
            "c": {"kind": "weak", "ranks": {"dc": 1, "ac": 2}},
            "d": {"kind": "weak", "ranks": {"cd": 1, "bd": 2}}
          }
        }"#,
    )
    .unwrap();
    Instance::from_data(&data).unwrap()
}

/// Tiny star: `a -> b`, `a -> c`; `a` has in-degree 0. The unique spanning
/// branching {ab, ac} is popular.
pub fn star3() -> Instance {
    let data: InstanceData = serde_json::from_str(
        r#"{
          "nodes": ["a", "b", "c"],
          "edges": [
            {"id": "ab", "tail": "a", "head": "b"},
            {"id": "ac", "tail": "a", "head": "c"}
          ]
        }"#,
    )
    .unwrap();
    Instance::from_data(&data).unwrap()
}

/// Two mutually-top 2-cycles plus a weakly-ranked tie, useful for weak-ranking
/// paths: `p`/`q` mutual top; `z` ties its two incoming edges from p and q.
pub fn weak_tie() -> Instance {
    let data: InstanceData = serde_json::from_str(
        r#"{
          "nodes": ["p", "q", "z"],
          "edges": [
            {"id": "pq", "tail": "p", "head": "q"},
            {"id": "qp", "tail": "q", "head": "p"},
            {"id": "pz", "tail": "p", "head": "z"},
            {"id": "qz", "tail": "q", "head": "z"}
          ],
          "preferences": {
            "p": {"kind": "weak", "ranks": {"qp": 1}},
            "q": {"kind": "weak", "ranks": {"pq": 1}},
            "z": {"kind": "weak", "ranks": {"pz": 1, "qz": 1}}
          }
        }"#,
    )
    .unwrap();
    Instance::from_data(&data).unwrap()
}
