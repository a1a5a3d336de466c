//! Popular branchings in preference-labeled digraphs.
//!
//! A *branching* of a digraph is an edge set in which every node has at most one
//! incoming edge and no directed cycle exists. When every node ranks its incoming
//! edges (weakly, strictly, or by an arbitrary partial order), a branching `B` is
//! *popular* if no other branching `B'` is preferred by more nodes than prefer `B`
//! in a head-to-head vote.
//!
//! This crate provides:
//!
//! - [`instance`]: the input model — digraphs with per-node preference orders over
//!   incoming edges, JSON (de)serialization, validation, and the dummy-root
//!   augmentation that turns branchings into root-arborescences.
//! - [`arborescence`]: a minimum-cost arborescence engine that also extracts an
//!   optimal *laminar* dual solution, the certificate machinery everything else
//!   builds on.
//! - [`popularity`]: pairwise comparison of branchings, unpopularity margins, the
//!   popularity test, and dual-certificate validation.
//! - [`solver`]: the combinatorial algorithm deciding whether a popular branching
//!   exists (constructing one plus a certificate when it does), and the
//!   minimum-unpopularity-margin solver for weak rankings.
//! - [`polytope`]: structural description of all popular branchings under weak
//!   rankings — restricted edge set, membership test, minimum-cost popular
//!   branching, and LP emitters for the popular-arborescence face.
//! - [`factor`]: unpopularity *factor* bounds for strict rankings — a
//!   low-factor branching with a layered certificate, plus the exact optimum.
//! - [`mixed`]: popular *mixed* branchings (probability distributions over
//!   branchings) via exact-rational LP with constraint generation.
//! - [`generators`]: seeded random instances, a tight lower-bound family for the
//!   unpopularity factor, and hardness gadgets reducing 3-dimensional matching,
//!   3-SAT, and Hamiltonian path to popularity questions.
//! - [`oracle`]: brute-force enumeration oracles used to cross-check the solvers
//!   on small instances.
//! - [`report`]: the JSON result documents shared by the command-line tool and
//!   the Python bindings.

pub mod arborescence;
pub mod factor;
pub mod generators;
pub mod instance;
pub mod mixed;
pub mod oracle;
pub mod polytope;
pub mod popularity;
pub mod report;
pub mod solver;

mod maxflow;
mod simplex;

#[cfg(test)]
pub(crate) mod testutil;
