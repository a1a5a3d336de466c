//! Python extension module for popular branchings in preference-labeled
//! digraphs.
//!
//! Solver operations return the same result documents as the command-line
//! tool — both delegate to [`popbranch::report`] — materialized here as
//! native Python dicts and lists.

use std::collections::BTreeSet;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyList, PyString};

use popbranch::factor::FactorError;
use popbranch::generators::{
    complete_top_instance as core_complete_top,
    hampath::reduce_hampath as core_reduce_hampath,
    random_instance as core_random,
    sat::reduce_3sat,
    threedm::{reduce_3dm as core_reduce_3dm, ThreeDmInput},
    tight_factor_instance as core_tight_factor, PrefModel,
};
use popbranch::instance::{
    Arborescence, Branching, Instance as CoreInstance, InstanceData, RootError, RootedInstance,
};
use popbranch::mixed::{MixedError, DEFAULT_MIXED_BUDGET};
use popbranch::oracle::DEFAULT_ENUMERATION_BUDGET;
use popbranch::polytope::{emit_extended_lp, emit_face_lp, DEFAULT_FACE_CUTOFF};
use popbranch::popularity::{compare_branchings, DualCertificate};
use popbranch::report;
use serde_json::Value;

fn input_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn budget_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// Convert a JSON document into native Python objects.
fn json_to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => PyBool::new(py, *b).to_owned().into_any().unbind(),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.into_any().unbind()
            } else if let Some(u) = n.as_u64() {
                u.into_pyobject(py)?.into_any().unbind()
            } else {
                n.as_f64()
                    .unwrap_or(f64::NAN)
                    .into_pyobject(py)?
                    .into_any()
                    .unbind()
            }
        }
        Value::String(s) => PyString::new(py, s).into_any().unbind(),
        Value::Array(items) => {
            let objs = items
                .iter()
                .map(|x| json_to_py(py, x))
                .collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, objs)?.into_any().unbind()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, x) in map {
                dict.set_item(k, json_to_py(py, x)?)?;
            }
            dict.into_any().unbind()
        }
    })
}

/// A validated preference-labeled digraph.
///
/// Construct from instance JSON text; every solver method optionally takes
/// `root=<node>` to use an existing in-degree-0 node as the root instead of
/// augmenting with a synthetic one.
#[pyclass(frozen)]
struct Instance {
    inner: CoreInstance,
}

impl Instance {
    fn rooted(&self, root: Option<&str>) -> PyResult<RootedInstance> {
        match root {
            Some(name) => {
                RootedInstance::adopt_root(self.inner.clone(), name).map_err(input_err)
            }
            None => self.inner.augment_root().map_err(|e| match e {
                RootError::IdClash => PyValueError::new_err(
                    "instance already has a node 'r'; pass root='r' to use it as the root",
                ),
                other => input_err(other),
            }),
        }
    }

    fn arb(&self, rooted: &RootedInstance, edges: &[String]) -> PyResult<Arborescence> {
        let b = Branching::from_edges(rooted.instance(), edges.iter()).map_err(input_err)?;
        rooted.arborify(&b).map_err(input_err)
    }
}

#[pymethods]
impl Instance {
    /// Parse and validate instance JSON.
    #[new]
    fn new(json: &str) -> PyResult<Self> {
        Ok(Self {
            inner: CoreInstance::from_json(json).map_err(input_err)?,
        })
    }

    #[getter]
    fn n_nodes(&self) -> usize {
        self.inner.n_nodes()
    }

    #[getter]
    fn n_edges(&self) -> usize {
        self.inner.n_edges()
    }

    /// Preference structure: "strict", "weak", or "partial".
    #[getter]
    fn instance_class(&self) -> String {
        self.inner.instance_class().to_string()
    }

    /// Node names, sorted.
    fn nodes(&self) -> Vec<String> {
        self.inner.nodes().to_vec()
    }

    /// Edges as (id, tail, head) name triples, sorted by id.
    fn edges(&self) -> Vec<(String, String, String)> {
        self.inner
            .edges()
            .iter()
            .map(|e| {
                (
                    e.id.clone(),
                    self.inner.node_name(e.tail).clone(),
                    self.inner.node_name(e.head).clone(),
                )
            })
            .collect()
    }

    /// Canonical instance JSON, compact.
    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    /// Canonical instance JSON, pretty-printed.
    fn to_json_pretty(&self) -> String {
        self.inner.to_json_pretty()
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(n_nodes={}, n_edges={}, class='{}')",
            self.inner.n_nodes(),
            self.inner.n_edges(),
            self.inner.instance_class()
        )
    }

    /// Find a popular branching and its dual certificate.
    ///
    /// Returns `{"popular": True, "branching": […], "certificate": […]}` or
    /// `{"popular": False}`.
    #[pyo3(signature = (*, root=None))]
    fn solve(&self, py: Python<'_>, root: Option<&str>) -> PyResult<Py<PyAny>> {
        let rooted = self.rooted(root)?;
        let (value, _) = report::solve(&rooted);
        json_to_py(py, &value)
    }

    /// Check a branching (a list of edge ids) for popularity; optionally also
    /// check a claimed dual certificate (a list of node-name lists).
    #[pyo3(signature = (branching, certificate=None, *, root=None))]
    fn verify(
        &self,
        py: Python<'_>,
        branching: Vec<String>,
        certificate: Option<Vec<Vec<String>>>,
        root: Option<&str>,
    ) -> PyResult<Py<PyAny>> {
        let rooted = self.rooted(root)?;
        let arb = self.arb(&rooted, &branching)?;
        let cert: Option<DualCertificate> = certificate
            .map(|sets| sets.into_iter().map(BTreeSet::from_iter).collect());
        let (value, _) = report::verify(&rooted, &arb, cert.as_ref());
        json_to_py(py, &value)
    }

    /// Unpopularity margin of the given branching and a most popular rival.
    #[pyo3(signature = (branching, *, root=None))]
    fn margin(
        &self,
        py: Python<'_>,
        branching: Vec<String>,
        root: Option<&str>,
    ) -> PyResult<Py<PyAny>> {
        let rooted = self.rooted(root)?;
        let arb = self.arb(&rooted, &branching)?;
        json_to_py(py, &report::margin(&rooted, &arb))
    }

    /// Construct a branching of minimum unpopularity margin (weak rankings),
    /// with the laminar family proving the bound.
    #[pyo3(signature = (*, root=None))]
    fn minmargin(&self, py: Python<'_>, root: Option<&str>) -> PyResult<Py<PyAny>> {
        let rooted = self.rooted(root)?;
        let value = report::minmargin(&rooted).map_err(input_err)?;
        json_to_py(py, &value)
    }

    /// Construct a branching with unpopularity factor at most log n (strict
    /// rankings), with its layered certificate.
    #[pyo3(signature = (*, root=None))]
    fn factor(&self, py: Python<'_>, root: Option<&str>) -> PyResult<Py<PyAny>> {
        let rooted = self.rooted(root)?;
        let value = report::factor(&rooted).map_err(|e| match e {
            FactorError::DidNotConverge => budget_err(e),
            other => input_err(other),
        })?;
        json_to_py(py, &value)
    }

    /// Exact unpopularity factor of the given branching ("0", "p/q", or
    /// "inf") with a witnessing rival.
    #[pyo3(signature = (branching, *, root=None))]
    fn factor_of(
        &self,
        py: Python<'_>,
        branching: Vec<String>,
        root: Option<&str>,
    ) -> PyResult<Py<PyAny>> {
        let rooted = self.rooted(root)?;
        let arb = self.arb(&rooted, &branching)?;
        json_to_py(py, &report::factor_of(&rooted, &arb))
    }

    /// Find a popular mixed branching: a lottery over branchings, weights as
    /// exact "p/q" strings.
    #[pyo3(signature = (*, budget=DEFAULT_MIXED_BUDGET, root=None))]
    fn mixed(&self, py: Python<'_>, budget: usize, root: Option<&str>) -> PyResult<Py<PyAny>> {
        let rooted = self.rooted(root)?;
        let value = report::mixed(&rooted, budget).map_err(|e| match e {
            MixedError::BudgetExceeded { .. }
            | MixedError::SupportTooLarge { .. }
            | MixedError::DidNotConverge(_) => budget_err(e),
            other => input_err(other),
        })?;
        json_to_py(py, &value)
    }

    /// Exhaustively enumerate branchings: ground truth for small instances.
    /// `jobs > 1` splits the pairwise vote tally over threads; the result is
    /// identical.
    #[pyo3(signature = (*, budget=DEFAULT_ENUMERATION_BUDGET, jobs=1))]
    fn oracle(&self, py: Python<'_>, budget: u64, jobs: usize) -> PyResult<Py<PyAny>> {
        let value = report::oracle(&self.inner, budget, jobs).map_err(budget_err)?;
        json_to_py(py, &value)
    }

    /// Head-to-head vote between two branchings:
    /// `{"for_first": ..., "for_second": ...}`.
    fn compare(
        &self,
        py: Python<'_>,
        first: Vec<String>,
        second: Vec<String>,
    ) -> PyResult<Py<PyAny>> {
        let b1 = Branching::from_edges(&self.inner, first.iter()).map_err(input_err)?;
        let b2 = Branching::from_edges(&self.inner, second.iter()).map_err(input_err)?;
        let r = compare_branchings(&self.inner, &b1, &b2);
        json_to_py(
            py,
            &serde_json::json!({ "for_first": r.for_first, "for_second": r.for_second }),
        )
    }

    /// Linear-programming text for the popular-branching face ("face",
    /// subset-enumerating, guarded by `cutoff`) or the flow-based extended
    /// formulation ("extended").
    #[pyo3(signature = (form="face", *, cutoff=DEFAULT_FACE_CUTOFF, root=None))]
    fn emit_lp(&self, form: &str, cutoff: usize, root: Option<&str>) -> PyResult<String> {
        let rooted = self.rooted(root)?;
        match form {
            "face" => emit_face_lp(&rooted, cutoff).map_err(input_err),
            "extended" => emit_extended_lp(&rooted).map_err(input_err),
            other => Err(PyValueError::new_err(format!(
                "unknown form '{other}' (expected 'face' or 'extended')"
            ))),
        }
    }
}

/// Random instance with `n` nodes and `m` edges under the chosen preference
/// model ("strict", "weak", or "partial").
#[pyfunction]
#[pyo3(signature = (n, m, *, model="strict", max_ties=3, density=0.5, seed=0))]
fn random_instance(
    n: usize,
    m: usize,
    model: &str,
    max_ties: u32,
    density: f64,
    seed: u64,
) -> PyResult<Instance> {
    let model = match model {
        "strict" => PrefModel::Strict,
        "weak" => PrefModel::Weak { max_ties },
        "partial" => PrefModel::Partial { density },
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown model '{other}' (expected 'strict', 'weak', or 'partial')"
            )))
        }
    };
    Ok(Instance {
        inner: core_random(n, m, model, seed).map_err(input_err)?,
    })
}

/// Doubling family on 2^k nodes whose best unpopularity factor is log n.
#[pyfunction]
fn tight_factor_instance(k: u32) -> PyResult<Instance> {
    Ok(Instance {
        inner: core_tight_factor(k).map_err(input_err)?,
    })
}

/// All nodes mutually top-choice: every spanning arborescence is popular.
#[pyfunction]
fn complete_top_instance(n: usize) -> PyResult<Instance> {
    Ok(Instance {
        inner: core_complete_top(n).map_err(input_err)?,
    })
}

/// Reduce a DIMACS CNF formula (clause widths 2-3, each variable in at most
/// three clauses): satisfiable iff the gadget admits a popular branching in
/// which every node has at most 9 descendants.
#[pyfunction]
fn reduce_sat(py: Python<'_>, dimacs: &str) -> PyResult<Py<PyAny>> {
    let red = reduce_3sat(dimacs).map_err(input_err)?;
    let dict = PyDict::new(py);
    dict.set_item("n_vars", red.n_vars)?;
    dict.set_item("n_clauses", red.clauses.len())?;
    dict.set_item("instance", Instance { inner: red.instance })?;
    Ok(dict.into_any().unbind())
}

/// Reduce a rooted digraph (instance JSON; preference labels ignored): a
/// Hamiltonian path from the root exists iff the gadget admits a popular
/// branching with out-degree at most 2 everywhere.
#[pyfunction]
fn reduce_hampath(py: Python<'_>, digraph_json: &str) -> PyResult<Py<PyAny>> {
    let data: InstanceData = serde_json::from_str(digraph_json)
        .map_err(|e| input_err(format!("invalid digraph document: {e}")))?;
    let red = core_reduce_hampath(&data).map_err(input_err)?;
    let dict = PyDict::new(py);
    dict.set_item("root", red.root)?;
    dict.set_item("instance", Instance { inner: red.instance })?;
    Ok(dict.into_any().unbind())
}

/// Reduce a three-dimensional matching input
/// `{"x": […], "y": […], "z": […], "triples": [[x,y,z], …]}`: a perfect
/// matching exists iff some branching has unpopularity margin at most 2|x|.
/// Solve the returned instance with `root='r'`.
#[pyfunction]
fn reduce_3dm(py: Python<'_>, input_json: &str) -> PyResult<Py<PyAny>> {
    let input: ThreeDmInput = serde_json::from_str(input_json)
        .map_err(|e| input_err(format!("invalid matching document: {e}")))?;
    let bound = 2 * input.x.len();
    let red = core_reduce_3dm(&input).map_err(input_err)?;
    let dict = PyDict::new(py);
    dict.set_item("root", red.rooted.root_id())?;
    dict.set_item("margin_bound", bound)?;
    dict.set_item(
        "instance",
        Instance {
            inner: red.rooted.instance().clone(),
        },
    )?;
    Ok(dict.into_any().unbind())
}

/// Popular branchings in preference-labeled digraphs.
#[pymodule]
fn popbranch_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Instance>()?;
    m.add_function(wrap_pyfunction!(random_instance, m)?)?;
    m.add_function(wrap_pyfunction!(tight_factor_instance, m)?)?;
    m.add_function(wrap_pyfunction!(complete_top_instance, m)?)?;
    m.add_function(wrap_pyfunction!(reduce_sat, m)?)?;
    m.add_function(wrap_pyfunction!(reduce_hampath, m)?)?;
    m.add_function(wrap_pyfunction!(reduce_3dm, m)?)?;
    Ok(())
}
