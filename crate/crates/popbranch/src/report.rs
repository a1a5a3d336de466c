//! JSON result documents shared by the command-line tool and the Python
//! bindings, so both front ends speak exactly one schema per operation.
//!
//! Every builder returns a `serde_json::Value`; front ends decide how to
//! print it. Key order in serialized output is alphabetical (maps are
//! B-trees), which keeps bytes stable across runs and thread counts.

use serde_json::{json, Value};

use crate::factor::{low_factor_arborescence, unpopularity_factor, FactorError};
use crate::instance::{Arborescence, Instance, RootKind, RootedInstance};
use crate::mixed::{popular_mixed_branching, MixedError};
use crate::oracle::{BruteForcer, BudgetExceeded};
use crate::popularity::{
    is_popular, unpopularity_margin, validate_certificate, DualCertificate,
};
use crate::solver::{min_margin_arborescence, popular_arborescence, MinMarginError};

/// Report an arborescence as a branching of the input instance: synthesized
/// root edges are dropped, edges of an adopted root are real and stay. Sorted
/// by edge id.
pub fn branching_ids(rooted: &RootedInstance, arb: &Arborescence) -> Vec<String> {
    let mut ids = match rooted.kind() {
        RootKind::Augmented => rooted.strip_root(arb).edge_ids(),
        RootKind::Adopted => arb.edge_ids(),
    };
    ids.sort();
    ids
}

fn certificate_json(cert: &DualCertificate) -> Value {
    json!(cert
        .iter()
        .map(|s| s.iter().collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

/// `{"popular":true,"branching":…,"certificate":…}` or `{"popular":false}`.
/// The boolean mirrors the JSON's verdict for exit-code decisions.
pub fn solve(rooted: &RootedInstance) -> (Value, bool) {
    match popular_arborescence(rooted) {
        Some((arb, cert)) => (
            json!({
                "popular": true,
                "branching": branching_ids(rooted, &arb),
                "certificate": certificate_json(&cert),
            }),
            true,
        ),
        None => (json!({"popular": false}), false),
    }
}

/// `{"popular":…}` plus `"certificate_ok"` when a certificate was supplied;
/// the boolean is the overall verdict (popularity and, if given, certificate).
pub fn verify(
    rooted: &RootedInstance,
    arb: &Arborescence,
    cert: Option<&DualCertificate>,
) -> (Value, bool) {
    let (popular, _) = is_popular(rooted, arb);
    let mut value = json!({ "popular": popular });
    let mut ok = popular;
    if let Some(cert) = cert {
        let check = validate_certificate(rooted, arb, cert);
        let cert_ok = check.ok && check.bound == 0;
        for reason in &check.failures {
            log::info!("certificate: {reason}");
        }
        value["certificate_ok"] = json!(cert_ok);
        ok = ok && cert_ok;
    }
    (value, ok)
}

/// `{"margin":…,"rival":…}` — the margin of the given branching and a most
/// popular rival achieving it.
pub fn margin(rooted: &RootedInstance, arb: &Arborescence) -> Value {
    let (margin, rival) = unpopularity_margin(rooted, arb);
    json!({
        "margin": margin,
        "rival": branching_ids(rooted, &rival),
    })
}

/// `{"margin":…,"branching":…,"certificate":…}` — a branching of minimum
/// unpopularity margin with the laminar family proving the bound.
pub fn minmargin(rooted: &RootedInstance) -> Result<Value, MinMarginError> {
    let res = min_margin_arborescence(rooted)?;
    Ok(json!({
        "margin": res.margin,
        "branching": branching_ids(rooted, &res.arb),
        "certificate": certificate_json(&res.certificate),
    }))
}

/// `{"bound":…,"branching":…,"iterations":…,"family":…}` — a low-factor
/// branching and its layered certificate.
pub fn factor(rooted: &RootedInstance) -> Result<Value, FactorError> {
    let res = low_factor_arborescence(rooted)?;
    let family: Vec<Value> = res
        .family
        .entries
        .iter()
        .map(|(set, value, layer)| {
            json!({
                "set": set.iter().collect::<Vec<_>>(),
                "value": value,
                "layer": layer,
            })
        })
        .collect();
    Ok(json!({
        "bound": res.bound,
        "branching": branching_ids(rooted, &res.arb),
        "iterations": res.iterations,
        "family": family,
    }))
}

/// `{"factor":"p/q"|"0"|"inf","witness":…|null}` — the exact unpopularity
/// factor of the given branching.
pub fn factor_of(rooted: &RootedInstance, arb: &Arborescence) -> Value {
    let report = unpopularity_factor(rooted, arb);
    json!({
        "factor": report.factor.as_json_str(),
        "witness": report.witness.as_ref().map(|w| branching_ids(rooted, w)),
    })
}

/// `{"components":[{"branching":…,"weight":"p/q"},…]}` — a popular mixed
/// branching.
pub fn mixed(rooted: &RootedInstance, budget: usize) -> Result<Value, MixedError> {
    let mix = popular_mixed_branching(rooted, budget)?;
    let components: Value =
        serde_json::from_str(&mix.to_json()).expect("component JSON round-trips");
    Ok(json!({ "components": components }))
}

/// Exhaustive ground truth: branching count, every popular branching, and the
/// margin/factor optima with their first achievers. `jobs > 1` splits the
/// pairwise vote tally over that many threads; the result is identical.
pub fn oracle(inst: &Instance, budget: u64, jobs: usize) -> Result<Value, BudgetExceeded> {
    let bf = BruteForcer::new(inst, budget)?;
    let count = bf.count();
    let margins = tally(count, jobs, 0u64, |i| bf.margin_of_ix(i));
    let factors = tally(count, jobs, crate::factor::Factor::Vacuous, |i| {
        bf.factor_of_ix(i)
    });
    let sorted_ids = |i: usize| {
        let mut ids = bf.branching(i).edge_ids();
        ids.sort();
        ids
    };
    let popular: Vec<Vec<String>> = (0..count)
        .filter(|&i| margins[i] == 0)
        .map(sorted_ids)
        .collect();
    let (min_margin, margin_ix) = margins
        .iter()
        .enumerate()
        .map(|(i, &m)| (m, i))
        .min()
        .expect("the empty branching always exists");
    let (min_factor, factor_ix) = factors
        .iter()
        .enumerate()
        .map(|(i, &f)| (f, i))
        .min()
        .expect("the empty branching always exists");
    Ok(json!({
        "branchings": count,
        "popular": popular,
        "min_margin": min_margin,
        "min_margin_branching": sorted_ids(margin_ix),
        "min_factor": min_factor.as_json_str(),
        "min_factor_branching": sorted_ids(factor_ix),
    }))
}

/// Evaluate `f` on `0..count`, chunked over `jobs` scoped threads. The output
/// vector is identical to the sequential one.
fn tally<T: Send + Clone>(
    count: usize,
    jobs: usize,
    init: T,
    f: impl Fn(usize) -> T + Sync,
) -> Vec<T> {
    if jobs <= 1 || count < 2 {
        return (0..count).map(f).collect();
    }
    let mut out = vec![init; count];
    let chunk = count.div_ceil(jobs);
    std::thread::scope(|scope| {
        for (t, slot) in out.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                for (k, cell) in slot.iter_mut().enumerate() {
                    *cell = f(t * chunk + k);
                }
            });
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{random_instance, PrefModel};
    use crate::testutil;

    #[test]
    fn solve_verdicts_match_json() {
        let inst = testutil::four_cycle();
        let rooted = inst.augment_root().unwrap();
        let (value, ok) = solve(&rooted);
        assert!(!ok);
        assert_eq!(value.to_string(), r#"{"popular":false}"#);

        let star = testutil::star3();
        let rooted = star.augment_root().unwrap();
        let (value, ok) = solve(&rooted);
        assert!(ok);
        assert_eq!(value["popular"], true);
        assert_eq!(value["branching"], json!(["ab", "ac"]));
    }

    #[test]
    fn oracle_tally_is_thread_count_invariant() {
        let inst = random_instance(5, 10, PrefModel::Weak { max_ties: 2 }, 99).unwrap();
        let one = oracle(&inst, 1_000_000, 1).unwrap();
        let four = oracle(&inst, 1_000_000, 4).unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn verify_round_trips_solve_output() {
        let star = testutil::star3();
        let rooted = star.augment_root().unwrap();
        let (value, _) = solve(&rooted);
        let ids: Vec<String> = value["branching"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap().to_string())
            .collect();
        let b = crate::instance::Branching::from_edges(rooted.instance(), ids.iter()).unwrap();
        let arb = rooted.arborify(&b).unwrap();
        let cert: DualCertificate = value["certificate"]
            .as_array()
            .unwrap()
            .iter()
            .map(|set| {
                set.as_array()
                    .unwrap()
                    .iter()
                    .map(|v| v.as_str().unwrap().to_string())
                    .collect()
            })
            .collect();
        let (report, ok) = verify(&rooted, &arb, Some(&cert));
        assert!(ok);
        assert_eq!(report["certificate_ok"], true);
    }
}
