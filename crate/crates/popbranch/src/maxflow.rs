//! Exact maximum flow (Edmonds–Karp) over rationals, with min-cut extraction.
//!
//! The augmentation count of shortest-path augmenting is independent of the
//! capacity values, so exact rational capacities terminate like integers do.
//! Used by the mixed module to separate the cut constraints of the
//! arborescence polytope.

use std::collections::VecDeque;

use num_rational::BigRational;
use num_traits::Zero;

pub(crate) struct MaxFlowResult {
    pub value: BigRational,
    /// true for nodes on the source side of a minimum cut (residual-reachable).
    pub source_side: Vec<bool>,
}

struct Arc {
    to: usize,
    cap: BigRational,
    rev: usize,
}

pub(crate) fn max_flow(
    n: usize,
    edges: &[(usize, usize, BigRational)],
    s: usize,
    t: usize,
) -> MaxFlowResult {
    let mut adj: Vec<Vec<Arc>> = (0..n).map(|_| Vec::new()).collect();
    for (u, v, cap) in edges {
        debug_assert!(*cap >= BigRational::zero());
        let ru = adj[*u].len();
        let rv = adj[*v].len();
        adj[*u].push(Arc {
            to: *v,
            cap: cap.clone(),
            rev: rv,
        });
        adj[*v].push(Arc {
            to: *u,
            cap: BigRational::zero(),
            rev: ru,
        });
    }

    let mut value = BigRational::zero();
    loop {
        // shortest augmenting path by BFS, remembered as (node, arc index)
        let mut pred: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for (i, arc) in adj[u].iter().enumerate() {
                if !seen[arc.to] && arc.cap > BigRational::zero() {
                    seen[arc.to] = true;
                    pred[arc.to] = Some((u, i));
                    queue.push_back(arc.to);
                }
            }
        }
        if !seen[t] {
            return MaxFlowResult {
                value,
                source_side: seen,
            };
        }
        let mut bottleneck: Option<BigRational> = None;
        let mut v = t;
        while let Some((u, i)) = pred[v] {
            let c = &adj[u][i].cap;
            bottleneck = Some(match bottleneck {
                None => c.clone(),
                Some(b) if *c < b => c.clone(),
                Some(b) => b,
            });
            v = u;
        }
        let b = bottleneck.expect("path has at least one arc");
        let mut v = t;
        while let Some((u, i)) = pred[v] {
            adj[u][i].cap -= &b;
            let rev = adj[u][i].rev;
            adj[v][rev].cap += &b;
            v = u;
        }
        value += &b;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }
    fn rr(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn classic_diamond() {
        // s->a 3, s->b 2, a->b 1, a->t 2, b->t 3: max flow 5
        let edges = vec![
            (0, 1, r(3)),
            (0, 2, r(2)),
            (1, 2, r(1)),
            (1, 3, r(2)),
            (2, 3, r(3)),
        ];
        let res = max_flow(4, &edges, 0, 3);
        assert_eq!(res.value, r(5));
        assert!(res.source_side[0] && !res.source_side[3]);
    }

    #[test]
    fn rational_capacities_stay_exact() {
        // two parallel paths of capacity 1/3 and 1/6
        let edges = vec![
            (0, 1, rr(1, 3)),
            (1, 3, rr(1, 3)),
            (0, 2, rr(1, 6)),
            (2, 3, rr(1, 6)),
        ];
        let res = max_flow(4, &edges, 0, 3);
        assert_eq!(res.value, rr(1, 2));
    }

    #[test]
    fn min_cut_side_is_reported() {
        // s -> a (10) -> t (1): the cut is {s, a} | {t}
        let edges = vec![(0, 1, r(10)), (1, 2, r(1))];
        let res = max_flow(3, &edges, 0, 2);
        assert_eq!(res.value, r(1));
        assert_eq!(res.source_side, vec![true, true, false]);
    }

    #[test]
    fn disconnected_sink() {
        let edges = vec![(0, 1, r(4))];
        let res = max_flow(3, &edges, 0, 2);
        assert_eq!(res.value, r(0));
        assert!(!res.source_side[2]);
    }
}
