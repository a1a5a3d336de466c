//! Exact dense two-phase simplex over arbitrary-precision rationals.
//!
//! Small and deliberately simple: all variables are nonnegative, rows compare
//! with ≤ / = / ≥, the objective is maximized, and Bland's rule guarantees
//! termination. Used internally for the mixed-branching constraint-generation
//! solve and the fractional decomposition; callers split free variables
//! themselves.

use num_rational::BigRational;
use num_traits::Zero;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub(crate) struct LpProblem {
    pub n_vars: usize,
    /// Maximize `objective · x`.
    pub objective: Vec<BigRational>,
    pub rows: Vec<(Vec<BigRational>, Relation, BigRational)>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { x: Vec<BigRational>, value: BigRational },
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// `m` rows of `n_cols + 1` entries; the last entry is the rhs.
    a: Vec<Vec<BigRational>>,
    basis: Vec<usize>,
    n_cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.a[r][c].clone();
        for x in self.a[r].iter_mut() {
            *x /= &p;
        }
        for i in 0..self.a.len() {
            if i == r || self.a[i][c].is_zero() {
                continue;
            }
            let f = self.a[i][c].clone();
            for j in 0..=self.n_cols {
                let d = &self.a[r][j] * &f;
                self.a[i][j] -= d;
            }
        }
        self.basis[r] = c;
    }

    /// Maximize `cost · x` over columns passing `allowed`, Bland's rule.
    /// Returns false on unboundedness.
    fn optimize(&mut self, cost: &[BigRational], allowed: &dyn Fn(usize) -> bool) -> bool {
        loop {
            // simplex multipliers from the basic costs, then reduced costs
            let entering = (0..self.n_cols).find(|&j| {
                if !allowed(j) || self.basis.contains(&j) {
                    return false;
                }
                let mut rc = cost[j].clone();
                for (i, row) in self.a.iter().enumerate() {
                    if !row[j].is_zero() {
                        rc -= &cost[self.basis[i]] * &row[j];
                    }
                }
                rc > BigRational::zero()
            });
            let Some(j) = entering else {
                return true;
            };
            let mut leave: Option<(usize, BigRational)> = None;
            for (i, row) in self.a.iter().enumerate() {
                if row[j] > BigRational::zero() {
                    let ratio = &row[self.n_cols] / &row[j];
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else {
                return false;
            };
            self.pivot(r, j);
        }
    }
}

pub(crate) fn solve(p: &LpProblem) -> LpOutcome {
    let zero = BigRational::zero;
    let m = p.rows.len();
    let n = p.n_vars;

    // normalize to nonnegative rhs
    let rows: Vec<(Vec<BigRational>, Relation, BigRational)> = p
        .rows
        .iter()
        .map(|(coef, rel, rhs)| {
            if *rhs < zero() {
                let flipped = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Eq => Relation::Eq,
                    Relation::Ge => Relation::Le,
                };
                (coef.iter().map(|c| -c).collect(), flipped, -rhs)
            } else {
                (coef.clone(), *rel, rhs.clone())
            }
        })
        .collect();

    // columns: structural | one slack/surplus per inequality | artificials
    let n_slack = rows.iter().filter(|(_, rel, _)| *rel != Relation::Eq).count();
    let n_art = rows.iter().filter(|(_, rel, _)| *rel != Relation::Le).count();
    let n_cols = n + n_slack + n_art;

    let mut a: Vec<Vec<BigRational>> = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut slack_at = n;
    let mut art_at = n + n_slack;
    for (coef, rel, rhs) in &rows {
        let mut row = vec![zero(); n_cols + 1];
        for (j, c) in coef.iter().enumerate().take(n) {
            row[j] = c.clone();
        }
        row[n_cols] = rhs.clone();
        match rel {
            Relation::Le => {
                row[slack_at] = BigRational::from_integer(1.into());
                basis.push(slack_at);
                slack_at += 1;
            }
            Relation::Ge => {
                row[slack_at] = BigRational::from_integer((-1).into());
                slack_at += 1;
                row[art_at] = BigRational::from_integer(1.into());
                basis.push(art_at);
                art_at += 1;
            }
            Relation::Eq => {
                row[art_at] = BigRational::from_integer(1.into());
                basis.push(art_at);
                art_at += 1;
            }
        }
        a.push(row);
    }
    let first_art = n + n_slack;
    let mut t = Tableau { a, basis, n_cols };

    // phase 1: drive the artificial variables to zero
    if n_art > 0 {
        let mut cost = vec![zero(); n_cols];
        for c in cost.iter_mut().skip(first_art) {
            *c = BigRational::from_integer((-1).into());
        }
        let bounded = t.optimize(&cost, &|_| true);
        debug_assert!(bounded, "phase 1 objective is bounded by zero");
        let infeas: BigRational = t
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= first_art)
            .map(|(i, _)| t.a[i][t.n_cols].clone())
            .sum();
        if !infeas.is_zero() {
            return LpOutcome::Infeasible;
        }
        // pivot lingering zero-valued artificials out where possible
        for r in 0..m {
            if t.basis[r] >= first_art {
                if let Some(c) = (0..first_art).find(|&c| !t.a[r][c].is_zero()) {
                    t.pivot(r, c);
                }
            }
        }
    }

    // phase 2: the real objective, artificials barred
    let mut cost = vec![zero(); n_cols];
    for (j, c) in p.objective.iter().enumerate().take(n) {
        cost[j] = c.clone();
    }
    if !t.optimize(&cost, &|j| j < first_art) {
        return LpOutcome::Unbounded;
    }

    let mut x = vec![zero(); n];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.a[i][t.n_cols].clone();
        }
    }
    let value = x
        .iter()
        .zip(&p.objective)
        .map(|(xi, ci)| xi * ci)
        .sum();
    LpOutcome::Optimal { x, value }
}
