//! The simplex solver against brute-force vertex enumeration on small
//! bounded LPs.

use mechkit::numerics::{linalg, solve_lp, LinearProgram, LpStatus};
use mechkit::rational::{dot, int, ratio};
use mechkit::Q;
use num_traits::Zero;
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Small {
    objective: Vec<Q>,
    le: Vec<(Vec<Q>, Q)>,
    eq: Option<(Vec<Q>, Q)>,
    cap: Q,
}

impl Small {
    fn lp(&self) -> LinearProgram {
        let n = self.objective.len();
        let mut lp = LinearProgram::new(self.objective.clone());
        for (row, rhs) in &self.le {
            lp.add_le(row.clone(), rhs.clone());
        }
        if let Some((row, rhs)) = &self.eq {
            lp.add_eq(row.clone(), rhs.clone());
        }
        for j in 0..n {
            lp.set_bounds(j, Some(Q::zero()), Some(self.cap.clone()));
        }
        lp
    }

    /// Best objective over all basic feasible points, or `None` if empty.
    fn brute_force(&self) -> Option<Q> {
        let n = self.objective.len();
        let mut ineq: Vec<(Vec<Q>, Q)> = self.le.clone();
        for j in 0..n {
            let mut e = vec![Q::zero(); n];
            e[j] = int(-1);
            ineq.push((e.clone(), Q::zero()));
            e[j] = int(1);
            ineq.push((e, self.cap.clone()));
        }
        let fixed: Vec<(Vec<Q>, Q)> = self.eq.iter().cloned().collect();
        let pick = n - fixed.len().min(n);
        let feasible = |x: &[Q]| {
            ineq.iter().all(|(r, b)| &dot(r, x) <= b) && fixed.iter().all(|(r, b)| &dot(r, x) == b)
        };
        let mut best: Option<Q> = None;
        for subset in subsets(ineq.len(), pick) {
            let rows: Vec<Vec<Q>> = fixed.iter().map(|(r, _)| r.clone()).chain(subset.iter().map(|&i| ineq[i].0.clone())).collect();
            if linalg::rank(&rows) < n {
                continue;
            }
            let rhs: Vec<Q> = fixed.iter().map(|(_, b)| b.clone()).chain(subset.iter().map(|&i| ineq[i].1.clone())).collect();
            let Some(x) = linalg::solve_linear_system(&rows, &rhs) else { continue };
            if feasible(&x) {
                let v = dot(&self.objective, &x);
                if best.as_ref().is_none_or(|b| &v > b) {
                    best = Some(v);
                }
            }
        }
        best
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn coeff() -> impl Strategy<Value = Q> {
    (-6i64..=6, 1i64..=3).prop_map(|(a, b)| ratio(a, b))
}

fn small_lp() -> impl Strategy<Value = Small> {
    (1usize..=4, 0usize..=3).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(coeff(), n),
            prop::collection::vec((prop::collection::vec(coeff(), n), coeff()), m),
            prop::option::weighted(0.5, (prop::collection::vec(coeff(), n), coeff())),
            1i64..=4,
        )
            .prop_map(|(objective, le, eq, cap)| Small {
                objective,
                le,
                eq,
                cap: int(cap),
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn simplex_matches_vertex_enumeration(p in small_lp()) {
        let lp = p.lp();
        let sol = solve_lp(&lp).unwrap();
        sol.verify(&lp).unwrap();
        match p.brute_force() {
            None => prop_assert_eq!(sol.status(), LpStatus::Infeasible),
            Some(best) => {
                prop_assert_eq!(sol.status(), LpStatus::Optimal);
                prop_assert_eq!(sol.value().unwrap(), &best);
            }
        }
    }
}

#[test]
fn degenerate_square() {
    // max x + y on the unit square with a redundant diagonal cut
    let p = Small {
        objective: vec![int(1), int(1)],
        le: vec![(vec![int(1), int(1)], int(2))],
        eq: None,
        cap: int(1),
    };
    assert_eq!(p.brute_force(), Some(int(2)));
    assert_eq!(solve_lp(&p.lp()).unwrap().value(), Some(&int(2)));
}
