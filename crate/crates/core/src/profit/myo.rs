//! Match-your-opponent mechanisms: choose L exactly when `θ_r = m(θ_ℓ)` for
//! a fixed bijection `m`.
//!
//! With independent uniform marginals every IC mechanism is a conic
//! combination of these, so a profitable mechanism exists iff the best
//! matching earns a positive payoff. For symmetric marginals and a
//! supermodular objective the diagonal criterion `Σ_t π_ℓ(t)·v(t, t) > 0`
//! is reported as a shortcut and compared against the direct LP.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Instance, Mechanism};
use crate::numerics::{solve_lp, LinearProgram};
use crate::oracle::solve_principal;
use crate::rational::{ser, Q};

/// Largest type count solved by enumerating all matchings.
pub const ENUMERATION_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchingMethod {
    Enumeration,
    AssignmentLp,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MyoReport {
    /// `best_matching[t]` = the type of r matched to ℓ's type `t`.
    pub best_matching: Vec<usize>,
    /// `Σ_t π_ℓ(t)·π_r(m(t))·v(t, m(t))`.
    #[serde(serialize_with = "ser::rat")]
    pub best_value: Q,
    pub method: MatchingMethod,
    /// The matching mechanism is IC (uniform marginals).
    pub matching_mechanism_ic: bool,
    pub uniform_marginals: bool,
    pub symmetric_marginals: bool,
    pub supermodular: bool,
    /// `Σ_t v(t, t)`, the criterion for uniform marginals.
    #[serde(serialize_with = "ser::rat")]
    pub diagonal_sum: Q,
    /// `Σ_t π_ℓ(t)·v(t, t)`, for symmetric marginals.
    #[serde(serialize_with = "ser::opt_rat")]
    pub diagonal_value: Option<Q>,
    #[serde(serialize_with = "ser::rat")]
    pub oracle_value: Q,
    pub profitable: bool,
    /// Symmetric and supermodular: does the diagonal criterion match the LP?
    pub diagonal_agrees: Option<bool>,
    /// Uniform marginals: does the best matching's sign match the LP?
    pub matching_agrees: Option<bool>,
}

impl MyoReport {
    pub fn mechanism(&self) -> Mechanism {
        let n = self.best_matching.len();
        let values = (0..n * n)
            .map(|k| if self.best_matching[k / n] == k % n { Q::one() } else { Q::zero() })
            .collect();
        Mechanism::new(values).expect("0/1 entries")
    }
}

pub fn match_your_opponent(inst: &Instance) -> Result<MyoReport> {
    let sp = inst.space();
    sp.require_two_agents("match-your-opponent analysis")?;
    let n = sp.num_types(0);
    if sp.num_types(1) != n {
        return Err(Error::precondition(
            "square type space",
            "matchings need equally many types for both agents",
        ));
    }
    if !inst.dist.is_independent() {
        return Err(Error::precondition(
            "independent types",
            "matching mechanisms characterize IC only under independence",
        ));
    }
    let (pl, pr) = (inst.dist.marginal(0), inst.dist.marginal(1));
    let v = inst.v();
    let weight = |t: usize, s: usize| &pl[t] * &pr[s] * &v[t * n + s];
    let (best_matching, best_value, method) = if n <= ENUMERATION_LIMIT {
        let (m, val) = best_by_enumeration(n, &weight);
        (m, val, MatchingMethod::Enumeration)
    } else {
        let (m, val) = best_by_lp(n, &weight)?;
        (m, val, MatchingMethod::AssignmentLp)
    };
    let uniform_marginals = pl.iter().chain(pr).all(|p| p == &pl[0]);
    let symmetric_marginals = pl == pr;
    let supermodular = is_supermodular(v, n);
    let diagonal_value =
        symmetric_marginals.then(|| (0..n).fold(Q::zero(), |acc, t| acc + &pl[t] * &v[t * n + t]));
    let oracle = solve_principal(inst)?;
    let diagonal_agrees = match (&diagonal_value, supermodular) {
        (Some(d), true) => Some(d.is_positive() == oracle.profitable),
        _ => None,
    };
    let matching_agrees = uniform_marginals.then(|| best_value.is_positive() == oracle.profitable);
    let profitable = if uniform_marginals { best_value.is_positive() } else { oracle.profitable };
    Ok(MyoReport {
        best_matching,
        best_value,
        method,
        matching_mechanism_ic: uniform_marginals,
        uniform_marginals,
        symmetric_marginals,
        supermodular,
        diagonal_sum: (0..n).fold(Q::zero(), |acc, t| acc + &v[t * n + t]),
        diagonal_value,
        oracle_value: oracle.value,
        profitable,
        diagonal_agrees,
        matching_agrees,
    })
}

/// `v(t,s) + v(t',s') ≥ v(t,s') + v(t',s)` for all `t < t'`, `s < s'`.
pub fn is_supermodular(v: &[Q], n: usize) -> bool {
    let cols = v.len() / n.max(1);
    (0..n).all(|t| {
        (t + 1..n).all(|u| {
            (0..cols).all(|s| {
                (s + 1..cols).all(|w| &v[t * cols + s] + &v[u * cols + w] >= &v[t * cols + w] + &v[u * cols + s])
            })
        })
    })
}

/// Lexicographically first optimal permutation.
fn best_by_enumeration(n: usize, weight: &dyn Fn(usize, usize) -> Q) -> (Vec<usize>, Q) {
    let table: Vec<Vec<Q>> = (0..n).map(|t| (0..n).map(|s| weight(t, s)).collect()).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    let value = |p: &[usize]| p.iter().enumerate().fold(Q::zero(), |acc, (t, &s)| acc + &table[t][s]);
    let mut best = (perm.clone(), value(&perm));
    while next_permutation(&mut perm) {
        let val = value(&perm);
        if val > best.1 {
            best = (perm.clone(), val);
        }
    }
    best
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("pivot exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// The assignment LP over doubly stochastic matrices; a basic optimum is a
/// permutation matrix.
fn best_by_lp(n: usize, weight: &dyn Fn(usize, usize) -> Q) -> Result<(Vec<usize>, Q)> {
    let obj = (0..n * n).map(|k| weight(k / n, k % n)).collect();
    let mut lp = LinearProgram::new(obj);
    for t in 0..n {
        let row = (0..n * n).map(|k| if k / n == t { Q::one() } else { Q::zero() }).collect();
        lp.add_eq(row, Q::one());
        let col = (0..n * n).map(|k| if k % n == t { Q::one() } else { Q::zero() }).collect();
        lp.add_eq(col, Q::one());
    }
    let opt = solve_lp(&lp)?
        .into_optimum()
        .ok_or_else(|| Error::Internal("assignment LP not optimal".into()))?;
    let mut matching = vec![usize::MAX; n];
    for (k, x) in opt.primal.iter().enumerate() {
        if x.is_one() {
            matching[k / n] = k % n;
        } else if !x.is_zero() {
            return Err(Error::Internal("assignment LP returned a fractional vertex".into()));
        }
    }
    Ok((matching, opt.value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::JointDist;
    use crate::rational::{int, ratio};

    #[test]
    fn three_by_three_product() {
        let r = match_your_opponent(&fixtures::fx3()).unwrap();
        assert_eq!(r.best_matching, vec![0, 1, 2]);
        assert_eq!(r.best_value, ratio(2, 9));
        assert!(r.supermodular && r.profitable);
        assert_eq!(r.diagonal_sum, int(2));
        assert_eq!(r.diagonal_value, Some(ratio(2, 3)));
        assert_eq!(r.diagonal_agrees, Some(true));
        assert_eq!(r.matching_agrees, Some(true));
    }

    #[test]
    fn two_by_two_product() {
        let r = match_your_opponent(&fixtures::fx1()).unwrap();
        assert_eq!(r.best_matching, vec![0, 1]);
        assert_eq!(r.best_value, ratio(1, 2));
        assert_eq!(r.mechanism(), fixtures::xstar());
    }

    #[test]
    fn negative_objective() {
        let inst = Instance::new("neg", fixtures::fx1().dist, vec![int(-1); 4], None).unwrap();
        let r = match_your_opponent(&inst).unwrap();
        assert!(r.best_value.is_negative() && !r.profitable);
    }

    #[test]
    fn lp_agrees_with_enumeration() {
        let weight = |t: usize, s: usize| int(((t * 7 + s * 3) % 5) as i64) - int((t == s) as i64);
        let (m1, v1) = best_by_enumeration(5, &weight);
        let (_, v2) = best_by_lp(5, &weight).unwrap();
        assert_eq!(v1, v2);
        assert_eq!(m1.len(), 5);
    }

    #[test]
    fn rejects_correlated_input() {
        assert!(match_your_opponent(&fixtures::fx2()).unwrap_err().is_refusal());
        let sp = crate::model::TypeSpace::numeric(&["l", "r"], &[&[0, 1], &[0, 1, 2]]);
        let inst = Instance::new("rect", JointDist::uniform(sp), vec![int(1); 6], None).unwrap();
        assert!(match_your_opponent(&inst).unwrap_err().is_refusal());
    }
}
