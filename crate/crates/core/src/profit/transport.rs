//! The constrained optimal-transport criterion.
//!
//! Writing `f = π_ℓπ_r·x = q·π̃`, ex-ante indifference says `π̃` has the
//! marginals of `π` and uninformativeness says `π̃` is orthogonal to `π`.
//! A profitable mechanism exists iff
//! `max { E_π̃[v̂] : π̃ ∈ Π(π_ℓ, π_r), π̃ orthogonal to π } > 0`
//! with `v̂ = vπ/(π_ℓπ_r)`.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Instance, JointDist};
use crate::numerics::{solve_lp, LinearProgram, LpSolution};
use crate::rational::{ser, Q};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportResult {
    /// `v̂ = vπ/(π_ℓπ_r)`, profile-indexed.
    #[serde(serialize_with = "ser::vec")]
    pub v_hat: Vec<Q>,
    /// Orthogonality rows are omitted under independence.
    pub orthogonality_rows: usize,
    #[serde(serialize_with = "ser::rat")]
    pub value: Q,
    /// Optimal `π̃`, as a matrix.
    #[serde(serialize_with = "ser::mat")]
    pub optimizer: Vec<Vec<Q>>,
    pub profitable: bool,
    /// Largest `q` with `q·π̃ ≤ π_ℓπ_r`: the scale at which the optimizer is
    /// itself a mechanism.
    #[serde(serialize_with = "ser::rat")]
    pub q_cap: Q,
    /// `q_cap · value`, the payoff of that mechanism. A lower bound on the
    /// optimum, not the optimum itself.
    #[serde(serialize_with = "ser::rat")]
    pub payoff_at_cap: Q,
}

/// Rows `Σ_{θ_{-i}} (π(θ_i|θ_{-i}) − π_i(θ_i))·π̃(θ_i', θ_{-i}) = 0` over the
/// profile-indexed `π̃`, for both agents and all `(θ_i, θ_i')`.
pub fn orthogonality_rows(dist: &JointDist) -> Vec<Vec<Q>> {
    let sp = dist.space();
    let np = sp.num_profiles();
    let mut rows = Vec::new();
    for agent in 0..2 {
        let other = 1 - agent;
        // cond[θ_{-i}][θ_i] = π(θ_i | θ_{-i})
        let cond = dist.conditionals(other);
        let marg = dist.marginal(agent);
        for t in 0..sp.num_types(agent) {
            for s in 0..sp.num_types(agent) {
                let mut row = vec![Q::zero(); np];
                for (k, cell) in row.iter_mut().enumerate() {
                    if sp.type_of(k, agent) == s {
                        let o = sp.type_of(k, other);
                        *cell = &cond[o][t] - &marg[t];
                    }
                }
                if row.iter().any(|c| !c.is_zero()) && !rows.contains(&row) {
                    rows.push(row);
                }
            }
        }
    }
    rows
}

pub fn transport_criterion(inst: &Instance) -> Result<TransportResult> {
    let sp = inst.space();
    sp.require_two_agents("transport criterion")?;
    let dist = &inst.dist;
    let indep = dist.independent_counterpart();
    let np = sp.num_profiles();
    let v_hat: Vec<Q> = (0..np)
        .map(|k| &inst.v()[k] * dist.prob(k) / indep.prob(k))
        .collect();
    let mut lp = LinearProgram::new(v_hat.clone());
    for agent in 0..2 {
        for (t, m) in dist.marginal(agent).iter().enumerate() {
            let row = (0..np)
                .map(|k| if sp.type_of(k, agent) == t { Q::one() } else { Q::zero() })
                .collect();
            lp.add_eq(row, m.clone());
        }
    }
    let ortho = if dist.is_independent() { Vec::new() } else { orthogonality_rows(dist) };
    for row in &ortho {
        lp.add_eq(row.clone(), Q::zero());
    }
    let opt = match solve_lp(&lp)? {
        LpSolution::Optimal(o) => o,
        other => {
            return Err(Error::Internal(format!(
                "transport LP is {:?} although the product of marginals is feasible",
                other.status()
            )))
        }
    };
    let q_cap = opt
        .primal
        .iter()
        .enumerate()
        .filter(|(_, p)| p.is_positive())
        .map(|(k, p)| indep.prob(k) / p)
        .min()
        .unwrap_or_else(Q::one)
        .min(Q::one());
    let profitable = opt.value.is_positive();
    Ok(TransportResult {
        v_hat,
        orthogonality_rows: ortho.len(),
        payoff_at_cap: &q_cap * &opt.value,
        value: opt.value,
        optimizer: opt.primal.chunks(sp.num_types(1)).map(<[Q]>::to_vec).collect(),
        profitable,
        q_cap,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrthogonalityReport {
    pub orthogonal: bool,
    /// `covariances[i][θ_i][θ_i']` =
    /// `Σ_{θ_{-i}} (π(θ_i|θ_{-i}) − π_i(θ_i))(π̃(θ_i'|θ_{-i}) − π_i(θ_i'))·π_{-i}(θ_{-i})`.
    #[serde(serialize_with = "ser::cube")]
    pub covariances: Vec<Vec<Vec<Q>>>,
}

/// Exact covariance test between the belief updates of two distributions
/// with identical marginals.
pub fn orthogonal(dist: &JointDist, other: &JointDist) -> Result<OrthogonalityReport> {
    let sp = dist.space();
    sp.require_two_agents("orthogonality")?;
    if sp != other.space() {
        return Err(Error::Dimension("distributions live on different type spaces".into()));
    }
    if dist.marginals() != other.marginals() {
        return Err(Error::precondition(
            "equal marginals",
            "orthogonality is defined for distributions with the same marginals",
        ));
    }
    let mut covariances = Vec::with_capacity(2);
    for agent in 0..2 {
        let o = 1 - agent;
        let a = dist.conditionals(o);
        let b = other.conditionals(o);
        let mi = dist.marginal(agent);
        let mo = dist.marginal(o);
        let n = sp.num_types(agent);
        let table: Vec<Vec<Q>> = (0..n)
            .map(|t| {
                (0..n)
                    .map(|s| {
                        (0..mo.len()).fold(Q::zero(), |acc, c| {
                            acc + (&a[c][t] - &mi[t]) * (&b[c][s] - &mi[s]) * &mo[c]
                        })
                    })
                    .collect()
            })
            .collect();
        covariances.push(table);
    }
    let orthogonal = covariances.iter().flatten().flatten().all(Zero::is_zero);
    Ok(OrthogonalityReport { orthogonal, covariances })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::{int, ratio};

    #[test]
    fn independent_square() {
        let r = transport_criterion(&fixtures::fx1()).unwrap();
        assert_eq!(r.value, int(1));
        assert_eq!(r.orthogonality_rows, 0);
        assert_eq!(r.optimizer, vec![vec![ratio(1, 2), int(0)], vec![int(0), ratio(1, 2)]]);
        assert_eq!(r.q_cap, ratio(1, 2));
        // rescaled to a mechanism, the optimizer is x* with payoff 1/2
        assert_eq!(r.payoff_at_cap, ratio(1, 2));
    }

    #[test]
    fn additive_objective() {
        assert_eq!(transport_criterion(&fixtures::fx5()).unwrap().value, int(0));
    }

    #[test]
    fn correlated_square_forces_independence() {
        let r = transport_criterion(&fixtures::fx2()).unwrap();
        assert_eq!(r.value, ratio(-1, 2));
        assert_eq!(r.optimizer, vec![vec![ratio(1, 4); 2]; 2]);
    }

    #[test]
    fn covariance_examples() {
        let e = ratio(1, 8);
        let p = fixtures::pi_eps(&e);
        let q = fixtures::pi_eps(&-e.clone());
        assert!(orthogonal(&p, &p.independent_counterpart()).unwrap().orthogonal);
        let r = orthogonal(&p, &p).unwrap();
        assert!(!r.orthogonal);
        assert_eq!(r.covariances[0][1][1], &e * &e * int(4));
        let r = orthogonal(&p, &q).unwrap();
        assert_eq!(r.covariances[0][1][1], -(&e * &e * int(4)));
        let skew = JointDist::from_matrix(
            fixtures::pm1_space(),
            &[vec![ratio(1, 2), ratio(1, 4)], vec![ratio(1, 8), ratio(1, 8)]],
        )
        .unwrap();
        assert!(orthogonal(&p, &skew).unwrap_err().is_refusal());
    }
}
