//! The auxiliary two-player zero-sum game induced by a two-option mechanism.
//!
//! The row player (agent ℓ) picks a type and maximizes `x(θ_ℓ, θ_r)`; the
//! column player (agent r) picks a type and minimizes it. A type
//! distribution is then a correlated strategy, and incentive compatibility
//! of `x` under `π` is exactly the statement that `π` is a correlated
//! equilibrium of this game.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{JointDist, Mechanism, TypeSpace};
use crate::numerics::{solve_lp, LinearProgram};
use crate::rational::{self, ser, Q};

/// Value of the game and a Nash equilibrium attaining it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaximinSolution {
    #[serde(serialize_with = "ser::rat")]
    pub value: Q,
    /// Maximizer (agent ℓ) mixed strategy.
    #[serde(serialize_with = "ser::vec")]
    pub row_strategy: Vec<Q>,
    /// Minimizer (agent r) mixed strategy.
    #[serde(serialize_with = "ser::vec")]
    pub col_strategy: Vec<Q>,
}

impl MaximinSolution {
    /// No pure deviation by either player changes the payoff in their favour.
    pub fn is_nash(&self, payoff: &[Vec<Q>]) -> bool {
        let cols = payoff.first().map_or(0, Vec::len);
        let row_ok = payoff
            .iter()
            .all(|row| rational::dot(row, &self.col_strategy) <= self.value);
        let col_ok = (0..cols).all(|c| {
            let col: Vec<Q> = payoff.iter().map(|r| r[c].clone()).collect();
            rational::dot(&col, &self.row_strategy) >= self.value
        });
        let mixed = payoff
            .iter()
            .zip(&self.row_strategy)
            .fold(Q::zero(), |acc, (row, p)| acc + p * rational::dot(row, &self.col_strategy));
        row_ok && col_ok && mixed == self.value
    }
}

fn check_matrix(payoff: &[Vec<Q>]) -> Result<usize> {
    let cols = payoff.first().map_or(0, Vec::len);
    if payoff.is_empty() || cols == 0 || payoff.iter().any(|r| r.len() != cols) {
        return Err(Error::Dimension("payoff matrix must be non-empty and rectangular".into()));
    }
    Ok(cols)
}

/// `max_{σ_ℓ} min_{σ_r} σ_ℓᵀ X σ_r` by LP; the minimizer's strategy is read
/// from the dual of the same solve.
pub fn maximin_matrix(payoff: &[Vec<Q>]) -> Result<MaximinSolution> {
    let cols = check_matrix(payoff)?;
    let rows = payoff.len();
    // variables: σ_ℓ (rows), then the value v (free)
    let mut obj = vec![Q::zero(); rows + 1];
    obj[rows] = Q::one();
    let mut lp = LinearProgram::new(obj);
    lp.set_bounds(rows, None, None);
    for c in 0..cols {
        let mut row: Vec<Q> = payoff.iter().map(|r| -r[c].clone()).collect();
        row.push(Q::one());
        lp.add_le(row, Q::zero());
    }
    let mut simplex = vec![Q::one(); rows];
    simplex.push(Q::zero());
    lp.add_eq(simplex, Q::one());
    let opt = solve_lp(&lp)?
        .into_optimum()
        .ok_or_else(|| Error::Internal("maximin LP not optimal".into()))?;
    let sol = MaximinSolution {
        value: opt.value.clone(),
        row_strategy: opt.primal[..rows].to_vec(),
        col_strategy: opt.dual_ub.clone(),
    };
    if !sol.is_nash(payoff) {
        return Err(Error::Internal("extracted strategies are not an equilibrium".into()));
    }
    Ok(sol)
}

/// `min_{σ_r} max_{σ_ℓ} σ_ℓᵀ X σ_r`, solved as its own LP.
pub fn minimax_matrix(payoff: &[Vec<Q>]) -> Result<MaximinSolution> {
    let cols = check_matrix(payoff)?;
    // variables: σ_r (cols), then w (free); maximize −w
    let mut obj = vec![Q::zero(); cols + 1];
    obj[cols] = -Q::one();
    let mut lp = LinearProgram::new(obj);
    lp.set_bounds(cols, None, None);
    for r in payoff {
        let mut row = r.clone();
        row.push(-Q::one());
        lp.add_le(row, Q::zero());
    }
    let mut simplex = vec![Q::one(); cols];
    simplex.push(Q::zero());
    lp.add_eq(simplex, Q::one());
    let opt = solve_lp(&lp)?
        .into_optimum()
        .ok_or_else(|| Error::Internal("minimax LP not optimal".into()))?;
    Ok(MaximinSolution {
        value: -opt.value.clone(),
        row_strategy: opt.dual_ub.clone(),
        col_strategy: opt.primal[..cols].to_vec(),
    })
}

/// Maximin value of the game whose payoff matrix is the mechanism.
pub fn maximin(x: &Mechanism, space: &TypeSpace) -> Result<MaximinSolution> {
    space.require_two_agents("maximin")?;
    x.check_dims(space)?;
    maximin_matrix(&x.matrix(space.num_types(1)))
}

/// One violated obedience inequality, weighted by joint probabilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObedienceViolation {
    /// 0 for the maximizer (ℓ), 1 for the minimizer (r).
    pub agent: usize,
    pub recommended: usize,
    pub deviation: usize,
    /// `Σ_{θ_{-i}} π(θ_i, θ_{-i}) · (payoff change in the agent's favour)`.
    #[serde(serialize_with = "ser::rat")]
    pub gain: Q,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObedienceReport {
    pub obedient: bool,
    /// Sorted by decreasing gain, then agent, recommendation, deviation.
    pub violations: Vec<ObedienceViolation>,
}

/// Audit whether `π` is a correlated equilibrium of the game with payoff `x`.
pub fn obedience_check(x: &Mechanism, dist: &JointDist) -> Result<ObedienceReport> {
    let sp = dist.space();
    sp.require_two_agents("obedience check")?;
    x.check_dims(sp)?;
    let (m, n) = (sp.num_types(0), sp.num_types(1));
    let xm = x.matrix(n);
    let pm = dist.matrix();
    let mut violations = Vec::new();
    for rec in 0..m {
        for dev in 0..m {
            if dev == rec {
                continue;
            }
            let gain = (0..n).fold(Q::zero(), |acc, c| acc + &pm[rec][c] * (&xm[dev][c] - &xm[rec][c]));
            if gain.is_positive() {
                violations.push(ObedienceViolation { agent: 0, recommended: rec, deviation: dev, gain });
            }
        }
    }
    for rec in 0..n {
        for dev in 0..n {
            if dev == rec {
                continue;
            }
            let gain = (0..m).fold(Q::zero(), |acc, r| acc + &pm[r][rec] * (&xm[r][rec] - &xm[r][dev]));
            if gain.is_positive() {
                violations.push(ObedienceViolation { agent: 1, recommended: rec, deviation: dev, gain });
            }
        }
    }
    violations.sort_by(|a, b| {
        b.gain
            .cmp(&a.gain)
            .then(a.agent.cmp(&b.agent))
            .then(a.recommended.cmp(&b.recommended))
            .then(a.deviation.cmp(&b.deviation))
    });
    Ok(ObedienceReport {
        obedient: violations.is_empty(),
        violations,
    })
}
