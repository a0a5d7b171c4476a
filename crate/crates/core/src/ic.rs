//! Incentive compatibility of two-option mechanisms and the spanning
//! preorder on type distributions.
//!
//! Agent 0 (ℓ) wants option L, i.e. a large `x`; agent 1 (r) wants a small
//! `x`. A mechanism is IC iff every type of every agent expects the same
//! probability of L from every report, and that common value is both
//! `E_π[x]` and the maximin value of the auxiliary game. [`check_ic`]
//! evaluates the raw inequalities, that equality form, and the split into
//! ex-ante indifference plus uninformativeness, and records all three.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{JointDist, Mechanism};
use crate::numerics::{linalg, solve_lp, LinearProgram};
use crate::rational::{ser, Q};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IcViolation {
    pub agent: usize,
    #[serde(rename = "type")]
    pub true_type: usize,
    pub report: usize,
    /// Interim gain from misreporting, in the agent's own direction.
    #[serde(serialize_with = "ser::rat")]
    pub gain: Q,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IcReport {
    /// Raw IC inequalities hold.
    pub verdict: bool,
    /// Every interim expectation equals `E_π[x]`.
    pub equalities_hold: bool,
    /// Every report yields the same ex-ante expectation.
    pub ex_ante_indifferent: bool,
    /// Conditioning on one's own type does not change any report's value.
    pub uninformative: bool,
    /// `interim[i][θ_i][θ_i']` = `E_π[x(θ_i', θ_{-i}) | θ_i]`.
    #[serde(serialize_with = "ser::cube")]
    pub interim: Vec<Vec<Vec<Q>>>,
    /// `ex_ante[i][θ_i']` = `E_π[x(θ_i', θ_{-i})]`.
    #[serde(serialize_with = "ser::mat")]
    pub ex_ante: Vec<Vec<Q>>,
    #[serde(serialize_with = "ser::rat")]
    pub expected: Q,
    /// The common interim value when the mechanism is IC.
    #[serde(serialize_with = "ser::opt_rat")]
    pub common_value: Option<Q>,
    /// Sorted by decreasing gain.
    pub violations: Vec<IcViolation>,
}

impl IcReport {
    /// All three characterizations agree.
    pub fn consistent(&self) -> bool {
        self.verdict == self.equalities_hold
            && self.verdict == (self.ex_ante_indifferent && self.uninformative)
    }
}

/// `interim[θ_i][θ_i']` for one agent, in any number of agents.
pub(crate) fn interim_table(values: &[Q], dist: &JointDist, agent: usize) -> Vec<Vec<Q>> {
    let sp = dist.space();
    let n = sp.num_types(agent);
    let mut table = vec![vec![Q::zero(); n]; n];
    for (k, p) in dist.probs().iter().enumerate() {
        if p.is_zero() {
            continue;
        }
        let t = sp.type_of(k, agent);
        for (r, cell) in table[t].iter_mut().enumerate() {
            *cell += p * &values[sp.with_type(k, agent, r)];
        }
    }
    for (row, m) in table.iter_mut().zip(dist.marginal(agent)) {
        for v in row.iter_mut() {
            *v /= m;
        }
    }
    table
}

pub fn check_ic(x: &Mechanism, dist: &JointDist) -> Result<IcReport> {
    let sp = dist.space();
    sp.require_two_agents("two-option IC check")?;
    x.check_dims(sp)?;
    let values = x.values();
    let expected = dist.expectation(values);
    let mut interim = Vec::with_capacity(2);
    let mut ex_ante = Vec::with_capacity(2);
    let mut violations = Vec::new();
    for agent in 0..2 {
        let table = interim_table(values, dist, agent);
        let marg = dist.marginal(agent);
        let n = table.len();
        let ea: Vec<Q> = (0..n)
            .map(|r| (0..n).fold(Q::zero(), |acc, t| acc + &marg[t] * &table[t][r]))
            .collect();
        for t in 0..n {
            for r in 0..n {
                let diff = &table[t][r] - &table[t][t];
                let gain = if agent == 0 { diff } else { -diff };
                if gain.is_positive() {
                    violations.push(IcViolation { agent, true_type: t, report: r, gain });
                }
            }
        }
        interim.push(table);
        ex_ante.push(ea);
    }
    violations.sort_by(|a, b| {
        b.gain
            .cmp(&a.gain)
            .then(a.agent.cmp(&b.agent))
            .then(a.true_type.cmp(&b.true_type))
            .then(a.report.cmp(&b.report))
    });
    let equalities_hold = interim.iter().flatten().flatten().all(|v| v == &expected);
    let ex_ante_indifferent = ex_ante.iter().all(|row| row.windows(2).all(|w| w[0] == w[1]));
    let uninformative = interim
        .iter()
        .zip(&ex_ante)
        .all(|(table, ea)| table.iter().all(|row| row == ea));
    let verdict = violations.is_empty();
    Ok(IcReport {
        verdict,
        equalities_hold,
        ex_ante_indifferent,
        uninformative,
        common_value: verdict.then(|| expected.clone()),
        interim,
        ex_ante,
        expected,
        violations,
    })
}

/// Homogeneous equality rows over the profile-indexed mechanism vector whose
/// solution set, intersected with `[0, 1]`, is exactly the IC mechanisms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IcConstraintBlock {
    #[serde(serialize_with = "ser::mat")]
    pub rows: Vec<Vec<Q>>,
    /// `(agent, true type, report)` of each row's first occurrence.
    pub labels: Vec<(usize, usize, usize)>,
}

/// Rows `Σ_{θ_{-i}} π(θ_{-i}|θ_i) x(θ_i', θ_{-i}) − Σ_θ π(θ) x(θ) = 0`,
/// with exact duplicates and identically-zero rows removed.
pub fn ic_polytope(dist: &JointDist) -> IcConstraintBlock {
    let sp = dist.space();
    let np = sp.num_profiles();
    let mut rows: Vec<Vec<Q>> = Vec::new();
    let mut labels = Vec::new();
    for agent in 0..sp.num_agents() {
        let marg = dist.marginal(agent);
        for t in 0..sp.num_types(agent) {
            for r in 0..sp.num_types(agent) {
                let mut row: Vec<Q> = dist.probs().iter().map(|p| -p.clone()).collect();
                for k in (0..np).filter(|&k| sp.type_of(k, agent) == t) {
                    let p = dist.prob(k);
                    if !p.is_zero() {
                        row[sp.with_type(k, agent, r)] += p / &marg[t];
                    }
                }
                if row.iter().all(Zero::is_zero) || rows.contains(&row) {
                    continue;
                }
                rows.push(row);
                labels.push((agent, t, r));
            }
        }
    }
    IcConstraintBlock { rows, labels }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpanFailure {
    pub agent: usize,
    #[serde(rename = "type")]
    pub own_type: usize,
    /// The belief `π̃(·|θ_i)` outside the span of `{π(·|θ̃_i)}`.
    #[serde(serialize_with = "ser::vec")]
    pub belief: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpanningVerdict {
    pub spans: bool,
    /// When spanning holds: `coefficients[i][θ_i][θ̃_i]` with
    /// `π̃(·|θ_i) = Σ_{θ̃_i} coefficients[i][θ_i][θ̃_i] · π(·|θ̃_i)`.
    #[serde(serialize_with = "ser::opt_cube")]
    pub coefficients: Option<Vec<Vec<Vec<Q>>>>,
    pub failures: Vec<SpanFailure>,
}

/// Does `dist` span `other`: is every conditional belief under `other` a
/// linear combination of the conditional beliefs under `dist`?
pub fn spans(dist: &JointDist, other: &JointDist) -> Result<SpanningVerdict> {
    if dist.space() != other.space() {
        return Err(Error::Dimension("distributions live on different type spaces".into()));
    }
    let mut coefficients = Vec::new();
    let mut failures = Vec::new();
    for agent in 0..dist.space().num_agents() {
        let gens = dist.conditionals(agent);
        let targets = other.conditionals(agent);
        let mut per_type = Vec::with_capacity(targets.len());
        for (t, belief) in targets.into_iter().enumerate() {
            match linalg::span_coefficients(&belief, &gens) {
                Some(alpha) => per_type.push(alpha),
                None => failures.push(SpanFailure { agent, own_type: t, belief }),
            }
        }
        coefficients.push(per_type);
    }
    let spans = failures.is_empty();
    Ok(SpanningVerdict {
        spans,
        coefficients: spans.then_some(coefficients),
        failures,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Extremes {
    pub rank: usize,
    /// Rank `min(m, n)`; on a square space this spans every distribution.
    pub maximal: bool,
    /// Independent: spanned only by distributions it spans back.
    pub minimal: bool,
}

pub fn classify_extremes(dist: &JointDist) -> Result<Extremes> {
    let rank = dist.matrix_rank()?;
    let sp = dist.space();
    Ok(Extremes {
        rank,
        maximal: rank == sp.num_types(0).min(sp.num_types(1)),
        minimal: rank == 1,
    })
}

/// `max_{x IC} (max_θ x(θ) − min_θ x(θ))`, by one LP per ordered profile
/// pair over the IC polytope with `0 ≤ x ≤ 1`.
pub fn max_spread(dist: &JointDist) -> Result<Q> {
    let block = ic_polytope(dist);
    let np = dist.space().num_profiles();
    let mut best = Q::zero();
    for a in 0..np {
        for b in 0..np {
            if a == b {
                continue;
            }
            let mut obj = vec![Q::zero(); np];
            obj[a] = Q::one();
            obj[b] = -Q::one();
            let mut lp = LinearProgram::new(obj);
            for row in &block.rows {
                lp.add_eq(row.clone(), Q::zero());
            }
            for k in 0..np {
                lp.set_bounds(k, Some(Q::zero()), Some(Q::one()));
            }
            let value = solve_lp(&lp)?
                .into_optimum()
                .ok_or_else(|| Error::Internal("spread LP not optimal".into()))?
                .value;
            if value > best {
                best = value;
            }
        }
    }
    Ok(best)
}

/// Check the stored spanning coefficients reproduce every target belief.
pub fn verify_span_coefficients(dist: &JointDist, other: &JointDist, v: &SpanningVerdict) -> bool {
    let Some(coeffs) = &v.coefficients else {
        return !v.spans;
    };
    (0..dist.space().num_agents()).all(|agent| {
        let gens = dist.conditionals(agent);
        let targets = other.conditionals(agent);
        targets.iter().zip(&coeffs[agent]).all(|(target, alpha)| {
            let mut acc = vec![Q::zero(); target.len()];
            for (g, a) in gens.iter().zip(alpha) {
                for (s, gi) in acc.iter_mut().zip(g) {
                    *s += a * gi;
                }
            }
            &acc == target
        })
    })
}

/// Interim expectations must equal one constant for an IC mechanism.
pub fn is_ic(x: &Mechanism, dist: &JointDist) -> Result<bool> {
    Ok(check_ic(x, dist)?.verdict)
}
