//! Allocating one good among `n` agents with independent types.
//!
//! Agent `i` receives the good with probability `x_i(θ)`; without disposal
//! the shares sum to one at every profile, with disposal they sum to at most
//! one. Under independence a mechanism is IC iff each agent's interim
//! probability of receiving the good does not depend on their report.
//!
//! The last agent plays the reference role: differences `v_i − v_n` are
//! projected onto the subspace `W` of functions `π(θ)(u_i(θ_i) − u_n(θ_n))`.
//! A zero residual means every IC mechanism earns what a constant one does;
//! a nonzero residual `ε̂` yields an explicit profitable mechanism.
//! Disposal is handled by appending a dummy agent with a single type and
//! zero value, which then becomes the reference agent.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{JointDist, TypeSpace};
use crate::numerics::orthogonal_projection;
use crate::oracle::{self, AllocationOracle};
use crate::rational::{self, ser, Q};

pub const DISPOSAL_AGENT: &str = "disposal";

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationInstance {
    pub name: String,
    pub seed: Option<u64>,
    pub space: TypeSpace,
    pub marginals: Vec<Vec<Q>>,
    /// `values[i][k]`: agent `i`'s value for the good at profile `k`.
    pub values: Vec<Vec<Q>>,
    pub disposal: bool,
    dist: JointDist,
}

impl AllocationInstance {
    pub fn new(
        name: String,
        space: TypeSpace,
        marginals: Vec<Vec<Q>>,
        values: Vec<Vec<Q>>,
        disposal: bool,
    ) -> Result<Self> {
        let n = space.num_agents();
        if marginals.len() != n || values.len() != n {
            return Err(Error::Dimension(format!(
                "{n} agents but {} marginals and {} value tensors",
                marginals.len(),
                values.len()
            )));
        }
        for (i, m) in marginals.iter().enumerate() {
            if m.len() != space.num_types(i) {
                return Err(Error::Dimension(format!(
                    "marginal of agent `{}` has {} entries, expected {}",
                    space.agents()[i],
                    m.len(),
                    space.num_types(i)
                )));
            }
            if m.iter().any(|p| !p.is_positive()) || !rational::sum(m).is_one() {
                return Err(Error::Distribution(format!(
                    "marginal of agent `{}` must be positive and sum to 1",
                    space.agents()[i]
                )));
            }
        }
        if let Some((i, _)) = values.iter().enumerate().find(|(_, v)| v.len() != space.num_profiles()) {
            return Err(Error::Dimension(format!(
                "value tensor of agent `{}` has the wrong size",
                space.agents()[i]
            )));
        }
        let dist = JointDist::independent(space.clone(), &marginals)?;
        Ok(AllocationInstance {
            name,
            seed: None,
            space,
            marginals,
            values,
            disposal,
            dist,
        })
    }

    pub fn num_agents(&self) -> usize {
        self.space.num_agents()
    }

    /// The product distribution of the marginals.
    pub fn dist(&self) -> &JointDist {
        &self.dist
    }

    /// `E[v_i]` for every agent.
    pub fn expected_values(&self) -> Vec<Q> {
        self.values.iter().map(|v| self.dist.expectation(v)).collect()
    }

    /// `v̄ = max_i E[v_i]`: the best payoff from a constant allocation.
    pub fn vbar(&self) -> Q {
        rational::max(&self.expected_values()).unwrap_or_else(Q::zero)
    }

    /// Best payoff from mechanisms that ignore reports.
    pub fn baseline(&self) -> Q {
        let vbar = self.vbar();
        if self.disposal && vbar.is_negative() {
            Q::zero()
        } else {
            vbar
        }
    }

    /// All agents have the same expected value.
    pub fn is_unbiased(&self) -> bool {
        self.expected_values().windows(2).all(|w| w[0] == w[1])
    }

    pub fn payoff(&self, x: &AllocationMechanism) -> Q {
        self.values
            .iter()
            .zip(&x.shares)
            .map(|(v, s)| {
                v.iter()
                    .zip(s)
                    .zip(self.dist.probs())
                    .fold(Q::zero(), |acc, ((v, x), p)| acc + v * x * p)
            })
            .fold(Q::zero(), |a, b| a + b)
    }

    /// First agent whose value depends on someone else's type.
    pub fn interdependent_agent(&self) -> Option<usize> {
        let sp = &self.space;
        (0..self.num_agents()).find(|&j| {
            let v = &self.values[j];
            (0..sp.num_profiles()).any(|k| v[k] != v[sp.with_others_fixed(k, j)])
        })
    }
}

impl TypeSpace {
    /// The profile with agent `j`'s type kept and every other agent at type 0.
    fn with_others_fixed(&self, k: usize, j: usize) -> usize {
        let mut p = vec![0; self.num_agents()];
        p[j] = self.type_of(k, j);
        self.index(&p)
    }
}

/// `shares[i][k]`: probability that agent `i` gets the good at profile `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationMechanism {
    #[serde(serialize_with = "ser::mat")]
    pub shares: Vec<Vec<Q>>,
}

impl AllocationMechanism {
    pub fn new(shares: Vec<Vec<Q>>) -> Self {
        AllocationMechanism { shares }
    }

    /// Each agent gets `1/n` everywhere.
    pub fn uniform(n: usize, profiles: usize) -> Self {
        AllocationMechanism::new(vec![vec![rational::ratio(1, n as i64); profiles]; n])
    }

    /// Shares are nonnegative and sum to one (or at most one with disposal).
    pub fn check_feasible(&self, space: &TypeSpace, disposal: bool) -> Result<()> {
        let np = space.num_profiles();
        if self.shares.len() != space.num_agents() || self.shares.iter().any(|s| s.len() != np) {
            return Err(Error::Dimension("allocation shares do not match the type space".into()));
        }
        if let Some(q) = self.shares.iter().flatten().find(|q| q.is_negative()) {
            return Err(Error::Mechanism(format!("negative share {q}")));
        }
        for k in 0..np {
            let total = self.shares.iter().fold(Q::zero(), |acc, s| acc + &s[k]);
            let ok = if disposal { total <= Q::one() } else { total.is_one() };
            if !ok {
                return Err(Error::Mechanism(format!(
                    "shares at profile {:?} sum to {total}",
                    space.profile(k)
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationIcReport {
    pub verdict: bool,
    /// `interim[i][t]`: probability agent `i` gets the good when reporting `t`.
    #[serde(serialize_with = "ser::mat")]
    pub interim: Vec<Vec<Q>>,
}

/// `interim[i][t] = E_{θ_{-i}}[x_i(t, θ_{-i})]` under independence.
pub fn interim_shares(x: &AllocationMechanism, inst: &AllocationInstance) -> Vec<Vec<Q>> {
    let sp = &inst.space;
    (0..inst.num_agents())
        .map(|i| {
            let mut row = vec![Q::zero(); sp.num_types(i)];
            for (k, p) in inst.dist.probs().iter().enumerate() {
                row[sp.type_of(k, i)] += p * &x.shares[i][k];
            }
            row.iter_mut().zip(&inst.marginals[i]).for_each(|(r, m)| *r /= m);
            row
        })
        .collect()
}

pub fn check_ic_n(x: &AllocationMechanism, inst: &AllocationInstance) -> Result<AllocationIcReport> {
    x.check_feasible(&inst.space, inst.disposal)?;
    let interim = interim_shares(x, inst);
    let verdict = interim.iter().all(|row| row.windows(2).all(|w| w[0] == w[1]));
    Ok(AllocationIcReport { verdict, interim })
}

/// Outcome of projecting the value differences onto `W`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifferenceReport {
    /// `v_i − v_j = u_i(θ_i) − u_j(θ_j)` for all pairs.
    pub holds: bool,
    /// One valid choice of `u_i` (indexed by own type) when the condition holds.
    #[serde(serialize_with = "ser::opt_mat")]
    pub u: Option<Vec<Vec<Q>>>,
    /// `ṽ_i = π·(v_i − v_n)` for `i < n`, indexed `[i][profile]`.
    #[serde(serialize_with = "ser::mat")]
    pub weighted_differences: Vec<Vec<Q>>,
    /// Residual `ε̂ = ṽ − proj_W ṽ`, indexed `[i][profile]`.
    #[serde(serialize_with = "ser::mat")]
    pub residual: Vec<Vec<Q>>,
}

/// Generators of `W`, one per (agent, type), over the flattened space
/// `{0..n−2} × Θ`.
pub fn w_generators(inst: &AllocationInstance) -> Vec<Vec<Q>> {
    let sp = &inst.space;
    let n = inst.num_agents();
    let np = sp.num_profiles();
    let probs = inst.dist.probs();
    let mut gens = Vec::new();
    for j in 0..n {
        for t in 0..sp.num_types(j) {
            let mut g = vec![Q::zero(); (n - 1) * np];
            for k in (0..np).filter(|&k| sp.type_of(k, j) == t) {
                if j < n - 1 {
                    g[j * np + k] = probs[k].clone();
                } else {
                    for i in 0..n - 1 {
                        g[i * np + k] = -probs[k].clone();
                    }
                }
            }
            gens.push(g);
        }
    }
    gens
}

pub fn difference_additive(inst: &AllocationInstance) -> Result<DifferenceReport> {
    let n = inst.num_agents();
    if n < 2 {
        return Err(Error::precondition(
            "difference condition",
            "needs at least two agents",
        ));
    }
    let sp = &inst.space;
    let np = sp.num_profiles();
    let probs = inst.dist.probs();
    let last = &inst.values[n - 1];
    let weighted: Vec<Vec<Q>> = inst.values[..n - 1]
        .iter()
        .map(|v| (0..np).map(|k| &probs[k] * (&v[k] - &last[k])).collect())
        .collect();
    let gens = w_generators(inst);
    let proj = orthogonal_projection(&weighted.concat(), &gens);
    let residual: Vec<Vec<Q>> = proj.residual.chunks(np).map(<[Q]>::to_vec).collect();
    let holds = proj.residual.iter().all(Zero::is_zero);
    let u = holds.then(|| {
        let mut out = Vec::with_capacity(n);
        let mut c = proj.coefficients.iter();
        for j in 0..n {
            out.push(c.by_ref().take(sp.num_types(j)).cloned().collect());
        }
        out
    });
    Ok(DifferenceReport {
        holds,
        u,
        weighted_differences: weighted,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationConstruction {
    /// `ẑ = ε̂ − min ε̂`, indexed `[i][profile]` for `i < n`.
    #[serde(serialize_with = "ser::mat")]
    pub z_hat: Vec<Vec<Q>>,
    #[serde(serialize_with = "ser::rat")]
    pub min_residual: Q,
    /// Largest step keeping `Σ_{i<n} x̂_i ≤ 1`.
    #[serde(serialize_with = "ser::rat")]
    pub alpha: Q,
    pub mechanism: AllocationMechanism,
    /// Interim probability of each agent, independent of the report.
    #[serde(serialize_with = "ser::vec")]
    pub interim_values: Vec<Q>,
    /// `α·Σ ε̂² + v̄`.
    #[serde(serialize_with = "ser::rat")]
    pub claimed_payoff: Q,
    /// Direct expectation `Σ_i E[v_i x̂_i]`.
    #[serde(serialize_with = "ser::rat")]
    pub payoff: Q,
    pub ic: AllocationIcReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AllocationOutcome {
    Constructed(Box<AllocationConstruction>),
    /// The difference condition holds: every IC mechanism earns exactly what
    /// some constant allocation earns, so none beats `v̄`.
    NoneCertificate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationReport {
    #[serde(serialize_with = "ser::rat")]
    pub vbar: Q,
    #[serde(serialize_with = "ser::vec")]
    pub expected_values: Vec<Q>,
    pub condition: DifferenceReport,
    pub outcome: AllocationOutcome,
    pub profitable: bool,
}

impl AllocationReport {
    pub fn construction(&self) -> Option<&AllocationConstruction> {
        match &self.outcome {
            AllocationOutcome::Constructed(c) => Some(c),
            AllocationOutcome::NoneCertificate => None,
        }
    }
}

const UNBIASED: &str = "unbiased principal";

/// Explicit profitable mechanism for an unbiased principal without disposal,
/// or a certificate that none exists.
pub fn construct_profitable_n(inst: &AllocationInstance) -> Result<AllocationReport> {
    if inst.disposal {
        return Err(Error::precondition(
            "allocation without disposal",
            "instance allows disposal; use the disposal reduction",
        ));
    }
    if !inst.is_unbiased() {
        return Err(Error::precondition(
            UNBIASED,
            format!(
                "the construction needs equal expected values across agents, got {}",
                inst.expected_values().iter().map(rational::format).collect::<Vec<_>>().join(", ")
            ),
        ));
    }
    let condition = difference_additive(inst)?;
    let vbar = inst.vbar();
    let expected_values = inst.expected_values();
    if condition.holds {
        return Ok(AllocationReport {
            vbar,
            expected_values,
            condition,
            outcome: AllocationOutcome::NoneCertificate,
            profitable: false,
        });
    }
    let construction = build(inst, &condition.residual, &vbar)?;
    Ok(AllocationReport {
        vbar,
        expected_values,
        condition,
        outcome: AllocationOutcome::Constructed(Box::new(construction)),
        profitable: true,
    })
}

fn build(inst: &AllocationInstance, eps: &[Vec<Q>], vbar: &Q) -> Result<AllocationConstruction> {
    let n = inst.num_agents();
    let np = inst.space.num_profiles();
    let min = rational::min(eps.iter().flatten()).expect("nonempty residual");
    let z_hat: Vec<Vec<Q>> = eps.iter().map(|row| row.iter().map(|e| e - &min).collect()).collect();
    let peak = (0..np)
        .map(|k| z_hat.iter().fold(Q::zero(), |acc, z| acc + &z[k]))
        .max()
        .expect("nonempty space");
    if !peak.is_positive() {
        return Err(Error::Internal("nonzero residual with a flat shift".into()));
    }
    let alpha = Q::one() / peak;
    let mut shares: Vec<Vec<Q>> = z_hat.iter().map(|z| z.iter().map(|v| &alpha * v).collect()).collect();
    let rest = (0..np)
        .map(|k| Q::one() - shares.iter().fold(Q::zero(), |acc, s| acc + &s[k]))
        .collect();
    shares.push(rest);
    let mechanism = AllocationMechanism::new(shares);
    let ic = check_ic_n(&mechanism, inst)?;
    let norm = eps.iter().flatten().fold(Q::zero(), |acc, e| acc + e * e);
    let claimed_payoff = &alpha * norm + vbar;
    let payoff = inst.payoff(&mechanism);
    let lower = -(&alpha * &min);
    let upper = Q::one() + Q::from_integer((n as i64 - 1).into()) * &alpha * &min;
    let mut interim_values = vec![lower; n - 1];
    interim_values.push(upper);
    let audit = ic.verdict
        && payoff == claimed_payoff
        && ic.interim.iter().zip(&interim_values).all(|(row, v)| row.iter().all(|r| r == v));
    if !audit {
        return Err(Error::Internal("allocation construction failed its audit".into()));
    }
    Ok(AllocationConstruction {
        z_hat,
        min_residual: min,
        alpha,
        mechanism,
        interim_values,
        claimed_payoff,
        payoff,
        ic,
    })
}

/// `inst` without disposal plus a last agent with one type and zero value.
/// Profile indices are unchanged because the new agent varies slowest-last.
pub fn augment(inst: &AllocationInstance) -> Result<AllocationInstance> {
    let mut agents = inst.space.agents().to_vec();
    let mut name = DISPOSAL_AGENT.to_string();
    while agents.contains(&name) {
        name.push('\'');
    }
    agents.push(name);
    let mut types: Vec<Vec<String>> = (0..inst.num_agents()).map(|i| inst.space.labels(i).to_vec()).collect();
    types.push(vec!["0".into()]);
    let space = TypeSpace::new(agents, types)?;
    let mut marginals = inst.marginals.clone();
    marginals.push(vec![Q::one()]);
    let mut values = inst.values.clone();
    values.push(vec![Q::zero(); inst.space.num_profiles()]);
    let mut out = AllocationInstance::new(format!("{}+disposal", inst.name), space, marginals, values, false)?;
    out.seed = inst.seed;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisposalReport {
    /// Unbiased with `v̄ = 0`: the profitability verdict is an equivalence.
    pub iff_regime: bool,
    /// An agent whose value is not constant in the others' types.
    pub witness: Option<usize>,
    /// The no-disposal pipeline on the augmented instance (iff regime only).
    pub pipeline: Option<AllocationReport>,
    /// Direct LP verdict outside the iff regime when the necessary condition
    /// does not already settle the question.
    pub oracle: Option<AllocationOracle>,
    pub profitable: bool,
}

pub fn with_disposal(inst: &AllocationInstance) -> Result<DisposalReport> {
    if !inst.disposal {
        return Err(Error::precondition(
            "allocation with disposal",
            "instance does not allow disposal",
        ));
    }
    let augmented = augment(inst)?;
    let witness = inst.interdependent_agent();
    if augmented.is_unbiased() {
        let pipeline = construct_profitable_n(&augmented)?;
        if pipeline.profitable != witness.is_some() {
            return Err(Error::Internal("disposal witness disagrees with the projection".into()));
        }
        return Ok(DisposalReport {
            iff_regime: true,
            witness,
            profitable: pipeline.profitable,
            pipeline: Some(pipeline),
            oracle: None,
        });
    }
    // Outside the equivalence only the necessary condition is available.
    if witness.is_none() {
        return Ok(DisposalReport {
            iff_regime: false,
            witness,
            pipeline: None,
            oracle: None,
            profitable: false,
        });
    }
    let verdict = oracle::solve_principal_n(inst)?;
    Ok(DisposalReport {
        iff_regime: false,
        witness,
        pipeline: None,
        profitable: verdict.profitable,
        oracle: Some(verdict),
    })
}

/// Verdict for any allocation instance: the constructive pipeline where its
/// equivalence applies, otherwise the necessary condition backed by the LP.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum AllocationAnalysis {
    Construction(AllocationReport),
    Disposal(DisposalReport),
    /// Biased principal without disposal.
    NecessaryCondition {
        condition: DifferenceReport,
        oracle: Option<AllocationOracle>,
        profitable: bool,
    },
}

impl AllocationAnalysis {
    pub fn profitable(&self) -> bool {
        match self {
            AllocationAnalysis::Construction(r) => r.profitable,
            AllocationAnalysis::Disposal(r) => r.profitable,
            AllocationAnalysis::NecessaryCondition { profitable, .. } => *profitable,
        }
    }
}

pub fn analyze(inst: &AllocationInstance) -> Result<AllocationAnalysis> {
    if inst.disposal {
        return with_disposal(inst).map(AllocationAnalysis::Disposal);
    }
    if inst.is_unbiased() {
        return construct_profitable_n(inst).map(AllocationAnalysis::Construction);
    }
    let condition = difference_additive(inst)?;
    if condition.holds {
        return Ok(AllocationAnalysis::NecessaryCondition {
            condition,
            oracle: None,
            profitable: false,
        });
    }
    let verdict = oracle::solve_principal_n(inst)?;
    Ok(AllocationAnalysis::NecessaryCondition {
        condition,
        profitable: verdict.profitable,
        oracle: Some(verdict),
    })
}
