//! Type spaces, joint distributions, mechanisms and the principal's objective.
//!
//! Profiles are enumerated row-major in agent order: the first agent's type
//! varies slowest. For two agents this makes every profile array an ordinary
//! `|Θ_ℓ| × |Θ_r|` matrix stored by rows.

use std::collections::HashSet;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::numerics::linalg;
use crate::rational::{self, Q};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeSpace {
    agents: Vec<String>,
    types: Vec<Vec<String>>,
    strides: Vec<usize>,
}

impl TypeSpace {
    pub fn new(agents: Vec<String>, types: Vec<Vec<String>>) -> Result<Self> {
        if agents.is_empty() {
            return Err(Error::schema("agents", "at least one agent is required"));
        }
        if agents.len() != types.len() {
            return Err(Error::Dimension(format!(
                "{} agents but {} type lists",
                agents.len(),
                types.len()
            )));
        }
        let mut seen = HashSet::new();
        for a in &agents {
            if !seen.insert(a) {
                return Err(Error::schema("agents", format!("duplicate agent `{a}`")));
            }
        }
        for (a, labels) in agents.iter().zip(&types) {
            if labels.is_empty() {
                return Err(Error::schema(format!("types.{a}"), "agent has no types"));
            }
            let mut seen = HashSet::new();
            for l in labels {
                if !seen.insert(l) {
                    return Err(Error::schema(format!("types.{a}"), format!("duplicate label `{l}`")));
                }
            }
        }
        let mut strides = vec![1; types.len()];
        for i in (0..types.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * types[i + 1].len();
        }
        Ok(TypeSpace {
            agents,
            types,
            strides,
        })
    }

    /// Agents named `0..n` with types labelled by the given integers.
    pub fn numeric(agents: &[&str], labels: &[&[i64]]) -> Self {
        TypeSpace::new(
            agents.iter().map(|s| s.to_string()).collect(),
            labels
                .iter()
                .map(|ls| ls.iter().map(|l| l.to_string()).collect())
                .collect(),
        )
        .expect("well-formed numeric type space")
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn labels(&self, agent: usize) -> &[String] {
        &self.types[agent]
    }

    pub fn num_types(&self, agent: usize) -> usize {
        self.types[agent].len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.types.iter().map(Vec::len).collect()
    }

    pub fn num_profiles(&self) -> usize {
        self.types.iter().map(Vec::len).product()
    }

    pub fn index(&self, profile: &[usize]) -> usize {
        debug_assert_eq!(profile.len(), self.agents.len());
        profile.iter().zip(&self.strides).map(|(t, s)| t * s).sum()
    }

    pub fn profile(&self, mut index: usize) -> Vec<usize> {
        self.strides
            .iter()
            .map(|s| {
                let t = index / s;
                index %= s;
                t
            })
            .collect()
    }

    /// Type of `agent` in the profile with flat index `index`.
    pub fn type_of(&self, index: usize, agent: usize) -> usize {
        (index / self.strides[agent]) % self.types[agent].len()
    }

    /// Flat index after replacing `agent`'s type by `t`.
    pub fn with_type(&self, index: usize, agent: usize, t: usize) -> usize {
        let cur = self.type_of(index, agent);
        index - cur * self.strides[agent] + t * self.strides[agent]
    }

    /// Index of the opponents' sub-profile of `index` (row-major over the
    /// remaining agents).
    pub fn others_index(&self, index: usize, agent: usize) -> usize {
        let mut k = 0;
        for j in 0..self.agents.len() {
            if j != agent {
                k = k * self.types[j].len() + self.type_of(index, j);
            }
        }
        k
    }

    pub fn num_others(&self, agent: usize) -> usize {
        self.num_profiles() / self.types[agent].len()
    }

    pub fn agent_index(&self, name: &str) -> Option<usize> {
        self.agents.iter().position(|a| a == name)
    }

    /// Parse every label of `agent` as a rational, for numeric objectives.
    pub fn numeric_labels(&self, agent: usize) -> Result<Vec<Q>> {
        self.types[agent].iter().map(|l| rational::parse(l)).collect()
    }

    pub fn require_two_agents(&self, what: &str) -> Result<()> {
        if self.num_agents() != 2 {
            return Err(Error::precondition(
                "two-agent model",
                format!("{what} needs exactly two agents, got {}", self.num_agents()),
            ));
        }
        Ok(())
    }
}

/// A joint type distribution with strictly positive marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDist {
    space: TypeSpace,
    probs: Vec<Q>,
    marginals: Vec<Vec<Q>>,
}

impl JointDist {
    pub fn new(space: TypeSpace, probs: Vec<Q>) -> Result<Self> {
        if probs.len() != space.num_profiles() {
            return Err(Error::Dimension(format!(
                "distribution has {} entries, type space has {} profiles",
                probs.len(),
                space.num_profiles()
            )));
        }
        if let Some(p) = probs.iter().find(|p| p.is_negative()) {
            return Err(Error::Distribution(format!("negative probability {p}")));
        }
        let total = rational::sum(&probs);
        if !total.is_one() {
            return Err(Error::Distribution(format!("probabilities sum to {total}, not 1")));
        }
        let marginals = compute_marginals(&space, &probs);
        for (i, m) in marginals.iter().enumerate() {
            if let Some(t) = m.iter().position(Zero::is_zero) {
                return Err(Error::Distribution(format!(
                    "type `{}` of agent `{}` has zero marginal probability",
                    space.labels(i)[t],
                    space.agents()[i]
                )));
            }
        }
        Ok(JointDist {
            space,
            probs,
            marginals,
        })
    }

    /// Two-agent distribution from a `|Θ_ℓ| × |Θ_r|` matrix.
    pub fn from_matrix(space: TypeSpace, rows: &[Vec<Q>]) -> Result<Self> {
        space.require_two_agents("matrix distribution")?;
        if rows.len() != space.num_types(0) || rows.iter().any(|r| r.len() != space.num_types(1)) {
            return Err(Error::Dimension("distribution matrix shape".into()));
        }
        JointDist::new(space, rows.concat())
    }

    /// Product of the given marginals.
    pub fn independent(space: TypeSpace, marginals: &[Vec<Q>]) -> Result<Self> {
        if marginals.len() != space.num_agents()
            || marginals.iter().enumerate().any(|(i, m)| m.len() != space.num_types(i))
        {
            return Err(Error::Dimension("marginal vector shapes".into()));
        }
        let probs = (0..space.num_profiles())
            .map(|k| {
                (0..space.num_agents()).fold(Q::one(), |acc, i| acc * &marginals[i][space.type_of(k, i)])
            })
            .collect();
        JointDist::new(space, probs)
    }

    pub fn uniform(space: TypeSpace) -> Self {
        let n = space.num_profiles();
        let p = Q::new(1.into(), (n as i64).into());
        JointDist::new(space, vec![p; n]).expect("uniform distribution is valid")
    }

    pub fn space(&self) -> &TypeSpace {
        &self.space
    }

    pub fn probs(&self) -> &[Q] {
        &self.probs
    }

    pub fn prob(&self, index: usize) -> &Q {
        &self.probs[index]
    }

    pub fn marginal(&self, agent: usize) -> &[Q] {
        &self.marginals[agent]
    }

    pub fn marginals(&self) -> &[Vec<Q>] {
        &self.marginals
    }

    /// `π(θ_{-i} | θ_i)`: one row per type of `agent`, columns indexed by
    /// the opponents' sub-profile.
    pub fn conditionals(&self, agent: usize) -> Vec<Vec<Q>> {
        let sp = &self.space;
        let mut rows = vec![vec![Q::zero(); sp.num_others(agent)]; sp.num_types(agent)];
        for (k, p) in self.probs.iter().enumerate() {
            rows[sp.type_of(k, agent)][sp.others_index(k, agent)] += p;
        }
        for (row, m) in rows.iter_mut().zip(&self.marginals[agent]) {
            for v in row.iter_mut() {
                *v /= m;
            }
        }
        rows
    }

    /// The product of this distribution's marginals.
    pub fn independent_counterpart(&self) -> JointDist {
        JointDist::independent(self.space.clone(), &self.marginals)
            .expect("marginals of a valid distribution")
    }

    pub fn expectation(&self, f: &[Q]) -> Q {
        rational::dot(&self.probs, f)
    }

    /// Rows of the two-agent probability matrix.
    pub fn matrix(&self) -> Vec<Vec<Q>> {
        self.probs
            .chunks(self.space.num_types(self.space.num_agents() - 1))
            .map(<[Q]>::to_vec)
            .collect()
    }

    /// Exact rank of the two-agent probability matrix.
    pub fn matrix_rank(&self) -> Result<usize> {
        self.space.require_two_agents("matrix rank")?;
        Ok(linalg::rank(&self.matrix()))
    }

    /// True iff the distribution equals the product of its marginals.
    pub fn is_independent(&self) -> bool {
        self.probs == self.independent_counterpart().probs
    }

    pub fn has_full_rank(&self) -> Result<bool> {
        let r = self.matrix_rank()?;
        Ok(r == self.space.num_types(0).min(self.space.num_types(1)))
    }
}

fn compute_marginals(space: &TypeSpace, probs: &[Q]) -> Vec<Vec<Q>> {
    let mut m: Vec<Vec<Q>> = (0..space.num_agents())
        .map(|i| vec![Q::zero(); space.num_types(i)])
        .collect();
    for (k, p) in probs.iter().enumerate() {
        if p.is_zero() {
            continue;
        }
        for (i, mi) in m.iter_mut().enumerate() {
            mi[space.type_of(k, i)] += p;
        }
    }
    m
}

/// Two-option mechanism: `values[k]` is the probability of option L at
/// profile `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mechanism {
    values: Vec<Q>,
}

impl Mechanism {
    pub fn new(values: Vec<Q>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !rational::is_probability(v)) {
            return Err(Error::Mechanism(format!("value {v} outside [0, 1]")));
        }
        Ok(Mechanism { values })
    }

    pub fn constant(c: Q, profiles: usize) -> Result<Self> {
        Mechanism::new(vec![c; profiles])
    }

    pub fn from_matrix(rows: &[Vec<Q>]) -> Result<Self> {
        Mechanism::new(rows.concat())
    }

    pub fn values(&self) -> &[Q] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }

    pub fn matrix(&self, cols: usize) -> Vec<Vec<Q>> {
        self.values.chunks(cols).map(<[Q]>::to_vec).collect()
    }

    pub fn check_dims(&self, space: &TypeSpace) -> Result<()> {
        if self.values.len() != space.num_profiles() {
            return Err(Error::Dimension(format!(
                "mechanism has {} entries, type space has {} profiles",
                self.values.len(),
                space.num_profiles()
            )));
        }
        Ok(())
    }
}

impl serde::Serialize for Mechanism {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        rational::ser::vec(&self.values, s)
    }
}

/// The principal's normalized objective `v = v_L − v_R` (after an optional
/// relabelling so that `E_π[v] ≤ 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub v: Vec<Q>,
    pub raw_vl: Vec<Q>,
    pub raw_vr: Vec<Q>,
    /// True when the option labels were exchanged; `v` then equals
    /// `raw_vr − raw_vl` and mechanisms give the probability of the raw R.
    pub swapped: bool,
}

impl Objective {
    pub fn expectation(&self, dist: &JointDist) -> Q {
        dist.expectation(&self.v)
    }
}

/// `v = v_L − v_R`, with the options exchanged when `E_π[v] > 0` so that the
/// ex-ante preferred option is always R.
pub fn normalize(raw_vl: &[Q], raw_vr: &[Q], dist: &JointDist) -> Result<Objective> {
    let n = dist.space().num_profiles();
    if raw_vl.len() != n || raw_vr.len() != n {
        return Err(Error::Dimension(format!(
            "objective arrays have {} and {} entries, expected {n}",
            raw_vl.len(),
            raw_vr.len()
        )));
    }
    let mut v: Vec<Q> = raw_vl.iter().zip(raw_vr).map(|(l, r)| l - r).collect();
    let swapped = dist.expectation(&v).is_positive();
    if swapped {
        v.iter_mut().for_each(|x| *x = -x.clone());
    }
    Ok(Objective {
        v,
        raw_vl: raw_vl.to_vec(),
        raw_vr: raw_vr.to_vec(),
        swapped,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub seed: Option<u64>,
    pub dist: JointDist,
    pub objective: Objective,
}

impl Instance {
    pub fn new(name: impl Into<String>, dist: JointDist, raw_vl: Vec<Q>, raw_vr: Option<Vec<Q>>) -> Result<Self> {
        let raw_vr = raw_vr.unwrap_or_else(|| vec![Q::zero(); raw_vl.len()]);
        let objective = normalize(&raw_vl, &raw_vr, &dist)?;
        Ok(Instance {
            name: name.into(),
            seed: None,
            dist,
            objective,
        })
    }

    pub fn space(&self) -> &TypeSpace {
        self.dist.space()
    }

    pub fn v(&self) -> &[Q] {
        &self.objective.v
    }

    /// `E_π[v]` of the normalized objective.
    pub fn expected_value(&self) -> Q {
        self.objective.expectation(&self.dist)
    }

    /// `w = v·π`.
    pub fn weighted_objective(&self) -> Vec<Q> {
        self.objective.v.iter().zip(self.dist.probs()).map(|(v, p)| v * p).collect()
    }

    pub fn payoff(&self, x: &Mechanism) -> Q {
        self.objective
            .v
            .iter()
            .zip(self.dist.probs())
            .zip(x.values())
            .fold(Q::zero(), |acc, ((v, p), x)| acc + v * p * x)
    }

    /// Same instance with the objective scaled by `factor > 0`.
    pub fn scaled(&self, factor: &Q) -> Result<Self> {
        let s = |v: &[Q]| v.iter().map(|x| x * factor).collect::<Vec<_>>();
        let mut out = Instance::new(
            self.name.clone(),
            self.dist.clone(),
            s(&self.objective.raw_vl),
            Some(s(&self.objective.raw_vr)),
        )?;
        out.seed = self.seed;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn pm1() -> TypeSpace {
        TypeSpace::numeric(&["l", "r"], &[&[-1, 1], &[-1, 1]])
    }

    fn pi_eps(eps: Q) -> JointDist {
        let a = ratio(1, 4) - &eps;
        let b = ratio(1, 4) + &eps;
        JointDist::from_matrix(pm1(), &[vec![a.clone(), b.clone()], vec![b, a]]).unwrap()
    }

    #[test]
    fn profile_indexing_is_row_major() {
        let sp = TypeSpace::numeric(&["a", "b", "c"], &[&[0, 1], &[0, 1, 2], &[0, 1]]);
        assert_eq!(sp.num_profiles(), 12);
        for k in 0..12 {
            assert_eq!(sp.index(&sp.profile(k)), k);
        }
        assert_eq!(sp.profile(7), vec![1, 0, 1]);
        assert_eq!(sp.others_index(7, 1), 3);
        assert_eq!(sp.with_type(7, 1, 2), sp.index(&[1, 2, 1]));
    }

    #[test]
    fn rejects_duplicates_and_empty_types() {
        assert!(TypeSpace::new(vec!["a".into()], vec![vec![]]).is_err());
        assert!(TypeSpace::new(vec!["a".into()], vec![vec!["x".into(), "x".into()]]).is_err());
        assert!(TypeSpace::new(vec!["a".into(), "a".into()], vec![vec!["x".into()]; 2]).is_err());
    }

    #[test]
    fn distribution_validation() {
        assert!(JointDist::new(pm1(), vec![ratio(1, 2), ratio(1, 2), int(0), int(0)]).is_err());
        assert!(JointDist::new(pm1(), vec![ratio(1, 2); 4]).is_err());
        assert!(JointDist::new(pm1(), vec![int(-1), int(1), int(1), int(0)]).is_err());
        // no full support needed, only positive marginals
        assert!(JointDist::new(pm1(), vec![ratio(1, 2), int(0), int(0), ratio(1, 2)]).is_ok());
    }

    #[test]
    fn marginals_and_conditionals() {
        let u = JointDist::uniform(pm1());
        assert_eq!(u.marginal(0), &[ratio(1, 2), ratio(1, 2)]);
        assert_eq!(u.marginal(1), &[ratio(1, 2), ratio(1, 2)]);
        let d = pi_eps(ratio(1, 8));
        // π(θ_ℓ = 1 | θ_r = −1) = (1/4 + ε) / (1/2)
        assert_eq!(d.conditionals(1)[0][1], ratio(3, 4));
        for row in d.conditionals(0).iter().chain(&d.conditionals(1)) {
            assert_eq!(rational::sum(row), Q::one());
        }
        let ind = JointDist::independent(pm1(), &[vec![ratio(1, 3), ratio(2, 3)], vec![ratio(1, 4), ratio(3, 4)]])
            .unwrap();
        for row in ind.conditionals(0) {
            assert_eq!(row, ind.marginal(1));
        }
    }

    #[test]
    fn independence_and_rank() {
        let u = JointDist::uniform(pm1());
        assert!(u.is_independent());
        assert_eq!(u.matrix_rank().unwrap(), 1);
        let d = pi_eps(ratio(1, 8));
        assert!(!d.is_independent());
        assert_eq!(d.matrix_rank().unwrap(), 2);
        assert!(d.has_full_rank().unwrap());
    }

    #[test]
    fn normalize_examples() {
        let u = JointDist::uniform(pm1());
        let prod = vec![int(1), int(-1), int(-1), int(1)];
        let o = normalize(&prod, &[int(0), int(0), int(0), int(0)], &u).unwrap();
        assert_eq!(o.v, prod);
        assert!(!o.swapped);
        assert_eq!(o.expectation(&u), int(0));

        let c = vec![int(5); 4];
        assert!(normalize(&c, &c, &u).unwrap().v.iter().all(Zero::is_zero));

        let d = pi_eps(ratio(1, 8));
        let o = normalize(&prod, &[int(0), int(0), int(0), int(0)], &d).unwrap();
        assert_eq!(o.expectation(&d), ratio(-1, 2));
        assert!(!o.swapped);

        let o = normalize(&vec![int(0); 4], &prod, &d).unwrap();
        assert!(o.swapped);
        assert_eq!(o.v, prod);

        assert!(normalize(&prod[..3], &prod, &d).is_err());
    }
}
