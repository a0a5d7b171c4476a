//! Explicit profitable mechanisms from a nonzero additivity residual.
//!
//! With `E_π[v] = 0` and residual `ŵ ≠ 0`, the mechanism
//! `x̂ = ε(ŵ − min ŵ)` with `ε = 1/(max ŵ − min ŵ)` lies in `[0, 1]`, gives
//! every type the interim value `−ε·min ŵ` for every report, and earns
//! `ε·Σ ŵ²`. A zero residual certifies that no IC mechanism is profitable.
//! Outside `E_π[v] = 0` the verdict comes from the direct LP instead.

use num_traits::{Signed, Zero};
use serde::Serialize;

use super::additivity::{additivity_test, AdditivityReport};
use crate::error::{Error, Result};
use crate::ic::{check_ic, IcReport};
use crate::model::{Instance, Mechanism};
use crate::oracle::{solve_principal, PrincipalSolution};
use crate::rational::{self, ser, Q};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstructionResult {
    pub mechanism: Mechanism,
    #[serde(serialize_with = "ser::rat")]
    pub epsilon: Q,
    #[serde(serialize_with = "ser::rat")]
    pub min_w_hat: Q,
    /// `−ε·min ŵ`, the interim value of every type and report.
    #[serde(serialize_with = "ser::rat")]
    pub interim_value: Q,
    /// `ε·Σ ŵ²`.
    #[serde(serialize_with = "ser::rat")]
    pub claimed_payoff: Q,
    /// `E_π[v·x̂]` evaluated directly.
    #[serde(serialize_with = "ser::rat")]
    pub payoff: Q,
    pub ic: IcReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstructionOutcome {
    Constructed(Box<ConstructionResult>),
    /// `ŵ = 0`: every IC mechanism earns exactly zero.
    NoneCertificate,
    /// `E_π[v] ≠ 0`: decided by the direct LP.
    OracleFallback(PrincipalSolution),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstructionReport {
    #[serde(serialize_with = "ser::rat")]
    pub expected_value: Q,
    pub additivity: Option<AdditivityReport>,
    pub outcome: ConstructionOutcome,
    pub profitable: bool,
}

impl ConstructionReport {
    pub fn construction(&self) -> Option<&ConstructionResult> {
        match &self.outcome {
            ConstructionOutcome::Constructed(c) => Some(c),
            _ => None,
        }
    }
}

pub fn construct_profitable(inst: &Instance) -> Result<ConstructionReport> {
    inst.space().require_two_agents("profitable construction")?;
    let expected_value = inst.expected_value();
    if !expected_value.is_zero() {
        let sol = solve_principal(inst)?;
        return Ok(ConstructionReport {
            expected_value,
            additivity: None,
            profitable: sol.profitable,
            outcome: ConstructionOutcome::OracleFallback(sol),
        });
    }
    let additivity = additivity_test(inst)?;
    if additivity.is_pi_additive {
        return Ok(ConstructionReport {
            expected_value,
            additivity: Some(additivity),
            outcome: ConstructionOutcome::NoneCertificate,
            profitable: false,
        });
    }
    let result = build(inst, &additivity.w_hat)?;
    Ok(ConstructionReport {
        expected_value,
        additivity: Some(additivity),
        outcome: ConstructionOutcome::Constructed(Box::new(result)),
        profitable: true,
    })
}

fn build(inst: &Instance, w_hat: &[Q]) -> Result<ConstructionResult> {
    let min = rational::min(w_hat).expect("nonempty residual");
    let max = rational::max(w_hat).expect("nonempty residual");
    if max <= min {
        return Err(Error::Internal("nonzero residual without a sign change".into()));
    }
    let epsilon = Q::from_integer(1.into()) / (&max - &min);
    let mechanism = Mechanism::new(w_hat.iter().map(|w| &epsilon * (w - &min)).collect())?;
    let ic = check_ic(&mechanism, &inst.dist)?;
    let interim_value = -(&epsilon * &min);
    let claimed_payoff = &epsilon * w_hat.iter().fold(Q::zero(), |acc, w| acc + w * w);
    let payoff = inst.payoff(&mechanism);
    let audit = ic.verdict
        && ic.common_value.as_ref() == Some(&interim_value)
        && payoff == claimed_payoff
        && payoff.is_positive();
    if !audit {
        return Err(Error::Internal("constructed mechanism failed its audit".into()));
    }
    Ok(ConstructionResult {
        mechanism,
        epsilon,
        min_w_hat: min,
        interim_value,
        claimed_payoff,
        payoff,
        ic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::{int, ratio};

    #[test]
    fn diagonal_mechanism_is_recovered() {
        let r = construct_profitable(&fixtures::fx1()).unwrap();
        let c = r.construction().unwrap();
        assert_eq!(c.epsilon, int(2));
        assert_eq!(&c.mechanism, &fixtures::xstar());
        assert_eq!(c.payoff, ratio(1, 2));
        assert_eq!(c.interim_value, ratio(1, 2));
    }

    #[test]
    fn additive_objective_has_a_certificate() {
        let r = construct_profitable(&fixtures::fx5()).unwrap();
        assert_eq!(r.outcome, ConstructionOutcome::NoneCertificate);
        assert!(!r.profitable);
    }

    #[test]
    fn biased_objective_falls_back() {
        let r = construct_profitable(&fixtures::fx2()).unwrap();
        match &r.outcome {
            ConstructionOutcome::OracleFallback(sol) => assert_eq!(sol.value, int(0)),
            other => panic!("unexpected outcome {other:?}"),
        }
        assert!(!r.profitable);
    }
}
