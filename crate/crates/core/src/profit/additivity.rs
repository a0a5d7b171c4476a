//! Decomposition of the weighted objective `w = vπ` into a part explained by
//! conditional beliefs and an orthogonal residual.
//!
//! `U` is spanned by `1(θ_ℓ = a)·π(θ_r | θ_ℓ = b)` and
//! `1(θ_r = c)·π(θ_ℓ | θ_r = d)`. Under ex-ante indifference and
//! uninformativeness the principal's payoff only sees the component of `w`
//! orthogonal to `U`.

use num_traits::Zero;
use serde::Serialize;

use crate::error::Result;
use crate::model::Instance;
use crate::numerics::orthogonal_projection;
use crate::rational::{ser, Q};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdditivityReport {
    /// `w = v·π`, profile-indexed.
    #[serde(serialize_with = "ser::vec")]
    pub w: Vec<Q>,
    /// Generators of `U`: first the `(a, b)` family for agent ℓ, then the
    /// `(c, d)` family for agent r.
    #[serde(serialize_with = "ser::mat")]
    pub generators: Vec<Vec<Q>>,
    /// Projection `û` of `w` onto `U`.
    #[serde(serialize_with = "ser::vec")]
    pub u_hat: Vec<Q>,
    /// Residual `ŵ = w − û`, orthogonal to every generator.
    #[serde(serialize_with = "ser::vec")]
    pub w_hat: Vec<Q>,
    pub is_pi_additive: bool,
    /// Under independence and additivity: `v = v_ℓ(θ_ℓ) + v_r(θ_r)`.
    #[serde(serialize_with = "ser::opt_vec")]
    pub v_l: Option<Vec<Q>>,
    #[serde(serialize_with = "ser::opt_vec")]
    pub v_r: Option<Vec<Q>>,
}

/// Generators of `U` for a two-agent distribution.
pub fn belief_sections(inst: &Instance) -> Vec<Vec<Q>> {
    let sp = inst.space();
    let np = sp.num_profiles();
    let mut basis = Vec::new();
    for agent in 0..2 {
        let cond = inst.dist.conditionals(agent);
        for a in 0..sp.num_types(agent) {
            for belief in &cond {
                let mut g = vec![Q::zero(); np];
                for (k, gk) in g.iter_mut().enumerate() {
                    if sp.type_of(k, agent) == a {
                        *gk = belief[sp.others_index(k, agent)].clone();
                    }
                }
                basis.push(g);
            }
        }
    }
    basis
}

pub fn additivity_test(inst: &Instance) -> Result<AdditivityReport> {
    let sp = inst.space();
    sp.require_two_agents("additivity test")?;
    let w = inst.weighted_objective();
    let basis = belief_sections(inst);
    let proj = orthogonal_projection(&w, &basis);
    let is_pi_additive = proj.residual.iter().all(Zero::is_zero);
    let (v_l, v_r) = if is_pi_additive && inst.dist.is_independent() {
        let (l, r) = split_additive(inst.v(), sp.num_types(1));
        (Some(l), Some(r))
    } else {
        (None, None)
    };
    Ok(AdditivityReport {
        w,
        generators: basis,
        u_hat: proj.projection,
        w_hat: proj.residual,
        is_pi_additive,
        v_l,
        v_r,
    })
}

/// `v_ℓ(a) = v(a, 0) − v(0, 0)`, `v_r(c) = v(0, c)`; exact when `v` is additive.
fn split_additive(v: &[Q], cols: usize) -> (Vec<Q>, Vec<Q>) {
    let base = v[0].clone();
    let l = v.chunks(cols).map(|row| &row[0] - &base).collect();
    let r = v[..cols].to_vec();
    (l, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::{dot, int, ratio};

    #[test]
    fn additive_objective() {
        let r = additivity_test(&fixtures::fx5()).unwrap();
        assert!(r.is_pi_additive);
        assert!(r.w_hat.iter().all(Zero::is_zero));
        let (l, rr) = (r.v_l.unwrap(), r.v_r.unwrap());
        let v = fixtures::fx5().v().to_vec();
        for a in 0..2 {
            for c in 0..2 {
                assert_eq!(&l[a] + &rr[c], v[a * 2 + c]);
            }
        }
    }

    #[test]
    fn product_objective_under_independence() {
        let r = additivity_test(&fixtures::fx1()).unwrap();
        assert!(!r.is_pi_additive);
        let expect: Vec<Q> = [1, -1, -1, 1].into_iter().map(|v| ratio(v, 4)).collect();
        assert_eq!(r.w_hat, expect);
        assert!(r.u_hat.iter().all(Zero::is_zero));
        for g in &r.generators {
            assert_eq!(dot(g, &r.w_hat), int(0));
        }
    }

    #[test]
    fn product_objective_under_correlation() {
        let r = additivity_test(&fixtures::fx2()).unwrap();
        assert!(r.is_pi_additive);
        assert_eq!(r.u_hat, r.w);
        assert!(r.v_l.is_none());
    }
}
