//! Ground truth by direct linear programming, plus deterministic instance
//! generation for property sweeps.
//!
//! [`solve_principal`] maximizes `E_π[v·x]` over `{x : 0 ≤ x ≤ 1}` cut by
//! the exact IC equalities; [`solve_principal_n`] does the same for
//! allocation mechanisms. Neither uses any of the structural results the
//! other modules implement, so agreement between them is meaningful.

mod generate;

pub use generate::{
    generate, generate_allocation, generate_document, DistKind, GenerateSpec, ObjectiveShape,
};

use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ic::ic_polytope;
use crate::model::{Instance, JointDist, Mechanism};
use crate::nalloc::{AllocationInstance, AllocationMechanism};
use crate::numerics::{solve_lp, LinearProgram};
use crate::rational::{self, ser, Q};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrincipalSolution {
    #[serde(serialize_with = "ser::rat")]
    pub value: Q,
    pub mechanism: Mechanism,
    /// `max(0, E_π[v])`: the best constant decision.
    #[serde(serialize_with = "ser::rat")]
    pub baseline: Q,
    pub profitable: bool,
}

/// The principal's LP over the IC polytope.
pub fn solve_principal(inst: &Instance) -> Result<PrincipalSolution> {
    inst.space().require_two_agents("two-option principal problem")?;
    let (value, x) = maximize_over_ic(&inst.dist, inst.weighted_objective())?;
    let baseline = inst.expected_value().max(Q::zero());
    Ok(PrincipalSolution {
        profitable: value > baseline,
        value,
        mechanism: x,
        baseline,
    })
}

/// `max Σ_θ c(θ)·x(θ)` over IC mechanisms `x ∈ [0, 1]^Θ`; the optimizer is
/// a vertex of the polytope.
pub fn maximize_over_ic(dist: &JointDist, objective: Vec<Q>) -> Result<(Q, Mechanism)> {
    let np = dist.space().num_profiles();
    let mut lp = LinearProgram::new(objective);
    for row in ic_polytope(dist).rows {
        lp.add_eq(row, Q::zero());
    }
    for k in 0..np {
        lp.set_bounds(k, Some(Q::zero()), Some(Q::one()));
    }
    let opt = solve_lp(&lp)?
        .into_optimum()
        .ok_or_else(|| Error::Internal("principal LP not optimal".into()))?;
    Ok((opt.value, Mechanism::new(opt.primal)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationOracle {
    #[serde(serialize_with = "ser::rat")]
    pub value: Q,
    pub mechanism: AllocationMechanism,
    /// `v̄`, or `max(0, v̄)` with disposal.
    #[serde(serialize_with = "ser::rat")]
    pub baseline: Q,
    pub profitable: bool,
}

/// The allocation LP: shares `x_i ≥ 0` summing to one (at most one with
/// disposal) and interim shares independent of reports.
pub fn solve_principal_n(inst: &AllocationInstance) -> Result<AllocationOracle> {
    let sp = &inst.space;
    let n = inst.num_agents();
    let np = sp.num_profiles();
    let probs = inst.dist().probs();
    let objective = (0..n * np).map(|v| &inst.values[v / np][v % np] * &probs[v % np]).collect();
    let mut lp = LinearProgram::new(objective);
    for k in 0..np {
        let row = (0..n * np).map(|v| if v % np == k { Q::one() } else { Q::zero() }).collect();
        if inst.disposal {
            lp.add_le(row, Q::one());
        } else {
            lp.add_eq(row, Q::one());
        }
    }
    for i in 0..n {
        for t in 0..sp.num_types(i) {
            // E[x_i | report t] − E[x_i] = 0
            let mut row = vec![Q::zero(); n * np];
            for k in 0..np {
                let mut c = -probs[k].clone();
                if sp.type_of(k, i) == t {
                    c += &probs[k] / &inst.marginals[i][t];
                }
                row[i * np + k] = c;
            }
            if row.iter().any(|c| !c.is_zero()) {
                lp.add_eq(row, Q::zero());
            }
        }
    }
    let opt = solve_lp(&lp)?
        .into_optimum()
        .ok_or_else(|| Error::Internal("allocation LP not optimal".into()))?;
    let shares = opt.primal.chunks(np).map(<[Q]>::to_vec).collect();
    let baseline = inst.baseline();
    Ok(AllocationOracle {
        profitable: opt.value > baseline,
        value: opt.value,
        mechanism: AllocationMechanism::new(shares),
        baseline,
    })
}

/// IC mechanisms under `dist`: LP vertices for random objectives, midpoints
/// of earlier samples, and under independence conic combinations of random
/// transportation-polytope extreme points.
pub fn sample_ic_mechanisms<R: Rng>(dist: &JointDist, count: usize, rng: &mut R) -> Result<Vec<Mechanism>> {
    let np = dist.space().num_profiles();
    let independent = dist.is_independent();
    let two = dist.space().num_agents() == 2;
    let mut out: Vec<Mechanism> = Vec::with_capacity(count);
    for i in 0..count {
        let x = if independent && two && i % 3 == 1 {
            extreme_combination(dist.marginal(0), dist.marginal(1), rng)?
        } else if i % 3 == 2 && out.len() >= 2 {
            let a = &out[rng.gen_range(0..out.len())];
            let b = &out[rng.gen_range(0..out.len())];
            let w = rational::ratio(rng.gen_range(1..8), 8);
            let one_minus = Q::one() - &w;
            Mechanism::new(
                a.values()
                    .iter()
                    .zip(b.values())
                    .map(|(p, q)| &w * p + &one_minus * q)
                    .collect(),
            )?
        } else {
            let obj = (0..np).map(|_| rational::int(rng.gen_range(-4..=4))).collect();
            maximize_over_ic(dist, obj)?.1
        };
        out.push(x);
    }
    Ok(out)
}

/// A vertex of `Π(π_ℓ, π_r)` by the north-west corner rule after random
/// row and column permutations.
pub fn random_extreme_point<R: Rng>(pl: &[Q], pr: &[Q], rng: &mut R) -> Vec<Vec<Q>> {
    use rand::seq::SliceRandom;
    let mut rows: Vec<usize> = (0..pl.len()).collect();
    let mut cols: Vec<usize> = (0..pr.len()).collect();
    rows.shuffle(rng);
    cols.shuffle(rng);
    let mut a: Vec<Q> = rows.iter().map(|&r| pl[r].clone()).collect();
    let mut b: Vec<Q> = cols.iter().map(|&c| pr[c].clone()).collect();
    let mut m = vec![vec![Q::zero(); pr.len()]; pl.len()];
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let t = a[i].clone().min(b[j].clone());
        m[rows[i]][cols[j]] = t.clone();
        a[i] -= &t;
        b[j] -= &t;
        if a[i].is_zero() {
            i += 1;
        } else {
            j += 1;
        }
    }
    m
}

/// `x = s·Σ_j λ_j π^j/(π_ℓπ_r)` with random extreme points, random weights,
/// and `s` scaled into `(0, 1/max]` so that `x ≤ 1`.
fn extreme_combination<R: Rng>(pl: &[Q], pr: &[Q], rng: &mut R) -> Result<Mechanism> {
    let k = rng.gen_range(1..=3);
    let mut acc = vec![Q::zero(); pl.len() * pr.len()];
    for _ in 0..k {
        let e = random_extreme_point(pl, pr, rng);
        let lambda = rational::int(rng.gen_range(1..=4));
        for (a, row) in e.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                acc[a * pr.len() + b] += &lambda * v / (&pl[a] * &pr[b]);
            }
        }
    }
    let peak = rational::max(&acc).filter(|p| p.is_positive()).ok_or_else(|| Error::Internal("empty combination".into()))?;
    let scale = rational::ratio(rng.gen_range(1..=4), 4) / peak;
    Mechanism::new(acc.iter().map(|v| v * &scale).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::ic::check_ic;
    use crate::nalloc::check_ic_n;
    use crate::rational::{int, ratio};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fixture_values() {
        let s = solve_principal(&fixtures::fx1()).unwrap();
        assert_eq!(s.value, ratio(1, 2));
        assert_eq!(s.mechanism, fixtures::xstar());
        assert!(s.profitable);
        let s = solve_principal(&fixtures::fx2()).unwrap();
        assert_eq!(s.value, int(0));
        assert!(s.mechanism.is_constant() && !s.profitable);
        let s = solve_principal(&fixtures::fx5()).unwrap();
        assert_eq!(s.value, int(0));
    }

    #[test]
    fn allocation_fixture() {
        let inst = fixtures::fx4();
        let s = solve_principal_n(&inst).unwrap();
        assert!(s.profitable && s.value.is_positive());
        assert!(check_ic_n(&s.mechanism, &inst).unwrap().verdict);
    }

    #[test]
    fn samples_are_ic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dist in [fixtures::fx1().dist, fixtures::fx3().dist, fixtures::fx2().dist] {
            for x in sample_ic_mechanisms(&dist, 9, &mut rng).unwrap() {
                assert!(check_ic(&x, &dist).unwrap().verdict);
            }
        }
    }

    #[test]
    fn north_west_corner_gives_vertices() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pl = vec![ratio(1, 2), ratio(1, 3), ratio(1, 6)];
        let pr = vec![ratio(1, 4), ratio(3, 4)];
        for _ in 0..10 {
            let e = random_extreme_point(&pl, &pr, &mut rng);
            assert!(crate::profit::is_acyclic_support(&e));
        }
    }
}
