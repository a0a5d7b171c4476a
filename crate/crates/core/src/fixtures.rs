//! Canonical instances shipped with the crate.
//!
//! Each builder here has a byte-identical JSON twin under `fixtures/`; the
//! round-trip tests keep the two in sync.

use crate::model::{Instance, JointDist, Mechanism, TypeSpace};
use crate::nalloc::AllocationInstance;
use crate::rational::{int, ratio, Q};

/// Two agents with types `{−1, 1}`.
pub fn pm1_space() -> TypeSpace {
    TypeSpace::numeric(&["l", "r"], &[&[-1, 1], &[-1, 1]])
}

fn product_objective(space: &TypeSpace) -> Vec<Q> {
    let a = space.numeric_labels(0).expect("numeric labels");
    let b = space.numeric_labels(1).expect("numeric labels");
    a.iter().flat_map(|s| b.iter().map(move |t| s * t)).collect()
}

/// `π_ε = [[1/4 − ε, 1/4 + ε], [1/4 + ε, 1/4 − ε]]` on the `{−1, 1}²` space.
pub fn pi_eps(eps: &Q) -> JointDist {
    let a = ratio(1, 4) - eps;
    let b = ratio(1, 4) + eps;
    JointDist::from_matrix(pm1_space(), &[vec![a.clone(), b.clone()], vec![b, a]])
        .expect("|ε| ≤ 1/4")
}

/// 2×2 uniform independent, `v = θ_ℓ·θ_r`.
pub fn fx1() -> Instance {
    let sp = pm1_space();
    let v = product_objective(&sp);
    Instance::new("fx1", JointDist::uniform(sp), v, None).expect("valid fixture")
}

/// `π_ε` with `ε = 1/8`, `v = θ_ℓ·θ_r`.
pub fn fx2() -> Instance {
    let dist = pi_eps(&ratio(1, 8));
    let v = product_objective(dist.space());
    Instance::new("fx2", dist, v, None).expect("valid fixture")
}

/// 3×3 uniform independent on `{−1, 0, 1}`, `v(s, t) = s·t`.
pub fn fx3() -> Instance {
    let sp = TypeSpace::numeric(&["l", "r"], &[&[-1, 0, 1], &[-1, 0, 1]]);
    let v = product_objective(&sp);
    Instance::new("fx3", JointDist::uniform(sp), v, None).expect("valid fixture")
}

/// Three agents, iid uniform on `{−1, 1}`, `v_i(θ) = θ_{(i mod 3)+1}`
/// (agent 1 values agent 2's type, 2 values 3's, 3 values 1's).
pub fn fx4() -> AllocationInstance {
    let sp = TypeSpace::numeric(&["1", "2", "3"], &[&[-1, 1], &[-1, 1], &[-1, 1]]);
    let values = (0..3)
        .map(|i| {
            let j = (i + 1) % 3;
            (0..sp.num_profiles())
                .map(|k| if sp.type_of(k, j) == 0 { int(-1) } else { int(1) })
                .collect()
        })
        .collect();
    let marginals = vec![vec![ratio(1, 2); 2]; 3];
    AllocationInstance::new("fx4".into(), sp, marginals, values, false).expect("valid fixture")
}

/// 2×2 uniform independent, `v = θ_ℓ + θ_r`.
pub fn fx5() -> Instance {
    let sp = pm1_space();
    let v = [-2, 0, 0, 2].into_iter().map(int).collect();
    Instance::new("fx5", JointDist::uniform(sp), v, None).expect("valid fixture")
}

/// The independent counterpart of `fx2`: uniform 2×2 with the same objective.
pub fn fx1_independent() -> Instance {
    let mut inst = fx1();
    inst.name = "fx1-independent".into();
    inst
}

/// `x*`: option L exactly when the two reports coincide.
pub fn xstar() -> Mechanism {
    Mechanism::from_matrix(&[vec![int(1), int(0)], vec![int(0), int(1)]]).expect("valid fixture")
}

/// Every shipped two-option instance.
pub fn two_option() -> Vec<Instance> {
    vec![fx1(), fx2(), fx3(), fx5(), fx1_independent()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_expectations() {
        assert_eq!(fx1().expected_value(), int(0));
        assert_eq!(fx2().expected_value(), ratio(-1, 2));
        assert!(!fx2().objective.swapped);
        assert_eq!(fx3().expected_value(), int(0));
        assert_eq!(fx5().expected_value(), int(0));
        assert_eq!(fx1().payoff(&xstar()), ratio(1, 2));
    }

    #[test]
    fn fx4_values_follow_the_next_agent() {
        let inst = fx4();
        let sp = &inst.space;
        let k = sp.index(&[0, 1, 0]);
        assert_eq!(inst.values[0][k], int(1));
        assert_eq!(inst.values[1][k], int(-1));
        assert_eq!(inst.values[2][k], int(-1));
    }
}
