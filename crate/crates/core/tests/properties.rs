//! Structural invariants over randomly generated instances.

use mechkit::game::{maximin, maximin_matrix, minimax_matrix, obedience_check};
use mechkit::ic::{check_ic, spans};
use mechkit::io::{self, ParseOptions};
use mechkit::model::normalize;
use mechkit::nalloc::{self, AllocationInstance};
use mechkit::numerics::orthogonal_projection;
use mechkit::oracle::{self, generate, generate_allocation, sample_ic_mechanisms, DistKind, GenerateSpec, ObjectiveShape};
use mechkit::profit::{construct_profitable, decompose, transport_criterion};
use mechkit::rational::{dot, int, ratio};
use mechkit::{Instance, JointDist, Mechanism, Q};
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn shape() -> impl Strategy<Value = Vec<usize>> {
    (1usize..=3, 1usize..=3).prop_map(|(a, b)| vec![a + 1, b])
}

fn kind() -> impl Strategy<Value = DistKind> {
    prop_oneof![
        Just(DistKind::Independent),
        Just(DistKind::Correlated),
        Just(DistKind::FullRank),
        (1usize..=3).prop_map(DistKind::ConditionallyIndependent),
    ]
}

fn instance() -> impl Strategy<Value = Instance> {
    (any::<u64>(), shape(), kind()).prop_map(|(seed, shape, kind)| {
        let kind = match kind {
            DistKind::FullRank if shape[1] < 2 => DistKind::Correlated,
            k => k,
        };
        generate(&GenerateSpec::new(seed, shape, kind).objective(ObjectiveShape::Mixed)).unwrap()
    })
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_matrix() -> impl Strategy<Value = Vec<Vec<Q>>> {
    (1usize..=4, 1usize..=4).prop_flat_map(|(r, c)| {
        prop::collection::vec(prop::collection::vec((-5i64..=5).prop_map(int), c), r)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn conditionals_reconstruct_the_joint(inst in instance()) {
        let d = &inst.dist;
        let sp = d.space();
        for agent in 0..2 {
            let cond = d.conditionals(agent);
            for row in &cond {
                prop_assert_eq!(row.iter().fold(Q::zero(), |a, b| a + b), int(1));
            }
            for k in 0..sp.num_profiles() {
                let t = sp.type_of(k, agent);
                let o = sp.others_index(k, agent);
                prop_assert_eq!(&cond[t][o] * &d.marginal(agent)[t], d.prob(k).clone());
            }
        }
    }

    #[test]
    fn serialization_round_trips(inst in instance()) {
        let text = io::write_instance(&inst);
        let back = io::parse_instance(&text, ParseOptions::default()).unwrap();
        prop_assert_eq!(io::write_instance(&back), text);
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn normalization_is_idempotent(inst in instance(), shift in -3i64..=3) {
        let raw_r: Vec<Q> = inst.v().iter().map(|_| int(shift)).collect();
        let o = normalize(&inst.objective.raw_vl, &raw_r, &inst.dist).unwrap();
        let diff: Vec<Q> = inst.objective.raw_vl.iter().zip(&raw_r).map(|(a, b)| a - b).collect();
        prop_assert_eq!(o.swapped, inst.dist.expectation(&diff).is_positive());
        prop_assert!(!o.expectation(&inst.dist).is_positive());
        let again = normalize(&o.v, &vec![Q::zero(); o.v.len()], &inst.dist).unwrap();
        prop_assert!(!again.swapped);
        prop_assert_eq!(again.v, o.v);
    }

    #[test]
    fn projection_is_idempotent(target in prop::collection::vec((-4i64..=4).prop_map(int), 4),
                                gens in prop::collection::vec(prop::collection::vec((-3i64..=3).prop_map(int), 4), 0..4)) {
        let p = orthogonal_projection(&target, &gens);
        for g in &gens {
            prop_assert!(dot(g, &p.residual).is_zero());
        }
        let sum: Vec<Q> = p.projection.iter().zip(&p.residual).map(|(a, b)| a + b).collect();
        prop_assert_eq!(sum, target);
        let again = orthogonal_projection(&p.projection, &gens);
        prop_assert_eq!(again.projection, p.projection);
        prop_assert!(again.residual.iter().all(Zero::is_zero));
    }

    #[test]
    fn minimax_equals_maximin(m in small_matrix()) {
        let a = maximin_matrix(&m).unwrap();
        let b = minimax_matrix(&m).unwrap();
        prop_assert_eq!(&a.value, &b.value);
        prop_assert!(a.is_nash(&m));
        prop_assert!(b.is_nash(&m));
    }

    #[test]
    fn obedience_equals_ic_for_any_mechanism(inst in instance(), seed in any::<u64>()) {
        // arbitrary mechanisms, IC or not
        let mut r = rng(seed);
        let np = inst.space().num_profiles();
        let x = Mechanism::new((0..np).map(|_| ratio(rand::Rng::gen_range(&mut r, 0..=4), 4)).collect()).unwrap();
        let ic = check_ic(&x, &inst.dist).unwrap();
        prop_assert!(ic.consistent());
        prop_assert_eq!(obedience_check(&x, &inst.dist).unwrap().obedient, ic.verdict);
    }

    #[test]
    fn ic_mechanisms_have_the_maximin_value(inst in instance(), seed in any::<u64>()) {
        let d = &inst.dist;
        let indep = d.independent_counterpart();
        for x in sample_ic_mechanisms(d, 4, &mut rng(seed)).unwrap() {
            let r = check_ic(&x, d).unwrap();
            prop_assert!(r.verdict && r.consistent());
            prop_assert!(obedience_check(&x, d).unwrap().obedient);
            let value = maximin(&x, d.space()).unwrap().value;
            prop_assert_eq!(r.common_value.as_ref(), Some(&value));
            prop_assert!(r.interim.iter().flatten().flatten().all(|v| v == &value));
            // IC under π implies IC under the product of its marginals
            prop_assert!(check_ic(&x, &indep).unwrap().verdict);
            prop_assert_eq!(d.expectation(x.values()), indep.expectation(x.values()));
        }
    }

    #[test]
    fn spanning_transfers_incentive_compatibility(inst in instance(), seed in any::<u64>(), a in 1i64..=3) {
        let d = &inst.dist;
        let indep = d.independent_counterpart();
        let w = ratio(a, 4);
        let mix: Vec<Q> = d.probs().iter().zip(indep.probs()).map(|(p, q)| &w * p + (int(1) - &w) * q).collect();
        let mix = JointDist::new(d.space().clone(), mix).unwrap();
        for other in [&indep, &mix] {
            let v = spans(d, other).unwrap();
            prop_assert!(v.spans);
            prop_assert!(mechkit::ic::verify_span_coefficients(d, other, &v));
            for x in sample_ic_mechanisms(d, 3, &mut rng(seed)).unwrap() {
                prop_assert!(check_ic(&x, other).unwrap().verdict);
            }
        }
    }

    #[test]
    fn decomposition_reconstructs(inst in instance(), seed in any::<u64>()) {
        let indep = inst.dist.independent_counterpart();
        for x in sample_ic_mechanisms(&indep, 4, &mut rng(seed)).unwrap() {
            let d = decompose(&x, &indep).unwrap();
            prop_assert!(d.audit.passed());
            prop_assert_eq!(d.reconstruct(indep.marginal(0), indep.marginal(1)), x.matrix(indep.space().num_types(1)));
        }
    }

    #[test]
    fn zero_mean_additive_shift_is_invisible(inst in instance(), seed in any::<u64>(),
                                            ul in prop::collection::vec(-3i64..=3, 4), ur in prop::collection::vec(-3i64..=3, 3)) {
        let indep = inst.dist.independent_counterpart();
        let sp = indep.space();
        let add: Vec<Q> = (0..sp.num_profiles()).map(|k| int(ul[sp.type_of(k, 0)] + ur[sp.type_of(k, 1)])).collect();
        let mean = indep.expectation(&add);
        let shifted: Vec<Q> = inst.v().iter().zip(&add).map(|(v, u)| v + u - &mean).collect();
        let base = Instance::new("base", indep.clone(), inst.v().to_vec(), None).unwrap();
        let moved = Instance::new("moved", indep.clone(), shifted, None).unwrap();
        for x in sample_ic_mechanisms(&indep, 3, &mut rng(seed)).unwrap() {
            let pay = |i: &Instance| {
                let s = if i.objective.swapped { int(-1) } else { int(1) };
                s * i.payoff(&x)
            };
            prop_assert_eq!(pay(&base), pay(&moved));
        }
    }

    #[test]
    fn scaling_is_linear(inst in instance(), k in 1i64..=5, d in 1i64..=3) {
        let f = ratio(k, d);
        let scaled = inst.scaled(&f).unwrap();
        let a = oracle::solve_principal(&inst).unwrap();
        let b = oracle::solve_principal(&scaled).unwrap();
        prop_assert_eq!(&a.value * &f, b.value);
        prop_assert_eq!(a.profitable, b.profitable);
        let ta = transport_criterion(&inst).unwrap();
        let tb = transport_criterion(&scaled).unwrap();
        prop_assert_eq!(&ta.value * &f, tb.value);
        prop_assert_eq!(
            construct_profitable(&inst).unwrap().profitable,
            construct_profitable(&scaled).unwrap().profitable
        );
    }

    #[test]
    fn principal_optimizer_is_ic(inst in instance()) {
        let s = oracle::solve_principal(&inst).unwrap();
        prop_assert!(check_ic(&s.mechanism, &inst.dist).unwrap().verdict);
        prop_assert_eq!(inst.payoff(&s.mechanism), s.value);
    }
}

fn allocation(seed: u64, unbiased: bool, disposal: bool) -> AllocationInstance {
    let n = 2 + (seed % 2) as usize;
    let shape: Vec<usize> = (0..n).map(|i| 1 + ((seed >> (2 * i)) % 3) as usize).collect();
    let kind = if unbiased { DistKind::UnbiasedNAlloc } else { DistKind::Independent };
    generate_allocation(&GenerateSpec::new(seed, shape, kind).disposal(disposal)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn difference_condition_is_necessary_without_unbiasedness(seed in any::<u64>()) {
        let inst = allocation(seed, false, false);
        if nalloc::difference_additive(&inst).unwrap().holds {
            let s = oracle::solve_principal_n(&inst).unwrap();
            prop_assert!(s.value <= inst.vbar());
        }
    }

    #[test]
    fn disposal_reduction_is_verbatim(seed in any::<u64>()) {
        let inst = allocation(seed, true, true);
        let r = nalloc::with_disposal(&inst).unwrap();
        prop_assert!(r.iff_regime);
        let direct = nalloc::construct_profitable_n(&nalloc::augment(&inst).unwrap()).unwrap();
        prop_assert_eq!(r.pipeline.as_ref(), Some(&direct));
    }

    #[test]
    fn constructed_allocations_are_feasible(seed in any::<u64>()) {
        let inst = allocation(seed, true, false);
        let r = nalloc::construct_profitable_n(&inst).unwrap();
        if let Some(c) = r.construction() {
            let np = inst.space.num_profiles();
            for k in 0..np {
                let total = c.mechanism.shares.iter().fold(Q::zero(), |a, s| a + &s[k]);
                prop_assert_eq!(total, int(1));
            }
            prop_assert!(c.mechanism.shares.iter().flatten().all(|s| !s.is_negative()));
            prop_assert!(nalloc::check_ic_n(&c.mechanism, &inst).unwrap().verdict);
            prop_assert_eq!(&c.payoff, &c.claimed_payoff);
        }
    }
}
