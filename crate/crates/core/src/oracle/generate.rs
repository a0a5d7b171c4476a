//! Deterministic random instances.
//!
//! Probabilities are integer compositions over a common denominator of at
//! most 64, so every entry has a denominator dividing 64 (or a small
//! multiple when a shape needs more types than the denominator allows).
//! Objective values are small integers, shifted by their mean when a
//! zero-mean objective is requested.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::io::Document;
use crate::model::{Instance, JointDist, TypeSpace};
use crate::nalloc::AllocationInstance;
use crate::rational::{self, Q};

const DENOMINATOR: usize = 64;
const RETRIES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistKind {
    Independent,
    Correlated,
    FullRank,
    /// Mixture of `k` product distributions; rank at most `k`.
    ConditionallyIndependent(usize),
    /// Independent allocation instance with equal expected values.
    UnbiasedNAlloc,
}

impl std::str::FromStr for DistKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independent" => Ok(DistKind::Independent),
            "correlated" => Ok(DistKind::Correlated),
            "full-rank" => Ok(DistKind::FullRank),
            "unbiased-n-alloc" => Ok(DistKind::UnbiasedNAlloc),
            _ => s
                .strip_prefix("conditionally-independent")
                .and_then(|rest| rest.trim_start_matches([':', '=', '(']).trim_end_matches(')').parse().ok())
                .map(DistKind::ConditionallyIndependent)
                .ok_or_else(|| Error::schema("kind", format!("unknown kind `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveShape {
    General,
    /// `v = v_ℓ(θ_ℓ) + v_r(θ_r)`.
    Additive,
    /// Additive for roughly a third of seeds, general otherwise.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerateSpec {
    pub seed: u64,
    /// Types per agent.
    pub shape: Vec<usize>,
    pub kind: DistKind,
    pub objective: ObjectiveShape,
    /// Shift `v` so that `E_π[v] = 0`.
    pub zero_mean: bool,
    /// Allocation instances only.
    pub disposal: bool,
}

impl GenerateSpec {
    pub fn new(seed: u64, shape: Vec<usize>, kind: DistKind) -> Self {
        GenerateSpec {
            seed,
            shape,
            kind,
            objective: ObjectiveShape::General,
            zero_mean: false,
            disposal: false,
        }
    }

    pub fn objective(mut self, shape: ObjectiveShape) -> Self {
        self.objective = shape;
        self
    }

    pub fn zero_mean(mut self, on: bool) -> Self {
        self.zero_mean = on;
        self
    }

    pub fn disposal(mut self, on: bool) -> Self {
        self.disposal = on;
        self
    }
}

fn kind_name(kind: DistKind) -> String {
    match kind {
        DistKind::Independent => "independent".into(),
        DistKind::Correlated => "correlated".into(),
        DistKind::FullRank => "full-rank".into(),
        DistKind::ConditionallyIndependent(k) => format!("conditionally-independent-{k}"),
        DistKind::UnbiasedNAlloc => "unbiased-n-alloc".into(),
    }
}

fn space(agents: &[String], shape: &[usize]) -> Result<TypeSpace> {
    let types = shape
        .iter()
        .map(|&n| (0..n).map(|t| t.to_string()).collect())
        .collect();
    TypeSpace::new(agents.to_vec(), types)
}

/// `parts` positive integers summing to `total`, uniformly among such.
fn composition(rng: &mut ChaCha8Rng, total: usize, parts: usize) -> Vec<usize> {
    let total = total.max(parts);
    let mut cuts: Vec<usize> = sample(rng, total - 1, parts - 1).into_iter().map(|c| c + 1).collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(total)) {
        out.push(c - prev);
        prev = c;
    }
    out
}

fn normalized(rng: &mut ChaCha8Rng, total: usize, parts: usize) -> Vec<Q> {
    let w = composition(rng, total, parts);
    let sum: usize = w.iter().sum();
    w.into_iter().map(|x| rational::ratio(x as i64, sum as i64)).collect()
}

/// Per-agent denominator so that the product of all of them stays ≤ 64.
fn marginal_denominator(agents: usize, types: usize) -> usize {
    let d = (DENOMINATOR as f64).powf(1.0 / agents as f64).floor() as usize;
    d.max(types)
}

fn random_dist(rng: &mut ChaCha8Rng, sp: &TypeSpace, kind: DistKind) -> Result<JointDist> {
    let np = sp.num_profiles();
    let n = sp.num_agents();
    let independent = |rng: &mut ChaCha8Rng| {
        let marg: Vec<Vec<Q>> = (0..n)
            .map(|i| normalized(rng, marginal_denominator(n, sp.num_types(i)), sp.num_types(i)))
            .collect();
        JointDist::independent(sp.clone(), &marg)
    };
    match kind {
        DistKind::Independent | DistKind::UnbiasedNAlloc => independent(rng),
        DistKind::Correlated => {
            for _ in 0..RETRIES {
                let d = JointDist::new(sp.clone(), normalized(rng, DENOMINATOR, np))?;
                if !d.is_independent() || np == 1 || sp.shape().iter().filter(|&&t| t > 1).count() < 2 {
                    return Ok(d);
                }
            }
            Err(Error::Internal("could not draw a correlated distribution".into()))
        }
        DistKind::FullRank => {
            sp.require_two_agents("full-rank generation")?;
            for _ in 0..RETRIES {
                let d = JointDist::new(sp.clone(), normalized(rng, DENOMINATOR, np))?;
                if d.has_full_rank()? {
                    return Ok(d);
                }
            }
            // J + b·I has full rank for any b > 0
            let cols = sp.num_types(1);
            let w: Vec<i64> = (0..np).map(|k| 1 + 2 * i64::from(k / cols == k % cols)).collect();
            let sum: i64 = w.iter().sum();
            JointDist::new(sp.clone(), w.into_iter().map(|x| rational::ratio(x, sum)).collect())
        }
        DistKind::ConditionallyIndependent(k) => {
            sp.require_two_agents("conditionally independent generation")?;
            if k == 0 {
                return Err(Error::schema("kind", "mixture needs at least one component"));
            }
            let dw = k;
            let d0 = ((DENOMINATOR / dw) as f64).sqrt().floor() as usize;
            let weights = normalized(rng, dw, k);
            let mut probs = vec![Q::from_integer(0.into()); np];
            for w in &weights {
                let a = normalized(rng, d0.max(sp.num_types(0)), sp.num_types(0));
                let b = normalized(rng, d0.max(sp.num_types(1)), sp.num_types(1));
                for (idx, p) in probs.iter_mut().enumerate() {
                    *p += w * &a[sp.type_of(idx, 0)] * &b[sp.type_of(idx, 1)];
                }
            }
            JointDist::new(sp.clone(), probs)
        }
    }
}

fn small_int(rng: &mut ChaCha8Rng) -> Q {
    rational::int(rng.gen_range(-4..=4))
}

fn random_objective(rng: &mut ChaCha8Rng, sp: &TypeSpace, shape: ObjectiveShape) -> Vec<Q> {
    let additive = match shape {
        ObjectiveShape::General => false,
        ObjectiveShape::Additive => true,
        ObjectiveShape::Mixed => rng.gen_range(0..3) == 0,
    };
    if additive {
        let l: Vec<Q> = (0..sp.num_types(0)).map(|_| small_int(rng)).collect();
        let r: Vec<Q> = (0..sp.num_types(1)).map(|_| small_int(rng)).collect();
        (0..sp.num_profiles())
            .map(|k| &l[sp.type_of(k, 0)] + &r[sp.type_of(k, 1)])
            .collect()
    } else {
        (0..sp.num_profiles()).map(|_| small_int(rng)).collect()
    }
}

fn centred(v: Vec<Q>, dist: &JointDist) -> Vec<Q> {
    let mean = dist.expectation(&v);
    v.into_iter().map(|x| x - &mean).collect()
}

/// A two-agent instance.
pub fn generate(spec: &GenerateSpec) -> Result<Instance> {
    if spec.kind == DistKind::UnbiasedNAlloc {
        return Err(Error::schema("kind", "allocation kinds produce allocation instances"));
    }
    if spec.shape.len() != 2 || spec.shape.contains(&0) {
        return Err(Error::schema("shape", "two-option instances need two positive type counts"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sp = space(&["l".into(), "r".into()], &spec.shape)?;
    let dist = random_dist(&mut rng, &sp, spec.kind)?;
    let mut v = random_objective(&mut rng, &sp, spec.objective);
    if spec.zero_mean {
        v = centred(v, &dist);
    }
    let mut inst = Instance::new(format!("{}-{}", kind_name(spec.kind), spec.seed), dist, v, None)?;
    inst.seed = Some(spec.seed);
    Ok(inst)
}

/// An allocation instance with independent types and `E[v_i] = 0` for all
/// agents. Value structures vary with the seed: unrestricted, private
/// values, or a common term plus private terms.
pub fn generate_allocation(spec: &GenerateSpec) -> Result<AllocationInstance> {
    if spec.kind != DistKind::UnbiasedNAlloc && spec.kind != DistKind::Independent {
        return Err(Error::schema("kind", "allocation instances need independent types"));
    }
    if spec.shape.is_empty() || spec.shape.contains(&0) {
        return Err(Error::schema("shape", "every agent needs at least one type"));
    }
    let n = spec.shape.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let agents: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    let sp = space(&agents, &spec.shape)?;
    let dist = random_dist(&mut rng, &sp, DistKind::Independent)?;
    let np = sp.num_profiles();
    let structure = rng.gen_range(0..3);
    let common: Vec<Q> = (0..np).map(|_| small_int(&mut rng)).collect();
    let values = (0..n)
        .map(|i| {
            let own: Vec<Q> = (0..sp.num_types(i)).map(|_| small_int(&mut rng)).collect();
            let v: Vec<Q> = match structure {
                0 => (0..np).map(|_| small_int(&mut rng)).collect(),
                1 => (0..np).map(|k| own[sp.type_of(k, i)].clone()).collect(),
                _ => (0..np).map(|k| &common[k] + &own[sp.type_of(k, i)]).collect(),
            };
            if spec.kind == DistKind::UnbiasedNAlloc || spec.zero_mean {
                centred(v, &dist)
            } else {
                v
            }
        })
        .collect();
    let mut inst = AllocationInstance::new(
        format!("{}-{}", kind_name(spec.kind), spec.seed),
        sp,
        dist.marginals().to_vec(),
        values,
        spec.disposal,
    )?;
    inst.seed = Some(spec.seed);
    Ok(inst)
}

pub fn generate_document(spec: &GenerateSpec) -> Result<Document> {
    match spec.kind {
        DistKind::UnbiasedNAlloc => generate_allocation(spec).map(Document::Allocation),
        _ => generate(spec).map(Document::TwoOption),
    }
}
