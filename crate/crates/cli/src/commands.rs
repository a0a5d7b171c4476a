//! Command dispatch. Each command builds a JSON object; mechanisms appear
//! at top level as `"x"` in the instance's tensor layout so any report can
//! be fed back to `check-ic`.

use std::fmt;
use std::fs;
use std::path::Path;

use mechkit::game::{maximin, obedience_check};
use mechkit::ic::{check_ic, classify_extremes, max_spread, spans};
use mechkit::io::{self, Document, ParseOptions};
use mechkit::nalloc::{self, AllocationAnalysis, AllocationInstance, AllocationMechanism};
use mechkit::oracle::{self, DistKind, GenerateSpec, ObjectiveShape};
use mechkit::profit;
use mechkit::rational::format;
use mechkit::{Instance, JointDist, Mechanism};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::{Cli, Command, Format, Objective};

#[derive(Debug)]
pub enum Failure {
    Io(String),
    Core(mechkit::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(e) if e.is_refusal() => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Io(m) => f.write_str(m),
            Failure::Core(e) if e.is_refusal() => write!(f, "refused: {e}"),
            Failure::Core(e) => e.fmt(f),
        }
    }
}

impl From<mechkit::Error> for Failure {
    fn from(e: mechkit::Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome<T> = Result<T, Failure>;

pub fn run(cli: &Cli) -> Outcome<()> {
    let opts = ParseOptions {
        drop_zero_marginal_types: cli.drop_zero_types,
    };
    let text = match &cli.command {
        Command::Generate { shape, kind, objective, zero_mean, allocation, disposal } => {
            let spec = GenerateSpec::new(cli.seed.unwrap_or(0), parse_shape(shape)?, *kind)
                .objective(match objective {
                    Objective::General => ObjectiveShape::General,
                    Objective::Additive => ObjectiveShape::Additive,
                    Objective::Mixed => ObjectiveShape::Mixed,
                })
                .zero_mean(*zero_mean)
                .disposal(*disposal);
            // instances are always written in the input schema
            if *allocation || *kind == DistKind::UnbiasedNAlloc {
                io::write_allocation(&oracle::generate_allocation(&spec)?)
            } else {
                io::write_instance(&oracle::generate(&spec)?)
            }
        }
        command => {
            let report = report(command, opts)?;
            match cli.format {
                Format::Json => io::to_canonical_string(&report),
                Format::Text => crate::table::render(&report),
            }
        }
    };
    match &cli.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn report(command: &Command, opts: ParseOptions) -> Outcome<Value> {
    let (name, body) = match command {
        Command::Inspect { instance } => {
            let doc = load(instance, opts)?;
            (doc.name().to_owned(), inspect(&doc)?)
        }
        Command::CheckIc { instance, mechanism } => {
            let doc = load(instance, opts)?;
            let text = read(mechanism)?;
            let body = match &doc {
                Document::TwoOption(inst) => {
                    let x = io::parse_mechanism(&text, inst.space())?;
                    let mut body = object(&check_ic(&x, &inst.dist)?);
                    body.insert("obedient".into(), json!(obedience_check(&x, &inst.dist)?.obedient));
                    with_x(body, mechanism_value(&x, inst))
                }
                Document::Allocation(inst) => {
                    let x = io::parse_allocation_mechanism(&text, &inst.space)?;
                    x.check_feasible(&inst.space, inst.disposal)?;
                    with_x(object(&nalloc::check_ic_n(&x, inst)?), allocation_value(&x, inst))
                }
            };
            (doc.name().to_owned(), body)
        }
        Command::Maximin { instance, mechanism } => {
            let inst = two_option(instance, opts)?;
            let x = io::parse_mechanism(&read(mechanism)?, inst.space())?;
            let body = object(&maximin(&x, inst.space())?);
            (inst.name.clone(), with_x(body, mechanism_value(&x, &inst)))
        }
        Command::Spans { a, b } => {
            let (da, db) = (load(a, opts)?, load(b, opts)?);
            let body = object(&spans(dist(&da), dist(&db))?);
            (format!("{} / {}", da.name(), db.name()), body)
        }
        Command::Classify { instance, spread } => {
            let doc = load(instance, opts)?;
            let mut body = object(&classify_extremes(dist(&doc))?);
            if *spread {
                body.insert("max_spread".into(), json!(format(&max_spread(dist(&doc))?)));
            }
            (doc.name().to_owned(), body)
        }
        Command::Additivity { instance } => {
            let inst = two_option(instance, opts)?;
            (inst.name.clone(), object(&profit::additivity_test(&inst)?))
        }
        Command::Construct { instance } => {
            let inst = two_option(instance, opts)?;
            let r = profit::construct_profitable(&inst)?;
            let x = match &r.outcome {
                profit::ConstructionOutcome::Constructed(c) => Some(c.mechanism.clone()),
                profit::ConstructionOutcome::OracleFallback(s) => Some(s.mechanism.clone()),
                profit::ConstructionOutcome::NoneCertificate => None,
            };
            let body = object(&r);
            let body = match x {
                Some(x) => with_x(body, mechanism_value(&x, &inst)),
                None => body,
            };
            (inst.name.clone(), body)
        }
        Command::Transport { instance } => {
            let inst = two_option(instance, opts)?;
            (inst.name.clone(), object(&profit::transport_criterion(&inst)?))
        }
        Command::Orthogonal { a, b } => {
            let (da, db) = (load(a, opts)?, load(b, opts)?);
            let body = object(&profit::orthogonal(dist(&da), dist(&db))?);
            (format!("{} / {}", da.name(), db.name()), body)
        }
        Command::Decompose { instance, mechanism } => {
            let inst = two_option(instance, opts)?;
            let x = io::parse_mechanism(&read(mechanism)?, inst.space())?;
            let body = object(&profit::decompose(&x, &inst.dist)?);
            (inst.name.clone(), with_x(body, mechanism_value(&x, &inst)))
        }
        Command::Myo { instance } => {
            let inst = two_option(instance, opts)?;
            let r = profit::match_your_opponent(&inst)?;
            let x = r.mechanism();
            (inst.name.clone(), with_x(object(&r), mechanism_value(&x, &inst)))
        }
        Command::AllocN { instance } => {
            let inst = allocation(instance, opts)?;
            let analysis = nalloc::analyze(&inst)?;
            let body = object(&analysis);
            let body = match constructed(&analysis, inst.num_agents()) {
                Some(x) => with_x(body, allocation_value(&x, &inst)),
                None => body,
            };
            (inst.name.clone(), body)
        }
        Command::Oracle { instance } => {
            let doc = load(instance, opts)?;
            let body = match &doc {
                Document::TwoOption(inst) => {
                    let s = oracle::solve_principal(inst)?;
                    with_x(object(&s), mechanism_value(&s.mechanism, inst))
                }
                Document::Allocation(inst) => {
                    let s = oracle::solve_principal_n(inst)?;
                    with_x(object(&s), allocation_value(&s.mechanism, inst))
                }
            };
            (doc.name().to_owned(), body)
        }
        Command::Generate { .. } => unreachable!("handled by run"),
    };
    let mut out = Map::new();
    out.insert("command".into(), json!(command_name(command)));
    out.insert("instance".into(), json!(name));
    out.insert("basis".into(), json!(basis(command)));
    out.extend(body);
    Ok(Value::Object(out))
}

fn inspect(doc: &Document) -> Outcome<Map<String, Value>> {
    let mut m = Map::new();
    match doc {
        Document::TwoOption(inst) => {
            let d = &inst.dist;
            let sp = d.space();
            m.insert("kind".into(), json!("two_option"));
            m.insert("agents".into(), json!(sp.agents()));
            m.insert("shape".into(), json!(sp.shape()));
            m.insert("marginals".into(), json!(marginals(d)));
            m.insert("rank".into(), json!(d.matrix_rank()?));
            m.insert("independent".into(), json!(d.is_independent()));
            m.insert("full_rank".into(), json!(classify_extremes(d)?.maximal));
            m.insert("expected_value".into(), json!(format(&inst.expected_value())));
            m.insert("swapped".into(), json!(inst.objective.swapped));
        }
        Document::Allocation(inst) => {
            let sp = &inst.space;
            m.insert("kind".into(), json!("allocation"));
            m.insert("agents".into(), json!(sp.agents()));
            m.insert("shape".into(), json!(sp.shape()));
            m.insert("marginals".into(), json!(marginals(inst.dist())));
            m.insert("independent".into(), json!(true));
            let ev: Vec<String> = inst.expected_values().iter().map(format).collect();
            m.insert("expected_values".into(), serde_json::to_value(io::by_agent(sp, &ev)).expect("plain map"));
            m.insert("vbar".into(), json!(format(&inst.vbar())));
            m.insert("baseline".into(), json!(format(&inst.baseline())));
            m.insert("unbiased".into(), json!(inst.is_unbiased()));
            m.insert("disposal".into(), json!(inst.disposal));
            let witness = inst.interdependent_agent().map(|i| sp.agents()[i].clone());
            m.insert("interdependent_agent".into(), json!(witness));
        }
    }
    Ok(m)
}

fn marginals(d: &JointDist) -> Value {
    let sp = d.space();
    let per_agent: Vec<Value> = (0..sp.num_agents()).map(|i| io::strings(d.marginal(i))).collect();
    serde_json::to_value(io::by_agent(sp, &per_agent)).expect("plain map")
}

/// The mechanism a profitable allocation verdict rests on, restricted to
/// the real agents when the disposal dummy was appended.
fn constructed(a: &AllocationAnalysis, agents: usize) -> Option<AllocationMechanism> {
    let c = match a {
        AllocationAnalysis::Construction(r) => r.construction(),
        AllocationAnalysis::Disposal(d) => {
            if let Some(o) = &d.oracle {
                return Some(o.mechanism.clone());
            }
            d.pipeline.as_ref().and_then(|p| p.construction())
        }
        AllocationAnalysis::NecessaryCondition { oracle, .. } => return oracle.as_ref().map(|o| o.mechanism.clone()),
    }?;
    Some(AllocationMechanism::new(c.mechanism.shares[..agents].to_vec()))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Inspect { .. } => "inspect",
        Command::CheckIc { .. } => "check-ic",
        Command::Maximin { .. } => "maximin",
        Command::Spans { .. } => "spans",
        Command::Classify { .. } => "classify",
        Command::Additivity { .. } => "additivity",
        Command::Construct { .. } => "construct",
        Command::Transport { .. } => "transport",
        Command::Orthogonal { .. } => "orthogonal",
        Command::Decompose { .. } => "decompose",
        Command::Myo { .. } => "myo",
        Command::AllocN { .. } => "alloc-n",
        Command::Oracle { .. } => "oracle",
        Command::Generate { .. } => "generate",
    }
}

/// The result each verdict relies on, stated in words.
fn basis(c: &Command) -> &'static str {
    match c {
        Command::Inspect { .. } => {
            "objective oriented so that E[v] <= 0; a mechanism is profitable iff it beats the best constant decision"
        }
        Command::CheckIc { .. } => {
            "IC iff each type's interim allocation is the same for every report; raw inequalities, interim equalities and the ex-ante/uninformative split must agree"
        }
        Command::Maximin { .. } => "every interim value of an IC mechanism equals the value of the zero-sum game with payoff matrix x",
        Command::Spans { .. } => "if A spans B, every mechanism IC under A is IC under B",
        Command::Classify { .. } => {
            "full-rank distributions admit only constant IC mechanisms; independent ones admit the most"
        }
        Command::Additivity { .. } => "a zero-mean objective whose weighted form lies in the belief-section span admits no profitable mechanism",
        Command::Construct { .. } => {
            "with zero mean, x = eps*(w_hat - min w_hat) is IC and earns eps*sum(w_hat^2); a zero residual certifies impossibility; nonzero mean is decided by the direct LP"
        }
        Command::Transport { .. } => {
            "with zero mean, a profitable mechanism exists iff some orthogonal distribution with the same marginals gives v_hat positive expectation"
        }
        Command::Orthogonal { .. } => "orthogonal distributions have uncorrelated belief updates",
        Command::Decompose { .. } => {
            "under independence every IC mechanism is a nonnegative combination of transportation-polytope extreme points divided by the product of marginals"
        }
        Command::Myo { .. } => {
            "with uniform independent marginals a profitable mechanism exists iff the best matching earns a positive payoff; the symmetric-marginal diagonal criterion is checked against the direct LP"
        }
        Command::AllocN { .. } => {
            "for an unbiased principal a profitable allocation exists iff value differences are not additively separable; disposal is an extra zero-value agent; otherwise separability is only necessary and the direct LP decides"
        }
        Command::Oracle { .. } => "direct LP over the exact IC polytope; profitable iff the optimum exceeds the best constant decision",
        Command::Generate { .. } => "",
    }
}

fn parse_shape(s: &str) -> Outcome<Vec<usize>> {
    s.split(['x', ','])
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| Failure::Core(mechkit::Error::schema("shape", format!("expected e.g. `2x3`, got `{s}`"))))
}

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))
}

fn load(path: &Path, opts: ParseOptions) -> Outcome<Document> {
    Ok(io::parse_document(&read(path)?, opts)?)
}

fn two_option(path: &Path, opts: ParseOptions) -> Outcome<Instance> {
    match load(path, opts)? {
        Document::TwoOption(i) => Ok(i),
        Document::Allocation(_) => Err(mechkit::Error::precondition(
            "two-option instance",
            "this analysis applies to a two-agent choice between two options",
        )
        .into()),
    }
}

fn allocation(path: &Path, opts: ParseOptions) -> Outcome<AllocationInstance> {
    match load(path, opts)? {
        Document::Allocation(i) => Ok(i),
        Document::TwoOption(_) => Err(mechkit::Error::precondition(
            "allocation instance",
            "this analysis applies to allocating one good among n agents",
        )
        .into()),
    }
}

fn dist(doc: &Document) -> &JointDist {
    match doc {
        Document::TwoOption(i) => &i.dist,
        Document::Allocation(a) => a.dist(),
    }
}

fn object<T: Serialize>(v: &T) -> Map<String, Value> {
    match serde_json::to_value(v).expect("reports serialize") {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("result".into(), other);
            m
        }
    }
}

fn with_x(mut body: Map<String, Value>, x: Value) -> Map<String, Value> {
    body.insert("x".into(), x);
    body
}

fn mechanism_value(x: &Mechanism, inst: &Instance) -> Value {
    io::mechanism_to_value(x, inst.space())
}

fn allocation_value(x: &AllocationMechanism, inst: &AllocationInstance) -> Value {
    io::allocation_mechanism_to_value(x, &inst.space)
}
