//! JSON instance and mechanism files.
//!
//! Two-option instance:
//!
//! ```json
//! {"agents": ["l", "r"],
//!  "types": {"l": ["-1", "1"], "r": ["-1", "1"]},
//!  "pi": [["1/4", "1/4"], ["1/4", "1/4"]],
//!  "vL": [["1", "-1"], ["-1", "1"]],
//!  "vR": [["0", "0"], ["0", "0"]]}
//! ```
//!
//! Allocation instance: `"v"` maps each agent to a value tensor, `"disposal"`
//! selects free disposal, and the independent type distribution is given
//! either as `"marginals": {agent: [...]}` or as a product tensor `"pi"`.
//!
//! Numbers are exact rational strings (`"1/4"`, `"0.25"`, `"-3"`); bare JSON
//! numbers are accepted on input and converted through their decimal text.
//! Tensors nest one array level per agent, first agent outermost.

use indexmap::IndexMap;
use num_traits::Zero;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::model::{Instance, JointDist, Mechanism, TypeSpace};
use crate::nalloc::{AllocationInstance, AllocationMechanism};
use crate::rational::{self, Q};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Remove types with zero marginal probability instead of rejecting them.
    pub drop_zero_marginal_types: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Document {
    TwoOption(Instance),
    Allocation(AllocationInstance),
}

impl Document {
    pub fn space(&self) -> &TypeSpace {
        match self {
            Document::TwoOption(i) => i.space(),
            Document::Allocation(a) => &a.space,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Document::TwoOption(i) => &i.name,
            Document::Allocation(a) => &a.name,
        }
    }
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::schema("<document>", e.to_string()))
}

/// Parse either kind of instance; the `"v"` map or a `"disposal"` flag
/// selects the allocation schema.
pub fn parse_document(text: &str, opts: ParseOptions) -> Result<Document> {
    let doc = parse_json(text)?;
    let obj = as_object(&doc, "<document>")?;
    if obj.contains_key("v") || obj.contains_key("disposal") {
        allocation_from_value(&doc, opts).map(Document::Allocation)
    } else {
        instance_from_value(&doc, opts).map(Document::TwoOption)
    }
}

pub fn parse_instance(text: &str, opts: ParseOptions) -> Result<Instance> {
    instance_from_value(&parse_json(text)?, opts)
}

pub fn parse_allocation(text: &str, opts: ParseOptions) -> Result<AllocationInstance> {
    allocation_from_value(&parse_json(text)?, opts)
}

pub fn instance_from_value(doc: &Value, opts: ParseOptions) -> Result<Instance> {
    let obj = as_object(doc, "<document>")?;
    let (name, seed) = header(obj)?;
    let mut space = type_space(obj)?;
    space.require_two_agents("two-option instance")?;
    let mut pi = tensor(required(obj, "pi")?, &space.shape(), "pi")?;
    let mut vl = tensor(required(obj, "vL")?, &space.shape(), "vL")?;
    let mut vr = match obj.get("vR") {
        Some(v) => tensor(v, &space.shape(), "vR")?,
        None => vec![Q::zero(); space.num_profiles()],
    };
    if opts.drop_zero_marginal_types {
        let keep = positive_types(&space, &pi);
        let (sub, map) = restrict(&space, &keep)?;
        let pick = |v: &[Q]| map.iter().map(|&k| v[k].clone()).collect::<Vec<_>>();
        pi = pick(&pi);
        vl = pick(&vl);
        vr = pick(&vr);
        space = sub;
    }
    let dist = JointDist::new(space, pi).map_err(|e| in_field("pi", e))?;
    let mut inst = Instance::new(name, dist, vl, Some(vr))?;
    inst.seed = seed;
    Ok(inst)
}

pub fn allocation_from_value(doc: &Value, opts: ParseOptions) -> Result<AllocationInstance> {
    let obj = as_object(doc, "<document>")?;
    let (name, seed) = header(obj)?;
    let space = type_space(obj)?;
    let n = space.num_agents();
    let mut marginals: Vec<Vec<Q>> = match (obj.get("marginals"), obj.get("pi")) {
        (Some(m), _) => {
            let m = as_object(m, "marginals")?;
            space
                .agents()
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let field = format!("marginals.{a}");
                    let v = m.get(a).ok_or_else(|| Error::schema(&field, "missing"))?;
                    tensor(v, &[space.num_types(i)], &field)
                })
                .collect::<Result<_>>()?
        }
        (None, Some(pi)) => {
            let probs = tensor(pi, &space.shape(), "pi")?;
            let dist = JointDist::new(space.clone(), probs).map_err(|e| in_field("pi", e))?;
            if !dist.is_independent() {
                return Err(Error::schema("pi", "allocation instances require independent types"));
            }
            dist.marginals().to_vec()
        }
        (None, None) => return Err(Error::schema("marginals", "missing (or give `pi`)")),
    };
    let vmap = as_object(required(obj, "v")?, "v")?;
    let mut values: Vec<Vec<Q>> = space
        .agents()
        .iter()
        .map(|a| {
            let field = format!("v.{a}");
            let t = vmap.get(a).ok_or_else(|| Error::schema(&field, "missing"))?;
            tensor(t, &space.shape(), &field)
        })
        .collect::<Result<_>>()?;
    if let Some(extra) = vmap.keys().find(|k| space.agent_index(k).is_none()) {
        return Err(Error::schema(format!("v.{extra}"), "unknown agent"));
    }
    let disposal = match obj.get("disposal") {
        None => false,
        Some(Value::Bool(b)) => *b,
        Some(_) => return Err(Error::schema("disposal", "expected true or false")),
    };
    let mut space = space;
    if opts.drop_zero_marginal_types {
        let keep: Vec<Vec<bool>> = marginals
            .iter()
            .map(|m| m.iter().map(|p| !p.is_zero()).collect())
            .collect();
        let (sub, map) = restrict(&space, &keep)?;
        for (i, m) in marginals.iter_mut().enumerate() {
            *m = m.iter().zip(&keep[i]).filter(|(_, k)| **k).map(|(p, _)| p.clone()).collect();
        }
        for v in values.iter_mut() {
            *v = map.iter().map(|&k| v[k].clone()).collect();
        }
        space = sub;
    }
    debug_assert_eq!(values.len(), n);
    let mut inst = AllocationInstance::new(name, space, marginals, values, disposal)?;
    inst.seed = seed;
    Ok(inst)
}

/// Read the `"x"` tensor of a mechanism file (or of any report embedding one).
pub fn parse_mechanism(text: &str, space: &TypeSpace) -> Result<Mechanism> {
    let doc = parse_json(text)?;
    let obj = as_object(&doc, "<document>")?;
    let values = tensor(required(obj, "x")?, &space.shape(), "x")?;
    Mechanism::new(values).map_err(|e| in_field("x", e))
}

/// Read `"x": {agent: tensor}` for an allocation mechanism.
pub fn parse_allocation_mechanism(text: &str, space: &TypeSpace) -> Result<AllocationMechanism> {
    let doc = parse_json(text)?;
    let obj = as_object(&doc, "<document>")?;
    let xmap = as_object(required(obj, "x")?, "x")?;
    let shares = space
        .agents()
        .iter()
        .map(|a| {
            let field = format!("x.{a}");
            let t = xmap.get(a).ok_or_else(|| Error::schema(&field, "missing"))?;
            tensor(t, &space.shape(), &field)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AllocationMechanism::new(shares))
}

pub fn instance_to_value(inst: &Instance) -> Value {
    let sp = inst.space();
    let mut obj = Map::new();
    obj.insert("name".into(), json!(inst.name));
    if let Some(s) = inst.seed {
        obj.insert("seed".into(), json!(s));
    }
    obj.insert("agents".into(), json!(sp.agents()));
    obj.insert("types".into(), types_value(sp));
    obj.insert("pi".into(), tensor_value(inst.dist.probs(), &sp.shape()));
    obj.insert("vL".into(), tensor_value(&inst.objective.raw_vl, &sp.shape()));
    if inst.objective.raw_vr.iter().any(|v| !v.is_zero()) {
        obj.insert("vR".into(), tensor_value(&inst.objective.raw_vr, &sp.shape()));
    }
    Value::Object(obj)
}

pub fn allocation_to_value(inst: &AllocationInstance) -> Value {
    let sp = &inst.space;
    let mut obj = Map::new();
    obj.insert("name".into(), json!(inst.name));
    if let Some(s) = inst.seed {
        obj.insert("seed".into(), json!(s));
    }
    obj.insert("agents".into(), json!(sp.agents()));
    obj.insert("types".into(), types_value(sp));
    let marg: Map<String, Value> = sp
        .agents()
        .iter()
        .zip(&inst.marginals)
        .map(|(a, m)| (a.clone(), strings(m)))
        .collect();
    obj.insert("marginals".into(), Value::Object(marg));
    let v: Map<String, Value> = sp
        .agents()
        .iter()
        .zip(&inst.values)
        .map(|(a, v)| (a.clone(), tensor_value(v, &sp.shape())))
        .collect();
    obj.insert("v".into(), Value::Object(v));
    obj.insert("disposal".into(), json!(inst.disposal));
    Value::Object(obj)
}

pub fn mechanism_to_value(x: &Mechanism, space: &TypeSpace) -> Value {
    tensor_value(x.values(), &space.shape())
}

pub fn allocation_mechanism_to_value(x: &AllocationMechanism, space: &TypeSpace) -> Value {
    let m: Map<String, Value> = space
        .agents()
        .iter()
        .zip(&x.shares)
        .map(|(a, s)| (a.clone(), tensor_value(s, &space.shape())))
        .collect();
    Value::Object(m)
}

pub fn write_instance(inst: &Instance) -> String {
    to_canonical_string(&instance_to_value(inst))
}

pub fn write_allocation(inst: &AllocationInstance) -> String {
    to_canonical_string(&allocation_to_value(inst))
}

/// Objects one key per line, arrays inline, trailing newline.
pub fn to_canonical_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    match v {
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            let last = map.len() - 1;
            for (i, (k, val)) in map.iter().enumerate() {
                out.push_str(&"  ".repeat(indent + 1));
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(val, indent + 1, out);
                if i != last {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&"  ".repeat(indent));
            out.push('}');
        }
        Value::Array(items) if items.iter().any(|x| x.is_object()) => {
            out.push_str("[\n");
            let last = items.len() - 1;
            for (i, item) in items.iter().enumerate() {
                out.push_str(&"  ".repeat(indent + 1));
                write_value(item, indent + 1, out);
                if i != last {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&"  ".repeat(indent));
            out.push(']');
        }
        other => out.push_str(&other.to_string()),
    }
}

pub fn strings(v: &[Q]) -> Value {
    Value::Array(v.iter().map(|q| Value::String(rational::format(q))).collect())
}

pub fn tensor_value(flat: &[Q], shape: &[usize]) -> Value {
    match shape {
        [] => Value::String(rational::format(&flat[0])),
        [_] => strings(flat),
        [n, rest @ ..] => {
            let chunk = flat.len() / n;
            Value::Array(flat.chunks(chunk).map(|c| tensor_value(c, rest)).collect())
        }
    }
}

fn types_value(sp: &TypeSpace) -> Value {
    let m: Map<String, Value> = sp
        .agents()
        .iter()
        .enumerate()
        .map(|(i, a)| (a.clone(), json!(sp.labels(i))))
        .collect();
    Value::Object(m)
}

fn header(obj: &Map<String, Value>) -> Result<(String, Option<u64>)> {
    let name = match obj.get("name") {
        None => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(Error::schema("name", "expected a string")),
    };
    let seed = match obj.get("seed") {
        None | Some(Value::Null) => None,
        Some(v) => Some(v.as_u64().ok_or_else(|| Error::schema("seed", "expected a nonnegative integer"))?),
    };
    Ok((name, seed))
}

fn type_space(obj: &Map<String, Value>) -> Result<TypeSpace> {
    let agents: Vec<String> = match required(obj, "agents")? {
        Value::Array(a) => a
            .iter()
            .enumerate()
            .map(|(i, v)| label(v, &format!("agents[{i}]")))
            .collect::<Result<_>>()?,
        _ => return Err(Error::schema("agents", "expected an array of names")),
    };
    let tmap = as_object(required(obj, "types")?, "types")?;
    let mut types = Vec::with_capacity(agents.len());
    for a in &agents {
        let field = format!("types.{a}");
        let labels = match tmap.get(a) {
            Some(Value::Array(ls)) => ls
                .iter()
                .enumerate()
                .map(|(i, v)| label(v, &format!("{field}[{i}]")))
                .collect::<Result<Vec<_>>>()?,
            Some(_) => return Err(Error::schema(&field, "expected an array of labels")),
            None => return Err(Error::schema(&field, "missing")),
        };
        types.push(labels);
    }
    if let Some(extra) = tmap.keys().find(|k| !agents.contains(k)) {
        return Err(Error::schema(format!("types.{extra}"), "unknown agent"));
    }
    TypeSpace::new(agents, types)
}

fn label(v: &Value, field: &str) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(Error::schema(field, "expected a string or number")),
    }
}

fn required<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::schema(key, "missing"))
}

fn as_object<'a>(v: &'a Value, field: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::schema(field, "expected an object"))
}

fn number(v: &Value, field: &str) -> Result<Q> {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        _ => return Err(Error::schema(field, "expected a rational string")),
    };
    rational::parse(&text).map_err(|_| Error::schema(field, format!("cannot parse `{text}` as a rational")))
}

/// Flatten a nested array of the given shape, row-major.
pub fn tensor(v: &Value, shape: &[usize], field: &str) -> Result<Vec<Q>> {
    let mut out = Vec::with_capacity(shape.iter().product());
    fill(v, shape, field, &mut out)?;
    Ok(out)
}

fn fill(v: &Value, shape: &[usize], field: &str, out: &mut Vec<Q>) -> Result<()> {
    match shape {
        [] => {
            out.push(number(v, field)?);
            Ok(())
        }
        [n, rest @ ..] => {
            let items = v
                .as_array()
                .ok_or_else(|| Error::schema(field, format!("expected an array of length {n}")))?;
            if items.len() != *n {
                return Err(Error::schema(
                    field,
                    format!("expected length {n}, found {}", items.len()),
                ));
            }
            for (i, item) in items.iter().enumerate() {
                fill(item, rest, &format!("{field}[{i}]"), out)?;
            }
            Ok(())
        }
    }
}

fn in_field(field: &str, e: Error) -> Error {
    match e {
        Error::Schema { .. } => e,
        other => Error::schema(field, other.to_string()),
    }
}

fn positive_types(space: &TypeSpace, probs: &[Q]) -> Vec<Vec<bool>> {
    let mut keep: Vec<Vec<bool>> = (0..space.num_agents())
        .map(|i| vec![false; space.num_types(i)])
        .collect();
    for (k, p) in probs.iter().enumerate() {
        if !p.is_zero() {
            for (i, ki) in keep.iter_mut().enumerate() {
                ki[space.type_of(k, i)] = true;
            }
        }
    }
    keep
}

/// Sub-space keeping the flagged types, plus the old flat index of every
/// new profile.
fn restrict(space: &TypeSpace, keep: &[Vec<bool>]) -> Result<(TypeSpace, Vec<usize>)> {
    let types: Vec<Vec<String>> = (0..space.num_agents())
        .map(|i| {
            space
                .labels(i)
                .iter()
                .zip(&keep[i])
                .filter(|(_, k)| **k)
                .map(|(l, _)| l.clone())
                .collect()
        })
        .collect();
    let sub = TypeSpace::new(space.agents().to_vec(), types)?;
    let kept: Vec<Vec<usize>> = keep
        .iter()
        .map(|k| k.iter().enumerate().filter(|(_, b)| **b).map(|(t, _)| t).collect())
        .collect();
    let map = (0..sub.num_profiles())
        .map(|k| {
            let prof: Vec<usize> = sub.profile(k).iter().enumerate().map(|(i, &t)| kept[i][t]).collect();
            space.index(&prof)
        })
        .collect();
    Ok((sub, map))
}

/// Agent-keyed map helper for reports.
pub fn by_agent<T: Clone>(space: &TypeSpace, items: &[T]) -> IndexMap<String, T> {
    space.agents().iter().cloned().zip(items.iter().cloned()).collect()
}
