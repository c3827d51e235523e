//! Concrete execution of closed-loop systems and automata.
//!
//! Both runners record every opaque application `(f, x)` they perform.
//! The resulting ⋄-sets are the brute-force oracle the symbolic pipeline is
//! tested against. Depth is always counted in opaque applications, never in
//! raw steps, so transformations that compress or reorder steps compare
//! fairly.
//!
//! Interactions with an outside world follow the usual convention: declare
//! an opaque `WORLD` type, and give every side-effecting function a `WORLD`
//! argument and a `WORLD` result. A scripted world is then just a pure
//! lookup keyed by the world payload, which keeps every run reproducible.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::automaton::{Automaton, StateId, Transition};
use crate::comb::{eval_with, EvalError};
use crate::system::ClosedLoop;
use crate::types::{CompositeType, FunctionSignature, OpaqueTypeId, SymbolTable};
use crate::value::{enumerate_values, Value, ValueError};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum InterpError {
    #[error("no executable for opaque function `{0}`")]
    InterpretationMissing(String),
    #[error("`{function}` called with {arg}, which is not of type {domain}")]
    ArgumentType {
        function: String,
        arg: String,
        domain: String,
    },
    #[error("`{function}` returned {result}, which is not of type {codomain}")]
    ResultType {
        function: String,
        result: String,
        codomain: String,
    },
    #[error("empty payload domain for opaque type `{0}`")]
    EmptyDomain(String),
    #[error("bad interpretation script: {0}")]
    Script(String),
    #[error(transparent)]
    Value(#[from] ValueError),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RunError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error("initial value {value} does not have the parameter type {ty}")]
    BadInitialValue { value: String, ty: String },
    #[error("state {0} has several outgoing transitions; use exhaustive exploration")]
    NondeterministicWithoutExhaustiveFlag(StateId),
    #[error("run did not reach a repeated configuration within {0} steps")]
    Incomplete(usize),
}

pub type Executable = Arc<dyn Fn(&Value) -> Result<Value, InterpError> + Send + Sync>;

/// Payload domains for opaque types plus an executable per opaque function.
#[derive(Clone)]
pub struct Interpretation {
    signatures: BTreeMap<String, FunctionSignature>,
    domains: BTreeMap<OpaqueTypeId, Vec<i64>>,
    executables: BTreeMap<String, Executable>,
}

impl fmt::Debug for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Interpretation")
            .field("domains", &self.domains)
            .field("executables", &self.executables.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Interpretation {
    /// An interpretation with no executables; every domain is `[0]`.
    pub fn new(ctx: &SymbolTable) -> Self {
        Interpretation {
            signatures: ctx.functions().map(|s| (s.name.clone(), s.clone())).collect(),
            domains: ctx.types().map(|t| (t.clone(), vec![0])).collect(),
            executables: BTreeMap::new(),
        }
    }

    pub fn with_domain(mut self, ty: impl Into<String>, payloads: Vec<i64>) -> Self {
        self.domains.insert(OpaqueTypeId::new(ty), payloads);
        self
    }

    pub fn define(
        &mut self,
        name: impl Into<String>,
        exe: impl Fn(&Value) -> Result<Value, InterpError> + Send + Sync + 'static,
    ) {
        self.executables.insert(name.into(), Arc::new(exe));
    }

    pub fn domain(&self, ty: &OpaqueTypeId) -> &[i64] {
        self.domains.get(ty).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn signature(&self, name: &str) -> Option<&FunctionSignature> {
        self.signatures.get(name)
    }

    /// Every value of `t` over the payload domains.
    pub fn values_of(&self, t: &CompositeType) -> Vec<Value> {
        enumerate_values(t, &|id| self.domain(id))
    }

    /// Give every function without an executable a pseudo-random but pure
    /// table, derived from `seed` and the canonical form of the argument.
    pub fn fill_hashed(&mut self, seed: u64) -> Result<(), InterpError> {
        let names: Vec<String> = self
            .signatures
            .keys()
            .filter(|n| !self.executables.contains_key(*n))
            .cloned()
            .collect();
        for name in names {
            let exe = self.hashed_executable(&name, seed)?;
            self.executables.insert(name, exe);
        }
        Ok(())
    }

    /// Hashed executables for every function over the given domains.
    pub fn hashed(
        ctx: &SymbolTable,
        domains: BTreeMap<OpaqueTypeId, Vec<i64>>,
        seed: u64,
    ) -> Result<Self, InterpError> {
        let mut interp = Interpretation::new(ctx);
        interp.domains.extend(domains);
        interp.fill_hashed(seed)?;
        Ok(interp)
    }

    fn hashed_executable(&self, name: &str, seed: u64) -> Result<Executable, InterpError> {
        let sig = self.signatures[name].clone();
        let mut comp_domains: Vec<Vec<Vec<i64>>> = Vec::new();
        for v in crate::types::variants(&sig.codomain) {
            let mut per = Vec::new();
            for c in &v.components {
                let d = self.domain(c).to_vec();
                if d.is_empty() {
                    return Err(InterpError::EmptyDomain(c.0.clone()));
                }
                per.push(d);
            }
            comp_domains.push(per);
        }
        let cod = sig.codomain.clone();
        let comp_types: Vec<Vec<OpaqueTypeId>> =
            crate::types::variants(&cod).into_iter().map(|v| v.components).collect();
        Ok(Arc::new(move |arg: &Value| {
            let h = fnv1a(seed, &format!("{}({})", sig.name, arg));
            let variant = (h % comp_domains.len() as u64) as usize;
            let comps: Vec<Value> = comp_domains[variant]
                .iter()
                .zip(&comp_types[variant])
                .enumerate()
                .map(|(i, (dom, ty))| {
                    let hi = fnv1a(h ^ (i as u64 + 1), "component");
                    Value::Opaque {
                        ty: ty.clone(),
                        payload: dom[(hi % dom.len() as u64) as usize],
                    }
                })
                .collect();
            Ok(Value::compose(&cod, variant, &comps)?)
        }))
    }

    /// Read a JSON scenario script.
    ///
    /// ```json
    /// { "domains": { "MSG": [0, 1] },
    ///   "seed": 3,
    ///   "functions": { "recv": { "table": [[0, [1, {"inl": 1}]]], "default": [0, {"inr": null}] } } }
    /// ```
    /// Table rows are `[argument, result]` literals. A function missing from
    /// the table falls back to `default`, then to a hashed table when `seed`
    /// is present.
    pub fn from_script(ctx: &SymbolTable, script: &serde_json::Value) -> Result<Self, InterpError> {
        let bad = |m: String| InterpError::Script(m);
        let obj = script
            .as_object()
            .ok_or_else(|| bad("top level must be an object".into()))?;
        let mut interp = Interpretation::new(ctx);
        if let Some(domains) = obj.get("domains") {
            let domains = domains
                .as_object()
                .ok_or_else(|| bad("`domains` must be an object".into()))?;
            for (ty, vals) in domains {
                let id = OpaqueTypeId::new(ty.clone());
                if !ctx.has_type(&id) {
                    return Err(bad(format!("unknown type `{ty}` in domains")));
                }
                let vals = vals
                    .as_array()
                    .and_then(|a| a.iter().map(|v| v.as_i64()).collect::<Option<Vec<_>>>())
                    .ok_or_else(|| bad(format!("domain of `{ty}` must be an integer array")))?;
                interp.domains.insert(id, vals);
            }
        }
        let seed = obj.get("seed").and_then(|s| s.as_u64());
        if let Some(funcs) = obj.get("functions") {
            let funcs = funcs
                .as_object()
                .ok_or_else(|| bad("`functions` must be an object".into()))?;
            for (name, spec) in funcs {
                let sig = ctx
                    .function(name)
                    .ok_or_else(|| bad(format!("unknown function `{name}`")))?
                    .clone();
                let mut table: Vec<(Value, Value)> = Vec::new();
                if let Some(rows) = spec.get("table") {
                    for row in rows
                        .as_array()
                        .ok_or_else(|| bad(format!("`{name}.table` must be an array")))?
                    {
                        match row.as_array().map(Vec::as_slice) {
                            Some([a, r]) => {
                                table.push((Value::from_json(&sig.domain, a)?, Value::from_json(&sig.codomain, r)?))
                            }
                            _ => return Err(bad(format!("rows of `{name}.table` must be [arg, result]"))),
                        }
                    }
                }
                let default = match spec.get("default") {
                    Some(d) => Some(Value::from_json(&sig.codomain, d)?),
                    None => None,
                };
                let fallback = match (seed, &default) {
                    (Some(s), None) => Some(interp.hashed_executable(name, s)?),
                    _ => None,
                };
                let fname = name.clone();
                interp.define(name.clone(), move |arg: &Value| {
                    if let Some((_, r)) = table.iter().find(|(a, _)| a == arg) {
                        return Ok(r.clone());
                    }
                    if let Some(d) = &default {
                        return Ok(d.clone());
                    }
                    match &fallback {
                        Some(f) => f(arg),
                        None => Err(InterpError::Script(format!("`{fname}` has no entry for {arg}"))),
                    }
                });
            }
        }
        if let Some(s) = seed {
            interp.fill_hashed(s)?;
        }
        Ok(interp)
    }

    /// Apply an opaque function, checking both ends of its signature.
    pub fn apply(&self, name: &str, arg: &Value) -> Result<Value, InterpError> {
        let sig = self
            .signatures
            .get(name)
            .ok_or_else(|| InterpError::InterpretationMissing(name.to_string()))?;
        let exe = self
            .executables
            .get(name)
            .ok_or_else(|| InterpError::InterpretationMissing(name.to_string()))?;
        if !arg.has_type(&sig.domain) {
            return Err(InterpError::ArgumentType {
                function: name.to_string(),
                arg: arg.to_string(),
                domain: sig.domain.to_string(),
            });
        }
        let out = exe(arg)?;
        if !out.has_type(&sig.codomain) {
            return Err(InterpError::ResultType {
                function: name.to_string(),
                result: out.to_string(),
                codomain: sig.codomain.to_string(),
            });
        }
        Ok(out)
    }
}

fn fnv1a(seed: u64, s: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325 ^ seed.wrapping_mul(0x9e3779b97f4a7c15);
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    // final avalanche
    h ^= h >> 33;
    h = h.wrapping_mul(0xff51afd7ed558ccd);
    h ^ (h >> 33)
}

/// One opaque application `(f, x)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Application {
    pub function: String,
    pub argument: Value,
}

/// A finite set of opaque applications.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DiamondSet(BTreeSet<Application>);

impl DiamondSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, function: impl Into<String>, argument: Value) -> bool {
        self.0.insert(Application {
            function: function.into(),
            argument,
        })
    }

    pub fn contains(&self, function: &str, argument: &Value) -> bool {
        self.0.contains(&Application {
            function: function.to_string(),
            argument: argument.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Application> {
        self.0.iter()
    }

    pub fn extend(&mut self, other: &DiamondSet) {
        self.0.extend(other.0.iter().cloned());
    }

    /// Elements of `self` missing from `other`.
    pub fn difference<'a>(&'a self, other: &'a DiamondSet) -> impl Iterator<Item = &'a Application> {
        self.0.difference(&other.0)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!(self
            .0
            .iter()
            .map(|a| json!({ "function": a.function, "argument": a.argument.to_json() }))
            .collect::<Vec<_>>())
    }
}

impl FromIterator<Application> for DiamondSet {
    fn from_iter<I: IntoIterator<Item = Application>>(iter: I) -> Self {
        DiamondSet(iter.into_iter().collect())
    }
}

/// `d1 ⊆ d2`
pub fn diamond_subset(d1: &DiamondSet, d2: &DiamondSet) -> bool {
    d1.0.is_subset(&d2.0)
}

/// One line of an exported trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceEntry {
    pub step: usize,
    pub state: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub function: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<usize>,
    pub variables: Vec<serde_json::Value>,
}

/// Trace as JSON lines.
pub fn trace_to_jsonl(trace: &[TraceEntry]) -> String {
    let mut out = String::new();
    for e in trace {
        out.push_str(&serde_json::to_string(e).expect("trace entries serialize"));
        out.push('\n');
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StopReason {
    /// The loop/step bound was reached.
    Bound,
    /// The computation budget was used up.
    Budget,
    /// A configuration repeated with no computation in between; the run
    /// would idle forever.
    Quiescent,
    /// An automaton state without outgoing transitions.
    Stuck,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunLimits {
    /// Loop iterations (systems) or transitions (automata).
    pub steps: usize,
    /// Maximum number of opaque applications to perform.
    pub computations: Option<usize>,
}

impl RunLimits {
    pub fn steps(steps: usize) -> Self {
        RunLimits {
            steps,
            computations: None,
        }
    }

    /// Stop after `k` applications; the step bound is effectively unlimited
    /// because idle loops are cut off by quiescence detection.
    pub fn computations(k: usize) -> Self {
        RunLimits {
            steps: usize::MAX,
            computations: Some(k),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Run {
    pub applications: Vec<Application>,
    pub trace: Vec<TraceEntry>,
    pub stop: StopReason,
}

impl Run {
    pub fn diamond(&self) -> DiamondSet {
        self.applications.iter().cloned().collect()
    }
}

struct Recorder<'a> {
    interp: &'a Interpretation,
    limit: Option<usize>,
    applications: Vec<Application>,
    trace: Vec<TraceEntry>,
    label: String,
}

impl Recorder<'_> {
    fn apply(&mut self, name: &str, arg: &Value) -> Result<Value, EvalError> {
        if self.limit.is_some_and(|k| self.applications.len() >= k) {
            return Err(EvalError::Halted);
        }
        let out = self.interp.apply(name, arg)?;
        let sig = self.interp.signature(name).expect("checked by apply");
        let (variant, _) = out.decompose(&sig.codomain).map_err(InterpError::from)?;
        let (_, comps) = arg.decompose(&sig.domain).map_err(InterpError::from)?;
        self.trace.push(TraceEntry {
            step: self.applications.len(),
            state: self.label.clone(),
            function: Some(name.to_string()),
            variant: Some(variant),
            variables: comps.iter().map(Value::to_json).collect(),
        });
        self.applications.push(Application {
            function: name.to_string(),
            argument: arg.clone(),
        });
        Ok(out)
    }
}

/// Run a closed-loop system: the initialisation function once, then the
/// loop function up to `limits.steps` times.
pub fn run_system(s: &ClosedLoop, interp: &Interpretation, x0: &Value, limits: RunLimits) -> Result<Run, RunError> {
    if !x0.has_type(&s.param) {
        return Err(RunError::BadInitialValue {
            value: x0.to_string(),
            ty: s.param.to_string(),
        });
    }
    let mut rec = Recorder {
        interp,
        limit: limits.computations,
        applications: vec![],
        trace: vec![],
        label: "init".into(),
    };
    let finish = |rec: Recorder, stop| Run {
        applications: rec.applications,
        trace: rec.trace,
        stop,
    };
    let mut state = match eval_with(&s.init, x0, &mut |n, a| rec.apply(n, a)) {
        Ok(v) => v,
        Err(EvalError::Halted) => return Ok(finish(rec, StopReason::Budget)),
        Err(e) => return Err(e.into()),
    };
    let mut idle: HashSet<Value> = HashSet::new();
    let mut cycle = 0usize;
    while cycle < limits.steps {
        if !idle.insert(state.clone()) {
            return Ok(finish(rec, StopReason::Quiescent));
        }
        rec.label = format!("cycle {cycle}");
        let before = rec.applications.len();
        state = match eval_with(&s.loop_fn, &state, &mut |n, a| rec.apply(n, a)) {
            Ok(v) => v,
            Err(EvalError::Halted) => return Ok(finish(rec, StopReason::Budget)),
            Err(e) => return Err(e.into()),
        };
        if rec.applications.len() != before {
            idle.clear();
        }
        cycle += 1;
    }
    Ok(finish(rec, StopReason::Bound))
}

/// Every application the system ever performs from `x0`, found by running
/// until the loop state repeats. Needs finite payload domains.
pub fn complete_diamond_system(
    s: &ClosedLoop,
    interp: &Interpretation,
    x0: &Value,
    cap: usize,
) -> Result<DiamondSet, RunError> {
    let mut apps = Vec::new();
    let mut apply = |n: &str, a: &Value| -> Result<Value, EvalError> {
        apps.push(Application {
            function: n.to_string(),
            argument: a.clone(),
        });
        Ok(interp.apply(n, a)?)
    };
    let mut state = eval_with(&s.init, x0, &mut apply)?;
    let mut seen = HashSet::new();
    for _ in 0..cap {
        if !seen.insert(state.clone()) {
            return Ok(apps.into_iter().collect());
        }
        state = eval_with(&s.loop_fn, &state, &mut apply)?;
    }
    Err(RunError::Incomplete(cap))
}

/// A configuration of a running automaton.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Config {
    state: StateId,
    vars: Vec<Value>,
}

fn initial_config(a: &Automaton, x0: &Value) -> Result<Config, RunError> {
    let (variant, comps) = x0.decompose(&a.initial_param).map_err(|_| RunError::BadInitialValue {
        value: x0.to_string(),
        ty: a.initial_param.to_string(),
    })?;
    Ok(Config {
        state: a.initial.0[variant],
        vars: comps,
    })
}

enum Fired {
    Computed(Application, Config, usize),
    Moved(Config),
}

fn fire(t: &Transition, cfg: &Config, interp: &Interpretation) -> Result<Fired, RunError> {
    match t {
        Transition::Eps(e) => Ok(Fired::Moved(Config {
            state: e.target,
            vars: e.map.apply(&cfg.vars),
        })),
        Transition::Comp(g) => {
            let comps = g.input_map.apply(&cfg.vars);
            let arg = Value::compose(&g.function.domain, g.dom_variant, &comps).map_err(InterpError::from)?;
            let out = interp.apply(&g.function.name, &arg)?;
            let (v1, mut res) = out.decompose(&g.function.codomain).map_err(InterpError::from)?;
            let outcome = &g.outcomes[v1];
            res.extend(cfg.vars.iter().cloned());
            Ok(Fired::Computed(
                Application {
                    function: g.function.name.clone(),
                    argument: arg,
                },
                Config {
                    state: outcome.target,
                    vars: outcome.map.apply(&res),
                },
                v1,
            ))
        }
    }
}

/// Follow the single outgoing transition of each state.
pub fn run_automaton(a: &Automaton, interp: &Interpretation, x0: &Value, limits: RunLimits) -> Result<Run, RunError> {
    let out = a.outgoing();
    let mut cfg = initial_config(a, x0)?;
    let mut applications = Vec::new();
    let mut trace = Vec::new();
    let mut idle: HashSet<Config> = HashSet::new();
    for step in 0..limits.steps {
        let ts = &out[cfg.state];
        let t = match ts.as_slice() {
            [] => {
                return Ok(Run {
                    applications,
                    trace,
                    stop: StopReason::Stuck,
                })
            }
            [t] => &a.transitions[*t],
            _ => return Err(RunError::NondeterministicWithoutExhaustiveFlag(cfg.state)),
        };
        if matches!(t, Transition::Comp(_)) && limits.computations.is_some_and(|k| applications.len() >= k) {
            return Ok(Run {
                applications,
                trace,
                stop: StopReason::Budget,
            });
        }
        if !idle.insert(cfg.clone()) {
            return Ok(Run {
                applications,
                trace,
                stop: StopReason::Quiescent,
            });
        }
        let mut entry = TraceEntry {
            step,
            state: a.states[cfg.state].label.clone(),
            function: None,
            variant: None,
            variables: cfg.vars.iter().map(Value::to_json).collect(),
        };
        match fire(t, &cfg, interp)? {
            Fired::Computed(app, next, v1) => {
                entry.function = Some(app.function.clone());
                entry.variant = Some(v1);
                applications.push(app);
                idle.clear();
                cfg = next;
            }
            Fired::Moved(next) => cfg = next,
        }
        trace.push(entry);
    }
    Ok(Run {
        applications,
        trace,
        stop: StopReason::Bound,
    })
}

/// Every application a deterministic automaton ever performs from `x0`.
pub fn complete_diamond_automaton(
    a: &Automaton,
    interp: &Interpretation,
    x0: &Value,
    cap: usize,
) -> Result<DiamondSet, RunError> {
    let out = a.outgoing();
    let mut cfg = initial_config(a, x0)?;
    let mut seen = HashSet::new();
    let mut d = DiamondSet::new();
    for _ in 0..cap {
        if !seen.insert(cfg.clone()) {
            return Ok(d);
        }
        let t = match out[cfg.state].as_slice() {
            [] => return Ok(d),
            [t] => &a.transitions[*t],
            _ => return Err(RunError::NondeterministicWithoutExhaustiveFlag(cfg.state)),
        };
        match fire(t, &cfg, interp)? {
            Fired::Computed(app, next, _) => {
                d.insert(app.function, app.argument);
                cfg = next;
            }
            Fired::Moved(next) => cfg = next,
        }
    }
    Err(RunError::Incomplete(cap))
}

/// Union of the applications made within the first `depth` computations of
/// every path, for automata with branching.
pub fn explore_automaton(
    a: &Automaton,
    interp: &Interpretation,
    x0: &Value,
    depth: usize,
) -> Result<DiamondSet, RunError> {
    let out = a.outgoing();
    let start = initial_config(a, x0)?;
    let mut seen: HashSet<(Config, usize)> = HashSet::new();
    let mut queue = VecDeque::new();
    let mut d = DiamondSet::new();
    seen.insert((start.clone(), 0));
    queue.push_back((start, 0usize));
    while let Some((cfg, done)) = queue.pop_front() {
        for &ti in &out[cfg.state] {
            let t = &a.transitions[ti];
            if matches!(t, Transition::Comp(_)) && done >= depth {
                continue;
            }
            let (next, n) = match fire(t, &cfg, interp)? {
                Fired::Computed(app, next, _) => {
                    d.insert(app.function, app.argument);
                    (next, done + 1)
                }
                Fired::Moved(next) => (next, done),
            };
            if seen.insert((next.clone(), n)) {
                queue.push_back((next, n));
            }
        }
    }
    Ok(d)
}

/// Every application made on any path, for automata with branching:
/// explores the reachable configurations, of which there are finitely many
/// over finite payload domains. Fails once `cap` configurations are seen.
pub fn complete_diamond_explore(
    a: &Automaton,
    interp: &Interpretation,
    x0: &Value,
    cap: usize,
) -> Result<DiamondSet, RunError> {
    let out = a.outgoing();
    let start = initial_config(a, x0)?;
    let mut seen: HashSet<Config> = HashSet::new();
    let mut stack = vec![start.clone()];
    let mut d = DiamondSet::new();
    seen.insert(start);
    while let Some(cfg) = stack.pop() {
        for &ti in &out[cfg.state] {
            let next = match fire(&a.transitions[ti], &cfg, interp)? {
                Fired::Computed(app, next, _) => {
                    d.insert(app.function, app.argument);
                    next
                }
                Fired::Moved(next) => next,
            };
            if seen.insert(next.clone()) {
                if seen.len() > cap {
                    return Err(RunError::Incomplete(cap));
                }
                stack.push(next);
            }
        }
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::CompositeType as C;

    fn table() -> SymbolTable {
        let mut st = SymbolTable::new();
        st.declare_type("A").unwrap();
        st.declare_function("f", C::opaque("A"), C::coproduct(C::opaque("A"), C::One))
            .unwrap();
        st
    }

    #[test]
    fn apply_checks_signature() {
        let st = table();
        let mut i = Interpretation::new(&st);
        assert!(matches!(
            i.apply("f", &Value::opaque("A", 0)),
            Err(InterpError::InterpretationMissing(_))
        ));
        i.define("f", |_| Ok(Value::Unit));
        assert!(matches!(
            i.apply("f", &Value::opaque("A", 0)),
            Err(InterpError::ResultType { .. })
        ));
        assert!(matches!(
            i.apply("f", &Value::Unit),
            Err(InterpError::ArgumentType { .. })
        ));
    }

    #[test]
    fn hashed_is_pure_and_well_typed() {
        let st = table();
        let mut doms = BTreeMap::new();
        doms.insert(OpaqueTypeId::new("A"), vec![0, 1, 2]);
        let i = Interpretation::hashed(&st, doms, 11).unwrap();
        for p in 0..3 {
            let x = Value::opaque("A", p);
            let a = i.apply("f", &x).unwrap();
            assert_eq!(a, i.apply("f", &x).unwrap());
        }
    }

    #[test]
    fn script_tables_defaults_and_errors() {
        let st = table();
        let s = serde_json::json!({
            "domains": {"A": [0, 1]},
            "functions": {"f": {"table": [[0, {"inl": 1}]], "default": {"inr": null}}}
        });
        let i = Interpretation::from_script(&st, &s).unwrap();
        assert_eq!(
            i.apply("f", &Value::opaque("A", 0)).unwrap(),
            Value::inl(Value::opaque("A", 1))
        );
        assert_eq!(i.apply("f", &Value::opaque("A", 1)).unwrap(), Value::inr(Value::Unit));
        let bad = serde_json::json!({"functions": {"g": {}}});
        assert!(Interpretation::from_script(&st, &bad).is_err());
    }

    #[test]
    fn subset_basics() {
        let mut d = DiamondSet::new();
        assert!(diamond_subset(&DiamondSet::new(), &d));
        d.insert("f", Value::opaque("A", 0));
        assert!(diamond_subset(&d, &d));
        assert!(!diamond_subset(&d, &DiamondSet::new()));
    }
}
