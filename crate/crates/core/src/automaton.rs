//! Automata over typed state variables, and the elaboration of closed-loop
//! systems into them.
//!
//! A state carries an ordered list of opaque-typed variables. Variable
//! mappings are index maps `target index ↦ source index`, so applying one
//! is a gather. A computational transition group's outcome maps read from
//! the function's result components followed by the source state's
//! variables.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::comb::{TypedComb, TypedNode};
use crate::system::{normal_form, ClosedLoop, SystemError, SystemExpr};
use crate::types::{variants, CompositeType, FunctionSignature, OpaqueTypeId, SymbolTable};

pub type StateId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateInfo {
    pub vars: Vec<OpaqueTypeId>,
    /// Display only; never consulted by the algorithms.
    pub label: String,
}

/// A state for every variant of a type, indexed by variant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateSet(pub Vec<StateId>);

impl StateSet {
    pub fn get(&self, variant: usize) -> StateId {
        self.0[variant]
    }
}

/// `map[i]` is the source index feeding target variable `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarMap(pub Vec<usize>);

impl VarMap {
    pub fn identity(n: usize) -> VarMap {
        VarMap((0..n).collect())
    }

    pub fn range(start: usize, len: usize) -> VarMap {
        VarMap((start..start + len).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply<T: Clone>(&self, source: &[T]) -> Vec<T> {
        self.0.iter().map(|&i| source[i].clone()).collect()
    }

    /// `self ∘ inner`: first gather through `inner`, then through `self`.
    pub fn compose(&self, inner: &VarMap) -> VarMap {
        VarMap(inner.0.iter().map(|&i| self.0[i]).collect())
    }

    /// Keep the first `n` indices and shift the rest through `self`:
    /// `i ↦ i` for `i < n`, `i ↦ self(i - n) + n` otherwise.
    pub fn shifted(&self, n: usize) -> VarMap {
        VarMap((0..n).chain(self.0.iter().map(|&i| i + n)).collect())
    }

    pub fn validates(&self, source: &[OpaqueTypeId], target: &[OpaqueTypeId]) -> bool {
        self.0.len() == target.len() && self.0.iter().zip(target).all(|(&i, t)| source.get(i) == Some(t))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Outcome {
    pub target: StateId,
    pub map: VarMap,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CompGroup {
    pub source: StateId,
    pub function: FunctionSignature,
    pub dom_variant: usize,
    pub input_map: VarMap,
    /// Indexed by codomain variant.
    pub outcomes: Vec<Outcome>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EpsTransition {
    pub source: StateId,
    pub target: StateId,
    pub map: VarMap,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Transition {
    Comp(CompGroup),
    Eps(EpsTransition),
}

impl Transition {
    pub fn source(&self) -> StateId {
        match self {
            Transition::Comp(g) => g.source,
            Transition::Eps(e) => e.source,
        }
    }

    fn targets(&self) -> Vec<StateId> {
        match self {
            Transition::Comp(g) => g.outcomes.iter().map(|o| o.target).collect(),
            Transition::Eps(e) => vec![e.target],
        }
    }

    fn with_states(&self, f: impl Fn(StateId) -> StateId) -> Transition {
        match self {
            Transition::Comp(g) => Transition::Comp(CompGroup {
                source: f(g.source),
                outcomes: g
                    .outcomes
                    .iter()
                    .map(|o| Outcome {
                        target: f(o.target),
                        map: o.map.clone(),
                    })
                    .collect(),
                ..g.clone()
            }),
            Transition::Eps(e) => Transition::Eps(EpsTransition {
                source: f(e.source),
                target: f(e.target),
                map: e.map.clone(),
            }),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AutomatonError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("malformed automaton: {0}")]
    Invalid(String),
    #[error("state {0} has more than one outgoing transition")]
    NotPseudoDeterministic(StateId),
}

/// `(Q, ρ, T0, s0, τ)`. Also used for fragments, whose "initial" state set
/// is the input state set of the fragment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Automaton {
    pub states: Vec<StateInfo>,
    pub initial_param: CompositeType,
    pub initial: StateSet,
    pub transitions: Vec<Transition>,
}

impl Automaton {
    /// Transition indices grouped by source state.
    pub fn outgoing(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.states.len()];
        for (i, t) in self.transitions.iter().enumerate() {
            out[t.source()].push(i);
        }
        out
    }

    pub fn has_epsilon(&self) -> bool {
        self.transitions.iter().any(|t| matches!(t, Transition::Eps(_)))
    }

    pub fn comp_count(&self) -> usize {
        self.transitions
            .iter()
            .filter(|t| matches!(t, Transition::Comp(_)))
            .count()
    }

    /// At most one outgoing transition of either kind per state.
    pub fn is_pseudo_deterministic(&self) -> bool {
        self.first_branching_state().is_none()
    }

    pub fn first_branching_state(&self) -> Option<StateId> {
        self.outgoing().iter().position(|o| o.len() > 1)
    }

    /// No ε-transitions and at most one computational group per state.
    pub fn is_deterministic(&self) -> bool {
        !self.has_epsilon() && self.is_pseudo_deterministic()
    }

    /// Check every state set and mapping against `ρ`.
    pub fn validate(&self) -> Result<(), AutomatonError> {
        let bad = |m: String| Err(AutomatonError::Invalid(m));
        let n = self.states.len();
        let vs = variants(&self.initial_param);
        if self.initial.0.len() != vs.len() {
            return bad(format!(
                "initial state set has {} entries for {} variants",
                self.initial.0.len(),
                vs.len()
            ));
        }
        for (v, &q) in vs.iter().zip(&self.initial.0) {
            if q >= n || self.states[q].vars != v.components {
                return bad(format!("initial state {q} does not fit variant {}", v.index));
            }
        }
        for (k, t) in self.transitions.iter().enumerate() {
            if t.source() >= n || t.targets().iter().any(|&q| q >= n) {
                return bad(format!("transition {k} refers to a missing state"));
            }
            let src = &self.states[t.source()].vars;
            match t {
                Transition::Eps(e) => {
                    if !e.map.validates(src, &self.states[e.target].vars) {
                        return bad(format!("ε-transition {k} has an ill-typed mapping"));
                    }
                }
                Transition::Comp(g) => {
                    let dv = variants(&g.function.domain);
                    let Some(v0) = dv.get(g.dom_variant) else {
                        return bad(format!("group {k} names a missing domain variant"));
                    };
                    if !g.input_map.validates(src, &v0.components) {
                        return bad(format!("group {k} has an ill-typed input mapping"));
                    }
                    let cv = variants(&g.function.codomain);
                    if cv.len() != g.outcomes.len() {
                        return bad(format!("group {k} is not total over the codomain"));
                    }
                    for (v1, o) in cv.iter().zip(&g.outcomes) {
                        let mut from = v1.components.clone();
                        from.extend(src.iter().cloned());
                        if !o.map.validates(&from, &self.states[o.target].vars) {
                            return bad(format!("group {k} outcome {} has an ill-typed mapping", v1.index));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// States reachable from the initial state set.
    pub fn reachable(&self) -> Vec<bool> {
        let out = self.outgoing();
        let mut seen = vec![false; self.states.len()];
        let mut queue: VecDeque<StateId> = self.initial.0.iter().copied().collect();
        for &q in &self.initial.0 {
            seen[q] = true;
        }
        while let Some(q) = queue.pop_front() {
            for &t in &out[q] {
                for q1 in self.transitions[t].targets() {
                    if !seen[q1] {
                        seen[q1] = true;
                        queue.push_back(q1);
                    }
                }
            }
        }
        seen
    }

    /// Drop unreachable states, renumbering the rest in order.
    pub fn trim(&self) -> Automaton {
        let keep = self.reachable();
        let mut new_id = vec![usize::MAX; self.states.len()];
        let mut states = Vec::new();
        for (q, k) in keep.iter().enumerate() {
            if *k {
                new_id[q] = states.len();
                states.push(self.states[q].clone());
            }
        }
        Automaton {
            states,
            initial_param: self.initial_param.clone(),
            initial: StateSet(self.initial.0.iter().map(|&q| new_id[q]).collect()),
            transitions: self
                .transitions
                .iter()
                .filter(|t| keep[t.source()])
                .map(|t| t.with_states(|q| new_id[q]))
                .collect(),
        }
    }

    /// JSON export; see `schemas/automaton.schema.json`.
    pub fn to_json(&self) -> serde_json::Value {
        let names = |vs: &[OpaqueTypeId]| vs.iter().map(|v| v.as_str().to_string()).collect::<Vec<_>>();
        let states: Vec<_> = self
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| json!({"id": i, "label": s.label, "vars": names(&s.vars)}))
            .collect();
        let transitions: Vec<_> = self
            .transitions
            .iter()
            .map(|t| match t {
                Transition::Eps(e) => json!({
                    "kind": "eps", "source": e.source, "target": e.target, "map": e.map.0,
                }),
                Transition::Comp(g) => json!({
                    "kind": "comp",
                    "source": g.source,
                    "function": g.function.name,
                    "domain": g.function.domain.to_string(),
                    "codomain": g.function.codomain.to_string(),
                    "dom_variant": g.dom_variant,
                    "input_map": g.input_map.0,
                    "outcomes": g.outcomes.iter().enumerate().map(|(v, o)| json!({
                        "variant": v, "target": o.target, "map": o.map.0,
                    })).collect::<Vec<_>>(),
                }),
            })
            .collect();
        json!({
            "initial_param": self.initial_param.to_string(),
            "initial": self.initial.0,
            "states": states,
            "transitions": transitions,
        })
    }

    /// Graphviz export: nodes `label: vars`, computational edges labelled
    /// `f/v0→v1`, ε-edges dashed.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph automaton {\n  rankdir=LR;\n  node [shape=box, fontname=monospace];\n");
        let initial: BTreeSet<_> = self.initial.0.iter().copied().collect();
        for (i, st) in self.states.iter().enumerate() {
            let vars: Vec<_> = st.vars.iter().map(|v| v.as_str()).collect();
            let style = if initial.contains(&i) { ", peripheries=2" } else { "" };
            let _ = writeln!(
                s,
                "  q{i} [label=\"{}: {}\"{style}];",
                escape(&st.label),
                vars.join(",")
            );
        }
        for t in &self.transitions {
            match t {
                Transition::Eps(e) => {
                    let _ = writeln!(s, "  q{} -> q{} [style=dashed, label=\"ε\"];", e.source, e.target);
                }
                Transition::Comp(g) => {
                    for (v1, o) in g.outcomes.iter().enumerate() {
                        let _ = writeln!(
                            s,
                            "  q{} -> q{} [label=\"{}/{}→{}\"];",
                            g.source,
                            o.target,
                            escape(&g.function.name),
                            g.dom_variant,
                            v1
                        );
                    }
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// `A ∥ T`: state `(q, v)` gets id `q·|var T| + v` and variables
/// `ρ(q) · typ v`; every transition is copied per variant with the extra
/// variables forwarded unchanged.
pub fn parallel_state(a: &Automaton, t: &CompositeType) -> Automaton {
    let tv = variants(t);
    let k = tv.len();
    let id = |q: StateId, v: usize| q * k + v;
    let mut states = Vec::with_capacity(a.states.len() * k);
    for s in &a.states {
        for v in &tv {
            let mut vars = s.vars.clone();
            vars.extend(v.components.iter().cloned());
            states.push(StateInfo {
                vars,
                label: format!("{}|{}", s.label, v.index),
            });
        }
    }
    let initial = StateSet(
        a.initial
            .0
            .iter()
            .flat_map(|&q| (0..k).map(move |v| id(q, v)))
            .collect(),
    );
    let mut transitions = Vec::with_capacity(a.transitions.len() * k);
    for t in &a.transitions {
        for v in &tv {
            let extra = v.components.len();
            let forward = |map: &VarMap, src_len: usize, tgt_len: usize| {
                debug_assert_eq!(map.len(), tgt_len);
                let mut m = map.0.clone();
                m.extend(src_len..src_len + extra);
                VarMap(m)
            };
            transitions.push(match t {
                Transition::Eps(e) => Transition::Eps(EpsTransition {
                    source: id(e.source, v.index),
                    target: id(e.target, v.index),
                    map: forward(&e.map, a.states[e.source].vars.len(), a.states[e.target].vars.len()),
                }),
                Transition::Comp(g) => {
                    let cod = variants(&g.function.codomain);
                    let own = a.states[g.source].vars.len();
                    Transition::Comp(CompGroup {
                        source: id(g.source, v.index),
                        function: g.function.clone(),
                        dom_variant: g.dom_variant,
                        input_map: g.input_map.clone(),
                        outcomes: g
                            .outcomes
                            .iter()
                            .zip(&cod)
                            .map(|(o, v1)| Outcome {
                                target: id(o.target, v.index),
                                map: forward(&o.map, v1.components.len() + own, a.states[o.target].vars.len()),
                            })
                            .collect(),
                    })
                }
            });
        }
    }
    Automaton {
        states,
        initial_param: CompositeType::product(a.initial_param.clone(), t.clone()),
        initial,
        transitions,
    }
}

/// Accumulates states and transitions during elaboration.
#[derive(Default)]
pub struct Builder {
    pub states: Vec<StateInfo>,
    pub transitions: Vec<Transition>,
}

impl Builder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_state(&mut self, vars: Vec<OpaqueTypeId>, label: impl Into<String>) -> StateId {
        self.states.push(StateInfo {
            vars,
            label: label.into(),
        });
        self.states.len() - 1
    }

    /// Fresh states, one per variant of `t`.
    pub fn state_set(&mut self, t: &CompositeType, label: &str) -> StateSet {
        StateSet(
            variants(t)
                .into_iter()
                .map(|v| self.add_state(v.components, format!("{label}{}", v.index)))
                .collect(),
        )
    }

    fn eps(&mut self, source: StateId, target: StateId, map: VarMap) {
        self.transitions
            .push(Transition::Eps(EpsTransition { source, target, map }));
    }

    /// Append a fragment, returning the id offset of its states.
    fn absorb(&mut self, frag: Automaton) -> usize {
        let off = self.states.len();
        self.states.extend(frag.states);
        self.transitions
            .extend(frag.transitions.into_iter().map(|t| t.with_states(|q| q + off)));
        off
    }

    pub fn finish(self, initial_param: CompositeType, initial: StateSet) -> Automaton {
        Automaton {
            states: self.states,
            initial_param,
            initial,
            transitions: self.transitions,
        }
    }
}

fn sum_parts(t: &CompositeType) -> (&CompositeType, &CompositeType) {
    match t {
        CompositeType::Coproduct(l, r) => (l, r),
        other => panic!("typed tree has non-sum type {other} where a sum is required"),
    }
}

fn prod_parts(t: &CompositeType) -> (&CompositeType, &CompositeType) {
    match t {
        CompositeType::Product(l, r) => (l, r),
        other => panic!("typed tree has non-product type {other} where a product is required"),
    }
}

/// Elaborate `f : T ⟶ U` between existing state sets for `T` and `U`.
/// Every input state receives exactly one outgoing transition.
pub fn elaborate_comb(b: &mut Builder, f: &TypedComb, ins: &StateSet, outs: &StateSet, path: &str) {
    let dom = variants(&f.dom);
    debug_assert_eq!(dom.len(), ins.0.len());
    debug_assert_eq!(variants(&f.cod).len(), outs.0.len());
    match &f.node {
        TypedNode::Opaque(sig) => {
            let cod = variants(&sig.codomain);
            for v0 in &dom {
                b.transitions.push(Transition::Comp(CompGroup {
                    source: ins.get(v0.index),
                    function: sig.clone(),
                    dom_variant: v0.index,
                    input_map: VarMap::identity(v0.components.len()),
                    outcomes: cod
                        .iter()
                        .map(|v1| Outcome {
                            target: outs.get(v1.index),
                            map: VarMap::identity(v1.components.len()),
                        })
                        .collect(),
                }));
            }
        }
        TypedNode::Identity => {
            for v in &dom {
                b.eps(
                    ins.get(v.index),
                    outs.get(v.index),
                    VarMap::identity(v.components.len()),
                );
            }
        }
        TypedNode::Theta => {
            for v in &dom {
                b.eps(ins.get(v.index), outs.get(0), VarMap(vec![]));
            }
        }
        TypedNode::Pi1 | TypedNode::Pi2 => {
            let (l, r) = prod_parts(&f.dom);
            let (lv, rv) = (variants(l), variants(r));
            for a in &lv {
                for c in &rv {
                    let q = ins.get(a.index * rv.len() + c.index);
                    let (target, map) = if matches!(f.node, TypedNode::Pi1) {
                        (outs.get(a.index), VarMap::range(0, a.components.len()))
                    } else {
                        (outs.get(c.index), VarMap::range(a.components.len(), c.components.len()))
                    };
                    b.eps(q, target, map);
                }
            }
        }
        TypedNode::Kappa1 | TypedNode::Kappa2 => {
            let (l, _) = sum_parts(&f.cod);
            let shift = if matches!(f.node, TypedNode::Kappa1) {
                0
            } else {
                l.variant_count()
            };
            for v in &dom {
                b.eps(
                    ins.get(v.index),
                    outs.get(shift + v.index),
                    VarMap::identity(v.components.len()),
                );
            }
        }
        TypedNode::Delta1 => {
            let (t, uv) = prod_parts(&f.dom);
            let (u, v) = sum_parts(uv);
            let (nt, nu, nv) = (t.variant_count(), u.variant_count(), v.variant_count());
            for tv in 0..nt {
                for w in 0..nu + nv {
                    let target = if w < nu {
                        tv * nu + w
                    } else {
                        nt * nu + tv * nv + (w - nu)
                    };
                    let src = tv * (nu + nv) + w;
                    b.eps(
                        ins.get(src),
                        outs.get(target),
                        VarMap::identity(dom[src].components.len()),
                    );
                }
            }
        }
        TypedNode::Compose(after, before) => {
            let mid = b.state_set(&before.cod, &format!("{path}.m"));
            elaborate_comb(b, before, ins, &mid, &format!("{path}.1"));
            elaborate_comb(b, after, &mid, outs, &format!("{path}.0"));
        }
        TypedNode::Case(l, r) => {
            let n = l.dom.variant_count();
            elaborate_comb(b, l, &StateSet(ins.0[..n].to_vec()), outs, &format!("{path}.l"));
            elaborate_comb(b, r, &StateSet(ins.0[n..].to_vec()), outs, &format!("{path}.r"));
        }
        TypedNode::Pair(f1, f2) => elaborate_pair(b, f, f1, f2, ins, outs, path),
    }
}

/// `⟨f1, f2⟩ : T ⟶ U1 × U2`. The structure for `f2` runs first with the
/// input carried alongside; the structure for `f1` then runs with `f2`'s
/// result carried alongside.
fn elaborate_pair(
    b: &mut Builder,
    f: &TypedComb,
    f1: &TypedComb,
    f2: &TypedComb,
    ins: &StateSet,
    outs: &StateSet,
    path: &str,
) {
    let t = &f.dom;
    let (tv, u1v, u2v) = (variants(t), variants(&f1.cod), variants(&f2.cod));
    let (nt, nu2) = (tv.len(), u2v.len());

    let fragment = |g: &TypedComb, tag: &str| {
        let mut fb = Builder::new();
        let fin = fb.state_set(&g.dom, &format!("{path}.{tag}in"));
        let fout = fb.state_set(&g.cod, &format!("{path}.{tag}out"));
        elaborate_comb(&mut fb, g, &fin, &fout, &format!("{path}.{tag}"));
        (fb.finish(g.dom.clone(), fin), fout)
    };
    let (frag2, out2) = fragment(f2, "2");
    let (frag1, out1) = fragment(f1, "1");
    let in2 = frag2.initial.clone();
    let in1 = frag1.initial.clone();
    let off2 = b.absorb(parallel_state(&frag2, t));
    let off1 = b.absorb(parallel_state(&frag1, &f2.cod));
    let at2 = |q: StateId, v: usize| off2 + q * nt + v;
    let at1 = |q: StateId, v: usize| off1 + q * nu2 + v;

    // input ⟶ f2's input, duplicating the data into the parallel slots
    for v in &tv {
        let n = v.components.len();
        b.eps(
            ins.get(v.index),
            at2(in2.get(v.index), v.index),
            VarMap((0..n).chain(0..n).collect()),
        );
    }
    // f2's output ⟶ f1's input, swapping result and carried input
    for j in &u2v {
        for i in &tv {
            let (nj, ni) = (j.components.len(), i.components.len());
            let map = VarMap((nj..nj + ni).chain(0..nj).collect());
            b.eps(at2(out2.get(j.index), i.index), at1(in1.get(i.index), j.index), map);
        }
    }
    // f1's output ⟶ the product's output states
    for k in &u1v {
        for j in &u2v {
            let n = k.components.len() + j.components.len();
            b.eps(
                at1(out1.get(k.index), j.index),
                outs.get(k.index * nu2 + j.index),
                VarMap::identity(n),
            );
        }
    }
}

/// Compile a closed loop: initial states per variant of the parameter,
/// system states per variant of the loop state, then the initialisation
/// and loop functions between them.
pub fn build_from_closed(ctx: &SymbolTable, s: &ClosedLoop) -> Result<Automaton, AutomatonError> {
    let (init, lp) = s.typed(ctx)?;
    let mut b = Builder::new();
    let initial = b.state_set(&s.param, "init");
    let system = b.state_set(&s.state, "sys");
    elaborate_comb(&mut b, &init, &initial, &system, "i");
    elaborate_comb(&mut b, &lp, &system, &system, "l");
    let a = b.finish(s.param.clone(), initial);
    if let Some(q) = a.first_branching_state() {
        return Err(AutomatonError::NotPseudoDeterministic(q));
    }
    Ok(a)
}

pub fn build_automaton(
    ctx: &SymbolTable,
    s: &SystemExpr,
    param_hint: Option<&CompositeType>,
) -> Result<Automaton, AutomatonError> {
    let closed = normal_form(ctx, s, param_hint)?;
    build_from_closed(ctx, &closed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comb::{check, CombExpr, CombType};
    use crate::system::LoopExpr;
    use crate::types::CompositeType as C;

    fn o(n: &str) -> C {
        C::opaque(n)
    }

    fn sym(names: &[&str]) -> Vec<OpaqueTypeId> {
        names.iter().map(|n| OpaqueTypeId::new(*n)).collect()
    }

    /// α(A) ↦ β(B), y = bar(x)
    fn bar_fragment() -> Automaton {
        let bar = FunctionSignature {
            name: "bar".into(),
            domain: o("A"),
            codomain: o("B"),
        };
        Automaton {
            states: vec![
                StateInfo {
                    vars: sym(&["A"]),
                    label: "α".into(),
                },
                StateInfo {
                    vars: sym(&["B"]),
                    label: "β".into(),
                },
            ],
            initial_param: o("A"),
            initial: StateSet(vec![0]),
            transitions: vec![Transition::Comp(CompGroup {
                source: 0,
                function: bar,
                dom_variant: 0,
                input_map: VarMap::identity(1),
                outcomes: vec![Outcome {
                    target: 1,
                    map: VarMap(vec![0]),
                }],
            })],
        }
    }

    #[test]
    fn parallel_state_example() {
        let t = C::coproduct(C::product(o("C"), o("D")), o("E"));
        let p = parallel_state(&bar_fragment(), &t);
        p.validate().unwrap();
        let vars: Vec<_> = p.states.iter().map(|s| s.vars.clone()).collect();
        assert_eq!(
            vars,
            vec![
                sym(&["A", "C", "D"]),
                sym(&["A", "E"]),
                sym(&["B", "C", "D"]),
                sym(&["B", "E"])
            ]
        );
        assert_eq!(p.transitions.len(), 2);
        // α0(x, y, z) ↦ β0(w, y, z): w is the result, y and z are forwarded
        let Transition::Comp(g) = &p.transitions[0] else {
            panic!()
        };
        assert_eq!((g.source, g.outcomes[0].target), (0, 2));
        assert_eq!(g.outcomes[0].map, VarMap(vec![0, 2, 3]));
        let Transition::Comp(g) = &p.transitions[1] else {
            panic!()
        };
        assert_eq!((g.source, g.outcomes[0].target), (1, 3));
        assert_eq!(g.outcomes[0].map, VarMap(vec![0, 2]));
    }

    #[test]
    fn parallel_with_unit_is_isomorphic() {
        let a = bar_fragment();
        let p = parallel_state(&a, &C::One);
        assert_eq!(
            p.states.iter().map(|s| &s.vars).collect::<Vec<_>>(),
            a.states.iter().map(|s| &s.vars).collect::<Vec<_>>()
        );
        assert_eq!(p.transitions, a.transitions);
    }

    fn elaborate(ctx: &SymbolTable, e: CombExpr, dom: C, cod: C) -> Automaton {
        let typed = check(
            ctx,
            &e,
            &CombType {
                domain: dom.clone(),
                codomain: cod.clone(),
            },
        )
        .unwrap();
        let mut b = Builder::new();
        let ins = b.state_set(&dom, "in");
        let outs = b.state_set(&cod, "out");
        elaborate_comb(&mut b, &typed, &ins, &outs, "f");
        let a = b.finish(dom, ins);
        a.validate().unwrap();
        assert!(a.is_pseudo_deterministic());
        a
    }

    #[test]
    fn identity_is_single_epsilon() {
        let mut st = SymbolTable::new();
        st.declare_type("foo").unwrap();
        let a = elaborate(&st, CombExpr::Identity, o("foo"), o("foo"));
        assert_eq!(
            a.transitions,
            vec![Transition::Eps(EpsTransition {
                source: 0,
                target: 1,
                map: VarMap(vec![0]),
            })]
        );
    }

    #[test]
    fn theta_targets_the_single_empty_state() {
        let mut st = SymbolTable::new();
        st.declare_type("A").unwrap();
        let t = C::coproduct(o("A"), C::product(o("A"), o("A")));
        let a = elaborate(&st, CombExpr::Theta, t, C::One);
        assert_eq!(a.transitions.len(), 2);
        for tr in &a.transitions {
            let Transition::Eps(e) = tr else { panic!() };
            assert_eq!(e.target, 2);
            assert!(e.map.is_empty());
        }
    }

    #[test]
    fn kappa_leaves_other_side_untouched() {
        let mut st = SymbolTable::new();
        st.declare_type("A").unwrap();
        st.declare_type("B").unwrap();
        let a = elaborate(&st, CombExpr::Kappa2, o("B"), C::coproduct(o("A"), o("B")));
        // states: in0, out0 (A), out1 (B)
        assert_eq!(
            a.transitions,
            vec![Transition::Eps(EpsTransition {
                source: 0,
                target: 2,
                map: VarMap(vec![0]),
            })]
        );
    }

    #[test]
    fn delta1_permutes_variants() {
        let mut st = SymbolTable::new();
        for n in ["T", "U", "V"] {
            st.declare_type(n).unwrap();
        }
        let dom = C::product(C::coproduct(o("T"), C::One), C::coproduct(o("U"), o("V")));
        let cod = C::coproduct(
            C::product(C::coproduct(o("T"), C::One), o("U")),
            C::product(C::coproduct(o("T"), C::One), o("V")),
        );
        // validate() checks each mapping is type-correct, so the variant
        // permutation is right iff validation passes
        let a = elaborate(&st, CombExpr::Delta1, dom, cod);
        assert_eq!(a.transitions.len(), 4);
    }

    #[test]
    fn delay_automaton_shape() {
        let mut st = SymbolTable::new();
        st.declare_type("T").unwrap();
        st.declare_function("init", C::One, o("T")).unwrap();
        let s = SystemExpr::new(CombExpr::opaque("init"), LoopExpr::omega(CombExpr::Identity));
        let a = build_automaton(&st, &s, None).unwrap();
        a.validate().unwrap();
        assert_eq!(a.initial.0, vec![0]);
        assert!(a.states[0].vars.is_empty());
        assert_eq!(a.states[1].vars, sym(&["T"]));
        assert_eq!(a.comp_count(), 1);
        let json = a.to_json();
        assert_eq!(json["states"][1]["vars"], json!(["T"]));
        assert!(a.to_dot().contains("init/0→0"));
    }

    #[test]
    fn trim_drops_unreachable() {
        let mut a = bar_fragment();
        a.states.push(StateInfo {
            vars: vec![],
            label: "lost".into(),
        });
        let t = a.trim();
        assert_eq!(t.states.len(), 2);
        t.validate().unwrap();
    }
}
