//! Combinational expressions: the point-free combinator calculus over
//! composite types, with type inference, the derived "standard library"
//! combinators, and a reference evaluator.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interp::{InterpError, Interpretation};
use crate::types::{CompositeType, SymbolTable};
use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CombExpr {
    OpaqueFn(String),
    /// `after ∘ before`: run `before`, then `after`.
    Compose(Box<CombExpr>, Box<CombExpr>),
    Pair(Box<CombExpr>, Box<CombExpr>),
    Case(Box<CombExpr>, Box<CombExpr>),
    Identity,
    Theta,
    Pi1,
    Pi2,
    Kappa1,
    Kappa2,
    Delta1,
}

impl CombExpr {
    pub fn opaque(name: impl Into<String>) -> CombExpr {
        CombExpr::OpaqueFn(name.into())
    }

    /// `after ∘ before`
    pub fn compose(after: CombExpr, before: CombExpr) -> CombExpr {
        CombExpr::Compose(Box::new(after), Box::new(before))
    }

    /// Right-to-left composition of a chain, `chain(&[h, g, f]) = h ∘ g ∘ f`.
    pub fn chain(parts: impl IntoIterator<Item = CombExpr>) -> CombExpr {
        let mut parts: Vec<CombExpr> = parts.into_iter().collect();
        let mut acc = parts.pop().unwrap_or(CombExpr::Identity);
        while let Some(next) = parts.pop() {
            acc = CombExpr::compose(next, acc);
        }
        acc
    }

    pub fn pair(l: CombExpr, r: CombExpr) -> CombExpr {
        CombExpr::Pair(Box::new(l), Box::new(r))
    }

    pub fn case(l: CombExpr, r: CombExpr) -> CombExpr {
        CombExpr::Case(Box::new(l), Box::new(r))
    }

    pub fn size(&self) -> usize {
        match self {
            CombExpr::Compose(a, b) | CombExpr::Pair(a, b) | CombExpr::Case(a, b) => 1 + a.size() + b.size(),
            _ => 1,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            CombExpr::Compose(a, b) | CombExpr::Pair(a, b) | CombExpr::Case(a, b) => 1 + a.depth().max(b.depth()),
            _ => 0,
        }
    }

    /// Names of opaque functions used, in first-occurrence order.
    pub fn opaque_names(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let CombExpr::OpaqueFn(n) = e {
                if !out.contains(&n.as_str()) {
                    out.push(n.as_str());
                }
            }
        });
        out
    }

    fn walk<'a>(&'a self, visit: &mut dyn FnMut(&'a CombExpr)) {
        visit(self);
        match self {
            CombExpr::Compose(a, b) | CombExpr::Pair(a, b) | CombExpr::Case(a, b) => {
                a.walk(visit);
                b.walk(visit);
            }
            _ => {}
        }
    }
}

/// The derived combinators, each definable from the primitives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derived {
    /// `f1 × f2 = ⟨f1 ∘ π1, f2 ∘ π2⟩`
    ProductMap,
    /// `f1 + f2 = [κ1 ∘ f1, κ2 ∘ f2]`
    SumMap,
    /// `σπ = ⟨π2, π1⟩`
    SwapProduct,
    /// `σκ = [κ2, κ1]`
    SwapCoproduct,
    /// `δ2 = [σπ, σπ] ∘ δ1 ∘ σπ`
    Delta2,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("derived combinator {name:?} takes {want} arguments, got {got}")]
pub struct ArityError {
    pub name: Derived,
    pub want: usize,
    pub got: usize,
}

/// Expand a derived combinator into primitives.
pub fn desugar(name: Derived, args: &[CombExpr]) -> Result<CombExpr, ArityError> {
    let want = match name {
        Derived::ProductMap | Derived::SumMap => 2,
        _ => 0,
    };
    if args.len() != want {
        return Err(ArityError {
            name,
            want,
            got: args.len(),
        });
    }
    let swap_p = || CombExpr::pair(CombExpr::Pi2, CombExpr::Pi1);
    Ok(match name {
        Derived::ProductMap => CombExpr::pair(
            CombExpr::compose(args[0].clone(), CombExpr::Pi1),
            CombExpr::compose(args[1].clone(), CombExpr::Pi2),
        ),
        Derived::SumMap => CombExpr::case(
            CombExpr::compose(CombExpr::Kappa1, args[0].clone()),
            CombExpr::compose(CombExpr::Kappa2, args[1].clone()),
        ),
        Derived::SwapProduct => swap_p(),
        Derived::SwapCoproduct => CombExpr::case(CombExpr::Kappa2, CombExpr::Kappa1),
        Derived::Delta2 => CombExpr::chain([
            CombExpr::case(
                CombExpr::compose(CombExpr::Kappa1, swap_p()),
                CombExpr::compose(CombExpr::Kappa2, swap_p()),
            ),
            CombExpr::Delta1,
            swap_p(),
        ]),
    })
}

/// `f1 × f2`
pub fn product_map(f1: CombExpr, f2: CombExpr) -> CombExpr {
    desugar(Derived::ProductMap, &[f1, f2]).expect("arity")
}

/// `f1 + f2`
pub fn sum_map(f1: CombExpr, f2: CombExpr) -> CombExpr {
    desugar(Derived::SumMap, &[f1, f2]).expect("arity")
}

/// Judgement `T ⟶ U`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CombType {
    pub domain: CompositeType,
    pub codomain: CompositeType,
}

impl fmt::Display for CombType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ⟶ {}", self.domain, self.codomain)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TypeError {
    #[error("unknown opaque function `{0}`")]
    UnknownSymbol(String),
    #[error("{rule}: expected {expected}, found {found}")]
    Mismatch {
        rule: &'static str,
        expected: String,
        found: String,
    },
    #[error("{0}: type is not fully determined (add an annotation)")]
    Ambiguous(String),
}

// ---------------------------------------------------------------------
// Unification-backed inference
// ---------------------------------------------------------------------

/// Type with metavariables, used while inferring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ty {
    Var(usize),
    Opaque(crate::types::OpaqueTypeId),
    One,
    Prod(Box<Ty>, Box<Ty>),
    Sum(Box<Ty>, Box<Ty>),
}

impl Ty {
    pub fn prod(a: Ty, b: Ty) -> Ty {
        Ty::Prod(Box::new(a), Box::new(b))
    }

    pub fn sum(a: Ty, b: Ty) -> Ty {
        Ty::Sum(Box::new(a), Box::new(b))
    }
}

impl From<&CompositeType> for Ty {
    fn from(t: &CompositeType) -> Ty {
        match t {
            CompositeType::Opaque(id) => Ty::Opaque(id.clone()),
            CompositeType::One => Ty::One,
            CompositeType::Product(l, r) => Ty::prod(l.as_ref().into(), r.as_ref().into()),
            CompositeType::Coproduct(l, r) => Ty::sum(l.as_ref().into(), r.as_ref().into()),
        }
    }
}

/// Substitution store for type metavariables.
#[derive(Debug, Default, Clone)]
pub struct Unifier {
    slots: Vec<Option<Ty>>,
}

impl Unifier {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(&mut self) -> Ty {
        self.slots.push(None);
        Ty::Var(self.slots.len() - 1)
    }

    fn shallow(&self, t: &Ty) -> Ty {
        let mut t = t.clone();
        while let Ty::Var(v) = t {
            match &self.slots[v] {
                Some(next) => t = next.clone(),
                None => break,
            }
        }
        t
    }

    pub fn resolve(&self, t: &Ty) -> Ty {
        match self.shallow(t) {
            Ty::Prod(a, b) => Ty::prod(self.resolve(&a), self.resolve(&b)),
            Ty::Sum(a, b) => Ty::sum(self.resolve(&a), self.resolve(&b)),
            other => other,
        }
    }

    fn occurs(&self, v: usize, t: &Ty) -> bool {
        match self.shallow(t) {
            Ty::Var(w) => v == w,
            Ty::Prod(a, b) | Ty::Sum(a, b) => self.occurs(v, &a) || self.occurs(v, &b),
            _ => false,
        }
    }

    pub fn unify(&mut self, a: &Ty, b: &Ty, rule: &'static str) -> Result<(), TypeError> {
        let a = self.shallow(a);
        let b = self.shallow(b);
        let mismatch = |u: &Unifier| TypeError::Mismatch {
            rule,
            expected: u.render(&a),
            found: u.render(&b),
        };
        match (&a, &b) {
            (Ty::Var(x), Ty::Var(y)) if x == y => Ok(()),
            (Ty::Var(x), other) | (other, Ty::Var(x)) => {
                if self.occurs(*x, other) {
                    return Err(mismatch(self));
                }
                self.slots[*x] = Some(other.clone());
                Ok(())
            }
            (Ty::Opaque(x), Ty::Opaque(y)) if x == y => Ok(()),
            (Ty::One, Ty::One) => Ok(()),
            (Ty::Prod(a1, a2), Ty::Prod(b1, b2)) | (Ty::Sum(a1, a2), Ty::Sum(b1, b2)) => {
                self.unify(a1, b1, rule)?;
                self.unify(a2, b2, rule)
            }
            _ => Err(mismatch(self)),
        }
    }

    /// Split `t` as a product, refining a variable if needed.
    fn expect_prod(&mut self, t: &Ty, rule: &'static str) -> Result<(Ty, Ty), TypeError> {
        match self.shallow(t) {
            Ty::Prod(a, b) => Ok((*a, *b)),
            _ => {
                let (a, b) = (self.fresh(), self.fresh());
                self.unify(t, &Ty::prod(a.clone(), b.clone()), rule)?;
                Ok((a, b))
            }
        }
    }

    fn expect_sum(&mut self, t: &Ty, rule: &'static str) -> Result<(Ty, Ty), TypeError> {
        match self.shallow(t) {
            Ty::Sum(a, b) => Ok((*a, *b)),
            _ => {
                let (a, b) = (self.fresh(), self.fresh());
                self.unify(t, &Ty::sum(a.clone(), b.clone()), rule)?;
                Ok((a, b))
            }
        }
    }

    /// Resolve fully; unresolved variables become `1` when `default_one`.
    pub fn ground(&self, t: &Ty, default_one: bool) -> Option<CompositeType> {
        match self.shallow(t) {
            Ty::Var(_) => default_one.then_some(CompositeType::One),
            Ty::Opaque(id) => Some(CompositeType::Opaque(id)),
            Ty::One => Some(CompositeType::One),
            Ty::Prod(a, b) => Some(CompositeType::product(
                self.ground(&a, default_one)?,
                self.ground(&b, default_one)?,
            )),
            Ty::Sum(a, b) => Some(CompositeType::coproduct(
                self.ground(&a, default_one)?,
                self.ground(&b, default_one)?,
            )),
        }
    }

    pub fn render(&self, t: &Ty) -> String {
        fn go(u: &Unifier, t: &Ty, prec: u8) -> String {
            let s = match u.shallow(t) {
                Ty::Var(v) => return format!("?{v}"),
                Ty::Opaque(id) => return id.0.clone(),
                Ty::One => return "1".into(),
                Ty::Prod(a, b) => (format!("{} * {}", go(u, &a, 1), go(u, &b, 2)), 1),
                Ty::Sum(a, b) => (format!("{} + {}", go(u, &a, 0), go(u, &b, 1)), 0),
            };
            if prec > s.1 {
                format!("({})", s.0)
            } else {
                s.0
            }
        }
        go(self, t, 0)
    }
}

/// Expression tree annotated with metavariable types, before grounding.
#[derive(Debug, Clone)]
pub struct Annotated {
    pub expr: CombExpr,
    pub dom: Ty,
    pub cod: Ty,
    pub children: Vec<Annotated>,
}

/// Infer `e : dom ⟶ ?` under `ctx`, unifying into `u`.
pub fn infer_annotated(ctx: &SymbolTable, e: &CombExpr, dom: &Ty, u: &mut Unifier) -> Result<Annotated, TypeError> {
    let leaf = |cod: Ty| Annotated {
        expr: e.clone(),
        dom: dom.clone(),
        cod,
        children: vec![],
    };
    match e {
        CombExpr::OpaqueFn(name) => {
            let sig = ctx
                .function(name)
                .ok_or_else(|| TypeError::UnknownSymbol(name.clone()))?;
            u.unify(&(&sig.domain).into(), dom, "opaque function domain")?;
            Ok(leaf((&sig.codomain).into()))
        }
        CombExpr::Compose(after, before) => {
            let b = infer_annotated(ctx, before, dom, u)?;
            let a = infer_annotated(ctx, after, &b.cod, u)?;
            Ok(Annotated {
                expr: e.clone(),
                dom: dom.clone(),
                cod: a.cod.clone(),
                children: vec![a, b],
            })
        }
        CombExpr::Pair(f, g) => {
            let fa = infer_annotated(ctx, f, dom, u)?;
            let ga = infer_annotated(ctx, g, dom, u)?;
            Ok(Annotated {
                expr: e.clone(),
                dom: dom.clone(),
                cod: Ty::prod(fa.cod.clone(), ga.cod.clone()),
                children: vec![fa, ga],
            })
        }
        CombExpr::Case(f, g) => {
            let (l, r) = u.expect_sum(dom, "case [f, g] needs a coproduct domain")?;
            let fa = infer_annotated(ctx, f, &l, u)?;
            let ga = infer_annotated(ctx, g, &r, u)?;
            u.unify(&fa.cod, &ga.cod, "case [f, g] branch codomains")?;
            Ok(Annotated {
                expr: e.clone(),
                dom: dom.clone(),
                cod: fa.cod.clone(),
                children: vec![fa, ga],
            })
        }
        CombExpr::Identity => Ok(leaf(dom.clone())),
        CombExpr::Theta => Ok(leaf(Ty::One)),
        CombExpr::Pi1 => {
            let (l, _) = u.expect_prod(dom, "pi1 needs a product domain")?;
            Ok(leaf(l))
        }
        CombExpr::Pi2 => {
            let (_, r) = u.expect_prod(dom, "pi2 needs a product domain")?;
            Ok(leaf(r))
        }
        CombExpr::Kappa1 => {
            let other = u.fresh();
            Ok(leaf(Ty::sum(dom.clone(), other)))
        }
        CombExpr::Kappa2 => {
            let other = u.fresh();
            Ok(leaf(Ty::sum(other, dom.clone())))
        }
        CombExpr::Delta1 => {
            let (t, uv) = u.expect_prod(dom, "d1 needs a domain T * (U + V)")?;
            let (uu, vv) = u.expect_sum(&uv, "d1 needs a domain T * (U + V)")?;
            Ok(leaf(Ty::sum(Ty::prod(t.clone(), uu), Ty::prod(t, vv))))
        }
    }
}

/// Expression tree with every node's domain and codomain fixed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedComb {
    pub node: TypedNode,
    pub dom: CompositeType,
    pub cod: CompositeType,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypedNode {
    Opaque(crate::types::FunctionSignature),
    Compose(Box<TypedComb>, Box<TypedComb>),
    Pair(Box<TypedComb>, Box<TypedComb>),
    Case(Box<TypedComb>, Box<TypedComb>),
    Identity,
    Theta,
    Pi1,
    Pi2,
    Kappa1,
    Kappa2,
    Delta1,
}

impl TypedComb {
    pub fn expr(&self) -> CombExpr {
        match &self.node {
            TypedNode::Opaque(sig) => CombExpr::OpaqueFn(sig.name.clone()),
            TypedNode::Compose(a, b) => CombExpr::compose(a.expr(), b.expr()),
            TypedNode::Pair(a, b) => CombExpr::pair(a.expr(), b.expr()),
            TypedNode::Case(a, b) => CombExpr::case(a.expr(), b.expr()),
            TypedNode::Identity => CombExpr::Identity,
            TypedNode::Theta => CombExpr::Theta,
            TypedNode::Pi1 => CombExpr::Pi1,
            TypedNode::Pi2 => CombExpr::Pi2,
            TypedNode::Kappa1 => CombExpr::Kappa1,
            TypedNode::Kappa2 => CombExpr::Kappa2,
            TypedNode::Delta1 => CombExpr::Delta1,
        }
    }

    pub fn comb_type(&self) -> CombType {
        CombType {
            domain: self.dom.clone(),
            codomain: self.cod.clone(),
        }
    }
}

/// Ground an annotated tree. Leftover variables default to `1` when
/// `default_one`, otherwise they are reported as ambiguous.
pub fn ground(ctx: &SymbolTable, a: &Annotated, u: &Unifier, default_one: bool) -> Result<TypedComb, TypeError> {
    let g = |t: &Ty| {
        u.ground(t, default_one)
            .ok_or_else(|| TypeError::Ambiguous(render_expr(&a.expr)))
    };
    let dom = g(&a.dom)?;
    let cod = g(&a.cod)?;
    let kid = |i: usize| ground(ctx, &a.children[i], u, default_one).map(Box::new);
    let node = match &a.expr {
        CombExpr::OpaqueFn(n) => TypedNode::Opaque(
            ctx.function(n)
                .ok_or_else(|| TypeError::UnknownSymbol(n.clone()))?
                .clone(),
        ),
        CombExpr::Compose(..) => TypedNode::Compose(kid(0)?, kid(1)?),
        CombExpr::Pair(..) => TypedNode::Pair(kid(0)?, kid(1)?),
        CombExpr::Case(..) => TypedNode::Case(kid(0)?, kid(1)?),
        CombExpr::Identity => TypedNode::Identity,
        CombExpr::Theta => TypedNode::Theta,
        CombExpr::Pi1 => TypedNode::Pi1,
        CombExpr::Pi2 => TypedNode::Pi2,
        CombExpr::Kappa1 => TypedNode::Kappa1,
        CombExpr::Kappa2 => TypedNode::Kappa2,
        CombExpr::Delta1 => TypedNode::Delta1,
    };
    Ok(TypedComb { node, dom, cod })
}

/// Infer the type of `e` at the given domain.
///
/// The primitives are schematic; the domain instantiates them. Parts of the
/// codomain that the domain does not determine (the other summand of `κ1`,
/// say) make the result ambiguous; use [`check`] when the codomain is known.
pub fn infer(ctx: &SymbolTable, e: &CombExpr, domain_hint: &CompositeType) -> Result<CombType, TypeError> {
    let mut u = Unifier::new();
    let a = infer_annotated(ctx, e, &domain_hint.into(), &mut u)?;
    let codomain = u
        .ground(&a.cod, false)
        .ok_or_else(|| TypeError::Ambiguous(render_expr(e)))?;
    Ok(CombType {
        domain: domain_hint.clone(),
        codomain,
    })
}

/// Check `e` against a full judgement and return the annotated tree.
/// Internal types not fixed by either end default to `1`.
pub fn check(ctx: &SymbolTable, e: &CombExpr, ty: &CombType) -> Result<TypedComb, TypeError> {
    let mut u = Unifier::new();
    let a = infer_annotated(ctx, e, &(&ty.domain).into(), &mut u)?;
    u.unify(&(&ty.codomain).into(), &a.cod, "declared codomain")?;
    ground(ctx, &a, &u, true)
}

// ---------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------

/// ASCII surface syntax; `.` is right-associative composition.
pub fn render_expr(e: &CombExpr) -> String {
    fn go(e: &CombExpr, top: bool) -> String {
        match e {
            CombExpr::OpaqueFn(n) => n.clone(),
            CombExpr::Compose(a, b) => {
                // left operand must not itself be a composition
                let s = format!("{} . {}", go(a, false), go_right(b));
                if top {
                    s
                } else {
                    format!("({s})")
                }
            }
            CombExpr::Pair(a, b) => format!("<{}, {}>", go(a, true), go(b, true)),
            CombExpr::Case(a, b) => format!("[{}, {}]", go(a, true), go(b, true)),
            CombExpr::Identity => "id".into(),
            CombExpr::Theta => "theta".into(),
            CombExpr::Pi1 => "pi1".into(),
            CombExpr::Pi2 => "pi2".into(),
            CombExpr::Kappa1 => "k1".into(),
            CombExpr::Kappa2 => "k2".into(),
            CombExpr::Delta1 => "d1".into(),
        }
    }
    fn go_right(e: &CombExpr) -> String {
        match e {
            CombExpr::Compose(a, b) => format!("{} . {}", go(a, false), go_right(b)),
            other => go(other, false),
        }
    }
    go(e, true)
}

/// Mathematical notation.
pub fn render_expr_unicode(e: &CombExpr) -> String {
    fn go(e: &CombExpr, top: bool) -> String {
        match e {
            CombExpr::OpaqueFn(n) => n.clone(),
            CombExpr::Compose(a, b) => {
                let s = format!("{} ∘ {}", go(a, false), go_right(b));
                if top {
                    s
                } else {
                    format!("({s})")
                }
            }
            CombExpr::Pair(a, b) => format!("⟨{}, {}⟩", go(a, true), go(b, true)),
            CombExpr::Case(a, b) => format!("[{}, {}]", go(a, true), go(b, true)),
            CombExpr::Identity => "id".into(),
            CombExpr::Theta => "θ".into(),
            CombExpr::Pi1 => "π1".into(),
            CombExpr::Pi2 => "π2".into(),
            CombExpr::Kappa1 => "κ1".into(),
            CombExpr::Kappa2 => "κ2".into(),
            CombExpr::Delta1 => "δ1".into(),
        }
    }
    fn go_right(e: &CombExpr) -> String {
        match e {
            CombExpr::Compose(a, b) => format!("{} ∘ {}", go(a, false), go_right(b)),
            other => go(other, false),
        }
    }
    go(e, true)
}

impl fmt::Display for CombExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_expr(self))
    }
}

// ---------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error("{combinator} applied to ill-shaped value {value}")]
    Shape { combinator: &'static str, value: String },
    #[error("computation budget exhausted")]
    Halted,
}

/// Evaluate `e` on `v`, applying opaque functions through `apply`.
///
/// Pairs evaluate their right component before their left one, the same
/// order the automaton elaboration uses, so application logs line up.
pub fn eval_with(
    e: &CombExpr,
    v: &Value,
    apply: &mut dyn FnMut(&str, &Value) -> Result<Value, EvalError>,
) -> Result<Value, EvalError> {
    let shape_err = |combinator: &'static str| EvalError::Shape {
        combinator,
        value: v.to_string(),
    };
    match e {
        CombExpr::OpaqueFn(name) => apply(name, v),
        CombExpr::Compose(after, before) => {
            let mid = eval_with(before, v, apply)?;
            eval_with(after, &mid, apply)
        }
        CombExpr::Pair(f, g) => {
            let right = eval_with(g, v, apply)?;
            let left = eval_with(f, v, apply)?;
            Ok(Value::pair(left, right))
        }
        CombExpr::Case(f, g) => match v {
            Value::InL(x) => eval_with(f, x, apply),
            Value::InR(y) => eval_with(g, y, apply),
            _ => Err(shape_err("case")),
        },
        CombExpr::Identity => Ok(v.clone()),
        CombExpr::Theta => Ok(Value::Unit),
        CombExpr::Pi1 => match v {
            Value::Pair(a, _) => Ok((**a).clone()),
            _ => Err(shape_err("pi1")),
        },
        CombExpr::Pi2 => match v {
            Value::Pair(_, b) => Ok((**b).clone()),
            _ => Err(shape_err("pi2")),
        },
        CombExpr::Kappa1 => Ok(Value::inl(v.clone())),
        CombExpr::Kappa2 => Ok(Value::inr(v.clone())),
        CombExpr::Delta1 => match v {
            Value::Pair(a, b) => match &**b {
                Value::InL(x) => Ok(Value::inl(Value::Pair(a.clone(), x.clone()))),
                Value::InR(y) => Ok(Value::inr(Value::Pair(a.clone(), y.clone()))),
                _ => Err(shape_err("d1")),
            },
            _ => Err(shape_err("d1")),
        },
    }
}

/// Evaluate `e` on `v` under an interpretation.
pub fn eval(interp: &Interpretation, e: &CombExpr, v: &Value) -> Result<Value, EvalError> {
    eval_with(e, v, &mut |name, arg| Ok(interp.apply(name, arg)?))
}
