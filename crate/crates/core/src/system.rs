//! System expressions: loop functions built from lifts, `α`, `β`, `ω`,
//! `⊗` and `⊕`, their typing against interface shapes, closed-loop
//! composition of a plant with a complement-shaped controller, and the
//! closed-loop normal form.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::comb::{self, product_map, Annotated, CombExpr, Derived, Ty, TypeError, TypedComb, Unifier};
use crate::shapes::{complement, refines, Shape};
use crate::types::{CompositeType, SymbolTable};

/// The loop-function grammar. Omitted lifts are stored as `⌈id⌉`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LoopExpr {
    /// `⌈f⌉ ∘ ω`
    LiftOmega(CombExpr),
    /// `α ∘ inner`
    Alpha(Box<LoopExpr>),
    /// `⌈f⌉ ∘ β ∘ inner`
    LiftBeta(CombExpr, Box<LoopExpr>),
    /// `⌈f⌉ ∘ (left ⊗ right)`
    LiftTensor(CombExpr, Box<LoopExpr>, Box<LoopExpr>),
    /// `⌈f⌉ ∘ (left ⊕ right)`
    LiftOplus(CombExpr, Box<LoopExpr>, Box<LoopExpr>),
}

impl LoopExpr {
    pub fn omega(f: CombExpr) -> LoopExpr {
        LoopExpr::LiftOmega(f)
    }

    pub fn alpha(inner: LoopExpr) -> LoopExpr {
        LoopExpr::Alpha(Box::new(inner))
    }

    pub fn beta(f: CombExpr, inner: LoopExpr) -> LoopExpr {
        LoopExpr::LiftBeta(f, Box::new(inner))
    }

    pub fn tensor(f: CombExpr, l: LoopExpr, r: LoopExpr) -> LoopExpr {
        LoopExpr::LiftTensor(f, Box::new(l), Box::new(r))
    }

    pub fn oplus(f: CombExpr, l: LoopExpr, r: LoopExpr) -> LoopExpr {
        LoopExpr::LiftOplus(f, Box::new(l), Box::new(r))
    }

    fn constructor(&self) -> &'static str {
        match self {
            LoopExpr::LiftOmega(_) => "⌈f⌉∘ω",
            LoopExpr::Alpha(_) => "α",
            LoopExpr::LiftBeta(..) => "⌈f⌉∘β",
            LoopExpr::LiftTensor(..) => "⊗",
            LoopExpr::LiftOplus(..) => "⊕",
        }
    }

    /// Every combinational expression in the loop, outermost first.
    pub fn combs(&self) -> Vec<&CombExpr> {
        let mut out = vec![];
        fn go<'a>(l: &'a LoopExpr, out: &mut Vec<&'a CombExpr>) {
            match l {
                LoopExpr::LiftOmega(f) => out.push(f),
                LoopExpr::Alpha(i) => go(i, out),
                LoopExpr::LiftBeta(f, i) => {
                    out.push(f);
                    go(i, out);
                }
                LoopExpr::LiftTensor(f, a, b) | LoopExpr::LiftOplus(f, a, b) => {
                    out.push(f);
                    go(a, out);
                    go(b, out);
                }
            }
        }
        go(self, &mut out);
        out
    }
}

/// `⌈init⌉(μ(loop))`
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemExpr {
    pub init: CombExpr,
    pub loop_expr: LoopExpr,
}

impl SystemExpr {
    pub fn new(init: CombExpr, loop_expr: LoopExpr) -> Self {
        SystemExpr { init, loop_expr }
    }

    /// `⌈id⌉(μ(⌈id⌉ ∘ ω))`
    pub fn identity_loop() -> Self {
        SystemExpr::new(CombExpr::Identity, LoopExpr::omega(CombExpr::Identity))
    }
}

/// `[F ◁ G]^T`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemType {
    pub shape_f: Shape,
    pub shape_g: Shape,
    pub param: CompositeType,
}

impl SystemType {
    /// Fails unless `shape_f ◁ shape_g`.
    pub fn new(shape_f: Shape, shape_g: Shape, param: CompositeType) -> Option<Self> {
        refines(&shape_f, &shape_g).then_some(SystemType {
            shape_f,
            shape_g,
            param,
        })
    }
}

impl fmt::Display for SystemType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let param = match &self.param {
            CompositeType::Opaque(_) | CompositeType::One => self.param.to_string(),
            p => format!("({p})"),
        };
        write!(f, "[{} ◁ {}]^{}", self.shape_f, self.shape_g, param)
    }
}

/// A system together with the interface it is declared against.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeclaredSystem {
    pub shape: Shape,
    /// Optional initial parameter annotation.
    pub param: Option<CompositeType>,
    pub expr: SystemExpr,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SystemError {
    #[error("type error in {rule}: {source}")]
    Type {
        rule: &'static str,
        #[source]
        source: TypeError,
    },
    #[error("shape mismatch: rule {rule} needs {expected}, declared shape has {found}")]
    ShapeMismatch {
        rule: &'static str,
        expected: &'static str,
        found: String,
    },
    #[error("shapes are not complements: {left} vs {right}")]
    NotComplements { left: String, right: String },
    #[error("parameter types differ: {left} vs {right}")]
    ParamMismatch { left: String, right: String },
    #[error("no composition rule for {left} against {right}")]
    NormalFormError { left: &'static str, right: &'static str },
    #[error("not a closed-loop system: {0}")]
    NotClosedLoop(String),
}

fn tyerr(rule: &'static str) -> impl Fn(TypeError) -> SystemError {
    move |source| SystemError::Type { rule, source }
}

/// Result of checking a system against a shape.
#[derive(Clone, Debug)]
pub struct SystemTyping {
    pub system_type: SystemType,
    pub loop_state: CompositeType,
    pub init: TypedComb,
}

fn shape_name(s: &Shape) -> String {
    match s {
        Shape::Id => "Id".into(),
        Shape::Prod(..) => format!("a product ({s})"),
        Shape::Coprod(..) => format!("a coproduct ({s})"),
        Shape::Input(..) => format!("an input port ({s})"),
        Shape::Output(..) => format!("an output port ({s})"),
    }
}

struct LoopChecker<'a> {
    ctx: &'a SymbolTable,
    u: Unifier,
    /// The loop state type `X` of `[G ◁ G]^X`.
    state: Ty,
    lifts: Vec<Annotated>,
}

impl LoopChecker<'_> {
    fn lift(&mut self, f: &CombExpr, dom: &Ty, cod: &Ty, rule: &'static str) -> Result<(), SystemError> {
        let a = comb::infer_annotated(self.ctx, f, dom, &mut self.u).map_err(tyerr(rule))?;
        self.u.unify(cod, &a.cod, rule).map_err(tyerr(rule))?;
        self.lifts.push(a);
        Ok(())
    }

    /// Check `l : [G ◁ G]^X ⟶ [shape ◁ G]^param`.
    fn check(&mut self, l: &LoopExpr, shape: &Shape, param: &Ty) -> Result<(), SystemError> {
        match (l, shape) {
            (LoopExpr::LiftOmega(f), Shape::Id) => {
                let x = self.state.clone();
                self.lift(f, param, &x, "ω (lifted function into the loop state)")
            }
            (LoopExpr::LiftOmega(_), s) => Err(SystemError::ShapeMismatch {
                rule: "ω : [G ◁ G]^T ⟶ [Id ◁ G]^T",
                expected: "Id",
                found: shape_name(s),
            }),
            (LoopExpr::Alpha(inner), Shape::Input(f, port)) => {
                let p = Ty::prod(param.clone(), port.into());
                self.check(inner, f, &p)
            }
            (LoopExpr::Alpha(_), s) => Err(SystemError::ShapeMismatch {
                rule: "α : [F ◁ G]^(T×U) ⟶ [F^U ◁ G]^T",
                expected: "an input port",
                found: shape_name(s),
            }),
            (LoopExpr::LiftBeta(f, inner), Shape::Output(fs, port)) => {
                let inner_param = self.u.fresh();
                let cod = Ty::prod(inner_param.clone(), port.into());
                self.lift(f, param, &cod, "β : [F ◁ G]^T ⟶ [F_U ◁ G]^(T×U)")?;
                self.check(inner, fs, &inner_param)
            }
            (LoopExpr::LiftBeta(..), s) => Err(SystemError::ShapeMismatch {
                rule: "β : [F ◁ G]^T ⟶ [F_U ◁ G]^(T×U)",
                expected: "an output port",
                found: shape_name(s),
            }),
            (LoopExpr::LiftTensor(f, a, b), Shape::Prod(fa, fb)) => {
                let inner = self.u.fresh();
                self.lift(f, param, &inner, "⊗")?;
                self.check(a, fa, &inner)?;
                self.check(b, fb, &inner)
            }
            (LoopExpr::LiftTensor(..), s) => Err(SystemError::ShapeMismatch {
                rule: "f ⊗ g : [F ◁ G]^U ⟶ [F1 × F2 ◁ G]^T",
                expected: "a product",
                found: shape_name(s),
            }),
            (LoopExpr::LiftOplus(f, a, b), Shape::Coprod(fa, fb)) => {
                let (t1, t2) = (self.u.fresh(), self.u.fresh());
                self.lift(
                    f,
                    param,
                    &Ty::sum(t1.clone(), t2.clone()),
                    "⊕ : [F ◁ G]^U ⟶ [F1 + F2 ◁ G]^(T1+T2)",
                )?;
                self.check(a, fa, &t1)?;
                self.check(b, fb, &t2)
            }
            (LoopExpr::LiftOplus(..), s) => Err(SystemError::ShapeMismatch {
                rule: "f ⊕ g : [F ◁ G]^U ⟶ [F1 + F2 ◁ G]^(T1+T2)",
                expected: "a coproduct",
                found: shape_name(s),
            }),
        }
    }
}

/// Check `s` against the declared shape `G`.
///
/// The loop must have type `[G ◁ G]^X ⟶ [G ◁ G]^X`; `μ` closes it and the
/// contravariant lift of the initialisation function turns `[G ◁ G]^X`
/// into `[G ◁ G]^T` for its domain `T`. Types the expression leaves open
/// default to `1` unless `param_hint` fixes the initial parameter.
pub fn type_system_full(
    ctx: &SymbolTable,
    s: &SystemExpr,
    declared_shape: &Shape,
    param_hint: Option<&CompositeType>,
) -> Result<SystemTyping, SystemError> {
    let mut u = Unifier::new();
    let state = u.fresh();
    let mut checker = LoopChecker {
        ctx,
        u,
        state: state.clone(),
        lifts: vec![],
    };
    checker.check(&s.loop_expr, declared_shape, &state)?;
    let param = match param_hint {
        Some(p) => p.into(),
        None => checker.u.fresh(),
    };
    let init =
        comb::infer_annotated(ctx, &s.init, &param, &mut checker.u).map_err(tyerr("⌈init⌉ (initialisation lift)"))?;
    checker
        .u
        .unify(&state, &init.cod, "⌈init⌉ (initialisation lift)")
        .map_err(tyerr("⌈init⌉ (initialisation lift)"))?;
    // grounding every lift surfaces unknown symbols and pins the defaults
    for a in &checker.lifts {
        comb::ground(ctx, a, &checker.u, true).map_err(tyerr("lift"))?;
    }
    let init = comb::ground(ctx, &init, &checker.u, true).map_err(tyerr("⌈init⌉"))?;
    let loop_state = checker.u.ground(&state, true).expect("defaulted");
    let system_type =
        SystemType::new(declared_shape.clone(), declared_shape.clone(), init.dom.clone()).expect("◁ is reflexive");
    Ok(SystemTyping {
        system_type,
        loop_state,
        init,
    })
}

/// The type `[G ◁ G]^T` of `s`.
pub fn type_system(
    ctx: &SymbolTable,
    s: &SystemExpr,
    declared_shape: &Shape,
    param_hint: Option<&CompositeType>,
) -> Result<SystemType, SystemError> {
    type_system_full(ctx, s, declared_shape, param_hint).map(|t| t.system_type)
}

/// The loop state type of `s`.
pub fn loop_state_type(
    ctx: &SymbolTable,
    s: &SystemExpr,
    declared_shape: &Shape,
    param_hint: Option<&CompositeType>,
) -> Result<CompositeType, SystemError> {
    type_system_full(ctx, s, declared_shape, param_hint).map(|t| t.loop_state)
}

/// A closed-loop system reduced to its four defining values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedLoop {
    pub init: CombExpr,
    pub loop_fn: CombExpr,
    pub param: CompositeType,
    pub state: CompositeType,
}

impl ClosedLoop {
    /// Reassemble `⌈init⌉(μ(⌈loop⌉ ∘ ω))`.
    pub fn to_system(&self) -> SystemExpr {
        SystemExpr::new(self.init.clone(), LoopExpr::omega(self.loop_fn.clone()))
    }

    /// Typed trees for `init : param ⟶ state` and `loop : state ⟶ state`.
    pub fn typed(&self, ctx: &SymbolTable) -> Result<(TypedComb, TypedComb), SystemError> {
        let init = comb::check(
            ctx,
            &self.init,
            &comb::CombType {
                domain: self.param.clone(),
                codomain: self.state.clone(),
            },
        )
        .map_err(tyerr("initialisation function"))?;
        let lp = comb::check(
            ctx,
            &self.loop_fn,
            &comb::CombType {
                domain: self.state.clone(),
                codomain: self.state.clone(),
            },
        )
        .map_err(tyerr("loop function"))?;
        Ok((init, lp))
    }
}

/// Extract initial parameter type, loop state type, initialisation function
/// and loop function from a closed-loop system.
pub fn normal_form(
    ctx: &SymbolTable,
    s: &SystemExpr,
    param_hint: Option<&CompositeType>,
) -> Result<ClosedLoop, SystemError> {
    let loop_fn = match &s.loop_expr {
        LoopExpr::LiftOmega(g) => g.clone(),
        other => {
            return Err(SystemError::NotClosedLoop(format!(
                "loop starts with {} instead of ⌈f⌉∘ω",
                other.constructor()
            )))
        }
    };
    let typing = type_system_full(ctx, s, &Shape::Id, param_hint)?;
    Ok(ClosedLoop {
        init: s.init.clone(),
        loop_fn,
        param: typing.system_type.param,
        state: typing.loop_state,
    })
}

/// `g1 ⊗f g2`: the combinational function that runs one cycle of two
/// connected loops on the pair of their parameters.
pub fn tensor_loops(g1: &LoopExpr, g2: &LoopExpr) -> Result<CombExpr, SystemError> {
    use CombExpr as E;
    let pi1 = || E::Pi1;
    let pi2 = || E::Pi2;
    Ok(match (g1, g2) {
        (LoopExpr::LiftOmega(f1), LoopExpr::LiftOmega(f2)) => product_map(f1.clone(), f2.clone()),
        (LoopExpr::Alpha(g1), LoopExpr::LiftBeta(f2, g2)) => {
            // ((t1, (t2, u)) ↦ ((t1, u), t2)
            let shuffle = E::pair(E::pair(pi1(), E::compose(pi2(), pi2())), E::compose(pi1(), pi2()));
            E::chain([tensor_loops(g1, g2)?, shuffle, product_map(E::Identity, f2.clone())])
        }
        (LoopExpr::LiftBeta(f1, g1), LoopExpr::Alpha(g2)) => {
            // ((t1, u), t2) ↦ (t1, (t2, u))
            let shuffle = E::pair(E::compose(pi1(), pi1()), E::pair(pi2(), E::compose(pi2(), pi1())));
            E::chain([tensor_loops(g1, g2)?, shuffle, product_map(f1.clone(), E::Identity)])
        }
        (LoopExpr::LiftTensor(f1, g11, g12), LoopExpr::LiftOplus(f2, g21, g22)) => E::chain([
            E::case(tensor_loops(g11, g21)?, tensor_loops(g12, g22)?),
            E::Delta1,
            product_map(f1.clone(), f2.clone()),
        ]),
        (LoopExpr::LiftOplus(f1, g11, g12), LoopExpr::LiftTensor(f2, g21, g22)) => E::chain([
            E::case(tensor_loops(g11, g21)?, tensor_loops(g12, g22)?),
            comb::desugar(Derived::Delta2, &[]).expect("arity"),
            product_map(f1.clone(), f2.clone()),
        ]),
        (a, b) => {
            return Err(SystemError::NormalFormError {
                left: a.constructor(),
                right: b.constructor(),
            })
        }
    })
}

/// Drop identities from the outermost composition chain.
pub fn simplify(e: &CombExpr) -> CombExpr {
    match e {
        CombExpr::Compose(a, b) => match (simplify(a), simplify(b)) {
            (CombExpr::Identity, x) | (x, CombExpr::Identity) => x,
            (x, y) => CombExpr::compose(x, y),
        },
        other => other.clone(),
    }
}

/// Closed-loop composition `plant ⊗ controller`.
///
/// The controller's shape must be the complement of the plant's and both
/// must accept the same initial parameter `T`; the controller is typed with
/// the plant's parameter as a hint. The composed initialisation function
/// duplicates the shared parameter: `⟨f1, f2⟩ : T ⟶ X1 × X2`.
pub fn compose(
    ctx: &SymbolTable,
    plant: &DeclaredSystem,
    controller: &DeclaredSystem,
) -> Result<ClosedLoop, SystemError> {
    if controller.shape != complement(&plant.shape) {
        return Err(SystemError::NotComplements {
            left: plant.shape.to_string(),
            right: controller.shape.to_string(),
        });
    }
    let p = type_system_full(ctx, &plant.expr, &plant.shape, plant.param.as_ref())?;
    let t = p.system_type.param.clone();
    if let Some(cp) = &controller.param {
        if *cp != t {
            return Err(SystemError::ParamMismatch {
                left: t.to_string(),
                right: cp.to_string(),
            });
        }
    }
    let c = type_system_full(ctx, &controller.expr, &controller.shape, Some(&t)).map_err(|e| match e {
        SystemError::Type { .. } => SystemError::ParamMismatch {
            left: t.to_string(),
            right: format!("controller does not accept it ({e})"),
        },
        other => other,
    })?;
    let loop_fn = simplify(&tensor_loops(&plant.expr.loop_expr, &controller.expr.loop_expr)?);
    let init = CombExpr::pair(plant.expr.init.clone(), controller.expr.init.clone());
    let closed = ClosedLoop {
        init,
        loop_fn,
        param: t,
        state: CompositeType::product(p.loop_state, c.loop_state),
    };
    // the result must be a well-typed closed loop
    closed.typed(ctx)?;
    Ok(closed)
}

// ---------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------

fn lift_ascii(f: &CombExpr) -> Option<String> {
    (*f != CombExpr::Identity).then(|| format!("lift({})", comb::render_expr(f)))
}

pub fn render_loop(l: &LoopExpr) -> String {
    let with_lift = |f: &CombExpr, rest: String| match lift_ascii(f) {
        Some(lf) => format!("{lf} . {rest}"),
        None => rest,
    };
    match l {
        LoopExpr::LiftOmega(f) => with_lift(f, "omega".into()),
        LoopExpr::Alpha(i) => format!("alpha . {}", render_loop(i)),
        LoopExpr::LiftBeta(f, i) => with_lift(f, format!("beta . {}", render_loop(i))),
        LoopExpr::LiftTensor(f, a, b) => with_lift(f, format!("({} (x) {})", render_loop(a), render_loop(b))),
        LoopExpr::LiftOplus(f, a, b) => with_lift(f, format!("({} (o) {})", render_loop(a), render_loop(b))),
    }
}

pub fn render_system(s: &SystemExpr) -> String {
    match lift_ascii(&s.init) {
        Some(l) => format!("{l}(mu({}))", render_loop(&s.loop_expr)),
        None => format!("mu({})", render_loop(&s.loop_expr)),
    }
}

pub fn render_loop_unicode(l: &LoopExpr) -> String {
    let lift = |f: &CombExpr| format!("⌈{}⌉", comb::render_expr_unicode(f));
    match l {
        LoopExpr::LiftOmega(f) => format!("{} ∘ ω", lift(f)),
        LoopExpr::Alpha(i) => format!("α ∘ {}", render_loop_unicode(i)),
        LoopExpr::LiftBeta(f, i) => format!("{} ∘ β ∘ {}", lift(f), render_loop_unicode(i)),
        LoopExpr::LiftTensor(f, a, b) => format!(
            "{} ∘ ({} ⊗ {})",
            lift(f),
            render_loop_unicode(a),
            render_loop_unicode(b)
        ),
        LoopExpr::LiftOplus(f, a, b) => format!(
            "{} ∘ ({} ⊕ {})",
            lift(f),
            render_loop_unicode(a),
            render_loop_unicode(b)
        ),
    }
}

pub fn render_system_unicode(s: &SystemExpr) -> String {
    format!(
        "⌈{}⌉(μ({}))",
        comb::render_expr_unicode(&s.init),
        render_loop_unicode(&s.loop_expr)
    )
}

impl fmt::Display for SystemExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_system(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::CompositeType as C;

    fn o(n: &str) -> C {
        C::opaque(n)
    }

    fn delay_ctx() -> SymbolTable {
        let mut st = SymbolTable::new();
        st.declare_type("T").unwrap();
        st.declare_function("init", C::One, o("T")).unwrap();
        st
    }

    fn delay() -> SystemExpr {
        SystemExpr::new(
            CombExpr::opaque("init"),
            LoopExpr::beta(
                CombExpr::pair(CombExpr::Theta, CombExpr::Identity),
                LoopExpr::alpha(LoopExpr::omega(CombExpr::Pi2)),
            ),
        )
    }

    fn moore() -> Shape {
        Shape::output(Shape::input(Shape::Id, o("T")), o("T"))
    }

    #[test]
    fn delay_system_type() {
        let st = delay_ctx();
        let ty = type_system_full(&st, &delay(), &moore(), None).unwrap();
        assert_eq!(ty.system_type, SystemType::new(moore(), moore(), C::One).unwrap());
        assert_eq!(ty.loop_state, o("T"));
        assert_eq!(ty.system_type.to_string(), "[Id ^ T _ T ◁ Id ^ T _ T]^1");
    }

    #[test]
    fn delay_rejects_wrong_shape() {
        let st = delay_ctx();
        let wrong = Shape::input(Shape::output(Shape::Id, o("T")), o("T"));
        let err = type_system(&st, &delay(), &wrong, None).unwrap_err();
        assert!(matches!(err, SystemError::ShapeMismatch { .. }), "{err}");
        assert!(err.to_string().contains("β"));
    }

    #[test]
    fn identity_loop_at_any_param() {
        let st = delay_ctx();
        for p in [o("T"), C::One, C::coproduct(o("T"), C::One)] {
            let ty = type_system_full(&st, &SystemExpr::identity_loop(), &Shape::Id, Some(&p)).unwrap();
            assert_eq!(ty.system_type.param, p);
            assert_eq!(ty.loop_state, p);
        }
        let nf = normal_form(&st, &SystemExpr::identity_loop(), Some(&o("T"))).unwrap();
        assert_eq!(nf.init, CombExpr::Identity);
        assert_eq!(nf.loop_fn, CombExpr::Identity);
    }

    #[test]
    fn omega_pair_composes_to_product_map() {
        let f1 = CombExpr::opaque("f1");
        let f2 = CombExpr::opaque("f2");
        let got = tensor_loops(&LoopExpr::omega(f1.clone()), &LoopExpr::omega(f2.clone())).unwrap();
        assert_eq!(got, product_map(f1, f2));
    }

    #[test]
    fn mismatched_constructors_are_reported() {
        let err = tensor_loops(
            &LoopExpr::omega(CombExpr::Identity),
            &LoopExpr::alpha(LoopExpr::omega(CombExpr::Identity)),
        )
        .unwrap_err();
        assert_eq!(
            err,
            SystemError::NormalFormError {
                left: "⌈f⌉∘ω",
                right: "α"
            }
        );
    }

    #[test]
    fn normal_form_requires_closed_loop() {
        let st = delay_ctx();
        assert!(matches!(
            normal_form(&st, &delay(), None),
            Err(SystemError::NotClosedLoop(_))
        ));
    }

    #[test]
    fn identity_composition() {
        let st = delay_ctx();
        let d = DeclaredSystem {
            shape: Shape::Id,
            param: Some(o("T")),
            expr: SystemExpr::identity_loop(),
        };
        let c = compose(&st, &d, &d).unwrap();
        assert_eq!(c.loop_fn, product_map(CombExpr::Identity, CombExpr::Identity));
        assert_eq!(c.state, C::product(o("T"), o("T")));
    }

    #[test]
    fn unicode_rendering() {
        assert_eq!(
            render_system_unicode(&delay()),
            "⌈init⌉(μ(⌈⟨θ, id⟩⌉ ∘ β ∘ α ∘ ⌈π2⌉ ∘ ω))"
        );
        assert_eq!(
            render_system(&delay()),
            "lift(init)(mu(lift(<theta, id>) . beta . alpha . lift(pi2) . omega))"
        );
    }
}
