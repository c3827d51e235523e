//! Random well-typed contexts, systems and interpretations for the
//! property and oracle suites.
//!
//! Combinational expressions are synthesised type-directed: the generator
//! is asked for some `f : T ⟶ U` and picks a rule whose conclusion fits
//! (pairing for a product codomain, a case split for a coproduct domain,
//! an opaque application in between, ...). Systems come in two flavours:
//! closed loops written directly, and closed loops obtained by composing a
//! random plant with a random controller of the complementary shape.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::comb::{CombExpr, TypedComb, TypedNode};
use crate::interp::{InterpError, Interpretation};
use crate::shapes::{complement, Shape};
use crate::system::{compose, ClosedLoop, DeclaredSystem, LoopExpr, SystemError, SystemExpr};
use crate::types::{CompositeType, FunctionSignature, OpaqueTypeId, SymbolTable};

#[derive(Clone, Copy, Debug)]
pub struct GenConfig {
    pub max_types: usize,
    pub max_functions: usize,
    /// Bound on [`CombExpr::depth`] of every generated expression.
    pub max_depth: usize,
    /// Bound on the depth of types used in signatures and states.
    pub max_type_depth: usize,
    /// Bound on the size of plant shapes.
    pub max_shape_size: usize,
    /// Largest payload domain per opaque type.
    pub max_domain: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_types: 3,
            max_functions: 4,
            max_depth: 5,
            max_type_depth: 2,
            max_shape_size: 3,
            max_domain: 3,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Origin {
    Direct,
    Composed {
        plant: Box<DeclaredSystem>,
        controller: Box<DeclaredSystem>,
    },
}

#[derive(Clone, Debug)]
pub struct Generated {
    pub ctx: SymbolTable,
    pub system: ClosedLoop,
    pub origin: Origin,
}

const TYPE_NAMES: [&str; 3] = ["A", "B", "C"];
const FN_NAMES: [&str; 4] = ["f", "g", "h", "k"];

pub fn random_type<R: Rng>(rng: &mut R, types: &[OpaqueTypeId], depth: usize) -> CompositeType {
    if depth == 0 || rng.gen_bool(0.5) {
        if types.is_empty() || rng.gen_bool(0.15) {
            return CompositeType::One;
        }
        return CompositeType::Opaque(types.choose(rng).expect("non-empty").clone());
    }
    let l = random_type(rng, types, depth - 1);
    let r = random_type(rng, types, depth - 1);
    if rng.gen_bool(0.5) {
        CompositeType::product(l, r)
    } else {
        CompositeType::coproduct(l, r)
    }
}

pub fn random_context<R: Rng>(rng: &mut R, cfg: &GenConfig) -> SymbolTable {
    let mut st = SymbolTable::new();
    let n_types = rng.gen_range(1..=cfg.max_types.clamp(1, TYPE_NAMES.len()));
    let types: Vec<OpaqueTypeId> = TYPE_NAMES[..n_types]
        .iter()
        .map(|n| st.declare_type(*n).expect("fresh"))
        .collect();
    let n_fns = rng.gen_range(1..=cfg.max_functions.clamp(1, FN_NAMES.len()));
    for name in &FN_NAMES[..n_fns] {
        let dom = random_type(rng, &types, 1);
        let cod = random_type(rng, &types, 1);
        st.declare_function(*name, dom, cod).expect("fresh");
    }
    st
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Rule {
    Identity,
    Theta,
    Pair,
    Inject,
    Project,
    Case,
    Distribute,
    Apply,
}

/// Type-directed synthesis of combinational expressions.
pub struct CombGen<'a, R> {
    pub rng: &'a mut R,
    pub ctx: &'a SymbolTable,
    fns: Vec<FunctionSignature>,
    fuel: usize,
}

impl<'a, R: Rng> CombGen<'a, R> {
    pub fn new(rng: &'a mut R, ctx: &'a SymbolTable) -> Self {
        let fns = ctx.functions().cloned().collect();
        CombGen { rng, ctx, fns, fuel: 0 }
    }

    /// Some expression of type `dom ⟶ cod` with depth at most `depth`.
    pub fn comb(&mut self, dom: &CompositeType, cod: &CompositeType, depth: usize) -> Option<CombExpr> {
        self.fuel = 4000;
        let e = self.go(dom, cod, depth)?;
        (e.depth() <= depth).then_some(e)
    }

    fn go(&mut self, dom: &CompositeType, cod: &CompositeType, depth: usize) -> Option<CombExpr> {
        use CompositeType as C;
        if self.fuel == 0 {
            return None;
        }
        self.fuel -= 1;
        let mut rules = vec![];
        if dom == cod {
            rules.push(Rule::Identity);
        }
        if *cod == C::One {
            rules.push(Rule::Theta);
        }
        if depth > 0 {
            if matches!(cod, C::Product(..)) {
                rules.push(Rule::Pair);
            }
            if matches!(cod, C::Coproduct(..)) {
                rules.push(Rule::Inject);
            }
            if matches!(dom, C::Product(..)) {
                rules.push(Rule::Project);
            }
            if matches!(dom, C::Coproduct(..)) {
                rules.push(Rule::Case);
            }
            if matches!(dom, C::Product(_, r) if matches!(**r, C::Coproduct(..))) {
                rules.push(Rule::Distribute);
            }
            if depth > 1 && !self.fns.is_empty() {
                rules.push(Rule::Apply);
            }
        }
        rules.shuffle(self.rng);
        // Lean towards doing work.
        if let Some(i) = rules.iter().position(|r| *r == Rule::Apply) {
            if self.rng.gen_bool(0.5) {
                rules.swap(0, i);
            }
        }
        for r in rules {
            if let Some(e) = self.apply_rule(r, dom, cod, depth) {
                return Some(e);
            }
        }
        None
    }

    fn apply_rule(&mut self, rule: Rule, dom: &CompositeType, cod: &CompositeType, depth: usize) -> Option<CombExpr> {
        use CompositeType as C;
        let d = depth.saturating_sub(1);
        match (rule, dom, cod) {
            (Rule::Identity, ..) => Some(CombExpr::Identity),
            (Rule::Theta, ..) => Some(CombExpr::Theta),
            (Rule::Pair, _, C::Product(a, b)) => Some(CombExpr::pair(self.go(dom, a, d)?, self.go(dom, b, d)?)),
            (Rule::Inject, _, C::Coproduct(a, b)) => {
                let first = self.rng.gen_bool(0.5);
                let (k, t) = if first {
                    (CombExpr::Kappa1, a)
                } else {
                    (CombExpr::Kappa2, b)
                };
                Some(CombExpr::compose(k, self.go(dom, t, d)?))
            }
            (Rule::Project, C::Product(a, b), _) => {
                let first = self.rng.gen_bool(0.5);
                let (p, t) = if first { (CombExpr::Pi1, a) } else { (CombExpr::Pi2, b) };
                Some(compose_simplified(self.go(t, cod, d)?, p))
            }
            (Rule::Case, C::Coproduct(a, b), _) => Some(CombExpr::case(self.go(a, cod, d)?, self.go(b, cod, d)?)),
            (Rule::Distribute, C::Product(x, r), _) => {
                let C::Coproduct(y, z) = &**r else { return None };
                let spread = C::coproduct(
                    C::product((**x).clone(), (**y).clone()),
                    C::product((**x).clone(), (**z).clone()),
                );
                Some(compose_simplified(self.go(&spread, cod, d)?, CombExpr::Delta1))
            }
            (Rule::Apply, ..) => {
                let f = self.fns.choose(self.rng)?.clone();
                // `after . (f . before)` spends two levels of depth.
                let before = self.go(dom, &f.domain, depth - 2)?;
                let after = self.go(&f.codomain, cod, depth - 1)?;
                let inner = compose_simplified(CombExpr::opaque(f.name), before);
                Some(compose_simplified(after, inner))
            }
            _ => None,
        }
    }

    /// A loop expression of shape `shape` at parameter `param`, whose ω
    /// leaves produce `state`.
    pub fn loop_expr(
        &mut self,
        shape: &Shape,
        param: &CompositeType,
        state: &CompositeType,
        depth: usize,
    ) -> Option<LoopExpr> {
        let types: Vec<OpaqueTypeId> = self.ctx.types().cloned().collect();
        match shape {
            Shape::Id => Some(LoopExpr::omega(self.comb(param, state, depth)?)),
            Shape::Input(inner, u) => Some(LoopExpr::alpha(self.loop_expr(
                inner,
                &CompositeType::product(param.clone(), u.clone()),
                state,
                depth,
            )?)),
            Shape::Output(inner, u) => (0..4).find_map(|_| {
                let next = random_type(self.rng, &types, 1);
                let f = self.comb(param, &CompositeType::product(next.clone(), u.clone()), depth)?;
                Some(LoopExpr::beta(f, self.loop_expr(inner, &next, state, depth)?))
            }),
            Shape::Prod(l, r) => (0..4).find_map(|_| {
                let next = random_type(self.rng, &types, 1);
                let f = self.comb(param, &next, depth)?;
                Some(LoopExpr::tensor(
                    f,
                    self.loop_expr(l, &next, state, depth)?,
                    self.loop_expr(r, &next, state, depth)?,
                ))
            }),
            Shape::Coprod(l, r) => (0..4).find_map(|_| {
                let p1 = random_type(self.rng, &types, 1);
                let p2 = random_type(self.rng, &types, 1);
                let f = self.comb(param, &CompositeType::coproduct(p1.clone(), p2.clone()), depth)?;
                Some(LoopExpr::oplus(
                    f,
                    self.loop_expr(l, &p1, state, depth)?,
                    self.loop_expr(r, &p2, state, depth)?,
                ))
            }),
        }
    }
}

fn compose_simplified(after: CombExpr, before: CombExpr) -> CombExpr {
    match (after, before) {
        (CombExpr::Identity, b) => b,
        (a, CombExpr::Identity) => a,
        (a, b) => CombExpr::compose(a, b),
    }
}

pub fn random_shape<R: Rng>(rng: &mut R, types: &[OpaqueTypeId], size: usize) -> Shape {
    if size <= 1 {
        return Shape::Id;
    }
    match rng.gen_range(0..4) {
        0 => Shape::input(random_shape(rng, types, size - 1), random_type(rng, types, 1)),
        1 => Shape::output(random_shape(rng, types, size - 1), random_type(rng, types, 1)),
        2 if size > 2 => {
            let l = rng.gen_range(1..size - 1);
            Shape::prod(random_shape(rng, types, l), random_shape(rng, types, size - 1 - l))
        }
        _ if size > 2 => {
            let l = rng.gen_range(1..size - 1);
            Shape::coprod(random_shape(rng, types, l), random_shape(rng, types, size - 1 - l))
        }
        _ => Shape::input(Shape::Id, random_type(rng, types, 1)),
    }
}

fn random_declared<R: Rng>(
    gen: &mut CombGen<'_, R>,
    shape: &Shape,
    param: &CompositeType,
    depth: usize,
) -> Option<DeclaredSystem> {
    let types: Vec<OpaqueTypeId> = gen.ctx.types().cloned().collect();
    let state = random_type(gen.rng, &types, 1);
    let init = gen.comb(param, &state, depth)?;
    let lp = gen.loop_expr(shape, &state, &state, depth)?;
    Some(DeclaredSystem {
        shape: shape.clone(),
        param: Some(param.clone()),
        expr: SystemExpr::new(init, lp),
    })
}

/// A closed loop written directly: `init : T ⟶ X`, `loop : X ⟶ X`.
pub fn random_closed_loop<R: Rng>(rng: &mut R, ctx: &SymbolTable, cfg: &GenConfig) -> Option<ClosedLoop> {
    let types: Vec<OpaqueTypeId> = ctx.types().cloned().collect();
    let param = random_type(rng, &types, cfg.max_type_depth);
    let state = random_type(rng, &types, cfg.max_type_depth);
    let mut g = CombGen::new(rng, ctx);
    let init = g.comb(&param, &state, cfg.max_depth)?;
    let loop_fn = g.comb(&state, &state, cfg.max_depth)?;
    Some(ClosedLoop {
        init,
        loop_fn,
        param,
        state,
    })
}

/// A plant of random shape and a controller of the complementary shape,
/// both at the same initial parameter, and their closed-loop composition.
pub fn random_composition<R: Rng>(
    rng: &mut R,
    ctx: &SymbolTable,
    cfg: &GenConfig,
) -> Option<Result<(DeclaredSystem, DeclaredSystem, ClosedLoop), SystemError>> {
    let types: Vec<OpaqueTypeId> = ctx.types().cloned().collect();
    let size = rng.gen_range(2..=cfg.max_shape_size.max(2));
    let shape = random_shape(rng, &types, size);
    let param = random_type(rng, &types, 1);
    // Composition multiplies the two sides; keep each one small.
    let depth = cfg.max_depth.min(3);
    let mut g = CombGen::new(rng, ctx);
    let plant = random_declared(&mut g, &shape, &param, depth)?;
    let controller = random_declared(&mut g, &complement(&shape), &param, depth)?;
    Some(compose(ctx, &plant, &controller).map(|c| (plant, controller, c)))
}

/// Draw until a system is produced. Composition failures are bugs and
/// are returned.
pub fn random_system<R: Rng>(rng: &mut R, cfg: &GenConfig) -> Result<Generated, SystemError> {
    loop {
        let ctx = random_context(rng, cfg);
        if rng.gen_bool(0.5) {
            if let Some(system) = random_closed_loop(rng, &ctx, cfg) {
                return Ok(Generated {
                    ctx,
                    system,
                    origin: Origin::Direct,
                });
            }
        } else {
            for _ in 0..5 {
                if let Some(r) = random_composition(rng, &ctx, cfg) {
                    let (plant, controller, system) = r?;
                    return Ok(Generated {
                        ctx,
                        system,
                        origin: Origin::Composed {
                            plant: Box::new(plant),
                            controller: Box::new(controller),
                        },
                    });
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairKind {
    Same,
    Mutated,
    TwiceMutated,
    Unrelated,
}

/// Two closed loops over one context and one parameter type, for
/// comparing by similarity.
pub fn random_pair<R: Rng>(
    rng: &mut R,
    cfg: &GenConfig,
) -> Result<(SymbolTable, ClosedLoop, ClosedLoop, PairKind), SystemError> {
    let g = random_system(rng, cfg)?;
    let kind = *[
        PairKind::Same,
        PairKind::Mutated,
        PairKind::TwiceMutated,
        PairKind::Unrelated,
    ]
    .choose(rng)
    .expect("non-empty");
    let depth = cfg.max_depth.min(3);
    let other = match kind {
        PairKind::Same => g.system.clone(),
        PairKind::Mutated => mutate(rng, &g.ctx, &g.system, depth),
        PairKind::TwiceMutated => {
            let once = mutate(rng, &g.ctx, &g.system, depth);
            mutate(rng, &g.ctx, &once, depth)
        }
        PairKind::Unrelated => {
            let types: Vec<OpaqueTypeId> = g.ctx.types().cloned().collect();
            let found = (0..20).find_map(|_| {
                let state = random_type(rng, &types, cfg.max_type_depth);
                let mut cg = CombGen::new(rng, &g.ctx);
                let init = cg.comb(&g.system.param, &state, cfg.max_depth)?;
                let loop_fn = cg.comb(&state, &state, cfg.max_depth)?;
                Some(ClosedLoop {
                    init,
                    loop_fn,
                    param: g.system.param.clone(),
                    state,
                })
            });
            found.unwrap_or_else(|| g.system.clone())
        }
    };
    Ok((g.ctx, g.system, other, kind))
}

/// Hashed executables over payload domains `0..n`, `n ≤ max_domain`.
pub fn random_interpretation<R: Rng>(
    rng: &mut R,
    ctx: &SymbolTable,
    max_domain: usize,
) -> Result<Interpretation, InterpError> {
    let domains: BTreeMap<OpaqueTypeId, Vec<i64>> = ctx
        .types()
        .map(|t| (t.clone(), (0..rng.gen_range(1..=max_domain.max(1)) as i64).collect()))
        .collect();
    Interpretation::hashed(ctx, domains, rng.gen())
}

/// Replace one random subterm of `init` or `loop_fn` by a fresh
/// expression of the same type.
pub fn mutate<R: Rng>(rng: &mut R, ctx: &SymbolTable, s: &ClosedLoop, depth: usize) -> ClosedLoop {
    let Ok((init, lp)) = s.typed(ctx) else { return s.clone() };
    let mut out = s.clone();
    for _ in 0..8 {
        let on_init = rng.gen_bool(0.3);
        let target = if on_init { &init } else { &lp };
        let n = count_nodes(target);
        let pick = rng.gen_range(0..n);
        let mut g = CombGen::new(rng, ctx);
        let mut counter = 0;
        if let Some(e) = replace_node(target, pick, &mut counter, &mut g, depth) {
            if on_init {
                out.init = e;
            } else {
                out.loop_fn = e;
            }
            return out;
        }
    }
    out
}

fn count_nodes(t: &TypedComb) -> usize {
    1 + match &t.node {
        TypedNode::Compose(a, b) | TypedNode::Pair(a, b) | TypedNode::Case(a, b) => count_nodes(a) + count_nodes(b),
        _ => 0,
    }
}

fn replace_node<R: Rng>(
    t: &TypedComb,
    pick: usize,
    counter: &mut usize,
    g: &mut CombGen<'_, R>,
    depth: usize,
) -> Option<CombExpr> {
    let here = *counter;
    *counter += 1;
    if here == pick {
        let e = g.comb(&t.dom, &t.cod, depth)?;
        return (e != t.expr()).then_some(e);
    }
    // Preorder numbering: the left child's subtree occupies the next
    // `count_nodes(a)` numbers.
    let mut kids = |a: &TypedComb, b: &TypedComb| -> Option<(CombExpr, CombExpr)> {
        if pick < *counter + count_nodes(a) {
            replace_node(a, pick, counter, g, depth).map(|x| (x, b.expr()))
        } else {
            *counter += count_nodes(a);
            replace_node(b, pick, counter, g, depth).map(|y| (a.expr(), y))
        }
    };
    match &t.node {
        TypedNode::Compose(a, b) => kids(a, b).map(|(x, y)| CombExpr::compose(x, y)),
        TypedNode::Pair(a, b) => kids(a, b).map(|(x, y)| CombExpr::pair(x, y)),
        TypedNode::Case(a, b) => kids(a, b).map(|(x, y)| CombExpr::case(x, y)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comb::CombType;
    use crate::system::type_system_full;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn generated_combs_have_the_requested_type() {
        let mut rng = StdRng::seed_from_u64(7);
        let cfg = GenConfig::default();
        let mut made = 0;
        for _ in 0..200 {
            let ctx = random_context(&mut rng, &cfg);
            let types: Vec<_> = ctx.types().cloned().collect();
            let dom = random_type(&mut rng, &types, 2);
            let cod = random_type(&mut rng, &types, 2);
            let mut g = CombGen::new(&mut rng, &ctx);
            if let Some(e) = g.comb(&dom, &cod, cfg.max_depth) {
                assert!(e.depth() <= cfg.max_depth);
                let ty = CombType {
                    domain: dom,
                    codomain: cod,
                };
                crate::comb::check(&ctx, &e, &ty).unwrap_or_else(|err| panic!("{e}: {err}"));
                made += 1;
            }
        }
        assert!(made > 50, "only {made} expressions synthesised");
    }

    #[test]
    fn generated_systems_typecheck() {
        let mut rng = StdRng::seed_from_u64(11);
        let cfg = GenConfig::default();
        let mut composed = 0;
        for _ in 0..60 {
            let g = random_system(&mut rng, &cfg).unwrap();
            g.system.typed(&g.ctx).unwrap();
            if let Origin::Composed { plant, controller } = &g.origin {
                composed += 1;
                for s in [plant, controller] {
                    type_system_full(&g.ctx, &s.expr, &s.shape, s.param.as_ref()).unwrap();
                }
            }
        }
        assert!(composed > 10);
    }

    #[test]
    fn mutation_preserves_types() {
        let mut rng = StdRng::seed_from_u64(3);
        let cfg = GenConfig::default();
        let mut changed = 0;
        for _ in 0..60 {
            let g = random_system(&mut rng, &cfg).unwrap();
            let m = mutate(&mut rng, &g.ctx, &g.system, 3);
            m.typed(&g.ctx).unwrap();
            changed += usize::from(m != g.system);
        }
        assert!(changed > 20);
    }
}
