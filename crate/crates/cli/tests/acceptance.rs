//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use looplock_core::comb::{eval, CombExpr};
use looplock_core::dsl::{self, Checked};
use looplock_core::gen::{
    random_context, random_interpretation, random_pair, random_shape, random_system, random_type, CombGen, GenConfig,
};
use looplock_core::interp::{complete_diamond_system, run_system, DiamondSet, Interpretation, RunLimits};
use looplock_core::oracle::{oracle_identity, preservation, sample_inputs, similarity_soundness, COMPLETE_CAP};
use looplock_core::shapes::{complement, refines, Shape};
use looplock_core::system::{compose, normal_form, SystemType};
use looplock_core::types::{variants, CompositeType as C, OpaqueTypeId};
use rand::rngs::StdRng;
use rand::SeedableRng;

type Outcome = Result<String, String>;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn within(t: Instant, limit: Duration, detail: String) -> Outcome {
    let took = t.elapsed();
    if took < limit {
        Ok(format!("{detail}; {took:.2?}"))
    } else {
        Err(format!("{detail}; took {took:.2?}, limit {limit:?}"))
    }
}

fn verify_exit(controller: &str) -> Result<i32, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_looplock"))
        .args([
            "verify",
            "examples/msg.spec",
            "--spec",
            "S",
            "--plant",
            "P",
            "--controller",
            controller,
        ])
        .current_dir(root())
        .env("LOOPLOCK_COLOR", "never")
        .output()
        .map_err(|e| e.to_string())?;
    o.status.code().ok_or_else(|| "killed by a signal".to_string())
}

fn delay_round_trip() -> Outcome {
    let t = Instant::now();
    let text = std::fs::read_to_string(root().join("examples/delay.spec")).map_err(|e| e.to_string())?;
    let f = dsl::parse(&text).map_err(|e| e.to_string())?;
    let again = dsl::parse(&f.to_source()).map_err(|e| e.to_string())?;
    if again != f {
        return Err("printing and re-parsing changed the file".into());
    }
    let typing = f
        .check()
        .into_iter()
        .find_map(|r| match r {
            Ok(Checked::Sys { name, typing }) if name == "Delay" => Some(typing),
            _ => None,
        })
        .ok_or("Delay does not typecheck")?;
    let tee = C::opaque("T");
    let side = Shape::output(Shape::input(Shape::Id, tee.clone()), tee.clone());
    let want = SystemType::new(side.clone(), side, C::One).ok_or("expected type is ill-formed")?;
    if typing.system_type != want || typing.loop_state != tee {
        return Err(format!(
            "got {} with loop state {}",
            typing.system_type, typing.loop_state
        ));
    }
    within(
        t,
        Duration::from_secs(1),
        format!("{} with loop state {}", typing.system_type, typing.loop_state),
    )
}

fn transceiver_verifies() -> Outcome {
    let t = Instant::now();
    match verify_exit("C")? {
        0 => within(t, Duration::from_secs(10), "verify S / P / C exits 0".into()),
        c => Err(format!("exit {c}")),
    }
}

/// Some element of ⋄≤6(P ⊗ Cbad, x0) that no run of S performs within 6
/// computations from any initial world, under hashed worlds with MSG = {0, 7}.
fn negative_control() -> Outcome {
    let t = Instant::now();
    let code = verify_exit("Cbad")?;
    if code != 2 {
        return Err(format!("verify exits {code}, expected 2"));
    }
    let text = std::fs::read_to_string(root().join("examples/msg.spec")).map_err(|e| e.to_string())?;
    let f = dsl::parse(&text).map_err(|e| e.to_string())?;
    let sys = |n: &str| f.system(n).ok_or(format!("no system {n}"));
    let spec = sys("S")?;
    let spec = normal_form(&f.symbols, &spec.expr, spec.param.as_ref()).map_err(|e| e.to_string())?;
    let bad = compose(&f.symbols, sys("P")?, sys("Cbad")?).map_err(|e| e.to_string())?;
    let good = compose(&f.symbols, sys("P")?, sys("C")?).map_err(|e| e.to_string())?;
    let run = |s, i: &Interpretation, x: &_| -> Result<DiamondSet, String> {
        Ok(run_system(s, i, x, RunLimits::computations(6))
            .map_err(|e| e.to_string())?
            .diamond())
    };
    let domains: BTreeMap<OpaqueTypeId, Vec<i64>> = [
        (OpaqueTypeId::new("MSG"), vec![0, 7]),
        (OpaqueTypeId::new("WORLD"), (0..4).collect()),
    ]
    .into();
    for seed in 0..64 {
        let interp = Interpretation::hashed(&f.symbols, domains.clone(), seed).map_err(|e| e.to_string())?;
        let worlds = interp.values_of(&spec.param);
        let mut anywhere = DiamondSet::new();
        for w in &worlds {
            anywhere.extend(&run(&spec, &interp, w)?);
        }
        // positive control: the correct controller performs everything S does
        for w in &worlds {
            let full = complete_diamond_system(&good, &interp, w, COMPLETE_CAP).map_err(|e| e.to_string())?;
            let want = run(&spec, &interp, w)?;
            if let Some(ap) = want.difference(&full).next() {
                return Err(format!(
                    "seed {seed}: P ⊗ C never performs {}({})",
                    ap.function, ap.argument
                ));
            };
        }
        for w in &worlds {
            let got = run(&bad, &interp, w)?;
            // S never calls `zero`; the telling witness is a message it never sends
            if let Some(ap) = got.difference(&anywhere).find(|ap| ap.function == "send") {
                let found = format!(
                    "verify exits 2; seed {seed}, x0 = {w}: P ⊗ Cbad performs {}({})",
                    ap.function, ap.argument
                );
                return within(t, Duration::from_secs(10), found);
            };
        }
    }
    Err("verify rejects, but no interpretation exhibits a witness".into())
}

fn corpus() -> (Outcome, Outcome) {
    let t = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let cfg = GenConfig::default();
    let (mut identity_err, mut preserve_err) = (None, None);
    let (mut max_q, mut max_el) = (0, 0);
    let mut identity_time = Duration::ZERO;
    let n = 200;
    for i in 0..n {
        let g = match random_system(&mut rng, &cfg) {
            Ok(g) => g,
            Err(e) => return (Err(format!("#{i}: generator: {e}")), Err("corpus not generated".into())),
        };
        let interp = random_interpretation(&mut rng, &g.ctx, cfg.max_domain).expect("hashed interpretation");
        let x0s = sample_inputs(&interp, &g.system, 3);
        let ti = Instant::now();
        let a = oracle_identity(&g.ctx, &g.system, &interp, &x0s, 6);
        identity_time += ti.elapsed();
        let a = match a {
            Ok(a) => a,
            Err(m) => {
                identity_err.get_or_insert(format!("#{i}: {m}"));
                continue;
            }
        };
        match preservation(&g.system, &a, &interp, &x0s, 6) {
            Ok(st) => {
                max_q = max_q.max(st.states);
                max_el = max_el.max(st.elimination_depth);
            }
            Err(m) => {
                preserve_err.get_or_insert(format!("#{i}: {m}"));
            }
        }
    }
    let identity = match identity_err {
        Some(e) => Err(e),
        None if identity_time < Duration::from_secs(60) => {
            Ok(format!("{n} systems, 0 mismatches; {identity_time:.2?}"))
        }
        None => Err(format!("took {identity_time:.2?}")),
    };
    let preserved = match preserve_err {
        Some(e) => Err(e),
        None => Ok(format!(
            "{n} systems, 0 mismatches, max elimination depth {max_el}, max |Q| {max_q}; {:.2?} total",
            t.elapsed()
        )),
    };
    (identity, preserved)
}

fn similarity_soundness_sampling() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0xa11ce);
    let cfg = GenConfig::default();
    let (n, mut similar, mut violations) = (120, 0, 0);
    for i in 0..n {
        let (ctx, s1, s2, _) = random_pair(&mut rng, &cfg).map_err(|e| format!("#{i}: {e}"))?;
        let interps: Vec<_> = (0..3)
            .map(|_| random_interpretation(&mut rng, &ctx, cfg.max_domain))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let r = similarity_soundness(&ctx, &s1, &s2, &interps, 3, 5).map_err(|e| format!("#{i}: {e}"))?;
        if r.contradicts() {
            return Err(format!("#{i}: similar, yet {}", r.violation.unwrap()));
        }
        similar += usize::from(r.similar);
        violations += usize::from(r.violation.is_some());
    }
    Ok(format!(
        "{n} pairs: {similar} similar, {violations} with oracle violations, 0 contradictions"
    ))
}

fn subshapes(s: &Shape, out: &mut Vec<Shape>) {
    out.push(s.clone());
    for c in s.children() {
        subshapes(c, out);
    }
}

fn structural() -> Outcome {
    let t = Instant::now();
    let mut rng = StdRng::seed_from_u64(7);
    let types = [OpaqueTypeId::new("A"), OpaqueTypeId::new("B")];
    let shapes: Vec<Shape> = (0..1000).map(|i| random_shape(&mut rng, &types, 1 + i % 8)).collect();
    for s in &shapes {
        if complement(&complement(s)) != *s {
            return Err(format!("complement is not an involution on {s}"));
        }
    }
    let mut triples = 0;
    for (i, s) in shapes.iter().enumerate() {
        if !refines(s, s) {
            return Err(format!("{s} does not refine itself"));
        }
        let mut mids = Vec::new();
        subshapes(s, &mut mids);
        for m in &mids {
            let mut lows = Vec::new();
            subshapes(m, &mut lows);
            for l in &lows {
                triples += 1;
                if !(refines(m, s) && refines(l, m) && refines(l, s)) {
                    return Err(format!("refines fails on {l} / {m} / {s}"));
                }
            }
        }
        // unrelated triples: transitivity as an implication
        let (b, c) = (
            &shapes[(i * 7 + 1) % shapes.len()],
            &shapes[(i * 13 + 5) % shapes.len()],
        );
        if refines(s, b) && refines(b, c) && !refines(s, c) {
            return Err(format!("refines is not transitive on {s} / {b} / {c}"));
        }
    }
    let mut levels: Vec<C> = vec![C::opaque("A"), C::opaque("B")];
    for _ in 0..3 {
        let mut next = vec![C::opaque("A"), C::opaque("B")];
        for l in &levels {
            for r in &levels {
                next.push(C::product(l.clone(), r.clone()));
                next.push(C::coproduct(l.clone(), r.clone()));
            }
        }
        levels = next;
    }
    for ty in &levels {
        let n = variants(ty).len();
        let ok = match ty {
            C::Product(l, r) => n == variants(l).len() * variants(r).len(),
            C::Coproduct(l, r) => n == variants(l).len() + variants(r).len(),
            _ => n == 1,
        };
        if !ok {
            return Err(format!("|var({ty})| = {n}"));
        }
    }
    within(
        t,
        Duration::from_secs(10),
        format!("1000 shapes, {triples} refinement triples, {} type trees", levels.len()),
    )
}

fn category_laws() -> Outcome {
    let mut checks = 0;
    for seed in 0..300u64 {
        let mut rng = StdRng::seed_from_u64(seed);
        let cfg = GenConfig::default();
        let ctx = random_context(&mut rng, &cfg);
        let types: Vec<_> = ctx.types().cloned().collect();
        let (t, u, v) = (
            random_type(&mut rng, &types, 2),
            random_type(&mut rng, &types, 2),
            random_type(&mut rng, &types, 2),
        );
        let interp = random_interpretation(&mut rng, &ctx, 3).map_err(|e| e.to_string())?;
        let mut g = CombGen::new(&mut rng, &ctx);
        let mut law = |name: &str, lhs: CombExpr, rhs: &CombExpr, dom: &C| -> Result<(), String> {
            for x in interp.values_of(dom) {
                let (a, b) = (eval(&interp, &lhs, &x), eval(&interp, rhs, &x));
                match (a, b) {
                    (Ok(a), Ok(b)) if a == b => checks += 1,
                    (a, b) => return Err(format!("seed {seed}: {name} at {x}: {a:?} vs {b:?}")),
                }
            }
            Ok(())
        };
        if let (Some(f), Some(h)) = (g.comb(&t, &u, 4), g.comb(&t, &v, 4)) {
            let pair = CombExpr::pair(f.clone(), h.clone());
            law("π1∘⟨f,g⟩ = f", CombExpr::compose(CombExpr::Pi1, pair.clone()), &f, &t)?;
            law("π2∘⟨f,g⟩ = g", CombExpr::compose(CombExpr::Pi2, pair), &h, &t)?;
        }
        if let (Some(f), Some(h)) = (g.comb(&u, &t, 4), g.comb(&v, &t, 4)) {
            let case = CombExpr::case(f.clone(), h.clone());
            law(
                "[f,g]∘κ1 = f",
                CombExpr::compose(case.clone(), CombExpr::Kappa1),
                &f,
                &u,
            )?;
            law("[f,g]∘κ2 = g", CombExpr::compose(case, CombExpr::Kappa2), &h, &v)?;
        }
    }
    if checks == 0 {
        return Err("no law instances generated".into());
    }
    Ok(format!("{checks} law instances"))
}

fn main() -> ExitCode {
    let (identity, preserved) = corpus();
    let results = [
        ("1 delay system round trip", delay_round_trip()),
        ("2 transceiver verifies", transceiver_verifies()),
        ("3 mutated controller rejected", negative_control()),
        ("4 oracle identity", identity),
        ("5 transformation preservation", preserved),
        ("6 similarity soundness", similarity_soundness_sampling()),
        ("7 structural properties", structural()),
        ("8 category laws", category_laws()),
    ];
    let mut failed = false;
    for (name, r) in &results {
        match r {
            Ok(d) => println!("PASS  {name}: {d}"),
            Err(d) => {
                failed = true;
                println!("FAIL  {name}: {d}");
            }
        }
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
