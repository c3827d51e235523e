//! Brute-force cross-checks between the system semantics, the automaton
//! semantics, and the automaton transformations, over concrete
//! interpretations.

use std::fmt;

use crate::automaton::{build_from_closed, Automaton};
use crate::epsilon::{epsilon_eliminate, epsilon_eliminate_general, epsilon_eliminate_with_stats};
use crate::extension::{commutative_extension_with_stats, DEFAULT_STATE_LIMIT};
use crate::interp::{
    complete_diamond_explore, complete_diamond_system, explore_automaton, run_automaton, run_system, DiamondSet,
    Interpretation, RunLimits,
};
use crate::similarity::{check_simulation, is_similar};
use crate::system::ClosedLoop;
use crate::types::SymbolTable;
use crate::value::Value;

/// Configurations explored before a complete ⋄-set computation gives up.
pub const COMPLETE_CAP: usize = 200_000;

#[derive(Clone, Debug)]
pub struct Mismatch {
    pub check: &'static str,
    pub x0: String,
    pub detail: String,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at x0 = {}: {}", self.check, self.x0, self.detail)
    }
}

fn mismatch(check: &'static str, x0: &Value, detail: impl Into<String>) -> Mismatch {
    Mismatch {
        check,
        x0: x0.to_string(),
        detail: detail.into(),
    }
}

fn show(d: &DiamondSet) -> String {
    d.to_json().to_string()
}

/// The sequence of applications the system makes within `k` computations
/// equals the automaton's, for each `x0`.
pub fn oracle_identity(
    ctx: &SymbolTable,
    s: &ClosedLoop,
    interp: &Interpretation,
    x0s: &[Value],
    k: usize,
) -> Result<Automaton, Mismatch> {
    let a = build_from_closed(ctx, s).map_err(|e| Mismatch {
        check: "build",
        x0: String::new(),
        detail: e.to_string(),
    })?;
    for x0 in x0s {
        let rs = run_system(s, interp, x0, RunLimits::computations(k))
            .map_err(|e| mismatch("run_system", x0, e.to_string()))?;
        let ra = run_automaton(&a, interp, x0, RunLimits::computations(k))
            .map_err(|e| mismatch("run_automaton", x0, e.to_string()))?;
        if rs.applications != ra.applications {
            return Err(mismatch(
                "oracle identity",
                x0,
                format!("system {} vs automaton {}", show(&rs.diamond()), show(&ra.diamond())),
            ));
        }
    }
    Ok(a)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PreservationStats {
    pub states: usize,
    pub elimination_depth: usize,
    pub extension_depth: usize,
    pub extended_states: usize,
}

/// ε-elimination keeps the bounded ⋄-sets; the commutative extension keeps
/// the complete ⋄-set, and within `k` computations performs everything the
/// original does within `k` and nothing it does not do within `k + D`,
/// where `D` is the deepest inheritance in the extension.
pub fn preservation(
    s: &ClosedLoop,
    a: &Automaton,
    interp: &Interpretation,
    x0s: &[Value],
    k: usize,
) -> Result<PreservationStats, Mismatch> {
    let none = Value::Unit;
    let (hat, el) = epsilon_eliminate_with_stats(a).map_err(|e| mismatch("eliminate", &none, e.to_string()))?;
    if el.max_depth > a.states.len() {
        return Err(mismatch(
            "elimination depth",
            &none,
            format!("depth {} exceeds |Q| = {}", el.max_depth, a.states.len()),
        ));
    }
    let hat = hat.trim();
    let (ext, xs) = commutative_extension_with_stats(&hat, DEFAULT_STATE_LIMIT)
        .map_err(|e| mismatch("extend", &none, e.to_string()))?;
    let ext = epsilon_eliminate_general(&ext).trim();
    for x0 in x0s {
        let at = |n: usize| -> Result<DiamondSet, Mismatch> {
            Ok(run_system(s, interp, x0, RunLimits::computations(n))
                .map_err(|e| mismatch("run_system", x0, e.to_string()))?
                .diamond())
        };
        let want = at(k)?;
        let got = run_automaton(&hat, interp, x0, RunLimits::computations(k))
            .map_err(|e| mismatch("run eliminated", x0, e.to_string()))?
            .diamond();
        if got != want {
            return Err(mismatch(
                "ε-elimination",
                x0,
                format!("{} vs {}", show(&want), show(&got)),
            ));
        }
        let early = explore_automaton(&ext, interp, x0, k).map_err(|e| mismatch("explore", x0, e.to_string()))?;
        if !want.iter().all(|ap| early.contains(&ap.function, &ap.argument)) {
            return Err(mismatch(
                "extension lower bound",
                x0,
                format!("{} ⊄ {}", show(&want), show(&early)),
            ));
        }
        let horizon = at(k + xs.max_depth)?;
        if let Some(extra) = early.difference(&horizon).next() {
            return Err(mismatch(
                "extension upper bound",
                x0,
                format!(
                    "{}({}) not performed within {} computations",
                    extra.function,
                    extra.argument,
                    k + xs.max_depth
                ),
            ));
        }
        let full = complete_diamond_system(s, interp, x0, COMPLETE_CAP)
            .map_err(|e| mismatch("complete system", x0, e.to_string()))?;
        let full_ext = complete_diamond_explore(&ext, interp, x0, COMPLETE_CAP)
            .map_err(|e| mismatch("complete extension", x0, e.to_string()))?;
        if full != full_ext {
            return Err(mismatch(
                "extension ⋄-set",
                x0,
                format!("{} vs {}", show(&full), show(&full_ext)),
            ));
        }
    }
    Ok(PreservationStats {
        states: a.states.len(),
        elimination_depth: el.max_depth,
        extension_depth: xs.max_depth,
        extended_states: ext.states.len(),
    })
}

/// Up to `n` initial values of the system's parameter type, spread over
/// the enumeration.
pub fn sample_inputs(interp: &Interpretation, s: &ClosedLoop, n: usize) -> Vec<Value> {
    let all = interp.values_of(&s.param);
    if all.len() <= n {
        return all;
    }
    let step = all.len() / n;
    all.into_iter().step_by(step.max(1)).take(n).collect()
}

/// ε-free left side and extended right side, as the decision procedure
/// compares them.
pub fn similarity_sides(ctx: &SymbolTable, s1: &ClosedLoop, s2: &ClosedLoop) -> Result<(Automaton, Automaton), String> {
    let a1 = build_from_closed(ctx, s1).map_err(|e| e.to_string())?;
    let a2 = build_from_closed(ctx, s2).map_err(|e| e.to_string())?;
    let a1 = epsilon_eliminate(&a1).map_err(|e| e.to_string())?.trim();
    let a2 = epsilon_eliminate(&a2).map_err(|e| e.to_string())?.trim();
    let (x2, _) = commutative_extension_with_stats(&a2, DEFAULT_STATE_LIMIT).map_err(|e| e.to_string())?;
    Ok((a1, epsilon_eliminate_general(&x2).trim()))
}

#[derive(Clone, Debug, Default)]
pub struct SoundnessSample {
    pub similar: bool,
    /// Some `x0` under some interpretation where the left side computes,
    /// within `k` computations, something the right side never computes.
    pub violation: Option<Mismatch>,
}

impl SoundnessSample {
    /// Similar, yet the oracle found a computation the right side misses.
    pub fn contradicts(&self) -> bool {
        self.similar && self.violation.is_some()
    }
}

/// Decide `s1 ≲ s2` and compare with ⋄≤k(s1) ⊆ ⋄(s2) under each
/// interpretation and initial value. A returned witness is re-checked.
pub fn similarity_soundness(
    ctx: &SymbolTable,
    s1: &ClosedLoop,
    s2: &ClosedLoop,
    interps: &[Interpretation],
    x0s_per: usize,
    k: usize,
) -> Result<SoundnessSample, String> {
    let (a1, a2) = similarity_sides(ctx, s1, s2)?;
    let r = is_similar(&a1, &a2).map_err(|e| e.to_string())?;
    if let Some(w) = &r.witness {
        if !check_simulation(&a1, &a2, w) {
            return Err("returned witness is not a simulation".into());
        }
    }
    let mut sample = SoundnessSample {
        similar: r.similar,
        violation: None,
    };
    'outer: for interp in interps {
        for x0 in sample_inputs(interp, s1, x0s_per) {
            let left = run_system(s1, interp, &x0, RunLimits::computations(k))
                .map_err(|e| e.to_string())?
                .diamond();
            let right = complete_diamond_system(s2, interp, &x0, COMPLETE_CAP).map_err(|e| e.to_string())?;
            let missing = left
                .difference(&right)
                .next()
                .map(|ap| format!("{}({}) never computed on the right", ap.function, ap.argument));
            if let Some(detail) = missing {
                sample.violation = Some(mismatch("inclusion", &x0, detail));
                break 'outer;
            }
        }
    }
    Ok(sample)
}
