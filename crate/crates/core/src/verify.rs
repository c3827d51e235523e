//! End-to-end check that a plant driven by a controller performs every
//! computation a closed-loop specification performs.

use std::time::Instant;

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::automaton::{build_from_closed, Automaton, AutomatonError};
use crate::epsilon::{epsilon_eliminate, epsilon_eliminate_general, EliminationError};
use crate::extension::{commutative_extension_with_stats, ExtensionError, DEFAULT_STATE_LIMIT};
use crate::similarity::{is_similar_bounded, Counterexample, SimilarityError, Simulation, DEFAULT_CLASS_LIMIT};
use crate::system::{compose, normal_form, ClosedLoop, DeclaredSystem, SystemError};
use crate::types::SymbolTable;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error("specification: {0}")]
    Spec(SystemError),
    #[error("composition: {0}")]
    Compose(SystemError),
    #[error("specification and composed system take different parameters: {0} vs {1}")]
    ParamMismatch(String, String),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Elimination(#[from] EliminationError),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    /// Skip the commutative extension of the composed side.
    pub skip_extension: bool,
    pub extension_state_limit: usize,
    pub class_limit: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            skip_extension: false,
            extension_state_limit: DEFAULT_STATE_LIMIT,
            class_limit: DEFAULT_CLASS_LIMIT,
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct AutomatonSize {
    pub states: usize,
    pub transitions: usize,
}

impl From<&Automaton> for AutomatonSize {
    fn from(a: &Automaton) -> Self {
        AutomatonSize {
            states: a.states.len(),
            transitions: a.transitions.len(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StageTiming {
    pub stage: &'static str,
    pub micros: u128,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub verdict: bool,
    pub composed: ClosedLoop,
    pub spec_automaton: Automaton,
    pub composed_automaton: Automaton,
    pub witness: Option<Simulation>,
    pub counterexample: Option<Counterexample>,
    pub timings: Vec<StageTiming>,
    pub sizes: Vec<(&'static str, AutomatonSize)>,
    pub classes: usize,
    pub extension_depth: Option<usize>,
}

impl VerifyReport {
    /// See `schemas/verdict.schema.json`.
    pub fn to_json(&self) -> serde_json::Value {
        let sizes: serde_json::Map<String, serde_json::Value> =
            self.sizes.iter().map(|(k, s)| (k.to_string(), json!(s))).collect();
        json!({
            "verdict": if self.verdict { "similar" } else { "not_similar" },
            "similar": self.verdict,
            "timings": self.timings,
            "sizes": sizes,
            "classes_explored": self.classes,
            "extension_depth": self.extension_depth,
            "witness_size": self.witness.as_ref().map(Simulation::len),
            "counterexample": self.counterexample,
        })
    }
}

struct Clock {
    timings: Vec<StageTiming>,
    last: Instant,
}

impl Clock {
    fn lap(&mut self, stage: &'static str) {
        let now = Instant::now();
        self.timings.push(StageTiming {
            stage,
            micros: now.duration_since(self.last).as_micros(),
        });
        self.last = now;
    }
}

/// compose → build both automata → ε-eliminate both → extend the composed
/// side → decide similarity of the specification in it.
pub fn verify(
    ctx: &SymbolTable,
    spec: &DeclaredSystem,
    plant: &DeclaredSystem,
    controller: &DeclaredSystem,
    opts: VerifyOptions,
) -> Result<VerifyReport, VerifyError> {
    let mut clock = Clock {
        timings: vec![],
        last: Instant::now(),
    };
    let composed = compose(ctx, plant, controller).map_err(VerifyError::Compose)?;
    let hint = spec.param.as_ref().or(Some(&composed.param));
    let spec_nf = normal_form(ctx, &spec.expr, hint).map_err(VerifyError::Spec)?;
    if spec_nf.param != composed.param {
        return Err(VerifyError::ParamMismatch(
            spec_nf.param.to_string(),
            composed.param.to_string(),
        ));
    }
    clock.lap("compose");

    let a_spec = build_from_closed(ctx, &spec_nf)?;
    let a_comp = build_from_closed(ctx, &composed)?;
    clock.lap("build");

    let spec_hat = epsilon_eliminate(&a_spec)?.trim();
    let comp_hat = epsilon_eliminate(&a_comp)?.trim();
    clock.lap("eliminate");

    let mut sizes = vec![
        ("spec", AutomatonSize::from(&a_spec)),
        ("composed", AutomatonSize::from(&a_comp)),
        ("spec_eliminated", AutomatonSize::from(&spec_hat)),
        ("composed_eliminated", AutomatonSize::from(&comp_hat)),
    ];
    let (right, extension_depth) = if opts.skip_extension {
        (comp_hat, None)
    } else {
        let (ext, stats) = commutative_extension_with_stats(&comp_hat, opts.extension_state_limit)?;
        let ext = epsilon_eliminate_general(&ext).trim();
        sizes.push(("composed_extended", AutomatonSize::from(&ext)));
        (ext, Some(stats.max_depth))
    };
    clock.lap("extend");

    let sim = is_similar_bounded(&spec_hat, &right, opts.class_limit)?;
    clock.lap("similarity");

    Ok(VerifyReport {
        verdict: sim.similar,
        composed,
        spec_automaton: spec_hat,
        composed_automaton: right,
        witness: sim.witness,
        counterexample: sim.counterexample,
        timings: clock.timings,
        sizes,
        classes: sim.classes,
        extension_depth,
    })
}
