//! ε-elimination.
//!
//! [`epsilon_eliminate`] handles pseudo-deterministic automata: each
//! state's single ε-chain is followed, composing mappings, until it reaches
//! a computational group, which is copied back to the chain's start with
//! its mappings rewritten. Chains that dead-end or cycle leave their start
//! with no transitions.
//!
//! [`epsilon_eliminate_general`] is the closure-based variant for automata
//! in which a state may have several outgoing transitions.

use std::collections::HashSet;

use thiserror::Error;

use crate::automaton::{Automaton, CompGroup, Outcome, StateId, Transition, VarMap};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EliminationError {
    #[error("state {0} has more than one outgoing transition")]
    NotPseudoDeterministic(StateId),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EliminationStats {
    /// Deepest ε-chain followed; never exceeds the state count.
    pub max_depth: usize,
    /// States left without transitions because their chain never reached a
    /// computation.
    pub dead_ends: usize,
}

/// Rewrite `g` as if it started at `source`, whose variables feed `g`'s
/// source through `m_hat`.
fn pull_back(g: &CompGroup, source: StateId, m_hat: &VarMap) -> CompGroup {
    let cod = crate::types::variants(&g.function.codomain);
    CompGroup {
        source,
        function: g.function.clone(),
        dom_variant: g.dom_variant,
        input_map: m_hat.compose(&g.input_map),
        outcomes: g
            .outcomes
            .iter()
            .zip(&cod)
            .map(|(o, v1)| Outcome {
                target: o.target,
                map: m_hat.shifted(v1.components.len()).compose(&o.map),
            })
            .collect(),
    }
}

pub fn epsilon_eliminate(a: &Automaton) -> Result<Automaton, EliminationError> {
    epsilon_eliminate_with_stats(a).map(|(r, _)| r)
}

pub fn epsilon_eliminate_with_stats(a: &Automaton) -> Result<(Automaton, EliminationStats), EliminationError> {
    let out = a.outgoing();
    if let Some(q) = out.iter().position(|o| o.len() > 1) {
        return Err(EliminationError::NotPseudoDeterministic(q));
    }
    let r = |q: StateId| out[q].first().map(|&t| &a.transitions[t]);
    let mut stats = EliminationStats::default();
    let mut transitions = Vec::new();
    for q in 0..a.states.len() {
        let Some(mut t) = r(q) else { continue };
        let mut visited: HashSet<StateId> = HashSet::new();
        let mut m_hat = VarMap::identity(a.states[q].vars.len());
        let mut depth = 0;
        loop {
            match t {
                Transition::Comp(g) => {
                    transitions.push(Transition::Comp(pull_back(g, q, &m_hat)));
                    break;
                }
                Transition::Eps(e) => {
                    if !visited.insert(e.source) {
                        stats.dead_ends += 1;
                        break;
                    }
                    depth += 1;
                    assert!(depth <= a.states.len(), "ε-chain longer than the state space");
                    m_hat = m_hat.compose(&e.map);
                    match r(e.target) {
                        Some(next) => t = next,
                        None => {
                            stats.dead_ends += 1;
                            break;
                        }
                    }
                }
            }
        }
        stats.max_depth = stats.max_depth.max(depth);
    }
    Ok((
        Automaton {
            states: a.states.clone(),
            initial_param: a.initial_param.clone(),
            initial: a.initial.clone(),
            transitions,
        },
        stats,
    ))
}

/// Every computational group reachable from a state through ε-transitions
/// is copied to that state. Distinct ε-paths reaching the same state with
/// the same composed mapping are explored once.
pub fn epsilon_eliminate_general(a: &Automaton) -> Automaton {
    let out = a.outgoing();
    let mut transitions = Vec::new();
    let mut seen_groups: HashSet<CompGroup> = HashSet::new();
    for q in 0..a.states.len() {
        let mut visited: HashSet<(StateId, VarMap)> = HashSet::new();
        let start = (q, VarMap::identity(a.states[q].vars.len()));
        visited.insert(start.clone());
        let mut stack = vec![start];
        seen_groups.clear();
        while let Some((p, m_hat)) = stack.pop() {
            for &ti in &out[p] {
                match &a.transitions[ti] {
                    Transition::Comp(g) => {
                        let g = pull_back(g, q, &m_hat);
                        if seen_groups.insert(g.clone()) {
                            transitions.push(Transition::Comp(g));
                        }
                    }
                    Transition::Eps(e) => {
                        let next = (e.target, m_hat.compose(&e.map));
                        if visited.insert(next.clone()) {
                            stack.push(next);
                        }
                    }
                }
            }
        }
    }
    Automaton {
        states: a.states.clone(),
        initial_param: a.initial_param.clone(),
        initial: a.initial.clone(),
        transitions,
    }
}
