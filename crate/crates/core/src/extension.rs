//! Commutative extension of a deterministic automaton.
//!
//! `□(q)` collects the computations a state is guaranteed to perform next
//! or later on every branch, restricted to those whose arguments are
//! already among `q`'s variables. The extension replaces every state `q` by
//! a sub-automaton over `(E, r)` pairs: `E ⊆ □(q)` is the set of
//! computations already performed ahead of time, `r` their outcomes. A
//! state with `q`'s own computation in `E` hands over to the successor's
//! sub-automaton with an ε-transition.
//!
//! Entries of `□(q)` are identified by `(f, v0, m0)`. When a successor's
//! entry remaps to a key that `q` already holds (for example, the same call
//! repeated on the same values), the existing entry wins; the later call is
//! then simply performed again, which leaves the ⋄-set unchanged.

use std::collections::{BTreeMap, HashMap, VecDeque};

use thiserror::Error;

use crate::automaton::{
    Automaton, CompGroup, EpsTransition, Outcome, StateId, StateInfo, StateSet, Transition, VarMap,
};
use crate::types::{variants, FunctionSignature, OpaqueTypeId};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ExtensionError {
    #[error("state {0} is not deterministic (ε-transition or several groups)")]
    NotDeterministic(StateId),
    #[error("extension exceeds {0} states")]
    TooLarge(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Link {
    /// The state's own transition.
    Own,
    /// Per codomain variant of the state's own transition, the index of the
    /// matching entry in the successor's set.
    Inherited(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub function: FunctionSignature,
    pub dom_variant: usize,
    /// Into the state's own variables.
    pub input_map: VarMap,
    pub link: Link,
    /// Number of inheritance steps back to an own entry.
    pub depth: usize,
}

/// `□(q)` for every state.
#[derive(Clone, Debug, Default)]
pub struct GuaranteedSets {
    pub entries: Vec<Vec<Entry>>,
}

impl GuaranteedSets {
    pub fn max_depth(&self) -> usize {
        self.entries.iter().flatten().map(|e| e.depth).max().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.entries.iter().map(Vec::len).sum()
    }
}

fn own_groups(a: &Automaton) -> Result<Vec<Option<&CompGroup>>, ExtensionError> {
    let mut own = vec![None; a.states.len()];
    for t in &a.transitions {
        match t {
            Transition::Eps(e) => return Err(ExtensionError::NotDeterministic(e.source)),
            Transition::Comp(g) => {
                if own[g.source].replace(g).is_some() {
                    return Err(ExtensionError::NotDeterministic(g.source));
                }
            }
        }
    }
    Ok(own)
}

/// Remap an entry of a successor back into the predecessor's variables
/// through outcome mapping `m1`, if every argument is a retained variable.
fn remap(e: &Entry, m1: &VarMap, n: usize) -> Option<VarMap> {
    e.input_map
        .0
        .iter()
        .map(|&i| m1.0[i].checked_sub(n))
        .collect::<Option<Vec<_>>>()
        .map(VarMap)
}

/// Least fixpoint of the guaranteed-computation sets.
pub fn guaranteed_computations(a: &Automaton) -> Result<GuaranteedSets, ExtensionError> {
    let own = own_groups(a)?;
    let mut boxes: Vec<Vec<Entry>> = own
        .iter()
        .map(|g| {
            g.map(|g| Entry {
                function: g.function.clone(),
                dom_variant: g.dom_variant,
                input_map: g.input_map.clone(),
                link: Link::Own,
                depth: 0,
            })
            .into_iter()
            .collect()
        })
        .collect();
    let mut keys: Vec<HashMap<(String, usize, VarMap), usize>> = boxes
        .iter()
        .map(|b| {
            b.iter()
                .enumerate()
                .map(|(i, e)| ((e.function.name.clone(), e.dom_variant, e.input_map.clone()), i))
                .collect()
        })
        .collect();
    let sizes: Vec<Vec<usize>> = own
        .iter()
        .map(|g| {
            g.map(|g| {
                variants(&g.function.codomain)
                    .iter()
                    .map(|v| v.components.len())
                    .collect()
            })
            .unwrap_or_default()
        })
        .collect();

    let mut changed = true;
    while changed {
        changed = false;
        for q in 0..a.states.len() {
            let Some(g) = own[q] else { continue };
            let first = &g.outcomes[0];
            let mut k = 0;
            while k < boxes[first.target].len() {
                let cand = &boxes[first.target][k];
                k += 1;
                let Some(m0) = remap(cand, &first.map, sizes[q][0]) else {
                    continue;
                };
                let key = (cand.function.name.clone(), cand.dom_variant, m0.clone());
                if keys[q].contains_key(&key) {
                    continue;
                }
                let mut links = vec![k - 1];
                let mut depth = cand.depth;
                for (v1, o) in g.outcomes.iter().enumerate().skip(1) {
                    let hit = boxes[o.target].iter().position(|e| {
                        e.function.name == key.0
                            && e.dom_variant == key.1
                            && remap(e, &o.map, sizes[q][v1]).as_ref() == Some(&m0)
                    });
                    match hit {
                        Some(i) => {
                            depth = depth.max(boxes[o.target][i].depth);
                            links.push(i);
                        }
                        None => break,
                    }
                }
                if links.len() != g.outcomes.len() {
                    continue;
                }
                let entry = Entry {
                    function: boxes[first.target][k - 1].function.clone(),
                    dom_variant: key.1,
                    input_map: m0,
                    link: Link::Inherited(links),
                    depth: depth + 1,
                };
                keys[q].insert(key, boxes[q].len());
                boxes[q].push(entry);
                changed = true;
            }
        }
    }
    Ok(GuaranteedSets { entries: boxes })
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ExtensionStats {
    /// Largest inheritance depth in any `□(q)`.
    pub max_depth: usize,
    pub entries: usize,
    pub states: usize,
}

/// Sub-automaton state: original state plus performed entries with their
/// outcomes, sorted by entry index.
type SubState = (StateId, Vec<(usize, usize)>);

pub const DEFAULT_STATE_LIMIT: usize = 200_000;

pub fn commutative_extension(a: &Automaton) -> Result<Automaton, ExtensionError> {
    commutative_extension_with_stats(a, DEFAULT_STATE_LIMIT).map(|(x, _)| x)
}

/// The result still contains ε-transitions; eliminate them with
/// [`crate::epsilon::epsilon_eliminate_general`].
pub fn commutative_extension_with_stats(
    a: &Automaton,
    limit: usize,
) -> Result<(Automaton, ExtensionStats), ExtensionError> {
    let boxes = guaranteed_computations(a)?;
    let own = own_groups(a)?;
    let cod_vars = |e: &Entry| variants(&e.function.codomain);

    let mut ids: HashMap<SubState, StateId> = HashMap::new();
    let mut states: Vec<StateInfo> = Vec::new();
    let mut queue: VecDeque<(SubState, StateId)> = VecDeque::new();
    let mut transitions = Vec::new();

    let vars_of = |s: &SubState| -> Vec<OpaqueTypeId> {
        let mut v = a.states[s.0].vars.clone();
        for &(e, r) in &s.1 {
            v.extend(cod_vars(&boxes.entries[s.0][e])[r].components.iter().cloned());
        }
        v
    };
    // start offset of every block of performed results
    let offsets = |s: &SubState| -> BTreeMap<usize, (usize, usize)> {
        let mut off = a.states[s.0].vars.len();
        let mut m = BTreeMap::new();
        for &(e, r) in &s.1 {
            let len = cod_vars(&boxes.entries[s.0][e])[r].components.len();
            m.insert(e, (off, len));
            off += len;
        }
        m
    };
    let mut intern = |s: SubState,
                      states: &mut Vec<StateInfo>,
                      queue: &mut VecDeque<(SubState, StateId)>|
     -> Result<StateId, ExtensionError> {
        if let Some(&id) = ids.get(&s) {
            return Ok(id);
        }
        if states.len() >= limit {
            return Err(ExtensionError::TooLarge(limit));
        }
        let tag: Vec<String> = s.1.iter().map(|(e, r)| format!("{e}:{r}")).collect();
        states.push(StateInfo {
            vars: vars_of(&s),
            label: format!("{}{{{}}}", a.states[s.0].label, tag.join(",")),
        });
        ids.insert(s.clone(), states.len() - 1);
        queue.push_back((s, states.len() - 1));
        Ok(states.len() - 1)
    };

    let mut initial = Vec::new();
    for &q in &a.initial.0 {
        initial.push(intern((q, vec![]), &mut states, &mut queue)?);
    }

    while let Some((s, id)) = queue.pop_front() {
        let q = s.0;
        let own_vars = a.states[q].vars.len();
        let offs = offsets(&s);
        let done: BTreeMap<usize, usize> = s.1.iter().copied().collect();

        // perform one more guaranteed computation ahead of time
        for (ei, e) in boxes.entries[q].iter().enumerate() {
            if done.contains_key(&ei) {
                continue;
            }
            let mut outcomes = Vec::new();
            for v1 in cod_vars(e) {
                let n = v1.components.len();
                let mut performed = s.1.clone();
                performed.push((ei, v1.index));
                performed.sort_unstable();
                let next: SubState = (q, performed);
                let mut map: Vec<usize> = (n..n + own_vars).collect();
                for &(e2, _) in &next.1 {
                    if e2 == ei {
                        map.extend(0..n);
                    } else {
                        let (o, len) = offs[&e2];
                        map.extend(n + o..n + o + len);
                    }
                }
                outcomes.push(Outcome {
                    target: intern(next, &mut states, &mut queue)?,
                    map: VarMap(map),
                });
            }
            transitions.push(Transition::Comp(CompGroup {
                source: id,
                function: e.function.clone(),
                dom_variant: e.dom_variant,
                input_map: e.input_map.clone(),
                outcomes,
            }));
        }

        // hand over to the successor once the own computation is done
        let Some(g) = own[q] else { continue };
        let Some(&v1) = done.get(&0) else { continue };
        let out = &g.outcomes[v1];
        let (own_off, n) = offs[&0];
        let mut moved: Vec<(usize, usize, usize)> =
            s.1.iter()
                .filter(|(e, _)| *e != 0)
                .map(|&(e, r)| match &boxes.entries[q][e].link {
                    Link::Inherited(l) => (l[v1], r, e),
                    Link::Own => unreachable!("only entry 0 is own"),
                })
                .collect();
        moved.sort_unstable();
        let next: SubState = (out.target, moved.iter().map(|&(e1, r, _)| (e1, r)).collect());
        let mut map: Vec<usize> = out
            .map
            .0
            .iter()
            .map(|&i| if i < n { own_off + i } else { i - n })
            .collect();
        for &(_, _, e) in &moved {
            let (o, len) = offs[&e];
            map.extend(o..o + len);
        }
        let target = intern(next, &mut states, &mut queue)?;
        transitions.push(Transition::Eps(EpsTransition {
            source: id,
            target,
            map: VarMap(map),
        }));
    }

    let stats = ExtensionStats {
        max_depth: boxes.max_depth(),
        entries: boxes.total(),
        states: states.len(),
    };
    Ok((
        Automaton {
            states,
            initial_param: a.initial_param.clone(),
            initial: StateSet(initial),
            transitions,
        },
        stats,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::CompositeType as C;

    fn sig(name: &str, dom: C, cod: C) -> FunctionSignature {
        FunctionSignature {
            name: name.into(),
            domain: dom,
            codomain: cod,
        }
    }

    fn st(vars: &[&str]) -> StateInfo {
        StateInfo {
            vars: vars.iter().map(|v| OpaqueTypeId::new(*v)).collect(),
            label: String::new(),
        }
    }

    fn comp(source: StateId, f: FunctionSignature, input: &[usize], target: StateId, map: &[usize]) -> Transition {
        Transition::Comp(CompGroup {
            source,
            function: f,
            dom_variant: 0,
            input_map: VarMap(input.to_vec()),
            outcomes: vec![Outcome {
                target,
                map: VarMap(map.to_vec()),
            }],
        })
    }

    /// q0(a, b) --f(a)--> q1(a', b) --g(b)--> q2(a', b')
    fn independent() -> Automaton {
        let f = sig("f", C::opaque("A"), C::opaque("A"));
        let g = sig("g", C::opaque("B"), C::opaque("B"));
        Automaton {
            states: vec![st(&["A", "B"]), st(&["A", "B"]), st(&["A", "B"])],
            initial_param: C::product(C::opaque("A"), C::opaque("B")),
            initial: StateSet(vec![0]),
            transitions: vec![comp(0, f, &[0], 1, &[0, 2]), comp(1, g, &[1], 2, &[1, 0])],
        }
    }

    #[test]
    fn independent_calls_are_inherited() {
        let a = independent();
        a.validate().unwrap();
        let b = guaranteed_computations(&a).unwrap();
        assert_eq!(b.entries[0].len(), 2);
        assert_eq!(b.entries[0][1].function.name, "g");
        assert_eq!(b.entries[0][1].input_map, VarMap(vec![1]));
        assert_eq!(b.max_depth(), 1);
        let x = commutative_extension(&a).unwrap();
        x.validate().unwrap();
        // from the initial state both f and g can fire
        let first: Vec<_> = x
            .transitions
            .iter()
            .filter_map(|t| match t {
                Transition::Comp(g) if g.source == x.initial.0[0] => Some(g.function.name.clone()),
                _ => None,
            })
            .collect();
        assert_eq!(first, vec!["f", "g"]);
    }

    #[test]
    fn dependency_blocks_inheritance() {
        // q0(a) --f(a)--> q1(a') --f(a')--> q2(a'')
        let f = sig("f", C::opaque("A"), C::opaque("A"));
        let a = Automaton {
            states: vec![st(&["A"]), st(&["A"]), st(&["A"])],
            initial_param: C::opaque("A"),
            initial: StateSet(vec![0]),
            transitions: vec![comp(0, f.clone(), &[0], 1, &[0]), comp(1, f, &[0], 2, &[0])],
        };
        let b = guaranteed_computations(&a).unwrap();
        assert!(b.entries.iter().all(|e| e.len() <= 1));
        let x = commutative_extension(&a).unwrap();
        x.validate().unwrap();
    }

    #[test]
    fn rejects_epsilon() {
        let a = Automaton {
            states: vec![st(&[])],
            initial_param: C::One,
            initial: StateSet(vec![0]),
            transitions: vec![Transition::Eps(EpsTransition {
                source: 0,
                target: 0,
                map: VarMap(vec![]),
            })],
        };
        assert_eq!(commutative_extension(&a), Err(ExtensionError::NotDeterministic(0)));
    }
}
