//! Brute-force reference for [`optimal_alignment`](crate::search::optimal_alignment).
//!
//! Enumerates every realization of the stochastic trace and aligns each one
//! against the model on its own, with a synchronous move at position `i`
//! priced at the chosen activity's probability. It shares no code with the
//! product search: the model's reachability graph is built explicitly and
//! costs are propagated layer by layer (one layer per trace position) with
//! Bellman-Ford relaxation inside each layer.

use std::collections::{HashMap, VecDeque};

use crate::cost::{eq1_cost, CostProfile, ProfileKind};
use crate::log::{enumerate_realizations, Realization, StochasticTrace};
use crate::net::{ActivityLabel, Marking, SystemNet};
use crate::product::{model_node, sync_id, trace_node, MoveKind};
use crate::search::{Alignment, AlignmentMove, DEFAULT_NODE_CAP};
use crate::trace_net::transition_id;
use crate::{Error, Result};

struct ModelGraph<'a> {
    states: Vec<Marking>,
    /// `(from, transition index, to)`.
    edges: Vec<(usize, usize, usize)>,
    net: &'a SystemNet,
}

impl<'a> ModelGraph<'a> {
    fn build(net: &'a SystemNet, cap: usize) -> Result<Self> {
        let mut states = vec![net.initial_marking.clone()];
        let mut index: HashMap<Marking, usize> = HashMap::from([(net.initial_marking.clone(), 0)]);
        let mut edges = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        while let Some(s) = queue.pop_front() {
            let enabled: Vec<String> = net
                .enabled_transitions(&states[s])?
                .into_iter()
                .map(str::to_string)
                .collect();
            for t in enabled {
                let next = net.fire(&states[s], &t)?;
                let to = match index.get(&next) {
                    Some(&i) => i,
                    None => {
                        if states.len() >= cap {
                            return Err(Error::Capacity {
                                what: "model reachability graph",
                                limit: cap,
                                frontier: queue.len(),
                            });
                        }
                        states.push(next.clone());
                        index.insert(next, states.len() - 1);
                        queue.push_back(states.len() - 1);
                        states.len() - 1
                    }
                };
                let ti = net.transitions.iter().position(|x| x.id == t).expect("enabled transition exists");
                edges.push((s, ti, to));
            }
        }
        Ok(ModelGraph { states, edges, net })
    }
}

#[derive(Clone, Copy)]
enum Step {
    Model(usize),
    Log,
    Sync(usize),
}

#[derive(Clone, Copy)]
struct Label {
    cost: f64,
    /// `(layer, state, step)` that reached this entry.
    parent: Option<(usize, usize, Step)>,
}

/// Optimal alignment of one realization; `None` if the final marking is
/// unreachable.
fn align_realization(
    graph: &ModelGraph,
    realization: &Realization,
    trace: &StochasticTrace,
    profile: &CostProfile,
) -> Result<Option<Alignment>> {
    let n = realization.activities.len();
    let model_cost = |ti: usize| {
        if graph.net.transitions[ti].label.is_tau() {
            profile.tau_model_move_cost
        } else {
            profile.nonsync_cost
        }
    };
    let mut layers: Vec<Vec<Option<Label>>> = vec![vec![None; graph.states.len()]; n + 1];
    layers[0][0] = Some(Label { cost: 0.0, parent: None });
    for i in 0..=n {
        // relax model moves within the layer
        loop {
            let mut changed = false;
            for &(from, ti, to) in &graph.edges {
                let Some(src) = layers[i][from] else { continue };
                let cost = src.cost + model_cost(ti);
                if layers[i][to].is_none_or(|l| cost < l.cost) {
                    layers[i][to] = Some(Label {
                        cost,
                        parent: Some((i, from, Step::Model(ti))),
                    });
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if i == n {
            break;
        }
        let activity = ActivityLabel::named(realization.activities[i].clone());
        let probability = trace.events[i].distribution[realization.choice[i]].1;
        let sync_cost = match profile.kind {
            ProfileKind::Stochastic => eq1_cost(probability)?,
            ProfileKind::Deterministic | ProfileKind::LowerBound => 0.0,
        };
        let mut next: Vec<Option<Label>> = vec![None; graph.states.len()];
        for (s, entry) in layers[i].iter().enumerate() {
            let Some(src) = entry else { continue };
            let cost = src.cost + profile.nonsync_cost;
            if next[s].is_none_or(|l| cost < l.cost) {
                next[s] = Some(Label { cost, parent: Some((i, s, Step::Log)) });
            }
        }
        for &(from, ti, to) in &graph.edges {
            if graph.net.transitions[ti].label != activity {
                continue;
            }
            let Some(src) = layers[i][from] else { continue };
            let cost = src.cost + sync_cost;
            if next[to].is_none_or(|l| cost < l.cost) {
                next[to] = Some(Label {
                    cost,
                    parent: Some((i, from, Step::Sync(ti))),
                });
            }
        }
        layers[i + 1] = next;
    }

    let Some(target) = graph.states.iter().position(|m| *m == graph.net.final_marking) else {
        return Ok(None);
    };
    let Some(end) = layers[n][target] else {
        return Ok(None);
    };

    let mut moves = Vec::new();
    let mut label = end;
    while let Some((prev_layer, prev_state, step)) = label.parent {
        let trace_t = |i: usize| transition_id(i + 1, realization.choice[i] + 1);
        let activity = |i: usize| ActivityLabel::named(realization.activities[i].clone());
        let probability = |i: usize| trace.events[i].distribution[realization.choice[i]].1;
        moves.push(match step {
            Step::Model(ti) => {
                let t = &graph.net.transitions[ti];
                AlignmentMove {
                    transition_id: model_node(&t.id),
                    kind: MoveKind::ModelMove,
                    model_label: Some(t.label.clone()),
                    trace_label: None,
                    weight: None,
                    cost: model_cost(ti),
                }
            }
            Step::Log => AlignmentMove {
                transition_id: trace_node(&trace_t(prev_layer)),
                kind: MoveKind::LogMove,
                model_label: None,
                trace_label: Some(activity(prev_layer)),
                weight: None,
                cost: profile.nonsync_cost,
            },
            Step::Sync(ti) => {
                let t = &graph.net.transitions[ti];
                AlignmentMove {
                    transition_id: sync_id(&t.id, &trace_t(prev_layer)),
                    kind: MoveKind::Sync,
                    model_label: Some(t.label.clone()),
                    trace_label: Some(activity(prev_layer)),
                    weight: Some(probability(prev_layer)),
                    cost: match profile.kind {
                        ProfileKind::Stochastic => eq1_cost(probability(prev_layer))?,
                        _ => 0.0,
                    },
                }
            }
        });
        label = layers[prev_layer][prev_state].expect("parent is set");
    }
    moves.reverse();
    Ok(Some(Alignment {
        moves,
        total_cost: end.cost,
    }))
}

/// Minimum over all realizations of the realization's optimal alignment.
/// Fails with a capacity error when the trace has more than `cap` realizations.
pub fn brute_force_alignment(
    model: &SystemNet,
    trace: &StochasticTrace,
    profile: &CostProfile,
    cap: usize,
) -> Result<Alignment> {
    profile.validate()?;
    trace.validate()?;
    if let Some(v) = model.validate().first() {
        return Err(Error::validation("model", v.clone()));
    }
    let realizations = enumerate_realizations(trace, cap)?;
    let graph = ModelGraph::build(model, DEFAULT_NODE_CAP)?;
    let mut best: Option<Alignment> = None;
    for r in &realizations {
        if let Some(a) = align_realization(&graph, r, trace, profile)? {
            if best.as_ref().is_none_or(|b| a.total_cost < b.total_cost) {
                best = Some(a);
            }
        }
    }
    best.ok_or(Error::NoAlignment {
        explored: graph.states.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::sequence_net;

    fn ab_bc() -> StochasticTrace {
        let mut trace = StochasticTrace::deterministic("1", ["A", "B"]);
        trace.events[1].distribution = vec![("B".into(), 0.2), ("C".into(), 0.8)];
        trace
    }

    #[test]
    fn two_realization_example() {
        let model = sequence_net(&["A", "B"]);
        let a = brute_force_alignment(&model, &ab_bc(), &CostProfile::stochastic(), 16).unwrap();
        // realization (A,B) costs 1 - e^-4; (A,C) costs 2 (log C + model B)
        assert!((a.total_cost - 0.981_684_361_111_265_8).abs() < 1e-12);
        let lb = brute_force_alignment(&model, &ab_bc(), &CostProfile::lower_bound(), 16).unwrap();
        assert_eq!(lb.total_cost, 0.0);
        assert_eq!(a.moves.len(), 2);
        assert_eq!(a.moves[1].transition_id, "s:(t2,t_2_1)");
    }

    #[test]
    fn deterministic_trace_is_classic_alignment() {
        let model = sequence_net(&["A", "B", "C"]);
        let trace = StochasticTrace::deterministic("d", ["A", "C", "X"]);
        let a = brute_force_alignment(&model, &trace, &CostProfile::deterministic(), 1).unwrap();
        assert_eq!(a.total_cost, 2.0);
        let kinds: Vec<MoveKind> = a.moves.iter().map(|m| m.kind).collect();
        assert_eq!(kinds, vec![MoveKind::Sync, MoveKind::ModelMove, MoveKind::Sync, MoveKind::LogMove]);
    }

    #[test]
    fn cap_is_enforced() {
        let model = sequence_net(&["A", "B"]);
        assert!(matches!(
            brute_force_alignment(&model, &ab_bc(), &CostProfile::stochastic(), 1),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn unreachable_final_marking() {
        let mut model = sequence_net(&["A"]);
        model.final_marking = Marking::from_places(["p0", "p1"]);
        let trace = StochasticTrace::deterministic("d", ["A"]);
        assert!(matches!(
            brute_force_alignment(&model, &trace, &CostProfile::stochastic(), 1),
            Err(Error::NoAlignment { .. })
        ));
    }
}
