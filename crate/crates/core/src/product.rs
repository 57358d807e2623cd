//! Stochastic synchronous product of a process model and a trace net.
//!
//! Model places and transitions are namespaced `m:`, trace ones `l:`;
//! synchronous transitions are named `s:(model_id,trace_id)`. Every model
//! transition yields a model move, every trace transition a log move, and
//! every label-equal pair (never τ) a synchronous move carrying the trace
//! transition's firing probability.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::json::parse_error;
use crate::net::{parse_net, serialize_net, ActivityLabel, SystemNet, Transition};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MoveKind {
    Sync,
    LogMove,
    ModelMove,
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MoveKind::Sync => "sync",
            MoveKind::LogMove => "log",
            MoveKind::ModelMove => "model",
        })
    }
}

/// Annotation of one product transition. A `None` label is the gap `>>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductTransition {
    pub id: String,
    pub kind: MoveKind,
    pub model_transition: Option<String>,
    pub trace_transition: Option<String>,
    pub model_label: Option<ActivityLabel>,
    pub trace_label: Option<ActivityLabel>,
    /// Firing probability; present exactly on synchronous moves.
    pub weight: Option<f64>,
}

impl ProductTransition {
    pub fn label_pair(&self) -> (Option<&ActivityLabel>, Option<&ActivityLabel>) {
        (self.model_label.as_ref(), self.trace_label.as_ref())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncProductNet {
    pub net: SystemNet,
    /// Parallel to `net.transitions`.
    pub moves: Vec<ProductTransition>,
    /// Namespaced trace places in position order `p_0..p_n`.
    pub trace_places: Vec<String>,
}

impl SyncProductNet {
    pub fn trace_len(&self) -> usize {
        self.trace_places.len() - 1
    }

    pub fn annotation(&self, id: &str) -> Option<&ProductTransition> {
        self.moves.iter().find(|m| m.id == id)
    }
}

pub fn model_node(id: &str) -> String {
    format!("m:{id}")
}

pub fn trace_node(id: &str) -> String {
    format!("l:{id}")
}

pub fn sync_id(model: &str, trace: &str) -> String {
    format!("s:({model},{trace})")
}

/// Checks the trace-net shape and returns its places in position order.
fn trace_positions(tracenet: &SystemNet) -> Result<Vec<String>> {
    let bad = |msg: String| Error::validation("trace net", msg);
    let mut start = tracenet.initial_marking.iter();
    let first = match (start.next(), start.next()) {
        (Some((p, 1)), None) => p.to_string(),
        _ => return Err(bad("initial marking must be a single token".into())),
    };
    let mut successor: HashMap<&str, &str> = HashMap::new();
    for t in &tracenet.transitions {
        let pre: Vec<&str> = tracenet.preset(&t.id).collect();
        let post: Vec<&str> = tracenet.postset(&t.id).collect();
        if pre.len() != 1 || post.len() != 1 {
            return Err(bad(format!("transition {} must have one input and one output", t.id)));
        }
        if t.label.is_tau() {
            return Err(bad(format!("transition {} is silent", t.id)));
        }
        match successor.insert(pre[0], post[0]) {
            Some(other) if other != post[0] => {
                return Err(bad(format!("place {} branches to {other} and {}", pre[0], post[0])))
            }
            _ => {}
        }
    }
    let mut order = vec![first];
    let mut seen: HashSet<String> = order.iter().cloned().collect();
    while let Some(next) = successor.get(order.last().unwrap().as_str()) {
        if !seen.insert(next.to_string()) {
            return Err(bad("trace net contains a cycle".into()));
        }
        order.push(next.to_string());
    }
    if order.len() != tracenet.places.len() {
        return Err(bad("trace net places do not form a single chain".into()));
    }
    let mut end = tracenet.final_marking.iter();
    match (end.next(), end.next()) {
        (Some((p, 1)), None) if p == order.last().unwrap() => Ok(order),
        _ => Err(bad("final marking must be one token on the last place".into())),
    }
}

pub fn build_sync_product(model: &SystemNet, tracenet: &SystemNet) -> Result<SyncProductNet> {
    if let Some(v) = model.validate().first() {
        return Err(Error::validation("model", v.clone()));
    }
    if let Some(v) = tracenet.validate().first() {
        return Err(Error::validation("trace net", v.clone()));
    }
    let order = trace_positions(tracenet)?;

    let mut net = SystemNet::default();
    net.places.extend(model.places.iter().map(|p| model_node(p)));
    net.places.extend(tracenet.places.iter().map(|p| trace_node(p)));
    let mut distinct = HashSet::new();
    if let Some(dup) = net.places.iter().find(|p| !distinct.insert(p.as_str())) {
        return Err(Error::validation("product", format!("place id collision on {dup}")));
    }

    let mut moves = Vec::new();
    let mut add = |net: &mut SystemNet,
                   ann: ProductTransition,
                   model_t: Option<&Transition>,
                   trace_t: Option<&Transition>| {
        if let Some(t) = model_t {
            net.arcs.extend(model.preset(&t.id).map(|p| (model_node(p), ann.id.clone())));
        }
        if let Some(t) = trace_t {
            net.arcs.extend(tracenet.preset(&t.id).map(|p| (trace_node(p), ann.id.clone())));
        }
        if let Some(t) = model_t {
            net.arcs.extend(model.postset(&t.id).map(|p| (ann.id.clone(), model_node(p))));
        }
        if let Some(t) = trace_t {
            net.arcs.extend(tracenet.postset(&t.id).map(|p| (ann.id.clone(), trace_node(p))));
        }
        let label = match (&ann.model_label, &ann.trace_label) {
            (Some(l), _) | (None, Some(l)) => l.clone(),
            (None, None) => ActivityLabel::Tau,
        };
        net.transitions.push(Transition {
            id: ann.id.clone(),
            label,
            weight: ann.weight,
        });
        moves.push(ann);
    };

    for t in &model.transitions {
        let ann = ProductTransition {
            id: model_node(&t.id),
            kind: MoveKind::ModelMove,
            model_transition: Some(t.id.clone()),
            trace_transition: None,
            model_label: Some(t.label.clone()),
            trace_label: None,
            weight: None,
        };
        add(&mut net, ann, Some(t), None);
    }
    for t in &tracenet.transitions {
        let ann = ProductTransition {
            id: trace_node(&t.id),
            kind: MoveKind::LogMove,
            model_transition: None,
            trace_transition: Some(t.id.clone()),
            model_label: None,
            trace_label: Some(t.label.clone()),
            weight: None,
        };
        add(&mut net, ann, None, Some(t));
    }
    for mt in model.transitions.iter().filter(|t| !t.label.is_tau()) {
        for tt in tracenet.transitions.iter().filter(|t| t.label == mt.label) {
            let ann = ProductTransition {
                id: sync_id(&mt.id, &tt.id),
                kind: MoveKind::Sync,
                model_transition: Some(mt.id.clone()),
                trace_transition: Some(tt.id.clone()),
                model_label: Some(mt.label.clone()),
                trace_label: Some(tt.label.clone()),
                weight: Some(tt.weight.unwrap_or(1.0)),
            };
            add(&mut net, ann, Some(mt), Some(tt));
        }
    }

    net.initial_marking = namespaced(&model.initial_marking, model_node)
        .sum(&namespaced(&tracenet.initial_marking, trace_node));
    net.final_marking = namespaced(&model.final_marking, model_node)
        .sum(&namespaced(&tracenet.final_marking, trace_node));

    Ok(SyncProductNet {
        net,
        moves,
        trace_places: order.iter().map(|p| trace_node(p)).collect(),
    })
}

fn namespaced(m: &crate::net::Marking, f: fn(&str) -> String) -> crate::net::Marking {
    let mut out = crate::net::Marking::new();
    for (p, c) in m.iter() {
        out.add(f(p), c);
    }
    out
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MoveDoc {
    id: String,
    kind: MoveKind,
    model: Option<String>,
    trace: Option<String>,
    model_label: Option<String>,
    trace_label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight: Option<f64>,
}

/// Net document plus a `moves` side table and the ordered `trace_places`.
pub fn serialize_product(product: &SyncProductNet) -> Vec<u8> {
    let mut value: serde_json::Value =
        serde_json::from_slice(&serialize_net(&product.net)).expect("net document is JSON");
    let moves: Vec<MoveDoc> = product
        .moves
        .iter()
        .map(|m| MoveDoc {
            id: m.id.clone(),
            kind: m.kind,
            model: m.model_transition.clone(),
            trace: m.trace_transition.clone(),
            model_label: m.model_label.as_ref().and_then(|l| l.as_str().map(str::to_string)),
            trace_label: m.trace_label.as_ref().and_then(|l| l.as_str().map(str::to_string)),
            weight: m.weight,
        })
        .collect();
    let obj = value.as_object_mut().expect("net document is an object");
    obj.insert("moves".into(), serde_json::to_value(moves).expect("moves serialize"));
    obj.insert("trace_places".into(), serde_json::to_value(&product.trace_places).expect("places serialize"));
    let mut out = serde_json::to_vec_pretty(&value).expect("product serializes");
    out.push(b'\n');
    out
}

pub fn parse_product(bytes: &[u8]) -> Result<SyncProductNet> {
    let mut value: serde_json::Value = serde_json::from_slice(bytes).map_err(parse_error)?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| Error::parse("product", "expected a JSON object"))?;
    let moves = obj.remove("moves").ok_or_else(|| Error::parse("product", "missing moves"))?;
    let places = obj
        .remove("trace_places")
        .ok_or_else(|| Error::parse("product", "missing trace_places"))?;
    let moves: Vec<MoveDoc> = serde_json::from_value(moves).map_err(parse_error)?;
    let trace_places: Vec<String> = serde_json::from_value(places).map_err(parse_error)?;
    let net = parse_net(&serde_json::to_vec(&value).expect("value serializes"))?;
    if moves.len() != net.transitions.len() {
        return Err(Error::parse("moves", "one annotation per transition expected"));
    }
    let moves = moves
        .into_iter()
        .zip(&net.transitions)
        .map(|(m, t)| {
            if m.id != t.id {
                return Err(Error::parse("moves", format!("annotation {} out of order", m.id)));
            }
            let side = |label: Option<String>, present: bool| match (label, present) {
                (Some(l), _) => Some(ActivityLabel::Named(l)),
                (None, true) => Some(ActivityLabel::Tau),
                (None, false) => None,
            };
            Ok(ProductTransition {
                model_label: side(m.model_label, m.model.is_some()),
                trace_label: side(m.trace_label, m.trace.is_some()),
                id: m.id,
                kind: m.kind,
                model_transition: m.model,
                trace_transition: m.trace,
                weight: m.weight,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SyncProductNet {
        net,
        moves,
        trace_places,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::log::StochasticTrace;
    use crate::net::Marking;
    use crate::synth::sequence_net;
    use crate::trace_net::build_stochastic_trace_net;

    fn ab_vs_bc() -> SyncProductNet {
        let model = sequence_net(&["A", "B"]);
        let mut trace = StochasticTrace::deterministic("1", ["A", "B"]);
        trace.events[1].distribution = vec![("B".into(), 0.2), ("C".into(), 0.8)];
        build_sync_product(&model, &build_stochastic_trace_net(&trace).unwrap()).unwrap()
    }

    #[test]
    fn counts_moves_by_kind() {
        let p = ab_vs_bc();
        let count = |k| p.moves.iter().filter(|m| m.kind == k).count();
        assert_eq!(count(MoveKind::ModelMove), 2);
        assert_eq!(count(MoveKind::LogMove), 3);
        assert_eq!(count(MoveKind::Sync), 2);
        let syncs: Vec<(&str, f64)> = p
            .moves
            .iter()
            .filter(|m| m.kind == MoveKind::Sync)
            .map(|m| (m.trace_label.as_ref().unwrap().as_str().unwrap(), m.weight.unwrap()))
            .collect();
        assert_eq!(syncs, vec![("A", 1.0), ("B", 0.2)]);
        assert!(p.net.validate().is_empty(), "{:?}", p.net.validate());
        assert_eq!(p.trace_places, vec!["l:p_0", "l:p_1", "l:p_2"]);
    }

    #[test]
    fn markings_are_sums() {
        let p = ab_vs_bc();
        assert_eq!(p.net.initial_marking, Marking::from_places(["m:p0", "l:p_0"]));
        assert_eq!(p.net.final_marking, Marking::from_places(["m:p2", "l:p_2"]));
    }

    #[test]
    fn sync_move_consumes_from_both_sides() {
        let p = ab_vs_bc();
        let m = p.net.fire(&p.net.initial_marking, "s:(t1,t_1_1)").unwrap();
        assert_eq!(m, Marking::from_places(["m:p1", "l:p_1"]));
        let m = p.net.fire(&m, "l:t_2_2").unwrap();
        assert_eq!(m, Marking::from_places(["m:p1", "l:p_2"]));
    }

    #[test]
    fn silent_model_transition_never_syncs() {
        let mut model = sequence_net(&["A"]);
        model.transitions[0].label = ActivityLabel::Tau;
        let trace = build_stochastic_trace_net(&StochasticTrace::deterministic("1", ["A", "B"])).unwrap();
        let p = build_sync_product(&model, &trace).unwrap();
        assert!(p.moves.iter().all(|m| m.kind != MoveKind::Sync));
        assert_eq!(p.moves.len(), 3);
    }

    #[test]
    fn rejects_non_trace_net() {
        let model = sequence_net(&["A"]);
        let mut not_trace = sequence_net(&["A", "B"]);
        not_trace.arcs.push(("p0".into(), "t2".into()));
        assert!(build_sync_product(&model, &not_trace).is_err());
    }

    #[test]
    fn product_document_round_trips() {
        let p = ab_vs_bc();
        let bytes = serialize_product(&p);
        assert!(String::from_utf8_lossy(&bytes).contains("\"moves\""));
        assert_eq!(parse_product(&bytes).unwrap(), p);
    }
}
