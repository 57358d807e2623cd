//! Labeled Petri nets with initial and final markings.
//!
//! A [`SystemNet`] is plain data: it can hold violations of the well-formedness
//! rules, which [`SystemNet::validate`] reports. The parsers only ever return
//! valid nets. Arc multiplicities are always 1 and markings are multisets.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::json::{parse_error, OrderedEntries};
use crate::{Error, Result};

/// Activity label of a transition. `Tau` is the silent label and never equals
/// a textual label, including one spelled "tau".
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActivityLabel {
    Tau,
    Named(String),
}

impl ActivityLabel {
    pub fn named(label: impl Into<String>) -> Self {
        ActivityLabel::Named(label.into())
    }

    pub fn is_tau(&self) -> bool {
        matches!(self, ActivityLabel::Tau)
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            ActivityLabel::Tau => None,
            ActivityLabel::Named(s) => Some(s),
        }
    }
}

impl fmt::Display for ActivityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActivityLabel::Tau => f.write_str("τ"),
            ActivityLabel::Named(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub id: String,
    pub label: ActivityLabel,
    /// Firing probability in (0, 1]; only trace nets carry one.
    pub weight: Option<f64>,
}

impl Transition {
    pub fn new(id: impl Into<String>, label: ActivityLabel) -> Self {
        Transition {
            id: id.into(),
            label,
            weight: None,
        }
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = Some(weight);
        self
    }
}

/// Multiset of tokens over place ids. Zero counts are never stored, so two
/// markings are equal iff they hold the same tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Marking(BTreeMap<String, u32>);

impl Marking {
    pub fn new() -> Self {
        Self::default()
    }

    /// Marking with one token on each listed place (repeats accumulate).
    pub fn from_places<I, S>(places: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut m = Marking::new();
        for p in places {
            m.add(p, 1);
        }
        m
    }

    pub fn get(&self, place: &str) -> u32 {
        self.0.get(place).copied().unwrap_or(0)
    }

    pub fn add(&mut self, place: impl Into<String>, count: u32) {
        if count > 0 {
            *self.0.entry(place.into()).or_insert(0) += count;
        }
    }

    /// Removes `count` tokens; returns false (leaving the marking untouched)
    /// when fewer are present.
    pub fn remove(&mut self, place: &str, count: u32) -> bool {
        match self.0.get_mut(place) {
            Some(c) if *c >= count => {
                *c -= count;
                if *c == 0 {
                    self.0.remove(place);
                }
                true
            }
            _ => count == 0,
        }
    }

    /// Multiset sum.
    pub fn sum(&self, other: &Marking) -> Marking {
        let mut out = self.clone();
        for (p, c) in other.iter() {
            out.add(p, c);
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.0.iter().map(|(p, c)| (p.as_str(), *c))
    }

    pub fn places(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn total_tokens(&self) -> u64 {
        self.0.values().map(|&c| c as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (p, c)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            if c > 1 {
                write!(f, "{c}")?;
            }
            f.write_str(p)?;
        }
        f.write_str("]")
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SystemNet {
    pub places: Vec<String>,
    pub transitions: Vec<Transition>,
    /// Ordered `(source, target)` pairs.
    pub arcs: Vec<(String, String)>,
    pub initial_marking: Marking,
    pub final_marking: Marking,
}

impl SystemNet {
    pub fn transition(&self, id: &str) -> Option<&Transition> {
        self.transitions.iter().find(|t| t.id == id)
    }

    pub fn has_place(&self, id: &str) -> bool {
        self.places.iter().any(|p| p == id)
    }

    /// Input places of `t`, in arc order.
    pub fn preset<'a>(&'a self, t: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.arcs
            .iter()
            .filter(move |(_, target)| target == t)
            .map(|(source, _)| source.as_str())
    }

    /// Output places of `t`, in arc order.
    pub fn postset<'a>(&'a self, t: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.arcs
            .iter()
            .filter(move |(source, _)| source == t)
            .map(|(_, target)| target.as_str())
    }

    /// Lists every violated well-formedness rule; empty when the net is valid.
    pub fn validate(&self) -> Vec<String> {
        let mut report = Vec::new();
        let mut places = HashSet::new();
        for p in &self.places {
            if p.is_empty() {
                report.push("empty place id".to_string());
            }
            if !places.insert(p.as_str()) {
                report.push(format!("duplicate place id: {p}"));
            }
        }
        let mut transitions = HashSet::new();
        for t in &self.transitions {
            if t.id.is_empty() {
                report.push("empty transition id".to_string());
            }
            if !transitions.insert(t.id.as_str()) {
                report.push(format!("duplicate transition id: {}", t.id));
            }
            if places.contains(t.id.as_str()) {
                report.push(format!("id used for both a place and a transition: {}", t.id));
            }
            if let ActivityLabel::Named(l) = &t.label {
                if l.is_empty() {
                    report.push(format!("transition {} has an empty label", t.id));
                }
            }
            if let Some(w) = t.weight {
                if !(w > 0.0 && w <= 1.0) {
                    report.push(format!("transition {} has weight {w} outside (0,1]", t.id));
                }
            }
        }
        let mut seen_arcs = HashSet::new();
        for (s, d) in &self.arcs {
            let kinds = (
                places.contains(s.as_str()),
                transitions.contains(s.as_str()),
                places.contains(d.as_str()),
                transitions.contains(d.as_str()),
            );
            match kinds {
                (true, _, true, _) => report.push(format!("arc connects two places: {s}->{d}")),
                (_, true, _, true) => {
                    report.push(format!("arc connects two transitions: {s}->{d}"))
                }
                (false, false, _, _) => report.push(format!("arc source unknown: {s}->{d}")),
                (_, _, false, false) => report.push(format!("arc target unknown: {s}->{d}")),
                _ => {}
            }
            if !seen_arcs.insert((s, d)) {
                report.push(format!("duplicate arc (multiplicity > 1): {s}->{d}"));
            }
        }
        for (name, m) in [
            ("initial", &self.initial_marking),
            ("final", &self.final_marking),
        ] {
            for p in m.places() {
                if !places.contains(p) {
                    report.push(format!("{name} marking names unknown place {p}"));
                }
            }
        }
        report
    }

    fn check_marking(&self, m: &Marking) -> Result<()> {
        match m.places().find(|p| !self.has_place(p)) {
            Some(p) => Err(Error::UnknownPlace(p.to_string())),
            None => Ok(()),
        }
    }

    /// Ids of the transitions enabled at `m`, in net order.
    pub fn enabled_transitions(&self, m: &Marking) -> Result<Vec<&str>> {
        self.check_marking(m)?;
        Ok(self
            .transitions
            .iter()
            .filter(|t| self.preset(&t.id).all(|p| m.get(p) >= 1))
            .map(|t| t.id.as_str())
            .collect())
    }

    pub fn fire(&self, m: &Marking, t: &str) -> Result<Marking> {
        self.check_marking(m)?;
        if self.transition(t).is_none() {
            return Err(Error::UnknownTransition(t.to_string()));
        }
        let mut next = m.clone();
        for p in self.preset(t) {
            if !next.remove(p, 1) {
                return Err(Error::NotEnabled {
                    transition: t.to_string(),
                    place: p.to_string(),
                });
            }
        }
        for p in self.postset(t) {
            next.add(p, 1);
        }
        Ok(next)
    }

    /// Labels of all non-silent transitions, sorted and deduplicated.
    pub fn alphabet(&self) -> Vec<String> {
        let mut labels: Vec<String> = self
            .transitions
            .iter()
            .filter_map(|t| t.label.as_str().map(str::to_string))
            .collect();
        labels.sort();
        labels.dedup();
        labels
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct NetDoc {
    pub places: Vec<String>,
    pub transitions: Vec<TransitionDoc>,
    pub arcs: Vec<(String, String)>,
    pub initial_marking: OrderedEntries<u32>,
    pub final_marking: OrderedEntries<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct TransitionDoc {
    pub id: String,
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

fn marking_from_doc(entries: OrderedEntries<u32>, field: &str) -> Result<Marking> {
    let mut m = Marking::new();
    for (p, c) in entries.0 {
        if c == 0 {
            return Err(Error::parse(
                format!("{field}.{p}"),
                "token counts must be positive",
            ));
        }
        m.add(p, c);
    }
    Ok(m)
}

fn marking_to_doc(m: &Marking) -> OrderedEntries<u32> {
    OrderedEntries(m.iter().map(|(p, c)| (p.to_string(), c)).collect())
}

impl NetDoc {
    pub(crate) fn into_net(self) -> Result<SystemNet> {
        let mut transitions = Vec::with_capacity(self.transitions.len());
        for (i, t) in self.transitions.into_iter().enumerate() {
            let label = match t.label {
                None => ActivityLabel::Tau,
                Some(l) if l.is_empty() => {
                    return Err(Error::parse(
                        format!("transitions[{i}].label"),
                        "labels must be nonempty (use null for a silent transition)",
                    ))
                }
                Some(l) => ActivityLabel::Named(l),
            };
            transitions.push(Transition {
                id: t.id,
                label,
                weight: t.weight,
            });
        }
        let net = SystemNet {
            places: self.places,
            transitions,
            arcs: self.arcs,
            initial_marking: marking_from_doc(self.initial_marking, "initial_marking")?,
            final_marking: marking_from_doc(self.final_marking, "final_marking")?,
        };
        let report = net.validate();
        if let Some(first) = report.first() {
            return Err(Error::parse("net", first.clone()));
        }
        Ok(net)
    }

    pub(crate) fn from_net(net: &SystemNet) -> Self {
        NetDoc {
            places: net.places.clone(),
            transitions: net
                .transitions
                .iter()
                .map(|t| TransitionDoc {
                    id: t.id.clone(),
                    label: t.label.as_str().map(str::to_string),
                    weight: t.weight,
                })
                .collect(),
            arcs: net.arcs.clone(),
            initial_marking: marking_to_doc(&net.initial_marking),
            final_marking: marking_to_doc(&net.final_marking),
        }
    }
}

/// Parses the JSON net format. The result always passes [`SystemNet::validate`].
pub fn parse_net(bytes: &[u8]) -> Result<SystemNet> {
    let doc: NetDoc = serde_json::from_slice(bytes).map_err(parse_error)?;
    doc.into_net()
}

pub fn serialize_net(net: &SystemNet) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(&NetDoc::from_net(net)).expect("net serializes");
    out.push(b'\n');
    out
}
