//! Stochastically known event logs: each event carries a probability
//! distribution over activity labels.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::json::{parse_error, OrderedEntries};
use crate::{Error, Result};

/// Allowed deviation of a distribution's sum from 1.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct StochasticEvent {
    pub event_id: String,
    /// Carried through for provenance; alignment never looks at it.
    pub timestamp: Option<String>,
    /// `(activity, probability)` in document order.
    pub distribution: Vec<(String, f64)>,
}

impl StochasticEvent {
    pub fn deterministic(event_id: impl Into<String>, activity: impl Into<String>) -> Self {
        StochasticEvent {
            event_id: event_id.into(),
            timestamp: None,
            distribution: vec![(activity.into(), 1.0)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let element = || format!("event {}", self.event_id);
        if self.distribution.is_empty() {
            return Err(Error::validation(element(), "empty distribution"));
        }
        let mut seen = HashSet::new();
        for (label, p) in &self.distribution {
            if label.is_empty() {
                return Err(Error::validation(element(), "empty activity label"));
            }
            if !seen.insert(label.as_str()) {
                return Err(Error::validation(element(), format!("activity {label} listed twice")));
            }
            if !(*p > 0.0 && *p <= 1.0) {
                return Err(Error::validation(
                    element(),
                    format!("probability {p} of {label} outside (0,1]"),
                ));
            }
        }
        let sum: f64 = self.distribution.iter().map(|(_, p)| p).sum();
        if (sum - 1.0).abs() > DISTRIBUTION_TOLERANCE {
            return Err(Error::validation(element(), format!("distribution sums to {sum}")));
        }
        Ok(())
    }

    pub fn is_deterministic(&self) -> bool {
        self.distribution.len() == 1
    }

    /// The most probable activity; the first listed wins ties.
    pub fn most_likely(&self) -> &str {
        let mut best = &self.distribution[0];
        for entry in &self.distribution[1..] {
            if entry.1 > best.1 {
                best = entry;
            }
        }
        &best.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StochasticTrace {
    pub case_id: String,
    pub events: Vec<StochasticEvent>,
}

impl StochasticTrace {
    /// Lifts a plain activity sequence to a trace of probability-1 events
    /// with ids `e1, e2, ...`.
    pub fn deterministic<I, S>(case_id: impl Into<String>, activities: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        StochasticTrace {
            case_id: case_id.into(),
            events: activities
                .into_iter()
                .enumerate()
                .map(|(i, a)| StochasticEvent::deterministic(format!("e{}", i + 1), a))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn is_deterministic(&self) -> bool {
        self.events.iter().all(StochasticEvent::is_deterministic)
    }

    /// Activity sequence of a deterministic trace (most likely activity per
    /// event otherwise).
    pub fn activities(&self) -> Vec<&str> {
        self.events.iter().map(StochasticEvent::most_likely).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.events.iter().try_for_each(StochasticEvent::validate)
    }

    /// Warnings for timestamps that go backwards in record order.
    pub fn timestamp_warnings(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        let mut last: Option<&str> = None;
        for e in &self.events {
            if let Some(ts) = e.timestamp.as_deref() {
                if let Some(prev) = last {
                    if ts < prev {
                        warnings.push(format!(
                            "case {}: event {} timestamp {ts} precedes {prev}",
                            self.case_id, e.event_id
                        ));
                    }
                }
                last = Some(ts);
            }
        }
        warnings
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StochasticLog {
    pub traces: Vec<StochasticTrace>,
}

impl StochasticLog {
    pub fn new(traces: Vec<StochasticTrace>) -> Result<Self> {
        let log = StochasticLog { traces };
        log.validate()?;
        Ok(log)
    }

    /// Every activity label appearing in any event, sorted.
    pub fn alphabet(&self) -> BTreeSet<String> {
        self.traces
            .iter()
            .flat_map(|t| &t.events)
            .flat_map(|e| e.distribution.iter().map(|(l, _)| l.clone()))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids = HashSet::new();
        for t in &self.traces {
            if !ids.insert(t.case_id.as_str()) {
                return Err(Error::validation(format!("case {}", t.case_id), "duplicate case id"));
            }
            t.validate()?;
        }
        Ok(())
    }

    pub fn timestamp_warnings(&self) -> Vec<String> {
        self.traces.iter().flat_map(|t| t.timestamp_warnings()).collect()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LogDoc {
    cases: Vec<CaseDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseDoc {
    case_id: String,
    events: Vec<EventDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventDoc {
    event_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    timestamp: Option<String>,
    activities: OrderedEntries<f64>,
}

/// Parses the JSON log format and validates every distribution.
pub fn parse_log(bytes: &[u8]) -> Result<StochasticLog> {
    let doc: LogDoc = serde_json::from_slice(bytes).map_err(parse_error)?;
    let traces = doc
        .cases
        .into_iter()
        .map(|c| StochasticTrace {
            case_id: c.case_id,
            events: c
                .events
                .into_iter()
                .map(|e| StochasticEvent {
                    event_id: e.event_id,
                    timestamp: e.timestamp,
                    distribution: e.activities.0,
                })
                .collect(),
        })
        .collect();
    StochasticLog::new(traces)
}

pub fn serialize_log(log: &StochasticLog) -> Vec<u8> {
    let doc = LogDoc {
        cases: log
            .traces
            .iter()
            .map(|t| CaseDoc {
                case_id: t.case_id.clone(),
                events: t
                    .events
                    .iter()
                    .map(|e| EventDoc {
                        event_id: e.event_id.clone(),
                        timestamp: e.timestamp.clone(),
                        activities: OrderedEntries(e.distribution.clone()),
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut out = serde_json::to_vec_pretty(&doc).expect("log serializes");
    out.push(b'\n');
    out
}

/// Number of deterministic traces a stochastic trace can resolve to:
/// the product of the per-event distribution sizes. Saturates at `u128::MAX`.
pub fn realization_count(trace: &StochasticTrace) -> u128 {
    trace
        .events
        .iter()
        .try_fold(1u128, |acc, e| acc.checked_mul(e.distribution.len() as u128))
        .unwrap_or(u128::MAX)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    /// Index into each event's distribution.
    pub choice: Vec<usize>,
    pub activities: Vec<String>,
    /// Joint probability: product of the chosen probabilities.
    pub probability: f64,
}

/// Lists every realization, lexicographically by choice vector (the first
/// event varies slowest, each event in document order).
pub fn enumerate_realizations(trace: &StochasticTrace, cap: usize) -> Result<Vec<Realization>> {
    let count = realization_count(trace);
    if count > cap as u128 {
        return Err(Error::Capacity {
            what: "realizations",
            limit: cap,
            frontier: usize::try_from(count).unwrap_or(usize::MAX),
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut choice = vec![0usize; trace.events.len()];
    loop {
        let mut activities = Vec::with_capacity(choice.len());
        let mut probability = 1.0;
        for (e, &j) in trace.events.iter().zip(&choice) {
            let (label, p) = &e.distribution[j];
            activities.push(label.clone());
            probability *= p;
        }
        out.push(Realization {
            choice: choice.clone(),
            activities,
            probability,
        });
        // odometer increment, last event fastest
        let mut i = choice.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            choice[i] += 1;
            if choice[i] < trace.events[i].distribution.len() {
                break;
            }
            choice[i] = 0;
        }
    }
}
