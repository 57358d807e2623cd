//! Seeded generation of stochastic experiment logs from deterministic ones.
//!
//! Each trace first goes through an optional pre-modification (relabel, swap,
//! duplicate, or all three in that order) and then gets parallel activities
//! injected into a fraction `T_p` of its events. Every random decision for
//! case `k` comes from streams derived from `(seed, k)` only, so output does
//! not depend on batch order or thread count.
//!
//! Injection draws a permutation of positions and the extra activities for
//! every position up front, then makes the first `⌊T_p·len⌋` positions of the
//! permutation uncertain. For a fixed seed, raising `T_p` therefore only adds
//! uncertain events and never changes the ones already chosen.

use std::fmt;
use std::str::FromStr;

use rand::seq::{index, IndexedRandom, SliceRandom};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::log::{StochasticLog, StochasticTrace};
use crate::{Error, Result};

/// Number of events affected by a fraction of a trace. Floors, with a small
/// slack so that e.g. `0.29 * 100` counts as 29.
pub fn fraction_count(fraction: f64, len: usize) -> usize {
    ((fraction * len as f64 + 1e-9).floor() as usize).min(len)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    None,
    Relabel,
    Swap,
    Duplicate,
    All,
}

impl Mode {
    pub const ALL: [Mode; 5] = [Mode::None, Mode::Relabel, Mode::Swap, Mode::Duplicate, Mode::All];

    pub fn name(self) -> &'static str {
        match self {
            Mode::None => "none",
            Mode::Relabel => "relabel",
            Mode::Swap => "swap",
            Mode::Duplicate => "duplicate",
            Mode::All => "all",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::parse("mode", format!("unknown mode {s:?}")))
    }
}

/// How the probability left over by the original activity is shared among
/// the added ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    /// Uniform point on the simplex (sorted-uniform spacings).
    Simplex,
    Equal,
}

impl FromStr for SplitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simplex" => Ok(SplitMode::Simplex),
            "equal" => Ok(SplitMode::Equal),
            _ => Err(Error::parse("split", format!("unknown split {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbConfig {
    /// Activities per uncertain event, original included (`N_t`).
    pub n_parallel: usize,
    /// Probability kept by the original activity (`P_f`).
    pub original_prob: f64,
    /// Fraction of each trace's events made uncertain (`T_p`).
    pub uncertain_portion: f64,
    pub mode: Mode,
    pub mode_fraction: f64,
    pub seed: u64,
    pub split: SplitMode,
}

impl Default for PerturbConfig {
    fn default() -> Self {
        PerturbConfig {
            n_parallel: 2,
            original_prob: 0.75,
            uncertain_portion: 1.0,
            mode: Mode::None,
            mode_fraction: 0.3,
            seed: 0,
            split: SplitMode::Simplex,
        }
    }
}

impl PerturbConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::validation(field, msg));
        if self.n_parallel < 2 {
            return bad("n_parallel", format!("{} < 2", self.n_parallel));
        }
        if !(self.original_prob > 0.0 && self.original_prob <= 1.0) {
            return bad("original_prob", format!("{} outside (0,1]", self.original_prob));
        }
        if !(0.0..=1.0).contains(&self.uncertain_portion) {
            return bad("uncertain_portion", format!("{} outside [0,1]", self.uncertain_portion));
        }
        if !(0.0..=1.0).contains(&self.mode_fraction) {
            return bad("mode_fraction", format!("{} outside [0,1]", self.mode_fraction));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Relabel = 0,
    Swap = 1,
    Duplicate = 2,
    Inject = 3,
}

/// Deterministic random stream for one `(seed, case index, purpose)`.
pub struct RngStream(ChaCha8Rng);

impl RngStream {
    pub fn new(seed: u64, case_index: u64, purpose: Purpose) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(case_index.wrapping_mul(4).wrapping_add(purpose as u64));
        RngStream(rng)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

/// A modified trace plus the (original) positions that were touched.
#[derive(Debug, Clone, PartialEq)]
pub struct Modified {
    pub trace: StochasticTrace,
    pub positions: Vec<usize>,
}

fn require_deterministic(trace: &StochasticTrace) -> Result<()> {
    if trace.is_deterministic() {
        Ok(())
    } else {
        Err(Error::validation(
            format!("case {}", trace.case_id),
            "perturbation expects a deterministic trace",
        ))
    }
}

fn choose_positions<R: Rng + ?Sized>(rng: &mut R, len: usize, count: usize) -> Vec<usize> {
    let mut chosen = index::sample(rng, len, count).into_vec();
    chosen.sort_unstable();
    chosen
}

/// Gives `⌊fraction·len⌋` random events a different activity from `alphabet`.
pub fn relabel_events<R: Rng + ?Sized>(
    trace: &StochasticTrace,
    fraction: f64,
    rng: &mut R,
    alphabet: &[String],
) -> Result<Modified> {
    require_deterministic(trace)?;
    if alphabet.len() < 2 {
        return Err(Error::validation("alphabet", "relabeling needs at least two activities"));
    }
    let positions = choose_positions(rng, trace.len(), fraction_count(fraction, trace.len()));
    let mut out = trace.clone();
    for &i in &positions {
        let current = &trace.events[i].distribution[0].0;
        let others: Vec<&String> = alphabet.iter().filter(|a| *a != current).collect();
        let label = (*others.choose(rng).expect("alphabet has another activity")).clone();
        out.events[i].distribution = vec![(label, 1.0)];
    }
    Ok(Modified { trace: out, positions })
}

/// Swaps the activities of `⌊fraction·len⌋` random events with a neighbor
/// (the first and last event can only go one way), in ascending order.
pub fn swap_events<R: Rng + ?Sized>(trace: &StochasticTrace, fraction: f64, rng: &mut R) -> Result<Modified> {
    require_deterministic(trace)?;
    let len = trace.len();
    if len < 2 {
        return Err(Error::validation(
            format!("case {}", trace.case_id),
            "swapping needs at least two events",
        ));
    }
    let positions = choose_positions(rng, len, fraction_count(fraction, len));
    let mut out = trace.clone();
    for &i in &positions {
        let j = if i == 0 {
            1
        } else if i == len - 1 {
            len - 2
        } else if rng.random_bool(0.5) {
            i - 1
        } else {
            i + 1
        };
        let tmp = std::mem::take(&mut out.events[i].distribution);
        out.events[i].distribution = std::mem::replace(&mut out.events[j].distribution, tmp);
    }
    Ok(Modified { trace: out, positions })
}

/// Repeats `⌊fraction·len⌋` random events right after themselves.
pub fn duplicate_events<R: Rng + ?Sized>(trace: &StochasticTrace, fraction: f64, rng: &mut R) -> Result<Modified> {
    require_deterministic(trace)?;
    let positions = choose_positions(rng, trace.len(), fraction_count(fraction, trace.len()));
    let mut events = Vec::with_capacity(trace.len() + positions.len());
    let mut next = positions.iter().peekable();
    for (i, e) in trace.events.iter().enumerate() {
        events.push(e.clone());
        if next.peek() == Some(&&i) {
            next.next();
            let mut copy = e.clone();
            copy.event_id = format!("{}_dup", e.event_id);
            events.push(copy);
        }
    }
    Ok(Modified {
        trace: StochasticTrace {
            case_id: trace.case_id.clone(),
            events,
        },
        positions,
    })
}

fn split_leftover<R: Rng + ?Sized>(rng: &mut R, parts: usize, split: SplitMode) -> Vec<f64> {
    match split {
        SplitMode::Equal => vec![1.0 / parts as f64; parts],
        SplitMode::Simplex => {
            let mut cuts: Vec<f64> = (0..parts - 1).map(|_| rng.random::<f64>()).collect();
            cuts.sort_by(f64::total_cmp);
            let mut shares = Vec::with_capacity(parts);
            let mut prev = 0.0;
            for c in cuts {
                shares.push(c - prev);
                prev = c;
            }
            shares.push(1.0 - prev);
            shares
        }
    }
}

/// Makes `⌊T_p·len⌋` random events uncertain: the original activity keeps
/// probability `P_f` and `N_t - 1` distinct other activities share the rest.
/// Shares that come out as zero (always, when `P_f = 1`) are dropped.
pub fn add_parallel_transitions<R: Rng + ?Sized>(
    trace: &StochasticTrace,
    config: &PerturbConfig,
    rng: &mut R,
    alphabet: &[String],
) -> Result<Modified> {
    require_deterministic(trace)?;
    config.validate()?;
    if alphabet.len() < config.n_parallel {
        return Err(Error::validation(
            "alphabet",
            format!("{} activities cannot supply {} parallel ones", alphabet.len(), config.n_parallel),
        ));
    }
    let len = trace.len();
    let mut order: Vec<usize> = (0..len).collect();
    order.shuffle(rng);
    let extras: Vec<Vec<(String, f64)>> = trace
        .events
        .iter()
        .map(|e| {
            let original = &e.distribution[0].0;
            let pool: Vec<&String> = alphabet.iter().filter(|a| *a != original).collect();
            let picked = index::sample(rng, pool.len(), config.n_parallel - 1);
            let shares = split_leftover(rng, config.n_parallel - 1, config.split);
            picked
                .iter()
                .zip(shares)
                .map(|(i, s)| (pool[i].clone(), s))
                .collect()
        })
        .collect();

    let leftover = 1.0 - config.original_prob;
    let mut positions = order[..fraction_count(config.uncertain_portion, len)].to_vec();
    positions.sort_unstable();
    let mut out = trace.clone();
    for &i in &positions {
        let original = trace.events[i].distribution[0].0.clone();
        let mut distribution = vec![(original, config.original_prob)];
        distribution.extend(
            extras[i]
                .iter()
                .map(|(a, s)| (a.clone(), s * leftover))
                .filter(|(_, p)| *p > 0.0),
        );
        out.events[i].distribution = distribution;
    }
    Ok(Modified { trace: out, positions })
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CaseProvenance {
    pub case_id: String,
    pub relabeled: Vec<usize>,
    pub swapped: Vec<usize>,
    pub duplicated: Vec<usize>,
    /// Positions in the pre-modified trace that received parallel activities.
    pub uncertain: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub config: PerturbConfig,
    pub cases: Vec<CaseProvenance>,
}

impl Provenance {
    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("provenance serializes");
        out.push(b'\n');
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedLog {
    pub log: StochasticLog,
    pub provenance: Provenance,
}

/// Applies the configured pre-modification to one trace; the result is still
/// deterministic.
pub fn premodify(
    trace: &StochasticTrace,
    case_index: u64,
    config: &PerturbConfig,
    alphabet: &[String],
) -> Result<(StochasticTrace, CaseProvenance)> {
    let mut record = CaseProvenance {
        case_id: trace.case_id.clone(),
        ..CaseProvenance::default()
    };
    let mut current = trace.clone();
    let stream = |p| RngStream::new(config.seed, case_index, p);
    if matches!(config.mode, Mode::Relabel | Mode::All) {
        let m = relabel_events(&current, config.mode_fraction, &mut stream(Purpose::Relabel), alphabet)?;
        current = m.trace;
        record.relabeled = m.positions;
    }
    // a single event has no neighbor to swap with
    if matches!(config.mode, Mode::Swap | Mode::All) && current.len() >= 2 {
        let m = swap_events(&current, config.mode_fraction, &mut stream(Purpose::Swap))?;
        current = m.trace;
        record.swapped = m.positions;
    }
    if matches!(config.mode, Mode::Duplicate | Mode::All) {
        let m = duplicate_events(&current, config.mode_fraction, &mut stream(Purpose::Duplicate))?;
        current = m.trace;
        record.duplicated = m.positions;
    }
    Ok((current, record))
}

pub fn generate_experiment_log(det_log: &StochasticLog, config: &PerturbConfig) -> Result<GeneratedLog> {
    config.validate()?;
    let alphabet: Vec<String> = det_log.alphabet().into_iter().collect();
    let generated: Vec<Result<(StochasticTrace, CaseProvenance)>> = det_log
        .traces
        .par_iter()
        .enumerate()
        .map(|(k, trace)| {
            let (modified, mut record) = premodify(trace, k as u64, config, &alphabet)?;
            let mut rng = RngStream::new(config.seed, k as u64, Purpose::Inject);
            let injected = add_parallel_transitions(&modified, config, &mut rng, &alphabet)?;
            record.uncertain = injected.positions;
            Ok((injected.trace, record))
        })
        .collect();
    let mut traces = Vec::with_capacity(generated.len());
    let mut cases = Vec::with_capacity(generated.len());
    for (result, original) in generated.into_iter().zip(&det_log.traces) {
        let (trace, record) = result.map_err(|e| match e {
            Error::Validation { element, message } if !element.starts_with("case") => Error::Validation {
                element: format!("case {}: {element}", original.case_id),
                message,
            },
            other => other,
        })?;
        traces.push(trace);
        cases.push(record);
    }
    Ok(GeneratedLog {
        log: StochasticLog::new(traces)?,
        provenance: Provenance {
            config: config.clone(),
            cases,
        },
    })
}

/// Bucket index of `len` given ascending lower edges (first edge 0).
pub fn length_group(len: usize, edges: &[usize]) -> usize {
    edges.iter().rposition(|&e| len >= e).unwrap_or(0)
}

/// Default trace-length bucket lower edges: `[0,9]`, `[10,29]`, `[30,49]`, `[50,∞)`.
pub const DEFAULT_LENGTH_EDGES: [usize; 4] = [0, 10, 30, 50];
