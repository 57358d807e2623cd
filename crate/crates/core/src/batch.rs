//! Aligning every trace of a log against one model.

use std::time::Instant;

use rayon::prelude::*;

use crate::cost::CostProfile;
use crate::log::{StochasticLog, StochasticTrace};
use crate::net::SystemNet;
use crate::product::{build_sync_product, MoveKind};
use crate::search::{optimal_alignment, SearchOptions, SearchResult};
use crate::trace_net::build_stochastic_trace_net;
use crate::{Error, Result};

/// Builds the trace net and product for one trace and searches it.
pub fn align_trace(
    model: &SystemNet,
    trace: &StochasticTrace,
    profile: &CostProfile,
    options: &SearchOptions,
) -> Result<SearchResult> {
    let tracenet = build_stochastic_trace_net(trace)?;
    let product = build_sync_product(model, &tracenet)?;
    optimal_alignment(&product, profile, options)
}

#[derive(Debug)]
pub struct TraceOutcome {
    pub case_id: String,
    pub result: Result<SearchResult>,
    pub wall_time_ms: f64,
}

#[derive(Debug)]
pub struct LogAlignment {
    /// In log order.
    pub traces: Vec<TraceOutcome>,
    pub profile: CostProfile,
}

impl LogAlignment {
    pub fn costs(&self) -> impl Iterator<Item = f64> + '_ {
        self.traces
            .iter()
            .filter_map(|t| t.result.as_ref().ok().map(|r| r.alignment.total_cost))
    }

    /// Mean cost over the traces that aligned; `None` if none did.
    pub fn mean_cost(&self) -> Option<f64> {
        let (sum, n) = self.costs().fold((0.0, 0usize), |(s, n), c| (s + c, n + 1));
        (n > 0).then(|| sum / n as f64)
    }

    pub fn failures(&self) -> Vec<(&str, &Error)> {
        self.traces
            .iter()
            .filter_map(|t| t.result.as_ref().err().map(|e| (t.case_id.as_str(), e)))
            .collect()
    }

    pub fn csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for t in &self.traces {
            if let Some(row) = csv_row(t, &self.profile) {
                out.push_str(&row);
                out.push('\n');
            }
        }
        out
    }
}

pub const CSV_HEADER: &str =
    "case_id,profile,total_cost,n_moves,n_sync,n_log_moves,n_model_moves,explored_nodes,wall_time_ms";

/// One result record, or `None` for a failed trace.
pub fn csv_row(outcome: &TraceOutcome, profile: &CostProfile) -> Option<String> {
    let r = outcome.result.as_ref().ok()?;
    let a = &r.alignment;
    Some(format!(
        "{},{},{},{},{},{},{},{},{}",
        outcome.case_id,
        profile.kind.name(),
        format_number(a.total_cost),
        a.moves.len(),
        a.count(MoveKind::Sync),
        a.count(MoveKind::LogMove),
        a.count(MoveKind::ModelMove),
        r.explored_nodes,
        format_number(outcome.wall_time_ms),
    ))
}

/// Number rounded to 10 significant digits, shortest form.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.9e}").parse().expect("formatted float parses");
    // avoid "-0"
    if rounded == 0.0 {
        return "0".to_string();
    }
    rounded.to_string()
}

/// Aligns every trace. `parallelism` 0 uses the current rayon pool, 1 runs
/// sequentially, larger values use a dedicated pool of that size. Results
/// do not depend on it.
pub fn align_log(
    model: &SystemNet,
    log: &StochasticLog,
    profile: &CostProfile,
    options: &SearchOptions,
    parallelism: usize,
) -> Result<LogAlignment> {
    profile.validate()?;
    let one = |trace: &StochasticTrace| {
        let start = Instant::now();
        let result = align_trace(model, trace, profile, options);
        TraceOutcome {
            case_id: trace.case_id.clone(),
            result,
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        }
    };
    let traces: Vec<TraceOutcome> = match parallelism {
        0 => log.traces.par_iter().map(one).collect(),
        1 => log.traces.iter().map(one).collect(),
        n => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?
            .install(|| log.traces.par_iter().map(one).collect()),
    };
    Ok(LogAlignment {
        traces,
        profile: *profile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::Marking;
    use crate::synth::sequence_net;

    fn ab_log() -> StochasticLog {
        let mut b = StochasticTrace::deterministic("2", ["A", "B"]);
        b.events[1].distribution = vec![("B".into(), 0.2), ("C".into(), 0.8)];
        StochasticLog::new(vec![StochasticTrace::deterministic("1", ["A", "C"]), b]).unwrap()
    }

    #[test]
    fn identical_traces_mean_equals_single_cost() {
        let model = sequence_net(&["A", "B"]);
        let mut b = StochasticTrace::deterministic("b", ["A", "B"]);
        b.events[1].distribution = vec![("B".into(), 0.2), ("C".into(), 0.8)];
        let mut c = b.clone();
        c.case_id = "c".into();
        let log = StochasticLog::new(vec![b.clone(), c]).unwrap();
        let single = align_trace(&model, &b, &CostProfile::stochastic(), &SearchOptions::default())
            .unwrap()
            .alignment
            .total_cost;
        let batch = align_log(&model, &log, &CostProfile::stochastic(), &SearchOptions::default(), 0).unwrap();
        assert_eq!(batch.mean_cost(), Some(single));
    }

    #[test]
    fn failures_do_not_abort() {
        let mut model = sequence_net(&["A", "B"]);
        let log = ab_log();
        let ok = align_log(&model, &log, &CostProfile::stochastic(), &SearchOptions::default(), 1).unwrap();
        assert!(ok.failures().is_empty());
        model.final_marking = Marking::from_places(["p0", "p2"]);
        let bad = align_log(&model, &log, &CostProfile::stochastic(), &SearchOptions::default(), 1).unwrap();
        assert_eq!(bad.failures().len(), 2);
        assert_eq!(bad.mean_cost(), None);
        assert_eq!(bad.csv().lines().count(), 1);
    }

    #[test]
    fn parallelism_does_not_change_results() {
        let model = sequence_net(&["A", "B"]);
        let log = ab_log();
        let runs: Vec<Vec<f64>> = [1, 3, 0]
            .iter()
            .map(|&p| {
                align_log(&model, &log, &CostProfile::stochastic(), &SearchOptions::default(), p)
                    .unwrap()
                    .costs()
                    .collect()
            })
            .collect();
        assert_eq!(runs[0], runs[1]);
        assert_eq!(runs[0], runs[2]);
        assert_eq!(runs[0], vec![2.0, 0.981_684_361_111_265_8]);
    }

    #[test]
    fn csv_rows() {
        let model = sequence_net(&["A", "B"]);
        let batch = align_log(&model, &ab_log(), &CostProfile::stochastic(), &SearchOptions::default(), 1).unwrap();
        let csv = batch.csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1].starts_with("1,stochastic,2,3,1,1,1,"), "{}", lines[1]);
        assert!(lines[2].starts_with("2,stochastic,0.9816843611,2,2,0,0,"), "{}", lines[2]);
    }

    #[test]
    fn number_format() {
        assert_eq!(format_number(0.981_684_361_111_265_8), "0.9816843611");
        assert_eq!(format_number(2.0), "2");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(1.0 / 3.0), "0.3333333333");
        assert_eq!(format_number(123456.789012345), "123456.789");
    }
}
