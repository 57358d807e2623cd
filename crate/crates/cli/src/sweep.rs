//! Sweeps over `(mode, N_t, P_f, T_p, repetition)` producing the figure CSVs.
//!
//! Every sweep point generates its own seeded log and aligns it under each
//! requested profile. Points are evaluated in parallel and collected into an
//! ordered map, so the emitted tables depend only on the inputs and the seed.
//! Repetition `r` uses seed `seed + r`; its costs are pooled with the other
//! repetitions when a row is aggregated.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use stocon_core::batch::{align_log, format_number};
use stocon_core::cost::{CostProfile, ProfileKind};
use stocon_core::log::{StochasticLog, StochasticTrace};
use stocon_core::net::SystemNet;
use stocon_core::perturb::{
    generate_experiment_log, length_group, premodify, Mode, PerturbConfig, SplitMode, DEFAULT_LENGTH_EDGES,
};
use stocon_core::search::SearchOptions;

use crate::{write_file, CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub original_probs: Vec<f64>,
    pub uncertain_portions: Vec<f64>,
    pub n_parallel: Vec<usize>,
    pub modes: Vec<Mode>,
    pub profiles: Vec<ProfileKind>,
    pub seed: u64,
    pub repetitions: usize,
    pub mode_fraction: f64,
    pub split: SplitMode,
    /// Lower edges of the trace-length groups in fig6.
    pub length_edges: Vec<usize>,
    pub search: SearchOptions,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            original_probs: vec![0.55, 0.75, 0.95],
            uncertain_portions: portion_grid(0.05).expect("valid step"),
            n_parallel: vec![2, 3, 4],
            modes: Mode::ALL.to_vec(),
            profiles: vec![ProfileKind::Stochastic, ProfileKind::LowerBound],
            seed: 0,
            repetitions: 1,
            mode_fraction: 0.3,
            split: SplitMode::Simplex,
            length_edges: DEFAULT_LENGTH_EDGES.to_vec(),
            search: SearchOptions::default(),
        }
    }
}

/// `0, step, 2·step, ..., 1` (the last point is 1 only if step divides 1).
pub fn portion_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(CliError::Usage(format!("T_p step {step} outside (0,1]")));
    }
    let n = (1.0 / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| round10(i as f64 * step).min(1.0)).collect())
}

fn round10(x: f64) -> f64 {
    format_number(x).parse().expect("formatted number parses")
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(CliError::Usage(m.to_string()));
        if self.original_probs.is_empty() || self.uncertain_portions.is_empty() || self.n_parallel.is_empty() {
            return fail("sweep value lists must be nonempty");
        }
        if self.modes.is_empty() || self.profiles.is_empty() {
            return fail("at least one mode and one profile are required");
        }
        if self.repetitions == 0 {
            return fail("repetitions must be at least 1");
        }
        if self.length_edges.first() != Some(&0) || self.length_edges.windows(2).any(|w| w[0] >= w[1]) {
            return fail("length edges must start at 0 and increase");
        }
        for &pf in &self.original_probs {
            for &tp in &self.uncertain_portions {
                for &nt in &self.n_parallel {
                    self.config(Mode::None, nt, pf, tp, 0).validate()?;
                }
            }
        }
        Ok(())
    }

    fn config(&self, mode: Mode, n_parallel: usize, original_prob: f64, uncertain_portion: f64, rep: usize) -> PerturbConfig {
        PerturbConfig {
            n_parallel,
            original_prob,
            uncertain_portion,
            mode,
            mode_fraction: self.mode_fraction,
            seed: self.seed.wrapping_add(rep as u64),
            split: self.split,
        }
    }

    /// N_t used by the fig5 and fig6 series.
    fn primary_n_parallel(&self) -> usize {
        self.n_parallel[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Point {
    mode: Mode,
    n_parallel: usize,
    pf_bits: u64,
    tp_bits: u64,
    rep: usize,
}

impl Point {
    fn new(mode: Mode, n_parallel: usize, pf: f64, tp: f64, rep: usize) -> Self {
        Point {
            mode,
            n_parallel,
            pf_bits: pf.to_bits(),
            tp_bits: tp.to_bits(),
            rep,
        }
    }

    fn pf(&self) -> f64 {
        f64::from_bits(self.pf_bits)
    }

    fn tp(&self) -> f64 {
        f64::from_bits(self.tp_bits)
    }
}

/// Per-trace costs (log order) under each profile.
type Costs = BTreeMap<ProfileKind, Vec<Option<f64>>>;

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub series: String,
    pub x: f64,
    pub mode: Mode,
    pub n_parallel: Option<usize>,
    pub original_prob: f64,
    pub uncertain_portion: Option<f64>,
    pub length_group: Option<String>,
    pub profile: ProfileKind,
    pub mean_cost: Option<f64>,
    pub std_cost: Option<f64>,
    pub traces: usize,
    pub failures: usize,
}

pub const REPORT_HEADER: [&str; 12] = [
    "series",
    "x",
    "mode",
    "n_t",
    "p_f",
    "t_p",
    "length_group",
    "profile",
    "mean_cost",
    "std_cost",
    "traces",
    "failures",
];

fn opt_number(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), format_number)
}

impl ReportRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.series.clone(),
            format_number(self.x),
            self.mode.to_string(),
            self.n_parallel.map_or_else(|| "-".to_string(), |n| n.to_string()),
            format_number(self.original_prob),
            opt_number(self.uncertain_portion),
            self.length_group.clone().unwrap_or_else(|| "-".to_string()),
            self.profile.to_string(),
            opt_number(self.mean_cost),
            opt_number(self.std_cost),
            self.traces.to_string(),
            self.failures.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub mode: Mode,
    pub n_parallel: usize,
    pub original_prob: f64,
    pub uncertain_portion: f64,
    pub seed: u64,
    pub profile: Option<ProfileKind>,
    pub case_id: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub check: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub fig4: Vec<ReportRow>,
    pub fig5: Vec<ReportRow>,
    pub fig6: Vec<ReportRow>,
    pub errors: Vec<ErrorRow>,
    pub checks: Vec<CheckRow>,
}

/// Mean and population standard deviation of the successful costs, plus
/// success and failure counts.
fn aggregate<'a>(costs: impl Iterator<Item = &'a Option<f64>>) -> (Option<f64>, Option<f64>, usize, usize) {
    let mut ok = Vec::new();
    let mut failures = 0;
    for c in costs {
        match c {
            Some(c) => ok.push(*c),
            None => failures += 1,
        }
    }
    if ok.is_empty() {
        return (None, None, 0, failures);
    }
    let n = ok.len() as f64;
    let mean = ok.iter().sum::<f64>() / n;
    let var = ok.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / n;
    (Some(mean), Some(var.sqrt()), ok.len(), failures)
}

fn one_line(message: &str) -> String {
    message.replace([',', '\n', '\r'], ";")
}

struct Evaluated {
    costs: Costs,
    errors: Vec<ErrorRow>,
}

fn align_all(
    model: &SystemNet,
    log: &StochasticLog,
    profile: ProfileKind,
    spec: &SweepSpec,
    mut on_error: impl FnMut(&str, String),
) -> Vec<Option<f64>> {
    let profile = CostProfile::new(profile);
    let batch = align_log(model, log, &profile, &spec.search, 0).expect("profile is valid");
    batch
        .traces
        .into_iter()
        .map(|t| match t.result {
            Ok(r) => Some(r.alignment.total_cost),
            Err(e) => {
                on_error(&t.case_id, e.to_string());
                None
            }
        })
        .collect()
}

fn evaluate(point: &Point, model: &SystemNet, det_log: &StochasticLog, spec: &SweepSpec, profiles: &[ProfileKind]) -> Evaluated {
    let config = spec.config(point.mode, point.n_parallel, point.pf(), point.tp(), point.rep);
    let error_row = |profile, case_id: Option<&str>, message: String| ErrorRow {
        mode: point.mode,
        n_parallel: point.n_parallel,
        original_prob: point.pf(),
        uncertain_portion: point.tp(),
        seed: config.seed,
        profile,
        case_id: case_id.map(str::to_string),
        message: one_line(&message),
    };
    let mut errors = Vec::new();
    let mut costs = Costs::new();
    match generate_experiment_log(det_log, &config) {
        Ok(generated) => {
            for &profile in profiles {
                let c = align_all(model, &generated.log, profile, spec, |case, msg| {
                    errors.push(error_row(Some(profile), Some(case), msg))
                });
                costs.insert(profile, c);
            }
        }
        Err(e) => {
            errors.push(error_row(None, None, e.to_string()));
            for &profile in profiles {
                costs.insert(profile, vec![None; det_log.traces.len()]);
            }
        }
    }
    Evaluated { costs, errors }
}

/// Deterministic-profile costs of the pre-modified (still deterministic) log.
fn premodified_reference(
    model: &SystemNet,
    det_log: &StochasticLog,
    spec: &SweepSpec,
    mode: Mode,
    rep: usize,
) -> std::result::Result<Vec<Option<f64>>, String> {
    let config = spec.config(mode, spec.primary_n_parallel(), 1.0, 0.0, rep);
    let alphabet: Vec<String> = det_log.alphabet().into_iter().collect();
    let traces: Vec<StochasticTrace> = det_log
        .traces
        .iter()
        .enumerate()
        .map(|(k, t)| premodify(t, k as u64, &config, &alphabet).map(|(t, _)| t))
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let log = StochasticLog::new(traces).map_err(|e| e.to_string())?;
    Ok(align_all(model, &log, ProfileKind::Deterministic, spec, |_, _| {}))
}

fn group_label(edges: &[usize], g: usize) -> String {
    match edges.get(g + 1) {
        Some(next) => format!("{}-{}", edges[g], next - 1),
        None => format!("{}+", edges[g]),
    }
}

/// Runs the whole sweep. Individual failures end up in `errors`; only an
/// invalid spec or input log is fatal.
pub fn run_sweep(model: &SystemNet, det_log: &StochasticLog, spec: &SweepSpec) -> Result<SweepReport> {
    spec.validate()?;
    if !det_log.traces.iter().all(StochasticTrace::is_deterministic) {
        return Err(CliError::Usage("sweep input log must be deterministic".into()));
    }
    let nt0 = spec.primary_n_parallel();
    let reps = 0..spec.repetitions;
    let mut points = Vec::new();
    for &mode in &spec.modes {
        for rep in reps.clone() {
            for &nt in &spec.n_parallel {
                for &pf in &spec.original_probs {
                    points.push(Point::new(mode, nt, pf, 1.0, rep));
                }
            }
            for &pf in &spec.original_probs {
                for &tp in &spec.uncertain_portions {
                    points.push(Point::new(mode, nt0, pf, tp, rep));
                }
            }
            // deterministic-equivalence self-check
            points.push(Point::new(mode, nt0, 1.0, 1.0, rep));
        }
    }
    points.sort();
    points.dedup();

    let mut profiles = spec.profiles.clone();
    if !profiles.contains(&ProfileKind::Stochastic) {
        profiles.push(ProfileKind::Stochastic);
    }
    profiles.sort();
    profiles.dedup();

    let evaluated: Vec<Evaluated> = points
        .par_iter()
        .map(|p| evaluate(p, model, det_log, spec, &profiles))
        .collect();
    let mut errors = Vec::new();
    let mut results: BTreeMap<Point, Costs> = BTreeMap::new();
    for (p, e) in points.iter().zip(evaluated) {
        errors.extend(e.errors);
        results.insert(*p, e.costs);
    }

    let original: Vec<Option<f64>> = align_all(model, det_log, ProfileKind::Deterministic, spec, |case, msg| {
        errors.push(ErrorRow {
            mode: Mode::None,
            n_parallel: 0,
            original_prob: 1.0,
            uncertain_portion: 0.0,
            seed: spec.seed,
            profile: Some(ProfileKind::Deterministic),
            case_id: Some(case.to_string()),
            message: one_line(&msg),
        })
    });
    let mode_reps: Vec<(Mode, usize)> = spec
        .modes
        .iter()
        .flat_map(|&m| reps.clone().map(move |r| (m, r)))
        .collect();
    let premodified: BTreeMap<(Mode, usize), std::result::Result<Vec<Option<f64>>, String>> = mode_reps
        .par_iter()
        .map(|&(m, r)| ((m, r), premodified_reference(model, det_log, spec, m, r)))
        .collect();

    let pooled = |mode: Mode, nt: usize, pf: f64, tp: f64, profile: ProfileKind| -> Vec<Option<f64>> {
        reps.clone()
            .flat_map(|r| results[&Point::new(mode, nt, pf, tp, r)][&profile].clone())
            .collect()
    };
    let row = |series: String, x: f64, costs: &[Option<f64>]| {
        let (mean_cost, std_cost, traces, failures) = aggregate(costs.iter());
        (series, x, mean_cost, std_cost, traces, failures)
    };

    let mut fig4 = Vec::new();
    for &mode in &spec.modes {
        for &nt in &spec.n_parallel {
            for &profile in &spec.profiles {
                for &pf in &spec.original_probs {
                    let (series, x, mean_cost, std_cost, traces, failures) =
                        row(format!("{mode} N_t={nt} {profile}"), pf, &pooled(mode, nt, pf, 1.0, profile));
                    fig4.push(ReportRow {
                        series,
                        x,
                        mode,
                        n_parallel: Some(nt),
                        original_prob: pf,
                        uncertain_portion: Some(1.0),
                        length_group: None,
                        profile,
                        mean_cost,
                        std_cost,
                        traces,
                        failures,
                    });
                }
            }
        }
        let original_pooled: Vec<Option<f64>> = reps.clone().flat_map(|_| original.clone()).collect();
        let premodified_pooled: Vec<Option<f64>> = reps
            .clone()
            .flat_map(|r| match &premodified[&(mode, r)] {
                Ok(c) => c.clone(),
                Err(_) => vec![None; det_log.traces.len()],
            })
            .collect();
        for (variant, costs) in [("original", &original_pooled), ("premodified", &premodified_pooled)] {
            let (series, x, mean_cost, std_cost, traces, failures) =
                row(format!("{mode} reference ({variant})"), 1.0, costs);
            fig4.push(ReportRow {
                series,
                x,
                mode,
                n_parallel: None,
                original_prob: 1.0,
                uncertain_portion: None,
                length_group: None,
                profile: ProfileKind::Deterministic,
                mean_cost,
                std_cost,
                traces,
                failures,
            });
        }
    }

    let mut fig5 = Vec::new();
    for &mode in &spec.modes {
        for &profile in &spec.profiles {
            // the lower bound ignores probabilities, so one series per mode
            let pfs: &[f64] = if profile == ProfileKind::LowerBound {
                &spec.original_probs[..1]
            } else {
                &spec.original_probs
            };
            for &pf in pfs {
                let series = if profile == ProfileKind::LowerBound {
                    format!("{mode} {profile}")
                } else {
                    format!("{mode} P_f={} {profile}", format_number(pf))
                };
                for &tp in &spec.uncertain_portions {
                    let (series, x, mean_cost, std_cost, traces, failures) =
                        row(series.clone(), tp, &pooled(mode, nt0, pf, tp, profile));
                    fig5.push(ReportRow {
                        series,
                        x,
                        mode,
                        n_parallel: Some(nt0),
                        original_prob: pf,
                        uncertain_portion: Some(tp),
                        length_group: None,
                        profile,
                        mean_cost,
                        std_cost,
                        traces,
                        failures,
                    });
                }
            }
        }
    }

    let groups: Vec<usize> = det_log
        .traces
        .iter()
        .map(|t| length_group(t.len(), &spec.length_edges))
        .collect();
    let mut fig6 = Vec::new();
    for &mode in &spec.modes {
        for &profile in &spec.profiles {
            for &pf in &spec.original_probs {
                let all = pooled(mode, nt0, pf, 1.0, profile);
                for g in 0..spec.length_edges.len() {
                    let members: Vec<Option<f64>> = all
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| groups[i % groups.len()] == g)
                        .map(|(_, c)| *c)
                        .collect();
                    if members.is_empty() {
                        continue;
                    }
                    let (series, x, mean_cost, std_cost, traces, failures) = row(
                        format!("{mode} P_f={} {profile}", format_number(pf)),
                        (g + 1) as f64,
                        &members,
                    );
                    fig6.push(ReportRow {
                        series,
                        x,
                        mode,
                        n_parallel: Some(nt0),
                        original_prob: pf,
                        uncertain_portion: Some(1.0),
                        length_group: Some(group_label(&spec.length_edges, g)),
                        profile,
                        mean_cost,
                        std_cost,
                        traces,
                        failures,
                    });
                }
            }
        }
    }

    let checks = self_checks(spec, &results, &premodified);
    Ok(SweepReport {
        fig4,
        fig5,
        fig6,
        errors,
        checks,
    })
}

fn self_checks(
    spec: &SweepSpec,
    results: &BTreeMap<Point, Costs>,
    premodified: &BTreeMap<(Mode, usize), std::result::Result<Vec<Option<f64>>, String>>,
) -> Vec<CheckRow> {
    let mut checks = Vec::new();

    if spec.profiles.contains(&ProfileKind::LowerBound) {
        let (mut pairs, mut violations) = (0usize, Vec::new());
        for (p, costs) in results {
            let (Some(lb), Some(st)) = (costs.get(&ProfileKind::LowerBound), costs.get(&ProfileKind::Stochastic)) else {
                continue;
            };
            for (i, (l, s)) in lb.iter().zip(st).enumerate() {
                if let (Some(l), Some(s)) = (l, s) {
                    pairs += 1;
                    if *l > s + 1e-12 {
                        violations.push(format!("{p:?} trace #{i}: {l} > {s}"));
                    }
                }
            }
        }
        checks.push(check("dominance", pairs, violations));

        let (mut series, mut violations) = (0usize, Vec::new());
        let nt0 = spec.primary_n_parallel();
        let mut portions = spec.uncertain_portions.clone();
        portions.sort_by(f64::total_cmp);
        for &mode in &spec.modes {
            for &pf in &spec.original_probs {
                for rep in 0..spec.repetitions {
                    let lbs: Vec<&Vec<Option<f64>>> = portions
                        .iter()
                        .map(|&tp| &results[&Point::new(mode, nt0, pf, tp, rep)][&ProfileKind::LowerBound])
                        .collect();
                    for i in 0..lbs[0].len() {
                        series += 1;
                        let costs: Vec<f64> = lbs.iter().filter_map(|c| c[i]).collect();
                        if costs.windows(2).any(|w| w[1] > w[0] + 1e-9) {
                            violations.push(format!("{mode} P_f={pf} rep {rep} trace #{i}: {costs:?}"));
                        }
                    }
                }
            }
        }
        checks.push(check("lower-bound-monotone", series, violations));
    }

    let (mut compared, mut violations) = (0usize, Vec::new());
    for &mode in &spec.modes {
        for rep in 0..spec.repetitions {
            let stochastic = &results[&Point::new(mode, spec.primary_n_parallel(), 1.0, 1.0, rep)][&ProfileKind::Stochastic];
            match &premodified[&(mode, rep)] {
                Ok(reference) => {
                    for (i, (s, d)) in stochastic.iter().zip(reference).enumerate() {
                        compared += 1;
                        if s.map(f64::to_bits) != d.map(f64::to_bits) {
                            violations.push(format!("{mode} rep {rep} trace #{i}: {s:?} vs {d:?}"));
                        }
                    }
                }
                Err(e) => violations.push(format!("{mode} rep {rep}: {e}")),
            }
        }
    }
    checks.push(check("deterministic-equivalence", compared, violations));
    checks
}

fn check(name: &'static str, checked: usize, violations: Vec<String>) -> CheckRow {
    CheckRow {
        check: name,
        passed: violations.is_empty(),
        detail: match violations.first() {
            None => format!("{checked} checked"),
            Some(first) => one_line(&format!("{} of {checked} violated; first: {first}", violations.len())),
        },
    }
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| CliError::Usage(format!("csv buffer: {e}")))
}

impl SweepReport {
    pub fn all_checks_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn figure_csv(rows: &[ReportRow]) -> Result<Vec<u8>> {
        csv_bytes(&REPORT_HEADER, rows.iter().map(ReportRow::record))
    }

    pub fn errors_csv(&self) -> Result<Vec<u8>> {
        csv_bytes(
            &["mode", "n_t", "p_f", "t_p", "seed", "profile", "case_id", "error"],
            self.errors.iter().map(|e| {
                vec![
                    e.mode.to_string(),
                    e.n_parallel.to_string(),
                    format_number(e.original_prob),
                    format_number(e.uncertain_portion),
                    e.seed.to_string(),
                    e.profile.map_or_else(|| "-".to_string(), |p| p.to_string()),
                    e.case_id.clone().unwrap_or_else(|| "-".to_string()),
                    e.message.clone(),
                ]
            }),
        )
    }

    pub fn checks_csv(&self) -> Result<Vec<u8>> {
        csv_bytes(
            &["check", "status", "detail"],
            self.checks.iter().map(|c| {
                vec![
                    c.check.to_string(),
                    if c.passed { "PASS" } else { "FAIL" }.to_string(),
                    c.detail.clone(),
                ]
            }),
        )
    }

    /// Writes fig4.csv, fig5.csv, fig6.csv, errors.csv and self_checks.csv.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        write_file(&dir.join("fig4.csv"), &Self::figure_csv(&self.fig4)?)?;
        write_file(&dir.join("fig5.csv"), &Self::figure_csv(&self.fig5)?)?;
        write_file(&dir.join("fig6.csv"), &Self::figure_csv(&self.fig6)?)?;
        write_file(&dir.join("errors.csv"), &self.errors_csv()?)?;
        write_file(&dir.join("self_checks.csv"), &self.checks_csv()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use stocon_core::synth::sequence_net;

    fn toy() -> (SystemNet, StochasticLog) {
        let model = sequence_net(&["A", "B", "C", "D"]);
        let log = StochasticLog::new(vec![
            StochasticTrace::deterministic("1", ["A", "B", "C", "D"]),
            StochasticTrace::deterministic("2", ["A", "C", "B", "D", "E"]),
            StochasticTrace::deterministic("3", ["A", "B", "D"]),
        ])
        .unwrap();
        (model, log)
    }

    fn small_spec() -> SweepSpec {
        SweepSpec {
            uncertain_portions: vec![0.0, 0.5, 1.0],
            n_parallel: vec![2, 3],
            modes: vec![Mode::None, Mode::Relabel],
            seed: 9,
            repetitions: 2,
            ..SweepSpec::default()
        }
    }

    #[test]
    fn grid_points() {
        let g = portion_grid(0.05).unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[6], 0.3);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert_eq!(portion_grid(0.3).unwrap(), vec![0.0, 0.3, 0.6, 0.9]);
        assert!(portion_grid(0.0).is_err());
    }

    #[test]
    fn report_shape_and_checks() {
        let (model, log) = toy();
        let spec = small_spec();
        let report = run_sweep(&model, &log, &spec).unwrap();
        // 2 modes x (2 N_t x 2 profiles x 3 P_f + 2 references)
        assert_eq!(report.fig4.len(), 2 * (2 * 2 * 3 + 2));
        // 2 modes x (3 stochastic series + 1 lower-bound series) x 3 T_p
        assert_eq!(report.fig5.len(), 2 * 4 * 3);
        assert!(report.fig5.iter().all(|r| r.traces + r.failures == 2 * log.traces.len()));
        // every trace has length < 10: one group
        assert_eq!(report.fig6.len(), 2 * 2 * 3);
        assert!(report.errors.is_empty(), "{:?}", report.errors);
        assert!(report.all_checks_passed(), "{:?}", report.checks);
        let reference = report
            .fig4
            .iter()
            .find(|r| r.series == "none reference (original)")
            .unwrap();
        assert_eq!(reference.mean_cost, Some((0.0 + 3.0 + 1.0) / 3.0));
    }

    #[test]
    fn output_is_stable() {
        let (model, log) = toy();
        let spec = small_spec();
        let a = run_sweep(&model, &log, &spec).unwrap();
        let b = run_sweep(&model, &log, &spec).unwrap();
        assert_eq!(SweepReport::figure_csv(&a.fig5).unwrap(), SweepReport::figure_csv(&b.fig5).unwrap());
        let text = String::from_utf8(SweepReport::figure_csv(&a.fig4).unwrap()).unwrap();
        assert!(text.starts_with("series,x,mode,n_t,p_f,t_p,length_group,profile,mean_cost,std_cost,traces,failures\n"));
    }

    #[test]
    fn failures_are_recorded_not_fatal() {
        let (mut model, log) = toy();
        model.final_marking = stocon_core::net::Marking::from_places(["p0", "p4"]);
        let report = run_sweep(&model, &log, &small_spec()).unwrap();
        assert!(!report.errors.is_empty());
        assert!(report.fig4.iter().all(|r| r.mean_cost.is_none()));
        assert!(SweepReport::figure_csv(&report.fig4).is_ok());
    }

    #[test]
    fn rejects_stochastic_input() {
        let (model, mut log) = toy();
        log.traces[0].events[0].distribution = vec![("A".into(), 0.5), ("B".into(), 0.5)];
        assert!(run_sweep(&model, &log, &small_spec()).is_err());
    }
}
