//! Time-budgeted runs, persistent run records and the break-even report.
//!
//! Classical runs are timed; quantum runs are charged `n_shots / rate`
//! seconds of modelled hardware time, never wall-clock time.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::exact::is_independent;
use crate::exec::derive_seed;
use crate::graph::{GraphMeta, UnitDiskGraph};
use crate::heuristic::{self, HeuristicConfig};
use crate::rydberg::ShotDistribution;
use crate::stats::{expected_max_ratio, mean_ratio, ExtrapFit, Prediction};

pub const DEFAULT_REPETITION_RATE_HZ: f64 = 5.0;
pub const BUDGET_LONG_S: f64 = 2.0;
pub const BUDGET_SHORT_S: f64 = 0.2;
/// A frontier vertex is a corner candidate if it reaches this fraction of
/// the largest reachable size.
pub const CORNER_REACH_FRACTION: f64 = 0.9;
/// Quantile reported for sub-instance sizes.
pub const SUBINSTANCE_QUANTILE: f64 = 0.9;

pub const REPORT_HEADER: &str = "quantum time is modelled as n_shots / repetition_rate \
(hardware time, not simulation wall-clock); classical time is measured on this machine";

/// Which algorithm produced a record. Serialised as `heuristic-<d>`,
/// `quantum-<gamma>` or `exact`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Algo {
    Heuristic { d: usize },
    Quantum { gamma: f64 },
    Exact,
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algo::Heuristic { d } => write!(f, "heuristic-{d}"),
            Algo::Quantum { gamma } => write!(f, "quantum-{gamma}"),
            Algo::Exact => f.write_str("exact"),
        }
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Usage(format!("unknown algorithm id {s:?}"));
        if s == "exact" {
            return Ok(Algo::Exact);
        }
        if let Some(d) = s.strip_prefix("heuristic-") {
            return Ok(Algo::Heuristic {
                d: d.parse().map_err(|_| bad())?,
            });
        }
        if let Some(g) = s.strip_prefix("quantum-") {
            return Ok(Algo::Quantum {
                gamma: g.parse().map_err(|_| bad())?,
            });
        }
        Err(bad())
    }
}

impl From<Algo> for String {
    fn from(a: Algo) -> String {
        a.to_string()
    }
}

impl TryFrom<String> for Algo {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimingMode {
    /// Only the heuristic itself: graph manipulation and local solves.
    #[default]
    SolverOnly,
    /// The heuristic plus validation and scoring of its output.
    WallClock,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetPolicy {
    pub budget_s: f64,
    pub repetition_rate_hz: f64,
    pub timing: TimingMode,
}

impl BudgetPolicy {
    pub fn new(budget_s: f64) -> Result<Self> {
        let p = BudgetPolicy {
            budget_s,
            repetition_rate_hz: DEFAULT_REPETITION_RATE_HZ,
            timing: TimingMode::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.budget_s > 0.0 && self.budget_s.is_finite()) {
            return usage(format!("budget must be positive, got {}", self.budget_s));
        }
        if !(self.repetition_rate_hz > 0.0 && self.repetition_rate_hz.is_finite()) {
            return usage(format!(
                "repetition rate must be positive, got {}",
                self.repetition_rate_hz
            ));
        }
        Ok(())
    }

    /// `floor(budget * rate)`, guarded against products like `0.999...`.
    pub fn quantum_shots(&self) -> u64 {
        (self.budget_s * self.repetition_rate_hz * (1.0 + 1e-12)).floor() as u64
    }
}

/// One persisted run. `ratio` is absent when the optimum is unknown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algo: Algo,
    pub graph_id: String,
    pub n: usize,
    pub seed: u64,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_time_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runs_completed: Option<u64>,
    #[serde(default)]
    pub over_budget: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subinstance_sizes: Vec<usize>,
    pub timestamp_ms: u64,
}

impl RunRecord {
    pub fn new(algo: Algo, graph_id: impl Into<String>, n: usize, seed: u64) -> Self {
        RunRecord {
            algo,
            graph_id: graph_id.into(),
            n,
            seed,
            params: BTreeMap::new(),
            wall_ms: None,
            model_time_s: None,
            n_shots: None,
            runs_completed: None,
            over_budget: false,
            solution_size: None,
            ratio: None,
            subinstance_sizes: Vec::new(),
            timestamp_ms: now_ms(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.ratio {
            if !(0.0..=1.0 + 1e-12).contains(&r) {
                return usage(format!("ratio {r} outside [0, 1]"));
            }
        }
        Ok(())
    }
}

pub fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// Write records as JSON lines, replacing the file.
pub fn write_records(path: impl AsRef<Path>, records: &[RunRecord]) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Read JSON-lines records; blank lines are skipped.
pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
    parse_records(BufReader::new(std::fs::File::open(path)?))
}

pub fn parse_records(reader: impl BufRead) -> Result<Vec<RunRecord>> {
    let mut out = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r: RunRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: k + 1,
            msg: e.to_string(),
        })?;
        out.push(r);
    }
    Ok(out)
}

/// Result of one run inside a budgeted loop.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub size: usize,
    pub ratio: Option<f64>,
    /// Seconds charged against the budget.
    pub secs: f64,
    pub subinstance_sizes: Vec<usize>,
    /// Position of the run in its session.
    pub run_index: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopSummary {
    /// Best completed run, or the first run if none completed.
    pub best: RunOutcome,
    /// Runs that finished within the budget.
    pub completed: u64,
    /// Runs started, including one that overran.
    pub attempted: u64,
    /// Even the first run exceeded the budget.
    pub over_budget: bool,
    /// Total charged seconds over all attempted runs.
    pub spent_s: f64,
    /// Charged seconds of the last attempted run.
    pub last_run_s: f64,
    /// Best-so-far size after each completed run.
    pub best_sizes: Vec<usize>,
}

/// Repeat `run_once(k)` while the mean run time still fits into what is
/// left of the budget. The first run is always made.
pub fn budgeted_loop(
    budget_s: f64,
    mut run_once: impl FnMut(u64) -> Result<RunOutcome>,
) -> Result<LoopSummary> {
    if !(budget_s > 0.0) {
        return usage("budget must be positive");
    }
    let first = run_once(0)?;
    let mut spent = first.secs;
    let mut last = first.secs;
    let over_budget = first.secs > budget_s;
    let mut completed = u64::from(!over_budget);
    let mut attempted = 1;
    let mut best_sizes = if over_budget {
        Vec::new()
    } else {
        vec![first.size]
    };
    let mut best = first;
    while !over_budget && spent + spent / attempted as f64 <= budget_s {
        let out = run_once(attempted)?;
        attempted += 1;
        spent += out.secs;
        last = out.secs;
        if spent > budget_s {
            break;
        }
        completed += 1;
        if better(&out, &best) {
            best = out;
        }
        best_sizes.push(best.size);
    }
    Ok(LoopSummary {
        best,
        completed,
        attempted,
        over_budget,
        spent_s: spent,
        last_run_s: last,
        best_sizes,
    })
}

fn better(a: &RunOutcome, b: &RunOutcome) -> bool {
    match (a.ratio, b.ratio) {
        (Some(x), Some(y)) if x != y => x > y,
        _ => a.size > b.size,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalSession {
    pub record: RunRecord,
    pub summary: LoopSummary,
}

/// Run the heuristic with hop radius `d` repeatedly within the budget and
/// keep the best completed run. Run `k` uses `derive_seed(seed, k)`.
pub fn run_classical_budgeted(
    g: &UnitDiskGraph,
    graph_id: &str,
    d: usize,
    policy: &BudgetPolicy,
    seed: u64,
    exact_size: Option<usize>,
) -> Result<ClassicalSession> {
    policy.validate()?;
    let summary = budgeted_loop(policy.budget_s, |k| {
        let run_seed = derive_seed(seed, k);
        let started = Instant::now();
        let (bits, trace) = heuristic::run(g, HeuristicConfig { d, seed: run_seed });
        let solver_secs = started.elapsed().as_secs_f64();
        if !is_independent(g, &bits)? {
            return Err(Error::Usage("heuristic produced a dependent set".into()));
        }
        let size = bits.hamming_weight();
        let ratio = match exact_size {
            Some(0) => Some(1.0),
            Some(m) => Some(size as f64 / m as f64),
            None => None,
        };
        let secs = match policy.timing {
            TimingMode::SolverOnly => solver_secs,
            TimingMode::WallClock => started.elapsed().as_secs_f64(),
        };
        Ok(RunOutcome {
            size,
            ratio,
            secs,
            subinstance_sizes: trace.subinstance_sizes(),
            run_index: k,
        })
    })?;
    let mut record = RunRecord::new(Algo::Heuristic { d }, graph_id, g.n(), seed);
    record.params.insert("d".into(), d as f64);
    record.params.insert("budget_s".into(), policy.budget_s);
    record
        .params
        .insert("best_run_index".into(), summary.best.run_index as f64);
    record.wall_ms = Some(summary.spent_s * 1e3);
    record.runs_completed = Some(summary.completed);
    record.over_budget = summary.over_budget;
    record.solution_size = Some(summary.best.size);
    record.ratio = summary.best.ratio;
    record.subinstance_sizes = summary.best.subinstance_sizes.clone();
    Ok(ClassicalSession { record, summary })
}

/// Charge `floor(budget * rate)` shots of a simulated distribution.
pub fn run_quantum_budgeted(
    dist: &ShotDistribution,
    graph_id: &str,
    policy: &BudgetPolicy,
    exact_size: usize,
) -> Result<RunRecord> {
    policy.validate()?;
    let shots = policy.quantum_shots();
    if shots == 0 {
        return Err(Error::Budget(format!(
            "budget {} s at {} Hz allows no shot",
            policy.budget_s, policy.repetition_rate_hz
        )));
    }
    let mean = mean_ratio(dist, exact_size)?;
    let best = expected_max_ratio(dist, shots, exact_size)?;
    let p = &dist.provenance;
    let mut record = RunRecord::new(Algo::Quantum { gamma: p.gamma }, graph_id, dist.n, p.seed);
    record.params.insert("gamma".into(), p.gamma);
    record.params.insert("t_f".into(), p.t_f);
    record.params.insert("mean_ratio".into(), mean);
    record
        .params
        .insert("repetition_rate_hz".into(), policy.repetition_rate_hz);
    record.params.insert("budget_s".into(), policy.budget_s);
    record.n_shots = Some(shots);
    record.model_time_s = Some(shots as f64 / policy.repetition_rate_hz);
    record.ratio = Some(best);
    Ok(record)
}

/// One classical operating point: the largest size the heuristic with hop
/// radius `d` handles within the budget, and its large-size ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalPoint {
    pub d: usize,
    pub max_n: u64,
    pub ratio: f64,
}

/// Vertex of the classical frontier staircase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierStep {
    pub d: usize,
    pub max_n: u64,
    pub ratio: f64,
}

/// Staircase `R(n) = max { ratio_d : max_n_d >= n }`, as its vertices in
/// ascending `max_n`; ratios are strictly decreasing along it.
pub fn classical_frontier(points: &[ClassicalPoint]) -> Vec<FrontierStep> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| b.max_n.cmp(&a.max_n).then(b.ratio.total_cmp(&a.ratio)));
    let mut steps = Vec::new();
    let mut best = f64::NEG_INFINITY;
    for p in sorted {
        if p.ratio > best {
            best = p.ratio;
            steps.push(FrontierStep {
                d: p.d,
                max_n: p.max_n,
                ratio: p.ratio,
            });
        }
    }
    steps.reverse();
    steps
}

/// Classical ratio required at size `n`, or `None` beyond the frontier.
pub fn frontier_ratio(steps: &[FrontierStep], n: u64) -> Option<f64> {
    steps.iter().find(|s| s.max_n >= n).map(|s| s.ratio)
}

/// Highest-ratio frontier vertex reaching `CORNER_REACH_FRACTION` of the
/// largest reachable size.
pub fn frontier_corner(steps: &[FrontierStep]) -> Option<FrontierStep> {
    let reach = steps.iter().map(|s| s.max_n).max()?;
    steps
        .iter()
        .filter(|s| s.max_n as f64 >= CORNER_REACH_FRACTION * reach as f64)
        .max_by(|a, b| a.ratio.total_cmp(&b.ratio))
        .copied()
}

/// Extrapolated quantum ratio for one noise level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumInput {
    pub gamma: f64,
    pub fit: ExtrapFit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumPoint {
    pub prediction: Prediction,
    /// Classical frontier ratio at the same size, if within reach.
    pub classical_ratio: Option<f64>,
    /// The quantum estimate exceeds the classical frontier, or the size is
    /// beyond classical reach.
    pub beats_classical: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumLine {
    pub gamma: f64,
    pub n_shots: u64,
    pub interval_method: String,
    pub points: Vec<QuantumPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakevenReport {
    pub header: String,
    pub budget_s: f64,
    pub repetition_rate_hz: f64,
    pub classical: Vec<ClassicalPoint>,
    pub frontier: Vec<FrontierStep>,
    pub corner: Option<FrontierStep>,
    pub quantum: Vec<QuantumLine>,
}

/// Sizes at which quantum lines are evaluated: the frontier vertices and a
/// logarithmic grid up to twice the classical reach.
pub fn report_sizes(steps: &[FrontierStep]) -> Vec<u64> {
    let top = steps
        .iter()
        .map(|s| s.max_n)
        .max()
        .unwrap_or(10_000)
        .max(10)
        * 2;
    let mut sizes: Vec<u64> = steps.iter().map(|s| s.max_n).collect();
    let mut n = 10.0f64;
    while n <= top as f64 {
        sizes.push(n.round() as u64);
        n *= 10f64.powf(0.25);
    }
    sizes.sort_unstable();
    sizes.dedup();
    sizes
}

pub fn breakeven_report(
    classical: &[ClassicalPoint],
    quantum: &[QuantumInput],
    policy: &BudgetPolicy,
) -> Result<BreakevenReport> {
    policy.validate()?;
    if classical.is_empty() {
        return usage("no classical points");
    }
    let frontier = classical_frontier(classical);
    let shots = policy.quantum_shots().max(1);
    let sizes = report_sizes(&frontier);
    let mut lines = Vec::with_capacity(quantum.len());
    for q in quantum {
        let mut points = Vec::with_capacity(sizes.len());
        for &n in &sizes {
            let prediction = q.fit.predict(n as f64, shots)?;
            let classical_ratio = frontier_ratio(&frontier, n);
            points.push(QuantumPoint {
                prediction,
                classical_ratio,
                beats_classical: classical_ratio.is_none_or(|c| prediction.ratio > c),
            });
        }
        lines.push(QuantumLine {
            gamma: q.gamma,
            n_shots: shots,
            interval_method: q.fit.interval_method.clone(),
            points,
        });
    }
    let mut classical = classical.to_vec();
    classical.sort_by_key(|p| p.d);
    Ok(BreakevenReport {
        header: REPORT_HEADER.into(),
        budget_s: policy.budget_s,
        repetition_rate_hz: policy.repetition_rate_hz,
        corner: frontier_corner(&frontier),
        classical,
        frontier,
        quantum: lines,
    })
}

impl BreakevenReport {
    /// Plot-ready rows: `series,label,n,ratio,lower,upper`.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# {}\nseries,label,n,ratio,lower,upper\n", self.header);
        for p in &self.classical {
            out.push_str(&format!(
                "classical,d={},{},{:.6},,\n",
                p.d, p.max_n, p.ratio
            ));
        }
        for s in &self.frontier {
            out.push_str(&format!(
                "frontier,d={},{},{:.6},,\n",
                s.d, s.max_n, s.ratio
            ));
        }
        if let Some(c) = &self.corner {
            out.push_str(&format!("corner,d={},{},{:.6},,\n", c.d, c.max_n, c.ratio));
        }
        for l in &self.quantum {
            for p in &l.points {
                let q = &p.prediction;
                out.push_str(&format!(
                    "quantum,gamma={},{},{:.6},{:.6},{:.6}\n",
                    l.gamma, q.n_atoms, q.ratio, q.lower, q.upper
                ));
            }
        }
        out
    }
}

/// Classical operating points from budgeted records. `max_n` is the largest
/// size with a run inside the budget; `ratio` is the mean ratio at the
/// largest size that has ratios.
pub fn classical_points_from_records(records: &[RunRecord]) -> Vec<ClassicalPoint> {
    let mut by_d: BTreeMap<usize, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        if let Algo::Heuristic { d } = r.algo {
            by_d.entry(d).or_default().push(r);
        }
    }
    let mut out = Vec::new();
    for (d, rs) in by_d {
        let Some(max_n) = rs
            .iter()
            .filter(|r| !r.over_budget)
            .map(|r| r.n as u64)
            .max()
        else {
            continue;
        };
        let Some(top) = rs.iter().filter(|r| r.ratio.is_some()).map(|r| r.n).max() else {
            continue;
        };
        let ratios: Vec<f64> = rs
            .iter()
            .filter(|r| r.n == top)
            .filter_map(|r| r.ratio)
            .collect();
        out.push(ClassicalPoint {
            d,
            max_n,
            ratio: ratios.iter().sum::<f64>() / ratios.len() as f64,
        });
    }
    out
}

/// Linear-interpolation quantile of unsorted data; `None` if empty.
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(v[lo] + (pos - lo as f64) * (v[hi] - v[lo]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub algo: Algo,
    pub n: usize,
    pub count: usize,
    pub mean_ratio: Option<f64>,
    pub std_err: Option<f64>,
    pub mean_size: Option<f64>,
    /// Quantile of the pooled sub-instance sizes.
    pub subinstance_q90: Option<f64>,
}

/// Aggregate records per algorithm id and size.
pub fn corpus_stats(records: &[RunRecord]) -> Vec<CorpusSummary> {
    let mut groups: BTreeMap<(String, usize), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.algo.to_string(), r.n)).or_default().push(r);
    }
    groups
        .into_values()
        .map(|rs| {
            let ratios: Vec<f64> = rs.iter().filter_map(|r| r.ratio).collect();
            let sizes: Vec<f64> = rs
                .iter()
                .filter_map(|r| r.solution_size.map(|s| s as f64))
                .collect();
            let pooled: Vec<f64> = rs
                .iter()
                .flat_map(|r| r.subinstance_sizes.iter().map(|&s| s as f64))
                .collect();
            let (mean_ratio, std_err) = if ratios.is_empty() {
                (None, None)
            } else {
                let (m, s) = crate::anneal::mean_std(&ratios);
                (Some(m), Some(s / (ratios.len() as f64).sqrt()))
            };
            CorpusSummary {
                algo: rs[0].algo,
                n: rs[0].n,
                count: rs.len(),
                mean_ratio,
                std_err,
                mean_size: (!sizes.is_empty())
                    .then(|| sizes.iter().sum::<f64>() / sizes.len() as f64),
                subinstance_q90: quantile(&pooled, SUBINSTANCE_QUANTILE),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestGraph {
    pub id: String,
    pub path: String,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<GraphMeta>,
}

/// Everything needed to rerun a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionManifest {
    pub created_ms: u64,
    pub records: String,
    pub policy: BudgetPolicy,
    pub graphs: Vec<ManifestGraph>,
    pub seeds: Vec<u64>,
    pub ds: Vec<usize>,
}

impl SessionManifest {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rydberg::Provenance;

    fn outcome(size: usize, secs: f64) -> RunOutcome {
        RunOutcome {
            size,
            ratio: Some(size as f64 / 10.0),
            secs,
            subinstance_sizes: vec![],
            run_index: 0,
        }
    }

    #[test]
    fn algo_ids_round_trip() {
        for a in [
            Algo::Heuristic { d: 5 },
            Algo::Quantum { gamma: 0.3 },
            Algo::Exact,
        ] {
            assert_eq!(a.to_string().parse::<Algo>().unwrap(), a);
        }
        assert_eq!(Algo::Quantum { gamma: 3.0 }.to_string(), "quantum-3");
        assert!("heuristic-x".parse::<Algo>().is_err());
        assert!("nope".parse::<Algo>().is_err());
    }

    #[test]
    fn shots_from_budget() {
        assert_eq!(BudgetPolicy::new(0.2).unwrap().quantum_shots(), 1);
        assert_eq!(BudgetPolicy::new(2.0).unwrap().quantum_shots(), 10);
        assert!(BudgetPolicy::new(0.0).is_err());
        let p = BudgetPolicy {
            repetition_rate_hz: 0.0,
            ..BudgetPolicy::new(1.0).unwrap()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn loop_respects_budget_and_counts() {
        let s = budgeted_loop(1.0, |k| Ok(outcome(k as usize % 7, 0.1))).unwrap();
        assert_eq!(s.completed, 10);
        assert!(!s.over_budget);
        assert!(s.spent_s <= 1.0 + s.last_run_s + 1e-12);
        assert_eq!(s.best.size, 6);
        assert!(s.best_sizes.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn overrunning_run_is_not_counted() {
        let times = [0.3, 0.3, 0.9];
        let s = budgeted_loop(1.0, |k| Ok(outcome(5 - k as usize, times[k as usize]))).unwrap();
        assert_eq!(s.attempted, 3);
        assert_eq!(s.completed, 2);
        assert_eq!(s.best.size, 5);
        assert!(s.spent_s <= 1.0 + s.last_run_s);
    }

    #[test]
    fn first_run_over_budget_is_flagged() {
        let s = budgeted_loop(0.5, |_| Ok(outcome(3, 2.0))).unwrap();
        assert!(s.over_budget);
        assert_eq!(s.completed, 0);
        assert_eq!(s.attempted, 1);
        assert_eq!(s.best.size, 3);
    }

    #[test]
    fn quantum_record_fields() {
        let d = ShotDistribution::new(
            2,
            vec![0, 1, 2],
            vec![0.5, 0.25, 0.25],
            vec![0.0, -1.0, -1.0],
            Provenance {
                gamma: 0.3,
                t_f: 1.5,
                ..Default::default()
            },
        )
        .unwrap();
        let r = run_quantum_budgeted(&d, "g", &BudgetPolicy::new(0.2).unwrap(), 1).unwrap();
        assert_eq!(r.n_shots, Some(1));
        assert_eq!(r.ratio, Some(r.params["mean_ratio"]));
        let r = run_quantum_budgeted(&d, "g", &BudgetPolicy::new(2.0).unwrap(), 1).unwrap();
        assert_eq!(r.n_shots, Some(10));
        assert_eq!(r.model_time_s, Some(2.0));
        assert!(r.ratio.unwrap() >= r.params["mean_ratio"]);
        let tiny = BudgetPolicy::new(0.1).unwrap();
        assert!(matches!(
            run_quantum_budgeted(&d, "g", &tiny, 1),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn records_round_trip_through_json_lines() {
        let mut r = RunRecord::new(Algo::Quantum { gamma: 0.3 }, "graph-7", 12, 99);
        r.params.insert("t_f".into(), 0.1 + 0.2);
        r.ratio = Some(2.0 / 3.0);
        r.model_time_s = Some(0.2);
        let mut c = RunRecord::new(Algo::Heuristic { d: 5 }, "graph-7", 12, 1);
        c.subinstance_sizes = vec![3, 4, 5];
        c.over_budget = true;
        let text = [&r, &c]
            .iter()
            .map(|x| serde_json::to_string(x).unwrap())
            .collect::<Vec<_>>()
            .join("\n");
        let back = parse_records(text.as_bytes()).unwrap();
        assert_eq!(back, vec![r, c]);
        assert!(matches!(
            parse_records("{".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn staircase_and_corner() {
        let pts = [
            ClassicalPoint {
                d: 0,
                max_n: 5000,
                ratio: 0.8,
            },
            ClassicalPoint {
                d: 5,
                max_n: 8500,
                ratio: 0.93,
            },
            ClassicalPoint {
                d: 8,
                max_n: 8000,
                ratio: 0.95,
            },
            ClassicalPoint {
                d: 15,
                max_n: 400,
                ratio: 0.98,
            },
        ];
        let f = classical_frontier(&pts);
        let ds: Vec<usize> = f.iter().map(|s| s.d).collect();
        assert_eq!(ds, vec![15, 8, 5]);
        assert!(f
            .windows(2)
            .all(|w| w[0].max_n < w[1].max_n && w[0].ratio > w[1].ratio));
        assert_eq!(frontier_ratio(&f, 100), Some(0.98));
        assert_eq!(frontier_ratio(&f, 8001), Some(0.93));
        assert_eq!(frontier_ratio(&f, 9000), None);
        let c = frontier_corner(&f).unwrap();
        assert_eq!((c.max_n, c.ratio), (8000, 0.95));
    }

    #[test]
    fn classical_only_report() {
        let pts = [ClassicalPoint {
            d: 2,
            max_n: 100,
            ratio: 0.9,
        }];
        let r = breakeven_report(&pts, &[], &BudgetPolicy::new(2.0).unwrap()).unwrap();
        assert!(r.quantum.is_empty());
        assert_eq!(r.frontier.len(), 1);
        assert!(r.to_csv().contains("frontier,d=2,100,0.900000"));
        assert!(breakeven_report(&[], &[], &BudgetPolicy::new(2.0).unwrap()).is_err());
    }

    #[test]
    fn quantiles() {
        assert_eq!(quantile(&[4.0; 7], 0.9), Some(4.0));
        assert_eq!(quantile(&[], 0.9), None);
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.5), Some(3.0));
        assert!((quantile(&[0.0, 10.0], 0.9).unwrap() - 9.0).abs() < 1e-12);
    }

    #[test]
    fn corpus_stats_of_one_record() {
        let mut r = RunRecord::new(Algo::Heuristic { d: 3 }, "g", 50, 0);
        r.ratio = Some(0.9);
        r.solution_size = Some(18);
        r.subinstance_sizes = vec![7, 7, 7];
        let s = corpus_stats(std::slice::from_ref(&r));
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].mean_ratio, Some(0.9));
        assert_eq!(s[0].std_err, Some(0.0));
        assert_eq!(s[0].subinstance_q90, Some(7.0));
    }

    #[test]
    fn points_from_records() {
        let mk = |d, n, over, ratio| {
            let mut r = RunRecord::new(Algo::Heuristic { d }, "g", n, 0);
            r.over_budget = over;
            r.ratio = ratio;
            r
        };
        let recs = vec![
            mk(2, 100, false, Some(0.9)),
            mk(2, 100, false, Some(0.8)),
            mk(2, 1000, false, None),
            mk(2, 4000, true, None),
        ];
        let p = classical_points_from_records(&recs);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].max_n, 1000);
        assert!((p[0].ratio - 0.85).abs() < 1e-12);
    }

    #[test]
    fn classical_session_on_small_graph() {
        let g = UnitDiskGraph::generate(30, 2.0, 0.3, 1).unwrap();
        let m = crate::exact::solve_exact(&g).0;
        let s = run_classical_budgeted(&g, "g", 1, &BudgetPolicy::new(0.05).unwrap(), 3, Some(m))
            .unwrap();
        assert!(s.summary.completed >= 1);
        assert!(!s.record.over_budget);
        let r = s.record.ratio.unwrap();
        assert!(r > 0.0 && r <= 1.0);
        assert_eq!(s.record.runs_completed, Some(s.summary.completed));
    }
}
