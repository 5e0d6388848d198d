use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use udmis_core::anneal::{optimize_tf, DEFAULT_MAX_ITERS};
use udmis_core::exact::{is_independent, solve_exact, solve_exact_with_deadline};
use udmis_core::exec::{derive_seed, Backend};
use udmis_core::graph::{Point, UnitDiskGraph};
use udmis_core::harness::{
    breakeven_report, classical_points_from_records, read_records, run_classical_budgeted,
    run_quantum_budgeted, write_records, Algo, BudgetPolicy, ClassicalPoint, ManifestGraph,
    QuantumInput, RunRecord, SessionManifest, TimingMode, DEFAULT_REPETITION_RATE_HZ,
};
use udmis_core::heuristic::{self, HeuristicConfig};
use udmis_core::rydberg::{
    simulate, with_readout, AnnealConfig, NoiseModel, ShotDistribution, SimOptions,
};
use udmis_core::stats::bound::bound_rows_csv;
use udmis_core::stats::corr::DEFAULT_DELTA_R;
use udmis_core::stats::{
    binned_g2, fit_extrapolation, fit_xi, gaussian_bound_check, Aggregate, CorrSample, ExtrapFit,
    ExtrapSample, Prediction,
};

#[derive(Debug, Parser)]
#[command(
    name = "udmis",
    version,
    about = "Unit-disk MIS benchmarking: classical heuristic vs simulated Rydberg annealer"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample random unit-disk graphs and write them as text files.
    GenGraphs(GenGraphs),
    /// Solve maximum independent set exactly.
    SolveExact(SolveExact),
    /// Run the locality heuristic.
    RunHeuristic(RunHeuristic),
    /// Simulate the noisy anneal and emit the final shot distribution.
    Simulate(Simulate),
    /// Optimise the annealing time.
    OptimizeTf(OptimizeTf),
    /// Fit the correlation length over simulated distributions.
    AnalyzeCorr(AnalyzeCorr),
    /// Fit the large-size extrapolation of best-of-N ratios.
    FitExtrap(FitExtrap),
    /// Compare exact best-of-N binomial ratios with the Gaussian estimate.
    BoundCheck(BoundCheck),
    /// Time-budgeted classical sessions and budgeted quantum shots.
    BudgetRun(BudgetRun),
    /// Break-even report from classical points and quantum extrapolations.
    Breakeven(Breakeven),
}

/// A mistake in the invocation or its input files.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Nothing requested fits into the budget.
#[derive(Debug)]
struct Infeasible(String);

impl fmt::Display for Infeasible {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Infeasible {}

fn usage_err(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn exit_code(e: &anyhow::Error) -> u8 {
    use udmis_core::error::Error as E;
    for cause in e.chain() {
        if cause.is::<UsageError>() || cause.is::<serde_json::Error>() {
            return 2;
        }
        if cause.is::<Infeasible>() {
            return 3;
        }
        if let Some(io) = cause.downcast_ref::<std::io::Error>() {
            if io.kind() == std::io::ErrorKind::NotFound {
                return 2;
            }
        }
        if let Some(core) = cause.downcast_ref::<E>() {
            return match core {
                E::Usage(_) | E::Parse { .. } | E::LengthMismatch { .. } | E::Json(_) => 2,
                E::Budget(_)
                | E::Timeout
                | E::GenerationFailed { .. }
                | E::BasisTooLarge { .. } => 3,
                E::Io(io) if io.kind() == std::io::ErrorKind::NotFound => 2,
                _ => 1,
            };
        }
    }
    1
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenGraphs(a) => gen_graphs(a),
        Command::SolveExact(a) => solve_exact_cmd(a),
        Command::RunHeuristic(a) => run_heuristic(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::OptimizeTf(a) => optimize_tf_cmd(a),
        Command::AnalyzeCorr(a) => analyze_corr(a),
        Command::FitExtrap(a) => fit_extrap(a),
        Command::BoundCheck(a) => bound_check(a),
        Command::BudgetRun(a) => budget_run(a),
        Command::Breakeven(a) => breakeven(a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => print_stdout(&format!("{text}\n")),
    }
}

/// Write to stdout; a closed pipe downstream is not an error.
fn print_stdout(text: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    emit(out, &serde_json::to_string_pretty(value)?)
}

fn load_graph(path: &Path) -> Result<UnitDiskGraph> {
    UnitDiskGraph::load(path).with_context(|| format!("loading graph {}", path.display()))
}

fn graph_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AggArg {
    Max,
    Mean,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TimingArg {
    SolverOnly,
    WallClock,
}

#[derive(Debug, Args)]
struct SimArgs {
    /// Trajectories per simulation (noiseless runs use one).
    #[arg(long, default_value_t = udmis_core::rydberg::DEFAULT_TRAJECTORIES)]
    ntraj: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Simulate in the full 2^n space instead of the independent-set subspace.
    #[arg(long)]
    full_hilbert: bool,
    /// Run trajectories on one thread.
    #[arg(long)]
    sequential: bool,
}

impl SimArgs {
    fn options(&self) -> SimOptions {
        SimOptions {
            n_traj: self.ntraj,
            seed: self.seed,
            backend: if self.sequential {
                Backend::Sequential
            } else {
                Backend::Parallel
            },
            full_hilbert: self.full_hilbert,
            ..Default::default()
        }
    }
}

#[derive(Debug, Args)]
struct GenGraphs {
    /// Vertex counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// Graphs per vertex count.
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Points per unit area.
    #[arg(long, alias = "density", default_value_t = 2.0)]
    nu: f64,
    /// Minimum distance between points.
    #[arg(long, alias = "exclusion", default_value_t = 0.3)]
    r: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory, created if missing.
    #[arg(long, alias = "out")]
    out_dir: PathBuf,
}

#[derive(Serialize)]
struct GraphFile {
    path: String,
    n: usize,
    edges: usize,
    seed: u64,
}

fn gen_graphs(a: GenGraphs) -> Result<()> {
    fs::create_dir_all(&a.out_dir)?;
    let mut files = Vec::new();
    let mut index = 0;
    for &n in &a.n {
        for k in 0..a.count {
            let seed = derive_seed(a.seed, index);
            index += 1;
            let g = UnitDiskGraph::generate(n, a.nu, a.r, seed)?;
            let path = a.out_dir.join(format!("udg_n{n}_{k}.txt"));
            g.save(&path)?;
            files.push(GraphFile {
                path: path.display().to_string(),
                n,
                edges: g.n_edges(),
                seed,
            });
        }
    }
    emit_json(None, &files)
}

#[derive(Debug, Args)]
struct SolveExact {
    #[arg(long)]
    graph: PathBuf,
    /// Give up after this many milliseconds (exit code 3).
    #[arg(long)]
    timeout_ms: Option<u64>,
}

#[derive(Serialize)]
struct ExactOutput {
    n: usize,
    size: usize,
    witness: Vec<usize>,
    wall_ms: f64,
}

fn solve_exact_cmd(a: SolveExact) -> Result<()> {
    let g = load_graph(&a.graph)?;
    let deadline = match a.timeout_ms {
        Some(0) => return Err(usage_err("--timeout-ms must be positive")),
        Some(t) => Some(Instant::now() + Duration::from_millis(t)),
        None => None,
    };
    let started = Instant::now();
    let (size, set) = solve_exact_with_deadline(&g, deadline)?;
    emit_json(
        None,
        &ExactOutput {
            n: g.n(),
            size,
            witness: set.ones().collect(),
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        },
    )
}

#[derive(Debug, Args)]
struct RunHeuristic {
    #[arg(long)]
    graph: PathBuf,
    /// Hop radius of the exactly solved patches.
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent runs; run `k` uses `derive_seed(seed, k)`.
    #[arg(long, alias = "runs", default_value_t = 1)]
    repeat: u64,
    /// Also solve exactly and report ratios.
    #[arg(long)]
    exact: bool,
    /// Run on one thread even when built with the parallel feature.
    #[arg(long)]
    sequential: bool,
}

/// One RunRecord per run, as JSON lines.
fn run_heuristic(a: RunHeuristic) -> Result<()> {
    if a.repeat == 0 {
        return Err(usage_err("--repeat must be at least 1"));
    }
    let g = load_graph(&a.graph)?;
    let id = graph_id(&a.graph);
    let exact_size = a.exact.then(|| solve_exact(&g).0);
    let backend = if a.sequential {
        Backend::Sequential
    } else {
        Backend::Parallel
    };
    let records = backend
        .map(a.repeat as usize, |k| -> Result<RunRecord> {
            let seed = derive_seed(a.seed, k as u64);
            let started = Instant::now();
            let (bits, trace) = heuristic::run(&g, HeuristicConfig { d: a.d, seed });
            let wall_ms = started.elapsed().as_secs_f64() * 1e3;
            if !is_independent(&g, &bits)? {
                bail!("heuristic returned a dependent set");
            }
            let size = bits.hamming_weight();
            let mut r = RunRecord::new(Algo::Heuristic { d: a.d }, id.as_str(), g.n(), seed);
            r.params.insert("d".into(), a.d as f64);
            r.params.insert("run_index".into(), k as f64);
            r.wall_ms = Some(wall_ms);
            r.runs_completed = Some(1);
            r.solution_size = Some(size);
            r.ratio = exact_size.map(|m| if m == 0 { 1.0 } else { size as f64 / m as f64 });
            r.subinstance_sizes = trace.subinstance_sizes();
            Ok(r)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut text = String::new();
    for r in &records {
        text.push_str(&serde_json::to_string(r)?);
        text.push('\n');
    }
    print_stdout(&text)
}

#[derive(Debug, Args)]
struct Simulate {
    #[arg(long)]
    graph: PathBuf,
    /// Dephasing rate in 1/µs.
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    /// Annealing time in µs.
    #[arg(long, default_value_t = 1.0)]
    tf: f64,
    /// Readout errors `eps,eps'`: P(read 1 | 0) and P(read 0 | 1).
    #[arg(long, value_delimiter = ',')]
    readout: Option<Vec<f64>>,
    #[command(flatten)]
    sim: SimArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A simulated distribution with its summary and the geometry needed
/// downstream.
#[derive(Debug, Serialize, Deserialize)]
struct SimOutput {
    #[serde(flatten)]
    distribution: ShotDistribution,
    /// Mean target energy.
    e_target: f64,
    /// `e_target / -exact_size`.
    ratio: f64,
    exact_size: usize,
    graph: String,
    points: Vec<Point>,
    density: Option<f64>,
}

fn simulate_cmd(a: Simulate) -> Result<()> {
    let g = load_graph(&a.graph)?;
    let (eps, eps_prime) = match a.readout.as_deref() {
        Some(&[e, ep]) => (e, ep),
        Some(_) => return Err(usage_err("--readout takes eps,eps'")),
        None => (0.0, 0.0),
    };
    let noise = NoiseModel::new(a.gamma, eps, eps_prime)?;
    let c = AnnealConfig::with_tf(a.tf)?;
    let opts = a.sim.options();
    let mut dist = simulate(&g, &c, &noise, &opts)?;
    if noise.has_readout_error() {
        dist = with_readout(
            &dist,
            &g,
            &noise,
            c.target_model()?,
            derive_seed(opts.seed, u64::MAX),
        )?;
    }
    let exact_size = solve_exact(&g).0;
    let out = SimOutput {
        e_target: dist.mean_energy(),
        ratio: udmis_core::stats::mean_ratio(&dist, exact_size)?,
        exact_size,
        graph: a.graph.display().to_string(),
        points: g.points().to_vec(),
        density: g.meta().map(|m| m.density),
        distribution: dist,
    };
    emit_json(a.out.as_deref(), &out)
}

#[derive(Debug, Args)]
struct OptimizeTf {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    /// Starting annealing time in µs.
    #[arg(long, default_value_t = 1.0)]
    t0: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    max_iters: usize,
    #[command(flatten)]
    sim: SimArgs,
}

fn optimize_tf_cmd(a: OptimizeTf) -> Result<()> {
    let g = load_graph(&a.graph)?;
    let noise = NoiseModel::dephasing(a.gamma)?;
    let r = optimize_tf(&g, &noise, a.t0, a.max_iters, &a.sim.options())?;
    emit_json(None, &r)
}

#[derive(Debug, Args)]
struct AnalyzeCorr {
    /// Directory of `simulate` outputs (*.json).
    #[arg(long)]
    dists: PathBuf,
    #[arg(long, default_value_t = DEFAULT_DELTA_R)]
    delta_r: f64,
    #[arg(long, value_enum, default_value_t = AggArg::Max)]
    agg: AggArg,
    /// Point density for N*; defaults to the mean density of the inputs.
    #[arg(long)]
    density: Option<f64>,
}

fn json_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

fn analyze_corr(a: AnalyzeCorr) -> Result<()> {
    let files = json_files(&a.dists)?;
    if files.is_empty() {
        return Err(usage_err(format!(
            "no .json distributions in {}",
            a.dists.display()
        )));
    }
    let mut samples = Vec::new();
    let mut densities = Vec::new();
    for f in &files {
        let text = fs::read_to_string(f)?;
        let sim: SimOutput =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", f.display()))?;
        densities.extend(sim.density);
        samples.push(CorrSample::from_distribution(
            sim.points,
            &sim.distribution,
        )?);
    }
    let density = match a.density {
        Some(d) => d,
        None if !densities.is_empty() => densities.iter().sum::<f64>() / densities.len() as f64,
        None => return Err(usage_err("inputs carry no density; pass --density")),
    };
    let agg = match a.agg {
        AggArg::Max => Aggregate::Max,
        AggArg::Mean => Aggregate::Mean,
    };
    let curve = binned_g2(&samples, a.delta_r, agg)?;
    emit_json(None, &fit_xi(&curve, density)?)
}

#[derive(Debug, Args)]
struct FitExtrap {
    /// CSV with header `n_atoms,n_shots,max_ratio`.
    #[arg(long)]
    samples: PathBuf,
    #[arg(long)]
    alpha_sat: f64,
    /// Noise level the samples belong to, carried into the output.
    #[arg(long)]
    gamma: Option<f64>,
    /// Prediction points as `n_atoms:n_shots`.
    #[arg(long, value_delimiter = ',', default_value = "8000:10")]
    predict: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ExtrapOutput {
    #[serde(flatten)]
    fit: ExtrapFit,
    #[serde(default)]
    gamma: Option<f64>,
    #[serde(default)]
    predictions: Vec<Prediction>,
}

fn parse_samples(text: &str) -> Result<Vec<ExtrapSample>> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| usage_err("samples file is empty"))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let find = |name: &str| {
        cols.iter()
            .position(|c| *c == name)
            .ok_or_else(|| usage_err(format!("samples header lacks column {name}")))
    };
    let (ia, is, ir) = (find("n_atoms")?, find("n_shots")?, find("max_ratio")?);
    let mut out = Vec::new();
    for (k, line) in lines {
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = || usage_err(format!("samples line {}: cannot parse {line:?}", k + 1));
        let get = |i: usize| f.get(i).copied().ok_or_else(bad);
        out.push(ExtrapSample {
            n_atoms: get(ia)?.parse().map_err(|_| bad())?,
            n_shots: get(is)?.parse().map_err(|_| bad())?,
            max_ratio: get(ir)?.parse().map_err(|_| bad())?,
        });
    }
    Ok(out)
}

fn parse_prediction_point(s: &str) -> Result<(f64, u64)> {
    let bad = || usage_err(format!("prediction point {s:?} is not n_atoms:n_shots"));
    let (n, shots) = s.split_once(':').ok_or_else(bad)?;
    Ok((
        n.trim().parse().map_err(|_| bad())?,
        shots.trim().parse().map_err(|_| bad())?,
    ))
}

fn fit_extrap(a: FitExtrap) -> Result<()> {
    let samples = parse_samples(&fs::read_to_string(&a.samples)?)?;
    let fit = fit_extrapolation(&samples, a.alpha_sat)?;
    let predictions = a
        .predict
        .iter()
        .map(|p| {
            let (n, shots) = parse_prediction_point(p)?;
            Ok(fit.predict(n, shots)?)
        })
        .collect::<Result<Vec<_>>>()?;
    emit_json(
        None,
        &ExtrapOutput {
            fit,
            gamma: a.gamma,
            predictions,
        },
    )
}

#[derive(Debug, Args)]
struct BoundCheck {
    #[arg(long, value_delimiter = ',', default_value = "16,64,256")]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1,10,100")]
    shots: Vec<u64>,
}

fn bound_check(a: BoundCheck) -> Result<()> {
    if a.shots.contains(&0) {
        return Err(usage_err("shot counts must be at least 1"));
    }
    let rows = gaussian_bound_check(&a.shots, &a.sizes)?;
    print_stdout(&bound_rows_csv(&rows))
}

#[derive(Debug, Args)]
struct BudgetArgs {
    /// Time budget in seconds.
    #[arg(long, default_value_t = 2.0)]
    budget: f64,
    /// Quantum repetition rate in Hz.
    #[arg(long, default_value_t = DEFAULT_REPETITION_RATE_HZ)]
    rate: f64,
}

#[derive(Debug, Args)]
struct BudgetRun {
    /// Graph files or directories of `.txt` graphs.
    #[arg(long, num_args = 1.., required = true)]
    graphs: Vec<PathBuf>,
    /// Hop radii, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0,2,5")]
    d: Vec<usize>,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long, value_enum, default_value_t = TimingArg::SolverOnly)]
    timing: TimingArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Solve each graph exactly (within this many seconds) to report ratios.
    #[arg(long)]
    exact_timeout_s: Option<f64>,
    /// `simulate` outputs to charge against the same budget.
    #[arg(long, num_args = 1..)]
    dists: Vec<PathBuf>,
    /// Session directory for records.jsonl and manifest.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct BudgetSummary {
    records: usize,
    classical_within_budget: usize,
    classical_over_budget: usize,
    quantum: usize,
    records_path: String,
    manifest_path: String,
}

fn graph_paths(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "txt"))
                .collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    if out.is_empty() {
        return Err(usage_err("no graph files given"));
    }
    Ok(out)
}

fn budget_run(a: BudgetRun) -> Result<()> {
    let policy = BudgetPolicy {
        budget_s: a.budget.budget,
        repetition_rate_hz: a.budget.rate,
        timing: match a.timing {
            TimingArg::SolverOnly => TimingMode::SolverOnly,
            TimingArg::WallClock => TimingMode::WallClock,
        },
    };
    policy.validate()?;
    if a.d.is_empty() {
        return Err(usage_err("no hop radii given"));
    }
    fs::create_dir_all(&a.out)?;
    let paths = graph_paths(&a.graphs)?;
    let mut records: Vec<RunRecord> = Vec::new();
    let mut manifest_graphs = Vec::new();
    let mut seeds = Vec::new();
    for (gi, path) in paths.iter().enumerate() {
        let g = load_graph(path)?;
        let id = graph_id(path);
        let exact_size = match a.exact_timeout_s {
            Some(t) => {
                let deadline = Instant::now() + Duration::from_secs_f64(t);
                solve_exact_with_deadline(&g, Some(deadline))
                    .ok()
                    .map(|(m, _)| m)
            }
            None => None,
        };
        manifest_graphs.push(ManifestGraph {
            id: id.clone(),
            path: path.display().to_string(),
            n: g.n(),
            meta: g.meta().copied(),
        });
        for (di, &d) in a.d.iter().enumerate() {
            let seed = derive_seed(a.seed, (gi * a.d.len() + di) as u64);
            seeds.push(seed);
            let session = run_classical_budgeted(&g, &id, d, &policy, seed, exact_size)?;
            records.push(session.record);
        }
    }
    for path in &a.dists {
        let sim: SimOutput = serde_json::from_str(&fs::read_to_string(path)?)
            .with_context(|| format!("parsing {}", path.display()))?;
        records.push(run_quantum_budgeted(
            &sim.distribution,
            &graph_id(path),
            &policy,
            sim.exact_size,
        )?);
    }
    let records_path = a.out.join("records.jsonl");
    let manifest_path = a.out.join("manifest.json");
    write_records(&records_path, &records)?;
    SessionManifest {
        created_ms: udmis_core::harness::now_ms(),
        records: "records.jsonl".into(),
        policy,
        graphs: manifest_graphs,
        seeds,
        ds: a.d.clone(),
    }
    .save(&manifest_path)?;
    let classical: Vec<&RunRecord> = records.iter().filter(|r| r.n_shots.is_none()).collect();
    let over = classical.iter().filter(|r| r.over_budget).count();
    let summary = BudgetSummary {
        records: records.len(),
        classical_within_budget: classical.len() - over,
        classical_over_budget: over,
        quantum: records.len() - classical.len(),
        records_path: records_path.display().to_string(),
        manifest_path: manifest_path.display().to_string(),
    };
    emit_json(None, &summary)?;
    if summary.classical_within_budget == 0 && summary.quantum == 0 {
        return Err(
            Infeasible(format!("no run fits into the {} s budget", policy.budget_s)).into(),
        );
    }
    Ok(())
}

#[derive(Debug, Args)]
struct Breakeven {
    /// Records from `budget-run`.
    #[arg(long)]
    records: Option<PathBuf>,
    /// JSON list of `{d, max_n, ratio}` classical points.
    #[arg(long)]
    classical: Option<PathBuf>,
    /// `fit-extrap` outputs; each must carry a gamma.
    #[arg(long, num_args = 1..)]
    quantum: Vec<PathBuf>,
    #[command(flatten)]
    budget: BudgetArgs,
    /// Write `<prefix>.json` and `<prefix>.csv` instead of printing JSON.
    #[arg(long)]
    out_prefix: Option<PathBuf>,
}

fn breakeven(a: Breakeven) -> Result<()> {
    let mut points: Vec<ClassicalPoint> = Vec::new();
    if let Some(p) = &a.records {
        points.extend(classical_points_from_records(&read_records(p)?));
    }
    if let Some(p) = &a.classical {
        let fixture: Vec<ClassicalPoint> = serde_json::from_str(&fs::read_to_string(p)?)?;
        points.extend(fixture);
    }
    if points.is_empty() {
        return Err(usage_err(
            "no classical points: pass --records or --classical",
        ));
    }
    let mut quantum = Vec::new();
    for p in &a.quantum {
        let e: ExtrapOutput = serde_json::from_str(&fs::read_to_string(p)?)?;
        let gamma = e
            .gamma
            .ok_or_else(|| usage_err(format!("{} carries no gamma", p.display())))?;
        quantum.push(QuantumInput { gamma, fit: e.fit });
    }
    let mut policy = BudgetPolicy::new(a.budget.budget)?;
    policy.repetition_rate_hz = a.budget.rate;
    let report = breakeven_report(&points, &quantum, &policy)?;
    match &a.out_prefix {
        Some(prefix) => {
            let json = prefix.with_extension("json");
            let csv = prefix.with_extension("csv");
            fs::write(&json, serde_json::to_string_pretty(&report)?)?;
            fs::write(&csv, report.to_csv())?;
            emit_json(
                None,
                &serde_json::json!({ "json": json.display().to_string(), "csv": csv.display().to_string(), "corner": report.corner }),
            )
        }
        None => emit_json(None, &report),
    }
}
