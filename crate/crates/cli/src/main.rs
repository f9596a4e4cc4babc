use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mixgraph::admm::run_admm_block;
use mixgraph::graph::SparseMatrix;
use mixgraph::io::{generate_synthetic, load_dataset, write_edges, Dataset, DatasetSpec, Sample, SynthConfig};
use mixgraph::pipeline::{perron_centrality, tune_spsa, Forecaster, PipelineConfig};

#[derive(Parser)]
#[command(name = "mixgraph", version, about = "Mixed-graph unrolled ADMM traffic forecaster")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded synthetic dataset (signals.csv and edges.csv).
    Synth(SynthArgs),
    /// Forecast a split and write predictions plus metrics.
    Forecast(ForecastArgs),
    /// Run one ADMM block on one sample and dump per-layer traces.
    Solve(SolveArgs),
    /// Run the built-in oracle and invariant checks.
    Verify,
    /// Tune the config by SPSA on the validation split.
    Tune(TuneArgs),
    /// Write the assembled operators of one sample and the Perron centrality.
    GraphDump(GraphDumpArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// JSON generator settings; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    stations: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct DataArgs {
    /// Signal CSV: `timestamp,s0,s1,...`.
    #[arg(long)]
    signals: PathBuf,
    /// Edge CSV: `from,to,cost`.
    #[arg(long)]
    edges: PathBuf,
    /// Pipeline config JSON; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Split {
    Train,
    Val,
    Test,
}

#[derive(Args)]
struct ForecastArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum, default_value = "test")]
    split: Split,
    /// Predictions CSV.
    #[arg(long)]
    out: PathBuf,
    /// Metrics CSV.
    #[arg(long)]
    metrics: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum, default_value = "test")]
    split: Split,
    /// Index of the sample within the split.
    #[arg(long, default_value_t = 0)]
    sample: usize,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    sample: SampleArgs,
    /// Block whose layer parameters are used.
    #[arg(long, default_value_t = 0)]
    block: usize,
    /// Metric head whose graph is solved on.
    #[arg(long, default_value_t = 0)]
    head: usize,
    /// Per-layer trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Solution CSV (`station,instant,value`, standardized units).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TuneArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Where the best config is written.
    #[arg(long)]
    out: PathBuf,
    /// Overrides `tuner.iterations`.
    #[arg(long)]
    iterations: Option<usize>,
    /// Overrides `tuner.seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct GraphDumpArgs {
    #[command(flatten)]
    sample: SampleArgs,
    #[arg(long, default_value_t = 0)]
    head: usize,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Forecast(a) => forecast(a),
        Command::Solve(a) => solve(a),
        Command::Verify => verify(),
        Command::Tune(a) => tune(a),
        Command::GraphDump(a) => graph_dump(a),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::FAILURE
        }
    }
}

/// Joins the error chain, skipping causes whose text an outer message already contains.
fn describe(e: &anyhow::Error) -> String {
    let mut msg = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if msg.contains(&text) {
            continue;
        }
        if !msg.is_empty() {
            msg.push_str(": ");
        }
        msg.push_str(&text);
    }
    msg
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    let cfg = match path {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn load(args: &DataArgs) -> Result<(PipelineConfig, Dataset)> {
    let cfg = load_config(args.config.as_deref())?;
    let spec = DatasetSpec {
        stride: cfg.data.stride,
        split: cfg.data.split,
        history: cfg.data.history,
        horizon: cfg.data.horizon,
        ..DatasetSpec::new(&args.signals, &args.edges)
    };
    let ds = load_dataset(&spec)?;
    Ok((cfg, ds))
}

fn split_of(ds: &Dataset, split: Split) -> (&'static str, &[Sample]) {
    match split {
        Split::Train => ("train", &ds.train),
        Split::Val => ("val", &ds.val),
        Split::Test => ("test", &ds.test),
    }
}

fn pick<'a>(ds: &'a Dataset, args: &SampleArgs) -> Result<&'a Sample> {
    let (name, samples) = split_of(ds, args.split);
    samples.get(args.sample).with_context(|| {
        format!(
            "--sample {} is out of range: the {name} split has {} samples",
            args.sample,
            samples.len()
        )
    })
}

fn synth(a: SynthArgs) -> Result<ExitCode> {
    let mut cfg: SynthConfig = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("{}: invalid generator settings", p.display()))?
        }
        None => SynthConfig::default(),
    };
    cfg.stations = a.stations.unwrap_or(cfg.stations);
    cfg.steps = a.steps.unwrap_or(cfg.steps);
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    let (table, graph) = generate_synthetic(&cfg)?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    table.write_csv(&a.out.join("signals.csv"))?;
    write_edges(&a.out.join("edges.csv"), &graph)?;
    println!(
        "wrote {} steps x {} stations and {} edges to {}",
        table.steps(),
        table.stations(),
        graph.edges().len(),
        a.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn forecast(a: ForecastArgs) -> Result<ExitCode> {
    let (cfg, ds) = load(&a.data)?;
    let (name, samples) = split_of(&ds, a.split);
    if samples.is_empty() {
        bail!("the {name} split is empty");
    }
    let f = Forecaster::new(&cfg, &ds.graph, ds.standardizer.clone())?;
    let forecasts = f.forecast_all(samples)?;
    let ev = mixgraph::pipeline::evaluation(&forecasts, samples, cfg.data.mape_floor, cfg.data.huber_delta)?;

    let mut w = create(&a.out)?;
    writeln!(w, "sample,station,instant,timestamp,predicted,actual")?;
    for (i, (fc, s)) in forecasts.iter().zip(samples).enumerate() {
        let history = s.history();
        for (st, row) in fc.predicted.iter().enumerate() {
            for (h, p) in row.iter().enumerate() {
                let t = history + h;
                writeln!(w, "{i},{st},{t},{},{p},{}", s.timestamps[t], s.target[st][h])?;
            }
        }
    }
    w.flush()?;

    let mut m = create(&a.metrics)?;
    writeln!(m, "model,split,samples,rmse,mae,mape")?;
    for (model, v) in [("pipeline", ev.model), ("persistence", ev.persistence)] {
        writeln!(m, "{model},{name},{},{},{},{}", samples.len(), v.rmse, v.mae, v.mape)?;
    }
    m.flush()?;
    println!(
        "{name}: {} samples, rmse {:.4} (persistence {:.4}), mae {:.4}, mape {:.2}%",
        samples.len(),
        ev.model.rmse,
        ev.persistence.rmse,
        ev.model.mae,
        100.0 * ev.model.mape
    );
    Ok(ExitCode::SUCCESS)
}

fn head_graph(f: &Forecaster, x: &[f64], sample: &Sample, head: usize) -> Result<mixgraph::graph::MixedGraph> {
    let graphs = f.graphs(x, sample)?;
    let count = graphs.len();
    if head >= count {
        bail!("--head {head} is out of range: the config has {count} heads");
    }
    // Duplicate heads share the graph of the first identical one.
    let g = graphs[..=head].iter().rev().flatten().next().cloned();
    g.with_context(|| format!("head {head} produced no graph"))
}

fn solve(a: SolveArgs) -> Result<ExitCode> {
    let (cfg, ds) = load(&a.sample.data)?;
    let sample = pick(&ds, &a.sample)?;
    if a.block >= cfg.layers.blocks {
        bail!(
            "--block {} is out of range: the config has {} blocks",
            a.block,
            cfg.layers.blocks
        );
    }
    let f = Forecaster::new(&cfg, &ds.graph, ds.standardizer.clone())?;
    let (x0, y) = f.initial_signal(sample)?;
    let g = head_graph(&f, &x0, sample, a.head)?;
    let params = &cfg.resolved_params(ds.graph.station_count())[a.block];
    let out = run_admm_block(&x0, &y, &g, params, &cfg.solver.cg, cfg.solver.mode, true)?;
    if let Some(path) = &a.trace {
        let mut w = create(path)?;
        writeln!(w, "layer,objective,res_phi,res_zu,res_zd")?;
        for t in &out.trace {
            writeln!(w, "{},{},{},{},{}", t.layer, t.objective, t.res_phi, t.res_zu, t.res_zd)?;
        }
        w.flush()?;
    }
    if let Some(path) = &a.out {
        let layout = g.layout();
        let mut w = create(path)?;
        writeln!(w, "station,instant,value")?;
        for (i, v) in out.state.x.iter().enumerate() {
            let idx = layout.index(i);
            writeln!(w, "{},{},{v}", idx.station, idx.instant)?;
        }
        w.flush()?;
    }
    if let Some(last) = out.trace.last() {
        println!(
            "{} layers, objective {:.6e}, residuals phi {:.3e} zu {:.3e} zd {:.3e}",
            out.trace.len(),
            last.objective,
            last.res_phi,
            last.res_zu,
            last.res_zd
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn verify() -> Result<ExitCode> {
    let checks = mixgraph::verify::run_all();
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {:width$}  {}", c.name, c.detail);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn tune(a: TuneArgs) -> Result<ExitCode> {
    let (mut cfg, ds) = load(&a.data)?;
    cfg.tuner.iterations = a.iterations.unwrap_or(cfg.tuner.iterations);
    cfg.tuner.seed = a.seed.unwrap_or(cfg.tuner.seed);
    let report = tune_spsa(&cfg, &ds.graph, &ds.standardizer, &ds.val)?;
    report.config.save(&a.out)?;
    println!(
        "validation Huber {:.6} -> {:.6} over {} iterations; wrote {}",
        report.initial_loss,
        report.best_loss,
        report.trace.len(),
        a.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn write_triplets(path: &Path, m: &SparseMatrix) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "row,col,value")?;
    for (r, c, v) in m.triplets() {
        writeln!(w, "{r},{c},{v}")?;
    }
    w.flush()?;
    Ok(())
}

fn graph_dump(a: GraphDumpArgs) -> Result<ExitCode> {
    let (cfg, ds) = load(&a.sample.data)?;
    let sample = pick(&ds, &a.sample)?;
    let f = Forecaster::new(&cfg, &ds.graph, ds.standardizer.clone())?;
    let (x0, _) = f.initial_signal(sample)?;
    let g = head_graph(&f, &x0, sample, a.head)?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    let mats: [(&str, &SparseMatrix); 6] = [
        ("w_u", g.spatial_adjacency()),
        ("l_u", g.l_u()),
        ("w_rd", g.w_rd()),
        ("l_rd", g.l_rd()),
        ("cal_l_rd", g.cal_l_rd()),
        ("l_n", g.l_n()),
    ];
    for (name, m) in mats {
        write_triplets(&a.out.join(format!("{name}.csv")), m)?;
    }
    let slice = g.spatial_slice(0)?;
    let pv = perron_centrality(&slice)?;
    let mut w = create(&a.out.join("centrality.csv"))?;
    writeln!(w, "station,centrality")?;
    for (s, v) in pv.iter().enumerate() {
        writeln!(w, "{s},{v}")?;
    }
    w.flush()?;
    println!(
        "wrote {} operators over {} nodes to {}",
        mats.len(),
        g.len(),
        a.out.display()
    );
    Ok(ExitCode::SUCCESS)
}
