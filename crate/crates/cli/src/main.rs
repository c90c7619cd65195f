use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use krfactor::generate::{gen_min_degree_instance, gen_no_factor_witness};
use krfactor::io::{
    load_family, parse_graph, parse_instance_json, parse_transversal_certificate, save_family,
    write_graph, write_instance_json, ParseLimits,
};
use krfactor::pipeline::{gen_super_regular_instance, PipelineConfig, PlantedConfig};
use krfactor::{Error, RandomSeed, Result};
use krfactor_cli::config::{ExperimentConfig, Mode};
use krfactor_cli::exit_code;
use krfactor_cli::output::{render, Format};
use krfactor_cli::report::{janson_report, pipeline_run, verify_certificate, JansonConfig};
use krfactor_cli::sweep::{run_sweep, trial_family};

#[derive(Parser)]
#[command(
    name = "krfactor",
    version,
    about = "K_r-factor experiments on balanced r-partite graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Success rate of factor search in G(p) over a C or p grid.
    ThresholdSweep(SweepArgs),
    /// Success rate of transversal factors of graph families over a grid.
    TransversalSweep(SweepArgs),
    /// Run the staged pipeline on an instance file or a planted instance.
    PipelineRun(PipelineArgs),
    /// Exact Janson moments, tail bounds and a Monte Carlo surviving count.
    JansonReport(JansonArgs),
    /// Check a factor or transversal certificate.
    Verify(VerifyArgs),
    /// Emit instance files.
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Args)]
struct SweepArgs {
    /// JSON experiment config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    /// Comma-separated part sizes.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Comma-separated threshold constants.
    #[arg(long = "c-grid", value_delimiter = ',', conflicts_with = "p_grid")]
    c_grid: Option<Vec<f64>>,
    /// Comma-separated edge probabilities.
    #[arg(long = "p-grid", value_delimiter = ',')]
    p_grid: Option<Vec<f64>>,
    #[arg(long)]
    edge_keep: Option<f64>,
    /// Solver node budget per trial; exceeding it marks the row skipped.
    #[arg(long)]
    node_budget: Option<u64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall-clock time per row (output is then not reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct PipelineArgs {
    /// JSON instance; without it a planted instance is generated.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    r: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 30)]
    cluster_size: usize,
    #[arg(long, default_value_t = 0.6)]
    d: f64,
    /// Number of exceptional vertices in the planted instance.
    #[arg(long, default_value_t = 3)]
    b: usize,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON pipeline config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct JansonArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20_000)]
    max_cliques: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, required_unless_present = "family")]
    graph: Option<PathBuf>,
    #[arg(long)]
    certificate: PathBuf,
    /// Family manifest; the certificate is then a transversal certificate.
    #[arg(long)]
    family: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Minimum-degree host graph.
    Graph {
        #[arg(long, default_value_t = 3)]
        r: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.2)]
        gamma: f64,
        #[arg(long, default_value_t = 0.0)]
        edge_keep: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dense graph without a factor.
    Witness {
        #[arg(long, default_value_t = 3)]
        r: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Planted partitioned instance as JSON.
    Planted {
        #[arg(long, default_value_t = 3)]
        r: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 30)]
        cluster_size: usize,
        #[arg(long, default_value_t = 0.6)]
        d: f64,
        #[arg(long, default_value_t = 3)]
        b: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Family of minimum-degree graphs as a manifest plus graph files.
    Family {
        #[arg(long, default_value_t = 3)]
        r: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.2)]
        gamma: f64,
        #[arg(long, default_value_t = 0.0)]
        edge_keep: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn sweep(mode: Mode, args: SweepArgs) -> Result<ExitCode> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.mode = mode;
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.trials {
        cfg.trials = v;
    }
    if let Some(v) = args.r {
        cfg.r = v;
    }
    if let Some(v) = args.n {
        cfg.n = v;
    }
    if let Some(v) = args.gamma {
        cfg.gamma = v;
    }
    if let Some(v) = args.c_grid {
        cfg.c_grid = v;
        cfg.p_grid.clear();
    }
    if let Some(v) = args.p_grid {
        cfg.p_grid = v;
        cfg.c_grid.clear();
    }
    if let Some(v) = args.edge_keep {
        cfg.edge_keep = v;
    }
    if let Some(v) = args.node_budget {
        cfg.solver.node_budget = Some(v);
    }
    let rows = run_sweep(&cfg, args.timing)?;
    emit(args.out.as_deref(), &render(args.format, &cfg, &rows))?;
    Ok(ExitCode::SUCCESS)
}

fn pipeline(args: PipelineArgs) -> Result<ExitCode> {
    let config = match &args.config {
        Some(path) => serde_json::from_str(&read(path)?).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?,
        None => PipelineConfig::default(),
    };
    let (inst, source) = match &args.instance {
        Some(path) => (
            parse_instance_json(&read(path)?)?,
            path.display().to_string(),
        ),
        None => {
            let (inst, _) = gen_super_regular_instance(
                args.r,
                args.k,
                args.cluster_size,
                args.d,
                args.b,
                RandomSeed::new(args.seed),
                &PlantedConfig::default(),
            )?;
            let source = format!(
                "planted r={} k={} cluster_size={} d={} b={} seed={}",
                args.r, args.k, args.cluster_size, args.d, args.b, args.seed
            );
            (inst, source)
        }
    };
    let run = pipeline_run(&inst, source, args.p, args.seed, &config)?;
    emit(args.out.as_deref(), &json(&run))?;
    Ok(match &run.report.failure {
        None => ExitCode::SUCCESS,
        Some(f) => {
            eprintln!("pipeline failed at {}: {}", f.stage, f.message);
            ExitCode::from(1)
        }
    })
}

fn janson(args: JansonArgs) -> Result<ExitCode> {
    let g = parse_graph(&read(&args.graph)?, &ParseLimits::default())?;
    let cfg = JansonConfig {
        p: args.p,
        trials: args.trials,
        seed: args.seed,
        max_cliques: args.max_cliques,
        ..JansonConfig::default()
    };
    emit(args.out.as_deref(), &json(&janson_report(&g, &cfg)?))?;
    Ok(ExitCode::SUCCESS)
}

fn verify(args: VerifyArgs) -> Result<ExitCode> {
    let limits = ParseLimits::default();
    let graph = args
        .graph
        .as_deref()
        .map(|p| read(p).and_then(|t| parse_graph(&t, &limits)))
        .transpose()?;
    let family = args
        .family
        .as_deref()
        .map(|p| load_family(p, &limits))
        .transpose()?;
    let cert = parse_transversal_certificate(&read(&args.certificate)?)?;
    if let (Some(g), Some(f)) = (&graph, &family) {
        if *g != f.union_graph() {
            eprintln!(
                "warning: the graph differs from the family union; checking against the family"
            );
        }
    }
    match verify_certificate(graph.as_ref(), family.as_ref(), &cert)? {
        Ok(()) => {
            println!("ok: {} cliques verified", cert.cliques.len());
            Ok(ExitCode::SUCCESS)
        }
        Err(v) => {
            println!("violation: {v}");
            Ok(ExitCode::from(1))
        }
    }
}

fn generate(cmd: GenCommand) -> Result<ExitCode> {
    match cmd {
        GenCommand::Graph {
            r,
            n,
            gamma,
            edge_keep,
            seed,
            out,
        } => {
            let g = gen_min_degree_instance(r, n, gamma, edge_keep, RandomSeed::new(seed))?;
            emit(out.as_deref(), &write_graph(&g))?;
        }
        GenCommand::Witness { r, n, seed, out } => {
            let w = gen_no_factor_witness(r, n, RandomSeed::new(seed))?;
            emit(out.as_deref(), &write_graph(&w.graph))?;
        }
        GenCommand::Planted {
            r,
            k,
            cluster_size,
            d,
            b,
            seed,
            out,
        } => {
            let (inst, _) = gen_super_regular_instance(
                r,
                k,
                cluster_size,
                d,
                b,
                RandomSeed::new(seed),
                &PlantedConfig::default(),
            )?;
            emit(out.as_deref(), &write_instance_json(&inst))?;
        }
        GenCommand::Family {
            r,
            n,
            gamma,
            edge_keep,
            seed,
            out,
        } => {
            let cfg = ExperimentConfig {
                r,
                gamma,
                edge_keep,
                ..ExperimentConfig::default()
            };
            save_family(&trial_family(&cfg, n, RandomSeed::new(seed))?, &out)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::ThresholdSweep(args) => sweep(Mode::Threshold, args),
        Command::TransversalSweep(args) => sweep(Mode::Transversal, args),
        Command::PipelineRun(args) => pipeline(args),
        Command::JansonReport(args) => janson(args),
        Command::Verify(args) => verify(args),
        Command::Gen(cmd) => generate(cmd),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(exit_code(&e))
    })
}
