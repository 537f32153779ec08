//! Thin command-line front end over the library drivers.
//!
//! Exit codes: 0 success, 1 failed checks or failed family rows, 2
//! configuration errors.

use clap::{Args, Parser, Subcommand};
use necklab::harness::{self, ExperimentConfig, ExperimentKind, ExportFormat, Series};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "necklab", version, about = "harmonic maps on long cylinders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Experiment configuration file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Table format.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Also write log-log trend charts as SVG.
    #[arg(long)]
    svg: bool,
    /// Worker threads for family members.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Seed override for randomized starts.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(clap::ValueEnum, Clone, Copy, PartialEq)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for ExportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ExportFormat::Csv,
            Format::Json => ExportFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one boundary-value solve and print the invariant report.
    Solve(CommonOpts),
    /// Run one solve and require every gated check to pass.
    Check(CommonOpts),
    /// Run a degenerating collar family and classify its trends.
    Degenerate(CommonOpts),
    /// Print collar geometry for a core length (no config needed).
    Collar {
        /// Core geodesic length.
        #[arg(long)]
        l: f64,
        /// Optional thin-part threshold for the subcollar columns.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Segment a field into neck and bubble intervals.
    Segment(CommonOpts),
}

fn load_config(opts: &CommonOpts) -> Result<ExperimentConfig, String> {
    let path = opts.config.as_ref().ok_or("--config is required for this subcommand")?;
    let mut cfg = ExperimentConfig::from_path(path).map_err(|e| e.to_string())?;
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &opts.out {
        cfg.out_dir = Some(out.clone());
    }
    Ok(cfg)
}

fn out_dir(cfg: &ExperimentConfig) -> Result<PathBuf, String> {
    let dir = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    Ok(dir)
}

fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("thread pool")
        .install(f)
}

fn run_solve(opts: &CommonOpts, require_pass: bool) -> Result<ExitCode, String> {
    let cfg = load_config(opts)?;
    let ExperimentKind::SingleSolve(spec) = &cfg.experiment else {
        return Err("config must describe a single_solve experiment".into());
    };
    let (field, report) =
        with_pool(opts.threads, || harness::run_single(&cfg, spec)).map_err(|e| e.to_string())?;
    let dir = out_dir(&cfg)?;
    field.write_to(&dir.join("map.field")).map_err(|e| e.to_string())?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    std::fs::write(dir.join("report.json"), &json).map_err(|e| e.to_string())?;
    println!("{json}");
    let violations = report.checks.violations();
    if require_pass && violations > 0 {
        eprintln!("{violations} check(s) failed");
        return Ok(ExitCode::from(1));
    }
    if require_pass && !report.solve.converged {
        eprintln!("solver did not converge");
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn run_degenerate(opts: &CommonOpts) -> Result<ExitCode, String> {
    let cfg = load_config(opts)?;
    let ExperimentKind::Degeneration(spec) = &cfg.experiment else {
        return Err("config must describe a degeneration experiment".into());
    };
    let outcome = with_pool(opts.threads, || harness::run_degeneration(&cfg, spec))
        .map_err(|e| e.to_string())?;
    let dir = out_dir(&cfg)?;
    let table =
        harness::export(&outcome.rows, opts.format.into()).map_err(|e| e.to_string())?;
    let ext = if opts.format == Format::Csv { "csv" } else { "json" };
    std::fs::write(dir.join(format!("family.{ext}")), &table).map_err(|e| e.to_string())?;
    print!("{table}");
    if let Some(v) = &outcome.verdict {
        let vj = serde_json::to_string_pretty(v).map_err(|e| e.to_string())?;
        std::fs::write(dir.join("verdict.json"), &vj).map_err(|e| e.to_string())?;
        println!("{vj}");
    }
    if opts.svg {
        let ok_rows: Vec<_> = outcome.rows.iter().filter(|r| r.status == "ok").collect();
        let series = vec![
            Series {
                name: "neck energy".into(),
                points: ok_rows.iter().map(|r| (r.l, r.e_neck.max(1e-300))).collect(),
            },
            Series {
                name: "neck length".into(),
                points: ok_rows.iter().map(|r| (r.l, r.l_neck.max(1e-300))).collect(),
            },
        ];
        match harness::render_svg(&series) {
            Ok(svg) => std::fs::write(dir.join("trends.svg"), svg).map_err(|e| e.to_string())?,
            Err(e) => eprintln!("skipping chart: {e}"),
        }
    }
    let failed = outcome.rows.iter().any(|r| r.status != "ok");
    if failed || !outcome.all_bounds_pass {
        eprintln!("family had failing rows or failing bound checks");
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn run_collar(l: f64, delta: Option<f64>, format: Format) -> Result<ExitCode, String> {
    let row = harness::collar_row(l, delta).map_err(|e| e.to_string())?;
    match format {
        Format::Json => {
            println!("{}", serde_json::to_string_pretty(&row).map_err(|e| e.to_string())?)
        }
        Format::Csv => {
            println!("{:<16} {:>18}", "quantity", "value");
            let emit = |k: &str, v: f64| println!("{k:<16} {v:>18.12}");
            emit("l", row.l);
            emit("t_lo", row.t_lo);
            emit("t_hi", row.t_hi);
            emit("core_t", row.core_t);
            emit("cyl_len", row.cyl_len);
            emit("area", row.area);
            emit("area_quadrature", row.area_quadrature);
            emit("injrad_core", row.injrad_core);
            emit("factor_core", row.factor_core);
            emit("factor_edge", row.factor_edge);
            if let (Some(t1), Some(t2), Some(len)) =
                (row.subcollar_t1, row.subcollar_t2, row.subcollar_len)
            {
                emit("subcollar_t1", t1);
                emit("subcollar_t2", t2);
                emit("subcollar_len", len);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run_segment(opts: &CommonOpts) -> Result<ExitCode, String> {
    let cfg = load_config(opts)?;
    let ExperimentKind::Segment(spec) = &cfg.experiment else {
        return Err("config must describe a segment experiment".into());
    };
    let field = harness::build_segment_field(spec, &cfg.grid).map_err(|e| e.to_string())?;
    let d = necklab::decompose::segment(&field, spec.epsilon).map_err(|e| e.to_string())?;
    let r = necklab::decompose::neck_identity(&field, &d, &cfg.calibration)
        .map_err(|e| e.to_string())?;
    let dir = out_dir(&cfg)?;
    let payload = serde_json::json!({ "decomposition": d, "neck_identity": r });
    let json = serde_json::to_string_pretty(&payload).map_err(|e| e.to_string())?;
    std::fs::write(dir.join("segmentation.json"), &json).map_err(|e| e.to_string())?;
    println!("{json}");
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(o) => run_solve(o, false),
        Command::Check(o) => run_solve(o, true),
        Command::Degenerate(o) => run_degenerate(o),
        Command::Collar { l, delta, format } => run_collar(*l, *delta, *format),
        Command::Segment(o) => run_segment(o),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
