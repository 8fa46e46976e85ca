use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use tropcurve::intlin::{IntMatrix, IntVector};
use tropcurve::pipeline::{self, Config};
use tropcurve::plot::curve_svg;
use tropcurve::poly::parse_system;
use tropcurve::tropfan::{
    boundary_slopes, check_balancing, completeness_defect, edge_slopes, plane_curve_oracle, pushforward,
    pushforward_dropping_contracted, tropical_degree, Slope, TropicalCurve,
};
use tropcurve::Error;

/// Tropicalization of complex algebraic curves by homotopy continuation.
#[derive(Parser)]
#[command(name = "tropcurve", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args)]
struct Opts {
    /// Random seed [default: 0]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Maximum slicing rounds [default: 4]
    #[arg(long, global = true)]
    rounds: Option<usize>,
    /// log|C| of the first slice [default: 8]
    #[arg(long = "log-c1", global = true)]
    log_c1: Option<f64>,
    /// log|C| of the parallel slice [default: 16]
    #[arg(long = "log-c2", global = true)]
    log_c2: Option<f64>,
    /// Real waypoint of the multiplicity homotopy [default: 0.001]
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Modulus of the starting parameter value [default: 0.1]
    #[arg(long, global = true)]
    a0: Option<f64>,
    /// Worker threads, 0 for all cores [default: 0]
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the JSON result here instead of stdout
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Also write an SVG drawing (planar curves only)
    #[arg(long, global = true)]
    svg: Option<PathBuf>,
    /// JSON config file; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the tropical curve of an ideal
    Trop { file: PathBuf },
    /// Multiplicity of one candidate ray
    Mult {
        file: PathBuf,
        /// Comma-separated primitive integer direction
        #[arg(long, allow_hyphen_values = true)]
        ray: String,
    },
    /// Numeric degree from random hyperplane sections
    Degree { file: PathBuf },
    /// Balancing, degree and completeness of a curve JSON file
    Check {
        curve: PathBuf,
        #[arg(long)]
        degree: Option<u64>,
    },
    /// Tropical curve of a plane curve from its Newton polygon
    Oracle { file: PathBuf },
    /// Image of a curve under an integer matrix, with boundary slopes
    Push {
        curve: PathBuf,
        /// Rows of whitespace-separated integers
        #[arg(long)]
        matrix: PathBuf,
        /// Leave out rays the matrix maps to zero instead of failing
        #[arg(long)]
        drop_contracted: bool,
    },
    /// SVG drawing of a planar curve
    Plot { curve: PathBuf },
}

fn config(opts: &Opts) -> anyhow::Result<Config> {
    let mut c: Config = match &opts.config {
        Some(p) => serde_json::from_str(&read(p)?).with_context(|| format!("parsing {}", p.display()))?,
        None => Config::default(),
    };
    if let Some(v) = opts.seed {
        c.seed = v;
    }
    if let Some(v) = opts.rounds {
        c.max_rounds = v;
    }
    if let Some(v) = opts.log_c1 {
        c.log_c1 = v;
    }
    if let Some(v) = opts.log_c2 {
        c.log_c2 = v;
    }
    if let Some(v) = opts.eps {
        c.multiplicity.epsilon = v;
    }
    if let Some(v) = opts.a0 {
        c.multiplicity.a0_modulus = v;
    }
    if let Some(v) = opts.threads {
        c.threads = v;
    }
    Ok(c)
}

fn read(p: &Path) -> anyhow::Result<String> {
    fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
}

fn read_curve(p: &Path) -> anyhow::Result<TropicalCurve> {
    serde_json::from_str(&read(p)?).with_context(|| format!("parsing curve {}", p.display()))
}

fn read_matrix(p: &Path) -> anyhow::Result<IntMatrix> {
    let rows = read(p)?
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_whitespace()
                .map(|w| w.parse::<i64>().with_context(|| format!("bad matrix entry `{w}`")))
                .collect::<anyhow::Result<Vec<i64>>>()
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(IntMatrix::from_i64_rows(&rows)?)
}

fn emit(opts: &Opts, value: &serde_json::Value) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match &opts.json {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_svg(opts: &Opts, curve: &TropicalCurve) -> anyhow::Result<()> {
    if let Some(p) = &opts.svg {
        fs::write(p, curve_svg(curve)?).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let opts = &cli.opts;
    let cfg = config(opts)?;
    match &cli.command {
        Command::Trop { file } => {
            let report = pipeline::tropicalize(&read(file)?, &cfg)?;
            for (stage, t) in &report.timings.stages {
                eprintln!("{stage}: {:.3}s", t.as_secs_f64());
            }
            let text = report.to_json()?;
            match &opts.json {
                Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{text}"),
            }
            if report.n == 2 {
                emit_svg(opts, &report.curve()?)?;
            }
            Ok(if report.complete { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Mult { file, ray } => {
            let dir: Vec<i64> = ray
                .split(',')
                .map(|w| w.trim().parse::<i64>().with_context(|| format!("bad ray entry `{w}`")))
                .collect::<anyhow::Result<_>>()?;
            let sys = parse_system(&read(file)?)?;
            let f = pipeline::curve_system(&sys, cfg.seed)?;
            let m = pipeline::robust_multiplicity(
                &f,
                &IntVector::from_i64s(&dir),
                &cfg.multiplicity,
                cfg.multiplicity_attempts,
                cfg.seed,
            )?;
            let witnesses: Vec<Vec<[f64; 2]>> = m
                .witnesses
                .iter()
                .map(|p| p.coords().iter().map(|z| [z.re, z.im]).collect())
                .collect();
            emit(
                opts,
                &json!({"direction": dir, "multiplicity": m.multiplicity, "complement": m.complement, "witnesses": witnesses}),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Degree { file } => {
            let sys = parse_system(&read(file)?)?;
            let f = pipeline::curve_system(&sys, cfg.seed)?;
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(cfg.seed);
            let d = pipeline::robust_numeric_degree(&f, &cfg.tracker, cfg.degree_attempts, &mut rng)?;
            emit(opts, &json!({"numeric_degree": d}))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { curve, degree } => {
            let c = read_curve(curve)?;
            let (balanced, balance_defect) = check_balancing(&c);
            let trop = tropical_degree(&c).ok();
            let defect = degree.map(|d| completeness_defect(&c, d));
            let valid = balanced && defect.as_ref().is_none_or(IntVector::is_zero);
            emit(
                opts,
                &json!({
                    "balanced": balanced,
                    "balancing_defect": balance_defect,
                    "tropical_degree": trop,
                    "defect": defect,
                    "valid": valid,
                }),
            )?;
            Ok(if valid { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Oracle { file } => {
            let sys = parse_system(&read(file)?)?;
            if sys.num_vars() != 2 || sys.len() != 1 {
                bail!("oracle needs one polynomial in two variables");
            }
            let c = plane_curve_oracle(&sys.polynomials()[0])?.sorted();
            emit(opts, &serde_json::to_value(&c)?)?;
            emit_svg(opts, &c)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Push {
            curve,
            matrix,
            drop_contracted,
        } => {
            let c = read_curve(curve)?;
            let a = read_matrix(matrix)?;
            let (img, contracted) = if *drop_contracted {
                pushforward_dropping_contracted(&c, &a)?
            } else {
                (pushforward(&c, &a)?, vec![])
            };
            let img = img.sorted();
            let strings = |v: Vec<Slope>| v.iter().map(ToString::to_string).collect::<Vec<_>>();
            let (boundary, edges) = if img.ambient_dim() == 2 {
                (Some(strings(boundary_slopes(&img)?)), Some(strings(edge_slopes(&img)?)))
            } else {
                (None, None)
            };
            let mut value = serde_json::to_value(&img)?;
            value["contracted"] = json!(contracted);
            value["boundary_slopes"] = json!(boundary);
            value["edge_slopes"] = json!(edges);
            emit(opts, &value)?;
            if img.ambient_dim() == 2 {
                emit_svg(opts, &img)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Plot { curve } => {
            let svg = curve_svg(&read_curve(curve)?)?;
            match &opts.svg {
                Some(p) => fs::write(p, svg).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{svg}"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if matches!(e.downcast_ref::<Error>(), Some(Error::Indeterminate(_))) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
