mod config;
mod manifest;
mod selftest;
mod strategies;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use baire_core::baire::avoid_singleton_certified;
use baire_core::divergence::{divergence_demo, parse_schedule_blocks, ApproxPolicy, DivergenceSchedule};
use baire_core::exact::{format_rational, int, parse_rational, IntervalReal, Rational};
use baire_core::fourier::{step_fourier_coeffs, GridTrig};
use baire_core::game::run_game;
use baire_core::kolmogorov::{build_poly, estimate_a, grid_point, measure_exceptional_set};
use baire_core::lp::{ApproximationScheme, RationalBall};
use baire_core::step::RationalStepFunction;
use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;

use config::Config;
use manifest::Run;

#[derive(Parser)]
#[command(name = "baire", version, about = "Baire category, Banach-Mazur games and certified Fourier divergence")]
struct Cli {
    /// TOML config file; falls back to $BAIRE_CONFIG, then built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Where to write the run manifest (default: one JSON line on stderr).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Worker threads for grid scans (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Grid size for scans and CSV output.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Target enclosure width.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Working precision ceiling in bits.
    #[arg(long = "precision-cap", global = true)]
    precision_cap: Option<u32>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Banach-Mazur games.
    Game {
        #[command(subcommand)]
        cmd: GameCmd,
    },
    /// Sub-ball of a ball certified to exclude a step function.
    AvoidSingleton {
        #[arg(long)]
        ball: PathBuf,
        /// Step function JSON, used as its own approximation scheme.
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fourier coefficients and partial sums of step functions.
    Fourier {
        #[command(subcommand)]
        cmd: FourierCmd,
    },
    /// Kolmogorov polynomials f_n.
    Kolmogorov {
        #[command(subcommand)]
        cmd: KolmogorovCmd,
    },
    /// Game-driven divergence construction.
    Diverge {
        #[command(subcommand)]
        cmd: DivergeCmd,
    },
    /// Runs the built-in invariant suite.
    Selftest {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GameCmd {
    /// Plays a finite game; strategies: identity, shrink:R, recenter:SEED,
    /// recenter-wild:SEED, recenter-shrinking:SEED, avoid:FILE, win:FILE.
    Run {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
        #[arg(long)]
        ball: PathBuf,
        #[arg(long, default_value_t = 8)]
        rounds: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum FourierCmd {
    /// Certified a_0..a_L, b_1..b_L.
    Coeffs {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        order: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CSV of S_l on the equispaced grid x = 2kπ/grid.
    PartialSums {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        order: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum KolmogorovCmd {
    /// Nodes and frequencies of f_n.
    Build {
        #[arg(short = 'n', long)]
        n: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measures the exceptional set on the grid.
    Verify {
        #[arg(short = 'n', long)]
        n: u32,
        /// "auto" or a rational.
        #[arg(long = "A")]
        a: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum DivergeCmd {
    /// Plays the divergence strategy against α and certifies the result.
    Demo {
        #[arg(long, default_value = "identity")]
        alpha: String,
        #[arg(long, default_value_t = 4)]
        rounds: usize,
        /// Initial ball (default B(0, 1) in L¹).
        #[arg(long)]
        ball: Option<PathBuf>,
        /// Largest block order in the default schedule.
        #[arg(long = "schedule-cap")]
        schedule_cap: Option<u32>,
        /// Explicit block orders, e.g. 2,2,2,2; overrides the capped default schedule.
        #[arg(long)]
        blocks: Option<String>,
        #[arg(long, default_value = "2")]
        threshold: String,
        /// Raise ScheduleExhausted instead of damping block amplitudes.
        #[arg(long)]
        literal: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Final grid partial sums as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Full game transcript (large).
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
}

fn read_json<T: DeserializeOwned>(p: &Path) -> Result<T> {
    let s = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
    serde_json::from_str(&s).with_context(|| format!("parsing {}", p.display()))
}

pub(crate) fn resolve_a(text: &str, cfg: &Config) -> Result<Rational> {
    if text == "auto" {
        Ok(estimate_a(&cfg.a_estimate_n, cfg.a_estimate_grid)?)
    } else {
        Ok(parse_rational(text)?)
    }
}

fn run(cli: Cli, argv: Vec<String>) -> Result<()> {
    let mut cfg = Config::load(cli.config.as_deref())?;
    if let Some(g) = cli.grid {
        cfg.grid = g;
    }
    if let Some(t) = cli.tol {
        cfg.tol = t;
    }
    if let Some(c) = cli.precision_cap {
        cfg.precision_cap = c;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("thread pool")?;
    }
    if cfg.grid == 0 {
        bail!(baire_core::Error::InvalidInput("grid must be positive".into()));
    }
    let mut run = Run::start(argv, cfg.clone());
    match cli.cmd {
        Cmd::Game { cmd: GameCmd::Run { alpha, beta, ball, rounds, out } } => {
            let b: RationalBall = read_json(&ball)?;
            let a = strategies::parse(&alpha)?;
            let bt = strategies::parse(&beta)?;
            let t = run_game(&a, &bt, &b, rounds)?;
            run.derived("verified", t.verify()?);
            run.emit_json(out.as_deref(), &t)?;
        }
        Cmd::AvoidSingleton { ball, scheme, out } => {
            let b: RationalBall = read_json(&ball)?;
            let g: RationalStepFunction = read_json(&scheme)?;
            let av = avoid_singleton_certified(&b, &ApproximationScheme::constant(g, b.p))?;
            run.derived("n", av.n);
            run.emit_json(out.as_deref(), &av.ball)?;
        }
        Cmd::Fourier { cmd: FourierCmd::Coeffs { f, order, out } } => {
            let g: RationalStepFunction = read_json(&f)?;
            let c = step_fourier_coeffs(&g, order, cfg.tol, cfg.precision_cap)?;
            run.derived("max_width", c.max_width());
            run.emit_json(out.as_deref(), &c)?;
        }
        Cmd::Fourier { cmd: FourierCmd::PartialSums { f, order, out } } => {
            let g: RationalStepFunction = read_json(&f)?;
            let c = step_fourier_coeffs(&g, order, cfg.tol, cfg.precision_cap)?;
            let sums = GridTrig::new(cfg.grid, 96).partial_sums(&c, order);
            let mut csv = String::from("x_over_pi,S_l_lo,S_l_hi\n");
            for (k, s) in sums.iter().enumerate() {
                csv.push_str(&format!("{},{:e},{:e}\n", format_rational(&grid_point(k, cfg.grid)), s.lo_f64(), s.hi_f64()));
            }
            run.emit(out.as_deref(), csv.as_bytes())?;
        }
        Cmd::Kolmogorov { cmd: KolmogorovCmd::Build { n, out } } => {
            let p = build_poly(n)?;
            run.emit_json(out.as_deref(), &p)?;
        }
        Cmd::Kolmogorov { cmd: KolmogorovCmd::Verify { n, a, out, csv } } => {
            let text = a.unwrap_or_else(|| cfg.a.clone());
            let a = resolve_a(&text, &cfg)?;
            run.derived("A", format_rational(&a));
            let p = build_poly(n)?;
            let rep = measure_exceptional_set(&p, &IntervalReal::from_rational(&a, 64), cfg.grid)?;
            run.derived("fraction", rep.fraction);
            if let Some(path) = csv {
                let mut s = String::from("x_over_pi,max_abs_lo,max_abs_hi,j,exceptional\n");
                for r in &rep.rows {
                    s.push_str(&format!("{},{:e},{:e},{},{}\n", r.x_over_pi, r.max_abs_lo, r.max_abs_hi, r.j, r.exceptional));
                }
                run.emit(Some(&path), s.as_bytes())?;
            }
            run.emit_json(out.as_deref(), &rep)?;
        }
        Cmd::Diverge {
            cmd: DivergeCmd::Demo { alpha, rounds, ball, schedule_cap, blocks, threshold, literal, out, csv, transcript },
        } => {
            let a = resolve_a(&cfg.a, &cfg)?;
            run.derived("A", format_rational(&a));
            let sched = match blocks {
                Some(b) => DivergenceSchedule::from_blocks(&parse_schedule_blocks(&b)?, a)?,
                None => DivergenceSchedule::default_capped(schedule_cap.unwrap_or(cfg.schedule_cap), a)?,
            };
            run.schedule("blocks", &sched.blocks);
            run.schedule("q", sched.q.iter().map(|q| q.to_string()).collect::<Vec<_>>());
            if let Some(t) = &sched.truncated {
                run.schedule("truncated", t);
            }
            let b0 = match ball {
                Some(p) => read_json(&p)?,
                None => RationalBall::new(RationalStepFunction::zero(), int(1), 1)?,
            };
            let mut policy = ApproxPolicy { grid: cfg.grid, ..ApproxPolicy::default() };
            if literal {
                policy.amplitude = baire_core::divergence::AmplitudePolicy::Literal;
            }
            let al = strategies::parse(&alpha)?;
            let (rep, t) = divergence_demo(&al, rounds, Arc::new(sched), &b0, policy, parse_rational(&threshold)?)?;
            if let Some(path) = csv {
                let mut s = String::from("x_over_pi,max_S_lo,max_S_hi,j\n");
                for r in &rep.final_rows {
                    s.push_str(&format!("{},{:e},{:e},{}\n", r.x_over_pi, r.lo, r.hi, r.j));
                }
                run.emit(Some(&path), s.as_bytes())?;
            }
            if let Some(path) = transcript {
                run.emit_json(Some(&path), &t)?;
            }
            run.emit_json(out.as_deref(), &rep)?;
        }
        Cmd::Selftest { out } => {
            let report = selftest::run(&cfg);
            run.derived("A", &report.a);
            run.derived("passed", report.passed());
            run.emit_json(out.as_deref(), &report)?;
            let ok = report.passed();
            run.finish(cli.manifest.as_deref())?;
            if !ok {
                bail!(baire_core::Error::InvalidInput("selftest failed".into()));
            }
            return Ok(());
        }
    }
    run.finish(cli.manifest.as_deref())
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = match e.downcast_ref::<baire_core::Error>() {
                Some(d) => d.kind(),
                None if e.downcast_ref::<std::io::Error>().is_some() => "Io",
                None => "Input",
            };
            let msg = format!("{e:#}");
            eprintln!("{}", serde_json::json!({ "error": kind, "message": msg }));
            ExitCode::from(1)
        }
    }
}
