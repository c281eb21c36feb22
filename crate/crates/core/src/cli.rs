//! Command-line front end.
//!
//! ```text
//! kslab simulate   [-c CONFIG] [--key=value ...]
//! kslab verify     --trace TRACE.csv [-c CONFIG] [--key=value ...]
//! kslab thresholds [-c CONFIG] [--key=value ...]
//! kslab experiment <decay|absorbing|eps-limit|smallness|d-delta> [-c CONFIG] [--key=value ...]
//! kslab semigroup  [-c CONFIG] [--key=value ...]
//! kslab plot       [--dir DIR]
//! ```
//!
//! Exit status: 0 when every check passes, 2 when a check fails, 1 on error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::experiments::{
    decay_sweep, holder_quotients, plot::write_plot_script, run_absorbing_experiment, run_d_delta, run_decay_experiment, run_eps_limit,
    run_smallness_time, AbsorbingPlan, ExperimentReport, FittedConstants, KConstants, Provenance, RunConfig,
};
use crate::functionals::{trace_run, verify_apriori_bounds, BoundReport, Trace, TraceMeta};
use crate::odi::{write_thresholds_csv, ThresholdRow};
use crate::semigroup::{smoothing_fit, write_fit_csv, SpectralKernel};
use crate::solver::snapshot::write_field;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

/// Flags owned by clap; every other `--key=value` is a config override.
const RESERVED: [&str; 4] = ["config", "trace", "dir", "help"];

#[derive(Debug, Parser)]
#[command(name = "kslab", version, about = "Logistic Keller-Segel numerical lab")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Key-value config file (TOML); keys not given keep their defaults.
    #[arg(short, long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Experiment {
    Decay,
    Absorbing,
    EpsLimit,
    Smallness,
    DDelta,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one configuration and write its trace and snapshots.
    Simulate(Common),
    /// Check the a-priori bounds on a trace CSV.
    Verify {
        #[arg(long)]
        trace: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Fit the 3D constants and write the threshold table.
    Thresholds(Common),
    /// Run one of the headline experiments.
    Experiment {
        #[arg(value_enum)]
        name: Experiment,
        #[command(flatten)]
        common: Common,
    },
    /// Fit the heat-semigroup smoothing exponents.
    Semigroup(Common),
    /// Write the plotting script.
    Plot {
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

/// Parse `argv` (including the program name), run, and return the exit
/// status. Errors are printed to stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<String> = argv
        .into_iter()
        .map(|a| a.into().to_string_lossy().into_owned())
        .collect();
    let (args, overrides) = split_overrides(&argv);
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
        }
    };
    match dispatch(cli.cmd, &overrides) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn split_overrides(argv: &[String]) -> (Vec<String>, Vec<String>) {
    let mut args = Vec::new();
    let mut overrides = Vec::new();
    for (i, a) in argv.iter().enumerate() {
        let is_override = i > 0
            && a.starts_with("--")
            && a.contains('=')
            && !RESERVED.contains(&a[2..].split('=').next().unwrap_or(""));
        if is_override {
            overrides.push(a.clone());
        } else {
            args.push(a.clone());
        }
    }
    (args, overrides)
}

fn load_config(c: &Common, overrides: &[String]) -> Result<RunConfig> {
    let base = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    base.with_overrides(overrides)
}

fn out_dir(cfg: &RunConfig) -> Result<&Path> {
    let d = cfg.out_dir.as_path();
    std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    Ok(d)
}

fn dispatch(cmd: Command, overrides: &[String]) -> Result<bool> {
    match cmd {
        Command::Simulate(c) => simulate(&load_config(&c, overrides)?),
        Command::Verify { trace, common } => verify(&load_config(&common, overrides)?, &trace),
        Command::Thresholds(c) => thresholds(&load_config(&c, overrides)?),
        Command::Experiment { name, common } => experiment(name, &load_config(&common, overrides)?),
        Command::Semigroup(c) => semigroup(&load_config(&c, overrides)?),
        Command::Plot { dir } => {
            if !overrides.is_empty() {
                return Err(Error::Config(format!("plot takes no config keys (got {})", overrides.join(" "))));
            }
            let path = write_plot_script(dir.unwrap_or_else(|| PathBuf::from("out")))?;
            println!("wrote {}", path.display());
            Ok(true)
        }
    }
}

fn simulate(cfg: &RunConfig) -> Result<bool> {
    let dir = out_dir(cfg)?;
    let run = trace_run(&cfg.stepper()?, cfg.initial_state()?, cfg.t_end, cfg.cadence, cfg.snapshot_every)?;
    run.trace.write_csv(dir.join("trace.csv"))?;
    if !run.trace.snapshots().is_empty() {
        let sd = dir.join("snapshots");
        std::fs::create_dir_all(&sd).map_err(|e| Error::io(&sd, e))?;
        for (k, s) in run.trace.snapshots().iter().enumerate() {
            write_field(sd.join(format!("u_{k:05}.bin")), &s.u, s.t)?;
            write_field(sd.join(format!("v_{k:05}.bin")), &s.v, s.t)?;
        }
    }
    std::fs::write(dir.join("config.toml"), cfg.to_toml_string()).map_err(|e| Error::io(dir, e))?;
    println!(
        "{} records, {} snapshots -> {}",
        run.trace.len(),
        run.trace.snapshots().len(),
        dir.display()
    );
    if run.trace.snapshots().len() >= 2 {
        let q = holder_quotients(&run.trace, 0.5 * cfg.t_end, 0.5)?;
        println!(
            "Holder quotients (alpha 1/2, t >= {}): space u {:.4e} v {:.4e}, time u {:.4e} v {:.4e}",
            0.5 * cfg.t_end,
            q.space_u,
            q.space_v,
            q.time_u,
            q.time_v
        );
    }
    match run.escaped {
        Some(e) => {
            println!("run escaped: {e}");
            Ok(false)
        }
        None => Ok(true),
    }
}

fn verify(cfg: &RunConfig, trace: &Path) -> Result<bool> {
    let meta = TraceMeta {
        params: cfg.params()?,
        grid: cfg.grid()?,
        dt: cfg.dt,
    };
    let tr = Trace::read_csv(trace, meta)?;
    let rep: BoundReport = verify_apriori_bounds(&tr, cfg.rel_tol)?;
    let dir = out_dir(cfg)?;
    rep.write_csv(dir.join("bounds.csv"))?;
    print!("{rep}");
    Ok(rep.all_pass())
}

fn thresholds(cfg: &RunConfig) -> Result<bool> {
    let fc = FittedConstants::for_config(cfg)?;
    let dir = out_dir(cfg)?;
    write_thresholds_csv(
        dir.join("thresholds.csv"),
        &[ThresholdRow {
            chain: fc.chain,
            set: fc.thresholds,
        }],
    )?;
    let t = &fc.thresholds;
    println!("fit {}", fc.fit_id);
    println!(
        "C1 = {:.4e}, C2 = {:.4e}, A = {:.4e}, C_P = {:.4e}, C_Omega = {:.4e}",
        fc.chain.c1, fc.chain.c2, t.a, t.c_p, t.c_omega
    );
    println!(
        "nu0 = {:.4e}, nu = {:.4e}, eta = {:.4e}, kappa_tilde = {:.4e}, kappa0 = {:.4e}, delta = {:.4e}",
        t.nu0, t.nu, t.eta, t.kappa_tilde, t.kappa0, t.delta
    );
    Ok(true)
}

fn finish(rep: &ExperimentReport, cfg: &RunConfig) -> Result<bool> {
    let dir = out_dir(cfg)?;
    rep.write_csv(dir.join(format!("{}_verdicts.csv", rep.name)))?;
    rep.write_runs_csv(dir.join(format!("{}_runs.csv", rep.name)))?;
    print!("{rep}");
    Ok(rep.all_pass())
}

fn experiment(name: Experiment, cfg: &RunConfig) -> Result<bool> {
    let rep = match name {
        Experiment::Decay => run_decay_experiment(&decay_sweep(cfg))?,
        Experiment::Absorbing => {
            let fc = FittedConstants::for_config(cfg)?;
            let plan = AbsorbingPlan::from_config(cfg, fc.thresholds.kappa0, Provenance::Fitted(fc.fit_id.clone()));
            run_absorbing_experiment(cfg, &plan)?
        }
        Experiment::EpsLimit => run_eps_limit(cfg)?,
        Experiment::Smallness => {
            let fc = FittedConstants::for_config(cfg)?;
            let c = RunConfig {
                kappa: cfg.kappa_fraction * fc.thresholds.kappa0,
                ..cfg.clone()
            };
            run_smallness_time(&c, &fc)?
        }
        Experiment::DDelta => {
            let (k, prov) = KConstants::from_config(cfg)?;
            run_d_delta(cfg, &k, prov)?
        }
    };
    finish(&rep, cfg)
}

fn semigroup(cfg: &RunConfig) -> Result<bool> {
    let kernel = SpectralKernel::new(&cfg.grid()?);
    let mut fits = Vec::new();
    for &q in &cfg.q_values {
        let f = smoothing_fit(&kernel, q, cfg.trials, cfg.seed)?;
        println!(
            "n = {}, q = {q}: alpha fit {:.4} vs {:.4} (rel err {:.3}), C {:.4e}, contraction {:.4}, C4 finite: {}",
            f.n, f.alpha_fit, f.alpha_expected, f.rel_err, f.c_fit, f.contraction, f.c4_finite
        );
        fits.push(f);
    }
    let dir = out_dir(cfg)?;
    write_fit_csv(dir.join("semigroup_fits.csv"), &fits)?;
    Ok(fits.iter().all(|f| f.rel_err <= 0.15))
}
