use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use qdsindex::campaign::{
    cocycle_checks, parse_tuple, residue_checks, run, suspend_checks, verify_checks, Format, Lab, ModelName, Report,
    RunConfig,
};

/// Local index cocycles of truncated spectral triples and their quantum
/// double suspensions.
#[derive(Parser)]
#[command(name = "qdsindex", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate ζ^(m) for the generators of a model.
    Residues,
    /// Build the suspension and cross-check every transfer formula.
    Suspend,
    /// Evaluate Σ²φ_n on one tuple, e.g. `z@p, x@p, y@p` or `S^1, S^-1, S^0`.
    ///
    /// Elements are comma separated. `S^<n>` is 1 ⊗ S^n; `<a>@<k>` is a ⊗ k,
    /// where `k` is a `+`-separated sum of `p` and matrix units `e<i>.<j>`.
    /// Torus bases are `u^a*v^b`, sphere bases are polynomials in x, y, z,
    /// circle bases are `z^n`.
    Cocycle {
        /// The element tuple.
        tuple: String,
    },
    /// Run the acceptance campaign.
    Verify,
}

#[derive(Args)]
struct Opts {
    /// Config file; defaults to $QDSINDEX_CONFIG.
    #[arg(long, global = true, env = "QDSINDEX_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    model: Option<ModelName>,
    /// Circle and torus cutoff Λ.
    #[arg(long, global = true)]
    lambda: Option<usize>,
    /// Sphere cutoff Lmax.
    #[arg(long, global = true)]
    lmax: Option<u32>,
    #[arg(long, global = true)]
    theta: Option<f64>,
    /// Truncation M of ℓ²(ℕ) in the suspension.
    #[arg(long, global = true)]
    suspension_size: Option<usize>,
    /// Comma-separated generators for `residues`; empty for none.
    #[arg(long, global = true)]
    generators: Option<String>,
    #[arg(long, global = true)]
    fit_points: Option<usize>,
    /// Ratio t_max / t_min of the fit window.
    #[arg(long, global = true)]
    fit_ratio: Option<f64>,
    /// Polynomial degree of the fit.
    #[arg(long, global = true)]
    fit_degree: Option<usize>,
    #[arg(long, global = true)]
    eps_tail: Option<f64>,
    /// Tolerance override for a check name or dotted prefix; repeatable.
    #[arg(long = "tolerance", value_name = "KEY=VAL", global = true)]
    tolerances: Vec<String>,
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true)]
    format: Option<Format>,
    /// Select checks by glob or substring.
    #[arg(long, value_name = "NAME-GLOB", global = true)]
    only: Option<String>,
}

impl Opts {
    fn config(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let m = &mut cfg.model;
        set(&mut m.name, self.model);
        set(&mut m.lambda, self.lambda);
        set(&mut m.lmax, self.lmax);
        set(&mut m.theta, self.theta);
        set(&mut m.suspension_size, self.suspension_size);
        if let Some(g) = &self.generators {
            m.generators = Some(g.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect());
        }
        let f = &mut cfg.fit;
        set(&mut f.points, self.fit_points);
        set(&mut f.ratio, self.fit_ratio);
        set(&mut f.degree, self.fit_degree);
        set(&mut f.eps_tail, self.eps_tail);
        for kv in &self.tolerances {
            let (k, v) = kv.split_once('=').ok_or_else(|| anyhow!("--tolerance expects KEY=VAL, got `{kv}`"))?;
            let v: f64 = v.trim().parse().with_context(|| format!("--tolerance {kv}"))?;
            cfg.tolerances.insert(k.trim().to_string(), v);
        }
        if self.output.is_some() {
            cfg.output.path.clone_from(&self.output);
        }
        set(&mut cfg.output.format, self.format);
        if self.only.is_some() {
            cfg.only.clone_from(&self.only);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn execute(cli: &Cli) -> anyhow::Result<Report> {
    let cfg = cli.opts.config()?;
    let model = cfg.model.name;
    let (name, checks) = match &cli.command {
        Command::Residues => ("residues", residue_checks(model, cfg.model.generators.as_deref())),
        Command::Suspend => ("suspend", suspend_checks(model)),
        Command::Cocycle { tuple } => ("cocycle", cocycle_checks(model, parse_tuple(tuple)?)),
        Command::Verify => ("verify", verify_checks()),
    };
    Ok(run(name, &Lab::new(cfg), checks)?)
}

fn emit(report: &Report) -> anyhow::Result<()> {
    let out = &report.config.output;
    let text = report.render(out.format)?;
    match &out.path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = emit(&report) {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    let s = report.summary;
    eprintln!("{}: {} checks, {} passed, {} failed ({} errors)", report.command, s.total, s.passed, s.failed, s.errors);
    for r in report.failing() {
        match &r.error {
            Some(e) => eprintln!("  ERROR {}: {e}", r.name),
            None => eprintln!("  FAIL  {} (|error| {:?}, tolerance {:e})", r.name, r.abs_error, r.tolerance),
        }
    }
    if s.errors > 0 {
        ExitCode::from(2)
    } else if s.failed > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
