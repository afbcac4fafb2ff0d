//! `tailcap`: capacity solves, sweeps, support classification and KKT checks
//! for additive-noise channels, driven by a `section.key = value` config.
//!
//! Exit status: 0 success, 1 configuration or input error, 2 numerical
//! failure, 3 result not certified under `--require-certified`.

mod config;
mod output;
mod repro;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tailcap::capacity::{
    capacity_sweep, optimize_capacity, read_distribution, render_distribution, DistributionFile, InfoEvaluator,
};
use tailcap::classify::{check_conditions, classify_numeric, classify_symbolic};

use config::{ConfigError, RunConfig};
use output::Series;

#[derive(Parser, Debug)]
#[command(name = "tailcap", version, about = "Capacity of additive-noise channels under average cost constraints")]
struct Cli {
    /// Run configuration (`section.key = value` lines).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Directory for CSV, distribution and SVG artifacts.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Exit with status 3 when a result is not KKT-certified.
    #[arg(long, global = true)]
    require_certified: bool,
    /// Also write SVG charts (needs an output directory).
    #[arg(long, global = true)]
    plot: bool,
    /// KKT certification tolerance.
    #[arg(long, global = true, value_name = "X")]
    tol: Option<f64>,
    /// Largest support the optimizer may use.
    #[arg(long, global = true, value_name = "N")]
    max_points: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve at one budget: CSV row plus distribution file.
    Capacity,
    /// Solve along a budget list with warm starts.
    Sweep,
    /// Compact / unbounded / transitional verdict for the optimal support.
    Classify,
    /// Sampled report on the regularity conditions C1-C8.
    CheckConditions,
    /// Re-verify a distribution file against the configured channel.
    VerifyKkt {
        #[arg(long, value_name = "PATH")]
        dist: PathBuf,
    },
    /// Tabulate the noise density and report its entropy.
    NoisePdf,
    /// Preset sweeps: fig1 mixture, fig2 stable in alpha, fig3 stable plus Gaussian.
    Repro {
        #[arg(value_enum)]
        figure: Figure,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
}

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numeric(String),
    Uncertified(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Config(_) => 1,
            Self::Numeric(_) => 2,
            Self::Uncertified(_) => 3,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Self::Config(e.0)
    }
}

impl From<tailcap::Error> for Failure {
    fn from(e: tailcap::Error) -> Self {
        use tailcap::Error as E;
        match e {
            E::Quadrature { .. } | E::DegenerateMultiplier { .. } | E::Unsupported(_) => Self::Numeric(e.to_string()),
            _ => Self::Config(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

/// Loaded config with command-line overrides applied.
pub struct Run {
    pub cfg: RunConfig,
    pub require_certified: bool,
}

impl Run {
    fn out_dir(&self) -> Result<Option<&Path>, Failure> {
        let Some(dir) = self.cfg.output.dir.as_deref() else {
            return Ok(None);
        };
        fs::create_dir_all(dir).map_err(|e| Failure::Config(format!("{}: {e}", dir.display())))?;
        Ok(Some(dir))
    }

    /// Writes `name` into the output directory, if there is one.
    pub fn artifact(&self, name: &str, body: &str) -> Outcome {
        if let Some(dir) = self.out_dir()? {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    }

    pub fn plot(&self, name: &str, svg: impl FnOnce() -> String) -> Outcome {
        if !self.cfg.output.plot {
            return Ok(());
        }
        if self.cfg.output.dir.is_none() {
            return Err(Failure::Config("plotting needs an output directory (--out or output.dir)".into()));
        }
        self.artifact(name, &svg())
    }
}

fn load(cli: &Cli) -> Result<Run, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            config::parse(&text).map_err(|e| Failure::Config(format!("{}: {}", path.display(), e.0)))?
        }
        None => RunConfig::default(),
    };
    if let Some(dir) = &cli.out {
        cfg.output.dir = Some(dir.clone());
    }
    if cli.plot {
        cfg.output.plot = true;
    }
    if let Some(t) = cli.tol {
        cfg.solver.grid.kkt_tol = t;
    }
    if let Some(n) = cli.max_points {
        cfg.solver.max_points = n;
    }
    cfg.solver.validate()?;
    Ok(Run { cfg, require_certified: cli.require_certified })
}

fn needs_config(cli: &Cli) -> Outcome {
    if cli.config.is_none() && !matches!(cli.command, Command::Repro { .. }) {
        return Err(Failure::Config("--config PATH is required".into()));
    }
    Ok(())
}

fn print(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes());
}

fn capacity(run: &Run) -> Outcome {
    let ch = run.cfg.single_channel()?;
    let res = optimize_capacity(&ch, &run.cfg.solver)?;
    for n in &res.notes {
        eprintln!("note: {n}");
    }
    let csv = output::csv(&[output::result_row(&res)]);
    print(&csv);
    run.artifact("capacity.csv", &csv)?;
    run.artifact("distribution.txt", &render_distribution(&DistributionFile::from_result(&res)))?;
    run.plot("residual.svg", || {
        let reach = 4.0 * res.input.points().iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let pts = res.kkt.grid.iter().copied().filter(|(x, _)| x.abs() <= reach).collect();
        output::svg_chart("KKT residual", "x", "s(x)", &[Series { label: "s(x)".into(), points: pts }])
    })?;
    if run.require_certified && !res.certified() {
        return Err(Failure::Uncertified(format!("A={}: result is not KKT-certified", res.budget)));
    }
    Ok(())
}

fn sweep(run: &Run) -> Outcome {
    let budgets = &run.cfg.channel.budgets;
    if budgets.is_empty() {
        return Err(Failure::Config("a budget list is required (channel.budgets or channel.budgets_db)".into()));
    }
    let ch = run.cfg.channel_at(budgets[0])?;
    let results = capacity_sweep(&ch, budgets, &run.cfg.solver)?;
    let mut rows = Vec::new();
    let mut curve = Vec::new();
    let mut first_error = None;
    let mut uncertified = Vec::new();
    for (k, r) in results.iter().enumerate() {
        match r {
            Ok(res) => {
                rows.push(output::result_row(res));
                curve.push((res.budget, res.capacity));
                if !res.certified() {
                    uncertified.push(res.budget);
                }
                run.artifact(&format!("distribution_{k:03}.txt"), &render_distribution(&DistributionFile::from_result(res)))?;
            }
            Err(e) => {
                eprintln!("error: A={}: {e}", budgets[k]);
                first_error.get_or_insert_with(|| Failure::from(e.clone()));
            }
        }
    }
    let csv = output::csv(&rows);
    print(&csv);
    run.artifact("sweep.csv", &csv)?;
    run.plot("sweep.svg", || {
        output::svg_chart("Capacity", "A", "nats", &[Series { label: run.cfg.noise().map_or("", |n| n.family()).into(), points: curve }])
    })?;
    if let Some(e) = first_error {
        return Err(e);
    }
    if run.require_certified && !uncertified.is_empty() {
        return Err(Failure::Uncertified(format!("not certified at A = {uncertified:?}")));
    }
    Ok(())
}

fn classify(run: &Run) -> Outcome {
    let ch = run.cfg.shape_channel()?;
    let q = run.cfg.quad();
    let report = match classify_symbolic(&ch) {
        Ok(v) => {
            let sampled = classify_numeric(&ch, &run.cfg.classify, q).ok();
            output::verdict_report(&v, sampled.as_ref())
        }
        Err(tailcap::Error::Unsupported(_)) => output::verdict_report(&classify_numeric(&ch, &run.cfg.classify, q)?, None),
        Err(e) => return Err(e.into()),
    };
    print(&report);
    run.artifact("classify.txt", &report)
}

fn conditions(run: &Run) -> Outcome {
    let ch = run.cfg.shape_channel()?;
    let report = output::conditions_report(&check_conditions(&ch, run.cfg.quad())?);
    print(&report);
    run.artifact("conditions.txt", &report)
}

fn verify(run: &Run, dist: &Path) -> Outcome {
    let ch = run.cfg.single_channel()?;
    let file = read_distribution(dist)?;
    file.input.check_feasible(&ch)?;
    let ev = InfoEvaluator::with_rule_step(&ch, run.cfg.quad(), run.cfg.solver.rule_step)?;
    let kkt = ev.verify_kkt(&file.input, &run.cfg.solver.grid)?;
    let cap = ev.mutual_information(&file.input)?;
    if file.certified != kkt.certified {
        eprintln!("note: file header says certified={}, verification says {}", file.certified, kkt.certified);
    }
    let csv = output::csv(&[output::csv_row(ch.budget, cap, &kkt, file.input.len())]);
    eprint!("{}", output::kkt_report(&kkt, cap));
    print(&csv);
    run.artifact("verify.csv", &csv)?;
    if run.require_certified && !kkt.certified {
        return Err(Failure::Uncertified(format!("{}: not KKT-certified", dist.display())));
    }
    Ok(())
}

fn noise_pdf(run: &Run) -> Outcome {
    let noise = run.cfg.noise()?;
    let q = run.cfg.quad();
    let p = &run.cfg.pdf;
    if p.x_max <= p.x_min {
        return Err(Failure::Config("pdf.x_max must exceed pdf.x_min".into()));
    }
    let h = noise.entropy(q)?;
    let mut body = format!("# family={} entropy_nats={h:.12}\nx,pdf\n", noise.family());
    let mut pts = Vec::with_capacity(p.points);
    for k in 0..p.points {
        let x = p.x_min + (p.x_max - p.x_min) * k as f64 / (p.points - 1) as f64;
        let v = noise.pdf(x, q)?;
        body.push_str(&format!("{x},{v:.12e}\n"));
        pts.push((x, v));
    }
    print(&body);
    run.artifact("noise_pdf.csv", &body)?;
    run.plot("noise_pdf.svg", || output::svg_chart("Noise density", "x", "p(x)", &[Series { label: noise.family().into(), points: pts }]))
}

fn dispatch(cli: &Cli) -> Outcome {
    needs_config(cli)?;
    let run = load(cli)?;
    match &cli.command {
        Command::Capacity => capacity(&run),
        Command::Sweep => sweep(&run),
        Command::Classify => classify(&run),
        Command::CheckConditions => conditions(&run),
        Command::VerifyKkt { dist } => verify(&run, dist),
        Command::NoisePdf => noise_pdf(&run),
        Command::Repro { figure } => repro::run(&run, *figure),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let msg = match &f {
                Failure::Config(m) => format!("configuration error: {m}"),
                Failure::Numeric(m) => format!("numerical failure: {m}"),
                Failure::Uncertified(m) => format!("uncertified: {m}"),
            };
            eprintln!("tailcap: {msg}");
            ExitCode::from(f.code())
        }
    }
}
