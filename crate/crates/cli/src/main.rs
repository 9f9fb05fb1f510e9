mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mixlab::checks::{run_checks, CheckConfig};
use mixlab::dispersion::{dispersion_report, log_grid, ENVELOPE_FACTOR};
use mixlab::pseudospectral::{default_refine_tol, pseudo_abscissa};
use mixlab::report::{self, svg_plot, Scale, Series};
use mixlab::semigroup::{lambda_rate, scaling_sweep, worst_case_rate, DecaySettings, FitWindow, Geometry};
use mixlab::{assemble_operator, build_grid, ModeOperator, VelocityProfile};

use config::{Mode, RunConfig, DEFAULT_CONFIG};

#[derive(Parser)]
#[command(name = "mixlab", version, about = "Enhanced dissipation and dispersion of passive scalars in pipe flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Config file; the built-in default is used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overrides `out` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Random seed, overrides `seed` from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    plot: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Nondegeneracy order of the profile.
    Order,
    /// Level sets, neighborhoods and coverings.
    Levelset,
    /// Smallest singular value curves and pseudospectral abscissa.
    Psa,
    /// Worst-case decay traces and fits.
    Decay,
    /// Decay-rate scaling sweep over `nu_list`.
    Sweep,
    /// `k`-integral against the dispersion envelope.
    Dispersion,
    /// Full invariant suite.
    Verify,
}

enum Failure {
    Config(String),
    Compute(mixlab::Error),
    Verification(String),
}

impl From<mixlab::Error> for Failure {
    fn from(e: mixlab::Error) -> Self {
        Failure::Compute(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Compute(e.into())
    }
}

type Outcome = Result<(), Failure>;

struct Run {
    cfg: RunConfig,
    profile: VelocityProfile,
    out: PathBuf,
    plot: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: ConfigError: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {}: {e}", e.code());
            ExitCode::from(3)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("error: VerificationFailure: {msg}");
            ExitCode::from(4)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path),
        None => RunConfig::parse(DEFAULT_CONFIG),
    }
    .map_err(Failure::Config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Failure::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::Config(e.to_string()))?;
    }
    let profile = VelocityProfile::with_order_cap(cfg.coeffs.clone(), cfg.radius, cfg.order_cap)?;
    std::fs::create_dir_all(&cfg.out)?;
    let run = Run { out: cfg.out.clone(), cfg, profile, plot: cli.plot };
    match cli.command {
        Command::Order => order(&run),
        Command::Levelset => levelset(&run),
        Command::Psa => psa(&run),
        Command::Decay => decay(&run),
        Command::Sweep => sweep(&run),
        Command::Dispersion => dispersion(&run),
        Command::Verify => verify(&run),
    }
}

impl Run {
    fn create(&self, name: &str) -> std::io::Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.out.join(name))?))
    }

    fn svg(&self, name: &str, body: String) -> Outcome {
        if self.plot {
            std::fs::write(self.out.join(name), body)?;
        }
        Ok(())
    }

    /// In disc mode the wavenumber `k` doubles as the angular index.
    fn ell(&self) -> i32 {
        match self.cfg.mode {
            Mode::Pipe => self.cfg.ell,
            Mode::Disc => self.cfg.k as i32,
        }
    }

    fn operator(&self, nu: f64) -> mixlab::Result<ModeOperator> {
        let ell = self.ell();
        let grid = build_grid(self.profile.radius(), self.cfg.grid_size, ell)?;
        assemble_operator(&grid, &self.profile, nu, self.cfg.k, ell)
    }

    fn settings(&self) -> DecaySettings {
        DecaySettings {
            grid_size: self.cfg.grid_size,
            trials: self.cfg.trials,
            seed: self.cfg.seed,
            window: FitWindow::NormBand { upper: self.cfg.fit_upper, lower: self.cfg.fit_lower },
            lambda_samples: self.cfg.lambda_samples,
            ..DecaySettings::default()
        }
    }

    fn refine_tol(&self, op: &ModeOperator) -> f64 {
        self.cfg.refine_tol.unwrap_or_else(|| default_refine_tol(op))
    }
}

fn indexed(stem: &str, i: usize, ext: &str) -> String {
    format!("{stem}_{i}.{ext}")
}

fn order(run: &Run) -> Outcome {
    let m = run.profile.order();
    let mut f = run.create("order.csv")?;
    writeln!(f, "m,order_cap,radius")?;
    writeln!(f, "{m},{},{}", run.profile.order_cap(), report::num(run.profile.radius()))?;
    f.flush()?;
    println!("m={m}");
    Ok(())
}

fn levelset(run: &Run) -> Outcome {
    let p = &run.profile;
    let (lo, hi) = p.range();
    let count = run.cfg.lambda_count;
    let mut rows = Vec::new();
    for &delta in &run.cfg.delta_list {
        for i in 0..count {
            let lambda = lo + (hi - lo) * i as f64 / (count - 1) as f64;
            let (e, et) = p.neighborhood_sets(lambda, delta)?;
            let cover = p.covering(lambda, delta)?;
            rows.push((e, et, cover));
        }
    }
    report::write_covering(run.create("levelset.csv")?, &rows)?;
    let labels: Vec<String> = run.cfg.delta_list.iter().map(|d| format!("delta = {d}")).collect();
    let series: Vec<Series> = labels
        .iter()
        .enumerate()
        .map(|(j, label)| Series {
            label,
            points: rows[j * count..(j + 1) * count].iter().map(|(_, _, c)| (c.lambda, c.constant())).collect(),
        })
        .collect();
    run.svg("levelset.svg", svg_plot("Covering length / delta", "lambda", "length / delta", &series, Scale::Linear, Scale::Linear))
}

fn psa(run: &Run) -> Outcome {
    let m = run.profile.order();
    let mut results = Vec::new();
    for (i, &nu) in run.cfg.nu_list.iter().enumerate() {
        let op = run.operator(nu)?;
        let result = pseudo_abscissa(&op, run.cfg.lambda_samples, run.refine_tol(&op))?;
        report::write_sigma_curve(run.create(&indexed("psa_curve", i, "csv"))?, &result.curve)?;
        let series = [Series {
            label: "sigma_min",
            points: result.curve.lambdas.iter().cloned().zip(result.curve.sigmas.iter().cloned()).collect(),
        }];
        run.svg(
            &indexed("psa_curve", i, "svg"),
            svg_plot(&format!("sigma_min, nu = {nu}"), "lambda", "sigma_min", &series, Scale::Linear, Scale::Log),
        )?;
        results.push((nu, result));
    }
    let rows: Vec<_> = results.iter().map(|(nu, r)| (*nu, run.cfg.k, run.ell(), m, r)).collect();
    report::write_psa_summary(run.create("psa.csv")?, &rows)?;
    Ok(())
}

/// Expected decay scale: `Λ` for `|k| > ν`, else the crossover rate `k²/ν`,
/// and `ν` itself for `k = 0`.
fn decay_scale(nu: f64, k: f64, m: usize) -> mixlab::Result<f64> {
    if k == 0.0 {
        Ok(nu)
    } else if k.abs() <= nu {
        Ok(k * k / nu)
    } else {
        lambda_rate(nu, k, m)
    }
}

fn decay(run: &Run) -> Outcome {
    let m = run.profile.order();
    let settings = run.settings();
    let mut series = Vec::new();
    for (i, &nu) in run.cfg.nu_list.iter().enumerate() {
        let op = run.operator(nu)?;
        let scale = decay_scale(nu, run.cfg.k, m)?;
        let worst = worst_case_rate(&op, scale, &settings)?;
        report::write_trace(run.create(&indexed("decay", i, "csv"))?, &worst.trace)?;
        report::write_fit_summary(run.create(&indexed("decay_fit", i, "csv"))?, &worst.trace, Some(scale))?;
        series.push((nu, worst.trace));
    }
    let labels: Vec<String> = series.iter().map(|(nu, _)| format!("nu = {nu}")).collect();
    let plotted: Vec<Series> = series
        .iter()
        .zip(&labels)
        .map(|((_, t), label)| Series {
            label,
            points: t.times.iter().cloned().zip(t.norms.iter().cloned()).collect(),
        })
        .collect();
    run.svg("decay.svg", svg_plot("Worst-case decay", "t", "norm ratio", &plotted, Scale::Log, Scale::Log))
}

fn sweep(run: &Run) -> Outcome {
    let geometry = match run.cfg.mode {
        Mode::Pipe => Geometry::Pipe,
        Mode::Disc => Geometry::Disc,
    };
    let report = scaling_sweep(&run.profile, run.cfg.k, run.cfg.ell, &run.cfg.nu_list, geometry, &run.settings())?;
    report::write_sweep(run.create("sweep.csv")?, &report)?;
    report::write_sweep_summary(run.create("sweep_summary.csv")?, &report)?;
    let series = [
        Series { label: "fitted rate", points: report.rows.iter().map(|r| (r.nu, r.fit_rate)).collect() },
        Series { label: "Lambda", points: report.rows.iter().map(|r| (r.nu, r.lambda)).collect() },
    ];
    run.svg("sweep.svg", svg_plot("Decay rate scaling", "nu", "rate", &series, Scale::Log, Scale::Log))
}

fn dispersion(run: &Run) -> Outcome {
    let m = run.profile.order();
    let c1 = match run.cfg.c1 {
        Some(c1) => c1,
        None => {
            let nu = run.cfg.nu_list[0];
            let op = run.operator(nu)?;
            let psa = pseudo_abscissa(&op, run.cfg.lambda_samples, run.refine_tol(&op))?;
            psa.c1_effective
                .ok_or_else(|| mixlab::Error::InvalidMode("c1 needs k != 0 or an explicit value".into()))?
        }
    };
    let mut reports = Vec::new();
    for (i, &nu) in run.cfg.nu_list.iter().enumerate() {
        let t_max = run.cfg.t_max_scale / nu;
        if !(t_max > run.cfg.t_min) {
            return Err(Failure::Config(format!("t_max_scale / nu = {t_max} must exceed t_min")));
        }
        let times = log_grid(run.cfg.t_min, t_max, run.cfg.t_count);
        let r = dispersion_report(nu, m, c1, 0.5 * c1, &times)?;
        report::write_dispersion(run.create(&indexed("dispersion", i, "csv"))?, &r)?;
        let series = [
            Series { label: "I", points: (0..r.times.len()).map(|j| (r.times[j], r.i_low[j] + r.i_high[j])).collect() },
            Series { label: "envelope", points: r.times.iter().cloned().zip(r.envelope.iter().cloned()).collect() },
        ];
        run.svg(
            &indexed("dispersion", i, "svg"),
            svg_plot(&format!("k-integral, nu = {nu}"), "t", "I(t)", &series, Scale::Log, Scale::Log),
        )?;
        reports.push(r);
    }
    report::write_dispersion_summary(run.create("dispersion_summary.csv")?, &reports)?;
    match reports.iter().find(|r| !(r.max_ratio <= ENVELOPE_FACTOR)) {
        Some(r) => Err(Failure::Verification(format!(
            "envelope exceeded at nu = {}: max ratio {} > {ENVELOPE_FACTOR}",
            r.nu, r.max_ratio
        ))),
        None => Ok(()),
    }
}

fn verify(run: &Run) -> Outcome {
    let cfg = CheckConfig {
        profile: run.profile.clone(),
        nu: run.cfg.nu_list[0],
        k: run.cfg.k,
        ell: run.ell(),
        grid_size: run.cfg.grid_size,
        lambda_samples: run.cfg.lambda_samples,
        trials: run.cfg.trials,
        seed: run.cfg.seed,
    };
    let outcomes = run_checks(&cfg);
    write_outcomes(&run.out.join("verify.csv"), &outcomes)?;
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("failed checks: {}", failed.join(", "))))
    }
}

fn write_outcomes(path: &Path, outcomes: &[mixlab::checks::CheckOutcome]) -> std::io::Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    writeln!(f, "check,passed,detail")?;
    for o in outcomes {
        writeln!(f, "{},{},\"{}\"", o.name, o.passed, o.detail.replace('"', "\"\""))?;
    }
    f.flush()
}
