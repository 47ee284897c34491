//! `pooldecode`: run decoder experiments and evaluate the test-count formulas.

mod config;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};
use pooldecode_core::bounds::{lower_bound_order, sufficient_tests_nonuniform, sufficient_tests_uniform, SystemParams};
use pooldecode_core::harness::{
    channel_checks, estimate_aper, find_min_tests, moment_checks, robustness_table, sweep_aper_vs_m, sweep_m_vs_l,
    sweep_noise, write_aper_csv, write_robustness_csv, AperRow, DecoderId, NoiseAxis, INDIRAL_NOTE,
    ORDER_LEVEL_NOTE,
};

use config::{parse_config_text, ConfigError, Settings, SEED_ENV};

#[derive(Parser, Debug)]
#[command(name = "pooldecode", version, about = "Non-defective subset recovery experiments for noisy group testing")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Error rate of each decoder at one M.
    Simulate,
    /// Error rate (axis m, u, q) or minimal M (axis l) over a grid.
    Sweep,
    /// Smallest M reaching the target error rate.
    MinTests,
    /// Sufficient and order-level necessary test counts.
    Bounds,
    /// Test-count penalty for a mis-specified design K.
    Robustness,
    /// Statistical self-checks of the channel simulator.
    Validate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::MinTests => "min-tests",
            Command::Bounds => "bounds",
            Command::Robustness => "robustness",
            Command::Validate => "validate",
        }
    }
}

#[derive(Args, Debug, Default)]
struct Opts {
    /// Population size.
    #[arg(long = "N", global = true)]
    n: Option<usize>,
    /// Number of defectives.
    #[arg(long = "K", global = true)]
    k: Option<usize>,
    /// Size of the declared non-defective subset.
    #[arg(long = "L", global = true)]
    l: Option<usize>,
    /// Number of tests.
    #[arg(long = "M", global = true)]
    m: Option<usize>,
    /// Dilution probability.
    #[arg(long, global = true)]
    u: Option<f64>,
    /// Additive-noise probability.
    #[arg(long, global = true)]
    q: Option<f64>,
    /// Comma-separated decoders: roal, coal, rolpal, rolpalpp, colpal, na1by1, indiral.
    #[arg(long, global = true)]
    decoder: Option<String>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Root seed (default from POOLDECODE_SEED, else 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Defective count assumed by the design, or `auto` for K.
    #[arg(long = "k-hat", global = true)]
    k_hat: Option<String>,
    #[arg(long, global = true)]
    eps0: Option<f64>,
    /// Positive-pool weight for the column decoders, or `auto`.
    #[arg(long, global = true)]
    psi: Option<String>,
    /// `random` or `lowest`.
    #[arg(long = "tie-rule", global = true)]
    tie_rule: Option<String>,
    /// Design with p = 1/((1-u)K) instead of 1/K.
    #[arg(long = "u-known", global = true, num_args = 0..=1, default_missing_value = "true")]
    u_known: Option<bool>,
    /// Target error rate for min-tests, robustness and the L sweep.
    #[arg(long, global = true)]
    target: Option<f64>,
    #[arg(long = "m-lo", global = true)]
    m_lo: Option<usize>,
    #[arg(long = "m-hi", global = true)]
    m_hi: Option<usize>,
    #[arg(long = "probe-trials", global = true)]
    probe_trials: Option<usize>,
    #[arg(long = "final-trials", global = true)]
    final_trials: Option<usize>,
    #[arg(long = "grid-points", global = true)]
    grid_points: Option<usize>,
    /// Sweep axis: m, l, u or q.
    #[arg(long, global = true)]
    axis: Option<String>,
    /// Comma-separated sweep values.
    #[arg(long, global = true)]
    grid: Option<String>,
    /// Comma-separated K_hat / K ratios for robustness.
    #[arg(long, global = true)]
    deltas: Option<String>,
    /// Constant c0 of the sufficient-test formulas.
    #[arg(long, global = true)]
    c0: Option<f64>,
    /// key=value settings file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (default: standard output).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print the resolved settings as a config file and exit.
    #[arg(long = "dump-config", global = true)]
    dump_config: bool,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
}

impl Opts {
    fn flag_map(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                m.insert(k.to_string(), v);
            }
        };
        put("N", self.n.map(|v| v.to_string()));
        put("K", self.k.map(|v| v.to_string()));
        put("L", self.l.map(|v| v.to_string()));
        put("M", self.m.map(|v| v.to_string()));
        put("u", self.u.map(|v| v.to_string()));
        put("q", self.q.map(|v| v.to_string()));
        put("decoder", self.decoder.clone());
        put("trials", self.trials.map(|v| v.to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        put("k_hat", self.k_hat.clone());
        put("eps0", self.eps0.map(|v| v.to_string()));
        put("psi", self.psi.clone());
        put("tie_rule", self.tie_rule.clone());
        put("u_known", self.u_known.map(|v| v.to_string()));
        put("target", self.target.map(|v| v.to_string()));
        put("m_lo", self.m_lo.map(|v| v.to_string()));
        put("m_hi", self.m_hi.map(|v| v.to_string()));
        put("probe_trials", self.probe_trials.map(|v| v.to_string()));
        put("final_trials", self.final_trials.map(|v| v.to_string()));
        put("grid_points", self.grid_points.map(|v| v.to_string()));
        put("axis", self.axis.clone());
        put("grid", self.grid.clone());
        put("deltas", self.deltas.clone());
        put("c0", self.c0.map(|v| v.to_string()));
        m
    }
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<pooldecode_core::Error> for Failure {
    fn from(e: pooldecode_core::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.opts.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn resolve(opts: &Opts) -> Result<Settings, Failure> {
    let file = match &opts.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            parse_config_text(&text)?
        }
        None => BTreeMap::new(),
    };
    Ok(Settings::resolve(&opts.flag_map(), &file, std::env::var(SEED_ENV).ok())?)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let settings = resolve(&cli.opts)?;
    if cli.opts.dump_config {
        let mut out = output(&cli.opts)?;
        for line in settings.lines() {
            writeln!(out, "{line}")?;
        }
        out.flush()?;
        return Ok(());
    }
    if let Some(threads) = cli.opts.threads {
        if threads == 0 {
            return Err(Failure::Usage("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Runtime(e.to_string()))?;
    }

    let mut metadata = vec![format!("command={}", cli.command.name())];
    metadata.extend(settings.lines());
    if settings.decoders()?.contains(&DecoderId::InDirAl) {
        metadata.push(INDIRAL_NOTE.to_string());
    }

    match cli.command {
        Command::Simulate => simulate(&cli.opts, &settings, &metadata),
        Command::Sweep => sweep(&cli.opts, &settings, &metadata),
        Command::MinTests => min_tests(&cli.opts, &settings, &metadata),
        Command::Bounds => bounds(&cli.opts, &settings, metadata),
        Command::Robustness => robustness(&cli.opts, &settings, &metadata),
        Command::Validate => validate(&cli.opts, &settings, &metadata),
    }
}

fn output(opts: &Opts) -> Result<Box<dyn Write>, Failure> {
    Ok(match &opts.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", path.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Base spec with the structural checks run up front, so inconsistent sizes
/// are reported as usage errors.
fn base_spec(settings: &Settings) -> Result<pooldecode_core::ExperimentSpec, Failure> {
    let spec = settings.spec()?;
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(spec)
}

fn simulate(opts: &Opts, settings: &Settings, metadata: &[String]) -> Result<(), Failure> {
    let base = base_spec(settings)?;
    let mut rows = Vec::new();
    for decoder in settings.decoders()? {
        let spec = pooldecode_core::ExperimentSpec { decoder, ..base };
        spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        rows.push(AperRow::from_estimate(&spec, &estimate_aper(&spec)?));
    }
    write_aper_csv(output(opts)?, &rows, metadata)?;
    Ok(())
}

fn sweep(opts: &Opts, settings: &Settings, metadata: &[String]) -> Result<(), Failure> {
    let base = base_spec(settings)?;
    let decoders = settings.decoders()?;
    let axis: String = settings.get("axis")?;
    let sweep_id = format!("{axis}-seed{}", base.root_seed);
    let rows = match axis.as_str() {
        "m" => sweep_aper_vs_m(&base, &decoders, &settings.list::<usize>("grid")?, &sweep_id)?,
        "l" => sweep_m_vs_l(&base, &decoders, &settings.list::<usize>("grid")?, &settings.search()?, &sweep_id)?,
        "u" => sweep_noise(&base, &decoders, &NoiseAxis::Dilution(settings.list("grid")?), &sweep_id)?,
        _ => sweep_noise(&base, &decoders, &NoiseAxis::Additive(settings.list("grid")?), &sweep_id)?,
    };
    write_aper_csv(output(opts)?, &rows, metadata)?;
    Ok(())
}

fn min_tests(opts: &Opts, settings: &Settings, metadata: &[String]) -> Result<(), Failure> {
    let base = base_spec(settings)?;
    let search = settings.search()?;
    let mut rows = Vec::new();
    for decoder in settings.decoders()? {
        let spec = pooldecode_core::ExperimentSpec { decoder, ..base };
        let found = find_min_tests(&spec, &search)?;
        let mut row = AperRow::from_estimate(&pooldecode_core::ExperimentSpec { m: found.m, ..spec }, &found.estimate);
        row.flags.push_str(&format!(
            ";m_ci:{}..{};probe_trials:{};trials_spent:{}",
            found.m_ci.0, found.m_ci.1, search.probe_trials, found.trials_spent
        ));
        rows.push(row);
    }
    write_aper_csv(output(opts)?, &rows, metadata)?;
    Ok(())
}

fn bounds(opts: &Opts, settings: &Settings, mut metadata: Vec<String>) -> Result<(), Failure> {
    let (n, k, l): (usize, usize, usize) = (settings.get("N")?, settings.get("K")?, settings.get("L")?);
    let noise = settings.noise()?;
    let psi0 = match settings.get::<String>("psi")?.as_str() {
        "auto" => 0.0,
        _ => settings.get("psi")?,
    };
    let params = SystemParams::new(n, k, l, noise)
        .map_err(|e| Failure::Usage(e.to_string()))?
        .with_c0(settings.get("c0")?)
        .with_psi0(psi0);
    let nonuniform = sufficient_tests_nonuniform(&params)?;
    let uniform = sufficient_tests_uniform(&params)?;
    let mut rows = vec![
        ("sufficient_nonuniform".to_string(), nonuniform.m.to_string()),
        ("sufficient_nonuniform_raw".to_string(), nonuniform.raw.to_string()),
        ("sufficient_uniform".to_string(), uniform.m.to_string()),
        ("sufficient_uniform_raw".to_string(), uniform.raw.to_string()),
    ];
    if nonuniform.k_below_two {
        metadata.push("warning: sufficient test counts assume K >= 2".to_string());
    }
    match lower_bound_order(n, k, l, noise) {
        Ok(order) => {
            metadata.push(format!("order_* rows: {ORDER_LEVEL_NOTE}"));
            let scaled = order.scaled(k);
            rows.extend([
                ("order_no_noise".to_string(), order.no_noise.to_string()),
                ("order_dilution".to_string(), order.dilution.to_string()),
                ("order_additive".to_string(), order.additive.to_string()),
                ("order_no_noise_times_logK".to_string(), scaled.no_noise.to_string()),
                ("order_dilution_times_logK".to_string(), scaled.dilution.to_string()),
                ("order_additive_times_logK".to_string(), scaled.additive.to_string()),
            ]);
        }
        Err(e) => metadata.push(format!("order-level bounds skipped: {e}")),
    }

    let mut out = output(opts)?;
    for line in &metadata {
        writeln!(out, "# {line}")?;
    }
    writeln!(out, "quantity,value")?;
    for (name, value) in rows {
        writeln!(out, "{name},{value}")?;
    }
    out.flush()?;
    Ok(())
}

fn robustness(opts: &Opts, settings: &Settings, metadata: &[String]) -> Result<(), Failure> {
    let base = base_spec(settings)?;
    let rows = robustness_table(&base, &settings.decoders()?, &settings.list("deltas")?, &settings.search()?)?;
    write_robustness_csv(output(opts)?, &rows, metadata)?;
    Ok(())
}

fn validate(opts: &Opts, settings: &Settings, metadata: &[String]) -> Result<(), Failure> {
    let (n, k): (usize, usize) = (settings.get("N")?, settings.get("K")?);
    let noise = settings.noise()?;
    let seed: u64 = settings.get("seed")?;
    let z = 4.0;
    let mut checks = channel_checks(n, k, noise, 200_000, z, seed)?;
    checks.extend(moment_checks(n, k, noise, settings.get("M")?, 200, z, seed)?);

    let mut out = output(opts)?;
    for line in metadata {
        writeln!(out, "# {line}")?;
    }
    let mut failed = 0;
    for c in &checks {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        writeln!(out, "{verdict} {}: {}", c.name, c.detail)?;
        failed += usize::from(!c.passed);
    }
    out.flush()?;
    if failed > 0 {
        return Err(Failure::Runtime(format!("{failed} of {} checks failed", checks.len())));
    }
    Ok(())
}
