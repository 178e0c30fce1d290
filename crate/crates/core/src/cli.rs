//! The `agof` command line.
//!
//! Exit codes: 0 success, 2 input or validation error, 3 numerical failure.
//! Errors are reported as a single line `error[CODE]: message` on stderr.

use crate::bootstrap::BootstrapConfig;
use crate::decision::{agof_test, dual_test, improvement_from_baseline, Assessment, Method, TestConfig};
use crate::distributions::{fit_mle_with_em, log_likelihood, projection_params, EmConfig, FamilyId, FittedModel};
use crate::error::{AgofError, Result};
use crate::harness::{power_curve, PowerStudyConfig};
use crate::input::{read_sample, CleaningOptions, InputStats};
use crate::metric::{analytic_distance, dirac_distance, empirical_model_distance, DistanceConfig};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "agof", version, about = "Almost goodness-of-fit testing with L^p distances")]
struct Cli {
    /// Cap on worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Sample file: one value per line, optional header.
    input: PathBuf,
    /// Drop NaN and infinite values instead of failing.
    #[arg(long)]
    drop_nonfinite: bool,
    /// Drop values <= 0 instead of failing.
    #[arg(long)]
    drop_nonpositive: bool,
}

impl InputArgs {
    fn load(&self) -> Result<(crate::Sample, InputStats)> {
        read_sample(
            &self.input,
            CleaningOptions {
                drop_nonfinite: self.drop_nonfinite,
                drop_nonpositive: self.drop_nonpositive,
            },
        )
    }
}

#[derive(Debug, Args)]
struct FamilyArgs {
    /// exponential, normal, gaussian_mixture or dirac.
    #[arg(long)]
    family: String,
    /// Number of mixture components.
    #[arg(long)]
    k: Option<usize>,
}

impl FamilyArgs {
    fn family(&self) -> Result<FamilyId> {
        if self.k.is_some() && !self.family.starts_with("gaussian_mixture") && self.family != "mixture" {
            return Err(AgofError::Config("--k only applies to gaussian_mixture".into()));
        }
        FamilyId::parse(&self.family, self.k)
    }
}

#[derive(Debug, Args)]
struct EmArgs {
    /// EM restarts from random initializations.
    #[arg(long, default_value_t = 10)]
    em_restarts: usize,
    /// EM iteration cap per restart.
    #[arg(long, default_value_t = 500)]
    em_max_iter: usize,
}

impl EmArgs {
    fn config(&self, seed: u64) -> EmConfig {
        EmConfig {
            restarts: self.em_restarts,
            max_iter: self.em_max_iter,
            seed,
            ..EmConfig::default()
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a family by maximum likelihood.
    Fit {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        em: EmArgs,
        /// Seed for EM initialization.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Observed L^p distance between the sample and its fitted model (CSV).
    Distance {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        family: FamilyArgs,
        /// Comma-separated list of p values.
        #[arg(long, default_value = "1,2")]
        p: String,
        #[command(flatten)]
        em: EmArgs,
        /// Seed for EM initialization.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the AGoF test (or the dual test) and print the report as JSON.
    Test {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        family: FamilyArgs,
        /// Order of the L^p distance (>= 1).
        #[arg(long)]
        p: f64,
        /// Tolerance: H0 is that the distance is at least epsilon.
        #[arg(long)]
        epsilon: f64,
        /// Significance level.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// bootstrap1 or bootstrap2.
        #[arg(long, default_value = "bootstrap2")]
        method: String,
        /// Bootstrap replicates.
        #[arg(long = "B", default_value_t = 2000)]
        b: usize,
        /// Seed for resampling and EM.
        #[arg(long)]
        seed: u64,
        /// Run the dual test (H1: distance above epsilon).
        #[arg(long)]
        dual: bool,
        /// Also write the replicate norms as CSV to this path.
        #[arg(long)]
        dump_boot: Option<PathBuf>,
        #[command(flatten)]
        em: EmArgs,
    },
    /// Minimum margin and improvement coefficient for both rules (JSON);
    /// with --kmax, loops mixtures k = 1..kmax.
    Mindist {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        family: FamilyArgs,
        /// Fit gaussian_mixture for every k from 1 to kmax.
        #[arg(long)]
        kmax: Option<usize>,
        /// Order of the L^p distance (>= 1).
        #[arg(long)]
        p: f64,
        /// Significance level.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Bootstrap replicates.
        #[arg(long = "B", default_value_t = 2000)]
        b: usize,
        /// Seed for resampling and EM.
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        em: EmArgs,
    },
    /// Monte Carlo power curve (CSV).
    Power {
        /// True distribution, e.g. weibull:2,1 or a JSON object.
        #[arg(long)]
        truth: String,
        #[command(flatten)]
        family: FamilyArgs,
        /// Order of the L^p distance (>= 1).
        #[arg(long)]
        p: f64,
        /// Sample size per run.
        #[arg(long)]
        n: usize,
        /// Significance level.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Comma-separated methods.
        #[arg(long, default_value = "bootstrap1,bootstrap2")]
        method: String,
        /// Comma-separated epsilon grid, or lo:hi:count.
        #[arg(long)]
        epsilon: String,
        /// Monte Carlo runs.
        #[arg(long, default_value_t = 500)]
        runs: usize,
        /// Bootstrap replicates per run.
        #[arg(long = "B", default_value_t = 500)]
        b: usize,
        /// Master seed.
        #[arg(long)]
        seed: u64,
    },
    /// L^p distance between two analytic distributions (JSON).
    Oracle {
        /// First distribution, e.g. weibull:2,1 or a JSON object.
        #[arg(long)]
        f: String,
        /// Second distribution; omit and pass --family to use the projection of F.
        #[arg(long)]
        g: Option<String>,
        /// Family to project F onto when --g is omitted.
        #[arg(long)]
        family: Option<String>,
        /// Order of the L^p distance (>= 1).
        #[arg(long)]
        p: f64,
    },
}

enum Output {
    Json(Value),
    Csv(Vec<u8>),
}

fn parse_list<T>(s: &str, what: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let items: Vec<T> = s.split(',').filter(|t| !t.trim().is_empty()).map(|t| f(t.trim())).collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(AgofError::Config(format!("{what} list is empty")));
    }
    Ok(items)
}

fn parse_f64(t: &str) -> Result<f64> {
    t.parse().map_err(|_| AgofError::Input(format!("bad number '{t}'")))
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let lo = parse_f64(parts[0])?;
        let hi = parse_f64(parts[1])?;
        let count: usize = parts[2]
            .parse()
            .map_err(|_| AgofError::Input(format!("bad grid count '{}'", parts[2])))?;
        if count < 2 || !(hi > lo) {
            return Err(AgofError::Config("grid lo:hi:count needs hi > lo and count >= 2".into()));
        }
        return Ok((0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect());
    }
    parse_list(s, "epsilon", parse_f64)
}

fn model_json(model: &FittedModel) -> Value {
    serde_json::to_value(model).expect("models serialize")
}

fn run_fit(input: &InputArgs, family: &FamilyArgs, em: &EmArgs, seed: u64) -> Result<Output> {
    let family = family.family()?;
    let em = em.config(seed);
    em.validate()?;
    let (sample, stats) = input.load()?;
    let model = FittedModel::new(family, fit_mle_with_em(family, &sample, &em)?)?;
    let mut v = model_json(&model);
    let obj = v.as_object_mut().expect("model JSON is an object");
    obj.insert("n".into(), json!(sample.len()));
    if model.is_continuous() {
        obj.insert("log_likelihood".into(), json!(log_likelihood(&model, &sample)?));
    }
    obj.insert("input".into(), json!(stats));
    Ok(Output::Json(v))
}

fn run_distance(input: &InputArgs, family: &FamilyArgs, ps: &str, em: &EmArgs, seed: u64) -> Result<Output> {
    let family = family.family()?;
    let ps = parse_list(ps, "p", parse_f64)?;
    let cfgs = ps.iter().map(|&p| DistanceConfig::new(p)).collect::<Result<Vec<_>>>()?;
    let em = em.config(seed);
    em.validate()?;
    let (sample, _) = input.load()?;
    let model = FittedModel::new(family, fit_mle_with_em(family, &sample, &em)?)?;
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| AgofError::Input(format!("writing CSV: {e}"));
    wtr.write_record(["family", "p", "obs_norm", "abs_error_bound", "dirac_distance"]).map_err(io)?;
    for cfg in &cfgs {
        let (value, bound) = if model.is_continuous() {
            let r = empirical_model_distance(&sample, &model, cfg)?;
            (r.value, r.abs_error_bound)
        } else {
            let r = dirac_distance(&sample, model.mean(), cfg.p)?;
            (r.value, r.abs_error_bound)
        };
        let base = dirac_distance(&sample, sample.mean(), cfg.p)?.value;
        wtr.write_record([
            family.to_string(),
            cfg.p.to_string(),
            value.to_string(),
            bound.to_string(),
            base.to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = wtr.into_inner().map_err(|e| AgofError::Input(format!("writing CSV: {e}")))?;
    Ok(Output::Csv(bytes))
}

#[allow(clippy::too_many_arguments)]
fn run_test(
    input: &InputArgs,
    family: &FamilyArgs,
    p: f64,
    epsilon: f64,
    alpha: f64,
    method: &str,
    b: usize,
    seed: u64,
    dual: bool,
    dump_boot: Option<&Path>,
    em: &EmArgs,
) -> Result<Output> {
    let family = family.family()?;
    let cfg = TestConfig {
        p,
        epsilon,
        alpha,
        method: Method::parse(method)?,
        bootstrap: BootstrapConfig::new(b, seed),
        em: em.config(seed),
    };
    cfg.validate()?;
    let (sample, stats) = input.load()?;
    let report = if dual {
        dual_test(&sample, family, &cfg)?
    } else {
        agof_test(&sample, family, &cfg)?
    };
    if let Some(path) = dump_boot {
        let mut buf = Vec::new();
        report.boot.write_csv(&mut buf)?;
        write_atomic(path, &buf)?;
    }
    let mut v = serde_json::to_value(&report).expect("reports serialize");
    v.as_object_mut().expect("object").insert("input".into(), json!(stats));
    Ok(Output::Json(v))
}

#[allow(clippy::too_many_arguments)]
fn run_mindist(
    input: &InputArgs,
    family: &FamilyArgs,
    kmax: Option<usize>,
    p: f64,
    alpha: f64,
    b: usize,
    seed: u64,
    em: &EmArgs,
) -> Result<Output> {
    let families: Vec<FamilyId> = match kmax {
        Some(kmax) => {
            if !matches!(family.family()?, FamilyId::GaussianMixture { .. }) {
                return Err(AgofError::Config("--kmax requires --family gaussian_mixture".into()));
            }
            if kmax == 0 {
                return Err(AgofError::Config("--kmax must be >= 1".into()));
            }
            (1..=kmax).map(FamilyId::gaussian_mixture).collect::<Result<_>>()?
        }
        None => vec![family.family()?],
    };
    crate::metric::validate_p(p)?;
    crate::decision::validate_alpha(alpha)?;
    let boot = BootstrapConfig::new(b, seed);
    boot.validate()?;
    let em = em.config(seed);
    em.validate()?;
    let (sample, stats) = input.load()?;
    let baseline = dirac_distance(&sample, sample.mean(), p)?.value;

    let mut rows = Vec::new();
    for fam in families {
        let a = Assessment::run(&sample, fam, p, &boot, &em)?;
        let mut row = json!({
            "family": fam.to_string(),
            "k": match fam { FamilyId::GaussianMixture { k } => json!(k), _ => Value::Null },
            "model": model_json(&a.model),
            "obs_norm": a.obs.value,
            "sigma_boot": a.boot.sigma_boot,
            "n_skipped": a.boot.n_skipped,
        });
        for method in [Method::Bootstrap1, Method::Bootstrap2] {
            let margin = a.min_margin(alpha, method)?;
            let (raw, clamped) = improvement_from_baseline(margin, baseline)?;
            row[method.to_string()] = json!({
                "min_margin": margin,
                "improvement": clamped,
                "improvement_raw": raw,
            });
        }
        rows.push(row);
    }
    Ok(Output::Json(json!({
        "p": p,
        "alpha": alpha,
        "B": b,
        "seed": seed,
        "n": sample.len(),
        "sample_mean": sample.mean(),
        "dirac_distance": baseline,
        "rows": rows,
        "input": stats,
        "engine_version": crate::ENGINE_VERSION,
    })))
}

#[allow(clippy::too_many_arguments)]
fn run_power(
    truth: &str,
    family: &FamilyArgs,
    p: f64,
    n: usize,
    alpha: f64,
    methods: &str,
    epsilon: &str,
    runs: usize,
    b: usize,
    seed: u64,
) -> Result<Output> {
    let cfg = PowerStudyConfig {
        true_dist: FittedModel::parse_spec(truth)?,
        family: family.family()?,
        p,
        n,
        alpha,
        methods: parse_list(methods, "method", Method::parse)?,
        epsilon_grid: parse_grid(epsilon)?,
        runs,
        b,
        seed,
        em: EmConfig {
            seed,
            ..EmConfig::default()
        },
    };
    cfg.validate()?;
    let curve = power_curve(&cfg)?;
    let mut buf = Vec::new();
    curve.write_csv(&mut buf)?;
    Ok(Output::Csv(buf))
}

fn run_oracle(f: &str, g: Option<&str>, family: Option<&str>, p: f64) -> Result<Output> {
    let cfg = DistanceConfig::new(p)?;
    let f = FittedModel::parse_spec(f)?;
    let g = match (g, family) {
        (Some(g), None) => FittedModel::parse_spec(g)?,
        (None, Some(fam)) => {
            let fam = FamilyId::parse(fam, None)?;
            FittedModel::new(fam, projection_params(&f, fam)?)?
        }
        _ => return Err(AgofError::Config("oracle needs exactly one of --g or --family".into())),
    };
    let r = analytic_distance(&f, &g, &cfg)?;
    Ok(Output::Json(json!({
        "f": model_json(&f),
        "g": model_json(&g),
        "p": p,
        "value": r.value,
        "abs_error_bound": r.abs_error_bound,
    })))
}

fn dispatch(cmd: &Command) -> Result<Output> {
    match cmd {
        Command::Fit { input, family, em, seed } => run_fit(input, family, em, *seed),
        Command::Distance { input, family, p, em, seed } => run_distance(input, family, p, em, *seed),
        Command::Test {
            input,
            family,
            p,
            epsilon,
            alpha,
            method,
            b,
            seed,
            dual,
            dump_boot,
            em,
        } => run_test(input, family, *p, *epsilon, *alpha, method, *b, *seed, *dual, dump_boot.as_deref(), em),
        Command::Mindist {
            input,
            family,
            kmax,
            p,
            alpha,
            b,
            seed,
            em,
        } => run_mindist(input, family, *kmax, *p, *alpha, *b, *seed, em),
        Command::Power {
            truth,
            family,
            p,
            n,
            alpha,
            method,
            epsilon,
            runs,
            b,
            seed,
        } => run_power(truth, family, *p, *n, *alpha, method, epsilon, *runs, *b, *seed),
        Command::Oracle { f, g, family, p } => run_oracle(f, g.as_deref(), family.as_deref(), *p),
    }
}

/// Writes `bytes` to a temporary file next to `path`, then renames it into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| AgofError::Input(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn render(out: Output) -> Vec<u8> {
    match out {
        Output::Json(v) => {
            let mut s = serde_json::to_string_pretty(&v).expect("JSON values serialize");
            s.push('\n');
            s.into_bytes()
        }
        Output::Csv(b) => b,
    }
}

fn report_error(stderr: &mut dyn Write, code: &str, msg: &str) {
    let one_line = msg.lines().map(str::trim).filter(|l| !l.is_empty()).collect::<Vec<_>>().join(" ");
    let _ = writeln!(stderr, "error[{code}]: {one_line}");
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(stdout, "{e}");
                    0
                }
                _ => {
                    let rendered = e.render().to_string();
                    let summary: Vec<&str> = rendered.lines().take_while(|l| !l.trim().is_empty()).collect();
                    let summary = summary.join(" ");
                    report_error(stderr, "USAGE", summary.trim_start_matches("error: "));
                    2
                }
            };
        }
    };

    let result = match cli.threads {
        Some(0) => Err(AgofError::Config("--threads must be >= 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| AgofError::Config(format!("cannot build thread pool: {e}")))
            .and_then(|pool| pool.install(|| dispatch(&cli.command))),
        None => dispatch(&cli.command),
    };

    let written = result.and_then(|out| {
        let bytes = render(out);
        match &cli.out {
            Some(path) => write_atomic(path, &bytes),
            None => stdout
                .write_all(&bytes)
                .map_err(|e| AgofError::Input(format!("cannot write output: {e}"))),
        }
    });

    match written {
        Ok(()) => 0,
        Err(e) => {
            report_error(stderr, e.code(), &e.to_string());
            if e.is_numerical() {
                3
            } else {
                2
            }
        }
    }
}
