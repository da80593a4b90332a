//! Command-line front end.
//!
//! Exit status: 0 on success, 1 on invalid input or a failed run, 2 when a
//! statistical acceptance check fails.

mod config;
mod run;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{
    parse_config, parse_grid, parse_law, validate, Diagnostic, ExperimentConfig, OutputConfig,
    Task, DEFAULT_N_GRID,
};
pub use run::{run, Outcome, VERSION};

use crate::census::FamilySpec;
use crate::rules::ConnectionRule;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_STATISTICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "thresnet",
    version,
    about = "Threshold random graphs: generation, censuses, and limit checks"
)]
pub struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a graph and print its 1-indexed edge list.
    Generate(ConfigArgs),
    /// Exact subgraph census of sampled graphs.
    Census(ConfigArgs),
    /// Clustering coefficients of sampled graphs.
    Cluster(ConfigArgs),
    /// Limit law of the normalized degree.
    DegreeLaw(ConfigArgs),
    /// Strong law for the normalized census along a size grid.
    Slln(ConfigArgs),
    /// Standardized census against the standard normal.
    Clt(ConfigArgs),
    /// Law-of-the-iterated-logarithm envelope along one trajectory.
    Lil(ConfigArgs),
    /// Local census of vertex 1 against its limit law.
    LocalLimit(ConfigArgs),
    /// Exact sup-deviation over the half-interval family.
    SupDev(ConfigArgs),
    /// Clustering coefficients against their limits.
    ClusterLimit(ConfigArgs),
    /// Print every diagnostic for a subcommand's configuration.
    Validate {
        /// Subcommand whose requirements apply.
        #[arg(long = "for", value_enum)]
        task: Task,
        #[command(flatten)]
        args: ConfigArgs,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// JSON experiment configuration; flags override its fields.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// `bernoulli:P`, `exponential:LAMBDA`, `pareto:A,C`, `uniform01`, or JSON.
    #[arg(long)]
    pub law: Option<String>,
    /// Connection rule as JSON.
    #[arg(long, conflicts_with_all = ["theta", "gap"])]
    pub rule: Option<String>,
    /// Shorthand for the rule `x + y > theta`.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// With `--theta`, also require `0 < |x - y| <= gap`.
    #[arg(long, requires = "theta")]
    pub gap: Option<f64>,
    /// Family name from the catalog, or JSON.
    #[arg(long)]
    pub family: Option<String>,
    /// Vertex count for size-generic families.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, short)]
    pub n: Option<usize>,
    /// Comma-separated graph sizes.
    #[arg(long)]
    pub n_grid: Option<String>,
    #[arg(long, short)]
    pub replications: Option<usize>,
    #[arg(long, short)]
    pub seed: Option<u64>,
    /// Clustering coefficient assigned to vertices of degree 0 or 1.
    #[arg(long)]
    pub w: Option<f64>,
    /// Weight of vertex 1 for the pinned local clustering limit.
    #[arg(long, allow_hyphen_values = true)]
    pub pin: Option<f64>,
    #[arg(long)]
    pub checkpoints: Option<usize>,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub sigmas: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Nested Monte Carlo cross-check of zeta as `OUTER,INNER`.
    #[arg(long)]
    pub zeta_cross_check: Option<String>,
    #[arg(long)]
    pub max_vertices: Option<usize>,
    /// Primary artifact path; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// CSV mirror path.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn keep<T>(errs: &mut Vec<Diagnostic>, r: Result<T, Diagnostic>) -> Option<T> {
    r.map_err(|d| errs.push(d)).ok()
}

impl ConfigArgs {
    /// Config file (if any) with the flags laid over it.
    pub fn load(&self) -> Result<ExperimentConfig, Vec<Diagnostic>> {
        let mut errs = Vec::new();
        let file = match &self.config {
            Some(path) => match std::fs::read_to_string(path) {
                Ok(text) => parse_config(&text).unwrap_or_else(|d| {
                    errs.push(d);
                    ExperimentConfig::default()
                }),
                Err(e) => {
                    errs.push(Diagnostic::new(
                        "config",
                        format!("{}: {e}", path.display()),
                    ));
                    ExperimentConfig::default()
                }
            },
            None => ExperimentConfig::default(),
        };
        let law = self
            .law
            .as_deref()
            .and_then(|s| keep(&mut errs, parse_law(s)));
        let rule = match (&self.rule, self.theta) {
            (Some(s), _) => keep(
                &mut errs,
                config::parse_json_field::<ConnectionRule>("rule", s),
            ),
            (None, Some(t)) => Some(match self.gap {
                Some(c) => ConnectionRule::threshold_with_gap(t, c),
                None => ConnectionRule::threshold(t),
            }),
            (None, None) => None,
        };
        let family = match &self.family {
            Some(s) if s.trim_start().starts_with('{') => keep(
                &mut errs,
                config::parse_json_field::<FamilySpec>("family", s),
            ),
            Some(s) => Some(FamilySpec::named(s, self.m)),
            None => None,
        };
        let family = match (family, self.m) {
            (None, Some(m)) => Some(FamilySpec {
                m: Some(m),
                ..file
                    .family
                    .clone()
                    .unwrap_or(FamilySpec::named("edges", None))
            }),
            (f, _) => f,
        };
        let n_grid = self
            .n_grid
            .as_deref()
            .and_then(|s| keep(&mut errs, parse_grid(s)));
        let zeta_cross_check = self.zeta_cross_check.as_deref().and_then(|s| {
            keep(
                &mut errs,
                match parse_grid(s).as_deref() {
                    Ok([outer, inner]) => Ok([*outer, *inner]),
                    _ => Err(Diagnostic::new(
                        "zeta_cross_check",
                        format!("expected OUTER,INNER, got '{s}'"),
                    )),
                },
            )
        });
        let flags = ExperimentConfig {
            law,
            rule,
            family,
            n: self.n,
            n_grid,
            replications: self.replications,
            seed: self.seed,
            w: self.w,
            pin: self.pin,
            checkpoints: self.checkpoints,
            bins: self.bins,
            sigmas: self.sigmas,
            tolerance: self.tolerance,
            alpha: self.alpha,
            zeta_cross_check,
            max_vertices: self.max_vertices,
            output: OutputConfig {
                path: self.output.clone(),
                csv: self.csv.clone(),
            },
        };
        if errs.is_empty() {
            Ok(file.overlay(flags))
        } else {
            Err(errs)
        }
    }
}

impl Command {
    fn parts(&self) -> (Option<Task>, &ConfigArgs) {
        match self {
            Command::Generate(a) => (Some(Task::Generate), a),
            Command::Census(a) => (Some(Task::Census), a),
            Command::Cluster(a) => (Some(Task::Cluster), a),
            Command::DegreeLaw(a) => (Some(Task::DegreeLaw), a),
            Command::Slln(a) => (Some(Task::Slln), a),
            Command::Clt(a) => (Some(Task::Clt), a),
            Command::Lil(a) => (Some(Task::Lil), a),
            Command::LocalLimit(a) => (Some(Task::LocalLimit), a),
            Command::SupDev(a) => (Some(Task::SupDev), a),
            Command::ClusterLimit(a) => (Some(Task::ClusterLimit), a),
            Command::Validate { args, .. } => (None, args),
        }
    }
}

fn report_diagnostics(diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("error: {d}");
    }
}

fn write_artifact(path: Option<&PathBuf>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

fn execute(cli: Cli) -> i32 {
    let (task, args) = cli.command.parts();
    let config = match args.load() {
        Ok(c) => c,
        Err(diags) => {
            report_diagnostics(&diags);
            return EXIT_INVALID;
        }
    };
    let Some(task) = task else {
        let Command::Validate { task, .. } = cli.command else {
            unreachable!()
        };
        let diags = validate(task, &config);
        let body = serde_json::json!({
            "command": "validate",
            "for": task.name(),
            "version": VERSION,
            "diagnostics": diags,
        });
        let text = serde_json::to_string_pretty(&body).expect("diagnostics serialize") + "\n";
        // Diagnostics never replace a run's report file.
        if let Err(e) = write_artifact(None, &text) {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
        return if diags.is_empty() {
            EXIT_OK
        } else {
            EXIT_INVALID
        };
    };
    let diags = validate(task, &config);
    if !diags.is_empty() {
        report_diagnostics(&diags);
        return EXIT_INVALID;
    }
    let outcome = match run(task, &config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    let resolved = config.resolved(task);
    if let Err(e) = write_artifact(resolved.output.path.as_ref(), &outcome.primary) {
        eprintln!("error: writing output: {e}");
        return EXIT_INVALID;
    }
    if let (Some(path), Some(csv)) = (resolved.output.csv.as_ref(), outcome.csv.as_ref()) {
        if let Err(e) = std::fs::write(path, csv) {
            eprintln!("error: writing {}: {e}", path.display());
            return EXIT_INVALID;
        }
    }
    match outcome.pass {
        Some(false) => {
            eprintln!("{task}: statistical check failed");
            EXIT_STATISTICAL
        }
        _ => EXIT_OK,
    }
}

/// Parse `args` (including the program name) and run; returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
            let _ = e.print();
            return code;
        }
    };
    match cli.threads {
        Some(0) => {
            eprintln!("error: --threads must be at least 1");
            EXIT_INVALID
        }
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| execute(cli)),
            Err(e) => {
                eprintln!("error: thread pool: {e}");
                EXIT_INVALID
            }
        },
        None => execute(cli),
    }
}
