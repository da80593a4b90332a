//! Experiment configuration: file schema, flag overrides, and validation.

use std::fmt;
use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::census::{FamilySpec, SubgraphFamily, ENUMERATION_MAX_N};
use crate::error::Error;
use crate::graph::DEFAULT_MAX_VERTICES;
use crate::limits;
use crate::rules::ConnectionRule;
use crate::verify;
use crate::weights::WeightLaw;

pub const DEFAULT_N_GRID: [usize; 3] = [100, 400, 1600];
pub const DEFAULT_TOLERANCE: f64 = 0.02;
pub const DEFAULT_SUP_TOLERANCE: f64 = 0.05;
pub const DEFAULT_KS_TOLERANCE: f64 = 0.05;
pub const DEFAULT_ALPHA: f64 = 0.01;
pub const DEFAULT_CHECKPOINTS: usize = 20;
pub const DEFAULT_SIGMAS: f64 = 3.0;
pub const DEFAULT_HARNESS_REPLICATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Generate,
    Census,
    Cluster,
    DegreeLaw,
    Slln,
    Clt,
    Lil,
    LocalLimit,
    SupDev,
    ClusterLimit,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Generate => "generate",
            Task::Census => "census",
            Task::Cluster => "cluster",
            Task::DegreeLaw => "degree-law",
            Task::Slln => "slln",
            Task::Clt => "clt",
            Task::Lil => "lil",
            Task::LocalLimit => "local-limit",
            Task::SupDev => "sup-dev",
            Task::ClusterLimit => "cluster-limit",
        }
    }

    fn needs_seed(self) -> bool {
        self != Task::DegreeLaw
    }

    fn needs_rule(self) -> bool {
        self != Task::SupDev
    }

    fn uses_family(self) -> bool {
        matches!(
            self,
            Task::Census | Task::Slln | Task::Clt | Task::Lil | Task::LocalLimit
        )
    }

    fn uses_n(self) -> bool {
        matches!(
            self,
            Task::Generate
                | Task::Census
                | Task::Cluster
                | Task::Clt
                | Task::Lil
                | Task::LocalLimit
        )
    }

    fn uses_grid(self) -> bool {
        matches!(self, Task::Slln | Task::SupDev | Task::ClusterLimit)
    }

    fn default_replications(self) -> usize {
        match self {
            Task::Generate | Task::Census | Task::Cluster | Task::DegreeLaw | Task::Lil => 1,
            _ => DEFAULT_HARNESS_REPLICATIONS,
        }
    }

    fn default_tolerance(self) -> Option<f64> {
        match self {
            Task::Slln | Task::ClusterLimit => Some(DEFAULT_TOLERANCE),
            Task::SupDev => Some(DEFAULT_SUP_TOLERANCE),
            Task::LocalLimit => Some(DEFAULT_KS_TOLERANCE),
            _ => None,
        }
    }
}

impl std::str::FromStr for Task {
    type Err = Diagnostic;

    fn from_str(s: &str) -> Result<Self, Diagnostic> {
        Task::value_variants()
            .iter()
            .copied()
            .find(|t| t.name() == s)
            .ok_or_else(|| Diagnostic::new("subcommand", format!("unknown subcommand '{s}'")))
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Primary artifact; standard output when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// CSV mirror of the raw per-replication values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

impl OutputConfig {
    fn is_empty(&self) -> bool {
        self.path.is_none() && self.csv.is_none()
    }
}

/// Everything a subcommand needs. Every field is optional in the file so
/// that flags can fill or override it; [`ExperimentConfig::resolved`]
/// fills the per-command defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law: Option<WeightLaw>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<ConnectionRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replications: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    /// Weight of vertex 0 for the pinned local clustering limit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<usize>,
    /// Per-bin comparison for `local-limit` on the edge family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigmas: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Significance level for KS p-values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Nested Monte Carlo `ζ` cross-check as `[outer, inner]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta_cross_check: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_vertices: Option<usize>,
    #[serde(default, skip_serializing_if = "OutputConfig::is_empty")]
    pub output: OutputConfig,
}

/// Field path plus message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Parse a JSON config, reporting schema violations with their field path.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, Diagnostic> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." {
            "config".to_string()
        } else {
            path
        };
        Diagnostic::new(field, e.into_inner().to_string())
    })
}

/// Parse a field given on the command line as inline JSON.
pub fn parse_json_field<T: serde::de::DeserializeOwned>(
    field: &str,
    text: &str,
) -> Result<T, Diagnostic> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." {
            field.to_string()
        } else {
            format!("{field}.{path}")
        };
        Diagnostic::new(field, e.into_inner().to_string())
    })
}

/// `bernoulli:P`, `exponential:LAMBDA`, `pareto:A,C`, `uniform01`, or inline JSON.
pub fn parse_law(text: &str) -> Result<WeightLaw, Diagnostic> {
    let text = text.trim();
    if text.starts_with('{') {
        return parse_json_field("law", text);
    }
    let (kind, args) = text.split_once(':').unwrap_or((text, ""));
    let nums: Result<Vec<f64>, _> = args
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>())
        .collect();
    let nums = nums.map_err(|e| Diagnostic::new("law", format!("bad number in '{text}': {e}")))?;
    let arity = |k: usize| {
        if nums.len() == k {
            Ok(())
        } else {
            Err(Diagnostic::new(
                "law",
                format!("'{kind}' takes {k} parameter(s), got {}", nums.len()),
            ))
        }
    };
    match kind {
        "bernoulli" => arity(1).map(|_| WeightLaw::Bernoulli { p: nums[0] }),
        "exponential" => arity(1).map(|_| WeightLaw::Exponential { lambda: nums[0] }),
        "pareto" => arity(2).map(|_| WeightLaw::Pareto {
            a: nums[0],
            c: nums[1],
        }),
        "uniform01" => arity(0).map(|_| WeightLaw::Uniform01),
        _ => Err(Diagnostic::new("law", format!("unknown law '{kind}'"))),
    }
}

/// Comma-separated sizes.
pub fn parse_grid(text: &str) -> Result<Vec<usize>, Diagnostic> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| Diagnostic::new("n_grid", format!("'{s}': {e}")))
        })
        .collect()
}

impl ExperimentConfig {
    /// Fields set in `other` replace those in `self`.
    pub fn overlay(mut self, other: ExperimentConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            law,
            rule,
            family,
            n,
            n_grid,
            replications,
            seed,
            w,
            pin,
            checkpoints,
            bins,
            sigmas,
            tolerance,
            alpha,
            zeta_cross_check,
            max_vertices
        );
        if other.output.path.is_some() {
            self.output.path = other.output.path;
        }
        if other.output.csv.is_some() {
            self.output.csv = other.output.csv;
        }
        self
    }

    /// Copy with the defaults of `task` filled in and fields `task` does
    /// not read removed.
    pub fn resolved(&self, task: Task) -> Self {
        let mut c = self.clone();
        if task.uses_family() {
            c.family
                .get_or_insert_with(|| FamilySpec::named("edges", None));
        } else {
            c.family = None;
        }
        if !task.needs_rule() {
            c.rule = None;
        }
        if task.uses_grid() {
            c.n_grid.get_or_insert_with(|| DEFAULT_N_GRID.to_vec());
            c.n = None;
        } else {
            c.n_grid = None;
        }
        if task == Task::DegreeLaw {
            c.n = None;
            c.seed = None;
        }
        if matches!(task, Task::Generate | Task::DegreeLaw | Task::Lil) {
            c.replications = None;
        } else {
            c.replications.get_or_insert(task.default_replications());
        }
        if matches!(task, Task::Cluster | Task::ClusterLimit) {
            c.w.get_or_insert(0.0);
        } else {
            c.w = None;
        }
        if task != Task::ClusterLimit {
            c.pin = None;
        }
        if task == Task::Lil {
            c.checkpoints.get_or_insert(DEFAULT_CHECKPOINTS);
        } else {
            c.checkpoints = None;
        }
        if task == Task::LocalLimit && c.bins.is_some() {
            c.sigmas.get_or_insert(DEFAULT_SIGMAS);
        } else if task != Task::LocalLimit {
            c.bins = None;
            c.sigmas = None;
        }
        if task == Task::LocalLimit && c.bins.is_some() {
            c.tolerance = None;
        } else {
            match task.default_tolerance() {
                Some(t) => {
                    c.tolerance.get_or_insert(t);
                }
                None => c.tolerance = None,
            }
        }
        if task == Task::Clt {
            c.alpha.get_or_insert(DEFAULT_ALPHA);
        } else {
            c.alpha = None;
            c.zeta_cross_check = None;
        }
        if matches!(task, Task::Generate | Task::Census | Task::Cluster) {
            c.max_vertices.get_or_insert(DEFAULT_MAX_VERTICES);
        } else {
            c.max_vertices = None;
        }
        c
    }

    pub fn resolved_family(&self) -> Option<SubgraphFamily> {
        self.family.as_ref().and_then(|f| f.resolve().ok())
    }
}

/// Every reason `config` cannot run `task`; empty means runnable.
pub fn validate(task: Task, config: &ExperimentConfig) -> Vec<Diagnostic> {
    let c = config.resolved(task);
    let mut out = Vec::new();

    match &c.law {
        None => out.push(Diagnostic::new("law", "a weight law is required")),
        Some(law) => {
            for (field, msg) in law.diagnostics() {
                out.push(Diagnostic::new(format!("law.{field}"), msg));
            }
        }
    }
    if task.needs_rule() {
        match &c.rule {
            None => out.push(Diagnostic::new("rule", "a connection rule is required")),
            Some(rule) => {
                if let Err(e) = rule.validate() {
                    out.push(Diagnostic::new("rule", e.to_string()));
                }
            }
        }
    }
    if task.needs_seed() && c.seed.is_none() {
        out.push(Diagnostic::new(
            "seed",
            "a seed is required; there is no default",
        ));
    }

    let family = match &c.family {
        Some(spec) => match spec.resolve() {
            Ok(f) => Some(f),
            Err(e) => {
                out.push(Diagnostic::new("family", e.to_string()));
                None
            }
        },
        None => None,
    };
    let min_n = family.as_ref().map_or(2, |f| f.m().max(2));

    if task.uses_n() {
        match c.n {
            None => out.push(Diagnostic::new("n", "a graph size n is required")),
            Some(n) => {
                let min_n = if task == Task::Generate || task == Task::Cluster {
                    1
                } else {
                    min_n
                };
                if n < min_n {
                    out.push(Diagnostic::new(
                        "n",
                        format!("n = {n} is below the minimum {min_n}"),
                    ));
                }
                if let Some(cap) = c.max_vertices {
                    if n > cap {
                        out.push(Diagnostic::new(
                            "n",
                            format!("n = {n} exceeds max_vertices = {cap}"),
                        ));
                    }
                } else if n > DEFAULT_MAX_VERTICES {
                    out.push(Diagnostic::new(
                        "n",
                        format!("n = {n} exceeds {DEFAULT_MAX_VERTICES}"),
                    ));
                }
                let enumerates = matches!(task, Task::Census | Task::Clt | Task::LocalLimit)
                    && family.as_ref().is_some_and(|f| f.m() >= 4);
                if enumerates && n > ENUMERATION_MAX_N {
                    out.push(Diagnostic::new(
                        "n",
                        format!("families with m >= 4 are enumerated, which needs n <= {ENUMERATION_MAX_N}"),
                    ));
                }
            }
        }
    }
    if let Some(grid) = &c.n_grid {
        if grid.is_empty() {
            out.push(Diagnostic::new("n_grid", "n_grid is empty"));
        } else {
            if grid.windows(2).any(|w| w[0] >= w[1]) {
                out.push(Diagnostic::new(
                    "n_grid",
                    "n_grid must be strictly increasing",
                ));
            }
            if grid[0] < min_n {
                out.push(Diagnostic::new(
                    "n_grid",
                    format!("sizes must be at least {min_n}"),
                ));
            }
            let cap = if task == Task::SupDev {
                verify::SUP_DEV_MAX_N
            } else {
                DEFAULT_MAX_VERTICES
            };
            if grid.iter().any(|&n| n > cap) {
                out.push(Diagnostic::new(
                    "n_grid",
                    format!("sizes must not exceed {cap}"),
                ));
            }
            let enumerates = task == Task::Slln && family.as_ref().is_some_and(|f| f.m() >= 4);
            if enumerates && grid.iter().any(|&n| n > ENUMERATION_MAX_N) {
                out.push(Diagnostic::new(
                    "n_grid",
                    format!(
                        "families with m >= 4 are enumerated, which needs n <= {ENUMERATION_MAX_N}"
                    ),
                ));
            }
        }
    }
    if c.replications == Some(0) {
        out.push(Diagnostic::new(
            "replications",
            "replications must be at least 1",
        ));
    }
    if task == Task::Clt && c.replications.is_some_and(|r| r < 2) {
        out.push(Diagnostic::new(
            "replications",
            "the CLT check needs at least 2 replications",
        ));
    }
    if let Some(w) = c.w {
        if !(0.0..=1.0).contains(&w) {
            out.push(Diagnostic::new("w", format!("w = {w} must lie in [0, 1]")));
        }
    }
    if let Some(x) = c.pin {
        if !x.is_finite() {
            out.push(Diagnostic::new("pin", "pinned weight must be finite"));
        }
    }
    if c.checkpoints == Some(0) {
        out.push(Diagnostic::new(
            "checkpoints",
            "need at least one checkpoint",
        ));
    }
    if c.bins.is_some_and(|b| b < 2) {
        out.push(Diagnostic::new("bins", "need at least 2 bins"));
    }
    if let Some(s) = c.sigmas {
        if !(s > 0.0 && s.is_finite()) {
            out.push(Diagnostic::new("sigmas", "sigmas must be positive"));
        }
    }
    if let Some(t) = c.tolerance {
        if !(t > 0.0 && t.is_finite()) {
            out.push(Diagnostic::new("tolerance", "tolerance must be positive"));
        }
    }
    if let Some(a) = c.alpha {
        if !(a > 0.0 && a < 1.0) {
            out.push(Diagnostic::new("alpha", "alpha must lie in (0, 1)"));
        }
    }
    if let Some([outer, inner]) = c.zeta_cross_check {
        if outer < 2 || inner < 2 {
            out.push(Diagnostic::new(
                "zeta_cross_check",
                "outer and inner sample sizes must be at least 2",
            ));
        }
    }
    if c.max_vertices == Some(0) {
        out.push(Diagnostic::new(
            "max_vertices",
            "max_vertices must be at least 1",
        ));
    }
    if task == Task::LocalLimit
        && c.bins.is_some()
        && family.as_ref().is_some_and(|f| f.name() != "edges")
    {
        out.push(Diagnostic::new(
            "bins",
            "the per-bin check applies to the edges family",
        ));
    }

    if !out.is_empty() {
        return out;
    }
    let (Some(law), rule) = (&c.law, &c.rule) else {
        return out;
    };

    if matches!(task, Task::Clt | Task::Lil) {
        if let (Some(rule), Some(fam)) = (rule, &family) {
            match verify::positive_zeta(law, rule, fam) {
                Ok(_) => {}
                Err(Error::ZetaZero) => {
                    out.push(Diagnostic::new("rule", Error::ZetaZero.to_string()))
                }
                Err(e) => out.push(Diagnostic::new("rule", e.to_string())),
            }
        }
    }
    let needs_degree_law =
        task == Task::DegreeLaw || (task == Task::LocalLimit && c.bins.is_some());
    if needs_degree_law {
        if let Some(rule) = rule {
            if let Err(e) = limits::degree_law(law, rule) {
                out.push(Diagnostic::new("rule", e.to_string()));
            }
        }
    }
    out
}
