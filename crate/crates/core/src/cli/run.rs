//! Subcommand execution and artifact rendering.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{validate, ExperimentConfig, Task};
use crate::census::{self, CensusResult};
use crate::clustering::{ClusteringConfig, ClusteringSummary};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::limits::{self, MixedLaw};
use crate::stats;
use crate::verify::{self, replication_seed, ConvergenceReport};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Rendered artifacts of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// JSON report, or the edge list for `generate`.
    pub primary: String,
    pub csv: Option<String>,
    /// Verdict of the statistical check, for subcommands that have one.
    pub pass: Option<bool>,
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    command: &'static str,
    version: &'static str,
    config: &'a ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pass: Option<bool>,
    report: R,
}

fn render<R: Serialize>(
    task: Task,
    cfg: &ExperimentConfig,
    pass: Option<bool>,
    report: R,
) -> Result<String> {
    let env = Envelope {
        command: task.name(),
        version: VERSION,
        config: cfg,
        pass,
        report,
    };
    serde_json::to_string_pretty(&env)
        .map(|s| s + "\n")
        .map_err(|e| Error::Internal(format!("serializing report: {e}")))
}

fn sample_csv(sample: &[f64]) -> String {
    let mut s = String::from("replication,value\n");
    for (r, v) in sample.iter().enumerate() {
        let _ = writeln!(s, "{r},{v}");
    }
    s
}

#[derive(Serialize)]
struct DegreeLawReport<'a> {
    total_mass: f64,
    mean: f64,
    law: &'a MixedLaw,
}

#[derive(Serialize)]
struct ClusterReport {
    replications: usize,
    mean_global_cc: f64,
    summaries: Vec<ClusteringSummary>,
}

#[derive(Serialize)]
struct CensusReport {
    replications: usize,
    mean_normalized: f64,
    censuses: Vec<CensusResult>,
}

fn missing(field: &str) -> Error {
    Error::InvalidArgument(format!("{field} is required"))
}

/// Run `task` on `config`. Invalid configurations are rejected with every
/// diagnostic joined into one message.
pub fn run(task: Task, config: &ExperimentConfig) -> Result<Outcome> {
    let diags = validate(task, config);
    if !diags.is_empty() {
        let msg = diags
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::InvalidArgument(msg));
    }
    let cfg = config.resolved(task);
    let law = cfg.law.as_ref().ok_or_else(|| missing("law"))?;
    let rule = || cfg.rule.as_ref().ok_or_else(|| missing("rule"));
    let family = || {
        cfg.family
            .as_ref()
            .ok_or_else(|| missing("family"))?
            .resolve()
    };
    let seed = || cfg.seed.ok_or_else(|| missing("seed"));
    let n = || cfg.n.ok_or_else(|| missing("n"));
    let grid = || cfg.n_grid.clone().ok_or_else(|| missing("n_grid"));
    let reps = || cfg.replications.ok_or_else(|| missing("replications"));
    let tol = || cfg.tolerance.ok_or_else(|| missing("tolerance"));
    let cap = cfg
        .max_vertices
        .unwrap_or(crate::graph::DEFAULT_MAX_VERTICES);

    match task {
        Task::Generate => {
            let n = n()?;
            let w = law.sample(n, replication_seed(seed()?, n, 0))?;
            let g = Graph::build_capped(rule()?, &w, cap)?;
            let mut csv = String::from("vertex,weight\n");
            for (i, x) in w.iter().enumerate() {
                let _ = writeln!(csv, "{},{x}", i + 1);
            }
            Ok(Outcome {
                primary: g.edge_list_text(),
                csv: Some(csv),
                pass: None,
            })
        }
        Task::Census => {
            let (rule, fam, n, seed) = (rule()?, family()?, n()?, seed()?);
            let censuses: Vec<CensusResult> = (0..reps()?)
                .into_par_iter()
                .map(|r| {
                    let w = law.sample(n, replication_seed(seed, n, r))?;
                    let res = if fam.m() == 2 {
                        census::edge_census_from_weights(rule, &w, &fam)?
                    } else {
                        census::census_global(&Graph::build_capped(rule, &w, cap)?, &fam)?
                    };
                    if !res.identity_holds() {
                        return Err(Error::Internal(format!(
                            "census identity failed at replication {r}"
                        )));
                    }
                    Ok(res)
                })
                .collect::<Result<_>>()?;
            let mut csv = String::from("replication,vertex,count\n");
            for (r, c) in censuses.iter().enumerate() {
                for (i, v) in c.per_vertex.iter().flatten().enumerate() {
                    let _ = writeln!(csv, "{r},{},{v}", i + 1);
                }
            }
            let normalized: Vec<f64> = censuses.iter().map(|c| c.normalized).collect();
            let report = CensusReport {
                replications: censuses.len(),
                mean_normalized: stats::mean(&normalized),
                censuses: censuses
                    .into_iter()
                    .map(CensusResult::without_per_vertex)
                    .collect(),
            };
            Ok(Outcome {
                primary: render(task, &cfg, None, report)?,
                csv: Some(csv),
                pass: None,
            })
        }
        Task::Cluster => {
            let (rule, n, seed) = (rule()?, n()?, seed()?);
            let ccfg = ClusteringConfig::new(cfg.w.unwrap_or(0.0))?;
            let runs: Vec<(u64, ClusteringSummary)> = (0..reps()?)
                .into_par_iter()
                .map(|r| {
                    let key = replication_seed(seed, n, r);
                    let g = Graph::build_capped(rule, &law.sample(n, key)?, cap)?;
                    Ok((key, ClusteringSummary::compute(&g, ccfg)))
                })
                .collect::<Result<_>>()?;
            let mut csv = format!("{}\n", ClusteringSummary::CSV_HEADER);
            for (key, s) in &runs {
                let _ = writeln!(csv, "{}", s.csv_row(*key));
            }
            let summaries: Vec<ClusteringSummary> = runs.into_iter().map(|(_, s)| s).collect();
            let globals: Vec<f64> = summaries.iter().map(|s| s.global_cc).collect();
            let report = ClusterReport {
                replications: summaries.len(),
                mean_global_cc: stats::mean(&globals),
                summaries,
            };
            Ok(Outcome {
                primary: render(task, &cfg, None, report)?,
                csv: Some(csv),
                pass: None,
            })
        }
        Task::DegreeLaw => {
            let dl = limits::degree_law(law, rule()?)?;
            let report = DegreeLawReport {
                total_mass: dl.total_mass()?,
                mean: dl.mean()?,
                law: &dl,
            };
            Ok(Outcome {
                primary: render(task, &cfg, None, report)?,
                csv: Some(dl.cdf_table_csv()?),
                pass: None,
            })
        }
        Task::Slln => {
            let rep =
                verify::check_slln_global(law, rule()?, &family()?, &grid()?, reps()?, seed()?)?;
            let pass = rep.final_gap <= tol()?;
            Ok(Outcome {
                primary: render(task, &cfg, Some(pass), &rep)?,
                csv: Some(rep.raw_csv()),
                pass: Some(pass),
            })
        }
        Task::Clt => {
            let cross = cfg.zeta_cross_check.map(|[o, i]| (o, i));
            let rep = verify::check_clt(law, rule()?, &family()?, n()?, reps()?, seed()?, cross)?;
            let alpha = cfg.alpha.ok_or_else(|| missing("alpha"))?;
            let cross_ok = rep.zeta_cross_check.as_ref().is_none_or(|mc| {
                (mc.value - rep.zeta.value).abs() <= 3.0 * mc.std_error.unwrap_or(0.0)
            });
            let pass = rep.ks.ks_pvalue > alpha && cross_ok;
            Ok(Outcome {
                primary: render(task, &cfg, Some(pass), &rep)?,
                csv: Some(sample_csv(&rep.sample)),
                pass: Some(pass),
            })
        }
        Task::Lil => {
            let checkpoints = cfg.checkpoints.ok_or_else(|| missing("checkpoints"))?;
            let rep = verify::check_lil(law, rule()?, &family()?, n()?, checkpoints, seed()?)?;
            let mut csv = String::from("n,normalized_census,deviation,lil_value\n");
            for p in &rep.points {
                let _ = writeln!(
                    csv,
                    "{},{},{},{}",
                    p.n, p.normalized_census, p.deviation, p.lil_value
                );
            }
            let pass = rep.within_envelope;
            Ok(Outcome {
                primary: render(task, &cfg, Some(pass), &rep)?,
                csv: Some(csv),
                pass: Some(pass),
            })
        }
        Task::LocalLimit => {
            let (rule, n, reps, seed) = (rule()?, n()?, reps()?, seed()?);
            match cfg.bins {
                Some(bins) => {
                    let sigmas = cfg.sigmas.ok_or_else(|| missing("sigmas"))?;
                    let rep = verify::check_degree_bins(law, rule, n, reps, seed, bins, sigmas)?;
                    let pass = rep.pass;
                    Ok(Outcome {
                        primary: render(task, &cfg, Some(pass), &rep)?,
                        csv: Some(sample_csv(&rep.sample)),
                        pass: Some(pass),
                    })
                }
                None => {
                    let rep = verify::check_local_limit(law, rule, &family()?, n, reps, seed)?;
                    let pass = rep.ks.ks_distance <= tol()?;
                    Ok(Outcome {
                        primary: render(task, &cfg, Some(pass), &rep)?,
                        csv: Some(sample_csv(&rep.sample)),
                        pass: Some(pass),
                    })
                }
            }
        }
        Task::SupDev => {
            let rep = verify::check_sup_deviation(law, &grid()?, reps()?, seed()?)?;
            let pass = rep.strictly_decreasing
                && rep
                    .mean_sup
                    .last()
                    .is_some_and(|&s| s <= tol().unwrap_or(0.0));
            let mut csv = String::from("n,replication,sup,theta_star,from_left\n");
            for row in &rep.entries {
                for (r, e) in row.iter().enumerate() {
                    let _ = writeln!(
                        csv,
                        "{},{r},{},{},{}",
                        e.n, e.sup, e.theta_star, e.from_left
                    );
                }
            }
            Ok(Outcome {
                primary: render(task, &cfg, Some(pass), &rep)?,
                csv: Some(csv),
                pass: Some(pass),
            })
        }
        Task::ClusterLimit => {
            let w = cfg.w.unwrap_or(0.0);
            let rep = verify::check_clustering_limits(
                law,
                rule()?,
                &grid()?,
                reps()?,
                w,
                seed()?,
                cfg.pin,
            )?;
            let tol = tol()?;
            let mut parts: Vec<&ConvergenceReport> = vec![&rep.global, &rep.isolated];
            parts.extend(rep.filtered.as_ref());
            parts.extend(rep.local.as_ref().map(|l| &l.report));
            let pass = parts.iter().all(|p| p.final_gap <= tol);
            let mut csv = String::from("statistic,n,replication,value\n");
            for p in &parts {
                for line in p.raw_csv().lines().skip(1) {
                    let _ = writeln!(csv, "{},{line}", p.statistic);
                }
            }
            Ok(Outcome {
                primary: render(task, &cfg, Some(pass), &rep)?,
                csv: Some(csv),
                pass: Some(pass),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::ConnectionRule;
    use crate::weights::WeightLaw;

    fn cfg(law: WeightLaw, theta: f64) -> ExperimentConfig {
        ExperimentConfig {
            law: Some(law),
            rule: Some(ConnectionRule::threshold(theta)),
            seed: Some(42),
            ..Default::default()
        }
    }

    #[test]
    fn generate_complete_graph() {
        let c = ExperimentConfig {
            n: Some(5),
            ..cfg(WeightLaw::Bernoulli { p: 1.0 }, 0.5)
        };
        let out = run(Task::Generate, &c).unwrap();
        assert_eq!(out.primary.lines().count(), 10);
        assert!(out.primary.starts_with("1 2\n"));
        assert_eq!(out.pass, None);
    }

    #[test]
    fn degree_law_exponential_atom() {
        let out = run(
            Task::DegreeLaw,
            &cfg(WeightLaw::Exponential { lambda: 1.0 }, 1.0),
        )
        .unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.primary).unwrap();
        let atoms = v["report"]["law"]["atoms"].as_array().unwrap();
        assert_eq!(atoms.len(), 1);
        assert_eq!(atoms[0]["at"].as_f64(), Some(1.0));
        assert!((atoms[0]["mass"].as_f64().unwrap() - (-1.0f64).exp()).abs() < 1e-12);
        assert_eq!(v["version"], VERSION);
        assert_eq!(v["config"]["law"]["kind"], "exponential");
        assert_eq!(out.csv.unwrap().lines().count(), 1 + 1024);
    }

    #[test]
    fn cluster_limit_bernoulli() {
        let c = ExperimentConfig {
            replications: Some(50),
            ..cfg(WeightLaw::Bernoulli { p: 0.5 }, 0.5)
        };
        let out = run(Task::ClusterLimit, &c).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.primary).unwrap();
        let means = v["report"]["global"]["means"].as_array().unwrap();
        assert_eq!(means.len(), 3);
        assert!(
            (means[2].as_f64().unwrap() - 0.875).abs() <= 0.01,
            "{means:?}"
        );
    }

    #[test]
    fn census_is_deterministic() {
        let c = ExperimentConfig {
            n: Some(30),
            replications: Some(3),
            ..cfg(WeightLaw::Uniform01, 1.0)
        };
        let c = ExperimentConfig {
            family: Some(census::FamilySpec::named("triangle", None)),
            ..c
        };
        let a = run(Task::Census, &c).unwrap();
        assert_eq!(a, run(Task::Census, &c).unwrap());
        assert_eq!(a.csv.unwrap().lines().count(), 1 + 3 * 30);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let c = ExperimentConfig {
            seed: None,
            ..cfg(WeightLaw::Uniform01, 1.0)
        };
        assert!(matches!(
            run(Task::Cluster, &c),
            Err(Error::InvalidArgument(_))
        ));
    }
}
