//! Local, global, and degree-filtered clustering coefficients.

use serde::{Deserialize, Serialize};

use crate::census::{binomial, local_counts, triangles_at};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Value substituted for the clustering coefficient of vertices with
/// degree 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusteringConfig {
    #[serde(default)]
    pub w: f64,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        Self { w: 0.0 }
    }
}

impl ClusteringConfig {
    pub fn new(w: f64) -> Result<Self> {
        let cfg = Self { w };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if (0.0..=1.0).contains(&self.w) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "w = {} outside [0, 1]",
                self.w
            )))
        }
    }
}

#[inline]
fn coefficient(d: u64, t: u64, w: f64) -> f64 {
    let v = binomial(d, 2);
    if v >= 1 {
        t as f64 / v as f64
    } else {
        w
    }
}

/// `C_n(i) = T_n(i) / C(D_n(i), 2)` when `D_n(i) >= 2`, else `w`.
pub fn local_cc(graph: &Graph, i: usize, cfg: ClusteringConfig) -> Result<f64> {
    let t = triangles_at(graph, i)?;
    Ok(coefficient(graph.neighbors(i).len() as u64, t, cfg.w))
}

/// All local coefficients in one pass.
pub fn local_ccs(graph: &Graph, cfg: ClusteringConfig) -> Vec<f64> {
    let lc = local_counts(graph);
    lc.degree
        .iter()
        .zip(&lc.triangles)
        .map(|(&d, &t)| coefficient(d, t, cfg.w))
        .collect()
}

/// Arithmetic mean of the local coefficients.
pub fn global_cc(graph: &Graph, cfg: ClusteringConfig) -> f64 {
    let ccs = local_ccs(graph, cfg);
    ccs.iter().sum::<f64>() / ccs.len() as f64
}

/// Mean local coefficient over the vertices with degree at least 2.
pub fn filtered_cc(graph: &Graph) -> Result<f64> {
    let lc = local_counts(graph);
    let mut sum = 0.0;
    let mut count = 0usize;
    for (&d, &t) in lc.degree.iter().zip(&lc.triangles) {
        if d >= 2 {
            sum += coefficient(d, t, 0.0);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::Undefined(
            "filtered clustering coefficient: no vertex has degree >= 2".into(),
        ));
    }
    Ok(sum / count as f64)
}

/// One replication's clustering statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusteringSummary {
    pub n: usize,
    pub global_cc: f64,
    /// `None` when no vertex has degree at least 2.
    pub filtered_cc: Option<f64>,
    pub fraction_degree_le_1: f64,
}

impl ClusteringSummary {
    pub fn compute(graph: &Graph, cfg: ClusteringConfig) -> Self {
        let lc = local_counts(graph);
        let n = graph.n();
        let mut all = 0.0;
        let mut kept = 0.0;
        let mut low = 0usize;
        for (&d, &t) in lc.degree.iter().zip(&lc.triangles) {
            if d >= 2 {
                let c = coefficient(d, t, 0.0);
                all += c;
                kept += c;
            } else {
                all += cfg.w;
                low += 1;
            }
        }
        Self {
            n,
            global_cc: all / n as f64,
            filtered_cc: (low < n).then(|| kept / (n - low) as f64),
            fraction_degree_le_1: low as f64 / n as f64,
        }
    }

    pub const CSV_HEADER: &'static str = "seed,n,C_n,C_tilde_n,fraction_degree_le_1";

    /// `seed,n,C_n,C̃_n,fraction_degree_le_1`; an undefined C̃_n is written as `nan`.
    pub fn csv_row(&self, seed: u64) -> String {
        format!(
            "{},{},{},{},{}",
            seed,
            self.n,
            self.global_cc,
            self.filtered_cc.unwrap_or(f64::NAN),
            self.fraction_degree_le_1
        )
    }
}
