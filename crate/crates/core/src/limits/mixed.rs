//! Distributions on `[0, 1]` made of atoms plus piecewise densities.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;
use crate::stats::TargetCdf;
use crate::weights::WeightLaw;

/// Tolerance on the total mass of a constructed law.
pub const MASS_TOL: f64 = 1e-7;
/// Grid size of the CDF tabulation.
pub const TABLE_POINTS: usize = 1024;

const PIECE_TOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub at: f64,
    pub mass: f64,
}

/// Closed-form density on a piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", content = "params", rename_all = "snake_case")]
pub enum DensityForm {
    /// `value`.
    Constant { value: f64 },
    /// `scale / k^2`.
    ExpOverK2 { scale: f64 },
    /// `scale / (1 - k)^2`.
    ExpOverOneMinusK2 { scale: f64 },
    /// `(a / (theta * k^(1/c) - a))^(c + 1)`.
    Pareto { a: f64, c: f64, theta: f64 },
    /// `4 e^{-lambda theta} / ((k + sqrt(k^2 + 4q))^2 + 4q) + 1 / (2 sinh(lambda c))`
    /// with `q = e^{-lambda (theta + c)}`.
    GapG { lambda: f64, theta: f64, c: f64 },
    /// `f(theta - F^{-1}(1 - k)) / f(F^{-1}(1 - k))` for a weight law `F`.
    Transform { theta: f64, law: WeightLaw },
}

impl DensityForm {
    pub fn eval(&self, k: f64) -> f64 {
        match self {
            DensityForm::Constant { value } => *value,
            DensityForm::ExpOverK2 { scale } => scale / (k * k),
            DensityForm::ExpOverOneMinusK2 { scale } => scale / ((1.0 - k) * (1.0 - k)),
            DensityForm::Pareto { a, c, theta } => {
                (a / (theta * k.powf(1.0 / c) - a)).powf(c + 1.0)
            }
            DensityForm::GapG { lambda, theta, c } => {
                gap_core(*lambda, *theta, *c, k) + 1.0 / (2.0 * (lambda * c).sinh())
            }
            DensityForm::Transform { theta, law } => match law.quantile(1.0 - k) {
                Ok(x) => {
                    let fx = law.density(x);
                    if fx > 0.0 {
                        law.density(theta - x) / fx
                    } else {
                        0.0
                    }
                }
                Err(_) => 0.0,
            },
        }
    }

    /// `∫_lo^hi` of the density, in closed form where one is at hand.
    fn integral(&self, lo: f64, hi: f64) -> Result<f64> {
        if hi <= lo {
            return Ok(0.0);
        }
        Ok(match self {
            DensityForm::Constant { value } => value * (hi - lo),
            DensityForm::ExpOverK2 { scale } => scale * (1.0 / lo - 1.0 / hi),
            DensityForm::ExpOverOneMinusK2 { scale } => {
                scale * (1.0 / (1.0 - hi) - 1.0 / (1.0 - lo))
            }
            _ => quad::integrate(|k| self.eval(k), lo, hi, PIECE_TOL)?,
        })
    }

    fn first_moment(&self, lo: f64, hi: f64) -> Result<f64> {
        if hi <= lo {
            return Ok(0.0);
        }
        Ok(match self {
            DensityForm::Constant { value } => value * (hi * hi - lo * lo) / 2.0,
            DensityForm::ExpOverK2 { scale } => scale * (hi / lo).ln(),
            _ => quad::integrate(|k| k * self.eval(k), lo, hi, PIECE_TOL)?,
        })
    }
}

fn gap_core(lambda: f64, theta: f64, c: f64, k: f64) -> f64 {
    let q = (-lambda * (theta + c)).exp();
    let s = k + (k * k + 4.0 * q).sqrt();
    4.0 * (-lambda * theta).exp() / (s * s + 4.0 * q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    #[serde(flatten)]
    pub density: DensityForm,
}

/// Atoms plus densities on (possibly overlapping) pieces; the density at
/// `k` is the sum over pieces containing `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixedLaw {
    pub atoms: Vec<Atom>,
    pub pieces: Vec<Piece>,
}

impl MixedLaw {
    /// Builds the law, dropping empty atoms and pieces, and checks that the
    /// total mass is 1 within `MASS_TOL`.
    pub fn new(atoms: Vec<Atom>, pieces: Vec<Piece>) -> Result<Self> {
        let mut atoms: Vec<Atom> = atoms.into_iter().filter(|a| a.mass > 0.0).collect();
        atoms.sort_by(|a, b| a.at.total_cmp(&b.at));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if last.at == a.at => last.mass += a.mass,
                _ => merged.push(a),
            }
        }
        let pieces = pieces.into_iter().filter(|p| p.hi > p.lo).collect();
        let law = Self {
            atoms: merged,
            pieces,
        };
        law.check()?;
        Ok(law)
    }

    pub fn point_mass(at: f64) -> Self {
        Self {
            atoms: vec![Atom { at, mass: 1.0 }],
            pieces: Vec::new(),
        }
    }

    fn check(&self) -> Result<()> {
        for a in &self.atoms {
            if !(0.0..=1.0).contains(&a.at) || a.mass < 0.0 {
                return Err(Error::InvalidArgument(format!("bad atom {a:?}")));
            }
        }
        for p in &self.pieces {
            if p.lo < 0.0 || p.hi > 1.0 {
                return Err(Error::InvalidArgument(format!(
                    "piece [{}, {}] leaves [0, 1]",
                    p.lo, p.hi
                )));
            }
        }
        let total = self.total_mass()?;
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidArgument(format!(
                "total mass {total} differs from 1"
            )));
        }
        Ok(())
    }

    pub fn total_mass(&self) -> Result<f64> {
        let mut total: f64 = self.atoms.iter().map(|a| a.mass).sum();
        for p in &self.pieces {
            total += p.density.integral(p.lo, p.hi)?;
        }
        Ok(total)
    }

    pub fn density(&self, k: f64) -> f64 {
        self.pieces
            .iter()
            .filter(|p| p.lo < k && k < p.hi)
            .map(|p| p.density.eval(k))
            .sum()
    }

    pub fn atom_mass_at(&self, k: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.at == k)
            .map(|a| a.mass)
            .sum()
    }

    pub fn cdf(&self, k: f64) -> Result<f64> {
        let mut acc: f64 = self
            .atoms
            .iter()
            .filter(|a| a.at <= k)
            .map(|a| a.mass)
            .sum();
        for p in &self.pieces {
            acc += p.density.integral(p.lo, k.min(p.hi))?;
        }
        Ok(acc.clamp(0.0, 1.0))
    }

    pub fn cdf_left(&self, k: f64) -> Result<f64> {
        Ok((self.cdf(k)? - self.atom_mass_at(k)).max(0.0))
    }

    pub fn mean(&self) -> Result<f64> {
        let mut acc: f64 = self.atoms.iter().map(|a| a.at * a.mass).sum();
        for p in &self.pieces {
            acc += p.density.first_moment(p.lo, p.hi)?;
        }
        Ok(acc)
    }

    /// Probability of each bin `[edges[i], edges[i+1])`, with the last bin closed.
    pub fn bin_probabilities(&self, edges: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(edges.len().saturating_sub(1));
        for (i, w) in edges.windows(2).enumerate() {
            let last = i + 2 == edges.len();
            let upper = if last {
                self.cdf(w[1])?
            } else {
                self.cdf_left(w[1])?
            };
            out.push((upper - self.cdf_left(w[0])?).max(0.0));
        }
        Ok(out)
    }

    /// Smallest and largest points carrying mass.
    pub fn support_hull(&self) -> (f64, f64) {
        let pts = self
            .atoms
            .iter()
            .map(|a| (a.at, a.at))
            .chain(self.pieces.iter().map(|p| (p.lo, p.hi)));
        pts.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (a, b)| {
            (lo.min(a), hi.max(b))
        })
    }

    /// `k,cdf` rows on an equally spaced grid over `[0, 1]`.
    pub fn cdf_table_csv(&self) -> Result<String> {
        let mut s = String::from("k,cdf\n");
        for i in 0..TABLE_POINTS {
            let k = i as f64 / (TABLE_POINTS - 1) as f64;
            let _ = writeln!(s, "{},{}", k, self.cdf(k)?);
        }
        Ok(s)
    }
}

impl TargetCdf for MixedLaw {
    fn cdf_at(&self, x: f64) -> f64 {
        self.cdf(x).unwrap_or(f64::NAN)
    }
    fn cdf_left_at(&self, x: f64) -> f64 {
        self.cdf_left(x).unwrap_or(f64::NAN)
    }
    fn atom_locations(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.at).collect()
    }
}
