//! Adaptive Simpson quadrature.
//!
//! The integrands met in this crate are smooth except at finitely many
//! kinks and jumps (threshold crossings). Callers pass the crossings they know
//! about as breakpoints; the adaptive refinement localizes the rest.

use crate::error::{Error, Result};

/// Absolute tolerance used by the limit computations, per integration axis.
pub const DEFAULT_TOL: f64 = 1e-9;

const MAX_DEPTH: u32 = 52;
const PANELS_PER_SEGMENT: usize = 8;

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

impl Panel {
    fn new<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fb: f64) -> Self {
        let m = 0.5 * (a + b);
        let fm = f(m);
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        Self {
            a,
            b,
            fa,
            fm,
            fb,
            whole,
        }
    }
}

struct Acc {
    value: f64,
    forced_error: f64,
}

fn refine<F: Fn(f64) -> f64>(f: &F, p: Panel, tol: f64, depth: u32, acc: &mut Acc) {
    let m = 0.5 * (p.a + p.b);
    let left = Panel::new(f, p.a, m, p.fa, p.fm);
    let right = Panel::new(f, m, p.b, p.fm, p.fb);
    let delta = left.whole + right.whole - p.whole;
    if delta.abs() <= 15.0 * tol {
        acc.value += left.whole + right.whole + delta / 15.0;
        return;
    }
    if depth >= MAX_DEPTH || m <= p.a || m >= p.b {
        // Jump discontinuities never meet a width-proportional tolerance;
        // bottoming out here leaves an error of order (jump size) * 2^-52.
        acc.value += left.whole + right.whole;
        acc.forced_error += delta.abs() / 15.0;
        return;
    }
    refine(f, left, 0.5 * tol, depth + 1, acc);
    refine(f, right, 0.5 * tol, depth + 1, acc);
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    integrate_with_breaks(f, &[a, b], tol)
}

/// Integrates `f` over `[breaks[0], breaks.last()]`, treating every interior
/// break as a panel boundary. Breaks must be finite; unsorted or duplicate
/// entries are tolerated.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: f64) -> Result<f64> {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|x| x.is_finite()).collect();
    if pts.len() < 2 {
        return Ok(0.0);
    }
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup();
    let lo = pts[0];
    let hi = *pts.last().unwrap();
    let span = hi - lo;
    if span <= 0.0 {
        return Ok(0.0);
    }
    let mut acc = Acc {
        value: 0.0,
        forced_error: 0.0,
    };
    for seg in pts.windows(2) {
        let (sa, sb) = (seg[0], seg[1]);
        let h = (sb - sa) / PANELS_PER_SEGMENT as f64;
        let mut xa = sa;
        let mut fa = f(xa);
        for k in 0..PANELS_PER_SEGMENT {
            let xb = if k + 1 == PANELS_PER_SEGMENT {
                sb
            } else {
                sa + h * (k + 1) as f64
            };
            let fb = f(xb);
            let panel = Panel::new(&f, xa, xb, fa, fb);
            refine(&f, panel, tol * (xb - xa) / span, 0, &mut acc);
            xa = xb;
            fa = fb;
        }
    }
    if !acc.value.is_finite() || acc.forced_error > tol {
        return Err(Error::Quadrature {
            achieved: acc.forced_error,
        });
    }
    Ok(acc.value)
}

/// Composite Simpson rule on an equally spaced grid (odd number of values).
pub fn simpson_grid(values: &[f64], h: f64) -> f64 {
    assert!(
        values.len() >= 3 && values.len() % 2 == 1,
        "simpson grid needs an odd count >= 3"
    );
    let last = values.len() - 1;
    let mut s = values[0] + values[last];
    for (i, v) in values.iter().enumerate().take(last).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * h / 3.0
}
