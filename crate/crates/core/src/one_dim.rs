//! One-dimensional fractional Dirichlet problems with weighted boundary
//! conditions, for `0 < alpha < 1`:
//!
//! * half-line `(l0, inf)` with `|x - l0|^(1-alpha) u -> c0` at `l0`,
//! * interval `(-l, l)` with `|x +- l|^(1-alpha) u -> c-+` at `-+l`.
//!
//! Solutions are boundary terms `c / |x - p|^(1-alpha)` plus the Riesz
//! potential of the source.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::kernel::{riesz_constant, Dimension, FractionalOrder};
use crate::quadrature::integrate_adaptive;
use crate::report::{num, CsvTable};

pub type Source1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Absolute and relative tolerance of the source integral.
pub const INTEGRAL_TOLERANCE: f64 = 1e-9;

/// A source on `[a, b]`, zero elsewhere.
#[derive(Clone)]
pub struct CompactSource {
    f: Source1,
    pub support: (f64, f64),
}

impl fmt::Debug for CompactSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompactSource").field("support", &self.support).finish_non_exhaustive()
    }
}

impl CompactSource {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static, support: (f64, f64)) -> Result<Self> {
        if !(support.0.is_finite() && support.1.is_finite() && support.0 <= support.1) {
            return Err(Error::InvalidArgument(format!("invalid source support {support:?}")));
        }
        Ok(Self {
            f: Arc::new(f),
            support,
        })
    }

    pub fn zero() -> Self {
        Self {
            f: Arc::new(|_| 0.0),
            support: (0.0, 0.0),
        }
    }

    pub fn constant(value: f64, support: (f64, f64)) -> Result<Self> {
        Self::new(move |_| value, support)
    }

    pub fn is_empty(&self) -> bool {
        self.support.0 == self.support.1
    }

    /// Zero extension of the source.
    pub fn eval(&self, x: f64) -> f64 {
        if x < self.support.0 || x > self.support.1 || self.is_empty() {
            0.0
        } else {
            (self.f)(x)
        }
    }
}

/// `c_{1,alpha} int_a^b f(y) |x - y|^(alpha-1) dy`. Each side of `x` is
/// integrated in `t = |y - x|^alpha`, which absorbs the weak singularity.
pub fn riesz_potential_1d(alpha: FractionalOrder, source: &CompactSource, x: f64) -> Result<f64> {
    let c = riesz_constant(Dimension::One, alpha)?.value;
    if source.is_empty() {
        return Ok(0.0);
    }
    let a = alpha.value();
    let (lo, hi) = source.support;
    let f = &source.f;
    let mut total = 0.0;
    // Right of x: y = x + t^(1/a).
    let r0 = (lo - x).max(0.0);
    let r1 = hi - x;
    if r1 > r0 {
        total += integrate_adaptive(
            |t| f(x + t.powf(1.0 / a)),
            r0.powf(a),
            r1.powf(a),
            INTEGRAL_TOLERANCE,
            INTEGRAL_TOLERANCE,
        )
        .value;
    }
    // Left of x: y = x - t^(1/a).
    let l0 = (x - hi).max(0.0);
    let l1 = x - lo;
    if l1 > l0 {
        total += integrate_adaptive(
            |t| f(x - t.powf(1.0 / a)),
            l0.powf(a),
            l1.powf(a),
            INTEGRAL_TOLERANCE,
            INTEGRAL_TOLERANCE,
        )
        .value;
    }
    let v = c * total / a;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteSource {
            point: [x, 0.0, 0.0],
            value: v,
        })
    }
}

/// General solution with free constants: `sum_j C_j c_{1,alpha} |x - p_j|^(alpha-1)`
/// plus the Riesz potential of the source. The Dirichlet solvers pick
/// `C_j = c_j / c_{1,alpha}` so that the weighted limits equal `c_j`.
pub fn general_solution(alpha: FractionalOrder, poles: &[(f64, f64)], source: &CompactSource, x: f64) -> Result<f64> {
    let c = riesz_constant(Dimension::One, alpha)?.value;
    let mut u = riesz_potential_1d(alpha, source, x)?;
    for &(p, big_c) in poles {
        if x == p {
            return Err(Error::Singular);
        }
        u += big_c * c * (x - p).abs().powf(alpha.value() - 1.0);
    }
    Ok(u)
}

/// Common view of the two problem types for the checks below.
pub trait WeightedDirichlet1d: Sync {
    fn alpha(&self) -> FractionalOrder;
    /// `(p, c)` pairs: boundary terms `c |x - p|^(alpha - 1)`.
    fn boundary_terms(&self) -> Vec<(f64, f64)>;
    fn source(&self) -> &CompactSource;
    /// Open domain `(lo, hi)`, `hi` possibly infinite.
    fn domain(&self) -> (f64, f64);

    fn eval(&self, x: f64) -> Result<f64> {
        let mut u = riesz_potential_1d(self.alpha(), self.source(), x)?;
        for (p, c) in self.boundary_terms() {
            if x == p {
                return Err(Error::Singular);
            }
            u += c * (x - p).abs().powf(self.alpha().value() - 1.0);
        }
        Ok(u)
    }
}

#[derive(Clone, Debug)]
pub struct HalfLineProblem {
    pub alpha: FractionalOrder,
    pub l0: f64,
    pub c0: f64,
    pub source: CompactSource,
}

impl HalfLineProblem {
    pub fn new(alpha: FractionalOrder, l0: f64, c0: f64, source: CompactSource) -> Result<Self> {
        check_one_d(alpha)?;
        if !(l0.is_finite() && c0.is_finite()) {
            return Err(Error::InvalidArgument("l0 and c0 must be finite".into()));
        }
        if !source.is_empty() && source.support.0 <= l0 {
            return Err(Error::InvalidArgument(format!(
                "source support must start right of l0 = {l0}, got {:?}",
                source.support
            )));
        }
        Ok(Self { alpha, l0, c0, source })
    }
}

impl WeightedDirichlet1d for HalfLineProblem {
    fn alpha(&self) -> FractionalOrder {
        self.alpha
    }
    fn boundary_terms(&self) -> Vec<(f64, f64)> {
        vec![(self.l0, self.c0)]
    }
    fn source(&self) -> &CompactSource {
        &self.source
    }
    fn domain(&self) -> (f64, f64) {
        (self.l0, f64::INFINITY)
    }
}

#[derive(Clone, Debug)]
pub struct IntervalProblem {
    pub alpha: FractionalOrder,
    pub l: f64,
    pub c_minus: f64,
    pub c_plus: f64,
    pub source: CompactSource,
}

impl IntervalProblem {
    pub fn new(alpha: FractionalOrder, l: f64, c_minus: f64, c_plus: f64, source: CompactSource) -> Result<Self> {
        check_one_d(alpha)?;
        if !(l > 0.0 && l.is_finite() && c_minus.is_finite() && c_plus.is_finite()) {
            return Err(Error::InvalidArgument("need l > 0 and finite constants".into()));
        }
        if !source.is_empty() && (source.support.0 < -l || source.support.1 > l) {
            return Err(Error::InvalidArgument(format!(
                "source support {:?} leaves [-{l}, {l}]",
                source.support
            )));
        }
        Ok(Self {
            alpha,
            l,
            c_minus,
            c_plus,
            source,
        })
    }
}

impl WeightedDirichlet1d for IntervalProblem {
    fn alpha(&self) -> FractionalOrder {
        self.alpha
    }
    fn boundary_terms(&self) -> Vec<(f64, f64)> {
        vec![(-self.l, self.c_minus), (self.l, self.c_plus)]
    }
    fn source(&self) -> &CompactSource {
        &self.source
    }
    fn domain(&self) -> (f64, f64) {
        (-self.l, self.l)
    }
}

fn check_one_d(alpha: FractionalOrder) -> Result<()> {
    if alpha.dimension() != Dimension::One {
        return Err(Error::Domain {
            alpha: alpha.value(),
            dimension: 1,
            interval: "(0, 1)",
        });
    }
    Ok(())
}

/// `u(x) = c0 |x - l0|^(alpha-1) + c_{1,alpha} int f(y) |x - y|^(alpha-1) dy`.
pub fn solve_halfline(p: &HalfLineProblem, x: f64) -> Result<f64> {
    p.eval(x)
}

/// `u(x) = c- |x + l|^(alpha-1) + c+ |x - l|^(alpha-1) + c_{1,alpha} int f |x - y|^(alpha-1) dy`.
pub fn solve_interval(p: &IntervalProblem, x: f64) -> Result<f64> {
    p.eval(x)
}

/// Offsets at which the weighted limit is sampled.
pub const LIMIT_STEPS: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryLimitReport {
    pub endpoint: f64,
    /// `(h, h^(1-alpha) u(endpoint + s h))` with `s` pointing into the domain.
    pub weighted: Vec<(f64, f64)>,
    /// Richardson-extrapolated limit.
    pub limit: f64,
    pub target: f64,
    pub passed: bool,
}

impl BoundaryLimitReport {
    /// Columns `h,weighted_u` followed by a `limit` and `target` row.
    pub fn table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["h", "weighted_u"]);
        for (h, w) in &self.weighted {
            t.push_numbers(&[*h, *w]);
        }
        t.push(vec!["limit".into(), num(self.limit)]);
        t.push(vec!["target".into(), num(self.target)]);
        t
    }
}

/// Extrapolates `lim h^(1-alpha) u(l* + s h)` from the domain side and compares
/// it with `target`: within 1% relative, or 0.01 absolute when the target is 0.
pub fn boundary_limit_check(problem: &dyn WeightedDirichlet1d, endpoint: f64, target: f64) -> Result<BoundaryLimitReport> {
    let (lo, hi) = problem.domain();
    let dir = if endpoint == lo {
        1.0
    } else if endpoint == hi {
        -1.0
    } else {
        return Err(Error::InvalidArgument(format!("{endpoint} is not an endpoint of ({lo}, {hi})")));
    };
    let p = 1.0 - problem.alpha().value();
    let weighted: Vec<(f64, f64)> = LIMIT_STEPS
        .iter()
        .map(|&h| Ok((h, h.powf(p) * problem.eval(endpoint + dir * h)?)))
        .collect::<Result<_>>()?;
    // w(h) = c + B h^p + ...: eliminate the h^p term between consecutive steps.
    let n = weighted.len();
    let (h1, w1) = weighted[n - 2];
    let (h2, w2) = weighted[n - 1];
    let ratio = (h1 / h2).powf(p);
    let limit = (ratio * w2 - w1) / (ratio - 1.0);
    let passed = if target == 0.0 {
        limit.abs() <= 0.01
    } else {
        (limit - target).abs() <= 0.01 * target.abs()
    };
    Ok(BoundaryLimitReport {
        endpoint,
        weighted,
        limit,
        target,
        passed,
    })
}

/// Periodic grid for the one-dimensional spectral check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralGrid1d {
    /// Nodes, a power of two.
    pub n: usize,
    pub spacing: f64,
    /// Gaussian width in grid spacings, applied to both sides.
    pub mollifier: f64,
}

impl Default for SpectralGrid1d {
    fn default() -> Self {
        Self {
            n: 1 << 16,
            spacing: 1.0 / 64.0,
            mollifier: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Residual1dReport {
    pub relative_residual: f64,
    pub residual_l2: f64,
    pub reference_l2: f64,
    /// True when `f` vanishes on the probe and the residual is scaled by
    /// `||u|| / d^alpha`, `d` the distance from the probe to the nearest
    /// boundary point.
    pub symbol_scaled: bool,
    /// `(x, lhs, rhs)` on the probe nodes.
    pub probe_values: Vec<(f64, f64, f64)>,
}

impl Residual1dReport {
    /// Columns `x,lhs,rhs,residual`.
    pub fn table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["x", "lhs", "rhs", "residual"]);
        for (x, l, r) in &self.probe_values {
            t.push_numbers(&[*x, *l, *r, l - r]);
        }
        t
    }
}

/// Applies the symbol `|xi|^alpha` to the windowed solution on a large
/// periodic grid centered at the probe and compares with the source there.
/// Boundary terms are sampled as exact cell averages, which keeps their
/// integrable singularities from aliasing.
pub fn spectral_residual_1d(
    problem: &dyn WeightedDirichlet1d,
    probe: (f64, f64),
    grid: SpectralGrid1d,
) -> Result<Residual1dReport> {
    let (lo, hi) = problem.domain();
    if !(probe.0 > lo && probe.1 < hi && probe.0 < probe.1) {
        return Err(Error::Config(format!(
            "probe {probe:?} is not strictly inside the domain ({lo}, {hi})"
        )));
    }
    if !grid.n.is_power_of_two() || grid.n < 64 || !(grid.spacing > 0.0) {
        return Err(Error::Config("grid needs n a power of two >= 64 and positive spacing".into()));
    }
    let alpha = problem.alpha().value();
    let n = grid.n;
    let h = grid.spacing;
    let length = n as f64 * h;
    let center = 0.5 * (probe.0 + probe.1);
    let (inner, outer) = (0.25 * length, 0.45 * length);
    if probe.1 - center >= inner {
        return Err(Error::Config("probe does not fit inside the window".into()));
    }
    let origin = center - 0.5 * length;
    let node = |i: usize| origin + i as f64 * h;
    let window = |x: f64| {
        let r = (x - center).abs();
        if r <= inner {
            1.0
        } else if r >= outer {
            0.0
        } else {
            0.5 * (1.0 + (PI * (r - inner) / (outer - inner)).cos())
        }
    };

    let terms = problem.boundary_terms();
    let samples: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = node(i);
            let w = window(x);
            if w == 0.0 {
                return Ok(0.0);
            }
            let mut u = riesz_potential_1d(problem.alpha(), problem.source(), x)?;
            for &(p, c) in &terms {
                u += c * cell_average_power(x - p, h, alpha);
            }
            Ok(w * u)
        })
        .collect::<Result<_>>()?;
    let source: Vec<f64> = (0..n).map(|i| problem.source().eval(node(i))).collect();

    let sigma = grid.mollifier * h;
    let lhs = apply_symbol_1d(&samples, length, |k| k.powf(alpha) * (-0.5 * sigma * sigma * k * k).exp());
    let rhs = apply_symbol_1d(&source, length, |k| (-0.5 * sigma * sigma * k * k).exp());

    let mut probe_values = Vec::new();
    let mut u_norm = 0.0;
    for i in 0..n {
        let x = node(i);
        if x >= probe.0 && x <= probe.1 {
            probe_values.push((x, lhs[i], rhs[i]));
            u_norm += samples[i] * samples[i];
        }
    }
    let residual_l2 = probe_values.iter().map(|(_, l, r)| (l - r).powi(2)).sum::<f64>().sqrt();
    let source_l2 = probe_values.iter().map(|(_, _, r)| r * r).sum::<f64>().sqrt();
    let gap = terms
        .iter()
        .map(|(p, _)| (center - p).abs())
        .fold(f64::INFINITY, f64::min);
    let scale = u_norm.sqrt() / gap.min(1.0 / f64::EPSILON).powf(alpha);
    let (symbol_scaled, reference_l2) = if source_l2 > 1e-12 * scale {
        (false, source_l2)
    } else {
        (true, scale)
    };
    let relative_residual = if reference_l2 > 0.0 {
        residual_l2 / reference_l2
    } else {
        residual_l2
    };
    Ok(Residual1dReport {
        relative_residual,
        residual_l2,
        reference_l2,
        symbol_scaled,
        probe_values,
    })
}

// (1/h) int_{t-h/2}^{t+h/2} |s|^(a-1) ds.
fn cell_average_power(t: f64, h: f64, a: f64) -> f64 {
    let anti = |s: f64| s.signum() * s.abs().powf(a) / a;
    (anti(t + 0.5 * h) - anti(t - 0.5 * h)) / h
}

fn apply_symbol_1d(samples: &[f64], length: f64, symbol: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = samples.len();
    let mut planner = FftPlanner::new();
    let mut data: Vec<Complex<f64>> = samples.iter().map(|&v| Complex::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut data);
    for (m, z) in data.iter_mut().enumerate() {
        let signed = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
        let k = (2.0 * PI * signed / length).abs();
        *z *= if k == 0.0 { 0.0 } else { symbol(k) };
    }
    planner.plan_fft_inverse(n).process(&mut data);
    data.iter().map(|z| z.re / n as f64).collect()
}
