//! Computable forms of the continuous data-dependence and derivative
//! estimates on a compact box `K` away from the surface:
//!
//! `||u2 - u1||_{L1(K)} <= C0 ||d(phi - phi_f)||_{H1a} + C* ||f2 - f1||_{L1}`
//!
//! with `C0 = b* sqrt(|Gamma|) sup_Gamma W_K`, `C* = c sup_D W_K`,
//! `W_K(y) = int_K |x - y|^(alpha-3) dx` and `b*` the norm of
//! `c B^-1 : H1a -> L2` on the discrete spectrum.

use std::sync::Arc;

use rayon::prelude::*;

use crate::boundary::{BoundaryDensity, DiscreteBoundaryOperator};
use crate::error::{Error, Result};
use crate::kernel::RieszKernel3;
use crate::potential::{Aabb, VolumeQuadrature, VolumeSource, DEFAULT_RESOLUTION};
use crate::report::{num, CsvTable};
use crate::solver::SolutionField;
use crate::surface::TriangulatedSurface;
use crate::Point3;

/// Compact box `K` with its midpoint grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DependenceConfig {
    pub region: Aabb,
    /// Midpoint cells per axis of `K`.
    pub resolution: usize,
    /// Cells along the longest edge when integrating `f` over its domain.
    pub source_resolution: usize,
}

impl DependenceConfig {
    pub fn new(region: Aabb, resolution: usize) -> Self {
        Self {
            region,
            resolution,
            source_resolution: DEFAULT_RESOLUTION,
        }
    }

    fn midpoints(&self) -> (Vec<Point3>, f64) {
        let m = self.resolution;
        let e = self.region.extent() / m as f64;
        let mut pts = Vec::with_capacity(m * m * m);
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let off = Point3::new(
                        (i as f64 + 0.5) * e.x,
                        (j as f64 + 0.5) * e.y,
                        (k as f64 + 0.5) * e.z,
                    );
                    pts.push(self.region.min + off);
                }
            }
        }
        (pts, e.x * e.y * e.z)
    }

    fn validate(&self, surface: &TriangulatedSurface) -> Result<()> {
        if self.resolution == 0 || self.source_resolution == 0 {
            return Err(Error::Config("resolutions must be positive".into()));
        }
        let half_diag = 0.5 * self.region.extent().norm();
        if surface.distance(&self.region.center()) <= half_diag {
            return Err(Error::Config("compact region K must stay off the surface".into()));
        }
        Ok(())
    }
}

/// Both sides of the estimate and every factor entering them.
#[derive(Clone, Debug, PartialEq)]
pub struct DependenceReport {
    /// `||d u||_{L1(K)}` (of `d^beta u` for derivative checks).
    pub lhs: f64,
    /// `H1a` norm of the boundary data term.
    pub boundary_norm: f64,
    /// `L1` norm of the source term.
    pub source_norm: f64,
    /// Norm of `c B^-1` from `H1a` to `L2`.
    pub b_star: f64,
    pub sup_boundary_weight: f64,
    pub sup_source_weight: f64,
    pub c0: f64,
    pub c_star: f64,
    pub rhs: f64,
}

impl DependenceReport {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs * (1.0 + 1e-12) + f64::MIN_POSITIVE
    }

    /// `rhs / lhs`; infinite when the left side vanishes.
    pub fn slack(&self) -> f64 {
        if self.lhs == 0.0 {
            f64::INFINITY
        } else {
            self.rhs / self.lhs
        }
    }

    /// Columns `lhs,rhs,slack,c0,c_star,b_star,boundary_norm,source_norm,sup_boundary_weight,sup_source_weight`.
    pub fn table(&self) -> CsvTable {
        let mut t = CsvTable::new(&[
            "lhs",
            "rhs",
            "slack",
            "c0",
            "c_star",
            "b_star",
            "boundary_norm",
            "source_norm",
            "sup_boundary_weight",
            "sup_source_weight",
        ]);
        t.push(vec![
            num(self.lhs),
            num(self.rhs),
            num(self.slack()),
            num(self.c0),
            num(self.c_star),
            num(self.b_star),
            num(self.boundary_norm),
            num(self.source_norm),
            num(self.sup_boundary_weight),
            num(self.sup_source_weight),
        ]);
        t
    }
}

/// Multi-index `beta` with `|beta| <= 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MultiIndex(pub [u8; 3]);

impl MultiIndex {
    pub fn new(beta: [u8; 3]) -> Result<Self> {
        if beta.iter().map(|&b| b as u32).sum::<u32>() > 2 {
            return Err(Error::InvalidArgument(format!("|beta| <= 2 required, got {beta:?}")));
        }
        Ok(Self(beta))
    }

    pub fn order(&self) -> u32 {
        self.0.iter().map(|&b| b as u32).sum()
    }

    fn axes(&self) -> Vec<usize> {
        (0..3).flat_map(|i| std::iter::repeat_n(i, self.0[i] as usize)).collect()
    }
}

/// `d^beta_x |x - y|^b` for `|beta| <= 2`.
fn kernel_derivative(beta: &MultiIndex, b: f64, r: &Point3) -> f64 {
    let r2 = r.norm_squared();
    let base = r2.powf(0.5 * b);
    match beta.axes().as_slice() {
        [] => base,
        [i] => b * base / r2 * r[*i],
        [i, j] => {
            let delta = if i == j { 1.0 } else { 0.0 };
            b * base / r2 * (delta + (b - 2.0) * r[*i] * r[*j] / r2)
        }
        _ => unreachable!("order checked at construction"),
    }
}

// Midpoint rule for W_{K,beta}(y) = int_K |d^beta |x - y|^b| dx.
fn weight(beta: &MultiIndex, b: f64, k_points: &[Point3], cell: f64, y: &Point3) -> f64 {
    k_points
        .iter()
        .map(|x| kernel_derivative(beta, b, &(x - y)).abs())
        .sum::<f64>()
        * cell
}

fn boundary_sup_weight(surface: &TriangulatedSurface, beta: &MultiIndex, b: f64, k: &[Point3], cell: f64) -> f64 {
    let mut probes: Vec<Point3> = surface.vertices().to_vec();
    probes.extend(surface.collocation_points());
    probes
        .par_iter()
        .map(|y| weight(beta, b, k, cell, y))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max)
}

// Samples of a source over its quadrature cells: (center, volume).
fn source_cells(surface: &TriangulatedSurface, source: &VolumeSource, resolution: usize) -> Result<Vec<(Point3, f64)>> {
    if source.is_zero() {
        return Ok(Vec::new());
    }
    let quad = VolumeQuadrature::new(surface, source, resolution)?;
    let mut out = Vec::new();
    for cell in quad.cells.iter().filter(|c| c.inside) {
        if cell.subcells.is_empty() {
            out.push((cell.center, quad.cell_edge.powi(3)));
        } else {
            out.extend(cell.subcells.iter().map(|c| (*c, quad.subcell_edge.powi(3))));
        }
    }
    Ok(out)
}

fn b_star(op: &DiscreteBoundaryOperator, constant: f64) -> Result<f64> {
    let lmin = op.spectrum()?.min_eigenvalue();
    Ok(constant / (1.0 + lmin * lmin).sqrt())
}

fn check_pair(a: &SolutionField, b: &SolutionField, op: &DiscreteBoundaryOperator) -> Result<()> {
    if !Arc::ptr_eq(&a.surface, &b.surface) && a.surface.len() != b.surface.len() {
        return Err(Error::InvalidArgument("solutions live on different surfaces".into()));
    }
    if a.alpha != b.alpha || a.alpha != op.alpha() {
        return Err(Error::InvalidArgument("solutions and operator disagree on alpha".into()));
    }
    if a.side != b.side {
        return Err(Error::InvalidArgument("solutions are on different sides".into()));
    }
    if op.len() != a.surface.len() {
        return Err(Error::DimensionMismatch {
            expected: op.len(),
            actual: a.surface.len(),
        });
    }
    Ok(())
}

fn l1_difference(first: &SolutionField, second: &SolutionField, k: &[Point3], cell: f64) -> Result<f64> {
    let u1 = first.evaluate(k)?;
    let u2 = second.evaluate(k)?;
    Ok(u1.iter().zip(&u2).map(|(a, b)| (b - a).abs()).sum::<f64>() * cell)
}

/// Both sides of the data-dependence estimate for two solves that share
/// surface, order and side.
pub fn data_dependence_check(
    first: &SolutionField,
    second: &SolutionField,
    op: &DiscreteBoundaryOperator,
    config: &DependenceConfig,
) -> Result<DependenceReport> {
    check_pair(first, second, op)?;
    config.validate(&first.surface)?;
    let delta = second
        .boundary_data
        .sub(&second.source_trace)
        .sub(&first.boundary_data.sub(&first.source_trace));
    let source = second.source.plus(&first.source.scaled(-1.0))?;
    let (k, cell) = config.midpoints();
    let lhs = l1_difference(first, second, &k, cell)?;
    estimate(first, op, config, &delta, &source, MultiIndex([0, 0, 0]), &k, cell, lhs, None)
}

/// The approximation estimate `||u - u_n||_{L1(K)} <= C0 ||phi - phi_n||`,
/// where `phi_n = B psi_n + phi_f` is the trace attained by the truncated
/// field.
pub fn approximation_check(
    exact: &SolutionField,
    approx: &SolutionField,
    op: &DiscreteBoundaryOperator,
    config: &DependenceConfig,
) -> Result<DependenceReport> {
    check_pair(exact, approx, op)?;
    config.validate(&exact.surface)?;
    let delta = exact.boundary_data.sub(&approx.fitted_data);
    let (k, cell) = config.midpoints();
    let lhs = l1_difference(exact, approx, &k, cell)?;
    let none = VolumeSource::zero(exact.side);
    estimate(exact, op, config, &delta, &none, MultiIndex([0, 0, 0]), &k, cell, lhs, None)
}

/// Derivative estimate: `d^beta u` by central differences with the given
/// step on the midpoint grid of `K`, against
/// `C0_beta ||phi - phi_f|| + C* ||d^beta f||_{L1}`. The source must be C^2
/// and vanish near the surface so that its zero extension is as smooth.
pub fn derivative_norm_check(
    solution: &SolutionField,
    beta: MultiIndex,
    op: &DiscreteBoundaryOperator,
    config: &DependenceConfig,
    step: f64,
) -> Result<DependenceReport> {
    if op.len() != solution.surface.len() || op.alpha() != solution.alpha {
        return Err(Error::InvalidArgument("operator does not match the solution".into()));
    }
    if !(step > 0.0) {
        return Err(Error::InvalidArgument("difference step must be positive".into()));
    }
    config.validate(&solution.surface)?;
    let (k, cell) = config.midpoints();
    let derivs: Vec<f64> = k
        .iter()
        .map(|x| central_difference(&beta, step, x, |p| solution.eval(p)))
        .collect::<Result<_>>()?;
    let lhs = derivs.iter().map(|d| d.abs()).sum::<f64>() * cell;
    let data = solution.boundary_data.sub(&solution.source_trace);
    let src = solution.source.clone();
    let diff = DerivativeSource { beta, step };
    estimate(solution, op, config, &data, &src, beta, &k, cell, lhs, Some(diff))
}

#[derive(Clone, Copy)]
struct DerivativeSource {
    beta: MultiIndex,
    step: f64,
}

fn central_difference(beta: &MultiIndex, s: f64, x: &Point3, f: impl Fn(&Point3) -> Result<f64>) -> Result<f64> {
    let e = |i: usize| {
        let mut v = Point3::zeros();
        v[i] = s;
        v
    };
    Ok(match beta.axes().as_slice() {
        [] => f(x)?,
        [i] => (f(&(x + e(*i)))? - f(&(x - e(*i)))?) / (2.0 * s),
        [i, j] if i == j => (f(&(x + e(*i)))? - 2.0 * f(x)? + f(&(x - e(*i)))?) / (s * s),
        [i, j] => {
            let (a, b) = (e(*i), e(*j));
            (f(&(x + a + b))? - f(&(x + a - b))? - f(&(x - a + b))? + f(&(x - a - b))?) / (4.0 * s * s)
        }
        _ => unreachable!("order checked at construction"),
    })
}

#[allow(clippy::too_many_arguments)]
fn estimate(
    field: &SolutionField,
    op: &DiscreteBoundaryOperator,
    config: &DependenceConfig,
    boundary_term: &BoundaryDensity,
    source: &VolumeSource,
    beta: MultiIndex,
    k: &[Point3],
    cell: f64,
    lhs: f64,
    derivative: Option<DerivativeSource>,
) -> Result<DependenceReport> {
    let surface = field.surface.as_ref();
    let kernel = RieszKernel3::new(field.alpha)?;
    let c = kernel.constant();
    let b = field.alpha.value() - 3.0;

    let boundary_norm = op.spectrum()?.h1alpha_norm(boundary_term)?;
    let b_star = b_star(op, c)?;
    let sup_boundary_weight = boundary_sup_weight(surface, &beta, b, k, cell);
    let c0 = b_star * surface.total_area().sqrt() * sup_boundary_weight;

    let cells = source_cells(surface, source, config.source_resolution)?;
    let plain = MultiIndex([0, 0, 0]);
    let per_cell: Vec<(f64, f64)> = cells
        .par_iter()
        .map(|(y, vol)| {
            let w = weight(&plain, b, k, cell, y);
            let value = match derivative {
                None => source.eval(y),
                Some(d) => central_difference(&d.beta, d.step, y, |p| Ok(source.eval(p))).unwrap_or(f64::NAN),
            };
            (w, value.abs() * vol)
        })
        .collect();
    let sup_source_weight = per_cell.iter().map(|p| p.0).fold(0.0, f64::max);
    let source_norm: f64 = per_cell.iter().map(|p| p.1).sum();
    if !source_norm.is_finite() {
        return Err(Error::NonFiniteSource {
            point: [f64::NAN; 3],
            value: source_norm,
        });
    }
    let c_star = c * sup_source_weight;
    Ok(DependenceReport {
        lhs,
        boundary_norm,
        source_norm,
        b_star,
        sup_boundary_weight,
        sup_source_weight,
        c0,
        c_star,
        rhs: c0 * boundary_norm + c_star * source_norm,
    })
}
