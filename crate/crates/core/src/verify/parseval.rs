//! Fourier transform of surface layers and the Parseval bound
//! `I(r) = int_{|xi| <= r} |hat delta[g](xi)|^2 |xi|^-alpha dxi <= (2 pi)^3 <g, B g>`.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex;

use crate::boundary::{BoundaryDensity, DiscreteBoundaryOperator};
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::report::{num, CsvTable};
use crate::surface::TriangulatedSurface;
use crate::Point3;

/// Relative slack allowed above `(2 pi)^3 <g, B g>`.
pub const PARSEVAL_TOLERANCE: f64 = 0.05;

const SERIES_TERMS: usize = 18;
const RADIAL_NODES: usize = 8;

type C64 = Complex<f64>;

/// `hat delta[g](xi) = int g(y) exp(-i <y, xi>) ds_y`, exact for piecewise
/// constant `g` on the flat panels.
pub fn surface_fourier(surface: &TriangulatedSurface, g: &BoundaryDensity, xi: &Point3) -> Result<C64> {
    if g.len() != surface.len() {
        return Err(Error::DimensionMismatch {
            expected: surface.len(),
            actual: g.len(),
        });
    }
    let t = SurfaceTransform::new(surface, Point3::zeros());
    let mut panels = vec![C64::new(0.0, 0.0); surface.len()];
    t.panel_transforms(xi, &mut panels);
    Ok(panels.iter().zip(&g.values).map(|(p, gv)| p * gv).sum())
}

/// Per-panel transforms `int_T exp(-i <y - c, xi>) ds` about a reference
/// point `c`.
struct SurfaceTransform {
    vertices: Vec<Point3>,
    triangles: Vec<[usize; 3]>,
    twice_area: Vec<f64>,
}

impl SurfaceTransform {
    fn new(surface: &TriangulatedSurface, center: Point3) -> Self {
        Self {
            vertices: surface.vertices().iter().map(|v| v - center).collect(),
            triangles: surface.triangles().to_vec(),
            twice_area: surface.panels().iter().map(|p| 2.0 * p.area).collect(),
        }
    }

    fn panel_transforms(&self, xi: &Point3, out: &mut [C64]) {
        let phase: Vec<f64> = self.vertices.iter().map(|v| v.dot(xi)).collect();
        let expo: Vec<C64> = phase.iter().map(|&t| C64::new(t.cos(), -t.sin())).collect();
        for ((tri, a2), o) in self.triangles.iter().zip(&self.twice_area).zip(out.iter_mut()) {
            *o = *a2 * triangle_divided_difference(tri, &phase, &expo);
        }
    }
}

// Second divided difference of exp at z_j = -i t_j; int_T exp equals twice
// the area times this value.
fn triangle_divided_difference(tri: &[usize; 3], phase: &[f64], expo: &[C64]) -> C64 {
    let mut idx = *tri;
    idx.sort_by(|&a, &b| phase[a].total_cmp(&phase[b]));
    let [i0, i1, i2] = idx;
    let (t0, t1, t2) = (phase[i0], phase[i1], phase[i2]);
    if t2 - t0 < 1.0 {
        return series(t0, t1, t2);
    }
    let first = |ia: usize, ib: usize, ta: f64, tb: f64| -> C64 {
        let d = tb - ta;
        if d > 0.5 {
            (expo[ib] - expo[ia]) / C64::new(0.0, -d)
        } else {
            let m = 0.5 * (ta + tb);
            let h = 0.5 * d;
            let sinc = if h == 0.0 { 1.0 } else { h.sin() / h };
            C64::new(m.cos(), -m.sin()) * sinc
        }
    };
    (first(i1, i2, t1, t2) - first(i0, i1, t0, t1)) / C64::new(0.0, -(t2 - t0))
}

// exp(z_mean) * sum_k h_k(w) / (k + 2)!, where h_k is the complete symmetric
// polynomial of the centered nodes w_j.
fn series(t0: f64, t1: f64, t2: f64) -> C64 {
    let m = (t0 + t1 + t2) / 3.0;
    let w = [C64::new(0.0, m - t0), C64::new(0.0, m - t1), C64::new(0.0, m - t2)];
    let e2 = w[0] * w[1] + w[1] * w[2] + w[2] * w[0];
    let e3 = w[0] * w[1] * w[2];
    let mut h = [C64::new(1.0, 0.0), C64::new(0.0, 0.0), -e2];
    let mut fact = 2.0;
    let mut sum = h[0] / fact;
    fact *= 3.0;
    sum += h[1] / fact;
    fact *= 4.0;
    sum += h[2] / fact;
    for k in 3..SERIES_TERMS {
        let next = -e2 * h[1] + e3 * h[0];
        h = [h[1], h[2], next];
        fact *= (k + 2) as f64;
        sum += next / fact;
    }
    C64::new(m.cos(), -m.sin()) * sum
}

/// Parseval integrals for one density.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsevalReport {
    pub radii: Vec<f64>,
    pub integrals: Vec<f64>,
    /// `(2 pi)^3 <g, B g>`.
    pub quadratic_form: f64,
    pub monotone: bool,
    pub inequality_satisfied: bool,
    /// `Q - I(r_max)`.
    pub gap: f64,
}

impl ParsevalReport {
    /// `I(r_max) / Q`, or one when both vanish.
    pub fn captured_fraction(&self) -> f64 {
        let last = self.integrals.last().copied().unwrap_or(0.0);
        if self.quadratic_form == 0.0 {
            if last == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            last / self.quadratic_form
        }
    }

    /// Columns `r,integral,quadratic_form,ratio`.
    pub fn table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["r", "integral", "quadratic_form", "ratio"]);
        for (r, i) in self.radii.iter().zip(&self.integrals) {
            let ratio = if self.quadratic_form > 0.0 {
                i / self.quadratic_form
            } else {
                0.0
            };
            t.push(vec![num(*r), num(*i), num(self.quadratic_form), num(ratio)]);
        }
        t
    }
}

/// Quadrature knobs for the frequency-space integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParsevalQuadrature {
    /// Minimum polar Gauss nodes; the azimuthal count is twice this.
    pub min_polar: usize,
    /// Polar nodes added on top of `|xi| R`.
    pub polar_margin: f64,
    /// Radial Gauss panels per unit of `|xi| R`.
    pub radial_panels_per_unit: f64,
}

impl Default for ParsevalQuadrature {
    fn default() -> Self {
        Self {
            min_polar: 10,
            polar_margin: 8.0,
            radial_panels_per_unit: 0.5,
        }
    }
}

impl ParsevalQuadrature {
    fn polar_nodes(&self, k: f64, radius: f64) -> usize {
        let n = ((k * radius + self.polar_margin).ceil() as usize).max(self.min_polar);
        n + n % 2
    }

    fn refined(&self) -> Self {
        Self {
            min_polar: 2 * self.min_polar,
            polar_margin: 2.0 * self.polar_margin,
            radial_panels_per_unit: 2.0 * self.radial_panels_per_unit,
        }
    }
}

pub fn parseval_check(g: &BoundaryDensity, op: &DiscreteBoundaryOperator, radii: &[f64]) -> Result<ParsevalReport> {
    let mut r = parseval_check_many(std::slice::from_ref(g), op, radii, ParsevalQuadrature::default())?;
    Ok(r.remove(0))
}

/// Parseval integrals for several densities sharing one frequency quadrature.
/// A decrease of `I(r)` beyond rounding triggers one refinement of the rule;
/// a second failure is reported as under-resolution.
pub fn parseval_check_many(
    densities: &[BoundaryDensity],
    op: &DiscreteBoundaryOperator,
    radii: &[f64],
    rule: ParsevalQuadrature,
) -> Result<Vec<ParsevalReport>> {
    if radii.is_empty() || radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("radii must be positive and strictly increasing".into()));
    }
    for g in densities {
        if g.len() != op.len() {
            return Err(Error::DimensionMismatch {
                expected: op.len(),
                actual: g.len(),
            });
        }
    }
    let alpha = op.alpha().value();
    let mut integrals = cumulative_integrals(densities, op.surface(), alpha, radii, rule);
    if let Some((prev, cur)) = first_decrease(&integrals) {
        integrals = cumulative_integrals(densities, op.surface(), alpha, radii, rule.refined());
        if first_decrease(&integrals).is_some() {
            return Err(Error::Underresolved {
                previous: prev,
                current: cur,
            });
        }
    }
    densities
        .iter()
        .zip(integrals)
        .map(|(g, integrals)| {
            let q = (2.0 * PI).powi(3) * op.quadratic_form(g)?;
            let monotone = integrals.windows(2).all(|w| w[1] >= w[0]);
            let inequality_satisfied = integrals.iter().all(|&i| i <= (1.0 + PARSEVAL_TOLERANCE) * q);
            let gap = q - integrals.last().copied().unwrap_or(0.0);
            Ok(ParsevalReport {
                radii: radii.to_vec(),
                integrals,
                quadratic_form: q,
                monotone,
                inequality_satisfied,
                gap,
            })
        })
        .collect()
}

fn first_decrease(integrals: &[Vec<f64>]) -> Option<(f64, f64)> {
    integrals.iter().find_map(|seq| {
        seq.windows(2)
            .find(|w| w[1] < w[0] - 1e-12 * w[0].abs())
            .map(|w| (w[0], w[1]))
    })
}

// I(r) at each radius for each density, accumulated panel by panel over
// [0, r_1], [r_1, r_2], ...
fn cumulative_integrals(
    densities: &[BoundaryDensity],
    surface: &TriangulatedSurface,
    alpha: f64,
    radii: &[f64],
    rule: ParsevalQuadrature,
) -> Vec<Vec<f64>> {
    let center = surface.center();
    let radius = surface.radius();
    let transform = SurfaceTransform::new(surface, center);
    let gauss = GaussLegendre::new(RADIAL_NODES);

    // Radial nodes tagged with the interval they belong to.
    let mut nodes: Vec<(usize, f64, f64)> = Vec::new();
    let mut lo = 0.0;
    for (interval, &hi) in radii.iter().enumerate() {
        let panels = (((hi - lo) * radius * rule.radial_panels_per_unit).ceil() as usize).max(1);
        let width = (hi - lo) / panels as f64;
        for p in 0..panels {
            let a = lo + p as f64 * width;
            let b = a + width;
            if a == 0.0 {
                // k = b s^2 removes the k^(2 - alpha) endpoint behaviour.
                for (s, w) in gauss.mapped(0.0, 1.0) {
                    nodes.push((interval, b * s * s, w * 2.0 * b * s));
                }
            } else {
                for (k, w) in gauss.mapped(a, b) {
                    nodes.push((interval, k, w));
                }
            }
        }
        lo = hi;
    }

    let shells: Vec<Vec<f64>> = nodes
        .par_iter()
        .map(|&(_, k, w)| {
            let sphere = sphere_average(&transform, densities, k, rule.polar_nodes(k, radius));
            sphere.into_iter().map(|s| w * k.powf(2.0 - alpha) * s).collect()
        })
        .collect();

    let mut out = vec![vec![0.0; radii.len()]; densities.len()];
    for (d, seq) in out.iter_mut().enumerate() {
        let mut running = 0.0;
        let mut node = 0;
        for (interval, slot) in seq.iter_mut().enumerate() {
            while node < nodes.len() && nodes[node].0 == interval {
                running += shells[node][d];
                node += 1;
            }
            *slot = running;
        }
    }
    out
}

// int_{S^2} |hat delta[g](k omega)|^2 d omega with product Gauss x trapezoid
// nodes; antipodal symmetry halves the work.
fn sphere_average(transform: &SurfaceTransform, densities: &[BoundaryDensity], k: f64, polar: usize) -> Vec<f64> {
    let mu_rule = GaussLegendre::new(polar);
    let azimuth = 2 * polar;
    let dphi = 2.0 * PI / azimuth as f64;
    let mut panel = vec![C64::new(0.0, 0.0); transform.triangles.len()];
    let mut acc = vec![0.0; densities.len()];
    for (&mu, &wmu) in mu_rule.nodes.iter().zip(&mu_rule.weights) {
        if mu < 0.0 {
            continue;
        }
        let st = (1.0 - mu * mu).sqrt();
        for j in 0..azimuth {
            let phi = j as f64 * dphi;
            let xi = Point3::new(st * phi.cos(), st * phi.sin(), mu) * k;
            transform.panel_transforms(&xi, &mut panel);
            for (a, g) in acc.iter_mut().zip(densities) {
                let v: C64 = panel.iter().zip(&g.values).map(|(p, gv)| p * gv).sum();
                *a += 2.0 * wmu * dphi * v.norm_sqr();
            }
        }
    }
    acc
}
