//! Far-field decay `|u(x)| ~ |x|^(alpha - 3)` fitted along rays.

use crate::error::{Error, Result};
use crate::report::{num, CsvTable};
use crate::solver::SolutionField;
use crate::Point3;

/// Allowed deviation of a fitted slope from `alpha - 3`.
pub const SLOPE_TOLERANCE: f64 = 0.05;

/// Monopoles below this fraction of the total absolute charge count as zero.
const MONOPOLE_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct RayFit {
    pub direction: Point3,
    pub slope: f64,
    pub intercept: f64,
    /// `(|x|, u(x))` samples along the ray.
    pub samples: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    pub expected_slope: f64,
    /// `int g ds + int f dx`.
    pub monopole: f64,
    /// Set when the monopole vanishes and the leading term is of higher order.
    pub skipped: Option<String>,
    pub rays: Vec<RayFit>,
}

impl DecayReport {
    /// Every ray within [`SLOPE_TOLERANCE`] of `alpha - 3`; vacuous when skipped.
    pub fn passed(&self) -> bool {
        self.skipped.is_some()
            || self
                .rays
                .iter()
                .all(|r| (r.slope - self.expected_slope).abs() <= SLOPE_TOLERANCE)
    }

    pub fn max_deviation(&self) -> f64 {
        self.rays
            .iter()
            .map(|r| (r.slope - self.expected_slope).abs())
            .fold(0.0, f64::max)
    }

    /// Columns `ray,dx,dy,dz,slope,intercept,expected_slope,status`.
    pub fn table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["ray", "dx", "dy", "dz", "slope", "intercept", "expected_slope", "status"]);
        for (i, r) in self.rays.iter().enumerate() {
            let status = match &self.skipped {
                Some(_) => "skipped",
                None if (r.slope - self.expected_slope).abs() <= SLOPE_TOLERANCE => "pass",
                None => "fail",
            };
            t.push(vec![
                i.to_string(),
                num(r.direction.x),
                num(r.direction.y),
                num(r.direction.z),
                num(r.slope),
                num(r.intercept),
                num(self.expected_slope),
                status.to_string(),
            ]);
        }
        t
    }
}

/// The six coordinate half-axes.
pub fn axis_directions() -> Vec<Point3> {
    vec![
        Point3::x(),
        -Point3::x(),
        Point3::y(),
        -Point3::y(),
        Point3::z(),
        -Point3::z(),
    ]
}

/// Least-squares slope of `log |u|` against `log |x|` on each ray, with
/// `samples` geometrically spaced radii in `[r_min, r_max]` measured from
/// the origin.
pub fn decay_check(
    solution: &SolutionField,
    directions: &[Point3],
    r_min: f64,
    r_max: f64,
    samples: usize,
) -> Result<DecayReport> {
    if !(r_min > 0.0 && r_max > r_min) || samples < 2 || directions.is_empty() {
        return Err(Error::InvalidArgument(
            "decay check needs 0 < r_min < r_max, two samples and one direction".into(),
        ));
    }
    let surface_extent = solution
        .surface
        .vertices()
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    if r_min <= surface_extent {
        return Err(Error::InvalidArgument(format!(
            "r_min = {r_min} does not clear the surface (extent {surface_extent})"
        )));
    }
    let areas = solution.surface.areas();
    let volume = solution.volume_potential();
    let monopole = solution.density.integral(&areas) + volume.total_mass();
    let charge: f64 = solution
        .density
        .values
        .iter()
        .zip(&areas)
        .map(|(g, a)| g.abs() * a)
        .sum::<f64>()
        + volume.bounds().l1_norm;
    let skipped = (monopole.abs() <= MONOPOLE_FLOOR * charge).then(|| "vanishing monopole".to_string());

    let radii: Vec<f64> = (0..samples)
        .map(|i| r_min * (r_max / r_min).powf(i as f64 / (samples - 1) as f64))
        .collect();
    let mut rays = Vec::with_capacity(directions.len());
    for d in directions {
        let norm = d.norm();
        if norm == 0.0 {
            return Err(Error::InvalidArgument("zero ray direction".into()));
        }
        let dir = d / norm;
        let points: Vec<Point3> = radii.iter().map(|&r| dir * r).collect();
        let values = solution.evaluate(&points)?;
        let (slope, intercept) = log_log_fit(&radii, &values);
        rays.push(RayFit {
            direction: dir,
            slope,
            intercept,
            samples: radii.iter().copied().zip(values).collect(),
        });
    }
    Ok(DecayReport {
        expected_slope: solution.alpha.value() - 3.0,
        monopole,
        skipped,
        rays,
    })
}

// Zero samples carry no slope information and are left out.
fn log_log_fit(r: &[f64], u: &[f64]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = r
        .iter()
        .zip(u)
        .filter(|(_, v)| **v != 0.0)
        .map(|(r, v)| (r.ln(), v.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
