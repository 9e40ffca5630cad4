//! Grid check of `(-Delta)^(alpha/2) u = f` on a probe ball inside the domain.

use rayon::prelude::*;

use super::grid::{apply_radial_symbol, BoxGrid, WindowSpec};
use crate::error::{Error, Result};
use crate::potential::Side;
use crate::report::{num, CsvTable};
use crate::solver::SolutionField;
use crate::surface::{ColumnClassifier, TriangulatedSurface};
use crate::Point3;

/// Smallest grid accepted for solution fields.
pub const MIN_GRID: usize = 64;

/// Default Gaussian mollifier width, in grid spacings.
pub const DEFAULT_MOLLIFIER: f64 = 1.2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualConfig {
    /// Nodes per axis.
    pub n: usize,
    pub edge_length: f64,
    pub window: WindowSpec,
    pub probe_center: Point3,
    pub probe_radius: f64,
    /// Width of the Gaussian applied to both sides, in grid spacings.
    pub mollifier: f64,
}

impl ResidualConfig {
    /// Box of `padding` surface diameters, window and probe scaled to the
    /// surface radius `R`: taper from `2.5 R` to `3.5 R`, probe of radius
    /// `R / 2` about the surface center.
    pub fn for_surface(surface: &TriangulatedSurface, n: usize, padding: f64) -> Result<Self> {
        let c = surface.center();
        let r = surface.radius();
        Ok(Self {
            n,
            edge_length: padding * 2.0 * r,
            window: WindowSpec::new(c, 2.5 * r, 3.5 * r)?,
            probe_center: c,
            probe_radius: 0.5 * r,
            mollifier: DEFAULT_MOLLIFIER,
        })
    }

    fn validate(&self, surface: &TriangulatedSurface, side: Side) -> Result<()> {
        if self.n < MIN_GRID {
            return Err(Error::Config(format!(
                "grid n = {} does not resolve the surface; need n >= {MIN_GRID}",
                self.n
            )));
        }
        if !(self.probe_radius > 0.0 && self.mollifier >= 0.0) {
            return Err(Error::Config("probe radius must be positive and mollifier non-negative".into()));
        }
        let w = &self.window;
        let box_center = w.center;
        if w.outer_radius > 0.5 * self.edge_length {
            return Err(Error::Config(format!(
                "window outer radius {} exceeds the box half-edge {}",
                w.outer_radius,
                0.5 * self.edge_length
            )));
        }
        if (self.probe_center - box_center).norm() + self.probe_radius >= w.inner_radius {
            return Err(Error::Config("probe region reaches the window taper".into()));
        }
        let inside = surface.contains(&self.probe_center);
        if inside != (side == Side::Interior) {
            return Err(Error::Config(format!("probe center is not in the {} domain", side.name())));
        }
        if surface.distance(&self.probe_center) <= self.probe_radius {
            return Err(Error::Config("probe region touches the surface".into()));
        }
        Ok(())
    }
}

/// How the residual was normalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// By the norm of the mollified source on the probe.
    Source,
    /// By `||u||_probe / R^alpha` when the source vanishes on the probe.
    SymbolScale,
    /// Field and source both vanish.
    Zero,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub relative_l2_residual: f64,
    pub residual_l2: f64,
    pub reference_l2: f64,
    pub normalization: Normalization,
    pub probe_nodes: usize,
    pub sampled_nodes: usize,
    pub n: usize,
    pub spacing: f64,
    /// `(point, lhs, rhs)` on the probe nodes, in grid order.
    pub probe_values: Vec<(Point3, f64, f64)>,
}

impl ResidualReport {
    /// Columns `x,y,z,lhs,rhs,residual`.
    pub fn probe_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["x", "y", "z", "lhs", "rhs", "residual"]);
        for (p, l, r) in &self.probe_values {
            t.push_numbers(&[p.x, p.y, p.z, *l, *r, l - r]);
        }
        t
    }

    /// Columns `n,spacing,probe_nodes,residual_l2,reference_l2,relative_l2_residual,normalization`.
    pub fn summary_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&[
            "n",
            "spacing",
            "probe_nodes",
            "residual_l2",
            "reference_l2",
            "relative_l2_residual",
            "normalization",
        ]);
        t.push(vec![
            self.n.to_string(),
            num(self.spacing),
            self.probe_nodes.to_string(),
            num(self.residual_l2),
            num(self.reference_l2),
            num(self.relative_l2_residual),
            format!("{:?}", self.normalization).to_lowercase(),
        ]);
        t
    }
}

/// Sample `u`, window it, apply the mollified symbol and compare with the
/// mollified zero-extended source on the probe ball.
pub fn pde_residual_check(solution: &SolutionField, config: &ResidualConfig) -> Result<ResidualReport> {
    let surface = solution.surface.as_ref();
    config.validate(surface, solution.side)?;
    let alpha = solution.alpha.value();
    let mut grid = BoxGrid::centered(config.window.center, config.edge_length, config.n)?;
    let n = grid.n;
    let h = grid.spacing();

    // Windowed field.
    let active: Vec<usize> = (0..grid.samples.len())
        .filter(|&i| config.window.weight(&grid.node_of(i)) > 0.0)
        .collect();
    let points: Vec<Point3> = active.iter().map(|&i| grid.node_of(i)).collect();
    let values = sample_field(solution, &points, h)?;
    for ((&i, p), v) in active.iter().zip(&points).zip(&values) {
        grid.samples[i] = config.window.weight(p) * v;
    }

    // Zero-extended source.
    let mut source = grid.clone();
    source.samples.iter_mut().for_each(|s| *s = 0.0);
    if !solution.source.is_zero() {
        let cc = ColumnClassifier::new(
            surface,
            (grid.origin.y, h, n),
            (grid.origin.z, h, n),
        );
        let side = solution.side;
        let src = &solution.source;
        let support = src.support_box().copied();
        let origin = grid.origin;
        source.samples.par_chunks_mut(n * n).enumerate().for_each(|(i, slab)| {
            let x = origin.x + i as f64 * h;
            for (jk, s) in slab.iter_mut().enumerate() {
                let (j, k) = (jk / n, jk % n);
                let inside = cc.inside(j, k, x);
                let p = Point3::new(x, origin.y + j as f64 * h, origin.z + k as f64 * h);
                let keep = match side {
                    Side::Interior => inside,
                    Side::Exterior => !inside && support.is_none_or(|b| b.contains(&p)),
                };
                if keep {
                    *s = src.eval(&p);
                }
            }
        });
    }

    let sigma = config.mollifier * h;
    let gauss = move |k: f64| (-0.5 * sigma * sigma * k * k).exp();
    let lhs = apply_radial_symbol(&grid, |k| if k == 0.0 { 0.0 } else { k.powf(alpha) * gauss(k) })?;
    let rhs = apply_radial_symbol(&source, |k| if k == 0.0 { 0.0 } else { gauss(k) })?;

    let mut probe_values = Vec::new();
    let mut u_probe = 0.0;
    for idx in 0..grid.samples.len() {
        let p = grid.node_of(idx);
        if (p - config.probe_center).norm() <= config.probe_radius {
            probe_values.push((p, lhs.samples[idx], rhs.samples[idx]));
            u_probe += grid.samples[idx].powi(2);
        }
    }
    let residual_l2 = probe_values.iter().map(|(_, l, r)| (l - r).powi(2)).sum::<f64>().sqrt();
    let source_l2 = probe_values.iter().map(|(_, _, r)| r * r).sum::<f64>().sqrt();
    let scale_l2 = u_probe.sqrt() / surface.radius().powf(alpha);
    let (normalization, reference_l2) = if source_l2 > 1e-12 * scale_l2.max(f64::MIN_POSITIVE) {
        (Normalization::Source, source_l2)
    } else if scale_l2 > 0.0 {
        (Normalization::SymbolScale, scale_l2)
    } else {
        (Normalization::Zero, 0.0)
    };
    let relative_l2_residual = if reference_l2 > 0.0 {
        residual_l2 / reference_l2
    } else {
        residual_l2
    };
    Ok(ResidualReport {
        relative_l2_residual,
        residual_l2,
        reference_l2,
        normalization,
        probe_nodes: probe_values.len(),
        sampled_nodes: points.len(),
        n,
        spacing: h,
        probe_values,
    })
}

// Grid nodes can land exactly on a mesh vertex or edge; those few are moved
// off the surface by a tiny fraction of the spacing.
fn sample_field(solution: &SolutionField, points: &[Point3], h: f64) -> Result<Vec<f64>> {
    match solution.evaluate(points) {
        Ok(v) => Ok(v),
        Err(Error::PointOnSurface { .. }) => points
            .par_iter()
            .map(|p| match solution.eval(p) {
                Err(Error::PointOnSurface { .. }) => {
                    solution.eval(&(p + Point3::new(1.0, 2f64.sqrt(), 3f64.sqrt()) * 1e-6 * h))
                }
                other => other,
            })
            .collect(),
        Err(e) => Err(e),
    }
}
