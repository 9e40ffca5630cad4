//! Cartesian cell quadrature for the volume potential.

use std::ops::Range;

use rayon::prelude::*;

use super::{Aabb, Side, SourceBounds, VolumeSource};
use crate::error::{Error, Result};
use crate::kernel::{FractionalOrder, RieszKernel3};
use crate::polar::cube_kernel_integral;
use crate::surface::{ColumnClassifier, TriangulatedSurface};
use crate::Point3;
use nalgebra::Matrix3;

/// Cells along the longest edge of the integration box.
pub const DEFAULT_RESOLUTION: usize = 16;
/// Subcells per cell edge used to resolve cells cut by the surface.
const SUBDIVISION: usize = 4;
/// Cubes closer than this many edges are integrated exactly.
const NEAR_EDGES: f64 = 2.0;

/// One Cartesian cell. `volume` is the part inside the integration region;
/// cut cells list the centers of their inside subcells.
#[derive(Clone, Debug)]
pub struct VolumeCell {
    pub center: Point3,
    pub volume: f64,
    pub inside: bool,
    pub subcells: Vec<Point3>,
}

/// Uniform cell decomposition of the integration region: the inside of the
/// surface for interior sources, the support box minus the inside for
/// exterior ones.
#[derive(Clone, Debug)]
pub struct VolumeQuadrature {
    pub cells: Vec<VolumeCell>,
    pub resolution: usize,
    pub cell_edge: f64,
    pub subcell_edge: f64,
}

impl VolumeQuadrature {
    pub fn new(surface: &TriangulatedSurface, source: &VolumeSource, resolution: usize) -> Result<Self> {
        let region = match source.side() {
            Side::Interior => {
                let (lo, hi) = surface.bounding_box();
                Aabb::new(lo, hi)?
            }
            Side::Exterior => *source.support_box().ok_or_else(|| {
                Error::InvalidArgument("exterior sources need a support box".into())
            })?,
        };
        Self::over_box(surface, source.side(), &region, resolution)
    }

    /// Cells of edge `max_extent / resolution` covering `region`.
    pub fn over_box(surface: &TriangulatedSurface, side: Side, region: &Aabb, resolution: usize) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::InvalidArgument("volume resolution must be positive".into()));
        }
        let extent = region.extent();
        let h = extent.max() / resolution as f64;
        let counts: [usize; 3] = std::array::from_fn(|i| ((extent[i] / h - 1e-9).ceil() as usize).max(1));
        let m = SUBDIVISION;
        let e = h / m as f64;
        let o = region.min;
        let (slo, shi) = surface.bounding_box();
        let touches = Aabb::new(slo, shi)?.intersects(region);
        let classifier = touches.then(|| {
            ColumnClassifier::new(
                surface,
                (o.y + 0.5 * e, e, counts[1] * m),
                (o.z + 0.5 * e, e, counts[2] * m),
            )
        });
        let in_region = |j: usize, k: usize, x: f64| -> bool {
            let inside = classifier.as_ref().is_some_and(|c| c.inside(j, k, x));
            match side {
                Side::Interior => inside,
                Side::Exterior => !inside,
            }
        };
        let mut cells = Vec::with_capacity(counts.iter().product());
        for i in 0..counts[0] {
            for j in 0..counts[1] {
                for k in 0..counts[2] {
                    let center = o + Point3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5) * h;
                    let mut subcells = Vec::new();
                    for a in 0..m {
                        let x = o.x + (i * m + a) as f64 * e + 0.5 * e;
                        for b in 0..m {
                            for c in 0..m {
                                let (jj, kk) = (j * m + b, k * m + c);
                                if in_region(jj, kk, x) {
                                    subcells.push(Point3::new(
                                        x,
                                        o.y + (jj as f64 + 0.5) * e,
                                        o.z + (kk as f64 + 0.5) * e,
                                    ));
                                }
                            }
                        }
                    }
                    let count = subcells.len();
                    if count == m * m * m {
                        subcells.clear();
                    }
                    cells.push(VolumeCell {
                        center,
                        volume: count as f64 * e * e * e,
                        inside: count > 0,
                        subcells,
                    });
                }
            }
        }
        Ok(Self {
            cells,
            resolution,
            cell_edge: h,
            subcell_edge: e,
        })
    }

    /// Total volume of the integration region.
    pub fn volume(&self) -> f64 {
        self.cells.iter().map(|c| c.volume).sum()
    }
}

#[derive(Clone, Copy, Debug)]
struct Cube {
    center: Point3,
    edge: f64,
    value: f64,
}

/// A cell with its source moments about the volume centroid.
#[derive(Clone, Debug)]
struct Block {
    center: Point3,
    centroid: Point3,
    mass: f64,
    dipole: Point3,
    second: Matrix3<f64>,
    cubes: Range<usize>,
}

/// Volume potential `u_{alpha,f}` with the source sampled once on a
/// [`VolumeQuadrature`], piecewise constant per cube.
#[derive(Clone, Debug)]
pub struct VolumePotential {
    kernel: RieszKernel3,
    blocks: Vec<Block>,
    cubes: Vec<Cube>,
    cell_edge: f64,
    bounds: SourceBounds,
}

impl VolumePotential {
    pub fn new(source: &VolumeSource, quad: &VolumeQuadrature, alpha: FractionalOrder) -> Result<Self> {
        let kernel = RieszKernel3::new(alpha)?;
        let mut blocks = Vec::new();
        let mut cubes = Vec::new();
        let mut bounds = SourceBounds {
            sup_norm: 0.0,
            l1_norm: 0.0,
        };
        if !source.is_zero() {
            let sample = |x: &Point3| -> Result<f64> {
                let v = source.eval(x);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NonFiniteSource {
                        point: [x.x, x.y, x.z],
                        value: v,
                    })
                }
            };
            for cell in quad.cells.iter().filter(|c| c.inside) {
                let start = cubes.len();
                if cell.subcells.is_empty() {
                    let v = sample(&cell.center)?;
                    if v != 0.0 {
                        cubes.push(Cube {
                            center: cell.center,
                            edge: quad.cell_edge,
                            value: v,
                        });
                    }
                } else {
                    for c in &cell.subcells {
                        let v = sample(c)?;
                        if v != 0.0 {
                            cubes.push(Cube {
                                center: *c,
                                edge: quad.subcell_edge,
                                value: v,
                            });
                        }
                    }
                }
                if cubes.len() == start {
                    continue;
                }
                let mut volume = 0.0;
                let mut moment = Point3::zeros();
                for c in &cubes[start..] {
                    let v = c.edge.powi(3);
                    volume += v;
                    moment += c.center * v;
                }
                let centroid = moment / volume;
                let mut mass = 0.0;
                let mut dipole = Point3::zeros();
                let mut second = Matrix3::zeros();
                for c in &cubes[start..] {
                    let v = c.edge.powi(3);
                    let q = c.value * v;
                    let d = c.center - centroid;
                    mass += q;
                    dipole += d * q;
                    second += (d * d.transpose() + Matrix3::identity() * (c.edge * c.edge / 12.0)) * q;
                    bounds.sup_norm = bounds.sup_norm.max(c.value.abs());
                    bounds.l1_norm += c.value.abs() * v;
                }
                blocks.push(Block {
                    center: cell.center,
                    centroid,
                    mass,
                    dipole,
                    second,
                    cubes: start..cubes.len(),
                });
            }
        }
        Ok(Self {
            kernel,
            blocks,
            cubes,
            cell_edge: quad.cell_edge,
            bounds,
        })
    }

    pub fn bounds(&self) -> SourceBounds {
        self.bounds
    }

    /// Sum of `f v` over the cubes.
    pub fn total_mass(&self) -> f64 {
        self.blocks.iter().map(|b| b.mass).sum()
    }

    /// `u(x)`. Distant cells use their source moments up to second order;
    /// cubes within two edges of `x` are integrated exactly.
    pub fn eval(&self, x: &Point3) -> f64 {
        let alpha = self.kernel.alpha().value();
        let beta = alpha - 3.0;
        let far2 = (NEAR_EDGES * self.cell_edge).powi(2);
        let mut sum = 0.0;
        for b in &self.blocks {
            if (x - b.center).norm_squared() > far2 {
                // Taylor expansion of |x - y|^beta about the centroid.
                let r = x - b.centroid;
                let r2 = r.norm_squared();
                let k = self.kernel.profile_sq(r2);
                let k2 = k / r2;
                let radial = r.dot(&(b.second * r)) / r2;
                sum += b.mass * k - beta * k2 * b.dipole.dot(&r)
                    + 0.5 * beta * k2 * (b.second.trace() + (beta - 2.0) * radial);
                continue;
            }
            for c in &self.cubes[b.cubes.clone()] {
                let d2 = (x - c.center).norm_squared();
                if d2 > (NEAR_EDGES * c.edge).powi(2) {
                    let k = self.kernel.profile_sq(d2);
                    let e2 = c.edge * c.edge;
                    sum += c.value * e2 * c.edge * k * (1.0 + e2 / 24.0 * beta * (beta + 1.0) / d2);
                } else {
                    sum += c.value * cube_kernel_integral(&c.center, c.edge, x, alpha);
                }
            }
        }
        self.kernel.constant() * sum
    }

    pub fn eval_many(&self, points: &[Point3]) -> Vec<f64> {
        points.par_iter().map(|x| self.eval(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ball() -> TriangulatedSurface {
        TriangulatedSurface::sphere(1.0, 4).unwrap()
    }

    fn order(a: f64) -> FractionalOrder {
        FractionalOrder::three_d(a).unwrap()
    }

    #[test]
    fn inside_volume_converges_to_polyhedron_volume() {
        let s = ball();
        let exact = s.signed_volume();
        let src = VolumeSource::interior(|_| 1.0);
        let mut prev = f64::INFINITY;
        for res in [8, 16, 32] {
            let q = VolumeQuadrature::new(&s, &src, res).unwrap();
            let err = (q.volume() - exact).abs() / exact;
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 2e-3, "{prev}");
        assert!((exact - 4.0 * PI / 3.0).abs() < 0.01);
    }

    #[test]
    fn ball_potential_at_center() {
        let s = ball();
        let src = VolumeSource::interior(|_| 1.0);
        let q = VolumeQuadrature::new(&s, &src, 16).unwrap();
        for (a, want) in [(2.0, 0.5), (1.5, 0.531923040535)] {
            let pot = VolumePotential::new(&src, &q, order(a)).unwrap();
            let got = pot.eval(&Point3::zeros());
            assert!((got - want).abs() < 5e-3 * want, "{a}: {got}");
        }
    }

    #[test]
    fn newtonian_ball_profile() {
        // (3 R^2 - r^2) / 6 inside, R^3 / (3 r) outside.
        let s = ball();
        let src = VolumeSource::interior(|_| 1.0);
        let q = VolumeQuadrature::new(&s, &src, 16).unwrap();
        let pot = VolumePotential::new(&src, &q, order(2.0)).unwrap();
        for r in [0.0, 0.3, 0.7, 1.0, 1.5, 3.0] {
            let x = Point3::new(r * 0.6, -r * 0.48, r * 0.64);
            let want = if r <= 1.0 {
                (3.0 - r * r) / 6.0
            } else {
                1.0 / (3.0 * r)
            };
            let got = pot.eval(&x);
            assert!((got - want).abs() < 0.01 * want, "r {r}: {got} vs {want}");
        }
    }

    #[test]
    fn refinement_reduces_error() {
        // A fine mesh keeps the polyhedral volume deficit below the cell error.
        let s = TriangulatedSurface::sphere(1.0, 5).unwrap();
        let src = VolumeSource::interior(|_| 1.0);
        let want = pot_exact_ball(1.5, 0.0);
        let errs: Vec<f64> = [8, 16, 32]
            .iter()
            .map(|&res| {
                let q = VolumeQuadrature::new(&s, &src, res).unwrap();
                let pot = VolumePotential::new(&src, &q, order(1.5)).unwrap();
                (pot.eval(&Point3::zeros()) - want).abs()
            })
            .collect();
        assert!(errs[1] < 0.5 * errs[0] && errs[2] < 0.5 * errs[1], "{errs:?}");
    }

    // Radially symmetric ball potential of f = 1 by 1D quadrature of the
    // shell-averaged kernel (independent of the cell code).
    fn pot_exact_ball(a: f64, r: f64) -> f64 {
        let k = RieszKernel3::new(order(a)).unwrap();
        // Shell average of |x - y|^(a-3) over |y| = s: ((r+s)^(a-1) - |r-s|^(a-1)) / (2 r s (a-1)).
        if r == 0.0 {
            return k.constant() * 4.0 * PI / a;
        }
        let shell = |s: f64| {
            if s == 0.0 {
                return r.powf(a - 3.0);
            }
            ((r + s).powf(a - 1.0) - (r - s).abs().powf(a - 1.0)) / (2.0 * r * s * (a - 1.0))
        };
        let integral = crate::quadrature::integrate_adaptive(
            |s| 4.0 * PI * s * s * shell(s),
            0.0,
            1.0,
            1e-12,
            1e-12,
        );
        k.constant() * integral.value
    }

    #[test]
    fn shell_oracle_matches_closed_forms() {
        assert!((pot_exact_ball(2.0, 0.5) - (3.0 - 0.25) / 6.0).abs() < 1e-9);
        assert!((pot_exact_ball(1.5, 0.0) - 0.531923040535).abs() < 1e-9);
    }

    #[test]
    fn exterior_point_mass_limit() {
        let s = TriangulatedSurface::sphere(1.0, 2).unwrap();
        let c = Point3::new(4.0, 0.0, 0.0);
        let half = 0.05;
        let boxed = Aabb::cube(c, half).unwrap();
        let src = VolumeSource::exterior(move |x| if boxed.contains(x) { 1.0 } else { 0.0 }, boxed);
        let q = VolumeQuadrature::new(&s, &src, 4).unwrap();
        let pot = VolumePotential::new(&src, &q, order(1.5)).unwrap();
        let mass = (2.0 * half).powi(3);
        assert!((pot.total_mass() - mass).abs() < 1e-15);
        let k = RieszKernel3::new(order(1.5)).unwrap();
        for x in [Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0)] {
            let want = k.constant() * mass * (x - c).norm().powf(-1.5);
            assert!((pot.eval(&x) - want).abs() < 1e-3 * want);
        }
    }

    #[test]
    fn non_finite_source_is_reported() {
        let s = TriangulatedSurface::sphere(1.0, 1).unwrap();
        let src = VolumeSource::interior(|x| 1.0 / x.norm() - f64::INFINITY * (x.norm() < 0.3) as u8 as f64);
        let q = VolumeQuadrature::new(&s, &src, 8).unwrap();
        assert!(matches!(
            VolumePotential::new(&src, &q, order(1.5)),
            Err(Error::NonFiniteSource { .. })
        ));
    }

    #[test]
    fn zero_source() {
        let s = TriangulatedSurface::sphere(1.0, 1).unwrap();
        let src = VolumeSource::zero(Side::Interior);
        let q = VolumeQuadrature::new(&s, &src, 4).unwrap();
        let pot = VolumePotential::new(&src, &q, order(1.5)).unwrap();
        assert_eq!(pot.eval(&Point3::zeros()), 0.0);
    }
}
