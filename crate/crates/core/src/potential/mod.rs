//! Volume and single-layer Riesz potentials and their traces on the surface.

mod volume;

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::boundary::{BoundaryDensity, DiscreteBoundaryOperator};
use crate::error::{Error, Result};
use crate::kernel::{FractionalOrder, RieszKernel3};
use crate::surface::{panel_kernel_integral, TriangulatedSurface};
use crate::Point3;

pub use volume::{VolumeCell, VolumePotential, VolumeQuadrature, DEFAULT_RESOLUTION};

/// Which component of the complement of the surface a problem lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Interior,
    Exterior,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Interior => "interior",
            Side::Exterior => "exterior",
        }
    }
}

/// Axis-aligned box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub fn new(min: Point3, max: Point3) -> Result<Self> {
        let ok = (0..3).all(|i| min[i].is_finite() && max[i].is_finite() && min[i] < max[i]);
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "box corners {:?} and {:?} do not span a non-empty finite box",
                min.as_slice(),
                max.as_slice()
            )));
        }
        Ok(Self { min, max })
    }

    pub fn cube(center: Point3, half: f64) -> Result<Self> {
        let h = Point3::repeat(half);
        Self::new(center - h, center + h)
    }

    pub fn extent(&self) -> Point3 {
        self.max - self.min
    }

    pub fn center(&self) -> Point3 {
        0.5 * (self.min + self.max)
    }

    pub fn volume(&self) -> f64 {
        self.extent().product()
    }

    pub fn contains(&self, x: &Point3) -> bool {
        (0..3).all(|i| x[i] >= self.min[i] && x[i] <= self.max[i])
    }

    pub fn intersects(&self, other: &Aabb) -> bool {
        (0..3).all(|i| self.min[i] <= other.max[i] && other.min[i] <= self.max[i])
    }

    /// Distance from `x` to the box (zero inside).
    pub fn distance(&self, x: &Point3) -> f64 {
        let d = Point3::from_fn(|i, _| (self.min[i] - x[i]).max(0.0).max(x[i] - self.max[i]));
        d.norm()
    }
}

pub type SourceFn = Arc<dyn Fn(&Point3) -> f64 + Send + Sync>;

/// Right-hand side `f` of the fractional equation, zero-extended off its
/// domain component.
#[derive(Clone)]
pub struct VolumeSource {
    side: Side,
    evaluator: SourceFn,
    support_box: Option<Aabb>,
    zero: bool,
}

impl fmt::Debug for VolumeSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VolumeSource")
            .field("side", &self.side)
            .field("support_box", &self.support_box)
            .field("zero", &self.zero)
            .finish_non_exhaustive()
    }
}

impl VolumeSource {
    /// Source on the bounded component; only queried inside the surface.
    pub fn interior(f: impl Fn(&Point3) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            side: Side::Interior,
            evaluator: Arc::new(f),
            support_box: None,
            zero: false,
        }
    }

    /// Source on the unbounded component with compact support in `support_box`.
    /// The evaluator must vanish outside the box.
    pub fn exterior(f: impl Fn(&Point3) -> f64 + Send + Sync + 'static, support_box: Aabb) -> Self {
        Self {
            side: Side::Exterior,
            evaluator: Arc::new(f),
            support_box: Some(support_box),
            zero: false,
        }
    }

    pub fn zero(side: Side) -> Self {
        Self {
            side,
            evaluator: Arc::new(|_| 0.0),
            support_box: None,
            zero: true,
        }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn support_box(&self) -> Option<&Aabb> {
        self.support_box.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn eval(&self, x: &Point3) -> f64 {
        (self.evaluator)(x)
    }

    /// Pointwise sum with another source on the same side.
    pub fn plus(&self, other: &VolumeSource) -> Result<VolumeSource> {
        if self.side != other.side {
            return Err(Error::InvalidArgument(
                "cannot add sources on different sides".into(),
            ));
        }
        if self.zero {
            return Ok(other.clone());
        }
        if other.zero {
            return Ok(self.clone());
        }
        let support_box = match (self.support_box, other.support_box) {
            (Some(a), Some(b)) => Some(Aabb {
                min: a.min.inf(&b.min),
                max: a.max.sup(&b.max),
            }),
            _ => None,
        };
        let (f, g) = (self.evaluator.clone(), other.evaluator.clone());
        Ok(VolumeSource {
            side: self.side,
            evaluator: Arc::new(move |x| f(x) + g(x)),
            support_box,
            zero: false,
        })
    }

    /// `s * f`.
    pub fn scaled(&self, s: f64) -> VolumeSource {
        let f = self.evaluator.clone();
        VolumeSource {
            side: self.side,
            evaluator: Arc::new(move |x| s * f(x)),
            support_box: self.support_box,
            zero: self.zero || s == 0.0,
        }
    }
}

/// Estimates of `||f||_inf` and `||f||_1` from the quadrature samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SourceBounds {
    pub sup_norm: f64,
    pub l1_norm: f64,
}

/// `u_{alpha,f}(x)` with a freshly built quadrature at the default resolution.
/// Build a [`VolumePotential`] once when evaluating at many points.
pub fn volume_potential(
    f: &VolumeSource,
    surface: &TriangulatedSurface,
    alpha: FractionalOrder,
    x: &Point3,
) -> Result<f64> {
    let quad = VolumeQuadrature::new(surface, f, DEFAULT_RESOLUTION)?;
    Ok(VolumePotential::new(f, &quad, alpha)?.eval(x))
}

/// Single-layer potential `v_{alpha,g}` of a piecewise-constant density.
#[derive(Clone, Debug)]
pub struct SingleLayerPotential {
    surface: Arc<TriangulatedSurface>,
    kernel: RieszKernel3,
    density: Vec<f64>,
}

/// Points within this many panel diameters are checked for lying on the panel.
const ON_SURFACE_CHECK: f64 = 2.0;
const ON_SURFACE_TOL: f64 = 1e-12;

impl SingleLayerPotential {
    pub fn new(
        surface: Arc<TriangulatedSurface>,
        alpha: FractionalOrder,
        density: &BoundaryDensity,
    ) -> Result<Self> {
        if density.len() != surface.len() {
            return Err(Error::DimensionMismatch {
                expected: surface.len(),
                actual: density.len(),
            });
        }
        Ok(Self {
            kernel: RieszKernel3::new(alpha)?,
            surface,
            density: density.values.clone(),
        })
    }

    /// `v(x)` for `x` off the surface.
    pub fn eval(&self, x: &Point3) -> Result<f64> {
        let mut sum = 0.0;
        for (p, g) in self.surface.panels().iter().zip(&self.density) {
            let reach = ON_SURFACE_CHECK * p.diameter;
            if (x - p.centroid).norm_squared() < reach * reach
                && crate::surface::point_triangle_distance(x, p) <= ON_SURFACE_TOL * p.diameter
            {
                return Err(Error::PointOnSurface {
                    point: [x.x, x.y, x.z],
                });
            }
            if *g != 0.0 {
                sum += g * panel_kernel_integral(p, x, &self.kernel);
            }
        }
        Ok(self.kernel.constant() * sum)
    }

    pub fn eval_many(&self, points: &[Point3]) -> Result<Vec<f64>> {
        points.par_iter().map(|x| self.eval(x)).collect()
    }
}

/// `v_{alpha,g}(x)` for a single point off the surface.
pub fn single_layer_potential(
    surface: &Arc<TriangulatedSurface>,
    g: &BoundaryDensity,
    alpha: FractionalOrder,
    x: &Point3,
) -> Result<f64> {
    SingleLayerPotential::new(surface.clone(), alpha, g)?.eval(x)
}

/// Trace `phi_{alpha,f}` of the volume potential at the collocation points.
pub fn trace_volume_potential(
    f: &VolumeSource,
    surface: &TriangulatedSurface,
    alpha: FractionalOrder,
    resolution: usize,
) -> Result<BoundaryDensity> {
    if f.is_zero() {
        return Ok(BoundaryDensity::zeros(surface.len()));
    }
    let quad = VolumeQuadrature::new(surface, f, resolution)?;
    let pot = VolumePotential::new(f, &quad, alpha)?;
    Ok(BoundaryDensity::new(pot.eval_many(&surface.collocation_points())))
}

/// Trace `psi_{alpha,g}` of the single-layer potential: the boundary operator
/// applied to `g`.
pub fn trace_single_layer(op: &DiscreteBoundaryOperator, g: &BoundaryDensity) -> Result<BoundaryDensity> {
    op.apply(g)
}
