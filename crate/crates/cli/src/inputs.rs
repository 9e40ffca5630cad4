//! Builds surfaces, sources and boundary data from a [`RunConfig`].

use std::path::Path;
use std::sync::Arc;

use riesz_core::one_dim::CompactSource;
use riesz_core::{Aabb, BoundaryDensity, Cutoff, DiscreteBoundaryOperator, Point3, Side, TriangulatedSurface, VolumeSource};

use crate::config::{BoundaryKind, CutoffKind, RunConfig, SideName, SourceKind};
use crate::error::CliError;

/// Gaussian sources are cut off at this many widths.
const GAUSSIAN_CUT: f64 = 4.0;

pub fn side(cfg: &RunConfig) -> Side {
    match cfg.side {
        SideName::Interior => Side::Interior,
        SideName::Exterior => Side::Exterior,
    }
}

pub fn surface(cfg: &RunConfig) -> Result<Arc<TriangulatedSurface>, CliError> {
    let s = if cfg.mesh == "sphere" {
        TriangulatedSurface::sphere(cfg.radius, cfg.level)?
    } else {
        TriangulatedSurface::load_off(&cfg.mesh)?
    };
    Ok(Arc::new(s))
}

pub fn cutoff(cfg: &RunConfig) -> Cutoff {
    match cfg.cutoff {
        CutoffKind::Full => Cutoff::Full,
        CutoffKind::Fraction => Cutoff::Fraction(cfg.cutoff_value),
        CutoffKind::Floor => Cutoff::EigenvalueFloor(cfg.cutoff_value),
        CutoffKind::Modes => Cutoff::Modes(cfg.cutoff_value as usize),
    }
}

pub fn volume_source(cfg: &RunConfig) -> Result<VolumeSource, CliError> {
    let side = side(cfg);
    let c = Point3::from(cfg.source_center);
    let v = cfg.source_value;
    let r = cfg.source_radius;
    let compact = |f: Box<dyn Fn(&Point3) -> f64 + Send + Sync>, half: f64| -> Result<VolumeSource, CliError> {
        Ok(match side {
            Side::Interior => VolumeSource::interior(f),
            Side::Exterior => VolumeSource::exterior(f, Aabb::cube(c, half)?),
        })
    };
    match cfg.source {
        SourceKind::None => Ok(VolumeSource::zero(side)),
        SourceKind::Constant => compact(Box::new(move |x| if (x - c).norm() <= r { v } else { 0.0 }), r),
        SourceKind::Gaussian => compact(
            Box::new(move |x| {
                let d2 = (x - c).norm_squared();
                if d2 <= (GAUSSIAN_CUT * r).powi(2) {
                    v * (-0.5 * d2 / (r * r)).exp()
                } else {
                    0.0
                }
            }),
            GAUSSIAN_CUT * r,
        ),
        SourceKind::Voxel => {
            let grid = VoxelGrid::load(Path::new(&cfg.source_file))?;
            let bounds = grid.bounds;
            let f = move |x: &Point3| grid.eval(x);
            Ok(match side {
                Side::Interior => VolumeSource::interior(f),
                Side::Exterior => VolumeSource::exterior(f, bounds),
            })
        }
    }
}

pub fn source_1d(cfg: &RunConfig) -> Result<CompactSource, CliError> {
    let support = (cfg.source_support[0], cfg.source_support[1]);
    let v = cfg.source_value;
    let c = cfg.source_center[0];
    let w = cfg.source_radius;
    Ok(match cfg.source {
        SourceKind::None => CompactSource::zero(),
        SourceKind::Constant => CompactSource::constant(v, support)?,
        SourceKind::Gaussian => CompactSource::new(move |y| v * (-0.5 * ((y - c) / w).powi(2)).exp(), support)?,
        SourceKind::Voxel => return Err(CliError::Validation("voxel sources are three-dimensional".into())),
    })
}

pub fn boundary_data(
    cfg: &RunConfig,
    surface: &TriangulatedSurface,
    op: &DiscreteBoundaryOperator,
) -> Result<BoundaryDensity, CliError> {
    let n = surface.len();
    match cfg.boundary {
        BoundaryKind::Constant => Ok(BoundaryDensity::constant(n, cfg.boundary_value)),
        BoundaryKind::Mode => {
            if cfg.boundary_mode >= n {
                return Err(CliError::Validation(format!(
                    "boundary_mode = {} but the surface has {n} panels",
                    cfg.boundary_mode
                )));
            }
            Ok(op.spectrum()?.mode(cfg.boundary_mode).scaled(cfg.boundary_value))
        }
        BoundaryKind::File => {
            let path = Path::new(&cfg.boundary_file);
            let values = read_numbers(path)?;
            if values.len() != n {
                return Err(CliError::Validation(format!(
                    "{} holds {} values but the surface has {n} panels",
                    path.display(),
                    values.len()
                )));
            }
            Ok(BoundaryDensity::new(values))
        }
    }
}

/// Whitespace-separated numbers; `#` starts a comment.
fn read_numbers(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| {
                CliError::Validation(format!("{}:{}: not a number: {tok}", path.display(), i + 1))
            })?;
            if !v.is_finite() {
                return Err(CliError::Validation(format!("{}:{}: non-finite value", path.display(), i + 1)));
            }
            out.push(v);
        }
    }
    Ok(out)
}

/// Piecewise-constant source on a box. File layout: `nx ny nz`, then
/// `xmin ymin zmin xmax ymax zmax`, then `nx * ny * nz` values with `z`
/// fastest.
#[derive(Clone, Debug)]
pub struct VoxelGrid {
    pub dims: [usize; 3],
    pub bounds: Aabb,
    pub values: Vec<f64>,
}

impl VoxelGrid {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let nums = read_numbers(path)?;
        let bad = |m: &str| CliError::Validation(format!("{}: {m}", path.display()));
        if nums.len() < 9 {
            return Err(bad("voxel header needs 3 counts and 6 bounds"));
        }
        let mut dims = [0usize; 3];
        for (d, v) in dims.iter_mut().zip(&nums[..3]) {
            if *v < 1.0 || v.fract() != 0.0 {
                return Err(bad("voxel counts must be positive integers"));
            }
            *d = *v as usize;
        }
        let bounds = Aabb::new(
            Point3::new(nums[3], nums[4], nums[5]),
            Point3::new(nums[6], nums[7], nums[8]),
        )
        .map_err(|e| bad(&e.to_string()))?;
        let values = nums[9..].to_vec();
        if values.len() != dims.iter().product::<usize>() {
            return Err(bad(&format!(
                "expected {} voxel values, found {}",
                dims.iter().product::<usize>(),
                values.len()
            )));
        }
        Ok(Self { dims, bounds, values })
    }

    pub fn eval(&self, x: &Point3) -> f64 {
        if !self.bounds.contains(x) {
            return 0.0;
        }
        let e = self.bounds.extent();
        let mut idx = [0usize; 3];
        for a in 0..3 {
            let t = (x[a] - self.bounds.min[a]) / e[a];
            idx[a] = ((t * self.dims[a] as f64) as usize).min(self.dims[a] - 1);
        }
        self.values[(idx[0] * self.dims[1] + idx[1]) * self.dims[2] + idx[2]]
    }
}
