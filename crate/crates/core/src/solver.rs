//! Dirichlet problem for the fractional Laplacian via the boundary operator:
//! `u = v[g*] + u_f` with `g* = B^-1 (phi - phi_f)`.

use std::sync::Arc;

use crate::boundary::{assemble, BoundaryDensity, Cutoff, DiscreteBoundaryOperator};
use crate::error::{Error, Result};
use crate::kernel::FractionalOrder;
use crate::potential::{
    Side, SingleLayerPotential, VolumePotential, VolumeQuadrature, VolumeSource, DEFAULT_RESOLUTION,
};
use crate::surface::TriangulatedSurface;
use crate::Point3;

/// Density norms above this multiple of the data norm are flagged.
const ILL_CONDITIONED_RATIO: f64 = 1e6;

#[derive(Clone, Debug)]
pub struct DirichletProblem {
    pub alpha: FractionalOrder,
    pub surface: Arc<TriangulatedSurface>,
    pub side: Side,
    pub source: VolumeSource,
    /// `phi` at the collocation points.
    pub boundary_data: BoundaryDensity,
    /// Cells along the longest edge of the source region.
    pub volume_resolution: usize,
}

impl DirichletProblem {
    pub fn new(
        alpha: FractionalOrder,
        surface: Arc<TriangulatedSurface>,
        side: Side,
        source: VolumeSource,
        boundary_data: BoundaryDensity,
    ) -> Result<Self> {
        if source.side() != side {
            return Err(Error::InvalidArgument(format!(
                "{} problem given an {} source",
                side.name(),
                source.side().name()
            )));
        }
        if boundary_data.len() != surface.len() {
            return Err(Error::DimensionMismatch {
                expected: surface.len(),
                actual: boundary_data.len(),
            });
        }
        if !boundary_data.is_finite() {
            return Err(Error::InvalidArgument("boundary data has non-finite entries".into()));
        }
        Ok(Self {
            alpha,
            surface,
            side,
            source,
            boundary_data,
            volume_resolution: DEFAULT_RESOLUTION,
        })
    }

    pub fn with_volume_resolution(mut self, resolution: usize) -> Self {
        self.volume_resolution = resolution;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveMetadata {
    pub cutoff: Cutoff,
    pub retained_modes: usize,
    /// `||B g* + phi_f - phi||` in the discrete `L2(Gamma)` norm.
    pub boundary_residual: f64,
    pub ill_conditioned: bool,
}

/// Solution `u = v[g*] + u_f`, evaluable off the surface.
#[derive(Clone, Debug)]
pub struct SolutionField {
    pub density: BoundaryDensity,
    pub source: VolumeSource,
    pub alpha: FractionalOrder,
    pub surface: Arc<TriangulatedSurface>,
    pub side: Side,
    /// `phi_f`, the trace of the volume potential.
    pub source_trace: BoundaryDensity,
    /// The prescribed `phi`.
    pub boundary_data: BoundaryDensity,
    /// `B g* + phi_f`, the trace this field actually attains.
    pub fitted_data: BoundaryDensity,
    pub metadata: SolveMetadata,
    single_layer: SingleLayerPotential,
    volume: Arc<VolumePotential>,
}

impl SolutionField {
    /// `u(x)` for `x` off the surface.
    pub fn eval(&self, x: &Point3) -> Result<f64> {
        Ok(self.single_layer.eval(x)? + self.volume.eval(x))
    }

    /// `u` at many points, in parallel.
    pub fn evaluate(&self, points: &[Point3]) -> Result<Vec<f64>> {
        let v = self.single_layer.eval_many(points)?;
        let w = self.volume.eval_many(points);
        Ok(v.iter().zip(&w).map(|(a, b)| a + b).collect())
    }

    /// Single-layer part alone.
    pub fn single_layer(&self) -> &SingleLayerPotential {
        &self.single_layer
    }

    pub fn volume_potential(&self) -> &VolumePotential {
        &self.volume
    }
}

/// Reusable operator for repeated solves on one surface.
#[derive(Clone, Debug)]
pub struct DirichletSolver {
    op: Arc<DiscreteBoundaryOperator>,
}

impl DirichletSolver {
    pub fn new(surface: Arc<TriangulatedSurface>, alpha: FractionalOrder) -> Result<Self> {
        Ok(Self {
            op: Arc::new(assemble(surface, alpha)?),
        })
    }

    pub fn from_operator(op: Arc<DiscreteBoundaryOperator>) -> Self {
        Self { op }
    }

    pub fn operator(&self) -> &DiscreteBoundaryOperator {
        &self.op
    }

    fn check(&self, problem: &DirichletProblem) -> Result<()> {
        if !Arc::ptr_eq(self.op.surface(), &problem.surface)
            && self.op.surface().len() != problem.surface.len()
        {
            return Err(Error::DimensionMismatch {
                expected: self.op.len(),
                actual: problem.surface.len(),
            });
        }
        if self.op.alpha() != problem.alpha {
            return Err(Error::InvalidArgument(format!(
                "operator assembled for alpha = {}, problem has alpha = {}",
                self.op.alpha().value(),
                problem.alpha.value()
            )));
        }
        Ok(())
    }

    fn source_parts(&self, problem: &DirichletProblem) -> Result<(Arc<VolumePotential>, BoundaryDensity)> {
        let quad = if problem.source.is_zero() {
            VolumeQuadrature {
                cells: Vec::new(),
                resolution: 0,
                cell_edge: 1.0,
                subcell_edge: 1.0,
            }
        } else {
            VolumeQuadrature::new(&problem.surface, &problem.source, problem.volume_resolution)?
        };
        let volume = VolumePotential::new(&problem.source, &quad, problem.alpha)?;
        let trace = if problem.source.is_zero() {
            BoundaryDensity::zeros(problem.surface.len())
        } else {
            BoundaryDensity::new(volume.eval_many(&problem.surface.collocation_points()))
        };
        Ok((Arc::new(volume), trace))
    }

    fn field(
        &self,
        problem: &DirichletProblem,
        density: BoundaryDensity,
        volume: Arc<VolumePotential>,
        source_trace: BoundaryDensity,
        cutoff: Cutoff,
        retained_modes: usize,
    ) -> Result<SolutionField> {
        let areas = self.op.areas();
        let fitted = self.op.apply(&density)?.axpy(1.0, &source_trace);
        let boundary_residual = fitted.sub(&problem.boundary_data).l2_norm(areas);
        let data_norm = problem.boundary_data.sub(&source_trace).l2_norm(areas);
        let ill_conditioned = data_norm > 0.0 && density.l2_norm(areas) > ILL_CONDITIONED_RATIO * data_norm;
        Ok(SolutionField {
            single_layer: SingleLayerPotential::new(problem.surface.clone(), problem.alpha, &density)?,
            density,
            source: problem.source.clone(),
            alpha: problem.alpha,
            surface: problem.surface.clone(),
            side: problem.side,
            source_trace,
            boundary_data: problem.boundary_data.clone(),
            fitted_data: fitted,
            metadata: SolveMetadata {
                cutoff,
                retained_modes,
                boundary_residual,
                ill_conditioned,
            },
            volume,
        })
    }

    pub fn solve(&self, problem: &DirichletProblem, cutoff: Cutoff) -> Result<SolutionField> {
        self.check(problem)?;
        let (volume, source_trace) = self.source_parts(problem)?;
        let rhs = problem.boundary_data.sub(&source_trace);
        let density = self.op.inverse_apply(&rhs, cutoff)?;
        let retained = match cutoff {
            Cutoff::Full => self.op.len(),
            _ => cutoff.retained(&self.op.spectrum()?.eigenvalues)?,
        };
        self.field(problem, density, volume, source_trace, cutoff, retained)
    }

    /// Truncated eigen-expansions of `g*` over the leading `n` modes for each
    /// `n`, with the boundary error `||phi - B psi_n - phi_f||`.
    pub fn approximate_sequence(
        &self,
        problem: &DirichletProblem,
        mode_counts: &[usize],
    ) -> Result<Vec<(SolutionField, f64)>> {
        self.check(problem)?;
        if mode_counts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("mode counts must be strictly increasing".into()));
        }
        let (volume, source_trace) = self.source_parts(problem)?;
        let spectrum = self.op.spectrum()?;
        let rhs = problem.boundary_data.sub(&source_trace);
        mode_counts
            .iter()
            .map(|&n| {
                let n = n.min(spectrum.len());
                let density = spectrum.inverse_truncated(&rhs, n)?;
                let field = self.field(
                    problem,
                    density,
                    volume.clone(),
                    source_trace.clone(),
                    Cutoff::Modes(n),
                    n,
                )?;
                let err = field.metadata.boundary_residual;
                Ok((field, err))
            })
            .collect()
    }
}

/// Assembles the operator and solves once.
pub fn solve(problem: &DirichletProblem, cutoff: Cutoff) -> Result<SolutionField> {
    DirichletSolver::new(problem.surface.clone(), problem.alpha)?.solve(problem, cutoff)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(level: u32, alpha: f64) -> (Arc<TriangulatedSurface>, DirichletSolver, FractionalOrder) {
        let s = Arc::new(TriangulatedSurface::sphere(1.0, level).unwrap());
        let a = FractionalOrder::three_d(alpha).unwrap();
        let solver = DirichletSolver::new(s.clone(), a).unwrap();
        (s, solver, a)
    }

    #[test]
    fn eigen_trace_data_recovers_unit_density() {
        let (s, solver, a) = setup(3, 2.0);
        let phi = solver.operator().apply(&BoundaryDensity::constant(s.len(), 1.0)).unwrap();
        let p = DirichletProblem::new(a, s.clone(), Side::Exterior, VolumeSource::zero(Side::Exterior), phi).unwrap();
        let sol = solver.solve(&p, Cutoff::Full).unwrap();
        assert!(sol.density.values.iter().all(|g| (g - 1.0).abs() < 1e-8));
        assert!(sol.metadata.boundary_residual < 1e-8);
        assert!(!sol.metadata.ill_conditioned);
        let u = sol.eval(&Point3::new(0.0, 2.0, 0.0)).unwrap();
        assert!((u - 0.5).abs() < 0.01 * 0.5, "{u}");
        // Against the polyhedral area, the far field is much tighter.
        let mono = s.total_area() / (4.0 * std::f64::consts::PI) * 0.5;
        assert!((u - mono).abs() < 1e-3 * mono, "{u} {mono}");
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let (s, solver, a) = setup(1, 1.5);
        let p = DirichletProblem::new(
            a,
            s.clone(),
            Side::Interior,
            VolumeSource::zero(Side::Interior),
            BoundaryDensity::zeros(s.len()),
        )
        .unwrap();
        let sol = solver.solve(&p, Cutoff::Full).unwrap();
        assert!(sol.density.values.iter().all(|&g| g == 0.0));
        assert_eq!(sol.eval(&Point3::new(0.1, 0.0, 0.2)).unwrap(), 0.0);
    }

    #[test]
    fn source_trace_data_needs_no_density() {
        let (s, solver, a) = setup(1, 1.5);
        let f = VolumeSource::interior(|_| 1.0);
        let probe = DirichletProblem::new(a, s.clone(), Side::Interior, f.clone(), BoundaryDensity::zeros(s.len()))
            .unwrap()
            .with_volume_resolution(8);
        let phi_f = solver.solve(&probe, Cutoff::Full).unwrap().source_trace;
        let p = DirichletProblem::new(a, s.clone(), Side::Interior, f, phi_f).unwrap().with_volume_resolution(8);
        let sol = solver.solve(&p, Cutoff::Full).unwrap();
        assert!(sol.density.values.iter().all(|g| g.abs() < 1e-10));
        let x = Point3::new(0.1, 0.1, 0.1);
        assert!((sol.eval(&x).unwrap() - sol.volume_potential().eval(&x)).abs() < 1e-10);
    }

    #[test]
    fn mismatched_side_is_rejected() {
        let s = Arc::new(TriangulatedSurface::sphere(1.0, 0).unwrap());
        let a = FractionalOrder::three_d(1.5).unwrap();
        assert!(DirichletProblem::new(
            a,
            s.clone(),
            Side::Exterior,
            VolumeSource::zero(Side::Interior),
            BoundaryDensity::zeros(s.len())
        )
        .is_err());
        assert!(DirichletProblem::new(a, s, Side::Interior, VolumeSource::zero(Side::Interior), BoundaryDensity::zeros(3)).is_err());
    }

    #[test]
    fn on_surface_evaluation_is_an_error() {
        let (s, solver, a) = setup(1, 1.5);
        let phi = BoundaryDensity::constant(s.len(), 1.0);
        let p = DirichletProblem::new(a, s.clone(), Side::Interior, VolumeSource::zero(Side::Interior), phi).unwrap();
        let sol = solver.solve(&p, Cutoff::Full).unwrap();
        assert!(matches!(sol.eval(&s.vertices()[0]), Err(Error::PointOnSurface { .. })));
    }

    #[test]
    fn approximate_sequence_is_monotone_and_exact_at_full() {
        let (s, solver, a) = setup(1, 1.5);
        let phi = BoundaryDensity::new(
            s.collocation_points().iter().map(|c| (2.0 * c.x).sin() + c.y * c.z).collect(),
        );
        let p = DirichletProblem::new(a, s.clone(), Side::Interior, VolumeSource::zero(Side::Interior), phi).unwrap();
        let seq = solver.approximate_sequence(&p, &[1, 4, 16, 64, 80]).unwrap();
        for w in seq.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-14);
        }
        let full = solver.solve(&p, Cutoff::Full).unwrap();
        let last = &seq.last().unwrap().0;
        for (a, b) in last.density.values.iter().zip(&full.density.values) {
            assert!((a - b).abs() < 1e-8 * b.abs().max(1.0));
        }
        assert!(seq.last().unwrap().1 < 1e-9);
        assert!(solver.approximate_sequence(&p, &[4, 4]).is_err());
    }

    #[test]
    fn leading_mode_data_is_exact_with_one_mode() {
        let (s, solver, a) = setup(1, 1.75);
        let z = solver.operator().spectrum().unwrap().mode(0);
        let p = DirichletProblem::new(a, s.clone(), Side::Exterior, VolumeSource::zero(Side::Exterior), z).unwrap();
        let seq = solver.approximate_sequence(&p, &[1]).unwrap();
        assert!(seq[0].1 < 1e-10);
    }
}
