//! One pipeline per run mode. Each writes its CSV files into the output
//! directory and records timings and check outcomes for the manifest.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use riesz_core::one_dim::{
    boundary_limit_check, spectral_residual_1d, HalfLineProblem, IntervalProblem, SpectralGrid1d,
    WeightedDirichlet1d,
};
use riesz_core::report::{num, CsvTable};
use riesz_core::verify::{
    axis_directions, decay_check, parseval_check_many, pde_residual_check, ParsevalQuadrature, ResidualConfig,
    WindowSpec,
};
use riesz_core::{
    BoundaryDensity, DirichletProblem, DirichletSolver, FractionalOrder, Point3, Side, SolutionField,
    TriangulatedSurface,
};

use crate::config::{Mode, Problem1d, RunConfig};
use crate::error::CliError;
use crate::inputs;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Default)]
pub struct RunSummary {
    pub outputs: Vec<String>,
    pub timings: Vec<(String, f64)>,
    pub checks: Vec<Check>,
}

impl RunSummary {
    fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> Result<T, CliError>) -> Result<T, CliError> {
        let t = Instant::now();
        let out = f()?;
        self.timings.push((phase.to_string(), t.elapsed().as_secs_f64()));
        Ok(out)
    }

    fn write(&mut self, dir: &Path, name: &str, table: &CsvTable) -> Result<(), CliError> {
        table.write(dir.join(name))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn run(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    let dir = cfg.output.as_path();
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut summary = RunSummary::default();
    match cfg.mode {
        Mode::Solve3d => {
            solve3d(cfg, &mut summary)?;
        }
        Mode::Verify3d => verify3d(cfg, &mut summary)?,
        Mode::Decay => decay(cfg, &mut summary)?,
        Mode::Parseval => parseval(cfg, &mut summary)?,
        Mode::Solve1d => solve1d(cfg, &mut summary)?,
    }
    Ok(summary)
}

fn solve3d(cfg: &RunConfig, summary: &mut RunSummary) -> Result<SolutionField, CliError> {
    let dir = cfg.output.as_path();
    let alpha = FractionalOrder::three_d(cfg.alpha)?;
    let surface = summary.time("surface", || inputs::surface(cfg))?;
    let solver = summary.time("assemble", || Ok(DirichletSolver::new(surface.clone(), alpha)?))?;
    let phi = inputs::boundary_data(cfg, &surface, solver.operator())?;
    let source = inputs::volume_source(cfg)?;
    let problem = DirichletProblem::new(alpha, surface.clone(), inputs::side(cfg), source, phi)?
        .with_volume_resolution(cfg.volume_resolution);
    let solution = summary.time("solve", || Ok(solver.solve(&problem, inputs::cutoff(cfg))?))?;

    let points = eval_points(cfg, &surface, inputs::side(cfg));
    let values = summary.time("evaluate", || Ok(solution.evaluate(&points)?))?;
    let mut t = CsvTable::new(&["x", "y", "z", "u"]);
    for (p, u) in points.iter().zip(&values) {
        t.push_numbers(&[p.x, p.y, p.z, *u]);
    }
    summary.write(dir, "solution.csv", &t)?;

    let mut d = CsvTable::new(&["panel", "cx", "cy", "cz", "area", "density", "boundary_data", "fitted_data"]);
    for (i, p) in surface.panels().iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(
            [
                p.centroid.x,
                p.centroid.y,
                p.centroid.z,
                p.area,
                solution.density.values[i],
                solution.boundary_data.values[i],
                solution.fitted_data.values[i],
            ]
            .map(num),
        );
        d.push(row);
    }
    summary.write(dir, "density.csv", &d)?;

    let m = &solution.metadata;
    let mut s = CsvTable::new(&["panels", "retained_modes", "boundary_residual", "ill_conditioned"]);
    s.push(vec![
        surface.len().to_string(),
        m.retained_modes.to_string(),
        num(m.boundary_residual),
        m.ill_conditioned.to_string(),
    ]);
    summary.write(dir, "solve_summary.csv", &s)?;
    summary.check(
        "conditioning",
        !m.ill_conditioned,
        format!("boundary residual {}", num(m.boundary_residual)),
    );
    Ok(solution)
}

// Regular grid on the cube of half-edge `eval_extent * R` about the surface
// center, restricted to the solved side and kept off the surface.
fn eval_points(cfg: &RunConfig, surface: &TriangulatedSurface, side: Side) -> Vec<Point3> {
    let c = surface.center();
    let half = cfg.eval_extent * surface.radius();
    let n = cfg.eval_n;
    let coord = |i: usize| if n == 1 { 0.0 } else { -half + 2.0 * half * i as f64 / (n - 1) as f64 };
    let gap = 1e-3 * surface.radius();
    let mut pts = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let p = c + Point3::new(coord(i), coord(j), coord(k));
                if surface.contains(&p) == (side == Side::Interior) && surface.distance(&p) > gap {
                    pts.push(p);
                }
            }
        }
    }
    pts
}

fn verify3d(cfg: &RunConfig, summary: &mut RunSummary) -> Result<(), CliError> {
    let solution = solve3d(cfg, summary)?;
    let s = &solution.surface;
    let r = s.radius();
    let c = s.center();
    let (probe_center, side_ok) = match solution.side {
        Side::Interior => (c, s.contains(&c)),
        // Exterior probes sit on the x axis midway between the surface and the taper.
        Side::Exterior => {
            let p = c + Point3::new(0.5 * (1.0 + cfg.window_inner) * r, 0.0, 0.0);
            (p, !s.contains(&p))
        }
    };
    if !side_ok {
        return Err(CliError::Validation("the surface center is not inside the surface".into()));
    }
    let rc = ResidualConfig {
        n: cfg.grid_n,
        edge_length: cfg.padding * 2.0 * r,
        window: WindowSpec::new(c, cfg.window_inner * r, cfg.window_outer * r)?,
        probe_center,
        probe_radius: cfg.probe_radius * r,
        mollifier: cfg.mollifier,
    };
    let report = summary.time("residual", || Ok(pde_residual_check(&solution, &rc)?))?;
    summary.write(&cfg.output, "residual_summary.csv", &report.summary_table())?;
    summary.write(&cfg.output, "residual_probe.csv", &report.probe_table())?;
    summary.check(
        "spectral_residual",
        report.relative_l2_residual <= cfg.residual_tolerance,
        format!(
            "relative L2 residual {} (tolerance {})",
            num(report.relative_l2_residual),
            num(cfg.residual_tolerance)
        ),
    );
    Ok(())
}

fn decay(cfg: &RunConfig, summary: &mut RunSummary) -> Result<(), CliError> {
    let solution = solve3d(cfg, summary)?;
    let report = summary.time("decay", || {
        Ok(decay_check(
            &solution,
            &axis_directions(),
            cfg.decay_r_min,
            cfg.decay_r_max,
            cfg.decay_samples,
        )?)
    })?;
    summary.write(&cfg.output, "decay.csv", &report.table())?;
    let detail = match &report.skipped {
        Some(why) => format!("skipped: {why}"),
        None => format!(
            "expected slope {}, max deviation {}",
            num(report.expected_slope),
            num(report.max_deviation())
        ),
    };
    summary.check("decay_slope", report.passed(), detail);
    Ok(())
}

fn parseval(cfg: &RunConfig, summary: &mut RunSummary) -> Result<(), CliError> {
    let alpha = FractionalOrder::three_d(cfg.alpha)?;
    let surface = summary.time("surface", || inputs::surface(cfg))?;
    let solver = summary.time("assemble", || Ok(DirichletSolver::new(surface.clone(), alpha)?))?;
    let n = surface.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut densities = vec![BoundaryDensity::constant(n, 1.0)];
    for _ in 0..cfg.parseval_samples {
        densities.push(BoundaryDensity::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()));
    }
    let reports = summary.time("parseval", || {
        Ok(parseval_check_many(
            &densities,
            solver.operator(),
            &cfg.parseval_radii,
            ParsevalQuadrature::default(),
        )?)
    })?;
    let mut t = CsvTable::new(&["density", "r", "integral", "quadratic_form", "ratio"]);
    for (i, rep) in reports.iter().enumerate() {
        let label = if i == 0 { "constant".to_string() } else { format!("random{i}") };
        for row in rep.table().rows {
            let mut full = vec![label.clone()];
            full.extend(row);
            t.push(full);
        }
    }
    summary.write(&cfg.output, "parseval.csv", &t)?;
    let failed = reports.iter().filter(|r| !(r.monotone && r.inequality_satisfied)).count();
    summary.check(
        "parseval_inequality",
        failed == 0,
        format!(
            "{failed} of {} densities failed; constant density captures {}",
            reports.len(),
            num(reports[0].captured_fraction())
        ),
    );
    Ok(())
}

fn solve1d(cfg: &RunConfig, summary: &mut RunSummary) -> Result<(), CliError> {
    let alpha = FractionalOrder::one_d(cfg.alpha)?;
    let source = inputs::source_1d(cfg)?;
    let (problem, targets): (Arc<dyn WeightedDirichlet1d + Send>, Vec<(f64, f64)>) = match cfg.problem {
        Problem1d::Halfline => (
            Arc::new(HalfLineProblem::new(alpha, cfg.l0, cfg.c0, source)?),
            vec![(cfg.l0, cfg.c0)],
        ),
        Problem1d::Interval => (
            Arc::new(IntervalProblem::new(alpha, cfg.l, cfg.c_minus, cfg.c_plus, source)?),
            vec![(-cfg.l, cfg.c_minus), (cfg.l, cfg.c_plus)],
        ),
    };
    let (lo, hi) = problem.domain();
    if !(cfg.x_min > lo && cfg.x_max < hi) {
        return Err(CliError::Validation(format!(
            "evaluation range [{}, {}] must lie inside the domain ({lo}, {hi})",
            cfg.x_min, cfg.x_max
        )));
    }
    let n = cfg.eval_n;
    let xs: Vec<f64> = (0..n)
        .map(|i| {
            if n == 1 {
                cfg.x_min
            } else {
                cfg.x_min + (cfg.x_max - cfg.x_min) * i as f64 / (n - 1) as f64
            }
        })
        .collect();
    let values = summary.time("evaluate", || {
        xs.iter().map(|&x| Ok(problem.eval(x)?)).collect::<Result<Vec<f64>, CliError>>()
    })?;
    let mut t = CsvTable::new(&["x", "u"]);
    for (x, u) in xs.iter().zip(&values) {
        t.push_numbers(&[*x, *u]);
    }
    summary.write(&cfg.output, "solution.csv", &t)?;

    let mut limits = CsvTable::new(&["endpoint", "target", "limit", "passed"]);
    let mut all = true;
    let mut worst: f64 = 0.0;
    for (endpoint, target) in targets {
        let r = boundary_limit_check(problem.as_ref(), endpoint, target)?;
        all &= r.passed;
        worst = worst.max((r.limit - r.target).abs());
        limits.push(vec![num(endpoint), num(target), num(r.limit), r.passed.to_string()]);
    }
    summary.write(&cfg.output, "limits.csv", &limits)?;
    summary.check("weighted_limits", all, format!("max absolute limit error {}", num(worst)));

    if cfg.spectral {
        let probe = (cfg.probe_interval[0], cfg.probe_interval[1]);
        let report = summary.time("residual", || {
            spectral_residual_1d(problem.as_ref(), probe, SpectralGrid1d::default())
                .map_err(|e| match e {
                    riesz_core::Error::Config(m) => CliError::Validation(m),
                    e => e.into(),
                })
        })?;
        summary.write(&cfg.output, "residual_1d.csv", &report.table())?;
        summary.check(
            "spectral_residual",
            report.relative_residual <= cfg.residual_tolerance,
            format!(
                "relative residual {} (tolerance {})",
                num(report.relative_residual),
                num(cfg.residual_tolerance)
            ),
        );
    }
    Ok(())
}
