//! Discrete single-layer boundary operator: assembly, spectrum, inverse and
//! H^1_alpha diagnostics.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::{Arc, OnceLock};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{FractionalOrder, RieszKernel3};
use crate::quadrature::TriangleRule;
use crate::quadrature::GaussLegendre;
use crate::surface::{panel_kernel_integral, Panel};
use crate::surface::TriangulatedSurface;
use crate::Point3;

// Distance bands, in panel diameters, for the pair rules.
const NEAR_RATIO: f64 = 3.0;
const MID_RATIO: f64 = 6.0;
const FAR_RATIO: f64 = 15.0;
const GRADED_NODES: usize = 4;
const GRADED_POWER: f64 = 3.0;

/// Area-fraction rule on a panel, clustered toward its edges: three fans from
/// the centroid with `1 - s = (1 - u)^power` in the radial variable.
fn graded_rule(panel: &Panel, nodes: usize, power: f64) -> Vec<(Point3, f64)> {
    let gl = GaussLegendre::new(nodes);
    let c = panel.centroid;
    let mut out = Vec::with_capacity(3 * nodes * nodes);
    for k in 0..3 {
        let a = panel.vertices[k];
        let b = panel.vertices[(k + 1) % 3];
        let fraction = 0.5 * (a - c).cross(&(b - c)).norm() / panel.area;
        for (t, wt) in gl.mapped(0.0, 1.0) {
            for (u, wu) in gl.mapped(0.0, 1.0) {
                let s = 1.0 - (1.0 - u).powf(power);
                let ds = power * (1.0 - u).powf(power - 1.0);
                out.push((c + (a - c) * s + (b - a) * (s * t), 2.0 * fraction * s * ds * wt * wu));
            }
        }
    }
    out
}

/// Piecewise-constant density, one value per panel.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryDensity {
    pub values: Vec<f64>,
}

impl BoundaryDensity {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self { values: vec![0.0; n] }
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self { values: vec![value; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Area-weighted inner product.
    pub fn dot(&self, other: &Self, areas: &[f64]) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .zip(areas)
            .map(|((a, b), w)| w * a * b)
            .sum()
    }

    /// Discrete `L2(Gamma)` norm.
    pub fn l2_norm(&self, areas: &[f64]) -> f64 {
        self.dot(self, areas).sqrt()
    }

    /// Surface integral `sum_p area_p g_p`.
    pub fn integral(&self, areas: &[f64]) -> f64 {
        self.values.iter().zip(areas).map(|(g, w)| g * w).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.values.iter().map(|v| s * v).collect())
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        Self::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + s * b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(-1.0, other)
    }
}

/// How many eigenmodes the inverse retains.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cutoff {
    /// Exact discrete inverse via Cholesky.
    Full,
    /// Fraction of modes in `(0, 1]`, largest eigenvalues first.
    Fraction(f64),
    /// Keep modes with `lambda >= floor`.
    EigenvalueFloor(f64),
    /// Keep the leading `n` modes.
    Modes(usize),
}

impl Cutoff {
    /// Number of retained modes for a spectrum sorted descending.
    pub fn retained(self, eigenvalues: &[f64]) -> Result<usize> {
        let n = eigenvalues.len();
        match self {
            Cutoff::Full => Ok(n),
            Cutoff::Fraction(f) => {
                if !(f > 0.0 && f <= 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "cutoff fraction {f} is outside (0, 1]"
                    )));
                }
                Ok(((f * n as f64).ceil() as usize).clamp(1, n))
            }
            Cutoff::EigenvalueFloor(floor) => {
                if !(floor >= 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "eigenvalue floor {floor} must be non-negative"
                    )));
                }
                Ok(eigenvalues.iter().take_while(|&&l| l >= floor).count())
            }
            Cutoff::Modes(m) => Ok(m.min(n)),
        }
    }
}

/// Eigenpairs of the operator in the area-weighted inner product.
#[derive(Clone, Debug)]
pub struct BoundarySpectrum {
    /// Sorted descending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is `zeta_k`, orthonormal under the area weights.
    pub eigenvectors: DMatrix<f64>,
    areas: Vec<f64>,
}

impl BoundarySpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn mode(&self, k: usize) -> BoundaryDensity {
        BoundaryDensity::new(self.eigenvectors.column(k).iter().copied().collect())
    }

    /// Expansion coefficients `tau_k = <phi, zeta_k>`.
    pub fn coefficients(&self, phi: &BoundaryDensity) -> Result<Vec<f64>> {
        check_len(self.areas.len(), phi.len())?;
        let wphi = DVector::from_iterator(
            phi.len(),
            phi.values.iter().zip(&self.areas).map(|(v, w)| v * w),
        );
        Ok(self.eigenvectors.tr_mul(&wphi).iter().copied().collect())
    }

    /// `sum_k c_k zeta_k` over the given coefficients.
    pub fn synthesize(&self, coeffs: &[f64]) -> BoundaryDensity {
        let m = coeffs.len().min(self.len());
        let c = DVector::from_column_slice(&coeffs[..m]);
        let v = self.eigenvectors.columns(0, m) * c;
        BoundaryDensity::new(v.iter().copied().collect())
    }

    /// Projection onto the leading `n` modes.
    pub fn truncate(&self, phi: &BoundaryDensity, n: usize) -> Result<BoundaryDensity> {
        let tau = self.coefficients(phi)?;
        Ok(self.synthesize(&tau[..n.min(tau.len())]))
    }

    /// `sum tau_k lambda_k^-1 zeta_k` over the leading `n` modes.
    pub fn inverse_truncated(&self, phi: &BoundaryDensity, n: usize) -> Result<BoundaryDensity> {
        let tau = self.coefficients(phi)?;
        let n = n.min(tau.len());
        let c: Vec<f64> = tau[..n]
            .iter()
            .zip(&self.eigenvalues)
            .map(|(t, l)| t / l)
            .collect();
        Ok(self.synthesize(&c))
    }

    /// `(sum tau_k^2 (1 + lambda_k^-2))^(1/2)`.
    pub fn h1alpha_norm(&self, phi: &BoundaryDensity) -> Result<f64> {
        let tau = self.coefficients(phi)?;
        Ok(tau
            .iter()
            .zip(&self.eigenvalues)
            .map(|(t, l)| t * t * (1.0 + 1.0 / (l * l)))
            .sum::<f64>()
            .sqrt())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }
}

/// Partial sums of `tau_k^2 lambda_k^-2` with a plateau heuristic.
#[derive(Clone, Debug)]
pub struct H1AlphaReport {
    pub partial_sums: Vec<f64>,
    /// The last tenth of the modes adds less than 1% to the total.
    pub plateau: bool,
}

pub fn h1alpha_diagnostic(spectrum: &BoundarySpectrum, phi: &BoundaryDensity) -> Result<H1AlphaReport> {
    let tau = spectrum.coefficients(phi)?;
    let mut acc = 0.0;
    let partial_sums: Vec<f64> = tau
        .iter()
        .zip(&spectrum.eigenvalues)
        .map(|(t, l)| {
            acc += (t / l).powi(2);
            acc
        })
        .collect();
    let n = partial_sums.len();
    let total = partial_sums.last().copied().unwrap_or(0.0);
    let tail_start = n - (n / 10).max(1).min(n);
    let before = if tail_start == 0 { 0.0 } else { partial_sums[tail_start - 1] };
    let plateau = total == 0.0 || (total - before) < 0.01 * total;
    Ok(H1AlphaReport { partial_sums, plateau })
}

/// Discretization of `B[g](x) = c int_Gamma g(y) |x - y|^(alpha-3) ds_y` for
/// piecewise-constant densities.
///
/// Entry `A_pq` is the kernel integral over panel `q` seen from panel `p`:
/// at the centroid for distant pairs, averaged over panel `p` for close ones.
/// Stored as the symmetric matrix `S = (W A + (W A)^T) / 2` with
/// `W = diag(areas)`; the operator acts as `W^-1 S`.
#[derive(Debug)]
pub struct DiscreteBoundaryOperator {
    surface: Arc<TriangulatedSurface>,
    alpha: FractionalOrder,
    matrix: DMatrix<f64>,
    areas: Vec<f64>,
    cholesky: OnceLock<Option<Cholesky<f64, Dyn>>>,
    spectrum: OnceLock<BoundarySpectrum>,
}

pub fn assemble(
    surface: impl Into<Arc<TriangulatedSurface>>,
    alpha: FractionalOrder,
) -> Result<DiscreteBoundaryOperator> {
    let surface = surface.into();
    let kernel = RieszKernel3::new(alpha)?;
    let c = kernel.constant();
    let panels = surface.panels();
    let n = panels.len();
    let triangles = surface.triangles();
    let three = TriangleRule::three_point();
    let seven = TriangleRule::seven_point();
    let nodes = |rule: &TriangleRule| -> Vec<Vec<(Point3, f64)>> {
        panels
            .iter()
            .map(|pan| {
                rule.points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(l, &w)| (pan.point(l), w))
                    .collect()
            })
            .collect()
    };
    let three_nodes = nodes(&three);
    let seven_nodes = nodes(&seven);
    let product = |outer: &[(Point3, f64)], inner: &[(Point3, f64)]| -> f64 {
        let mut sum = 0.0;
        for (xi, wi) in outer {
            for (yj, wj) in inner {
                sum += wi * wj * kernel.profile_sq((xi - yj).norm_squared());
            }
        }
        sum
    };
    let mut wa = vec![0.0; n * n];
    wa.par_chunks_mut(n).enumerate().for_each(|(p, row)| {
        let pp = &panels[p];
        let graded = graded_rule(pp, GRADED_NODES, GRADED_POWER);
        for (q, entry) in row.iter_mut().enumerate() {
            let pq = &panels[q];
            let scale = pp.diameter.max(pq.diameter);
            let ratio = (pq.centroid - pp.centroid).norm() / scale;
            // Mean over T_p of int_{T_q} |x - y|^(alpha - 3) ds_y, with rules
            // in both panels coarsening with distance.
            let mean = if triangles[p].iter().any(|v| triangles[q].contains(v)) {
                graded
                    .iter()
                    .map(|(xi, w)| w * panel_kernel_integral(pq, xi, &kernel))
                    .sum()
            } else if ratio < NEAR_RATIO {
                seven_nodes[p]
                    .iter()
                    .map(|(xi, w)| w * panel_kernel_integral(pq, xi, &kernel))
                    .sum()
            } else if ratio < MID_RATIO {
                pq.area * product(&three_nodes[p], &seven_nodes[q])
            } else if ratio < FAR_RATIO {
                pq.area * product(&three_nodes[p], &three_nodes[q])
            } else {
                pq.area * kernel.profile_sq((pp.centroid - pq.centroid).norm_squared())
            };
            *entry = pp.area * c * mean;
        }
    });
    let wa = DMatrix::from_row_slice(n, n, &wa);
    let matrix = (&wa + wa.transpose()) * 0.5;
    Ok(DiscreteBoundaryOperator {
        areas: surface.areas(),
        surface,
        alpha,
        matrix,
        cholesky: OnceLock::new(),
        spectrum: OnceLock::new(),
    })
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

impl DiscreteBoundaryOperator {
    pub fn surface(&self) -> &Arc<TriangulatedSurface> {
        &self.surface
    }

    pub fn alpha(&self) -> FractionalOrder {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.areas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.areas.is_empty()
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    /// The symmetric weighted matrix `S`.
    pub fn weighted_matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Collocation entry `B_pq = S_pq / area_p`.
    pub fn entry(&self, p: usize, q: usize) -> f64 {
        self.matrix[(p, q)] / self.areas[p]
    }

    /// Largest `|S_pq - S_qp|` relative to `max |S|`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.len();
        let mut defect = 0.0f64;
        let mut scale = 0.0f64;
        for q in 0..n {
            for p in 0..n {
                defect = defect.max((self.matrix[(p, q)] - self.matrix[(q, p)]).abs());
                scale = scale.max(self.matrix[(p, q)].abs());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            defect / scale
        }
    }

    pub fn apply(&self, g: &BoundaryDensity) -> Result<BoundaryDensity> {
        check_len(self.len(), g.len())?;
        let v = &self.matrix * DVector::from_column_slice(&g.values);
        Ok(BoundaryDensity::new(
            v.iter().zip(&self.areas).map(|(s, w)| s / w).collect(),
        ))
    }

    /// `<g, B g>` in the area-weighted inner product.
    pub fn quadratic_form(&self, g: &BoundaryDensity) -> Result<f64> {
        check_len(self.len(), g.len())?;
        let v = DVector::from_column_slice(&g.values);
        Ok(v.dot(&(&self.matrix * &v)))
    }

    /// Full eigendecomposition, computed once and cached.
    pub fn spectrum(&self) -> Result<&BoundarySpectrum> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let s = eigendecompose(self)?;
        let _ = self.spectrum.set(s);
        Ok(self.spectrum.get().expect("spectrum was just set"))
    }

    fn cholesky(&self) -> Option<&Cholesky<f64, Dyn>> {
        self.cholesky
            .get_or_init(|| Cholesky::new(self.matrix.clone()))
            .as_ref()
    }

    /// `B^-1 phi`, exactly (Cholesky) or spectrally truncated.
    pub fn inverse_apply(&self, phi: &BoundaryDensity, cutoff: Cutoff) -> Result<BoundaryDensity> {
        check_len(self.len(), phi.len())?;
        if cutoff == Cutoff::Full {
            let rhs = DVector::from_iterator(
                phi.len(),
                phi.values.iter().zip(&self.areas).map(|(v, w)| v * w),
            );
            return match self.cholesky() {
                Some(ch) => Ok(BoundaryDensity::new(ch.solve(&rhs).iter().copied().collect())),
                None => Err(Error::NotPositiveDefinite {
                    min_eigenvalue: self.spectrum()?.min_eigenvalue(),
                }),
            };
        }
        let spectrum = self.spectrum()?;
        let m = cutoff.retained(&spectrum.eigenvalues)?;
        spectrum.inverse_truncated(phi, m)
    }

    /// Writes the binary dump: `u32 N`, `f64 alpha`, `N^2` row-major entries of
    /// the symmetric weighted matrix, then `N` areas, all little-endian.
    pub fn write_dump(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let n = self.len();
        let mut bytes = Vec::with_capacity(12 + 8 * n * (n + 1));
        bytes.extend_from_slice(&(n as u32).to_le_bytes());
        bytes.extend_from_slice(&self.alpha.value().to_le_bytes());
        for p in 0..n {
            for q in 0..n {
                bytes.extend_from_slice(&self.matrix[(p, q)].to_le_bytes());
            }
        }
        for a in &self.areas {
            bytes.extend_from_slice(&a.to_le_bytes());
        }
        w.write_all(&bytes)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }
}

/// Matrix dump as read back from disk.
#[derive(Clone, Debug)]
pub struct MatrixDump {
    pub alpha: f64,
    pub matrix: DMatrix<f64>,
    pub areas: Vec<f64>,
}

pub fn read_dump(path: impl AsRef<Path>) -> Result<MatrixDump> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::new();
    BufReader::new(file)
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;
    let bad = |m: &str| Error::Parse {
        line: 0,
        message: m.to_string(),
    };
    if bytes.len() < 12 {
        return Err(bad("matrix dump is shorter than its header"));
    }
    let n = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    if bytes.len() != 12 + 8 * n * (n + 1) {
        return Err(bad("matrix dump length does not match its header"));
    }
    let f = |i: usize| f64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
    let alpha = f(4);
    let matrix = DMatrix::from_row_iterator(n, n, (0..n * n).map(|k| f(12 + 8 * k)));
    let areas = (0..n).map(|k| f(12 + 8 * (n * n + k))).collect();
    Ok(MatrixDump { alpha, matrix, areas })
}

/// Symmetric eigendecomposition in the area-weighted inner product.
pub fn eigendecompose(op: &DiscreteBoundaryOperator) -> Result<BoundarySpectrum> {
    let n = op.len();
    let inv_sqrt: Vec<f64> = op.areas.iter().map(|w| 1.0 / w.sqrt()).collect();
    let m = DMatrix::from_fn(n, n, |p, q| op.matrix[(p, q)] * inv_sqrt[p] * inv_sqrt[q]);
    let eig = SymmetricEigen::try_new(m, 1e-15, 100 * n.max(10)).ok_or_else(|| {
        let diag = op.matrix.diagonal();
        let (lo, hi) = diag
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (lo.min(*d), hi.max(*d)));
        Error::Eigen(format!(
            "symmetric QR did not converge for N = {n}; diagonal range [{lo:.3e}, {hi:.3e}]"
        ))
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |p, j| eig.eigenvectors[(p, order[j])] * inv_sqrt[p]);
    Ok(BoundarySpectrum {
        eigenvalues,
        eigenvectors,
        areas: op.areas.clone(),
    })
}
