//! Periodic box grids and the Fourier-multiplier fractional Laplacian.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::Point3;

/// Largest tolerated `max |Im| / max |Re|` after the inverse transform.
pub const IMAGINARY_TOLERANCE: f64 = 1e-10;

/// Samples on an `n^3` periodic lattice. Node `(i, j, k)` sits at
/// `origin + (i, j, k) * edge_length / n`; storage is `(i * n + j) * n + k`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxGrid {
    pub origin: Point3,
    pub edge_length: f64,
    pub n: usize,
    pub samples: Vec<f64>,
}

impl BoxGrid {
    /// Zero-filled grid.
    pub fn new(origin: Point3, edge_length: f64, n: usize) -> Result<Self> {
        if !n.is_power_of_two() || n < 2 {
            return Err(Error::Config(format!("grid size n = {n} must be a power of two >= 2")));
        }
        if !(edge_length.is_finite() && edge_length > 0.0) {
            return Err(Error::Config(format!("grid edge length {edge_length} must be positive")));
        }
        Ok(Self {
            origin,
            edge_length,
            n,
            samples: vec![0.0; n * n * n],
        })
    }

    /// Grid whose middle node `(n/2, n/2, n/2)` is `center`.
    pub fn centered(center: Point3, edge_length: f64, n: usize) -> Result<Self> {
        let half = Point3::repeat(0.5 * edge_length);
        Self::new(center - half, edge_length, n)
    }

    pub fn spacing(&self) -> f64 {
        self.edge_length / self.n as f64
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    pub fn node(&self, i: usize, j: usize, k: usize) -> Point3 {
        let h = self.spacing();
        self.origin + Point3::new(i as f64 * h, j as f64 * h, k as f64 * h)
    }

    pub fn node_of(&self, index: usize) -> Point3 {
        let n = self.n;
        self.node(index / (n * n), (index / n) % n, index % n)
    }

    /// Overwrite every sample with `f(node)`.
    pub fn fill(&mut self, f: impl Fn(&Point3) -> f64 + Sync) {
        let n = self.n;
        let h = self.spacing();
        let origin = self.origin;
        self.samples.par_chunks_mut(n * n).enumerate().for_each(|(i, slab)| {
            for (jk, s) in slab.iter_mut().enumerate() {
                let p = origin + Point3::new(i as f64, (jk / n) as f64, (jk % n) as f64) * h;
                *s = f(&p);
            }
        });
    }

    /// Same lattice, new samples.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != self.samples.len() {
            return Err(Error::DimensionMismatch {
                expected: self.samples.len(),
                actual: samples.len(),
            });
        }
        Ok(Self {
            samples,
            ..self.clone()
        })
    }

    /// Angular frequency of FFT bin `m`; the Nyquist bin maps to `+n/2`.
    pub fn frequency(&self, m: usize) -> f64 {
        let n = self.n;
        let signed = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
        2.0 * PI * signed / self.edge_length
    }
}

/// `(-Delta)^(alpha/2)` on the periodic box: multiply the DFT by `|xi|^alpha`,
/// with the zero mode sent to zero.
pub fn fractional_laplacian_grid(grid: &BoxGrid, alpha: f64) -> Result<BoxGrid> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("symbol exponent {alpha} must be positive")));
    }
    apply_radial_symbol(grid, |k| if k == 0.0 { 0.0 } else { k.powf(alpha) })
}

/// Multiply the DFT of the samples by `symbol(|xi|)`. The symbol must be
/// real, so the output is real up to rounding; a larger imaginary part is
/// reported as an error.
pub fn apply_radial_symbol(grid: &BoxGrid, symbol: impl Fn(f64) -> f64 + Sync) -> Result<BoxGrid> {
    let n = grid.n;
    let mut data: Vec<Complex<f64>> = grid.samples.iter().map(|&v| Complex::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);

    transform_3d(&mut data, n, forward.as_ref());
    let freqs: Vec<f64> = (0..n).map(|m| grid.frequency(m)).collect();
    data.par_chunks_mut(n * n).enumerate().for_each(|(i, slab)| {
        for (jk, z) in slab.iter_mut().enumerate() {
            let (a, b, c) = (freqs[i], freqs[jk / n], freqs[jk % n]);
            *z *= symbol((a * a + b * b + c * c).sqrt());
        }
    });
    transform_3d(&mut data, n, inverse.as_ref());

    let scale = 1.0 / (n * n * n) as f64;
    let max_re = data.iter().fold(0.0f64, |m, z| m.max(z.re.abs()));
    let max_im = data.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    if max_im > IMAGINARY_TOLERANCE * max_re && max_im * scale > f64::MIN_POSITIVE {
        return Err(Error::ImaginaryResidue {
            relative: max_im / max_re.max(f64::MIN_POSITIVE),
        });
    }
    grid.with_samples(data.iter().map(|z| z.re * scale).collect())
}

fn transform_3d(data: &mut [Complex<f64>], n: usize, fft: &dyn Fft<f64>) {
    // Last axis is contiguous.
    data.par_chunks_mut(n).for_each(|line| fft.process(line));
    // Middle axis: strided by n inside each slab.
    data.par_chunks_mut(n * n).for_each(|slab| {
        let mut line = vec![Complex::new(0.0, 0.0); n];
        for k in 0..n {
            for j in 0..n {
                line[j] = slab[j * n + k];
            }
            fft.process(&mut line);
            for j in 0..n {
                slab[j * n + k] = line[j];
            }
        }
    });
    // First axis: transpose so it becomes contiguous, transform, transpose back.
    let mut t = vec![Complex::new(0.0, 0.0); data.len()];
    t.par_chunks_mut(n).enumerate().for_each(|(jk, line)| {
        for (i, z) in line.iter_mut().enumerate() {
            *z = data[i * n * n + jk];
        }
        fft.process(line);
    });
    data.par_chunks_mut(n * n).enumerate().for_each(|(i, slab)| {
        for (jk, z) in slab.iter_mut().enumerate() {
            *z = t[jk * n + i];
        }
    });
}

/// Raised-cosine taper about `center`: one inside `inner_radius`, zero
/// beyond `outer_radius`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowSpec {
    pub center: Point3,
    pub inner_radius: f64,
    pub outer_radius: f64,
}

impl WindowSpec {
    pub fn new(center: Point3, inner_radius: f64, outer_radius: f64) -> Result<Self> {
        if !(inner_radius > 0.0 && outer_radius > inner_radius && outer_radius.is_finite()) {
            return Err(Error::Config(format!(
                "window radii must satisfy 0 < inner < outer, got {inner_radius} and {outer_radius}"
            )));
        }
        Ok(Self {
            center,
            inner_radius,
            outer_radius,
        })
    }

    pub fn weight(&self, x: &Point3) -> f64 {
        self.profile((x - self.center).norm())
    }

    /// Taper as a function of the distance from the center.
    pub fn profile(&self, r: f64) -> f64 {
        if r <= self.inner_radius {
            1.0
        } else if r >= self.outer_radius {
            0.0
        } else {
            let t = (r - self.inner_radius) / (self.outer_radius - self.inner_radius);
            0.5 * (1.0 + (PI * t).cos())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_adaptive;
    use crate::special::gamma;

    #[test]
    fn cosine_modes_are_eigenfunctions() {
        let mut g = BoxGrid::new(Point3::new(-1.0, 0.5, 2.0), 4.0, 16).unwrap();
        let w = 2.0 * PI / 4.0;
        let k = Point3::new(3.0 * w, -2.0 * w, 8.0 * w);
        let o = g.origin;
        g.fill(|x| (k.dot(&(x - o)) + 0.3).cos());
        for alpha in [0.5, 1.5, 2.0] {
            let out = fractional_laplacian_grid(&g, alpha).unwrap();
            let factor = k.norm().powf(alpha);
            for (a, b) in out.samples.iter().zip(&g.samples) {
                assert!((a - factor * b).abs() < 1e-10 * factor, "{a} {b}");
            }
        }
    }

    #[test]
    fn laplacian_at_alpha_two_matches_second_differences_of_a_mode() {
        let mut g = BoxGrid::new(Point3::zeros(), 2.0 * PI, 8).unwrap();
        g.fill(|x| x.x.sin() * (2.0 * x.y).cos());
        let out = fractional_laplacian_grid(&g, 2.0).unwrap();
        for (a, b) in out.samples.iter().zip(&g.samples) {
            assert!((a - 5.0 * b).abs() < 1e-12);
        }
    }

    #[test]
    fn symbols_compose() {
        let mut g = BoxGrid::centered(Point3::zeros(), 8.0, 32).unwrap();
        g.fill(|x| (-(x.norm_squared())).exp() * (1.0 + x.x));
        let once = fractional_laplacian_grid(&g, 1.5).unwrap();
        let half = fractional_laplacian_grid(&g, 0.75).unwrap();
        let twice = fractional_laplacian_grid(&half, 0.75).unwrap();
        let scale = once.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in once.samples.iter().zip(&twice.samples) {
            assert!((a - b).abs() < 1e-10 * scale);
        }
    }

    // (-Delta)^(a/2) exp(-|x|^2 / 2) at radius r, by the Hankel-type integral
    // of |xi|^a times the Gaussian transform.
    fn gaussian_oracle(alpha: f64, r: f64) -> f64 {
        let amp = (2.0 * PI).powf(1.5);
        if r == 0.0 {
            // Closed form of the radial moment.
            let m = 2f64.powf((alpha + 1.0) / 2.0) * gamma((alpha + 3.0) / 2.0);
            return amp * m / (2.0 * PI * PI);
        }
        let v = integrate_adaptive(
            |k| k.powf(alpha + 1.0) * (-0.5 * k * k).exp() * (k * r).sin(),
            0.0,
            14.0,
            1e-14,
            1e-12,
        );
        amp * v.value / (2.0 * PI * PI * r)
    }

    #[test]
    fn gaussian_bump_matches_radial_quadrature() {
        let mut g = BoxGrid::centered(Point3::zeros(), 32.0, 64).unwrap();
        g.fill(|x| (-0.5 * x.norm_squared()).exp());
        let c = g.n / 2;
        for alpha in [1.25, 1.5, 2.0] {
            let out = fractional_laplacian_grid(&g, alpha).unwrap();
            let peak = gaussian_oracle(alpha, 0.0);
            for m in [0usize, 1, 2, 4, 6] {
                let idx = g.index(c + m, c, c);
                let r = m as f64 * g.spacing();
                let want = gaussian_oracle(alpha, r);
                assert!(
                    (out.samples[idx] - want).abs() < 1e-4 * peak,
                    "alpha {alpha} r {r}: {} vs {want}",
                    out.samples[idx]
                );
            }
        }
    }

    #[test]
    fn zero_grid_maps_to_zero() {
        let g = BoxGrid::new(Point3::zeros(), 1.0, 8).unwrap();
        let out = fractional_laplacian_grid(&g, 1.5).unwrap();
        assert!(out.samples.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn grid_rejects_non_power_of_two() {
        assert!(matches!(BoxGrid::new(Point3::zeros(), 1.0, 12), Err(Error::Config(_))));
    }

    #[test]
    fn window_profile() {
        let w = WindowSpec::new(Point3::zeros(), 1.0, 2.0).unwrap();
        assert_eq!(w.profile(0.5), 1.0);
        assert_eq!(w.profile(2.5), 0.0);
        assert!((w.profile(1.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = w.profile(1.0 + i as f64 / 100.0);
            assert!(v <= prev);
            prev = v;
        }
        assert!(WindowSpec::new(Point3::zeros(), 2.0, 1.0).is_err());
    }

    #[test]
    fn node_indexing_round_trips() {
        let g = BoxGrid::new(Point3::new(1.0, 2.0, 3.0), 8.0, 8).unwrap();
        let idx = g.index(3, 5, 7);
        assert_eq!(g.node_of(idx), Point3::new(4.0, 7.0, 10.0));
    }
}
