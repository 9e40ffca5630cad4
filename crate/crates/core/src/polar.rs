//! Polar integration of `|x - y|^(alpha - 3)` over flat convex polygons.
//!
//! With `x'` the projection of `x` onto the polygon plane and `h` the height,
//! the polygon is a signed fan of triangles `(x', v_k, v_k+1)`. The radial
//! integral has the closed form `((R^2 + h^2)^(g/2) - |h|^g) / g` with
//! `g = alpha - 1`; the angle is integrated by Gauss-Legendre in an
//! `asinh` variable along each edge, split at the foot of the perpendicular.

use std::sync::OnceLock;

use crate::quadrature::GaussLegendre;
use crate::Point3;

const NODES: usize = 10;

fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(NODES))
}

/// `int_P |x - y|^(alpha - 3) dA_y` over the convex polygon `vertices`
/// (counter-clockwise about `normal`, a unit vector).
pub fn polygon_kernel_integral(vertices: &[Point3], normal: &Point3, x: &Point3, alpha: f64) -> f64 {
    let g = alpha - 1.0;
    let h = (x - vertices[0]).dot(normal);
    let xp = x - normal * h;
    let hg = if h == 0.0 { 0.0 } else { h.abs().powf(g) };
    let h2 = h * h;
    let radial = |r2: f64| {
        let q = r2 + h2;
        let p = if g == 1.0 {
            q.sqrt()
        } else if g == 0.5 {
            q.sqrt().sqrt()
        } else {
            q.powf(0.5 * g)
        };
        (p - hg) / g
    };
    let scale = vertices
        .iter()
        .zip(vertices.iter().cycle().skip(1))
        .map(|(a, b)| (b - a).norm())
        .fold(0.0, f64::max);
    let gl = rule();
    let mut total = 0.0;
    for (k, a) in vertices.iter().enumerate() {
        let b = &vertices[(k + 1) % vertices.len()];
        let e = b - a;
        let len = e.norm();
        let ra = a - xp;
        let cross = ra.cross(&e);
        let d = cross.norm() / len;
        if d <= 1e-13 * scale {
            continue;
        }
        let sign = cross.dot(normal).signum();
        let t0 = -ra.dot(&e) / len;
        // Edge position relative to the foot is d sinh(s): dphi = ds / cosh(s)
        // and R = d cosh(s).
        let s_a = (-t0 / d).asinh();
        let s_b = ((len - t0) / d).asinh();
        let mut edge_sum = 0.0;
        let mut piece = |lo: f64, hi: f64| {
            for (s, w) in gl.mapped(lo, hi) {
                let c = s.cosh();
                edge_sum += w * radial(d * d * c * c) / c;
            }
        };
        if s_a < 0.0 && s_b > 0.0 {
            piece(s_a, 0.0);
            piece(0.0, s_b);
        } else {
            piece(s_a, s_b);
        }
        total += sign * edge_sum;
    }
    total
}

/// `int_C |x - y|^(alpha - 3) dy` over the axis-aligned cube with the given
/// center and edge, for any `x`.
///
/// Uses `div_y((y - x) |y - x|^(alpha - 3)) = alpha |y - x|^(alpha - 3)`,
/// which turns the volume integral into face integrals weighted by the
/// signed distance from `x` to each face plane.
pub fn cube_kernel_integral(center: &Point3, edge: f64, x: &Point3, alpha: f64) -> f64 {
    let half = 0.5 * edge;
    let mut total = 0.0;
    for axis in 0..3 {
        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
        for side in [-1.0, 1.0] {
            let mut normal = Point3::zeros();
            normal[axis] = side;
            let mut face_center = *center;
            face_center[axis] += side * half;
            let h = (face_center - x).dot(&normal);
            if h == 0.0 {
                continue;
            }
            let corner = |su: f64, sv: f64| {
                let mut p = face_center;
                p[u] += su * half;
                p[v] += sv * half;
                p
            };
            // Counter-clockwise about the outward normal.
            let mut quad = [corner(-1.0, -1.0), corner(1.0, -1.0), corner(1.0, 1.0), corner(-1.0, 1.0)];
            if side < 0.0 {
                quad.reverse();
            }
            total += h * polygon_kernel_integral(&quad, &normal, x, alpha);
        }
    }
    total / alpha
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_adaptive;

    fn square() -> Vec<Point3> {
        vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(1.0, 1.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ]
    }

    // Iterated adaptive Gauss-Kronrod over the unit square.
    fn square_oracle(x: Point3, alpha: f64) -> f64 {
        let inner = |s: f64| {
            integrate_adaptive(
                |t: f64| {
                    let r2 = (s - x.x).powi(2) + (t - x.y).powi(2) + x.z * x.z;
                    r2.powf(0.5 * (alpha - 3.0))
                },
                0.0,
                1.0,
                1e-12,
                1e-12,
            )
            .value
        };
        integrate_adaptive(inner, 0.0, 1.0, 1e-11, 1e-11).value
    }

    #[test]
    fn square_matches_iterated_quadrature() {
        let n = Point3::z();
        for (x, alpha) in [
            (Point3::new(0.3, 0.6, 0.2), 1.5),
            (Point3::new(1.4, -0.3, 0.05), 1.25),
            (Point3::new(0.5, 0.5, -1.0), 2.0),
            (Point3::new(0.2, 0.9, 0.01), 1.75),
        ] {
            let got = polygon_kernel_integral(&square(), &n, &x, alpha);
            let want = square_oracle(x, alpha);
            assert!((got - want).abs() < 1e-9 * want, "{x:?} {alpha}: {got} vs {want}");
        }
    }

    #[test]
    fn in_plane_vertex_of_right_triangle() {
        let tri = [Point3::zeros(), Point3::x(), Point3::y()];
        let got = polygon_kernel_integral(&tri, &Point3::z(), &Point3::zeros(), 2.0);
        let want = 2f64.sqrt() * (1.0 + 2f64.sqrt()).ln();
        assert!((got - want).abs() < 1e-10);
    }

    // Corner integrals over the unit cube from spherical coordinates (mpmath).
    const CORNER: [(f64, f64); 3] = [
        (2.0, 1.1900386819897767),
        (1.5, 1.4217767923282147),
        (1.25, 1.6174189542238862),
    ];

    #[test]
    fn cube_corner_and_center() {
        let c = Point3::new(0.5, 0.5, 0.5);
        for (alpha, corner) in CORNER {
            let at_corner = cube_kernel_integral(&c, 1.0, &Point3::zeros(), alpha);
            assert!((at_corner - corner).abs() < 1e-9, "{alpha}: {at_corner}");
            // Eight half-size cubes meet at the center.
            let want = 8.0 * 0.5f64.powf(alpha) * corner;
            let at_center = cube_kernel_integral(&c, 1.0, &c, alpha);
            assert!((at_center - want).abs() < 1e-9 * want, "{alpha}: {at_center}");
        }
    }

    #[test]
    fn cube_far_field_and_interior_point() {
        let c = Point3::new(0.1, -0.2, 0.3);
        let x = Point3::new(40.0, 3.0, -7.0);
        let got = cube_kernel_integral(&c, 0.5, &x, 1.5);
        let want = 0.125 * (x - c).norm().powf(-1.5);
        assert!((got - want).abs() < 1e-4 * want);
        // Off-centre interior point against iterated adaptive quadrature.
        let y = Point3::new(0.2, 0.1, -0.15);
        let cube = cube_kernel_integral(&Point3::zeros(), 1.0, &y, 2.0);
        let brute = {
            let f = |p: Point3| 1.0 / (p - y).norm();
            let third = |a: f64, b: f64| {
                integrate_adaptive(
                    |z: f64| f(Point3::new(a, b, z)),
                    -0.5,
                    0.5,
                    1e-10,
                    1e-10,
                )
                .value
            };
            let second = |a: f64| integrate_adaptive(|b| third(a, b), -0.5, 0.5, 1e-9, 1e-9).value;
            integrate_adaptive(second, -0.5, 0.5, 1e-8, 1e-8).value
        };
        assert!((cube - brute).abs() < 1e-5 * brute, "{cube} {brute}");
    }

    #[test]
    fn newton_disk_like_limit_far_away() {
        // Far from the polygon the integral approaches area * r^(alpha - 3).
        let x = Point3::new(0.5, 0.5, 200.0);
        let got = polygon_kernel_integral(&square(), &Point3::z(), &x, 1.5);
        let want = 200f64.powf(-1.5);
        assert!((got - want).abs() < 1e-4 * want);
    }
}
