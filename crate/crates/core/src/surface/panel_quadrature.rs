//! Kernel integrals over flat panels: a Duffy-type node set for the weakly
//! singular case, fixed triangle rules or the polar integral otherwise.

use std::sync::OnceLock;

use super::Panel;
use crate::error::{Error, Result};
use crate::kernel::{FractionalOrder, RieszKernel3};
use crate::polar::polygon_kernel_integral;
use crate::quadrature::{GaussLegendre, TriangleRule};
use crate::Point3;

const ANGULAR_NODES: usize = 16;
const RADIAL_NODES: usize = 6;
/// Relative tolerance for deciding that a point lies on a panel.
const ON_PANEL_TOL: f64 = 1e-10;
/// Points closer than this many diameters use the polar integral.
const NEAR_RATIO: f64 = 2.0;
const CENTROID_RATIO: f64 = 15.0;
const THREE_POINT_RATIO: f64 = 6.0;

fn angular_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(ANGULAR_NODES))
}

fn radial_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(RADIAL_NODES))
}

fn rules() -> &'static [TriangleRule; 3] {
    static RULES: OnceLock<[TriangleRule; 3]> = OnceLock::new();
    RULES.get_or_init(|| {
        [
            TriangleRule::centroid(),
            TriangleRule::three_point(),
            TriangleRule::seven_point(),
        ]
    })
}

/// Nodes and weights for `int_T |x - y|^(alpha - 3) ds_y` with `x` on the
/// panel: `sum w_i |x - node_i|^(alpha - 3)` approximates the integral.
///
/// The panel is split into sub-triangles with apex `x`. On each,
/// `y = x + s (a - x) + s t (b - a)` and `s = u^(1 / (alpha - 1))`, which turns
/// the radial factor `s^(alpha - 2)` into a constant; Gauss-Legendre rules run
/// in `u` and along the opposite edge `t`.
pub fn singular_panel_quadrature(
    panel: &Panel,
    x: &Point3,
    alpha: FractionalOrder,
) -> Result<Vec<(Point3, f64)>> {
    check_on_panel(panel, x)?;
    let mut out = Vec::with_capacity(3 * 2 * ANGULAR_NODES * RADIAL_NODES);
    for_each_singular_node(panel, x, alpha.value(), |node, w| out.push((node, w)));
    Ok(out)
}

fn check_on_panel(panel: &Panel, x: &Point3) -> Result<()> {
    if panel.contains_point(x, ON_PANEL_TOL) {
        Ok(())
    } else {
        let (l, h) = panel.project(x);
        let outside = l.iter().fold(0.0f64, |m, &li| m.max(-li)) * panel.diameter;
        Err(Error::PointOutsidePanel {
            distance: h.abs().max(outside),
        })
    }
}

fn for_each_singular_node(panel: &Panel, x: &Point3, alpha: f64, mut emit: impl FnMut(Point3, f64)) {
    let p = 1.0 / (alpha - 1.0);
    let ang = angular_rule();
    let rad = radial_rule();
    for k in 0..3 {
        let a = panel.vertices[k];
        let b = panel.vertices[(k + 1) % 3];
        let sub_area = 0.5 * (a - x).cross(&(b - x)).norm();
        if sub_area <= 1e-14 * panel.area {
            continue;
        }
        let edge = b - a;
        // Split the edge at the foot of the perpendicular from x, where the
        // integrand along t peaks.
        let t_foot = ((x - a).dot(&edge) / edge.norm_squared()).clamp(0.0, 1.0);
        let pieces: &[(f64, f64)] = if t_foot > 1e-3 && t_foot < 1.0 - 1e-3 {
            &[(0.0, t_foot), (t_foot, 1.0)][..]
        } else {
            &[(0.0, 1.0)][..]
        };
        for &(t0, t1) in pieces {
            for (t, wt) in ang.mapped(t0, t1) {
                let e = a - x + edge * t;
                for (u, wu) in rad.mapped(0.0, 1.0) {
                    let s = u.powf(p);
                    let jac = 2.0 * sub_area * s * p * u.powf(p - 1.0);
                    emit(x + e * s, jac * wt * wu);
                }
            }
        }
    }
}

/// `int_T |x - y|^(alpha - 3) ds_y` for `x` off the panel, without the kernel
/// constant. The rule is picked from the distance-to-diameter ratio; close
/// points use the polar integral about the projected point.
pub fn regular_panel_integral(panel: &Panel, x: &Point3, kernel: &RieszKernel3) -> f64 {
    let d2 = (x - panel.centroid).norm_squared();
    let diam2 = panel.diameter * panel.diameter;
    let rules = rules();
    let rule = if d2 > CENTROID_RATIO * CENTROID_RATIO * diam2 {
        &rules[0]
    } else if d2 > THREE_POINT_RATIO * THREE_POINT_RATIO * diam2 {
        &rules[1]
    } else if d2 > NEAR_RATIO * NEAR_RATIO * diam2 {
        &rules[2]
    } else {
        return polygon_kernel_integral(&panel.vertices, &panel.normal, x, kernel.alpha().value());
    };
    let mut sum = 0.0;
    for (l, w) in rule.points.iter().zip(&rule.weights) {
        let y = panel.point(l);
        sum += w * kernel.profile_sq((x - y).norm_squared());
    }
    sum * panel.area
}

/// `int_T |x - y|^(alpha - 3) ds_y` for any `x`, including points on the panel.
pub fn panel_kernel_integral(panel: &Panel, x: &Point3, kernel: &RieszKernel3) -> f64 {
    regular_panel_integral(panel, x, kernel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_adaptive;
    use std::f64::consts::SQRT_2;

    fn singular_integral(panel: &Panel, x: &Point3, kernel: &RieszKernel3) -> f64 {
        panel_kernel_integral(panel, x, kernel)
    }

    fn kernel(a: f64) -> RieszKernel3 {
        RieszKernel3::new(FractionalOrder::three_d(a).unwrap()).unwrap()
    }

    fn right_triangle() -> Panel {
        Panel::new(
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        )
    }

    fn equilateral() -> Panel {
        Panel::new(
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.5, 0.75f64.sqrt(), 0.0),
        )
    }

    fn sum(nodes: &[(Point3, f64)], x: &Point3, a: f64) -> f64 {
        nodes.iter().map(|(y, w)| w * (x - y).norm().powf(a - 3.0)).sum()
    }

    #[test]
    fn right_angle_vertex_wedge() {
        // int_0^{pi/2} dtheta / (cos + sin) = sqrt(2) ln(1 + sqrt(2)).
        let exact = SQRT_2 * (1.0 + SQRT_2).ln();
        let p = right_triangle();
        let x = p.vertices[0];
        let alpha = FractionalOrder::three_d(2.0).unwrap();
        let nodes = singular_panel_quadrature(&p, &x, alpha).unwrap();
        let got = sum(&nodes, &x, 2.0);
        assert!((got - exact).abs() < 1e-6 * exact, "{got} vs {exact}");
    }

    // Polar reduction for a vertex apex: int R(theta)^(alpha-1)/(alpha-1) dtheta,
    // integrated adaptively. Independent of the Duffy tensor rule.
    fn vertex_polar_oracle(a: f64) -> f64 {
        integrate_adaptive(
            |th: f64| (1.0 / (th.cos() + th.sin())).powf(a - 1.0) / (a - 1.0),
            0.0,
            std::f64::consts::FRAC_PI_2,
            1e-13,
            1e-13,
        )
        .value
    }

    #[test]
    fn right_angle_vertex_general_alpha() {
        let p = right_triangle();
        let x = p.vertices[0];
        for a in [1.25, 1.5, 1.75] {
            let nodes = singular_panel_quadrature(&p, &x, FractionalOrder::three_d(a).unwrap()).unwrap();
            let got = sum(&nodes, &x, a);
            let exact = vertex_polar_oracle(a);
            assert!((got - exact).abs() < 1e-6 * exact, "alpha {a}: {got} vs {exact}");
        }
    }

    // Brute-force oracle for the equilateral centroid: the centre child of a
    // midpoint subdivision is similar to the parent with the same centroid, so
    // I = regular(outer three children) + 2^{-(alpha-1)} I. The outer
    // children are integrated by adaptive subdivision with a 7-point rule.
    fn adaptive_triangle(p: &Panel, x: &Point3, a: f64, tol: f64, depth: u32) -> f64 {
        let rule = TriangleRule::seven_point();
        let one = |q: &Panel| -> f64 {
            rule.points
                .iter()
                .zip(&rule.weights)
                .map(|(l, w)| w * (x - q.point(l)).norm().powf(a - 3.0))
                .sum::<f64>()
                * q.area
        };
        let coarse = one(p);
        let kids = p.subdivide();
        let fine: f64 = kids.iter().map(one).sum();
        if (fine - coarse).abs() < tol || depth > 14 {
            return fine;
        }
        kids.iter()
            .map(|k| adaptive_triangle(k, x, a, tol / 4.0, depth + 1))
            .sum()
    }

    #[test]
    fn equilateral_centroid_matches_adaptive_oracle() {
        let a = 1.5;
        let p = equilateral();
        let x = p.centroid;
        let kids = p.subdivide();
        // kids[3] is the centre child.
        let outer: f64 = kids[..3]
            .iter()
            .map(|k| adaptive_triangle(k, &x, a, 1e-10, 0))
            .sum();
        let oracle = outer / (1.0 - 2f64.powf(-(a - 1.0)));
        let nodes = singular_panel_quadrature(&p, &x, FractionalOrder::three_d(a).unwrap()).unwrap();
        let got = sum(&nodes, &x, a);
        assert!((got - oracle).abs() < 1e-5 * oracle, "{got} vs {oracle}");
    }

    // Apex fan with adaptive Gauss-Kronrod in the angle: for the sub-triangle
    // (x, a, b), int R(theta)^(alpha-1) / (alpha-1) dtheta.
    fn adaptive_fan(p: &Panel, x: &Point3, a: f64) -> f64 {
        (0..3)
            .map(|k| {
                let va = p.vertices[k];
                let vb = p.vertices[(k + 1) % 3];
                let (ea, eb) = (va - x, vb - x);
                let total = ea.angle(&eb);
                if total < 1e-14 {
                    return 0.0;
                }
                let u = ea.normalize();
                let w = (eb - u * eb.dot(&u)).normalize();
                let edge = vb - va;
                integrate_adaptive(
                    |th: f64| {
                        let dir = u * th.cos() + w * th.sin();
                        // Ray x + r dir meets the edge va + t edge.
                        let m = nalgebra::Matrix2::new(dir.dot(&dir), -dir.dot(&edge), dir.dot(&edge), -edge.dot(&edge));
                        let rhs = nalgebra::Vector2::new(dir.dot(&ea), edge.dot(&ea));
                        let r = m.lu().solve(&rhs).unwrap()[0];
                        r.powf(a - 1.0) / (a - 1.0)
                    },
                    0.0,
                    total,
                    1e-13,
                    1e-13,
                )
                .value
            })
            .sum()
    }

    #[test]
    fn polar_integral_matches_adaptive_fan() {
        let p = equilateral();
        for a in [1.25, 2.0] {
            let k = kernel(a);
            for l in [[0.2, 0.3, 0.5], [0.9, 0.05, 0.05], [0.98, 0.01, 0.01]] {
                let x = p.point(&l);
                let want = adaptive_fan(&p, &x, a);
                let got = singular_integral(&p, &x, &k);
                assert!((got - want).abs() < 1e-7 * want, "{a} {l:?}: {got} {want}");
            }
        }
    }

    #[test]
    fn duffy_nodes_agree_with_polar_integral() {
        let p = equilateral();
        for a in [1.25, 1.5, 1.75, 2.0] {
            let k = kernel(a);
            for l in [[0.2, 0.3, 0.5], [0.9, 0.05, 0.05], [0.5, 0.5, 0.0]] {
                let x = p.point(&l);
                let nodes = singular_panel_quadrature(&p, &x, k.alpha()).unwrap();
                let duffy = sum(&nodes, &x, a);
                let polar = singular_integral(&p, &x, &k);
                assert!((duffy - polar).abs() < 1e-4 * polar, "{a} {l:?}: {duffy} {polar}");
            }
        }
    }

    #[test]
    fn continuous_in_alpha_near_two() {
        let p = equilateral();
        let x = p.centroid;
        let at = |a: f64| singular_integral(&p, &x, &kernel(a));
        let v2 = at(2.0);
        for eps in [1e-3, 1e-5, 1e-7] {
            assert!((at(2.0 - eps) - v2).abs() < 10.0 * eps * v2);
        }
    }

    #[test]
    fn scaling_covariance() {
        let a = 1.5;
        let p = equilateral();
        let s = 3.0;
        let q = Panel::new(p.vertices[0] * s, p.vertices[1] * s, p.vertices[2] * s);
        let k = kernel(a);
        let v1 = singular_integral(&p, &p.centroid, &k);
        let v2 = singular_integral(&q, &q.centroid, &k);
        assert!((v2 - s.powf(a - 1.0) * v1).abs() < 1e-12 * v2);
    }

    #[test]
    fn outside_point_is_rejected() {
        let p = right_triangle();
        let alpha = FractionalOrder::three_d(1.5).unwrap();
        assert!(matches!(
            singular_panel_quadrature(&p, &Point3::new(0.8, 0.8, 0.0), alpha),
            Err(Error::PointOutsidePanel { .. })
        ));
        assert!(singular_panel_quadrature(&p, &Point3::new(0.2, 0.2, 0.1), alpha).is_err());
    }

    #[test]
    fn regular_rule_converges_for_distant_points() {
        let p = equilateral();
        let k = kernel(1.5);
        let x = Point3::new(0.3, 0.2, 0.4);
        let oracle = adaptive_triangle(&p, &x, 1.5, 1e-12, 0);
        let got = regular_panel_integral(&p, &x, &k);
        assert!((got - oracle).abs() < 1e-5 * oracle, "{got} vs {oracle}");
        let far = Point3::new(3.0, -2.0, 5.0);
        let oracle = adaptive_triangle(&p, &far, 1.5, 1e-14, 0);
        let got = regular_panel_integral(&p, &far, &k);
        assert!((got - oracle).abs() < 1e-3 * oracle);
    }

    #[test]
    fn seven_point_error_falls_with_refinement() {
        // Smooth integrand: error of the degree-5 rule drops ~h^6 per halving.
        let p = equilateral();
        let x = Point3::new(0.5, 0.3, 1.0);
        let rule = TriangleRule::seven_point();
        let f = |q: &Panel| -> f64 {
            rule.points
                .iter()
                .zip(&rule.weights)
                .map(|(l, w)| w * (x - q.point(l)).norm().powf(-1.5))
                .sum::<f64>()
                * q.area
        };
        let exact = adaptive_triangle(&p, &x, 1.5, 1e-15, 0);
        let e0 = (f(&p) - exact).abs();
        let e1 = (p.subdivide().iter().map(f).sum::<f64>() - exact).abs();
        assert!(e1 < e0 / 16.0, "{e0} {e1}");
    }
}
