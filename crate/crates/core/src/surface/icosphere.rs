use std::collections::HashMap;

use super::TriangulatedSurface;
use crate::error::{Error, Result};
use crate::Point3;

pub(super) fn make_sphere(radius: f64, level: u32) -> Result<TriangulatedSurface> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "sphere radius must be positive, got {radius}"
        )));
    }
    if level > 8 {
        return Err(Error::InvalidArgument(format!(
            "refinement level {level} would produce more than 1.3M panels"
        )));
    }
    let phi = 0.5 * (1.0 + 5f64.sqrt());
    let mut vertices: Vec<Point3> = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Point3::new(x, y, z).normalize())
    .collect();
    let mut triangles: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..level {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Point3>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                vertices.push((0.5 * (vertices[a] + vertices[b])).normalize());
                vertices.len() - 1
            })
        };
        let mut next = Vec::with_capacity(4 * triangles.len());
        for &[a, b, c] in &triangles {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        triangles = next;
    }

    for v in &mut vertices {
        *v *= radius;
    }
    TriangulatedSurface::from_parts(vertices, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn icosahedron() {
        let s = make_sphere(1.0, 0).unwrap();
        assert_eq!(s.vertices().len(), 12);
        assert_eq!(s.len(), 20);
        // Regular icosahedron inscribed in the unit sphere.
        let edge = 4.0 / (10.0 + 2.0 * 5f64.sqrt()).sqrt();
        let exact = 5.0 * 3f64.sqrt() * edge * edge;
        assert!((s.total_area() - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn refinement_counts_and_invariants() {
        for level in 0..5 {
            let s = make_sphere(1.0, level).unwrap();
            assert_eq!(s.len(), 20 * 4usize.pow(level));
            assert_eq!(s.euler_characteristic(), 2);
            assert!(s.signed_volume() > 0.0);
            for v in s.vertices() {
                assert!((v.norm() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn level_four_area() {
        let s = make_sphere(1.0, 4).unwrap();
        assert_eq!(s.len(), 5120);
        let deficit = (4.0 * PI - s.total_area()) / (4.0 * PI);
        assert!(deficit > 0.0 && deficit < 2e-3);
    }

    #[test]
    fn area_scales_with_radius_squared() {
        let a1 = make_sphere(1.0, 3).unwrap().total_area();
        let a2 = make_sphere(2.0, 3).unwrap().total_area();
        assert!((a2 - 4.0 * a1).abs() < 1e-12 * a2);
    }

    #[test]
    fn rejects_bad_radius() {
        assert!(make_sphere(0.0, 1).is_err());
        assert!(make_sphere(-1.0, 1).is_err());
    }
}
