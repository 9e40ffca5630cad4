//! Closed triangulated surfaces, the carrier of every boundary quadrature.

mod icosphere;
mod inside;
mod off;
pub(crate) mod panel_quadrature;

use std::collections::HashMap;

use crate::error::{MeshError, Result};
use crate::Point3;

pub use inside::ColumnClassifier;
pub use panel_quadrature::{panel_kernel_integral, regular_panel_integral, singular_panel_quadrature};

/// Flat triangular panel with cached geometry.
#[derive(Clone, Debug)]
pub struct Panel {
    pub vertices: [Point3; 3],
    pub area: f64,
    /// Outward unit normal (follows the vertex winding).
    pub normal: Point3,
    pub centroid: Point3,
    /// Longest edge.
    pub diameter: f64,
}

impl Panel {
    pub fn new(a: Point3, b: Point3, c: Point3) -> Self {
        let cross = (b - a).cross(&(c - a));
        let norm = cross.norm();
        let normal = if norm > 0.0 { cross / norm } else { Point3::zeros() };
        let diameter = (b - a).norm().max((c - b).norm()).max((a - c).norm());
        Self {
            vertices: [a, b, c],
            area: 0.5 * norm,
            normal,
            centroid: (a + b + c) / 3.0,
            diameter,
        }
    }

    /// Point with barycentric coordinates `l`.
    #[inline]
    pub fn point(&self, l: &[f64; 3]) -> Point3 {
        self.vertices[0] * l[0] + self.vertices[1] * l[1] + self.vertices[2] * l[2]
    }

    /// Barycentric coordinates of the orthogonal projection of `x` onto the
    /// panel plane, together with the signed height above the plane.
    pub fn project(&self, x: &Point3) -> ([f64; 3], f64) {
        let [a, b, c] = &self.vertices;
        let height = (x - a).dot(&self.normal);
        let p = x - self.normal * height;
        let v0 = b - a;
        let v1 = c - a;
        let v2 = p - a;
        let d00 = v0.dot(&v0);
        let d01 = v0.dot(&v1);
        let d11 = v1.dot(&v1);
        let d20 = v2.dot(&v0);
        let d21 = v2.dot(&v1);
        let denom = d00 * d11 - d01 * d01;
        let l1 = (d11 * d20 - d01 * d21) / denom;
        let l2 = (d00 * d21 - d01 * d20) / denom;
        ([1.0 - l1 - l2, l1, l2], height)
    }

    /// Whether `x` lies on the closed panel, up to `tol` relative to the
    /// panel diameter.
    pub fn contains_point(&self, x: &Point3, tol: f64) -> bool {
        let (l, h) = self.project(x);
        h.abs() <= tol * self.diameter && l.iter().all(|&li| li >= -tol)
    }

    /// Midpoint subdivision into four congruent children.
    pub fn subdivide(&self) -> [Panel; 4] {
        let [a, b, c] = self.vertices;
        let ab = 0.5 * (a + b);
        let bc = 0.5 * (b + c);
        let ca = 0.5 * (c + a);
        [
            Panel::new(a, ab, ca),
            Panel::new(ab, b, bc),
            Panel::new(ca, bc, c),
            Panel::new(bc, ca, ab),
        ]
    }
}

/// Closed, watertight, outward-oriented triangulated surface.
#[derive(Clone, Debug)]
pub struct TriangulatedSurface {
    vertices: Vec<Point3>,
    triangles: Vec<[usize; 3]>,
    panels: Vec<Panel>,
    total_area: f64,
}

impl TriangulatedSurface {
    /// Builds a surface and checks every invariant. A mesh that is
    /// consistently oriented but points inward is flipped.
    pub fn from_parts(vertices: Vec<Point3>, mut triangles: Vec<[usize; 3]>) -> Result<Self> {
        if vertices.is_empty() || triangles.is_empty() {
            return Err(MeshError::Empty.into());
        }
        for (t, tri) in triangles.iter().enumerate() {
            for &i in tri {
                if i >= vertices.len() {
                    return Err(MeshError::IndexOutOfRange {
                        triangle: t,
                        index: i,
                        count: vertices.len(),
                    }
                    .into());
                }
            }
        }
        check_edges(&triangles)?;

        let volume = signed_volume(&vertices, &triangles);
        if volume < 0.0 {
            for t in &mut triangles {
                t.swap(1, 2);
            }
        }
        let panels: Vec<Panel> = triangles
            .iter()
            .map(|t| Panel::new(vertices[t[0]], vertices[t[1]], vertices[t[2]]))
            .collect();
        let total_area: f64 = panels.iter().map(|p| p.area).sum();
        for (t, p) in panels.iter().enumerate() {
            if !(p.area > 1e-14 * total_area) {
                return Err(MeshError::Degenerate {
                    triangle: t,
                    area: p.area,
                }
                .into());
            }
        }
        if volume.abs() <= 1e-12 * total_area.powf(1.5) {
            return Err(MeshError::ZeroVolume.into());
        }
        Ok(Self {
            vertices,
            triangles,
            panels,
            total_area,
        })
    }

    /// Icosphere of the given radius: the icosahedron subdivided `level`
    /// times with vertices projected to the sphere. Has `20 * 4^level` panels.
    pub fn sphere(radius: f64, level: u32) -> Result<Self> {
        icosphere::make_sphere(radius, level)
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn panels(&self) -> &[Panel] {
        &self.panels
    }

    pub fn len(&self) -> usize {
        self.panels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.panels.is_empty()
    }

    pub fn total_area(&self) -> f64 {
        self.total_area
    }

    pub fn areas(&self) -> Vec<f64> {
        self.panels.iter().map(|p| p.area).collect()
    }

    /// Collocation points (panel centroids).
    pub fn collocation_points(&self) -> Vec<Point3> {
        self.panels.iter().map(|p| p.centroid).collect()
    }

    pub fn signed_volume(&self) -> f64 {
        signed_volume(&self.vertices, &self.triangles)
    }

    pub fn edge_count(&self) -> usize {
        3 * self.triangles.len() / 2
    }

    /// V - E + F; equals 2 for sphere topology.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.triangles.len() as i64
    }

    pub fn max_panel_diameter(&self) -> f64 {
        self.panels.iter().map(|p| p.diameter).fold(0.0, f64::max)
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Point3, Point3) {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    /// Area-weighted centroid of the surface.
    pub fn center(&self) -> Point3 {
        self.panels
            .iter()
            .fold(Point3::zeros(), |acc, p| acc + p.centroid * p.area)
            / self.total_area
    }

    /// Largest distance from [`center`](Self::center) to a vertex.
    pub fn radius(&self) -> f64 {
        let c = self.center();
        self.vertices.iter().map(|v| (v - c).norm()).fold(0.0, f64::max)
    }

    /// Copy scaled about the origin by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let vertices = self.vertices.iter().map(|v| v * factor).collect();
        Self::from_parts(vertices, self.triangles.clone())
    }

    /// Generalised winding number: 1 inside, 0 outside.
    pub fn winding_number(&self, x: &Point3) -> f64 {
        inside::winding_number(&self.panels, x)
    }

    /// Whether `x` lies in the bounded component enclosed by the surface.
    pub fn contains(&self, x: &Point3) -> bool {
        self.winding_number(x) > 0.5
    }

    /// Euclidean distance from `x` to the surface.
    pub fn distance(&self, x: &Point3) -> f64 {
        self.panels
            .iter()
            .map(|p| point_triangle_distance(x, p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Index of the panel nearest to `x` and the distance to it.
    pub fn nearest_panel(&self, x: &Point3) -> (usize, f64) {
        self.panels
            .iter()
            .enumerate()
            .map(|(i, p)| (i, point_triangle_distance(x, p)))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
    }
}

fn signed_volume(vertices: &[Point3], triangles: &[[usize; 3]]) -> f64 {
    triangles
        .iter()
        .map(|t| {
            vertices[t[0]].dot(&vertices[t[1]].cross(&vertices[t[2]]))
        })
        .sum::<f64>()
        / 6.0
}

fn check_edges(triangles: &[[usize; 3]]) -> std::result::Result<(), MeshError> {
    // Undirected edge -> (uses, uses in the (min, max) direction).
    let mut edges: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    for (t, tri) in triangles.iter().enumerate() {
        if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
            return Err(MeshError::Degenerate {
                triangle: t,
                area: 0.0,
            });
        }
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let key = (a.min(b), a.max(b));
            let entry = edges.entry(key).or_insert((0, 0));
            entry.0 += 1;
            if a < b {
                entry.1 += 1;
            }
        }
    }
    let mut keys: Vec<_> = edges.keys().copied().collect();
    keys.sort_unstable();
    for key in &keys {
        let (uses, forward) = edges[key];
        if uses != 2 {
            return Err(MeshError::NotWatertight(key.0, key.1, uses));
        }
        if forward != 1 {
            return Err(MeshError::InconsistentOrientation(key.0, key.1));
        }
    }
    Ok(())
}

/// Distance from a point to a closed triangle.
pub fn point_triangle_distance(x: &Point3, panel: &Panel) -> f64 {
    let [a, b, c] = &panel.vertices;
    // Ericson, "Real-Time Collision Detection", closest point on triangle.
    let ab = b - a;
    let ac = c - a;
    let ap = x - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return ap.norm();
    }
    let bp = x - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return bp.norm();
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (x - (a + ab * v)).norm();
    }
    let cp = x - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return cp.norm();
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (x - (a + ac * w)).norm();
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (x - (b + (c - b) * w)).norm();
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (x - (a + ab * v + ac * w)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn octahedron() -> (Vec<Point3>, Vec<[usize; 3]>) {
        let v = vec![
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(-1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, -1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
            Point3::new(0.0, 0.0, -1.0),
        ];
        let t = vec![
            [0, 2, 4],
            [2, 1, 4],
            [1, 3, 4],
            [3, 0, 4],
            [2, 0, 5],
            [1, 2, 5],
            [3, 1, 5],
            [0, 3, 5],
        ];
        (v, t)
    }

    #[test]
    fn octahedron_is_valid() {
        let (v, t) = octahedron();
        let s = TriangulatedSurface::from_parts(v, t).unwrap();
        assert_eq!(s.len(), 8);
        assert_eq!(s.euler_characteristic(), 2);
        assert!((s.signed_volume() - 4.0 / 3.0).abs() < 1e-14);
        for p in s.panels() {
            assert!(p.normal.dot(&p.centroid) > 0.0);
        }
    }

    #[test]
    fn inward_mesh_is_flipped() {
        let (v, mut t) = octahedron();
        for tri in &mut t {
            tri.swap(0, 1);
        }
        let s = TriangulatedSurface::from_parts(v, t).unwrap();
        assert!(s.signed_volume() > 0.0);
        assert!(s.panels().iter().all(|p| p.normal.dot(&p.centroid) > 0.0));
    }

    #[test]
    fn one_flipped_triangle_is_rejected() {
        let (v, mut t) = octahedron();
        t[3].swap(0, 1);
        let err = TriangulatedSurface::from_parts(v, t).unwrap_err();
        assert!(matches!(
            err,
            crate::Error::Mesh(MeshError::InconsistentOrientation(..))
        ));
    }

    #[test]
    fn open_and_overused_edges_are_rejected() {
        let (v, mut t) = octahedron();
        t.pop();
        assert!(matches!(
            TriangulatedSurface::from_parts(v.clone(), t.clone()),
            Err(crate::Error::Mesh(MeshError::NotWatertight(_, _, 1)))
        ));
        let (v, mut t) = octahedron();
        t.push([0, 2, 3]);
        assert!(matches!(
            TriangulatedSurface::from_parts(v, t),
            Err(crate::Error::Mesh(MeshError::NotWatertight(_, _, 3)))
        ));
    }

    #[test]
    fn degenerate_triangle_is_rejected() {
        let (mut v, t) = octahedron();
        // Collapse the top vertex into the equator plane: four zero-area panels
        // would also make the volume vanish, so only squash slightly.
        v[4] = Point3::new(1e-20, 0.0, 0.0) + v[0];
        assert!(TriangulatedSurface::from_parts(v, t).is_err());
    }

    #[test]
    fn winding_and_distance() {
        let s = TriangulatedSurface::sphere(1.0, 2).unwrap();
        assert!(s.contains(&Point3::zeros()));
        assert!(s.contains(&Point3::new(0.5, 0.3, -0.2)));
        assert!(!s.contains(&Point3::new(1.5, 0.0, 0.0)));
        assert!(!s.contains(&Point3::new(0.0, 0.0, 10.0)));
        let d = s.distance(&Point3::new(0.0, 0.0, 3.0));
        assert!((d - 2.0).abs() < 0.05);
        let area = s.total_area();
        assert!((area - 4.0 * PI).abs() / (4.0 * PI) < 0.05);
    }

    #[test]
    fn panel_projection() {
        let p = Panel::new(
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        );
        let (l, h) = p.project(&Point3::new(0.25, 0.25, 2.0));
        assert!((h - 2.0).abs() < 1e-15);
        assert!((l[0] - 0.5).abs() < 1e-15 && (l[1] - 0.25).abs() < 1e-15);
        assert!(p.contains_point(&p.centroid, 1e-12));
        assert!(!p.contains_point(&Point3::new(0.6, 0.6, 0.0), 1e-12));
        let kids = p.subdivide();
        let a: f64 = kids.iter().map(|k| k.area).sum();
        assert!((a - p.area).abs() < 1e-15);
        assert!(kids.iter().all(|k| k.normal.dot(&p.normal) > 0.999));
    }
}
