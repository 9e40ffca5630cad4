//! Inside/outside classification against a closed triangulated surface.

use super::{Panel, TriangulatedSurface};
use crate::Point3;

pub(super) fn winding_number(panels: &[Panel], x: &Point3) -> f64 {
    let mut total = 0.0;
    for p in panels {
        let a = p.vertices[0] - x;
        let b = p.vertices[1] - x;
        let c = p.vertices[2] - x;
        let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
        let num = a.dot(&b.cross(&c));
        let den = la * lb * lc + a.dot(&b) * lc + a.dot(&c) * lb + b.dot(&c) * la;
        total += 2.0 * num.atan2(den);
    }
    total / (4.0 * std::f64::consts::PI)
}

/// Inside test for many points sharing a rectilinear (y, z) lattice: one ray
/// per lattice column along +x, crossings sorted once and reused.
#[derive(Clone, Debug)]
pub struct ColumnClassifier {
    y0: f64,
    z0: f64,
    dy: f64,
    dz: f64,
    ny: usize,
    nz: usize,
    crossings: Vec<Vec<f64>>,
}

impl ColumnClassifier {
    /// Columns at `y = y0 + j dy`, `z = z0 + k dz` for `j < ny`, `k < nz`.
    pub fn new(
        surface: &TriangulatedSurface,
        (y0, dy, ny): (f64, f64, usize),
        (z0, dz, nz): (f64, f64, usize),
    ) -> Self {
        // Shift the rays off the lattice by an irrational fraction of the
        // spacing so they never graze a mesh edge or vertex exactly.
        let ey = dy * 1.234_567_890_1e-7 * std::f64::consts::SQRT_2;
        let ez = dz * 1.234_567_890_1e-7 * 3f64.sqrt();
        let mut crossings = vec![Vec::new(); ny * nz];
        for p in surface.panels() {
            let [a, b, c] = &p.vertices;
            let ymin = a.y.min(b.y).min(c.y);
            let ymax = a.y.max(b.y).max(c.y);
            let zmin = a.z.min(b.z).min(c.z);
            let zmax = a.z.max(b.z).max(c.z);
            let jlo = (((ymin - y0 - ey) / dy).floor().max(0.0)) as usize;
            let jhi = (((ymax - y0 - ey) / dy).ceil().max(0.0) as usize).min(ny);
            let klo = (((zmin - z0 - ez) / dz).floor().max(0.0)) as usize;
            let khi = (((zmax - z0 - ez) / dz).ceil().max(0.0) as usize).min(nz);
            for j in jlo..jhi {
                let y = y0 + j as f64 * dy + ey;
                for k in klo..khi {
                    let z = z0 + k as f64 * dz + ez;
                    if let Some(x) = ray_hit_x(a, b, c, y, z) {
                        crossings[j * nz + k].push(x);
                    }
                }
            }
        }
        for c in &mut crossings {
            c.sort_by(f64::total_cmp);
        }
        Self {
            y0,
            z0,
            dy,
            dz,
            ny,
            nz,
            crossings,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.ny, self.nz)
    }

    /// Whether the point `(x, y_j, z_k)` is enclosed by the surface.
    pub fn inside(&self, j: usize, k: usize, x: f64) -> bool {
        let c = &self.crossings[j * self.nz + k];
        c.partition_point(|&cx| cx < x) % 2 == 1
    }

    pub fn column_coords(&self, j: usize, k: usize) -> (f64, f64) {
        (self.y0 + j as f64 * self.dy, self.z0 + k as f64 * self.dz)
    }
}

// Intersection of the line {(t, y, z)} with the triangle, via 2D barycentric
// coordinates in the (y, z) projection.
fn ray_hit_x(a: &Point3, b: &Point3, c: &Point3, y: f64, z: f64) -> Option<f64> {
    let e0 = (b.y - a.y) * (z - a.z) - (b.z - a.z) * (y - a.y);
    let e1 = (c.y - b.y) * (z - b.z) - (c.z - b.z) * (y - b.y);
    let e2 = (a.y - c.y) * (z - c.z) - (a.z - c.z) * (y - c.y);
    let inside = (e0 > 0.0 && e1 > 0.0 && e2 > 0.0) || (e0 < 0.0 && e1 < 0.0 && e2 < 0.0);
    if !inside {
        return None;
    }
    let sum = e0 + e1 + e2;
    // e1 weights vertex a, e2 weights b, e0 weights c.
    Some((e1 * a.x + e2 * b.x + e0 * c.x) / sum)
}
