//! Shared fixtures for the criterion benches.

use std::sync::Arc;

use riesz_core::{FractionalOrder, TriangulatedSurface};

pub fn unit_sphere(level: u32) -> Arc<TriangulatedSurface> {
    Arc::new(TriangulatedSurface::sphere(1.0, level).expect("icosphere levels are valid"))
}

pub fn order3(alpha: f64) -> FractionalOrder {
    FractionalOrder::three_d(alpha).expect("alpha in (1, 2]")
}
