//! Polygon quadrature: a fan of triangles from a star point, each integrated
//! with the three-point degree-2 rule.

use crate::geometry::{triangle_area, Point};

const BARY: [[f64; 3]; 3] = [
    [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
    [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
    [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
];

/// Signed integral over a triangle, exact for quadratics.
pub fn integrate_triangle<F: Fn(&Point) -> f64>(f: &F, a: &Point, b: &Point, c: &Point) -> f64 {
    let area = triangle_area(a, b, c);
    let mut s = 0.0;
    for w in BARY {
        s += f(&(a * w[0] + b * w[1] + c * w[2]));
    }
    area * s / 3.0
}

/// Integral over a region given as signed triangles (star, a, b).
pub fn integrate_fan<F: Fn(&Point) -> f64>(f: &F, star: &Point, segments: &[(Point, Point)]) -> f64 {
    segments.iter().map(|(a, b)| integrate_triangle(f, star, a, b)).sum()
}

/// Integral over a simple polygon, fanned from its vertex average.
pub fn integrate_polygon<F: Fn(&Point) -> f64>(f: &F, poly: &[Point]) -> f64 {
    let n = poly.len();
    let star = poly.iter().sum::<Point>() / n as f64;
    (0..n).map(|k| integrate_triangle(f, &star, &poly[k], &poly[(k + 1) % n])).sum()
}

/// Mean of f along the segment a -> b, 3-point Gauss.
pub fn segment_mean<F: Fn(&Point) -> f64>(f: &F, a: &Point, b: &Point) -> f64 {
    let g = (0.6f64).sqrt() / 2.0;
    let m = (a + b) * 0.5;
    let r = b - a;
    (5.0 * f(&(m - r * g)) + 8.0 * f(&m) + 5.0 * f(&(m + r * g))) / 18.0
}
