//! Small planar geometry helpers.

use nalgebra::Vector2;

pub type Point = Vector2<f64>;

pub fn pt(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

/// z-component of the cross product.
pub fn cross(a: &Point, b: &Point) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Rotate by +90 degrees, i.e. k × v.
pub fn perp(v: &Point) -> Point {
    Point::new(-v.y, v.x)
}

pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for k in 0..n {
        s += cross(&poly[k], &poly[(k + 1) % n]);
    }
    0.5 * s
}

pub fn triangle_area(a: &Point, b: &Point, c: &Point) -> f64 {
    0.5 * cross(&(b - a), &(c - a))
}

pub fn centroid(poly: &[Point]) -> Point {
    let n = poly.len();
    let mut c = Point::zeros();
    let mut a = 0.0;
    for k in 0..n {
        let (p, q) = (&poly[k], &poly[(k + 1) % n]);
        let w = cross(p, q);
        a += w;
        c += (p + q) * w;
    }
    if a.abs() < f64::MIN_POSITIVE {
        return poly.iter().sum::<Point>() / n as f64;
    }
    c / (3.0 * a)
}

/// Intersection of the lines through (a, b) and (c, d), if they are not parallel.
pub fn line_intersection(a: &Point, b: &Point, c: &Point, d: &Point) -> Option<Point> {
    let r = b - a;
    let s = d - c;
    let den = cross(&r, &s);
    if den.abs() <= 1e-300 {
        return None;
    }
    let t = cross(&(c - a), &s) / den;
    Some(a + r * t)
}

/// Orthogonal projection of p onto the line through a and b.
pub fn project_on_line(p: &Point, a: &Point, b: &Point) -> Point {
    let r = b - a;
    a + r * ((p - a).dot(&r) / r.norm_squared())
}

/// Parameter of p along segment a -> b (0 at a, 1 at b).
pub fn segment_parameter(p: &Point, a: &Point, b: &Point) -> f64 {
    let r = b - a;
    (p - a).dot(&r) / r.norm_squared()
}

/// Keep the part of a convex polygon on the side of the line where
/// `normal · (x - origin) <= 0`.
pub fn clip_halfplane(poly: &[Point], origin: &Point, normal: &Point) -> Vec<Point> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    let side = |p: &Point| normal.dot(&(p - origin));
    for k in 0..n {
        let p = &poly[k];
        let q = &poly[(k + 1) % n];
        let (sp, sq) = (side(p), side(q));
        if sp <= 0.0 {
            out.push(*p);
        }
        if (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0) {
            let t = sp / (sp - sq);
            out.push(p + (q - p) * t);
        }
    }
    out
}

pub fn point_in_convex(poly: &[Point], p: &Point) -> bool {
    let n = poly.len();
    (0..n).all(|k| cross(&(poly[(k + 1) % n] - poly[k]), &(p - poly[k])) >= 0.0)
}

/// Distance from p to the boundary of a polygon.
pub fn distance_to_boundary(poly: &[Point], p: &Point) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|k| {
            let a = &poly[k];
            let b = &poly[(k + 1) % n];
            let t = segment_parameter(p, a, b).clamp(0.0, 1.0);
            (p - (a + (b - a) * t)).norm()
        })
        .fold(f64::INFINITY, f64::min)
}
