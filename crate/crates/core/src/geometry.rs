//! Planar helpers shared by footprints and boundary estimation.

use geo::{Area, Coord, LineString, MultiPolygon, Polygon};

pub type Pt = [f64; 2];

fn cross(o: Pt, a: Pt, b: Pt) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Convex hull by monotone chain. Vertices are counter-clockwise, start at the
/// lexicographically smallest point and exclude collinear points.
pub fn convex_hull(points: &[Pt]) -> Vec<Pt> {
    let mut p: Vec<Pt> = points
        .iter()
        .copied()
        .filter(|q| q[0].is_finite() && q[1].is_finite())
        .collect();
    p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut hull: Vec<Pt> = Vec::with_capacity(2 * p.len());
    for &q in &p {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
            hull.pop();
        }
        hull.push(q);
    }
    let lower = hull.len() + 1;
    for &q in p.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
            hull.pop();
        }
        hull.push(q);
    }
    hull.pop();
    hull
}

/// Signed shoelace area; positive for counter-clockwise rings.
pub fn ring_area(ring: &[Pt]) -> f64 {
    let n = ring.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        s += a[0] * b[1] - b[0] * a[1];
    }
    s / 2.0
}

pub fn triangle_area(t: &[Pt; 3]) -> f64 {
    cross(t[0], t[1], t[2]).abs() / 2.0
}

/// Circumradius of a triangle; infinite when degenerate.
pub fn circumradius(t: &[Pt; 3]) -> f64 {
    let a = dist(t[1], t[2]);
    let b = dist(t[0], t[2]);
    let c = dist(t[0], t[1]);
    let area2 = cross(t[0], t[1], t[2]).abs();
    if area2 == 0.0 {
        return f64::INFINITY;
    }
    a * b * c / (2.0 * area2)
}

pub fn dist(a: Pt, b: Pt) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn segment_distance(p: Pt, a: Pt, b: Pt) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * dx, a[1] + t * dy])
}

fn ring_points(ls: &LineString<f64>) -> impl Iterator<Item = Pt> + '_ {
    ls.coords().map(|c| [c.x, c.y])
}

/// Where a point sits relative to a closed ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RingSide {
    Inside,
    Boundary,
    Outside,
}

fn ring_side(ls: &LineString<f64>, p: Pt, tol: f64) -> RingSide {
    let pts: Vec<Pt> = ring_points(ls).collect();
    if pts.len() < 2 {
        return RingSide::Outside;
    }
    let mut inside = false;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if segment_distance(p, a, b) <= tol {
            return RingSide::Boundary;
        }
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    if inside {
        RingSide::Inside
    } else {
        RingSide::Outside
    }
}

/// Point-in-polygon with the boundary (within `tol`) counted as inside.
/// Points on a hole's edge are inside; points strictly within a hole are not.
pub fn polygon_contains(poly: &Polygon<f64>, p: Pt, tol: f64) -> bool {
    match ring_side(poly.exterior(), p, tol) {
        RingSide::Outside => false,
        RingSide::Boundary => true,
        RingSide::Inside => poly
            .interiors()
            .iter()
            .all(|h| ring_side(h, p, tol) != RingSide::Inside),
    }
}

pub fn multipolygon_contains(mp: &MultiPolygon<f64>, p: Pt, tol: f64) -> bool {
    mp.0.iter().any(|poly| polygon_contains(poly, p, tol))
}

pub fn polygon_from_ring(ring: &[Pt]) -> Polygon<f64> {
    let coords: Vec<Coord<f64>> = ring.iter().map(|p| Coord { x: p[0], y: p[1] }).collect();
    Polygon::new(LineString::new(coords), vec![])
}

pub fn multipolygon_area(mp: &MultiPolygon<f64>) -> f64 {
    mp.unsigned_area()
}

/// Every vertex of `mp` lies inside or within `tol` of the ring `hull`.
pub fn within_ring(mp: &MultiPolygon<f64>, hull: &[Pt], tol: f64) -> bool {
    let hp = polygon_from_ring(hull);
    mp.0.iter().all(|poly| {
        ring_points(poly.exterior())
            .chain(poly.interiors().iter().flat_map(ring_points))
            .all(|p| polygon_contains(&hp, p, tol))
    })
}

/// Bounding-box diagonal of a point set, used to scale tolerances.
pub fn extent(points: &[Pt]) -> f64 {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in points {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    if points.is_empty() {
        return 0.0;
    }
    (hi[0] - lo[0]).hypot(hi[1] - lo[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_of_square_with_interior_and_edge_points() {
        let pts = [[1.0, 1.0], [0.0, 0.0], [0.5, 0.5], [1.0, 0.0], [0.0, 1.0], [0.5, 0.0]];
        let h = convex_hull(&pts);
        assert_eq!(h, vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        assert_eq!(ring_area(&h), 1.0);
    }

    #[test]
    fn contains_counts_boundary_and_excludes_holes() {
        let outer = LineString::from(vec![(0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (0.0, 4.0), (0.0, 0.0)]);
        let hole = LineString::from(vec![(1.0, 1.0), (1.0, 3.0), (3.0, 3.0), (3.0, 1.0), (1.0, 1.0)]);
        let poly = Polygon::new(outer, vec![hole]);
        assert!(polygon_contains(&poly, [0.0, 2.0], 1e-12));
        assert!(polygon_contains(&poly, [4.0, 4.0], 1e-12));
        assert!(polygon_contains(&poly, [0.5, 0.5], 1e-12));
        assert!(polygon_contains(&poly, [1.0, 2.0], 1e-12));
        assert!(!polygon_contains(&poly, [2.0, 2.0], 1e-12));
        assert!(!polygon_contains(&poly, [5.0, 2.0], 1e-12));
    }

    #[test]
    fn circumradius_of_right_triangle_is_half_hypotenuse() {
        let t = [[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]];
        assert!((circumradius(&t) - 2.5).abs() < 1e-12);
        assert_eq!(triangle_area(&t), 6.0);
    }
}
