//! Alpha shapes: Delaunay triangles with circumradius at most `R`, merged
//! into polygons.

use std::collections::HashMap;

use geo::{unary_union, MultiPolygon, Polygon};
use log::warn;
use spade::{DelaunayTriangulation, Point2, Triangulation};

use crate::geometry::{circumradius, polygon_from_ring, triangle_area, Pt};

/// Relative slack on the automatic cutoff so that triangles whose
/// circumradii differ only by rounding (cocircular points) are kept together.
pub const RADIUS_SLACK: f64 = 1e-9;

/// Circumradius cutoff for an alpha shape.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum AlphaRadius {
    /// Smallest cutoff at which the kept triangles form one edge-connected
    /// region touching every point.
    #[default]
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub struct AlphaShape {
    pub radius: f64,
    /// Kept triangles, counter-clockwise. They tile the shape without overlap.
    pub triangles: Vec<[Pt; 3]>,
    pub polygons: MultiPolygon<f64>,
}

impl AlphaShape {
    fn empty() -> Self {
        Self {
            radius: 0.0,
            triangles: Vec::new(),
            polygons: MultiPolygon::new(vec![]),
        }
    }

    /// Exact area as the sum of the kept triangles.
    pub fn area(&self) -> f64 {
        self.triangles.iter().map(triangle_area).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }
}

struct Mesh {
    /// Vertex indices per triangle.
    tris: Vec<[usize; 3]>,
    pos: Vec<Pt>,
}

fn triangulate(points: &[Pt]) -> Mesh {
    let mut dt: DelaunayTriangulation<Point2<f64>> = DelaunayTriangulation::new();
    for p in points {
        let q = spade::mitigate_underflow(Point2::new(p[0], p[1]));
        if let Err(e) = dt.insert(q) {
            warn!("alpha shape: skipping point ({}, {}): {e:?}", p[0], p[1]);
        }
    }
    let pos = dt.vertices().map(|v| [v.position().x, v.position().y]).collect();
    let tris = dt
        .inner_faces()
        .map(|f| {
            let v = f.vertices();
            [v[0].fix().index(), v[1].fix().index(), v[2].fix().index()]
        })
        .collect();
    Mesh { tris, pos }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Smallest radius among the triangles' circumradii at which the triangles
/// kept so far are edge-connected and cover every vertex.
fn connecting_radius(mesh: &Mesh, radii: &[f64]) -> f64 {
    let nt = mesh.tris.len();
    let mut order: Vec<usize> = (0..nt).collect();
    order.sort_by(|&a, &b| radii[a].total_cmp(&radii[b]).then(a.cmp(&b)));
    let mut parent: Vec<usize> = (0..nt).collect();
    let mut edge_owner: HashMap<(usize, usize), usize> = HashMap::new();
    let mut covered = vec![false; mesh.pos.len()];
    let mut n_covered = 0;
    let mut components = 0usize;
    let mut i = 0;
    while i < nt {
        let r = radii[order[i]];
        // add every triangle sharing this radius before testing
        while i < nt && radii[order[i]] == r {
            let t = order[i];
            components += 1;
            let v = mesh.tris[t];
            for &x in &v {
                if !covered[x] {
                    covered[x] = true;
                    n_covered += 1;
                }
            }
            for e in [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])] {
                let key = (e.0.min(e.1), e.0.max(e.1));
                if let Some(&other) = edge_owner.get(&key) {
                    let (ra, rb) = (find(&mut parent, t), find(&mut parent, other));
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                        components -= 1;
                    }
                } else {
                    edge_owner.insert(key, t);
                }
            }
            i += 1;
        }
        if components == 1 && n_covered == mesh.pos.len() {
            return r;
        }
    }
    radii.iter().copied().fold(0.0, f64::max)
}

/// Alpha shape of a point set. Fewer than three distinct points or a
/// collinear set yields an empty shape.
pub fn alpha_shape(points: &[Pt], radius: AlphaRadius) -> AlphaShape {
    let mesh = triangulate(points);
    if mesh.tris.is_empty() {
        if mesh.pos.len() >= 3 {
            warn!("alpha shape: {} points are collinear; empty polygon", mesh.pos.len());
        }
        return AlphaShape::empty();
    }
    let corners = |t: &[usize; 3]| [mesh.pos[t[0]], mesh.pos[t[1]], mesh.pos[t[2]]];
    let radii: Vec<f64> = mesh.tris.iter().map(|t| circumradius(&corners(t))).collect();
    let r = match radius {
        AlphaRadius::Auto => connecting_radius(&mesh, &radii) * (1.0 + RADIUS_SLACK),
        AlphaRadius::Fixed(r) => r,
    };
    let triangles: Vec<[Pt; 3]> = mesh
        .tris
        .iter()
        .zip(&radii)
        .filter(|(_, &cr)| cr <= r)
        .map(|(t, _)| corners(t))
        .collect();
    let parts: Vec<Polygon<f64>> = triangles.iter().map(|t| polygon_from_ring(t)).collect();
    let polygons = if parts.is_empty() {
        MultiPolygon::new(vec![])
    } else {
        unary_union(&parts)
    };
    AlphaShape {
        radius: r,
        triangles,
        polygons,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{convex_hull, multipolygon_area, ring_area};
    use rand::Rng;

    #[test]
    fn unit_square_with_large_radius_is_the_square() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let s = alpha_shape(&pts, AlphaRadius::Fixed(1e6));
        assert!((s.area() - 1.0).abs() < 1e-15);
        assert!((multipolygon_area(&s.polygons) - 1.0).abs() < 1e-9);
        assert_eq!(s.polygons.0.len(), 1);
    }

    #[test]
    fn three_points_give_their_triangle() {
        let pts = [[0.0, 0.0], [4.0, 0.0], [1.0, 3.0]];
        let s = alpha_shape(&pts, AlphaRadius::Auto);
        assert_eq!(s.triangles.len(), 1);
        assert_eq!(s.area(), 6.0);
    }

    #[test]
    fn collinear_and_tiny_sets_are_empty() {
        let line: Vec<Pt> = (0..5).map(|i| [i as f64, 2.0 * i as f64]).collect();
        assert!(alpha_shape(&line, AlphaRadius::Auto).is_empty());
        assert!(alpha_shape(&[[0.0, 0.0], [1.0, 1.0]], AlphaRadius::Auto).is_empty());
        assert!(alpha_shape(&[[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]], AlphaRadius::Auto).is_empty());
    }

    #[test]
    fn convex_set_matches_hull_area() {
        let mut rng = crate::seed::rng(3, &[]);
        let pts: Vec<Pt> = (0..300)
            .map(|_| [rng.random_range(-2.0..3.0), rng.random_range(-1.0..1.0)])
            .collect();
        let s = alpha_shape(&pts, AlphaRadius::Fixed(f64::INFINITY));
        let hull = ring_area(&convex_hull(&pts));
        assert!((s.area() - hull).abs() <= 1e-9 * hull);
    }

    #[test]
    fn ring_is_smaller_than_disk() {
        // dense annulus 0.8 <= r <= 1 of points; auto radius should leave the hole
        let mut rng = crate::seed::rng(11, &[]);
        let pts: Vec<Pt> = (0..2000)
            .map(|_| {
                let t = rng.random_range(0.0..std::f64::consts::TAU);
                let r = rng.random_range(0.64f64..1.0).sqrt();
                [r * t.cos(), r * t.sin()]
            })
            .collect();
        let s = alpha_shape(&pts, AlphaRadius::Auto);
        let hull = ring_area(&convex_hull(&pts));
        // Monte Carlo estimate of the shape's area, independent of triangle sums
        let mut mc = crate::seed::rng(12, &[]);
        let n = 200_000;
        let inside = (0..n)
            .filter(|_| {
                let p = [mc.random_range(-1.0..1.0), mc.random_range(-1.0..1.0)];
                crate::geometry::multipolygon_contains(&s.polygons, p, 0.0)
            })
            .count();
        let mc_area = 4.0 * inside as f64 / n as f64;
        assert!(
            (mc_area - s.area()).abs() < 0.01 * hull,
            "mc {mc_area} exact {}",
            s.area()
        );
        assert!(s.area() < 0.6 * hull, "annulus area {} vs hull {hull}", s.area());
    }

    #[test]
    fn auto_radius_connects_two_blobs_with_a_bridge() {
        let mut pts = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                pts.push([i as f64 * 0.1, j as f64 * 0.1]);
                pts.push([2.0 + i as f64 * 0.1, j as f64 * 0.1]);
            }
        }
        let s = alpha_shape(&pts, AlphaRadius::Auto);
        assert_eq!(s.polygons.0.len(), 1);
        let small = alpha_shape(&pts, AlphaRadius::Fixed(0.08));
        assert_eq!(small.polygons.0.len(), 2);
        assert!((small.area() - 0.32).abs() < 1e-9);
    }
}
