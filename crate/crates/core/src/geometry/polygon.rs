//! Planar polygon predicates for cross-section validity checks.

use super::SurfaceGrid;

/// Shoelace signed area of a 2-D polygon (positive = counterclockwise).
///
/// The ring may or may not repeat its first vertex at the end.
pub fn polygon_signed_area(ring: &[(f64, f64)]) -> f64 {
    let pts = dedup_closure(ring);
    let k = pts.len();
    if k < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..k {
        let (x0, y0) = pts[i];
        let (x1, y1) = pts[(i + 1) % k];
        acc += x0 * y1 - x1 * y0;
    }
    0.5 * acc
}

/// True when no pair of non-adjacent ring segments touches or crosses.
pub fn polygon_is_simple(ring: &[(f64, f64)]) -> bool {
    let pts = dedup_closure(ring);
    let k = pts.len();
    if k < 3 {
        return false;
    }
    for i in 0..k {
        let a0 = pts[i];
        let a1 = pts[(i + 1) % k];
        // Skip the two neighbours sharing an endpoint with segment i.
        for j in (i + 2)..k {
            if i == 0 && j == k - 1 {
                continue;
            }
            if segments_touch(a0, a1, pts[j], pts[(j + 1) % k]) {
                return false;
            }
        }
    }
    true
}

fn dedup_closure(ring: &[(f64, f64)]) -> &[(f64, f64)] {
    if ring.len() >= 2 {
        let (fx, fy) = ring[0];
        let (lx, ly) = ring[ring.len() - 1];
        if (fx - lx).hypot(fy - ly) < 1e-12 {
            return &ring[..ring.len() - 1];
        }
    }
    ring
}

/// Any contact between closed segments, including endpoint touches and
/// collinear overlap.
fn segments_touch(a0: (f64, f64), a1: (f64, f64), b0: (f64, f64), b1: (f64, f64)) -> bool {
    // Cheap reject on bounding intervals first.
    if a0.0.max(a1.0) < b0.0.min(b1.0)
        || b0.0.max(b1.0) < a0.0.min(a1.0)
        || a0.1.max(a1.1) < b0.1.min(b1.1)
        || b0.1.max(b1.1) < a0.1.min(a1.1)
    {
        return false;
    }
    let d1 = cross(b0, b1, a0);
    let d2 = cross(b0, b1, a1);
    let d3 = cross(a0, a1, b0);
    let d4 = cross(a0, a1, b1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(b0, b1, a0))
        || (d2 == 0.0 && on_segment(b0, b1, a1))
        || (d3 == 0.0 && on_segment(a0, a1, b0))
        || (d4 == 0.0 && on_segment(a0, a1, b1))
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn on_segment(s0: (f64, f64), s1: (f64, f64), p: (f64, f64)) -> bool {
    p.0 >= s0.0.min(s1.0) && p.0 <= s0.0.max(s1.0) && p.1 >= s0.1.min(s1.1) && p.1 <= s0.1.max(s1.1)
}

/// True when any cross-section polygon is non-simple or has non-positive
/// signed area in the x-z plane.
///
/// Sections are taken in stored order (TE -> upper -> LE -> lower), which
/// makes a healthy airfoil counterclockwise and its signed area positive.
/// Non-finite coordinates count as intersecting.
pub fn self_intersection_check(grid: &SurfaceGrid) -> bool {
    for s in 0..grid.m() {
        let ring: Vec<(f64, f64)> = grid.section(s).iter().map(|p| (p.x, p.z)).collect();
        if ring.iter().any(|(x, z)| !x.is_finite() || !z.is_finite()) {
            return true;
        }
        if polygon_signed_area(&ring) <= 0.0 {
            return true;
        }
        if !polygon_is_simple(&ring) {
            return true;
        }
    }
    false
}
