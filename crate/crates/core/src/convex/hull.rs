//! Planar convex hulls and polygon helpers.

const EPS: f64 = 1e-12;

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise convex hull (monotone chain). Collinear and duplicate
/// points are dropped, so a segment comes back as its two endpoints and a
/// point as itself.
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() <= EPS && (a[1] - b[1]).abs() <= EPS);
    if pts.len() <= 2 {
        return pts;
    }
    let scale = pts.iter().flat_map(|p| p.iter()).fold(1.0_f64, |m, v| m.max(v.abs()));
    let tol = EPS * scale * scale;
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= tol {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= tol {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Shoelace area of a counter-clockwise polygon.
pub fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut a = 0.0;
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        a += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * a
}

/// Inclusive point-in-convex-polygon test for a counter-clockwise hull.
pub fn contains(poly: &[[f64; 2]], p: [f64; 2]) -> bool {
    match poly.len() {
        0 => false,
        1 => (poly[0][0] - p[0]).abs() <= EPS && (poly[0][1] - p[1]).abs() <= EPS,
        2 => {
            let c = cross(poly[0], poly[1], p);
            let within = (p[0] - poly[0][0]) * (p[0] - poly[1][0]) + (p[1] - poly[0][1]) * (p[1] - poly[1][1]);
            c.abs() <= EPS && within <= EPS
        }
        n => (0..n).all(|i| cross(poly[i], poly[(i + 1) % n], p) >= -EPS),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_of_square_with_interior_points() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.5], [1.0, 1.0], [0.0, 1.0], [0.5, 0.0]];
        let h = convex_hull(&pts);
        assert_eq!(h.len(), 4);
        assert!((polygon_area(&h) - 1.0).abs() < 1e-15);
        assert!(contains(&h, [0.5, 0.5]));
        assert!(contains(&h, [1.0, 0.5]));
        assert!(!contains(&h, [1.1, 0.5]));
    }

    #[test]
    fn degenerate_hulls() {
        assert_eq!(convex_hull(&[[1.0, 2.0], [1.0, 2.0]]).len(), 1);
        let seg = convex_hull(&[[1.0, 0.0], [1.5, 0.0], [2.0, 0.0]]);
        assert_eq!(seg, vec![[1.0, 0.0], [2.0, 0.0]]);
        assert!(contains(&seg, [1.2, 0.0]));
        assert!(!contains(&seg, [2.2, 0.0]));
    }
}
