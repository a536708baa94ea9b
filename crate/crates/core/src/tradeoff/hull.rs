use crate::error::{Error, Result};

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Points not dominated by any other point, sorted by increasing `x`
/// (hence decreasing `y`). Duplicates collapse to one.
pub fn pareto_front(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut sorted: Vec<(f64, f64)> = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut front: Vec<(f64, f64)> = Vec::new();
    for p in sorted {
        if front.last().is_none_or(|last| p.1 < last.1) {
            front.push(p);
        }
    }
    front
}

/// Vertices of the lower-left boundary of the convex hull of the upward
/// closure `{v : v >= w componentwise for some input w}`, ordered by `x`.
///
/// Collinear points on an edge are not vertices and are dropped.
pub fn lower_convex_hull(points: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    if points.is_empty() {
        return Err(Error::Domain("lower convex hull of an empty point set".into()));
    }
    if points.iter().any(|p| !(p.0.is_finite() && p.1.is_finite())) {
        return Err(Error::InvalidInput("hull points must be finite".into()));
    }
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in pareto_front(points) {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    Ok(hull)
}
