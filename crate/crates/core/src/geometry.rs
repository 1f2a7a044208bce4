//! Small vector helpers on top of nalgebra.

pub type Vec3 = nalgebra::Vector3<f64>;

/// Coincidence tolerance for joints and path endpoints, millimeters.
pub const COINCIDENT_TOL: f64 = 1e-6;

pub fn horizontal_distance(a: &Vec3, b: &Vec3) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

pub fn polyline_length(path: &[Vec3]) -> f64 {
    path.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

/// Points along a polyline spaced at most `step` apart, always including
/// every vertex. Each point carries its arc-length position.
pub fn sample_polyline(path: &[Vec3], step: f64) -> Vec<(Vec3, f64)> {
    let mut out = Vec::new();
    let mut arc = 0.0;
    if let Some(first) = path.first() {
        out.push((*first, 0.0));
    }
    for w in path.windows(2) {
        let d = w[1] - w[0];
        let len = d.norm();
        let n = ((len / step).ceil() as usize).max(1);
        for k in 1..=n {
            let t = k as f64 / n as f64;
            out.push((w[0] + d * t, arc + len * t));
        }
        arc += len;
    }
    out
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn of_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Self {
        let mut min = Vec3::repeat(f64::INFINITY);
        let mut max = Vec3::repeat(f64::NEG_INFINITY);
        for p in points {
            min = min.inf(p);
            max = max.sup(p);
        }
        Aabb { min, max }
    }

    /// Gap between the xy projections of two boxes (0 when they overlap).
    pub fn xy_gap(&self, other: &Aabb) -> f64 {
        let dx = (other.min.x - self.max.x).max(self.min.x - other.max.x).max(0.0);
        let dy = (other.min.y - self.max.y).max(self.min.y - other.max.y).max(0.0);
        (dx * dx + dy * dy).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_keeps_vertices_and_step() {
        let path = [Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), Vec3::new(1.0, 0.35, 0.0)];
        let pts = sample_polyline(&path, 0.1);
        assert_eq!(pts.first().unwrap().0, path[0]);
        assert_eq!(pts.last().unwrap().0, path[2]);
        assert!(pts.iter().any(|(p, _)| *p == path[1]));
        for w in pts.windows(2) {
            assert!((w[1].0 - w[0].0).norm() <= 0.1 + 1e-12);
        }
        assert!((pts.last().unwrap().1 - 1.35).abs() < 1e-12);
    }

    #[test]
    fn xy_gap_is_zero_on_overlap() {
        let a = Aabb::of_points(&[Vec3::zeros(), Vec3::new(1.0, 1.0, 1.0)]);
        let b = Aabb::of_points(&[Vec3::new(0.5, 0.5, 5.0), Vec3::new(2.0, 2.0, 6.0)]);
        let c = Aabb::of_points(&[Vec3::new(4.0, 1.0, 0.0), Vec3::new(5.0, 1.0, 0.0)]);
        assert_eq!(a.xy_gap(&b), 0.0);
        assert!((a.xy_gap(&c) - 3.0).abs() < 1e-12);
    }
}
