use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.distance_sq(other).sqrt()
    }

    pub fn distance_sq(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// Area of the intersection of two disks of radius `r` whose centers are `d` apart.
pub fn lens_area(d: f64, r: f64) -> f64 {
    debug_assert!(d >= 0.0 && r > 0.0);
    if d >= 2.0 * r {
        return 0.0;
    }
    2.0 * r * r * (d / (2.0 * r)).acos() - 0.5 * d * (4.0 * r * r - d * d).sqrt()
}

pub fn disk_area(r: f64) -> f64 {
    PI * r * r
}

pub fn centroid<'a>(points: impl IntoIterator<Item = &'a Point>) -> Option<Point> {
    let mut n = 0usize;
    let (mut sx, mut sy) = (0.0, 0.0);
    for p in points {
        sx += p.x;
        sy += p.y;
        n += 1;
    }
    (n > 0).then(|| Point::new(sx / n as f64, sy / n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn lens_area_endpoints() {
        assert!((lens_area(0.0, 1.0) - PI).abs() < 1e-12);
        assert_eq!(lens_area(2.0, 1.0), 0.0);
        assert_eq!(lens_area(5.0, 1.0), 0.0);
    }

    #[test]
    fn lens_area_unit_distance_closed_form() {
        // 2 acos(1/2) - (1/2) sqrt(3)
        let expected = 2.0 * (0.5f64).acos() - 0.5 * 3f64.sqrt();
        assert!((lens_area(1.0, 1.0) - expected).abs() < 1e-12);
        assert!((lens_area(1.0, 1.0) - 1.22837).abs() < 1e-5);
    }

    #[test]
    fn lens_area_matches_monte_carlo() {
        // Rejection-sample the bounding box of the first disk.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let mut hits = 0usize;
        for _ in 0..n {
            let x: f64 = rng.gen_range(-1.0..1.0);
            let y: f64 = rng.gen_range(-1.0..1.0);
            if x * x + y * y < 1.0 && (x - 1.0) * (x - 1.0) + y * y < 1.0 {
                hits += 1;
            }
        }
        let mc = 4.0 * hits as f64 / n as f64;
        assert!((mc - lens_area(1.0, 1.0)).abs() < 1e-2, "{mc}");
    }

    #[test]
    fn lens_area_at_radius_distance() {
        let a = lens_area(6.0, 6.0);
        assert!((a - 44.2213).abs() < 1e-3, "{a}");
        assert!((a / disk_area(6.0) - 0.391).abs() < 1e-3);
    }
}
