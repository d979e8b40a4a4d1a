//! Fixtures shared by the benchmarks.

use onboard_core::model::{infer_sub_regions, DashboardSpec};
use onboard_core::sample::sample_dashboard;
use onboard_core::{LassoPath, Point};

pub fn laid_out_sample() -> DashboardSpec {
    infer_sub_regions(&sample_dashboard()).expect("sample lays out")
}

/// A wobbly closed path of `n` vertices around `(cx, cy)`.
pub fn wobbly_path(cx: f64, cy: f64, radius: f64, n: usize) -> LassoPath {
    let points = (0..n)
        .map(|i| {
            let a = i as f64 / n as f64 * std::f64::consts::TAU;
            let r = radius * (1.0 + 0.2 * (5.0 * a).sin());
            Point::new(cx + r * a.cos(), cy + r * a.sin())
        })
        .collect();
    LassoPath::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_usable() {
        assert_eq!(laid_out_sample().visuals.len(), 8);
        let path = wobbly_path(100.0, 100.0, 50.0, 64);
        assert_eq!(path.normalized().unwrap().points.len(), 64);
    }
}
