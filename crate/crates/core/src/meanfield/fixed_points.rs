use serde::{Deserialize, Serialize};

use super::TransferCurve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    /// Tangential touch or a segment lying on the unity line.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPoint {
    pub rate: f64,
    pub stability: Stability,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointSet {
    pub points: Vec<FixedPoint>,
    /// Set when any crossing could not be classified.
    pub degenerate: bool,
}

impl FixedPointSet {
    pub fn stable(&self) -> impl Iterator<Item = &FixedPoint> {
        self.points.iter().filter(|p| p.stability == Stability::Stable)
    }

    pub fn pattern(&self) -> Vec<Stability> {
        self.points.iter().map(|p| p.stability).collect()
    }
}

const REFINE_TOL: f64 = 0.01;

/// Intersections of the curve with `f_out = f_in`.
///
/// Sign changes of `f_out - f_in` on the grid are refined by bisection on
/// `eval` (the continuous curve; pass `None` to interpolate the samples).
/// Stability follows from the crossing direction: a curve passing from above
/// to below the unity line has slope below one.
pub fn find_fixed_points(curve: &TransferCurve, eval: Option<&dyn Fn(f64) -> f64>) -> FixedPointSet {
    let interp = |f: f64| curve.interpolate(f);
    let eval: &dyn Fn(f64) -> f64 = match eval {
        Some(e) => e,
        None => &interp,
    };
    let x = &curve.f_in;
    let d: Vec<f64> = curve.f_out.iter().zip(x).map(|(y, x)| y - x).collect();
    let is_zero = |i: usize| d[i].abs() <= 1e-9 * x[i].abs().max(1.0);
    let n = x.len();
    let mut points = Vec::new();
    let mut degenerate = false;

    let mut i = 0;
    while i < n {
        if is_zero(i) {
            let start = i;
            while i + 1 < n && is_zero(i + 1) {
                i += 1;
            }
            let end = i;
            let before = (start > 0).then(|| d[start - 1].signum());
            let after = (end + 1 < n).then(|| d[end + 1].signum());
            let slope = local_slope(x, &curve.f_out, start, end);
            let stability = if end > start {
                Stability::Degenerate
            } else {
                match (before, after) {
                    (Some(b), Some(a)) if b == a => Stability::Degenerate,
                    (Some(b), _) => direction(b),
                    (None, Some(a)) => direction(-a),
                    (None, None) => Stability::Degenerate,
                }
            };
            degenerate |= stability == Stability::Degenerate;
            points.push(FixedPoint { rate: 0.5 * (x[start] + x[end]), stability, slope });
            i += 1;
            continue;
        }
        if i + 1 < n && !is_zero(i + 1) && d[i].signum() != d[i + 1].signum() {
            let (mut lo, mut hi) = (x[i], x[i + 1]);
            let sign_lo = d[i].signum();
            while hi - lo > REFINE_TOL {
                let mid = 0.5 * (lo + hi);
                let dm = eval(mid) - mid;
                if dm == 0.0 {
                    lo = mid;
                    hi = mid;
                } else if dm.signum() == sign_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let rate = 0.5 * (lo + hi);
            let h = REFINE_TOL;
            let slope = (eval(rate + h) - eval((rate - h).max(0.0))) / (rate + h - (rate - h).max(0.0));
            points.push(FixedPoint { rate, stability: direction(sign_lo), slope });
        }
        i += 1;
    }
    FixedPointSet { points, degenerate }
}

fn direction(sign_before: f64) -> Stability {
    if sign_before > 0.0 {
        Stability::Stable
    } else {
        Stability::Unstable
    }
}

fn local_slope(x: &[f64], y: &[f64], start: usize, end: usize) -> f64 {
    let lo = start.saturating_sub(1);
    let hi = (end + 1).min(x.len() - 1);
    if hi == lo {
        return f64::NAN;
    }
    (y[hi] - y[lo]) / (x[hi] - x[lo])
}

#[cfg(test)]
mod tests {
    use super::super::rate_grid;
    use super::*;

    fn curve(f: impl Fn(f64) -> f64, grid: Vec<f64>) -> TransferCurve {
        let out = grid.iter().map(|&x| f(x)).collect();
        TransferCurve::measured(grid, out, 4.0, 0.0, 16.0).unwrap()
    }

    #[test]
    fn identity_is_degenerate() {
        let c = curve(|x| x, rate_grid(0.0, 10.0, 1.0));
        let fp = find_fixed_points(&c, None);
        assert!(fp.degenerate);
        assert!(fp.points.iter().all(|p| p.stability == Stability::Degenerate));
    }

    #[test]
    fn cubic_has_three_crossings() {
        // crosses unity at 10, 50 and 120 Hz
        let g = |x: f64| x + 1e-4 * (x - 10.0) * (50.0 - x) * (x - 120.0);
        let c = curve(g, rate_grid(0.0, 180.0, 1.0));
        let fp = find_fixed_points(&c, Some(&g));
        assert!(!fp.degenerate);
        let rates: Vec<f64> = fp.points.iter().map(|p| p.rate).collect();
        assert_eq!(fp.pattern(), [Stability::Stable, Stability::Unstable, Stability::Stable]);
        for (r, want) in rates.iter().zip([10.0, 50.0, 120.0]) {
            assert!((r - want).abs() <= 0.01, "{r}");
        }
        for p in &fp.points {
            assert_eq!(p.slope < 1.0, p.stability == Stability::Stable);
        }
    }

    #[test]
    fn refinement_between_grid_points() {
        let g = |x: f64| 0.5 * x + 33.3;
        let c = curve(g, rate_grid(0.0, 100.0, 1.0));
        let fp = find_fixed_points(&c, Some(&g));
        assert_eq!(fp.points.len(), 1);
        assert!((fp.points[0].rate - 66.6).abs() <= 0.01);
        assert_eq!(fp.points[0].stability, Stability::Stable);
    }

    #[test]
    fn tangential_touch_is_flagged() {
        let g = |x: f64| x + (x - 5.0).powi(2);
        let c = curve(g, rate_grid(0.0, 10.0, 1.0));
        let fp = find_fixed_points(&c, Some(&g));
        assert!(fp.degenerate);
        assert_eq!(fp.points.len(), 1);
    }

    #[test]
    fn silent_origin_is_stable() {
        let g = |x: f64| 0.2 * x;
        let c = curve(g, rate_grid(0.0, 10.0, 1.0));
        let fp = find_fixed_points(&c, Some(&g));
        assert_eq!(fp.pattern(), [Stability::Stable]);
        assert_eq!(fp.points[0].rate, 0.0);
    }
}
