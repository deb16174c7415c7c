//! Classical degree oracles used to cross-check the engine: endpoint signs
//! on intervals and winding numbers along closed polygons.

use crate::error::{Error, Result};

/// `Σ (sgn g(b) − sgn g(a)) / 2` over the intervals.
pub fn oracle_degree_1d(g: impl Fn(f64) -> f64, intervals: &[(f64, f64)]) -> Result<i64> {
    let mut sum = 0;
    for &(a, b) in intervals {
        let (ga, gb) = (g(a), g(b));
        if ga == 0.0 {
            return Err(Error::ZeroAtEndpoint { at: a });
        }
        if gb == 0.0 {
            return Err(Error::ZeroAtEndpoint { at: b });
        }
        sum += (gb.signum() as i64 - ga.signum() as i64) / 2;
    }
    Ok(sum)
}

/// Winding number of `g` along a closed polygon, sampled with about `steps`
/// points distributed by edge length.
pub fn oracle_degree_2d(g: impl Fn(&[f64; 2]) -> [f64; 2], polygon: &[[f64; 2]], steps: usize, eta: f64) -> Result<i64> {
    let len = |a: &[f64; 2], b: &[f64; 2]| ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    let perimeter: f64 = (0..polygon.len()).map(|i| len(&polygon[i], &polygon[(i + 1) % polygon.len()])).sum();
    let mut points = Vec::new();
    for i in 0..polygon.len() {
        let (a, b) = (polygon[i], polygon[(i + 1) % polygon.len()]);
        let k = ((steps as f64 * len(&a, &b) / perimeter).ceil() as usize).max(1);
        for j in 0..k {
            let s = j as f64 / k as f64;
            points.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
        }
    }
    let values = points
        .iter()
        .map(|p| {
            let v = g(p);
            let n = v[0].hypot(v[1]);
            if n < eta {
                Err(Error::BoundaryTooClose { point: p.to_vec(), norm: n })
            } else {
                Ok(v)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = 0.0;
    for i in 0..values.len() {
        let (u, v) = (values[i], values[(i + 1) % values.len()]);
        let inc = (u[0] * v[1] - u[1] * v[0]).atan2(u[0] * v[0] + u[1] * v[1]);
        if inc.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::StepTooCoarse { increment: inc });
        }
        total += inc;
    }
    Ok((total / std::f64::consts::TAU).round() as i64)
}

/// Counter-clockwise corners of an axis-aligned rectangle.
pub fn rectangle(lo: [f64; 2], hi: [f64; 2]) -> Vec<[f64; 2]> {
    vec![[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_on_two_intervals() {
        let g = |x: f64| x * x * x - 4.0 * x;
        assert_eq!(oracle_degree_1d(g, &[(-3.0, -1.0), (1.0, 3.0)]).unwrap(), 2);
        assert!(matches!(oracle_degree_1d(g, &[(2.0, 3.0)]), Err(Error::ZeroAtEndpoint { .. })));
    }

    #[test]
    fn powers_of_z() {
        let sq = rectangle([-1.0, -1.0], [1.0, 1.0]);
        let z3 = |p: &[f64; 2]| [p[0].powi(3) - 3.0 * p[0] * p[1] * p[1], 3.0 * p[0] * p[0] * p[1] - p[1].powi(3)];
        assert_eq!(oracle_degree_2d(z3, &sq, 400, 1e-9).unwrap(), 3);
        let conj = |p: &[f64; 2]| [p[0], -p[1]];
        assert_eq!(oracle_degree_2d(conj, &sq, 64, 1e-9).unwrap(), -1);
        assert!(matches!(oracle_degree_2d(z3, &sq, 4, 1e-9), Err(Error::StepTooCoarse { .. })));
        let shifted = |p: &[f64; 2]| [p[0] - 1.0, p[1]];
        assert!(matches!(oracle_degree_2d(shifted, &sq, 64, 1e-9), Err(Error::BoundaryTooClose { .. })));
    }
}
