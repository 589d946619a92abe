use crate::error::{Error, Result};

/// Ordinary least-squares line through `points`, returned as (slope, intercept).
pub fn fit_linear(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::validation("points", "need at least two points"));
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in points {
        let dx = x - mean_x;
        sxx += dx * dx;
        sxy += dx * (y - mean_y);
    }
    if !(sxx > 0.0) || !sxx.is_finite() {
        return Err(Error::validation("points", "x values are degenerate"));
    }
    let slope = sxy / sxx;
    Ok((slope, mean_y - slope * mean_x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_points_exact() {
        let (s, i) = fit_linear(&[(3.0, 138.0), (4.0, 144.0)]).unwrap();
        assert!((s - 6.0).abs() < 1e-12);
        assert!((i - 120.0).abs() < 1e-12);
    }

    #[test]
    fn identity_and_constant() {
        assert_eq!(fit_linear(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]).unwrap(), (1.0, 0.0));
        let (s, i) = fit_linear(&[(0.0, 5.0), (1.0, 5.0), (7.0, 5.0)]).unwrap();
        assert_eq!(s, 0.0);
        assert_eq!(i, 5.0);
    }

    #[test]
    fn degenerate_x() {
        assert!(fit_linear(&[(1.0, 0.0), (1.0, 2.0)]).is_err());
        assert!(fit_linear(&[(1.0, 0.0)]).is_err());
    }
}
