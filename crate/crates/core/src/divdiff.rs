//! Newton divided differences, including confluent (Hermite) entries for
//! repeated points.

use crate::error::{Error, Result};

/// Leading Newton coefficient of the interpolant of some function over the
/// point multiset `points`.
///
/// `data(x, k)` supplies the `k`-th derivative at `x` (`k = 0` is the value).
/// A point of multiplicity `m` needs derivatives up to order `m - 1`, and
/// copies of a repeated point must be adjacent in `points`. The table is
/// built in the order given.
pub fn divided_difference<F>(points: &[f64], data: F) -> Result<f64>
where
    F: Fn(f64, usize) -> Option<f64>,
{
    if points.is_empty() {
        return Err(Error::NoPoints);
    }
    check_adjacent_repeats(points)?;

    let m = points.len();
    let value = |x: f64, k: usize| data(x, k).ok_or(Error::MissingDerivative { at: x, order: k });
    let mut column = points
        .iter()
        .map(|&x| value(x, 0))
        .collect::<Result<Vec<_>>>()?;
    let mut factorial = 1.0;
    for order in 1..m {
        factorial *= order as f64;
        for i in 0..m - order {
            let (a, b) = (points[i], points[i + order]);
            column[i] = if a == b {
                value(a, order)? / factorial
            } else {
                (column[i + 1] - column[i]) / (b - a)
            };
        }
    }
    Ok(column[0])
}

/// Divided difference over distinct points given their function values.
pub fn divided_difference_values(points: &[f64], values: &[f64]) -> Result<f64> {
    if points.len() != values.len() {
        return Err(Error::DimensionMismatch);
    }
    divided_difference(points, |x, k| {
        if k > 0 {
            return None;
        }
        points.iter().position(|&p| p == x).map(|i| values[i])
    })
}

fn check_adjacent_repeats(points: &[f64]) -> Result<()> {
    for (i, &x) in points.iter().enumerate() {
        let run_end = points[i..].iter().take_while(|&&y| y == x).count() + i;
        if points[run_end..].contains(&x) {
            return Err(Error::UnsortedRepeats(x));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn values_only(f: impl Fn(f64) -> f64) -> impl Fn(f64, usize) -> Option<f64> {
        move |x, k| (k == 0).then(|| f(x))
    }

    // plain recursion on the definition, independent of the table
    fn recursive(f: &dyn Fn(f64) -> f64, pts: &[f64]) -> f64 {
        if pts.len() == 1 {
            return f(pts[0]);
        }
        let n = pts.len();
        (recursive(f, &pts[1..]) - recursive(f, &pts[..n - 1])) / (pts[n - 1] - pts[0])
    }

    #[test]
    fn square_has_unit_second_difference() {
        let dd = divided_difference(&[0.0, 1.0, 2.0], values_only(|t| t * t)).unwrap();
        assert_abs_diff_eq!(dd, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn constants_vanish() {
        for pts in [&[0.1, 0.7][..], &[0.0, 0.2, 0.5, 0.9]] {
            let dd = divided_difference(pts, values_only(|_| 3.5)).unwrap();
            assert_eq!(dd, 0.0);
        }
    }

    #[test]
    fn repeated_point_uses_derivative() {
        let data = |x: f64, k: usize| match k {
            0 => Some(x.powi(3)),
            1 => Some(3.0 * x * x),
            _ => None,
        };
        assert_abs_diff_eq!(divided_difference(&[1.0, 1.0], data).unwrap(), 3.0);
    }

    #[test]
    fn exponential_matches_recursive_oracle() {
        let pts = [0.0, 0.5, 1.0];
        let oracle = recursive(&|t: f64| t.exp(), &pts);
        let dd = divided_difference(&pts, values_only(f64::exp)).unwrap();
        assert_abs_diff_eq!(dd, oracle, epsilon = 1e-14);
        // second difference over spacing 1/2: (e - 2 e^{1/2} + 1) / (2 h^2)
        let closed = (1f64.exp() - 2.0 * 0.5f64.exp() + 1.0) * 2.0;
        assert_abs_diff_eq!(dd, closed, epsilon = 1e-14);
    }

    #[test]
    fn triple_point_uses_half_second_derivative() {
        let data = |x: f64, k: usize| Some(match k {
            0 => x.sin(),
            1 => x.cos(),
            _ => -x.sin(),
        });
        let dd = divided_difference(&[0.3, 0.3, 0.3], data).unwrap();
        assert_abs_diff_eq!(dd, -0.3f64.sin() / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn confluent_limit_is_approached() {
        let data = |x: f64, k: usize| match k {
            0 => Some(x.exp()),
            1 => Some(x.exp()),
            _ => None,
        };
        let rest = [0.6, 0.9];
        let confluent = divided_difference(&[0.2, 0.2, rest[0], rest[1]], data).unwrap();
        let gap = |eps: f64| {
            let dd = divided_difference(&[0.2, 0.2 + eps, rest[0], rest[1]], data).unwrap();
            (dd - confluent).abs()
        };
        let (coarse, fine) = (gap(1e-5), gap(1e-6));
        assert!(fine < coarse, "{fine} !< {coarse}");
        assert!(coarse < 1e-4);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(divided_difference(&[], values_only(|t| t)), Err(Error::NoPoints));
        assert_eq!(
            divided_difference(&[0.5, 0.1, 0.5], values_only(|t| t)),
            Err(Error::UnsortedRepeats(0.5))
        );
        assert_eq!(
            divided_difference(&[0.5, 0.5], values_only(|t| t)),
            Err(Error::MissingDerivative { at: 0.5, order: 1 })
        );
    }

    #[test]
    fn values_variant_matches() {
        let pts = [0.1, 0.4, 0.8];
        let vals: Vec<f64> = pts.iter().map(|t: &f64| t.cos()).collect();
        let a = divided_difference_values(&pts, &vals).unwrap();
        let b = divided_difference(&pts, values_only(f64::cos)).unwrap();
        assert_eq!(a, b);
    }
}
