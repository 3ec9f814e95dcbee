//! Empirical orders of convergence.

use serde::Serialize;

/// Errors below this are quadrature and solver noise; orders computed from
/// them are meaningless.
pub const ERROR_FLOOR: f64 = 1e-14;

/// Number of finest usable points in the least-squares fit.
pub const TAIL: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Eoc {
    Value(f64),
    #[serde(serialize_with = "floor_str")]
    Floor,
}

fn floor_str<S: serde::Serializer>(s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str("floor")
}

impl Eoc {
    pub fn value(self) -> Option<f64> {
        match self {
            Eoc::Value(v) => Some(v),
            Eoc::Floor => None,
        }
    }
}

impl std::fmt::Display for Eoc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Eoc::Value(v) => write!(f, "{v:.4}"),
            Eoc::Floor => f.write_str("floor"),
        }
    }
}

/// `log(e_{i-1} / e_i) / log(n_i / n_{i-1})`; the first entry, and entries
/// next to a failed solve, are `None`.
pub fn pairwise(ns: &[usize], errors: &[Option<f64>]) -> Vec<Option<Eoc>> {
    assert_eq!(ns.len(), errors.len());
    let mut out = vec![None];
    for i in 1..ns.len() {
        out.push(match (errors[i - 1], errors[i]) {
            (Some(a), Some(b)) if a < ERROR_FLOOR || b < ERROR_FLOOR => Some(Eoc::Floor),
            (Some(a), Some(b)) => Some(Eoc::Value((a / b).log2() / (ns[i] as f64 / ns[i - 1] as f64).log2())),
            _ => None,
        });
    }
    out.truncate(ns.len());
    out
}

/// Least-squares slope of `log e` against `log h` over the last [`TAIL`]
/// points whose error is at or above the floor. `None` if fewer than two.
pub fn tail_slope(ns: &[usize], errors: &[Option<f64>]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .zip(errors)
        .filter_map(|(&n, e)| e.filter(|&e| e >= ERROR_FLOOR).map(|e| (-(n as f64).log2(), e.log2())))
        .collect();
    let tail = &pts[pts.len().saturating_sub(TAIL)..];
    least_squares_slope(tail)
}

pub fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quartering_is_order_two() {
        assert_eq!(pairwise(&[4, 8], &[Some(1.0), Some(0.25)]), vec![None, Some(Eoc::Value(2.0))]);
        assert_eq!(pairwise(&[4, 8], &[Some(0.5), Some(0.5)])[1], Some(Eoc::Value(0.0)));
    }

    #[test]
    fn floor_and_failures() {
        let e = pairwise(&[4, 8, 16, 32], &[Some(1e-3), None, Some(1e-13), Some(1e-15)]);
        assert_eq!(e, vec![None, None, None, Some(Eoc::Floor)]);
        assert_eq!(tail_slope(&[4, 8], &[Some(1e-15), Some(1e-16)]), None);
        assert_eq!(serde_json::to_string(&Eoc::Floor).unwrap(), "\"floor\"");
        assert_eq!(serde_json::to_string(&Eoc::Value(1.5)).unwrap(), "1.5");
    }

    #[test]
    fn tail_uses_last_points_above_floor() {
        let ns = [4, 8, 16, 32, 64];
        // order 1 at the start, order 3 over the last three usable points
        let errs = [Some(1.0), Some(0.5), Some(0.5 / 8.0), Some(0.5 / 64.0), Some(1e-16)];
        let slope = tail_slope(&ns, &errs).unwrap();
        assert!((slope - 3.0).abs() < 1e-12, "{slope}");
    }

    proptest! {
        #[test]
        fn exact_power_laws_are_recovered(p in 0.5f64..7.0, c in 1e-3f64..1e3) {
            let ns = [4usize, 8, 16, 32];
            let errs: Vec<Option<f64>> = ns.iter().map(|&n| Some(c * (n as f64).powf(-p))).collect();
            prop_assume!(errs.iter().all(|e| e.unwrap() >= ERROR_FLOOR));
            for e in pairwise(&ns, &errs).into_iter().skip(1) {
                prop_assert!((e.unwrap().value().unwrap() - p).abs() < 1e-9);
            }
            prop_assert!((tail_slope(&ns, &errs).unwrap() - p).abs() < 1e-9);
        }
    }
}
