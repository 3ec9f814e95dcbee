//! Named exact solutions for manufactured problems.

use std::f64::consts::PI;

use fredholm_core::EvaluableFunction;

pub const SOLUTIONS: [&str; 5] = ["sin_pi", "poly_cubic", "exp", "linear4", "zero"];

/// `sin(pi s)`, `s^3 + 1`, `e^s`, `4s` or `0`.
pub fn solution_by_name(name: &str) -> Option<EvaluableFunction> {
    let f = match name {
        "sin_pi" => EvaluableFunction::new(name, vec![], |s| (PI * s).sin()),
        "poly_cubic" => EvaluableFunction::new(name, vec![], |s| s * s * s + 1.0),
        "exp" => EvaluableFunction::new(name, vec![], f64::exp),
        "linear4" => EvaluableFunction::new(name, vec![], |s| 4.0 * s),
        "zero" => EvaluableFunction::zero().with_tag(name),
        _ => return None,
    };
    Some(f)
}
