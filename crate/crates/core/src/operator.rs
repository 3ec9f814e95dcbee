//! The integral operator `(Kx)(s) = int_0^1 kappa(s, t) x(t) dt` and its
//! `s`-derivative, evaluated by Gauss rules split at the diagonal and at
//! every declared kink of `x`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::function::EvaluableFunction;
use crate::kernel::{GreensKernel, KernelPiece};
use crate::quadrature::{GaussRule, DEFAULT_ORDER};

#[derive(Debug, Clone)]
pub struct IntegralOperator {
    kernel: Arc<GreensKernel>,
    rule: Arc<GaussRule>,
}

impl IntegralOperator {
    /// Operator with the default 20-point rule per segment.
    pub fn new(kernel: Arc<GreensKernel>) -> Self {
        let rule = GaussRule::new(DEFAULT_ORDER).expect("default order is valid");
        Self {
            kernel,
            rule: Arc::new(rule),
        }
    }

    pub fn with_rule(kernel: Arc<GreensKernel>, rule: Arc<GaussRule>) -> Self {
        Self { kernel, rule }
    }

    pub fn with_order(kernel: Arc<GreensKernel>, q: usize) -> Result<Self> {
        Ok(Self::with_rule(kernel, Arc::new(GaussRule::new(q)?)))
    }

    pub fn kernel(&self) -> &Arc<GreensKernel> {
        &self.kernel
    }

    pub fn rule(&self) -> &Arc<GaussRule> {
        &self.rule
    }

    /// `(Kx)(s)`.
    pub fn apply(&self, x: &EvaluableFunction, s: f64) -> Result<f64> {
        check_domain(s)?;
        self.integrate_pieces(x, s, |p, s, t| p.value(s, t))
    }

    /// `(Kx)'(s)`; the diagonal boundary terms of the Leibniz rule cancel by
    /// continuity, leaving the integrals of `D^{(1,0)} kappa_i`.
    pub fn apply_ds(&self, x: &EvaluableFunction, s: f64) -> Result<f64> {
        check_domain(s)?;
        if !self.kernel.has_analytic_partials() {
            return Err(Error::MissingKernelDerivative(self.kernel.name().to_string()));
        }
        self.integrate_pieces(x, s, |p, s, t| {
            p.analytic_partial(1, 0, s, t).expect("partials checked above")
        })
    }

    fn integrate_pieces(
        &self,
        x: &EvaluableFunction,
        s: f64,
        weight: impl Fn(&KernelPiece, f64, f64) -> f64,
    ) -> Result<f64> {
        let mut total = 0.0;
        let mut lo = 0.0;
        let kinks = x.kinks();
        // kinks are sorted; merge in the diagonal point s
        let mut diag_done = false;
        let mut cuts = kinks.iter().copied().filter(|&c| c > 0.0 && c < 1.0).peekable();
        loop {
            let next = match (cuts.peek().copied(), diag_done) {
                (Some(c), false) if s <= c => {
                    diag_done = true;
                    s
                }
                (Some(c), _) => {
                    cuts.next();
                    c
                }
                (None, false) => {
                    diag_done = true;
                    s
                }
                (None, true) => break,
            };
            if next > lo {
                let piece = if next <= s { self.kernel.lower() } else { self.kernel.upper() };
                total += self.rule.integrate(lo, next, |t| weight(piece, s, t) * x.eval(t))?;
                lo = next;
            }
        }
        if lo < 1.0 {
            let piece = self.kernel.upper();
            total += self.rule.integrate(lo, 1.0, |t| weight(piece, s, t) * x.eval(t))?;
        }
        Ok(total)
    }

    /// Lazily evaluated `Kx`. Errors surface as NaN, which the quadrature of
    /// any outer integral reports with its abscissa. `K` adds no kinks; those
    /// of `x` are kept so downstream quadrature still splits there.
    pub fn image(&self, x: &EvaluableFunction) -> EvaluableFunction {
        let op = self.clone();
        let inner = x.clone();
        EvaluableFunction::new(format!("K({})", x.tag()), x.kinks().to_vec(), move |s| {
            op.apply(&inner, s).unwrap_or(f64::NAN)
        })
    }

    /// Lazily evaluated `(Kx)'`.
    pub fn image_ds(&self, x: &EvaluableFunction) -> Result<EvaluableFunction> {
        if !self.kernel.has_analytic_partials() {
            return Err(Error::MissingKernelDerivative(self.kernel.name().to_string()));
        }
        let op = self.clone();
        let inner = x.clone();
        Ok(EvaluableFunction::new(
            format!("(K({}))'", x.tag()),
            x.kinks().to_vec(),
            move |s| op.apply_ds(&inner, s).unwrap_or(f64::NAN),
        ))
    }
}

fn check_domain(s: f64) -> Result<()> {
    if (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::OutOfDomain(s))
    }
}
