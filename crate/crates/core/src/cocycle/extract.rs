use num_complex::Complex64;

use crate::diff::FiniteDifference;
use crate::error::{Error, Result};
use crate::value::{CompensatedSum, OrderClass, VectorValue};

use super::provider::{checked_eval, derivative_at, CocycleProvider};

/// Minimum `|log lambda|` for dividing by `log lambda`.
pub const LOG_GUARD: f64 = 0.1;
/// Minimum `|lambda^{-K} - 1|` for dividing by it.
pub const POWER_GUARD: f64 = 0.05;

/// Lambda set and agreement tolerance for zero-value extractions.
#[derive(Debug, Clone)]
pub struct ExtractionSettings {
    pub lambdas: Vec<f64>,
    /// Allowed spread, relative to `max(1, |value|)`.
    pub tol: f64,
    pub fd: FiniteDifference,
}

impl Default for ExtractionSettings {
    fn default() -> Self {
        Self {
            lambdas: vec![2.0, std::f64::consts::E, 3.0],
            tol: 1e-8,
            fd: FiniteDifference::default(),
        }
    }
}

/// A constant recovered independently at several lambdas and averaged.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroValueExtraction {
    pub value: VectorValue,
    pub lambdas_used: Vec<f64>,
    pub per_lambda: Vec<VectorValue>,
    /// Largest pairwise sup-norm deviation between per-lambda values.
    pub spread: f64,
}

fn combine(
    what: &'static str,
    lambdas: Vec<f64>,
    per_lambda: Vec<VectorValue>,
    dim: usize,
    tol: f64,
) -> Result<ZeroValueExtraction> {
    let mut sum = CompensatedSum::new(dim);
    for v in &per_lambda {
        sum.add(v);
    }
    let value = sum.value().scaled(Complex64::new(1.0 / per_lambda.len() as f64, 0.0));
    let mut spread: f64 = 0.0;
    for (i, a) in per_lambda.iter().enumerate() {
        for b in &per_lambda[i + 1..] {
            spread = spread.max(a.distance(b));
        }
    }
    let allowed = tol * value.norm_inf().max(1.0);
    if spread > allowed {
        return Err(Error::Inconsistent {
            what,
            spread,
            tol: allowed,
        });
    }
    Ok(ZeroValueExtraction {
        value,
        lambdas_used: lambdas,
        per_lambda,
        spread,
    })
}

fn log_guarded(lambdas: &[f64]) -> Result<Vec<f64>> {
    for &l in lambdas {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidInput(format!("lambda {l} is not a positive number")));
        }
    }
    let kept: Vec<f64> = lambdas.iter().copied().filter(|l| l.ln().abs() >= LOG_GUARD).collect();
    if kept.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no lambda in {lambdas:?} satisfies |log lambda| >= {LOG_GUARD}"
        )));
    }
    Ok(kept)
}

/// `c` from `phi(lambda, 0) = c log(lambda)` for an order-zero cocycle.
pub fn extract_c_at_zero(phi: &dyn CocycleProvider, settings: &ExtractionSettings) -> Result<ZeroValueExtraction> {
    let order = phi.order();
    if order.classify() != OrderClass::NonNegativeInteger(0) {
        return Err(Error::OrderDomain {
            order: order.value(),
            expected: "K = 0",
        });
    }
    let lambdas = log_guarded(&settings.lambdas)?;
    let per_lambda = lambdas
        .iter()
        .map(|&l| Ok(checked_eval(phi, l, 0.0)?.scaled(Complex64::new(1.0 / l.ln(), 0.0))))
        .collect::<Result<Vec<_>>>()?;
    combine("c = phi(lambda,0)/log(lambda)", lambdas, per_lambda, phi.dim(), settings.tol)
}

/// `v` from `phi(lambda, 0) = (lambda^{-K} - 1) v` for `K != 0`. Lambdas with
/// `|lambda^{-K} - 1|` below [`POWER_GUARD`] are skipped.
pub fn extract_v_at_zero(phi: &dyn CocycleProvider, settings: &ExtractionSettings) -> Result<ZeroValueExtraction> {
    let order = phi.order();
    if order.classify() == OrderClass::NonNegativeInteger(0) {
        return Err(Error::OrderDomain {
            order: order.value(),
            expected: "K != 0",
        });
    }
    let mut lambdas = Vec::new();
    let mut per_lambda = Vec::new();
    for &l in &settings.lambdas {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidInput(format!("lambda {l} is not a positive number")));
        }
        let denom = order.scale_factor(l) - 1.0;
        if denom.norm() < POWER_GUARD {
            continue;
        }
        lambdas.push(l);
        per_lambda.push(checked_eval(phi, l, 0.0)?.scaled(denom.inv()));
    }
    if lambdas.is_empty() {
        return Err(Error::DegenerateLambda { order: order.value() });
    }
    combine(
        "v = phi(lambda,0)/(lambda^-K - 1)",
        lambdas,
        per_lambda,
        phi.dim(),
        settings.tol,
    )
}

/// `c = phi^{(K)}(lambda, 0) / (K! log lambda)` for `K` a nonnegative integer,
/// averaged over the admissible lambdas.
pub fn c_by_derivative(phi: &dyn CocycleProvider, settings: &ExtractionSettings) -> Result<ZeroValueExtraction> {
    let order = phi.order();
    let Some(m) = order.integer() else {
        return Err(Error::OrderDomain {
            order: order.value(),
            expected: "K a nonnegative integer",
        });
    };
    let lambdas = log_guarded(&settings.lambdas)?;
    let factorial: f64 = (1..=m).map(f64::from).product();
    let per_lambda = lambdas
        .iter()
        .map(|&l| {
            let d = derivative_at(phi, m as usize, l, 0.0, &settings.fd)?;
            Ok(d.scaled(Complex64::new(1.0 / (factorial * l.ln()), 0.0)))
        })
        .collect::<Result<Vec<_>>>()?;
    combine("c = phi^(K)(lambda,0)/(K! log lambda)", lambdas, per_lambda, phi.dim(), settings.tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::FnProvider;
    use crate::value::CocycleOrder;

    fn order(k: f64) -> CocycleOrder {
        CocycleOrder::real(k).unwrap()
    }

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn c_from_log_form() {
        let phi = FnProvider::scalar(order(0.0), |l, _| re(3.0 * l.ln()));
        let c = extract_c_at_zero(&phi, &ExtractionSettings::default()).unwrap();
        assert!((c.value[0].re - 3.0).abs() < 1e-15);
        assert!(c.spread < 1e-15);
    }

    #[test]
    fn c_of_zero_is_zero() {
        let c = extract_c_at_zero(&FnProvider::zero(order(0.0), 2), &ExtractionSettings::default()).unwrap();
        assert!(c.value.is_zero());
    }

    #[test]
    fn c_requires_order_zero() {
        let r = extract_c_at_zero(&FnProvider::zero(order(1.0), 1), &ExtractionSettings::default());
        assert!(matches!(r, Err(Error::OrderDomain { .. })));
    }

    #[test]
    fn c_with_only_near_one_lambdas_is_rejected() {
        let settings = ExtractionSettings {
            lambdas: vec![1.05, 0.98],
            ..Default::default()
        };
        assert!(extract_c_at_zero(&FnProvider::zero(order(0.0), 1), &settings).is_err());
    }

    #[test]
    fn v_from_power_form() {
        let phi = FnProvider::scalar(order(1.0), |l, _| re((1.0 / l - 1.0) * 7.0));
        let v = extract_v_at_zero(&phi, &ExtractionSettings::default()).unwrap();
        assert!((v.value[0].re - 7.0).abs() < 1e-14);
        assert_eq!(v.lambdas_used.len(), 3);
    }

    #[test]
    fn v_skips_degenerate_lambdas_on_imaginary_axis() {
        // K = 0.05i: only lambda = 3 clears the guard (|3^{-K} - 1| ~ 0.055).
        let k = CocycleOrder::new(Complex64::new(0.0, 0.05)).unwrap();
        let phi = FnProvider::scalar(k, move |l, _| (k.scale_factor(l) - 1.0) * 2.0);
        let v = extract_v_at_zero(&phi, &ExtractionSettings::default()).unwrap();
        assert_eq!(v.lambdas_used, vec![3.0]);
        assert!((v.value[0] - 2.0).norm() < 1e-13);

        let k = CocycleOrder::new(Complex64::new(0.0, 0.01)).unwrap();
        let phi = FnProvider::zero(k, 1);
        assert!(matches!(
            extract_v_at_zero(&phi, &ExtractionSettings::default()),
            Err(Error::DegenerateLambda { .. })
        ));
    }

    #[test]
    fn v_inconsistency_is_flagged() {
        let phi = FnProvider::scalar(order(1.0), |l, _| re(l));
        assert!(matches!(
            extract_v_at_zero(&phi, &ExtractionSettings::default()),
            Err(Error::Inconsistent { .. })
        ));
    }

    #[test]
    fn c_by_derivative_of_monomial() {
        let phi = FnProvider::scalar(order(2.0), |l, t| re(5.0 * t * t * l.ln())).with_poly_degree(2);
        let settings = ExtractionSettings {
            lambdas: vec![2.0, 3.0],
            ..Default::default()
        };
        let c = c_by_derivative(&phi, &settings).unwrap();
        assert!((c.value[0].re - 5.0).abs() < 1e-12, "{:?}", c.value);
    }

    #[test]
    fn c_by_derivative_finite_differences() {
        // No hint, no closed form: falls back to extrapolated differences.
        let phi = FnProvider::scalar(order(1.0), |l, t| re((1.0 / l) * (-l * t).exp() - (-t).exp() + 4.0 * t * l.ln()));
        let c = c_by_derivative(&phi, &ExtractionSettings::default()).unwrap();
        assert!((c.value[0].re - 4.0).abs() < 1e-8, "{:?}", c.value);
    }

    #[test]
    fn c_by_derivative_refuses_non_integer_order() {
        let phi = FnProvider::scalar(order(-1.0), |l, t| re(l * (-l * t).exp() - (-t).exp()));
        assert!(matches!(
            c_by_derivative(&phi, &ExtractionSettings::default()),
            Err(Error::OrderDomain { .. })
        ));
    }
}
