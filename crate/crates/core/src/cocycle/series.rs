use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::value::{real_pow, CompensatedSum, OrderClass, VectorValue};

use super::provider::{checked_eval, CocycleProvider};

/// The base-case series is always anchored at `lambda = 1/2`.
pub const SERIES_LAMBDA: f64 = 0.5;

#[derive(Debug, Clone, Copy)]
pub struct SeriesSettings {
    /// Bound on the geometric tail.
    pub tol: f64,
    pub max_terms: usize,
    /// Terms summed before the tail bound is consulted.
    pub min_terms: usize,
}

impl Default for SeriesSettings {
    fn default() -> Self {
        Self {
            tol: 1e-13,
            max_terms: 200_000,
            min_terms: 4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SeriesValue {
    pub value: VectorValue,
    pub terms: usize,
    pub tail_bound: f64,
}

fn require_negative(phi: &dyn CocycleProvider) -> Result<f64> {
    let order = phi.order();
    if order.classify() != OrderClass::Negative {
        return Err(Error::OrderDomain {
            order: order.value(),
            expected: "Re K < 0",
        });
    }
    Ok(order.value().re)
}

/// `psi(t) = -sum_j phi(1/2, t / 2^j) 2^{jK}` for `Re K < 0`, truncated once
/// the geometric tail bound `M 2^{(J+1) Re K} / (1 - 2^{Re K})` drops below
/// the tolerance. `M` includes `|phi(1/2, 0)|`, the limit of the sampled terms.
pub fn series_psi_negative(phi: &dyn CocycleProvider, t: f64, settings: &SeriesSettings) -> Result<SeriesValue> {
    let re_k = require_negative(phi)?;
    let k = phi.order().value();
    let ratio = 2f64.powf(re_k);
    let tail_factor = 1.0 / (1.0 - ratio);
    let mut bound_m = checked_eval(phi, SERIES_LAMBDA, 0.0)?.norm_inf();
    let mut sum = CompensatedSum::new(phi.dim());
    let mut tail_bound = f64::INFINITY;
    for j in 0..settings.max_terms {
        let s = t * 0.5f64.powi(j as i32);
        let term = checked_eval(phi, SERIES_LAMBDA, s)?;
        bound_m = bound_m.max(term.norm_inf());
        sum.add_scaled(real_pow(2.0, k * j as f64), &term);
        tail_bound = bound_m * ratio.powi(j as i32 + 1) * tail_factor;
        if j + 1 >= settings.min_terms && tail_bound <= settings.tol {
            return Ok(SeriesValue {
                value: sum.value().scaled(Complex64::new(-1.0, 0.0)),
                terms: j + 1,
                tail_bound,
            });
        }
    }
    Err(Error::Convergence {
        what: "base-case series",
        achieved: tail_bound,
        iterations: settings.max_terms,
    })
}

/// The first `count` partial sums `S_J = -sum_{j<=J} phi(1/2, t/2^j) 2^{jK}`.
pub fn series_partial_sums(phi: &dyn CocycleProvider, t: f64, count: usize) -> Result<Vec<VectorValue>> {
    require_negative(phi)?;
    let k = phi.order().value();
    let mut sum = CompensatedSum::new(phi.dim());
    let mut out = Vec::with_capacity(count);
    for j in 0..count {
        let term = checked_eval(phi, SERIES_LAMBDA, t * 0.5f64.powi(j as i32))?;
        sum.add_scaled(real_pow(2.0, k * j as f64), &term);
        out.push(sum.value().scaled(Complex64::new(-1.0, 0.0)));
    }
    Ok(out)
}

/// Geometric-mean decay ratio of `|S_J - S_inf|` between `first` and `last`.
pub fn measured_decay_ratio(partials: &[VectorValue], limit: &VectorValue, first: usize, last: usize) -> f64 {
    let d_first = partials[first].distance(limit);
    let d_last = partials[last].distance(limit);
    (d_last / d_first).powf(1.0 / (last - first) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::FnProvider;
    use crate::value::CocycleOrder;

    fn order(re: f64, im: f64) -> CocycleOrder {
        CocycleOrder::new(Complex64::new(re, im)).unwrap()
    }

    #[test]
    fn zero_provider_sums_to_zero() {
        let r = series_psi_negative(&FnProvider::zero(order(-1.0, 0.0), 2), 0.7, &SeriesSettings::default()).unwrap();
        assert!(r.value.is_zero());
    }

    #[test]
    fn exponential_coboundary_recovers_psi() {
        let phi = FnProvider::scalar(order(-1.0, 0.0), |l, t| Complex64::new(l * (-l * t).exp() - (-t).exp(), 0.0));
        let settings = SeriesSettings {
            tol: 1e-12,
            ..Default::default()
        };
        let r = series_psi_negative(&phi, 1.0, &settings).unwrap();
        assert!((r.value[0].re - (-1f64).exp()).abs() < 1e-10);
        assert!(r.value[0].im.abs() < 1e-15);
    }

    #[test]
    fn constant_cocycle_matches_zero_value() {
        // phi(l, t) = l^{1/2} - 1 = (l^{-K} - 1) v with K = -1/2, v = 1; psi = v.
        let phi = FnProvider::scalar(order(-0.5, 0.0), |l, _| Complex64::new(l.sqrt() - 1.0, 0.0));
        let r = series_psi_negative(&phi, 0.0, &SeriesSettings::default()).unwrap();
        assert!((r.value[0].re - 1.0).abs() < 1e-12, "{:?}", r.value);
    }

    #[test]
    fn scaling_step_identity() {
        // Vanishes at lambda = 1/2, so every series term is zero.
        let phi = FnProvider::scalar(order(-0.7, 0.2), |l, t| {
            Complex64::new((2.0 * std::f64::consts::PI * l.log2()).sin() * (-t).exp(), 0.0)
        });
        let r = series_psi_negative(&phi, 1.3, &SeriesSettings::default()).unwrap();
        assert!(r.value.norm_inf() < 1e-13);
    }

    #[test]
    fn nonnegative_order_is_rejected() {
        let err = series_psi_negative(&FnProvider::zero(order(0.5, 0.0), 1), 1.0, &SeriesSettings::default());
        assert!(matches!(err, Err(Error::OrderDomain { .. })));
    }

    #[test]
    fn slow_convergence_reports_bound() {
        let phi = FnProvider::scalar(order(-1e-4, 0.0), |l, _| Complex64::new(l.powf(1e-4) - 1.0, 0.0));
        let settings = SeriesSettings {
            tol: 1e-14,
            max_terms: 50,
            min_terms: 1,
        };
        assert!(matches!(
            series_psi_negative(&phi, 1.0, &settings),
            Err(Error::Convergence { iterations: 50, .. })
        ));
    }
}
