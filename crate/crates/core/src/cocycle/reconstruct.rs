use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::value::{real_pow, t_power, CocycleOrder, VectorValue};

use super::provider::{CocycleProvider, SharedProvider, TFunction};

/// `phi(lambda, t) = lambda^{-K} psi(lambda t) - psi(t) + t^K log(lambda) c`.
pub struct ReconstructedProvider {
    psi: Arc<dyn TFunction>,
    c: VectorValue,
    order: CocycleOrder,
}

impl ReconstructedProvider {
    pub fn psi(&self) -> &Arc<dyn TFunction> {
        &self.psi
    }

    pub fn c(&self) -> &VectorValue {
        &self.c
    }
}

impl CocycleProvider for ReconstructedProvider {
    fn order(&self) -> CocycleOrder {
        self.order
    }

    fn dim(&self) -> usize {
        self.psi.dim()
    }

    fn eval(&self, lambda: f64, t: f64) -> Result<VectorValue> {
        let scaled = self.psi.value(lambda * t)?;
        let mut out = scaled.scaled(self.order.scale_factor(lambda));
        out = out.sub(&self.psi.value(t)?);
        if !self.c.is_zero() {
            out.axpy(t_power(t, self.order) * lambda.ln(), &self.c);
        }
        Ok(out)
    }

    fn t_derivative(&self, order: usize, lambda: f64, t: f64) -> Option<Result<VectorValue>> {
        let scaled = self.psi.derivative(order, lambda * t)?;
        let plain = self.psi.derivative(order, t)?;
        Some((|| {
            let factor = real_pow(lambda, -self.order.value() + order as f64);
            let mut out = scaled?.scaled(factor).sub(&plain?);
            if !self.c.is_zero() {
                // c is nonzero only for integer K.
                let m = self.order.integer().unwrap_or(0) as usize;
                if order <= m {
                    let falling: f64 = ((m - order + 1)..=m).map(|v| v as f64).product();
                    let coef = falling * t.powi((m - order) as i32) * lambda.ln();
                    out.axpy(Complex64::new(coef, 0.0), &self.c);
                }
            }
            Ok(out)
        })())
    }
}

/// Builds the cocycle generated by `(psi, c)` at order `K`. A nonzero `c`
/// requires `K` to be a nonnegative integer; otherwise `t^K log(lambda) c`
/// would not be smooth at `t = 0`.
pub fn reconstruct_phi(psi: Arc<dyn TFunction>, c: VectorValue, order: CocycleOrder) -> Result<SharedProvider> {
    c.ensure_dim(psi.dim())?;
    if !c.is_zero() && order.integer().is_none() {
        return Err(Error::InvalidInput(format!(
            "c must vanish when the order {order} is not a nonnegative integer"
        )));
    }
    Ok(Arc::new(ReconstructedProvider { psi, c, order }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{verify_cocycle, CocycleGrid, FnTFunction, PolyExp};

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn exp_decay() -> Arc<dyn TFunction> {
        Arc::new(PolyExp::scalar(vec![], vec![(re(1.0), re(-1.0))]))
    }

    #[test]
    fn exponential_value() {
        let phi = reconstruct_phi(exp_decay(), VectorValue::zeros(1), CocycleOrder::real(-1.0).unwrap()).unwrap();
        let v = phi.eval(2.0, 1.0).unwrap()[0];
        let want = 2.0 * (-2f64).exp() - (-1f64).exp();
        assert!((v.re - want).abs() < 1e-15);
        assert!((want + 0.097_208_8).abs() < 1e-7);
    }

    #[test]
    fn pure_logarithm() {
        let zero: Arc<dyn TFunction> = Arc::new(FnTFunction::new(1, |_| VectorValue::zeros(1)));
        let phi = reconstruct_phi(zero, VectorValue::from_real(&[1.0]), CocycleOrder::real(0.0).unwrap()).unwrap();
        for (l, t) in [(2.0, 0.0), (0.3, 5.0)] {
            assert!((phi.eval(l, t).unwrap()[0].re - f64::ln(l)).abs() < 1e-15);
        }
    }

    #[test]
    fn cubic_with_log_term() {
        let psi: Arc<dyn TFunction> = Arc::new(PolyExp::scalar(vec![re(0.0), re(0.0), re(0.0), re(1.0)], vec![]));
        let phi = reconstruct_phi(psi, VectorValue::from_real(&[5.0]), CocycleOrder::real(2.0).unwrap()).unwrap();
        for (l, t) in [(2.0f64, 0.5f64), (0.7, 1.3), (3.0, 0.0)] {
            let want = (l - 1.0) * t.powi(3) + 5.0 * t * t * f64::ln(l);
            assert!((phi.eval(l, t).unwrap()[0].re - want).abs() < 1e-13);
            // second derivative: 6(l-1)t + 10 log l
            let d2 = phi.t_derivative(2, l, t).unwrap().unwrap()[0].re;
            assert!((d2 - (6.0 * (l - 1.0) * t + 10.0 * f64::ln(l))).abs() < 1e-12);
        }
        let r = verify_cocycle(phi.as_ref(), &CocycleGrid::standard()).unwrap();
        assert!(r.max < 1e-12);
    }

    #[test]
    fn log_term_needs_integer_order() {
        let err = reconstruct_phi(exp_decay(), VectorValue::from_real(&[1.0]), CocycleOrder::real(-1.0).unwrap());
        assert!(matches!(err, Err(Error::InvalidInput(_))));
    }
}
