use num_complex::Complex64;

use crate::error::{Error, Result};

use super::provider::{checked_eval, CocycleProvider};

/// Sample points for checking the cocycle relation.
#[derive(Debug, Clone, PartialEq)]
pub struct CocycleGrid {
    pub lambda_pairs: Vec<(f64, f64)>,
    pub t_values: Vec<f64>,
}

impl CocycleGrid {
    /// All pairs from `lambdas x lambdas` against `t_values`.
    pub fn product(lambdas: &[f64], t_values: &[f64]) -> Self {
        let lambda_pairs = lambdas
            .iter()
            .flat_map(|&a| lambdas.iter().map(move |&b| (a, b)))
            .collect();
        Self {
            lambda_pairs,
            t_values: t_values.to_vec(),
        }
    }

    /// The 5 x 5 x 7 grid used for fidelity checks.
    pub fn standard() -> Self {
        Self::product(&[0.5, 0.75, 1.5, 2.0, 3.0], &[0.0, 0.1, 0.3, 0.6, 1.0, 1.5, 2.0])
    }

    pub fn len(&self) -> usize {
        self.lambda_pairs.len() * self.t_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One row of a residual table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualSample {
    pub lambda1: f64,
    pub lambda2: f64,
    pub t: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub max: f64,
    pub mean: f64,
    /// Largest magnitude of any provider value seen, for relative reporting.
    pub scale: f64,
    pub samples: Vec<ResidualSample>,
}

impl ResidualReport {
    pub fn worst(&self) -> Option<&ResidualSample> {
        self.samples
            .iter()
            .fold(None, |acc: Option<&ResidualSample>, s| match acc {
                Some(a) if a.residual >= s.residual => Some(a),
                _ => Some(s),
            })
    }
}

/// Sup-norm defect of `phi(l1 l2, t) - l2^{-K} phi(l1, t l2) - phi(l2, t)`
/// over the grid.
pub fn verify_cocycle(phi: &dyn CocycleProvider, grid: &CocycleGrid) -> Result<ResidualReport> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("cocycle grid is empty".into()));
    }
    let order = phi.order();
    let mut samples = Vec::with_capacity(grid.len());
    let mut scale: f64 = 0.0;
    for &(l1, l2) in &grid.lambda_pairs {
        let factor = order.scale_factor(l2);
        for &t in &grid.t_values {
            let lhs = checked_eval(phi, l1 * l2, t)?;
            let shifted = checked_eval(phi, l1, t * l2)?;
            let tail = checked_eval(phi, l2, t)?;
            scale = scale.max(lhs.norm_inf()).max(shifted.norm_inf()).max(tail.norm_inf());
            let mut defect = lhs.sub(&tail);
            defect.axpy(-factor, &shifted);
            samples.push(ResidualSample {
                lambda1: l1,
                lambda2: l2,
                t,
                residual: defect.norm_inf(),
            });
        }
    }
    let max = samples.iter().map(|s| s.residual).fold(0.0, f64::max);
    let mean = crate::value::compensated_sum(samples.iter().map(|s| Complex64::new(s.residual, 0.0))).re
        / samples.len() as f64;
    Ok(ResidualReport {
        max,
        mean,
        scale,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::FnProvider;
    use crate::value::{CocycleOrder, VectorValue};

    fn order(k: f64) -> CocycleOrder {
        CocycleOrder::real(k).unwrap()
    }

    #[test]
    fn zero_function_has_zero_residual() {
        let r = verify_cocycle(&FnProvider::zero(order(2.5), 3), &CocycleGrid::standard()).unwrap();
        assert_eq!(r.max, 0.0);
        assert_eq!(r.samples.len(), 175);
    }

    #[test]
    fn exponential_coboundary() {
        let phi = FnProvider::scalar(order(-1.0), |l, t| Complex64::new(l * (-l * t).exp() - (-t).exp(), 0.0));
        let grid = CocycleGrid::product(&[0.5, 2.0], &[0.0, 0.3, 1.0]);
        let r = verify_cocycle(&phi, &grid).unwrap();
        assert!(r.max <= 1e-13, "{}", r.max);
    }

    #[test]
    fn logarithm_is_an_order_zero_cocycle() {
        let phi = FnProvider::scalar(order(0.0), |l, _| Complex64::new(l.ln(), 0.0));
        let r = verify_cocycle(&phi, &CocycleGrid::standard()).unwrap();
        assert!(r.max <= 4.0 * f64::EPSILON, "{}", r.max);
    }

    #[test]
    fn violation_is_detected() {
        let phi = FnProvider::scalar(order(-1.0), |l, t| Complex64::new(l + t, 0.0));
        let r = verify_cocycle(&phi, &CocycleGrid::standard()).unwrap();
        assert!(r.max > 0.1);
        assert!(r.worst().is_some());
    }

    #[test]
    fn non_finite_output_carries_location() {
        let phi = FnProvider::new(order(-1.0), 1, |l, t| {
            VectorValue::from_real(&[if t > 0.9 && l > 1.0 { f64::NAN } else { 0.0 }])
        });
        let err = verify_cocycle(&phi, &CocycleGrid::standard()).unwrap_err();
        assert!(matches!(err, Error::NonFinite { t, .. } if t > 0.9));
    }

    #[test]
    fn empty_grid_rejected() {
        let grid = CocycleGrid::product(&[], &[0.0]);
        assert!(verify_cocycle(&FnProvider::zero(order(0.0), 1), &grid).is_err());
    }
}
