use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::diff::{horner, horner_derivative, FiniteDifference};
use crate::error::{Error, Result};
use crate::value::{CocycleOrder, OrderClass, VectorValue};

use super::provider::{checked_eval, derivative_at, has_exact_derivatives, taylor_coefficients, CocycleProvider, SharedProvider};

/// The `t = 0` term removed before dividing by `t`.
#[derive(Debug, Clone, PartialEq)]
pub enum Subtraction {
    /// `c log(lambda)`, for order zero.
    Log(VectorValue),
    /// `(lambda^{-K} - 1) v`, for nonzero order.
    Value(VectorValue),
}

impl Subtraction {
    pub fn term(&self, order: CocycleOrder, lambda: f64) -> VectorValue {
        match self {
            Subtraction::Log(c) => c.scaled(Complex64::new(lambda.ln(), 0.0)),
            Subtraction::Value(v) => v.scaled(order.scale_factor(lambda) - 1.0),
        }
    }

    pub fn constant(&self) -> &VectorValue {
        match self {
            Subtraction::Log(c) | Subtraction::Value(c) => c,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReductionSettings {
    /// Lambdas at which the subtraction is checked to vanish at `t = 0`.
    pub check_lambdas: Vec<f64>,
    /// Allowed `|phi(lambda,0) - term|`, relative to `max(1, |phi(lambda,0)|)`.
    pub tol: f64,
    pub fd: FiniteDifference,
    /// Taylor terms kept when closed-form derivatives are available.
    pub taylor_terms: usize,
    /// Below this `t` the Taylor expansion replaces the difference quotient.
    pub taylor_radius: f64,
    /// Same, when derivatives come from finite differences.
    pub fd_taylor_radius: f64,
    pub fd_taylor_terms: usize,
}

impl Default for ReductionSettings {
    fn default() -> Self {
        Self {
            check_lambdas: vec![0.5, 2.0, std::f64::consts::E, 3.0],
            tol: 1e-8,
            fd: FiniteDifference::default(),
            taylor_terms: 24,
            taylor_radius: 0.25,
            fd_taylor_radius: 1e-4,
            fd_taylor_terms: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// Base is a polynomial in `t` of at most this degree.
    Polynomial(usize),
    /// Base publishes closed-form derivatives.
    Analytic,
    FiniteDifference,
}

const CACHE_CAPACITY: usize = 32;

/// `t^{-depth} (phi(lambda, t) - sum_{i<depth} phi_i(lambda) t^i)` where
/// `phi_i` are the Taylor coefficients of the base cocycle at `t = 0`.
///
/// Nested reductions are flattened onto the original base provider, so the
/// division by `t^depth` is done once, and near `t = 0` the value comes from
/// the Taylor expansion rather than a difference quotient.
pub struct ReducedProvider {
    base: SharedProvider,
    depth: usize,
    order: CocycleOrder,
    mode: Mode,
    settings: ReductionSettings,
    cache: Mutex<Vec<(u64, Arc<Vec<VectorValue>>)>>,
}

impl std::fmt::Debug for ReducedProvider {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ReducedProvider")
            .field("depth", &self.depth)
            .field("order", &self.order)
            .field("mode", &self.mode)
            .finish_non_exhaustive()
    }
}

impl ReducedProvider {
    fn new(base: SharedProvider, depth: usize, settings: ReductionSettings) -> Self {
        let mode = match base.poly_degree_hint() {
            Some(d) => Mode::Polynomial(d),
            None if has_exact_derivatives(base.as_ref()) => Mode::Analytic,
            None => Mode::FiniteDifference,
        };
        let order = base.order().shifted(depth);
        Self {
            base,
            depth,
            order,
            mode,
            settings,
            cache: Mutex::new(Vec::new()),
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn base(&self) -> &SharedProvider {
        &self.base
    }

    fn coefficient_count(&self) -> usize {
        match self.mode {
            Mode::Polynomial(d) => d + 1,
            Mode::Analytic => self.depth + self.settings.taylor_terms,
            Mode::FiniteDifference => self.depth + self.settings.fd_taylor_terms,
        }
    }

    /// Taylor coefficients of the base at `lambda`.
    fn coefficients(&self, lambda: f64) -> Result<Arc<Vec<VectorValue>>> {
        let key = lambda.to_bits();
        {
            let cache = self.cache.lock().expect("coefficient cache poisoned");
            if let Some((_, c)) = cache.iter().find(|(k, _)| *k == key) {
                return Ok(Arc::clone(c));
            }
        }
        let coeffs = Arc::new(taylor_coefficients(
            self.base.as_ref(),
            lambda,
            self.coefficient_count(),
            &self.settings.fd,
        )?);
        let mut cache = self.cache.lock().expect("coefficient cache poisoned");
        if cache.len() >= CACHE_CAPACITY {
            cache.remove(0);
        }
        cache.push((key, Arc::clone(&coeffs)));
        Ok(coeffs)
    }

    fn shifted(&self, coeffs: &[VectorValue]) -> Vec<VectorValue> {
        coeffs.iter().skip(self.depth).cloned().collect()
    }
}

impl CocycleProvider for ReducedProvider {
    fn order(&self) -> CocycleOrder {
        self.order
    }

    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn eval(&self, lambda: f64, t: f64) -> Result<VectorValue> {
        let dim = self.dim();
        let coeffs = self.coefficients(lambda)?;
        let radius = match self.mode {
            Mode::Polynomial(_) => f64::INFINITY,
            Mode::Analytic => self.settings.taylor_radius,
            Mode::FiniteDifference => self.settings.fd_taylor_radius,
        };
        if t < radius {
            return Ok(horner(&self.shifted(&coeffs), t, dim));
        }
        let value = checked_eval(self.base.as_ref(), lambda, t)?;
        let head = horner(&coeffs[..self.depth], t, dim);
        Ok(value.sub(&head).scaled(Complex64::new(t.powi(-(self.depth as i32)), 0.0)))
    }

    fn t_derivative(&self, order: usize, lambda: f64, t: f64) -> Option<Result<VectorValue>> {
        match self.mode {
            Mode::Polynomial(_) => Some(
                self.coefficients(lambda)
                    .map(|c| horner_derivative(&self.shifted(&c), order, t, self.dim())),
            ),
            Mode::Analytic if t == 0.0 => {
                let total = self.depth + order;
                let scale: f64 = ((order + 1)..=total).map(|v| 1.0 / v as f64).product();
                Some(
                    derivative_at(self.base.as_ref(), total, lambda, 0.0, &self.settings.fd)
                        .map(|d| d.scaled(Complex64::new(scale, 0.0))),
                )
            }
            _ => None,
        }
    }

    fn poly_degree_hint(&self) -> Option<usize> {
        match self.mode {
            Mode::Polynomial(d) => Some(d.saturating_sub(self.depth)),
            _ => None,
        }
    }

    fn as_reduced(&self) -> Option<&ReducedProvider> {
        Some(self)
    }
}

/// Removes the `t = 0` term and divides by `t`, returning a cocycle of order
/// `K - 1`. The subtraction must cancel `phi(lambda, 0)` within tolerance.
pub fn reduce_order(phi: SharedProvider, subtraction: &Subtraction, settings: &ReductionSettings) -> Result<SharedProvider> {
    let order = phi.order();
    match (subtraction, order.classify()) {
        (Subtraction::Log(_), OrderClass::NonNegativeInteger(0)) => {}
        (Subtraction::Log(_), _) => {
            return Err(Error::OrderDomain {
                order: order.value(),
                expected: "K = 0 for a logarithmic subtraction",
            })
        }
        (Subtraction::Value(_), OrderClass::NonNegativeInteger(0)) => {
            return Err(Error::OrderDomain {
                order: order.value(),
                expected: "K != 0 for a value subtraction",
            })
        }
        _ => {}
    }
    subtraction.constant().ensure_dim(phi.dim())?;
    let mut worst: f64 = 0.0;
    let mut allowed = settings.tol;
    for &l in &settings.check_lambdas {
        let at_zero = checked_eval(phi.as_ref(), l, 0.0)?;
        let residual = at_zero.sub(&subtraction.term(order, l)).norm_inf();
        let tol = settings.tol * at_zero.norm_inf().max(1.0);
        if residual / tol > worst / allowed {
            worst = residual;
            allowed = tol;
        }
    }
    if worst > allowed {
        return Err(Error::SubtractionFailure {
            residual: worst,
            tol: allowed,
        });
    }
    let reduced = match phi.as_reduced() {
        Some(inner) => ReducedProvider::new(Arc::clone(&inner.base), inner.depth + 1, settings.clone()),
        None => ReducedProvider::new(phi, 1, settings.clone()),
    };
    Ok(Arc::new(reduced))
}
