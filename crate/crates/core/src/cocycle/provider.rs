use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::diff::{polynomial_coefficients, FiniteDifference};
use crate::error::{Error, Result};
use crate::value::{CocycleOrder, VectorValue};

use super::reduce::ReducedProvider;

/// A smooth `phi: (0, inf) x [0, inf) -> V` satisfying the scaling cocycle
/// relation of order [`CocycleProvider::order`].
///
/// Implementations must tolerate concurrent calls.
pub trait CocycleProvider: Send + Sync {
    fn order(&self) -> CocycleOrder;

    /// Dimension of the target space.
    fn dim(&self) -> usize;

    fn eval(&self, lambda: f64, t: f64) -> Result<VectorValue>;

    /// Closed-form `order`-th t-derivative, when the provider knows one.
    fn t_derivative(&self, _order: usize, _lambda: f64, _t: f64) -> Option<Result<VectorValue>> {
        None
    }

    /// Present when `eval(lambda, .)` is a polynomial in `t` of at most this degree.
    fn poly_degree_hint(&self) -> Option<usize> {
        None
    }

    #[doc(hidden)]
    fn as_reduced(&self) -> Option<&ReducedProvider> {
        None
    }
}

pub type SharedProvider = Arc<dyn CocycleProvider>;

/// Evaluates the provider and rejects non-finite output.
pub fn checked_eval(p: &dyn CocycleProvider, lambda: f64, t: f64) -> Result<VectorValue> {
    if !(lambda > 0.0) || !(t >= 0.0) || !lambda.is_finite() || !t.is_finite() {
        return Err(Error::InvalidInput(format!(
            "cocycle evaluated outside its domain: lambda={lambda}, t={t}"
        )));
    }
    let v = p.eval(lambda, t)?;
    v.ensure_dim(p.dim())?;
    if !v.is_finite() {
        return Err(Error::NonFinite { lambda, t });
    }
    Ok(v)
}

/// Whether the provider publishes closed-form t-derivatives.
pub fn has_exact_derivatives(p: &dyn CocycleProvider) -> bool {
    p.t_derivative(1, 1.0, 0.0).is_some()
}

/// `order`-th t-derivative at `(lambda, t)`, preferring the closed form,
/// then exact polynomial interpolation, then finite differences.
pub fn derivative_at(
    p: &dyn CocycleProvider,
    order: usize,
    lambda: f64,
    t: f64,
    fd: &FiniteDifference,
) -> Result<VectorValue> {
    if order == 0 {
        return checked_eval(p, lambda, t);
    }
    if let Some(d) = p.t_derivative(order, lambda, t) {
        let d = d?;
        if !d.is_finite() {
            return Err(Error::NonFinite { lambda, t });
        }
        return Ok(d);
    }
    if let Some(degree) = p.poly_degree_hint() {
        if order > degree {
            return Ok(VectorValue::zeros(p.dim()));
        }
        let coeffs = polynomial_coefficients(|s| checked_eval(p, lambda, s), degree, 1.0)?;
        return Ok(crate::diff::horner_derivative(&coeffs, order, t, p.dim()));
    }
    Ok(fd.derivative(|s| checked_eval(p, lambda, s), order, t)?.value)
}

/// Taylor coefficients `phi^{(i)}(lambda, 0) / i!` for `i < count`.
pub fn taylor_coefficients(
    p: &dyn CocycleProvider,
    lambda: f64,
    count: usize,
    fd: &FiniteDifference,
) -> Result<Vec<VectorValue>> {
    let dim = p.dim();
    if let (Some(degree), false) = (p.poly_degree_hint(), has_exact_derivatives(p)) {
        let mut coeffs = polynomial_coefficients(|s| checked_eval(p, lambda, s), degree, 1.0)?;
        coeffs.resize(count.max(degree + 1), VectorValue::zeros(dim));
        coeffs.truncate(count);
        return Ok(coeffs);
    }
    let mut out = Vec::with_capacity(count);
    let mut factorial = 1.0;
    for i in 0..count {
        if i > 0 {
            factorial *= i as f64;
        }
        if p.poly_degree_hint().is_some_and(|d| i > d) {
            out.push(VectorValue::zeros(dim));
            continue;
        }
        let d = derivative_at(p, i, lambda, 0.0, fd)?;
        out.push(d.scaled(Complex64::new(1.0 / factorial, 0.0)));
    }
    Ok(out)
}

type EvalFn = dyn Fn(f64, f64) -> VectorValue + Send + Sync;
type DerivFn = dyn Fn(usize, f64, f64) -> VectorValue + Send + Sync;

/// Provider backed by closures.
#[derive(Clone)]
pub struct FnProvider {
    order: CocycleOrder,
    dim: usize,
    eval: Arc<EvalFn>,
    derivative: Option<Arc<DerivFn>>,
    poly_degree: Option<usize>,
}

impl FnProvider {
    pub fn new<F>(order: CocycleOrder, dim: usize, eval: F) -> Self
    where
        F: Fn(f64, f64) -> VectorValue + Send + Sync + 'static,
    {
        Self {
            order,
            dim,
            eval: Arc::new(eval),
            derivative: None,
            poly_degree: None,
        }
    }

    /// Scalar-valued convenience constructor.
    pub fn scalar<F>(order: CocycleOrder, eval: F) -> Self
    where
        F: Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
    {
        Self::new(order, 1, move |l, t| VectorValue::scalar(eval(l, t)))
    }

    pub fn zero(order: CocycleOrder, dim: usize) -> Self {
        Self::new(order, dim, move |_, _| VectorValue::zeros(dim))
            .with_t_derivative(move |_, _, _| VectorValue::zeros(dim))
            .with_poly_degree(0)
    }

    pub fn with_t_derivative<F>(mut self, derivative: F) -> Self
    where
        F: Fn(usize, f64, f64) -> VectorValue + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(derivative));
        self
    }

    pub fn with_poly_degree(mut self, degree: usize) -> Self {
        self.poly_degree = Some(degree);
        self
    }

    pub fn shared(self) -> SharedProvider {
        Arc::new(self)
    }
}

impl fmt::Debug for FnProvider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnProvider")
            .field("order", &self.order)
            .field("dim", &self.dim)
            .field("poly_degree", &self.poly_degree)
            .finish_non_exhaustive()
    }
}

impl CocycleProvider for FnProvider {
    fn order(&self) -> CocycleOrder {
        self.order
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, lambda: f64, t: f64) -> Result<VectorValue> {
        Ok((self.eval)(lambda, t))
    }

    fn t_derivative(&self, order: usize, lambda: f64, t: f64) -> Option<Result<VectorValue>> {
        self.derivative.as_ref().map(|d| Ok(d(order, lambda, t)))
    }

    fn poly_degree_hint(&self) -> Option<usize> {
        self.poly_degree
    }
}

/// A smooth function of `t >= 0` with values in `V`, e.g. the `psi` of a
/// decomposition.
pub trait TFunction: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, t: f64) -> Result<VectorValue>;

    /// Closed-form derivative, when known.
    fn derivative(&self, _order: usize, _t: f64) -> Option<Result<VectorValue>> {
        None
    }
}

/// Sum of a polynomial and complex exponentials, per component:
/// `sum_i p_i t^i + sum_k a_k exp(b_k t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyExp {
    /// `poly[component][i]` multiplies `t^i`.
    pub poly: Vec<Vec<Complex64>>,
    /// `exps[component]` holds `(amplitude, rate)` pairs.
    pub exps: Vec<Vec<(Complex64, Complex64)>>,
}

impl PolyExp {
    pub fn scalar(poly: Vec<Complex64>, exps: Vec<(Complex64, Complex64)>) -> Self {
        Self {
            poly: vec![poly],
            exps: vec![exps],
        }
    }

    fn component_derivative(&self, c: usize, order: usize, t: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, p) in self.poly[c].iter().enumerate().skip(order) {
            let falling = ((i - order + 1)..=i).fold(1.0, |a, v| a * v as f64);
            acc += p * falling * t.powi((i - order) as i32);
        }
        for (a, b) in &self.exps[c] {
            acc += a * b.powu(order as u32) * (b * t).exp();
        }
        acc
    }
}

impl TFunction for PolyExp {
    fn dim(&self) -> usize {
        self.poly.len()
    }

    fn value(&self, t: f64) -> Result<VectorValue> {
        Ok(VectorValue::new(
            (0..self.dim()).map(|c| self.component_derivative(c, 0, t)).collect(),
        ))
    }

    fn derivative(&self, order: usize, t: f64) -> Option<Result<VectorValue>> {
        Some(Ok(VectorValue::new(
            (0..self.dim()).map(|c| self.component_derivative(c, order, t)).collect(),
        )))
    }
}

type TValueFn = dyn Fn(f64) -> VectorValue + Send + Sync;

/// [`TFunction`] backed by a closure, without derivatives.
#[derive(Clone)]
pub struct FnTFunction {
    dim: usize,
    f: Arc<TValueFn>,
}

impl FnTFunction {
    pub fn new<F>(dim: usize, f: F) -> Self
    where
        F: Fn(f64) -> VectorValue + Send + Sync + 'static,
    {
        Self { dim, f: Arc::new(f) }
    }
}

impl TFunction for FnTFunction {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, t: f64) -> Result<VectorValue> {
        Ok((self.f)(t))
    }
}
