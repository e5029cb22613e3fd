//! Scalar and vector primitives shared by every module: the cocycle order,
//! vectors in the finite dimensional target space, and compensated sums.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance used to decide whether an order is a nonnegative integer.
pub const INTEGER_TOL: f64 = 1e-12;

/// Where an order sits with respect to the case split of the decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderClass {
    /// Re K < 0; the base-case series converges.
    Negative,
    /// K real and equal to a nonnegative integer within [`INTEGER_TOL`].
    NonNegativeInteger(u32),
    Other,
}

/// The exponent `K` in `phi(l1 l2, t) = l2^{-K} phi(l1, t l2) + phi(l2, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CocycleOrder(Complex64);

impl CocycleOrder {
    pub fn new(value: Complex64) -> Result<Self> {
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::InvalidInput(format!("order {value} is not finite")));
        }
        Ok(Self(value))
    }

    pub fn real(value: f64) -> Result<Self> {
        Self::new(Complex64::new(value, 0.0))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    pub fn classify(self) -> OrderClass {
        let k = self.0;
        let rounded = k.re.round();
        if k.im.abs() <= INTEGER_TOL && (k.re - rounded).abs() <= INTEGER_TOL && rounded >= 0.0 {
            return OrderClass::NonNegativeInteger(rounded as u32);
        }
        if k.re < 0.0 {
            OrderClass::Negative
        } else {
            OrderClass::Other
        }
    }

    pub fn integer(self) -> Option<u32> {
        match self.classify() {
            OrderClass::NonNegativeInteger(m) => Some(m),
            _ => None,
        }
    }

    /// Number of reduction rounds needed before the series applies.
    pub fn reduction_rounds(self) -> usize {
        match self.classify() {
            OrderClass::Negative => 0,
            OrderClass::NonNegativeInteger(m) => m as usize + 1,
            OrderClass::Other => {
                if self.0.re <= -INTEGER_TOL {
                    0
                } else {
                    (self.0.re + INTEGER_TOL).floor() as usize + 1
                }
            }
        }
    }

    /// Order after `rounds` reductions.
    pub fn shifted(self, rounds: usize) -> Self {
        Self(self.0 - rounds as f64)
    }

    /// `lambda^{-K}` for `lambda > 0`.
    pub fn scale_factor(self, lambda: f64) -> Complex64 {
        real_pow(lambda, -self.0)
    }
}

impl fmt::Display for CocycleOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `x^p` for real `x > 0` and complex `p`.
pub fn real_pow(x: f64, p: Complex64) -> Complex64 {
    if p.im == 0.0 {
        return Complex64::new(x.powf(p.re), 0.0);
    }
    (p * x.ln()).exp()
}

/// `t^K` with the convention `0^0 = 1`; integer orders use exact powers.
pub fn t_power(t: f64, order: CocycleOrder) -> Complex64 {
    if let Some(m) = order.integer() {
        return Complex64::new(t.powi(m as i32), 0.0);
    }
    if t == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    real_pow(t, order.value())
}

/// Element of the finite dimensional target space `V = C^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorValue(Vec<Complex64>);

impl VectorValue {
    pub fn new(entries: Vec<Complex64>) -> Self {
        Self(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); dim])
    }

    pub fn scalar(value: Complex64) -> Self {
        Self(vec![value])
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<Complex64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Sup norm over entries.
    pub fn norm_inf(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self(self.0.iter().map(|z| z * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: Complex64, other: &Self) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += s * b;
        }
    }

    /// Sup-norm distance.
    pub fn distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn ensure_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: self.dim(),
            });
        }
        Ok(())
    }
}

impl Index<usize> for VectorValue {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for VectorValue {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.0[i]
    }
}

impl From<Vec<Complex64>> for VectorValue {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}

/// Neumaier-compensated accumulator for a single real stream.
#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of vectors, accumulated in the order terms are pushed.
#[derive(Debug, Clone)]
pub struct CompensatedSum {
    re: Vec<Neumaier>,
    im: Vec<Neumaier>,
}

impl CompensatedSum {
    pub fn new(dim: usize) -> Self {
        Self {
            re: vec![Neumaier::default(); dim],
            im: vec![Neumaier::default(); dim],
        }
    }

    pub fn add(&mut self, v: &VectorValue) {
        self.add_scaled(Complex64::new(1.0, 0.0), v);
    }

    pub fn add_scaled(&mut self, s: Complex64, v: &VectorValue) {
        debug_assert_eq!(self.re.len(), v.dim());
        for (i, z) in v.iter().enumerate() {
            let w = z * s;
            self.re[i].add(w.re);
            self.im[i].add(w.im);
        }
    }

    pub fn value(&self) -> VectorValue {
        VectorValue(
            self.re
                .iter()
                .zip(&self.im)
                .map(|(r, i)| Complex64::new(r.value(), i.value()))
                .collect(),
        )
    }
}

/// Compensated sum of complex scalars.
pub fn compensated_sum<I: IntoIterator<Item = Complex64>>(terms: I) -> Complex64 {
    let mut re = Neumaier::default();
    let mut im = Neumaier::default();
    for z in terms {
        re.add(z.re);
        im.add(z.im);
    }
    Complex64::new(re.value(), im.value())
}

/// Chebyshev-Lobatto points on `[0, t_max]`, ascending, endpoints included.
pub fn chebyshev_grid(count: usize, t_max: f64) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.5 * t_max],
        _ => {
            let last = (count - 1) as f64;
            (0..count)
                .map(|i| {
                    let x = 0.5 * t_max * (1.0 - (std::f64::consts::PI * i as f64 / last).cos());
                    x.clamp(0.0, t_max)
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn classification() {
        let cls = |k: Complex64| CocycleOrder::new(k).unwrap().classify();
        assert_eq!(cls(c(-1.0, 0.0)), OrderClass::Negative);
        assert_eq!(cls(c(-0.5, 0.3)), OrderClass::Negative);
        assert_eq!(cls(c(0.0, 0.0)), OrderClass::NonNegativeInteger(0));
        assert_eq!(cls(c(3.0 + 5e-13, 0.0)), OrderClass::NonNegativeInteger(3));
        assert_eq!(cls(c(-1e-14, 0.0)), OrderClass::NonNegativeInteger(0));
        assert_eq!(cls(c(2.0, 0.1)), OrderClass::Other);
        assert_eq!(cls(c(0.5, 0.0)), OrderClass::Other);
        assert!(CocycleOrder::new(c(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn reduction_rounds_reach_negative_real_part() {
        for k in [c(-0.3, 0.0), c(0.0, 0.0), c(0.5, 0.0), c(2.0, 0.0), c(2.5, 0.0), c(1.0, 0.4), c(0.0, 0.1)] {
            let order = CocycleOrder::new(k).unwrap();
            let rounds = order.reduction_rounds();
            let base = order.shifted(rounds).value().re;
            assert!(base < 0.0 && base >= -1.0, "k={k} rounds={rounds}");
        }
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let terms = [c(1e16, 0.0), c(1.0, 1.0), c(-1e16, 0.0), c(1.0, 0.0)];
        assert_eq!(compensated_sum(terms), c(2.0, 1.0));
    }

    #[test]
    fn chebyshev_endpoints() {
        let g = chebyshev_grid(33, 2.0);
        assert_eq!(g.len(), 33);
        assert_eq!(g[0], 0.0);
        assert!((g[32] - 2.0).abs() < 1e-15);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
