//! Numerical t-derivatives of vector-valued functions: Richardson-extrapolated
//! finite differences and exact recovery of polynomials by interpolation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::value::VectorValue;

/// Finite-difference settings.
#[derive(Debug, Clone, Copy)]
pub struct FiniteDifference {
    /// Initial step, scaled by `max(1, |t|)`.
    pub initial_step: f64,
    /// Maximum number of tableau rows (step halvings).
    pub max_rows: usize,
}

impl Default for FiniteDifference {
    fn default() -> Self {
        Self {
            initial_step: 1e-2,
            max_rows: 10,
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Derivative estimate with the tableau's error estimate.
#[derive(Debug, Clone)]
pub struct DerivativeEstimate {
    pub value: VectorValue,
    pub error: f64,
}

impl FiniteDifference {
    /// `order`-th derivative of `f` at `t`. Uses central stencils when the
    /// stencil fits in `t >= 0` and forward stencils otherwise, extrapolating
    /// over halved steps (Ridders' tableau).
    pub fn derivative<F>(&self, f: F, order: usize, t: f64) -> Result<DerivativeEstimate>
    where
        F: Fn(f64) -> Result<VectorValue>,
    {
        if order == 0 {
            return Ok(DerivativeEstimate {
                value: f(t)?,
                error: 0.0,
            });
        }
        let h0 = self.initial_step * t.abs().max(1.0);
        let central = t >= 0.5 * order as f64 * h0;
        // Central stencils have an error series in h^2, forward ones in h.
        let base: f64 = if central { 4.0 } else { 2.0 };

        let stencil = |h: f64| -> Result<VectorValue> {
            let mut acc: Option<VectorValue> = None;
            for i in 0..=order {
                let sign = if (order - i) % 2 == 0 { 1.0 } else { -1.0 };
                let x = if central {
                    t + (i as f64 - 0.5 * order as f64) * h
                } else {
                    t + i as f64 * h
                };
                let w = Complex64::new(sign * binomial(order, i) / h.powi(order as i32), 0.0);
                let v = f(x)?;
                match acc.as_mut() {
                    Some(a) => a.axpy(w, &v),
                    None => acc = Some(v.scaled(w)),
                }
            }
            Ok(acc.expect("order >= 1"))
        };

        let mut prev_row: Vec<VectorValue> = Vec::new();
        let mut best: Option<DerivativeEstimate> = None;
        let mut h = h0;
        for row in 0..self.max_rows {
            let mut cur = vec![stencil(h)?];
            let mut fac = base;
            for col in 1..=row {
                let hi = &cur[col - 1];
                let lo = &prev_row[col - 1];
                let ext = hi.scaled(Complex64::new(fac / (fac - 1.0), 0.0))
                    .sub(&lo.scaled(Complex64::new(1.0 / (fac - 1.0), 0.0)));
                let err = ext.distance(hi).max(ext.distance(lo));
                if best.as_ref().is_none_or(|b| err <= b.error) {
                    best = Some(DerivativeEstimate {
                        value: ext.clone(),
                        error: err,
                    });
                }
                cur.push(ext);
                fac *= base;
            }
            if row > 0 {
                let diag_drift = cur[row].distance(&prev_row[row - 1]);
                if let Some(b) = &best {
                    if diag_drift >= 2.0 * b.error {
                        break;
                    }
                }
            }
            prev_row = cur;
            h *= 0.5;
        }
        match best {
            Some(b) => Ok(b),
            None => Ok(DerivativeEstimate {
                value: prev_row.into_iter().next().expect("at least one row"),
                error: f64::INFINITY,
            }),
        }
    }
}

/// Monomial coefficients `c_0..c_d` of the degree-`d` polynomial through
/// samples of `f` at `d + 1` Chebyshev nodes on `[0, scale]`.
pub fn polynomial_coefficients<F>(f: F, degree: usize, scale: f64) -> Result<Vec<VectorValue>>
where
    F: Fn(f64) -> Result<VectorValue>,
{
    let nodes: Vec<f64> = if degree == 0 {
        vec![0.0]
    } else {
        crate::value::chebyshev_grid(degree + 1, scale)
    };
    let values = nodes.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
    let dim = values[0].dim();
    // Newton divided differences.
    let mut dd = values;
    for level in 1..=degree {
        for i in (level..=degree).rev() {
            let denom = nodes[i] - nodes[i - level];
            if denom == 0.0 {
                return Err(Error::InvalidInput("coincident interpolation nodes".into()));
            }
            let diff = dd[i].sub(&dd[i - 1]);
            dd[i] = diff.scaled(Complex64::new(1.0 / denom, 0.0));
        }
    }
    // Expand the Newton form into monomials with Horner steps.
    let mut coeffs = vec![VectorValue::zeros(dim); degree + 1];
    for level in (0..=degree).rev() {
        // coeffs <- coeffs * (x - nodes[level]) + dd[level]
        let shift = Complex64::new(-nodes[level], 0.0);
        let mut next = vec![VectorValue::zeros(dim); degree + 1];
        for i in 0..degree {
            let (lo, hi) = next.split_at_mut(i + 1);
            hi[0].axpy(Complex64::new(1.0, 0.0), &coeffs[i]);
            lo[i].axpy(shift, &coeffs[i]);
        }
        next[0].axpy(Complex64::new(1.0, 0.0), &dd[level]);
        coeffs = next;
    }
    Ok(coeffs)
}

/// Evaluates `sum_i c_i x^i` by Horner's rule.
pub fn horner(coeffs: &[VectorValue], x: f64, dim: usize) -> VectorValue {
    let mut acc = VectorValue::zeros(dim);
    let xs = Complex64::new(x, 0.0);
    for c in coeffs.iter().rev() {
        acc = acc.scaled(xs).add(c);
    }
    acc
}

/// `m`-th derivative of `sum_i c_i x^i` at `x`.
pub fn horner_derivative(coeffs: &[VectorValue], m: usize, x: f64, dim: usize) -> VectorValue {
    if m >= coeffs.len() {
        return VectorValue::zeros(dim);
    }
    let shifted: Vec<VectorValue> = coeffs
        .iter()
        .enumerate()
        .skip(m)
        .map(|(i, c)| {
            let falling = ((i - m + 1)..=i).fold(1.0, |acc, v| acc * v as f64);
            c.scaled(Complex64::new(falling, 0.0))
        })
        .collect();
    horner(&shifted, x, dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(f: impl Fn(f64) -> f64) -> impl Fn(f64) -> Result<VectorValue> {
        move |x| Ok(VectorValue::from_real(&[f(x)]))
    }

    #[test]
    fn first_derivative_forward_at_zero() {
        let d = FiniteDifference::default().derivative(scalar(|x| (-x).exp()), 1, 0.0).unwrap();
        assert!((d.value[0].re + 1.0).abs() < 1e-9, "{:?}", d);
    }

    #[test]
    fn second_derivative_central() {
        let d = FiniteDifference::default().derivative(scalar(|x| x.sin()), 2, 1.0).unwrap();
        assert!((d.value[0].re + 1f64.sin()).abs() < 1e-8, "{:?}", d);
    }

    #[test]
    fn third_derivative_forward() {
        let d = FiniteDifference::default().derivative(scalar(|x| (2.0 * x).exp()), 3, 0.0).unwrap();
        assert!((d.value[0].re - 8.0).abs() < 1e-5, "{:?}", d);
    }

    #[test]
    fn interpolation_recovers_cubic() {
        let coeffs = polynomial_coefficients(scalar(|x| 2.0 - x + 0.5 * x * x * x), 3, 1.0).unwrap();
        let expect = [2.0, -1.0, 0.0, 0.5];
        for (c, e) in coeffs.iter().zip(expect) {
            assert!((c[0].re - e).abs() < 1e-13);
        }
        let d2 = horner_derivative(&coeffs, 2, 2.0, 1);
        assert!((d2[0].re - 6.0).abs() < 1e-12);
        assert!(horner_derivative(&coeffs, 4, 2.0, 1).is_zero());
    }
}
