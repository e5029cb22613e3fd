use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

/// Named angular profiles with known sphere integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngularPreset {
    /// `Y = 1`.
    Unit,
    /// `Y = omega_1`; odd, integrates to zero.
    FirstCoordinate,
    /// `Y = omega_1^2`; integrates to `|S^{n-1}| / n`.
    FirstCoordinateSquared,
}

type AngularFn = dyn Fn(&[f64]) -> Complex64 + Send + Sync;

/// Angular part `Y` of a homogeneous layer, a function on `S^{n-1}`.
#[derive(Clone)]
pub enum AngularPart {
    Constant(Complex64),
    /// Values at `+1` and `-1` (dimension 1 only).
    Pair { plus: Complex64, minus: Complex64 },
    /// `sum_k cos[k] cos(k theta) + sum_k sin[k] sin(k theta)` on the circle.
    /// `sin[0]` multiplies `sin(0) = 0`.
    Trig { cos: Vec<Complex64>, sin: Vec<Complex64> },
    Preset(AngularPreset),
    /// Arbitrary function of the unit vector.
    Custom(Arc<AngularFn>),
}

impl fmt::Debug for AngularPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AngularPart::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            AngularPart::Pair { plus, minus } => f.debug_struct("Pair").field("plus", plus).field("minus", minus).finish(),
            AngularPart::Trig { cos, sin } => f.debug_struct("Trig").field("cos", cos).field("sin", sin).finish(),
            AngularPart::Preset(p) => f.debug_tuple("Preset").field(p).finish(),
            AngularPart::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl AngularPart {
    pub fn unit() -> Self {
        AngularPart::Preset(AngularPreset::Unit)
    }

    pub fn constant(value: f64) -> Self {
        AngularPart::Constant(Complex64::new(value, 0.0))
    }

    pub fn custom<F>(f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    {
        AngularPart::Custom(Arc::new(f))
    }

    /// Multiplies every value by `s`.
    pub fn scaled(&self, s: Complex64) -> Self {
        match self {
            AngularPart::Constant(c) => AngularPart::Constant(c * s),
            AngularPart::Pair { plus, minus } => AngularPart::Pair {
                plus: plus * s,
                minus: minus * s,
            },
            AngularPart::Trig { cos, sin } => AngularPart::Trig {
                cos: cos.iter().map(|c| c * s).collect(),
                sin: sin.iter().map(|c| c * s).collect(),
            },
            other => {
                let inner = other.clone();
                AngularPart::custom(move |w| inner.eval(w) * s)
            }
        }
    }

    /// `Y(omega)` at a unit vector of length `n`.
    pub fn eval(&self, omega: &[f64]) -> Complex64 {
        match self {
            AngularPart::Constant(c) => *c,
            AngularPart::Pair { plus, minus } => {
                if omega[0] >= 0.0 {
                    *plus
                } else {
                    *minus
                }
            }
            AngularPart::Trig { cos, sin } => {
                let theta = omega[1].atan2(omega[0]);
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, c) in cos.iter().enumerate() {
                    acc += c * (k as f64 * theta).cos();
                }
                for (k, c) in sin.iter().enumerate() {
                    acc += c * (k as f64 * theta).sin();
                }
                acc
            }
            AngularPart::Preset(p) => match p {
                AngularPreset::Unit => Complex64::new(1.0, 0.0),
                AngularPreset::FirstCoordinate => Complex64::new(omega[0], 0.0),
                AngularPreset::FirstCoordinateSquared => Complex64::new(omega[0] * omega[0], 0.0),
            },
            AngularPart::Custom(f) => f(omega),
        }
    }

    pub(crate) fn check_dimension(&self, n: usize) -> Result<()> {
        match self {
            AngularPart::Pair { .. } if n != 1 => Err(Error::InvalidInput(format!(
                "value-pair angular parts need dimension 1, got {n}"
            ))),
            AngularPart::Trig { .. } if n != 2 => Err(Error::InvalidInput(format!(
                "trigonometric angular parts need dimension 2, got {n}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Node counts for the sphere rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AngularRule {
    /// Trapezoid nodes on the circle; exact for trigonometric degree below this.
    pub circle_nodes: usize,
    /// Gauss-Legendre order in `cos(theta)` on `S^2`; azimuth uses twice as many nodes.
    pub sphere_order: usize,
}

impl Default for AngularRule {
    fn default() -> Self {
        Self {
            circle_nodes: 64,
            sphere_order: 24,
        }
    }
}

/// Area of `S^{n-1}`.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => f64::NAN,
    }
}

fn finite(z: Complex64, omega: &[f64]) -> Result<Complex64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::InvalidInput(format!("angular part is not finite at {omega:?}")))
    }
}

/// `int_{S^{n-1}} Y d omega`.
pub fn angular_integral(y: &AngularPart, n: usize, rule: &AngularRule) -> Result<Complex64> {
    if !(1..=3).contains(&n) {
        return Err(Error::InvalidInput(format!("dimension must be 1, 2 or 3, got {n}")));
    }
    y.check_dimension(n)?;
    match n {
        1 => Ok(finite(y.eval(&[1.0]), &[1.0])? + finite(y.eval(&[-1.0]), &[-1.0])?),
        2 => {
            let mut nodes = rule.circle_nodes.max(1);
            if let AngularPart::Trig { cos, sin } = y {
                nodes = nodes.max(2 * cos.len().max(sin.len()) + 2);
            }
            let w = 2.0 * PI / nodes as f64;
            let terms = (0..nodes)
                .map(|i| {
                    let theta = w * i as f64;
                    let omega = [theta.cos(), theta.sin()];
                    finite(y.eval(&omega), &omega)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(crate::value::compensated_sum(terms) * w)
        }
        _ => {
            let (z, wz) = gauss_legendre(rule.sphere_order.max(1));
            let azimuth = 2 * rule.sphere_order.max(1);
            let wphi = 2.0 * PI / azimuth as f64;
            let mut terms = Vec::with_capacity(z.len() * azimuth);
            for (zi, wi) in z.iter().zip(&wz) {
                let s = (1.0 - zi * zi).max(0.0).sqrt();
                for k in 0..azimuth {
                    let phi = wphi * k as f64;
                    let omega = [s * phi.cos(), s * phi.sin(), *zi];
                    terms.push(finite(y.eval(&omega), &omega)? * (wi * wphi));
                }
            }
            Ok(crate::value::compensated_sum(terms))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rule() -> AngularRule {
        AngularRule::default()
    }

    #[test]
    fn unit_areas() {
        for n in 1..=3 {
            let v = angular_integral(&AngularPart::unit(), n, &rule()).unwrap();
            assert!((v.re - sphere_area(n)).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn odd_functions_vanish() {
        for n in 1..=3 {
            let v = angular_integral(&AngularPart::Preset(AngularPreset::FirstCoordinate), n, &rule()).unwrap();
            assert!(v.norm() < 1e-14, "n={n}");
        }
        let cos = AngularPart::Trig {
            cos: vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            sin: vec![],
        };
        assert!(angular_integral(&cos, 2, &rule()).unwrap().norm() < 1e-14);
    }

    #[test]
    fn second_moment() {
        for n in 1..=3 {
            let v = angular_integral(&AngularPart::Preset(AngularPreset::FirstCoordinateSquared), n, &rule()).unwrap();
            assert!((v.re - sphere_area(n) / n as f64).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn high_degree_trig_raises_node_count() {
        let mut cos = vec![Complex64::new(0.0, 0.0); 101];
        cos[0] = Complex64::new(3.0, 1.0);
        cos[100] = Complex64::new(1.0, 0.0);
        let v = angular_integral(&AngularPart::Trig { cos, sin: vec![] }, 2, &rule()).unwrap();
        assert!((v - Complex64::new(6.0 * PI, 2.0 * PI)).norm() < 1e-12);
    }

    #[test]
    fn shape_mismatch_and_non_finite() {
        let pair = AngularPart::Pair {
            plus: Complex64::new(1.0, 0.0),
            minus: Complex64::new(0.0, 0.0),
        };
        assert!(angular_integral(&pair, 2, &rule()).is_err());
        assert!((angular_integral(&pair, 1, &rule()).unwrap().re - 1.0).abs() < 1e-15);
        let bad = AngularPart::custom(|w| Complex64::new(1.0 / (w[0] - 1.0), 0.0));
        assert!(angular_integral(&bad, 1, &rule()).is_err());
        assert!(angular_integral(&AngularPart::unit(), 4, &rule()).is_err());
    }
}
