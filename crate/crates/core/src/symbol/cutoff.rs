use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutoffShape {
    PiecewiseLinear,
    /// Odd-degree smoothstep polynomial; degree 1 coincides with the linear ramp.
    Smoothstep { degree: u32 },
}

/// Radial excision function: 0 on `[0, r0]`, 1 on `[rho, inf)`,
/// monotone in between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffProfile {
    r0: f64,
    rho: f64,
    shape: CutoffShape,
    // Monomial coefficients of the ramp in u = (r - r0) / (rho - r0).
    ramp: [f64; 16],
    ramp_len: usize,
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl CutoffProfile {
    pub fn new(r0: f64, rho: f64, shape: CutoffShape) -> Result<Self> {
        if !(r0 > 0.0 && rho > r0 && rho.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "cutoff radii must satisfy 0 < r0 < rho, got r0={r0}, rho={rho}"
            )));
        }
        let mut ramp = [0.0; 16];
        let ramp_len = match shape {
            CutoffShape::PiecewiseLinear => {
                ramp[1] = 1.0;
                2
            }
            CutoffShape::Smoothstep { degree } => {
                if degree % 2 == 0 || degree > 15 {
                    return Err(Error::InvalidInput(format!(
                        "smoothstep degree must be odd and at most 15, got {degree}"
                    )));
                }
                // S_N(u) = u^{N+1} sum_i C(N+i, i) C(2N+1, N-i) (-u)^i
                let n = (degree - 1) / 2;
                for i in 0..=n {
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    ramp[(n + 1 + i) as usize] = sign * binomial(n + i, i) * binomial(2 * n + 1, n - i);
                }
                degree as usize + 1
            }
        };
        Ok(Self {
            r0,
            rho,
            shape,
            ramp,
            ramp_len,
        })
    }

    pub fn piecewise_linear(r0: f64, rho: f64) -> Result<Self> {
        Self::new(r0, rho, CutoffShape::PiecewiseLinear)
    }

    pub fn smoothstep(r0: f64, rho: f64, degree: u32) -> Result<Self> {
        Self::new(r0, rho, CutoffShape::Smoothstep { degree })
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn shape(&self) -> CutoffShape {
        self.shape
    }

    pub fn value(&self, r: f64) -> f64 {
        if r <= self.r0 {
            return 0.0;
        }
        if r >= self.rho {
            return 1.0;
        }
        let u = (r - self.r0) / (self.rho - self.r0);
        self.ramp[..self.ramp_len].iter().rev().fold(0.0, |acc, c| acc * u + c)
    }
}
