use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

type SpatialFn = dyn Fn(&[f64]) -> Complex64 + Send + Sync;

/// Spatial factor `f(x)` of a homogeneous layer on the torus `[0, 2pi)^n`.
#[derive(Clone)]
pub enum SpatialWeight {
    Constant(Complex64),
    /// `1 + amplitude * cos(x_1)`.
    Cosine { amplitude: f64 },
    Custom(Arc<SpatialFn>),
}

impl fmt::Debug for SpatialWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpatialWeight::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            SpatialWeight::Cosine { amplitude } => f.debug_struct("Cosine").field("amplitude", amplitude).finish(),
            SpatialWeight::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl Default for SpatialWeight {
    fn default() -> Self {
        SpatialWeight::Constant(Complex64::new(1.0, 0.0))
    }
}

impl SpatialWeight {
    pub fn custom<F>(f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    {
        SpatialWeight::Custom(Arc::new(f))
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        match self {
            SpatialWeight::Constant(c) => *c,
            SpatialWeight::Cosine { amplitude } => Complex64::new(1.0 + amplitude * x[0].cos(), 0.0),
            SpatialWeight::Custom(f) => f(x),
        }
    }

    /// `int_{T^n} f dx`, known in closed form for the non-custom variants.
    pub fn exact_integral(&self, n: usize) -> Option<Complex64> {
        let volume = (2.0 * PI).powi(n as i32);
        match self {
            SpatialWeight::Constant(c) => Some(c * volume),
            SpatialWeight::Cosine { .. } => Some(Complex64::new(volume, 0.0)),
            SpatialWeight::Custom(_) => None,
        }
    }
}

/// Uniform tensor grid on `[0, 2pi)^n`; the rectangle rule on it is exact
/// for trigonometric polynomials of degree below `nodes`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusGrid {
    n: usize,
    nodes: usize,
}

impl TorusGrid {
    pub fn new(n: usize, nodes: usize) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::InvalidInput(format!("dimension must be 1, 2 or 3, got {n}")));
        }
        if nodes == 0 {
            return Err(Error::InvalidInput("torus grid needs at least one node per axis".into()));
        }
        Ok(Self { n, nodes })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points in lexicographic order, first coordinate slowest.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let h = 2.0 * PI / self.nodes as f64;
        (0..self.len())
            .map(|mut idx| {
                let mut p = vec![0.0; self.n];
                for slot in p.iter_mut().rev() {
                    *slot = h * (idx % self.nodes) as f64;
                    idx /= self.nodes;
                }
                p
            })
            .collect()
    }

    /// Quadrature weight of each point: `(2pi)^n / len`.
    pub fn weight(&self) -> f64 {
        (2.0 * PI).powi(self.n as i32) / self.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_layout() {
        let g = TorusGrid::new(2, 4).unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 16);
        assert_eq!(pts[1], vec![0.0, PI / 2.0]);
        assert_eq!(pts[4], vec![PI / 2.0, 0.0]);
        assert!((g.weight() * 16.0 - 4.0 * PI * PI).abs() < 1e-12);
        assert!(TorusGrid::new(0, 3).is_err());
    }

    #[test]
    fn cosine_integrates_to_volume() {
        let w = SpatialWeight::Cosine { amplitude: 0.7 };
        let g = TorusGrid::new(1, 8).unwrap();
        let sum: f64 = g.points().iter().map(|p| w.eval(p).re).sum::<f64>() * g.weight();
        assert!((sum - 2.0 * PI).abs() < 1e-13);
        assert_eq!(w.exact_integral(1).unwrap().re, 2.0 * PI);
    }
}
