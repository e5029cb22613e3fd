use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::value::{chebyshev_grid, t_power, CocycleOrder, VectorValue};

use super::extract::{extract_c_at_zero, extract_v_at_zero, ExtractionSettings, ZeroValueExtraction};
use super::provider::{checked_eval, SharedProvider, TFunction};
use super::reduce::{reduce_order, ReductionSettings, Subtraction};
use super::series::{series_psi_negative, SeriesSettings};
use super::verify::{verify_cocycle, CocycleGrid};

#[derive(Debug, Clone)]
pub struct DecomposeSettings {
    pub extraction: ExtractionSettings,
    pub reduction: ReductionSettings,
    pub series: SeriesSettings,
    /// Precondition check: grid and relative tolerance. `None` skips it.
    pub precheck: Option<(CocycleGrid, f64)>,
    /// Working grid on which the psi sample table is tabulated.
    pub t_grid: Vec<f64>,
    pub holdout_lambdas: Vec<f64>,
    pub holdout_t: Vec<f64>,
    /// Allowed reconstruction residual, relative to `max(1, |phi|)`.
    pub reconstruction_tol: f64,
}

impl Default for DecomposeSettings {
    fn default() -> Self {
        Self {
            extraction: ExtractionSettings::default(),
            reduction: ReductionSettings::default(),
            series: SeriesSettings::default(),
            precheck: Some((CocycleGrid::standard(), 1e-8)),
            t_grid: chebyshev_grid(33, 2.0),
            holdout_lambdas: vec![0.6, 1.7, 2.6],
            holdout_t: vec![0.0, 0.35, 0.8, 1.3, 1.9],
            reconstruction_tol: 1e-8,
        }
    }
}

impl DecomposeSettings {
    /// Uses `lambdas` for every zero-value extraction.
    pub fn with_lambdas(mut self, lambdas: Vec<f64>) -> Self {
        self.extraction.lambdas = lambdas;
        self
    }
}

/// Constant removed at one reduction level.
#[derive(Debug, Clone, PartialEq)]
pub enum LevelConstant {
    /// `v` with `phi(lambda, 0) = (lambda^{-K} - 1) v` at a nonzero order.
    Value(ZeroValueExtraction),
    /// `c` with `phi(lambda, 0) = c log(lambda)` at order zero.
    Log(ZeroValueExtraction),
}

impl LevelConstant {
    pub fn extraction(&self) -> &ZeroValueExtraction {
        match self {
            LevelConstant::Value(e) | LevelConstant::Log(e) => e,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionLevel {
    pub order: CocycleOrder,
    pub constant: LevelConstant,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub reconstruction_residual: f64,
    /// Scale the residual is measured against (`max(1, |phi|)` on the holdout grid).
    pub reconstruction_scale: f64,
    pub lambda_independence_spread: f64,
    pub series_terms_used: usize,
    /// Precondition residual, when the check ran.
    pub cocycle_residual: Option<f64>,
}

/// `phi(lambda, t) = lambda^{-K} psi(lambda t) - psi(t) + t^K log(lambda) c`.
pub struct Decomposition {
    order: CocycleOrder,
    c: VectorValue,
    levels: Vec<ReductionLevel>,
    base: SharedProvider,
    series: SeriesSettings,
    samples: Vec<(f64, VectorValue)>,
    diagnostics: Diagnostics,
}

impl std::fmt::Debug for Decomposition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Decomposition")
            .field("order", &self.order)
            .field("c", &self.c)
            .field("levels", &self.levels)
            .field("diagnostics", &self.diagnostics)
            .finish_non_exhaustive()
    }
}

impl Decomposition {
    pub fn order(&self) -> CocycleOrder {
        self.order
    }

    /// The logarithmic constant; exactly zero unless `K` is a nonnegative integer.
    pub fn c(&self) -> &VectorValue {
        &self.c
    }

    pub fn levels(&self) -> &[ReductionLevel] {
        &self.levels
    }

    /// `v` of the top reduction level, if the order is nonzero and `Re K >= 0`.
    pub fn top_value(&self) -> Option<&VectorValue> {
        match self.levels.first().map(|l| &l.constant) {
            Some(LevelConstant::Value(e)) => Some(&e.value),
            _ => None,
        }
    }

    pub fn samples(&self) -> &[(f64, VectorValue)] {
        &self.samples
    }

    pub fn diagnostics(&self) -> &Diagnostics {
        &self.diagnostics
    }

    /// The order-reduced cocycle fed to the series.
    pub fn base(&self) -> &SharedProvider {
        &self.base
    }

    fn psi_with_terms(&self, t: f64) -> Result<(VectorValue, usize)> {
        let series = series_psi_negative(self.base.as_ref(), t, &self.series)?;
        let rounds = self.levels.len();
        let mut out = series.value.scaled(Complex64::new(t.powi(rounds as i32), 0.0));
        for (m, level) in self.levels.iter().enumerate() {
            if let LevelConstant::Value(e) = &level.constant {
                out.axpy(Complex64::new(t.powi(m as i32), 0.0), &e.value);
            }
        }
        Ok((out, series.terms))
    }

    /// `psi(t) = sum_m v_m t^m + t^N psi_base(t)`.
    pub fn psi(&self, t: f64) -> Result<VectorValue> {
        if !(t >= 0.0) {
            return Err(Error::InvalidInput(format!("psi evaluated at t={t} < 0")));
        }
        Ok(self.psi_with_terms(t)?.0)
    }

    /// Right-hand side of the decomposition formula at `(lambda, t)`.
    pub fn reconstruct_at(&self, lambda: f64, t: f64) -> Result<VectorValue> {
        let mut out = self.psi(lambda * t)?.scaled(self.order.scale_factor(lambda));
        out = out.sub(&self.psi(t)?);
        if !self.c.is_zero() {
            out.axpy(t_power(t, self.order) * lambda.ln(), &self.c);
        }
        Ok(out)
    }
}

impl TFunction for Decomposition {
    fn dim(&self) -> usize {
        self.c.dim()
    }

    fn value(&self, t: f64) -> Result<VectorValue> {
        self.psi(t)
    }
}

/// Splits a cocycle into `(psi, c)`: `N = max(0, floor(Re K) + 1)` reduction
/// rounds bring the order below zero, removing `v_m` at nonzero levels and `c`
/// at level zero; the series handles the rest.
pub fn decompose(phi: SharedProvider, settings: &DecomposeSettings) -> Result<Decomposition> {
    let order = phi.order();
    let dim = phi.dim();

    let cocycle_residual = match &settings.precheck {
        Some((grid, tol)) => {
            let r = verify_cocycle(phi.as_ref(), grid)?;
            let allowed = tol * r.scale.max(1.0);
            if r.max > allowed {
                return Err(Error::CocycleViolation {
                    residual: r.max,
                    tol: allowed,
                });
            }
            Some(r.max)
        }
        None => None,
    };

    let rounds = order.reduction_rounds();
    let mut levels = Vec::with_capacity(rounds);
    let mut current = Arc::clone(&phi);
    let mut c = VectorValue::zeros(dim);
    let mut spread: f64 = 0.0;
    for _ in 0..rounds {
        let level_order = current.order();
        let (constant, subtraction) = if level_order.integer() == Some(0) {
            let e = extract_c_at_zero(current.as_ref(), &settings.extraction)?;
            c = e.value.clone();
            let s = Subtraction::Log(e.value.clone());
            (LevelConstant::Log(e), s)
        } else {
            let e = extract_v_at_zero(current.as_ref(), &settings.extraction)?;
            let s = Subtraction::Value(e.value.clone());
            (LevelConstant::Value(e), s)
        };
        spread = spread.max(constant.extraction().spread);
        current = reduce_order(current, &subtraction, &settings.reduction)?;
        levels.push(ReductionLevel {
            order: level_order,
            constant,
        });
    }

    let mut decomposition = Decomposition {
        order,
        c,
        levels,
        base: current,
        series: settings.series,
        samples: Vec::new(),
        diagnostics: Diagnostics {
            reconstruction_residual: 0.0,
            reconstruction_scale: 1.0,
            lambda_independence_spread: spread,
            series_terms_used: 0,
            cocycle_residual,
        },
    };

    let table = settings
        .t_grid
        .par_iter()
        .map(|&t| decomposition.psi_with_terms(t).map(|(v, n)| (t, v, n)))
        .collect::<Result<Vec<_>>>()?;
    let series_terms_used = table.iter().map(|(_, _, n)| *n).max().unwrap_or(0);
    decomposition.samples = table.into_iter().map(|(t, v, _)| (t, v)).collect();

    let points: Vec<(f64, f64)> = settings
        .holdout_lambdas
        .iter()
        .flat_map(|&l| settings.holdout_t.iter().map(move |&t| (l, t)))
        .collect();
    let gaps = points
        .par_iter()
        .map(|&(l, t)| {
            let phi_value = checked_eval(phi.as_ref(), l, t)?;
            let rebuilt = decomposition.reconstruct_at(l, t)?;
            Ok((phi_value.distance(&rebuilt), phi_value.norm_inf()))
        })
        .collect::<Result<Vec<_>>>()?;
    let residual = gaps.iter().map(|g| g.0).fold(0.0, f64::max);
    let scale = gaps.iter().map(|g| g.1).fold(1.0, f64::max);
    decomposition.diagnostics.reconstruction_residual = residual;
    decomposition.diagnostics.reconstruction_scale = scale;
    decomposition.diagnostics.series_terms_used = series_terms_used;
    if residual > settings.reconstruction_tol * scale {
        return Err(Error::DecompositionFailure {
            residual,
            tol: settings.reconstruction_tol * scale,
        });
    }
    Ok(decomposition)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{reconstruct_phi, FnProvider, PolyExp};

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn exponential_psi_is_recovered() {
        let phi = FnProvider::scalar(CocycleOrder::real(-1.0).unwrap(), |l, t| re(l * (-l * t).exp() - (-t).exp())).shared();
        let d = decompose(phi, &DecomposeSettings::default()).unwrap();
        assert!(d.c().is_zero());
        for (t, v) in d.samples() {
            assert!((v[0].re - (-t).exp()).abs() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn planted_log_constant() {
        let phi = FnProvider::scalar(CocycleOrder::real(2.0).unwrap(), |l, t| {
            re((l - 1.0) * t.powi(3) + 5.0 * t * t * l.ln())
        })
        .with_poly_degree(3)
        .shared();
        let d = decompose(phi, &DecomposeSettings::default()).unwrap();
        assert!((d.c()[0].re - 5.0).abs() < 1e-10);
        assert!(d.diagnostics().reconstruction_residual <= 1e-10);
        assert_eq!(d.levels().len(), 3);
    }

    #[test]
    fn zero_cocycle() {
        for k in [-1.3, 0.0, 0.5, 3.0] {
            let d = decompose(FnProvider::zero(CocycleOrder::real(k).unwrap(), 2).shared(), &DecomposeSettings::default()).unwrap();
            assert!(d.c().is_zero());
            assert!(d.samples().iter().all(|(_, v)| v.is_zero()));
        }
    }

    #[test]
    fn fractional_order_round_trip() {
        let psi = PolyExp::scalar(vec![re(0.3), re(-1.0), re(0.25)], vec![(re(0.7), re(-1.5))]);
        let want = psi.clone();
        let phi = reconstruct_phi(Arc::new(psi), VectorValue::zeros(1), CocycleOrder::real(2.5).unwrap()).unwrap();
        let d = decompose(phi, &DecomposeSettings::default()).unwrap();
        assert!(d.c().is_zero());
        for (t, v) in d.samples() {
            let w = want.value(*t).unwrap();
            assert!(v.distance(&w) < 1e-9, "t={t} {v:?} vs {w:?}");
        }
    }

    #[test]
    fn non_cocycle_is_rejected() {
        let phi = FnProvider::scalar(CocycleOrder::real(-1.0).unwrap(), |l, t| re(l + t)).shared();
        assert!(matches!(
            decompose(phi, &DecomposeSettings::default()),
            Err(Error::CocycleViolation { .. })
        ));
    }
}
