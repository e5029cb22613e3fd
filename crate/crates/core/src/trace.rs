//! Wodzicki residue densities and Kontsevich-Vishik densities read off from
//! the cocycle of a symbol model, with classical closed-form oracles.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::cocycle::{c_by_derivative, decompose, DecomposeSettings};
use crate::error::{Error, Result};
use crate::symbol::{
    angular_integral, cutoff_difference_integral, direct_symbol_integral, symbol_phi_provider, ClassicalSymbolModel,
    CutoffProfile, TorusGrid,
};
use crate::value::{compensated_sum, CocycleOrder, OrderClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    Wodzicki,
    KontsevichVishik,
}

impl TraceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceKind::Wodzicki => "wodzicki",
            TraceKind::KontsevichVishik => "kv",
        }
    }
}

/// Numerical side results of a density computation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TraceDiagnostics {
    /// Wodzicki only: max gap between the derivative route and the reduction route.
    pub two_route_gap: Option<f64>,
    /// Spread of the extracted constants across lambdas.
    pub lambda_spread: f64,
    /// KV only: reconstruction residual of the decomposition.
    pub reconstruction_residual: Option<f64>,
    pub cocycle_residual: Option<f64>,
}

/// Per-point densities on a torus grid and their integral.
#[derive(Debug, Clone)]
pub struct TraceReport {
    pub kind: TraceKind,
    pub order: CocycleOrder,
    /// Derivative order `l = k + n` (Wodzicki only).
    pub derivative_order: Option<u32>,
    pub points: Vec<Vec<f64>>,
    pub per_point: Vec<Complex64>,
    pub integrated: Complex64,
    pub oracle_per_point: Option<Vec<Complex64>>,
    pub oracle_gap: Option<f64>,
    pub diagnostics: TraceDiagnostics,
}

fn max_gap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Rectangle rule on the torus: `(2pi)^n / len * sum`.
pub fn integrate_density(per_point: &[Complex64], grid: &TorusGrid) -> Result<Complex64> {
    if per_point.is_empty() {
        return Err(Error::InvalidInput("cannot integrate a density over an empty grid".into()));
    }
    if per_point.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: per_point.len(),
        });
    }
    Ok(compensated_sum(per_point.iter().copied()) * grid.weight())
}

/// `f(x) (2pi)^{-n} int_{S^{n-1}} Y dω` summed over layers of degree `-n`;
/// zero when no such layer exists.
pub fn wodzicki_oracle(model: &ClassicalSymbolModel, x: &[f64]) -> Result<Complex64> {
    let n = model.dimension();
    let mut total = Complex64::new(0.0, 0.0);
    for (i, layer) in model.layers().iter().enumerate() {
        if (model.sigma(i) + n as f64).norm() > crate::value::INTEGER_TOL {
            continue;
        }
        total += layer.spatial.eval(x) * angular_integral(&layer.angular, n, &model.angular_rule)?;
    }
    Ok(total * (2.0 * PI).powi(-(n as i32)))
}

/// Wodzicki density `c(x) = phi^{(l)}(lambda, 0)(x) / (l! log lambda)` with
/// `l = k + n`, cross-checked against the reduction route and the classical
/// residue formula.
pub fn wodzicki_density(model: &ClassicalSymbolModel, grid: &TorusGrid, settings: &DecomposeSettings) -> Result<TraceReport> {
    let order = model.order()?;
    let OrderClass::NonNegativeInteger(l) = order.classify() else {
        return Err(Error::NotPoleLocus {
            order: order.value(),
            hint: "the residue density vanishes off k + n in Z>=0; use the Kontsevich-Vishik branch",
        });
    };
    check_grid(model, grid)?;
    let points = grid.points();
    let provider = symbol_phi_provider(Arc::new(model.clone()), points.clone())?;
    let derivative = c_by_derivative(provider.as_ref(), &settings.extraction)?;
    let reduction = decompose(provider, settings)?;
    let per_point = derivative.value.entries().to_vec();
    let two_route = max_gap(&per_point, reduction.c().entries());
    let oracle = points.iter().map(|x| wodzicki_oracle(model, x)).collect::<Result<Vec<_>>>()?;
    let integrated = integrate_density(&per_point, grid)?;
    Ok(TraceReport {
        kind: TraceKind::Wodzicki,
        order,
        derivative_order: Some(l),
        oracle_gap: Some(max_gap(&per_point, &oracle)),
        oracle_per_point: Some(oracle),
        points,
        per_point,
        integrated,
        diagnostics: TraceDiagnostics {
            two_route_gap: Some(two_route),
            lambda_spread: derivative.spread.max(reduction.diagnostics().lambda_independence_spread),
            reconstruction_residual: Some(reduction.diagnostics().reconstruction_residual),
            cocycle_residual: reduction.diagnostics().cocycle_residual,
        },
    })
}

/// Kontsevich-Vishik density `psi(1)(x)` from the decomposition of the symbol
/// cocycle; compared with the convergent symbol integral when `Re k < -n`.
pub fn kv_density(model: &ClassicalSymbolModel, grid: &TorusGrid, settings: &DecomposeSettings) -> Result<TraceReport> {
    let order = model.order()?;
    if order.integer().is_some() {
        return Err(Error::PoleLocus {
            order: order.value(),
            hint: "the Kontsevich-Vishik density is undefined for k + n in Z>=0; use the residue branch",
        });
    }
    check_grid(model, grid)?;
    let points = grid.points();
    let provider = symbol_phi_provider(Arc::new(model.clone()), points.clone())?;
    let d = decompose(provider, settings)?;
    let per_point = d.psi(1.0)?.into_entries();
    let oracle = if model.k().re < -(model.dimension() as f64) {
        Some(points.iter().map(|x| direct_symbol_integral(model, x)).collect::<Result<Vec<_>>>()?)
    } else {
        None
    };
    let integrated = integrate_density(&per_point, grid)?;
    Ok(TraceReport {
        kind: TraceKind::KontsevichVishik,
        order,
        derivative_order: None,
        oracle_gap: oracle.as_ref().map(|o| max_gap(&per_point, o)),
        oracle_per_point: oracle,
        points,
        per_point,
        integrated,
        diagnostics: TraceDiagnostics {
            two_route_gap: None,
            lambda_spread: d.diagnostics().lambda_independence_spread,
            reconstruction_residual: Some(d.diagnostics().reconstruction_residual),
            cocycle_residual: d.diagnostics().cocycle_residual,
        },
    })
}

/// Predicted change of the KV density at `x` when the model's cutoff is
/// replaced by `other`:
/// `(2pi)^{-n} sum f(x) (int Y) int r^{sigma+n-1} (chi - chi_other) dr`.
pub fn kv_cutoff_shift(model: &ClassicalSymbolModel, other: &CutoffProfile, x: &[f64]) -> Result<Complex64> {
    let n = model.dimension();
    let mut total = Complex64::new(0.0, 0.0);
    for (i, layer) in model.layers().iter().enumerate() {
        let ang = angular_integral(&layer.angular, n, &model.angular_rule)?;
        let radial = cutoff_difference_integral(model.sigma(i) + n as f64, model.cutoff(), other, &model.quadrature)?;
        total += layer.spatial.eval(x) * ang * radial;
    }
    Ok(total * (2.0 * PI).powi(-(n as i32)))
}

fn check_grid(model: &ClassicalSymbolModel, grid: &TorusGrid) -> Result<()> {
    if grid.dimension() != model.dimension() {
        return Err(Error::DimensionMismatch {
            expected: model.dimension(),
            got: grid.dimension(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{finite_part_radial, AngularPart, HomogeneousLayer, SpatialWeight};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn single(n: usize, k: f64, chi: CutoffProfile) -> ClassicalSymbolModel {
        ClassicalSymbolModel::new(n, c(k), vec![HomogeneousLayer::flat(0, AngularPart::unit())], chi).unwrap()
    }

    fn pl(r0: f64, rho: f64) -> CutoffProfile {
        CutoffProfile::piecewise_linear(r0, rho).unwrap()
    }

    #[test]
    fn residue_density_in_one_and_two_dimensions() {
        let s = DecomposeSettings::default();
        let r = wodzicki_density(&single(1, -1.0, pl(1.0, 2.0)), &TorusGrid::new(1, 4).unwrap(), &s).unwrap();
        for v in &r.per_point {
            assert!((v.re - 1.0 / PI).abs() < 1e-10);
        }
        assert!(r.oracle_gap.unwrap() <= 1e-10);
        assert!(r.diagnostics.two_route_gap.unwrap() <= 1e-9);
        assert!((r.integrated.re - 2.0).abs() < 1e-9);
        let r = wodzicki_density(&single(2, -2.0, pl(0.5, 3.0)), &TorusGrid::new(2, 2).unwrap(), &s).unwrap();
        assert!((r.per_point[0].re - 1.0 / (2.0 * PI)).abs() < 1e-10);
    }

    #[test]
    fn residue_density_without_critical_layer() {
        let s = DecomposeSettings::default();
        let r = wodzicki_density(&single(1, 0.0, pl(1.0, 2.0)), &TorusGrid::new(1, 3).unwrap(), &s).unwrap();
        assert!(r.per_point.iter().all(|v| v.norm() < 1e-10));
        assert_eq!(r.derivative_order, Some(1));
    }

    #[test]
    fn oracle_with_cosine_weight() {
        let m = ClassicalSymbolModel::new(
            1,
            c(-1.0),
            vec![HomogeneousLayer::new(0, AngularPart::unit(), SpatialWeight::Cosine { amplitude: 1.0 })],
            pl(1.0, 2.0),
        )
        .unwrap();
        assert!((wodzicki_oracle(&m, &[PI / 2.0]).unwrap().re - 1.0 / PI).abs() < 1e-15);
        let r = wodzicki_density(&m, &TorusGrid::new(1, 8).unwrap(), &DecomposeSettings::default()).unwrap();
        assert!((r.integrated.re - 2.0).abs() < 1e-9);
        assert!(r.oracle_gap.unwrap() < 1e-10);
    }

    #[test]
    fn branch_guards() {
        let s = DecomposeSettings::default();
        let g = TorusGrid::new(1, 1).unwrap();
        assert!(matches!(
            wodzicki_density(&single(1, -2.0, pl(1.0, 2.0)), &g, &s),
            Err(Error::NotPoleLocus { .. })
        ));
        assert!(matches!(kv_density(&single(1, -1.0, pl(1.0, 2.0)), &g, &s), Err(Error::PoleLocus { .. })));
        assert!(wodzicki_density(&single(2, -2.0, pl(1.0, 2.0)), &g, &s).is_err());
    }

    #[test]
    fn kv_trace_class_consistency() {
        let r = kv_density(&single(1, -2.0, pl(1.0, 2.0)), &TorusGrid::new(1, 2).unwrap(), &DecomposeSettings::default()).unwrap();
        for v in &r.per_point {
            assert!((v.re - f64::ln(2.0) / PI).abs() < 1e-9);
        }
        assert!(r.oracle_gap.unwrap() <= 1e-9);
    }

    #[test]
    fn kv_matches_radial_finite_part() {
        let chi = pl(1.0, 2.0);
        let m = single(1, -0.5, chi);
        let r = kv_density(&m, &TorusGrid::new(1, 1).unwrap(), &DecomposeSettings::default()).unwrap();
        assert!(r.oracle_gap.is_none());
        let fp = finite_part_radial(c(-0.5), 1, &chi, &Default::default(), &m.quadrature).unwrap();
        assert!((r.per_point[0] - fp.value[0] / PI).norm() < 1e-9);
    }

    #[test]
    fn kv_cutoff_covariance() {
        let s = DecomposeSettings::default();
        let g = TorusGrid::new(1, 1).unwrap();
        let chi1 = pl(1.0, 2.0);
        let chi2 = CutoffProfile::smoothstep(0.5, 3.0, 5).unwrap();
        let m1 = single(1, -0.5, chi1);
        let m2 = m1.clone().with_cutoff(chi2);
        let d = kv_density(&m1, &g, &s).unwrap().per_point[0] - kv_density(&m2, &g, &s).unwrap().per_point[0];
        let want = kv_cutoff_shift(&m1, &chi2, &[0.0]).unwrap();
        assert!((d - want).norm() < 1e-9, "{d} vs {want}");
    }

    #[test]
    fn zero_symbol_has_zero_density() {
        let m = ClassicalSymbolModel::new(1, c(-0.5), vec![HomogeneousLayer::flat(0, AngularPart::constant(0.0))], pl(1.0, 2.0)).unwrap();
        let r = kv_density(&m, &TorusGrid::new(1, 2).unwrap(), &DecomposeSettings::default()).unwrap();
        assert!(r.per_point.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn integration_rules() {
        let g = TorusGrid::new(1, 1).unwrap();
        assert!((integrate_density(&[c(0.5)], &g).unwrap().re - PI).abs() < 1e-15);
        assert!(integrate_density(&[], &g).is_err());
        assert!(integrate_density(&[c(1.0), c(2.0)], &g).is_err());
    }
}
