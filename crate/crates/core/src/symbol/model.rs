use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::cocycle::{extract_v_at_zero, CocycleProvider, ExtractionSettings, ZeroValueExtraction};
use crate::error::{Error, Result};
use crate::quadrature::integrate_pieces;
use crate::value::{real_pow, CocycleOrder, VectorValue, INTEGER_TOL};

use super::angular::{angular_integral, AngularPart, AngularRule};
use super::cutoff::CutoffProfile;
use super::spatial::SpatialWeight;

/// Absolute tolerance and panel budget for radial integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialQuadrature {
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for RadialQuadrature {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            max_panels: 4000,
        }
    }
}

/// `f(x) Y(xi/|xi|) |xi|^{k-j}`, the degree `k - j` part of a classical symbol.
#[derive(Debug, Clone)]
pub struct HomogeneousLayer {
    pub j: u32,
    pub angular: AngularPart,
    pub spatial: SpatialWeight,
}

impl HomogeneousLayer {
    pub fn new(j: u32, angular: AngularPart, spatial: SpatialWeight) -> Self {
        Self { j, angular, spatial }
    }

    /// Layer with constant spatial factor.
    pub fn flat(j: u32, angular: AngularPart) -> Self {
        Self::new(j, angular, SpatialWeight::default())
    }
}

/// Classical symbol `sum_j f_j(x) Y_j |xi|^{k-j}` on the torus `T^n`, excised
/// near `xi = 0` by a radial cutoff.
#[derive(Debug, Clone)]
pub struct ClassicalSymbolModel {
    n: usize,
    k: Complex64,
    layers: Vec<HomogeneousLayer>,
    cutoff: CutoffProfile,
    pub quadrature: RadialQuadrature,
    pub angular_rule: AngularRule,
}

impl ClassicalSymbolModel {
    pub fn new(n: usize, k: Complex64, layers: Vec<HomogeneousLayer>, cutoff: CutoffProfile) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::InvalidInput(format!("dimension must be 1, 2 or 3, got {n}")));
        }
        if !(k.re.is_finite() && k.im.is_finite()) {
            return Err(Error::InvalidInput(format!("symbol order {k} is not finite")));
        }
        if layers.is_empty() {
            return Err(Error::InvalidInput("a symbol needs at least one homogeneous layer".into()));
        }
        for layer in &layers {
            layer.angular.check_dimension(n)?;
        }
        Ok(Self {
            n,
            k,
            layers,
            cutoff,
            quadrature: RadialQuadrature::default(),
            angular_rule: AngularRule::default(),
        })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> Complex64 {
        self.k
    }

    pub fn layers(&self) -> &[HomogeneousLayer] {
        &self.layers
    }

    pub fn cutoff(&self) -> &CutoffProfile {
        &self.cutoff
    }

    pub fn with_cutoff(mut self, cutoff: CutoffProfile) -> Self {
        self.cutoff = cutoff;
        self
    }

    /// Homogeneity degree `sigma = k - j` of layer `index`.
    pub fn sigma(&self, index: usize) -> Complex64 {
        self.k - self.layers[index].j as f64
    }

    /// Cocycle order `K = k + n`.
    pub fn order(&self) -> Result<CocycleOrder> {
        CocycleOrder::new(self.k + self.n as f64)
    }

    pub fn max_j(&self) -> u32 {
        self.layers.iter().map(|l| l.j).max().unwrap_or(0)
    }

    /// Index of the layer of degree `-n` (the residue-carrying layer), if any.
    pub fn residue_layer(&self) -> Option<usize> {
        (0..self.layers.len()).find(|&i| (self.sigma(i) + self.n as f64).norm() <= INTEGER_TOL)
    }
}

fn sorted_breaks(points: &mut Vec<f64>) {
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * b.abs());
}

/// `int_0^inf r^{sigma+n-1} [chi(lambda r) - chi(r)] dr`, supported on
/// `[min(r0, r0/lambda), max(rho, rho/lambda)]`. For `sigma = -n` this is
/// `log(lambda)` for every cutoff.
pub fn radial_difference_integral(
    sigma: Complex64,
    n: usize,
    cutoff: &CutoffProfile,
    lambda: f64,
    quad: &RadialQuadrature,
) -> Result<Complex64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!("lambda {lambda} is not a positive number")));
    }
    if lambda == 1.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (r0, rho) = (cutoff.r0(), cutoff.rho());
    let mut breaks = vec![r0, rho, r0 / lambda, rho / lambda];
    sorted_breaks(&mut breaks);
    let p = sigma + (n as f64 - 1.0);
    let r = integrate_pieces(
        |r| real_pow(r, p) * (cutoff.value(lambda * r) - cutoff.value(r)),
        &breaks,
        quad.abs_tol,
        quad.max_panels,
    )?;
    Ok(r.value)
}

/// `int_0^inf r^{s-1} [chi_1(r) - chi_2(r)] dr` for two cutoffs.
pub fn cutoff_difference_integral(
    s: Complex64,
    first: &CutoffProfile,
    second: &CutoffProfile,
    quad: &RadialQuadrature,
) -> Result<Complex64> {
    let mut breaks = vec![first.r0(), first.rho(), second.r0(), second.rho()];
    sorted_breaks(&mut breaks);
    let p = s - 1.0;
    let r = integrate_pieces(
        |r| real_pow(r, p) * (first.value(r) - second.value(r)),
        &breaks,
        quad.abs_tol,
        quad.max_panels,
    )?;
    Ok(r.value)
}

fn two_pi_power(n: usize) -> f64 {
    (2.0 * PI).powi(-(n as i32))
}

/// Contribution of one layer to `phi(lambda, t)(x)`:
/// `f(x) (2pi)^{-n} (int Y) t^j A(sigma, lambda)`.
pub fn layer_phi(model: &ClassicalSymbolModel, index: usize, lambda: f64, t: f64, x: &[f64]) -> Result<Complex64> {
    let layer = model
        .layers
        .get(index)
        .ok_or_else(|| Error::InvalidInput(format!("layer index {index} out of range")))?;
    if x.len() != model.n {
        return Err(Error::DimensionMismatch {
            expected: model.n,
            got: x.len(),
        });
    }
    let ang = angular_integral(&layer.angular, model.n, &model.angular_rule)?;
    let radial = radial_difference_integral(model.sigma(index), model.n, &model.cutoff, lambda, &model.quadrature)?;
    Ok(layer.spatial.eval(x) * two_pi_power(model.n) * ang * t.powi(layer.j as i32) * radial)
}

const RADIAL_CACHE: usize = 64;

/// Cocycle generated by a symbol model, sampled at a list of torus points.
/// Entry `i` of each value is the density at `points[i]`.
pub struct SymbolProvider {
    model: Arc<ClassicalSymbolModel>,
    points: Vec<Vec<f64>>,
    order: CocycleOrder,
    // (2pi)^{-n} int Y_j, per layer
    angular: Vec<Complex64>,
    // f_j(x_i), per layer then point
    weights: Vec<Vec<Complex64>>,
    cache: Mutex<Vec<(u64, Arc<Vec<Complex64>>)>>,
}

impl SymbolProvider {
    pub fn model(&self) -> &ClassicalSymbolModel {
        &self.model
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Per-layer `(2pi)^{-n} (int Y_j) A(sigma_j, lambda)`.
    fn radial_coefficients(&self, lambda: f64) -> Result<Arc<Vec<Complex64>>> {
        let key = lambda.to_bits();
        if let Some((_, v)) = self.cache.lock().unwrap().iter().find(|(k, _)| *k == key) {
            return Ok(Arc::clone(v));
        }
        let m = &self.model;
        let coefs = (0..m.layers.len())
            .map(|i| {
                if self.angular[i] == Complex64::new(0.0, 0.0) {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                Ok(self.angular[i] * radial_difference_integral(m.sigma(i), m.n, &m.cutoff, lambda, &m.quadrature)?)
            })
            .collect::<Result<Vec<_>>>()?;
        let coefs = Arc::new(coefs);
        let mut cache = self.cache.lock().unwrap();
        if cache.len() >= RADIAL_CACHE {
            cache.remove(0);
        }
        cache.push((key, Arc::clone(&coefs)));
        Ok(coefs)
    }

    fn combine(&self, lambda: f64, t: f64, derivative: usize) -> Result<VectorValue> {
        let coefs = self.radial_coefficients(lambda)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.points.len()];
        for (i, layer) in self.model.layers.iter().enumerate() {
            let j = layer.j as usize;
            if j < derivative || coefs[i] == Complex64::new(0.0, 0.0) {
                continue;
            }
            let falling: f64 = ((j - derivative + 1)..=j).map(|v| v as f64).product();
            let scale = coefs[i] * falling * t.powi((j - derivative) as i32);
            for (o, w) in out.iter_mut().zip(&self.weights[i]) {
                *o += w * scale;
            }
        }
        Ok(VectorValue::new(out))
    }
}

impl CocycleProvider for SymbolProvider {
    fn order(&self) -> CocycleOrder {
        self.order
    }

    fn dim(&self) -> usize {
        self.points.len()
    }

    fn eval(&self, lambda: f64, t: f64) -> Result<VectorValue> {
        self.combine(lambda, t, 0)
    }

    fn t_derivative(&self, order: usize, lambda: f64, t: f64) -> Option<Result<VectorValue>> {
        Some(self.combine(lambda, t, order))
    }

    fn poly_degree_hint(&self) -> Option<usize> {
        Some(self.model.max_j() as usize)
    }
}

/// Builds the cocycle of `model` with values in `C^{points.len()}`.
pub fn symbol_phi_provider(model: Arc<ClassicalSymbolModel>, points: Vec<Vec<f64>>) -> Result<Arc<SymbolProvider>> {
    if points.is_empty() {
        return Err(Error::InvalidInput("at least one spatial point is required".into()));
    }
    for p in &points {
        if p.len() != model.n {
            return Err(Error::DimensionMismatch {
                expected: model.n,
                got: p.len(),
            });
        }
    }
    let order = model.order()?;
    let angular = model
        .layers
        .iter()
        .map(|l| Ok(angular_integral(&l.angular, model.n, &model.angular_rule)? * two_pi_power(model.n)))
        .collect::<Result<Vec<_>>>()?;
    let weights = model
        .layers
        .iter()
        .map(|l| points.iter().map(|p| l.spatial.eval(p)).collect())
        .collect();
    Ok(Arc::new(SymbolProvider {
        model,
        points,
        order,
        angular,
        weights,
        cache: Mutex::new(Vec::new()),
    }))
}

/// `(2pi)^{-n} int sigma(x, xi) d xi` computed directly, valid for `Re k < -n`:
/// per layer `int_{r0}^{rho} r^{s-1} chi dr - rho^s / s` with `s = sigma + n`.
pub fn direct_symbol_integral(model: &ClassicalSymbolModel, x: &[f64]) -> Result<Complex64> {
    if model.k.re >= -(model.n as f64) {
        return Err(Error::NotTraceClass { k: model.k, n: model.n });
    }
    if x.len() != model.n {
        return Err(Error::DimensionMismatch {
            expected: model.n,
            got: x.len(),
        });
    }
    let chi = &model.cutoff;
    let mut total = Complex64::new(0.0, 0.0);
    for (i, layer) in model.layers.iter().enumerate() {
        let s = model.sigma(i) + model.n as f64;
        let inner = integrate_pieces(
            |r| real_pow(r, s - 1.0) * chi.value(r),
            &[chi.r0(), chi.rho()],
            model.quadrature.abs_tol,
            model.quadrature.max_panels,
        )?
        .value;
        let tail = real_pow(chi.rho(), s) / s;
        let ang = angular_integral(&layer.angular, model.n, &model.angular_rule)?;
        total += layer.spatial.eval(x) * ang * (inner - tail);
    }
    Ok(total * two_pi_power(model.n))
}

struct RadialProvider {
    sigma: Complex64,
    n: usize,
    order: CocycleOrder,
    cutoff: CutoffProfile,
    quad: RadialQuadrature,
}

impl CocycleProvider for RadialProvider {
    fn order(&self) -> CocycleOrder {
        self.order
    }

    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, lambda: f64, _t: f64) -> Result<VectorValue> {
        Ok(VectorValue::scalar(radial_difference_integral(
            self.sigma,
            self.n,
            &self.cutoff,
            lambda,
            &self.quad,
        )?))
    }

    fn t_derivative(&self, order: usize, lambda: f64, t: f64) -> Option<Result<VectorValue>> {
        if order == 0 {
            Some(self.eval(lambda, t))
        } else {
            Some(Ok(VectorValue::zeros(1)))
        }
    }

    fn poly_degree_hint(&self) -> Option<usize> {
        Some(0)
    }
}

/// Regularized `int_0^inf r^{sigma+n-1} (1 - chi(r))`-type finite part of the
/// radial integral, read off as the `v` of the order-`(sigma + n)` cocycle
/// `lambda -> A(sigma, lambda)`. Fails on the Wodzicki locus `sigma = -n`.
pub fn finite_part_radial(
    sigma: Complex64,
    n: usize,
    cutoff: &CutoffProfile,
    settings: &ExtractionSettings,
    quad: &RadialQuadrature,
) -> Result<ZeroValueExtraction> {
    let s = sigma + n as f64;
    if s.norm() <= INTEGER_TOL {
        return Err(Error::PoleLocus {
            order: s,
            hint: "the radial integral has a logarithm here; use the residue instead",
        });
    }
    let provider = RadialProvider {
        sigma,
        n,
        order: CocycleOrder::new(s)?,
        cutoff: *cutoff,
        quad: *quad,
    };
    extract_v_at_zero(&provider, settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{AngularPreset, CutoffShape};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn pl(r0: f64, rho: f64) -> CutoffProfile {
        CutoffProfile::piecewise_linear(r0, rho).unwrap()
    }

    fn quad() -> RadialQuadrature {
        RadialQuadrature::default()
    }

    #[test]
    fn radial_trivial_at_lambda_one() {
        let v = radial_difference_integral(c(-0.3), 2, &pl(1.0, 2.0), 1.0, &quad()).unwrap();
        assert_eq!(v, c(0.0));
    }

    #[test]
    fn radial_logarithm_on_residue_layer() {
        for chi in [pl(1.0, 2.0), CutoffProfile::smoothstep(0.5, 3.0, 5).unwrap()] {
            for n in 1..=3 {
                for lambda in [0.4, 2.0, 3.7] {
                    let v = radial_difference_integral(c(-(n as f64)), n, &chi, lambda, &quad()).unwrap();
                    assert!((v - c(f64::ln(lambda))).norm() < 1e-12, "n={n} lambda={lambda}");
                }
            }
        }
    }

    #[test]
    fn radial_linear_weight() {
        let v = radial_difference_integral(c(0.0), 1, &pl(1.0, 2.0), 2.0, &quad()).unwrap();
        assert!((v.re - 0.75).abs() < 1e-12);
    }

    #[test]
    fn radial_complex_power_matches_closed_form() {
        // s = sigma + n; int r^{s-1}[chi(l r) - chi(r)] = (l^{-s} - 1) * I(s)
        // with I(s) = int r^{s-1} (chi(r) - 1_{r>rho}) dr - rho^s/s for Re s<0.
        let s = Complex64::new(-0.5, 0.3);
        let chi = pl(1.0, 2.0);
        let lambda = 2.5;
        let v = radial_difference_integral(s - 1.0, 1, &chi, lambda, &quad()).unwrap();
        // int_1^2 r^{s-1}(r-1) dr = (2^{s+1}-1)/(s+1) - (2^s-1)/s
        let two = |p: Complex64| real_pow(2.0, p);
        let i = (two(s + 1.0) - 1.0) / (s + 1.0) - (two(s) - 1.0) / s - two(s) / s;
        let want = (real_pow(lambda, -s) - 1.0) * i;
        assert!((v - want).norm() < 1e-12, "{v} vs {want}");
    }

    #[test]
    fn layer_values_on_residue_locus() {
        let m1 = ClassicalSymbolModel::new(1, c(-1.0), vec![HomogeneousLayer::flat(0, AngularPart::unit())], pl(1.0, 2.0)).unwrap();
        let v = layer_phi(&m1, 0, 2.0, 0.7, &[0.0]).unwrap();
        assert!((v.re - f64::ln(2.0) / PI).abs() < 1e-12);
        assert!((v.re - 0.220_635_6).abs() < 1e-7);
        let m2 = ClassicalSymbolModel::new(2, c(-2.0), vec![HomogeneousLayer::flat(0, AngularPart::unit())], pl(1.0, 2.0)).unwrap();
        let v = layer_phi(&m2, 0, 2.0, 0.7, &[0.0, 0.0]).unwrap();
        assert!((v.re - 0.110_318).abs() < 1e-6);
    }

    #[test]
    fn provider_matches_layer_sum_and_is_a_cocycle() {
        let layers = vec![
            HomogeneousLayer::new(0, AngularPart::unit(), SpatialWeight::Cosine { amplitude: 0.5 }),
            HomogeneousLayer::flat(1, AngularPart::Preset(AngularPreset::FirstCoordinateSquared)),
            HomogeneousLayer::flat(2, AngularPart::constant(-0.25)),
        ];
        let model = ClassicalSymbolModel::new(2, Complex64::new(-1.3, 0.2), layers, pl(0.5, 3.0)).unwrap();
        let pts = vec![vec![0.0, 0.0], vec![1.0, 2.0]];
        let p = symbol_phi_provider(Arc::new(model.clone()), pts.clone()).unwrap();
        let (l, t) = (1.7, 0.9);
        let v = p.eval(l, t).unwrap();
        for (i, x) in pts.iter().enumerate() {
            let want: Complex64 = (0..3).map(|j| layer_phi(&model, j, l, t, x).unwrap()).sum();
            assert!((v[i] - want).norm() < 1e-13);
        }
        let r = crate::cocycle::verify_cocycle(p.as_ref(), &crate::cocycle::CocycleGrid::standard()).unwrap();
        assert!(r.max < 1e-10, "residual {}", r.max);
    }

    #[test]
    fn direct_integral_of_decaying_symbol() {
        let m = ClassicalSymbolModel::new(1, c(-2.0), vec![HomogeneousLayer::flat(0, AngularPart::unit())], pl(1.0, 2.0)).unwrap();
        let v = direct_symbol_integral(&m, &[0.3]).unwrap();
        assert!((v.re - f64::ln(2.0) / PI).abs() < 1e-12);
        let m = m.clone().with_cutoff(CutoffProfile::new(1.0, 2.0, CutoffShape::PiecewiseLinear).unwrap());
        assert!(direct_symbol_integral(&m, &[0.0, 1.0]).is_err());
        let bad = ClassicalSymbolModel::new(1, c(-1.0), vec![HomogeneousLayer::flat(0, AngularPart::unit())], pl(1.0, 2.0)).unwrap();
        assert!(matches!(direct_symbol_integral(&bad, &[0.0]), Err(Error::NotTraceClass { .. })));
    }

    #[test]
    fn radial_finite_part() {
        let fp = finite_part_radial(c(0.0), 1, &pl(1.0, 2.0), &ExtractionSettings::default(), &quad()).unwrap();
        assert!((fp.value[0].re + 1.5).abs() < 1e-10);
        let err = finite_part_radial(c(-1.0), 1, &pl(1.0, 2.0), &ExtractionSettings::default(), &quad());
        assert!(matches!(err, Err(Error::PoleLocus { .. })));
    }

    #[test]
    fn model_validation() {
        let unit = || vec![HomogeneousLayer::flat(0, AngularPart::unit())];
        assert!(ClassicalSymbolModel::new(4, c(-1.0), unit(), pl(1.0, 2.0)).is_err());
        assert!(ClassicalSymbolModel::new(1, c(-1.0), vec![], pl(1.0, 2.0)).is_err());
        let pair = vec![HomogeneousLayer::flat(
            0,
            AngularPart::Pair {
                plus: c(1.0),
                minus: c(0.0),
            },
        )];
        assert!(ClassicalSymbolModel::new(2, c(-1.0), pair, pl(1.0, 2.0)).is_err());
        let m = ClassicalSymbolModel::new(2, c(-1.0), unit(), pl(1.0, 2.0)).unwrap();
        assert!(symbol_phi_provider(Arc::new(m.clone()), vec![]).is_err());
        assert!(symbol_phi_provider(Arc::new(m), vec![vec![0.0]]).is_err());
    }
}
