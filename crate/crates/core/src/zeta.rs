//! Holomorphic families of cocycles with order `K(z) = z`: the meromorphic
//! map `z -> psi(z, t)`, its simple poles at nonnegative integers and the
//! identity `Res_{z=m} psi(z, t) = -c(m) t^m`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cocycle::{c_by_derivative, decompose, CocycleProvider, DecomposeSettings, ExtractionSettings, SharedProvider};
use crate::error::{Error, Result};
use crate::symbol::{symbol_phi_provider, ClassicalSymbolModel, CutoffProfile, HomogeneousLayer};
use crate::value::{real_pow, CocycleOrder, CompensatedSum, VectorValue, INTEGER_TOL};

/// Closed rectangle in the z-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZDomain {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl ZDomain {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        if !(re_min < re_max && im_min < im_max) || ![re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "degenerate z-domain [{re_min}, {re_max}] x [{im_min}, {im_max}]"
            )));
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (self.re_min..=self.re_max).contains(&z.re) && (self.im_min..=self.im_max).contains(&z.im)
    }

    pub fn contains_disk(&self, center: Complex64, radius: f64) -> bool {
        center.re - radius >= self.re_min
            && center.re + radius <= self.re_max
            && center.im - radius >= self.im_min
            && center.im + radius <= self.im_max
    }

    /// Nonnegative integers inside the rectangle.
    pub fn integers(&self) -> Vec<u32> {
        if self.im_min > 0.0 || self.im_max < 0.0 || self.re_max < 0.0 {
            return Vec::new();
        }
        let lo = self.re_min.max(0.0).ceil() as u32;
        let hi = self.re_max.floor() as u32;
        (lo..=hi).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    /// Layers of degree `z - n - j`.
    Symbol,
    /// Built from a holomorphic part and planted pole constants.
    Synthetic,
}

/// `z -> phi_z`, a cocycle of order `z` for each `z` in the domain, holomorphic in `z`.
pub trait HolomorphicFamily: Send + Sync {
    fn dim(&self) -> usize;
    fn domain(&self) -> &ZDomain;
    fn kind(&self) -> FamilyKind;
    fn provider_at(&self, z: Complex64) -> Result<SharedProvider>;
}

fn outside(z: Complex64, domain: &ZDomain) -> Error {
    Error::InvalidInput(format!("z = {z} lies outside the family domain {domain:?}"))
}

/// Symbol family with fixed layers and degrees `sigma_j(z) = z - n - j`.
#[derive(Debug, Clone)]
pub struct SymbolFamily {
    n: usize,
    layers: Vec<HomogeneousLayer>,
    cutoff: CutoffProfile,
    points: Vec<Vec<f64>>,
    domain: ZDomain,
}

impl SymbolFamily {
    pub fn new(
        n: usize,
        layers: Vec<HomogeneousLayer>,
        cutoff: CutoffProfile,
        points: Vec<Vec<f64>>,
        domain: ZDomain,
    ) -> Result<Self> {
        let family = Self {
            n,
            layers,
            cutoff,
            points,
            domain,
        };
        // validates dimension, layers and points once
        let probe = Complex64::new(0.5 * (domain.re_min + domain.re_max), 0.5 * (domain.im_min + domain.im_max));
        symbol_phi_provider(Arc::new(family.model_at(probe)?), family.points.clone())?;
        Ok(family)
    }

    /// The fixed symbol of order `k = z - n`.
    pub fn model_at(&self, z: Complex64) -> Result<ClassicalSymbolModel> {
        ClassicalSymbolModel::new(self.n, z - self.n as f64, self.layers.clone(), self.cutoff)
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }
}

impl HolomorphicFamily for SymbolFamily {
    fn dim(&self) -> usize {
        self.points.len()
    }

    fn domain(&self) -> &ZDomain {
        &self.domain
    }

    fn kind(&self) -> FamilyKind {
        FamilyKind::Symbol
    }

    fn provider_at(&self, z: Complex64) -> Result<SharedProvider> {
        if !self.domain.contains(z) {
            return Err(outside(z, &self.domain));
        }
        Ok(symbol_phi_provider(Arc::new(self.model_at(z)?), self.points.clone())?)
    }
}

type HolomorphicPart = dyn Fn(Complex64, f64) -> VectorValue + Send + Sync;
type HolomorphicDerivative = dyn Fn(Complex64, usize, f64) -> VectorValue + Send + Sync;

/// Family with `psi(z, t) = h(z, t) - sum_m c(m) t^m / (z - m)` over the
/// nonnegative integers `m` of the domain, `h` holomorphic.
#[derive(Clone)]
pub struct SyntheticFamily {
    dim: usize,
    domain: ZDomain,
    h: Arc<HolomorphicPart>,
    h_derivative: Option<Arc<HolomorphicDerivative>>,
    planted: Vec<(u32, VectorValue)>,
}

impl std::fmt::Debug for SyntheticFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SyntheticFamily")
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .field("planted", &self.planted)
            .finish_non_exhaustive()
    }
}

impl SyntheticFamily {
    pub fn new<H, C>(dim: usize, domain: ZDomain, h: H, c: C) -> Result<Self>
    where
        H: Fn(Complex64, f64) -> VectorValue + Send + Sync + 'static,
        C: Fn(Complex64) -> VectorValue,
    {
        let planted = domain
            .integers()
            .into_iter()
            .map(|m| {
                let v = c(Complex64::new(m as f64, 0.0));
                v.ensure_dim(dim)?;
                Ok((m, v))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dim,
            domain,
            h: Arc::new(h),
            h_derivative: None,
            planted,
        })
    }

    /// Supplies `d^k/dt^k h(z, t)`.
    pub fn with_t_derivative<D>(mut self, d: D) -> Self
    where
        D: Fn(Complex64, usize, f64) -> VectorValue + Send + Sync + 'static,
    {
        self.h_derivative = Some(Arc::new(d));
        self
    }

    pub fn planted(&self) -> &[(u32, VectorValue)] {
        &self.planted
    }

    /// Closed-form `psi(z, t)`.
    pub fn exact_psi(&self, z: Complex64, t: f64) -> VectorValue {
        let mut out = (self.h)(z, t);
        for (m, c) in &self.planted {
            out.axpy(-Complex64::new(t.powi(*m as i32), 0.0) / (z - *m as f64), c);
        }
        out
    }
}

impl HolomorphicFamily for SyntheticFamily {
    fn dim(&self) -> usize {
        self.dim
    }

    fn domain(&self) -> &ZDomain {
        &self.domain
    }

    fn kind(&self) -> FamilyKind {
        FamilyKind::Synthetic
    }

    fn provider_at(&self, z: Complex64) -> Result<SharedProvider> {
        if !self.domain.contains(z) {
            return Err(outside(z, &self.domain));
        }
        Ok(Arc::new(SyntheticProvider {
            family: self.clone(),
            z,
            order: CocycleOrder::new(z)?,
        }))
    }
}

/// `(e^u - 1) / u`, entire.
fn exp_ratio(u: Complex64) -> Complex64 {
    if u.norm() < 1e-2 {
        let mut term = Complex64::new(1.0, 0.0);
        let mut acc = term;
        for k in 2..=7 {
            term = term * u / k as f64;
            acc += term;
        }
        acc
    } else {
        (u.exp() - 1.0) / u
    }
}

struct SyntheticProvider {
    family: SyntheticFamily,
    z: Complex64,
    order: CocycleOrder,
}

impl SyntheticProvider {
    // -(lambda^{m-z} - 1) / (z - m) = log(lambda) E((m - z) log lambda)
    fn pole_terms(&self, out: &mut VectorValue, lambda: f64, t: f64, derivative: usize) {
        let log = lambda.ln();
        for (m, c) in &self.family.planted {
            let m = *m as usize;
            if m < derivative {
                continue;
            }
            let falling: f64 = ((m - derivative + 1)..=m).map(|v| v as f64).product();
            let scale = exp_ratio((m as f64 - self.z) * log) * log * falling * t.powi((m - derivative) as i32);
            out.axpy(scale, c);
        }
    }
}

impl CocycleProvider for SyntheticProvider {
    fn order(&self) -> CocycleOrder {
        self.order
    }

    fn dim(&self) -> usize {
        self.family.dim
    }

    fn eval(&self, lambda: f64, t: f64) -> Result<VectorValue> {
        let h = &self.family.h;
        let mut out = h(self.z, lambda * t).scaled(self.order.scale_factor(lambda)).sub(&h(self.z, t));
        self.pole_terms(&mut out, lambda, t, 0);
        Ok(out)
    }

    fn t_derivative(&self, order: usize, lambda: f64, t: f64) -> Option<Result<VectorValue>> {
        let d = self.family.h_derivative.as_ref()?;
        let factor = real_pow(lambda, -self.z + order as f64);
        let mut out = d(self.z, order, lambda * t).scaled(factor).sub(&d(self.z, order, t));
        self.pole_terms(&mut out, lambda, t, order);
        Some(Ok(out))
    }
}

fn integer_part(z: Complex64) -> Option<u32> {
    CocycleOrder::new(z).ok()?.integer()
}

/// `psi(z, t)` from the decomposition of the family member at `z`.
pub fn psi_of_z(family: &dyn HolomorphicFamily, z: Complex64, t: f64, settings: &DecomposeSettings) -> Result<VectorValue> {
    if integer_part(z).is_some() {
        return Err(Error::PoleLocus {
            order: z,
            hint: "psi(z, t) has a pole here; use the contour residue",
        });
    }
    decompose(family.provider_at(z)?, settings)?.psi(t)
}

/// `c(m)` by the derivative formula at order `m`.
pub fn c_of_family(family: &dyn HolomorphicFamily, m: u32, settings: &ExtractionSettings) -> Result<VectorValue> {
    let z = Complex64::new(m as f64, 0.0);
    if !family.domain().contains(z) {
        return Err(outside(z, family.domain()));
    }
    Ok(c_by_derivative(family.provider_at(z)?.as_ref(), settings)?.value)
}

/// Circle used for contour averages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contour {
    pub radius: f64,
    pub nodes: usize,
}

impl Default for Contour {
    fn default() -> Self {
        Self { radius: 0.1, nodes: 16 }
    }
}

impl Contour {
    /// Equispaced points, offset by half a step so that no node lies on the
    /// real axis or on the line `Re z = Re center`.
    pub fn points(&self, center: Complex64) -> Vec<Complex64> {
        (0..self.nodes)
            .map(|i| {
                let theta = 2.0 * PI * (i as f64 + 0.5) / self.nodes as f64;
                center + Complex64::from_polar(self.radius, theta)
            })
            .collect()
    }

    fn validate(&self, center: Complex64, domain: &ZDomain) -> Result<()> {
        if !(self.radius > 0.0 && self.radius < 0.5) || self.nodes < 3 {
            return Err(Error::InvalidInput(format!(
                "contour needs 0 < radius < 0.5 and at least 3 nodes, got radius {} with {} nodes",
                self.radius, self.nodes
            )));
        }
        if !domain.contains_disk(center, self.radius) {
            return Err(Error::InvalidInput(format!(
                "contour of radius {} around {center} leaves the family domain",
                self.radius
            )));
        }
        Ok(())
    }
}

/// `(1/N) sum_i (z_i - center)^power psi(z_i, t)` over the contour nodes.
pub fn contour_moment(
    family: &dyn HolomorphicFamily,
    center: Complex64,
    contour: &Contour,
    power: i32,
    t: f64,
    settings: &DecomposeSettings,
) -> Result<VectorValue> {
    contour.validate(center, family.domain())?;
    let values = contour
        .points(center)
        .par_iter()
        .map(|&z| Ok(((z - center).powi(power), psi_of_z(family, z, t, settings)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut sum = CompensatedSum::new(family.dim());
    for (w, v) in &values {
        sum.add_scaled(*w / contour.nodes as f64, v);
    }
    Ok(sum.value())
}

/// Contour residue of `psi(., t)` at a nonnegative integer, compared with `-c(m) t^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleReport {
    pub m: u32,
    pub t: f64,
    pub residue_estimate: VectorValue,
    pub c_value: VectorValue,
    /// `|residue + c(m) t^m|_inf`.
    pub gap: f64,
    /// `|(1/N) sum (z - m)^2 psi|_inf`; zero for a simple pole.
    pub second_moment: f64,
    pub contour: Contour,
}

pub fn residue_at(
    family: &dyn HolomorphicFamily,
    m: u32,
    contour: &Contour,
    t: f64,
    settings: &DecomposeSettings,
) -> Result<PoleReport> {
    let center = Complex64::new(m as f64, 0.0);
    let residue = contour_moment(family, center, contour, 1, t, settings)?;
    let second = contour_moment(family, center, contour, 2, t, settings)?;
    let c = c_of_family(family, m, &settings.extraction)?;
    let expected = c.scaled(Complex64::new(-t.powi(m as i32), 0.0));
    Ok(PoleReport {
        m,
        t,
        gap: residue.distance(&expected),
        residue_estimate: residue,
        c_value: c,
        second_moment: second.norm_inf(),
        contour: *contour,
    })
}

/// Stability of the residue when the contour radius is halved.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicityCheck {
    pub outer: VectorValue,
    pub inner: VectorValue,
    /// `|outer - inner| / |outer|`, or the absolute difference when `|outer| <= 1e-8`.
    pub drift: f64,
}

pub fn pole_simplicity(
    family: &dyn HolomorphicFamily,
    m: u32,
    contour: &Contour,
    t: f64,
    settings: &DecomposeSettings,
) -> Result<SimplicityCheck> {
    let center = Complex64::new(m as f64, 0.0);
    let outer = contour_moment(family, center, contour, 1, t, settings)?;
    let half = Contour {
        radius: contour.radius / 2.0,
        nodes: contour.nodes,
    };
    let inner = contour_moment(family, center, &half, 1, t, settings)?;
    let diff = outer.distance(&inner);
    let scale = outer.norm_inf();
    Ok(SimplicityCheck {
        drift: if scale > 1e-8 { diff / scale } else { diff },
        outer,
        inner,
    })
}

/// `|(1/N) sum psi(z_i, t) - psi(z0, t)|_inf` on a circle free of integers.
pub fn holomorphy_gap(
    family: &dyn HolomorphicFamily,
    z0: Complex64,
    contour: &Contour,
    t: f64,
    settings: &DecomposeSettings,
) -> Result<f64> {
    let nearest = z0.re.round().max(0.0);
    if (z0 - nearest).norm() <= contour.radius + INTEGER_TOL {
        return Err(Error::InvalidInput(format!(
            "circle of radius {} around {z0} encloses the pole lattice",
            contour.radius
        )));
    }
    let mean = contour_moment(family, z0, contour, 0, t, settings)?;
    Ok(mean.distance(&psi_of_z(family, z0, t, settings)?))
}

/// Rectangular grid of z values for scanning `psi(z, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZWindow {
    pub re_min: f64,
    pub re_max: f64,
    pub re_nodes: usize,
    pub im_min: f64,
    pub im_max: f64,
    pub im_nodes: usize,
}

impl ZWindow {
    /// Points with the real part varying slowest.
    pub fn points(&self) -> Vec<Complex64> {
        let axis = |lo: f64, hi: f64, count: usize| -> Vec<f64> {
            if count <= 1 {
                return vec![lo];
            }
            (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
        };
        let re = axis(self.re_min, self.re_max, self.re_nodes);
        let im = axis(self.im_min, self.im_max, self.im_nodes);
        re.iter()
            .flat_map(|&a| im.iter().map(move |&b| Complex64::new(a, b)))
            .collect()
    }
}

/// One scanned point; `psi` is `None` at poles and where the decomposition failed.
#[derive(Debug, Clone, PartialEq)]
pub struct ZScanPoint {
    pub z: Complex64,
    pub psi: Option<VectorValue>,
    pub status: String,
}

pub fn zeta_scan(family: &dyn HolomorphicFamily, window: &ZWindow, t: f64, settings: &DecomposeSettings) -> Vec<ZScanPoint> {
    window
        .points()
        .par_iter()
        .map(|&z| match psi_of_z(family, z, t, settings) {
            Ok(v) => ZScanPoint {
                z,
                psi: Some(v),
                status: "ok".into(),
            },
            Err(e) => ZScanPoint {
                z,
                psi: None,
                status: match e {
                    Error::PoleLocus { .. } => "pole".into(),
                    other => other.to_string(),
                },
            },
        })
        .collect()
}
