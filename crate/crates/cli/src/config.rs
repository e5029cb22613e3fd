//! JSON run configuration: parsing, preset resolution, validation and the
//! canonical hash.

use std::f64::consts::E;

use cocycle_core::cocycle::{CocycleGrid, DecomposeSettings};
use cocycle_core::symbol::{
    AngularPart, AngularPreset, ClassicalSymbolModel, CutoffProfile, CutoffShape, HomogeneousLayer, SpatialWeight, TorusGrid,
};
use cocycle_core::value::chebyshev_grid;
use cocycle_core::zeta::{Contour, ZDomain, ZWindow};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Complex number written either as a bare real or as `[re, im]`;
/// always serialized as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexValue {
    pub fn value(self) -> Complex64 {
        match self {
            ComplexValue::Real(re) => Complex64::new(re, 0.0),
            ComplexValue::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

impl Serialize for ComplexValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let z = self.value();
        [z.re, z.im].serialize(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetName {
    Unit,
    FirstCoordinate,
    FirstCoordinateSquared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigConfig {
    #[serde(default)]
    pub cos: Vec<ComplexValue>,
    #[serde(default)]
    pub sin: Vec<ComplexValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum AngularConfig {
    Const(ComplexValue),
    /// Values at `+1` and `-1`, dimension 1.
    Pair([ComplexValue; 2]),
    Trig(TrigConfig),
    Preset(PresetName),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpatialConfig {
    Const(ComplexValue),
    /// `1 + a cos(x_1)`.
    Cosine(f64),
}

impl Default for SpatialConfig {
    fn default() -> Self {
        SpatialConfig::Const(ComplexValue::Real(1.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerConfig {
    pub j: u32,
    pub angular: AngularConfig,
    #[serde(default)]
    pub spatial: SpatialConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileName {
    PiecewiseLinear,
    Smoothstep,
}

fn default_smoothstep_order() -> u32 {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffConfig {
    pub profile: ProfileName,
    /// Polynomial degree of the smoothstep ramp.
    #[serde(default = "default_smoothstep_order")]
    pub order: u32,
    pub r0: f64,
    pub rho: f64,
}

impl Default for CutoffConfig {
    fn default() -> Self {
        Self {
            profile: ProfileName::PiecewiseLinear,
            order: default_smoothstep_order(),
            r0: 1.0,
            rho: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub t_nodes: usize,
    pub t_max: f64,
    /// Torus nodes per axis.
    pub x_nodes: usize,
    /// Extraction lambdas.
    pub lambdas: Vec<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            t_nodes: 33,
            t_max: 2.0,
            x_nodes: 4,
            lambdas: vec![2.0, E, 3.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    /// Relative cocycle residual accepted by `verify` and the decomposition precheck.
    pub cocycle: f64,
    /// Relative reconstruction residual of a decomposition.
    pub reconstruction: f64,
    /// Spread of extracted constants across lambdas.
    pub extraction: f64,
    /// Oracle and two-route gaps of `residue` and `kv-trace`.
    pub oracle: f64,
    /// Residue-constant gap and second moment of `zeta-scan`.
    pub residue: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            cocycle: 1e-8,
            reconstruction: 1e-8,
            extraction: 1e-8,
            oracle: 1e-9,
            residue: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZetaConfig {
    pub re_min: f64,
    pub re_max: f64,
    pub re_nodes: usize,
    pub im_min: f64,
    pub im_max: f64,
    pub im_nodes: usize,
    /// Evaluation point of `psi(z, t)`.
    pub t: f64,
}

impl Default for ZetaConfig {
    fn default() -> Self {
        Self {
            re_min: -1.75,
            re_max: 1.75,
            re_nodes: 15,
            im_min: 0.0,
            im_max: 0.0,
            im_nodes: 1,
            t: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContourConfig {
    pub radius: f64,
    pub nodes: usize,
}

impl Default for ContourConfig {
    fn default() -> Self {
        Self { radius: 0.1, nodes: 16 }
    }
}

/// Configuration document as written by the user. Symbol fields are either
/// all present or all absent (then a preset supplies them).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<ComplexValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<Vec<LayerConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<CutoffConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grids: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<ZetaConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contour: Option<ContourConfig>,
}

/// Fully resolved configuration; its serialization is canonical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: usize,
    pub order: ComplexValue,
    pub layers: Vec<LayerConfig>,
    pub cutoff: CutoffConfig,
    pub grids: GridConfig,
    pub tolerances: ToleranceConfig,
    pub zeta: ZetaConfig,
    pub contour: ContourConfig,
}

/// Built-in symbol presets.
pub const PRESETS: [&str; 5] = ["wodzicki-n1", "wodzicki-n2", "kv-n1", "kv-fractional", "zeta-n1"];

fn unit_layer() -> Vec<LayerConfig> {
    vec![LayerConfig {
        j: 0,
        angular: AngularConfig::Preset(PresetName::Unit),
        spatial: SpatialConfig::default(),
    }]
}

/// `(dimension, order)` of a preset symbol; all presets use one unit layer
/// and the linear cutoff on `[1, 2]`.
fn preset_symbol(name: &str) -> Result<(usize, f64), CliError> {
    Ok(match name {
        "wodzicki-n1" => (1, -1.0),
        "wodzicki-n2" => (2, -2.0),
        "kv-n1" => (1, -2.0),
        "kv-fractional" => (1, -0.5),
        "zeta-n1" => (1, -1.0),
        other => {
            return Err(CliError::Validation(format!(
                "unknown preset `{other}`; expected one of {}",
                PRESETS.join(", ")
            )))
        }
    })
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        if text.trim().is_empty() {
            return Ok(Self::default());
        }
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("malformed config: {e}")))
    }

    fn has_symbol(&self) -> bool {
        self.dimension.is_some() || self.order.is_some() || self.layers.is_some()
    }

    /// Fills missing fields from `preset` (used only when no symbol is given)
    /// and from defaults.
    pub fn resolve(self, preset: &str) -> Result<RunConfig, CliError> {
        let (dimension, order, layers) = if self.has_symbol() {
            let missing = |field: &str| CliError::Validation(format!("config field `{field}` is required when a symbol is given"));
            (
                self.dimension.ok_or_else(|| missing("dimension"))?,
                self.order.ok_or_else(|| missing("order"))?,
                self.layers.ok_or_else(|| missing("layers"))?,
            )
        } else {
            let (n, k) = preset_symbol(preset)?;
            (n, ComplexValue::Real(k), unit_layer())
        };
        let config = RunConfig {
            dimension,
            order: ComplexValue::Pair([order.value().re, order.value().im]),
            layers,
            cutoff: self.cutoff.unwrap_or_default(),
            grids: self.grids.unwrap_or_default(),
            tolerances: self.tolerances.unwrap_or_default(),
            zeta: self.zeta.unwrap_or_default(),
            contour: self.contour.unwrap_or_default(),
        };
        config.validate()?;
        Ok(config)
    }
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("`{name}` must be a positive number, got {v}")))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(1..=3).contains(&self.dimension) {
            return Err(CliError::Validation(format!(
                "`dimension` must be 1, 2 or 3, got {}",
                self.dimension
            )));
        }
        if self.layers.is_empty() {
            return Err(CliError::Validation("`layers` must contain at least one layer".into()));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.cocycle", t.cocycle),
            ("tolerances.reconstruction", t.reconstruction),
            ("tolerances.extraction", t.extraction),
            ("tolerances.oracle", t.oracle),
            ("tolerances.residue", t.residue),
            ("grids.t_max", self.grids.t_max),
            ("cutoff.r0", self.cutoff.r0),
            ("cutoff.rho", self.cutoff.rho),
            ("contour.radius", self.contour.radius),
        ] {
            positive(name, v)?;
        }
        if self.grids.t_nodes < 2 {
            return Err(CliError::Validation("`grids.t_nodes` must be at least 2".into()));
        }
        if self.grids.x_nodes == 0 {
            return Err(CliError::Validation("`grids.x_nodes` must be at least 1".into()));
        }
        if self.grids.lambdas.is_empty() {
            return Err(CliError::Validation("`grids.lambdas` must not be empty".into()));
        }
        for &l in &self.grids.lambdas {
            positive("grids.lambdas", l)?;
        }
        let z = &self.zeta;
        if z.re_nodes == 0 || z.im_nodes == 0 || z.re_min > z.re_max || z.im_min > z.im_max || !(z.t >= 0.0) {
            return Err(CliError::Validation(
                "`zeta` needs re_min <= re_max, im_min <= im_max, at least one node per axis and t >= 0".into(),
            ));
        }
        // surfaces cutoff and layer-shape errors as validation errors
        self.model()?;
        Ok(())
    }

    pub fn with_lambdas(mut self, lambdas: Vec<f64>) -> Result<Self, CliError> {
        self.grids.lambdas = lambdas;
        self.validate()?;
        Ok(self)
    }

    pub fn with_tolerance(mut self, tol: f64) -> Result<Self, CliError> {
        positive("--tol", tol)?;
        let t = &mut self.tolerances;
        t.cocycle = tol;
        t.reconstruction = tol;
        t.extraction = tol;
        t.oracle = tol;
        t.residue = tol;
        Ok(self)
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn cutoff_profile(&self) -> Result<CutoffProfile, CliError> {
        let c = &self.cutoff;
        let shape = match c.profile {
            ProfileName::PiecewiseLinear => CutoffShape::PiecewiseLinear,
            ProfileName::Smoothstep => CutoffShape::Smoothstep { degree: c.order },
        };
        Ok(CutoffProfile::new(c.r0, c.rho, shape)?)
    }

    pub fn homogeneous_layers(&self) -> Vec<HomogeneousLayer> {
        self.layers
            .iter()
            .map(|l| {
                let angular = match &l.angular {
                    AngularConfig::Const(v) => AngularPart::Constant(v.value()),
                    AngularConfig::Pair([p, m]) => AngularPart::Pair {
                        plus: p.value(),
                        minus: m.value(),
                    },
                    AngularConfig::Trig(t) => AngularPart::Trig {
                        cos: t.cos.iter().map(|v| v.value()).collect(),
                        sin: t.sin.iter().map(|v| v.value()).collect(),
                    },
                    AngularConfig::Preset(p) => AngularPart::Preset(match p {
                        PresetName::Unit => AngularPreset::Unit,
                        PresetName::FirstCoordinate => AngularPreset::FirstCoordinate,
                        PresetName::FirstCoordinateSquared => AngularPreset::FirstCoordinateSquared,
                    }),
                };
                let spatial = match l.spatial {
                    SpatialConfig::Const(v) => SpatialWeight::Constant(v.value()),
                    SpatialConfig::Cosine(a) => SpatialWeight::Cosine { amplitude: a },
                };
                HomogeneousLayer::new(l.j, angular, spatial)
            })
            .collect()
    }

    pub fn model(&self) -> Result<ClassicalSymbolModel, CliError> {
        Ok(ClassicalSymbolModel::new(
            self.dimension,
            self.order.value(),
            self.homogeneous_layers(),
            self.cutoff_profile()?,
        )?)
    }

    pub fn torus(&self) -> Result<TorusGrid, CliError> {
        Ok(TorusGrid::new(self.dimension, self.grids.x_nodes)?)
    }

    pub fn decompose_settings(&self) -> DecomposeSettings {
        let t = &self.tolerances;
        let mut s = DecomposeSettings::default().with_lambdas(self.grids.lambdas.clone());
        s.extraction.tol = t.extraction;
        s.reduction.tol = t.extraction;
        s.precheck = Some((CocycleGrid::standard(), t.cocycle));
        s.t_grid = chebyshev_grid(self.grids.t_nodes, self.grids.t_max);
        s.reconstruction_tol = t.reconstruction;
        s
    }

    pub fn window(&self) -> ZWindow {
        let z = &self.zeta;
        ZWindow {
            re_min: z.re_min,
            re_max: z.re_max,
            re_nodes: z.re_nodes,
            im_min: z.im_min,
            im_max: z.im_max,
            im_nodes: z.im_nodes,
        }
    }

    /// Window widened by the contour radius plus a margin, so every contour fits.
    pub fn family_domain(&self) -> Result<ZDomain, CliError> {
        let z = &self.zeta;
        let pad = self.contour.radius + 0.25;
        Ok(ZDomain::new(z.re_min - pad, z.re_max + pad, z.im_min - pad, z.im_max + pad)?)
    }

    pub fn contour(&self) -> Contour {
        Contour {
            radius: self.contour.radius,
            nodes: self.contour.nodes,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_uses_preset() {
        let c = RawConfig::parse("").unwrap().resolve("wodzicki-n2").unwrap();
        assert_eq!(c.dimension, 2);
        assert_eq!(c.order.value(), Complex64::new(-2.0, 0.0));
        let c2 = RawConfig::parse("{}").unwrap().resolve("wodzicki-n2").unwrap();
        assert_eq!(c.hash(), c2.hash());
    }

    #[test]
    fn full_document() {
        let text = r#"{
            "dimension": 2, "order": [-1.3, 0.4],
            "layers": [
                {"j": 0, "angular": {"const": 1}, "spatial": {"cosine": 0.5}},
                {"j": 1, "angular": {"trig": {"cos": [0.5, 0, [0.25, 0.1]], "sin": [0, 0.3]}}},
                {"j": 2, "angular": {"preset": "first-coordinate-squared"}, "spatial": {"const": [1, 0]}}
            ],
            "cutoff": {"profile": "smoothstep", "order": 3, "r0": 0.5, "rho": 3},
            "grids": {"x_nodes": 2}
        }"#;
        let c = RawConfig::parse(text).unwrap().resolve("kv-n1").unwrap();
        assert_eq!(c.layers.len(), 3);
        assert_eq!(c.grids.t_nodes, 33);
        let m = c.model().unwrap();
        assert_eq!(m.k(), Complex64::new(-1.3, 0.4));
    }

    #[test]
    fn hash_ignores_key_order_and_number_spelling() {
        let a = r#"{"dimension": 1, "order": -1, "layers": [{"j": 0, "angular": {"const": 1}}], "cutoff": {"profile": "piecewise-linear", "r0": 1, "rho": 2}}"#;
        let b = r#"{"cutoff": {"rho": 2.0, "r0": 1.0, "profile": "piecewise-linear"}, "layers": [{"angular": {"const": [1, 0]}, "j": 0}], "order": [-1, 0], "dimension": 1}"#;
        let ha = RawConfig::parse(a).unwrap().resolve("kv-n1").unwrap().hash();
        let hb = RawConfig::parse(b).unwrap().resolve("kv-n1").unwrap().hash();
        assert_eq!(ha, hb);
    }

    #[test]
    fn rejects_bad_documents() {
        for text in [
            r#"{"dimension": 1, "order": -1, "layers": [], "bogus": 1}"#,
            r#"{"dimension": 1}"#,
            r#"{"dimension": 4, "order": -1, "layers": [{"j": 0, "angular": {"const": 1}}]}"#,
            r#"{"tolerances": {"oracle": -1}}"#,
            r#"{"cutoff": {"profile": "piecewise-linear", "r0": 2, "rho": 1}}"#,
            r#"{"dimension": 2, "order": -1, "layers": [{"j": 0, "angular": {"pair": [1, 0]}}]}"#,
            r#"{"grids": {"lambdas": [2, -1]}}"#,
            r#"{"dimension": 1, "order": -1, "layers": [{"j": 0, "angular": {"const": 1}, "extra": 0}]}"#,
            "{not json",
        ] {
            let r = RawConfig::parse(text).and_then(|c| c.resolve("kv-n1"));
            assert!(matches!(r, Err(CliError::Validation(_))), "{text}");
        }
    }

    #[test]
    fn unknown_preset() {
        assert!(RawConfig::default().resolve("nope").is_err());
    }

    #[test]
    fn overrides() {
        let c = RawConfig::default().resolve("kv-n1").unwrap();
        let h = c.hash();
        let c = c.with_tolerance(1e-7).unwrap().with_lambdas(vec![2.0, 3.0]).unwrap();
        assert_ne!(c.hash(), h);
        assert_eq!(c.decompose_settings().extraction.lambdas, vec![2.0, 3.0]);
        assert!(c.clone().with_tolerance(0.0).is_err());
        assert!(c.with_lambdas(vec![]).is_err());
    }
}
