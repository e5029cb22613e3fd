use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

use cocycle_core::cocycle::{verify_cocycle, CocycleGrid, DecomposeSettings};
use cocycle_core::symbol::{
    angular_integral, direct_symbol_integral, sphere_area, symbol_phi_provider, AngularPart, AngularPreset,
    AngularRule, ClassicalSymbolModel, CutoffProfile, HomogeneousLayer, SpatialWeight, TorusGrid,
};
use cocycle_core::trace::{integrate_density, kv_density, wodzicki_density};
use cocycle_core::Error;
use num_complex::Complex64;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn unit_model(n: usize, k: f64, cutoff: CutoffProfile) -> ClassicalSymbolModel {
    ClassicalSymbolModel::new(n, c64(k, 0.0), vec![HomogeneousLayer::flat(0, AngularPart::unit())], cutoff).unwrap()
}

fn linear() -> CutoffProfile {
    CutoffProfile::piecewise_linear(1.0, 2.0).unwrap()
}

#[test]
fn cutoff_profiles_ramp_from_zero_to_one() {
    let l = linear();
    assert_eq!(l.value(0.3), 0.0);
    assert_eq!(l.value(1.5), 0.5);
    assert_eq!(l.value(7.0), 1.0);
    let s = CutoffProfile::smoothstep(0.5, 3.0, 5).unwrap();
    assert_eq!(s.value(0.5), 0.0);
    assert!((s.value(1.75) - 0.5).abs() < 1e-15);
    assert_eq!(s.value(3.0), 1.0);
    let mut prev = 0.0;
    for i in 0..=100 {
        let v = s.value(0.5 + 2.5 * i as f64 / 100.0);
        assert!(v >= prev);
        prev = v;
    }
    assert!(CutoffProfile::smoothstep(1.0, 2.0, 4).is_err());
    assert!(CutoffProfile::piecewise_linear(2.0, 1.0).is_err());
}

#[test]
fn sphere_integrals() {
    assert!((sphere_area(1) - 2.0).abs() < 1e-15);
    assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
    assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
    let rule = AngularRule::default();
    let sq = AngularPart::Preset(AngularPreset::FirstCoordinateSquared);
    assert!((angular_integral(&sq, 2, &rule).unwrap() - PI).norm() < 1e-13);
    assert!((angular_integral(&sq, 3, &rule).unwrap() - 4.0 * PI / 3.0).norm() < 1e-12);
    let odd = AngularPart::Preset(AngularPreset::FirstCoordinate);
    assert!(angular_integral(&odd, 3, &rule).unwrap().norm() < 1e-13);
}

#[test]
fn symbol_cocycle_holds_for_layered_models() {
    let model = ClassicalSymbolModel::new(
        2,
        c64(-0.6, 0.2),
        vec![
            HomogeneousLayer::new(0, AngularPart::unit(), SpatialWeight::Cosine { amplitude: 0.3 }),
            HomogeneousLayer::flat(1, AngularPart::Preset(AngularPreset::FirstCoordinateSquared)),
        ],
        CutoffProfile::smoothstep(0.5, 2.5, 3).unwrap(),
    )
    .unwrap();
    let p = symbol_phi_provider(Arc::new(model), TorusGrid::new(2, 2).unwrap().points()).unwrap();
    let r = verify_cocycle(p.as_ref(), &CocycleGrid::standard()).unwrap();
    assert!(r.max <= 1e-10 * r.scale.max(1.0), "{}", r.max);
}

#[test]
fn wodzicki_density_of_unit_symbols() {
    let settings = DecomposeSettings::default();
    let grid = TorusGrid::new(1, 4).unwrap();
    let r = wodzicki_density(&unit_model(1, -1.0, linear()), &grid, &settings).unwrap();
    for v in &r.per_point {
        assert!((v - 1.0 / PI).norm() < 1e-10);
    }
    assert!((r.integrated - 2.0).norm() < 1e-10);

    let grid = TorusGrid::new(2, 2).unwrap();
    let r = wodzicki_density(&unit_model(2, -2.0, linear()), &grid, &settings).unwrap();
    assert!((r.integrated - 2.0 * PI).norm() < 1e-9);
}

#[test]
fn wodzicki_density_follows_angular_and_spatial_parts() {
    let layer = HomogeneousLayer::new(
        0,
        AngularPart::Pair {
            plus: c64(3.0, 0.0),
            minus: c64(1.0, 1.0),
        },
        SpatialWeight::Cosine { amplitude: 0.5 },
    );
    let model = ClassicalSymbolModel::new(1, c64(-1.0, 0.0), vec![layer], linear()).unwrap();
    let grid = TorusGrid::new(1, 8).unwrap();
    let r = wodzicki_density(&model, &grid, &DecomposeSettings::default()).unwrap();
    for (x, v) in r.points.iter().zip(&r.per_point) {
        let want = c64(4.0, 1.0) * (1.0 + 0.5 * x[0].cos()) / (2.0 * PI);
        assert!((v - want).norm() < 1e-10, "x={x:?}");
    }
    assert!((integrate_density(&r.per_point, &grid).unwrap() - c64(4.0, 1.0)).norm() < 1e-10);
}

#[test]
fn kv_density_matches_the_direct_integral() {
    let model = unit_model(1, -2.0, linear());
    let r = kv_density(&model, &TorusGrid::new(1, 2).unwrap(), &DecomposeSettings::default()).unwrap();
    for v in &r.per_point {
        assert!((v - LN_2 / PI).norm() < 1e-10);
    }
    let direct = direct_symbol_integral(&model, &[0.0]).unwrap();
    assert!((direct - LN_2 / PI).norm() < 1e-10);
}

#[test]
fn kv_density_is_cutoff_independent_only_below_minus_n() {
    let settings = DecomposeSettings::default();
    let grid = TorusGrid::new(1, 1).unwrap();
    let a = kv_density(&unit_model(1, -0.5, linear()), &grid, &settings).unwrap();
    let b = kv_density(&unit_model(1, -0.5, CutoffProfile::smoothstep(0.5, 3.0, 5).unwrap()), &grid, &settings).unwrap();
    assert!((a.per_point[0] - b.per_point[0]).norm() > 1e-3);
}

#[test]
fn branch_errors() {
    let settings = DecomposeSettings::default();
    let grid = TorusGrid::new(1, 2).unwrap();
    let e = kv_density(&unit_model(1, -1.0, linear()), &grid, &settings).unwrap_err();
    assert!(matches!(e, Error::PoleLocus { .. }));
    assert!(e.to_string().starts_with("pole locus"));
    assert!(matches!(
        wodzicki_density(&unit_model(1, -0.5, linear()), &grid, &settings),
        Err(Error::NotPoleLocus { .. })
    ));
    assert!(matches!(
        direct_symbol_integral(&unit_model(1, -1.0, linear()), &[0.0]),
        Err(Error::NotTraceClass { .. })
    ));
}
