use std::f64::consts::PI;

use cocycle_core::cocycle::DecomposeSettings;
use cocycle_core::symbol::{AngularPart, CutoffProfile, HomogeneousLayer};
use cocycle_core::zeta::{
    holomorphy_gap, pole_simplicity, psi_of_z, residue_at, zeta_scan, Contour, SymbolFamily, SyntheticFamily,
    ZDomain, ZWindow,
};
use cocycle_core::VectorValue;
use num_complex::Complex64;

fn synthetic() -> SyntheticFamily {
    let domain = ZDomain::new(-1.5, 2.5, -1.0, 1.0).unwrap();
    let h = |z: Complex64, t: f64| VectorValue::scalar((-t).exp() / (z + 3.0));
    let d = |z: Complex64, k: usize, t: f64| VectorValue::scalar((-t).exp() * (-1.0f64).powi(k as i32) / (z + 3.0));
    SyntheticFamily::new(1, domain, h, |z| VectorValue::scalar(z + 1.0))
        .unwrap()
        .with_t_derivative(d)
}

fn unit_family() -> SymbolFamily {
    SymbolFamily::new(
        1,
        vec![HomogeneousLayer::flat(0, AngularPart::unit())],
        CutoffProfile::piecewise_linear(1.0, 2.0).unwrap(),
        vec![vec![0.0]],
        ZDomain::new(-1.5, 1.5, -1.0, 1.0).unwrap(),
    )
    .unwrap()
}

#[test]
fn synthetic_family_recovers_psi_and_planted_poles() {
    let f = synthetic();
    assert_eq!(f.planted().len(), 3);
    let settings = DecomposeSettings::default();
    for z in [Complex64::new(0.5, 0.3), Complex64::new(-0.7, -0.2), Complex64::new(1.6, 0.0)] {
        let got = psi_of_z(&f, z, 0.8, &settings).unwrap();
        assert!(got.distance(&f.exact_psi(z, 0.8)) < 1e-8, "z={z}");
    }
    for m in 0..=2u32 {
        let r = residue_at(&f, m, &Contour::default(), 0.5, &settings).unwrap();
        let want = -(m as f64 + 1.0) * 0.5f64.powi(m as i32);
        assert!((r.residue_estimate.entries()[0] - want).norm() < 1e-8, "m={m}");
        assert!(r.gap < 1e-8 && r.second_moment < 1e-8);
    }
}

#[test]
fn symbol_family_pole_at_zero() {
    let f = unit_family();
    let settings = DecomposeSettings::default();
    let r = residue_at(&f, 0, &Contour::default(), 1.0, &settings).unwrap();
    assert!((r.residue_estimate.entries()[0] + 1.0 / PI).norm() < 1e-6);
    let s = pole_simplicity(&f, 0, &Contour::default(), 1.0, &settings).unwrap();
    assert!(s.drift < 1e-6);
    let gap = holomorphy_gap(&f, Complex64::new(-0.5, 0.2), &Contour::default(), 1.0, &settings).unwrap();
    assert!(gap < 1e-6);
}

#[test]
fn scan_marks_integers_as_poles() {
    let window = ZWindow {
        re_min: -1.0,
        re_max: 1.0,
        re_nodes: 5,
        im_min: 0.0,
        im_max: 0.0,
        im_nodes: 1,
    };
    let points = zeta_scan(&unit_family(), &window, 1.0, &DecomposeSettings::default());
    assert_eq!(points.len(), 5);
    for p in &points {
        let at_integer = p.z.re >= 0.0 && p.z.re.fract() == 0.0;
        assert_eq!(p.status == "pole", at_integer, "z={}: {}", p.z, p.status);
        assert_eq!(p.psi.is_some(), !at_integer);
    }
}
