//! Adaptive Gauss-Kronrod (7/15) quadrature for complex-valued integrands,
//! plus Gauss-Legendre rules used by the sphere quadrature.

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * WGK[i];
        if i % 2 == 1 {
            gauss += pair * WG[i / 2];
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).norm();
    Panel { a, b, value, error }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `abs_tol` by bisecting
/// the panel with the largest error estimate. Panels are processed in a fixed
/// order, so the result is reproducible bit for bit.
pub fn integrate<F>(f: F, a: f64, b: f64, abs_tol: f64, max_panels: usize) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Complex64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput(format!("integration bounds [{a}, {b}] not finite")));
    }
    if a == b {
        return Ok(QuadratureResult {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            evaluations: 0,
        });
    }
    let mut panels = vec![gk15(&f, a, b)];
    let mut evaluations = 15;
    loop {
        let total_error: f64 = panels.iter().map(|p| p.error).sum();
        let value: Complex64 = crate::value::compensated_sum(panels.iter().map(|p| p.value));
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::Quadrature {
                achieved: f64::NAN,
                tol: abs_tol,
            });
        }
        let roundoff_floor = 50.0 * f64::EPSILON * value.norm().max(f64::MIN_POSITIVE);
        if total_error <= abs_tol || total_error <= roundoff_floor {
            return Ok(QuadratureResult {
                value,
                error: total_error,
                evaluations,
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, be), (i, p)| if p.error > be { (i, p.error) } else { (bi, be) });
        let p = panels[worst];
        let mid = 0.5 * (p.a + p.b);
        if panels.len() >= max_panels || mid <= p.a || mid >= p.b {
            return Err(Error::Quadrature {
                achieved: total_error,
                tol: abs_tol,
            });
        }
        panels[worst] = gk15(&f, p.a, mid);
        panels.insert(worst + 1, gk15(&f, mid, p.b));
        evaluations += 30;
    }
}

/// Integrates over consecutive pieces separated by `breakpoints`
/// (ascending, endpoints included), splitting the tolerance evenly.
pub fn integrate_pieces<F>(f: F, breakpoints: &[f64], abs_tol: f64, max_panels: usize) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Complex64,
{
    let pieces = breakpoints.len().saturating_sub(1).max(1);
    let tol = abs_tol / pieces as f64;
    let mut total = Vec::with_capacity(pieces);
    let mut error = 0.0;
    let mut evaluations = 0;
    for w in breakpoints.windows(2) {
        let r = integrate(&f, w[0], w[1], tol, max_panels)?;
        total.push(r.value);
        error += r.error;
        evaluations += r.evaluations;
    }
    Ok(QuadratureResult {
        value: crate::value::compensated_sum(total),
        error,
        evaluations,
    })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        // Tricomi initial guess, refined by Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(order, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(order: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if order == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=order {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = order as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
