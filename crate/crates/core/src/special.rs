//! Special functions and quadrature: Bessel `J₁`, Catalan numbers and an
//! adaptive Gauss–Kronrod integrator.

use std::f64::consts::PI;

use num_bigint::BigUint;

/// Switch from the power series to the Hankel expansion above this `|x|`.
const SERIES_LIMIT: f64 = 12.0;

/// `J₁(2y)/y = Σ_m (−1)^m y^{2m} / (m!(m+1)!)`, finite at `y = 0` (value 1).
///
/// The series coefficients equal `C_m / (2m)!` with `C_m` the Catalan numbers.
pub fn bessel_j1_ratio(y: f64) -> f64 {
    let y = y.abs();
    if 2.0 * y > SERIES_LIMIT {
        return bessel_j1(2.0 * y) / y;
    }
    let y2 = y * y;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut m = 0.0;
    loop {
        term *= -y2 / ((m + 1.0) * (m + 2.0));
        sum += term;
        m += 1.0;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) && m > y {
            break;
        }
        if m > 200.0 {
            break;
        }
    }
    sum
}

/// First-order Bessel function of the first kind.
///
/// Power series for `|x| ≤ 12`, Hankel asymptotic expansion beyond; odd in `x`.
pub fn bessel_j1(x: f64) -> f64 {
    if x < 0.0 {
        return -bessel_j1(-x);
    }
    if x <= SERIES_LIMIT {
        0.5 * x * bessel_j1_ratio(0.5 * x)
    } else {
        bessel_j1_asymptotic(x)
    }
}

fn bessel_j1_asymptotic(x: f64) -> f64 {
    // t_k = Π_{l≤k} (μ − (2l−1)²) / (k! (8x)^k), μ = 4ν² = 4
    let mu = 4.0;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term: f64 = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= (mu - odd * odd) / (kf * 8.0 * x);
        if term.abs() >= prev || term == 0.0 {
            break;
        }
        prev = term.abs();
        // k odd -> Q with sign (−1)^{(k−1)/2}; k even -> P with sign (−1)^{k/2}
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 1 {
            q += sign * term;
        } else {
            p += sign * term;
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - 0.75 * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Catalan number `C_n = (2n choose n)/(n + 1)`, exact.
pub fn catalan(n: u32) -> BigUint {
    let mut c = BigUint::from(1u32);
    for i in 0..n {
        // C_{i+1} = C_i · 2(2i+1) / (i+2), exact at every step
        c = c * BigUint::from(2 * (2 * i as u64 + 1)) / BigUint::from(i as u64 + 2);
    }
    c
}

/// Catalan number as a float (exact up to `n = 30`).
pub fn catalan_f64(n: u32) -> f64 {
    let mut c = 1.0_f64;
    for i in 0..n {
        c = c * (2.0 * (2.0 * i as f64 + 1.0)) / (i as f64 + 2.0);
    }
    c
}

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
#[allow(clippy::excessive_precision)]
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
#[allow(clippy::excessive_precision)]
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
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One G7–K15 panel: `(kronrod_estimate, |kronrod − gauss|)`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]` to absolute
/// tolerance `tol`, by recursive bisection.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (value, err) = gk15(f, a, b);
        if err <= tol || depth >= 40 {
            return value;
        }
        let mid = 0.5 * (a + b);
        recurse(f, a, mid, 0.5 * tol, depth + 1) + recurse(f, mid, b, 0.5 * tol, depth + 1)
    }
    if a == b {
        return 0.0;
    }
    recurse(&f, a, b, tol, 0)
}
