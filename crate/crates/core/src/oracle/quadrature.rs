//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 40;
const MAX_INTERVALS: u32 = 20_000;

type Integrand<'a> = dyn FnMut(f64) -> f64 + 'a;

fn kronrod(f: &mut Integrand, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let pair = f(c - dx) + f(c + dx);
        k += WGK[i] * pair;
        if i % 2 == 1 {
            g += WG[i / 2] * pair;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Adapt<'f, 'a> {
    f: &'f mut Integrand<'a>,
    tol: f64,
    intervals: u32,
}

impl Adapt<'_, '_> {
    fn run(&mut self, a: f64, b: f64, whole: (f64, f64), tol: f64, depth: u32) -> Result<(f64, f64)> {
        let (val, err) = whole;
        if !val.is_finite() || !err.is_finite() {
            return Err(Error::QuadratureNonConvergence { tol: self.tol, err });
        }
        if err <= tol || err <= 1e-15 * val.abs() {
            return Ok((val, err));
        }
        self.intervals += 2;
        if depth >= MAX_DEPTH || self.intervals > MAX_INTERVALS {
            return Err(Error::QuadratureNonConvergence { tol: self.tol, err });
        }
        let m = 0.5 * (a + b);
        let left = kronrod(self.f, a, m);
        let right = kronrod(self.f, m, b);
        let (lv, le) = self.run(a, m, left, 0.5 * tol, depth + 1)?;
        let (rv, re) = self.run(m, b, right, 0.5 * tol, depth + 1)?;
        Ok((lv + rv, le + re))
    }
}

/// ∫ₐᵇ f with absolute error target `tol`; returns (value, error estimate).
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    let whole = kronrod(&mut f, a, b);
    Adapt { f: &mut f, tol, intervals: 1 }.run(a, b, whole, tol, 0)
}

/// ∫ₐᵇ ∫ₐᵇ f(u, v) dv du by nesting the one-dimensional rule.
pub fn integrate_square(f: impl Fn(f64, f64) -> f64, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    let mut inner_err: f64 = 0.0;
    let mut failure = None;
    let outer = integrate(
        |u| match integrate(|v| f(u, v), a, b, tol / (b - a)) {
            Ok((v, e)) => {
                inner_err = inner_err.max(e);
                v
            }
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        a,
        b,
        tol,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let (val, outer_err) = outer?;
    Ok((val, outer_err + (b - a) * inner_err))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_exact() {
        let (v, _) = integrate(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, 1e-14).unwrap();
        assert!((v - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
    }

    #[test]
    fn smooth_and_peaked() {
        let (v, _) = integrate(|x| (-x).exp(), 0.0, 10.0, 1e-13).unwrap();
        assert!((v - (1.0 - (-10.0f64).exp())).abs() < 1e-12);
        let (v, _) = integrate(|x| 1.0 / (1e-4 + (x - 0.3).powi(2)), 0.0, 1.0, 1e-9).unwrap();
        let want = 100.0 * ((0.7f64 / 0.01).atan() + (0.3f64 / 0.01).atan());
        assert!((v - want).abs() < 1e-7 * want, "{v} vs {want}");
    }

    #[test]
    fn square() {
        let (v, _) = integrate_square(|u, v| u * v.exp(), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 0.5 * (std::f64::consts::E - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn nonconvergence_reported() {
        let r = integrate(|x| if x < 0.5 { 0.0 } else { f64::NAN }, 0.0, 1.0, 1e-10);
        assert!(matches!(r, Err(Error::QuadratureNonConvergence { .. })));
        let step = integrate(|x| if x < 1.0 / 3.0 { 0.0 } else { 1.0 }, 0.0, 1.0, 1e-300);
        assert!(matches!(step, Err(Error::QuadratureNonConvergence { .. })));
    }
}
