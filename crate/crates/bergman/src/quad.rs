//! Double-exponential quadrature in arbitrary precision.
//!
//! `quad_tanh_sinh` integrates over a finite interval, `quad_exp_sinh` over
//! `(0, ∞)`. Both use level doubling of the trapezoidal step in the
//! transformed variable and stop when successive levels agree to the
//! requested relative tolerance.

use crate::error::{Error, Result};
use rug::ops::Pow;
use rug::Float;

const MAX_LEVEL: u32 = 14;

fn pi_half(prec: u32) -> Float {
    Float::with_val(prec, rug::float::Constant::Pi) / 2u32
}

/// Integrate `f` over `[a, b]` to relative tolerance `tol`.
pub fn quad_tanh_sinh<F>(f: F, a: &Float, b: &Float, prec: u32, tol: f64) -> Result<Float>
where
    F: Fn(&Float) -> Float,
{
    let half_width = Float::with_val(prec, b - a) / 2u32;
    let center = Float::with_val(prec, a + b) / 2u32;
    let ph = pi_half(prec);
    let tiny = Float::with_val(prec, 2).pow(-(prec as i64) - 16);
    let eval_node = |t: &Float| -> (Float, Float) {
        // x = c + w·tanh((π/2) sinh t), weight = (π/2) cosh t / cosh²((π/2) sinh t)
        let s = Float::with_val(prec, t.sinh_ref());
        let u = Float::with_val(prec, &ph * &s);
        let sech2 = {
            let c = Float::with_val(prec, u.cosh_ref());
            Float::with_val(prec, 1) / (c.clone() * c)
        };
        let x = center.clone() + half_width.clone() * Float::with_val(prec, u.tanh_ref());
        let w = Float::with_val(prec, &ph * Float::with_val(prec, t.cosh_ref())) * sech2;
        (x, w)
    };
    level_doubling(eval_node, &half_width, f, prec, tol, &tiny)
}

/// Integrate `f` over `(0, ∞)` to relative tolerance `tol`.
pub fn quad_exp_sinh<F>(f: F, prec: u32, tol: f64) -> Result<Float>
where
    F: Fn(&Float) -> Float,
{
    let ph = pi_half(prec);
    let tiny = Float::with_val(prec, 2).pow(-(prec as i64) - 16);
    let one = Float::with_val(prec, 1);
    let eval_node = |t: &Float| -> (Float, Float) {
        // x = exp((π/2) sinh t), weight = x·(π/2) cosh t
        let s = Float::with_val(prec, t.sinh_ref());
        let x = Float::with_val(prec, &ph * &s).exp();
        let w = x.clone() * Float::with_val(prec, &ph * Float::with_val(prec, t.cosh_ref()));
        (x, w)
    };
    level_doubling(eval_node, &one, f, prec, tol, &tiny)
}

fn level_doubling<N, F>(
    eval_node: N,
    scale: &Float,
    f: F,
    prec: u32,
    tol: f64,
    tiny: &Float,
) -> Result<Float>
where
    N: Fn(&Float) -> (Float, Float),
    F: Fn(&Float) -> Float,
{
    let mut prev: Option<Float> = None;
    for level in 2..=MAX_LEVEL {
        let h = Float::with_val(prec, 2).pow(-(level as i64) + 1);
        let mut sum = {
            let (x, w) = eval_node(&Float::new(prec));
            f(&x) * w
        };
        for side in [1i32, -1i32] {
            let mut dead = 0;
            let mut j = 1u64;
            loop {
                let t = Float::with_val(prec, side) * Float::with_val(prec, j) * h.clone();
                let (x, w) = eval_node(&t);
                let term = f(&x) * w;
                let negligible = term.clone().abs()
                    < Float::with_val(prec, sum.clone().abs() + 1u32) * tiny.clone();
                sum += term;
                if negligible {
                    dead += 1;
                    if dead >= 3 {
                        break;
                    }
                } else {
                    dead = 0;
                }
                j += 1;
                if j > 1u64 << 24 {
                    return Err(Error::QuadratureFailure(
                        "node budget exhausted".into(),
                    ));
                }
            }
        }
        let estimate = sum * h * scale.clone();
        if let Some(p) = &prev {
            let diff = Float::with_val(prec, &estimate - p).abs();
            let denom = Float::with_val(prec, estimate.clone().abs() + 1e-300);
            if diff / denom < tol {
                return Ok(estimate);
            }
        }
        prev = Some(estimate);
    }
    Err(Error::QuadratureFailure(format!(
        "no convergence to rel tol {tol} within {MAX_LEVEL} levels"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_moments() {
        // ∫₀^∞ u^j e^{-u} du = j!
        let prec = 192;
        for j in [0u32, 1, 5, 10] {
            let v = quad_exp_sinh(
                |u| {
                    let mut p = Float::with_val(prec, 1);
                    for _ in 0..j {
                        p *= u;
                    }
                    p * Float::with_val(prec, -u).exp()
                },
                prec,
                1e-20,
            )
            .unwrap();
            let expect = Float::with_val(prec, rug::Integer::factorial(j).complete());
            let rel = (Float::with_val(prec, &v - &expect) / expect).abs();
            assert!(rel < 1e-18, "j = {j}: rel err {rel}");
        }
    }

    #[test]
    fn finite_interval_log2() {
        // ∫₀¹ 1/(1+x) dx = log 2
        let prec = 192;
        let a = Float::new(prec);
        let b = Float::with_val(prec, 1);
        let v = quad_tanh_sinh(
            |x| Float::with_val(prec, 1) / (Float::with_val(prec, 1) + x),
            &a,
            &b,
            prec,
            1e-20,
        )
        .unwrap();
        let expect = Float::with_val(prec, 2).ln();
        assert!((v - expect).abs() < 1e-18);
    }

    use rug::Complete as _;

    #[test]
    fn beta_integral() {
        // ∫₀^∞ u^2 (1+u)^{-8} du = B(3, 5) = 2!·4!/7!
        let prec = 192;
        let v = quad_exp_sinh(
            |u| {
                let num = u.clone() * u;
                let den = (Float::with_val(prec, 1) + u).pow(8);
                num / den
            },
            prec,
            1e-20,
        )
        .unwrap();
        let expect = Float::with_val(prec, rug::Rational::from((2 * 24, 5040)));
        let rel = (Float::with_val(prec, &v - &expect) / expect).abs();
        assert!(rel < 1e-18, "rel err {rel}");
    }
}
