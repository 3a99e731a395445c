//! Independent ground truth: exact reproducing kernels for radial models
//! (n = 1) via monomial norms, in closed form for the two calibration models
//! and by high-precision quadrature otherwise.

use crate::error::{Error, Result};
use crate::potential::{PotentialModel, RadialProfile};
use crate::quad::quad_exp_sinh;
use rug::ops::Pow;
use rug::{Complete, Complex, Float, Integer, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    ClosedForm,
    Quadrature,
}

/// Monomial norms `h_j = ||x^j||²_{kφ}` defining the kernel
/// `K_k(x, y) = Σ_j x^j conj(y)^j / h_j`.
#[derive(Debug, Clone)]
pub struct KernelOracle {
    pub model: String,
    pub k: u32,
    pub kind: OracleKind,
    pub prec: u32,
    pub norms: Vec<Float>,
}

#[derive(Debug, Clone)]
pub struct KernelValue {
    pub raw: Complex,
    /// `|K_k(x,y)|·e^{-kφ(x)/2 - kφ(y)/2}`
    pub weighted: Float,
}

/// Radial density of the volume form `ω` as a function of `u = |x|²`:
/// `λ(u) = φ'(u) + u·φ''(u)` (this is `φ_{x x̄}`).
fn radial_density(model: &PotentialModel, u: &Float, prec: u32) -> Float {
    match &model.profile {
        RadialProfile::Log => {
            let d = Float::with_val(prec, 1) + u;
            Float::with_val(prec, 1) / (d.clone() * d)
        }
        RadialProfile::Polynomial(cs) => {
            let mut acc = Float::new(prec);
            for (idx, c) in cs.iter().enumerate().rev() {
                let j = (idx + 1) as u32;
                // d/du (u·c·u^j)' summed: contribution j²·c·u^{j-1}
                let coeff = Rational::from((Integer::from(j) * Integer::from(j), 1)) * c;
                acc = acc * u.clone() + Float::with_val(prec, coeff);
            }
            acc
        }
    }
}

/// `h_j` by closed form where available, otherwise by quadrature:
/// `h_j = π ∫₀^∞ u^j e^{-kφ(u)} λ(u) du`.
pub fn monomial_norm(model: &PotentialModel, k: u32, j: u32, prec: u32, tol: f64) -> Result<Float> {
    let pi = Float::with_val(prec, rug::float::Constant::Pi);
    match model.name.as_str() {
        "bargmann_fock" => {
            // π·j!/k^{j+1}
            let num = Integer::factorial(j).complete();
            let den = Integer::from(k).pow(j + 1);
            Ok(pi * Float::with_val(prec, Rational::from((num, den))))
        }
        "fubini_study" => {
            if j > k {
                return Err(Error::InvalidInput(format!(
                    "fubini_study has sections x^j only for j <= k (j = {j}, k = {k})"
                )));
            }
            // π·j!(k−j)!/(k+1)!
            let num = Integer::factorial(j).complete() * Integer::factorial(k - j).complete();
            let den = Integer::factorial(k + 1).complete();
            Ok(pi * Float::with_val(prec, Rational::from((num, den))))
        }
        _ => monomial_norm_quadrature(model, k, j, prec, tol),
    }
}

/// The quadrature route, also used to cross-check the closed forms.
pub fn monomial_norm_quadrature(
    model: &PotentialModel,
    k: u32,
    j: u32,
    prec: u32,
    tol: f64,
) -> Result<Float> {
    if model.n != 1 {
        return Err(Error::Unsupported("oracle requires n = 1".into()));
    }
    if let RadialProfile::Log = model.profile {
        if j > k {
            return Err(Error::InvalidInput(format!(
                "norm divergent for j = {j}, k = {k}"
            )));
        }
    }
    let pi = Float::with_val(prec, rug::float::Constant::Pi);
    let v = quad_exp_sinh(
        |u| {
            let mut p = Float::with_val(prec, 1);
            for _ in 0..j {
                p *= u;
            }
            let phi = model.phi_eval(&[Complex::with_val(prec, (u.clone().sqrt(), 0))], prec);
            let w = radial_density(model, u, prec);
            p * (Float::with_val(prec, -(k as i64)) * phi).exp() * w
        },
        prec,
        tol * 1e-2,
    )?;
    if !v.is_finite() || v <= 0 {
        return Err(Error::QuadratureFailure(format!(
            "nonpositive norm at j = {j}"
        )));
    }
    Ok(pi * v)
}

/// Build the oracle up to monomial degree `j_max` (for Fubini-Study, `j_max`
/// is clamped to `k`, the top power with a holomorphic section).
pub fn monomial_norms(
    model: &PotentialModel,
    k: u32,
    j_max: u32,
    prec: u32,
    tol: f64,
) -> Result<KernelOracle> {
    let j_max = if model.name == "fubini_study" {
        j_max.min(k)
    } else {
        j_max
    };
    let kind = if model.closed_form_kernel() {
        OracleKind::ClosedForm
    } else {
        OracleKind::Quadrature
    };
    let mut norms = Vec::with_capacity(j_max as usize + 1);
    for j in 0..=j_max {
        norms.push(monomial_norm(model, k, j, prec, tol)?);
    }
    Ok(KernelOracle {
        model: model.name.clone(),
        k,
        kind,
        prec,
        norms,
    })
}

impl KernelOracle {
    /// `K_k(x, y) = Σ_j x^j conj(y)^j / h_j`, with the weighted magnitude.
    ///
    /// For non-compact models the series is truncated at the stored `j_max`;
    /// the last term's relative contribution must be below `tail_tol`.
    pub fn kernel_eval(
        &self,
        model: &PotentialModel,
        x: &Complex,
        y: &Complex,
        tail_tol: f64,
    ) -> Result<KernelValue> {
        let prec = self.prec;
        let s = Complex::with_val(prec, x * &Complex::with_val(prec, y.conj_ref()));
        let mut acc = Complex::new(prec);
        let mut power = Complex::with_val(prec, (1, 0));
        let mut last_mag = Float::new(prec);
        for h in &self.norms {
            let term = power.clone() / h;
            last_mag = term.clone().abs().into_real_imag().0;
            acc += term;
            power *= s.clone();
        }
        // infinite families: require the dropped tail to be negligible
        if self.model != "fubini_study" {
            let acc_mag = acc.clone().abs().into_real_imag().0;
            if last_mag > acc_mag * Float::with_val(prec, tail_tol) {
                return Err(Error::OutsideEvaluableRegion(format!(
                    "kernel tail not closed at |xy| = {}",
                    s.abs().into_real_imag().0
                )));
            }
        }
        let phi_x = model.phi_eval(std::slice::from_ref(x), prec);
        let phi_y = model.phi_eval(std::slice::from_ref(y), prec);
        let kf = Float::with_val(prec, self.k);
        let log_weight = -(kf.clone() * phi_x + kf * phi_y) / 2u32;
        let weighted = acc.clone().abs().into_real_imag().0 * log_weight.exp();
        Ok(KernelValue { raw: acc, weighted })
    }

    pub fn norms_csv(&self) -> String {
        let mut out = String::from("j,h_j\n");
        for (j, h) in self.norms.iter().enumerate() {
            out.push_str(&format!("{},{}\n", j, h.to_f64()));
        }
        out
    }
}

/// `∫ K_k(x,x) e^{-kφ} ω` over the chart; equals `dim H⁰ = k + 1` for
/// Fubini-Study.
pub fn bergman_function_integral(
    oracle: &KernelOracle,
    model: &PotentialModel,
    tol: f64,
) -> Result<Float> {
    let prec = oracle.prec;
    let pi = Float::with_val(prec, rug::float::Constant::Pi);
    let k = oracle.k;
    let v = quad_exp_sinh(
        |u| {
            // Σ_j u^j / h_j
            let mut sum = Float::new(prec);
            let mut p = Float::with_val(prec, 1);
            for h in &oracle.norms {
                sum += p.clone() / h;
                p *= u;
            }
            let phi = model.phi_eval(&[Complex::with_val(prec, (u.clone().sqrt(), 0))], prec);
            let w = radial_density(model, u, prec);
            sum * (Float::with_val(prec, -(k as i64)) * phi).exp() * w
        },
        prec,
        tol * 1e-2,
    )?;
    Ok(pi * v)
}
