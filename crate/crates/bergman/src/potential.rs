//! Catalog of Kähler potentials: jets, polarization, Bochner normalization
//! checks and the diastasis function.

use crate::error::{Error, Result};
use crate::jet::{Jet, MultiIndex};
use crate::scalar::{ComplexScalar, Scalar, ScalarMode};
use rug::{Complex, Float, Rational};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Radial profile of the potential as a function of `u = |x|^2`.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialProfile {
    /// `phi = sum_j c_j u^j` with the listed coefficients for `j = 1, 2, ...`.
    Polynomial(Vec<Rational>),
    /// `phi = log(1 + u)`, the Fubini-Study chart potential.
    Log,
}

impl RadialProfile {
    /// Taylor coefficient of `u^j` (j >= 1).
    pub fn coeff(&self, j: u32) -> Rational {
        match self {
            RadialProfile::Polynomial(cs) => cs
                .get(j as usize - 1)
                .cloned()
                .unwrap_or_else(Rational::new),
            RadialProfile::Log => {
                let sign = if j % 2 == 1 { 1 } else { -1 };
                Rational::from((sign, j))
            }
        }
    }
}

/// A Kähler potential from the built-in catalog, radial about the origin of
/// its Bochner chart.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialModel {
    pub name: String,
    pub n: usize,
    pub gevrey_a: f64,
    pub profile: RadialProfile,
}

impl PotentialModel {
    /// `phi = |x|^2`; flat model with kernel `(k/pi)^n e^{k x. conj(y)}`.
    pub fn bargmann_fock(n: usize) -> Self {
        PotentialModel {
            name: "bargmann_fock".into(),
            n,
            gevrey_a: 1.0,
            profile: RadialProfile::Polynomial(vec![Rational::from(1)]),
        }
    }

    /// Chart potential `phi = log(1 + |x|^2)` of projective space.
    pub fn fubini_study(n: usize) -> Self {
        PotentialModel {
            name: "fubini_study".into(),
            n,
            gevrey_a: 1.0,
            profile: RadialProfile::Log,
        }
    }

    /// `phi = |x|^2 + c |x|^4`, n = 1.
    pub fn radial_quartic(c: Rational) -> Self {
        PotentialModel {
            name: "radial_quartic".into(),
            n: 1,
            gevrey_a: 1.0,
            profile: RadialProfile::Polynomial(vec![Rational::from(1), c]),
        }
    }

    /// `phi = sum_j c_j |x|^{2j}` with user coefficients (c_1 should be 1
    /// for a Bochner-normalized model), n = 1.
    pub fn radial_series(coeffs: Vec<Rational>) -> Self {
        PotentialModel {
            name: "radial_series".into(),
            n: 1,
            gevrey_a: 1.0,
            profile: RadialProfile::Polynomial(coeffs),
        }
    }

    pub fn from_config(cfg: &ModelConfig) -> Result<Self> {
        for [re, im] in &cfg.base_point {
            let re = Scalar::from_serialized(re, ScalarMode::ExactRational)?;
            let im = Scalar::from_serialized(im, ScalarMode::ExactRational)?;
            if !re.is_zero() || !im.is_zero() {
                return Err(Error::Unsupported(
                    "catalog models are defined at the origin of their Bochner chart; \
                     re-center the model instead of moving the base point"
                        .into(),
                ));
            }
        }
        let rational_param = |key: &str| -> Result<Rational> {
            let s = cfg
                .params
                .get(key)
                .ok_or_else(|| Error::InvalidInput(format!("missing param `{key}`")))?;
            s.parse::<Rational>()
                .map_err(|e| Error::Parse(format!("bad rational `{s}`: {e}")))
        };
        match cfg.name.as_str() {
            "bargmann_fock" => Ok(Self::bargmann_fock(cfg.n)),
            "fubini_study" => Ok(Self::fubini_study(cfg.n)),
            "radial_quartic" => Ok(Self::radial_quartic(rational_param("c")?)),
            "radial_series" => {
                let mut coeffs = Vec::new();
                for j in 1.. {
                    match cfg.params.get(&format!("c{j}")) {
                        Some(s) => coeffs.push(
                            s.parse::<Rational>()
                                .map_err(|e| Error::Parse(format!("bad rational `{s}`: {e}")))?,
                        ),
                        None => break,
                    }
                }
                if coeffs.is_empty() {
                    return Err(Error::InvalidInput(
                        "radial_series needs params c1, c2, ...".into(),
                    ));
                }
                Ok(Self::radial_series(coeffs))
            }
            other => Err(Error::InvalidInput(format!("unknown model `{other}`"))),
        }
    }

    /// Jet of `phi` in `(x, conj(x))` (2n variables) at the origin.
    pub fn phi_jet(&self, trunc: u32, mode: ScalarMode) -> Jet {
        let n = self.n;
        let mut jet = Jet::zero(2 * n, trunc, mode);
        // u = sum_i x_i conj(x_i); accumulate powers of u
        let mut u = Jet::zero(2 * n, trunc, mode);
        for i in 0..n {
            let mut e = MultiIndex::zero(2 * n);
            e.0[i] = 1;
            e.0[n + i] = 1;
            u.set_coeff(e, ComplexScalar::one(mode));
        }
        let mut upow = u.clone();
        for j in 1..=trunc / 2 {
            let c = self.profile.coeff(j);
            if c != 0 {
                let c = match mode {
                    ScalarMode::ExactRational => Scalar::Rational(c),
                    ScalarMode::BigFloat(p) => Scalar::BigFloat(Float::with_val(p, c)),
                };
                jet = jet.add(&upow.scale(&ComplexScalar::from_real(c))).unwrap();
            }
            if j < trunc / 2 {
                upow = upow.mul(&u).unwrap();
            }
        }
        jet
    }

    /// Jet of the polarization `psi(x, z)` at the origin.
    pub fn psi_jet(&self, trunc: u32, mode: ScalarMode) -> Result<Jet> {
        polarize(&self.phi_jet(trunc, mode))
    }

    /// `phi` at a point, via the radial closed form.
    pub fn phi_eval(&self, x: &[Complex], prec: u32) -> Float {
        let mut u = Float::new(prec);
        for xi in x {
            u += xi.clone().norm().into_real_imag().0;
        }
        match &self.profile {
            RadialProfile::Log => (Float::with_val(prec, 1) + u).ln(),
            RadialProfile::Polynomial(cs) => {
                let mut acc = Float::new(prec);
                for c in cs.iter().rev() {
                    acc = (acc + Float::with_val(prec, c)) * u.clone();
                }
                acc
            }
        }
    }

    /// Polarized potential `psi(x, w)` at a point pair, where the caller
    /// passes `w = conj(y)`; `psi(x, conj(x)) = phi(x)`.
    pub fn psi_eval(&self, x: &[Complex], w: &[Complex], prec: u32) -> Complex {
        let mut s = Complex::new(prec);
        for (xi, wi) in x.iter().zip(w) {
            s += xi * wi.clone();
        }
        match &self.profile {
            RadialProfile::Log => (Complex::with_val(prec, (1, 0)) + s).ln(),
            RadialProfile::Polynomial(cs) => {
                let mut acc = Complex::new(prec);
                for c in cs.iter().rev() {
                    acc = (acc + Float::with_val(prec, c)) * s.clone();
                }
                acc
            }
        }
    }

    /// Whether the exact reproducing kernel is available in closed form.
    pub fn closed_form_kernel(&self) -> bool {
        matches!(self.name.as_str(), "bargmann_fock" | "fubini_study")
    }
}

/// Model description accepted on the command line and over the wire.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfig {
    pub name: String,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
    #[serde(default)]
    pub base_point: Vec<[String; 2]>,
    #[serde(default = "default_mode")]
    pub scalar_mode: String,
}

fn default_n() -> usize {
    1
}

fn default_mode() -> String {
    "rational".into()
}

/// Verify the real-structure symmetry `coeff(alpha, beta) =
/// conj(coeff(beta, alpha))` of a jet in `(x, conj(x))` (or `(x, z)`).
pub fn check_hermitian_symmetry(jet: &Jet) -> Result<()> {
    let n = jet.d() / 2;
    for (k, v) in jet.terms() {
        let mut swapped = k.0[n..].to_vec();
        swapped.extend_from_slice(&k.0[..n]);
        let mirror = jet.coeff(&MultiIndex(swapped));
        if mirror.conj() != *v {
            return Err(Error::SymmetryViolated {
                alpha: k.0[..n].to_vec(),
                beta: k.0[n..].to_vec(),
            });
        }
    }
    Ok(())
}

/// Polarize an analytic potential jet: substitute `conj(x) -> z`.
///
/// For jets this is a reinterpretation of the second variable block; the
/// coefficients are unchanged. The real-structure symmetry of the input is
/// verified first.
pub fn polarize(phi: &Jet) -> Result<Jet> {
    check_hermitian_symmetry(phi)?;
    Ok(phi.clone())
}

/// Calabi's diastasis with its four components.
#[derive(Debug, Clone)]
pub struct DiastasisValue {
    pub value: Float,
    pub phi_x: Float,
    pub phi_y: Float,
    pub psi_xy: Complex,
    pub psi_yx: Complex,
}

/// `D(x, y) = phi(x) + phi(y) - psi(x, conj(y)) - psi(y, conj(x))`.
pub fn diastasis(model: &PotentialModel, x: &[Complex], y: &[Complex], prec: u32) -> DiastasisValue {
    let conj = |v: &[Complex]| -> Vec<Complex> { v.iter().map(|c| c.clone().conj()).collect() };
    let phi_x = model.phi_eval(x, prec);
    let phi_y = model.phi_eval(y, prec);
    let psi_xy = model.psi_eval(x, &conj(y), prec);
    let psi_yx = model.psi_eval(y, &conj(x), prec);
    let value = phi_x.clone() + phi_y.clone()
        - psi_xy.real().clone()
        - psi_yx.real().clone();
    DiastasisValue {
        value,
        phi_x,
        phi_y,
        psi_xy,
        psi_yx,
    }
}

/// Bochner-normalization report: constant, linear and cubic parts must
/// vanish and the quadratic part must be `|x|^2`.
#[derive(Debug, Clone)]
pub struct BochnerReport {
    pub pass: bool,
    pub offenders: Vec<(MultiIndex, String)>,
}

pub fn bochner_check(model: &PotentialModel) -> BochnerReport {
    let jet = model.phi_jet(4, ScalarMode::ExactRational);
    bochner_check_jet(&jet, model.n)
}

pub fn bochner_check_jet(jet: &Jet, n: usize) -> BochnerReport {
    let mode = jet.mode();
    let mut offenders = Vec::new();
    for (k, v) in jet.terms() {
        match k.total() {
            0 | 1 | 3 => offenders.push((k.clone(), "must vanish".into())),
            2 => {
                let is_diag = (0..n).any(|i| k.0[i] == 1 && k.0[n + i] == 1);
                let ok = is_diag && *v == ComplexScalar::one(mode);
                if !ok {
                    offenders.push((k.clone(), "quadratic part must be |x|^2".into()));
                }
            }
            _ => {}
        }
    }
    // missing diagonal quadratic terms
    for i in 0..n {
        let mut e = MultiIndex::zero(2 * n);
        e.0[i] = 1;
        e.0[n + i] = 1;
        if jet.coeff(&e).is_zero() {
            offenders.push((e, "quadratic part must be |x|^2".into()));
        }
    }
    BochnerReport {
        pass: offenders.is_empty(),
        offenders,
    }
}

/// Reference value for `b_1` at the base point, pinned by the exact-kernel
/// calibration models: for a Bochner-normalized n = 1 jet,
/// `b_1(0,0) = -2 * c_{2,2}` where `c_{2,2}` is the coefficient of
/// `x^2 conj(x)^2` (0 for `|x|^2`, 1 for `log(1+|x|^2)`).
pub fn scalar_curvature_b1_reference(model: &PotentialModel) -> Result<Scalar> {
    if model.n != 1 {
        return Err(Error::Unsupported("b1 reference requires n = 1".into()));
    }
    let report = bochner_check(model);
    if !report.pass {
        return Err(Error::NotBochner(format!(
            "{} offending coefficients",
            report.offenders.len()
        )));
    }
    let jet = model.phi_jet(4, ScalarMode::ExactRational);
    let c22 = jet.coeff(&MultiIndex(vec![2, 2]));
    Ok(c22.re.mul(&Scalar::from_i64(-2, ScalarMode::ExactRational)))
}

#[cfg(test)]
mod tests {
    use super::*;

    const R: ScalarMode = ScalarMode::ExactRational;

    #[test]
    fn polarize_catalog() {
        // |x|^2 -> xz
        let bf = PotentialModel::bargmann_fock(1).psi_jet(6, R).unwrap();
        assert_eq!(bf.num_terms(), 1);
        assert_eq!(
            bf.coeff(&MultiIndex(vec![1, 1])),
            ComplexScalar::one(R)
        );
        // log(1+|x|^2) at T=6 -> xz - (xz)^2/2 + (xz)^3/3
        let fs = PotentialModel::fubini_study(1).psi_jet(6, R).unwrap();
        assert_eq!(fs.coeff(&MultiIndex(vec![2, 2])), ComplexScalar::from_ratio(-1, 2, R));
        assert_eq!(fs.coeff(&MultiIndex(vec![3, 3])), ComplexScalar::from_ratio(1, 3, R));
        assert_eq!(fs.num_terms(), 3);
        // |x|^2 + |x|^4/4 -> xz + (xz)^2/4
        let q = PotentialModel::radial_quartic(Rational::from((1, 4)))
            .psi_jet(6, R)
            .unwrap();
        assert_eq!(q.coeff(&MultiIndex(vec![2, 2])), ComplexScalar::from_ratio(1, 4, R));
        assert_eq!(q.num_terms(), 2);
    }

    #[test]
    fn polarize_rejects_asymmetric() {
        // phi = |x|^2 + x (linear term breaks real structure)
        let mut phi = PotentialModel::bargmann_fock(1).phi_jet(4, R);
        phi.set_coeff(MultiIndex(vec![1, 0]), ComplexScalar::one(R));
        assert!(matches!(polarize(&phi), Err(Error::SymmetryViolated { .. })));
    }

    #[test]
    fn diastasis_bargmann_fock() {
        let prec = 128;
        let m = PotentialModel::bargmann_fock(1);
        let x = [Complex::with_val(prec, (0.3, -0.2))];
        let y = [Complex::with_val(prec, (-0.1, 0.5))];
        let d = diastasis(&m, &x, &y, prec);
        let diff = x[0].clone() - y[0].clone();
        let expect = diff.norm().into_real_imag().0;
        let err = (d.value.clone() - expect).abs();
        assert!(err < 1e-30, "err = {err}");
        // symmetry
        let d2 = diastasis(&m, &y, &x, prec);
        assert!((d.value - d2.value).abs() < 1e-30);
    }

    #[test]
    fn diastasis_fubini_study_log2() {
        let prec = 128;
        let m = PotentialModel::fubini_study(1);
        let x = [Complex::with_val(prec, (1, 0))];
        let y = [Complex::new(prec)];
        let d = diastasis(&m, &x, &y, prec);
        let expect = Float::with_val(prec, 2).ln();
        assert!((d.value - expect).abs() < 1e-30);
    }

    #[test]
    fn diastasis_vanishes_on_diagonal() {
        let prec = 128;
        let m = PotentialModel::radial_quartic(Rational::from((1, 10)));
        let x = [Complex::with_val(prec, (0.4, 0.1))];
        let d = diastasis(&m, &x, &x, prec);
        assert!(d.value.abs() < 1e-35);
    }

    #[test]
    fn diastasis_quadratic_near_origin() {
        // D(x, 0) - |x|^2 = O(|x|^4) for Bochner models
        let prec = 128;
        let m = PotentialModel::fubini_study(1);
        let y = [Complex::new(prec)];
        let mut prev_ratio: Option<f64> = None;
        for p in 3..7 {
            let r = 2f64.powi(-p);
            let x = [Complex::with_val(prec, (r, 0))];
            let d = diastasis(&m, &x, &y, prec);
            let resid = (d.value - Float::with_val(prec, r * r)).abs().to_f64();
            let ratio = resid / r.powi(4);
            if let Some(prev) = prev_ratio {
                assert!(ratio < 2.0 * prev + 1.0, "ratio blew up: {ratio} vs {prev}");
            }
            prev_ratio = Some(ratio);
        }
    }

    #[test]
    fn bochner_pass_and_fail() {
        assert!(bochner_check(&PotentialModel::bargmann_fock(1)).pass);
        assert!(bochner_check(&PotentialModel::fubini_study(2)).pass);
        let mut bad = PotentialModel::bargmann_fock(1).phi_jet(4, R);
        bad.set_coeff(MultiIndex(vec![1, 0]), ComplexScalar::from_ratio(1, 2, R));
        let rep = bochner_check_jet(&bad, 1);
        assert!(!rep.pass);
        assert_eq!(rep.offenders[0].0, MultiIndex(vec![1, 0]));
        // c1 != 1 is not Bochner
        let scaled = PotentialModel::radial_series(vec![Rational::from(2)]);
        assert!(!bochner_check(&scaled).pass);
    }

    #[test]
    fn b1_reference_calibration() {
        let bf = scalar_curvature_b1_reference(&PotentialModel::bargmann_fock(1)).unwrap();
        assert!(bf.is_zero());
        let fs = scalar_curvature_b1_reference(&PotentialModel::fubini_study(1)).unwrap();
        assert_eq!(fs, Scalar::from_i64(1, R));
        let q = scalar_curvature_b1_reference(&PotentialModel::radial_quartic(Rational::from((
            1, 10,
        ))))
        .unwrap();
        assert_eq!(q, Scalar::from_ratio(-1, 5, R));
    }

    #[test]
    fn config_round_trip() {
        let cfg: ModelConfig = serde_json::from_str(
            r#"{"name":"radial_quartic","n":1,"params":{"c":"1/10"},"base_point":[["0","0"]],"scalar_mode":"rational"}"#,
        )
        .unwrap();
        let m = PotentialModel::from_config(&cfg).unwrap();
        assert_eq!(m, PotentialModel::radial_quartic(Rational::from((1, 10))));
        let off: ModelConfig = serde_json::from_str(
            r#"{"name":"radial_quartic","params":{"c":"1/10"},"base_point":[["1","0"]]}"#,
        )
        .unwrap();
        assert!(PotentialModel::from_config(&off).is_err());
    }

    #[test]
    fn phi_eval_matches_jet_for_polynomial() {
        let prec = 128;
        let m = PotentialModel::radial_quartic(Rational::from((1, 4)));
        let x = Complex::with_val(prec, (0.5, 0.5)); // |x|^2 = 1/2
        let v = m.phi_eval(&[x], prec);
        let expect = 0.5 + 0.25 * 0.25;
        assert!((v - Float::with_val(prec, expect)).abs() < 1e-30);
    }
}
