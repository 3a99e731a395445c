//! Truncated kernel expansion K^{(N)}, oracle residual ladders, the
//! truncation index N0(k), and the log-kernel/diastasis relation.

use crate::bbs::CoefficientTable;
use crate::error::{Error, Result};
use crate::oracle::{monomial_norms, KernelOracle};
use crate::potential::{diastasis, PotentialModel};
use crate::scalar::{ComplexScalar, Scalar};
use rug::{Complex, Float};

/// One evaluation of the truncated expansion.
#[derive(Debug, Clone)]
pub struct ExpansionEvaluation {
    pub k: u32,
    pub n_trunc: usize,
    /// K^{(N)}(x, y) = (k/π)^n e^{kψ(x,ȳ)}·(1 + Σ_{j=1}^N b_j(x,ȳ)/k^j)
    pub raw: Complex,
    /// |K^{(N)}|·e^{-kφ(x)/2 - kφ(y)/2}
    pub weighted: Float,
    /// cumulative bracket values 1 + Σ_{j<=m} b_j(x,ȳ)/k^j, m = 0..=N
    pub partial_sums: Vec<Complex>,
    /// N0(k) with default constants (C, a, ε) = (1, model's a, 1/2)
    pub n0: u32,
}

/// One oracle-vs-expansion comparison.
#[derive(Debug, Clone)]
pub struct ResidualRecord {
    pub k: u32,
    pub x: Complex,
    pub y: Complex,
    pub n_trunc: usize,
    /// |oracle − expansion|, unweighted
    pub residual: Float,
    /// residual·e^{-kφ(x)/2 - kφ(y)/2}
    pub weighted_residual: Float,
}

fn to_scalar(c: &Complex, prec: u32) -> ComplexScalar {
    ComplexScalar::new(
        Scalar::BigFloat(Float::with_val(prec, c.real())),
        Scalar::BigFloat(Float::with_val(prec, c.imag())),
    )
}

/// `⌊(k/C)^{1/(2a+2ε)}⌋`; 0 when k < C.
pub fn n0_of_k(k: f64, c_cfg: f64, a: f64, eps: f64) -> u32 {
    if k < c_cfg {
        return 0;
    }
    (k / c_cfg).powf(1.0 / (2.0 * a + 2.0 * eps)).floor() as u32
}

/// Evaluate K^{(N)} at (x, y) with ψ from the model's closed form.
pub fn eval_expansion(
    table: &CoefficientTable,
    model: &PotentialModel,
    k: u32,
    n_trunc: usize,
    x: &[Complex],
    y: &[Complex],
    prec: u32,
) -> Result<ExpansionEvaluation> {
    if n_trunc > table.m_max {
        return Err(Error::InvalidInput(format!(
            "N = {n_trunc} exceeds table order {}",
            table.m_max
        )));
    }
    if x.len() != model.n || y.len() != model.n {
        return Err(Error::DimensionMismatch {
            expected: model.n,
            got: x.len().max(y.len()),
        });
    }
    let ybar: Vec<Complex> = y.iter().map(|c| c.clone().conj()).collect();
    // evaluation point (x, z = ȳ) for the b_m jets
    let mut point: Vec<ComplexScalar> = Vec::with_capacity(2 * model.n);
    for c in x.iter().chain(ybar.iter()) {
        point.push(to_scalar(c, prec));
    }
    let kf = Float::with_val(prec, k);
    let mut bracket = Complex::with_val(prec, (1, 0));
    let mut partial_sums = vec![bracket.clone()];
    let mut k_pow = Float::with_val(prec, 1);
    for j in 1..=n_trunc {
        k_pow *= &kf;
        let bj = table.b[j].eval(&point).to_rug_complex(prec);
        bracket += bj / k_pow.clone();
        partial_sums.push(bracket.clone());
    }
    let psi = model.psi_eval(x, &ybar, prec);
    let pi = Float::with_val(prec, rug::float::Constant::Pi);
    let mut prefactor = Float::with_val(prec, 1);
    for _ in 0..model.n {
        prefactor *= kf.clone() / pi.clone();
    }
    let raw = (psi.clone() * kf.clone()).exp() * bracket.clone() * prefactor.clone();
    // weighted magnitude in log space
    let phi_x = model.phi_eval(x, prec);
    let phi_y = model.phi_eval(y, prec);
    let log_mag = Float::with_val(prec, psi.real() * &kf)
        - (phi_x + phi_y) * kf.clone() / 2u32
        + prefactor.ln()
        + bracket.abs().into_real_imag().0.ln();
    let weighted = log_mag.exp();
    let n0 = n0_of_k(k as f64, 1.0, model.gevrey_a.max(1.0), 0.5);
    Ok(ExpansionEvaluation {
        k,
        n_trunc,
        raw,
        weighted,
        partial_sums,
        n0,
    })
}

/// Residuals against the exact oracle over a (k, point) grid, plus the
/// fitted on-diagonal convergence exponent: for x = y points the scaled
/// residual |oracle − K^{(N)}|_w/(k/π)^n is fitted as c·k^{-e} and e is
/// returned (expected e ≈ N + 1).
pub fn compare_with_oracle(
    model: &PotentialModel,
    table: &CoefficientTable,
    ks: &[u32],
    points: &[(Vec<Complex>, Vec<Complex>)],
    n_trunc: usize,
    j_max: u32,
    prec: u32,
    tol: f64,
) -> Result<(Vec<ResidualRecord>, Option<f64>)> {
    let mut records = Vec::new();
    let mut diag: Vec<(f64, f64)> = Vec::new();
    let pi = Float::with_val(prec, rug::float::Constant::Pi);
    for &k in ks {
        let oracle = monomial_norms(model, k, j_max, prec, tol)?;
        for (x, y) in points {
            if model.n != 1 {
                return Err(Error::Unsupported(
                    "oracle comparisons are n = 1 only".into(),
                ));
            }
            let kv = oracle.kernel_eval(model, &x[0], &y[0], 1e-12)?;
            let ev = eval_expansion(table, model, k, n_trunc, x, y, prec)?;
            let residual = Complex::with_val(prec, &kv.raw - &ev.raw)
                .abs()
                .into_real_imag()
                .0;
            let kf = Float::with_val(prec, k);
            let phi_x = model.phi_eval(x, prec);
            let phi_y = model.phi_eval(y, prec);
            let weight = (-(phi_x + phi_y) * kf.clone() / 2u32).exp();
            let weighted_residual = residual.clone() * weight;
            if x == y {
                let scaled =
                    Float::with_val(prec, &weighted_residual / &(kf.clone() / pi.clone()));
                if scaled > 0 {
                    diag.push(((k as f64).ln(), scaled.ln().to_f64()));
                }
            }
            records.push(ResidualRecord {
                k,
                x: x[0].clone(),
                y: y[0].clone(),
                n_trunc,
                residual,
                weighted_residual,
            });
        }
    }
    let exponent = if diag.len() >= 2 {
        let nf = diag.len() as f64;
        let sx: f64 = diag.iter().map(|p| p.0).sum();
        let sy: f64 = diag.iter().map(|p| p.1).sum();
        let sxx: f64 = diag.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = diag.iter().map(|p| p.0 * p.1).sum();
        Some(-(nf * sxy - sx * sy) / (nf * sxx - sx * sx))
    } else {
        None
    };
    Ok((records, exponent))
}

/// Scaled log-kernel residual (n = 1):
/// `k²·|(1/k)·log(weighted K) + D/2 − (log k)/k + (log π)/k|`.
pub fn log_kernel_residual(
    oracle: &KernelOracle,
    model: &PotentialModel,
    x: &Complex,
    y: &Complex,
) -> Result<Float> {
    let prec = oracle.prec;
    let k = oracle.k;
    let kv = oracle.kernel_eval(model, x, y, 1e-12)?;
    if !(kv.weighted > 0) {
        return Err(Error::BelowNoiseFloor);
    }
    let kf = Float::with_val(prec, k);
    let d = diastasis(
        model,
        std::slice::from_ref(x),
        std::slice::from_ref(y),
        prec,
    );
    let pi = Float::with_val(prec, rug::float::Constant::Pi);
    let inner = kv.weighted.clone().ln() / kf.clone() + d.value / 2u32
        - kf.clone().ln() / kf.clone()
        + pi.ln() / kf.clone();
    Ok(inner.abs() * kf.clone() * kf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bbs::compute_bm;
    use crate::scalar::ScalarMode;
    use rug::Rational;

    const PREC: u32 = 256;
    const R: ScalarMode = ScalarMode::ExactRational;

    fn cpx(re: f64, im: f64) -> Complex {
        Complex::with_val(PREC, (re, im))
    }

    #[test]
    fn bargmann_fock_exact_any_order() {
        let model = PotentialModel::bargmann_fock(1);
        let table = compute_bm(&model, 3, 10, R).unwrap();
        let k = 8;
        let oracle = monomial_norms(&model, k, 40, PREC, 1e-24).unwrap();
        for (x, y) in [
            (cpx(0.0, 0.0), cpx(0.0, 0.0)),
            (cpx(0.3, 0.1), cpx(0.2, -0.2)),
        ] {
            let kv = oracle.kernel_eval(&model, &x, &y, 1e-12).unwrap();
            for n_trunc in 0..=3usize {
                let ev =
                    eval_expansion(&table, &model, k, n_trunc, &[x.clone()], &[y.clone()], PREC)
                        .unwrap();
                let diff = Complex::with_val(PREC, &kv.raw - &ev.raw)
                    .abs()
                    .into_real_imag()
                    .0;
                let scale = kv.raw.clone().abs().into_real_imag().0;
                assert!(
                    Float::with_val(PREC, &diff / &scale).to_f64() < 1e-20,
                    "N = {n_trunc}: rel diff {}",
                    diff.to_f64()
                );
            }
        }
    }

    #[test]
    fn fubini_study_terminates_at_order_one() {
        let model = PotentialModel::fubini_study(1);
        let table = compute_bm(&model, 3, 12, R).unwrap();
        for k in [5u32, 12, 64] {
            let oracle = monomial_norms(&model, k, k, PREC, 1e-24).unwrap();
            // x = y = 0: K = (k+1)/π exactly
            let ev = eval_expansion(&table, &model, k, 1, &[cpx(0.0, 0.0)], &[cpx(0.0, 0.0)], PREC)
                .unwrap();
            let pi = Float::with_val(PREC, rug::float::Constant::Pi);
            let expect = Float::with_val(PREC, k + 1) / pi;
            let diff = (Float::with_val(PREC, ev.raw.real()) - &expect).abs();
            assert!(diff.to_f64() < 1e-40, "k = {k}: diff {}", diff.to_f64());
            // off-diagonal point, N in {1, 2, 3} all agree with the oracle
            let (x, y) = (cpx(0.15, 0.05), cpx(0.1, -0.08));
            let kv = oracle.kernel_eval(&model, &x, &y, 1e-12).unwrap();
            for n_trunc in 1..=3usize {
                let ev =
                    eval_expansion(&table, &model, k, n_trunc, &[x.clone()], &[y.clone()], PREC)
                        .unwrap();
                let diff = Complex::with_val(PREC, &kv.raw - &ev.raw)
                    .abs()
                    .into_real_imag()
                    .0;
                let scale = kv.raw.clone().abs().into_real_imag().0;
                assert!(
                    Float::with_val(PREC, &diff / &scale).to_f64() < 1e-12,
                    "k = {k}, N = {n_trunc}"
                );
            }
        }
    }

    #[test]
    fn quartic_residual_exponent() {
        let model = PotentialModel::radial_quartic(Rational::from((1, 10)));
        let table = compute_bm(&model, 2, 8, R).unwrap();
        let points = vec![(vec![cpx(0.0, 0.0)], vec![cpx(0.0, 0.0)])];
        let (records, exponent) =
            compare_with_oracle(&model, &table, &[20, 40, 80], &points, 2, 8, PREC, 1e-26)
                .unwrap();
        assert_eq!(records.len(), 3);
        for r in &records {
            assert!(r.residual.is_finite() && r.residual > 0);
        }
        let e = exponent.unwrap();
        assert!((e - 3.0).abs() < 0.5, "fitted exponent {e} (target 3)");
    }

    #[test]
    fn quartic_partial_sums_cauchy() {
        let model = PotentialModel::radial_quartic(Rational::from((1, 10)));
        let table = compute_bm(&model, 3, 10, R).unwrap();
        let x = vec![cpx(0.05, 0.02)];
        let ev = eval_expansion(&table, &model, 40, 3, &x, &x, PREC).unwrap();
        let mut prev: Option<Float> = None;
        for w in ev.partial_sums.windows(2) {
            let step = Complex::with_val(PREC, &w[1] - &w[0]).abs().into_real_imag().0;
            if let Some(p) = prev {
                assert!(step < p, "partial sums not Cauchy");
            }
            prev = Some(step);
        }
    }

    #[test]
    fn weighted_symmetry() {
        let model = PotentialModel::radial_quartic(Rational::from((1, 10)));
        let table = compute_bm(&model, 2, 8, R).unwrap();
        let x = vec![cpx(0.1, 0.04)];
        let y = vec![cpx(0.07, -0.03)];
        let exy = eval_expansion(&table, &model, 30, 2, &x, &y, PREC).unwrap();
        let eyx = eval_expansion(&table, &model, 30, 2, &y, &x, PREC).unwrap();
        let diff = (exy.weighted.clone() - &eyx.weighted).abs();
        let rel = diff / exy.weighted;
        assert!(rel.to_f64() < 1e-40);
    }

    #[test]
    fn log_residual_fubini_study() {
        let model = PotentialModel::fubini_study(1);
        let zero = cpx(0.0, 0.0);
        for (k, expect) in [(64u32, 0.99227), (256, 0.99805)] {
            let oracle = monomial_norms(&model, k, k, PREC, 1e-24).unwrap();
            let v = log_kernel_residual(&oracle, &model, &zero, &zero).unwrap();
            assert!(
                (v.to_f64() - expect).abs() < 1e-3,
                "k = {k}: got {}",
                v.to_f64()
            );
        }
    }

    #[test]
    fn log_residual_bargmann_fock_zero() {
        let model = PotentialModel::bargmann_fock(1);
        let oracle = monomial_norms(&model, 16, 40, PREC, 1e-24).unwrap();
        for (x, y) in [
            (cpx(0.0, 0.0), cpx(0.0, 0.0)),
            (cpx(0.2, 0.1), cpx(0.15, -0.1)),
        ] {
            let v = log_kernel_residual(&oracle, &model, &x, &y).unwrap();
            assert!(v.to_f64() < 1e-18, "got {}", v.to_f64());
        }
    }

    #[test]
    fn n0_examples() {
        assert_eq!(n0_of_k(7.0, 7.0, 2.0, 0.5), 1);
        assert_eq!(n0_of_k(1024.0, 1.0, 2.0, 0.5), 4);
        assert_eq!(n0_of_k(0.5, 1.0, 2.0, 0.5), 0);
    }
}
