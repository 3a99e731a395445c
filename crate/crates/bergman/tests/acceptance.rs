//! Acceptance suite: one test and one printed pass/fail line per criterion.

use bergman::asymptotics::{compare_with_oracle, log_kernel_residual};
use bergman::bbs::{build_frames, compute_amplitudes, compute_bm, negligibility_residuals};
use bergman::gevrey::{
    estimate_c1, vanishing_rate_fit, DbarDirection, DerivOracle, ExtensionEvaluator, GevreyModel,
};
use bergman::growth::{check_lower_bound, MajorantMode, MajorantTable};
use bergman::oracle::monomial_norms;
use bergman::potential::{diastasis, PotentialModel};
use bergman::scalar::{ComplexScalar, ScalarMode};
use rug::float::Round;
use rug::{Complex, Float, Rational};

const R: ScalarMode = ScalarMode::ExactRational;
const PREC: u32 = 256;

fn report(criterion: u32, pass: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

/// Bargmann-Fock nullity: b_1..b_5 are exactly the zero jet.
#[test]
fn criterion_1_bargmann_fock_nullity() {
    let model = PotentialModel::bargmann_fock(1);
    let table = compute_bm(&model, 5, 12, R).unwrap();
    let pass = table.b[1..].iter().all(|b| b.num_terms() == 0);
    report(1, pass, "b_1..b_5 = 0 exactly (M = 5, rational)");
}

/// Fubini-Study termination: b_1 = 1 (constant to degree 6), b_2 = b_3 = 0,
/// and the oracle dimension identity K(0,0) = (k+1)/pi.
#[test]
fn criterion_2_fubini_study_termination() {
    let model = PotentialModel::fubini_study(1);
    let table = compute_bm(&model, 3, 14, R).unwrap();
    let b1 = &table.b[1];
    let one = ComplexScalar::from_i64(1, R);
    let mut pass = b1.constant_term() == one;
    // every nonconstant coefficient up to output degree 6 vanishes
    pass &= b1
        .terms()
        .all(|(idx, _)| idx.total() == 0 || idx.total() > 6);
    pass &= table.b[2].num_terms() == 0 && table.b[3].num_terms() == 0;
    let mut oracle_detail = String::new();
    for k in [5u32, 12, 64] {
        let oracle = monomial_norms(&model, k, k, PREC, 1e-24).unwrap();
        let zero = Complex::with_val(PREC, (0, 0));
        let kv = oracle.kernel_eval(&model, &zero, &zero, 1e-12).unwrap();
        let pi = Float::with_val(PREC, rug::float::Constant::Pi);
        let expect = Float::with_val(PREC, k + 1) / pi;
        let diff = (Float::with_val(PREC, kv.raw.real()) - &expect).abs();
        pass &= diff.to_f64() < 1e-12;
        oracle_detail.push_str(&format!(" k={k}: |K(0,0)-(k+1)/pi|={:.1e}", diff.to_f64()));
    }
    report(
        2,
        pass,
        &format!("b_1 = 1, b_2 = b_3 = 0;{oracle_detail}"),
    );
}

/// Negligibility identity: the per-order residuals
/// a_m - D_theta.A_m - (x-y).A_{m+1} vanish exactly for m <= 3, which is the
/// jet form of a^(N) - grad A^(N+1) = -k^{-(N+1)} D_theta.A_{N+1}.
#[test]
fn criterion_3_negligibility_identity() {
    let models = [
        PotentialModel::bargmann_fock(1),
        PotentialModel::fubini_study(1),
        PotentialModel::radial_quartic(Rational::from((1, 10))),
    ];
    let mut pass = true;
    let mut detail = String::new();
    for model in &models {
        let t = 14;
        let frames = build_frames(model, t, R).unwrap();
        let table = compute_bm(model, 4, t, R).unwrap();
        let amps = compute_amplitudes(&frames, &table, 4).unwrap();
        let (residuals, _tail) = negligibility_residuals(&amps, 1).unwrap();
        let ok = residuals[..=3].iter().all(|r| r.num_terms() == 0);
        pass &= ok;
        detail.push_str(&format!(" {}: {}", model.name, if ok { "0" } else { "nonzero" }));
    }
    report(
        3,
        pass,
        &format!("exact jet identity, N <= 3, sign as implemented;{detail}"),
    );
}

/// Quartic on-diagonal residual ladder fits exponent N+1 = 3 within 0.5.
#[test]
fn criterion_4_convergence_rate() {
    let model = PotentialModel::radial_quartic(Rational::from((1, 10)));
    let table = compute_bm(&model, 2, 8, R).unwrap();
    let zero = Complex::with_val(PREC, (0, 0));
    let points = vec![(vec![zero.clone()], vec![zero])];
    let (_, exponent) =
        compare_with_oracle(&model, &table, &[20, 40, 80], &points, 2, 8, PREC, 1e-12).unwrap();
    let e = exponent.unwrap();
    let pass = (e - 3.0).abs() <= 0.5;
    report(4, pass, &format!("fitted exponent {e:.3} (target 3 +/- 0.5)"));
}

/// Log-kernel residual: k^2 * |(1/k)log K_w + D/2 - log k/k + log pi/k| in
/// [0.5, 1.5] on Fubini-Study for points with D <= (1/2) k^{-4/5}.
#[test]
fn criterion_5_log_kernel_residual() {
    let model = PotentialModel::fubini_study(1);
    let mut pass = true;
    let mut worst: (f64, f64) = (1.0, 1.0);
    for k in [16u32, 32, 64, 128, 256] {
        let oracle = monomial_norms(&model, k, k, PREC, 1e-24).unwrap();
        let d_cap = 0.5 * (k as f64).powf(-0.8);
        let sep = 0.4 * (k as f64).powf(-0.4);
        let bases = [(0.0, 0.0), (0.1, 0.0), (0.05, 0.08)];
        for &(re, im) in &bases {
            let x = Complex::with_val(PREC, (re, im));
            for y in [
                x.clone(),
                Complex::with_val(PREC, (re + sep, im)),
                Complex::with_val(PREC, (re, im + sep)),
            ] {
                let d = diastasis(
                    &model,
                    std::slice::from_ref(&x),
                    std::slice::from_ref(&y),
                    PREC,
                );
                if d.value.to_f64() > d_cap {
                    continue;
                }
                let v = log_kernel_residual(&oracle, &model, &x, &y)
                    .unwrap()
                    .to_f64();
                if (v - 1.0).abs() > (worst.1 - 1.0).abs() {
                    worst = (k as f64, v);
                }
                pass &= (0.5..=1.5).contains(&v);
            }
        }
    }
    report(
        5,
        pass,
        &format!(
            "k in 16..256, grid D <= k^(-4/5)/2; worst k^2*residual {:.4} at k = {}",
            worst.1, worst.0
        ),
    );
}

/// Majorant recursion lower bound with directed rounding:
/// entry(m, 0, k e~1) >= 2^{-(a+eps)m} (2m-2+k)!^{a+eps}, m <= 6, k <= 4.
#[test]
fn criterion_6_majorant_lower_bound() {
    let mut pass = true;
    let mut detail = String::new();
    for (a, eps) in [((2i64, 1i64), (1i64, 2i64)), ((3, 2), (1, 4))] {
        let mut table = MajorantTable::new(
            1,
            Rational::from(a),
            Rational::from(eps),
            Rational::from(1),
            MajorantMode::WorstCaseEquality,
            128,
            Round::Down,
        )
        .unwrap();
        let rows = check_lower_bound(&mut table, 6, 4);
        let ok = rows.iter().all(|r| r.pass);
        let min_margin = rows
            .iter()
            .map(|r| r.margin)
            .fold(f64::INFINITY, f64::min);
        pass &= ok;
        detail.push_str(&format!(
            " (a,eps)=({}/{},{}/{}): min margin {:.3e}",
            a.0, a.1, eps.0, eps.1, min_margin
        ));
    }
    report(6, pass, &format!("rigorous, m <= 6, k <= 4;{detail}"));
}

/// Gevrey extension: restriction identity on 100 points and the dbar
/// vanishing-rate slope 1/(a-1) within 20% for a in {3/2, 2, 3}.
///
/// Radii per index (all measured, see the module docs): a = 2 uses the
/// dyadic ladder 2^-3..2^-8; a = 3/2 needs the shallower half-octave ladder
/// 2^-3..2^-5 (the active order grows like (C1 r)^-2); a = 3 needs the
/// deeper ladder 2^-12..2^-16 to escape the 1/log(1/r) slope bias.
#[test]
fn criterion_7_gevrey_extension() {
    // restriction identity, 100 points in the unit disc
    let a2 = Rational::from(2);
    let model = GevreyModel::new(a2.clone()).unwrap();
    let c1 = estimate_c1(&model, &a2, 12, PREC);
    let ev = ExtensionEvaluator::new(model, a2.clone(), c1, 1.0, 512, PREC).unwrap();
    let mut max_restriction = 0f64;
    for i in 0..10 {
        for j in 0..10 {
            let re = -0.72 + 0.16 * i as f64;
            let im = -0.72 + 0.16 * j as f64;
            let x = Complex::with_val(PREC, (re, im));
            let xbar = Complex::with_val(PREC, x.conj_ref());
            let f = ev.oracle.deriv(0, 0, &x, PREC);
            let v = ev.extend(&x, &xbar).unwrap();
            let diff = Complex::with_val(PREC, &v - &f).abs().into_real_imag().0;
            max_restriction = max_restriction.max(diff.to_f64());
        }
    }
    let mut pass = max_restriction <= 1e-10;

    let mut detail = format!("restriction max {max_restriction:.1e};");
    let ladders: [(Rational, Vec<f64>); 3] = [
        (
            Rational::from((3, 2)),
            (0..=4).map(|i| 2f64.powf(-3.0 - 0.5 * i as f64)).collect(),
        ),
        (a2, (3..=8).map(|p| 2f64.powi(-p)).collect()),
        (
            Rational::from(3),
            (0..=8).map(|i| 2f64.powf(-12.0 - 0.5 * i as f64)).collect(),
        ),
    ];
    for (a, radii) in ladders {
        let expect = 1.0 / (Rational::from(&a - Rational::from(1)).to_f64());
        let model = GevreyModel::new(a.clone()).unwrap();
        let c1 = estimate_c1(&model, &a, 12, PREC);
        let ev = ExtensionEvaluator::new(model, a.clone(), c1, 1.0, 512, PREC).unwrap();
        let fit = vanishing_rate_fit(&ev, 0.25, &radii, DbarDirection::YBar).unwrap();
        let rel = (fit.sigma - expect).abs() / expect;
        pass &= rel <= 0.2;
        detail.push_str(&format!(
            " a={}: slope {:.3} vs {:.1} ({:.0}%)",
            a,
            fit.sigma,
            expect,
            rel * 100.0
        ));
    }
    report(7, pass, &detail);
}

/// Truncation stability: quartic b_1..b_3 agree exactly to output degree 4
/// between truncations T and T+2.
#[test]
fn criterion_8_truncation_stability() {
    let model = PotentialModel::radial_quartic(Rational::from((1, 10)));
    let t = 12;
    let lo = compute_bm(&model, 3, t, R).unwrap();
    let hi = compute_bm(&model, 3, t + 2, R).unwrap();
    let mut pass = true;
    for m in 1..=3usize {
        let collect = |jet: &bergman::jet::Jet| {
            jet.terms()
                .filter(|(idx, _)| idx.total() <= 4)
                .map(|(idx, c)| (idx.clone(), c.clone()))
                .collect::<Vec<_>>()
        };
        pass &= collect(&lo.b[m]) == collect(&hi.b[m]);
    }
    report(
        8,
        pass,
        &format!("b_1..b_3 identical to degree 4 at T = {t} and T = {}", t + 2),
    );
}
