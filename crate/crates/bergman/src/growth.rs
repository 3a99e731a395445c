//! Scalar multi-index majorant recursion for the coefficient derivative
//! growth, the factorial lower bound check, and growth-rate fit diagnostics.
//!
//! Dimension n = 1 only: each derivative multi-index lives in Z²≥0 (one slot
//! per variable of the (x, z) pair). Entries are computed in big floats with
//! directed rounding so that a reported inequality pass is rigorous.

use crate::error::{Error, Result};
use rug::float::Round;
use rug::ops::{AssignRound, Pow};
use rug::{Complete, Float, Integer, Rational};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MajorantMode {
    /// The worst-case recursion run as an equality (C = 1 reference mode).
    WorstCaseEquality,
    /// The inequality-shaped recursion with an explicit constant C.
    InequalityBound,
}

type Idx = [u32; 2];

/// Memoized table of the recursion entries, one per (m, μ, ν).
pub struct MajorantTable {
    pub n: usize,
    pub a: Rational,
    pub eps: Rational,
    pub c: Rational,
    pub mode: MajorantMode,
    pub prec: u32,
    round: Round,
    entries: HashMap<(usize, Idx, Idx), Float>,
    /// n!^(a+eps) rounded toward the table's direction, and away from it
    fact_pow_down: HashMap<u32, Float>,
    fact_pow_up: HashMap<u32, Float>,
}

fn pow_frac(base: &Integer, exp: &Rational, prec: u32, round: Round) -> Float {
    // base^exp = exp(exp · ln base), each step rounded in the requested
    // direction; valid for base >= 1, exp >= 0.
    if *base == 1 {
        return Float::with_val(prec, 1);
    }
    let mut ln = Float::with_val(prec, base);
    ln.ln_round(round);
    let mut prod = Float::new(prec);
    prod.assign_round(&ln * &Float::with_val(prec, exp), round);
    prod.exp_round(round);
    prod
}

fn flip(round: Round) -> Round {
    match round {
        Round::Down => Round::Up,
        Round::Up => Round::Down,
        _ => Round::Nearest,
    }
}

impl MajorantTable {
    /// `round` is the direction entries are rounded toward; use `Down` when
    /// the table feeds a `>=` check.
    pub fn new(
        n: usize,
        a: Rational,
        eps: Rational,
        c: Rational,
        mode: MajorantMode,
        prec: u32,
        round: Round,
    ) -> Result<Self> {
        if n != 1 {
            return Err(Error::Unsupported(
                "majorant recursion supports n = 1 only".into(),
            ));
        }
        if a <= 1 || eps <= 0 {
            return Err(Error::InvalidInput("need a > 1 and eps > 0".into()));
        }
        Ok(MajorantTable {
            n,
            a,
            eps,
            c,
            mode,
            prec,
            round,
            entries: HashMap::new(),
            fact_pow_down: HashMap::new(),
            fact_pow_up: HashMap::new(),
        })
    }

    fn ae(&self) -> Rational {
        (&self.a + &self.eps).complete()
    }

    /// `v!^(a+eps)` with rounding toward the table direction
    /// (`conservative = false`) or away from it (`conservative = true`,
    /// used for divisors).
    fn fact_pow(&mut self, v: u32, divisor: bool) -> Float {
        let round = if divisor { flip(self.round) } else { self.round };
        let map = if divisor {
            &mut self.fact_pow_up
        } else {
            &mut self.fact_pow_down
        };
        if let Some(f) = map.get(&v) {
            return f.clone();
        }
        let ae = (&self.a + &self.eps).complete();
        let f = pow_frac(&Integer::factorial(v).complete(), &ae, self.prec, round);
        map.insert(v, f.clone());
        f
    }

    fn idx_fact_pow(&mut self, idx: Idx, divisor: bool) -> Float {
        let mut out = Float::with_val(self.prec, 1);
        for v in idx {
            let f = self.fact_pow(v, divisor);
            out.assign_round(&out.clone() * &f, if divisor { flip(self.round) } else { self.round });
        }
        out
    }

    /// Demand-computed recursion entry.
    pub fn entry(&mut self, m: usize, mu: Idx, nu: Idx) -> Float {
        if let Some(v) = self.entries.get(&(m, mu, nu)) {
            return v.clone();
        }
        let prec = self.prec;
        let round = self.round;
        let value = if m == 0 {
            if mu == [0, 0] && nu == [0, 0] {
                Float::with_val(prec, 1)
            } else {
                Float::new(prec)
            }
        } else {
            let ae = self.ae();
            // l!^{2a+2eps-1} = l!^{2(a+eps)} / l!
            let two_ae_m1 = Rational::from(2) * &ae - 1u32;
            let mut acc = Float::new(prec);
            for l in 1..=m {
                let lfac_pow = pow_frac(
                    &Integer::factorial(l as u32).complete(),
                    &two_ae_m1,
                    prec,
                    round,
                );
                let mut inner = Float::new(prec);
                for alpha in 0..=l as u32 {
                    for beta in 0..=l as u32 {
                        for xi in 0..=alpha + beta {
                            for eta in 0..=(alpha + beta - xi) {
                                let div = {
                                    let fx = self.fact_pow(xi, true);
                                    let fe = self.fact_pow(eta, true);
                                    let mut d = Float::new(prec);
                                    d.assign_round(&fx * &fe, flip(round));
                                    d
                                };
                                for mu0_0 in 0..=mu[0] {
                                    for mu0_1 in 0..=mu[1] {
                                        for nu0_0 in 0..=nu[0] {
                                            for nu0_1 in 0..=nu[1] {
                                                let mu0 = [mu0_0, mu0_1];
                                                let nu0 = [nu0_0, nu0_1];
                                                let sub = self.entry(
                                                    m - l,
                                                    [mu0[0], mu0[1] + xi],
                                                    [nu0[0], nu0[1] + eta],
                                                );
                                                if sub.is_zero() {
                                                    continue;
                                                }
                                                let dmu = [mu[0] - mu0[0], mu[1] - mu0[1]];
                                                let dnu = [nu[0] - nu0[0], nu[1] - nu0[1]];
                                                let mut term = sub;
                                                let binoms = Integer::binomial_u(mu[0], mu0[0]).complete()
                                                    * Integer::binomial_u(mu[1], mu0[1]).complete()
                                                    * Integer::binomial_u(nu[0], nu0[0]).complete()
                                                    * Integer::binomial_u(nu[1], nu0[1]).complete();
                                                term.assign_round(
                                                    &term.clone() * &Float::with_val(prec, binoms),
                                                    round,
                                                );
                                                let fmu = self.idx_fact_pow(dmu, false);
                                                let fnu = self.idx_fact_pow(dnu, false);
                                                term.assign_round(&term.clone() * &fmu, round);
                                                term.assign_round(&term.clone() * &fnu, round);
                                                term.assign_round(&term.clone() / &div, round);
                                                if self.mode == MajorantMode::InequalityBound
                                                    && self.c != 1
                                                {
                                                    let e = dmu[0] + dmu[1] + dnu[0] + dnu[1]
                                                        + l as u32
                                                        + xi
                                                        + eta;
                                                    let cpow = Float::with_val(
                                                        prec,
                                                        Rational::from(self.c.clone()).pow(e),
                                                    );
                                                    term.assign_round(&term.clone() * &cpow, round);
                                                }
                                                inner.assign_round(&inner.clone() + &term, round);
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                let mut contrib = Float::new(prec);
                contrib.assign_round(&lfac_pow * &inner, round);
                acc.assign_round(&acc.clone() + &contrib, round);
            }
            acc
        };
        self.entries.insert((m, mu, nu), value.clone());
        value
    }
}

/// One row of the lower-bound report.
#[derive(Debug, Clone)]
pub struct LowerBoundRow {
    pub m: usize,
    pub k: u32,
    pub entry: f64,
    pub bound: f64,
    pub margin: f64,
    pub pass: bool,
}

/// Check `entry(m, 0, k·ẽ₁) >= 2^{-(a+eps)m} (2m-2+k)!^{a+eps}` for
/// 1 <= m <= m_max, 0 <= k <= k_max, with the entry rounded down and the
/// bound rounded up.
pub fn check_lower_bound(table: &mut MajorantTable, m_max: usize, k_max: u32) -> Vec<LowerBoundRow> {
    let prec = table.prec;
    let ae = table.ae();
    let mut rows = Vec::new();
    for m in 1..=m_max {
        for k in 0..=k_max {
            let e = table.entry(m, [0, 0], [0, k]);
            // bound = (2m-2+k)!^{a+eps} / 2^{(a+eps)m}, rounded up
            let fact = Integer::factorial(2 * m as u32 - 2 + k).complete();
            let num = pow_frac(&fact, &ae, prec, Round::Up);
            let exp_m = Rational::from(m as u32) * &ae;
            let mut den = pow_frac(&Integer::from(2), &exp_m, prec, Round::Down);
            if den < 1 {
                den = Float::with_val(prec, 1e-300);
            }
            let mut bound = Float::new(prec);
            bound.assign_round(&num / &den, Round::Up);
            let pass = e >= bound;
            rows.push(LowerBoundRow {
                m,
                k,
                entry: e.to_f64(),
                bound: bound.to_f64(),
                margin: (e / bound).to_f64(),
                pass,
            });
        }
    }
    rows
}

pub fn lower_bound_csv(rows: &[LowerBoundRow]) -> String {
    let mut out = String::from("m,k,entry,lower_bound,margin,pass\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.m, r.k, r.entry, r.bound, r.margin, r.pass
        ));
    }
    out
}

/// Two-parameter least-squares fit of `log b(m) = m·logC + sigma·log(m!)`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FitResult {
    pub log_c: f64,
    pub sigma: f64,
    pub r_squared: f64,
    pub m_range: (usize, usize),
}

pub fn growth_fit(sup_norms: &[f64], m_min: usize, m_max: usize) -> Result<FitResult> {
    if m_max >= sup_norms.len() || m_max < m_min + 2 {
        return Err(Error::InvalidInput(
            "fit needs at least 3 in-range points".into(),
        ));
    }
    let mut pts = Vec::new();
    for m in m_min..=m_max {
        let b = sup_norms[m];
        if b <= 0.0 {
            return Err(Error::InvalidInput(format!("nonpositive input at m = {m}")));
        }
        let log_fact: f64 = (2..=m).map(|i| (i as f64).ln()).sum();
        pts.push((m as f64, log_fact, b.ln()));
    }
    // normal equations for y = c1·x1 + c2·x2
    let (mut s11, mut s12, mut s22, mut sy1, mut sy2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x1, x2, y) in &pts {
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        sy1 += x1 * y;
        sy2 += x2 * y;
    }
    let det = s11 * s22 - s12 * s12;
    if det.abs() < 1e-12 {
        return Err(Error::InvalidInput("degenerate design matrix".into()));
    }
    let log_c = (sy1 * s22 - sy2 * s12) / det;
    let sigma = (s11 * sy2 - s12 * sy1) / det;
    let ybar = pts.iter().map(|p| p.2).sum::<f64>() / pts.len() as f64;
    let mut ss_tot = 0.0;
    let mut ss_res = 0.0;
    for &(x1, x2, y) in &pts {
        let fit = log_c * x1 + sigma * x2;
        ss_res += (y - fit) * (y - fit);
        ss_tot += (y - ybar) * (y - ybar);
    }
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(FitResult {
        log_c,
        sigma,
        r_squared,
        m_range: (m_min, m_max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(a: (i32, i32), eps: (i32, i32), c: i32) -> MajorantTable {
        MajorantTable::new(
            1,
            Rational::from(a),
            Rational::from(eps),
            Rational::from(c),
            MajorantMode::WorstCaseEquality,
            192,
            Round::Down,
        )
        .unwrap()
    }

    #[test]
    fn base_case() {
        let mut t = table((2, 1), (1, 2), 1);
        assert_eq!(t.entry(0, [0, 0], [0, 0]), 1);
        assert!(t.entry(0, [1, 0], [0, 0]).is_zero());
    }

    #[test]
    fn first_order_closed_form() {
        // entry(1, μ, ν) = 4·μ!^{a+ε}·ν!^{a+ε}
        let mut t = table((2, 1), (1, 2), 1);
        let e = t.entry(1, [0, 0], [0, 0]);
        assert!((e.to_f64() - 4.0).abs() < 1e-30);
        // μ = (1, 2), ν = (0, 1): 4·(1!·2!)^{5/2}·(0!·1!)^{5/2} = 4·2^{5/2}
        let e = t.entry(1, [1, 2], [0, 1]);
        let expect = 4.0 * 2f64.powf(2.5);
        assert!((e.to_f64() - expect).abs() < 1e-10, "{e}");
    }

    #[test]
    fn symmetry_in_mu_nu() {
        let mut t = table((2, 1), (1, 2), 1);
        for m in 1..=3 {
            let a = t.entry(m, [0, 1], [1, 0]);
            let b = t.entry(m, [1, 0], [0, 1]);
            let rel = ((a.clone() - &b) / b).abs().to_f64();
            assert!(rel < 1e-40, "m = {m}: {rel}");
        }
    }

    #[test]
    fn monotone_in_c() {
        let e1 = {
            let mut t = MajorantTable::new(
                1,
                Rational::from(2),
                Rational::from((1, 2)),
                Rational::from(1),
                MajorantMode::InequalityBound,
                192,
                Round::Down,
            )
            .unwrap();
            t.entry(2, [0, 0], [0, 1]).to_f64()
        };
        let e2 = {
            let mut t = MajorantTable::new(
                1,
                Rational::from(2),
                Rational::from((1, 2)),
                Rational::from(2),
                MajorantMode::InequalityBound,
                192,
                Round::Down,
            )
            .unwrap();
            t.entry(2, [0, 0], [0, 1]).to_f64()
        };
        assert!(e2 > e1);
    }

    #[test]
    fn second_order_exceeds_bound() {
        // entry(2, 0, 0) must exceed 2^{-5}·2!^{5/2} for a = 2, ε = 1/2
        let mut t = table((2, 1), (1, 2), 1);
        let e = t.entry(2, [0, 0], [0, 0]).to_f64();
        let bound = 2f64.powf(-5.0) * 2f64.powf(2.5);
        assert!(e > bound, "{e} vs {bound}");
    }

    #[test]
    fn lower_bound_small_grid() {
        let mut t = table((2, 1), (1, 2), 1);
        let rows = check_lower_bound(&mut t, 3, 2);
        for r in &rows {
            assert!(r.pass, "failed at m = {}, k = {}: {:?}", r.m, r.k, r);
        }
    }

    #[test]
    fn fit_recovers_planted_models() {
        // b(m) = m!²
        let vals: Vec<f64> = (0..10)
            .map(|m| {
                let f: f64 = (2..=m).map(|i| i as f64).product::<f64>().max(1.0);
                f * f
            })
            .collect();
        let fit = growth_fit(&vals, 1, 9).unwrap();
        assert!((fit.sigma - 2.0).abs() < 1e-10);
        assert!(fit.log_c.abs() < 1e-10);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        // b(m) = 3^m·m!
        let vals: Vec<f64> = (0..10)
            .map(|m| {
                let f: f64 = (2..=m).map(|i| i as f64).product::<f64>().max(1.0);
                3f64.powi(m as i32) * f
            })
            .collect();
        let fit = growth_fit(&vals, 1, 9).unwrap();
        assert!((fit.sigma - 1.0).abs() < 1e-10);
        assert!((fit.log_c - 3f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(growth_fit(&[1.0, 2.0], 0, 1).is_err());
        assert!(growth_fit(&[1.0, -1.0, 2.0, 3.0], 0, 3).is_err());
    }
}
