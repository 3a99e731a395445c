//! Gevrey cutoff, Borel-type almost-holomorphic extension, and measurement
//! of its ∂̄ vanishing rate.
//!
//! All evaluation is in big floats (256-bit default): the quantities of
//! interest decay like exp(-b·r^{-1/(a-1)}) and underflow double precision
//! quickly.

use crate::error::{Error, Result};
use crate::growth::FitResult;
use crate::quad::quad_tanh_sinh;
use rug::ops::Pow;
use rug::{Complete, Complex, Float, Integer, Rational};
use std::cell::RefCell;
use std::collections::HashMap;

/// Compactly supported Gevrey-class cutoff: χ = 1 on [-1/2, 1/2], 0 outside
/// (-1, 1), built from f_ε(x) = exp(-x^{-1/ε}).
#[derive(Debug, Clone)]
pub struct GevreyCutoff {
    pub eps_cut: f64,
    pub prec: u32,
    norm: Float,
}

impl GevreyCutoff {
    pub fn build(eps_cut: f64, prec: u32) -> Result<Self> {
        if eps_cut <= 0.0 {
            return Err(Error::InvalidInput("eps_cut must be positive".into()));
        }
        let mut cutoff = GevreyCutoff {
            eps_cut,
            prec,
            norm: Float::with_val(prec, 1),
        };
        let a = Float::new(prec);
        let b = Float::with_val(prec, 0.5);
        let norm = quad_tanh_sinh(
            |t| cutoff.bump_product(t),
            &a,
            &b,
            prec,
            1e-24,
        )?;
        if !(norm > 0) {
            return Err(Error::QuadratureFailure("cutoff normalization".into()));
        }
        cutoff.norm = norm;
        Ok(cutoff)
    }

    /// `exp(-x^{-1/ε})` for x > 0, else 0.
    pub fn f_eps(&self, x: &Float) -> Float {
        if *x <= 0 {
            return Float::new(self.prec);
        }
        let e = Float::with_val(self.prec, -1.0 / self.eps_cut);
        (-x.clone().pow(e)).exp()
    }

    fn bump_product(&self, t: &Float) -> Float {
        let half_minus = Float::with_val(self.prec, 0.5) - t;
        self.f_eps(t) * self.f_eps(&half_minus)
    }

    /// Normalized primitive: 0 for u <= 0, 1 for u >= 1/2, smooth between.
    pub fn g(&self, u: &Float) -> Float {
        if *u <= 0 {
            return Float::new(self.prec);
        }
        if *u >= 0.5 {
            return Float::with_val(self.prec, 1);
        }
        let a = Float::new(self.prec);
        let v = quad_tanh_sinh(
            |t| self.bump_product(t),
            &a,
            u,
            self.prec,
            1e-24,
        )
        .unwrap_or_else(|_| Float::new(self.prec));
        v / self.norm.clone()
    }

    pub fn g_prime(&self, u: &Float) -> Float {
        self.bump_product(u) / self.norm.clone()
    }

    /// `χ(x) = g(x+1)·g(1-x)`.
    pub fn chi(&self, x: &Float) -> Float {
        let up = Float::with_val(self.prec, x + 1u32);
        let dn = Float::with_val(self.prec, 1u32 - x);
        self.g(&up) * self.g(&dn)
    }

    pub fn chi_prime(&self, x: &Float) -> Float {
        let up = Float::with_val(self.prec, x + 1u32);
        let dn = Float::with_val(self.prec, 1u32 - x);
        self.g_prime(&up) * self.g(&dn) - self.g(&up) * self.g_prime(&dn)
    }
}

/// Derivative data source for the function being extended.
pub trait DerivOracle {
    /// `(D^α D̄^β f)(w)` for one complex variable.
    fn deriv(&self, alpha: u32, beta: u32, w: &Complex, prec: u32) -> Complex;
}

/// The Gevrey-class model function `f(x) = exp(-(1-|x|²)^{-1/(a-1)})` on
/// `|x| < 1` (0 outside), with derivatives supplied by a memoized symbolic
/// recurrence.
///
/// Every derivative is a finite sum of terms `c·x^p·x̄^q·u^{-(r+t·s)}·E`
/// with `u = 1-|x|²`, `s = 1/(a-1)`, `E = exp(-u^{-s})`; differentiation
/// maps each term to three and the sum is re-merged on the key `(p,q,r,t)`.
pub struct GevreyModel {
    pub a: Rational,
    s: Rational,
    memo: RefCell<HashMap<(u32, u32), Vec<((u32, u32, u32, u32), Rational)>>>,
}

impl GevreyModel {
    pub fn new(a: Rational) -> Result<Self> {
        if a <= 1 {
            return Err(Error::InvalidInput("Gevrey index a must be > 1".into()));
        }
        let s = (&a - Rational::from(1)).recip();
        let memo = RefCell::new(HashMap::from([(
            (0, 0),
            vec![((0, 0, 0, 0), Rational::from(1))],
        )]));
        Ok(GevreyModel { a, s, memo })
    }

    fn terms(&self, alpha: u32, beta: u32) -> Vec<((u32, u32, u32, u32), Rational)> {
        if let Some(t) = self.memo.borrow().get(&(alpha, beta)) {
            return t.clone();
        }
        let (pa, pb, conj) = if alpha > 0 {
            (alpha - 1, beta, false)
        } else {
            (alpha, beta - 1, true)
        };
        let parent = self.terms(pa, pb);
        let mut next: HashMap<(u32, u32, u32, u32), Rational> = HashMap::new();
        let mut push = |key: (u32, u32, u32, u32), c: Rational| {
            if c == 0 {
                return;
            }
            let e = next.entry(key).or_insert_with(Rational::new);
            *e += c;
        };
        for ((p, q, r, t), c) in &parent {
            let w = Rational::from(*r) + Rational::from(*t) * &self.s;
            if !conj {
                // d/dx
                if *p > 0 {
                    push((*p - 1, *q, *r, *t), c * Rational::from(*p));
                }
                push((*p, *q + 1, *r + 1, *t), (c * &w).complete());
                push((*p, *q + 1, *r + 1, *t + 1), -(c * &self.s).complete());
            } else {
                // d/dx̄
                if *q > 0 {
                    push((*p, *q - 1, *r, *t), c * Rational::from(*q));
                }
                push((*p + 1, *q, *r + 1, *t), (c * &w).complete());
                push((*p + 1, *q, *r + 1, *t + 1), -(c * &self.s).complete());
            }
        }
        let mut out: Vec<_> = next.into_iter().filter(|(_, c)| *c != 0).collect();
        out.sort_by_key(|(k, _)| *k);
        self.memo.borrow_mut().insert((alpha, beta), out.clone());
        out
    }
}

impl DerivOracle for GevreyModel {
    fn deriv(&self, alpha: u32, beta: u32, w: &Complex, prec: u32) -> Complex {
        let u = Float::with_val(prec, 1)
            - Float::with_val(prec, w.clone().norm().into_real_imag().0);
        if !(u > 0) {
            return Complex::new(prec);
        }
        let terms = self.terms(alpha, beta);
        let s_f = Float::with_val(prec, &self.s);
        let ln_u = u.clone().ln();
        // u^{-s} and E = exp(-u^{-s})
        let u_ms = (-(s_f * ln_u.clone())).exp();
        let e_factor = (-u_ms.clone()).exp();
        let max_of = |sel: fn(&(u32, u32, u32, u32)) -> u32| {
            terms.iter().map(|(k, _)| sel(k)).max().unwrap_or(0)
        };
        let pow_table = |base: Complex, max: u32| -> Vec<Complex> {
            let mut v = Vec::with_capacity(max as usize + 1);
            v.push(Complex::with_val(prec, (1, 0)));
            for i in 1..=max as usize {
                let next = Complex::with_val(prec, &v[i - 1] * &base);
                v.push(next);
            }
            v
        };
        let real_pow_table = |base: Float, max: u32| -> Vec<Float> {
            let mut v = Vec::with_capacity(max as usize + 1);
            v.push(Float::with_val(prec, 1));
            for i in 1..=max as usize {
                let next = Float::with_val(prec, &v[i - 1] * &base);
                v.push(next);
            }
            v
        };
        let xp = pow_table(w.clone(), max_of(|k| k.0));
        let xq = pow_table(Complex::with_val(prec, w.conj_ref()), max_of(|k| k.1));
        let u_inv = Float::with_val(prec, u.recip_ref());
        let ur = real_pow_table(u_inv, max_of(|k| k.2));
        let ut = real_pow_table(u_ms, max_of(|k| k.3));
        let mut acc = Complex::new(prec);
        for ((p, q, r, t), c) in &terms {
            let mut term = Complex::with_val(prec, &xp[*p as usize] * &xq[*q as usize]);
            term *= &ur[*r as usize];
            term *= &ut[*t as usize];
            term *= Float::with_val(prec, c);
            acc += term;
        }
        acc * e_factor
    }
}

/// `f ≡ 1` (analytic degenerate case).
pub struct ConstantOracle;

impl DerivOracle for ConstantOracle {
    fn deriv(&self, alpha: u32, beta: u32, _w: &Complex, prec: u32) -> Complex {
        if alpha == 0 && beta == 0 {
            Complex::with_val(prec, (1, 0))
        } else {
            Complex::new(prec)
        }
    }
}

/// `f(x) = x·x̄` (analytic; its extension polarizes to y·z).
pub struct AbsSquaredOracle;

impl DerivOracle for AbsSquaredOracle {
    fn deriv(&self, alpha: u32, beta: u32, w: &Complex, prec: u32) -> Complex {
        match (alpha, beta) {
            (0, 0) => Complex::with_val(prec, w.clone().norm().into_real_imag().0),
            (1, 0) => Complex::with_val(prec, w.conj_ref()),
            (0, 1) => w.clone(),
            (1, 1) => Complex::with_val(prec, (1, 0)),
            _ => Complex::new(prec),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DbarDirection {
    YBar,
    ZBar,
}

/// Borel-sum evaluator of the almost-holomorphic extension
/// `F(f)(y, z) = Σ f_{αβ}((y+z̄)/2)/(α!β!)·Y^α Z^β·χ(N^{2(a-1)} 4^{a-1} C1² |y-z̄|²)`
/// with `Y = (y-z̄)/2`, `Z = (z-ȳ)/2`, `N = α+β`.
pub struct ExtensionEvaluator<O: DerivOracle> {
    pub oracle: O,
    pub a: Rational,
    pub c1: Float,
    pub cutoff: GevreyCutoff,
    pub term_budget: u32,
    pub prec: u32,
}

impl<O: DerivOracle> ExtensionEvaluator<O> {
    pub fn new(
        oracle: O,
        a: Rational,
        c1: Float,
        eps_cut: f64,
        term_budget: u32,
        prec: u32,
    ) -> Result<Self> {
        if c1 <= 0 {
            return Err(Error::InvalidInput("C1 must be positive".into()));
        }
        let cutoff = GevreyCutoff::build(eps_cut, prec)?;
        Ok(ExtensionEvaluator {
            oracle,
            a,
            c1,
            cutoff,
            term_budget,
            prec,
        })
    }

    /// Cutoff argument `N^{2(a-1)}·4^{a-1}·C1²·r²`.
    pub fn chi_arg(&self, n: u32, r2: &Float) -> Float {
        let prec = self.prec;
        if n == 0 {
            return Float::new(prec);
        }
        let am1 = Float::with_val(prec, &self.a) - 1u32;
        let n_pow = (Float::with_val(prec, n).ln() * 2u32 * am1.clone()).exp();
        let four_pow = (Float::with_val(prec, 4).ln() * am1).exp();
        n_pow * four_pow * self.c1.clone().square() * r2.clone()
    }

    fn geometry(&self, y: &Complex, z: &Complex) -> (Complex, Complex, Complex, Complex, Float) {
        let prec = self.prec;
        let zbar = Complex::with_val(prec, z.conj_ref());
        let ybar = Complex::with_val(prec, y.conj_ref());
        let w = Complex::with_val(prec, y + &zbar) / 2u32;
        let d = Complex::with_val(prec, y - &zbar); // y - z̄
        let yy = d.clone() / 2u32;
        let zz = Complex::with_val(prec, z - &ybar) / 2u32;
        let r2 = d.clone().norm().into_real_imag().0;
        (w, yy, zz, d, r2)
    }

    /// Exact finite sum for y ≠ z̄; `f((y+z̄)/2)` on the diagonal.
    pub fn extend(&self, y: &Complex, z: &Complex) -> Result<Complex> {
        let prec = self.prec;
        let (w, yy, zz, _d, r2) = self.geometry(y, z);
        if r2.is_zero() {
            return Ok(self.oracle.deriv(0, 0, &w, prec));
        }
        let mut acc = Complex::new(prec);
        let mut n = 0u32;
        loop {
            let arg = self.chi_arg(n, &r2);
            if arg >= 1 {
                break;
            }
            if n > self.term_budget {
                return Err(Error::TermBudgetExceeded {
                    budget: self.term_budget as usize,
                });
            }
            let chi = self.cutoff.chi(&arg);
            if !chi.is_zero() {
                acc += self.order_sum(n, &w, &yy, &zz, 0, 0) * chi;
            }
            n += 1;
        }
        Ok(acc)
    }

    /// `Σ_{α+β=n} f_{α+da, β+db}(w)/(α!β!)·Y^α Z^β`.
    fn order_sum(&self, n: u32, w: &Complex, yy: &Complex, zz: &Complex, da: u32, db: u32) -> Complex {
        let prec = self.prec;
        let mut sum = Complex::new(prec);
        for alpha in 0..=n {
            let beta = n - alpha;
            let f = self.oracle.deriv(alpha + da, beta + db, w, prec);
            if f.is_zero() {
                continue;
            }
            let denom = Integer::factorial(alpha).complete() * Integer::factorial(beta).complete();
            let mut term = f;
            for _ in 0..alpha {
                term *= yy;
            }
            for _ in 0..beta {
                term *= zz;
            }
            term /= Float::with_val(prec, denom);
            sum += term;
        }
        sum
    }

    /// Wirtinger derivative `D_ȳ F` or `D_z̄ F`, evaluated analytically.
    ///
    /// Differentiating the finite sum and reindexing cancels everything
    /// outside the cutoff transition band:
    ///   `D_ȳ F = Σ f_{α,β+1}/(2 α!β!)·Y^α Z^β·(χ_N - χ_{N+1})
    ///          + (y-z̄)·Σ f_{αβ}/(α!β!)·Y^α Z^β·c_N·χ'(c_N r²)`
    /// and the mirror formula for `D_z̄` (with `f_{α+1,β}` and prefactor
    /// `-(ȳ-z)`). Every retained term is individually exponentially small;
    /// no large cancellations occur.
    pub fn dbar_extension(&self, y: &Complex, z: &Complex, which: DbarDirection) -> Result<Complex> {
        let prec = self.prec;
        let (w, yy, zz, d, r2) = self.geometry(y, z);
        if r2.is_zero() {
            return Err(Error::InvalidInput(
                "dbar is measured off the diagonal (y != z̄)".into(),
            ));
        }
        let mut acc = Complex::new(prec);
        let mut n = 0u32;
        loop {
            let arg = self.chi_arg(n, &r2);
            if arg >= 1 {
                break;
            }
            if n > self.term_budget {
                return Err(Error::TermBudgetExceeded {
                    budget: self.term_budget as usize,
                });
            }
            let arg_next = self.chi_arg(n + 1, &r2);
            let chi_n = self.cutoff.chi(&arg);
            let chi_n1 = self.cutoff.chi(&arg_next);
            let chi_diff = Float::with_val(prec, &chi_n - &chi_n1);
            if !chi_diff.is_zero() {
                let (da, db) = match which {
                    DbarDirection::YBar => (0, 1),
                    DbarDirection::ZBar => (1, 0),
                };
                let s = self.order_sum(n, &w, &yy, &zz, da, db);
                acc += s * chi_diff / 2u32;
            }
            // transition-band derivative of the cutoff argument
            let chi_p = self.cutoff.chi_prime(&arg);
            if !chi_p.is_zero() {
                let c_n = self.chi_arg(n, &Float::with_val(prec, 1));
                let s = self.order_sum(n, &w, &yy, &zz, 0, 0);
                let pref = match which {
                    DbarDirection::YBar => d.clone(),
                    DbarDirection::ZBar => -Complex::with_val(prec, d.conj_ref()),
                };
                acc += s * pref * c_n * chi_p;
            }
            n += 1;
        }
        Ok(acc)
    }

    /// Central-difference cross-check for `dbar_extension` with step `h`
    /// (valid because `extend` is exact at every stencil point).
    pub fn dbar_finite_difference(
        &self,
        y: &Complex,
        z: &Complex,
        which: DbarDirection,
        h: &Float,
    ) -> Result<Complex> {
        let prec = self.prec;
        let shift = |re: &Float, im: &Float| -> (Complex, Complex) {
            let delta = Complex::with_val(prec, (re, im));
            match which {
                DbarDirection::YBar => (Complex::with_val(prec, y + &delta), z.clone()),
                DbarDirection::ZBar => (y.clone(), Complex::with_val(prec, z + &delta)),
            }
        };
        let zero = Float::new(prec);
        let eval = |p: (Complex, Complex)| self.extend(&p.0, &p.1);
        let fp = eval(shift(h, &zero))?;
        let fm = eval(shift(&(-h.clone()), &zero))?;
        let d_re = Complex::with_val(prec, &fp - &fm) / (Float::with_val(prec, 2) * h.clone());
        let fp = eval(shift(&zero, h))?;
        let fm = eval(shift(&zero, &(-h.clone())))?;
        let d_im = Complex::with_val(prec, &fp - &fm) / (Float::with_val(prec, 2) * h.clone());
        // D̄ = (∂_re + i ∂_im)/2
        let i_unit = Complex::with_val(prec, (0, 1));
        Ok((d_re + d_im * i_unit) / 2u32)
    }
}

/// Estimate the derivative-growth constant of an oracle:
/// `2·max over 1 <= α+β <= ord of (|f_{αβ}(x)|/(α!β!)^a)^{1/(α+β)}`
/// sampled at a few real points.
pub fn estimate_c1<O: DerivOracle>(oracle: &O, a: &Rational, ord: u32, prec: u32) -> Float {
    let a_f = Float::with_val(prec, a);
    let mut best = Float::new(prec);
    for &x in &[0.0f64, 0.25, 0.5] {
        let w = Complex::with_val(prec, (x, 0));
        for alpha in 0..=ord {
            for beta in 0..=ord - alpha {
                if alpha + beta == 0 {
                    continue;
                }
                let v = oracle
                    .deriv(alpha, beta, &w, prec)
                    .abs()
                    .into_real_imag()
                    .0;
                if !(v > 0) {
                    continue;
                }
                let denom_ln = Float::with_val(
                    prec,
                    Integer::factorial(alpha).complete() * Integer::factorial(beta).complete(),
                )
                .ln()
                    * a_f.clone();
                let ratio_ln =
                    (v.ln() - denom_ln) / Float::with_val(prec, alpha + beta);
                let val = ratio_ln.exp();
                if val > best {
                    best = val;
                }
            }
        }
    }
    if best.is_zero() {
        Float::with_val(prec, 1)
    } else {
        best * 2u32
    }
}

/// Fit `log(-log |D̄F|) = const - s·log r` over the given displacement radii
/// (the expected slope is `s = 1/(a-1)`). Points with zero magnitude are
/// dropped; fewer than 3 usable points is an error.
pub fn vanishing_rate_fit<O: DerivOracle>(
    ev: &ExtensionEvaluator<O>,
    base: f64,
    radii: &[f64],
    which: DbarDirection,
) -> Result<FitResult> {
    let prec = ev.prec;
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for &r in radii {
        let y = Complex::with_val(prec, (base + r / 2.0, 0));
        let z = Complex::with_val(prec, (base - r / 2.0, 0));
        let mag = ev
            .dbar_extension(&y, &z, which)?
            .abs()
            .into_real_imag()
            .0;
        if !(mag > 0) {
            continue;
        }
        let neg_log = -mag.ln();
        if !(neg_log > 0) {
            continue;
        }
        pts.push((r.ln(), neg_log.to_f64().ln()));
    }
    if pts.len() < 3 {
        return Err(Error::BelowNoiseFloor);
    }
    let nf = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (nf * sxy - sx * sy) / (nf * sxx - sx * sx);
    let intercept = (sy - slope * sx) / nf;
    let ybar = sy / nf;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for &(x, y) in &pts {
        let fit = intercept + slope * x;
        ss_res += (y - fit) * (y - fit);
        ss_tot += (y - ybar) * (y - ybar);
    }
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(FitResult {
        log_c: intercept,
        sigma: -slope,
        r_squared,
        m_range: (0, pts.len() - 1),
    })
}
