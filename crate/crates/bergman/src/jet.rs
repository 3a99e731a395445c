//! Truncated multivariate power series ("jets") with exact or big-float
//! complex coefficients.
//!
//! A jet stores the Taylor coefficients of a germ at `base_point` up to a
//! total degree `trunc`. Coefficients are kept in a sorted map keyed by
//! graded-lexicographic multi-index so iteration order (and therefore every
//! serialized output) is deterministic. Zero coefficients are never stored.

use crate::error::{Error, Result};
use crate::scalar::{ComplexScalar, Scalar, ScalarMode};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// Exponent vector of a monomial; ordered by total degree, then
/// lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(d: usize) -> Self {
        MultiIndex(vec![0; d])
    }

    pub fn unit(d: usize, i: usize) -> Self {
        let mut v = vec![0; d];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Componentwise comparison `self <= other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.total()
            .cmp(&other.total())
            .then_with(|| self.0.cmp(&other.0))
    }
}

/// Truncated Taylor expansion at a base point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    d: usize,
    trunc: u32,
    mode: ScalarMode,
    base_point: Vec<ComplexScalar>,
    coeffs: BTreeMap<MultiIndex, ComplexScalar>,
}

impl Jet {
    pub fn zero(d: usize, trunc: u32, mode: ScalarMode) -> Self {
        Jet {
            d,
            trunc,
            mode,
            base_point: vec![ComplexScalar::zero(mode); d],
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(d: usize, trunc: u32, value: ComplexScalar) -> Self {
        let mode = value.mode();
        let mut j = Jet::zero(d, trunc, mode);
        j.set_coeff(MultiIndex::zero(d), value);
        j
    }

    pub fn one(d: usize, trunc: u32, mode: ScalarMode) -> Self {
        Jet::constant(d, trunc, ComplexScalar::one(mode))
    }

    /// The i-th coordinate function as a jet: `base_i + (v_i - base_i)`.
    pub fn coordinate(d: usize, trunc: u32, i: usize, base_point: &[ComplexScalar]) -> Self {
        assert!(i < d);
        assert_eq!(base_point.len(), d);
        let mode = base_point[0].mode();
        let mut j = Jet {
            d,
            trunc,
            mode,
            base_point: base_point.to_vec(),
            coeffs: BTreeMap::new(),
        };
        j.set_coeff(MultiIndex::zero(d), base_point[i].clone());
        if trunc >= 1 {
            j.set_coeff(MultiIndex::unit(d, i), ComplexScalar::one(mode));
        }
        j
    }

    pub fn with_base_point(mut self, base_point: Vec<ComplexScalar>) -> Self {
        assert_eq!(base_point.len(), self.d);
        self.base_point = base_point;
        self
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn mode(&self) -> ScalarMode {
        self.mode
    }

    pub fn base_point(&self) -> &[ComplexScalar] {
        &self.base_point
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, idx: &MultiIndex) -> ComplexScalar {
        self.coeffs
            .get(idx)
            .cloned()
            .unwrap_or_else(|| ComplexScalar::zero(self.mode))
    }

    pub fn constant_term(&self) -> ComplexScalar {
        self.coeff(&MultiIndex::zero(self.d))
    }

    pub fn set_coeff(&mut self, idx: MultiIndex, value: ComplexScalar) {
        assert_eq!(idx.len(), self.d);
        if idx.total() > self.trunc || value.is_zero() {
            self.coeffs.remove(&idx);
        } else {
            self.coeffs.insert(idx, value);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &ComplexScalar)> {
        self.coeffs.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    /// Largest total degree with a nonzero coefficient (0 for the zero jet).
    pub fn degree(&self) -> u32 {
        self.coeffs.keys().map(|k| k.total()).max().unwrap_or(0)
    }

    /// Lower the truncation degree, dropping higher terms.
    pub fn truncated(&self, trunc: u32) -> Jet {
        let mut out = self.clone();
        out.trunc = trunc.min(self.trunc);
        out.coeffs.retain(|k, _| k.total() <= out.trunc);
        out
    }

    fn check_compatible(&self, other: &Jet) -> Result<()> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: other.d,
            });
        }
        if self.mode != other.mode {
            return Err(Error::ScalarModeMismatch(format!(
                "{} vs {}",
                self.mode, other.mode
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        let trunc = self.trunc.min(other.trunc);
        let mut out = Jet {
            d: self.d,
            trunc,
            mode: self.mode,
            base_point: self.base_point.clone(),
            coeffs: BTreeMap::new(),
        };
        for (k, v) in self.coeffs.iter().chain(other.coeffs.iter()) {
            if k.total() > trunc {
                continue;
            }
            let cur = out.coeff(k);
            out.set_coeff(k.clone(), cur.add(v));
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Jet {
        let mut out = self.clone();
        for v in out.coeffs.values_mut() {
            *v = v.neg();
        }
        out
    }

    pub fn scale(&self, c: &ComplexScalar) -> Jet {
        let mut out = Jet {
            d: self.d,
            trunc: self.trunc,
            mode: self.mode,
            base_point: self.base_point.clone(),
            coeffs: BTreeMap::new(),
        };
        for (k, v) in &self.coeffs {
            out.set_coeff(k.clone(), v.mul(c));
        }
        out
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        let trunc = self.trunc.min(other.trunc);
        let mut acc: BTreeMap<MultiIndex, ComplexScalar> = BTreeMap::new();
        for (ka, va) in &self.coeffs {
            if ka.total() > trunc {
                continue;
            }
            for (kb, vb) in &other.coeffs {
                if ka.total() + kb.total() > trunc {
                    continue;
                }
                let k = ka.add(kb);
                let prod = va.mul(vb);
                match acc.get_mut(&k) {
                    Some(cur) => *cur = cur.add(&prod),
                    None => {
                        acc.insert(k, prod);
                    }
                }
            }
        }
        acc.retain(|_, v| !v.is_zero());
        Ok(Jet {
            d: self.d,
            trunc,
            mode: self.mode,
            base_point: self.base_point.clone(),
            coeffs: acc,
        })
    }

    /// Formal partial derivative in variable `var`; truncation drops by one.
    pub fn derive(&self, var: usize) -> Result<Jet> {
        if var >= self.d {
            return Err(Error::VarOutOfRange { var, d: self.d });
        }
        let trunc = self.trunc.saturating_sub(1);
        let mut out = Jet {
            d: self.d,
            trunc,
            mode: self.mode,
            base_point: self.base_point.clone(),
            coeffs: BTreeMap::new(),
        };
        for (k, v) in &self.coeffs {
            let e = k.0[var];
            if e == 0 {
                continue;
            }
            let mut nk = k.clone();
            nk.0[var] = e - 1;
            if nk.total() > trunc {
                continue;
            }
            let factor = Scalar::from_i64(e as i64, self.mode);
            out.set_coeff(nk, v.scale(&factor));
        }
        Ok(out)
    }

    /// Formal antiderivative in variable `var` (zero constant of integration
    /// in that variable); truncation rises by one.
    pub fn antiderive(&self, var: usize) -> Result<Jet> {
        if var >= self.d {
            return Err(Error::VarOutOfRange { var, d: self.d });
        }
        let mut out = Jet {
            d: self.d,
            trunc: self.trunc + 1,
            mode: self.mode,
            base_point: self.base_point.clone(),
            coeffs: BTreeMap::new(),
        };
        for (k, v) in &self.coeffs {
            let mut nk = k.clone();
            nk.0[var] += 1;
            let factor = Scalar::from_ratio(1, nk.0[var] as i64, self.mode);
            out.set_coeff(nk, v.scale(&factor));
        }
        Ok(out)
    }

    /// Multiplicative inverse up to the truncation degree.
    pub fn reciprocal(&self) -> Result<Jet> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(Error::ZeroConstantTerm("jet reciprocal".into()));
        }
        let inv_c0 = c0.reciprocal();
        // u = 1 - f/c0 has zero constant term, so the geometric series
        // terminates at the truncation degree.
        let u = Jet::one(self.d, self.trunc, self.mode).sub(&self.scale(&inv_c0))?;
        let mut acc = Jet::one(self.d, self.trunc, self.mode);
        let mut term = Jet::one(self.d, self.trunc, self.mode);
        for _ in 0..self.trunc {
            term = term.mul(&u)?;
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term)?;
        }
        Ok(acc.scale(&inv_c0).with_base_point(self.base_point.clone()))
    }

    /// Taylor composition `f(subs_1, ..., subs_d)`.
    ///
    /// Every `subs_i` must be a jet in a common source ring and its constant
    /// term must equal `f.base_point[i]`; no silent re-centering happens.
    pub fn compose(&self, subs: &[Jet]) -> Result<Jet> {
        if subs.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: subs.len(),
            });
        }
        let first = &subs[0];
        let mut trunc = self.trunc;
        for (i, s) in subs.iter().enumerate() {
            first.check_compatible(s)?;
            trunc = trunc.min(s.trunc);
            let ct = s.constant_term();
            if ct != self.base_point[i] {
                return Err(Error::CenteringViolated {
                    component: i,
                    got: format!("{}+{}i", ct.re.to_serialized(), ct.im.to_serialized()),
                    required: format!(
                        "{}+{}i",
                        self.base_point[i].re.to_serialized(),
                        self.base_point[i].im.to_serialized()
                    ),
                });
            }
        }
        let d_in = first.d;
        // Centered substituents: u_i = subs_i - base_i, so u_i has no
        // constant term and powers gain degree.
        let shifted: Vec<Jet> = subs
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let c = Jet::constant(d_in, trunc, self.base_point[i].clone())
                    .with_base_point(first.base_point.clone());
                s.truncated(trunc).sub(&c).unwrap()
            })
            .collect();
        let mut powers: HashMap<(usize, u32), Jet> = HashMap::new();
        let one = Jet::one(d_in, trunc, self.mode).with_base_point(first.base_point.to_vec());
        let mut result = Jet::zero(d_in, trunc, self.mode).with_base_point(first.base_point.to_vec());
        for (k, v) in &self.coeffs {
            let mut mono = one.clone();
            for (i, &e) in k.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let p = Self::power_of(&shifted[i], i, e, &mut powers)?;
                if p.is_zero() {
                    mono = Jet::zero(d_in, trunc, self.mode);
                    break;
                }
                mono = mono.mul(p)?;
            }
            if !mono.is_zero() {
                result = result.add(&mono.scale(v))?;
            }
        }
        Ok(result)
    }

    fn power_of<'a>(
        base: &Jet,
        i: usize,
        e: u32,
        powers: &'a mut HashMap<(usize, u32), Jet>,
    ) -> Result<&'a Jet> {
        if !powers.contains_key(&(i, e)) {
            let v = if e == 1 {
                base.clone()
            } else {
                let prev = Self::power_of(base, i, e - 1, powers)?.clone();
                prev.mul(base)?
            };
            powers.insert((i, e), v);
        }
        Ok(&powers[&(i, e)])
    }

    /// Evaluate the truncated series at a point (no tail control; callers
    /// are responsible for staying within the jet's useful radius).
    pub fn eval(&self, point: &[ComplexScalar]) -> ComplexScalar {
        assert_eq!(point.len(), self.d);
        let mode = point.first().map(|p| p.mode()).unwrap_or(self.mode);
        let diffs: Vec<ComplexScalar> = point
            .iter()
            .zip(&self.base_point)
            .map(|(p, b)| {
                let b = match mode {
                    ScalarMode::ExactRational => b.clone(),
                    ScalarMode::BigFloat(prec) => ComplexScalar::new(
                        Scalar::BigFloat(b.re.to_float(prec)),
                        Scalar::BigFloat(b.im.to_float(prec)),
                    ),
                };
                p.sub(&b)
            })
            .collect();
        let mut acc = ComplexScalar::zero(mode);
        for (k, v) in &self.coeffs {
            let mut term = match mode {
                ScalarMode::ExactRational => v.clone(),
                ScalarMode::BigFloat(prec) => ComplexScalar::new(
                    Scalar::BigFloat(v.re.to_float(prec)),
                    Scalar::BigFloat(v.im.to_float(prec)),
                ),
            };
            for (i, &e) in k.0.iter().enumerate() {
                for _ in 0..e {
                    term = term.mul(&diffs[i]);
                }
            }
            acc = acc.add(&term);
        }
        acc
    }

    /// `sum_alpha |c_alpha| r^{|alpha|}` — an upper proxy for the sup norm on
    /// the polydisc of radius `r` around the base point.
    pub fn sup_majorant(&self, r: f64) -> f64 {
        let mut acc = 0.0;
        for (k, v) in &self.coeffs {
            let m = v.norm_sq().to_f64().sqrt();
            acc += m * r.powi(k.total() as i32);
        }
        acc
    }

    /// Build a jet directly from terms (used by frame-change helpers).
    pub fn from_terms(
        d: usize,
        trunc: u32,
        mode: ScalarMode,
        base_point: Vec<ComplexScalar>,
        terms: impl IntoIterator<Item = (MultiIndex, ComplexScalar)>,
    ) -> Jet {
        let mut j = Jet {
            d,
            trunc,
            mode,
            base_point,
            coeffs: BTreeMap::new(),
        };
        for (k, v) in terms {
            let cur = j.coeff(&k);
            j.set_coeff(k, cur.add(&v));
        }
        j
    }
}

/// A vector of jets sharing dimension and truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct JetVec(pub Vec<Jet>);

impl JetVec {
    pub fn new(entries: Vec<Jet>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("JetVec must be non-empty".into()));
        }
        for e in &entries[1..] {
            entries[0].check_compatible(e)?;
        }
        Ok(JetVec(entries))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `1/(p+q+1) * 1/binom(p+q, p)` = `Beta(p+1, q+1)` as an exact scalar.
fn beta_weight(p: u32, q: u32, mode: ScalarMode) -> Scalar {
    let num = rug::Integer::factorial(p).complete() * rug::Integer::factorial(q).complete();
    let den = rug::Integer::factorial(p + q + 1).complete();
    let r = rug::Rational::from((num, den));
    match mode {
        ScalarMode::ExactRational => Scalar::Rational(r),
        ScalarMode::BigFloat(prec) => Scalar::BigFloat(rug::Float::with_val(prec, r)),
    }
}

fn binom_scalar(n: u32, k: u32, mode: ScalarMode) -> Scalar {
    let b = rug::Integer::binomial_u(n, k).complete();
    match mode {
        ScalarMode::ExactRational => Scalar::Rational(rug::Rational::from(b)),
        ScalarMode::BigFloat(prec) => Scalar::BigFloat(rug::Float::with_val(prec, b)),
    }
}

use rug::Complete as _;

/// `int_0^1 f(t x + (1-t) y, z) dt` computed termwise with exact rational
/// weights. Input: jet in `(w, z)` with `n + n` variables at base `(p, q)`;
/// output: jet in `(x, y, z)` with `3n` variables at base `(p, p, q)`.
pub fn affine_blend_integral(f: &Jet, n: usize) -> Result<Jet> {
    if f.d() != 2 * n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            got: f.d(),
        });
    }
    let mode = f.mode();
    let mut base = Vec::with_capacity(3 * n);
    base.extend_from_slice(&f.base_point()[..n]);
    base.extend_from_slice(&f.base_point()[..n]);
    base.extend_from_slice(&f.base_point()[n..]);
    let embedded: Vec<(MultiIndex, ComplexScalar)> = f
        .terms()
        .map(|(k, v)| {
            // place w-exponents in the y block
            let mut e = vec![0u32; 3 * n];
            e[n..2 * n].copy_from_slice(&k.0[..n]);
            e[2 * n..].copy_from_slice(&k.0[n..]);
            (MultiIndex(e), v.clone())
        })
        .collect();
    let g = Jet::from_terms(3 * n, f.trunc(), mode, base, embedded);
    blend_y_with_x(&g, n)
}

/// In-frame blend: for `f(x, y, z)` in `3n` variables, compute
/// `int_0^1 f(x, t x + (1-t) y, z) dt`.
///
/// The x and y blocks must share a base point (the blend of the base is then
/// the base itself, keeping the result centered).
pub fn blend_y_with_x(f: &Jet, n: usize) -> Result<Jet> {
    if f.d() < 2 * n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            got: f.d(),
        });
    }
    let d = f.d();
    let mode = f.mode();
    for i in 0..n {
        if f.base_point()[i] != f.base_point()[n + i] {
            return Err(Error::InvalidInput(
                "blend requires matching x and y base points".into(),
            ));
        }
    }
    let mut terms: Vec<(MultiIndex, ComplexScalar)> = Vec::new();
    for (k, v) in f.terms() {
        let beta = MultiIndex(k.0[n..2 * n].to_vec());
        // expand prod_i (t x_i + (1-t) y_i)^{beta_i} and integrate in t
        let mut splits: Vec<(MultiIndex, Scalar)> =
            vec![(MultiIndex::zero(n), Scalar::one(mode))];
        for i in 0..n {
            let b = beta.0[i];
            if b == 0 {
                continue;
            }
            let mut next = Vec::with_capacity(splits.len() * (b as usize + 1));
            for (sigma, w) in &splits {
                for s in 0..=b {
                    let mut ns = sigma.clone();
                    ns.0[i] = s;
                    next.push((ns, w.mul(&binom_scalar(b, s, mode))));
                }
            }
            splits = next;
        }
        for (sigma, w) in splits {
            let p = sigma.total();
            let q = beta.total() - p;
            let weight = w.mul(&beta_weight(p, q, mode));
            let mut e = k.0.clone();
            for i in 0..n {
                e[i] += sigma.0[i];
                e[n + i] = beta.0[i] - sigma.0[i];
            }
            terms.push((MultiIndex(e), v.scale(&weight)));
        }
    }
    Ok(Jet::from_terms(
        d,
        f.trunc(),
        mode,
        f.base_point().to_vec(),
        terms,
    ))
}

/// Invert the map `z -> theta(x, y, z)` as formal jets.
///
/// `theta` holds `n` jets in `(x, y, z)` (`3n` variables). The result is the
/// vector of jets `z_i(x, y, tau)` with `tau = theta - theta(base)`, such
/// that `theta(x, y, z(x, y, tau)) = theta(base) + tau` up to truncation.
/// Solved by Newton iteration; each round extends the correct degree by at
/// least one, so at most `trunc` rounds are needed.
pub fn invert_map(theta: &JetVec, n: usize) -> Result<JetVec> {
    let d = 3 * n;
    if theta.len() != n || theta.0[0].d() != d {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: theta.len(),
        });
    }
    let trunc = theta.0.iter().map(|j| j.trunc()).min().unwrap();
    let mode = theta.0[0].mode();
    let src_base = theta.0[0].base_point().to_vec();

    // constant Jacobian d theta_i / d z_j at the base point
    let mut jac = vec![vec![ComplexScalar::zero(mode); n]; n];
    for i in 0..n {
        for j in 0..n {
            jac[i][j] = theta.0[i].derive(2 * n + j)?.constant_term();
        }
    }
    let jac_inv = invert_matrix(&jac, mode)?;

    let theta0: Vec<ComplexScalar> = theta.0.iter().map(|t| t.constant_term()).collect();

    // target ring: variables (x, y, tau) at base (p_x, p_y, 0)
    let mut tgt_base = src_base.clone();
    for b in tgt_base[2 * n..].iter_mut() {
        *b = ComplexScalar::zero(mode);
    }
    let coord = |i: usize| Jet::coordinate(d, trunc, i, &tgt_base);

    // initial guess: z = p_z + J^{-1} tau
    let mut z: Vec<Jet> = (0..n)
        .map(|i| {
            let mut acc = Jet::constant(d, trunc, src_base[2 * n + i].clone())
                .with_base_point(tgt_base.clone());
            for j in 0..n {
                let tau_j = coord(2 * n + j);
                acc = acc.add(&tau_j.scale(&jac_inv[i][j])).unwrap();
            }
            acc
        })
        .collect();

    for _round in 0..=trunc {
        // residual r_i = theta_i(x, y, z) - theta0_i - tau_i
        let mut subs: Vec<Jet> = (0..2 * n).map(coord).collect();
        subs.extend(z.iter().cloned());
        let mut residual = Vec::with_capacity(n);
        let mut all_zero = true;
        for i in 0..n {
            let mut r = theta.0[i].compose(&subs)?;
            let c = Jet::constant(d, trunc, theta0[i].clone()).with_base_point(tgt_base.clone());
            r = r.sub(&c)?.sub(&coord(2 * n + i))?;
            if !r.is_zero() {
                all_zero = false;
            }
            residual.push(r);
        }
        if all_zero {
            return Ok(JetVec(z));
        }
        for i in 0..n {
            let mut corr = Jet::zero(d, trunc, mode).with_base_point(tgt_base.clone());
            for j in 0..n {
                corr = corr.add(&residual[j].scale(&jac_inv[i][j]))?;
            }
            z[i] = z[i].sub(&corr)?;
        }
    }
    Err(Error::InversionDiverged(trunc as usize))
}

fn invert_matrix(m: &[Vec<ComplexScalar>], mode: ScalarMode) -> Result<Vec<Vec<ComplexScalar>>> {
    let n = m.len();
    let mut a: Vec<Vec<ComplexScalar>> = m.to_vec();
    let mut inv = vec![vec![ComplexScalar::zero(mode); n]; n];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = ComplexScalar::one(mode);
    }
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero());
        let pivot = pivot.ok_or(Error::SingularJacobian)?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].reciprocal();
        for j in 0..n {
            a[col][j] = a[col][j].mul(&p);
            inv[col][j] = inv[col][j].mul(&p);
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                let t = a[col][j].mul(&f);
                a[r][j] = a[r][j].sub(&t);
                let t = inv[col][j].mul(&f);
                inv[r][j] = inv[r][j].sub(&t);
            }
        }
    }
    Ok(inv)
}

/// Determinant of an `n x n` matrix of jets (Leibniz expansion; fine for the
/// small `n` used here).
pub fn jet_determinant(m: &[Vec<Jet>]) -> Result<Jet> {
    let n = m.len();
    if n == 1 {
        return Ok(m[0][0].clone());
    }
    let mut acc = Jet::zero(m[0][0].d(), m[0][0].trunc(), m[0][0].mode())
        .with_base_point(m[0][0].base_point().to_vec());
    for j in 0..n {
        let minor: Vec<Vec<Jet>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, x)| x.clone())
                    .collect()
            })
            .collect();
        let cof = m[0][j].mul(&jet_determinant(&minor)?)?;
        acc = if j % 2 == 0 {
            acc.add(&cof)?
        } else {
            acc.sub(&cof)?
        };
    }
    Ok(acc)
}

// --- serialization -------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TermDto {
    exps: Vec<u32>,
    re: String,
    im: String,
}

#[derive(Serialize, Deserialize)]
struct JetDto {
    d: usize,
    #[serde(rename = "T")]
    t: u32,
    scalar_mode: String,
    base_point: Vec<[String; 2]>,
    terms: Vec<TermDto>,
}

impl Serialize for Jet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let dto = JetDto {
            d: self.d,
            t: self.trunc,
            scalar_mode: self.mode.to_string(),
            base_point: self
                .base_point
                .iter()
                .map(|c| [c.re.to_serialized(), c.im.to_serialized()])
                .collect(),
            terms: self
                .coeffs
                .iter()
                .map(|(k, v)| TermDto {
                    exps: k.0.clone(),
                    re: v.re.to_serialized(),
                    im: v.im.to_serialized(),
                })
                .collect(),
        };
        dto.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Jet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Jet, D::Error> {
        use serde::de::Error as DeError;
        let dto = JetDto::deserialize(deserializer)?;
        let mode = ScalarMode::parse(&dto.scalar_mode).map_err(DeError::custom)?;
        let base_point = dto
            .base_point
            .iter()
            .map(|[re, im]| {
                Ok(ComplexScalar::new(
                    Scalar::from_serialized(re, mode).map_err(DeError::custom)?,
                    Scalar::from_serialized(im, mode).map_err(DeError::custom)?,
                ))
            })
            .collect::<std::result::Result<Vec<_>, D::Error>>()?;
        let mut jet = Jet::zero(dto.d, dto.t, mode).with_base_point(base_point);
        for t in dto.terms {
            if t.exps.len() != dto.d {
                return Err(DeError::custom("term exponent length != d"));
            }
            let c = ComplexScalar::new(
                Scalar::from_serialized(&t.re, mode).map_err(DeError::custom)?,
                Scalar::from_serialized(&t.im, mode).map_err(DeError::custom)?,
            );
            jet.set_coeff(MultiIndex(t.exps), c);
        }
        Ok(jet)
    }
}
