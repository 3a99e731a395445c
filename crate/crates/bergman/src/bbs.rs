//! The stationary-phase calculus producing the Bergman kernel expansion
//! coefficients: the blended phase θ, the Jacobian ratio Δ₀, the S operator,
//! the amplitude system (a, A), and the coefficient recursion for b_m.
//!
//! Variable frames, with n the complex dimension:
//!  - `(x, z)`: 2n variables, the frame of ψ and of the output b_m;
//!  - `(x, y, z)` / `(x, y, θ)`: 3n variables, the amplitude frames.
//! All jets are centered at the origin of a Bochner chart, where θ(0,0,0) = 0.

use crate::error::{Error, Result};
use crate::jet::{
    affine_blend_integral, blend_y_with_x, invert_map, jet_determinant, Jet, JetVec, MultiIndex,
};
use crate::potential::{bochner_check, PotentialModel};
use crate::scalar::{ComplexScalar, Scalar, ScalarMode};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// A truncated formal series in 1/k whose coefficients are jets in a common
/// 3n-variable frame.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSeries {
    /// terms[m] multiplies k^{-m}
    pub terms: Vec<Jet>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SDirection {
    Forward,
    Inverse,
}

/// Computed coefficient jets b_m(x, z), m = 0..=m_max.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub model: String,
    pub m_max: usize,
    pub t_used: u32,
    pub scalar_mode: String,
    pub b: Vec<Jet>,
}

impl CoefficientTable {
    /// `sum_alpha |coeff| r^{|alpha|}` per order, an upper proxy for the sup
    /// norm of b_m on the polydisc of radius r.
    pub fn sup_majorant(&self, r: f64) -> Vec<f64> {
        self.b.iter().map(|j| j.sup_majorant(r)).collect()
    }

    /// Diagonal values b_m(p, conj(p)) (the constant terms).
    pub fn diagonal_values(&self) -> Vec<ComplexScalar> {
        self.b.iter().map(|j| j.constant_term()).collect()
    }

    pub fn to_csv(&self, r: f64) -> String {
        let mut out = String::from("m,b_diag_re,b_diag_im,sup_majorant\n");
        for (m, jet) in self.b.iter().enumerate() {
            let c = jet.constant_term();
            out.push_str(&format!(
                "{},{},{},{}\n",
                m,
                c.re.to_f64(),
                c.im.to_f64(),
                jet.sup_majorant(r)
            ));
        }
        out
    }
}

/// The frame data shared by every operation downstream of a model:
/// ψ, θ, the inverse map z(x, y, τ), and Δ₀.
#[derive(Debug, Clone)]
pub struct Frames {
    pub n: usize,
    pub t: u32,
    pub mode: ScalarMode,
    /// ψ(x, z), 2n variables, truncation T
    pub psi: Jet,
    /// ψ_{x_i}(x, z), truncation T-1
    pub psi_x: Vec<Jet>,
    /// θ(x, y, z), truncation T-1
    pub theta: JetVec,
    /// z(x, y, τ), truncation T-1
    pub zmap: JetVec,
    /// Δ₀(x, y, θ), truncation T-2
    pub delta0: Jet,
}

fn origin(d: usize, mode: ScalarMode) -> Vec<ComplexScalar> {
    vec![ComplexScalar::zero(mode); d]
}

fn coord(d: usize, t: u32, i: usize, mode: ScalarMode) -> Jet {
    Jet::coordinate(d, t, i, &origin(d, mode))
}

/// θ_i(x, y, z) = ∫₀¹ ψ_{x_i}(t x + (1-t) y, z) dt, termwise exact.
pub fn compute_theta(psi: &Jet, n: usize) -> Result<JetVec> {
    let mut comps = Vec::with_capacity(n);
    for i in 0..n {
        comps.push(affine_blend_integral(&psi.derive(i)?, n)?);
    }
    JetVec::new(comps)
}

/// Inverse map z(x, y, τ) with τ = θ - θ(0,0,0).
pub fn compute_z_of_theta(theta: &JetVec, n: usize) -> Result<JetVec> {
    invert_map(theta, n)
}

/// Δ₀(x, y, θ) = [det ψ_{yz}(y, z) / det θ_z(x, y, z)] composed with
/// z = z(x, y, τ). Constant term 1 in Bochner coordinates.
pub fn compute_delta0(psi: &Jet, theta: &JetVec, zmap: &JetVec, n: usize) -> Result<Jet> {
    let mode = psi.mode();
    let d = 3 * n;
    // ψ_{yz}: second derivatives of ψ(w, z), embedded with w in the y block
    let mut psi_yz = vec![vec![Jet::zero(d, 0, mode); n]; n];
    for i in 0..n {
        for j in 0..n {
            let der = psi.derive(i)?.derive(n + j)?;
            let embedded = Jet::from_terms(
                d,
                der.trunc(),
                mode,
                origin(d, mode),
                der.terms().map(|(k, v)| {
                    let mut e = vec![0u32; d];
                    e[n..2 * n].copy_from_slice(&k.0[..n]);
                    e[2 * n..].copy_from_slice(&k.0[n..]);
                    (MultiIndex(e), v.clone())
                }),
            );
            psi_yz[i][j] = embedded;
        }
    }
    let mut theta_z = vec![vec![Jet::zero(d, 0, mode); n]; n];
    for i in 0..n {
        for j in 0..n {
            theta_z[i][j] = theta.0[i].derive(2 * n + j)?;
        }
    }
    let num = jet_determinant(&psi_yz)?;
    let den = jet_determinant(&theta_z)?;
    let ratio = num.mul(&den.reciprocal()?)?;
    // pull the (x, y, z) jet into the (x, y, θ) frame
    let trunc = ratio.trunc();
    let mut subs: Vec<Jet> = (0..2 * n).map(|i| coord(d, trunc, i, mode)).collect();
    subs.extend(zmap.0.iter().cloned());
    ratio.compose(&subs)
}

/// Build all frame data for a model.
pub fn build_frames(model: &PotentialModel, t: u32, mode: ScalarMode) -> Result<Frames> {
    let report = bochner_check(model);
    if !report.pass {
        return Err(Error::NotBochner(model.name.clone()));
    }
    let n = model.n;
    let psi = model.psi_jet(t, mode)?;
    let psi_x: Vec<Jet> = (0..n)
        .map(|i| psi.derive(i))
        .collect::<Result<Vec<_>>>()?;
    let theta = compute_theta(&psi, n)?;
    let zmap = compute_z_of_theta(&theta, n)?;
    let delta0 = compute_delta0(&psi, &theta, &zmap, n)?;
    Ok(Frames {
        n,
        t,
        mode,
        psi,
        psi_x,
        theta,
        zmap,
        delta0,
    })
}

/// `(D_y · D_θ) f = sum_i d²f / dy_i dθ_i` in the `(x, y, θ)` frame.
pub fn dy_dtheta(f: &Jet, n: usize) -> Result<Jet> {
    let mut acc = Jet::zero(f.d(), f.trunc().saturating_sub(2), f.mode());
    for i in 0..n {
        acc = acc.add(&f.derive(n + i)?.derive(2 * n + i)?)?;
    }
    Ok(acc)
}

/// Substitute y = x: jet in `(x, y, θ)` -> jet in `(x, θ)` (2n variables),
/// merging the y exponents into the x block.
pub fn restrict_y_to_x(f: &Jet, n: usize) -> Jet {
    Jet::from_terms(
        2 * n,
        f.trunc(),
        f.mode(),
        origin(2 * n, f.mode()),
        f.terms().map(|(k, v)| {
            let mut e = vec![0u32; 2 * n];
            for i in 0..n {
                e[i] = k.0[i] + k.0[n + i];
            }
            e[n..].copy_from_slice(&k.0[2 * n..]);
            (MultiIndex(e), v.clone())
        }),
    )
}

/// `(S^{±1} a)_m = sum_{i+j=m} (±1)^i (D_θ·D_y)^i a_j / i!`.
pub fn apply_s(series: &AmplitudeSeries, n: usize, direction: SDirection) -> Result<AmplitudeSeries> {
    let m_max = series.terms.len();
    let mode = series.terms[0].mode();
    let mut out = Vec::with_capacity(m_max);
    for m in 0..m_max {
        let mut acc = Jet::zero(series.terms[0].d(), 0, mode);
        let mut acc_set = false;
        let mut fact = rug::Integer::from(1);
        for i in 0..=m {
            if i > 0 {
                fact *= i as u32;
            }
            let j = m - i;
            // (D_θ·D_y)^i a_j
            let der = iterated_dy_dtheta(&series.terms[j], i, n)?;
            if der.is_zero() {
                continue;
            }
            let sign = match direction {
                SDirection::Forward => 1,
                SDirection::Inverse => {
                    if i % 2 == 0 {
                        1
                    } else {
                        -1
                    }
                }
            };
            let w = match mode {
                ScalarMode::ExactRational => Scalar::Rational(rug::Rational::from((
                    rug::Integer::from(sign),
                    fact.clone(),
                ))),
                ScalarMode::BigFloat(p) => Scalar::BigFloat(
                    rug::Float::with_val(p, rug::Rational::from((rug::Integer::from(sign), fact.clone()))),
                ),
            };
            let term = der.scale(&ComplexScalar::from_real(w));
            acc = if acc_set { acc.add(&term)? } else { term };
            acc_set = true;
        }
        if !acc_set {
            acc = Jet::zero(
                series.terms[0].d(),
                series.terms[m].trunc().saturating_sub(2 * m as u32),
                mode,
            );
        }
        out.push(acc);
    }
    Ok(AmplitudeSeries { terms: out })
}

fn iterated_dy_dtheta(f: &Jet, times: usize, n: usize) -> Result<Jet> {
    let mut g = f.clone();
    for _ in 0..times {
        if g.is_zero() {
            return Ok(g);
        }
        g = dy_dtheta(&g, n)?;
    }
    Ok(g)
}

/// Output of `compute_amplitudes`: the amplitude series a, its transform Sa,
/// and the vector series SA and A (outer index m, inner index the vector
/// component i = 0..n).
#[derive(Debug, Clone)]
pub struct Amplitudes {
    pub a: AmplitudeSeries,
    pub sa: AmplitudeSeries,
    pub sa_vec: Vec<Vec<Jet>>,
    pub a_vec: Vec<Vec<Jet>>,
}

/// Amplitudes from a coefficient table:
/// a₀ = Δ₀ - 1, a_m = b_m(x, z(x,y,θ))·Δ₀;
/// (SA)ᵢ_m = -∫₀¹ D_{y_i}(Sa)_{m-1}(x, tx+(1-t)y, θ) dt, (SA)_0 = 0;
/// A = S⁻¹(SA).
pub fn compute_amplitudes(
    frames: &Frames,
    table: &CoefficientTable,
    m_max: usize,
) -> Result<Amplitudes> {
    let n = frames.n;
    let mode = frames.mode;
    let d = 3 * n;
    if table.b.len() <= m_max {
        return Err(Error::InvalidInput(format!(
            "coefficient table has {} orders, need {}",
            table.b.len(),
            m_max + 1
        )));
    }
    let mut a_terms = Vec::with_capacity(m_max + 1);
    let one = Jet::one(d, frames.delta0.trunc(), mode);
    a_terms.push(frames.delta0.sub(&one)?);
    for bm in table.b.iter().take(m_max + 1).skip(1) {
        let big_b = compose_with_zmap(bm, frames)?;
        a_terms.push(big_b.mul(&frames.delta0)?);
    }
    let a = AmplitudeSeries { terms: a_terms };
    let sa = apply_s(&a, n, SDirection::Forward)?;
    // vector series SA, one order longer than a
    let mut sa_vec: Vec<Vec<Jet>> = Vec::with_capacity(m_max + 2);
    sa_vec.push(vec![Jet::zero(d, frames.t, mode); n]);
    for m in 1..=m_max + 1 {
        let prev = &sa.terms[m - 1];
        let mut comps = Vec::with_capacity(n);
        for i in 0..n {
            let der = prev.derive(n + i)?;
            comps.push(blend_y_with_x(&der, n)?.neg());
        }
        sa_vec.push(comps);
    }
    // A = S⁻¹ SA, componentwise
    let mut a_vec: Vec<Vec<Jet>> = vec![Vec::new(); m_max + 2];
    for i in 0..n {
        let comp = AmplitudeSeries {
            terms: sa_vec.iter().map(|v| v[i].clone()).collect(),
        };
        let inv = apply_s(&comp, n, SDirection::Inverse)?;
        for (m, jet) in inv.terms.into_iter().enumerate() {
            a_vec[m].push(jet);
        }
    }
    Ok(Amplitudes {
        a,
        sa,
        sa_vec,
        a_vec,
    })
}

/// b_m(x, z) composed with z = z(x, y, θ), yielding a jet in `(x, y, θ)`.
fn compose_with_zmap(bm: &Jet, frames: &Frames) -> Result<Jet> {
    let n = frames.n;
    let d = 3 * n;
    let trunc = bm.trunc().min(frames.zmap.0[0].trunc());
    let mut subs: Vec<Jet> = (0..n).map(|i| coord(d, trunc, i, frames.mode)).collect();
    subs.extend(frames.zmap.0.iter().cloned());
    bm.compose(&subs)
}

/// Per-order negligibility residuals
/// `r_m = a_m - D_θ·A_m - (x - y)·A_{m+1}` for m = 0..=m_max, together with
/// the tail term `D_θ·A_{m_max+1}`.
///
/// When every `r_m` vanishes, the truncated series satisfy
/// `a^{(N)} - ∇A^{(N+1)} = -k^{-(N+1)} D_θ·A_{N+1}` with
/// `∇A = D_θ·A + k (x-y)·A`.
pub fn negligibility_residuals(amps: &Amplitudes, n: usize) -> Result<(Vec<Jet>, Jet)> {
    let d = 3 * n;
    let m_max = amps.a.terms.len() - 1;
    let mode = amps.a.terms[0].mode();
    let mut residuals = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        let mut r = amps.a.terms[m].clone();
        r = r.sub(&div_theta(&amps.a_vec[m], n)?)?;
        for i in 0..n {
            let t = amps.a_vec[m + 1][i].trunc();
            let xmy = coord(d, t, i, mode).sub(&coord(d, t, n + i, mode))?;
            r = r.sub(&xmy.mul(&amps.a_vec[m + 1][i])?)?;
        }
        residuals.push(r);
    }
    let tail = div_theta(&amps.a_vec[m_max + 1], n)?;
    Ok((residuals, tail))
}

/// `D_θ·A = sum_i dA_i/dθ_i`.
fn div_theta(a: &[Jet], n: usize) -> Result<Jet> {
    let mut acc = a[0].derive(2 * n)?;
    for (i, comp) in a.iter().enumerate().skip(1) {
        acc = acc.add(&comp.derive(2 * n + i)?)?;
    }
    Ok(acc)
}

/// The coefficient recursion. Requires T >= 2·m_max + q + 2 to guarantee
/// output degree q in every b_m; the resulting jets carry their tightest
/// valid truncation (T - 2 - 2m).
pub fn compute_bm(
    model: &PotentialModel,
    m_max: usize,
    t: u32,
    mode: ScalarMode,
) -> Result<CoefficientTable> {
    if t < 2 * m_max as u32 + 2 {
        return Err(Error::InvalidInput(format!(
            "truncation {t} too small for m_max {m_max}: need T >= 2*m_max + q + 2"
        )));
    }
    let frames = build_frames(model, t, mode)?;
    let table = compute_bm_with_frames(&frames, model, m_max)?;
    Ok(table)
}

pub fn compute_bm_with_frames(
    frames: &Frames,
    model: &PotentialModel,
    m_max: usize,
) -> Result<CoefficientTable> {
    let n = frames.n;
    let mode = frames.mode;
    let mut b: Vec<Jet> = vec![Jet::one(2 * n, frames.t, mode)];
    // cache of (D_y·D_θ)^l (b_j(x, z(x,y,θ))·Δ₀), keyed by (j, l)
    let mut cache: HashMap<(usize, usize), Jet> = HashMap::new();
    for m in 1..=m_max {
        let mut rhs: Option<Jet> = None;
        let mut fact = rug::Integer::from(1);
        for l in 1..=m {
            fact *= l as u32;
            let j = m - l;
            let der = derivative_of_product(frames, &b, &mut cache, j, l)?;
            if der.is_zero() {
                continue;
            }
            let w = match mode {
                ScalarMode::ExactRational => Scalar::Rational(rug::Rational::from((
                    rug::Integer::from(-1),
                    fact.clone(),
                ))),
                ScalarMode::BigFloat(p) => Scalar::BigFloat(rug::Float::with_val(
                    p,
                    rug::Rational::from((rug::Integer::from(-1), fact.clone())),
                )),
            };
            let term = der.scale(&ComplexScalar::from_real(w));
            rhs = Some(match rhs {
                Some(acc) => acc.add(&term)?,
                None => term,
            });
        }
        let c_m = match rhs {
            // b_m(x, z(x,x,θ)) as a jet in (x, θ)
            Some(acc) => restrict_y_to_x(&acc, n),
            None => Jet::zero(2 * n, frames.t.saturating_sub(2 + 2 * m as u32), mode),
        };
        // pull back through θ = ψ_x(x, z): b_m(x, z) = C_m(x, ψ_x(x, z))
        let trunc = c_m.trunc();
        let mut subs: Vec<Jet> = (0..n).map(|i| coord(2 * n, trunc, i, mode)).collect();
        for i in 0..n {
            subs.push(frames.psi_x[i].truncated(trunc));
        }
        b.push(c_m.compose(&subs)?);
    }
    Ok(CoefficientTable {
        model: model.name.clone(),
        m_max,
        t_used: frames.t,
        scalar_mode: mode.to_string(),
        b,
    })
}

fn derivative_of_product(
    frames: &Frames,
    b: &[Jet],
    cache: &mut HashMap<(usize, usize), Jet>,
    j: usize,
    l: usize,
) -> Result<Jet> {
    if !cache.contains_key(&(j, l)) {
        let v = if l == 0 {
            if j == 0 {
                frames.delta0.clone()
            } else {
                compose_with_zmap(&b[j], frames)?.mul(&frames.delta0)?
            }
        } else {
            let prev = derivative_of_product(frames, b, cache, j, l - 1)?;
            dy_dtheta(&prev, frames.n)?
        };
        cache.insert((j, l), v);
    }
    Ok(cache[&(j, l)].clone())
}
