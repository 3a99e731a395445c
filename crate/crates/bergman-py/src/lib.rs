//! Python bindings: potential models, coefficient tables, expansion
//! evaluation, kernel oracles, the majorant check, and the Gevrey extension.

use bergman::asymptotics::{compare_with_oracle, eval_expansion, log_kernel_residual, n0_of_k};
use bergman::bbs::{compute_bm, CoefficientTable};
use bergman::gevrey::{
    estimate_c1, vanishing_rate_fit, DbarDirection, ExtensionEvaluator, GevreyModel,
};
use bergman::growth::{check_lower_bound, growth_fit, MajorantMode, MajorantTable};
use bergman::oracle::monomial_norms;
use bergman::potential::{bochner_check, diastasis, PotentialModel};
use bergman::scalar::ScalarMode;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rug::float::Round;
use rug::{Complex, Rational};
use std::str::FromStr;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rat(s: &str) -> PyResult<Rational> {
    Rational::from_str(s).map_err(err)
}

fn cpx(re: f64, im: f64, prec: u32) -> Complex {
    Complex::with_val(prec, (re, im))
}

fn mode_of(scalar: &str) -> PyResult<ScalarMode> {
    ScalarMode::parse(scalar).map_err(err)
}

#[pyclass(name = "Model")]
#[derive(Clone)]
struct PyModel {
    inner: PotentialModel,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn bargmann_fock() -> Self {
        PyModel {
            inner: PotentialModel::bargmann_fock(1),
        }
    }

    #[staticmethod]
    fn fubini_study() -> Self {
        PyModel {
            inner: PotentialModel::fubini_study(1),
        }
    }

    #[staticmethod]
    fn quartic(c: &str) -> PyResult<Self> {
        Ok(PyModel {
            inner: PotentialModel::radial_quartic(rat(c)?),
        })
    }

    #[staticmethod]
    fn radial_series(coeffs: Vec<String>) -> PyResult<Self> {
        let cs = coeffs.iter().map(|s| rat(s)).collect::<PyResult<Vec<_>>>()?;
        Ok(PyModel {
            inner: PotentialModel::radial_series(cs),
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    fn bochner_ok(&self) -> bool {
        bochner_check(&self.inner).pass
    }

    /// Calabi diastasis D(x, y), points given as (re, im) pairs.
    #[pyo3(signature = (x, y, prec = 128))]
    fn diastasis(&self, x: (f64, f64), y: (f64, f64), prec: u32) -> f64 {
        let d = diastasis(
            &self.inner,
            &[cpx(x.0, x.1, prec)],
            &[cpx(y.0, y.1, prec)],
            prec,
        );
        d.value.to_f64()
    }

    /// Monomial norms h_0..h_jmax of the exact kernel at level k.
    #[pyo3(signature = (k, jmax, prec = 192, tol = 1e-24))]
    fn monomial_norms(&self, k: u32, jmax: u32, prec: u32, tol: f64) -> PyResult<Vec<f64>> {
        let oracle = monomial_norms(&self.inner, k, jmax, prec, tol).map_err(err)?;
        Ok(oracle.norms.iter().map(|h| h.to_f64()).collect())
    }

    /// Exact kernel K_k(x, y): returns (re, im, weighted).
    #[pyo3(signature = (k, x, y, jmax = 32, prec = 192))]
    fn kernel(
        &self,
        k: u32,
        x: (f64, f64),
        y: (f64, f64),
        jmax: u32,
        prec: u32,
    ) -> PyResult<(f64, f64, f64)> {
        let jm = if self.inner.name == "fubini_study" {
            jmax.min(k)
        } else {
            jmax
        };
        let oracle = monomial_norms(&self.inner, k, jm, prec, 1e-24).map_err(err)?;
        let kv = oracle
            .kernel_eval(&self.inner, &cpx(x.0, x.1, prec), &cpx(y.0, y.1, prec), 1e-12)
            .map_err(err)?;
        Ok((
            kv.raw.real().to_f64(),
            kv.raw.imag().to_f64(),
            kv.weighted.to_f64(),
        ))
    }

    /// Scaled log-kernel residual of the diastasis relation.
    #[pyo3(signature = (k, x, y, jmax = 64, prec = 192))]
    fn log_kernel_residual(
        &self,
        k: u32,
        x: (f64, f64),
        y: (f64, f64),
        jmax: u32,
        prec: u32,
    ) -> PyResult<f64> {
        let jm = if self.inner.name == "fubini_study" {
            k
        } else {
            jmax
        };
        let oracle = monomial_norms(&self.inner, k, jm, prec, 1e-24).map_err(err)?;
        let v = log_kernel_residual(&oracle, &self.inner, &cpx(x.0, x.1, prec), &cpx(y.0, y.1, prec))
            .map_err(err)?;
        Ok(v.to_f64())
    }

    /// Compute the coefficient table b_0..b_mmax.
    #[pyo3(signature = (mmax, trunc = None, scalar = "rational"))]
    fn coefficients(&self, mmax: usize, trunc: Option<u32>, scalar: &str) -> PyResult<PyTable> {
        let t = trunc.unwrap_or(2 * mmax as u32 + 4);
        let table = compute_bm(&self.inner, mmax, t, mode_of(scalar)?).map_err(err)?;
        Ok(PyTable {
            inner: table,
            model: self.inner.clone(),
        })
    }
}

#[pyclass(name = "CoefficientTable")]
struct PyTable {
    inner: CoefficientTable,
    model: PotentialModel,
}

#[pymethods]
impl PyTable {
    #[getter]
    fn m_max(&self) -> usize {
        self.inner.m_max
    }

    /// Diagonal values b_m(0, 0) as (re, im) pairs.
    fn diagonal(&self) -> Vec<(f64, f64)> {
        self.inner
            .diagonal_values()
            .iter()
            .map(|c| (c.re.to_f64(), c.im.to_f64()))
            .collect()
    }

    fn sup_majorant(&self, r: f64) -> Vec<f64> {
        self.inner.sup_majorant(r)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(err)
    }

    /// K^{(N)}(x, y): returns (re, im, weighted).
    #[pyo3(signature = (k, n, x, y, prec = 192))]
    fn eval_expansion(
        &self,
        k: u32,
        n: usize,
        x: (f64, f64),
        y: (f64, f64),
        prec: u32,
    ) -> PyResult<(f64, f64, f64)> {
        let ev = eval_expansion(
            &self.inner,
            &self.model,
            k,
            n,
            &[cpx(x.0, x.1, prec)],
            &[cpx(y.0, y.1, prec)],
            prec,
        )
        .map_err(err)?;
        Ok((
            ev.raw.real().to_f64(),
            ev.raw.imag().to_f64(),
            ev.weighted.to_f64(),
        ))
    }

    /// On-diagonal residual ladder against the oracle; returns
    /// (weighted residuals per k, fitted exponent).
    #[pyo3(signature = (ks, n, jmax = 16, prec = 192))]
    fn residual_exponent(
        &self,
        ks: Vec<u32>,
        n: usize,
        jmax: u32,
        prec: u32,
    ) -> PyResult<(Vec<f64>, Option<f64>)> {
        let points = vec![(vec![cpx(0.0, 0.0, prec)], vec![cpx(0.0, 0.0, prec)])];
        let (records, exponent) =
            compare_with_oracle(&self.model, &self.inner, &ks, &points, n, jmax, prec, 1e-24)
                .map_err(err)?;
        Ok((
            records
                .iter()
                .map(|r| r.weighted_residual.to_f64())
                .collect(),
            exponent,
        ))
    }
}

/// Majorant recursion lower-bound check; returns (rows, all_pass) with rows
/// (m, k, entry, bound, margin, pass).
#[pyfunction]
#[pyo3(signature = (a, eps, mmax, kmax, c = "1", mode = "worst-case", prec = 128))]
fn majorant_lower_bound(
    a: &str,
    eps: &str,
    mmax: usize,
    kmax: u32,
    c: &str,
    mode: &str,
    prec: u32,
) -> PyResult<(Vec<(usize, u32, f64, f64, f64, bool)>, bool)> {
    let mm = match mode {
        "worst-case" => MajorantMode::WorstCaseEquality,
        "inequality" => MajorantMode::InequalityBound,
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    let mut table =
        MajorantTable::new(1, rat(a)?, rat(eps)?, rat(c)?, mm, prec, Round::Down).map_err(err)?;
    let rows = check_lower_bound(&mut table, mmax, kmax);
    let all_pass = rows.iter().all(|r| r.pass);
    Ok((
        rows.into_iter()
            .map(|r| (r.m, r.k, r.entry, r.bound, r.margin, r.pass))
            .collect(),
        all_pass,
    ))
}

/// Fit log b_m = m·log C + sigma·log m!; returns (log_c, sigma, r_squared).
#[pyfunction]
fn fit_growth(sup_norms: Vec<f64>, m_min: usize, m_max: usize) -> PyResult<(f64, f64, f64)> {
    let fit = growth_fit(&sup_norms, m_min, m_max).map_err(err)?;
    Ok((fit.log_c, fit.sigma, fit.r_squared))
}

/// Truncation index N0(k) = floor((k/C)^{1/(2a+2eps)}).
#[pyfunction]
fn n0(k: f64, c_cfg: f64, a: f64, eps: f64) -> u32 {
    n0_of_k(k, c_cfg, a, eps)
}

/// Gevrey extension of the model function at displacement r:
/// returns (|F|, |dbar F|) at base point (y+z̄)/2 = base.
#[pyfunction]
#[pyo3(signature = (a, r, base = 0.25, eps_cut = 1.0, term_budget = 512, prec = 256))]
fn gevrey_extension(
    a: &str,
    r: f64,
    base: f64,
    eps_cut: f64,
    term_budget: u32,
    prec: u32,
) -> PyResult<(f64, f64)> {
    let a = rat(a)?;
    let model = GevreyModel::new(a.clone()).map_err(err)?;
    let c1 = estimate_c1(&model, &a, 12, prec);
    let ev = ExtensionEvaluator::new(model, a, c1, eps_cut, term_budget, prec).map_err(err)?;
    let y = cpx(base + r / 2.0, 0.0, prec);
    let z = cpx(base - r / 2.0, 0.0, prec);
    let f = ev.extend(&y, &z).map_err(err)?;
    let d = ev.dbar_extension(&y, &z, DbarDirection::YBar).map_err(err)?;
    Ok((
        f.abs().into_real_imag().0.to_f64(),
        d.abs().into_real_imag().0.to_f64(),
    ))
}

/// Fitted dbar vanishing-rate slope over a radius ladder (expect 1/(a-1)).
#[pyfunction]
#[pyo3(signature = (a, radii, base = 0.25, eps_cut = 1.0, term_budget = 512, prec = 256))]
fn gevrey_vanishing_slope(
    a: &str,
    radii: Vec<f64>,
    base: f64,
    eps_cut: f64,
    term_budget: u32,
    prec: u32,
) -> PyResult<f64> {
    let a = rat(a)?;
    let model = GevreyModel::new(a.clone()).map_err(err)?;
    let c1 = estimate_c1(&model, &a, 12, prec);
    let ev = ExtensionEvaluator::new(model, a, c1, eps_cut, term_budget, prec).map_err(err)?;
    let fit = vanishing_rate_fit(&ev, base, &radii, DbarDirection::YBar).map_err(err)?;
    Ok(fit.sigma)
}

#[pymodule]
fn bergman_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PyTable>()?;
    m.add_function(wrap_pyfunction!(majorant_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(fit_growth, m)?)?;
    m.add_function(wrap_pyfunction!(n0, m)?)?;
    m.add_function(wrap_pyfunction!(gevrey_extension, m)?)?;
    m.add_function(wrap_pyfunction!(gevrey_vanishing_slope, m)?)?;
    Ok(())
}
