//! Command-line driver: coefficient tables, oracle comparisons, log-kernel
//! checks, growth fits, the majorant recursion, and the Gevrey extension.

use bergman::asymptotics::{compare_with_oracle, log_kernel_residual};
use bergman::bbs::compute_bm;
use bergman::gevrey::{
    estimate_c1, DbarDirection, ExtensionEvaluator, GevreyModel,
};
use bergman::growth::{check_lower_bound, growth_fit, lower_bound_csv, MajorantMode, MajorantTable};
use bergman::oracle::monomial_norms;
use bergman::potential::{ModelConfig, PotentialModel};
use bergman::scalar::ScalarMode;
use clap::{Parser, Subcommand};
use rug::float::Round;
use rug::{Complex, Float, Rational};
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Parser)]
#[command(name = "bergman", about = "Bergman kernel expansion toolkit")]
struct Cli {
    /// Scalar mode: rational | bigfloat:BITS
    #[arg(long, global = true, default_value = "rational")]
    scalar: String,
    /// Output file (stdout when absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON model config file (overrides --model/--c/--coeffs)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute b_1..b_M and serialize the coefficient table as JSON
    Coeffs {
        #[arg(long, default_value = "quartic")]
        model: String,
        /// quartic coefficient, e.g. 1/10
        #[arg(long)]
        c: Option<String>,
        /// radial series coefficients c1,c2,...
        #[arg(long)]
        coeffs: Option<String>,
        #[arg(long, default_value_t = 2)]
        mmax: usize,
        /// jet truncation order (default 2·mmax + 4)
        #[arg(long)]
        trunc: Option<u32>,
    },
    /// Compare the truncated expansion against the exact oracle
    Compare {
        #[arg(long, default_value = "quartic")]
        model: String,
        #[arg(long)]
        c: Option<String>,
        #[arg(long)]
        coeffs: Option<String>,
        /// comma-separated k ladder
        #[arg(long, default_value = "20,40,80")]
        k: String,
        /// truncation order N
        #[arg(long, default_value_t = 2)]
        order: usize,
        /// evaluation point x as re,im
        #[arg(long, default_value = "0,0")]
        x: String,
        /// evaluation point y as re,im
        #[arg(long, default_value = "0,0")]
        y: String,
        #[arg(long)]
        trunc: Option<u32>,
        /// oracle monomial degree cap
        #[arg(long, default_value_t = 16)]
        jmax: u32,
        /// hard assertion on the fitted diagonal exponent
        #[arg(long)]
        expect_exponent: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        tol_exponent: f64,
    },
    /// Log-kernel residuals k²·|(1/k)log K_w + D/2 − log k/k + log π/k|
    Logcheck {
        #[arg(long, default_value = "fubini_study")]
        model: String,
        #[arg(long)]
        c: Option<String>,
        #[arg(long)]
        coeffs: Option<String>,
        #[arg(long, default_value = "16,64,256")]
        k: String,
        #[arg(long, default_value = "0,0")]
        x: String,
        #[arg(long, default_value = "0,0")]
        y: String,
        #[arg(long, default_value_t = 64)]
        jmax: u32,
        /// hard assertion: every residual must lie in [lo, hi]
        #[arg(long)]
        expect_band: Option<String>,
    },
    /// Coefficient sup-majorants on a polydisc plus the growth fit
    Growth {
        #[arg(long, default_value = "quartic")]
        model: String,
        #[arg(long)]
        c: Option<String>,
        #[arg(long)]
        coeffs: Option<String>,
        #[arg(long, default_value_t = 4)]
        mmax: usize,
        #[arg(long)]
        trunc: Option<u32>,
        /// polydisc radius for the sup proxy
        #[arg(long, default_value_t = 0.25)]
        radius: f64,
    },
    /// Majorant recursion lower-bound check
    Majorant {
        /// Gevrey index a as a rational, e.g. 2 or 3/2
        #[arg(long, default_value = "2")]
        a: String,
        #[arg(long, default_value = "1/2")]
        eps: String,
        /// constant C for the inequality mode
        #[arg(long, default_value = "1")]
        c: String,
        #[arg(long, default_value_t = 4)]
        mmax: usize,
        #[arg(long, default_value_t = 3)]
        kmax: u32,
        /// worst-case | inequality
        #[arg(long, default_value = "worst-case")]
        mode: String,
        #[arg(long, default_value_t = 128)]
        precision_bits: u32,
    },
    /// Gevrey almost-holomorphic extension along a radius ladder
    Extension {
        #[arg(long, default_value = "2")]
        a: String,
        #[arg(long, default_value_t = 1.0)]
        eps_cut: f64,
        /// comma-separated displacement radii |y − z̄|
        #[arg(long, default_value = "0.125,0.0625,0.03125")]
        radii: String,
        /// ybar | zbar
        #[arg(long, default_value = "ybar")]
        direction: String,
        #[arg(long, default_value_t = 256)]
        precision_bits: u32,
        /// real base point (y+z̄)/2
        #[arg(long, default_value_t = 0.25)]
        base: f64,
        #[arg(long, default_value_t = 512)]
        term_budget: u32,
    },
    /// Monomial norms h_j and optional kernel evaluation
    Oracle {
        #[arg(long, default_value = "quartic")]
        model: String,
        #[arg(long)]
        c: Option<String>,
        #[arg(long)]
        coeffs: Option<String>,
        #[arg(long, default_value_t = 32)]
        k: u32,
        #[arg(long, default_value_t = 16)]
        jmax: u32,
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        y: Option<String>,
        #[arg(long, default_value_t = 1e-24)]
        tol: f64,
    },
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    Rational::from_str(s).map_err(|e| format!("bad rational {s:?}: {e}"))
}

fn parse_complex(s: &str, prec: u32) -> Result<Complex, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("bad point {s:?}: expected re,im"));
    }
    let re: f64 = parts[0].trim().parse().map_err(|e| format!("{e}"))?;
    let im: f64 = parts[1].trim().parse().map_err(|e| format!("{e}"))?;
    Ok(Complex::with_val(prec, (re, im)))
}

fn parse_k_list(s: &str) -> Result<Vec<u32>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<u32>().map_err(|e| format!("bad k {p:?}: {e}")))
        .collect()
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad value {p:?}: {e}")))
        .collect()
}

fn resolve_model(
    config: &Option<PathBuf>,
    name: &str,
    c: &Option<String>,
    coeffs: &Option<String>,
) -> Result<PotentialModel, String> {
    if let Some(path) = config {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let cfg: ModelConfig = serde_json::from_str(&text).map_err(|e| format!("config: {e}"))?;
        return PotentialModel::from_config(&cfg).map_err(|e| e.to_string());
    }
    match name {
        "bargmann_fock" => Ok(PotentialModel::bargmann_fock(1)),
        "fubini_study" => Ok(PotentialModel::fubini_study(1)),
        "quartic" => {
            let c = match c {
                Some(s) => parse_rational(s)?,
                None => Rational::from((1, 10)),
            };
            Ok(PotentialModel::radial_quartic(c))
        }
        "radial_series" => {
            let s = coeffs
                .as_ref()
                .ok_or_else(|| "radial_series requires --coeffs".to_string())?;
            let cs = s
                .split(',')
                .map(|p| parse_rational(p.trim()))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(PotentialModel::radial_series(cs))
        }
        other => Err(format!("unknown model {other:?}")),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool, String> {
    let mode = ScalarMode::parse(&cli.scalar).map_err(|e| e.to_string())?;
    let prec = match mode {
        ScalarMode::BigFloat(bits) => bits,
        ScalarMode::ExactRational => 256,
    };
    match &cli.command {
        Command::Coeffs {
            model,
            c,
            coeffs,
            mmax,
            trunc,
        } => {
            let m = resolve_model(&cli.config, model, c, coeffs)?;
            let t = trunc.unwrap_or(2 * *mmax as u32 + 4);
            let table = compute_bm(&m, *mmax, t, mode).map_err(|e| e.to_string())?;
            let json = serde_json::to_string_pretty(&table).map_err(|e| e.to_string())?;
            emit(&cli.out, &format!("{json}\n"))?;
            Ok(true)
        }
        Command::Compare {
            model,
            c,
            coeffs,
            k,
            order,
            x,
            y,
            trunc,
            jmax,
            expect_exponent,
            tol_exponent,
        } => {
            let m = resolve_model(&cli.config, model, c, coeffs)?;
            let ks = parse_k_list(k)?;
            let px = parse_complex(x, prec)?;
            let py = parse_complex(y, prec)?;
            let t = trunc.unwrap_or(2 * *order as u32 + 4);
            let table = compute_bm(&m, *order, t, mode).map_err(|e| e.to_string())?;
            let points = vec![(vec![px], vec![py])];
            let (records, exponent) =
                compare_with_oracle(&m, &table, &ks, &points, *order, *jmax, prec, 1e-24)
                    .map_err(|e| e.to_string())?;
            let mut csv =
                String::from("k,x_re,x_im,y_re,y_im,N,residual,weighted_residual\n");
            for r in &records {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{:e},{:e}\n",
                    r.k,
                    r.x.real().to_f64(),
                    r.x.imag().to_f64(),
                    r.y.real().to_f64(),
                    r.y.imag().to_f64(),
                    r.n_trunc,
                    r.residual.to_f64(),
                    r.weighted_residual.to_f64()
                ));
            }
            if let Some(e) = exponent {
                csv.push_str(&format!("# fitted_exponent,{e}\n"));
            }
            emit(&cli.out, &csv)?;
            match (expect_exponent, exponent) {
                (Some(want), Some(got)) => Ok((got - want).abs() <= *tol_exponent),
                (Some(_), None) => Err("no diagonal points to fit".into()),
                (None, _) => Ok(true),
            }
        }
        Command::Logcheck {
            model,
            c,
            coeffs,
            k,
            x,
            y,
            jmax,
            expect_band,
        } => {
            let m = resolve_model(&cli.config, model, c, coeffs)?;
            let ks = parse_k_list(k)?;
            let px = parse_complex(x, prec)?;
            let py = parse_complex(y, prec)?;
            let band = match expect_band {
                Some(s) => {
                    let v = parse_f64_list(s)?;
                    if v.len() != 2 {
                        return Err("expect-band wants lo,hi".into());
                    }
                    Some((v[0], v[1]))
                }
                None => None,
            };
            let mut csv = String::from("k,residual\n");
            let mut pass = true;
            for &kk in &ks {
                let jm = if m.name == "fubini_study" { kk } else { *jmax };
                let oracle =
                    monomial_norms(&m, kk, jm, prec, 1e-24).map_err(|e| e.to_string())?;
                let v = log_kernel_residual(&oracle, &m, &px, &py).map_err(|e| e.to_string())?;
                let vf = v.to_f64();
                csv.push_str(&format!("{kk},{vf}\n"));
                if let Some((lo, hi)) = band {
                    if vf < lo || vf > hi {
                        pass = false;
                    }
                }
            }
            emit(&cli.out, &csv)?;
            Ok(pass)
        }
        Command::Growth {
            model,
            c,
            coeffs,
            mmax,
            trunc,
            radius,
        } => {
            let m = resolve_model(&cli.config, model, c, coeffs)?;
            let t = trunc.unwrap_or(2 * *mmax as u32 + 4);
            let table = compute_bm(&m, *mmax, t, mode).map_err(|e| e.to_string())?;
            let sups = table.sup_majorant(*radius);
            let mut csv = table.to_csv(*radius);
            match growth_fit(&sups, 1, *mmax) {
                Ok(fit) => csv.push_str(&format!(
                    "# fit,log_c={},sigma={},r_squared={}\n",
                    fit.log_c, fit.sigma, fit.r_squared
                )),
                Err(e) => csv.push_str(&format!("# fit_error,{e}\n")),
            }
            emit(&cli.out, &csv)?;
            Ok(true)
        }
        Command::Majorant {
            a,
            eps,
            c,
            mmax,
            kmax,
            mode: mj_mode,
            precision_bits,
        } => {
            let a = parse_rational(a)?;
            let eps = parse_rational(eps)?;
            let c = parse_rational(c)?;
            let mm = match mj_mode.as_str() {
                "worst-case" => MajorantMode::WorstCaseEquality,
                "inequality" => MajorantMode::InequalityBound,
                other => return Err(format!("unknown majorant mode {other:?}")),
            };
            let mut table = MajorantTable::new(1, a, eps, c, mm, *precision_bits, Round::Down)
                .map_err(|e| e.to_string())?;
            let rows = check_lower_bound(&mut table, *mmax, *kmax);
            emit(&cli.out, &lower_bound_csv(&rows))?;
            Ok(rows.iter().all(|r| r.pass))
        }
        Command::Extension {
            a,
            eps_cut,
            radii,
            direction,
            precision_bits,
            base,
            term_budget,
        } => {
            let a = parse_rational(a)?;
            let radii = parse_f64_list(radii)?;
            let which = match direction.as_str() {
                "ybar" => DbarDirection::YBar,
                "zbar" => DbarDirection::ZBar,
                other => return Err(format!("unknown direction {other:?}")),
            };
            let prec = *precision_bits;
            let model = GevreyModel::new(a.clone()).map_err(|e| e.to_string())?;
            let c1 = estimate_c1(&model, &a, 12, prec);
            let ev = ExtensionEvaluator::new(model, a, c1, *eps_cut, *term_budget, prec)
                .map_err(|e| e.to_string())?;
            let mut csv = String::from("r,F_abs,dbarF_abs,active_index_max\n");
            for &r in &radii {
                let y = Complex::with_val(prec, (base + r / 2.0, 0));
                let z = Complex::with_val(prec, (base - r / 2.0, 0));
                let r2 = Float::with_val(prec, r) * Float::with_val(prec, r);
                let mut n_active = 0u32;
                while ev.chi_arg(n_active + 1, &r2) < 1 {
                    n_active += 1;
                    if n_active > *term_budget {
                        break;
                    }
                }
                let f = ev.extend(&y, &z).map_err(|e| e.to_string())?;
                let d = ev.dbar_extension(&y, &z, which).map_err(|e| e.to_string())?;
                csv.push_str(&format!(
                    "{r},{:e},{:e},{n_active}\n",
                    f.abs().into_real_imag().0.to_f64(),
                    d.abs().into_real_imag().0.to_f64()
                ));
            }
            emit(&cli.out, &csv)?;
            Ok(true)
        }
        Command::Oracle {
            model,
            c,
            coeffs,
            k,
            jmax,
            x,
            y,
            tol,
        } => {
            let m = resolve_model(&cli.config, model, c, coeffs)?;
            let oracle = monomial_norms(&m, *k, *jmax, prec, *tol).map_err(|e| e.to_string())?;
            let mut text = oracle.norms_csv();
            if let (Some(xs), Some(ys)) = (x, y) {
                let px = parse_complex(xs, prec)?;
                let py = parse_complex(ys, prec)?;
                let kv = oracle
                    .kernel_eval(&m, &px, &py, 1e-12)
                    .map_err(|e| e.to_string())?;
                text.push_str(&format!(
                    "# kernel,{:e},{:e},{:e}\n",
                    kv.raw.real().to_f64(),
                    kv.raw.imag().to_f64(),
                    kv.weighted.to_f64()
                ));
            }
            emit(&cli.out, &text)?;
            Ok(true)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => {}
        Ok(false) => {
            eprintln!("hard assertion failed");
            std::process::exit(1);
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
