use std::fmt::{self, Write as _};

use halphen::bianchi::{
    c_from_omega, constraint_residual, flat_conformal_factor, flat_family, lambda_conformal_factor,
    omega_solution_residual, omega_theta_flow, tod_hitchin_family, TodHitchinParams,
};
use halphen::checks::{
    bianchi_reduction_check, conjugacy_check, darboux_check, gauss_manin_check, ExactCheckReport,
};
use halphen::dh::{dh_integrate, dh_theta_solution, trajectory_csv};
use halphen::frobenius::{
    chazy_e2_exact, chazy_potential_jet, chazy_residual, dh_cubic_roots_check, example_eta,
    gamma_jet_e2, third_partials_3d, wdvv_residual_3d,
};
use halphen::qseries::{eisenstein_series, theta_series, PiGradedQSeries, TauPoint};
use halphen::ramanujan::{conjugacy_residual, ramanujan_series_residual};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::report::{c, CheckTable, Outcome, RunConfig};
use crate::{BianchiCmd, Cli, Command, Common, DhCmd, FrobeniusCmd, SeriesCmd, VerifyCmd};

/// Integration commands compare against closed forms with this multiple of
/// the local per-step tolerance.
pub const GLOBAL_ERROR_FACTOR: f64 = 100.0;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(halphen::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Numeric(e) => write!(f, "numeric failure: {e}"),
        }
    }
}

impl From<halphen::Error> for CliError {
    fn from(e: halphen::Error) -> Self {
        CliError::Numeric(e)
    }
}

type Run = Result<(RunConfig, Outcome), CliError>;

fn tolerance(common: &Common, default: f64) -> Result<f64, CliError> {
    let tol = common.tol.unwrap_or(default);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::Usage(format!(
            "--tol must be positive, got {tol}"
        )));
    }
    Ok(tol)
}

fn taus(common: &Common, default: &[f64]) -> Result<Vec<TauPoint>, CliError> {
    if common.tau.is_empty() {
        default
            .iter()
            .map(|&t| Ok(TauPoint::imaginary(t)?))
            .collect()
    } else {
        common
            .tau
            .iter()
            .map(|&z| TauPoint::new(z).map_err(|e| CliError::Usage(e.to_string())))
            .collect()
    }
}

fn config(name: &str, common: &Common, tol: f64) -> RunConfig {
    RunConfig::new(name, tol).with_common(common)
}

impl RunConfig {
    fn with_common(mut self, common: &Common) -> Self {
        self.t0 = common.t0;
        self.t1 = common.t1;
        self
    }
}

fn range(common: &Common, t0: f64, t1: f64) -> Result<(f64, f64), CliError> {
    let (a, b) = (common.t0.unwrap_or(t0), common.t1.unwrap_or(t1));
    if !(a > 0.0 && b > 0.0) {
        return Err(CliError::Usage(format!(
            "--t0/--t1 must be positive, got {a}, {b}"
        )));
    }
    Ok((a, b))
}

fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![a];
    }
    (0..n)
        .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
        .collect()
}

pub fn run(cli: &Cli) -> Run {
    let common = &cli.common;
    match &cli.command {
        Command::Dh(DhCmd::Integrate { tau0, tau1 }) => dh_integrate_cmd(common, *tau0, *tau1),
        Command::Dh(DhCmd::Theta) => dh_theta_cmd(common),
        Command::Series(SeriesCmd::Eisenstein { k }) => {
            let order = common.order.unwrap_or(10);
            if ![2, 4, 6].contains(k) {
                return Err(CliError::Usage(format!("--k must be 2, 4 or 6, got {k}")));
            }
            series_cmd(
                common,
                "series eisenstein",
                eisenstein_series(*k, order)?,
                json!({ "k": k }),
            )
        }
        Command::Series(SeriesCmd::Theta { which }) => {
            let order = common.order.unwrap_or(32);
            if ![2, 3, 4].contains(which) {
                return Err(CliError::Usage(format!(
                    "--which must be 2, 3 or 4, got {which}"
                )));
            }
            series_cmd(
                common,
                "series theta",
                theta_series(*which, order)?,
                json!({ "which": which }),
            )
        }
        Command::Verify(VerifyCmd::Ramanujan) => verify_ramanujan(common),
        Command::Verify(VerifyCmd::Chazy) | Command::Frobenius(FrobeniusCmd::Chazy) => {
            verify_chazy(common)
        }
        Command::Verify(VerifyCmd::GaussManin) => {
            exact_cmd(common, "verify gauss-manin", 100, gauss_manin_check)
        }
        Command::Verify(VerifyCmd::Darboux) => {
            exact_cmd(common, "verify darboux", 100, darboux_check)
        }
        Command::Verify(VerifyCmd::Conjugacy) => verify_conjugacy(common),
        Command::Verify(VerifyCmd::BianchiReduction) => exact_cmd(
            common,
            "verify bianchi-reduction",
            100,
            bianchi_reduction_check,
        ),
        Command::Bianchi(BianchiCmd::Flow { omega, q0 }) => bianchi_flow(common, *omega, *q0),
        Command::Bianchi(BianchiCmd::FlatFamily { q0, c, points }) => {
            flat_family_cmd(common, *q0, *c, *points)
        }
        Command::Bianchi(BianchiCmd::VerifyConstraint {
            q0,
            points,
            p,
            q,
            lambda,
        }) => {
            let params = TodHitchinParams {
                p: *p,
                q: *q,
                lambda: *lambda,
                q0: *q0,
            };
            verify_constraint(common, params, *points)
        }
        Command::Frobenius(FrobeniusCmd::Wdvv { x }) => frobenius_wdvv(common, *x),
        Command::Frobenius(FrobeniusCmd::Cubic) => frobenius_cubic(common),
    }
}

fn dh_integrate_cmd(common: &Common, tau0: Complex64, tau1: Complex64) -> Run {
    let tol = tolerance(common, 1e-10)?;
    let (p0, p1) = (
        TauPoint::new(tau0).map_err(|e| CliError::Usage(e.to_string()))?,
        TauPoint::new(tau1).map_err(|e| CliError::Usage(e.to_string()))?,
    );
    let start = dh_theta_solution(p0)?;
    let traj = dh_integrate(&start, p0, p1, tol)?;
    let exact = dh_theta_solution(p1)?.to_array();
    let end = traj.last().state;
    let deviation = (0..3)
        .map(|i| (end[i] - exact[i]).norm())
        .fold(0.0, f64::max);
    let bound = GLOBAL_ERROR_FACTOR * tol;

    let mut cfg = config("dh integrate", common, tol);
    cfg.extra =
        json!({ "tau0": c(tau0), "tau1": c(tau1), "global_error_factor": GLOBAL_ERROR_FACTOR });
    let result = json!({
        "steps": traj.points().len() - 1,
        "final_state": end.map(c),
        "closed_form": exact.map(c),
        "max_deviation": deviation,
        "deviation_bound": bound,
        "trajectory": traj.points().iter().map(|p| json!({
            "tau": c(p.tau), "state": p.state.map(c), "err_est": p.err_est,
        })).collect::<Vec<_>>(),
    });
    Ok((
        cfg,
        Outcome {
            result,
            csv: trajectory_csv(&traj),
            passed: deviation <= bound,
        },
    ))
}

fn dh_theta_cmd(common: &Common) -> Run {
    let tol = tolerance(common, 1e-10)?;
    let points = taus(common, &[1.0])?;
    let mut rows = Vec::new();
    let mut csv = String::from("tau_re,tau_im,t1_re,t1_im,t2_re,t2_im,t3_re,t3_im\n");
    for tau in &points {
        let t = dh_theta_solution(*tau)?.to_array();
        let _ = write!(csv, "{:e},{:e}", tau.value().re, tau.value().im);
        for z in &t {
            let _ = write!(csv, ",{:e},{:e}", z.re, z.im);
        }
        csv.push('\n');
        rows.push(json!({ "tau": c(tau.value()), "t": t.map(c) }));
    }
    let mut cfg = config("dh theta", common, tol);
    cfg.tau = points.iter().map(|t| c(t.value())).collect();
    Ok((
        cfg,
        Outcome {
            result: Value::Array(rows),
            csv,
            passed: true,
        },
    ))
}

fn series_cmd(common: &Common, name: &str, series: PiGradedQSeries, extra: Value) -> Run {
    let mut cfg = config(name, common, tolerance(common, 1e-10)?);
    cfg.order = Some(series.trunc_order());
    cfg.extra = extra;
    let mut csv = String::from("n,coefficient\n");
    for (n, v) in series.terms() {
        let _ = writeln!(csv, "{n},{v}");
    }
    let coefficients: Vec<String> = (0..=series.trunc_order())
        .map(|n| series.coeff(n).unwrap_or_default().to_string())
        .collect();
    let result = json!({ "series": series.to_json(), "coefficients": coefficients });
    Ok((
        cfg,
        Outcome {
            result,
            csv,
            passed: true,
        },
    ))
}

fn verify_ramanujan(common: &Common) -> Run {
    let order = common.order.unwrap_or(30);
    let tol = tolerance(common, 1e-10)?;
    let residuals = ramanujan_series_residual(order)?;
    let mut table = CheckTable::new();
    let mut nonzero = 0;
    for (name, r) in ["E2", "E4", "E6"].iter().zip(&residuals) {
        let count = r.num_terms();
        nonzero += count;
        // exact check: the count of nonzero coefficients must be zero
        table.push(format!("{name} nonzero coefficients"), count as f64, 0.0);
    }
    let mut cfg = config("verify ramanujan", common, tol);
    cfg.order = Some(order);
    let message = if nonzero == 0 {
        "all coefficients zero".to_string()
    } else {
        format!("{nonzero} nonzero coefficients")
    };
    let result = json!({
        "message": message,
        "exact": true,
        "residuals": residuals.iter().map(PiGradedQSeries::to_json).collect::<Vec<_>>(),
        "checks": table.to_json(),
    });
    Ok((
        cfg,
        Outcome {
            result,
            csv: table.to_csv(),
            passed: table.all_passed(),
        },
    ))
}

fn verify_chazy(common: &Common) -> Run {
    let order = common.order.unwrap_or(30);
    let tol = tolerance(common, 1e-8)?;
    let points = taus(common, &[1.0, 1.3])?;
    let exact = chazy_e2_exact(order)?;
    let mut table = CheckTable::new();
    table.push(
        "exact series nonzero coefficients",
        exact.num_terms() as f64,
        0.0,
    );
    for tau in &points {
        let r = chazy_residual(&gamma_jet_e2(*tau)?).norm();
        table.push(format!("numeric tau={}", tau.value()), r, tol);
    }
    let mut cfg = config("verify chazy", common, tol);
    cfg.order = Some(order);
    cfg.tau = points.iter().map(|t| c(t.value())).collect();
    let result = json!({ "exact_residual": exact.to_json(), "checks": table.to_json() });
    Ok((
        cfg,
        Outcome {
            result,
            csv: table.to_csv(),
            passed: table.all_passed(),
        },
    ))
}

fn exact_cmd(
    common: &Common,
    name: &str,
    default_samples: usize,
    check: fn(u64, usize) -> ExactCheckReport,
) -> Run {
    let samples = common.samples.unwrap_or(default_samples);
    let report = check(common.seed, samples);
    let mut cfg = config(name, common, 0.0);
    cfg.seed = Some(common.seed);
    cfg.samples = Some(samples);
    let mut table = CheckTable::new();
    table.push(
        format!("{} failures", report.name),
        report.failures as f64,
        0.0,
    );
    let result = json!({ "exact": true, "report": report, "checks": table.to_json() });
    Ok((
        cfg,
        Outcome {
            result,
            csv: table.to_csv(),
            passed: report.passed(),
        },
    ))
}

fn verify_conjugacy(common: &Common) -> Run {
    let samples = common.samples.unwrap_or(50);
    let tol = tolerance(common, 1e-9)?;
    let report = conjugacy_check(common.seed, samples);
    let points = taus(common, &[1.3])?;
    let mut table = CheckTable::new();
    table.push("exact failures", report.failures as f64, 0.0);
    for tau in &points {
        let r = conjugacy_residual(&dh_theta_solution(*tau)?);
        let worst = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
        table.push(format!("theta solution tau={}", tau.value()), worst, tol);
    }
    let mut cfg = config("verify conjugacy", common, tol);
    cfg.seed = Some(common.seed);
    cfg.samples = Some(samples);
    cfg.tau = points.iter().map(|t| c(t.value())).collect();
    let result = json!({ "report": report, "checks": table.to_json() });
    Ok((
        cfg,
        Outcome {
            result,
            csv: table.to_csv(),
            passed: table.all_passed(),
        },
    ))
}

fn bianchi_flow(common: &Common, omega: Option<[f64; 3]>, q0: f64) -> Run {
    let tol = tolerance(common, 1e-10)?;
    let (t0, t1) = range(common, 0.8, 2.0)?;
    let from_flat = omega.is_none();
    let start = match omega {
        Some(o) => o,
        None => flat_family(t0, q0)?.omega,
    };
    let traj = omega_theta_flow(start, t0, t1, tol)?;
    let bound = GLOBAL_ERROR_FACTOR * tol;
    let mut worst = 0.0f64;
    let mut csv = String::from("t,omega1,omega2,omega3,c1,c2,c3,flat_deviation\n");
    let mut rows = Vec::new();
    for p in traj.points() {
        let t = p.tau.re;
        let o = p.state.map(|z| z.re);
        let dev = if from_flat {
            let exact = flat_family(t, q0)?.omega;
            let d = (0..3).map(|i| (o[i] - exact[i]).abs()).fold(0.0, f64::max);
            worst = worst.max(d);
            Some(d)
        } else {
            None
        };
        let cs = c_from_omega(o).map(|m| m.to_array()).ok();
        let cs_txt = cs.map_or(",,".to_string(), |v| {
            format!("{:e},{:e},{:e}", v[0], v[1], v[2])
        });
        let dev_txt = dev.map_or(String::new(), |d| format!("{d:e}"));
        let _ = writeln!(
            csv,
            "{t:e},{:e},{:e},{:e},{cs_txt},{dev_txt}",
            o[0], o[1], o[2]
        );
        rows.push(json!({ "t": t, "omega": o, "c": cs, "flat_deviation": dev }));
    }
    let mut cfg = config("bianchi flow", common, tol);
    cfg.t0 = Some(t0);
    cfg.t1 = Some(t1);
    cfg.extra =
        json!({ "q0": q0, "initial_omega": start, "global_error_factor": GLOBAL_ERROR_FACTOR });
    let result = json!({
        "steps": traj.points().len() - 1,
        "compared_with_flat_family": from_flat,
        "max_deviation": if from_flat { Some(worst) } else { None },
        "deviation_bound": bound,
        "profile": rows,
    });
    Ok((
        cfg,
        Outcome {
            result,
            csv,
            passed: !from_flat || worst <= bound,
        },
    ))
}

fn flat_family_cmd(common: &Common, q0: f64, cc: f64, points: usize) -> Run {
    let tol = tolerance(common, 1e-8)?;
    let (t0, t1) = range(common, 0.7, 2.0)?;
    let h = 1e-5;
    let mut worst = 0.0f64;
    let mut csv = String::from("t,omega1,omega2,omega3,residual,F\n");
    let mut rows = Vec::new();
    for t in grid(t0, t1, points) {
        let o = flat_family(t, q0)?.omega;
        let (a, b) = (flat_family(t + h, q0)?.omega, flat_family(t - h, q0)?.omega);
        let d: [f64; 3] = std::array::from_fn(|i| (a[i] - b[i]) / (2.0 * h));
        let r = omega_solution_residual(o, d, t)?
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        worst = worst.max(r);
        let f = flat_conformal_factor(t, q0, cc)?;
        let _ = writeln!(csv, "{t:e},{:e},{:e},{:e},{r:e},{f:e}", o[0], o[1], o[2]);
        rows.push(json!({ "t": t, "omega": o, "residual": r, "F": f }));
    }
    let mut cfg = config("bianchi flat-family", common, tol);
    cfg.t0 = Some(t0);
    cfg.t1 = Some(t1);
    cfg.extra = json!({ "q0": q0, "C": cc, "points": points, "difference_step": h });
    let result = json!({ "max_residual": worst, "profile": rows });
    Ok((
        cfg,
        Outcome {
            result,
            csv,
            passed: worst <= tol,
        },
    ))
}

fn verify_constraint(common: &Common, params: TodHitchinParams, points: usize) -> Run {
    let tol = tolerance(common, 1e-10)?;
    let (t0, t1) = range(common, 0.7, 2.0)?;
    let mut table = CheckTable::new();
    let mut csv =
        String::from("t,flat_residual,th_omega1_re,th_omega1_im,th_residual_re,th_residual_im\n");
    let mut rows = Vec::new();
    for t in grid(t0, t1, points) {
        let flat = flat_family(t, params.q0)?
            .omega
            .map(|v| Complex64::new(v, 0.0));
        let r = constraint_residual(flat, t)?.norm();
        table.push(format!("flat family t={t}"), r, tol);
        let th = tod_hitchin_family(&params, t)?;
        let th_r = constraint_residual(th.omega, t)?;
        let f = lambda_conformal_factor(th.omega, &params, t)?;
        let _ = writeln!(
            csv,
            "{t:e},{r:e},{:e},{:e},{:e},{:e}",
            th.omega[0].re, th.omega[0].im, th_r.re, th_r.im
        );
        rows.push(json!({
            "t": t,
            "flat_residual": r,
            "tod_hitchin": {
                "omega": th.omega.map(c),
                "source_formula_resolved": th.source_formula_resolved,
                "constraint_residual": c(th_r),
                "F": c(f),
            },
        }));
    }
    let mut cfg = config("bianchi verify-constraint", common, tol);
    cfg.t0 = Some(t0);
    cfg.t1 = Some(t1);
    cfg.extra = json!({
        "q0": params.q0, "p": c(params.p), "q": c(params.q), "lambda": params.lambda, "points": points,
    });
    let result = json!({
        "reality_class": format!("{:?}", params.reality_class()),
        "lambda_sign_consistent": params.lambda_sign_consistent(),
        "note": "verdict covers the flat family only; the Tod-Hitchin omega2/omega3 source formulas are unresolved",
        "checks": table.to_json(),
        "profile": rows,
    });
    Ok((
        cfg,
        Outcome {
            result,
            csv,
            passed: table.all_passed(),
        },
    ))
}

fn frobenius_wdvv(common: &Common, x: f64) -> Run {
    let tol = tolerance(common, 1e-8)?;
    let points = taus(common, &[1.0, 1.3])?;
    let eta = example_eta::<Complex64>();
    let mut table = CheckTable::new();
    for tau in &points {
        let jet = chazy_potential_jet(Complex64::new(x, 0.0), &gamma_jet_e2(*tau)?);
        let r = wdvv_residual_3d(&third_partials_3d(&jet), &eta)?;
        table.push(format!("wdvv tau={}", tau.value()), r, tol);
    }
    let mut cfg = config("frobenius wdvv", common, tol);
    cfg.tau = points.iter().map(|t| c(t.value())).collect();
    cfg.extra = json!({ "x": x });
    let result = json!({ "checks": table.to_json() });
    Ok((
        cfg,
        Outcome {
            result,
            csv: table.to_csv(),
            passed: table.all_passed(),
        },
    ))
}

fn frobenius_cubic(common: &Common) -> Run {
    let tol = tolerance(common, 1e-8)?;
    let points = taus(common, &[0.8, 1.0, 1.2, 1.5, 2.0])?;
    let mut table = CheckTable::new();
    for tau in &points {
        table.push(
            format!("roots tau={}", tau.value()),
            dh_cubic_roots_check(*tau)?,
            tol,
        );
    }
    let mut cfg = config("frobenius cubic", common, tol);
    cfg.tau = points.iter().map(|t| c(t.value())).collect();
    let result = json!({ "checks": table.to_json() });
    Ok((
        cfg,
        Outcome {
            result,
            csv: table.to_csv(),
            passed: table.all_passed(),
        },
    ))
}
