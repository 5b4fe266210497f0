//! Executes a resolved [`RunConfig`] and collects tabular and JSON output.

use legpos_core::quadrature::coefficients_by_quadrature;
use legpos_core::schoenberg::{self, SchoenbergConfig};
use legpos_core::search::{critical_alpha, landscape, BisectionConfig, CriticalStatus, LandscapeResult};
use legpos_core::{
    evaluate, expand_amplitude, min_coefficient, parse_rational, AmplitudeSpec, BasisSpec, Precision, Scalar,
    ScalarMode,
};
use rug::{Float, Rational};
use serde_json::{json, Value};

use crate::config::{AmplitudeParams, CommandConfig, CriticalAlphaParams, LandscapeParams, QuadCheckParams, RunConfig};

#[derive(Debug)]
pub enum Failure {
    /// Invalid parameters or configuration (exit code 2).
    Usage(String),
    /// The run completed but a check did not pass (exit code 1).
    Check(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Check(_) => 1,
            Failure::Usage(_) => 2,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

pub struct Report {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub result: Value,
    /// Human-readable summary lines for stderr.
    pub notes: Vec<String>,
    pub check_failure: Option<String>,
}

pub fn execute(config: &RunConfig) -> Result<Report, Failure> {
    config.mode.validate().map_err(usage)?;
    match &config.command {
        CommandConfig::Expand(p) => expand(p, config.mode),
        CommandConfig::CriticalAlpha(p) => critical(p, config.mode),
        CommandConfig::Landscape(p) => sweep(p, config.mode),
        CommandConfig::Schoenberg(p) => schoenberg_run(p),
        CommandConfig::QuadCheck(p) => quad_check(p, config.mode),
    }
}

fn amplitude_spec(p: &AmplitudeParams) -> Result<(AmplitudeSpec, BasisSpec), Failure> {
    let alpha = parse_rational(&p.alpha).map_err(usage)?;
    let spec = AmplitudeSpec::new(p.m, alpha, p.beta, p.gamma).map_err(usage)?;
    let basis = BasisSpec::new(p.d).map_err(usage)?;
    Ok((spec, basis))
}

fn expand(p: &AmplitudeParams, mode: ScalarMode) -> Result<Report, Failure> {
    let (spec, basis) = amplitude_spec(p)?;
    match mode {
        ScalarMode::ExactRational => expand_in::<Rational>(&spec, basis, (), mode),
        ScalarMode::HighPrecisionFloat { digits } => {
            expand_in::<Float>(&spec, basis, Precision::from_digits(digits), mode)
        }
    }
}

fn expand_in<S: Scalar>(
    spec: &AmplitudeSpec,
    basis: BasisSpec,
    ctx: S::Ctx,
    mode: ScalarMode,
) -> Result<Report, Failure> {
    let expansion = expand_amplitude::<S>(spec, basis, ctx).map_err(usage)?;
    let eta = mode.default_noise_floor();
    let min = min_coefficient(&expansion.coefficients, eta);
    let values: Vec<String> = expansion
        .coefficients
        .coeffs()
        .iter()
        .map(S::to_decimal_string)
        .collect();
    let verdict = if min.is_negative { "negative" } else { "positive" };
    let mut notes = vec![format!(
        "min a_{} = {} ({verdict})",
        min.index,
        min.value.to_decimal_string()
    )];
    if let Some(w) = &expansion.precision_warning {
        notes.push(format!("warning: {w}"));
    }
    let result = json!({
        "coefficients": values.iter().enumerate().map(|(n, a)| json!({"n": n, "a_n": a})).collect::<Vec<_>>(),
        "min_coefficient": {
            "n": min.index,
            "value": min.value.to_decimal_string(),
            "is_negative": min.is_negative,
        },
        "verdict": verdict,
        "noise_floor": eta,
        "cancellation_digits": expansion.cancellation_digits,
        "precision_warning": expansion.precision_warning,
    });
    Ok(Report {
        header: vec!["n", "a_n"],
        rows: values
            .into_iter()
            .enumerate()
            .map(|(n, a)| vec![n.to_string(), a])
            .collect(),
        result,
        notes,
        check_failure: None,
    })
}

fn critical(p: &CriticalAlphaParams, mode: ScalarMode) -> Result<Report, Failure> {
    let basis = BasisSpec::new(p.d).map_err(usage)?;
    let config = BisectionConfig {
        alpha_min: p.alpha_min,
        alpha_max: p.alpha_max,
        epsilon: p.epsilon,
    };
    let out = critical_alpha(p.m, p.beta, p.gamma, basis, &config, mode).map_err(usage)?;
    let status = match out.status {
        CriticalStatus::Bracketed => "ok",
        CriticalStatus::HoldsAtMinimum => "holds_at_minimum",
    };
    Ok(Report {
        header: vec!["m", "beta", "gamma", "alpha_crit", "status", "iterations"],
        rows: vec![vec![
            p.m.to_string(),
            p.beta.to_string(),
            p.gamma.to_string(),
            out.alpha.to_string(),
            status.to_string(),
            out.iterations.to_string(),
        ]],
        result: json!({
            "alpha_crit": out.alpha,
            "status": out.status,
            "iterations": out.iterations,
            "noise_floor": mode.default_noise_floor(),
        }),
        notes: vec![format!("alpha_crit = {} ({status})", out.alpha)],
        check_failure: None,
    })
}

fn sweep(p: &LandscapeParams, mode: ScalarMode) -> Result<Report, Failure> {
    if p.beta_min.partial_cmp(&p.beta_max).is_none_or(|o| o.is_gt()) {
        return Err(Failure::Usage(format!(
            "beta_min ({}) must not exceed beta_max ({})",
            p.beta_min, p.beta_max
        )));
    }
    if p.m_min > p.m_max {
        return Err(Failure::Usage(format!(
            "m_min ({}) must not exceed m_max ({})",
            p.m_min, p.m_max
        )));
    }
    if p.beta_steps == 0 || p.m_step == 0 {
        return Err(Failure::Usage("beta_steps and m_step must be at least 1".into()));
    }
    let basis = BasisSpec::new(p.d).map_err(usage)?;
    let config = BisectionConfig::with_epsilon(p.epsilon);
    let betas = p.betas();
    let result = landscape(&p.m_values(), &betas, p.gamma, basis, &config, mode).map_err(usage)?;
    let stabilization = stabilization_report(&result, &betas);
    let mut notes: Vec<String> = result
        .profile
        .iter()
        .map(|pt| match (pt.alpha_crit, pt.argmax_m) {
            (Some(a), Some(m)) => format!("beta = {}: max alpha_crit = {a} at M = {m}", pt.beta),
            _ => format!("beta = {}: no successful cells", pt.beta),
        })
        .collect();
    notes.extend(stabilization.iter().filter_map(|s| {
        Some(format!(
            "beta = {}: running max changes by {} from M <= {} to M <= {}",
            s["beta"].as_f64()?,
            s["change"].as_f64()?,
            s["m_mid"],
            s["m_max"]
        ))
    }));

    let mut rows: Vec<Vec<String>> = result
        .cells
        .iter()
        .map(|c| {
            vec![
                "cell".into(),
                c.m.to_string(),
                c.beta.to_string(),
                c.gamma.to_string(),
                c.alpha_crit.map(|a| a.to_string()).unwrap_or_default(),
                status_text(&c.status),
            ]
        })
        .collect();
    rows.extend(result.profile.iter().map(|pt| {
        vec![
            "profile".into(),
            pt.argmax_m.map(|m| m.to_string()).unwrap_or_default(),
            pt.beta.to_string(),
            p.gamma.gamma(pt.beta).to_string(),
            pt.alpha_crit.map(|a| a.to_string()).unwrap_or_default(),
            "max".into(),
        ]
    }));
    let mut value = serde_json::to_value(&result).expect("serializable landscape");
    value["stabilization"] = Value::Array(stabilization);
    Ok(Report {
        header: vec!["row", "m", "beta", "gamma", "alpha_crit", "status"],
        rows,
        result: value,
        notes,
        check_failure: None,
    })
}

fn status_text(status: &legpos_core::search::CellStatus) -> String {
    use legpos_core::search::CellStatus;
    match status {
        CellStatus::Ok => "ok".into(),
        CellStatus::HoldsAtMinimum => "holds_at_minimum".into(),
        CellStatus::Error(msg) => format!("error: {msg}"),
    }
}

/// Running max over the lower half of the `M` range against the full range.
fn stabilization_report(result: &LandscapeResult, betas: &[f64]) -> Vec<Value> {
    let (lo, hi) = (result.metadata.m_min, result.metadata.m_max);
    let mid = lo + (hi - lo) / 2;
    betas
        .iter()
        .map(|&beta| {
            let narrow = result.running_max(beta, lo, mid);
            let wide = result.running_max(beta, lo, hi);
            json!({
                "beta": beta,
                "m_min": lo,
                "m_mid": mid,
                "m_max": hi,
                "narrow_max": narrow,
                "wide_max": wide,
                "change": narrow.zip(wide).map(|(n, w)| w - n),
            })
        })
        .collect()
}

fn schoenberg_run(p: &SchoenbergConfig) -> Result<Report, Failure> {
    let report = schoenberg::run(p).map_err(usage)?;
    let d = f64::from(report.config.dim);
    let a0 = report.config.a0;
    let rows = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                (r.n as f64).powf(1.0 / d).to_string(),
                r.mean_alpha.to_string(),
                r.std_alpha.to_string(),
                r.samples.to_string(),
                a0.to_string(),
            ]
        })
        .collect();
    let notes = report
        .rows
        .last()
        .map(|r| {
            vec![format!(
                "n = {}: mean alpha0 = {} (planted {a0}, relative error {})",
                r.n,
                r.mean_alpha,
                (r.mean_alpha - a0) / a0
            )]
        })
        .unwrap_or_default();
    Ok(Report {
        header: vec!["n", "n_scaled", "mean_alpha", "std_alpha", "samples", "a0"],
        rows,
        result: json!({ "a0": a0, "rows": report.rows }),
        notes,
        check_failure: None,
    })
}

fn quad_check(p: &QuadCheckParams, mode: ScalarMode) -> Result<Report, Failure> {
    if p.d != 2 {
        return Err(Failure::Usage(format!(
            "quad-check only covers the Legendre basis (d = 2), got d = {}",
            p.d
        )));
    }
    let (spec, basis) = amplitude_spec(&p.amplitude())?;
    let ctx = Precision::from_digits(mode.digits());
    let recurrence: Vec<Float> = match mode {
        ScalarMode::ExactRational => expand_amplitude::<Rational>(&spec, basis, ())
            .map_err(usage)?
            .coefficients
            .coeffs()
            .iter()
            .map(|c| Float::from_rational(c, ctx))
            .collect(),
        ScalarMode::HighPrecisionFloat { .. } => expand_amplitude::<Float>(&spec, basis, ctx)
            .map_err(usage)?
            .coefficients
            .into_coeffs(),
    };
    let degree = p.m as usize + 1;
    let quadrature = coefficients_by_quadrature(
        |x: &Float| evaluate(&spec, x).expect("validated spec"),
        p.nodes,
        degree,
        basis,
        Some(degree),
        ctx,
    )
    .map_err(usage)?;

    let diffs: Vec<Float> = recurrence
        .iter()
        .zip(quadrature.coefficients.coeffs())
        .map(|(a, b)| (a.clone() - b).abs())
        .collect();
    let (worst_n, worst) = diffs
        .iter()
        .enumerate()
        .fold((0, Float::with_val(ctx.bits(), 0)), |best, (n, d)| {
            if *d > best.1 {
                (n, d.clone())
            } else {
                best
            }
        });
    let pass = worst.to_f64() <= p.tolerance;
    let rows = recurrence
        .iter()
        .zip(quadrature.coefficients.coeffs())
        .zip(&diffs)
        .enumerate()
        .map(|(n, ((a, b), d))| {
            vec![
                n.to_string(),
                a.to_decimal_string(),
                b.to_decimal_string(),
                d.to_decimal_string(),
            ]
        })
        .collect();
    let discrepancy = worst.to_decimal_string();
    Ok(Report {
        header: vec!["n", "recurrence", "quadrature", "abs_diff"],
        rows,
        result: json!({
            "max_discrepancy": discrepancy,
            "max_discrepancy_n": worst_n,
            "tolerance": p.tolerance,
            "pass": pass,
        }),
        notes: vec![format!(
            "max |a_n(recurrence) - a_n(quadrature)| = {discrepancy} at n = {worst_n} (tolerance {:e})",
            p.tolerance
        )],
        check_failure: (!pass).then(|| format!("discrepancy {discrepancy} exceeds tolerance {:e}", p.tolerance)),
    })
}
