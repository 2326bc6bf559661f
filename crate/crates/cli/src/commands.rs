use num_rational::Ratio;
use permspec_core::cesaro::{
    verify_harmonic_identity, verify_mean_identity, verify_quadratic_identity, verify_telescoping,
    IdentityCheck, DEFAULT_QUADRATIC_CAP,
};
use permspec_core::ewens::sample_cycle_counts;
use permspec_core::experiments::{
    exact_moments, run_clt_fixed, run_coupling_check, run_mesoscopic, run_spacings,
    ExperimentConfig, Model, QUANTILE_LEVELS,
};
use permspec_core::limits::{
    c2_closed, c2_meso, c_numeric, ell_closed, s3_closed, s3_numeric, ArcClass, Arithmetic,
    S3Relation,
};
use permspec_core::numeric::{frac_h, CompensatedSum};
use permspec_core::rng::trial_rng;
use permspec_core::spectral::{attach_phases, count_arc_mod, count_arc_perm};
use permspec_core::{Endpoint, EwensParams};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::output::{fmt_f64, CliError, Report, Table};
use crate::tokens::{build_arc, parse_arcs, parse_token, ArcSpec, Token};

fn usage(e: impl ToString) -> CliError {
    CliError::Usage(e.to_string())
}

fn runtime(e: impl ToString) -> CliError {
    CliError::Runtime(e.to_string())
}

fn check_theta(theta: f64) -> Result<EwensParams, CliError> {
    EwensParams::new(theta).map_err(usage)
}

fn resolve_arcs(a: &ArcArgs) -> Result<Vec<ArcSpec>, CliError> {
    match (&a.arcs, &a.alpha, &a.beta) {
        (Some(list), _, _) => {
            let arcs = parse_arcs(list).map_err(usage)?;
            if arcs.is_empty() {
                return Err(usage("--arcs lists no arc"));
            }
            Ok(arcs)
        }
        (None, Some(alpha), Some(beta)) => Ok(vec![build_arc(alpha, beta).map_err(usage)?]),
        (None, None, None) => Ok(Vec::new()),
        _ => Err(usage("--alpha and --beta must be given together")),
    }
}

fn require_arcs(a: &ArcArgs) -> Result<Vec<ArcSpec>, CliError> {
    let arcs = resolve_arcs(a)?;
    if arcs.is_empty() {
        return Err(usage("an arc is required: pass --alpha and --beta, or --arcs"));
    }
    Ok(arcs)
}

fn resolve_sizes(s: &Sizes, default: &[usize]) -> Result<Vec<usize>, CliError> {
    let sizes = match (&s.n, &s.n_list) {
        (Some(n), _) => vec![*n],
        (None, Some(list)) => list.clone(),
        (None, None) if !default.is_empty() => default.to_vec(),
        (None, None) => return Err(usage("--n or --n-list is required")),
    };
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(usage("sizes must be positive"));
    }
    Ok(sizes)
}

fn model_name(m: Model) -> &'static str {
    match m {
        Model::Perm => "perm",
        Model::Mod => "mod",
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable report")
}

pub fn run(command: &Command) -> Result<Report, CliError> {
    match command {
        Command::Sample(a) => sample(a),
        Command::ExactMoments(a) => moments(a),
        Command::Constants(a) => constants(a),
        Command::Clt(a) => clt(a),
        Command::Mesoscopic(a) => mesoscopic(a),
        Command::Spacings(a) => spacings(a),
        Command::CouplingCheck(a) => coupling(a),
        Command::Identities(a) => identities(a),
    }
}

pub fn common(command: &Command) -> &Common {
    match command {
        Command::Sample(a) => &a.common,
        Command::ExactMoments(a) => &a.common,
        Command::Constants(a) => &a.common,
        Command::Clt(a) => &a.common,
        Command::Mesoscopic(a) => &a.common,
        Command::Spacings(a) => &a.common,
        Command::CouplingCheck(a) => &a.common,
        Command::Identities(a) => &a.common,
    }
}

fn check_trials(trials: usize) -> Result<(), CliError> {
    if trials < 2 {
        return Err(usage("--trials must be at least 2"));
    }
    Ok(())
}

#[derive(Serialize)]
struct SampleRow {
    trial: u64,
    total_cycles: usize,
    largest_length: usize,
    cycle_type: Vec<(usize, usize)>,
    counts: Vec<u64>,
}

fn sample(a: &SampleArgs) -> Result<Report, CliError> {
    let params = check_theta(a.common.theta)?;
    if a.n == 0 {
        return Err(usage("--n must be positive"));
    }
    if a.seeded.trials == 0 {
        return Err(usage("--trials must be positive"));
    }
    let arcs = resolve_arcs(&a.arcs)?;
    let model: Model = a.model.into();
    let rows: Vec<SampleRow> = (0..a.seeded.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(a.seeded.seed, t);
            let counts = sample_cycle_counts(a.n, &params, &mut rng);
            let arc_counts = match model {
                Model::Perm => arcs
                    .iter()
                    .map(|s| count_arc_perm(&counts, &s.classified.arc))
                    .collect(),
                Model::Mod => {
                    let spectrum = attach_phases(&counts, &mut rng);
                    arcs.iter()
                        .map(|s| count_arc_mod(&spectrum, &s.classified.arc))
                        .collect()
                }
            };
            SampleRow {
                trial: t,
                total_cycles: counts.total_cycles(),
                largest_length: counts.largest_length(),
                cycle_type: counts.iter().collect(),
                counts: arc_counts,
            }
        })
        .collect();

    let mut header = vec!["trial", "total_cycles", "largest_length", "cycle_type"]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
    header.extend((0..arcs.len()).map(|k| format!("count_{k}")));
    let table = Table {
        header,
        rows: rows
            .iter()
            .map(|r| {
                let mut row = vec![
                    r.trial.to_string(),
                    r.total_cycles.to_string(),
                    r.largest_length.to_string(),
                    r.cycle_type
                        .iter()
                        .map(|(j, m)| format!("{j}^{m}"))
                        .collect::<Vec<_>>()
                        .join(" "),
                ];
                row.extend(r.counts.iter().map(u64::to_string));
                row
            })
            .collect(),
    };
    Ok(Report {
        echo: json!({
            "n": a.n,
            "theta": a.common.theta,
            "model": model_name(model),
            "arcs": to_value(&arcs),
            "seed": a.seeded.seed,
            "trials": a.seeded.trials,
        }),
        results: json!({ "trials": to_value(&rows) }),
        table,
    })
}

fn moments(a: &MomentsArgs) -> Result<Report, CliError> {
    check_theta(a.common.theta)?;
    let sizes = resolve_sizes(&a.sizes, &[])?;
    let arcs = require_arcs(&a.arcs)?;
    let model: Model = a.model.into();
    let mut rows = Vec::new();
    for &n in &sizes {
        for (k, spec) in arcs.iter().enumerate() {
            let m = exact_moments(model, n, a.common.theta, &spec.classified.arc).map_err(runtime)?;
            rows.push(json!({
                "n": n,
                "arc": k,
                "alpha": spec.alpha,
                "beta": spec.beta,
                "mean": m.mean,
                "variance": m.variance,
            }));
        }
    }
    let table = Table::from_rows(&["n", "arc", "alpha", "beta", "mean", "variance"], &rows);
    Ok(Report {
        echo: json!({
            "n": sizes,
            "theta": a.common.theta,
            "model": model_name(model),
            "arcs": to_value(&arcs),
        }),
        results: json!({ "moments": rows }),
        table,
    })
}

fn default_endpoints(case: CaseArg) -> (&'static str, &'static str) {
    match case {
        CaseArg::BothIrrationalIndependent => ("irr:sqrt2", "irr:golden"),
        CaseArg::RationalAlpha => ("rat:1/3", "irr:golden"),
        CaseArg::RationalBeta => ("irr:sqrt2", "rat:2/3"),
        CaseArg::BothRational => ("rat:1/3", "rat:3/4"),
        CaseArg::AffineRelated => ("irr:sqrt2", "affine:1/2+1/2*alpha"),
    }
}

fn case_of(class: &ArcClass) -> CaseArg {
    match class {
        ArcClass::BothIrrationalIndependent { .. } => CaseArg::BothIrrationalIndependent,
        ArcClass::RationalAlpha { .. } => CaseArg::RationalAlpha,
        ArcClass::RationalBeta { .. } => CaseArg::RationalBeta,
        ArcClass::BothRational { .. } => CaseArg::BothRational,
        ArcClass::AffineRelated { .. } => CaseArg::AffineRelated,
    }
}

fn case_name(case: CaseArg) -> &'static str {
    match case {
        CaseArg::BothIrrationalIndependent => "both-irrational-independent",
        CaseArg::RationalAlpha => "rational-alpha",
        CaseArg::RationalBeta => "rational-beta",
        CaseArg::BothRational => "both-rational",
        CaseArg::AffineRelated => "affine-related",
    }
}

/// Arithmetic of the width `β - α`.
fn width_arithmetic(class: &ArcClass) -> Arithmetic {
    let rational = |d: Ratio<i64>| {
        let f = d - d.floor();
        Arithmetic::Rational {
            p: *f.numer(),
            q: *f.denom(),
        }
    };
    match *class {
        ArcClass::BothRational { p, q, r, s } => rational(Ratio::new(r, s) - Ratio::new(p, q)),
        ArcClass::AffineRelated { p, q, r, s, .. } if r == s => rational(Ratio::new(p, q)),
        _ => Arithmetic::Irrational,
    }
}

fn alpha_arithmetic(class: &ArcClass) -> Arithmetic {
    match *class {
        ArcClass::RationalAlpha { p, q, .. } | ArcClass::BothRational { p, q, .. } => {
            Arithmetic::Rational { p, q }
        }
        _ => Arithmetic::Irrational,
    }
}

fn s3_relation(class: &ArcClass) -> (S3Relation, f64, f64) {
    let (a, b) = (class.alpha_value(), class.beta_value());
    match *class {
        ArcClass::BothIrrationalIndependent { .. } => (S3Relation::Independent, a, b),
        ArcClass::RationalAlpha { p, q, .. } => (S3Relation::RationalIrrational { p, q }, b, a),
        ArcClass::RationalBeta { r, s, .. } => (S3Relation::RationalIrrational { p: r, q: s }, a, b),
        ArcClass::BothRational { p, q, r, s } => (S3Relation::BothRational { p, q, r, s }, a, b),
        ArcClass::AffineRelated { p, q, r, s, .. } => (S3Relation::Affine { p, q, r, s }, a, b),
    }
}

fn constants(a: &ConstantsArgs) -> Result<Report, CliError> {
    if a.n == 0 {
        return Err(usage("--n must be positive"));
    }
    let mut arcs = resolve_arcs(&a.arcs)?;
    if arcs.is_empty() {
        let case = a
            .case
            .ok_or_else(|| usage("pass --case, or endpoints via --alpha/--beta or --arcs"))?;
        let (al, be) = default_endpoints(case);
        arcs.push(build_arc(al, be).map_err(usage)?);
    }
    let n = a.n;
    let mut rows = Vec::new();
    for spec in &arcs {
        let class = spec.class.ok_or_else(|| {
            usage("constants need exact endpoint tokens (rat:, irr:, affine:), not floats")
        })?;
        let case = case_of(&class);
        if let Some(want) = a.case {
            if want != case {
                return Err(usage(format!(
                    "endpoints {},{} are of case {}, not {}",
                    spec.alpha_token,
                    spec.beta_token,
                    case_name(case),
                    case_name(want)
                )));
            }
        }
        let (al, be) = (class.alpha_value(), class.beta_value());
        let delta = be - al;
        let ell_numeric = {
            let acc: CompensatedSum = (1..=n).map(|j| frac_h(j as f64 * delta)).collect();
            acc.value() / n as f64
        };
        let (relation, x, y) = s3_relation(&class);
        rows.push(json!({
            "case": case_name(case),
            "alpha": spec.alpha,
            "beta": spec.beta,
            "c2_closed": c2_closed(&class).map_err(runtime)?,
            "c2_numeric": c_numeric(be, al, be, al, n),
            "ell_closed": ell_closed(&width_arithmetic(&class)).map_err(runtime)?,
            "ell_numeric": ell_numeric,
            "s3_closed": s3_closed(&relation).map_err(runtime)?,
            "s3_numeric": s3_numeric(x, y, n),
            "c2_meso": c2_meso(&alpha_arithmetic(&class)).map_err(runtime)?,
        }));
    }
    let table = Table::from_rows(
        &[
            "case", "alpha", "beta", "c2_closed", "c2_numeric", "ell_closed", "ell_numeric",
            "s3_closed", "s3_numeric", "c2_meso",
        ],
        &rows,
    );
    Ok(Report {
        echo: json!({
            "case": a.case.map(case_name),
            "arcs": to_value(&arcs),
            "n": n,
        }),
        results: json!({ "constants": rows }),
        table,
    })
}

fn clt(a: &CltArgs) -> Result<Report, CliError> {
    let arcs = require_arcs(&a.arcs)?;
    let model: Model = a.model.into();
    let config = ExperimentConfig {
        n_schedule: vec![a.n],
        theta: a.common.theta,
        arcs: arcs.iter().map(|s| s.classified).collect(),
        trials: a.seeded.trials,
        master_seed: a.seeded.seed,
        model,
        meso_exponent: None,
    };
    config.validate().map_err(usage)?;
    let report = run_clt_fixed(&config).map_err(runtime)?;
    let m = report.matrix.arcs;
    let mut header = vec!["trial".to_string()];
    header.extend((0..m).map(|k| format!("z_{k}")));
    let table = Table {
        header,
        rows: (0..report.matrix.trials)
            .map(|t| {
                let mut row = vec![t.to_string()];
                row.extend((0..m).map(|k| fmt_f64(report.matrix.get(t, k))));
                row
            })
            .collect(),
    };
    Ok(Report {
        echo: json!({
            "n": a.n,
            "theta": a.common.theta,
            "model": model_name(model),
            "arcs": to_value(&arcs),
            "seed": a.seeded.seed,
            "trials": a.seeded.trials,
        }),
        results: to_value(&report),
        table,
    })
}

fn mesoscopic(a: &MesoArgs) -> Result<Report, CliError> {
    let sizes = resolve_sizes(&a.sizes, &[10_000, 100_000, 1_000_000])?;
    let alpha = match parse_token(&a.alpha).map_err(usage)? {
        Token::Rational(r) => Endpoint::Rational(r),
        Token::Float(x) | Token::Irrational(x) => Endpoint::Real(x),
        Token::Affine { .. } => return Err(usage("--alpha cannot be an affine token")),
    };
    let v = alpha.value();
    if !(0.0..1.0).contains(&v) {
        return Err(usage("--alpha must lie in [0, 1)"));
    }
    let model: Model = a.model.into();
    let placeholder = permspec_core::Arc::new(alpha, Endpoint::Real(v + 0.5)).map_err(usage)?;
    let config = ExperimentConfig {
        n_schedule: sizes.clone(),
        theta: a.common.theta,
        arcs: vec![permspec_core::ClassifiedArc {
            arc: placeholder,
            class: None,
        }],
        trials: a.seeded.trials,
        master_seed: a.seeded.seed,
        model,
        meso_exponent: Some(a.gamma),
    };
    config.validate().map_err(usage)?;
    let report = run_mesoscopic(&config).map_err(runtime)?;
    let rows: Vec<Value> = report.rows.iter().map(to_value).collect();
    let table = Table::from_rows(
        &["n", "delta", "log_n_delta", "exact_mean", "exact_variance", "target", "ratio"],
        &rows,
    );
    Ok(Report {
        echo: json!({
            "n": sizes,
            "alpha": a.alpha,
            "gamma": a.gamma,
            "theta": a.common.theta,
            "model": model_name(model),
            "seed": a.seeded.seed,
            "trials": a.seeded.trials,
        }),
        results: to_value(&report),
        table,
    })
}

fn spacings(a: &SpacingsArgs) -> Result<Report, CliError> {
    check_theta(a.common.theta)?;
    check_trials(a.seeded.trials)?;
    let sizes = resolve_sizes(&a.sizes, &[1000, 4000, 16_000])?;
    let report =
        run_spacings(&sizes, a.common.theta, a.seeded.trials, a.seeded.seed).map_err(runtime)?;
    let stats = ["n_d", "n2_d", "n_d_tilde", "n2_d_tilde"];
    let mut header = vec!["n".to_string()];
    for s in stats {
        for p in QUANTILE_LEVELS {
            header.push(format!("{s}_q{:02}", (p * 100.0).round() as u32));
        }
    }
    header.extend(["n_d_below_one", "n2_d_below_one", "tilde_exceeds"].map(String::from));
    let table = Table {
        header,
        rows: report
            .rows
            .iter()
            .map(|r| {
                let q = &r.quantiles;
                let mut row = vec![r.n.to_string()];
                for arr in [q.n_d, q.n2_d, q.n_d_tilde, q.n2_d_tilde] {
                    row.extend(arr.iter().map(|&x| fmt_f64(x)));
                }
                row.extend(
                    [
                        r.violations.n_d_below_one,
                        r.violations.n2_d_below_one,
                        r.violations.tilde_exceeds,
                    ]
                    .map(|v| v.to_string()),
                );
                row
            })
            .collect(),
    };
    Ok(Report {
        echo: json!({
            "n": sizes,
            "theta": a.common.theta,
            "seed": a.seeded.seed,
            "trials": a.seeded.trials,
        }),
        results: to_value(&report),
        table,
    })
}

fn coupling(a: &CouplingArgs) -> Result<Report, CliError> {
    check_theta(a.common.theta)?;
    check_trials(a.seeded.trials)?;
    if a.n == 0 {
        return Err(usage("--n must be positive"));
    }
    if !(a.epsilon_tail > 0.0) {
        return Err(usage("--epsilon-tail must be positive"));
    }
    let report = run_coupling_check(
        a.n,
        a.common.theta,
        a.seeded.trials,
        a.seeded.seed,
        a.epsilon_tail,
    )
    .map_err(runtime)?;
    let value = to_value(&report);
    let table = Table::from_rows(
        &[
            "n",
            "theta",
            "trials",
            "horizon",
            "tail_bound",
            "empirical_mean_distance",
            "std_error",
            "bound",
            "finite_n_bound",
        ],
        std::slice::from_ref(&value),
    );
    Ok(Report {
        echo: json!({
            "n": a.n,
            "theta": a.common.theta,
            "epsilon_tail": a.epsilon_tail,
            "seed": a.seeded.seed,
            "trials": a.seeded.trials,
        }),
        results: value,
        table,
    })
}

fn identity_row(name: &str, check: &IdentityCheck, tol: f64) -> Value {
    let gap = check.relative_gap();
    json!({
        "identity": name,
        "lhs": check.lhs,
        "rhs": check.rhs,
        "relative_gap": gap,
        "pass": gap < tol,
    })
}

fn identities(a: &IdentitiesArgs) -> Result<Report, CliError> {
    let theta = a.common.theta;
    check_theta(theta)?;
    if a.n == 0 {
        return Err(usage("--n must be positive"));
    }
    let n = a.n;
    let tol = a.tolerance;
    let mut rows = vec![
        identity_row("mean", &verify_mean_identity(n, theta).map_err(runtime)?, tol),
        identity_row("harmonic", &verify_harmonic_identity(n, theta).map_err(runtime)?, tol),
    ];
    if n <= DEFAULT_QUADRATIC_CAP {
        let q = verify_quadratic_identity(n, theta, DEFAULT_QUADRATIC_CAP).map_err(runtime)?;
        rows.push(identity_row("quadratic", &q, tol));
    }
    let worst = (1..=n)
        .map(|j| verify_telescoping(n, j, theta))
        .collect::<Result<Vec<_>, _>>()
        .map_err(runtime)?
        .into_iter()
        .max_by(|x, y| x.relative_gap().total_cmp(&y.relative_gap()))
        .expect("n >= 1");
    rows.push(identity_row("telescoping", &worst, tol));
    let max_gap = rows
        .iter()
        .map(|r| r["relative_gap"].as_f64().unwrap_or(f64::NAN))
        .fold(0.0, f64::max);
    let all_pass = rows.iter().all(|r| r["pass"] == json!(true));
    let table = Table::from_rows(&["identity", "lhs", "rhs", "relative_gap", "pass"], &rows);
    Ok(Report {
        echo: json!({ "n": n, "theta": theta, "tolerance": tol }),
        results: json!({
            "identities": rows,
            "max_relative_gap": max_gap,
            "all_pass": all_pass,
            "quadratic_skipped": n > DEFAULT_QUADRATIC_CAP,
        }),
        table,
    })
}
