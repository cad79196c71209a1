use std::fs;
use std::path::Path;

use l1exact::angles::{AngleConfig, AngleError, ExternalPrefactor};
use l1exact::asymptotics::{pt_alpha, rate, AsymError, AsymParams};
use l1exact::exactprob::{ExactEngine, ProbBreakdown, ProbError, ProblemDims, SumForm};
use l1exact::montecarlo::{estimate, McError, TrialConfig};
use serde_json::{json, Map};

use crate::args::{AsymArgs, ExactArgs, Format, MethodArg, OutputArgs, PrefactorArg, SimulateArgs};
use crate::output::{Cell, OutputRecord, Table};
use crate::ranges::{parse_int_range, parse_real_range};
use crate::CliError;

pub const EXACT_COLUMNS: [&str; 6] = ["variant", "k", "m", "n", "p_err", "err_bound"];
pub const SIMULATE_COLUMNS: [&str; 11] =
    ["variant", "k", "m", "n", "p_err", "err_bound", "trials", "failures", "ci_low", "ci_high", "seed"];
pub const ASYM_COLUMNS: [&str; 6] = ["variant", "beta", "alpha", "rate", "mu_star", "gamma_star"];
pub const TERM_COLUMNS: [&str; 10] =
    ["m", "form", "l", "family", "log_count", "internal", "external", "value", "error_bound", "sign"];

pub fn prob_error(e: ProbError) -> CliError {
    match e {
        ProbError::InvalidDims { .. } => CliError::BadInput(e.to_string()),
        ProbError::Angle(AngleError::InvalidIndex { .. }) => CliError::BadInput(e.to_string()),
        _ => CliError::Quadrature(e.to_string()),
    }
}

pub fn asym_error(e: AsymError) -> CliError {
    match e {
        AsymError::InvalidParams { .. } => CliError::BadInput(e.to_string()),
        _ => CliError::RootFinding(e.to_string()),
    }
}

fn mc_error(e: McError) -> CliError {
    match e {
        McError::InvalidConfig(_) => CliError::BadInput(e.to_string()),
        _ => CliError::Quadrature(e.to_string()),
    }
}

pub fn angle_config(p: PrefactorArg) -> AngleConfig {
    AngleConfig { external_prefactor: p.prefactor(), ..AngleConfig::default() }
}

fn form_name(f: SumForm) -> &'static str {
    match f {
        SumForm::Top => "top",
        SumForm::Bottom => "bottom",
        SumForm::OneMinusBottom => "one_minus_bottom",
    }
}

fn push_terms(t: &mut Table, m: u32, b: &ProbBreakdown) {
    let sign = if b.form == SumForm::OneMinusBottom { -2 } else { 2 };
    for term in &b.terms {
        t.push(vec![
            m.into(),
            form_name(b.form).into(),
            term.l.into(),
            format!("{:?}", term.family).into(),
            term.count.log.into(),
            term.internal.value.into(),
            term.external.value.into(),
            term.value.into(),
            term.error_bound.into(),
            Cell::Int(sign),
        ]);
    }
}

/// Checks that a dimension range is valid before any work is done.
fn dims_for(k: u32, m: &str, n: u32) -> Result<Vec<ProblemDims>, CliError> {
    parse_int_range(m)?.map(|m| ProblemDims::new(k, m, n).map_err(prob_error)).collect()
}

pub fn cmd_exact(a: &ExactArgs) -> Result<OutputRecord, CliError> {
    check_plot_args(a.emit_plot_script.as_deref(), &a.output)?;
    let dims = dims_for(a.k, &a.m, a.n)?;
    let engine = ExactEngine::new(angle_config(a.external_prefactor));
    let variant = a.variant.variant();
    let mut table = Table::new(&EXACT_COLUMNS);
    let mut terms = Table::new(&TERM_COLUMNS);
    for d in dims {
        let b = engine.p_err(variant, d).map_err(prob_error)?;
        table.push(vec![a.variant.name().into(), d.k.into(), d.m.into(), d.n.into(), b.value.into(), b.error_bound.into()]);
        push_terms(&mut terms, d.m, &b);
    }
    let mut command = format!("l1exact exact --variant {} --k {} --m {} --n {}", a.variant.name(), a.k, a.m.trim(), a.n);
    let mut params = Map::new();
    params.insert("variant".into(), json!(a.variant.name()));
    params.insert("k".into(), json!(a.k));
    params.insert("m".into(), json!(a.m.trim()));
    params.insert("n".into(), json!(a.n));
    if a.external_prefactor.prefactor() != ExternalPrefactor::Gaussian {
        command.push_str(" --external-prefactor printed");
        params.insert("external_prefactor".into(), json!("printed"));
    }
    let mut rec = OutputRecord::new(command, params, table);
    if a.breakdown {
        rec.terms = Some(terms);
    }
    if let Some(p) = &a.emit_plot_script {
        write_plot_script(p, &a.output, "m", "p_err", None, &format!("{} k={} n={}", a.variant.name(), a.k, a.n))?;
    }
    Ok(rec)
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<OutputRecord, CliError> {
    check_plot_args(a.emit_plot_script.as_deref(), &a.output)?;
    let dims = dims_for(a.k, &a.m, a.n)?;
    let variant = a.variant.variant();
    let mut table = Table::new(&SIMULATE_COLUMNS);
    for d in dims {
        let mut cfg = TrialConfig::new(d, variant, a.trials, a.seed);
        cfg.method = a.method.method();
        let e = estimate(&cfg).map_err(mc_error)?;
        if e.flagged {
            eprintln!("l1exact: warning: {} of {} trials at m={} hit LP solver failures", e.solver_failures, a.trials, d.m);
        }
        table.push(vec![
            a.variant.name().into(),
            d.k.into(),
            d.m.into(),
            d.n.into(),
            e.p_hat.into(),
            e.std_error().into(),
            e.trials.into(),
            e.failures.into(),
            e.ci_low.into(),
            e.ci_high.into(),
            a.seed.into(),
        ]);
    }
    let method = if a.method == MethodArg::Nullspace { "nullspace" } else { "recovery" };
    let command = format!(
        "l1exact simulate --variant {} --k {} --m {} --n {} --trials {} --seed {} --method {}",
        a.variant.name(),
        a.k,
        a.m.trim(),
        a.n,
        a.trials,
        a.seed,
        method
    );
    let mut params = Map::new();
    params.insert("variant".into(), json!(a.variant.name()));
    params.insert("k".into(), json!(a.k));
    params.insert("m".into(), json!(a.m.trim()));
    params.insert("n".into(), json!(a.n));
    params.insert("trials".into(), json!(a.trials));
    params.insert("method".into(), json!(method));
    params.insert("confidence".into(), json!(0.95));
    let mut rec = OutputRecord::new(command, params, table);
    rec.seed = Some(a.seed);
    if let Some(p) = &a.emit_plot_script {
        let title = format!("{} k={} n={} ({} trials)", a.variant.name(), a.k, a.n, a.trials);
        write_plot_script(p, &a.output, "m", "p_err", Some(("ci_low", "ci_high")), &title)?;
    }
    Ok(rec)
}

pub fn cmd_asym(a: &AsymArgs) -> Result<OutputRecord, CliError> {
    check_plot_args(a.emit_plot_script.as_deref(), &a.output)?;
    let betas = parse_real_range(&a.beta)?;
    let auto = a.alpha.trim() == "auto";
    let alphas = if auto { Vec::new() } else { parse_real_range(&a.alpha)? };
    for &b in &betas {
        if !(b > 0.0 && b < 1.0) {
            return Err(CliError::BadInput(format!("beta must lie in (0, 1), got {b}")));
        }
    }
    let variant = a.variant.variant();
    let mut cols = ASYM_COLUMNS.to_vec();
    if auto {
        cols.push("beta_over_alpha");
    }
    let mut table = Table::new(&cols);
    for &beta in &betas {
        let alpha_list = if auto { vec![pt_alpha(beta, variant).map_err(asym_error)?] } else { alphas.clone() };
        for alpha in alpha_list {
            let p = AsymParams::new(alpha, beta).map_err(asym_error)?;
            let r = rate(p, variant).map_err(asym_error)?;
            let mut row: Vec<Cell> = vec![
                a.variant.name().into(),
                beta.into(),
                alpha.into(),
                r.rate.into(),
                r.mu_star.into(),
                r.gamma_star.into(),
            ];
            if auto {
                row.push((beta / alpha).into());
            }
            table.push(row);
        }
    }
    let command = format!("l1exact asym --variant {} --beta {} --alpha {}", a.variant.name(), a.beta.trim(), a.alpha.trim());
    let mut params = Map::new();
    params.insert("variant".into(), json!(a.variant.name()));
    params.insert("beta".into(), json!(a.beta.trim()));
    params.insert("alpha".into(), json!(a.alpha.trim()));
    let rec = OutputRecord::new(command, params, table);
    if let Some(p) = &a.emit_plot_script {
        let title = format!("{} variant", a.variant.name());
        if auto {
            write_plot_script(p, &a.output, "alpha", "beta_over_alpha", None, &title)?;
        } else {
            write_plot_script(p, &a.output, "alpha", "rate", None, &title)?;
        }
    }
    Ok(rec)
}

fn check_plot_args(script: Option<&Path>, out: &OutputArgs) -> Result<(), CliError> {
    if script.is_some() && (out.out.is_none() || out.format != Format::Csv) {
        return Err(CliError::BadInput("--emit-plot-script needs --format csv and --out".into()));
    }
    Ok(())
}

fn write_plot_script(
    path: &Path,
    out: &OutputArgs,
    x: &str,
    y: &str,
    band: Option<(&str, &str)>,
    title: &str,
) -> Result<(), CliError> {
    let data = out.out.as_ref().expect("checked by check_plot_args");
    let data = data.to_string_lossy().replace('\'', "''");
    let using = match band {
        Some((lo, hi)) => format!("using '{x}':'{y}':'{lo}':'{hi}' with yerrorbars"),
        None => format!("using '{x}':'{y}' with linespoints"),
    };
    let script = format!(
        "set datafile separator ','\nset key off\nset title '{title}'\nset xlabel '{x}'\nset ylabel '{y}'\nplot '{data}' {using}\n"
    );
    fs::write(path, script)?;
    Ok(())
}

fn terms_path(out: &Path) -> std::path::PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.terms.csv"))
}

/// Writes `rec` in the requested format. In CSV mode the per-term table goes
/// to `<stem>.terms.csv` next to `--out`, or after a blank line on stdout.
pub fn write_output(rec: &OutputRecord, out: &OutputArgs) -> Result<(), CliError> {
    let text = match out.format {
        Format::Table => rec.to_text(),
        Format::Json => rec.to_json(),
        Format::Csv => {
            let mut s = rec.table.to_csv();
            if let Some(t) = &rec.terms {
                match &out.out {
                    Some(p) => fs::write(terms_path(p), t.to_csv())?,
                    None => {
                        s.push('\n');
                        s.push_str(&t.to_csv());
                    }
                }
            }
            s
        }
    };
    match &out.out {
        Some(p) => fs::write(p, text)?,
        None => {
            use std::io::Write;
            let mut h = std::io::stdout().lock();
            h.write_all(text.as_bytes())?;
            h.flush()?;
        }
    }
    Ok(())
}

/// Looks up a float column of a parsed table, for tests and scripts.
pub fn column_f64(t: &Table, name: &str) -> Option<Vec<f64>> {
    let j = t.column(name)?;
    t.rows.iter().map(|r| r[j].as_f64()).collect()
}

