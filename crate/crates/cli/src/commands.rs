//! Subcommand implementations. Each returns the text for standard output;
//! warnings go to the `warn` sink.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use clap::Parser;
use rlasso_core::simulation::{run_replications, summarize, ReplicationResult};
use rlasso_core::{
    cross_validate, fit_lasso_lqa, fit_ols, fit_restricted_lasso, fit_restricted_ols,
    lambda_grid, objective_value, parse_restriction_file, CvMethod, CvOptions, CvReport, Dataset,
    FitConfig, FitResult, Method, MetricsRow, RestrictionSet, SimScenario,
};
use serde_json::{json, Value};
use thiserror::Error;

use crate::args::{
    Cli, Command, CvArgs, CvControl, DataArgs, ExampleArgs, FitArgs, PenalizedMethodArg,
    SimulateArgs,
};
use crate::data::{load_csv, DataError};
use crate::example::{self, ExampleOptions, ExampleReport, PATH_TARGET, RND_PRIOR};
use crate::output::{emit_table, format_sig, metrics_table, Cell, Format, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad arguments or input files.
    Input,
    /// An estimator failed on valid input.
    Numeric,
}

#[derive(Debug, Error)]
#[error("{stage}: {message}")]
pub struct CliError {
    pub kind: ErrorKind,
    pub stage: &'static str,
    pub message: String,
}

impl CliError {
    pub fn input(stage: &'static str, message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Input,
            stage,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Input => 2,
            ErrorKind::Numeric => 3,
        }
    }

    fn core(stage: &'static str, e: rlasso_core::Error) -> Self {
        Self {
            kind: core_kind(&e),
            stage,
            message: e.to_string(),
        }
    }
}

fn core_kind(e: &rlasso_core::Error) -> ErrorKind {
    use rlasso_core::Error as E;
    match e {
        E::SingularMatrix | E::DegenerateResponse => ErrorKind::Numeric,
        E::CvFit { source, .. } => core_kind(source),
        _ => ErrorKind::Input,
    }
}

fn data_error(e: DataError) -> CliError {
    match e {
        DataError::Model(m) => CliError::core("load data", m),
        other => CliError::input("load data", other.to_string()),
    }
}

/// Parses `args` (program name first), runs the command and writes its
/// output. Returns the process exit code: 0 on success, 2 for input errors,
/// 3 for numerical failures.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Fit(a) => cmd_fit(&a, err),
        Command::Cv(a) => cmd_cv(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Example(a) => cmd_example(&a),
    };
    match result {
        Ok(text) => match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "error: write output: {e}");
                2
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn load(data: &DataArgs) -> Result<Dataset, CliError> {
    load_csv(&data.data, &data.target, data.intercept).map_err(data_error)
}

fn load_restrictions(path: &Path, p: usize) -> Result<RestrictionSet, CliError> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::input("read restrictions", format!("cannot read {}: {e}", path.display()))
    })?;
    parse_restriction_file(&text, p).map_err(|e| CliError::core("parse restrictions", e))
}

fn base_config(data: &DataArgs, p: usize) -> FitConfig {
    let mut config = FitConfig::default();
    if data.no_penalize_intercept {
        let mut mask = vec![true; p];
        mask[0] = false;
        config.penalize_mask = Some(mask);
    }
    config
}

fn cv_options(c: &CvControl) -> CvOptions {
    CvOptions {
        folds: c.folds,
        seed: c.seed,
        rule: c.cv_rule.into(),
    }
}

fn run_cv(
    dataset: &Dataset,
    method: CvMethod,
    restrictions: Option<&RestrictionSet>,
    control: &CvControl,
    config: &FitConfig,
) -> Result<CvReport, CliError> {
    let grid = lambda_grid(dataset, control.grid_points)
        .map_err(|e| CliError::core("lambda grid", e))?;
    cross_validate(dataset, method, restrictions, grid.values(), &cv_options(control), config)
        .map_err(|e| CliError::core("cross-validation", e))
}

pub fn cmd_fit(args: &FitArgs, warn: &mut dyn Write) -> Result<String, CliError> {
    let method: Method = args.method.into();
    let restricted = matches!(method, Method::RestrictedOls | Method::RestrictedLasso);
    let penalized = matches!(method, Method::Lasso | Method::RestrictedLasso);

    if restricted && args.restrictions.is_none() {
        return Err(CliError::input("arguments", format!("--method {} requires --restrictions", method_flag(method))));
    }
    if !penalized && (args.lambda.is_some() || args.cv) {
        return Err(CliError::input("arguments", "--lambda and --cv apply only to lasso and rlasso"));
    }
    if let Some(l) = args.lambda {
        if !(l.is_finite() && l >= 0.0) {
            return Err(CliError::input("arguments", "--lambda must be finite and non-negative"));
        }
    }

    let dataset = load(&args.data)?;
    let restrictions = match &args.restrictions {
        Some(path) if restricted => Some(load_restrictions(path, dataset.p())?),
        Some(_) => {
            let _ = writeln!(
                warn,
                "warning: --restrictions is ignored for --method {}",
                method_flag(method)
            );
            None
        }
        None => None,
    };
    let base = base_config(&args.data, dataset.p());

    let lambda = match (penalized, args.lambda) {
        (false, _) => None,
        (true, Some(l)) => Some(l),
        (true, None) => {
            let cv_method = if restricted { CvMethod::RestrictedLasso } else { CvMethod::Lasso };
            Some(run_cv(&dataset, cv_method, restrictions.as_ref(), &args.cv_control, &base)?.best_lambda)
        }
    };
    let config = FitConfig {
        lambda: lambda.unwrap_or(0.0),
        ..base
    };
    let fit = match (method, &restrictions) {
        (Method::Ols, _) => fit_ols(&dataset),
        (Method::RestrictedOls, Some(r)) => fit_restricted_ols(&dataset, r),
        (Method::Lasso, _) => fit_lasso_lqa(&dataset, &config),
        (Method::RestrictedLasso, Some(r)) => fit_restricted_lasso(&dataset, r, &config),
        _ => unreachable!("restricted methods have restrictions"),
    }
    .map_err(|e| CliError::core("fit", e))?;

    Ok(render_fit(&dataset, method, lambda, &fit, restrictions.as_ref(), &config, args.format))
}

fn method_flag(m: Method) -> &'static str {
    match m {
        Method::Ols => "ols",
        Method::RestrictedOls => "rols",
        Method::Lasso => "lasso",
        Method::RestrictedLasso => "rlasso",
    }
}

fn render_fit(
    dataset: &Dataset,
    method: Method,
    lambda: Option<f64>,
    fit: &FitResult,
    restrictions: Option<&RestrictionSet>,
    config: &FitConfig,
    format: Format,
) -> String {
    let objective = objective_value(
        dataset,
        fit.beta(),
        lambda.unwrap_or(0.0),
        config.penalize_mask.as_deref(),
    );
    let residual = restrictions.map(|r| r.residual(fit.beta()));
    let selected = fit.selected_one_based();

    let mut coefs = Table::new(["index", "name", "estimate", "selected"]);
    for (j, name) in dataset.names().iter().enumerate() {
        coefs.push(vec![
            (j + 1).into(),
            name.as_str().into(),
            fit.beta()[j].into(),
            fit.selected.contains(&j).into(),
        ]);
    }

    match format {
        Format::Csv => emit_table(&coefs, Format::Csv),
        Format::Json => {
            let v = json!({
                "method": method.label(),
                "lambda": lambda.map(json_num),
                "iterations": fit.iterations,
                "converged": fit.converged,
                "objective": json_num(objective),
                "restriction_residual": residual.map(json_num),
                "selected": selected,
                "coefficients": coefs.to_json_rows(),
            });
            pretty(&v)
        }
        Format::Table => {
            let mut s = String::new();
            let _ = writeln!(s, "method:               {}", method.label());
            if let Some(l) = lambda {
                let _ = writeln!(s, "lambda:               {}", format_sig(l));
            }
            let _ = writeln!(s, "iterations:           {}", fit.iterations);
            let _ = writeln!(s, "converged:            {}", fit.converged);
            let _ = writeln!(s, "objective:            {}", format_sig(objective));
            if let Some(r) = residual {
                let _ = writeln!(s, "restriction residual: {}", format_sig(r));
            }
            let _ = writeln!(s, "selected:             {}", example::predictor_label(&selected));
            s.push('\n');
            s.push_str(&emit_table(&coefs, Format::Table));
            s
        }
    }
}

/// JSON number rounded to the printed precision; null for non-finite values.
fn json_num(x: f64) -> Value {
    format_sig(x)
        .parse::<f64>()
        .ok()
        .and_then(serde_json::Number::from_f64)
        .map_or(Value::Null, Value::Number)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("valid JSON");
    s.push('\n');
    s
}

pub fn cmd_cv(args: &CvArgs) -> Result<String, CliError> {
    let dataset = load(&args.data)?;
    let (method, restrictions) = match args.method {
        PenalizedMethodArg::Lasso => {
            if args.restrictions.is_some() {
                return Err(CliError::input("arguments", "--restrictions applies only to --method rlasso"));
            }
            (CvMethod::Lasso, None)
        }
        PenalizedMethodArg::Rlasso => {
            let path = args
                .restrictions
                .as_ref()
                .ok_or_else(|| CliError::input("arguments", "--method rlasso requires --restrictions"))?;
            (CvMethod::RestrictedLasso, Some(load_restrictions(path, dataset.p())?))
        }
    };
    let config = base_config(&args.data, dataset.p());
    let report = run_cv(&dataset, method, restrictions.as_ref(), &args.cv_control, &config)?;

    let mut curve = Table::new(["lambda", "mean_error", "std_error", "chosen"]);
    for c in &report.curve {
        curve.push(vec![
            c.lambda.into(),
            c.mean_error.into(),
            c.std_error.into(),
            (c.lambda == report.best_lambda).into(),
        ]);
    }
    Ok(match args.format {
        Format::Csv => emit_table(&curve, Format::Csv),
        Format::Json => pretty(&json!({
            "best_lambda": json_num(report.best_lambda),
            "lambda_min": json_num(report.lambda_min),
            "rule": report.rule,
            "folds": report.folds,
            "seed": report.seed,
            "curve": curve.to_json_rows(),
        })),
        Format::Table => {
            let mut s = String::new();
            let _ = writeln!(s, "best lambda: {}", format_sig(report.best_lambda));
            let _ = writeln!(s, "lambda min:  {}", format_sig(report.lambda_min));
            let _ = writeln!(s, "folds:       {} (seed {})", report.folds, report.seed);
            s.push('\n');
            s.push_str(&emit_table(&curve, Format::Table));
            s
        }
    })
}

fn scenario_for(args: &SimulateArgs, n: usize) -> SimScenario {
    let mut s = SimScenario::standard(args.scenario, n, args.seed);
    s.n_reps = args.reps;
    s.cv_folds = args.folds;
    s.grid_points = args.grid_points;
    s.cv_rule = args.cv_rule.into();
    s.x_outlier_cells = args.x_outliers.into();
    s.tau = args.tau;
    s
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<String, CliError> {
    if args.sizes.is_empty() {
        return Err(CliError::input("arguments", "--n needs at least one sample size"));
    }
    let scenarios: Vec<SimScenario> = args.sizes.iter().map(|&n| scenario_for(args, n)).collect();
    for s in &scenarios {
        s.validate().map_err(|e| CliError::core("scenario", e))?;
    }

    let execute = || -> Result<Vec<Vec<ReplicationResult>>, CliError> {
        scenarios
            .iter()
            .map(|s| run_replications(s).map_err(|e| CliError::core("simulation", e)))
            .collect()
    };
    let results = match args.threads {
        None => execute()?,
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::input("threads", e.to_string()))?
            .install(execute)?,
    };

    if let Some(path) = &args.dump_estimates {
        let text = estimates_csv(&scenarios, &results);
        fs::write(path, text).map_err(|e| {
            CliError::input("dump estimates", format!("cannot write {}: {e}", path.display()))
        })?;
    }

    let rows: Vec<MetricsRow> = scenarios
        .iter()
        .zip(&results)
        .flat_map(|(s, r)| summarize(s, r))
        .collect();
    Ok(emit_table(&metrics_table(&rows), args.format))
}

/// One row per (n, replication, method) with the estimated coefficients.
pub fn estimates_csv(scenarios: &[SimScenario], results: &[Vec<ReplicationResult>]) -> String {
    let p = scenarios.first().map_or(0, SimScenario::p);
    let mut columns: Vec<String> = ["n", "rep", "method", "lambda"].map(String::from).to_vec();
    columns.extend((1..=p).map(|j| format!("b{j}")));
    columns.push("error".into());
    let mut table = Table::new(columns);
    for (s, reps) in scenarios.iter().zip(results) {
        for rep in reps {
            for o in &rep.outcomes {
                let mut row: Vec<Cell> = vec![s.n.into(), (rep.rep_index + 1).into(), o.method.label().into()];
                match &o.estimate {
                    Ok(e) => {
                        row.push(e.lambda.into());
                        row.extend(e.coefficients.iter().map(|&b| Cell::from(b)));
                        row.push("".into());
                    }
                    Err(err) => {
                        row.push(Cell::Num(f64::NAN));
                        row.extend((0..p).map(|_| Cell::Num(f64::NAN)));
                        row.push(err.to_string().into());
                    }
                }
                table.push(row);
            }
        }
    }
    emit_table(&table, Format::Csv)
}

pub fn cmd_example(args: &ExampleArgs) -> Result<String, CliError> {
    let options = ExampleOptions {
        seed: args.seed,
        folds: args.folds,
        rule: args.cv_rule.into(),
        penalize_intercept: args.penalize_intercept,
        ..ExampleOptions::default()
    };
    let report = example::run_example(&options).map_err(|e| CliError::core("example", e))?;
    Ok(render_example(&report, args.format))
}

fn example_table(report: &ExampleReport) -> Table {
    let mut columns: Vec<String> = vec!["method".into(), "lambda".into()];
    columns.extend(report.data.names().iter().cloned());
    columns.extend(["selected_variables", "loo_mse", "restriction_residual"].map(String::from));
    let mut t = Table::new(columns);
    for m in &report.methods {
        let mut row: Vec<Cell> = vec![m.method.label().into(), m.lambda.into()];
        row.extend(m.coefficients.iter().map(|&b| Cell::from(b)));
        row.push(m.selected_label().into());
        row.push(m.loo_mse.into());
        row.push(m.restriction_residual.into());
        t.push(row);
    }
    t
}

pub fn render_example(report: &ExampleReport, format: Format) -> String {
    let coefs = example_table(report);
    let lasso_hits = report.lasso_path.matching(&PATH_TARGET);
    let rlasso_hits = report.restricted_lasso_path.matching(&PATH_TARGET);
    let target = example::predictor_label(&PATH_TARGET);

    match format {
        Format::Csv => emit_table(&coefs, Format::Csv),
        Format::Json => {
            let path_json = |p: &example::PathReport| -> Value {
                Value::Array(
                    p.lambdas
                        .iter()
                        .zip(&p.selections)
                        .map(|(&l, s)| json!({ "lambda": json_num(l), "selected_variables": example::predictor_label(s) }))
                        .collect(),
                )
            };
            pretty(&json!({
                "seed": report.options.seed,
                "folds": report.options.folds,
                "penalize_intercept": report.options.penalize_intercept,
                "prior": RND_PRIOR,
                "restrictions": rlasso_core::render_restrictions(&report.restrictions).lines().collect::<Vec<_>>(),
                "methods": coefs.to_json_rows(),
                "lasso_path": path_json(&report.lasso_path),
                "restricted_lasso_path": path_json(&report.restricted_lasso_path),
                "path_target": target,
                "lasso_path_contains_target": !lasso_hits.is_empty(),
                "restricted_lasso_path_contains_target": !rlasso_hits.is_empty(),
            }))
        }
        Format::Table => {
            let mut s = String::new();
            let _ = writeln!(s, "R&D expenditure data: n = {}, p = {} (intercept + X1..X4)", report.data.n(), report.data.p());
            s.push_str("restrictions:\n");
            for line in rlasso_core::render_restrictions(&report.restrictions).lines() {
                let _ = writeln!(s, "  {line}");
            }
            let prior: Vec<String> = RND_PRIOR.iter().map(|&b| format_sig(b)).collect();
            let _ = writeln!(s, "prior beta0 (reference only): ({})", prior.join(", "));
            let _ = writeln!(
                s,
                "lambda by {}-fold CV, seed {}; intercept {}",
                report.options.folds,
                report.options.seed,
                if report.options.penalize_intercept { "penalized" } else { "unpenalized" }
            );
            s.push('\n');

            let mut sel = Table::new(["method", "selected_variables"]);
            for m in &report.methods {
                sel.push(vec![m.method.label().into(), m.selected_label().into()]);
            }
            s.push_str("Selected variables\n");
            s.push_str(&emit_table(&sel, Format::Table));
            s.push('\n');
            s.push_str(&emit_table(&coefs, Format::Table));
            s.push('\n');
            for (label, hits, path) in [
                ("LASSO", &lasso_hits, &report.lasso_path),
                ("Res-LASSO", &rlasso_hits, &report.restricted_lasso_path),
            ] {
                let _ = write!(
                    s,
                    "{label} path: {} of {} grid values select exactly {target}",
                    hits.len(),
                    path.lambdas.len()
                );
                if let (Some(hi), Some(lo)) = (hits.first(), hits.last()) {
                    let _ = write!(s, " (lambda {} to {})", format_sig(*lo), format_sig(*hi));
                }
                s.push('\n');
            }
            s
        }
    }
}
