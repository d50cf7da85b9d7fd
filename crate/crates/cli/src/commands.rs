use std::io::Write;
use std::path::Path;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use sos_ggm::boundary_law::{solve_generic, ModelParams, PairKind};
use sos_ggm::external_field::{enumerate_measure_candidates, solve_field_elimination, FieldParams};
use sos_ggm::format::{fmt_g17, to_json_string};
use sos_ggm::ggm::{
    boundary_law_from_field, boundary_law_from_pair, budget_from_env, build_window,
    check_consistency, marginal_from_outer_with_budget, measure_with_budget, ConsistencyReport,
    GradientMeasureTable, PeriodicBoundaryLaw, Pin,
};
use sos_ggm::phase_diagram::{scan_tau, scan_tau_h, to_csv};
use sos_ggm::rational::parse_rational;
use sos_ggm::verify::{run_checks, CHECKS};

use crate::{exit, Format, GgmArgs, ModelArgs, ScanArgs, SolveArgs, VerifyArgs};

/// Entrywise tolerance for the window consistency check.
const CONSISTENCY_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] sos_ggm::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot serialise output: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use sos_ggm::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io(_) => exit::USAGE,
            CliError::Core(E::InvalidParameter(_) | E::Domain(_) | E::BudgetExceeded { .. }) => {
                exit::USAGE
            }
            CliError::Core(_) | CliError::Json(_) => exit::INVARIANT,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn parse_f64(name: &str, s: &str) -> CliResult<(BigRational, f64)> {
    let r =
        parse_rational(s).map_err(|_| CliError::Usage(format!("--{name}: not a number: {s:?}")))?;
    let f = r
        .to_f64()
        .filter(|f| f.is_finite())
        .ok_or_else(|| CliError::Usage(format!("--{name}: out of range: {s:?}")))?;
    Ok((r, f))
}

fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn json_line<T: Serialize>(value: &T) -> CliResult<String> {
    Ok(to_json_string(value)? + "\n")
}

#[derive(Serialize)]
struct SolutionRow {
    a: f64,
    b: f64,
    branch: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    index: Option<u8>,
    residuals: [f64; 2],
}

#[derive(Serialize)]
struct SolveReport {
    k: u32,
    tau: f64,
    tau_exact: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    h1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    h2: Option<f64>,
    count: usize,
    solutions: Vec<SolutionRow>,
}

struct Solved {
    report: SolveReport,
    laws: Vec<PeriodicBoundaryLaw>,
}

fn solve_model(m: &ModelArgs) -> CliResult<Solved> {
    if m.k < 2 {
        return Err(CliError::Usage(format!(
            "--k must be at least 2, got {}",
            m.k
        )));
    }
    if !(m.tol > 0.0 && m.tol < 1e-3) {
        return Err(CliError::Usage(format!(
            "--tol must lie in (0, 1e-3), got {}",
            m.tol
        )));
    }
    let (tau_exact, tau) = parse_f64("tau", &m.tau)?;
    let params = ModelParams::exact(m.k, tau_exact.clone())
        .map_err(|_| CliError::Usage(format!("--tau must exceed 2, got {}", m.tau)))?;
    let field = match (&m.h1, &m.h2) {
        (None, None) => None,
        (h1, h2) => {
            let h1 = parse_f64("h1", h1.as_deref().unwrap_or("1"))?.1;
            let h2 = parse_f64("h2", h2.as_deref().unwrap_or("1"))?.1;
            if !(h1 > 0.0 && h2 > 0.0) {
                return Err(CliError::Usage(format!(
                    "fields must be positive, got h1={h1}, h2={h2}"
                )));
            }
            Some((h1, h2))
        }
    };
    let (rows, laws) = match field {
        None => {
            let pairs = solve_generic(&params, m.tol)?;
            let rows: Vec<SolutionRow> = pairs
                .iter()
                .map(|p| SolutionRow {
                    a: p.a,
                    b: p.b,
                    branch: match p.kind {
                        PairKind::Equal => "equal".into(),
                        PairKind::Unequal => "unequal".into(),
                    },
                    index: None,
                    residuals: p.residuals,
                })
                .collect();
            let laws = pairs
                .iter()
                .map(boundary_law_from_pair)
                .collect::<Result<_, _>>()?;
            (rows, laws)
        }
        Some((h1, h2)) => {
            let sols = if m.k == 2 && h1 == h2 {
                enumerate_measure_candidates(tau, h1)?
            } else {
                solve_field_elimination(&FieldParams::with_base(params.clone(), h1, h2)?, m.tol)?
            };
            let rows: Vec<SolutionRow> = sols
                .iter()
                .map(|s| SolutionRow {
                    a: s.a,
                    b: s.b,
                    branch: serde_json::to_value(s.branch)
                        .ok()
                        .and_then(|v| v.as_str().map(str::to_owned))
                        .unwrap_or_default(),
                    index: (s.index > 0).then_some(s.index),
                    residuals: s.residuals,
                })
                .collect();
            let laws = sols
                .iter()
                .map(boundary_law_from_field)
                .collect::<Result<_, _>>()?;
            (rows, laws)
        }
    };
    Ok(Solved {
        report: SolveReport {
            k: m.k,
            tau,
            tau_exact: tau_exact.to_string(),
            h1: field.map(|f| f.0),
            h2: field.map(|f| f.1),
            count: rows.len(),
            solutions: rows,
        },
        laws,
    })
}

pub fn solve(args: &SolveArgs) -> CliResult<u8> {
    let solved = solve_model(&args.model)?;
    let text = match args.out.format {
        Format::Json => json_line(&solved.report)?,
        Format::Csv => {
            let mut s = String::from("a,b,branch,index,residual_1,residual_2\n");
            for r in &solved.report.solutions {
                s.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    fmt_g17(r.a),
                    fmt_g17(r.b),
                    r.branch,
                    r.index.map(|i| i.to_string()).unwrap_or_default(),
                    fmt_g17(r.residuals[0]),
                    fmt_g17(r.residuals[1])
                ));
            }
            s
        }
    };
    emit(args.out.output.as_deref(), &text)?;
    Ok(if solved.report.count == 0 {
        exit::EMPTY
    } else {
        exit::OK
    })
}

pub fn scan(args: &ScanArgs) -> CliResult<u8> {
    let tau_min = parse_f64("tau-min", &args.tau_min)?.1;
    let tau_max = parse_f64("tau-max", &args.tau_max)?.1;
    let text = match (&args.h_min, &args.h_max) {
        (Some(lo), Some(hi)) => {
            if args.k != 2 {
                return Err(CliError::Usage(
                    "the (tau, h) grid is only available for k = 2".into(),
                ));
            }
            let h = (parse_f64("h-min", lo)?.1, parse_f64("h-max", hi)?.1);
            let grid = scan_tau_h((tau_min, tau_max), h, args.steps)?;
            match args.out.format {
                Format::Json => json_line(&grid)?,
                Format::Csv => format!(
                    "{}# max_ordered,{}\n# max_total,{}\n",
                    to_csv(&grid.points),
                    grid.max_ordered,
                    grid.max_total
                ),
            }
        }
        _ => {
            let result = scan_tau(args.k, tau_min, tau_max, args.steps)?;
            match args.out.format {
                Format::Json => json_line(&result)?,
                Format::Csv => {
                    let mut s = to_csv(&result.points);
                    for t in &result.transitions {
                        s.push_str(&format!(
                            "# transition,{},{},{}\n",
                            fmt_g17(t.tau),
                            t.left,
                            t.right
                        ));
                    }
                    for e in &result.exceptional {
                        s.push_str(&format!("# exceptional,{},{}\n", fmt_g17(e.tau), e.count));
                    }
                    s
                }
            }
        }
    };
    emit(args.out.output.as_deref(), &text)?;
    Ok(exit::OK)
}

#[derive(Serialize)]
struct Consistency {
    /// "enumerated" marginalises the computed table; "factorised" sums the outer
    /// edges in closed form.
    method: &'static str,
    from_radius: u32,
    to_radius: u32,
    max_abs_diff: f64,
    tolerance: f64,
    passed: bool,
}

#[derive(Serialize)]
struct GgmReport {
    index: usize,
    law: PeriodicBoundaryLaw,
    law_residuals: ConsistencyReport,
    radius: u32,
    #[serde(rename = "M")]
    m: u32,
    pin: Pin,
    entries: f64,
    budget: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    omitted: Option<String>,
    table: Option<GradientMeasureTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    consistency: Option<Consistency>,
}

pub fn ggm(args: &GgmArgs) -> CliResult<u8> {
    if args.pin > 3 {
        return Err(CliError::Usage(format!(
            "--pin must be in 0..=3, got {}",
            args.pin
        )));
    }
    if args.radius < 1 || args.window < 1 {
        return Err(CliError::Usage(
            "--radius and --window must be at least 1".into(),
        ));
    }
    let solved = solve_model(&args.model)?;
    let n = solved.laws.len();
    let law = solved.laws.get(args.index).cloned().ok_or_else(|| {
        CliError::Usage(format!(
            "--index {} out of range: {n} solution(s)",
            args.index
        ))
    })?;
    let budget = args.budget.unwrap_or_else(budget_from_env);
    let pin = if args.mixed {
        Pin::Mixed
    } else {
        Pin::Pinned(args.pin)
    };
    let window = build_window(law.k, args.radius)?;
    let entries = window.configurations(args.window);
    let (table, omitted) = match measure_with_budget(&law, &window, pin, args.window, budget) {
        Ok(t) => (Some(t), None),
        Err(e @ sos_ggm::Error::BudgetExceeded { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(e.into()),
    };

    let consistency = if args.check_consistency {
        Some(window_consistency(&law, table.as_ref(), args, pin, budget)?)
    } else {
        None
    };
    let report = GgmReport {
        index: args.index,
        law_residuals: check_consistency(&law, 1e-12)?,
        law,
        radius: args.radius,
        m: args.window,
        pin,
        entries,
        budget,
        omitted,
        table,
        consistency,
    };
    emit(args.output.as_deref(), &json_line(&report)?)?;
    Ok(match (&report.consistency, &report.table) {
        (Some(c), _) if !c.passed => exit::INVARIANT,
        (None, None) => exit::EMPTY,
        _ => exit::OK,
    })
}

/// Marginal of the radius-R table onto radius R − 1 against the direct radius-(R − 1)
/// table. For R = 1, or when the radius-R table is over budget, the outer edges are
/// summed in closed form instead of enumerated.
fn window_consistency(
    law: &PeriodicBoundaryLaw,
    table: Option<&GradientMeasureTable>,
    args: &GgmArgs,
    pin: Pin,
    budget: u64,
) -> CliResult<Consistency> {
    let m = args.window;
    let inner_radius = args.radius.saturating_sub(1).max(1);
    let inner = build_window(law.k, inner_radius)?;
    let direct = measure_with_budget(law, &inner, pin, m, budget)?;
    let (method, from_radius, marginal) = match table {
        Some(t) if args.radius >= 2 => ("enumerated", args.radius, t.marginalize(&inner)?),
        _ => (
            "factorised",
            inner_radius + 1,
            marginal_from_outer_with_budget(law, &inner, pin, m, budget)?,
        ),
    };
    let d = direct.max_abs_diff(&marginal)?;
    Ok(Consistency {
        method,
        from_radius,
        to_radius: inner_radius,
        max_abs_diff: d,
        tolerance: CONSISTENCY_TOL,
        passed: d < CONSISTENCY_TOL,
    })
}

#[derive(Serialize)]
struct CheckLine<'a> {
    name: &'a str,
    passed: bool,
    detail: &'a str,
}

pub fn verify(args: &VerifyArgs) -> CliResult<u8> {
    if args.list {
        let text: String = CHECKS.iter().map(|(name, _)| format!("{name}\n")).collect();
        emit(None, &text)?;
        return Ok(exit::OK);
    }
    let only: Vec<String> = args
        .only
        .iter()
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    let outcomes = run_checks(&only, args.seed).map_err(|e| CliError::Usage(e.to_string()))?;
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if args.json {
        // Timings are left out so identical flags give identical bytes.
        let lines: Vec<CheckLine> = outcomes
            .iter()
            .map(|o| CheckLine {
                name: o.name,
                passed: o.passed,
                detail: &o.detail,
            })
            .collect();
        emit(None, &json_line(&lines)?)?;
    } else {
        let mut text = String::new();
        for o in &outcomes {
            text += &format!(
                "{} {} ({:.2}s): {}\n",
                if o.passed { "PASS" } else { "FAIL" },
                o.name,
                o.seconds,
                o.detail
            );
        }
        text += &format!(
            "{} of {} checks passed\n",
            outcomes.len() - failed,
            outcomes.len()
        );
        emit(None, &text)?;
    }
    Ok(if failed == 0 {
        exit::OK
    } else {
        exit::INVARIANT
    })
}
