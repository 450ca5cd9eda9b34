//! Report rendering and merging.
//!
//! JSON output is canonical (fixed key order, full precision) and
//! round-trips losslessly. The plain-text table mirrors the published
//! before/after layout: one row per interface with network and internal
//! columns and a closing Total row; rates carry two decimals, event counts
//! render as integers.

use serde::Serialize;

use crate::engine::{Comparison, EngineKind, InterfaceReport, SimReport};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Json,
    Csv,
    TextTable,
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("report serializes");
    out.push('\n');
    out
}

fn quantity(value: f64, engine: EngineKind) -> String {
    match engine {
        EngineKind::Analytic => format!("{value:.2}"),
        EngineKind::EventDriven => format!("{}", value.round() as u64),
    }
}

/// Left-pad/right-pad cells into an aligned table. `numeric` columns are
/// right-aligned.
fn aligned(rows: &[Vec<String>], numeric: &[bool]) -> String {
    let columns = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    let mut widths = vec![0usize; columns];
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            if numeric.get(i).copied().unwrap_or(false) {
                line.push_str(&format!("{cell:>width$}", width = widths[i]));
            } else {
                line.push_str(&format!("{cell:<width$}", width = widths[i]));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn report_header(report: &SimReport) -> String {
    let mut out = format!("Scenario: {}\n", report.scenario);
    out.push_str(&format!(
        "Placement: {} | rate mode: {} | engine: {}\n",
        report.placement,
        report.rate_mode.token(),
        report.engine.token()
    ));
    if let (Some(seed), Some(duration)) = (report.seed, report.duration) {
        out.push_str(&format!(
            "Seed: {seed} | duration: {duration} s | process: {} | rng: {}\n",
            report.process.as_deref().unwrap_or("-"),
            report.rng.as_deref().unwrap_or("-"),
        ));
    }
    if report.rate_scale != 1.0 {
        out.push_str(&format!("Rate scale: {}\n", report.rate_scale));
    }
    out
}

fn flags_line(flags: &[String]) -> String {
    if flags.is_empty() {
        String::new()
    } else {
        format!("Flags: {}\n", flags.join("; "))
    }
}

fn report_text(report: &SimReport) -> String {
    let engine = report.engine;
    let mut rows = vec![vec![
        "Interface".to_string(),
        "Network".to_string(),
        "Internal".to_string(),
        "Path class".to_string(),
        "Protocol".to_string(),
    ]];
    for row in &report.per_interface {
        let mut id = row.interface.clone();
        if row.rule_added {
            id.push_str(" (+)");
        }
        rows.push(vec![
            id,
            quantity(row.network, engine),
            quantity(row.internal, engine),
            row.path_class.token().to_string(),
            row.protocol.token().to_string(),
        ]);
    }
    rows.push(vec![
        "Total".to_string(),
        quantity(report.network_total, engine),
        quantity(report.internal_total, engine),
        String::new(),
        String::new(),
    ]);
    let mut out = report_header(report);
    out.push('\n');
    out.push_str(&aligned(&rows, &[false, true, true, false, false]));
    out.push_str(&flags_line(&report.flags));
    out
}

fn report_csv(report: &SimReport) -> String {
    let engine = report.engine;
    let mut out = String::from("interface,network,internal,path_class,protocol,rule_added\n");
    for row in &report.per_interface {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.interface,
            quantity(row.network, engine),
            quantity(row.internal, engine),
            row.path_class.token(),
            row.protocol.token(),
            row.rule_added
        ));
    }
    out.push_str(&format!(
        "TOTAL,{},{},,,\n",
        quantity(report.network_total, engine),
        quantity(report.internal_total, engine)
    ));
    for flag in &report.flags {
        out.push_str(&format!("FLAG,{flag},,,,\n"));
    }
    out
}

/// Render a single-run report.
pub fn render_report(report: &SimReport, format: RenderFormat) -> String {
    match format {
        RenderFormat::Json => to_json(report),
        RenderFormat::Csv => report_csv(report),
        RenderFormat::TextTable => report_text(report),
    }
}

/// Interface ids across both reports: the after-report's row order first
/// (it contains every surviving and internalized row), then any
/// before-only rows in their own order.
fn comparison_ids(cmp: &Comparison) -> Vec<String> {
    let mut ids: Vec<String> = cmp
        .after
        .per_interface
        .iter()
        .map(|r| r.interface.clone())
        .collect();
    for row in &cmp.before.per_interface {
        if !ids.contains(&row.interface) {
            ids.push(row.interface.clone());
        }
    }
    ids
}

fn relative_cell(cmp: &Comparison) -> String {
    match cmp.relative_reduction {
        Some(v) => format!("{v:.4}"),
        None => "undefined".to_string(),
    }
}

fn comparison_text(cmp: &Comparison) -> String {
    let engine = cmp.before.engine;
    let mut out = format!(
        "Comparison: {} -> {}\n",
        cmp.before.scenario, cmp.after.scenario
    );
    out.push_str(&format!(
        "Rate mode: {} -> {} | engine: {}\n\n",
        cmp.before.rate_mode.token(),
        cmp.after.rate_mode.token(),
        engine.token()
    ));
    let zero = |v: Option<&InterfaceReport>, f: fn(&InterfaceReport) -> f64| {
        v.map(f).unwrap_or(0.0)
    };
    let mut rows = vec![vec![
        "Interface".to_string(),
        "Before network".to_string(),
        "After network".to_string(),
        "Before internal".to_string(),
        "After internal".to_string(),
    ]];
    for id in comparison_ids(cmp) {
        let b = cmp.before.interface(&id);
        let a = cmp.after.interface(&id);
        rows.push(vec![
            id,
            quantity(zero(b, |r| r.network), engine),
            quantity(zero(a, |r| r.network), engine),
            quantity(zero(b, |r| r.internal), engine),
            quantity(zero(a, |r| r.internal), engine),
        ]);
    }
    rows.push(vec![
        "Total".to_string(),
        quantity(cmp.before.network_total, engine),
        quantity(cmp.after.network_total, engine),
        quantity(cmp.before.internal_total, engine),
        quantity(cmp.after.internal_total, engine),
    ]);
    out.push_str(&aligned(&rows, &[false, true, true, true, true]));
    out.push('\n');
    out.push_str(&format!(
        "Absolute reduction: {:.2} tx/s\n",
        cmp.absolute_reduction
    ));
    out.push_str(&format!("Relative reduction: {}\n", relative_cell(cmp)));
    out.push_str(&flags_line(&cmp.flags));
    out
}

fn comparison_csv(cmp: &Comparison) -> String {
    let engine = cmp.before.engine;
    let mut out =
        String::from("interface,before_network,after_network,before_internal,after_internal\n");
    let zero = |v: Option<&InterfaceReport>, f: fn(&InterfaceReport) -> f64| {
        v.map(f).unwrap_or(0.0)
    };
    for id in comparison_ids(cmp) {
        let b = cmp.before.interface(&id);
        let a = cmp.after.interface(&id);
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            id,
            quantity(zero(b, |r| r.network), engine),
            quantity(zero(a, |r| r.network), engine),
            quantity(zero(b, |r| r.internal), engine),
            quantity(zero(a, |r| r.internal), engine)
        ));
    }
    out.push_str(&format!(
        "TOTAL,{},{},{},{}\n",
        quantity(cmp.before.network_total, engine),
        quantity(cmp.after.network_total, engine),
        quantity(cmp.before.internal_total, engine),
        quantity(cmp.after.internal_total, engine)
    ));
    out.push_str(&format!(
        "ABSOLUTE_REDUCTION,{:.2},,,\n",
        cmp.absolute_reduction
    ));
    out.push_str(&format!("RELATIVE_REDUCTION,{},,,\n", relative_cell(cmp)));
    for flag in &cmp.flags {
        out.push_str(&format!("FLAG,{flag},,,\n"));
    }
    out
}

/// Render a comparison.
pub fn render_comparison(cmp: &Comparison, format: RenderFormat) -> String {
    match format {
        RenderFormat::Json => to_json(cmp),
        RenderFormat::Csv => comparison_csv(cmp),
        RenderFormat::TextTable => comparison_text(cmp),
    }
}

/// Merge reports of the same kind (rate mode, engine, placement, rate
/// scale): per-interface values are summed, totals re-derived, durations
/// added. Over a common interface set the merge is associative and
/// permutation-invariant.
pub fn merge(reports: &[SimReport]) -> Result<SimReport> {
    let first = reports
        .first()
        .ok_or_else(|| Error::ReportMismatch("nothing to merge".into()))?;
    for r in &reports[1..] {
        if r.rate_mode != first.rate_mode
            || r.engine != first.engine
            || r.placement != first.placement
            || r.rate_scale != first.rate_scale
        {
            return Err(Error::ReportMismatch(
                "reports mix rate modes, engines, placements, or rate scales".into(),
            ));
        }
    }

    let mut rows: Vec<InterfaceReport> = first.per_interface.clone();
    let mut extras: Vec<InterfaceReport> = Vec::new();
    for r in &reports[1..] {
        for row in &r.per_interface {
            let slot = rows
                .iter_mut()
                .chain(extras.iter_mut())
                .find(|x| x.interface == row.interface);
            match slot {
                Some(existing) => {
                    if existing.path_class != row.path_class
                        || existing.protocol != row.protocol
                    {
                        return Err(Error::ReportMismatch(format!(
                            "interface {} has inconsistent annotations across reports",
                            row.interface
                        )));
                    }
                    existing.network += row.network;
                    existing.internal += row.internal;
                    existing.rule_added |= row.rule_added;
                }
                None => extras.push(row.clone()),
            }
        }
    }
    extras.sort_by(|a, b| a.interface.cmp(&b.interface));
    rows.extend(extras);

    let network_total = rows.iter().map(|r| r.network).sum();
    let internal_total = rows.iter().map(|r| r.internal).sum();
    let scenario = reports
        .iter()
        .map(|r| r.scenario.as_str())
        .min()
        .unwrap_or_default()
        .to_string();
    let seed = if reports.iter().all(|r| r.seed == first.seed) {
        first.seed
    } else {
        None
    };
    let duration = if reports.iter().all(|r| r.duration.is_some()) {
        Some(reports.iter().filter_map(|r| r.duration).sum())
    } else {
        None
    };
    let mut flags: Vec<String> = reports.iter().flat_map(|r| r.flags.clone()).collect();
    flags.sort();
    flags.dedup();

    Ok(SimReport {
        version: first.version,
        scenario,
        placement: first.placement.clone(),
        rate_mode: first.rate_mode,
        engine: first.engine,
        seed,
        duration,
        rate_scale: first.rate_scale,
        rng: first.rng.clone(),
        process: first.process.clone(),
        per_interface: rows,
        network_total,
        internal_total,
        flags,
    })
}
