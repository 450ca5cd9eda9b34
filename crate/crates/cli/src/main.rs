//! Scenario-file-driven front end: run, compare, and inspect vEPC
//! signaling groupings.
//!
//! Exit codes: 0 on success, 1 on validation or run errors (one message
//! per line on stderr), 2 on usage errors.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use vepc_core::engine::{compare, run_analytic, run_simulation, EngineKind, Scenario, SimReport};
use vepc_core::grouping::{lint_rules, parse_rules};
use vepc_core::model::{classify_path, validate_placement, EntityKind, Model, Placement};
use vepc_core::procedures::{parse_procedures, validate_procedure};
use vepc_core::profile::load_profile_file;
use vepc_core::report::{render_comparison, render_report, RenderFormat};

#[derive(Parser)]
#[command(
    name = "vepc",
    version,
    about = "Placement-aware signaling-traffic model for a virtualized EPC"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the exact analytic calculator on a scenario
    Calc(RunArgs),
    /// Run the seeded event-driven simulator on a scenario
    Sim(RunArgs),
    /// Compare a baseline scenario against a candidate
    Compare(CompareArgs),
    /// Print a placement's segments and its pairwise path-class matrix
    ShowGrouping(ShowGroupingArgs),
    /// Lint scenario, profile, placement, rule, and procedure files
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

impl From<Format> for RenderFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => RenderFormat::Json,
            Format::Csv => RenderFormat::Csv,
            Format::Table => RenderFormat::TextTable,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file to evaluate
    #[arg(long)]
    scenario: PathBuf,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Override the scenario's event-stream seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the scenario's simulated duration, seconds
    #[arg(long)]
    duration: Option<f64>,
    /// Override the scenario's uniform rate-thinning factor
    #[arg(long)]
    rate_scale: Option<f64>,
    /// Write the report to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Baseline scenario file
    #[arg(long)]
    baseline: PathBuf,
    /// Candidate scenario file
    #[arg(long)]
    candidate: PathBuf,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Override both scenarios' event-stream seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override both scenarios' simulated duration, seconds
    #[arg(long)]
    duration: Option<f64>,
    /// Override both scenarios' uniform rate-thinning factor
    #[arg(long)]
    rate_scale: Option<f64>,
    /// Write the comparison to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ShowGroupingArgs {
    /// Placement file to inspect
    #[arg(long)]
    placement: PathBuf,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write the output to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = true)]
struct ValidateArgs {
    /// Scenario files to lint (their referenced files included)
    #[arg(long)]
    scenario: Vec<PathBuf>,
    /// Traffic profile files to lint
    #[arg(long)]
    profile: Vec<PathBuf>,
    /// Placement files to lint
    #[arg(long)]
    placement: Vec<PathBuf>,
    /// Rewrite-rule files to lint
    #[arg(long)]
    rules: Vec<PathBuf>,
    /// Procedure catalog files to lint
    #[arg(long)]
    procedures: Vec<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let model = Model::default_epc();
    let result = match cli.command {
        Command::Calc(args) => run_scenario(&model, args, EngineKind::Analytic),
        Command::Sim(args) => run_scenario(&model, args, EngineKind::EventDriven),
        Command::Compare(args) => run_compare(&model, args),
        Command::ShowGrouping(args) => show_grouping(args),
        Command::Validate(args) => validate(&model, args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(lines) => {
            let mut stderr = std::io::stderr().lock();
            for line in lines {
                let _ = writeln!(stderr, "{line}");
            }
            ExitCode::from(1)
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Vec<String>> {
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => std::fs::write(path, text)
            .map_err(|e| vec![format!("{}: {e}", path.display())]),
    }
}

fn load_scenario(
    model: &Model,
    path: &Path,
    engine: EngineKind,
    seed: Option<u64>,
    duration: Option<f64>,
    rate_scale: Option<f64>,
) -> Result<Scenario, Vec<String>> {
    let mut scenario = Scenario::from_file(path, model).map_err(|e| e.lines())?;
    scenario.engine = engine;
    if seed.is_some() {
        scenario.seed = seed;
    }
    if duration.is_some() {
        scenario.duration = duration;
    }
    if let Some(scale) = rate_scale {
        scenario.rate_scale = scale;
    }
    Ok(scenario)
}

fn run_report(model: &Model, scenario: &Scenario) -> Result<SimReport, Vec<String>> {
    let run = match scenario.engine {
        EngineKind::Analytic => run_analytic,
        EngineKind::EventDriven => run_simulation,
    };
    run(model, scenario).map_err(|e| e.lines())
}

fn run_scenario(model: &Model, args: RunArgs, engine: EngineKind) -> Result<(), Vec<String>> {
    let scenario = load_scenario(
        model,
        &args.scenario,
        engine,
        args.seed,
        args.duration,
        args.rate_scale,
    )?;
    let report = run_report(model, &scenario)?;
    emit(
        &render_report(&report, args.format.into()),
        args.out.as_deref(),
    )
}

fn run_compare(model: &Model, args: CompareArgs) -> Result<(), Vec<String>> {
    let load = |path: &Path| -> Result<SimReport, Vec<String>> {
        let mut scenario = Scenario::from_file(path, model).map_err(|e| e.lines())?;
        if args.seed.is_some() {
            scenario.seed = args.seed;
        }
        if args.duration.is_some() {
            scenario.duration = args.duration;
        }
        if let Some(scale) = args.rate_scale {
            scenario.rate_scale = scale;
        }
        run_report(model, &scenario)
    };
    let before = load(&args.baseline)?;
    let after = load(&args.candidate)?;
    let comparison = compare(&before, &after).map_err(|e| e.lines())?;
    emit(
        &render_comparison(&comparison, args.format.into()),
        args.out.as_deref(),
    )
}

fn path_class_matrix(placement: &Placement) -> BTreeMap<String, BTreeMap<String, String>> {
    let mut matrix: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    for a in EntityKind::ALL {
        for b in EntityKind::ALL {
            if a == b {
                continue;
            }
            let class = classify_path(placement, a, b)
                .map(|c| c.token().to_string())
                .unwrap_or_else(|e| format!("error: {e}"));
            matrix
                .entry(a.token().to_string())
                .or_default()
                .insert(b.token().to_string(), class);
        }
    }
    matrix
}

fn show_grouping(args: ShowGroupingArgs) -> Result<(), Vec<String>> {
    let placement = Placement::from_file(&args.placement).map_err(|e| e.lines())?;
    let violations = validate_placement(&placement, &EntityKind::ALL);
    if !violations.is_empty() {
        return Err(violations
            .iter()
            .map(|v| format!("{}: {v}", args.placement.display()))
            .collect());
    }
    let text = match args.format {
        Format::Json => {
            let mut segments = BTreeMap::new();
            for (segment, members) in placement.segments() {
                let loc = placement.location(members[0]).expect("member is placed");
                segments.insert(
                    segment,
                    serde_json::json!({
                        "host": loc.host,
                        "lan": loc.lan,
                        "members": members.iter().map(|e| e.token()).collect::<Vec<_>>(),
                    }),
                );
            }
            let doc = serde_json::json!({
                "placement": placement.name,
                "segments": segments,
                "path_classes": path_class_matrix(&placement),
            });
            format!("{}\n", serde_json::to_string_pretty(&doc).expect("matrix serializes"))
        }
        Format::Csv => {
            let mut out = String::from("entity_a,entity_b,path_class\n");
            for (i, a) in EntityKind::ALL.iter().enumerate() {
                for b in &EntityKind::ALL[i + 1..] {
                    let class = classify_path(&placement, *a, *b)
                        .map(|c| c.token().to_string())
                        .unwrap_or_else(|e| format!("error: {e}"));
                    out.push_str(&format!("{a},{b},{class}\n"));
                }
            }
            out
        }
        Format::Table => {
            let mut out = format!("Placement: {}\n\n", placement.name);
            out.push_str("Segment distribution:\n");
            for (segment, members) in placement.segments() {
                let loc = placement.location(members[0]).expect("member is placed");
                let names: Vec<&str> = members.iter().map(|e| e.token()).collect();
                out.push_str(&format!(
                    "  {segment} on {} ({}): {}\n",
                    loc.host,
                    loc.lan,
                    names.join(", ")
                ));
            }
            out.push_str(
                "\nPath classes (INT internal, IHL intra-host/intra-LAN, \
                 IHX intra-host/inter-LAN, XHO inter-host, EXT external):\n",
            );
            let short = |token: &'static str| match token {
                "INTERNAL" => "INT",
                "INTRA_HOST_INTRA_LAN" => "IHL",
                "INTRA_HOST_INTER_LAN" => "IHX",
                "INTER_HOST" => "XHO",
                "EXTERNAL" => "EXT",
                other => other,
            };
            let width = EntityKind::ALL
                .iter()
                .map(|e| e.token().len())
                .max()
                .unwrap_or(0);
            let mut header = format!("  {:width$}", "");
            for b in EntityKind::ALL {
                header.push_str(&format!(" {:>7}", b.token()));
            }
            out.push_str(header.trim_end());
            out.push('\n');
            for a in EntityKind::ALL {
                let mut line = format!("  {:width$}", a.token());
                for b in EntityKind::ALL {
                    if a == b {
                        line.push_str(&format!(" {:>7}", "-"));
                    } else {
                        let class = classify_path(&placement, a, b)
                            .map(|c| short(c.token()))
                            .unwrap_or("ERR");
                        line.push_str(&format!(" {class:>7}"));
                    }
                }
                out.push_str(line.trim_end());
                out.push('\n');
            }
            out
        }
    };
    emit(&text, args.out.as_deref())
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn validate(model: &Model, args: ValidateArgs) -> Result<(), Vec<String>> {
    let mut problems: Vec<String> = Vec::new();
    let mut clean: Vec<String> = Vec::new();
    let mut record = |path: &Path, found: Vec<String>| {
        if found.is_empty() {
            clean.push(format!("{}: OK", path.display()));
        } else {
            problems.extend(found);
        }
    };

    for path in &args.scenario {
        let found = match Scenario::from_file(path, model) {
            Ok(scenario) => scenario
                .lint(model)
                .into_iter()
                .map(|p| format!("{}: {p}", path.display()))
                .collect(),
            Err(e) => e.lines(),
        };
        record(path, found);
    }
    for path in &args.profile {
        let found = match load_profile_file(path) {
            Ok(_) => vec![],
            Err(e) => e.lines(),
        };
        record(path, found);
    }
    for path in &args.placement {
        let found = match Placement::from_file(path) {
            Ok(placement) => validate_placement(&placement, &EntityKind::ALL)
                .iter()
                .map(|v| format!("{}: {v}", path.display()))
                .collect(),
            Err(e) => e.lines(),
        };
        record(path, found);
    }
    for path in &args.rules {
        let found = match read(path).and_then(|text| {
            parse_rules(&text).map_err(|e| format!("{}: {e}", path.display()))
        }) {
            Ok(rules) => lint_rules(&rules, model)
                .into_iter()
                .map(|p| format!("{}: {p}", path.display()))
                .collect(),
            Err(e) => vec![e],
        };
        record(path, found);
    }
    for path in &args.procedures {
        let found = match read(path).and_then(|text| {
            parse_procedures(&text).map_err(|e| format!("{}: {e}", path.display()))
        }) {
            Ok(procedures) => procedures
                .iter()
                .flat_map(|p| validate_procedure(model, p))
                .map(|p| format!("{}: {p}", path.display()))
                .collect(),
            Err(e) => vec![e],
        };
        record(path, found);
    }

    if problems.is_empty() {
        for line in clean {
            println!("{line}");
        }
        Ok(())
    } else {
        Err(problems)
    }
}
