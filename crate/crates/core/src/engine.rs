//! Scenario evaluation: an exact analytic calculator, a seeded Poisson
//! event simulator over simulated time, and the before/after comparator.
//!
//! Both engines share one grouping pipeline, so the analytic run is the
//! exact oracle for the event-driven run. Event generation uses ChaCha8
//! (a fixed, portable generator with published test vectors) with one
//! independent substream per interface, selected by FNV-1a64 of the
//! interface id; adding an interface never perturbs another interface's
//! draws.

use std::collections::BTreeSet;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grouping::{
    apply_grouping, paper_rules, AddRate, GroupedRates, RewriteRule,
};
use crate::model::{classify_path, Model, PathClass, Placement, Protocol};
use crate::profile::{
    derive_baseline_rates, load_profile_file, table_calibrated_rates, Calibration, RateMode,
    RateTable, TrafficProfile,
};

/// Version stamp carried by every report, so golden files stay stable.
pub const REPORT_VERSION: u32 = 1;

/// Name of the event generator recorded in report headers.
pub const RNG_NAME: &str = "chacha8+fnv1a64-substreams";

/// Name of the arrival process recorded in report headers.
pub const PROCESS_NAME: &str = "poisson";

/// Flag raised by [`compare`] when the baseline network total is zero.
pub const RELATIVE_REDUCTION_UNDEFINED: &str = "relative-reduction-undefined";

/// Which evaluation engine a scenario runs.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    Analytic,
    EventDriven,
}

impl EngineKind {
    pub fn token(self) -> &'static str {
        match self {
            EngineKind::Analytic => "analytic",
            EngineKind::EventDriven => "event_driven",
        }
    }
}

/// A fully resolved evaluation scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub profile: Option<TrafficProfile>,
    pub calibration: Calibration,
    pub placement: Placement,
    pub rules: Vec<RewriteRule>,
    pub rate_mode: RateMode,
    pub engine: EngineKind,
    /// Simulated seconds; event-driven only.
    pub duration: Option<f64>,
    /// Event-stream seed; event-driven only.
    pub seed: Option<u64>,
    /// Uniform rate thinning factor (1.0 = published rates). Thinning
    /// preserves every ratio, including the reduction metric.
    pub rate_scale: f64,
}

/// On-disk scenario shape. `profile` and `placement` are paths relative to
/// the scenario file; `rules` is either a path or the builtin token
/// `"paper"`.
#[derive(Debug, Serialize, Deserialize)]
struct ScenarioFile {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    profile: Option<String>,
    placement: String,
    rules: String,
    rate_mode: RateMode,
    engine: EngineKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    duration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rate_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    calibration: Option<Calibration>,
}

impl Scenario {
    /// Load a scenario file, resolving referenced profile, placement, and
    /// rule files relative to its directory.
    pub fn from_file(path: &Path, model: &Model) -> Result<Scenario> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::File {
            path: path.to_owned(),
            source,
        })?;
        let file: ScenarioFile = serde_json::from_str(&text).map_err(|e| Error::Malformed {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        let dir = path.parent().unwrap_or_else(|| Path::new("."));
        let profile = match &file.profile {
            Some(p) => Some(load_profile_file(&dir.join(p))?),
            None => None,
        };
        let placement = Placement::from_file(&dir.join(&file.placement))?;
        let calibration = file.calibration.unwrap_or_default();
        let rules = if file.rules == "paper" {
            paper_rules(file.rate_mode, &calibration)
        } else {
            crate::grouping::load_rules(&dir.join(&file.rules), model)?
        };
        Ok(Scenario {
            name: file.name,
            profile,
            calibration,
            placement,
            rules,
            rate_mode: file.rate_mode,
            engine: file.engine,
            duration: file.duration,
            seed: file.seed,
            rate_scale: file.rate_scale.unwrap_or(1.0),
        })
    }

    /// Collect every problem that would make this scenario unrunnable; an
    /// empty list means it is valid.
    pub fn lint(&self, model: &Model) -> Vec<String> {
        let mut problems: Vec<String> = crate::model::validate_placement(
            &self.placement,
            &crate::model::EntityKind::ALL,
        )
        .iter()
        .map(|v| v.to_string())
        .collect();
        problems.extend(crate::grouping::lint_rules(&self.rules, model));
        problems.extend(self.calibration.validate());
        if let Some(profile) = &self.profile {
            problems.extend(profile.validate().iter().map(|e| e.to_string()));
        }
        if self.rate_mode == RateMode::Parametric && self.profile.is_none() {
            problems.push("parametric rate mode requires a traffic profile".into());
        }
        if self.profile.is_none() {
            let needs_profile = self.rules.iter().any(|r| {
                r.triggered(&self.placement)
                    && matches!(
                        r.adds,
                        Some(ref a) if matches!(a.rate, AddRate::PerSubscriber { .. })
                    )
            });
            if needs_profile {
                problems.push(
                    "a triggered rule adds a per-subscriber rate; a traffic profile is required"
                        .into(),
                );
            }
        }
        if self.engine == EngineKind::EventDriven {
            match self.duration {
                Some(d) if d > 0.0 && d.is_finite() => {}
                Some(d) => problems.push(format!("duration must be > 0, got {d}")),
                None => problems.push("event-driven runs require a duration".into()),
            }
            if self.seed.is_none() {
                problems.push("event-driven runs require a seed".into());
            }
        }
        if !(self.rate_scale > 0.0 && self.rate_scale.is_finite()) {
            problems.push(format!("rate_scale must be > 0, got {}", self.rate_scale));
        }
        problems
    }

    fn baseline(&self) -> Result<RateTable> {
        match self.rate_mode {
            RateMode::TableCalibrated => Ok(table_calibrated_rates()),
            RateMode::Parametric => {
                let profile = self.profile.as_ref().ok_or(Error::ProfileRequired)?;
                Ok(derive_baseline_rates(profile, &self.calibration))
            }
        }
    }

    fn checked(&self, model: &Model) -> Result<()> {
        let problems = self.lint(model);
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidScenario(problems))
        }
    }
}

/// One interface row of a report. For the analytic engine the values are
/// rates in transactions/sec; for the event engine they are event counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfaceReport {
    pub interface: String,
    pub network: f64,
    pub internal: f64,
    pub path_class: PathClass,
    pub protocol: Protocol,
    /// True when the row was inserted by a fired rewrite rule rather than
    /// the baseline table.
    pub rule_added: bool,
}

/// Aggregated result of one engine run. Field order is the canonical JSON
/// key order; rows keep the interface declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub version: u32,
    pub scenario: String,
    pub placement: String,
    pub rate_mode: RateMode,
    pub engine: EngineKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    pub rate_scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub process: Option<String>,
    pub per_interface: Vec<InterfaceReport>,
    pub network_total: f64,
    pub internal_total: f64,
    pub flags: Vec<String>,
}

impl SimReport {
    pub fn interface(&self, id: &str) -> Option<&InterfaceReport> {
        self.per_interface.iter().find(|r| r.interface == id)
    }

    /// Network total as a rate: analytic values pass through, event counts
    /// are normalized by the simulated duration.
    pub fn normalized_network_total(&self) -> Result<f64> {
        match self.engine {
            EngineKind::Analytic => Ok(self.network_total),
            EngineKind::EventDriven => {
                let duration = self.duration.ok_or_else(|| {
                    Error::ReportMismatch("event-driven report has no duration".into())
                })?;
                Ok(self.network_total / duration)
            }
        }
    }
}

/// Before/after pair with the reduction metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub version: u32,
    pub before: SimReport,
    pub after: SimReport,
    /// Transactions/sec removed from the network.
    pub absolute_reduction: f64,
    /// `1 - after/before`; null when the baseline network total is zero.
    pub relative_reduction: Option<f64>,
    pub flags: Vec<String>,
}

/// Rows in declaration order with their path-class and protocol
/// annotations, plus the grouped totals.
fn report_rows(
    model: &Model,
    placement: &Placement,
    grouped: &GroupedRates,
) -> Result<Vec<InterfaceReport>> {
    let mut rows = Vec::new();
    for interface in model.interfaces() {
        let network = grouped.network.get(&interface.id).copied();
        let internal = grouped.internal.get(&interface.id).copied();
        if network.is_none() && internal.is_none() {
            continue;
        }
        let (a, b) = interface.endpoints;
        rows.push(InterfaceReport {
            interface: interface.id.clone(),
            network: network.unwrap_or(0.0),
            internal: internal.unwrap_or(0.0),
            path_class: classify_path(placement, a, b)?,
            protocol: interface.protocol,
            rule_added: grouped.rule_added.contains(&interface.id),
        });
    }
    Ok(rows)
}

fn grouped_rates(model: &Model, scenario: &Scenario) -> Result<GroupedRates> {
    let baseline = scenario.baseline()?.scaled(scenario.rate_scale);
    apply_grouping(
        model,
        &baseline,
        &scenario.placement,
        &scenario.rules,
        scenario.profile.as_ref(),
        scenario.rate_scale,
    )
}

/// Exact analytic evaluation of a scenario.
pub fn run_analytic(model: &Model, scenario: &Scenario) -> Result<SimReport> {
    if scenario.engine != EngineKind::Analytic {
        return Err(Error::EngineMismatch(
            "run_analytic requires an analytic scenario".into(),
        ));
    }
    scenario.checked(model)?;
    let grouped = grouped_rates(model, scenario)?;
    let rows = report_rows(model, &scenario.placement, &grouped)?;
    let network_total = rows.iter().map(|r| r.network).sum();
    let internal_total = rows.iter().map(|r| r.internal).sum();
    Ok(SimReport {
        version: REPORT_VERSION,
        scenario: scenario.name.clone(),
        placement: scenario.placement.name.clone(),
        rate_mode: scenario.rate_mode,
        engine: EngineKind::Analytic,
        seed: None,
        duration: None,
        rate_scale: scenario.rate_scale,
        rng: None,
        process: None,
        per_interface: rows,
        network_total,
        internal_total,
        flags: grouped.flags,
    })
}

/// FNV-1a 64-bit, used to pick one ChaCha8 stream per interface id.
fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Independent, reproducible event stream for one interface.
fn interface_stream(seed: u64, interface: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a64(interface.as_bytes()));
    rng
}

/// Count the arrivals of a Poisson process of the given intensity over
/// `duration` simulated seconds by walking exponential inter-arrival
/// times.
fn poisson_event_count(rate: f64, duration: f64, rng: &mut ChaCha8Rng) -> u64 {
    if rate <= 0.0 || duration <= 0.0 {
        return 0;
    }
    let mut t = 0.0_f64;
    let mut n = 0u64;
    loop {
        let u: f64 = rng.gen();
        t += -(1.0 - u).ln() / rate;
        if t > duration {
            return n;
        }
        n += 1;
    }
}

/// Event-driven evaluation: realize every per-interface rate as a seeded
/// Poisson event stream over simulated time and report the counts.
/// Identical scenarios (including seed) produce bit-identical reports.
pub fn run_simulation(model: &Model, scenario: &Scenario) -> Result<SimReport> {
    if scenario.engine != EngineKind::EventDriven {
        return Err(Error::EngineMismatch(
            "run_simulation requires an event-driven scenario".into(),
        ));
    }
    scenario.checked(model)?;
    let duration = scenario.duration.ok_or(Error::MissingSimParam("a duration"))?;
    let seed = scenario.seed.ok_or(Error::MissingSimParam("a seed"))?;

    let grouped = grouped_rates(model, scenario)?;
    let mut rows = report_rows(model, &scenario.placement, &grouped)?;
    for row in &mut rows {
        let mut rng = interface_stream(seed, &row.interface);
        // Network arrivals are drawn before internal ones; for any one
        // placement only one side carries a nonzero rate.
        row.network = poisson_event_count(row.network, duration, &mut rng) as f64;
        row.internal = poisson_event_count(row.internal, duration, &mut rng) as f64;
    }
    let network_total = rows.iter().map(|r| r.network).sum();
    let internal_total = rows.iter().map(|r| r.internal).sum();
    Ok(SimReport {
        version: REPORT_VERSION,
        scenario: scenario.name.clone(),
        placement: scenario.placement.name.clone(),
        rate_mode: scenario.rate_mode,
        engine: EngineKind::EventDriven,
        seed: Some(seed),
        duration: Some(duration),
        rate_scale: scenario.rate_scale,
        rng: Some(RNG_NAME.into()),
        process: Some(PROCESS_NAME.into()),
        per_interface: rows,
        network_total,
        internal_total,
        flags: grouped.flags,
    })
}

/// Compare two reports of the same kind. Event-driven totals are
/// normalized by their own durations, so the comparison is always in
/// transactions/sec.
pub fn compare(before: &SimReport, after: &SimReport) -> Result<Comparison> {
    if before.engine != after.engine {
        return Err(Error::ReportMismatch(format!(
            "engines differ ({} vs {}); rates and event counts do not mix",
            before.engine.token(),
            after.engine.token()
        )));
    }
    if before.rate_scale != after.rate_scale {
        return Err(Error::ReportMismatch(format!(
            "rate scales differ ({} vs {})",
            before.rate_scale, after.rate_scale
        )));
    }
    let b = before.normalized_network_total()?;
    let a = after.normalized_network_total()?;
    let mut flags: BTreeSet<String> = before
        .flags
        .iter()
        .chain(after.flags.iter())
        .cloned()
        .collect();
    let relative_reduction = if b > 0.0 {
        Some(1.0 - a / b)
    } else {
        flags.insert(RELATIVE_REDUCTION_UNDEFINED.into());
        None
    };
    Ok(Comparison {
        version: REPORT_VERSION,
        before: before.clone(),
        after: after.clone(),
        absolute_reduction: b - a,
        relative_reduction,
        flags: flags.into_iter().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grouping::{isolated_placement, proposed_placement};
    use crate::model::iface;

    pub(crate) fn analytic_scenario(name: &str, placement: Placement) -> Scenario {
        let calibration = Calibration::paper();
        let rules = paper_rules(RateMode::TableCalibrated, &calibration);
        Scenario {
            name: name.into(),
            profile: Some(TrafficProfile::table3()),
            calibration,
            placement,
            rules,
            rate_mode: RateMode::TableCalibrated,
            engine: EngineKind::Analytic,
            duration: None,
            seed: None,
            rate_scale: 1.0,
        }
    }

    #[test]
    fn analytic_proposed_matches_published_totals() {
        let model = Model::default_epc();
        let report =
            run_analytic(&model, &analytic_scenario("proposed", proposed_placement())).unwrap();
        assert_eq!(report.network_total, 386_277.0);
        assert_eq!(report.internal_total, 1_145_006.0);
        assert_eq!(report.interface(iface::UD_HSS).unwrap().network, 173_239.0);
        assert_eq!(report.interface(iface::S6A).unwrap().internal, 1_039_430.0);
        assert_eq!(
            report.interface(iface::RAN_CORE).unwrap().path_class,
            PathClass::External
        );
    }

    #[test]
    fn analytic_isolated_matches_published_totals() {
        let model = Model::default_epc();
        let report =
            run_analytic(&model, &analytic_scenario("isolated", isolated_placement())).unwrap();
        assert_eq!(report.network_total, 1_358_044.0);
        assert_eq!(report.internal_total, 0.0);
    }

    #[test]
    fn parametric_proposed_carries_the_divergence_flag() {
        let model = Model::default_epc();
        let mut scenario = analytic_scenario("parametric", proposed_placement());
        scenario.rate_mode = RateMode::Parametric;
        scenario.rules = paper_rules(RateMode::Parametric, &scenario.calibration);
        let report = run_analytic(&model, &scenario).unwrap();
        assert_eq!(report.network_total, 380_688.0);
        assert_eq!(report.interface(iface::UD_HSS).unwrap().network, 167_650.0);
        assert!(report
            .flags
            .iter()
            .any(|f| f.contains(crate::grouping::CALIBRATION_DIVERGENCE)));
    }

    #[test]
    fn simulation_is_deterministic_per_seed() {
        let model = Model::default_epc();
        let mut scenario = analytic_scenario("sim", proposed_placement());
        scenario.engine = EngineKind::EventDriven;
        scenario.duration = Some(10.0);
        scenario.seed = Some(42);
        scenario.rate_scale = 0.01;
        let a = run_simulation(&model, &scenario).unwrap();
        let b = run_simulation(&model, &scenario).unwrap();
        assert_eq!(a, b);
        scenario.seed = Some(43);
        let c = run_simulation(&model, &scenario).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_rates_produce_zero_counts() {
        let mut rng = interface_stream(1, "x");
        assert_eq!(poisson_event_count(0.0, 100.0, &mut rng), 0);
        assert_eq!(poisson_event_count(5.0, 0.0, &mut rng), 0);
    }

    #[test]
    fn simulation_without_seed_or_duration_is_rejected() {
        let model = Model::default_epc();
        let mut scenario = analytic_scenario("sim", proposed_placement());
        scenario.engine = EngineKind::EventDriven;
        let err = run_simulation(&model, &scenario).unwrap_err();
        match err {
            Error::InvalidScenario(problems) => {
                assert!(problems.iter().any(|p| p.contains("duration")));
                assert!(problems.iter().any(|p| p.contains("seed")));
            }
            other => panic!("expected scenario problems, got {other:?}"),
        }
    }

    #[test]
    fn compare_reproduces_the_headline_reduction() {
        let model = Model::default_epc();
        let before =
            run_analytic(&model, &analytic_scenario("isolated", isolated_placement())).unwrap();
        let after =
            run_analytic(&model, &analytic_scenario("proposed", proposed_placement())).unwrap();
        let cmp = compare(&before, &after).unwrap();
        assert_eq!(cmp.absolute_reduction, 971_767.0);
        let relative = cmp.relative_reduction.unwrap();
        assert!((relative - (1.0 - 386_277.0 / 1_358_044.0)).abs() < 1e-12);
        assert_eq!((relative * 10_000.0).round() / 10_000.0, 0.7156);
    }

    #[test]
    fn compare_of_identical_reports_is_zero() {
        let model = Model::default_epc();
        let report =
            run_analytic(&model, &analytic_scenario("proposed", proposed_placement())).unwrap();
        let cmp = compare(&report, &report).unwrap();
        assert_eq!(cmp.absolute_reduction, 0.0);
        assert_eq!(cmp.relative_reduction, Some(0.0));
    }

    #[test]
    fn compare_with_zero_baseline_flags_an_undefined_ratio() {
        let model = Model::default_epc();
        let mut before =
            run_analytic(&model, &analytic_scenario("a", proposed_placement())).unwrap();
        before.network_total = 0.0;
        let mut after = before.clone();
        after.network_total = 0.0;
        let cmp = compare(&before, &after).unwrap();
        assert_eq!(cmp.relative_reduction, None);
        assert!(cmp
            .flags
            .iter()
            .any(|f| f == RELATIVE_REDUCTION_UNDEFINED));
    }

    #[test]
    fn compare_full_to_empty_is_total_reduction() {
        let model = Model::default_epc();
        let before =
            run_analytic(&model, &analytic_scenario("a", isolated_placement())).unwrap();
        let mut after = before.clone();
        after.network_total = 0.0;
        let cmp = compare(&before, &after).unwrap();
        assert_eq!(cmp.relative_reduction, Some(1.0));
    }

    #[test]
    fn mixed_engine_comparison_is_rejected() {
        let model = Model::default_epc();
        let analytic =
            run_analytic(&model, &analytic_scenario("a", proposed_placement())).unwrap();
        let mut sim_scenario = analytic_scenario("b", proposed_placement());
        sim_scenario.engine = EngineKind::EventDriven;
        sim_scenario.duration = Some(1.0);
        sim_scenario.seed = Some(1);
        sim_scenario.rate_scale = 0.001;
        let sim = run_simulation(&model, &sim_scenario).unwrap();
        assert!(matches!(
            compare(&analytic, &sim),
            Err(Error::ReportMismatch(_))
        ));
    }

    #[test]
    fn substreams_are_independent_of_other_interfaces() {
        // The count an interface produces depends only on (seed, id, rate,
        // duration), never on which other interfaces run alongside it.
        let mut solo = interface_stream(7, "Gx");
        let solo_count = poisson_event_count(100.0, 50.0, &mut solo);
        let mut ignored = interface_stream(7, "Gy");
        let _ = poisson_event_count(500.0, 50.0, &mut ignored);
        let mut again = interface_stream(7, "Gx");
        assert_eq!(poisson_event_count(100.0, 50.0, &mut again), solo_count);
    }
}
