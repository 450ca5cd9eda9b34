//! End-to-end golden numbers driven by the shipped scenario files: the
//! published before/after rate tables, the headline reduction, and the
//! documented parametric divergence.

use std::path::{Path, PathBuf};

use vepc_core::engine::{compare, run_analytic, EngineKind, Scenario};
use vepc_core::grouping::{paper_rules, proposed_placement, CALIBRATION_DIVERGENCE};
use vepc_core::model::{iface, Model};
use vepc_core::profile::{Calibration, RateMode, TrafficProfile};

fn repo_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn run_shipped(name: &str) -> vepc_core::SimReport {
    let model = Model::default_epc();
    let scenario = Scenario::from_file(&repo_path(&format!("scenarios/{name}")), &model)
        .expect("shipped scenario loads");
    run_analytic(&model, &scenario).expect("shipped scenario runs")
}

#[test]
fn isolated_scenario_reproduces_the_published_baseline() {
    let report = run_shipped("table4_isolated.json");
    let expect = [
        (iface::RAN_CORE, 175_332.0),
        (iface::S5_S8, 56_559.0),
        (iface::S6A, 1_039_430.0),
        (iface::GX, 37_706.0),
        (iface::UD_PCRF, 18_853.0),
        (iface::GY, 30_164.0),
    ];
    for (id, rate) in expect {
        let row = report.interface(id).unwrap();
        assert_eq!(row.network, rate, "network rate of {id}");
        assert_eq!(row.internal, 0.0, "internal rate of {id}");
    }
    assert_eq!(report.network_total, 1_358_044.0);
    assert_eq!(report.internal_total, 0.0);
}

#[test]
fn proposed_scenario_reproduces_the_published_grouping() {
    let report = run_shipped("table4_proposed.json");
    for (id, rate) in [
        (iface::RAN_CORE, 175_332.0),
        (iface::UD_HSS, 173_239.0),
        (iface::GX, 37_706.0),
    ] {
        assert_eq!(report.interface(id).unwrap().network, rate, "network {id}");
    }
    for (id, rate) in [
        (iface::S5_S8, 56_559.0),
        (iface::S6A, 1_039_430.0),
        (iface::UD_PCRF, 18_853.0),
        (iface::GY, 30_164.0),
    ] {
        assert_eq!(report.interface(id).unwrap().internal, rate, "internal {id}");
        assert_eq!(report.interface(id).unwrap().network, 0.0);
    }
    assert_eq!(report.network_total, 386_277.0);
    assert_eq!(report.internal_total, 1_145_006.0);
    assert!(report.interface(iface::UD_HSS).unwrap().rule_added);
}

#[test]
fn comparing_the_two_scenarios_gives_the_headline_reduction() {
    let before = run_shipped("table4_isolated.json");
    let after = run_shipped("table4_proposed.json");
    let cmp = compare(&before, &after).unwrap();
    assert_eq!(cmp.absolute_reduction, 971_767.0);
    let relative = cmp.relative_reduction.unwrap();
    // Independent route to the same number.
    let oracle = 1.0 - 386_277.0 / 1_358_044.0;
    assert!((relative - oracle).abs() < 1e-12);
    assert!(relative >= 0.70);
    assert_eq!(format!("{relative:.4}"), "0.7156");
}

#[test]
fn parametric_grouping_diverges_by_the_documented_amount() {
    let model = Model::default_epc();
    let calibration = Calibration::paper();
    let scenario = Scenario {
        name: "table4_proposed_parametric".into(),
        profile: Some(TrafficProfile::table3()),
        calibration: calibration.clone(),
        placement: proposed_placement(),
        rules: paper_rules(RateMode::Parametric, &calibration),
        rate_mode: RateMode::Parametric,
        engine: EngineKind::Analytic,
        duration: None,
        seed: None,
        rate_scale: 1.0,
    };
    let report = run_analytic(&model, &scenario).unwrap();
    assert_eq!(report.interface(iface::UD_HSS).unwrap().network, 167_650.0);
    // 175,332 + 167,650 + 37,706
    assert_eq!(report.network_total, 380_688.0);
    assert!(report
        .flags
        .iter()
        .any(|f| f.contains(CALIBRATION_DIVERGENCE)));
}
