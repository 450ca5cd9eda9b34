//! Traffic profile ingestion and baseline per-interface transaction rates.
//!
//! The profile carries the published busy-hour planning parameters; the
//! calibration carries the handful of constants the rate formulas need.
//! Several profile fields feed no implemented formula; they are validated
//! and retained so scenario files round-trip the published profile
//! losslessly.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, FieldError, Result};
use crate::model::iface;

/// Busy-hour traffic profile and planning parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficProfile {
    pub registered_subscribers: u64,
    pub attached_subscribers: u64,
    pub busy_hour_session_attempts: u64,
    pub simultaneous_bearers: u64,
    /// Seconds.
    pub mean_session_time: f64,
    pub handover_ratio: f64,
    pub dense_area_attached_ratio: f64,
    /// Seconds.
    pub avg_epsb_session_duration: f64,
    pub busy_hour_traffic_ratio: f64,
    pub retransmission_factor: f64,
    pub prepaid_ratio: f64,
}

impl TrafficProfile {
    /// The published reference profile.
    pub fn table3() -> Self {
        Self {
            registered_subscribers: 167_650,
            attached_subscribers: 150_878,
            busy_hour_session_attempts: 64_940_898,
            simultaneous_bearers: 18_853,
            mean_session_time: 180.0,
            handover_ratio: 0.4,
            dense_area_attached_ratio: 0.9,
            avg_epsb_session_duration: 900.0,
            busy_hour_traffic_ratio: 0.15,
            retransmission_factor: 0.25,
            prepaid_ratio: 0.8,
        }
    }

    /// Range and consistency checks; an empty list means the profile is
    /// valid.
    pub fn validate(&self) -> Vec<FieldError> {
        let mut errors = Vec::new();
        let mut fraction = |name: &str, v: f64| {
            if !(0.0..=1.0).contains(&v) {
                errors.push(FieldError::new(
                    name,
                    format!("must be a fraction in [0, 1], got {v}"),
                ));
            }
        };
        fraction("handover_ratio", self.handover_ratio);
        fraction("dense_area_attached_ratio", self.dense_area_attached_ratio);
        fraction("busy_hour_traffic_ratio", self.busy_hour_traffic_ratio);
        fraction("prepaid_ratio", self.prepaid_ratio);
        if !(self.retransmission_factor >= 0.0) {
            errors.push(FieldError::new(
                "retransmission_factor",
                format!("must be >= 0, got {}", self.retransmission_factor),
            ));
        }
        if !(self.mean_session_time >= 0.0) {
            errors.push(FieldError::new(
                "mean_session_time",
                format!("must be >= 0, got {}", self.mean_session_time),
            ));
        }
        if !(self.avg_epsb_session_duration >= 0.0) {
            errors.push(FieldError::new(
                "avg_epsb_session_duration",
                format!("must be >= 0, got {}", self.avg_epsb_session_duration),
            ));
        }
        if self.attached_subscribers > self.registered_subscribers {
            errors.push(FieldError::new(
                "attached_subscribers",
                format!(
                    "{} attached exceeds {} registered",
                    self.attached_subscribers, self.registered_subscribers
                ),
            ));
        }
        errors
    }
}

/// Calibration constants for the baseline formulas. The two flat rates have
/// no published derivation; the per-subscriber and per-bearer multipliers
/// and the grouped UDR rate are published figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Flat rate of the eNB-anchored aggregate row, transactions/sec.
    pub ran_core_rate: f64,
    /// Flat SGW<->PGW rate, transactions/sec.
    pub sgw_pgw_rate: f64,
    /// MME<->HSS transactions per registered subscriber.
    pub mme_hss_per_subscriber: f64,
    /// PCRF transactions per established bearer.
    pub pcrf_per_bearer: f64,
    /// Published HSS-FE->UDR rate after grouping, transactions/sec.
    pub grouped_udr_rate_published: f64,
}

impl Calibration {
    pub fn paper() -> Self {
        Self {
            ran_core_rate: 175_332.0,
            sgw_pgw_rate: 56_559.0,
            mme_hss_per_subscriber: 6.2,
            pcrf_per_bearer: 2.0,
            grouped_udr_rate_published: 173_239.0,
        }
    }

    pub fn validate(&self) -> Vec<String> {
        let fields = [
            ("ran_core_rate", self.ran_core_rate),
            ("sgw_pgw_rate", self.sgw_pgw_rate),
            ("mme_hss_per_subscriber", self.mme_hss_per_subscriber),
            ("pcrf_per_bearer", self.pcrf_per_bearer),
            (
                "grouped_udr_rate_published",
                self.grouped_udr_rate_published,
            ),
        ];
        fields
            .iter()
            .filter(|(_, v)| !(*v >= 0.0 && v.is_finite()))
            .map(|(name, v)| format!("calibration.{name}: must be >= 0, got {v}"))
            .collect()
    }
}

impl Default for Calibration {
    fn default() -> Self {
        Self::paper()
    }
}

/// Which source produced a rate table.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum RateMode {
    /// The published table constants, verbatim.
    TableCalibrated,
    /// Rates derived from a traffic profile and calibration.
    Parametric,
}

impl RateMode {
    pub fn token(self) -> &'static str {
        match self {
            RateMode::TableCalibrated => "table_calibrated",
            RateMode::Parametric => "parametric",
        }
    }
}

/// Per-interface baseline transaction rates (transactions/sec).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    pub rates: std::collections::BTreeMap<String, f64>,
    pub mode: RateMode,
}

impl RateTable {
    pub fn total(&self) -> f64 {
        self.rates.values().sum()
    }

    /// Uniformly thin every rate; ratios between rows are preserved.
    pub fn scaled(&self, factor: f64) -> RateTable {
        RateTable {
            rates: self
                .rates
                .iter()
                .map(|(k, v)| (k.clone(), v * factor))
                .collect(),
            mode: self.mode,
        }
    }
}

/// The published baseline rate table, verbatim.
pub fn table_calibrated_rates() -> RateTable {
    let rates = [
        (iface::RAN_CORE, 175_332.0),
        (iface::S5_S8, 56_559.0),
        (iface::S6A, 1_039_430.0),
        (iface::GX, 37_706.0),
        (iface::UD_PCRF, 18_853.0),
        (iface::GY, 30_164.0),
    ];
    RateTable {
        rates: rates.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        mode: RateMode::TableCalibrated,
    }
}

/// Derive the baseline rates from a profile and calibration:
///
/// * S6a     = registered_subscribers x mme_hss_per_subscriber
/// * Gx      = simultaneous_bearers x pcrf_per_bearer
/// * Ud_pcrf = simultaneous_bearers
/// * Gy      = floor(Gx x prepaid_ratio)
/// * RAN_CORE and S5_S8 are the flat calibration rates.
pub fn derive_baseline_rates(profile: &TrafficProfile, cal: &Calibration) -> RateTable {
    let subscribers = profile.registered_subscribers as f64;
    let bearers = profile.simultaneous_bearers as f64;
    let gx = bearers * cal.pcrf_per_bearer;
    let rates = [
        (iface::RAN_CORE, cal.ran_core_rate),
        (iface::S5_S8, cal.sgw_pgw_rate),
        (iface::S6A, subscribers * cal.mme_hss_per_subscriber),
        (iface::GX, gx),
        (iface::UD_PCRF, bearers),
        (iface::GY, (gx * profile.prepaid_ratio).floor()),
    ];
    RateTable {
        rates: rates.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        mode: RateMode::Parametric,
    }
}

const PROFILE_COUNT_FIELDS: [&str; 4] = [
    "registered_subscribers",
    "attached_subscribers",
    "busy_hour_session_attempts",
    "simultaneous_bearers",
];

const PROFILE_NUMBER_FIELDS: [&str; 7] = [
    "mean_session_time",
    "handover_ratio",
    "dense_area_attached_ratio",
    "avg_epsb_session_duration",
    "busy_hour_traffic_ratio",
    "retransmission_factor",
    "prepaid_ratio",
];

/// Parse and validate a traffic profile. All field-level problems are
/// collected and reported together rather than failing on the first.
pub fn load_profile(text: &str) -> Result<TrafficProfile> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| Error::InvalidProfile(vec![FieldError::new("<document>", e.to_string())]))?;
    let map = value.as_object().ok_or_else(|| {
        Error::InvalidProfile(vec![FieldError::new(
            "<document>",
            "expected a JSON object",
        )])
    })?;

    let mut errors = Vec::new();
    let mut count = |name: &str| -> u64 {
        match map.get(name) {
            None => {
                errors.push(FieldError::new(name, "missing field"));
                0
            }
            Some(v) => {
                if let Some(n) = v.as_u64() {
                    n
                } else if let Some(f) = v.as_f64() {
                    if f >= 0.0 && f.fract() == 0.0 && f <= u64::MAX as f64 {
                        f as u64
                    } else {
                        errors.push(FieldError::new(
                            name,
                            format!("must be a non-negative integer count, got {f}"),
                        ));
                        0
                    }
                } else {
                    errors.push(FieldError::new(name, format!("expected a number, got {v}")));
                    0
                }
            }
        }
    };
    let counts: Vec<u64> = PROFILE_COUNT_FIELDS.iter().map(|f| count(f)).collect();

    let mut number = |name: &str| -> f64 {
        match map.get(name) {
            None => {
                errors.push(FieldError::new(name, "missing field"));
                0.0
            }
            Some(v) => match v.as_f64() {
                Some(f) if f.is_finite() => f,
                _ => {
                    errors.push(FieldError::new(name, format!("expected a number, got {v}")));
                    0.0
                }
            },
        }
    };
    let numbers: Vec<f64> = PROFILE_NUMBER_FIELDS.iter().map(|f| number(f)).collect();

    let profile = TrafficProfile {
        registered_subscribers: counts[0],
        attached_subscribers: counts[1],
        busy_hour_session_attempts: counts[2],
        simultaneous_bearers: counts[3],
        mean_session_time: numbers[0],
        handover_ratio: numbers[1],
        dense_area_attached_ratio: numbers[2],
        avg_epsb_session_duration: numbers[3],
        busy_hour_traffic_ratio: numbers[4],
        retransmission_factor: numbers[5],
        prepaid_ratio: numbers[6],
    };
    errors.extend(profile.validate());
    if errors.is_empty() {
        Ok(profile)
    } else {
        Err(Error::InvalidProfile(errors))
    }
}

pub fn load_profile_file(path: &Path) -> Result<TrafficProfile> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::File {
        path: path.to_owned(),
        source,
    })?;
    load_profile(&text).map_err(|e| Error::InvalidFile {
        path: path.to_owned(),
        problems: e.lines(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table3_json_loads_to_reference_profile() {
        let json = serde_json::to_string(&TrafficProfile::table3()).unwrap();
        let profile = load_profile(&json).unwrap();
        assert_eq!(profile, TrafficProfile::table3());
        assert_eq!(profile.registered_subscribers, 167_650);
    }

    #[test]
    fn out_of_range_fraction_is_a_field_error() {
        let mut p = TrafficProfile::table3();
        p.prepaid_ratio = 1.3;
        let json = serde_json::to_string(&p).unwrap();
        match load_profile(&json) {
            Err(Error::InvalidProfile(errs)) => {
                assert!(errs.iter().any(|e| e.field == "prepaid_ratio"));
            }
            other => panic!("expected field errors, got {other:?}"),
        }
    }

    #[test]
    fn attached_exceeding_registered_is_inconsistent() {
        let mut p = TrafficProfile::table3();
        p.attached_subscribers = 200_000;
        let json = serde_json::to_string(&p).unwrap();
        match load_profile(&json) {
            Err(Error::InvalidProfile(errs)) => {
                assert!(errs.iter().any(|e| e.field == "attached_subscribers"));
            }
            other => panic!("expected field errors, got {other:?}"),
        }
    }

    #[test]
    fn all_broken_fields_are_reported_together() {
        let json = r#"{
            "registered_subscribers": "many",
            "simultaneous_bearers": 18853,
            "mean_session_time": 180,
            "handover_ratio": 0.4,
            "dense_area_attached_ratio": 0.9,
            "avg_epsb_session_duration": 900,
            "busy_hour_traffic_ratio": 0.15,
            "retransmission_factor": -1,
            "prepaid_ratio": 0.8
        }"#;
        match load_profile(json) {
            Err(Error::InvalidProfile(errs)) => {
                let fields: Vec<&str> = errs.iter().map(|e| e.field.as_str()).collect();
                assert!(fields.contains(&"registered_subscribers")); // non-numeric
                assert!(fields.contains(&"attached_subscribers")); // missing
                assert!(fields.contains(&"busy_hour_session_attempts")); // missing
                assert!(fields.contains(&"retransmission_factor")); // negative
            }
            other => panic!("expected field errors, got {other:?}"),
        }
    }

    #[test]
    fn table_rates_match_published_values() {
        let t = table_calibrated_rates();
        assert_eq!(t.rates.len(), 6);
        assert_eq!(t.rates[iface::S5_S8], 56_559.0);
        assert_eq!(t.total(), 1_358_044.0);
        assert!(t.rates.values().all(|&v| v >= 0.0));
    }

    #[test]
    fn derived_rates_reproduce_published_table() {
        let derived = derive_baseline_rates(&TrafficProfile::table3(), &Calibration::paper());
        assert_eq!(derived.rates[iface::S6A], 1_039_430.0);
        assert_eq!(derived.rates[iface::GX], 37_706.0);
        assert_eq!(derived.rates[iface::UD_PCRF], 18_853.0);
        assert_eq!(derived.rates[iface::GY], 30_164.0);
        assert_eq!(derived.total(), 1_358_044.0);
        // Entry-for-entry agreement with the published table.
        assert_eq!(derived.rates, table_calibrated_rates().rates);
    }

    #[test]
    fn zero_prepaid_ratio_zeroes_gy() {
        let mut p = TrafficProfile::table3();
        p.prepaid_ratio = 0.0;
        let derived = derive_baseline_rates(&p, &Calibration::paper());
        assert_eq!(derived.rates[iface::GY], 0.0);
    }

    #[test]
    fn every_table_key_is_a_declared_interface() {
        let model = crate::model::Model::default_epc();
        for id in table_calibrated_rates().rates.keys() {
            assert!(model.interface(id).is_some(), "undeclared interface {id}");
        }
    }
}
