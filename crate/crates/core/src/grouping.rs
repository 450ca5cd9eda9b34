//! Reference placements and the co-location rewrite rules that split a
//! baseline rate table into network and internal shares.
//!
//! Rules are data: a rule fires when its trigger entities share a segment,
//! its removed interface becomes internal traffic (which co-segmentation
//! already guarantees for well-formed rules), and it may add a replacement
//! interface to the network. Scenario files can override the shipped rule
//! set for what-if studies.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{iface, EntityKind, Location, Model, Placement};
use crate::profile::{Calibration, RateMode, RateTable, TrafficProfile};

/// Report flag raised when a per-subscriber add disagrees with its
/// published reference value.
pub const CALIBRATION_DIVERGENCE: &str = "calibration-divergence";

/// How a rule-added interface gets its rate.
#[derive(Debug, Clone, PartialEq)]
pub enum AddRate {
    /// A published constant, transactions/sec.
    Published(f64),
    /// `multiplier` x registered subscribers. When the published table
    /// gives a different figure for the same interface, carrying it as
    /// `published_reference` makes the divergence visible as a report flag.
    PerSubscriber {
        multiplier: f64,
        published_reference: Option<f64>,
    },
}

/// Interface inserted into the network when a rule fires.
#[derive(Debug, Clone, PartialEq)]
pub struct AddedInterface {
    pub interface: String,
    pub rate: AddRate,
}

/// One co-location rewrite rule.
#[derive(Debug, Clone, PartialEq)]
pub struct RewriteRule {
    pub id: String,
    /// Entities that must share a segment for the rule to fire.
    pub trigger: BTreeSet<EntityKind>,
    /// Interface whose full rate becomes internal.
    pub removes: String,
    pub adds: Option<AddedInterface>,
}

impl RewriteRule {
    /// True when every trigger entity is placed in one common segment.
    pub fn triggered(&self, placement: &Placement) -> bool {
        let mut segments = self
            .trigger
            .iter()
            .map(|e| placement.location(*e).map(|l| l.segment.as_str()));
        match segments.next() {
            Some(Some(first)) => segments.all(|s| s == Some(first)),
            _ => false,
        }
    }
}

/// The shipped rule set. The HSS rule's added rate depends on the rate
/// mode: the published constant under table calibration, one transaction
/// per registered subscriber under parametric derivation.
pub fn paper_rules(mode: RateMode, cal: &Calibration) -> Vec<RewriteRule> {
    use EntityKind::*;
    let udr_rate = match mode {
        RateMode::TableCalibrated => AddRate::Published(cal.grouped_udr_rate_published),
        RateMode::Parametric => AddRate::PerSubscriber {
            multiplier: 1.0,
            published_reference: Some(cal.grouped_udr_rate_published),
        },
    };
    vec![
        RewriteRule {
            id: "R1".into(),
            trigger: [Mme, HssFe].into(),
            removes: iface::S6A.into(),
            adds: Some(AddedInterface {
                interface: iface::UD_HSS.into(),
                rate: udr_rate,
            }),
        },
        RewriteRule {
            id: "R2".into(),
            trigger: [Sgw, Pgw].into(),
            removes: iface::S5_S8.into(),
            adds: None,
        },
        RewriteRule {
            id: "R3a".into(),
            trigger: [Pcrf, Udr].into(),
            removes: iface::UD_PCRF.into(),
            adds: None,
        },
        RewriteRule {
            id: "R3b".into(),
            trigger: [Pcrf, Ocs].into(),
            removes: iface::GY.into(),
            adds: None,
        },
    ]
}

/// Pre-grouping deployment: every VNF in its own segment on its own host,
/// one LAN per host. The PGW-embedded PCEF rides with the PGW, so there
/// are ten segments over the eleven placeable entities.
pub fn isolated_placement() -> Placement {
    let mut assignments = BTreeMap::new();
    for e in EntityKind::placeable() {
        let anchor = if e == EntityKind::Pcef {
            EntityKind::Pgw
        } else {
            e
        };
        let tag = anchor.token().to_ascii_lowercase();
        assignments.insert(
            e,
            Location::new(
                &format!("seg-{tag}"),
                &format!("host-{tag}"),
                &format!("lan-{tag}"),
            ),
        );
    }
    Placement::new("isolated", assignments)
}

/// The proposed four-segment grouping, one host per segment.
pub fn proposed_placement() -> Placement {
    use EntityKind::*;
    let segments: [(&str, &[EntityKind]); 4] = [
        ("seg1", &[Mme, HssFe]),
        ("seg2", &[Sgsn, HlrFe]),
        ("seg3", &[Pgw, Pcef, Sgw]),
        ("seg4", &[Udr, Ocs, Ofcs, Pcrf]),
    ];
    let mut assignments = BTreeMap::new();
    for (i, (seg, members)) in segments.iter().enumerate() {
        for &e in *members {
            assignments.insert(
                e,
                Location::new(seg, &format!("host{}", i + 1), &format!("lan{}", i + 1)),
            );
        }
    }
    Placement::new("proposed", assignments)
}

/// Degenerate placement with every placeable entity in one segment.
pub fn single_segment_placement() -> Placement {
    let mut assignments = BTreeMap::new();
    for e in EntityKind::placeable() {
        assignments.insert(e, Location::new("seg1", "host1", "lan1"));
    }
    Placement::new("single-segment", assignments)
}

/// A baseline rate table split into network and internal shares under a
/// placement. For every baseline interface, network + internal equals the
/// baseline rate; entries in `rule_added` are extra interfaces inserted by
/// fired rules.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedRates {
    pub placement_name: String,
    pub network: BTreeMap<String, f64>,
    pub internal: BTreeMap<String, f64>,
    pub rule_added: BTreeSet<String>,
    pub flags: Vec<String>,
}

impl GroupedRates {
    pub fn network_total(&self) -> f64 {
        self.network.values().sum()
    }

    pub fn internal_total(&self) -> f64 {
        self.internal.values().sum()
    }
}

/// Split a baseline rate table under a placement and apply the rewrite
/// rules whose triggers are co-segmented.
///
/// Co-segmented endpoints move an interface's full rate to the internal
/// side; aggregate (eNB-anchored) interfaces always stay on the network.
/// A fired rule's added interface goes to the network at its specified
/// rate (scaled by `rate_scale`), unless its own endpoints are
/// co-segmented, in which case the add is suppressed entirely.
pub fn apply_grouping(
    model: &Model,
    rates: &RateTable,
    placement: &Placement,
    rules: &[RewriteRule],
    profile: Option<&TrafficProfile>,
    rate_scale: f64,
) -> Result<GroupedRates> {
    let mut grouped = GroupedRates {
        placement_name: placement.name.clone(),
        network: BTreeMap::new(),
        internal: BTreeMap::new(),
        rule_added: BTreeSet::new(),
        flags: Vec::new(),
    };

    for (id, &rate) in &rates.rates {
        let interface = model
            .interface(id)
            .ok_or_else(|| Error::UnknownInterface(id.clone()))?;
        let (a, b) = interface.endpoints;
        let internal = !interface.aggregate && placement.co_segmented(a, b);
        if internal {
            grouped.internal.insert(id.clone(), rate);
        } else {
            grouped.network.insert(id.clone(), rate);
        }
    }

    for rule in rules.iter().filter(|r| r.triggered(placement)) {
        let Some(add) = &rule.adds else { continue };
        let interface = model
            .interface(&add.interface)
            .ok_or_else(|| Error::UnknownInterface(add.interface.clone()))?;
        let (a, b) = interface.endpoints;
        if placement.co_segmented(a, b) {
            // The replacement interface would itself be internal; nothing
            // reaches the network.
            continue;
        }
        let value = match &add.rate {
            AddRate::Published(c) => *c,
            AddRate::PerSubscriber {
                multiplier,
                published_reference,
            } => {
                let profile = profile.ok_or(Error::ProfileRequired)?;
                let derived = multiplier * profile.registered_subscribers as f64;
                if let Some(reference) = published_reference {
                    if (derived - reference).abs() > 0.5 {
                        let flag = format!(
                            "{CALIBRATION_DIVERGENCE}: {} per-subscriber rate {derived} \
                             differs from published {reference}",
                            add.interface
                        );
                        if !grouped.flags.contains(&flag) {
                            grouped.flags.push(flag);
                        }
                    }
                }
                derived
            }
        };
        *grouped.network.entry(add.interface.clone()).or_insert(0.0) += value * rate_scale;
        grouped.rule_added.insert(add.interface.clone());
    }

    Ok(grouped)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum AddMode {
    Published,
    PerSubscriber,
}

#[derive(Debug, Serialize, Deserialize)]
struct RuleFileAdd {
    interface: String,
    mode: AddMode,
    value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    published_reference: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RuleFileEntry {
    id: String,
    trigger: Vec<EntityKind>,
    removes: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    adds: Option<RuleFileAdd>,
}

/// Parse a rule file (a JSON array of rules). Structure only; use
/// [`lint_rules`] for semantic checks against a model.
pub fn parse_rules(text: &str) -> serde_json::Result<Vec<RewriteRule>> {
    let entries: Vec<RuleFileEntry> = serde_json::from_str(text)?;
    Ok(entries
        .into_iter()
        .map(|e| RewriteRule {
            id: e.id,
            trigger: e.trigger.into_iter().collect(),
            removes: e.removes,
            adds: e.adds.map(|a| AddedInterface {
                interface: a.interface,
                rate: match a.mode {
                    AddMode::Published => AddRate::Published(a.value),
                    AddMode::PerSubscriber => AddRate::PerSubscriber {
                        multiplier: a.value,
                        published_reference: a.published_reference,
                    },
                },
            }),
        })
        .collect())
}

/// Serialize rules in the rule-file format.
pub fn rules_to_json(rules: &[RewriteRule]) -> String {
    let entries: Vec<RuleFileEntry> = rules
        .iter()
        .map(|r| RuleFileEntry {
            id: r.id.clone(),
            trigger: r.trigger.iter().copied().collect(),
            removes: r.removes.clone(),
            adds: r.adds.as_ref().map(|a| match &a.rate {
                AddRate::Published(c) => RuleFileAdd {
                    interface: a.interface.clone(),
                    mode: AddMode::Published,
                    value: *c,
                    published_reference: None,
                },
                AddRate::PerSubscriber {
                    multiplier,
                    published_reference,
                } => RuleFileAdd {
                    interface: a.interface.clone(),
                    mode: AddMode::PerSubscriber,
                    value: *multiplier,
                    published_reference: *published_reference,
                },
            }),
        })
        .collect();
    serde_json::to_string_pretty(&entries).expect("rules serialize")
}

/// Semantic checks for a rule set against a model; an empty list means the
/// rules are well-formed.
pub fn lint_rules(rules: &[RewriteRule], model: &Model) -> Vec<String> {
    let mut problems = Vec::new();
    let mut ids = BTreeSet::new();
    for rule in rules {
        let ctx = &rule.id;
        if rule.id.is_empty() {
            problems.push("rule with empty id".to_string());
        } else if !ids.insert(rule.id.clone()) {
            problems.push(format!("rule {ctx}: duplicate id"));
        }
        if rule.trigger.len() < 2 {
            problems.push(format!(
                "rule {ctx}: trigger needs at least two entities to co-segment"
            ));
        }
        if rule.trigger.iter().any(|e| e.is_external()) {
            problems.push(format!(
                "rule {ctx}: external entities can never be co-segmented"
            ));
        }
        match model.interface(&rule.removes) {
            None => problems.push(format!(
                "rule {ctx}: removes undeclared interface {}",
                rule.removes
            )),
            Some(interface) => {
                let (a, b) = interface.endpoints;
                if !(rule.trigger.contains(&a) && rule.trigger.contains(&b)) {
                    problems.push(format!(
                        "rule {ctx}: endpoints of {} are not covered by the trigger",
                        rule.removes
                    ));
                }
            }
        }
        if let Some(add) = &rule.adds {
            if model.interface(&add.interface).is_none() {
                problems.push(format!(
                    "rule {ctx}: adds undeclared interface {}",
                    add.interface
                ));
            }
            let value = match &add.rate {
                AddRate::Published(c) => *c,
                AddRate::PerSubscriber { multiplier, .. } => *multiplier,
            };
            if !(value >= 0.0 && value.is_finite()) {
                problems.push(format!("rule {ctx}: added rate must be >= 0, got {value}"));
            }
        }
    }
    problems
}

/// Read, parse, and lint a rule file.
pub fn load_rules(path: &Path, model: &Model) -> Result<Vec<RewriteRule>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::File {
        path: path.to_owned(),
        source,
    })?;
    let rules = parse_rules(&text).map_err(|e| Error::Malformed {
        path: path.to_owned(),
        message: e.to_string(),
    })?;
    let problems = lint_rules(&rules, model);
    if problems.is_empty() {
        Ok(rules)
    } else {
        Err(Error::InvalidFile {
            path: path.to_owned(),
            problems,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{classify_path, validate_placement, PathClass};
    use crate::profile::table_calibrated_rates;

    fn grouped_table(placement: &Placement) -> GroupedRates {
        let model = Model::default_epc();
        let rates = table_calibrated_rates();
        let rules = paper_rules(RateMode::TableCalibrated, &Calibration::paper());
        apply_grouping(&model, &rates, placement, &rules, None, 1.0).unwrap()
    }

    #[test]
    fn isolated_placement_separates_everything_but_pcef() {
        let p = isolated_placement();
        let segments = p.segments();
        assert_eq!(segments.len(), 10);
        let hosts: BTreeSet<&str> = p
            .assignments()
            .values()
            .map(|l| l.host.as_str())
            .collect();
        assert_eq!(hosts.len(), 10);
        assert!(p.co_segmented(EntityKind::Pgw, EntityKind::Pcef));
        assert_eq!(
            classify_path(&p, EntityKind::Mme, EntityKind::HssFe).unwrap(),
            PathClass::InterHost
        );
        assert_eq!(validate_placement(&p, &EntityKind::ALL), vec![]);
    }

    #[test]
    fn proposed_placement_matches_published_segments() {
        let p = proposed_placement();
        assert_eq!(p.segments().len(), 4);
        assert_eq!(validate_placement(&p, &EntityKind::ALL), vec![]);
        assert_eq!(
            classify_path(&p, EntityKind::Sgw, EntityKind::Pgw).unwrap(),
            PathClass::Internal
        );
        assert_eq!(
            classify_path(&p, EntityKind::Pcrf, EntityKind::Ocs).unwrap(),
            PathClass::Internal
        );
        assert_eq!(
            classify_path(&p, EntityKind::Pcrf, EntityKind::Pgw).unwrap(),
            PathClass::InterHost
        );
    }

    #[test]
    fn proposed_grouping_reproduces_published_network_rates() {
        let grouped = grouped_table(&proposed_placement());
        let expected_network: BTreeMap<String, f64> = [
            (iface::RAN_CORE.to_string(), 175_332.0),
            (iface::UD_HSS.to_string(), 173_239.0),
            (iface::GX.to_string(), 37_706.0),
        ]
        .into();
        assert_eq!(grouped.network, expected_network);
        assert_eq!(grouped.network_total(), 386_277.0);
        let expected_internal: BTreeMap<String, f64> = [
            (iface::S5_S8.to_string(), 56_559.0),
            (iface::S6A.to_string(), 1_039_430.0),
            (iface::UD_PCRF.to_string(), 18_853.0),
            (iface::GY.to_string(), 30_164.0),
        ]
        .into();
        assert_eq!(grouped.internal, expected_internal);
        assert!(grouped.flags.is_empty());
    }

    #[test]
    fn isolated_grouping_keeps_everything_on_the_network() {
        let grouped = grouped_table(&isolated_placement());
        assert_eq!(grouped.network_total(), 1_358_044.0);
        assert_eq!(grouped.internal_total(), 0.0);
        // Trigger unsatisfied: the baseline MME<->HSS rate is untouched.
        assert_eq!(grouped.network[iface::S6A], 1_039_430.0);
        assert!(!grouped.network.contains_key(iface::UD_HSS));
    }

    #[test]
    fn single_segment_leaves_only_the_aggregate_row() {
        let grouped = grouped_table(&single_segment_placement());
        assert_eq!(grouped.network.len(), 1);
        assert_eq!(grouped.network[iface::RAN_CORE], 175_332.0);
        // The replacement UDR interface is suppressed: HSS FE and UDR share
        // the segment.
        assert!(!grouped.rule_added.contains(iface::UD_HSS));
        assert_eq!(grouped.internal_total(), 1_182_712.0);
    }

    #[test]
    fn parametric_rules_flag_the_published_divergence() {
        let model = Model::default_epc();
        let profile = TrafficProfile::table3();
        let cal = Calibration::paper();
        let rates = crate::profile::derive_baseline_rates(&profile, &cal);
        let rules = paper_rules(RateMode::Parametric, &cal);
        let grouped = apply_grouping(
            &model,
            &rates,
            &proposed_placement(),
            &rules,
            Some(&profile),
            1.0,
        )
        .unwrap();
        assert_eq!(grouped.network[iface::UD_HSS], 167_650.0);
        assert_eq!(grouped.network_total(), 380_688.0);
        assert!(grouped
            .flags
            .iter()
            .any(|f| f.starts_with(CALIBRATION_DIVERGENCE)));
    }

    #[test]
    fn per_subscriber_add_without_profile_is_an_error() {
        let model = Model::default_epc();
        let cal = Calibration::paper();
        let rates = table_calibrated_rates();
        let rules = paper_rules(RateMode::Parametric, &cal);
        let err = apply_grouping(&model, &rates, &proposed_placement(), &rules, None, 1.0)
            .unwrap_err();
        assert!(matches!(err, Error::ProfileRequired));
    }

    #[test]
    fn applying_twice_yields_identical_results() {
        let a = grouped_table(&proposed_placement());
        let b = grouped_table(&proposed_placement());
        assert_eq!(a, b);
    }

    #[test]
    fn rule_file_round_trips() {
        let rules = paper_rules(RateMode::TableCalibrated, &Calibration::paper());
        let json = rules_to_json(&rules);
        let back = parse_rules(&json).unwrap();
        assert_eq!(back, rules);
        assert!(lint_rules(&back, &Model::default_epc()).is_empty());
    }

    #[test]
    fn lint_catches_malformed_rules() {
        let model = Model::default_epc();
        let json = r#"[
            {"id": "bad", "trigger": ["MME"], "removes": "S11",
             "adds": {"interface": "Gz", "mode": "published", "value": -5}}
        ]"#;
        let rules = parse_rules(json).unwrap();
        let problems = lint_rules(&rules, &model);
        assert!(problems.iter().any(|p| p.contains("at least two")));
        assert!(problems.iter().any(|p| p.contains("undeclared interface S11")));
        assert!(problems.iter().any(|p| p.contains("undeclared interface Gz")));
        assert!(problems.iter().any(|p| p.contains(">= 0")));
    }
}
