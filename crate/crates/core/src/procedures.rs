//! Signaling procedures as ordered message sequences, expanded against a
//! placement into per-step path classes.
//!
//! The attach flow ships as the builtin; catalogs are data and can be
//! loaded from file, so the step lists can be refined without code
//! changes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{classify_path, iface, EntityKind, Model, PathClass, Placement};

/// Step guard: prepaid-only steps are dropped for postpaid expansions.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize,
)]
pub enum Guard {
    #[default]
    #[serde(rename = "ALWAYS")]
    Always,
    #[serde(rename = "PREPAID_ONLY")]
    PrepaidOnly,
}

/// One message exchange: `count` transactions from `src` to `dst` over an
/// interface.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub src: EntityKind,
    pub dst: EntityKind,
    pub interface: String,
    #[serde(default = "one")]
    pub count: u32,
    #[serde(default)]
    pub condition: Guard,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcedureDef {
    pub name: String,
    pub steps: Vec<Step>,
}

/// A procedure expanded under a placement: each kept step with its path
/// class, and the network/internal transaction totals.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcedureBreakdown {
    pub procedure: String,
    pub per_step: Vec<(Step, PathClass)>,
    pub network_transactions: u64,
    pub internal_transactions: u64,
}

/// The user-equipment attach flow restricted to the modeled entities and
/// interfaces. The MME->SGW create-session leg is tagged with the
/// eNB-anchored aggregate, matching the published bundling of S11 into the
/// combined row.
pub fn attach_procedure() -> ProcedureDef {
    use EntityKind::*;
    let step = |src, dst, interface: &str, condition| Step {
        src,
        dst,
        interface: interface.to_owned(),
        count: 1,
        condition,
    };
    ProcedureDef {
        name: "attach".into(),
        steps: vec![
            step(Enb, Mme, iface::RAN_CORE, Guard::Always), // attach request
            step(Mme, HssFe, iface::S6A, Guard::Always),    // authentication info request
            step(HssFe, Mme, iface::S6A, Guard::Always),    // authentication info answer
            step(HssFe, Udr, iface::UD_HSS, Guard::Always), // subscriber profile query
            step(Udr, HssFe, iface::UD_HSS, Guard::Always), // subscriber profile response
            step(Mme, HssFe, iface::S6A, Guard::Always),    // update location request
            step(HssFe, Mme, iface::S6A, Guard::Always),    // update location answer
            step(Mme, Sgw, iface::RAN_CORE, Guard::Always), // create session (S11 share)
            step(Sgw, Pgw, iface::S5_S8, Guard::Always),    // create session
            step(Pgw, Pcrf, iface::GX, Guard::Always),      // policy request
            step(Pcrf, Pgw, iface::GX, Guard::Always),      // policy answer
            step(Pcrf, Udr, iface::UD_PCRF, Guard::Always), // subscriber policy query
            step(Pcrf, Ocs, iface::GY, Guard::PrepaidOnly), // prepaid credit check
        ],
    }
}

/// Expand a procedure under a placement: classify every kept step and
/// total the transactions per side.
pub fn expand_procedure(
    model: &Model,
    procedure: &ProcedureDef,
    placement: &Placement,
    prepaid: bool,
) -> Result<ProcedureBreakdown> {
    let mut per_step = Vec::new();
    let mut network = 0u64;
    let mut internal = 0u64;
    for step in &procedure.steps {
        if step.condition == Guard::PrepaidOnly && !prepaid {
            continue;
        }
        if model.interface(&step.interface).is_none() {
            return Err(Error::UnknownInterface(step.interface.clone()));
        }
        let class = classify_path(placement, step.src, step.dst)?;
        if class.is_network() {
            network += u64::from(step.count);
        } else {
            internal += u64::from(step.count);
        }
        per_step.push((step.clone(), class));
    }
    Ok(ProcedureBreakdown {
        procedure: procedure.name.clone(),
        per_step,
        network_transactions: network,
        internal_transactions: internal,
    })
}

/// Structural checks for a procedure against a model; an empty list means
/// the procedure is well-formed. Steps on aggregate interfaces are exempt
/// from endpoint matching (the aggregate bundles several legs).
pub fn validate_procedure(model: &Model, procedure: &ProcedureDef) -> Vec<String> {
    let mut problems = Vec::new();
    let ctx = &procedure.name;
    if procedure.steps.is_empty() {
        problems.push(format!("procedure {ctx}: has no steps"));
    }
    for (i, step) in procedure.steps.iter().enumerate() {
        let n = i + 1;
        if step.count < 1 {
            problems.push(format!("procedure {ctx} step {n}: count must be >= 1"));
        }
        if step.src == step.dst {
            problems.push(format!(
                "procedure {ctx} step {n}: src and dst are both {}",
                step.src
            ));
        }
        match model.interface(&step.interface) {
            None => problems.push(format!(
                "procedure {ctx} step {n}: undeclared interface {}",
                step.interface
            )),
            Some(interface) => {
                if !interface.aggregate && !interface.connects(step.src, step.dst) {
                    problems.push(format!(
                        "procedure {ctx} step {n}: ({}, {}) does not match the endpoints of {}",
                        step.src, step.dst, step.interface
                    ));
                }
            }
        }
    }
    problems
}

/// Parse a procedure catalog (a JSON array of procedures).
pub fn parse_procedures(text: &str) -> serde_json::Result<Vec<ProcedureDef>> {
    serde_json::from_str(text)
}

/// Read, parse, and validate a procedure catalog file.
pub fn load_procedures(path: &Path, model: &Model) -> Result<Vec<ProcedureDef>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::File {
        path: path.to_owned(),
        source,
    })?;
    let procedures = parse_procedures(&text).map_err(|e| Error::Malformed {
        path: path.to_owned(),
        message: e.to_string(),
    })?;
    let problems: Vec<String> = procedures
        .iter()
        .flat_map(|p| validate_procedure(model, p))
        .collect();
    if problems.is_empty() {
        Ok(procedures)
    } else {
        Err(Error::InvalidFile {
            path: path.to_owned(),
            problems,
        })
    }
}
