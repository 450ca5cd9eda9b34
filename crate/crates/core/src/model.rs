//! EPC entity universe, signaling interfaces, placements, and the path
//! classification induced by VM co-location.
//!
//! A [`Placement`] assigns every placeable entity to a (segment, host, LAN)
//! triple; [`classify_path`] turns a pair of entities into the
//! [`PathClass`] their transactions traverse. External entities (the radio
//! side and OSS/BSS) are never placed and always classify as
//! [`PathClass::External`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The EPC actors known to the model. The enumeration is closed: unknown
/// names in input files are rejected at parse time.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum EntityKind {
    #[serde(rename = "MME")]
    Mme,
    #[serde(rename = "HSS_FE")]
    HssFe,
    #[serde(rename = "UDR")]
    Udr,
    #[serde(rename = "SGW")]
    Sgw,
    #[serde(rename = "PGW")]
    Pgw,
    #[serde(rename = "PCEF")]
    Pcef,
    #[serde(rename = "PCRF")]
    Pcrf,
    #[serde(rename = "OCS")]
    Ocs,
    #[serde(rename = "OFCS")]
    Ofcs,
    #[serde(rename = "SGSN")]
    Sgsn,
    #[serde(rename = "HLR_FE")]
    HlrFe,
    #[serde(rename = "ENB")]
    Enb,
    #[serde(rename = "OSS_BSS")]
    OssBss,
}

impl EntityKind {
    /// Every entity in the model, externals included.
    pub const ALL: [EntityKind; 13] = [
        EntityKind::Mme,
        EntityKind::HssFe,
        EntityKind::Udr,
        EntityKind::Sgw,
        EntityKind::Pgw,
        EntityKind::Pcef,
        EntityKind::Pcrf,
        EntityKind::Ocs,
        EntityKind::Ofcs,
        EntityKind::Sgsn,
        EntityKind::HlrFe,
        EntityKind::Enb,
        EntityKind::OssBss,
    ];

    /// The uppercase token used in input and output files.
    pub fn token(self) -> &'static str {
        match self {
            EntityKind::Mme => "MME",
            EntityKind::HssFe => "HSS_FE",
            EntityKind::Udr => "UDR",
            EntityKind::Sgw => "SGW",
            EntityKind::Pgw => "PGW",
            EntityKind::Pcef => "PCEF",
            EntityKind::Pcrf => "PCRF",
            EntityKind::Ocs => "OCS",
            EntityKind::Ofcs => "OFCS",
            EntityKind::Sgsn => "SGSN",
            EntityKind::HlrFe => "HLR_FE",
            EntityKind::Enb => "ENB",
            EntityKind::OssBss => "OSS_BSS",
        }
    }

    /// True for entities that live off the virtualized platform: the radio
    /// node and the centralized OSS/BSS. External entities never appear in
    /// a placement.
    pub fn is_external(self) -> bool {
        matches!(self, EntityKind::Enb | EntityKind::OssBss)
    }

    /// The entities a placement must assign (everything non-external).
    pub fn placeable() -> impl Iterator<Item = EntityKind> {
        Self::ALL.into_iter().filter(|e| !e.is_external())
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Signaling protocol tag for an interface. The transport note is
/// informational only; no numeric result depends on it.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum Protocol {
    #[serde(rename = "GTP_C")]
    GtpC,
    #[serde(rename = "DIAMETER")]
    Diameter,
    #[serde(rename = "LDAP")]
    Ldap,
    #[serde(rename = "S1AP")]
    S1ap,
}

impl Protocol {
    pub fn token(self) -> &'static str {
        match self {
            Protocol::GtpC => "GTP_C",
            Protocol::Diameter => "DIAMETER",
            Protocol::Ldap => "LDAP",
            Protocol::S1ap => "S1AP",
        }
    }

    /// Descriptive transport stack, metadata only.
    pub fn transport(self) -> &'static str {
        match self {
            Protocol::GtpC => "UDP",
            Protocol::Diameter => "SCTP/TCP+IPsec",
            Protocol::Ldap => "TCP+TLS/SSL",
            Protocol::S1ap => "SCTP",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Interface ids of the default EPC model.
pub mod iface {
    /// Aggregate row covering eNB<->MME, eNB<->SGW and the bundled
    /// MME<->SGW (S11) traffic; anchored at the eNB.
    pub const RAN_CORE: &str = "RAN_CORE";
    pub const S5_S8: &str = "S5_S8";
    pub const S6A: &str = "S6a";
    /// HSS front-end query path to the user data repository; carries
    /// traffic only once MME and HSS FE are co-segmented.
    pub const UD_HSS: &str = "Ud_hss";
    pub const GX: &str = "Gx";
    pub const UD_PCRF: &str = "Ud_pcrf";
    pub const GY: &str = "Gy";
}

/// A named reference point between two entities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interface {
    pub id: String,
    /// Unordered pair of distinct endpoints.
    pub endpoints: (EntityKind, EntityKind),
    pub protocol: Protocol,
    /// True only for the eNB-anchored combined row; aggregate interfaces
    /// always stay on the network and exempt procedure steps from endpoint
    /// matching.
    pub aggregate: bool,
}

impl Interface {
    pub fn new(
        id: &str,
        endpoints: (EntityKind, EntityKind),
        protocol: Protocol,
        aggregate: bool,
    ) -> Self {
        Self {
            id: id.to_owned(),
            endpoints,
            protocol,
            aggregate,
        }
    }

    /// True if `{a, b}` equals the endpoint pair, in either order.
    pub fn connects(&self, a: EntityKind, b: EntityKind) -> bool {
        let (x, y) = self.endpoints;
        (a, b) == (x, y) || (a, b) == (y, x)
    }
}

/// The interface catalog. Interfaces keep their declaration order, which is
/// also the row order of rendered tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    interfaces: Vec<Interface>,
}

impl Model {
    pub fn new(interfaces: Vec<Interface>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for i in &interfaces {
            let (a, b) = i.endpoints;
            if a == b {
                return Err(Error::InvalidModel(format!(
                    "interface {} has identical endpoints",
                    i.id
                )));
            }
            if i.aggregate && a != EntityKind::Enb && b != EntityKind::Enb {
                return Err(Error::InvalidModel(format!(
                    "aggregate interface {} is not anchored at ENB",
                    i.id
                )));
            }
            if !seen.insert(i.id.clone()) {
                return Err(Error::InvalidModel(format!(
                    "duplicate interface id {}",
                    i.id
                )));
            }
        }
        Ok(Self { interfaces })
    }

    /// The default EPC reference points, in published table row order.
    pub fn default_epc() -> Self {
        use EntityKind::*;
        Self::new(vec![
            Interface::new(iface::RAN_CORE, (Enb, Mme), Protocol::S1ap, true),
            Interface::new(iface::S5_S8, (Sgw, Pgw), Protocol::GtpC, false),
            Interface::new(iface::S6A, (Mme, HssFe), Protocol::Diameter, false),
            Interface::new(iface::UD_HSS, (HssFe, Udr), Protocol::Ldap, false),
            Interface::new(iface::GX, (Pcrf, Pgw), Protocol::Diameter, false),
            Interface::new(iface::UD_PCRF, (Pcrf, Udr), Protocol::Ldap, false),
            Interface::new(iface::GY, (Pcrf, Ocs), Protocol::Diameter, false),
        ])
        .expect("default model is well-formed")
    }

    pub fn interfaces(&self) -> &[Interface] {
        &self.interfaces
    }

    pub fn interface(&self, id: &str) -> Option<&Interface> {
        self.interfaces.iter().find(|i| i.id == id)
    }

    pub fn declaration_index(&self, id: &str) -> Option<usize> {
        self.interfaces.iter().position(|i| i.id == id)
    }
}

impl Default for Model {
    fn default() -> Self {
        Self::default_epc()
    }
}

/// Where one entity lives: its segment (one VM/VNF bundle), the physical
/// host carrying that segment, and the LAN its virtual NIC sits on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Location {
    pub segment: String,
    pub host: String,
    pub lan: String,
}

impl Location {
    pub fn new(segment: &str, host: &str, lan: &str) -> Self {
        Self {
            segment: segment.to_owned(),
            host: host.to_owned(),
            lan: lan.to_owned(),
        }
    }
}

/// An assignment of every placeable entity to a location.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub name: String,
    assignments: BTreeMap<EntityKind, Location>,
}

impl Placement {
    pub fn new(name: &str, assignments: BTreeMap<EntityKind, Location>) -> Self {
        Self {
            name: name.to_owned(),
            assignments,
        }
    }

    pub fn location(&self, entity: EntityKind) -> Option<&Location> {
        self.assignments.get(&entity)
    }

    pub fn assignments(&self) -> &BTreeMap<EntityKind, Location> {
        &self.assignments
    }

    /// True when both entities are placed in the same segment.
    pub fn co_segmented(&self, a: EntityKind, b: EntityKind) -> bool {
        match (self.assignments.get(&a), self.assignments.get(&b)) {
            (Some(x), Some(y)) => x.segment == y.segment,
            _ => false,
        }
    }

    /// Segment view: members of each segment, with the segment's host.
    pub fn segments(&self) -> BTreeMap<String, Vec<EntityKind>> {
        let mut out: BTreeMap<String, Vec<EntityKind>> = BTreeMap::new();
        for (e, loc) in &self.assignments {
            out.entry(loc.segment.clone()).or_default().push(*e);
        }
        out
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("placement serializes")
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::File {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| Error::Malformed {
            path: path.to_owned(),
            message: e.to_string(),
        })
    }
}

/// The network traversal category of one transaction.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum PathClass {
    /// Same segment: never touches the network.
    #[serde(rename = "INTERNAL")]
    Internal,
    /// Same host, same LAN: one Vswitch.
    #[serde(rename = "INTRA_HOST_INTRA_LAN")]
    IntraHostIntraLan,
    /// Same host, different LANs: Vswitch, NIC, external switch and back.
    #[serde(rename = "INTRA_HOST_INTER_LAN")]
    IntraHostInterLan,
    /// Different hosts.
    #[serde(rename = "INTER_HOST")]
    InterHost,
    /// One endpoint is off the virtualized platform.
    #[serde(rename = "EXTERNAL")]
    External,
}

impl PathClass {
    pub fn token(self) -> &'static str {
        match self {
            PathClass::Internal => "INTERNAL",
            PathClass::IntraHostIntraLan => "INTRA_HOST_INTRA_LAN",
            PathClass::IntraHostInterLan => "INTRA_HOST_INTER_LAN",
            PathClass::InterHost => "INTER_HOST",
            PathClass::External => "EXTERNAL",
        }
    }

    /// Only internal transactions stay off the network.
    pub fn is_network(self) -> bool {
        self != PathClass::Internal
    }
}

impl fmt::Display for PathClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Classify the path one transaction between `a` and `b` takes under a
/// placement. Symmetric in the pair.
pub fn classify_path(placement: &Placement, a: EntityKind, b: EntityKind) -> Result<PathClass> {
    if a == b {
        return Err(Error::SelfPath(a));
    }
    if a.is_external() || b.is_external() {
        return Ok(PathClass::External);
    }
    let la = placement.location(a).ok_or(Error::UnplacedEntity(a))?;
    let lb = placement.location(b).ok_or(Error::UnplacedEntity(b))?;
    Ok(if la.segment == lb.segment {
        PathClass::Internal
    } else if la.host == lb.host && la.lan == lb.lan {
        PathClass::IntraHostIntraLan
    } else if la.host == lb.host {
        PathClass::IntraHostInterLan
    } else {
        PathClass::InterHost
    })
}

/// A broken placement invariant. Violations are data, not failures: a
/// validation pass returns all of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A non-external entity of the universe has no assignment.
    MissingEntity(EntityKind),
    /// An external entity appears in the assignments.
    ExternalPlaced(EntityKind),
    /// An assigned entity is not part of the universe being validated.
    OutsideUniverse(EntityKind),
    /// Entities of one segment sit on different hosts.
    SegmentSpansHosts {
        segment: String,
        entity: EntityKind,
        host: String,
        other_host: String,
    },
    /// PCEF is embedded in the PGW and must share its segment.
    PcefSeparated {
        pcef_segment: String,
        pgw_segment: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingEntity(e) => {
                write!(f, "{e}: required entity is not placed")
            }
            Violation::ExternalPlaced(e) => {
                write!(f, "{e}: external entity cannot be placed in a segment")
            }
            Violation::OutsideUniverse(e) => {
                write!(f, "{e}: entity is not part of the model universe")
            }
            Violation::SegmentSpansHosts {
                segment,
                entity,
                host,
                other_host,
            } => write!(
                f,
                "{entity}: segment {segment} spans hosts ({host} vs {other_host}); \
                 a segment is one VM on one host"
            ),
            Violation::PcefSeparated {
                pcef_segment,
                pgw_segment,
            } => write!(
                f,
                "PCEF: must share the PGW segment (PCEF in {pcef_segment}, PGW in {pgw_segment})"
            ),
        }
    }
}

/// Check every placement invariant over the given entity universe and
/// return all violations found; an empty list means the placement is valid.
pub fn validate_placement(placement: &Placement, universe: &[EntityKind]) -> Vec<Violation> {
    let mut violations = Vec::new();

    for &e in universe {
        if !e.is_external() && placement.location(e).is_none() {
            violations.push(Violation::MissingEntity(e));
        }
    }

    for (&e, _) in placement.assignments() {
        if e.is_external() {
            violations.push(Violation::ExternalPlaced(e));
        } else if !universe.contains(&e) {
            violations.push(Violation::OutsideUniverse(e));
        }
    }

    // One segment, one host.
    let mut segment_host: BTreeMap<&str, (&str, EntityKind)> = BTreeMap::new();
    for (&e, loc) in placement.assignments() {
        match segment_host.get(loc.segment.as_str()) {
            None => {
                segment_host.insert(&loc.segment, (&loc.host, e));
            }
            Some(&(host, _)) if host == loc.host => {}
            Some(&(host, _)) => violations.push(Violation::SegmentSpansHosts {
                segment: loc.segment.clone(),
                entity: e,
                host: loc.host.clone(),
                other_host: host.to_owned(),
            }),
        }
    }

    if let (Some(pcef), Some(pgw)) = (
        placement.location(EntityKind::Pcef),
        placement.location(EntityKind::Pgw),
    ) {
        if pcef.segment != pgw.segment {
            violations.push(Violation::PcefSeparated {
                pcef_segment: pcef.segment.clone(),
                pgw_segment: pgw.segment.clone(),
            });
        }
    }

    violations
}
