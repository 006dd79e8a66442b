//! Keeps the informational view of each holon coherent with its physical part.
//!
//! Physical readings are appended to a shadow track on the holon's
//! [`PhysicalPartRef`](crate::model::PhysicalPartRef), parallel to the
//! informational state history. [`detect_divergence`] compares the latest
//! entry of each track attribute by attribute, and [`reconcile`] resolves a
//! divergence according to a [`ReconciliationPolicy`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Deserialize;

use crate::ids::{HolonId, ObservationId, StateId};
use crate::model::{HolonKind, Model, ModelError, Observation, CONSUMED_MARKER};
use crate::value::{GroupKind, StateAttributes, Timestamp, TypedValue};

/// Attributes that exist only in the informational view and are never compared.
pub const INFORMATIONAL_ONLY: [(GroupKind, &str); 1] = [(GroupKind::Time, CONSUMED_MARKER)];

fn informational_only(qualified: &str) -> bool {
    INFORMATIONAL_ONLY.iter().any(|(g, n)| qualified.strip_prefix(g.as_str()).and_then(|r| r.strip_prefix('.')) == Some(n))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalEvent {
    pub timestamp: Timestamp,
    pub tag: String,
    pub observed: StateAttributes,
}

/// A new informational state for a holon; `attrs` replaces the previous state's attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct InformationalUpdate {
    pub timestamp: Timestamp,
    pub holon: HolonId,
    pub attrs: StateAttributes,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SyncError {
    #[error("no physical part carries tag {0:?}")]
    UnknownTag(String),
    #[error("tag {tag:?} is carried by several holons: {}", .holons.join(", "))]
    AmbiguousTag { tag: String, holons: Vec<String> },
    #[error("unknown holon {0}")]
    UnknownHolon(String),
    #[error("holon {0} is not elementary and has no physical track")]
    NotElementary(String),
    #[error("holon {0} has no physical observations yet")]
    NoObservations(String),
    #[error("holon {0} has no informational state")]
    NoStates(String),
    #[error("timestamp {given} for {holon} is not after the last entry at {last}")]
    NonMonotonicTimestamp { holon: String, last: Timestamp, given: Timestamp },
    #[error("malformed attributes: {0}")]
    MalformedAttribute(String),
    #[error("report for {0} is coherent; nothing to reconcile")]
    NotDivergent(String),
    #[error("invalid tolerances: {0}")]
    BadTolerances(String),
    #[error("event log line {line}: {message}")]
    BadEvent { line: usize, message: String },
    #[error(transparent)]
    Model(ModelError),
}

impl From<ModelError> for SyncError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::UnknownHolon(h) => SyncError::UnknownHolon(h.to_string()),
            ModelError::NonMonotonicTimestamp { holon, last, given } => {
                SyncError::NonMonotonicTimestamp { holon: holon.to_string(), last, given }
            }
            ModelError::MalformedAttribute(m) => SyncError::MalformedAttribute(m),
            other => SyncError::Model(other),
        }
    }
}

/// Appends a physical reading to the track of the holon carrying `event.tag`.
/// The informational history is left untouched.
pub fn ingest_physical_event(model: &mut Model, event: &PhysicalEvent) -> Result<ObservationId, SyncError> {
    let carriers: Vec<&HolonId> = model
        .holons
        .values()
        .filter(|h| h.physical_part.as_ref().is_some_and(|p| p.tag == event.tag))
        .map(|h| &h.id)
        .collect();
    let holon = match carriers.as_slice() {
        [] => return Err(SyncError::UnknownTag(event.tag.clone())),
        [one] => (*one).clone(),
        many => {
            return Err(SyncError::AmbiguousTag {
                tag: event.tag.clone(),
                holons: many.iter().map(|h| h.to_string()).collect(),
            })
        }
    };
    event.observed.check(model.options.require_units).map_err(SyncError::MalformedAttribute)?;
    let h = model.holons.get_mut(&holon).expect("carrier exists");
    if h.kind != HolonKind::Elementary {
        return Err(SyncError::NotElementary(holon.to_string()));
    }
    let track = &mut h.physical_part.as_mut().expect("carrier has a physical part").track;
    if let Some(last) = track.last() {
        if event.timestamp <= last.timestamp {
            return Err(SyncError::NonMonotonicTimestamp { holon: holon.to_string(), last: last.timestamp, given: event.timestamp });
        }
    }
    let mut n = track.len() + 1;
    let id = loop {
        let candidate = ObservationId::new(format!("{holon}-obs{n}")).expect("holon ids are NCNames");
        if track.iter().all(|o| o.id != candidate) {
            break candidate;
        }
        n += 1;
    };
    track.push(Observation { id: id.clone(), timestamp: event.timestamp, observed: event.observed.clone(), overridden: false });
    Ok(id)
}

/// Records the update as a new informational state. The physical track is left untouched.
pub fn ingest_informational_update(model: &mut Model, update: &InformationalUpdate) -> Result<StateId, SyncError> {
    Ok(model.record_state(&update.holon, update.attrs.clone(), update.timestamp)?)
}

/// Absolute tolerances for numeric comparison, looked up by qualified name
/// (`space.x`), then bare name (`x`), then the default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tolerances {
    pub default: f64,
    pub per_attribute: BTreeMap<String, f64>,
}

impl Tolerances {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, tolerance: f64) -> Self {
        self.per_attribute.insert(name.into(), tolerance);
        self
    }

    pub fn get(&self, qualified: &str) -> f64 {
        let bare = qualified.split_once('.').map_or(qualified, |(_, n)| n);
        self.per_attribute.get(qualified).or_else(|| self.per_attribute.get(bare)).copied().unwrap_or(self.default)
    }

    /// Reads a JSON object mapping attribute names to non-negative numbers.
    /// The key `*` sets the default.
    pub fn from_json(src: &str) -> Result<Self, SyncError> {
        let map: BTreeMap<String, f64> = serde_json::from_str(src).map_err(|e| SyncError::BadTolerances(e.to_string()))?;
        let mut t = Tolerances::new();
        for (k, v) in map {
            if !v.is_finite() || v < 0.0 {
                return Err(SyncError::BadTolerances(format!("tolerance for {k:?} must be a non-negative number")));
            }
            if k == "*" {
                t.default = v;
            } else {
                t.per_attribute.insert(k, v);
            }
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Coherent,
    Divergent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceEntry {
    /// Qualified attribute name, e.g. `space.x`.
    pub attribute: String,
    pub physical: Option<TypedValue>,
    pub informational: Option<TypedValue>,
    /// Absolute difference, for numbers with the same unit on both sides.
    pub delta: Option<f64>,
    pub tolerance: f64,
    pub divergent: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceReport {
    pub holon: HolonId,
    pub observation: ObservationId,
    pub state: StateId,
    pub entries: Vec<DivergenceEntry>,
    pub verdict: Verdict,
}

impl DivergenceReport {
    pub fn is_divergent(&self) -> bool {
        self.verdict == Verdict::Divergent
    }

    pub fn divergent_entries(&self) -> impl Iterator<Item = &DivergenceEntry> {
        self.entries.iter().filter(|e| e.divergent)
    }
}

impl fmt::Display for DivergenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.is_divergent() { "divergent" } else { "coherent" };
        writeln!(f, "{}: {verdict} (observation {}, state {})", self.holon, self.observation, self.state)?;
        let show = |v: &Option<TypedValue>| v.as_ref().map_or("-".to_string(), |v| v.to_string());
        for e in self.divergent_entries() {
            write!(f, "  {}: physical {} vs informational {}", e.attribute, show(&e.physical), show(&e.informational))?;
            if let Some(d) = e.delta {
                write!(f, " (delta {d}, tolerance {})", e.tolerance)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn compare(p: Option<&TypedValue>, i: Option<&TypedValue>, tolerance: f64) -> (Option<f64>, bool) {
    match (p, i) {
        (Some(TypedValue::Number { value: a, unit: ua }), Some(TypedValue::Number { value: b, unit: ub })) => {
            let delta = (a - b).abs();
            (Some(delta), ua != ub || delta > tolerance)
        }
        (Some(a), Some(b)) => (None, a != b),
        _ => (None, true),
    }
}

/// Compares the latest physical observation of an elementary holon with its
/// latest informational state.
pub fn detect_divergence(model: &Model, holon: &str, tolerances: &Tolerances) -> Result<DivergenceReport, SyncError> {
    let h = model.holon(holon).ok_or_else(|| SyncError::UnknownHolon(holon.to_string()))?;
    let pp = match (&h.kind, &h.physical_part) {
        (HolonKind::Elementary, Some(pp)) => pp,
        _ => return Err(SyncError::NotElementary(holon.to_string())),
    };
    let obs = pp.track.last().ok_or_else(|| SyncError::NoObservations(holon.to_string()))?;
    let state = model.latest_state(holon).ok_or_else(|| SyncError::NoStates(holon.to_string()))?;
    let physical = obs.observed.qualified();
    let informational = state.attributes.qualified();
    let names: BTreeSet<&String> = physical.keys().chain(informational.keys()).filter(|k| !informational_only(k)).collect();
    let entries: Vec<DivergenceEntry> = names
        .into_iter()
        .map(|name| {
            let p = physical.get(name).copied();
            let i = informational.get(name).copied();
            let tolerance = tolerances.get(name);
            let (delta, divergent) = compare(p, i, tolerance);
            DivergenceEntry { attribute: name.clone(), physical: p.cloned(), informational: i.cloned(), delta, tolerance, divergent }
        })
        .collect();
    let verdict = if entries.iter().any(|e| e.divergent) { Verdict::Divergent } else { Verdict::Coherent };
    Ok(DivergenceReport { holon: h.id.clone(), observation: obs.id.clone(), state: state.id.clone(), entries, verdict })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReconciliationPolicy {
    /// The informational view takes over the physical reading.
    PhysicalWins,
    /// The physical reading is marked as overridden.
    InformationalWins,
    /// Nothing changes; the divergence is left for a person to resolve.
    Manual,
}

impl ReconciliationPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            ReconciliationPolicy::PhysicalWins => "physical-wins",
            ReconciliationPolicy::InformationalWins => "informational-wins",
            ReconciliationPolicy::Manual => "manual",
        }
    }
}

impl FromStr for ReconciliationPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "physical-wins" | "PhysicalWins" => Ok(ReconciliationPolicy::PhysicalWins),
            "informational-wins" | "InformationalWins" => Ok(ReconciliationPolicy::InformationalWins),
            "manual" | "Manual" => Ok(ReconciliationPolicy::Manual),
            _ => Err(format!("unknown policy {s:?} (expected physical-wins, informational-wins or manual)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Resolution {
    /// A new informational state copying the physical reading.
    Applied(StateId),
    /// The physical observation was marked overridden.
    Overridden(ObservationId),
    /// Left unresolved; carries the report unchanged.
    Pending(DivergenceReport),
}

/// Resolves a divergent report.
///
/// Under `PhysicalWins` the new informational state is stamped `at`, or one
/// millisecond after the latest state if `at` is not later. Attributes that
/// exist only informationally (such as the consumption marker) are kept.
pub fn reconcile(
    model: &mut Model,
    report: &DivergenceReport,
    policy: ReconciliationPolicy,
    at: Timestamp,
) -> Result<Resolution, SyncError> {
    if !report.is_divergent() {
        return Err(SyncError::NotDivergent(report.holon.to_string()));
    }
    let holon = report.holon.as_str();
    let h = model.holon(holon).ok_or_else(|| SyncError::UnknownHolon(holon.to_string()))?;
    match policy {
        ReconciliationPolicy::Manual => Ok(Resolution::Pending(report.clone())),
        ReconciliationPolicy::InformationalWins => {
            let id = h.id.clone();
            let track = &mut model.holons.get_mut(&id).and_then(|h| h.physical_part.as_mut()).ok_or_else(|| SyncError::NotElementary(holon.to_string()))?.track;
            let obs = track.last_mut().ok_or_else(|| SyncError::NoObservations(holon.to_string()))?;
            obs.overridden = true;
            Ok(Resolution::Overridden(obs.id.clone()))
        }
        ReconciliationPolicy::PhysicalWins => {
            let obs = h
                .physical_part
                .as_ref()
                .and_then(|p| p.track.last())
                .ok_or_else(|| SyncError::NoObservations(holon.to_string()))?;
            let mut attrs = obs.observed.clone();
            let mut at = at;
            if let Some(state) = model.latest_state(holon) {
                for (group, name) in INFORMATIONAL_ONLY {
                    if let Some(v) = state.attributes.group(group).get(name) {
                        attrs.group_mut(group).insert(name, v.clone());
                    }
                }
                if at <= state.timestamp {
                    at = state.timestamp.plus_millis(1).expect("timestamp in range");
                }
            }
            let id = h.id.clone();
            Ok(Resolution::Applied(model.record_state(&id, attrs, at)?))
        }
    }
}

/// One line of an event log.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Event {
    Physical {
        timestamp: Timestamp,
        tag: String,
        #[serde(default)]
        attrs: StateAttributes,
    },
    Informational {
        timestamp: Timestamp,
        holon: HolonId,
        #[serde(default)]
        attrs: StateAttributes,
    },
}

impl Event {
    pub fn timestamp(&self) -> Timestamp {
        match self {
            Event::Physical { timestamp, .. } | Event::Informational { timestamp, .. } => *timestamp,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoggedEvent {
    /// 1-based line number in the log.
    pub line: usize,
    pub event: Event,
}

/// Parses a JSON-lines event log. Blank lines are skipped.
pub fn parse_event_log(src: &str) -> Result<Vec<LoggedEvent>, SyncError> {
    src.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map(|event| LoggedEvent { line: i + 1, event })
                .map_err(|e| SyncError::BadEvent { line: i + 1, message: e.to_string() })
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReplaySummary {
    pub applied: usize,
    pub rejected: Vec<(usize, SyncError)>,
    pub divergences: usize,
    pub reconciled: usize,
    pub pending: Vec<DivergenceReport>,
}

fn plural(n: usize, word: &str) -> String {
    if n == 1 {
        format!("{n} {word}")
    } else {
        format!("{n} {word}s")
    }
}

impl fmt::Display for ReplaySummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} applied, {} rejected, {}, {} reconciled, {} pending",
            plural(self.applied, "event"),
            self.rejected.len(),
            plural(self.divergences, "divergence"),
            self.reconciled,
            self.pending.len()
        )?;
        for (line, e) in &self.rejected {
            writeln!(f, "rejected line {line}: {e}")?;
        }
        Ok(())
    }
}

/// Ingests events in log order. After each accepted event the affected
/// holon is checked and, if divergent, reconciled per `policy` at the
/// event's timestamp. Rejected events are recorded and skipped.
pub fn replay(model: &mut Model, events: &[LoggedEvent], policy: ReconciliationPolicy, tolerances: &Tolerances) -> ReplaySummary {
    let mut summary = ReplaySummary::default();
    for LoggedEvent { line, event } in events {
        let holon = match event {
            Event::Physical { timestamp, tag, attrs } => {
                let e = PhysicalEvent { timestamp: *timestamp, tag: tag.clone(), observed: attrs.clone() };
                ingest_physical_event(model, &e).map(|_| tagged_holon(model, tag))
            }
            Event::Informational { timestamp, holon, attrs } => {
                let u = InformationalUpdate { timestamp: *timestamp, holon: holon.clone(), attrs: attrs.clone() };
                ingest_informational_update(model, &u).map(|_| holon.clone())
            }
        };
        let holon = match holon {
            Ok(h) => h,
            Err(e) => {
                summary.rejected.push((*line, e));
                continue;
            }
        };
        summary.applied += 1;
        let Ok(report) = detect_divergence(model, holon.as_str(), tolerances) else { continue };
        if !report.is_divergent() {
            continue;
        }
        summary.divergences += 1;
        match reconcile(model, &report, policy, event.timestamp()) {
            Ok(Resolution::Pending(r)) => summary.pending.push(r),
            Ok(_) => summary.reconciled += 1,
            Err(e) => summary.rejected.push((*line, e)),
        }
    }
    summary
}

fn tagged_holon(model: &Model, tag: &str) -> HolonId {
    model
        .holons
        .values()
        .find(|h| h.physical_part.as_ref().is_some_and(|p| p.tag == tag))
        .map(|h| h.id.clone())
        .expect("tag resolved during ingestion")
}

#[cfg(test)]
mod tests;
