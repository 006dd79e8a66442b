//! Typed in-memory store for holonic product models.
//!
//! A [`Model`] holds holons, their state histories, processes, process
//! instances, resources and flows, all indexed by id. The mutating operations
//! on `Model` keep every structural rule checked by [`Model::validate`], so a
//! model built only through them always validates clean. The collections are
//! public so that documents describing inconsistent models can still be
//! loaded and reported on.

mod genealogy;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::ids::{HolonId, ObservationId, PartId, ProcessId, ProcessInstanceId, ResourceId, StateId, FlowId};
use crate::value::{check_attribute, StateAttributes, Timestamp, TypedValue};

pub use genealogy::{GenealogyEdge, GenealogyGraph};
pub use validate::{Rule, Severity, ValidationReport, Violation};

/// Property names starting with this prefix are reserved for exported state attributes.
pub const RESERVED_PROPERTY_PREFIX: &str = "state.";

/// Time attribute written on a holon's post-processing state, naming the consuming instance.
pub const CONSUMED_MARKER: &str = "consumed_by";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HolonKind {
    Elementary,
    Composite,
}

impl HolonKind {
    pub fn as_str(self) -> &'static str {
        match self {
            HolonKind::Elementary => "Elementary",
            HolonKind::Composite => "Composite",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "Elementary" => Some(HolonKind::Elementary),
            "Composite" => Some(HolonKind::Composite),
            _ => None,
        }
    }
}

impl fmt::Display for HolonKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InformationalPart {
    pub id: PartId,
    pub description: String,
    pub attributes: BTreeMap<String, String>,
}

impl InformationalPart {
    pub fn new(id: PartId, description: impl Into<String>) -> Self {
        Self { id, description: description.into(), attributes: BTreeMap::new() }
    }
}

/// An observation of a physical part, kept on the part's physical track.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub id: ObservationId,
    pub timestamp: Timestamp,
    pub observed: StateAttributes,
    /// Set when reconciliation decided the informational view prevails over this reading.
    pub overridden: bool,
}

/// Reference to the physical part encapsulated in an elementary holon.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalPartRef {
    pub id: PartId,
    /// Serial number, RFID or similar physical identifier.
    pub tag: String,
    pub track: Vec<Observation>,
}

impl PhysicalPartRef {
    pub fn new(id: PartId, tag: impl Into<String>) -> Self {
        Self { id, tag: tag.into(), track: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Holon {
    pub id: HolonId,
    pub kind: HolonKind,
    pub informational_part: InformationalPart,
    pub physical_part: Option<PhysicalPartRef>,
    pub properties: BTreeMap<String, TypedValue>,
    /// Genealogy links whose producing process is unknown (recovered from imported documents).
    pub assembled_from: BTreeSet<HolonId>,
    pub state_history: Vec<StateId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub id: StateId,
    pub holon: HolonId,
    pub kind: HolonKind,
    pub timestamp: Timestamp,
    pub attributes: StateAttributes,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Process {
    pub id: ProcessId,
    pub name: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessInstance {
    pub id: ProcessInstanceId,
    pub process: ProcessId,
    pub input_states: Vec<StateId>,
    pub output_holons: Vec<HolonId>,
    pub start: Timestamp,
    pub end: Timestamp,
    pub resources: Vec<ResourceId>,
    pub equipment: Vec<String>,
    /// Human resources involved in the execution.
    pub personnel: Vec<ResourceId>,
}

impl ProcessInstance {
    pub fn duration_millis(&self) -> i64 {
        self.end.millis() - self.start.millis()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ResourceKind {
    Material,
    Human,
}

impl ResourceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ResourceKind::Material => "Material",
            ResourceKind::Human => "Human",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "Material" => Some(ResourceKind::Material),
            "Human" => Some(ResourceKind::Human),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resource {
    pub id: ResourceId,
    pub kind: ResourceKind,
    pub name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FlowKind {
    HolonFlow,
    InformationalFlow,
    PhysicalFlow,
}

impl FlowKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FlowKind::HolonFlow => "HolonFlow",
            FlowKind::InformationalFlow => "InformationalFlow",
            FlowKind::PhysicalFlow => "PhysicalFlow",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "HolonFlow" => Some(FlowKind::HolonFlow),
            "InformationalFlow" => Some(FlowKind::InformationalFlow),
            "PhysicalFlow" => Some(FlowKind::PhysicalFlow),
            _ => None,
        }
    }
}

/// Flow contents; the variant fixes the flow kind.
#[derive(Debug, Clone, PartialEq)]
pub enum FlowMembers {
    Holons(BTreeSet<HolonId>),
    InformationalParts(BTreeSet<PartId>),
    PhysicalParts(BTreeSet<PartId>),
}

impl FlowMembers {
    pub fn empty(kind: FlowKind) -> Self {
        match kind {
            FlowKind::HolonFlow => FlowMembers::Holons(BTreeSet::new()),
            FlowKind::InformationalFlow => FlowMembers::InformationalParts(BTreeSet::new()),
            FlowKind::PhysicalFlow => FlowMembers::PhysicalParts(BTreeSet::new()),
        }
    }

    pub fn kind(&self) -> FlowKind {
        match self {
            FlowMembers::Holons(_) => FlowKind::HolonFlow,
            FlowMembers::InformationalParts(_) => FlowKind::InformationalFlow,
            FlowMembers::PhysicalParts(_) => FlowKind::PhysicalFlow,
        }
    }

    /// Member ids as strings, in sorted order.
    pub fn ids(&self) -> Vec<&str> {
        match self {
            FlowMembers::Holons(s) => s.iter().map(|i| i.as_str()).collect(),
            FlowMembers::InformationalParts(s) | FlowMembers::PhysicalParts(s) => s.iter().map(|i| i.as_str()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            FlowMembers::Holons(s) => s.len(),
            FlowMembers::InformationalParts(s) | FlowMembers::PhysicalParts(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Flow {
    pub id: FlowId,
    pub members: FlowMembers,
}

impl Flow {
    pub fn kind(&self) -> FlowKind {
        self.members.kind()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ModelOptions {
    /// Reject numeric attributes and properties without a unit.
    pub require_units: bool,
}

/// One holonic model: every entity category indexed by id.
#[derive(Debug, Clone, Default)]
pub struct Model {
    pub options: ModelOptions,
    pub holons: BTreeMap<HolonId, Holon>,
    pub states: BTreeMap<StateId, State>,
    pub processes: BTreeMap<ProcessId, Process>,
    pub process_instances: BTreeMap<ProcessInstanceId, ProcessInstance>,
    pub resources: BTreeMap<ResourceId, Resource>,
    pub flows: BTreeMap<FlowId, Flow>,
}

/// Equality over entity content; construction options are not compared.
impl PartialEq for Model {
    fn eq(&self, other: &Self) -> bool {
        self.holons == other.holons
            && self.states == other.states
            && self.processes == other.processes
            && self.process_instances == other.process_instances
            && self.resources == other.resources
            && self.flows == other.flows
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("duplicate {category} id {id:?}")]
    DuplicateId { category: &'static str, id: String },
    #[error("malformed attribute: {0}")]
    MalformedAttribute(String),
    #[error("process instance {0} mixes elementary and composite input states")]
    MixedInputKinds(ProcessInstanceId),
    #[error("unknown state {0}")]
    UnknownStateId(StateId),
    #[error("unknown holon {0}")]
    UnknownHolon(HolonId),
    #[error("unknown process {0}")]
    UnknownProcess(ProcessId),
    #[error("unknown resource {0}")]
    UnknownResource(ResourceId),
    #[error("personnel entry {0} is not a human resource")]
    PersonnelNotHuman(ResourceId),
    #[error("time order violation: {0}")]
    TimeOrderViolation(String),
    #[error("timestamp {given} is not after the last recorded state of {holon} at {last}")]
    NonMonotonicTimestamp { holon: HolonId, last: Timestamp, given: Timestamp },
    #[error("{0} must not be empty")]
    EmptyField(&'static str),
}

/// One output holon to be produced by a process instance.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub id: HolonId,
    pub informational_part: InformationalPart,
    pub properties: BTreeMap<String, TypedValue>,
    pub attributes: StateAttributes,
}

impl OutputSpec {
    pub fn new(id: HolonId, informational_part: InformationalPart) -> Self {
        Self { id, informational_part, properties: BTreeMap::new(), attributes: StateAttributes::default() }
    }
}

/// Everything needed to record one execution of a process.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessRun {
    pub id: ProcessInstanceId,
    pub process: ProcessId,
    pub inputs: Vec<StateId>,
    pub outputs: Vec<OutputSpec>,
    pub start: Timestamp,
    pub end: Timestamp,
    pub resources: Vec<ResourceId>,
    pub equipment: Vec<String>,
    pub personnel: Vec<ResourceId>,
}

impl ProcessRun {
    pub fn new(id: ProcessInstanceId, process: ProcessId, start: Timestamp, end: Timestamp) -> Self {
        Self {
            id,
            process,
            inputs: Vec::new(),
            outputs: Vec::new(),
            start,
            end,
            resources: Vec::new(),
            equipment: Vec::new(),
            personnel: Vec::new(),
        }
    }
}

fn check_property(name: &str, value: &TypedValue, require_units: bool) -> Result<(), ModelError> {
    check_attribute(name, value, require_units).map_err(ModelError::MalformedAttribute)?;
    if name.starts_with(RESERVED_PROPERTY_PREFIX) {
        return Err(ModelError::MalformedAttribute(format!(
            "{name}: property names starting with {RESERVED_PROPERTY_PREFIX:?} are reserved"
        )));
    }
    Ok(())
}

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_options(options: ModelOptions) -> Self {
        Self { options, ..Self::default() }
    }

    pub fn is_empty(&self) -> bool {
        self.holons.is_empty()
            && self.states.is_empty()
            && self.processes.is_empty()
            && self.process_instances.is_empty()
            && self.resources.is_empty()
            && self.flows.is_empty()
    }

    pub fn holon(&self, id: &str) -> Option<&Holon> {
        self.holons.get(id)
    }

    pub fn state(&self, id: &str) -> Option<&State> {
        self.states.get(id)
    }

    pub fn latest_state(&self, holon: &str) -> Option<&State> {
        self.holons.get(holon)?.state_history.last().and_then(|s| self.states.get(s))
    }

    pub fn add_process(&mut self, process: Process) -> Result<(), ModelError> {
        if process.name.is_empty() {
            return Err(ModelError::EmptyField("process name"));
        }
        if self.processes.contains_key(&process.id) {
            return Err(ModelError::DuplicateId { category: "process", id: process.id.to_string() });
        }
        self.processes.insert(process.id.clone(), process);
        Ok(())
    }

    pub fn add_resource(&mut self, resource: Resource) -> Result<(), ModelError> {
        if self.resources.contains_key(&resource.id) {
            return Err(ModelError::DuplicateId { category: "resource", id: resource.id.to_string() });
        }
        self.resources.insert(resource.id.clone(), resource);
        Ok(())
    }

    /// Adds a flow; members must exist with the category the flow kind requires.
    pub fn add_flow(&mut self, flow: Flow) -> Result<(), ModelError> {
        if self.flows.contains_key(&flow.id) {
            return Err(ModelError::DuplicateId { category: "flow", id: flow.id.to_string() });
        }
        if flow.members.is_empty() {
            return Err(ModelError::EmptyField("flow members"));
        }
        match &flow.members {
            FlowMembers::Holons(ids) => {
                if let Some(missing) = ids.iter().find(|h| !self.holons.contains_key(*h)) {
                    return Err(ModelError::UnknownHolon(missing.clone()));
                }
            }
            FlowMembers::InformationalParts(ids) => {
                let known: BTreeSet<&PartId> = self.holons.values().map(|h| &h.informational_part.id).collect();
                if let Some(missing) = ids.iter().find(|p| !known.contains(p)) {
                    return Err(ModelError::MalformedAttribute(format!("flow {}: unknown informational part {missing}", flow.id)));
                }
            }
            FlowMembers::PhysicalParts(ids) => {
                let known: BTreeSet<&PartId> =
                    self.holons.values().filter_map(|h| h.physical_part.as_ref()).map(|p| &p.id).collect();
                if let Some(missing) = ids.iter().find(|p| !known.contains(p)) {
                    return Err(ModelError::MalformedAttribute(format!("flow {}: unknown physical part {missing}", flow.id)));
                }
            }
        }
        self.flows.insert(flow.id.clone(), flow);
        Ok(())
    }

    fn part_ids(&self) -> BTreeSet<&PartId> {
        self.holons
            .values()
            .flat_map(|h| std::iter::once(&h.informational_part.id).chain(h.physical_part.as_ref().map(|p| &p.id)))
            .collect()
    }

    fn fresh_state_id(&self, holon: &HolonId, taken: &BTreeSet<StateId>) -> StateId {
        let mut n = self.holons.get(holon).map_or(0, |h| h.state_history.len()) + 1;
        loop {
            let candidate = StateId::new(format!("{holon}-s{n}")).expect("holon id prefix keeps NCName");
            if !self.states.contains_key(&candidate) && !taken.contains(&candidate) {
                return candidate;
            }
            n += 1;
        }
    }

    /// Creates an elementary holon with one initial state at `t0`.
    pub fn new_elementary_holon(
        &mut self,
        id: HolonId,
        informational_part: InformationalPart,
        physical_part: PhysicalPartRef,
        initial: StateAttributes,
        t0: Timestamp,
    ) -> Result<StateId, ModelError> {
        if self.holons.contains_key(&id) {
            return Err(ModelError::DuplicateId { category: "holon", id: id.to_string() });
        }
        if physical_part.tag.is_empty() {
            return Err(ModelError::EmptyField("physical tag"));
        }
        let parts = self.part_ids();
        for part in [&informational_part.id, &physical_part.id] {
            if parts.contains(part) {
                return Err(ModelError::DuplicateId { category: "part", id: part.to_string() });
            }
        }
        if informational_part.id == physical_part.id {
            return Err(ModelError::DuplicateId { category: "part", id: physical_part.id.to_string() });
        }
        if self
            .holons
            .values()
            .filter_map(|h| h.physical_part.as_ref())
            .any(|p| p.tag == physical_part.tag)
        {
            return Err(ModelError::DuplicateId { category: "physical tag", id: physical_part.tag.clone() });
        }
        initial.check(self.options.require_units).map_err(ModelError::MalformedAttribute)?;

        let state_id = self.fresh_state_id(&id, &BTreeSet::new());
        let state = State {
            id: state_id.clone(),
            holon: id.clone(),
            kind: HolonKind::Elementary,
            timestamp: t0,
            attributes: initial,
        };
        let physical_part = PhysicalPartRef { track: Vec::new(), ..physical_part };
        self.holons.insert(
            id.clone(),
            Holon {
                id,
                kind: HolonKind::Elementary,
                informational_part,
                physical_part: Some(physical_part),
                properties: BTreeMap::new(),
                assembled_from: BTreeSet::new(),
                state_history: vec![state_id.clone()],
            },
        );
        self.states.insert(state_id.clone(), state);
        Ok(state_id)
    }

    pub fn set_property(&mut self, holon: &HolonId, name: impl Into<String>, value: TypedValue) -> Result<(), ModelError> {
        let name = name.into();
        check_property(&name, &value, self.options.require_units)?;
        let h = self.holons.get_mut(holon).ok_or_else(|| ModelError::UnknownHolon(holon.clone()))?;
        h.properties.insert(name, value);
        Ok(())
    }

    /// Appends a new state to a holon's lifecycle.
    pub fn record_state(&mut self, holon: &HolonId, attributes: StateAttributes, timestamp: Timestamp) -> Result<StateId, ModelError> {
        let h = self.holons.get(holon).ok_or_else(|| ModelError::UnknownHolon(holon.clone()))?;
        if let Some(last) = self.latest_state(holon.as_str()) {
            if timestamp <= last.timestamp {
                return Err(ModelError::NonMonotonicTimestamp { holon: holon.clone(), last: last.timestamp, given: timestamp });
            }
        }
        attributes.check(self.options.require_units).map_err(ModelError::MalformedAttribute)?;
        let kind = h.kind;
        let id = self.fresh_state_id(holon, &BTreeSet::new());
        self.states.insert(id.clone(), State { id: id.clone(), holon: holon.clone(), kind, timestamp, attributes });
        self.holons.get_mut(holon).expect("checked above").state_history.push(id.clone());
        Ok(id)
    }

    /// Records one execution of a process.
    ///
    /// Creates a composite holon per output spec (initial state at `end`), a
    /// process instance linking inputs to outputs, and appends a
    /// post-processing state at `end` to every distinct input holon. The
    /// post-processing state copies the holon's latest attributes and adds a
    /// `consumed_by` time attribute naming the instance. Nothing is modified
    /// when an error is returned.
    pub fn apply_process_instance(&mut self, run: ProcessRun) -> Result<Vec<HolonId>, ModelError> {
        if self.process_instances.contains_key(&run.id) {
            return Err(ModelError::DuplicateId { category: "process instance", id: run.id.to_string() });
        }
        if !self.processes.contains_key(&run.process) {
            return Err(ModelError::UnknownProcess(run.process.clone()));
        }
        if run.inputs.is_empty() {
            return Err(ModelError::EmptyField("process instance inputs"));
        }
        if run.outputs.is_empty() {
            return Err(ModelError::EmptyField("process instance outputs"));
        }
        if run.start > run.end {
            return Err(ModelError::TimeOrderViolation(format!("start {} is after end {}", run.start, run.end)));
        }
        for r in run.resources.iter().chain(&run.personnel) {
            if !self.resources.contains_key(r) {
                return Err(ModelError::UnknownResource(r.clone()));
            }
        }
        if let Some(p) = run.personnel.iter().find(|p| self.resources[*p].kind != ResourceKind::Human) {
            return Err(ModelError::PersonnelNotHuman(p.clone()));
        }

        let mut input_kind = None;
        let mut input_holons: Vec<HolonId> = Vec::new();
        for sid in &run.inputs {
            let state = self.states.get(sid).ok_or_else(|| ModelError::UnknownStateId(sid.clone()))?;
            if !self.holons.contains_key(&state.holon) {
                return Err(ModelError::UnknownHolon(state.holon.clone()));
            }
            match input_kind {
                None => input_kind = Some(state.kind),
                Some(k) if k != state.kind => return Err(ModelError::MixedInputKinds(run.id.clone())),
                Some(_) => {}
            }
            if state.timestamp > run.start {
                return Err(ModelError::TimeOrderViolation(format!(
                    "input state {sid} at {} is after the instance start {}",
                    state.timestamp, run.start
                )));
            }
            if !input_holons.contains(&state.holon) {
                input_holons.push(state.holon.clone());
            }
        }
        for h in &input_holons {
            if let Some(last) = self.latest_state(h.as_str()) {
                if run.end <= last.timestamp {
                    return Err(ModelError::TimeOrderViolation(format!(
                        "instance end {} is not after the last state of input holon {h} at {}",
                        run.end, last.timestamp
                    )));
                }
            }
        }

        let mut parts = self.part_ids().into_iter().cloned().collect::<BTreeSet<_>>();
        let mut new_ids = BTreeSet::new();
        for out in &run.outputs {
            if self.holons.contains_key(&out.id) || !new_ids.insert(out.id.clone()) {
                return Err(ModelError::DuplicateId { category: "holon", id: out.id.to_string() });
            }
            if !parts.insert(out.informational_part.id.clone()) {
                return Err(ModelError::DuplicateId { category: "part", id: out.informational_part.id.to_string() });
            }
            for (name, value) in &out.properties {
                check_property(name, value, self.options.require_units)?;
            }
            out.attributes.check(self.options.require_units).map_err(ModelError::MalformedAttribute)?;
        }

        // All checks passed; mutate.
        let mut taken = BTreeSet::new();
        let mut created = Vec::with_capacity(run.outputs.len());
        for out in run.outputs {
            let state_id = self.fresh_state_id(&out.id, &taken);
            taken.insert(state_id.clone());
            self.states.insert(
                state_id.clone(),
                State {
                    id: state_id.clone(),
                    holon: out.id.clone(),
                    kind: HolonKind::Composite,
                    timestamp: run.end,
                    attributes: out.attributes,
                },
            );
            self.holons.insert(
                out.id.clone(),
                Holon {
                    id: out.id.clone(),
                    kind: HolonKind::Composite,
                    informational_part: out.informational_part,
                    physical_part: None,
                    properties: out.properties,
                    assembled_from: BTreeSet::new(),
                    state_history: vec![state_id],
                },
            );
            created.push(out.id);
        }
        for h in &input_holons {
            let mut attributes = self.latest_state(h.as_str()).map(|s| s.attributes.clone()).unwrap_or_default();
            attributes.time.insert(CONSUMED_MARKER, TypedValue::Text(run.id.to_string()));
            let kind = self.holons[h].kind;
            let state_id = self.fresh_state_id(h, &taken);
            taken.insert(state_id.clone());
            self.states.insert(
                state_id.clone(),
                State { id: state_id.clone(), holon: h.clone(), kind, timestamp: run.end, attributes },
            );
            self.holons.get_mut(h).expect("input holon exists").state_history.push(state_id);
        }
        self.process_instances.insert(
            run.id.clone(),
            ProcessInstance {
                id: run.id,
                process: run.process,
                input_states: run.inputs,
                output_holons: created.clone(),
                start: run.start,
                end: run.end,
                resources: run.resources,
                equipment: run.equipment,
                personnel: run.personnel,
            },
        );
        Ok(created)
    }

    /// The holon's states in recorded order.
    pub fn lifecycle(&self, holon: &str) -> Result<Vec<&State>, ModelError> {
        let h = self.holons.get(holon).ok_or_else(|| ModelError::UnknownHolon(unknown_holon(holon)))?;
        Ok(h.state_history.iter().filter_map(|s| self.states.get(s)).collect())
    }

    /// The ancestor sub-graph of `holon`.
    pub fn genealogy(&self, holon: &str) -> Result<GenealogyGraph, ModelError> {
        if !self.holons.contains_key(holon) {
            return Err(ModelError::UnknownHolon(unknown_holon(holon)));
        }
        Ok(genealogy::ancestors(self, holon))
    }

    /// All genealogy edges of the model.
    pub fn genealogy_edges(&self) -> BTreeSet<GenealogyEdge> {
        genealogy::all_edges(self)
    }

    pub fn validate(&self) -> ValidationReport {
        validate::validate(self)
    }

    /// Distinct holons owning the instance's input states, in input order.
    pub fn input_holons(&self, instance: &ProcessInstance) -> Vec<HolonId> {
        let mut out: Vec<HolonId> = Vec::new();
        for s in &instance.input_states {
            if let Some(state) = self.states.get(s) {
                if !out.contains(&state.holon) {
                    out.push(state.holon.clone());
                }
            }
        }
        out
    }
}

// Error values carry a typed id; fall back to a placeholder for non-NCName input.
pub(crate) fn unknown_holon(s: &str) -> HolonId {
    HolonId::new(s).unwrap_or_else(|_| HolonId::new("_invalid").expect("static id"))
}

pub fn genealogy(model: &Model, holon: &str) -> Result<GenealogyGraph, ModelError> {
    model.genealogy(holon)
}

pub fn lifecycle<'m>(model: &'m Model, holon: &str) -> Result<Vec<&'m State>, ModelError> {
    model.lifecycle(holon)
}

pub fn validate_model(model: &Model) -> ValidationReport {
    model.validate()
}

#[cfg(test)]
mod tests;
