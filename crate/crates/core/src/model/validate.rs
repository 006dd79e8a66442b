use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::ids::{HolonId, PartId};

use super::{FlowMembers, HolonKind, Model, ResourceKind, RESERVED_PROPERTY_PREFIX};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// Named structural rules. Model rules come first, document-level rules last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    /// Elementary holons carry exactly one physical part; composites carry none.
    ElementaryPartCardinality,
    /// Composite holons are the output of at least one process.
    CompositeHasProcess,
    /// Only composite holons are produced by processes.
    OutputKind,
    /// Process instance inputs are all elementary or all composite states.
    MixedInputKinds,
    ProcessInstanceArity,
    DanglingRef,
    GenealogyCycle,
    /// Lifecycle and physical track timestamps strictly increase.
    StateOrder,
    StateKind,
    StateOwnership,
    TimeOrder,
    /// Personnel entries reference human resources.
    ResourceKind,
    FlowMemberKind,
    EmptyFlow,
    DuplicatePart,
    EmptyField,
    ReservedName,
    XmlSyntax,
    UnknownNamespace,
    SchemaViolation,
    DuplicateId,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::ElementaryPartCardinality => "ElementaryPartCardinality",
            Rule::CompositeHasProcess => "CompositeHasProcess",
            Rule::OutputKind => "OutputKind",
            Rule::MixedInputKinds => "MixedInputKinds",
            Rule::ProcessInstanceArity => "ProcessInstanceArity",
            Rule::DanglingRef => "DanglingRef",
            Rule::GenealogyCycle => "GenealogyCycle",
            Rule::StateOrder => "StateOrder",
            Rule::StateKind => "StateKind",
            Rule::StateOwnership => "StateOwnership",
            Rule::TimeOrder => "TimeOrder",
            Rule::ResourceKind => "ResourceKind",
            Rule::FlowMemberKind => "FlowMemberKind",
            Rule::EmptyFlow => "EmptyFlow",
            Rule::DuplicatePart => "DuplicatePart",
            Rule::EmptyField => "EmptyField",
            Rule::ReservedName => "ReservedName",
            Rule::XmlSyntax => "XmlSyntax",
            Rule::UnknownNamespace => "UnknownNamespace",
            Rule::SchemaViolation => "SchemaViolation",
            Rule::DuplicateId => "DuplicateId",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            Rule::EmptyFlow => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub severity: Severity,
    pub rule: Rule,
    pub entity: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}] {}: {}", self.severity, self.rule, self.entity, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub entries: Vec<Violation>,
}

impl ValidationReport {
    pub fn push(&mut self, rule: Rule, entity: impl Into<String>, message: impl Into<String>) {
        self.entries.push(Violation { severity: rule.severity(), rule, entity: entity.into(), message: message.into() });
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn error_count(&self) -> usize {
        self.entries.iter().filter(|v| v.severity == Severity::Error).count()
    }

    pub fn warning_count(&self) -> usize {
        self.entries.iter().filter(|v| v.severity == Severity::Warning).count()
    }

    pub fn has_errors(&self) -> bool {
        self.error_count() > 0
    }

    pub fn has_rule(&self, rule: Rule) -> bool {
        self.entries.iter().any(|v| v.rule == rule)
    }

    pub fn with_rule(&self, rule: Rule) -> impl Iterator<Item = &Violation> {
        self.entries.iter().filter(move |v| v.rule == rule)
    }

    fn sort(&mut self) {
        self.entries.sort_by(|a, b| (a.rule, &a.entity, &a.message).cmp(&(b.rule, &b.entity, &b.message)));
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.entries {
            writeln!(f, "{v}")?;
        }
        write!(f, "{} errors, {} warnings", self.error_count(), self.warning_count())
    }
}

pub(super) fn validate(model: &Model) -> ValidationReport {
    let mut report = ValidationReport::default();
    check_holons(model, &mut report);
    check_states(model, &mut report);
    check_process_instances(model, &mut report);
    check_flows(model, &mut report);
    check_cycles(model, &mut report);
    for p in model.processes.values() {
        if p.name.is_empty() {
            report.push(Rule::EmptyField, p.id.as_str(), "process name is empty");
        }
    }
    report.sort();
    report
}

fn check_holons(model: &Model, report: &mut ValidationReport) {
    let produced: BTreeSet<&HolonId> = model.process_instances.values().flat_map(|pi| &pi.output_holons).collect();
    let mut part_owner: BTreeMap<&PartId, &HolonId> = BTreeMap::new();
    let mut tag_owner: BTreeMap<&str, &HolonId> = BTreeMap::new();

    for h in model.holons.values() {
        let id = h.id.as_str();
        match (h.kind, &h.physical_part) {
            (HolonKind::Elementary, None) => {
                report.push(Rule::ElementaryPartCardinality, id, "elementary holon has no physical part")
            }
            (HolonKind::Composite, Some(_)) => {
                report.push(Rule::ElementaryPartCardinality, id, "composite holon stores a physical part")
            }
            _ => {}
        }
        let derived = produced.contains(&h.id) || !h.assembled_from.is_empty();
        match h.kind {
            HolonKind::Composite if !derived => {
                report.push(Rule::CompositeHasProcess, id, "composite holon is not the output of any process instance")
            }
            HolonKind::Elementary if derived => {
                report.push(Rule::OutputKind, id, "elementary holon is produced by a process or assembled from other holons")
            }
            _ => {}
        }
        for parent in &h.assembled_from {
            if !model.holons.contains_key(parent) {
                report.push(Rule::DanglingRef, id, format!("assembled from unknown holon {parent}"));
            }
        }

        let parts = std::iter::once(&h.informational_part.id).chain(h.physical_part.as_ref().map(|p| &p.id));
        for part in parts {
            if let Some(other) = part_owner.insert(part, &h.id) {
                report.push(Rule::DuplicatePart, id, format!("part id {part} is also used by holon {other}"));
            }
        }
        if let Some(pp) = &h.physical_part {
            if pp.tag.is_empty() {
                report.push(Rule::EmptyField, id, "physical tag is empty");
            } else if let Some(other) = tag_owner.insert(&pp.tag, &h.id) {
                report.push(Rule::DuplicatePart, id, format!("physical tag {:?} is also used by holon {other}", pp.tag));
            }
            for w in pp.track.windows(2) {
                if w[1].timestamp <= w[0].timestamp {
                    report.push(Rule::StateOrder, id, format!("observation {} is not after {}", w[1].id, w[0].id));
                }
            }
        }
        for name in h.properties.keys() {
            if name.starts_with(RESERVED_PROPERTY_PREFIX) {
                report.push(Rule::ReservedName, id, format!("property {name:?} uses the reserved prefix {RESERVED_PROPERTY_PREFIX:?}"));
            }
        }

        let mut last = None;
        for sid in &h.state_history {
            match model.states.get(sid) {
                None => report.push(Rule::DanglingRef, id, format!("state history references unknown state {sid}")),
                Some(s) => {
                    if s.holon != h.id {
                        report.push(Rule::StateOwnership, id, format!("state {sid} belongs to holon {}", s.holon));
                    }
                    if let Some(prev) = last {
                        if s.timestamp <= prev {
                            report.push(Rule::StateOrder, id, format!("state {sid} at {} is not after its predecessor", s.timestamp));
                        }
                    }
                    last = Some(s.timestamp);
                }
            }
        }
    }
}

fn check_states(model: &Model, report: &mut ValidationReport) {
    for s in model.states.values() {
        match model.holons.get(&s.holon) {
            None => report.push(Rule::DanglingRef, s.id.as_str(), format!("state refers to unknown holon {}", s.holon)),
            Some(h) => {
                if s.kind != h.kind {
                    report.push(Rule::StateKind, s.id.as_str(), format!("{} state of {} holon {}", s.kind, h.kind, h.id));
                }
                if !h.state_history.contains(&s.id) {
                    report.push(Rule::StateOwnership, s.id.as_str(), format!("state is missing from the history of {}", h.id));
                }
            }
        }
    }
}

fn check_process_instances(model: &Model, report: &mut ValidationReport) {
    for pi in model.process_instances.values() {
        let id = pi.id.as_str();
        if !model.processes.contains_key(&pi.process) {
            report.push(Rule::DanglingRef, id, format!("unknown process {}", pi.process));
        }
        if pi.input_states.is_empty() {
            report.push(Rule::ProcessInstanceArity, id, "no input states");
        }
        if pi.output_holons.is_empty() {
            report.push(Rule::ProcessInstanceArity, id, "no output holons");
        }
        if pi.start > pi.end {
            report.push(Rule::TimeOrder, id, format!("start {} is after end {}", pi.start, pi.end));
        }
        let mut kinds = BTreeSet::new();
        for s in &pi.input_states {
            match model.states.get(s) {
                Some(state) => {
                    kinds.insert(state.kind);
                }
                None => report.push(Rule::DanglingRef, id, format!("unknown input state {s}")),
            }
        }
        if kinds.len() > 1 {
            report.push(Rule::MixedInputKinds, id, "input states mix elementary and composite kinds");
        }
        for h in &pi.output_holons {
            match model.holons.get(h) {
                None => report.push(Rule::DanglingRef, id, format!("unknown output holon {h}")),
                Some(holon) if holon.kind != HolonKind::Composite => {
                    report.push(Rule::OutputKind, id, format!("output holon {h} is elementary"))
                }
                Some(_) => {}
            }
        }
        for r in &pi.resources {
            if !model.resources.contains_key(r) {
                report.push(Rule::DanglingRef, id, format!("unknown resource {r}"));
            }
        }
        for r in &pi.personnel {
            match model.resources.get(r) {
                None => report.push(Rule::DanglingRef, id, format!("unknown personnel resource {r}")),
                Some(res) if res.kind != ResourceKind::Human => {
                    report.push(Rule::ResourceKind, id, format!("personnel entry {r} is a {} resource", res.kind.as_str()))
                }
                Some(_) => {}
            }
        }
    }
}

fn check_flows(model: &Model, report: &mut ValidationReport) {
    let info: BTreeSet<&str> = model.holons.values().map(|h| h.informational_part.id.as_str()).collect();
    let phys: BTreeSet<&str> =
        model.holons.values().filter_map(|h| h.physical_part.as_ref()).map(|p| p.id.as_str()).collect();
    let holons: BTreeSet<&str> = model.holons.keys().map(|h| h.as_str()).collect();

    for f in model.flows.values() {
        let id = f.id.as_str();
        if f.members.is_empty() {
            report.push(Rule::EmptyFlow, id, "flow has no members");
        }
        let (expected, label) = match &f.members {
            FlowMembers::Holons(_) => (&holons, "holon"),
            FlowMembers::InformationalParts(_) => (&info, "informational part"),
            FlowMembers::PhysicalParts(_) => (&phys, "physical part"),
        };
        for m in f.members.ids() {
            if expected.contains(m) {
                continue;
            }
            if holons.contains(m) || info.contains(m) || phys.contains(m) {
                report.push(Rule::FlowMemberKind, id, format!("member {m} is not a {label} as the {} kind requires", f.kind().as_str()));
            } else {
                report.push(Rule::DanglingRef, id, format!("unknown {label} {m}"));
            }
        }
    }
}

fn check_cycles(model: &Model, report: &mut ValidationReport) {
    let mut children: BTreeMap<&HolonId, BTreeSet<&HolonId>> = BTreeMap::new();
    let edges = model.genealogy_edges();
    for e in &edges {
        if model.holons.contains_key(&e.parent) && model.holons.contains_key(&e.child) {
            children.entry(&e.parent).or_default().insert(&e.child);
        }
    }
    // Peel off nodes with no incoming edge; whatever remains lies on or below a cycle.
    let mut indegree: BTreeMap<&HolonId, usize> = model.holons.keys().map(|h| (h, 0)).collect();
    for cs in children.values() {
        for c in cs {
            *indegree.get_mut(c).expect("filtered above") += 1;
        }
    }
    let mut queue: VecDeque<&HolonId> = indegree.iter().filter(|(_, d)| **d == 0).map(|(h, _)| *h).collect();
    while let Some(h) = queue.pop_front() {
        for c in children.get(h).into_iter().flatten() {
            let d = indegree.get_mut(c).expect("known node");
            *d -= 1;
            if *d == 0 {
                queue.push_back(c);
            }
        }
    }
    let remaining: Vec<&HolonId> = indegree.iter().filter(|(_, d)| **d > 0).map(|(h, _)| *h).collect();
    if remaining.is_empty() {
        return;
    }
    let reach = |from: &HolonId| -> BTreeSet<&HolonId> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<&HolonId> = children.get(from).into_iter().flatten().copied().collect();
        while let Some(n) = stack.pop() {
            if seen.insert(n) {
                stack.extend(children.get(n).into_iter().flatten().copied());
            }
        }
        seen
    };
    let reachable: BTreeMap<&HolonId, BTreeSet<&HolonId>> = remaining.iter().map(|h| (*h, reach(h))).collect();
    let mut reported: BTreeSet<&HolonId> = BTreeSet::new();
    for h in &remaining {
        if reported.contains(h) || !reachable[h].contains(h) {
            continue;
        }
        let component: BTreeSet<&HolonId> =
            remaining.iter().copied().filter(|o| reachable[h].contains(o) && reachable[o].contains(h)).collect();
        let members: Vec<&str> = component.iter().map(|c| c.as_str()).collect();
        report.push(Rule::GenealogyCycle, h.as_str(), format!("genealogy cycle through {}", members.join(", ")));
        reported.extend(component);
    }
}
