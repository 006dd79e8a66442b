//! HPM-XML, the canonical on-disk format for a [`Model`].
//!
//! The grammar lives in `schemas/hpm-xml.grammar`. Emission is canonical:
//! entity sections sorted by id, attributes in alphabetical order, two-space
//! indentation, so equal models always produce identical bytes.

use std::collections::{BTreeMap, BTreeSet};

use crate::grammar::{self, SchemaError, SchemaErrorKind};
use crate::ids::{FlowId, HolonId, InvalidId, ObservationId, PartId, ResourceId, StateId};
use crate::model::{
    Flow, FlowKind, FlowMembers, Holon, HolonKind, InformationalPart, Model, Observation, PhysicalPartRef, Process,
    ProcessInstance, Resource, ResourceKind, Rule, State, ValidationReport,
};
use crate::value::{AttributeGroup, StateAttributes, Timestamp, TypedValue};
use crate::xml::{element, elements, text_of, Element};

pub const NAMESPACE: &str = "urn:hpm:model:1";
pub const FILE_EXTENSION: &str = ".hpm.xml";
const P: &str = "hpm:";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HpmError {
    #[error("XML syntax error: {0}")]
    XmlSyntax(String),
    #[error("unknown namespace: {0}")]
    UnknownNamespace(String),
    #[error("schema violation: {}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    SchemaViolation(Vec<SchemaError>),
    #[error("dangling reference to {id} from {referrer}")]
    DanglingRef { id: String, referrer: String },
    #[error("duplicate {category} id {id}")]
    DuplicateId { category: &'static str, id: String },
    #[error("{rule} violation at {entity}: {message}")]
    InvalidValue { rule: Rule, entity: String, message: String },
    #[error("model is invalid:\n{0}")]
    InvalidModel(ValidationReport),
}

impl HpmError {
    /// Report entries describing this error.
    pub fn to_report(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        match self {
            HpmError::XmlSyntax(m) => report.push(Rule::XmlSyntax, "document", m.clone()),
            HpmError::UnknownNamespace(m) => report.push(Rule::UnknownNamespace, "document", m.clone()),
            HpmError::SchemaViolation(errs) => {
                for e in errs {
                    let rule = match e.kind {
                        SchemaErrorKind::UnknownNamespace => Rule::UnknownNamespace,
                        SchemaErrorKind::Violation => Rule::SchemaViolation,
                    };
                    report.push(rule, e.path.clone(), e.message.clone());
                }
            }
            HpmError::DanglingRef { id, referrer } => report.push(Rule::DanglingRef, referrer.clone(), format!("unknown id {id}")),
            HpmError::DuplicateId { category, id } => report.push(Rule::DuplicateId, id.clone(), format!("duplicate {category} id")),
            HpmError::InvalidValue { rule, entity, message } => report.push(*rule, entity.clone(), message.clone()),
            HpmError::InvalidModel(r) => return r.clone(),
        }
        report
    }
}

/// Parses an HPM-XML document into a model with referential integrity.
///
/// Other structural problems (mixed input kinds, missing physical parts, ...)
/// do not fail the parse; run [`Model::validate`] or [`check_document`].
pub fn parse_hpm(bytes: &[u8]) -> Result<Model, HpmError> {
    let model = build(bytes)?;
    if let Some((id, referrer)) = first_dangling(&model) {
        return Err(HpmError::DanglingRef { id, referrer });
    }
    Ok(model)
}

/// Checks a document end to end. Never fails: problems become report entries.
pub fn check_document(bytes: &[u8]) -> ValidationReport {
    match build(bytes) {
        Ok(model) => model.validate(),
        Err(e) => e.to_report(),
    }
}

/// Serializes a model. Refuses models with error-severity violations.
pub fn emit_hpm(model: &Model) -> Result<Vec<u8>, HpmError> {
    let report = model.validate();
    if report.has_errors() {
        return Err(HpmError::InvalidModel(report));
    }
    Ok(to_element(model).to_document().into_bytes())
}

fn to_element(model: &Model) -> Element {
    let holons = model.holons.values().map(holon_element);
    let states = model.states.values().map(|s| {
        groups(
            el("state")
                .attr("id", s.id.as_str())
                .attr("holon", s.holon.as_str())
                .attr("kind", s.kind.as_str())
                .attr("timestamp", s.timestamp.to_string()),
            &s.attributes,
        )
    });
    let processes = model.processes.values().map(|p| {
        el("process").attr("id", p.id.as_str()).attr("name", &p.name).child(text_el("description", &p.description))
    });
    let instances = model.process_instances.values().map(|pi| {
        el("processInstance")
            .attr("id", pi.id.as_str())
            .attr("process", pi.process.as_str())
            .attr("start", pi.start.to_string())
            .attr("end", pi.end.to_string())
            .children(pi.input_states.iter().map(|s| el("input").attr("state", s.as_str())))
            .children(pi.output_holons.iter().map(|h| el("output").attr("holon", h.as_str())))
            .children(pi.resources.iter().map(|r| el("resourceRef").attr("resource", r.as_str())))
            .children(pi.equipment.iter().map(|e| el("equipment").attr("name", e)))
            .children(pi.personnel.iter().map(|r| el("personnel").attr("resource", r.as_str())))
    });
    let resources = model.resources.values().map(|r| {
        el("resource").attr("id", r.id.as_str()).attr("kind", r.kind.as_str()).attr("name", &r.name)
    });
    let flows = model.flows.values().map(|f| {
        el("flow")
            .attr("id", f.id.as_str())
            .attr("kind", f.kind().as_str())
            .children(f.members.ids().into_iter().map(|m| el("member").attr("ref", m)))
    });
    el("model")
        .attr("version", "1")
        .attr("xmlns:hpm", NAMESPACE)
        .child(section("holons", holons))
        .child(section("states", states))
        .child(section("processes", processes))
        .child(section("processInstances", instances))
        .child(section("resources", resources))
        .child(section("flows", flows))
}

fn el(name: &str) -> Element {
    Element::new(format!("{P}{name}"))
}

fn text_el(name: &str, text: &str) -> Element {
    Element::text(format!("{P}{name}"), text)
}

fn section(name: &str, items: impl Iterator<Item = Element>) -> Element {
    el(name).children(items)
}

fn value_el(name: &str, key: &str, v: &TypedValue) -> Element {
    el(name).attr("name", key).attr("type", v.type_name()).attr("value", v.lexical()).opt_attr("unit", v.unit())
}

fn group_el(name: &str, g: &AttributeGroup) -> Element {
    el(name).children(g.iter().map(|(k, v)| value_el("attr", k, v)))
}

fn groups(e: Element, a: &StateAttributes) -> Element {
    e.child(group_el("space", &a.space)).child(group_el("shape", &a.shape)).child(group_el("time", &a.time))
}

fn holon_element(h: &Holon) -> Element {
    let ip = &h.informational_part;
    let info = el("informationalPart")
        .attr("id", ip.id.as_str())
        .child(text_el("description", &ip.description))
        .children(ip.attributes.iter().map(|(k, v)| el("entry").attr("key", k).attr("value", v)));
    let mut e = el("holon").attr("id", h.id.as_str()).attr("kind", h.kind.as_str()).child(info);
    if let Some(pp) = &h.physical_part {
        let observations = pp.track.iter().map(|o| {
            let obs = el("observation").attr("id", o.id.as_str()).attr("timestamp", o.timestamp.to_string());
            let obs = if o.overridden { obs.attr("overridden", "true") } else { obs };
            groups(obs, &o.observed)
        });
        e.push(el("physicalPart").attr("id", pp.id.as_str()).attr("tag", &pp.tag).children(observations));
    }
    e.children(h.properties.iter().map(|(k, v)| value_el("property", k, v)))
        .children(h.assembled_from.iter().map(|p| el("assembledFrom").attr("holon", p.as_str())))
        .child(el("history").children(h.state_history.iter().map(|s| el("stateRef").attr("state", s.as_str()))))
}

// ---------------------------------------------------------------------------
// Parsing

type Node<'a, 'i> = roxmltree::Node<'a, 'i>;

fn build(bytes: &[u8]) -> Result<Model, HpmError> {
    let text = std::str::from_utf8(bytes).map_err(|e| HpmError::XmlSyntax(format!("input is not UTF-8: {e}")))?;
    let doc = roxmltree::Document::parse(text).map_err(|e| HpmError::XmlSyntax(e.to_string()))?;
    let errors = grammar::hpm().validate(&doc);
    if let Some(ns) = errors.iter().find(|e| e.kind == SchemaErrorKind::UnknownNamespace) {
        return Err(HpmError::UnknownNamespace(ns.message.clone()));
    }
    if !errors.is_empty() {
        return Err(HpmError::SchemaViolation(errors));
    }
    Builder::default().model(doc.root_element())
}

#[derive(Default)]
struct Builder {
    model: Model,
}

fn schema_err(node: Node<'_, '_>, message: String) -> HpmError {
    let id = node.attribute("id").map(|i| format!("[@id={i}]")).unwrap_or_default();
    HpmError::SchemaViolation(vec![SchemaError {
        kind: SchemaErrorKind::Violation,
        path: format!("{}{id}", node.tag_name().name()),
        message,
    }])
}

// The grammar guarantees presence and lexical form of required attributes.
fn attr<'a>(node: Node<'a, '_>, name: &str) -> &'a str {
    node.attribute(name).unwrap_or_default()
}

fn id_attr<T: TryFrom<String, Error = InvalidId>>(node: Node<'_, '_>, name: &str) -> Result<T, HpmError> {
    T::try_from(attr(node, name).to_string()).map_err(|e| schema_err(node, e.to_string()))
}

fn ts_attr(node: Node<'_, '_>, name: &str) -> Result<Timestamp, HpmError> {
    attr(node, name).parse().map_err(|e: crate::value::ValueError| schema_err(node, e.to_string()))
}

fn typed_value(node: Node<'_, '_>) -> Result<TypedValue, HpmError> {
    TypedValue::from_parts(attr(node, "type"), attr(node, "value"), node.attribute("unit"))
        .map_err(|e| schema_err(node, e.to_string()))
}

fn unique<K: Ord, V>(map: &mut BTreeMap<K, V>, key: K, value: V, category: &'static str, id: &str) -> Result<(), HpmError> {
    if map.insert(key, value).is_some() {
        return Err(HpmError::DuplicateId { category, id: id.to_string() });
    }
    Ok(())
}

fn attribute_group(node: Option<Node<'_, '_>>) -> Result<AttributeGroup, HpmError> {
    let mut g = AttributeGroup::new();
    if let Some(node) = node {
        for a in elements(node, "attr") {
            if g.insert(attr(a, "name"), typed_value(a)?).is_some() {
                return Err(schema_err(a, format!("attribute {} repeated in group", attr(a, "name"))));
            }
        }
    }
    Ok(g)
}

fn state_attributes(node: Node<'_, '_>) -> Result<StateAttributes, HpmError> {
    Ok(StateAttributes {
        space: attribute_group(element(node, "space"))?,
        shape: attribute_group(element(node, "shape"))?,
        time: attribute_group(element(node, "time"))?,
    })
}

fn holon_kind(node: Node<'_, '_>) -> HolonKind {
    HolonKind::parse(attr(node, "kind")).expect("grammar enumerates kinds")
}

impl Builder {
    fn model(mut self, root: Node<'_, '_>) -> Result<Model, HpmError> {
        let section = |name| element(root, name).expect("grammar requires every section");
        for n in elements(section("holons"), "holon") {
            self.holon(n)?;
        }
        for n in elements(section("states"), "state") {
            let s = State {
                id: id_attr(n, "id")?,
                holon: id_attr(n, "holon")?,
                kind: holon_kind(n),
                timestamp: ts_attr(n, "timestamp")?,
                attributes: state_attributes(n)?,
            };
            let id = s.id.to_string();
            unique(&mut self.model.states, s.id.clone(), s, "state", &id)?;
        }
        for n in elements(section("processes"), "process") {
            let p = Process {
                id: id_attr(n, "id")?,
                name: attr(n, "name").to_string(),
                description: element(n, "description").map(text_of).unwrap_or_default(),
            };
            let id = p.id.to_string();
            unique(&mut self.model.processes, p.id.clone(), p, "process", &id)?;
        }
        for n in elements(section("processInstances"), "processInstance") {
            let refs = |child: &'static str, a: &'static str| -> Vec<String> {
                elements(n, child).map(|c| attr(c, a).to_string()).collect()
            };
            let ids = |child, a| -> Result<Vec<_>, HpmError> {
                refs(child, a).into_iter().map(|s| StateId::new(s).map_err(|e| schema_err(n, e.to_string()))).collect()
            };
            let pi = ProcessInstance {
                id: id_attr(n, "id")?,
                process: id_attr(n, "process")?,
                input_states: ids("input", "state")?,
                output_holons: conv(refs("output", "holon"), n)?,
                start: ts_attr(n, "start")?,
                end: ts_attr(n, "end")?,
                resources: conv(refs("resourceRef", "resource"), n)?,
                equipment: refs("equipment", "name"),
                personnel: conv(refs("personnel", "resource"), n)?,
            };
            let id = pi.id.to_string();
            unique(&mut self.model.process_instances, pi.id.clone(), pi, "process instance", &id)?;
        }
        for n in elements(section("resources"), "resource") {
            let id: ResourceId = id_attr(n, "id")?;
            let kind = ResourceKind::parse(attr(n, "kind")).ok_or_else(|| HpmError::InvalidValue {
                rule: Rule::ResourceKind,
                entity: id.to_string(),
                message: format!("resource kind {:?} is neither Material nor Human", attr(n, "kind")),
            })?;
            let r = Resource { id: id.clone(), kind, name: attr(n, "name").to_string() };
            unique(&mut self.model.resources, id.clone(), r, "resource", id.as_str())?;
        }
        for n in elements(section("flows"), "flow") {
            let id: FlowId = id_attr(n, "id")?;
            let kind = FlowKind::parse(attr(n, "kind")).expect("grammar enumerates kinds");
            let refs: Vec<String> = elements(n, "member").map(|m| attr(m, "ref").to_string()).collect();
            let members = match kind {
                FlowKind::HolonFlow => FlowMembers::Holons(conv(refs, n)?),
                FlowKind::InformationalFlow => FlowMembers::InformationalParts(conv(refs, n)?),
                FlowKind::PhysicalFlow => FlowMembers::PhysicalParts(conv(refs, n)?),
            };
            let f = Flow { id: id.clone(), members };
            unique(&mut self.model.flows, id.clone(), f, "flow", id.as_str())?;
        }
        Ok(self.model)
    }

    fn holon(&mut self, n: Node<'_, '_>) -> Result<(), HpmError> {
        let id: HolonId = id_attr(n, "id")?;
        let info_node = element(n, "informationalPart").expect("grammar requires informationalPart");
        let mut attributes = BTreeMap::new();
        for e in elements(info_node, "entry") {
            if attributes.insert(attr(e, "key").to_string(), attr(e, "value").to_string()).is_some() {
                return Err(schema_err(e, format!("entry {} repeated", attr(e, "key"))));
            }
        }
        let informational_part = InformationalPart {
            id: id_attr(info_node, "id")?,
            description: element(info_node, "description").map(text_of).unwrap_or_default(),
            attributes,
        };
        let physical_part = match element(n, "physicalPart") {
            None => None,
            Some(pn) => {
                let mut track = Vec::new();
                for o in elements(pn, "observation") {
                    track.push(Observation {
                        id: id_attr::<ObservationId>(o, "id")?,
                        timestamp: ts_attr(o, "timestamp")?,
                        observed: state_attributes(o)?,
                        overridden: o.attribute("overridden") == Some("true"),
                    });
                }
                Some(PhysicalPartRef { id: id_attr::<PartId>(pn, "id")?, tag: attr(pn, "tag").to_string(), track })
            }
        };
        let mut properties = BTreeMap::new();
        for p in elements(n, "property") {
            if properties.insert(attr(p, "name").to_string(), typed_value(p)?).is_some() {
                return Err(schema_err(p, format!("property {} repeated", attr(p, "name"))));
            }
        }
        let assembled_from = conv(elements(n, "assembledFrom").map(|a| attr(a, "holon").to_string()).collect(), n)?;
        let history = element(n, "history").expect("grammar requires history");
        let state_history = conv(elements(history, "stateRef").map(|s| attr(s, "state").to_string()).collect(), n)?;
        let h = Holon {
            id: id.clone(),
            kind: holon_kind(n),
            informational_part,
            physical_part,
            properties,
            assembled_from,
            state_history,
        };
        unique(&mut self.model.holons, id.clone(), h, "holon", id.as_str())
    }
}

fn conv<T: TryFrom<String, Error = InvalidId>, C: FromIterator<T>>(refs: Vec<String>, node: Node<'_, '_>) -> Result<C, HpmError> {
    refs.into_iter().map(|s| T::try_from(s).map_err(|e| schema_err(node, e.to_string()))).collect()
}

/// First id referenced somewhere in the model that does not resolve, with its referrer.
fn first_dangling(m: &Model) -> Option<(String, String)> {
    let info: BTreeSet<&str> = m.holons.values().map(|h| h.informational_part.id.as_str()).collect();
    let phys: BTreeSet<&str> = m.holons.values().filter_map(|h| h.physical_part.as_ref()).map(|p| p.id.as_str()).collect();
    let any_part = |p: &str| info.contains(p) || phys.contains(p) || m.holons.contains_key(p);

    for h in m.holons.values() {
        if let Some(s) = h.state_history.iter().find(|s| !m.states.contains_key(*s)) {
            return Some((s.to_string(), h.id.to_string()));
        }
        if let Some(p) = h.assembled_from.iter().find(|p| !m.holons.contains_key(*p)) {
            return Some((p.to_string(), h.id.to_string()));
        }
    }
    for s in m.states.values() {
        if !m.holons.contains_key(&s.holon) {
            return Some((s.holon.to_string(), s.id.to_string()));
        }
    }
    for pi in m.process_instances.values() {
        let referrer = || pi.id.to_string();
        if !m.processes.contains_key(&pi.process) {
            return Some((pi.process.to_string(), referrer()));
        }
        if let Some(s) = pi.input_states.iter().find(|s| !m.states.contains_key(*s)) {
            return Some((s.to_string(), referrer()));
        }
        if let Some(h) = pi.output_holons.iter().find(|h| !m.holons.contains_key(*h)) {
            return Some((h.to_string(), referrer()));
        }
        if let Some(r) = pi.resources.iter().chain(&pi.personnel).find(|r| !m.resources.contains_key(*r)) {
            return Some((r.to_string(), referrer()));
        }
    }
    for f in m.flows.values() {
        // Members of the wrong category are a FlowMemberKind problem, not a dangling one.
        if let Some(x) = f.members.ids().into_iter().find(|x| !any_part(x)) {
            return Some((x.to_string(), f.id.to_string()));
        }
    }
    None
}
