use std::collections::{BTreeMap, BTreeSet};

use super::{builtin_name, require_valid, validated, MetaModelId, TransformError};
use crate::grammar::{self, SchemaError, SchemaErrorKind};
use crate::ids::{FlowId, HolonId, PartId};
use crate::model::{
    Flow, FlowMembers, Holon, HolonKind, InformationalPart, Model, PhysicalPartRef, ResourceKind, RESERVED_PROPERTY_PREFIX,
};
use crate::value::{format_duration_millis, TypedValue};
use crate::xml::{element, elements, text_of, Element};

pub const NAMESPACE: &str = "http://www.wbf.org/xml/b2mml-v02";

/// Lot holding the sublots of holons that belong to no holon flow.
pub const UNASSIGNED_LOT: &str = "__unassigned__";

/// `ID` of the single `ProductDefinition` element.
pub const PRODUCT_DEFINITION_ID: &str = "holonic-model";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MaterialOptions {
    /// Export holon properties only, leaving out `state.*` entries for the
    /// latest state attributes.
    pub properties_only: bool,
}

fn leaf(name: &str, text: impl Into<String>) -> Element {
    Element::text(name, text)
}

fn value_element(v: &TypedValue) -> Element {
    let data_type = match v {
        TypedValue::Number { .. } => "double",
        TypedValue::Text(_) => "string",
        TypedValue::Bool(_) => "boolean",
    };
    let unit = v.unit().filter(|u| !u.is_empty());
    let mut e = Element::new("Value").child(leaf("ValueString", v.lexical())).child(leaf("DataType", data_type));
    if let Some(u) = unit {
        e.push(leaf("UnitOfMeasure", u));
    }
    e
}

fn property(id: &str, v: &TypedValue) -> Element {
    Element::new("MaterialLotProperty").child(leaf("ID", id)).child(value_element(v))
}

/// Material model view: holon flows → `MaterialLot`, holons → `MaterialSublot`,
/// informational parts → `MaterialDefinition`. A sublot lists the sublots of
/// its genealogy parents as `AssemblySublotID`.
pub fn to_b2mml_material(model: &Model, opts: MaterialOptions) -> Result<String, TransformError> {
    require_valid(model)?;
    let name = |concept| builtin_name(MetaModelId::HOLONIC, MetaModelId::IEC62264, concept);
    let (sublot_name, lot_name, definition_name) = (name("Holon"), name("HolonFlow"), name("InformationalPart"));

    let mut lot_of: BTreeMap<&HolonId, &str> = BTreeMap::new();
    let mut lots: BTreeMap<&str, BTreeSet<&HolonId>> = BTreeMap::new();
    for f in model.flows.values() {
        if let FlowMembers::Holons(members) = &f.members {
            for h in members {
                if let Some(other) = lot_of.insert(h, f.id.as_str()) {
                    return Err(TransformError::AmbiguousSublot {
                        sublot: h.to_string(),
                        lots: vec![other.to_string(), f.id.to_string()],
                    });
                }
            }
            lots.insert(f.id.as_str(), members.iter().collect());
        }
    }
    let unassigned: BTreeSet<&HolonId> = model.holons.keys().filter(|h| !lot_of.contains_key(h)).collect();

    let mut parents: BTreeMap<HolonId, BTreeSet<HolonId>> = BTreeMap::new();
    for e in model.genealogy_edges() {
        parents.entry(e.child).or_default().insert(e.parent);
    }

    let mut root = Element::new("MaterialInformation").attr("xmlns", NAMESPACE);
    let mut definitions: Vec<&InformationalPart> = model.holons.values().map(|h| &h.informational_part).collect();
    definitions.sort_by(|a, b| a.id.cmp(&b.id));
    for ip in definitions {
        root.push(
            Element::new(&definition_name)
                .child(leaf("ID", ip.id.as_str()))
                .child(leaf("Description", &ip.description))
                .children(ip.attributes.iter().map(|(k, v)| {
                    Element::new("MaterialDefinitionProperty")
                        .child(leaf("ID", k))
                        .child(value_element(&TypedValue::Text(v.clone())))
                })),
        );
    }

    let sublot = |id: &HolonId| {
        let h = &model.holons[id];
        let mut e = Element::new(&sublot_name)
            .child(leaf("ID", id.as_str()))
            .child(leaf("MaterialDefinitionID", h.informational_part.id.as_str()));
        if let Some(pp) = &h.physical_part {
            e.push(leaf("PhysicalPartID", pp.id.as_str()));
            e.push(leaf("PhysicalTag", &pp.tag));
        }
        let mut e = e.children(h.properties.iter().map(|(k, v)| property(k, v)));
        if !opts.properties_only {
            if let Some(s) = model.latest_state(id.as_str()) {
                for (k, v) in s.attributes.qualified() {
                    e.push(property(&format!("{RESERVED_PROPERTY_PREFIX}{k}"), v));
                }
            }
        }
        e.children(parents.get(id).into_iter().flatten().map(|p| leaf("AssemblySublotID", p.as_str())))
    };
    let mut all_lots: Vec<(&str, BTreeSet<&HolonId>)> = lots.into_iter().collect();
    if !unassigned.is_empty() {
        all_lots.push((UNASSIGNED_LOT, unassigned));
    }
    for (lot, members) in all_lots {
        root.push(Element::new(&lot_name).child(leaf("ID", lot)).children(members.into_iter().map(sublot)));
    }
    validated(root.to_document(), grammar::b2mml_material())
}

/// Product definition view: each process instance → `ProductSegment` with its
/// duration, personnel, equipment, and the material it consumes and produces.
pub fn to_b2mml_product_definition(model: &Model) -> Result<String, TransformError> {
    require_valid(model)?;
    let name = |concept| builtin_name(MetaModelId::HOLONIC, MetaModelId::IEC62264, concept);
    let (segment_name, equipment_name) = (name("ProcessInstance"), name("Equipment"));

    let material_spec = |definition: &str, description: &str, usage: &str| {
        Element::new("MaterialSpecification")
            .child(leaf("MaterialDefinitionID", definition))
            .child(leaf("Description", description))
            .child(leaf("MaterialUse", usage))
    };
    let mut definition = Element::new("ProductDefinition").child(leaf("ID", PRODUCT_DEFINITION_ID));
    for pi in model.process_instances.values() {
        let process = &model.processes[&pi.process];
        let mut people: BTreeSet<_> = pi.personnel.iter().collect();
        let mut consumables = BTreeSet::new();
        for r in &pi.resources {
            match model.resources[r].kind {
                ResourceKind::Human => people.insert(r),
                ResourceKind::Material => consumables.insert(r),
            };
        }
        let mut segment = Element::new(&segment_name)
            .child(leaf("ID", pi.id.as_str()))
            .child(leaf("Description", &process.name))
            .child(leaf("ProcessSegmentID", process.id.as_str()))
            .child(leaf("Duration", format_duration_millis(pi.duration_millis())))
            .children(people.into_iter().map(|r| {
                Element::new("PersonnelSpecification")
                    .child(leaf("PersonID", r.as_str()))
                    .child(leaf("Description", &model.resources[r].name))
            }))
            .children(pi.equipment.iter().map(|e| Element::new(&equipment_name).child(leaf("EquipmentID", e))));
        for h in model.input_holons(pi) {
            segment.push(material_spec(model.holons[&h].informational_part.id.as_str(), h.as_str(), "Consumed"));
        }
        for h in &pi.output_holons {
            segment.push(material_spec(model.holons[h].informational_part.id.as_str(), h.as_str(), "Produced"));
        }
        for r in consumables {
            segment.push(material_spec(r.as_str(), &model.resources[r].name, "Consumable"));
        }
        definition.push(segment);
    }
    let root = Element::new("ProductDefinitionInformation").attr("xmlns", NAMESPACE).child(definition);
    validated(root.to_document(), grammar::b2mml_product_definition())
}

type Node<'a, 'i> = roxmltree::Node<'a, 'i>;

fn violation(path: String, message: impl Into<String>) -> TransformError {
    TransformError::SchemaViolation(vec![SchemaError { kind: SchemaErrorKind::Violation, path, message: message.into() }])
}

fn child_text(node: Node<'_, '_>, name: &str) -> Option<String> {
    element(node, name).map(text_of)
}

fn id_text(node: Node<'_, '_>) -> String {
    child_text(node, "ID").unwrap_or_default()
}

fn read_value(node: Node<'_, '_>, path: &str) -> Result<TypedValue, TransformError> {
    let v = element(node, "Value").expect("grammar requires Value");
    let lexical = child_text(v, "ValueString").unwrap_or_default();
    let type_name = match child_text(v, "DataType").as_deref() {
        Some("double") => "number",
        Some("boolean") => "boolean",
        _ => "text",
    };
    TypedValue::from_parts(type_name, &lexical, child_text(v, "UnitOfMeasure").as_deref())
        .map_err(|e| violation(path.to_string(), e.to_string()))
}

fn parse_id<T: TryFrom<String, Error = crate::ids::InvalidId>>(s: String, path: &str) -> Result<T, TransformError> {
    T::try_from(s).map_err(|e| violation(path.to_string(), e.to_string()))
}

/// Rebuilds holons, informational parts, properties, holon flows and
/// genealogy links from a material document. Processes, resources and states
/// are not carried by the material model and stay empty; genealogy links come
/// back as `assembled_from` sets and `state.*` properties are dropped.
pub fn from_b2mml_material(doc: &[u8]) -> Result<Model, TransformError> {
    let text = std::str::from_utf8(doc).map_err(|e| TransformError::XmlSyntax(format!("input is not UTF-8: {e}")))?;
    let doc = roxmltree::Document::parse(text).map_err(|e| TransformError::XmlSyntax(e.to_string()))?;
    let errors = grammar::b2mml_material().validate(&doc);
    if !errors.is_empty() {
        return Err(TransformError::SchemaViolation(errors));
    }
    let root = doc.root_element();

    let mut definitions: BTreeMap<String, InformationalPart> = BTreeMap::new();
    for d in elements(root, "MaterialDefinition") {
        let id = id_text(d);
        let path = format!("/MaterialInformation/MaterialDefinition[ID={id}]");
        let mut attributes = BTreeMap::new();
        for p in elements(d, "MaterialDefinitionProperty") {
            let key = id_text(p);
            let value = read_value(p, &path)?.lexical();
            if attributes.insert(key.clone(), value).is_some() {
                return Err(violation(path, format!("property {key} repeated")));
            }
        }
        let ip = InformationalPart {
            id: parse_id(id.clone(), &path)?,
            description: child_text(d, "Description").unwrap_or_default(),
            attributes,
        };
        if definitions.insert(id, ip).is_some() {
            return Err(violation(path, "MaterialDefinition ID repeated"));
        }
    }

    let mut lot_of: BTreeMap<String, String> = BTreeMap::new();
    let mut sublots = Vec::new();
    let mut lots: Vec<(String, BTreeSet<HolonId>)> = Vec::new();
    for lot in elements(root, "MaterialLot") {
        let lot_id = id_text(lot);
        let mut members = BTreeSet::new();
        for s in elements(lot, "MaterialSublot") {
            let id = id_text(s);
            if let Some(other) = lot_of.insert(id.clone(), lot_id.clone()) {
                return Err(TransformError::AmbiguousSublot { sublot: id, lots: vec![other, lot_id] });
            }
            let path = format!("/MaterialInformation/MaterialLot[ID={lot_id}]/MaterialSublot[ID={id}]");
            members.insert(parse_id::<HolonId>(id, &path)?);
            sublots.push((s, path));
        }
        lots.push((lot_id, members));
    }

    let mut model = Model::new();
    for (s, path) in sublots {
        let id: HolonId = parse_id(id_text(s), &path)?;
        let def = child_text(s, "MaterialDefinitionID").unwrap_or_default();
        let informational_part = definitions
            .get(&def)
            .cloned()
            .ok_or_else(|| TransformError::DanglingRef { id: def.clone(), referrer: id.to_string() })?;
        let physical_part = match (child_text(s, "PhysicalPartID"), child_text(s, "PhysicalTag")) {
            (Some(part), Some(tag)) => Some(PhysicalPartRef { id: parse_id::<PartId>(part, &path)?, tag, track: Vec::new() }),
            (None, None) => None,
            _ => return Err(violation(path, "PhysicalPartID and PhysicalTag must appear together")),
        };
        let mut properties = BTreeMap::new();
        for p in elements(s, "MaterialLotProperty") {
            let key = id_text(p);
            if key.starts_with(RESERVED_PROPERTY_PREFIX) {
                continue;
            }
            let value = read_value(p, &path)?;
            if properties.insert(key.clone(), value).is_some() {
                return Err(violation(path, format!("property {key} repeated")));
            }
        }
        let mut assembled_from = BTreeSet::new();
        for a in elements(s, "AssemblySublotID") {
            let parent = text_of(a);
            if !lot_of.contains_key(&parent) {
                return Err(TransformError::DanglingRef { id: parent, referrer: id.to_string() });
            }
            assembled_from.insert(parse_id::<HolonId>(parent, &path)?);
        }
        let kind = if physical_part.is_some() { HolonKind::Elementary } else { HolonKind::Composite };
        let holon = Holon { id: id.clone(), kind, informational_part, physical_part, properties, assembled_from, state_history: Vec::new() };
        model.holons.insert(id, holon);
    }
    for (lot_id, members) in lots {
        if lot_id == UNASSIGNED_LOT {
            continue;
        }
        let path = format!("/MaterialInformation/MaterialLot[ID={lot_id}]");
        let id: FlowId = parse_id(lot_id, &path)?;
        if model.flows.insert(id.clone(), Flow { id, members: FlowMembers::Holons(members) }).is_some() {
            return Err(violation(path, "MaterialLot ID repeated"));
        }
    }
    Ok(model)
}
