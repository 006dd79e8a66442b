use std::collections::BTreeSet;

use super::{builtin_name, require_valid, validated, MetaModelId, TransformError};
use crate::grammar;
use crate::model::{HolonKind, Model};
use crate::xml::Element;

pub const NAMESPACE: &str = "urn:ueml:1.0:hpm-subset";

/// Holons become `Object`s classified `holon`, linking their informational
/// part's `InformationObject` and (elementary only) their physical part's
/// `MaterialResource`. Each process becomes an `Activity` whose inputs and
/// outputs are the holons consumed and produced by its instances.
pub fn to_ueml(model: &Model) -> Result<String, TransformError> {
    require_valid(model)?;
    let name = |concept| builtin_name(MetaModelId::HOLONIC, MetaModelId::UEML, concept);
    let (object, info_object, material, activity) =
        (name("Holon"), name("InformationalPart"), name("PhysicalPart"), name("Process"));

    let mut root = Element::new("UEMLModel").attr("xmlns", NAMESPACE);
    for h in model.holons.values() {
        root.push(
            Element::new(&object)
                .attr("id", h.id.as_str())
                .attr("classification", "holon")
                .attr("holonKind", h.kind.as_str())
                .attr("informationObject", h.informational_part.id.as_str())
                .opt_attr("materialResource", h.physical_part.as_ref().map(|p| p.id.as_str())),
        );
    }
    for h in model.holons.values() {
        let ip = &h.informational_part;
        root.push(Element::new(&info_object).attr("id", ip.id.as_str()).attr("description", &ip.description));
    }
    let mut parts: Vec<_> = model
        .holons
        .values()
        .filter(|h| h.kind == HolonKind::Elementary)
        .filter_map(|h| h.physical_part.as_ref())
        .collect();
    parts.sort_by(|a, b| a.id.cmp(&b.id));
    for p in parts {
        root.push(Element::new(&material).attr("id", p.id.as_str()).attr("tag", &p.tag));
    }
    for p in model.processes.values() {
        let mut inputs = BTreeSet::new();
        let mut outputs = BTreeSet::new();
        for pi in model.process_instances.values().filter(|pi| pi.process == p.id) {
            inputs.extend(model.input_holons(pi));
            outputs.extend(pi.output_holons.iter().cloned());
        }
        root.push(
            Element::new(&activity)
                .attr("id", p.id.as_str())
                .attr("name", &p.name)
                .children(inputs.iter().map(|h| Element::new("Input").attr("object", h.as_str())))
                .children(outputs.iter().map(|h| Element::new("Output").attr("object", h.as_str()))),
        );
    }
    validated(root.to_document(), grammar::ueml())
}
