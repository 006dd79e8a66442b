//! Shared builders for unit tests.

use crate::ids::*;
use crate::model::*;
use crate::value::{AttributeGroup, StateAttributes, Timestamp, TypedValue};

pub(crate) fn ts(s: &str) -> Timestamp {
    s.parse().unwrap()
}

pub(crate) fn hid(s: &str) -> HolonId {
    HolonId::new(s).unwrap()
}

pub(crate) fn part(s: &str) -> PartId {
    PartId::new(s).unwrap()
}

pub(crate) fn at(x: f64, y: f64) -> StateAttributes {
    StateAttributes::space(AttributeGroup::new().with("x", TypedValue::number(x, "m")).with("y", TypedValue::number(y, "m")))
}

/// Two bolts assembled into a bracket: 3 holons, 1 process instance.
pub(crate) fn assembly() -> Model {
    let mut m = Model::new();
    let s1 = m
        .new_elementary_holon(
            hid("H1"),
            InformationalPart::new(part("I1"), "M8 bolt"),
            PhysicalPartRef::new(part("PP1"), "SN-001"),
            at(0.0, 0.0),
            ts("2024-01-01T08:00:00Z"),
        )
        .unwrap();
    let s2 = m
        .new_elementary_holon(
            hid("H2"),
            InformationalPart::new(part("I2"), "Ø-ring, nitrile"),
            PhysicalPartRef::new(part("PP2"), "SN-002"),
            at(1.5, 0.25),
            ts("2024-01-01T08:00:00.250Z"),
        )
        .unwrap();
    m.set_property(&hid("H1"), "mass", TypedValue::number(0.012, "kg")).unwrap();
    m.set_property(&hid("H2"), "material", TypedValue::text("NBR")).unwrap();
    m.set_property(&hid("H2"), "inspected", TypedValue::Bool(true)).unwrap();
    m.holons.get_mut("H1").unwrap().informational_part.attributes.insert("standard".into(), "ISO 4017".into());
    m.add_process(Process {
        id: ProcessId::new("P1").unwrap(),
        name: "assemble".into(),
        description: "join parts <fast & tight>".into(),
    })
    .unwrap();
    m.add_resource(Resource { id: ResourceId::new("R1").unwrap(), kind: ResourceKind::Material, name: "grease".into() })
        .unwrap();
    m.add_resource(Resource { id: ResourceId::new("W1").unwrap(), kind: ResourceKind::Human, name: "operator A".into() })
        .unwrap();
    let mut run = ProcessRun::new(
        ProcessInstanceId::new("PI1").unwrap(),
        ProcessId::new("P1").unwrap(),
        ts("2024-01-01T09:00:00Z"),
        ts("2024-01-01T09:30:00Z"),
    );
    run.inputs = vec![s1, s2];
    let mut out = OutputSpec::new(hid("H3"), InformationalPart::new(part("I3"), "bracket assembly"));
    out.properties.insert("revision".into(), TypedValue::text("B"));
    run.outputs = vec![out];
    run.resources = vec![ResourceId::new("R1").unwrap()];
    run.equipment = vec!["press-7".into()];
    run.personnel = vec![ResourceId::new("W1").unwrap()];
    m.apply_process_instance(run).unwrap();
    m.add_flow(Flow {
        id: FlowId::new("F1").unwrap(),
        members: FlowMembers::Holons([hid("H1"), hid("H2"), hid("H3")].into()),
    })
    .unwrap();
    m
}
