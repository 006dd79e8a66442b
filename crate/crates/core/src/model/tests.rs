use std::collections::BTreeSet;

use proptest::prelude::*;

use super::*;
use crate::value::AttributeGroup;

pub(crate) fn ts(s: &str) -> Timestamp {
    s.parse().unwrap()
}

pub(crate) fn hid(s: &str) -> HolonId {
    HolonId::new(s).unwrap()
}

fn part(s: &str) -> PartId {
    PartId::new(s).unwrap()
}

fn space_x(x: f64) -> StateAttributes {
    StateAttributes::space(AttributeGroup::new().with("x", TypedValue::number(x, "m")))
}

fn add_elementary(m: &mut Model, id: &str, tag: &str, t: &str) -> StateId {
    m.new_elementary_holon(
        hid(id),
        InformationalPart::new(part(&format!("{id}-info")), format!("{id} spec")),
        PhysicalPartRef::new(part(&format!("{id}-phys")), tag),
        space_x(0.0),
        ts(t),
    )
    .unwrap()
}

fn with_process(m: &mut Model) {
    m.add_process(Process { id: ProcessId::new("P1").unwrap(), name: "assemble".into(), description: String::new() })
        .unwrap();
}

fn run(id: &str, inputs: &[&StateId], outputs: &[&str], start: &str, end: &str) -> ProcessRun {
    let mut r = ProcessRun::new(ProcessInstanceId::new(id).unwrap(), ProcessId::new("P1").unwrap(), ts(start), ts(end));
    r.inputs = inputs.iter().map(|s| (*s).clone()).collect();
    r.outputs = outputs
        .iter()
        .map(|o| OutputSpec::new(hid(o), InformationalPart::new(part(&format!("{o}-info")), "")))
        .collect();
    r
}

/// Reference genealogy: repeatedly sweep every process-instance record until the ancestor set stops growing.
fn brute_force_ancestors(m: &Model, holon: &str) -> (BTreeSet<String>, BTreeSet<(String, String, String)>) {
    let mut nodes = BTreeSet::from([holon.to_string()]);
    let mut edges = BTreeSet::new();
    loop {
        let before = (nodes.len(), edges.len());
        for pi in m.process_instances.values() {
            for out in &pi.output_holons {
                if !nodes.contains(out.as_str()) {
                    continue;
                }
                for s in &pi.input_states {
                    let parent = m.states[s].holon.to_string();
                    edges.insert((parent.clone(), out.to_string(), pi.id.to_string()));
                    nodes.insert(parent);
                }
            }
        }
        if (nodes.len(), edges.len()) == before {
            return (nodes, edges);
        }
    }
}

fn graph_as_strings(g: &GenealogyGraph) -> (BTreeSet<String>, BTreeSet<(String, String, String)>) {
    (
        g.nodes.iter().map(|n| n.to_string()).collect(),
        g.edges
            .iter()
            .map(|e| (e.parent.to_string(), e.child.to_string(), e.via.as_ref().unwrap().to_string()))
            .collect(),
    )
}

#[test]
fn new_elementary_holon_has_one_state() {
    let mut m = Model::new();
    m.new_elementary_holon(
        hid("H1"),
        InformationalPart::new(part("I1"), "bolt spec"),
        PhysicalPartRef::new(part("PP1"), "SN-001"),
        space_x(0.0),
        ts("2024-01-01T00:00:00Z"),
    )
    .unwrap();
    let h = m.holon("H1").unwrap();
    assert_eq!(h.kind, HolonKind::Elementary);
    assert_eq!(h.state_history.len(), 1);
    assert_eq!(m.lifecycle("H1").unwrap().len(), 1);
}

#[test]
fn duplicate_holon_id_rejected() {
    let mut m = Model::new();
    add_elementary(&mut m, "H1", "SN-001", "2024-01-01T00:00:00Z");
    let err = m
        .new_elementary_holon(
            hid("H1"),
            InformationalPart::new(part("X1"), ""),
            PhysicalPartRef::new(part("X2"), "SN-002"),
            StateAttributes::default(),
            ts("2024-01-01T00:00:00Z"),
        )
        .unwrap_err();
    assert!(matches!(err, ModelError::DuplicateId { category: "holon", .. }));
}

#[test]
fn empty_attribute_groups_validate() {
    let mut m = Model::new();
    m.new_elementary_holon(
        hid("H2"),
        InformationalPart::new(part("I2"), ""),
        PhysicalPartRef::new(part("PP2"), "SN-002"),
        StateAttributes::default(),
        ts("2024-01-01T00:00:00Z"),
    )
    .unwrap();
    let s = m.latest_state("H2").unwrap();
    assert!(s.attributes.space.is_empty() && s.attributes.shape.is_empty() && s.attributes.time.is_empty());
    assert!(m.validate().is_empty());
}

#[test]
fn malformed_attributes_rejected() {
    let mut m = Model::with_options(ModelOptions { require_units: true });
    let unitless = StateAttributes::space(AttributeGroup::new().with("x", TypedValue::number(1.0, "")));
    let err = m
        .new_elementary_holon(
            hid("H1"),
            InformationalPart::new(part("I1"), ""),
            PhysicalPartRef::new(part("PP1"), "SN-1"),
            unitless,
            ts("2024-01-01T00:00:00Z"),
        )
        .unwrap_err();
    assert!(matches!(err, ModelError::MalformedAttribute(_)));
    let unnamed = StateAttributes::space(AttributeGroup::new().with("", TypedValue::Bool(true)));
    assert!(matches!(
        Model::new().new_elementary_holon(
            hid("H1"),
            InformationalPart::new(part("I1"), ""),
            PhysicalPartRef::new(part("PP1"), "SN-1"),
            unnamed,
            ts("2024-01-01T00:00:00Z"),
        ),
        Err(ModelError::MalformedAttribute(_))
    ));
}

#[test]
fn reserved_property_prefix_rejected() {
    let mut m = Model::new();
    add_elementary(&mut m, "H1", "SN-1", "2024-01-01T00:00:00Z");
    assert!(m.set_property(&hid("H1"), "state.x", TypedValue::Bool(true)).is_err());
    m.set_property(&hid("H1"), "hardness", TypedValue::number(42.0, "HRC")).unwrap();
}

#[test]
fn assembly_creates_composite_and_edges() {
    let mut m = Model::new();
    with_process(&mut m);
    let s1 = add_elementary(&mut m, "H1", "SN-1", "2024-01-01T00:00:00Z");
    let s2 = add_elementary(&mut m, "H2", "SN-2", "2024-01-01T00:00:01Z");
    let created = m
        .apply_process_instance(run("PI1", &[&s1, &s2], &["H3"], "2024-01-01T01:00:00Z", "2024-01-01T01:30:00Z"))
        .unwrap();
    assert_eq!(created, vec![hid("H3")]);
    assert_eq!(m.holon("H3").unwrap().kind, HolonKind::Composite);
    assert!(m.holon("H3").unwrap().physical_part.is_none());

    let (nodes, edges) = brute_force_ancestors(&m, "H3");
    assert_eq!(edges, BTreeSet::from([
        ("H1".to_string(), "H3".to_string(), "PI1".to_string()),
        ("H2".to_string(), "H3".to_string(), "PI1".to_string()),
    ]));
    assert_eq!(graph_as_strings(&m.genealogy("H3").unwrap()), (nodes, edges));
    assert!(m.validate().is_empty(), "{}", m.validate());
}

#[test]
fn decomposition_yields_two_composites() {
    let mut m = Model::new();
    with_process(&mut m);
    let s1 = add_elementary(&mut m, "H1", "SN-1", "2024-01-01T00:00:00Z");
    let created = m
        .apply_process_instance(run("PI1", &[&s1], &["H3", "H4"], "2024-01-01T01:00:00Z", "2024-01-01T01:30:00Z"))
        .unwrap();
    assert_eq!(created.len(), 2);
    let all: BTreeSet<(String, String)> =
        m.genealogy_edges().into_iter().map(|e| (e.parent.to_string(), e.child.to_string())).collect();
    assert_eq!(all, BTreeSet::from([("H1".into(), "H3".into()), ("H1".into(), "H4".into())]));
    for h in ["H3", "H4"] {
        let (n, e) = brute_force_ancestors(&m, h);
        assert_eq!(graph_as_strings(&m.genealogy(h).unwrap()), (n, e));
    }
}

#[test]
fn mixed_input_kinds_rejected_without_mutation() {
    let mut m = Model::new();
    with_process(&mut m);
    let s1 = add_elementary(&mut m, "H1", "SN-1", "2024-01-01T00:00:00Z");
    let s2 = add_elementary(&mut m, "H2", "SN-2", "2024-01-01T00:00:00Z");
    m.apply_process_instance(run("PI1", &[&s1], &["H3"], "2024-01-01T01:00:00Z", "2024-01-01T01:10:00Z")).unwrap();
    let composite_state = m.latest_state("H3").unwrap().id.clone();
    let before = m.clone();
    let err = m
        .apply_process_instance(run("PI2", &[&s2, &composite_state], &["H4"], "2024-01-01T02:00:00Z", "2024-01-01T02:10:00Z"))
        .unwrap_err();
    assert_eq!(err, ModelError::MixedInputKinds(ProcessInstanceId::new("PI2").unwrap()));
    assert_eq!(m, before);
}

#[test]
fn apply_errors() {
    let mut m = Model::new();
    with_process(&mut m);
    let s1 = add_elementary(&mut m, "H1", "SN-1", "2024-01-01T00:00:00Z");
    let ghost = StateId::new("S9").unwrap();
    assert_eq!(
        m.apply_process_instance(run("PI1", &[&ghost], &["H3"], "2024-01-01T01:00:00Z", "2024-01-01T01:10:00Z")),
        Err(ModelError::UnknownStateId(ghost.clone()))
    );
    assert!(matches!(
        m.apply_process_instance(run("PI1", &[&s1], &["H3"], "2024-01-01T02:00:00Z", "2024-01-01T01:10:00Z")),
        Err(ModelError::TimeOrderViolation(_))
    ));
    assert!(matches!(
        m.apply_process_instance(run("PI1", &[&s1], &[], "2024-01-01T01:00:00Z", "2024-01-01T01:10:00Z")),
        Err(ModelError::EmptyField(_))
    ));
    assert!(matches!(
        m.apply_process_instance(run("PI1", &[&s1], &["H1"], "2024-01-01T01:00:00Z", "2024-01-01T01:10:00Z")),
        Err(ModelError::DuplicateId { category: "holon", .. })
    ));
    let mut r = run("PI1", &[&s1], &["H3"], "2024-01-01T01:00:00Z", "2024-01-01T01:10:00Z");
    m.add_resource(Resource { id: ResourceId::new("drill").unwrap(), kind: ResourceKind::Material, name: "drill".into() })
        .unwrap();
    r.personnel = vec![ResourceId::new("drill").unwrap()];
    assert!(matches!(m.apply_process_instance(r), Err(ModelError::PersonnelNotHuman(_))));
}

#[test]
fn record_state_appends_and_rejects_ties() {
    let mut m = Model::new();
    add_elementary(&mut m, "H1", "SN-1", "2024-01-01T00:00:00Z");
    m.record_state(&hid("H1"), space_x(2.0), ts("2024-01-01T00:00:01Z")).unwrap();
    assert_eq!(m.holon("H1").unwrap().state_history.len(), 2);
    let err = m.record_state(&hid("H1"), space_x(3.0), ts("2024-01-01T00:00:01Z")).unwrap_err();
    assert!(matches!(err, ModelError::NonMonotonicTimestamp { .. }));
    assert_eq!(m.record_state(&hid("H9"), space_x(1.0), ts("2024-01-02T00:00:00Z")), Err(ModelError::UnknownHolon(hid("H9"))));
}

#[test]
fn genealogy_examples() {
    let mut m = Model::new();
    with_process(&mut m);
    let s1 = add_elementary(&mut m, "H1", "SN-1", "2024-01-01T00:00:00Z");
    let s4 = add_elementary(&mut m, "H4", "SN-4", "2024-01-01T00:00:00Z");
    let g = m.genealogy("H1").unwrap();
    assert_eq!(g.nodes, BTreeSet::from([hid("H1")]));
    assert!(g.edges.is_empty());

    m.apply_process_instance(run("PI1", &[&s1], &["H3"], "2024-01-01T01:00:00Z", "2024-01-01T01:10:00Z")).unwrap();
    let s3 = m.latest_state("H3").unwrap().id.clone();
    // H5 consumes the composite H3; H4 is elementary so it needs its own step.
    m.apply_process_instance(run("PI2", &[&s3], &["H6"], "2024-01-01T02:00:00Z", "2024-01-01T02:10:00Z")).unwrap();
    m.apply_process_instance(run("PI3", &[&s4], &["H7"], "2024-01-01T02:00:00Z", "2024-01-01T02:10:00Z")).unwrap();
    let s6 = m.latest_state("H6").unwrap().id.clone();
    let s7 = m.latest_state("H7").unwrap().id.clone();
    m.apply_process_instance(run("PI4", &[&s6, &s7], &["H5"], "2024-01-01T03:00:00Z", "2024-01-01T03:10:00Z")).unwrap();
    let (nodes, edges) = brute_force_ancestors(&m, "H5");
    assert_eq!(nodes.len(), 6);
    assert_eq!(edges.len(), 5);
    assert_eq!(graph_as_strings(&m.genealogy("H5").unwrap()), (nodes, edges));
    assert!(matches!(m.genealogy("nope"), Err(ModelError::UnknownHolon(_))));
    assert!(m.validate().is_empty(), "{}", m.validate());
}

#[test]
fn genealogy_chain_with_second_input() {
    // H1 -> H3 -> H5 with H5 also consuming H4. Composite and elementary inputs
    // cannot share an instance, so H4 here is composite (made from H2).
    let mut m = Model::new();
    with_process(&mut m);
    let s1 = add_elementary(&mut m, "H1", "SN-1", "2024-01-01T00:00:00Z");
    let s2 = add_elementary(&mut m, "H2", "SN-2", "2024-01-01T00:00:00Z");
    m.apply_process_instance(run("PI1", &[&s1], &["H3"], "2024-01-01T01:00:00Z", "2024-01-01T01:10:00Z")).unwrap();
    m.apply_process_instance(run("PI2", &[&s2], &["H4"], "2024-01-01T01:00:00Z", "2024-01-01T01:10:00Z")).unwrap();
    let s3 = m.latest_state("H3").unwrap().id.clone();
    let s4 = m.latest_state("H4").unwrap().id.clone();
    m.apply_process_instance(run("PI3", &[&s3, &s4], &["H5"], "2024-01-01T02:00:00Z", "2024-01-01T02:10:00Z")).unwrap();
    let g = m.genealogy("H5").unwrap();
    assert_eq!(graph_as_strings(&g), brute_force_ancestors(&m, "H5"));
    assert_eq!(g.nodes.len(), 5);
    let order: Vec<&str> = g.topological_order().into_iter().map(|h| h.as_str()).collect();
    assert_eq!(order, vec!["H1", "H2", "H3", "H4", "H5"]);
    assert_eq!(g.sources(), BTreeSet::from([&hid("H1"), &hid("H2")]));
}

#[test]
fn lifecycle_after_processing() {
    let mut m = Model::new();
    with_process(&mut m);
    let s1 = add_elementary(&mut m, "H1", "SN-1", "2024-01-01T00:00:00Z");
    assert_eq!(m.lifecycle("H1").unwrap().len(), 1);
    m.apply_process_instance(run("PI1", &[&s1], &["H3"], "2024-01-01T01:00:00Z", "2024-01-01T01:10:00Z")).unwrap();
    let life = m.lifecycle("H1").unwrap();
    assert_eq!(life.len(), 2);
    assert_eq!(life[1].attributes.space, life[0].attributes.space);
    assert_eq!(life[1].attributes.time.get(CONSUMED_MARKER), Some(&TypedValue::text("PI1")));
    assert_eq!(life[1].timestamp, ts("2024-01-01T01:10:00Z"));
    assert!(matches!(m.lifecycle("H404"), Err(ModelError::UnknownHolon(_))));
}

#[test]
fn validate_empty_model() {
    assert!(Model::new().validate().is_empty());
}

#[test]
fn validate_flags_orphan_composite() {
    let mut m = Model::new();
    m.holons.insert(
        hid("H9"),
        Holon {
            id: hid("H9"),
            kind: HolonKind::Composite,
            informational_part: InformationalPart::new(part("I9"), ""),
            physical_part: None,
            properties: Default::default(),
            assembled_from: Default::default(),
            state_history: vec![],
        },
    );
    let report = m.validate();
    assert_eq!(report.entries.len(), 1);
    assert_eq!(report.entries[0].rule, Rule::CompositeHasProcess);
    assert_eq!(report.entries[0].entity, "H9");
}

/// Reference cycle detector: colour-marking depth-first search over holon-to-child edges.
fn dfs_has_cycle(m: &Model) -> bool {
    use std::collections::BTreeMap;
    let mut children: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for pi in m.process_instances.values() {
        for s in &pi.input_states {
            for o in &pi.output_holons {
                children.entry(m.states[s].holon.to_string()).or_default().push(o.to_string());
            }
        }
    }
    fn visit(n: &str, children: &BTreeMap<String, Vec<String>>, colour: &mut BTreeMap<String, u8>) -> bool {
        match colour.get(n) {
            Some(1) => return true,
            Some(2) => return false,
            _ => {}
        }
        colour.insert(n.to_string(), 1);
        for c in children.get(n).into_iter().flatten() {
            if visit(c, children, colour) {
                return true;
            }
        }
        colour.insert(n.to_string(), 2);
        false
    }
    let mut colour = BTreeMap::new();
    m.holons.keys().any(|h| visit(h.as_str(), &children, &mut colour))
}

#[test]
fn validate_detects_genealogy_cycle() {
    let mut m = Model::new();
    with_process(&mut m);
    let s1 = add_elementary(&mut m, "H1", "SN-1", "2024-01-01T00:00:00Z");
    m.apply_process_instance(run("PI1", &[&s1], &["H2"], "2024-01-01T01:00:00Z", "2024-01-01T01:10:00Z")).unwrap();
    let s2 = m.latest_state("H2").unwrap().id.clone();
    m.apply_process_instance(run("PI2", &[&s2], &["H3"], "2024-01-01T02:00:00Z", "2024-01-01T02:10:00Z")).unwrap();
    assert!(!dfs_has_cycle(&m));
    assert!(!m.validate().has_rule(Rule::GenealogyCycle));

    // Hand-craft: H3's state feeds the instance that produced H2, closing H2 -> H3 -> H2.
    let s3 = m.latest_state("H3").unwrap().id.clone();
    m.process_instances.get_mut("PI1").unwrap().input_states.push(s3);
    assert!(dfs_has_cycle(&m));
    let report = m.validate();
    let cycles: Vec<_> = report.with_rule(Rule::GenealogyCycle).collect();
    assert_eq!(cycles.len(), 1, "{report}");
    assert!(cycles[0].message.contains("H2") && cycles[0].message.contains("H3"));
    assert!(!cycles[0].message.contains("H1"));
}

#[test]
fn validate_flags_each_structural_rule() {
    let mut m = Model::new();
    with_process(&mut m);
    let s1 = add_elementary(&mut m, "H1", "SN-1", "2024-01-01T00:00:00Z");
    add_elementary(&mut m, "H2", "SN-2", "2024-01-01T00:00:00Z");
    m.apply_process_instance(run("PI1", &[&s1], &["H3"], "2024-01-01T01:00:00Z", "2024-01-01T01:10:00Z")).unwrap();
    assert!(m.validate().is_empty());

    let mut bad = m.clone();
    bad.holons.get_mut("H2").unwrap().physical_part = None;
    assert!(bad.validate().has_rule(Rule::ElementaryPartCardinality));

    let mut bad = m.clone();
    bad.holons.get_mut("H2").unwrap().physical_part.as_mut().unwrap().tag = "SN-1".into();
    assert!(bad.validate().has_rule(Rule::DuplicatePart));

    let mut bad = m.clone();
    bad.process_instances.get_mut("PI1").unwrap().output_holons.push(hid("H2"));
    assert!(bad.validate().has_rule(Rule::OutputKind));

    let mut bad = m.clone();
    let pi = bad.process_instances.get_mut("PI1").unwrap();
    std::mem::swap(&mut pi.start, &mut pi.end);
    assert!(bad.validate().has_rule(Rule::TimeOrder));

    let mut bad = m.clone();
    bad.process_instances.get_mut("PI1").unwrap().input_states.push(StateId::new("S9").unwrap());
    assert!(bad.validate().has_rule(Rule::DanglingRef));

    let mut bad = m.clone();
    bad.holons.get_mut("H1").unwrap().state_history.reverse();
    assert!(bad.validate().has_rule(Rule::StateOrder));

    let mut bad = m.clone();
    let first = bad.holons["H1"].state_history[0].clone();
    bad.states.get_mut(&first).unwrap().kind = HolonKind::Composite;
    let report = bad.validate();
    assert!(report.has_rule(Rule::StateKind));
    assert!(report.has_rule(Rule::MixedInputKinds) || bad.process_instances["PI1"].input_states.len() == 1);

    let mut bad = m.clone();
    bad.flows.insert(
        FlowId::new("F1").unwrap(),
        Flow { id: FlowId::new("F1").unwrap(), members: FlowMembers::Holons(BTreeSet::from([hid("H1-info")])) },
    );
    assert!(bad.validate().has_rule(Rule::FlowMemberKind));

    let mut bad = m.clone();
    bad.flows.insert(FlowId::new("F2").unwrap(), Flow { id: FlowId::new("F2").unwrap(), members: FlowMembers::empty(FlowKind::PhysicalFlow) });
    let report = bad.validate();
    assert!(report.has_rule(Rule::EmptyFlow));
    assert!(!report.has_errors());
}

#[test]
fn add_flow_checks_members() {
    let mut m = Model::new();
    add_elementary(&mut m, "H1", "SN-1", "2024-01-01T00:00:00Z");
    let f = |id: &str, members| Flow { id: FlowId::new(id).unwrap(), members };
    assert!(m.add_flow(f("F0", FlowMembers::empty(FlowKind::HolonFlow))).is_err());
    assert!(m.add_flow(f("F1", FlowMembers::Holons(BTreeSet::from([hid("H2")])))).is_err());
    assert!(m.add_flow(f("F1", FlowMembers::PhysicalParts(BTreeSet::from([part("H1-info")])))).is_err());
    m.add_flow(f("F1", FlowMembers::PhysicalParts(BTreeSet::from([part("H1-phys")])))).unwrap();
    m.add_flow(f("F2", FlowMembers::InformationalParts(BTreeSet::from([part("H1-info")])))).unwrap();
    assert!(m.validate().is_empty());
}

proptest! {
    #[test]
    fn sequential_records_stay_sorted(gaps in proptest::collection::vec(1i64..100_000, 100)) {
        let mut m = Model::new();
        add_elementary(&mut m, "H1", "SN-1", "2024-01-01T00:00:00Z");
        let mut t = ts("2024-01-01T00:00:00Z");
        for (i, g) in gaps.iter().enumerate() {
            t = t.plus_millis(*g).unwrap();
            m.record_state(&hid("H1"), space_x(i as f64), t).unwrap();
        }
        let life = m.lifecycle("H1").unwrap();
        prop_assert_eq!(life.len(), 101);
        prop_assert!(life.windows(2).all(|w| w[0].timestamp < w[1].timestamp));
        prop_assert!(m.validate().is_empty());
    }

    #[test]
    fn apply_counts(n_inputs in 1usize..5, n_outputs in 1usize..5) {
        let mut m = Model::new();
        with_process(&mut m);
        let inputs: Vec<StateId> = (0..n_inputs)
            .map(|i| add_elementary(&mut m, &format!("E{i}"), &format!("SN-{i}"), "2024-01-01T00:00:00Z"))
            .collect();
        let outs: Vec<String> = (0..n_outputs).map(|i| format!("C{i}")).collect();
        let out_refs: Vec<&str> = outs.iter().map(|s| s.as_str()).collect();
        let in_refs: Vec<&StateId> = inputs.iter().collect();
        let (holons, states) = (m.holons.len(), m.states.len());
        let created = m
            .apply_process_instance(run("PI1", &in_refs, &out_refs, "2024-01-01T01:00:00Z", "2024-01-01T02:00:00Z"))
            .unwrap();
        prop_assert_eq!(created.len(), n_outputs);
        prop_assert_eq!(m.holons.len(), holons + n_outputs);
        prop_assert_eq!(m.process_instances.len(), 1);
        prop_assert_eq!(m.states.len(), states + n_outputs + n_inputs);
        for i in 0..n_inputs {
            prop_assert_eq!(m.holons[format!("E{i}").as_str()].state_history.len(), 2);
        }
        prop_assert!(m.validate().is_empty());
    }
}

#[test]
fn genealogy_chain_h1_h3_h5_plus_h4() {
    // H5 consumes composite H3 and elementary H4; one instance cannot mix kinds,
    // so H5 is the output of two instances.
    let mut m = Model::new();
    with_process(&mut m);
    let s1 = add_elementary(&mut m, "H1", "SN-1", "2024-01-01T00:00:00Z");
    let s4 = add_elementary(&mut m, "H4", "SN-4", "2024-01-01T00:00:00Z");
    m.apply_process_instance(run("PI1", &[&s1], &["H3"], "2024-01-01T01:00:00Z", "2024-01-01T01:10:00Z")).unwrap();
    let s3 = m.latest_state("H3").unwrap().id.clone();
    m.apply_process_instance(run("PI2", &[&s3], &["H5"], "2024-01-01T02:00:00Z", "2024-01-01T02:10:00Z")).unwrap();
    let pi3 = ProcessInstance {
        id: ProcessInstanceId::new("PI3").unwrap(),
        process: ProcessId::new("P1").unwrap(),
        input_states: vec![s4],
        output_holons: vec![hid("H5")],
        start: ts("2024-01-01T02:00:00Z"),
        end: ts("2024-01-01T02:10:00Z"),
        resources: vec![],
        equipment: vec![],
        personnel: vec![],
    };
    m.process_instances.insert(pi3.id.clone(), pi3);
    let (nodes, edges) = brute_force_ancestors(&m, "H5");
    assert_eq!(nodes, BTreeSet::from(["H1", "H3", "H4", "H5"].map(String::from)));
    assert_eq!(edges.len(), 3);
    assert_eq!(graph_as_strings(&m.genealogy("H5").unwrap()), (nodes, edges));
    assert!(m.validate().is_empty(), "{}", m.validate());
}
