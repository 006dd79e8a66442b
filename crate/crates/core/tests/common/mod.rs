//! Seeded random generation of valid models and event logs.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use hpm_core::sync::{ingest_physical_event, PhysicalEvent};
use hpm_core::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const T0: i64 = 1_704_067_200_000; // 2024-01-01T00:00:00Z

struct Clock(i64);

impl Clock {
    fn tick(&mut self, rng: &mut impl Rng) -> Timestamp {
        self.0 += rng.gen_range(1..90_000);
        Timestamp::from_millis(self.0).unwrap()
    }
}

const WORDS: [&str; 8] = ["bolt", "Ø-ring", "bracket", "shaft <M8>", "plate & nut", "\"quoted\"", "housing", "  padded  "];

fn number(rng: &mut impl Rng) -> f64 {
    // Mix of integers, short decimals and arbitrary doubles.
    match rng.gen_range(0..3) {
        0 => rng.gen_range(-50..50) as f64,
        1 => rng.gen_range(-5000..5000) as f64 / 100.0,
        _ => rng.gen_range(-1e6..1e6),
    }
}

fn value(rng: &mut impl Rng) -> TypedValue {
    match rng.gen_range(0..4) {
        0 | 1 => TypedValue::number(number(rng), *["m", "kg", "HRC", "", "N m"].choose(rng).unwrap()),
        2 => TypedValue::text(*WORDS.choose(rng).unwrap()),
        _ => TypedValue::Bool(rng.gen()),
    }
}

pub fn attributes(rng: &mut impl Rng) -> StateAttributes {
    let mut a = StateAttributes::default();
    if rng.gen_bool(0.8) {
        a.space.insert("x", TypedValue::number(number(rng), "m"));
        a.space.insert("y", TypedValue::number(number(rng), "m"));
    }
    if rng.gen_bool(0.4) {
        a.shape.insert("color", TypedValue::text(*["red", "blue", "grün"].choose(rng).unwrap()));
    }
    if rng.gen_bool(0.3) {
        a.time.insert("heat_treated", TypedValue::Bool(rng.gen()));
    }
    a
}

fn part(s: String) -> PartId {
    PartId::new(s).unwrap()
}

/// A random model built only through the model API, so it is valid by
/// construction. Holds at most `max_holons` holons and puts each holon in at
/// most one holon flow.
pub fn random_model(rng: &mut impl Rng, max_holons: usize) -> Model {
    let mut m = Model::new();
    let mut clock = Clock(T0);
    let n_elementary = rng.gen_range(1..=max_holons.min(8));
    for i in 1..=n_elementary {
        let id = HolonId::new(format!("H{i}")).unwrap();
        let mut info = InformationalPart::new(part(format!("I{i}")), *WORDS.choose(rng).unwrap());
        if rng.gen_bool(0.3) {
            info.attributes.insert("drawing".into(), format!("DRW-{}", rng.gen_range(100..999)));
        }
        let t = clock.tick(rng);
        m.new_elementary_holon(id.clone(), info, PhysicalPartRef::new(part(format!("PP{i}")), format!("SN-{i:03}")), attributes(rng), t)
            .unwrap();
        for _ in 0..rng.gen_range(0..3) {
            m.set_property(&id, *["mass", "hardness", "note", "ok"].choose(rng).unwrap(), value(rng)).unwrap();
        }
    }
    let n_processes = rng.gen_range(1..=3);
    for p in 1..=n_processes {
        let name = *["assemble", "drill", "weld", "inspect"].choose(rng).unwrap();
        m.add_process(Process { id: ProcessId::new(format!("P{p}")).unwrap(), name: name.into(), description: format!("{name} step") })
            .unwrap();
    }
    m.add_resource(Resource { id: ResourceId::new("R1").unwrap(), kind: ResourceKind::Material, name: "grease".into() }).unwrap();
    m.add_resource(Resource { id: ResourceId::new("W1").unwrap(), kind: ResourceKind::Human, name: "operator".into() }).unwrap();

    for _ in 0..rng.gen_range(0..6) {
        let holon = HolonId::new(format!("H{}", rng.gen_range(1..=n_elementary))).unwrap();
        let t = clock.tick(rng);
        m.record_state(&holon, attributes(rng), t).unwrap();
    }

    let mut next = n_elementary + 1;
    let mut pi = 1;
    while next <= max_holons && rng.gen_bool(0.75) {
        let kind = if rng.gen_bool(0.5) { HolonKind::Composite } else { HolonKind::Elementary };
        let mut pool: Vec<HolonId> = m.holons.values().filter(|h| h.kind == kind).map(|h| h.id.clone()).collect();
        if pool.is_empty() {
            continue;
        }
        pool.shuffle(rng);
        pool.truncate(rng.gen_range(1..=3));
        let start = clock.tick(rng);
        let end = clock.tick(rng);
        let process = ProcessId::new(format!("P{}", rng.gen_range(1..=n_processes))).unwrap();
        let mut run = ProcessRun::new(ProcessInstanceId::new(format!("PI{pi}")).unwrap(), process, start, end);
        run.inputs = pool.iter().map(|h| m.latest_state(h.as_str()).unwrap().id.clone()).collect();
        for _ in 0..rng.gen_range(1..=2) {
            if next > max_holons {
                break;
            }
            let mut out = OutputSpec::new(HolonId::new(format!("H{next}")).unwrap(), InformationalPart::new(part(format!("I{next}")), "assembly"));
            if rng.gen_bool(0.5) {
                out.properties.insert("revision".into(), value(rng));
            }
            if rng.gen_bool(0.5) {
                out.attributes = attributes(rng);
            }
            run.outputs.push(out);
            next += 1;
        }
        if rng.gen_bool(0.5) {
            run.resources.push(ResourceId::new("R1").unwrap());
        }
        if rng.gen_bool(0.5) {
            run.personnel.push(ResourceId::new("W1").unwrap());
        }
        if rng.gen_bool(0.6) {
            run.equipment.push(format!("press-{}", rng.gen_range(1..9)));
        }
        m.apply_process_instance(run).unwrap();
        pi += 1;
    }

    // Holon flows partition a random subset of the holons.
    let mut ids: Vec<HolonId> = m.holons.keys().cloned().collect();
    ids.shuffle(rng);
    let mut f = 1;
    while !ids.is_empty() && rng.gen_bool(0.7) {
        let take = rng.gen_range(1..=ids.len());
        let members: BTreeSet<HolonId> = ids.drain(..take).collect();
        m.add_flow(Flow { id: FlowId::new(format!("F{f}")).unwrap(), members: FlowMembers::Holons(members) }).unwrap();
        f += 1;
    }
    if rng.gen_bool(0.3) {
        let parts: BTreeSet<PartId> = m.holons.values().map(|h| h.informational_part.id.clone()).take(3).collect();
        m.add_flow(Flow { id: FlowId::new(format!("F{f}")).unwrap(), members: FlowMembers::InformationalParts(parts) }).unwrap();
    }

    // A few physical readings on the shadow tracks.
    for _ in 0..rng.gen_range(0..4) {
        let tag = format!("SN-{:03}", rng.gen_range(1..=n_elementary));
        let t = clock.tick(rng);
        ingest_physical_event(&mut m, &PhysicalEvent { timestamp: t, tag, observed: attributes(rng) }).unwrap();
    }
    m
}

/// Reference genealogy: sweep the process-instance records until the set of
/// ancestors stops growing. Edges are (parent, child, instance).
pub fn brute_force_genealogy(m: &Model, holon: &str) -> (BTreeSet<String>, BTreeSet<(String, String, String)>) {
    let mut nodes = BTreeSet::from([holon.to_string()]);
    let mut edges = BTreeSet::new();
    loop {
        let size = (nodes.len(), edges.len());
        for pi in m.process_instances.values() {
            let children: Vec<String> = pi.output_holons.iter().map(|c| c.to_string()).filter(|c| nodes.contains(c)).collect();
            for child in children {
                for s in &pi.input_states {
                    let parent = m.states[s].holon.to_string();
                    edges.insert((parent.clone(), child.clone(), pi.id.to_string()));
                    nodes.insert(parent);
                }
            }
        }
        if (nodes.len(), edges.len()) == size {
            return (nodes, edges);
        }
    }
}

/// An event log over the elementary holons of `m`, one JSON object per line,
/// with strictly increasing timestamps after every existing entry. Roughly a
/// third of the physical readings disagree with the informational view.
pub fn random_event_log(rng: &mut impl Rng, m: &Model, events: usize) -> String {
    let elementary: Vec<&Holon> = m.holons.values().filter(|h| h.kind == HolonKind::Elementary).collect();
    let latest = m
        .states
        .values()
        .map(|s| s.timestamp.millis())
        .chain(m.holons.values().filter_map(|h| h.physical_part.as_ref()).flat_map(|p| p.track.iter().map(|o| o.timestamp.millis())))
        .max()
        .unwrap_or(T0);
    let mut clock = Clock(latest);
    let mut lines = Vec::new();
    for _ in 0..events {
        let h = elementary.choose(rng).unwrap();
        let t = clock.tick(rng);
        let mut attrs = m.latest_state(h.id.as_str()).map(|s| s.attributes.clone()).unwrap_or_default();
        attrs.time.remove(model::CONSUMED_MARKER);
        if rng.gen_bool(0.35) {
            attrs.space.insert("x", TypedValue::number(number(rng), "m"));
        }
        if rng.gen_bool(0.1) {
            attrs.shape.insert("scratch", TypedValue::Bool(true));
        }
        let line = if rng.gen_bool(0.7) {
            let tag = &h.physical_part.as_ref().unwrap().tag;
            serde_json::json!({"kind": "physical", "timestamp": t.to_string(), "tag": tag, "attrs": attrs})
        } else {
            serde_json::json!({"kind": "informational", "timestamp": t.to_string(), "holon": h.id.as_str(), "attrs": attrs})
        };
        lines.push(line.to_string());
    }
    lines.join("\n")
}

pub fn property_multiset(m: &Model) -> BTreeMap<String, Vec<(String, TypedValueKey)>> {
    m.holons
        .iter()
        .map(|(id, h)| (id.to_string(), h.properties.iter().map(|(k, v)| (k.clone(), TypedValueKey::from(v))).collect()))
        .collect()
}

/// Totally ordered stand-in for a typed value, for multiset comparison.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TypedValueKey(String, String, Option<String>);

impl From<&TypedValue> for TypedValueKey {
    fn from(v: &TypedValue) -> Self {
        Self(v.type_name().to_string(), v.lexical(), v.unit().map(str::to_string))
    }
}
