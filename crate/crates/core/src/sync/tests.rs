use proptest::prelude::*;

use super::*;
use crate::model::{InformationalPart, PhysicalPartRef};
use crate::ids::PartId;
use crate::testutil::{assembly, hid, ts};
use crate::value::AttributeGroup;

fn x(v: f64) -> StateAttributes {
    StateAttributes::space(AttributeGroup::new().with("x", TypedValue::number(v, "m")))
}

/// One elementary holon H1 tagged SN-001 with informational x = 2 m.
fn bolt() -> Model {
    let mut m = Model::new();
    m.new_elementary_holon(
        hid("H1"),
        InformationalPart::new(PartId::new("I1").unwrap(), "bolt"),
        PhysicalPartRef::new(PartId::new("PP1").unwrap(), "SN-001"),
        x(2.0),
        ts("2024-01-01T00:00:00Z"),
    )
    .unwrap();
    m
}

fn observe(m: &mut Model, t: &str, v: f64) -> ObservationId {
    ingest_physical_event(m, &PhysicalEvent { timestamp: ts(t), tag: "SN-001".into(), observed: x(v) }).unwrap()
}

fn track_len(m: &Model, h: &str) -> usize {
    m.holons[h].physical_part.as_ref().unwrap().track.len()
}

#[test]
fn physical_event_goes_to_shadow_track_only() {
    let mut m = bolt();
    let before = m.holons["H1"].state_history.clone();
    let id = observe(&mut m, "2024-01-01T00:01:00Z", 2.0);
    assert_eq!(id.as_str(), "H1-obs1");
    assert_eq!(track_len(&m, "H1"), 1);
    assert_eq!(m.holons["H1"].state_history, before);
    assert!(m.validate().is_empty());
}

#[test]
fn unknown_and_ambiguous_tags() {
    let mut m = bolt();
    let e = PhysicalEvent { timestamp: ts("2024-01-01T00:01:00Z"), tag: "SN-999".into(), observed: x(1.0) };
    assert_eq!(ingest_physical_event(&mut m, &e), Err(SyncError::UnknownTag("SN-999".into())));

    m.new_elementary_holon(
        hid("H2"),
        InformationalPart::new(PartId::new("I2").unwrap(), ""),
        PhysicalPartRef::new(PartId::new("PP2").unwrap(), "SN-002"),
        x(0.0),
        ts("2024-01-01T00:00:00Z"),
    )
    .unwrap();
    // Corrupt the model behind the constructors' back.
    m.holons.get_mut("H2").unwrap().physical_part.as_mut().unwrap().tag = "SN-001".into();
    assert!(m.validate().has_rule(crate::model::Rule::DuplicatePart));
    let e = PhysicalEvent { tag: "SN-001".into(), ..e };
    assert!(matches!(ingest_physical_event(&mut m, &e), Err(SyncError::AmbiguousTag { holons, .. }) if holons == ["H1", "H2"]));
}

#[test]
fn physical_track_is_monotonic() {
    let mut m = bolt();
    observe(&mut m, "2024-01-01T00:01:00Z", 2.0);
    let e = PhysicalEvent { timestamp: ts("2024-01-01T00:01:00Z"), tag: "SN-001".into(), observed: x(2.0) };
    assert!(matches!(ingest_physical_event(&mut m, &e), Err(SyncError::NonMonotonicTimestamp { .. })));
    assert_eq!(track_len(&m, "H1"), 1);
}

#[test]
fn informational_update_grows_history_only() {
    let mut m = bolt();
    observe(&mut m, "2024-01-01T00:01:00Z", 2.0);
    let u = InformationalUpdate { timestamp: ts("2024-01-01T00:02:00Z"), holon: hid("H1"), attrs: x(2.0) };
    ingest_informational_update(&mut m, &u).unwrap();
    assert_eq!(m.holons["H1"].state_history.len(), 2);
    assert_eq!(track_len(&m, "H1"), 1);
    let stale = InformationalUpdate { timestamp: ts("2024-01-01T00:02:00Z"), ..u.clone() };
    assert!(matches!(ingest_informational_update(&mut m, &stale), Err(SyncError::NonMonotonicTimestamp { .. })));
    let ghost = InformationalUpdate { holon: hid("H9"), timestamp: ts("2024-01-01T00:03:00Z"), ..u };
    assert_eq!(ingest_informational_update(&mut m, &ghost), Err(SyncError::UnknownHolon("H9".into())));
}

#[test]
fn equal_views_are_coherent() {
    let mut m = bolt();
    observe(&mut m, "2024-01-01T00:01:00Z", 2.0);
    let r = detect_divergence(&m, "H1", &Tolerances::new()).unwrap();
    assert_eq!(r.verdict, Verdict::Coherent);
    assert_eq!(r.entries.len(), 1);
    assert_eq!(r.entries[0].delta, Some(0.0));
}

#[test]
fn tolerance_decides_verdict() {
    let mut m = bolt();
    observe(&mut m, "2024-01-01T00:01:00Z", 2.05);
    let tight = detect_divergence(&m, "H1", &Tolerances::new().with("x", 0.01)).unwrap();
    assert_eq!(tight.verdict, Verdict::Divergent);
    let delta = tight.entries[0].delta.unwrap();
    assert!((delta - 0.05).abs() < 1e-12, "{delta}");
    assert_eq!(tight.entries[0].tolerance, 0.01);
    let loose = detect_divergence(&m, "H1", &Tolerances::new().with("space.x", 0.1)).unwrap();
    assert_eq!(loose.verdict, Verdict::Coherent);
}

#[test]
fn one_sided_and_non_numeric_attributes() {
    let mut m = bolt();
    let mut obs = x(2.0);
    obs.shape.insert("color", TypedValue::text("red"));
    ingest_physical_event(&mut m, &PhysicalEvent { timestamp: ts("2024-01-01T00:01:00Z"), tag: "SN-001".into(), observed: obs }).unwrap();
    let r = detect_divergence(&m, "H1", &Tolerances::new()).unwrap();
    assert_eq!(r.verdict, Verdict::Divergent);
    let bad: Vec<_> = r.divergent_entries().map(|e| e.attribute.as_str()).collect();
    assert_eq!(bad, ["shape.color"]);

    // Different units never compare equal, whatever the tolerance.
    let mut m = bolt();
    let mm = StateAttributes::space(AttributeGroup::new().with("x", TypedValue::number(2.0, "mm")));
    ingest_physical_event(&mut m, &PhysicalEvent { timestamp: ts("2024-01-01T00:01:00Z"), tag: "SN-001".into(), observed: mm }).unwrap();
    assert!(detect_divergence(&m, "H1", &Tolerances { default: 1e9, ..Tolerances::new() }).unwrap().is_divergent());
}

#[test]
fn detect_preconditions() {
    let m = bolt();
    assert_eq!(detect_divergence(&m, "H1", &Tolerances::new()), Err(SyncError::NoObservations("H1".into())));
    assert_eq!(detect_divergence(&m, "H9", &Tolerances::new()), Err(SyncError::UnknownHolon("H9".into())));
    let a = assembly();
    assert_eq!(detect_divergence(&a, "H3", &Tolerances::new()), Err(SyncError::NotElementary("H3".into())));
}

#[test]
fn physical_wins_converges() {
    let mut m = bolt();
    observe(&mut m, "2024-01-01T00:01:00Z", 2.05);
    let tol = Tolerances::new().with("x", 0.01);
    let r = detect_divergence(&m, "H1", &tol).unwrap();
    let res = reconcile(&mut m, &r, ReconciliationPolicy::PhysicalWins, ts("2024-01-01T00:02:00Z")).unwrap();
    let Resolution::Applied(state) = res else { panic!("{res:?}") };
    assert_eq!(m.states[&state].attributes, x(2.05));
    assert_eq!(m.states[&state].timestamp, ts("2024-01-01T00:02:00Z"));
    assert_eq!(detect_divergence(&m, "H1", &tol).unwrap().verdict, Verdict::Coherent);
    assert!(m.validate().is_empty());
}

#[test]
fn physical_wins_keeps_consumption_marker_and_bumps_time() {
    let mut m = assembly();
    let e = PhysicalEvent { timestamp: ts("2024-01-01T10:00:00Z"), tag: "SN-001".into(), observed: x(5.0) };
    ingest_physical_event(&mut m, &e).unwrap();
    let r = detect_divergence(&m, "H1", &Tolerances::new()).unwrap();
    assert!(r.entries.iter().all(|e| !e.attribute.starts_with("time.")));
    // Requested instant precedes the latest state: stamped 1 ms after it instead.
    let Resolution::Applied(s) = reconcile(&mut m, &r, ReconciliationPolicy::PhysicalWins, ts("2024-01-01T00:00:00Z")).unwrap() else { panic!() };
    let s = &m.states[&s];
    assert_eq!(s.timestamp, ts("2024-01-01T09:30:00.001Z"));
    assert_eq!(s.attributes.time.get(CONSUMED_MARKER), Some(&TypedValue::text("PI1")));
    assert!(!detect_divergence(&m, "H1", &Tolerances::new()).unwrap().is_divergent());
}

#[test]
fn manual_and_informational_wins() {
    let mut m = bolt();
    observe(&mut m, "2024-01-01T00:01:00Z", 2.05);
    let r = detect_divergence(&m, "H1", &Tolerances::new()).unwrap();
    let before = m.clone();
    assert_eq!(reconcile(&mut m, &r, ReconciliationPolicy::Manual, ts("2024-01-01T00:02:00Z")).unwrap(), Resolution::Pending(r.clone()));
    assert_eq!(m, before);

    let res = reconcile(&mut m, &r, ReconciliationPolicy::InformationalWins, ts("2024-01-01T00:02:00Z")).unwrap();
    assert_eq!(res, Resolution::Overridden(ObservationId::new("H1-obs1").unwrap()));
    assert!(m.holons["H1"].physical_part.as_ref().unwrap().track[0].overridden);
    assert_eq!(m.holons["H1"].state_history, before.holons["H1"].state_history);
}

#[test]
fn coherent_report_not_reconciled() {
    let mut m = bolt();
    observe(&mut m, "2024-01-01T00:01:00Z", 2.0);
    let r = detect_divergence(&m, "H1", &Tolerances::new()).unwrap();
    assert_eq!(
        reconcile(&mut m, &r, ReconciliationPolicy::PhysicalWins, ts("2024-01-01T00:02:00Z")),
        Err(SyncError::NotDivergent("H1".into()))
    );
}

#[test]
fn tolerances_from_json() {
    let t = Tolerances::from_json(r#"{"space.x": 0.01, "y": 0.5, "*": 0.001}"#).unwrap();
    assert_eq!(t.get("space.x"), 0.01);
    assert_eq!(t.get("shape.x"), 0.001);
    assert_eq!(t.get("space.y"), 0.5);
    assert_eq!(t.get("time.z"), 0.001);
    assert!(Tolerances::from_json(r#"{"x": -1}"#).is_err());
    assert!(Tolerances::from_json("[1]").is_err());
}

const LOG: &str = r#"
{"kind":"physical","timestamp":"2024-01-01T00:01:00Z","tag":"SN-001","attrs":{"space":{"x":{"value":2.05,"unit":"m"}}}}
{"kind":"informational","timestamp":"2024-01-01T00:03:00Z","holon":"H1","attrs":{"space":{"x":{"value":2.05,"unit":"m"}}}}
{"kind":"physical","timestamp":"2024-01-01T00:00:30Z","tag":"SN-001","attrs":{}}
"#;

#[test]
fn event_log_parsing() {
    let events = parse_event_log(LOG).unwrap();
    assert_eq!(events.len(), 3);
    assert_eq!(events[0].line, 2);
    assert!(matches!(&events[1].event, Event::Informational { holon, .. } if holon.as_str() == "H1"));
    for bad in [r#"{"kind":"teleport","timestamp":"2024-01-01T00:00:00Z"}"#, r#"{"kind":"physical","tag":"x"}"#, "not json", r#"{"kind":"physical","timestamp":"2024-01-01T00:00:00","tag":"x"}"#, r#"{"kind":"physical","timestamp":"2024-01-01T00:00:00Z","tag":"x","extra":1}"#] {
        assert!(matches!(parse_event_log(bad), Err(SyncError::BadEvent { line: 1, .. })), "{bad}");
    }
}

#[test]
fn replay_reconciles_and_reports_rejections() {
    let mut m = bolt();
    let events = parse_event_log(LOG).unwrap();
    let tol = Tolerances::new().with("x", 0.01);
    let s = replay(&mut m, &events, ReconciliationPolicy::PhysicalWins, &tol);
    assert_eq!(s.applied, 2);
    assert_eq!(s.divergences, 1);
    assert_eq!(s.reconciled, 1);
    assert_eq!(s.rejected.len(), 1);
    assert_eq!(s.rejected[0].0, 4);
    assert!(s.to_string().starts_with("2 events applied, 1 rejected, 1 divergence, 1 reconciled, 0 pending"));
    assert!(!detect_divergence(&m, "H1", &tol).unwrap().is_divergent());
}

#[test]
fn coherent_replay() {
    let mut m = bolt();
    let log = r#"{"kind":"physical","timestamp":"2024-01-01T00:01:00Z","tag":"SN-001","attrs":{"space":{"x":{"value":2,"unit":"m"}}}}"#;
    let s = replay(&mut m, &parse_event_log(log).unwrap(), ReconciliationPolicy::PhysicalWins, &Tolerances::new());
    assert_eq!((s.applied, s.divergences), (1, 0));
    assert!(s.to_string().contains("0 divergences"));
}

proptest! {
    #[test]
    fn interleaved_ingests_keep_both_tracks_monotonic(kinds in prop::collection::vec(any::<bool>(), 50), gaps in prop::collection::vec(1i64..5000, 50)) {
        let mut m = bolt();
        let mut t = ts("2024-01-01T00:00:00Z").millis();
        for (physical, gap) in kinds.into_iter().zip(gaps) {
            t += gap;
            let at = Timestamp::from_millis(t).unwrap();
            let hist = m.holons["H1"].state_history.clone();
            let track = track_len(&m, "H1");
            if physical {
                ingest_physical_event(&mut m, &PhysicalEvent { timestamp: at, tag: "SN-001".into(), observed: x(t as f64) }).unwrap();
                prop_assert_eq!(&m.holons["H1"].state_history, &hist);
            } else {
                ingest_informational_update(&mut m, &InformationalUpdate { timestamp: at, holon: hid("H1"), attrs: x(t as f64) }).unwrap();
                prop_assert_eq!(track_len(&m, "H1"), track);
            }
        }
        let track = &m.holons["H1"].physical_part.as_ref().unwrap().track;
        prop_assert!(track.windows(2).all(|w| w[0].timestamp < w[1].timestamp));
        let states = m.lifecycle("H1").unwrap();
        prop_assert!(states.windows(2).all(|w| w[0].timestamp < w[1].timestamp));
        prop_assert!(m.validate().is_empty());
    }
}
