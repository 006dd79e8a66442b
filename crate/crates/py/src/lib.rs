//! Python bindings: the model store, HPM-XML, the transformations and the
//! synchronisation engine, exposed as the `hpm` extension module.
//!
//! Structured inputs (state attributes, tolerances) are taken as any
//! JSON-serialisable Python object and go through the same serde paths as
//! the event-log format; results come back as plain lists, tuples and dicts.

use hpm_core::sync::{self, InformationalUpdate, PhysicalEvent, ReconciliationPolicy, Tolerances};
use hpm_core::transform::{self, MappingRuleSet, MaterialOptions, MetaModel, MetaModelId};
use hpm_core::{GenealogyGraph, HolonId, StateAttributes, Timestamp, TypedValue, ValidationReport};
use pyo3::create_exception;
use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict, PyList, PyString};

create_exception!(hpm, HpmError, PyValueError, "Malformed or invalid HPM-XML document.");
create_exception!(hpm, TransformError, PyValueError, "Transformation or rules failure.");
create_exception!(hpm, SyncError, PyValueError, "Rejected synchronisation event.");

fn hpm_err(e: impl std::fmt::Display) -> PyErr {
    HpmError::new_err(e.to_string())
}

fn transform_err(e: impl std::fmt::Display) -> PyErr {
    TransformError::new_err(e.to_string())
}

fn sync_err(e: impl std::fmt::Display) -> PyErr {
    SyncError::new_err(e.to_string())
}

/// Accepts `str` or `bytes`.
fn document_bytes(doc: &Bound<'_, PyAny>) -> PyResult<Vec<u8>> {
    if let Ok(s) = doc.cast::<PyString>() {
        Ok(s.to_str()?.as_bytes().to_vec())
    } else if let Ok(b) = doc.cast::<PyBytes>() {
        Ok(b.as_bytes().to_vec())
    } else {
        Err(PyValueError::new_err("expected str or bytes"))
    }
}

fn to_json(obj: &Bound<'_, PyAny>) -> PyResult<String> {
    obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()
}

fn attributes(obj: &Bound<'_, PyAny>) -> PyResult<StateAttributes> {
    let attrs: StateAttributes = serde_json::from_str(&to_json(obj)?).map_err(sync_err)?;
    attrs.check(false).map_err(sync_err)?;
    Ok(attrs)
}

fn tolerances(obj: Option<&Bound<'_, PyAny>>) -> PyResult<Tolerances> {
    match obj {
        Some(o) if !o.is_none() => Tolerances::from_json(&to_json(o)?).map_err(sync_err),
        _ => Ok(Tolerances::new()),
    }
}

fn timestamp(s: &str) -> PyResult<Timestamp> {
    s.parse().map_err(|e| PyValueError::new_err(format!("bad timestamp {s:?}: {e}")))
}

fn value_to_py<'py>(py: Python<'py>, v: &TypedValue) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        TypedValue::Number { value, unit } => (*value, unit.as_str()).into_pyobject(py)?.into_any(),
        TypedValue::Text(s) => s.into_pyobject(py)?.into_any(),
        TypedValue::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
    })
}

fn report_rows(report: &ValidationReport) -> Vec<(String, String, String, String)> {
    report
        .entries
        .iter()
        .map(|v| (v.severity.to_string(), v.rule.to_string(), v.entity.clone(), v.message.clone()))
        .collect()
}

/// Validates an HPM-XML document without raising; returns
/// `(severity, rule, entity, message)` rows, empty when the document is valid.
#[pyfunction]
fn check_document(doc: &Bound<'_, PyAny>) -> PyResult<Vec<(String, String, String, String)>> {
    Ok(report_rows(&hpm_core::check_document(&document_bytes(doc)?)))
}

/// Recovers a partial model from a B2MML material document.
#[pyfunction]
fn from_b2mml_material(doc: &Bound<'_, PyAny>) -> PyResult<Model> {
    let inner = transform::from_b2mml_material(&document_bytes(doc)?).map_err(transform_err)?;
    Ok(Model { inner })
}

fn meta_model(name: &str) -> PyResult<MetaModelId> {
    name.parse::<MetaModel>().map(MetaModelId::m2).map_err(transform_err)
}

/// Text of a bundled rule set in the rules-file format.
#[pyfunction]
fn builtin_rules(source: &str, target: &str) -> PyResult<String> {
    let set = transform::builtin_ruleset(meta_model(source)?, meta_model(target)?).map_err(transform_err)?;
    Ok(transform::format_rules(&set))
}

/// Checks a pair of rules files (as text). `backward=None` means no backward rules.
#[pyfunction]
#[pyo3(signature = (forward, backward=None))]
fn check_interoperability<'py>(py: Python<'py>, forward: &str, backward: Option<&str>) -> PyResult<Bound<'py, PyDict>> {
    let fwd = transform::parse_rules(forward).map_err(transform_err)?;
    let bwd = match backward {
        Some(src) => transform::parse_rules(src).map_err(transform_err)?,
        None => MappingRuleSet::empty(fwd.target(), fwd.source()),
    };
    let (a, b) = transform::interop_concepts(fwd.source().name, fwd.target().name)
        .ok_or_else(|| TransformError::new_err(format!("no concept registry for {} <-> {}", fwd.source(), fwd.target())))?;
    let report = transform::check_interoperability(&fwd, &bwd, a, b).map_err(transform_err)?;
    let d = PyDict::new(py);
    d.set_item("a", report.a.to_string())?;
    d.set_item("b", report.b.to_string())?;
    d.set_item("interoperable", report.interoperable)?;
    d.set_item("uncovered_a", report.uncovered_a)?;
    d.set_item("uncovered_b", report.uncovered_b)?;
    Ok(d)
}

/// Ancestor graph of one holon.
#[pyclass(frozen, module = "hpm")]
struct Genealogy {
    #[pyo3(get)]
    root: String,
    #[pyo3(get)]
    nodes: Vec<String>,
    /// `(parent, child, via)`; `via` is `None` for links recovered without a process instance.
    #[pyo3(get)]
    edges: Vec<(String, String, Option<String>)>,
    order: Vec<String>,
}

impl From<GenealogyGraph> for Genealogy {
    fn from(g: GenealogyGraph) -> Self {
        Genealogy {
            root: g.root.to_string(),
            nodes: g.nodes.iter().map(|n| n.to_string()).collect(),
            edges: g.edges.iter().map(|e| (e.parent.to_string(), e.child.to_string(), e.via.as_ref().map(|v| v.to_string()))).collect(),
            order: g.topological_order().into_iter().map(|n| n.to_string()).collect(),
        }
    }
}

#[pymethods]
impl Genealogy {
    /// Parents before children, ties broken by id.
    fn topological_order(&self) -> Vec<String> {
        self.order.clone()
    }

    fn __repr__(&self) -> String {
        format!("<Genealogy {}: {} nodes, {} edges>", self.root, self.nodes.len(), self.edges.len())
    }
}

/// A holonic product model.
#[pyclass(module = "hpm")]
struct Model {
    inner: hpm_core::Model,
}

impl Model {
    fn holon_id(&self, id: &str) -> PyResult<HolonId> {
        self.inner
            .holon(id)
            .map(|h| h.id.clone())
            .ok_or_else(|| PyKeyError::new_err(format!("unknown holon {id}")))
    }
}

#[pymethods]
impl Model {
    #[new]
    fn new() -> Self {
        Model { inner: hpm_core::Model::new() }
    }

    /// Parses an HPM-XML document given as `str` or `bytes`.
    #[staticmethod]
    fn parse(doc: &Bound<'_, PyAny>) -> PyResult<Self> {
        let inner = hpm_core::parse_hpm(&document_bytes(doc)?).map_err(hpm_err)?;
        Ok(Model { inner })
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        let bytes = std::fs::read(&path)?;
        let inner = hpm_core::parse_hpm(&bytes).map_err(hpm_err)?;
        Ok(Model { inner })
    }

    /// Canonical HPM-XML text; raises if the model has validation errors.
    fn to_hpm(&self) -> PyResult<String> {
        let bytes = hpm_core::emit_hpm(&self.inner).map_err(hpm_err)?;
        String::from_utf8(bytes).map_err(hpm_err)
    }

    /// `(severity, rule, entity, message)` rows.
    fn validate(&self) -> Vec<(String, String, String, String)> {
        report_rows(&self.inner.validate())
    }

    #[getter]
    fn is_valid(&self) -> bool {
        !self.inner.validate().has_errors()
    }

    fn holon_ids(&self) -> Vec<String> {
        self.inner.holons.keys().map(|k| k.to_string()).collect()
    }

    fn holon_kind(&self, id: &str) -> PyResult<&'static str> {
        let id = self.holon_id(id)?;
        Ok(self.inner.holons[&id].kind.as_str())
    }

    /// Holon properties; numbers come back as `(value, unit)`.
    fn properties<'py>(&self, py: Python<'py>, id: &str) -> PyResult<Bound<'py, PyDict>> {
        let id = self.holon_id(id)?;
        let d = PyDict::new(py);
        for (k, v) in &self.inner.holons[&id].properties {
            d.set_item(k, value_to_py(py, v)?)?;
        }
        Ok(d)
    }

    /// `(state id, timestamp)` pairs, oldest first.
    fn lifecycle(&self, id: &str) -> PyResult<Vec<(String, String)>> {
        let states = self.inner.lifecycle(id).map_err(|e| PyKeyError::new_err(e.to_string()))?;
        Ok(states.into_iter().map(|s| (s.id.to_string(), s.timestamp.to_string())).collect())
    }

    /// Attributes of the latest state as `{group: {name: value}}`.
    fn latest_attributes<'py>(&self, py: Python<'py>, id: &str) -> PyResult<Bound<'py, PyDict>> {
        let id = self.holon_id(id)?;
        let d = PyDict::new(py);
        if let Some(s) = self.inner.latest_state(id.as_str()) {
            for (q, v) in s.attributes.qualified() {
                let (group, name) = q.split_once('.').expect("qualified names carry a group");
                let inner = match d.get_item(group)? {
                    Some(g) => g.cast_into::<PyDict>()?,
                    None => {
                        let g = PyDict::new(py);
                        d.set_item(group, &g)?;
                        g
                    }
                };
                inner.set_item(name, value_to_py(py, v)?)?;
            }
        }
        Ok(d)
    }

    fn genealogy(&self, id: &str) -> PyResult<Genealogy> {
        self.inner.genealogy(id).map(Genealogy::from).map_err(|e| PyKeyError::new_err(e.to_string()))
    }

    fn to_ueml(&self) -> PyResult<String> {
        transform::to_ueml(&self.inner).map_err(transform_err)
    }

    #[pyo3(signature = (properties_only=false))]
    fn to_b2mml_material(&self, properties_only: bool) -> PyResult<String> {
        transform::to_b2mml_material(&self.inner, MaterialOptions { properties_only }).map_err(transform_err)
    }

    fn to_b2mml_product_definition(&self) -> PyResult<String> {
        transform::to_b2mml_product_definition(&self.inner).map_err(transform_err)
    }

    /// Appends a reading to the physical track of the holon carrying `tag`;
    /// returns the observation id.
    fn ingest_physical_event(&mut self, timestamp: &str, tag: &str, attrs: &Bound<'_, PyAny>) -> PyResult<String> {
        let event = PhysicalEvent { timestamp: self::timestamp(timestamp)?, tag: tag.to_string(), observed: attributes(attrs)? };
        sync::ingest_physical_event(&mut self.inner, &event).map(|o| o.to_string()).map_err(sync_err)
    }

    /// Records a new informational state; returns the state id.
    fn ingest_informational_update(&mut self, timestamp: &str, holon: &str, attrs: &Bound<'_, PyAny>) -> PyResult<String> {
        let update = InformationalUpdate { timestamp: self::timestamp(timestamp)?, holon: self.holon_id(holon)?, attrs: attributes(attrs)? };
        sync::ingest_informational_update(&mut self.inner, &update).map(|s| s.to_string()).map_err(sync_err)
    }

    /// Compares the latest physical reading with the latest informational
    /// state. `tolerances` maps attribute names to absolute tolerances; `*`
    /// sets the default.
    #[pyo3(signature = (holon, tolerances=None))]
    fn detect_divergence<'py>(
        &self,
        py: Python<'py>,
        holon: &str,
        tolerances: Option<&Bound<'py, PyAny>>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let report = sync::detect_divergence(&self.inner, holon, &self::tolerances(tolerances)?).map_err(sync_err)?;
        let d = PyDict::new(py);
        d.set_item("holon", report.holon.to_string())?;
        d.set_item("observation", report.observation.to_string())?;
        d.set_item("state", report.state.to_string())?;
        d.set_item("divergent", report.is_divergent())?;
        let entries = PyList::empty(py);
        for e in report.divergent_entries() {
            let row = PyDict::new(py);
            row.set_item("attribute", &e.attribute)?;
            row.set_item("physical", e.physical.as_ref().map(|v| value_to_py(py, v)).transpose()?)?;
            row.set_item("informational", e.informational.as_ref().map(|v| value_to_py(py, v)).transpose()?)?;
            row.set_item("delta", e.delta)?;
            row.set_item("tolerance", e.tolerance)?;
            entries.append(row)?;
        }
        d.set_item("divergent_entries", entries)?;
        Ok(d)
    }

    /// Replays a JSON-lines event log; returns the summary as a dict.
    #[pyo3(signature = (log, policy="physical-wins", tolerances=None))]
    fn replay<'py>(
        &mut self,
        py: Python<'py>,
        log: &str,
        policy: &str,
        tolerances: Option<&Bound<'py, PyAny>>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let policy: ReconciliationPolicy = policy.parse().map_err(PyValueError::new_err)?;
        let events = sync::parse_event_log(log).map_err(sync_err)?;
        let summary = sync::replay(&mut self.inner, &events, policy, &self::tolerances(tolerances)?);
        let d = PyDict::new(py);
        d.set_item("applied", summary.applied)?;
        d.set_item("rejected", summary.rejected.iter().map(|(l, e)| (*l, e.to_string())).collect::<Vec<_>>())?;
        d.set_item("divergences", summary.divergences)?;
        d.set_item("reconciled", summary.reconciled)?;
        d.set_item("pending", summary.pending.iter().map(|r| r.holon.to_string()).collect::<Vec<_>>())?;
        d.set_item("text", summary.to_string())?;
        Ok(d)
    }

    fn __len__(&self) -> usize {
        self.inner.holons.len()
    }

    fn __repr__(&self) -> String {
        let count = |n: usize, w: &str| format!("{n} {w}");
        let m = &self.inner;
        format!(
            "<Model {}, {}, {}>",
            count(m.holons.len(), "holons"),
            count(m.states.len(), "states"),
            count(m.process_instances.len(), "process instances")
        )
    }
}

#[pymodule]
pub fn hpm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    m.add_class::<Genealogy>()?;
    m.add_function(wrap_pyfunction!(check_document, m)?)?;
    m.add_function(wrap_pyfunction!(from_b2mml_material, m)?)?;
    m.add_function(wrap_pyfunction!(builtin_rules, m)?)?;
    m.add_function(wrap_pyfunction!(check_interoperability, m)?)?;
    m.add("HpmError", m.py().get_type::<HpmError>())?;
    m.add("TransformError", m.py().get_type::<TransformError>())?;
    m.add("SyncError", m.py().get_type::<SyncError>())?;
    m.add("NAMESPACE", hpm_core::hpm::NAMESPACE)?;
    Ok(())
}
