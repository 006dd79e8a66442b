//! Holonic product models.
//!
//! A holon is a product seen through two views at once: an informational part
//! held by information systems and a physical part on the shop floor. This
//! crate provides the typed model store ([`model`]), the canonical HPM-XML
//! file format ([`hpm`]), rule-driven transformation into UEML and B2MML
//! documents ([`transform`]) and an engine that keeps the two views of each
//! holon coherent ([`sync`]).

pub mod grammar;
pub mod hpm;
pub mod ids;
pub mod model;
pub mod sync;
pub mod transform;
pub mod value;
pub mod xml;

#[cfg(test)]
mod testutil;

pub use ids::{FlowId, HolonId, InvalidId, ObservationId, PartId, ProcessId, ProcessInstanceId, ResourceId, StateId};
pub use model::{
    Flow, FlowKind, FlowMembers, GenealogyEdge, GenealogyGraph, Holon, HolonKind, InformationalPart, Model, ModelError,
    ModelOptions, Observation, OutputSpec, PhysicalPartRef, Process, ProcessInstance, ProcessRun, Resource, ResourceKind,
    Rule, Severity, State, ValidationReport, Violation,
};
pub use value::{AttributeGroup, GroupKind, StateAttributes, Timestamp, TypedValue};
pub use hpm::{check_document, emit_hpm, parse_hpm, HpmError};
