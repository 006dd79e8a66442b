//! Concept-level mapping between meta-models, and the document backends
//! that apply it to a [`Model`](crate::model::Model).
//!
//! A [`MappingRuleSet`] pairs concepts of a source meta-model with concepts of
//! a target one. The builtin sets reproduce the holon→UEML and holon→IEC 62264
//! correspondence tables; sets can also be read from a small line-oriented
//! rules file (see [`parse_rules`]).

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::grammar::SchemaError;
use crate::model::ValidationReport;

pub mod b2mml;
pub mod ueml;

pub use b2mml::{from_b2mml_material, to_b2mml_material, to_b2mml_product_definition, MaterialOptions, UNASSIGNED_LOT};
pub use ueml::to_ueml;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetaModel {
    Holonic,
    Ueml,
    Iec62264,
}

impl MetaModel {
    pub fn as_str(self) -> &'static str {
        match self {
            MetaModel::Holonic => "HOLONIC",
            MetaModel::Ueml => "UEML",
            MetaModel::Iec62264 => "IEC62264",
        }
    }
}

impl fmt::Display for MetaModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetaModel {
    type Err = TransformError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "HOLONIC" => Ok(MetaModel::Holonic),
            "UEML" => Ok(MetaModel::Ueml),
            "IEC62264" => Ok(MetaModel::Iec62264),
            _ => Err(TransformError::UnknownMetaModel(s.to_string())),
        }
    }
}

/// Level in the four-level MDA stack (M0 data … M3 meta-meta-model).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MdaLevel {
    M0,
    M1,
    M2,
    M3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MetaModelId {
    pub name: MetaModel,
    pub mda_level: MdaLevel,
}

impl MetaModelId {
    pub const HOLONIC: Self = Self::m2(MetaModel::Holonic);
    pub const UEML: Self = Self::m2(MetaModel::Ueml);
    pub const IEC62264: Self = Self::m2(MetaModel::Iec62264);

    pub const fn m2(name: MetaModel) -> Self {
        Self { name, mda_level: MdaLevel::M2 }
    }
}

impl fmt::Display for MetaModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// Which IEC 62264 model a rule belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum View {
    MaterialModel,
    ProductDefinitionModel,
}

impl View {
    pub fn as_str(self) -> &'static str {
        match self {
            View::MaterialModel => "MaterialModel",
            View::ProductDefinitionModel => "ProductDefinitionModel",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "MaterialModel" => Some(View::MaterialModel),
            "ProductDefinitionModel" => Some(View::ProductDefinitionModel),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MappingRule {
    pub source_concept: String,
    pub target_concept: String,
    pub view: Option<View>,
}

impl MappingRule {
    pub fn new(source: impl Into<String>, target: impl Into<String>, view: Option<View>) -> Self {
        Self { source_concept: source.into(), target_concept: target.into(), view }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingRuleSet {
    source: MetaModelId,
    target: MetaModelId,
    rules: Vec<MappingRule>,
}

impl MappingRuleSet {
    /// Checks that source and target differ, concepts are non-empty and no
    /// source concept is mapped twice.
    pub fn new(source: MetaModelId, target: MetaModelId, rules: Vec<MappingRule>) -> Result<Self, TransformError> {
        if source == target {
            return Err(TransformError::InvalidRuleSet(format!("source and target are both {source}")));
        }
        let mut seen = HashSet::new();
        for r in &rules {
            if r.source_concept.is_empty() || r.target_concept.is_empty() {
                return Err(TransformError::InvalidRuleSet("rule with an empty concept".into()));
            }
            if !seen.insert(r.source_concept.as_str()) {
                return Err(TransformError::InvalidRuleSet(format!("concept {} is mapped twice", r.source_concept)));
            }
        }
        Ok(Self { source, target, rules })
    }

    pub fn empty(source: MetaModelId, target: MetaModelId) -> Self {
        Self { source, target, rules: Vec::new() }
    }

    pub fn source(&self) -> MetaModelId {
        self.source
    }

    pub fn target(&self) -> MetaModelId {
        self.target
    }

    pub fn rules(&self) -> &[MappingRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Copy of the set without the rule at `index`.
    pub fn without(&self, index: usize) -> Self {
        let mut rules = self.rules.clone();
        rules.remove(index);
        Self { rules, ..*self }
    }

    pub fn covers(&self, concept: &str) -> bool {
        self.rules.iter().any(|r| r.source_concept == concept)
    }

    /// Source and target swapped, views kept.
    pub fn inverted(&self) -> Result<Self, TransformError> {
        let rules = self
            .rules
            .iter()
            .map(|r| MappingRule::new(r.target_concept.clone(), r.source_concept.clone(), r.view))
            .collect();
        Self::new(self.target, self.source, rules)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransformError {
    #[error("no builtin mapping from {from} to {to}")]
    UnsupportedPair { from: MetaModelId, to: MetaModelId },
    #[error("unknown meta-model {0:?} (expected HOLONIC, UEML or IEC62264)")]
    UnknownMetaModel(String),
    #[error("concept {concept:?} is not mapped; nearest known concepts: {}", .nearest.join(", "))]
    UnmappedConcept { concept: String, nearest: Vec<String> },
    #[error("invalid rule set: {0}")]
    InvalidRuleSet(String),
    #[error("rules line {line}: {message}")]
    RulesSyntax { line: usize, message: String },
    #[error("rule sets do not form a pair: forward maps {fwd_source} to {fwd_target}, backward maps {bwd_source} to {bwd_target}")]
    MismatchedPair { fwd_source: MetaModelId, fwd_target: MetaModelId, bwd_source: MetaModelId, bwd_target: MetaModelId },
    #[error("model is invalid:\n{0}")]
    InvalidModel(ValidationReport),
    #[error("XML syntax error: {0}")]
    XmlSyntax(String),
    #[error("schema violation: {}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    SchemaViolation(Vec<SchemaError>),
    #[error("sublot {sublot} appears in lots {}", .lots.join(", "))]
    AmbiguousSublot { sublot: String, lots: Vec<String> },
    #[error("dangling reference to {id} from {referrer}")]
    DanglingRef { id: String, referrer: String },
}

const HOLONIC_UEML: [(&str, &str); 4] = [
    ("Holon", "Object"),
    ("InformationalPart", "InformationObject"),
    ("PhysicalPart", "MaterialResource"),
    ("Process", "Activity"),
];

const HOLONIC_IEC62264: [(&str, &str, View); 6] = [
    ("Holon", "MaterialSublot", View::MaterialModel),
    ("HolonFlow", "MaterialLot", View::MaterialModel),
    ("InformationalPart", "MaterialDefinition", View::MaterialModel),
    ("PropertiesAndAttributes", "MaterialLotPropertyDefinition", View::MaterialModel),
    ("ProcessInstance", "ProductSegment", View::ProductDefinitionModel),
    ("Equipment", "EquipmentSpecification", View::ProductDefinitionModel),
];

pub fn builtin_ruleset(source: MetaModelId, target: MetaModelId) -> Result<MappingRuleSet, TransformError> {
    let unsupported = || TransformError::UnsupportedPair { from: source, to: target };
    if source.mda_level != MdaLevel::M2 || target.mda_level != MdaLevel::M2 {
        return Err(unsupported());
    }
    let rules = match (source.name, target.name) {
        (MetaModel::Holonic, MetaModel::Ueml) => HOLONIC_UEML.iter().map(|(s, t)| MappingRule::new(*s, *t, None)).collect(),
        (MetaModel::Holonic, MetaModel::Iec62264) => {
            HOLONIC_IEC62264.iter().map(|(s, t, v)| MappingRule::new(*s, *t, Some(*v))).collect()
        }
        (MetaModel::Iec62264, MetaModel::Holonic) => HOLONIC_IEC62264
            .iter()
            .filter(|(_, _, v)| *v == View::MaterialModel)
            .map(|(s, t, v)| MappingRule::new(*t, *s, Some(*v)))
            .collect(),
        _ => return Err(unsupported()),
    };
    MappingRuleSet::new(source, target, rules)
}

pub fn map_concept<'a>(ruleset: &'a MappingRuleSet, concept: &str) -> Result<&'a str, TransformError> {
    if let Some(r) = ruleset.rules.iter().find(|r| r.source_concept == concept) {
        return Ok(&r.target_concept);
    }
    let mut known: Vec<(usize, &str)> = ruleset
        .rules
        .iter()
        .map(|r| (strsim::levenshtein(&concept.to_lowercase(), &r.source_concept.to_lowercase()), r.source_concept.as_str()))
        .collect();
    known.sort();
    Err(TransformError::UnmappedConcept {
        concept: concept.to_string(),
        nearest: known.into_iter().take(3).map(|(_, c)| c.to_string()).collect(),
    })
}

/// Concepts each side must cover for the two meta-models to be interoperable:
/// the holonic concepts named by the correspondence table, and the target
/// concepts the reverse direction has to bring back.
pub fn interop_concepts(a: MetaModel, b: MetaModel) -> Option<(Vec<&'static str>, Vec<&'static str>)> {
    let holonic_ueml = (HOLONIC_UEML.iter().map(|r| r.0).collect(), HOLONIC_UEML.iter().map(|r| r.1).collect());
    let material: Vec<_> = HOLONIC_IEC62264.iter().filter(|r| r.2 == View::MaterialModel).map(|r| r.1).collect();
    let holonic_iec = (HOLONIC_IEC62264.iter().map(|r| r.0).collect(), material);
    match (a, b) {
        (MetaModel::Holonic, MetaModel::Ueml) => Some(holonic_ueml),
        (MetaModel::Ueml, MetaModel::Holonic) => Some((holonic_ueml.1, holonic_ueml.0)),
        (MetaModel::Holonic, MetaModel::Iec62264) => Some(holonic_iec),
        (MetaModel::Iec62264, MetaModel::Holonic) => Some((holonic_iec.1, holonic_iec.0)),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteropReport {
    pub a: MetaModelId,
    pub b: MetaModelId,
    pub interoperable: bool,
    /// Concepts of A without a forward rule.
    pub uncovered_a: Vec<String>,
    /// Concepts of B without a backward rule.
    pub uncovered_b: Vec<String>,
}

impl fmt::Display for InteropReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.interoperable { "interoperable" } else { "not interoperable" };
        writeln!(f, "{} <-> {}: {verdict}", self.a, self.b)?;
        for (side, list) in [(self.a, &self.uncovered_a), (self.b, &self.uncovered_b)] {
            if !list.is_empty() {
                writeln!(f, "uncovered {side} concepts: {}", list.join(", "))?;
            }
        }
        Ok(())
    }
}

/// A and B are interoperable iff `forward` covers every concept of A and
/// `backward` covers every concept of B.
pub fn check_interoperability<A, B>(
    forward: &MappingRuleSet,
    backward: &MappingRuleSet,
    concepts_a: A,
    concepts_b: B,
) -> Result<InteropReport, TransformError>
where
    A: IntoIterator,
    A::Item: AsRef<str>,
    B: IntoIterator,
    B::Item: AsRef<str>,
{
    if forward.source != backward.target || forward.target != backward.source {
        return Err(TransformError::MismatchedPair {
            fwd_source: forward.source,
            fwd_target: forward.target,
            bwd_source: backward.source,
            bwd_target: backward.target,
        });
    }
    fn uncovered<I: IntoIterator<Item: AsRef<str>>>(set: &MappingRuleSet, concepts: I) -> Vec<String> {
        let missing: BTreeSet<String> =
            concepts.into_iter().filter(|c| !set.covers(c.as_ref())).map(|c| c.as_ref().to_string()).collect();
        missing.into_iter().collect()
    }
    let uncovered_a = uncovered(forward, concepts_a);
    let uncovered_b = uncovered(backward, concepts_b);
    Ok(InteropReport {
        a: forward.source,
        b: forward.target,
        interoperable: uncovered_a.is_empty() && uncovered_b.is_empty(),
        uncovered_a,
        uncovered_b,
    })
}

/// Parses a rules file:
///
/// ```text
/// # comment
/// @source HOLONIC
/// @target IEC62264
/// Holon -> MaterialSublot [MaterialModel]
/// Equipment -> EquipmentSpecification [ProductDefinitionModel]
/// ```
pub fn parse_rules(src: &str) -> Result<MappingRuleSet, TransformError> {
    let mut source = None;
    let mut target = None;
    let mut rules = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let err = |message: String| TransformError::RulesSyntax { line: i + 1, message };
        let line = raw.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('@') {
            let (key, value) = rest.split_once(char::is_whitespace).ok_or_else(|| err(format!("directive {line:?} has no value")))?;
            let meta = MetaModelId::m2(value.trim().parse().map_err(|e: TransformError| err(e.to_string()))?);
            let slot = match key {
                "source" => &mut source,
                "target" => &mut target,
                _ => return Err(err(format!("unknown directive @{key}"))),
            };
            if slot.replace(meta).is_some() {
                return Err(err(format!("@{key} given twice")));
            }
            continue;
        }
        let (lhs, rhs) = line.split_once("->").ok_or_else(|| err(format!("expected `source -> target [view]`, got {line:?}")))?;
        let (concept, view) = match rhs.trim().split_once('[') {
            None => (rhs.trim(), None),
            Some((c, v)) => {
                let v = v.strip_suffix(']').ok_or_else(|| err("unterminated view".into()))?.trim();
                (c.trim(), Some(View::parse(v).ok_or_else(|| err(format!("unknown view {v:?}")))?))
            }
        };
        let lhs = lhs.trim();
        for c in [lhs, concept] {
            if c.is_empty() || c.contains(char::is_whitespace) {
                return Err(err(format!("concept names are single non-empty words, got {c:?}")));
            }
        }
        rules.push(MappingRule::new(lhs, concept, view));
    }
    let source = source.ok_or(TransformError::RulesSyntax { line: 0, message: "missing @source".into() })?;
    let target = target.ok_or(TransformError::RulesSyntax { line: 0, message: "missing @target".into() })?;
    MappingRuleSet::new(source, target, rules)
}

/// Inverse of [`parse_rules`].
pub fn format_rules(set: &MappingRuleSet) -> String {
    let mut out = format!("@source {}\n@target {}\n", set.source, set.target);
    for r in &set.rules {
        out.push_str(&r.source_concept);
        out.push_str(" -> ");
        out.push_str(&r.target_concept);
        if let Some(v) = r.view {
            out.push_str(" [");
            out.push_str(v.as_str());
            out.push(']');
        }
        out.push('\n');
    }
    out
}

/// Target concept for a builtin mapping that is known to exist.
fn builtin_name(source: MetaModelId, target: MetaModelId, concept: &str) -> String {
    let set = builtin_ruleset(source, target).expect("builtin pair");
    map_concept(&set, concept).expect("builtin concept").to_string()
}

fn validated(doc: String, grammar: &crate::grammar::Grammar) -> Result<String, TransformError> {
    let errors = grammar.validate_str(&doc).map_err(|e| TransformError::XmlSyntax(e.to_string()))?;
    if errors.is_empty() {
        Ok(doc)
    } else {
        Err(TransformError::SchemaViolation(errors))
    }
}

fn require_valid(model: &crate::model::Model) -> Result<(), TransformError> {
    let report = model.validate();
    if report.has_errors() {
        return Err(TransformError::InvalidModel(report));
    }
    Ok(())
}
