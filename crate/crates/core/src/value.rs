//! Attribute values, attribute groups and timestamps.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, TimeZone, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A typed attribute or property value.
#[derive(Debug, Clone, PartialEq)]
pub enum TypedValue {
    Number { value: f64, unit: String },
    Text(String),
    Bool(bool),
}

impl TypedValue {
    pub fn number(value: f64, unit: impl Into<String>) -> Self {
        TypedValue::Number { value, unit: unit.into() }
    }

    pub fn text(s: impl Into<String>) -> Self {
        TypedValue::Text(s.into())
    }

    /// Name of the value type as written in documents: `number`, `text` or `boolean`.
    pub fn type_name(&self) -> &'static str {
        match self {
            TypedValue::Number { .. } => "number",
            TypedValue::Text(_) => "text",
            TypedValue::Bool(_) => "boolean",
        }
    }

    /// Lexical form of the value without its unit.
    pub fn lexical(&self) -> String {
        match self {
            TypedValue::Number { value, .. } => format_number(*value),
            TypedValue::Text(s) => s.clone(),
            TypedValue::Bool(b) => b.to_string(),
        }
    }

    pub fn unit(&self) -> Option<&str> {
        match self {
            TypedValue::Number { unit, .. } => Some(unit),
            _ => None,
        }
    }

    /// Rebuilds a value from its type name, lexical form and optional unit.
    pub fn from_parts(type_name: &str, lexical: &str, unit: Option<&str>) -> Result<Self, ValueError> {
        match type_name {
            "number" => {
                let value = parse_number(lexical)?;
                Ok(TypedValue::Number { value, unit: unit.unwrap_or_default().to_string() })
            }
            "text" => Ok(TypedValue::Text(lexical.to_string())),
            "boolean" => match lexical {
                "true" => Ok(TypedValue::Bool(true)),
                "false" => Ok(TypedValue::Bool(false)),
                other => Err(ValueError::BadBoolean(other.to_string())),
            },
            other => Err(ValueError::UnknownType(other.to_string())),
        }
    }
}

impl fmt::Display for TypedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypedValue::Number { value, unit } if unit.is_empty() => write!(f, "{}", format_number(*value)),
            TypedValue::Number { value, unit } => write!(f, "{} {}", format_number(*value), unit),
            TypedValue::Text(s) => write!(f, "{s:?}"),
            TypedValue::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// Shortest decimal form that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    format!("{v}")
}

pub fn parse_number(s: &str) -> Result<f64, ValueError> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() && s.trim() == s => Ok(v),
        _ => Err(ValueError::BadNumber(s.to_string())),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValueError {
    #[error("not a finite decimal number: {0:?}")]
    BadNumber(String),
    #[error("not a boolean: {0:?}")]
    BadBoolean(String),
    #[error("unknown value type {0:?}")]
    UnknownType(String),
    #[error("malformed timestamp {0:?}: expected ISO-8601 UTC with `Z` suffix")]
    BadTimestamp(String),
}

// JSON form used by event logs: `{"value": 2.0, "unit": "m"}`, a bare number,
// a string or a boolean.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum JsonValue {
    Bool(bool),
    Text(String),
    Bare(f64),
    Number { value: f64, #[serde(default)] unit: String },
}

impl Serialize for TypedValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let json = match self {
            TypedValue::Number { value, unit } => JsonValue::Number { value: *value, unit: unit.clone() },
            TypedValue::Text(s) => JsonValue::Text(s.clone()),
            TypedValue::Bool(b) => JsonValue::Bool(*b),
        };
        json.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TypedValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = match JsonValue::deserialize(deserializer)? {
            JsonValue::Bool(b) => TypedValue::Bool(b),
            JsonValue::Text(s) => TypedValue::Text(s),
            JsonValue::Bare(value) => TypedValue::Number { value, unit: String::new() },
            JsonValue::Number { value, unit } => TypedValue::Number { value, unit },
        };
        if let TypedValue::Number { value, .. } = &value {
            if !value.is_finite() {
                return Err(serde::de::Error::custom("non-finite number"));
            }
        }
        Ok(value)
    }
}

/// Named typed values; names are unique within a group.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AttributeGroup(BTreeMap<String, TypedValue>);

impl AttributeGroup {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, value: TypedValue) -> Self {
        self.0.insert(name.into(), value);
        self
    }

    /// Inserts a value, returning the previous value under that name.
    pub fn insert(&mut self, name: impl Into<String>, value: TypedValue) -> Option<TypedValue> {
        self.0.insert(name.into(), value)
    }

    pub fn get(&self, name: &str) -> Option<&TypedValue> {
        self.0.get(name)
    }

    pub fn remove(&mut self, name: &str) -> Option<TypedValue> {
        self.0.remove(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &TypedValue)> {
        self.0.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &String> {
        self.0.keys()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(String, TypedValue)> for AttributeGroup {
    fn from_iter<I: IntoIterator<Item = (String, TypedValue)>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// The three attribute groups carried by every state and observation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StateAttributes {
    #[serde(default)]
    pub space: AttributeGroup,
    #[serde(default)]
    pub shape: AttributeGroup,
    #[serde(default)]
    pub time: AttributeGroup,
}

/// Which of the three attribute groups an attribute belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupKind {
    Space,
    Shape,
    Time,
}

impl GroupKind {
    pub const ALL: [GroupKind; 3] = [GroupKind::Space, GroupKind::Shape, GroupKind::Time];

    pub fn as_str(self) -> &'static str {
        match self {
            GroupKind::Space => "space",
            GroupKind::Shape => "shape",
            GroupKind::Time => "time",
        }
    }
}

impl StateAttributes {
    pub fn space(space: AttributeGroup) -> Self {
        Self { space, ..Self::default() }
    }

    pub fn group(&self, kind: GroupKind) -> &AttributeGroup {
        match kind {
            GroupKind::Space => &self.space,
            GroupKind::Shape => &self.shape,
            GroupKind::Time => &self.time,
        }
    }

    pub fn group_mut(&mut self, kind: GroupKind) -> &mut AttributeGroup {
        match kind {
            GroupKind::Space => &mut self.space,
            GroupKind::Shape => &mut self.shape,
            GroupKind::Time => &mut self.time,
        }
    }

    /// All attributes keyed by their qualified name, e.g. `space.x`.
    pub fn qualified(&self) -> BTreeMap<String, &TypedValue> {
        GroupKind::ALL
            .iter()
            .flat_map(|&g| self.group(g).iter().map(move |(k, v)| (format!("{}.{}", g.as_str(), k), v)))
            .collect()
    }

    /// Checks attribute names and values. With `require_units`, numbers must carry a unit.
    pub fn check(&self, require_units: bool) -> Result<(), String> {
        for g in GroupKind::ALL {
            for (name, value) in self.group(g).iter() {
                check_attribute(name, value, require_units).map_err(|e| format!("{}.{}", g.as_str(), e))?;
            }
        }
        Ok(())
    }
}

pub(crate) fn check_attribute(name: &str, value: &TypedValue, require_units: bool) -> Result<(), String> {
    if name.is_empty() || name.trim() != name || name.chars().any(char::is_control) {
        return Err(format!("{name:?}: attribute name must be non-empty without surrounding whitespace"));
    }
    if let TypedValue::Number { value, unit } = value {
        if !value.is_finite() {
            return Err(format!("{name}: number must be finite"));
        }
        if require_units && unit.is_empty() {
            return Err(format!("{name}: numeric value requires a unit"));
        }
    }
    Ok(())
}

/// A UTC instant at millisecond precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(DateTime<Utc>);

impl Timestamp {
    /// Milliseconds since the Unix epoch.
    pub fn from_millis(ms: i64) -> Option<Self> {
        Utc.timestamp_millis_opt(ms).single().map(Timestamp)
    }

    pub fn millis(&self) -> i64 {
        self.0.timestamp_millis()
    }

    pub fn plus_millis(&self, ms: i64) -> Option<Self> {
        Self::from_millis(self.millis().checked_add(ms)?)
    }

    pub fn now() -> Self {
        Self::from_millis(Utc::now().timestamp_millis()).expect("current time in range")
    }

    pub fn to_datetime(&self) -> DateTime<Utc> {
        self.0
    }
}

impl From<DateTime<Utc>> for Timestamp {
    fn from(dt: DateTime<Utc>) -> Self {
        Timestamp::from_millis(dt.timestamp_millis()).expect("millisecond truncation stays in range")
    }
}

impl FromStr for Timestamp {
    type Err = ValueError;

    /// Parses `YYYY-MM-DDTHH:MM:SS[.fff]Z`; sub-millisecond digits are truncated.
    fn from_str(s: &str) -> Result<Self, ValueError> {
        if !s.ends_with('Z') {
            return Err(ValueError::BadTimestamp(s.to_string()));
        }
        DateTime::parse_from_rfc3339(s)
            .map(|dt| Timestamp::from(dt.with_timezone(&Utc)))
            .map_err(|_| ValueError::BadTimestamp(s.to_string()))
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.to_rfc3339_opts(SecondsFormat::Millis, true))
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// ISO-8601 duration (`PT#H#M#S`) for a non-negative span of milliseconds.
pub fn format_duration_millis(ms: i64) -> String {
    if ms <= 0 {
        return "PT0S".to_string();
    }
    let hours = ms / 3_600_000;
    let minutes = (ms % 3_600_000) / 60_000;
    let secs = (ms % 60_000) / 1000;
    let frac = ms % 1000;
    let mut out = String::from("PT");
    if hours > 0 {
        out.push_str(&format!("{hours}H"));
    }
    if minutes > 0 {
        out.push_str(&format!("{minutes}M"));
    }
    if secs > 0 || frac > 0 {
        if frac > 0 {
            let f = format!("{frac:03}");
            out.push_str(&format!("{secs}.{}S", f.trim_end_matches('0')));
        } else {
            out.push_str(&format!("{secs}S"));
        }
    }
    out
}
