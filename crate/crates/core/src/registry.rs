//! Name-keyed registries of interchangeable strategies.
//!
//! Models, functionals and experiment kinds are each a family of variants
//! behind one trait. A registry maps the variant name used in configs to a
//! builder for the trait object, so new variants can be added without
//! touching the dispatch code.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub struct Registry<T> {
    kind: &'static str,
    entries: BTreeMap<String, T>,
}

impl<T> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Registry {
            kind,
            entries: BTreeMap::new(),
        }
    }

    /// Register `entry` under `name`, replacing any previous entry.
    pub fn register(&mut self, name: impl Into<String>, entry: T) -> &mut Self {
        self.entries.insert(name.into(), entry);
        self
    }

    pub fn get(&self, name: &str) -> Result<&T> {
        self.entries.get(name).ok_or_else(|| Error::Unknown {
            kind: self.kind,
            name: name.to_string(),
            known: self.names().join(", "),
        })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }
}

/// A `{"type": name, ...params}` JSON object naming a registered variant.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentSpec {
    pub kind: String,
    pub params: Value,
}

impl ComponentSpec {
    pub fn new(kind: impl Into<String>, params: Value) -> Self {
        ComponentSpec {
            kind: kind.into(),
            params,
        }
    }

    pub fn bare(kind: impl Into<String>) -> Self {
        Self::new(kind, Value::Object(Map::new()))
    }
}

impl<'de> Deserialize<'de> for ComponentSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let mut map = Map::<String, Value>::deserialize(d)?;
        let kind = match map.remove("type") {
            Some(Value::String(s)) => s,
            Some(_) => return Err(serde::de::Error::custom("`type` must be a string")),
            None => return Err(serde::de::Error::missing_field("type")),
        };
        Ok(ComponentSpec {
            kind,
            params: Value::Object(map),
        })
    }
}

impl Serialize for ComponentSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = match &self.params {
            Value::Object(m) => m.clone(),
            _ => Map::new(),
        };
        map.insert("type".into(), Value::String(self.kind.clone()));
        map.serialize(s)
    }
}

/// Strictly deserialize variant parameters, reporting failures against `field`.
pub fn parse_params<T: DeserializeOwned>(field: &str, params: &Value) -> Result<T> {
    T::deserialize(params).map_err(|e| Error::config(field, e.to_string()))
}
