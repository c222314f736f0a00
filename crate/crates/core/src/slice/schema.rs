use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SliceError;

/// Name of the built-in containment link kind. Hierarchical closure is
/// defined over links of this kind only.
pub const CONTAINS: &str = "contains";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueType {
    Text,
    Integer,
    Flag,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttrValue {
    Flag(bool),
    Integer(i64),
    Text(String),
}

impl AttrValue {
    pub fn value_type(&self) -> ValueType {
        match self {
            AttrValue::Text(_) => ValueType::Text,
            AttrValue::Integer(_) => ValueType::Integer,
            AttrValue::Flag(_) => ValueType::Flag,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            AttrValue::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        match self {
            AttrValue::Integer(v) => Some(*v),
            _ => None,
        }
    }
}

impl From<&str> for AttrValue {
    fn from(s: &str) -> Self {
        AttrValue::Text(s.to_string())
    }
}

impl From<String> for AttrValue {
    fn from(s: String) -> Self {
        AttrValue::Text(s)
    }
}

impl From<i64> for AttrValue {
    fn from(v: i64) -> Self {
        AttrValue::Integer(v)
    }
}

impl From<bool> for AttrValue {
    fn from(v: bool) -> Self {
        AttrValue::Flag(v)
    }
}

pub type Attributes = BTreeMap<String, AttrValue>;

/// A named kind of element or link together with the attributes its
/// instances may carry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Kind {
    pub name: String,
    pub attributes: BTreeMap<String, ValueType>,
}

impl Kind {
    pub fn new(name: impl Into<String>) -> Self {
        Kind { name: name.into(), attributes: BTreeMap::new() }
    }

    /// Adds an attribute declaration. Panics on a duplicate name since kinds
    /// are declared statically by providers.
    pub fn with_attr(mut self, name: &str, ty: ValueType) -> Self {
        let previous = self.attributes.insert(name.to_string(), ty);
        assert!(previous.is_none(), "attribute `{name}` declared twice on kind `{}`", self.name);
        self
    }

    /// Every present attribute must be declared with a matching type.
    /// Declared attributes are optional.
    pub fn conforms(&self, attrs: &Attributes) -> bool {
        attrs
            .iter()
            .all(|(name, value)| self.attributes.get(name) == Some(&value.value_type()))
    }
}

pub type ElementKind = Kind;
pub type LinkKind = Kind;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    element_kinds: BTreeMap<String, ElementKind>,
    link_kinds: BTreeMap<String, LinkKind>,
}

impl Schema {
    /// Builds a schema from element and link kinds. The `contains` link kind
    /// is always added and may not be redeclared.
    pub fn define(element_kinds: Vec<ElementKind>, link_kinds: Vec<LinkKind>) -> Result<Self, SliceError> {
        let mut elements = BTreeMap::new();
        for kind in element_kinds {
            if kind.name.is_empty() {
                return Err(SliceError::EmptyKindName);
            }
            if elements.contains_key(&kind.name) {
                return Err(SliceError::DuplicateKind(kind.name));
            }
            elements.insert(kind.name.clone(), kind);
        }
        let mut links = BTreeMap::new();
        links.insert(CONTAINS.to_string(), Kind::new(CONTAINS));
        for kind in link_kinds {
            if kind.name.is_empty() {
                return Err(SliceError::EmptyKindName);
            }
            if links.contains_key(&kind.name) {
                return Err(SliceError::DuplicateKind(kind.name));
            }
            links.insert(kind.name.clone(), kind);
        }
        Ok(Schema { element_kinds: elements, link_kinds: links })
    }

    pub fn element_kind(&self, name: &str) -> Option<&ElementKind> {
        self.element_kinds.get(name)
    }

    pub fn link_kind(&self, name: &str) -> Option<&LinkKind> {
        self.link_kinds.get(name)
    }

    pub fn element_kind_names(&self) -> impl Iterator<Item = &str> {
        self.element_kinds.keys().map(String::as_str)
    }

    pub fn link_kind_names(&self) -> impl Iterator<Item = &str> {
        self.link_kinds.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_schema_gets_contains() {
        let schema = Schema::define(vec![Kind::new("Method")], vec![Kind::new("calls")]).unwrap();
        assert_eq!(schema.element_kind_names().collect::<Vec<_>>(), vec!["Method"]);
        assert_eq!(schema.link_kind_names().collect::<Vec<_>>(), vec!["calls", "contains"]);
    }

    #[test]
    fn empty_schema_has_only_contains() {
        let schema = Schema::define(vec![], vec![]).unwrap();
        assert_eq!(schema.element_kind_names().count(), 0);
        assert_eq!(schema.link_kind_names().collect::<Vec<_>>(), vec![CONTAINS]);
    }

    #[test]
    fn duplicate_kinds_rejected() {
        let err = Schema::define(vec![Kind::new("Method"), Kind::new("Method")], vec![]).unwrap_err();
        assert!(matches!(err, SliceError::DuplicateKind(name) if name == "Method"));
        let err = Schema::define(vec![], vec![Kind::new(CONTAINS)]).unwrap_err();
        assert!(matches!(err, SliceError::DuplicateKind(_)));
        assert!(matches!(Schema::define(vec![Kind::new("")], vec![]), Err(SliceError::EmptyKindName)));
    }

    #[test]
    fn conformance_checks_types() {
        let kind = Kind::new("Method").with_attr("name", ValueType::Text).with_attr("line", ValueType::Integer);
        let mut attrs = Attributes::new();
        attrs.insert("name".into(), "f".into());
        assert!(kind.conforms(&attrs));
        attrs.insert("line".into(), AttrValue::Text("3".into()));
        assert!(!kind.conforms(&attrs));
        attrs.insert("line".into(), 3.into());
        attrs.insert("other".into(), true.into());
        assert!(!kind.conforms(&attrs));
    }
}
