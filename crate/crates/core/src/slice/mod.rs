//! Attributed multigraph fact model.
//!
//! A [`Slice`] is an immutable directed multigraph (loops allowed) whose nodes
//! are program [`Element`]s and whose edges are [`Link`]s. Slices are always
//! closed under the `contains` hierarchy: including an element pulls in every
//! containment ancestor.

mod export;
mod memory;
mod provider;
mod schema;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use export::{to_dot, to_json, SliceDocument};
pub use memory::MemoryProvider;
pub use provider::{children, CachedProvider, Children, ExtractionStats, FactProvider, ProviderError};
pub use schema::{AttrValue, Attributes, ElementKind, Kind, LinkKind, Schema, ValueType, CONTAINS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SliceError {
    #[error("duplicate kind `{0}`")]
    DuplicateKind(String),
    #[error("kind names must be non-empty")]
    EmptyKindName,
    #[error("unknown element `{0}`")]
    UnknownElement(ElementId),
    #[error("provider failure: {0}")]
    Provider(ProviderError),
}

impl From<ProviderError> for SliceError {
    fn from(err: ProviderError) -> Self {
        match err {
            ProviderError::UnknownElement(id) => SliceError::UnknownElement(id),
            other => SliceError::Provider(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementId(pub String);

impl ElementId {
    pub fn new(id: impl Into<String>) -> Self {
        ElementId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ElementId {
    fn from(s: &str) -> Self {
        ElementId(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkId(pub String);

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Element {
    pub id: ElementId,
    pub kind: String,
    #[serde(rename = "attrs")]
    pub attributes: Attributes,
}

impl Element {
    pub fn attr(&self, name: &str) -> Option<&AttrValue> {
        self.attributes.get(name)
    }

    pub fn name(&self) -> &str {
        self.attr("name").and_then(AttrValue::as_text).unwrap_or(self.id.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub id: LinkId,
    pub kind: String,
    pub source: ElementId,
    pub target: ElementId,
    #[serde(rename = "attrs")]
    pub attributes: Attributes,
}

impl Link {
    pub fn contains(parent: &ElementId, child: &ElementId) -> Self {
        Link {
            id: LinkId(format!("{CONTAINS}:{parent}->{child}")),
            kind: CONTAINS.to_string(),
            source: parent.clone(),
            target: child.clone(),
            attributes: Attributes::new(),
        }
    }
}

/// Immutable slice of program facts. Every operation returns a new value.
#[derive(Clone)]
pub struct Slice {
    provider: Arc<dyn FactProvider>,
    elements: BTreeMap<ElementId, Element>,
    links: BTreeMap<LinkId, Link>,
}

impl PartialEq for Slice {
    fn eq(&self, other: &Self) -> bool {
        self.elements == other.elements && self.links == other.links
    }
}

impl fmt::Debug for Slice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Slice")
            .field("elements", &self.elements.keys().collect::<Vec<_>>())
            .field("links", &self.links.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Slice {
    pub fn empty(provider: Arc<dyn FactProvider>) -> Self {
        Slice { provider, elements: BTreeMap::new(), links: BTreeMap::new() }
    }

    /// Enumerates every root-reachable element, keeps those passing `filter`
    /// and closes the result under `contains`-ancestors.
    pub fn build(
        provider: Arc<dyn FactProvider>,
        filter: impl Fn(&Element) -> bool,
    ) -> Result<Self, SliceError> {
        let mut parents: BTreeMap<ElementId, ElementId> = BTreeMap::new();
        let mut all: BTreeMap<ElementId, Element> = BTreeMap::new();
        let mut stack: Vec<Element> = provider.load_roots()?;
        stack.reverse();
        while let Some(element) = stack.pop() {
            if all.contains_key(&element.id) {
                continue;
            }
            let children = provider.load_children(&element.id)?;
            for child in children.elements.into_iter().rev() {
                parents.insert(child.id.clone(), element.id.clone());
                stack.push(child);
            }
            all.insert(element.id.clone(), element);
        }

        let mut members: BTreeSet<ElementId> = BTreeSet::new();
        for (id, element) in &all {
            if filter(element) {
                let mut cursor = Some(id.clone());
                while let Some(current) = cursor {
                    if !members.insert(current.clone()) {
                        break;
                    }
                    cursor = parents.get(&current).cloned();
                }
            }
        }

        let elements = members
            .into_iter()
            .map(|id| {
                let element = all.remove(&id).expect("member was enumerated");
                (id, element)
            })
            .collect();
        let mut slice = Slice { provider, elements, links: BTreeMap::new() };
        slice.links = slice.collect_links()?;
        Ok(slice)
    }

    /// Returns a slice containing `id` and all of its `contains`-ancestors in
    /// addition to the current members.
    pub fn include(&self, id: &ElementId) -> Result<Self, SliceError> {
        if self.elements.contains_key(id) {
            return Ok(self.clone());
        }
        let mut elements = self.elements.clone();
        let mut cursor = Some(id.clone());
        while let Some(current) = cursor {
            if elements.contains_key(&current) {
                break;
            }
            let element = self.provider.load_element(&current)?;
            elements.insert(current.clone(), element);
            cursor = self.provider.load_parent(&current)?;
        }
        let mut slice = Slice { provider: self.provider.clone(), elements, links: BTreeMap::new() };
        slice.links = slice.collect_links()?;
        Ok(slice)
    }

    /// Narrows the slice to the elements passing `keep` plus their ancestors.
    pub fn restrict(&self, keep: impl Fn(&Element) -> bool) -> Result<Self, SliceError> {
        let mut members = BTreeSet::new();
        for element in self.elements.values().filter(|e| keep(e)) {
            let mut cursor = Some(element.id.clone());
            while let Some(current) = cursor {
                if !members.insert(current.clone()) {
                    break;
                }
                cursor = self.provider.load_parent(&current)?;
            }
        }
        let elements = self
            .elements
            .iter()
            .filter(|(id, _)| members.contains(*id))
            .map(|(id, e)| (id.clone(), e.clone()))
            .collect::<BTreeMap<_, _>>();
        let links = self
            .links
            .iter()
            .filter(|(_, l)| elements.contains_key(&l.source) && elements.contains_key(&l.target))
            .map(|(id, l)| (id.clone(), l.clone()))
            .collect();
        Ok(Slice { provider: self.provider.clone(), elements, links })
    }

    fn collect_links(&self) -> Result<BTreeMap<LinkId, Link>, SliceError> {
        let mut links = BTreeMap::new();
        let kinds: Vec<String> = self
            .provider
            .schema()
            .link_kind_names()
            .filter(|k| *k != CONTAINS)
            .map(str::to_string)
            .collect();
        for id in self.elements.keys() {
            for link in self.provider.load_children(id)?.links {
                if link.kind == CONTAINS && self.elements.contains_key(&link.target) {
                    links.insert(link.id.clone(), link);
                }
            }
            for kind in &kinds {
                for link in self.provider.load_links(kind, id)? {
                    if self.elements.contains_key(&link.target) {
                        links.insert(link.id.clone(), link);
                    }
                }
            }
        }
        Ok(links)
    }

    pub fn provider(&self) -> &Arc<dyn FactProvider> {
        &self.provider
    }

    pub fn schema(&self) -> &Schema {
        self.provider.schema()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, id: &ElementId) -> bool {
        self.elements.contains_key(id)
    }

    pub fn element(&self, id: &ElementId) -> Option<&Element> {
        self.elements.get(id)
    }

    pub fn elements(&self) -> impl Iterator<Item = &Element> {
        self.elements.values()
    }

    pub fn links(&self) -> impl Iterator<Item = &Link> {
        self.links.values()
    }

    /// Member elements matching `kind` and `predicate`, ordered by id.
    pub fn query_elements(
        &self,
        kind: Option<&str>,
        predicate: Option<&dyn Fn(&Attributes) -> bool>,
    ) -> Vec<&Element> {
        self.elements
            .values()
            .filter(|e| kind.is_none_or(|k| e.kind == k))
            .filter(|e| predicate.is_none_or(|p| p(&e.attributes)))
            .collect()
    }

    /// Member links matching every given filter, ordered by id.
    pub fn query_links(
        &self,
        kind: Option<&str>,
        source: Option<&ElementId>,
        target: Option<&ElementId>,
    ) -> Vec<&Link> {
        self.links
            .values()
            .filter(|l| kind.is_none_or(|k| l.kind == k))
            .filter(|l| source.is_none_or(|s| &l.source == s))
            .filter(|l| target.is_none_or(|t| &l.target == t))
            .collect()
    }

    /// Member children of `id` in the containment hierarchy.
    pub fn children_of(&self, id: &ElementId) -> Vec<&Element> {
        self.query_links(Some(CONTAINS), Some(id), None)
            .into_iter()
            .filter_map(|l| self.elements.get(&l.target))
            .collect()
    }

    /// Members without a member parent.
    pub fn roots(&self) -> Vec<&Element> {
        let children: BTreeSet<&ElementId> = self
            .links
            .values()
            .filter(|l| l.kind == CONTAINS)
            .map(|l| &l.target)
            .collect();
        self.elements.values().filter(|e| !children.contains(&e.id)).collect()
    }

    /// Checks link-endpoint membership and ancestor closure against the
    /// provider's hierarchy.
    pub fn check_closure(&self) -> Result<(), String> {
        for link in self.links.values() {
            if !self.contains(&link.source) || !self.contains(&link.target) {
                return Err(format!("link {} has a non-member endpoint", link.id));
            }
        }
        for id in self.elements.keys() {
            let parent = self.provider.load_parent(id).map_err(|e| e.to_string())?;
            if let Some(parent) = parent {
                if !self.contains(&parent) {
                    return Err(format!("ancestor {parent} of {id} missing"));
                }
                let link = Link::contains(&parent, id);
                if !self.links.contains_key(&link.id) {
                    return Err(format!("containment link {} missing", link.id));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn provider() -> Arc<dyn FactProvider> {
        let mut p = MemoryProvider::new(
            Schema::define(
                vec![Kind::new("Namespace"), Kind::new("Class"), Kind::new("Method")],
                vec![Kind::new("calls")],
            )
            .unwrap(),
        );
        p.add_element("N", "Namespace", None);
        p.add_element("N/C", "Class", Some("N"));
        p.add_element("N/C/f", "Method", Some("N/C"));
        p.add_element("N/C/g", "Method", Some("N/C"));
        p.add_element("N/D", "Class", Some("N"));
        p.add_element("N/D/h", "Method", Some("N/D"));
        p.add_link("calls", "N/C/f", "N/C/g");
        p.add_link("calls", "N/C/f", "N/C/g");
        p.add_link("calls", "N/C/g", "N/C/g");
        p.add_link("calls", "N/C/g", "N/D/h");
        Arc::new(p)
    }

    #[test]
    fn include_pulls_in_ancestors() {
        let empty = Slice::empty(provider());
        let s = empty.include(&"N/C/f".into()).unwrap();
        let ids: Vec<_> = s.elements().map(|e| e.id.as_str().to_string()).collect();
        assert_eq!(ids, vec!["N", "N/C", "N/C/f"]);
        assert_eq!(s.query_links(Some(CONTAINS), None, None).len(), 2);
        assert_eq!(s.include(&"N/C/f".into()).unwrap(), s);
        assert!(matches!(s.include(&"nope".into()), Err(SliceError::UnknownElement(_))));
        s.check_closure().unwrap();
    }

    #[test]
    fn multigraph_links_and_loops_survive() {
        let s = Slice::build(provider(), |_| true).unwrap();
        let calls = s.query_links(Some("calls"), None, None);
        assert_eq!(calls.len(), 4);
        assert_eq!(s.query_links(Some("calls"), Some(&"N/C/f".into()), Some(&"N/C/g".into())).len(), 2);
        assert_eq!(s.query_links(Some("calls"), Some(&"N/C/g".into()), Some(&"N/C/g".into())).len(), 1);
        assert!(s.query_links(Some("calls"), Some(&"N/D/h".into()), None).is_empty());
    }

    #[test]
    fn restrict_keeps_closure() {
        let s = Slice::build(provider(), |_| true).unwrap();
        let narrowed = s.restrict(|e| e.id.as_str() == "N/D/h").unwrap();
        assert_eq!(narrowed.len(), 3);
        assert!(narrowed.query_links(Some("calls"), None, None).is_empty());
        narrowed.check_closure().unwrap();
        assert!(Slice::build(provider(), |_| false).unwrap().is_empty());
    }
}
