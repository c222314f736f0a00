use std::collections::BTreeMap;

use super::{
    Attributes, Children, Element, ElementId, FactProvider, Link, LinkId, ProviderError, Schema, CONTAINS,
};

/// Fact provider over an explicit in-memory graph. Useful for tests and for
/// hosting facts that were computed elsewhere.
#[derive(Debug, Clone)]
pub struct MemoryProvider {
    schema: Schema,
    elements: BTreeMap<ElementId, Element>,
    parents: BTreeMap<ElementId, ElementId>,
    children: BTreeMap<ElementId, Vec<ElementId>>,
    roots: Vec<ElementId>,
    links: BTreeMap<(String, ElementId), Vec<Link>>,
    link_count: usize,
}

impl MemoryProvider {
    pub fn new(schema: Schema) -> Self {
        MemoryProvider {
            schema,
            elements: BTreeMap::new(),
            parents: BTreeMap::new(),
            children: BTreeMap::new(),
            roots: Vec::new(),
            links: BTreeMap::new(),
            link_count: 0,
        }
    }

    pub fn add_element(&mut self, id: &str, kind: &str, parent: Option<&str>) -> &mut Self {
        let mut attributes = Attributes::new();
        let name = id.rsplit('/').next().unwrap_or(id);
        attributes.insert("name".into(), name.into());
        self.add_element_with(id, kind, parent, attributes)
    }

    pub fn add_element_with(
        &mut self,
        id: &str,
        kind: &str,
        parent: Option<&str>,
        attributes: Attributes,
    ) -> &mut Self {
        let id = ElementId::new(id);
        assert!(!self.elements.contains_key(&id), "duplicate element {id}");
        match parent {
            Some(parent) => {
                let parent = ElementId::new(parent);
                assert!(self.elements.contains_key(&parent), "parent {parent} must be added first");
                self.children.entry(parent.clone()).or_default().push(id.clone());
                self.parents.insert(id.clone(), parent);
            }
            None => self.roots.push(id.clone()),
        }
        self.elements.insert(id.clone(), Element { id, kind: kind.to_string(), attributes });
        self
    }

    pub fn add_link(&mut self, kind: &str, source: &str, target: &str) -> &mut Self {
        assert_ne!(kind, CONTAINS, "containment is derived from parents");
        let link = Link {
            id: LinkId(format!("{kind}:{source}->{target}#{}", self.link_count)),
            kind: kind.to_string(),
            source: ElementId::new(source),
            target: ElementId::new(target),
            attributes: Attributes::new(),
        };
        self.link_count += 1;
        self.links.entry((kind.to_string(), link.source.clone())).or_default().push(link);
        self
    }

    fn get(&self, id: &ElementId) -> Result<&Element, ProviderError> {
        self.elements.get(id).ok_or_else(|| ProviderError::UnknownElement(id.clone()))
    }
}

impl FactProvider for MemoryProvider {
    fn schema(&self) -> &Schema {
        &self.schema
    }

    fn load_roots(&self) -> Result<Vec<Element>, ProviderError> {
        Ok(self.roots.iter().map(|id| self.elements[id].clone()).collect())
    }

    fn load_children(&self, id: &ElementId) -> Result<Children, ProviderError> {
        self.get(id)?;
        let ids = self.children.get(id).map(Vec::as_slice).unwrap_or_default();
        Ok(Children {
            elements: ids.iter().map(|c| self.elements[c].clone()).collect(),
            links: ids.iter().map(|c| Link::contains(id, c)).collect(),
        })
    }

    fn load_links(&self, kind: &str, id: &ElementId) -> Result<Vec<Link>, ProviderError> {
        self.get(id)?;
        Ok(self.links.get(&(kind.to_string(), id.clone())).cloned().unwrap_or_default())
    }

    fn load_element(&self, id: &ElementId) -> Result<Element, ProviderError> {
        self.get(id).cloned()
    }

    fn load_parent(&self, id: &ElementId) -> Result<Option<ElementId>, ProviderError> {
        self.get(id)?;
        Ok(self.parents.get(id).cloned())
    }
}
