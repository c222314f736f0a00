//! Catalog of `@endpoint` handlers.

use crate::lang::METHOD;
use crate::slice::{AttrValue, Element, Slice};

use super::{element_span, navigate, ActionTable, TreeItem};

#[derive(Clone)]
pub struct EndpointCatalog {
    /// `(route, verb, handler)` sorted by route then verb.
    entries: Vec<(String, String, Element)>,
}

impl EndpointCatalog {
    pub fn new(slice: &Slice) -> Self {
        let mut entries: Vec<(String, String, Element)> = slice
            .query_elements(Some(METHOD), None)
            .into_iter()
            .filter_map(|e| {
                let verb = e.attr("verb").and_then(AttrValue::as_text)?;
                let route = e.attr("route").and_then(AttrValue::as_text)?;
                Some((route.to_string(), verb.to_string(), e.clone()))
            })
            .collect();
        entries.sort_by(|a, b| (&a.0, &a.1, &a.2.id).cmp(&(&b.0, &b.1, &b.2.id)));
        EndpointCatalog { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub(crate) fn render(&self, table: &mut ActionTable) -> Vec<TreeItem> {
        self.entries
            .iter()
            .map(|(route, verb, element)| TreeItem {
                label: format!("{verb} {route}"),
                element_id: Some(element.id.clone()),
                kind: Some(element.kind.clone()),
                action: element_span(element).map(|span| table.register(navigate(span))),
                children: Vec::new(),
            })
            .collect()
    }
}
