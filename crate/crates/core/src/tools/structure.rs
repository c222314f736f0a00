//! Containment-tree browser over a slice.

use std::collections::BTreeSet;

use crate::slice::{Element, ElementId, Slice};

use super::{element_span, navigate, ActionKind, ActionTable, Handled, ToolError, TreeItem};

#[derive(Clone)]
pub struct StructureBrowser {
    slice: Slice,
    expanded: BTreeSet<ElementId>,
}

impl StructureBrowser {
    /// Starts with the roots expanded one level.
    pub fn new(slice: Slice) -> Result<Self, ToolError> {
        if slice.is_empty() {
            return Err(ToolError::EmptySlice);
        }
        let expanded = slice.roots().into_iter().map(|e| e.id.clone()).collect();
        Ok(StructureBrowser { slice, expanded })
    }

    pub fn slice(&self) -> &Slice {
        &self.slice
    }

    fn item(&self, element: &Element, table: &mut ActionTable) -> TreeItem {
        let children = self.slice.children_of(&element.id);
        let mut item = TreeItem {
            label: element.name().to_string(),
            element_id: Some(element.id.clone()),
            kind: Some(element.kind.clone()),
            action: None,
            children: Vec::new(),
        };
        if children.is_empty() {
            item.action = element_span(element).map(|span| table.register(navigate(span)));
        } else if self.expanded.contains(&element.id) {
            item.action = Some(table.register(ActionKind::Collapse { node: element.id.clone() }));
            item.children = children.into_iter().map(|c| self.item(c, table)).collect();
        } else {
            item.action = Some(table.register(ActionKind::Expand { node: element.id.clone() }));
        }
        item
    }

    pub(crate) fn render(&self, table: &mut ActionTable) -> Vec<TreeItem> {
        self.slice.roots().into_iter().map(|r| self.item(r, table)).collect()
    }

    pub(crate) fn handle(&mut self, action: &ActionKind) -> Result<Handled, ToolError> {
        match action {
            ActionKind::Expand { node } => {
                self.expanded.insert(node.clone());
            }
            ActionKind::Collapse { node } => {
                self.expanded.remove(node);
            }
            _ => return Err(ToolError::BadOption("unsupported action for the structure browser".into())),
        }
        Ok(Handled::Changed)
    }
}
