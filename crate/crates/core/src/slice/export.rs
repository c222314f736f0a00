use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{Element, Link, Slice, CONTAINS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceDocument {
    pub elements: Vec<Element>,
    pub links: Vec<Link>,
}

pub fn to_json(slice: &Slice) -> SliceDocument {
    SliceDocument {
        elements: slice.elements().cloned().collect(),
        links: slice.links().cloned().collect(),
    }
}

pub(crate) fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// DOT rendering of the containment hierarchy plus links of `link_kind`.
pub fn to_dot(slice: &Slice, link_kind: Option<&str>) -> String {
    let mut out = String::from("digraph slice {\n");
    for element in slice.elements() {
        let _ = writeln!(
            out,
            "  \"{}\" [label=\"{} {}\"];",
            dot_escape(element.id.as_str()),
            dot_escape(&element.kind),
            dot_escape(element.name())
        );
    }
    for link in slice.links() {
        let style = if link.kind == CONTAINS {
            " style=dashed"
        } else if Some(link.kind.as_str()) == link_kind {
            ""
        } else {
            continue;
        };
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"{}\"{style}];",
            dot_escape(link.source.as_str()),
            dot_escape(link.target.as_str()),
            dot_escape(&link.kind)
        );
    }
    out.push_str("}\n");
    out
}
