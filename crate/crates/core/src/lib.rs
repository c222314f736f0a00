//! Program comprehension workbench core.
//!
//! Fact slices over a parsed MiniLang project, a data-flow framework with
//! call-graph and dependency analyses, symbolic execution with an automata
//! based string solver, and MVC tool controllers.

pub mod analysis;
pub mod lang;
pub mod regex;
pub mod slice;
pub mod symexec;
pub mod tools;
