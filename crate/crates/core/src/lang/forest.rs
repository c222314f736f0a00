use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ast::*;
use super::parser::parse_file;
use super::FrontendError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub file: String,
    pub line: u32,
    pub column: u32,
    pub message: String,
    pub severity: Severity,
}

/// Resolved location of a source entity. Lines and columns are 1-based;
/// the end position is exclusive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SourceSpan {
    pub file: String,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

#[derive(Debug, Clone)]
pub struct ParsedFile {
    /// Path relative to the project root, `/`-separated.
    pub path: String,
    pub text: String,
    pub ast: SourceFile,
}

#[derive(Debug, Clone)]
pub struct SyntaxForest {
    pub root: PathBuf,
    pub files: Vec<ParsedFile>,
    pub diagnostics: Vec<Diagnostic>,
}

pub const EXTENSION: &str = "mini";

fn collect_sources(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), FrontendError> {
    let entries = fs::read_dir(dir).map_err(|e| FrontendError::Io { path: dir.to_path_buf(), message: e.to_string() })?;
    for entry in entries {
        let entry = entry.map_err(|e| FrontendError::Io { path: dir.to_path_buf(), message: e.to_string() })?;
        let path = entry.path();
        if path.is_dir() {
            collect_sources(&path, out)?;
        } else if path.extension().is_some_and(|e| e == EXTENSION) {
            out.push(path);
        }
    }
    Ok(())
}

/// Parses every `.mini` file below `root`, in path order.
pub fn parse_project(root: &Path) -> Result<SyntaxForest, FrontendError> {
    if !root.is_dir() {
        return Err(FrontendError::Io {
            path: root.to_path_buf(),
            message: "not a directory".into(),
        });
    }
    let mut paths = Vec::new();
    collect_sources(root, &mut paths)?;
    paths.sort();
    if paths.is_empty() {
        return Err(FrontendError::EmptyProject(root.to_path_buf()));
    }
    let mut sources = Vec::with_capacity(paths.len());
    for path in &paths {
        let text = fs::read_to_string(path).map_err(|e| FrontendError::Io { path: path.clone(), message: e.to_string() })?;
        let rel = path
            .strip_prefix(root)
            .unwrap_or(path)
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect::<Vec<_>>()
            .join("/");
        sources.push((rel, text));
    }
    Ok(parse_sources(root.to_path_buf(), sources))
}

/// Parses in-memory sources; `sources` pairs a relative path with its text.
pub fn parse_sources(root: PathBuf, sources: Vec<(String, String)>) -> SyntaxForest {
    let parsed: Vec<(ParsedFile, Option<Diagnostic>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = sources
            .into_iter()
            .enumerate()
            .map(|(idx, (path, text))| {
                scope.spawn(move || {
                    let (ast, error) = parse_file(&text, FileId(idx as u32));
                    let diagnostic = error.map(|e| Diagnostic {
                        file: path.clone(),
                        line: e.pos.line,
                        column: e.pos.col,
                        message: e.message,
                        severity: Severity::Error,
                    });
                    (ParsedFile { path, text, ast }, diagnostic)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("parser thread panicked")).collect()
    });
    let mut files = Vec::with_capacity(parsed.len());
    let mut diagnostics = Vec::new();
    for (file, diagnostic) in parsed {
        diagnostics.extend(diagnostic);
        files.push(file);
    }
    let mut forest = SyntaxForest { root, files, diagnostics };
    let semantic = forest.check_declarations();
    forest.diagnostics.extend(semantic);
    forest
}

pub const HTTP_VERBS: &[&str] = &["GET", "POST", "PUT", "DELETE"];

impl SyntaxForest {
    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(|d| d.severity == Severity::Error)
    }

    pub fn path_of(&self, file: FileId) -> &str {
        &self.files[file.0 as usize].path
    }

    pub fn resolve(&self, span: Span) -> SourceSpan {
        SourceSpan {
            file: self.path_of(span.file).to_string(),
            start_line: span.start.line,
            start_col: span.start.col,
            end_line: span.end.line,
            end_col: span.end.col,
        }
    }

    pub fn text_of(&self, span: Span) -> &str {
        &self.files[span.file.0 as usize].text[span.start.offset..span.end.offset]
    }

    fn diagnostic(&self, span: Span, message: String) -> Diagnostic {
        Diagnostic {
            file: self.path_of(span.file).to_string(),
            line: span.start.line,
            column: span.start.col,
            message,
            severity: Severity::Error,
        }
    }

    /// Uniqueness of classes, methods and parameters plus well-formed
    /// endpoint attributes.
    fn check_declarations(&self) -> Vec<Diagnostic> {
        let mut diagnostics = Vec::new();
        let mut classes: BTreeSet<(String, String)> = BTreeSet::new();
        let mut methods: BTreeMap<QualifiedName, Span> = BTreeMap::new();
        for file in &self.files {
            for ns in &file.ast.namespaces {
                for class in &ns.classes {
                    if !classes.insert((ns.name.clone(), class.name.clone())) {
                        diagnostics.push(
                            self.diagnostic(class.span, format!("duplicate class {}.{}", ns.name, class.name)),
                        );
                        continue;
                    }
                    for method in &class.methods {
                        let qname = QualifiedName::new(&ns.name, &class.name, &method.name);
                        if methods.insert(qname.clone(), method.span).is_some() {
                            diagnostics.push(self.diagnostic(method.span, format!("duplicate method {qname}")));
                        }
                        let mut seen = BTreeSet::new();
                        for param in &method.params {
                            if !seen.insert(param.name.as_str()) {
                                diagnostics.push(
                                    self.diagnostic(param.span, format!("duplicate parameter `{}`", param.name)),
                                );
                            }
                        }
                        for attr in method.attrs.iter().filter(|a| a.name == "endpoint") {
                            let valid = attr.args.len() == 2
                                && HTTP_VERBS.contains(&attr.args[0].as_str())
                                && attr.args[1].starts_with('/');
                            if !valid {
                                diagnostics.push(self.diagnostic(
                                    attr.span,
                                    "endpoint attribute expects (\"GET|POST|PUT|DELETE\", \"/route\")".into(),
                                ));
                            }
                        }
                        if method.attrs.iter().filter(|a| a.name == "endpoint").count() > 1 {
                            diagnostics.push(self.diagnostic(method.span, "multiple endpoint attributes".into()));
                        }
                    }
                }
            }
        }
        diagnostics
    }
}
