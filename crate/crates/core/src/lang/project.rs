//! A parsed project with its fact provider and the lazily filled
//! method-to-CFG cache.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};

use super::ast::{Method, QualifiedName};
use super::cfg::{ControlFlowGraph, Site, Statement, StmtId, StmtKind, Var};
use super::facts::{method_at, MiniLangFacts, ProjectIndex};
use super::forest::{parse_project, parse_sources, SourceSpan, SyntaxForest};
use super::lower::lower_method;
use super::FrontendError;
use crate::slice::{CachedProvider, ElementId, FactProvider, Slice, SliceError};

type CfgCell = Arc<OnceLock<Result<Arc<ControlFlowGraph>, FrontendError>>>;

/// Entities that [`Project::source_span`] can locate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpanTarget {
    Element(ElementId),
    Statement(ElementId, StmtId),
    Variable(ElementId, Var),
    File(String),
}

pub struct Project {
    name: String,
    forest: Arc<SyntaxForest>,
    index: Arc<ProjectIndex>,
    facts: Arc<CachedProvider<MiniLangFacts>>,
    cfgs: Mutex<HashMap<ElementId, CfgCell>>,
    lowerings: Mutex<BTreeMap<ElementId, usize>>,
}

impl std::fmt::Debug for Project {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Project").field("name", &self.name).field("root", &self.forest.root).finish()
    }
}

impl Project {
    /// Parses the directory; the project is named after its last component.
    pub fn open(root: &Path) -> Result<Self, FrontendError> {
        let forest = parse_project(root)?;
        let name = root
            .canonicalize()
            .ok()
            .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .unwrap_or_else(|| "project".into());
        Self::from_forest(&name, forest)
    }

    pub fn from_sources(name: &str, sources: Vec<(String, String)>) -> Result<Self, FrontendError> {
        Self::from_forest(name, parse_sources(PathBuf::from(name), sources))
    }

    /// Fails with `InvalidForest` when the forest carries error diagnostics.
    pub fn from_forest(name: &str, forest: SyntaxForest) -> Result<Self, FrontendError> {
        if forest.has_errors() {
            return Err(FrontendError::InvalidForest(forest.diagnostics));
        }
        let forest = Arc::new(forest);
        let index = Arc::new(ProjectIndex::build(name, &forest));
        let facts = Arc::new(CachedProvider::new(MiniLangFacts::new(forest.clone(), index.clone())));
        Ok(Project {
            name: name.to_string(),
            forest,
            index,
            facts,
            cfgs: Mutex::new(HashMap::new()),
            lowerings: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn forest(&self) -> &SyntaxForest {
        &self.forest
    }

    pub fn index(&self) -> &ProjectIndex {
        &self.index
    }

    pub fn facts(&self) -> &CachedProvider<MiniLangFacts> {
        &self.facts
    }

    pub fn provider(&self) -> Arc<dyn FactProvider> {
        self.facts.clone()
    }

    pub fn full_slice(&self) -> Result<Slice, SliceError> {
        Slice::build(self.provider(), |_| true)
    }

    pub fn method_ast(&self, id: &ElementId) -> Option<&Method> {
        self.index.method_ref(id).map(|r| method_at(&self.forest, r))
    }

    /// The method's CFG, lowered on first request and cached afterwards.
    /// Concurrent requests for the same method lower it once.
    pub fn lower(&self, id: &ElementId) -> Result<Arc<ControlFlowGraph>, FrontendError> {
        let cell = {
            let mut cfgs = self.cfgs.lock().expect("cfg cache poisoned");
            cfgs.entry(id.clone()).or_default().clone()
        };
        cell.get_or_init(|| {
            *self.lowerings.lock().expect("counter poisoned").entry(id.clone()).or_default() += 1;
            let cfg = lower_method(&self.forest, &self.index, id)?;
            crate::analysis::check_definite_assignment(&cfg).map_err(|var| FrontendError::TypeError {
                span: self.forest.resolve(self.method_ast(id).expect("lowered method").span),
                message: format!("`{var}` may be read before assignment"),
            })?;
            Ok(Arc::new(cfg))
        })
        .clone()
    }

    /// How many times each method has been lowered.
    pub fn lowering_counts(&self) -> BTreeMap<ElementId, usize> {
        self.lowerings.lock().expect("counter poisoned").clone()
    }

    pub fn resolve_method(&self, qname: &str) -> Result<ElementId, FrontendError> {
        QualifiedName::parse(qname)
            .and_then(|q| self.index.method_id(&q).cloned())
            .ok_or_else(|| FrontendError::UnknownMethod(qname.to_string()))
    }

    /// The method a `Call` statement invokes.
    pub fn resolve_call_target(&self, stmt: &Statement) -> Result<ElementId, FrontendError> {
        let StmtKind::Call { callee, .. } = &stmt.kind else {
            return Err(FrontendError::UnresolvedCall { name: stmt.to_string(), span: None });
        };
        self.index.method_id(callee).cloned().ok_or_else(|| FrontendError::UnresolvedCall {
            name: callee.to_string(),
            span: stmt.span.map(|s| self.forest.resolve(s)),
        })
    }

    pub fn source_span(&self, target: &SpanTarget) -> Result<SourceSpan, FrontendError> {
        match target {
            SpanTarget::Element(id) => {
                if !self.index.contains(id) {
                    return Err(FrontendError::UnknownElement(id.clone()));
                }
                self.index
                    .span(&self.forest, id)
                    .map(|s| self.forest.resolve(s))
                    .ok_or_else(|| FrontendError::NoSpan(id.to_string()))
            }
            SpanTarget::Statement(method, stmt) => {
                let cfg = self.lower(method)?;
                let span = match cfg.site(*stmt) {
                    Some(Site::Stmt(_, _, s)) => s.span,
                    Some(Site::Term(_, t)) => t.span,
                    None => None,
                };
                span.map(|s| self.forest.resolve(s)).ok_or_else(|| FrontendError::NoSpan(format!("{method}#{stmt}")))
            }
            SpanTarget::Variable(method, var) => {
                let method_ast = self.method_ast(method).ok_or_else(|| FrontendError::NotAMethod(method.clone()))?;
                match var {
                    Var::Temp(_) => Err(FrontendError::NoSpan(format!("synthetic temporary {var}"))),
                    Var::Local(name) => method_ast
                        .params
                        .iter()
                        .find(|p| &p.name == name)
                        .map(|p| self.forest.resolve(p.span))
                        .ok_or_else(|| FrontendError::NoSpan(format!("local {name}"))),
                }
            }
            SpanTarget::File(path) => {
                let file = self
                    .forest
                    .files
                    .iter()
                    .find(|f| &f.path == path)
                    .ok_or_else(|| FrontendError::NoSpan(format!("file {path}")))?;
                let (mut line, mut col) = (1u32, 1u32);
                for c in file.text.chars() {
                    if c == '\n' {
                        line += 1;
                        col = 1;
                    } else {
                        col += 1;
                    }
                }
                Ok(SourceSpan { file: path.clone(), start_line: 1, start_col: 1, end_line: line, end_col: col })
            }
        }
    }

    /// Lines `from..=to` (1-based, clamped) of a project file.
    pub fn source_lines(&self, path: &str, from: Option<u32>, to: Option<u32>) -> Option<String> {
        let file = self.forest.files.iter().find(|f| f.path == path)?;
        let from = from.unwrap_or(1).max(1) as usize;
        let to = to.map(|t| t as usize).unwrap_or(usize::MAX);
        let lines: Vec<&str> = file.text.lines().skip(from - 1).take(to.saturating_sub(from - 1)).collect();
        Some(lines.join("\n"))
    }
}
