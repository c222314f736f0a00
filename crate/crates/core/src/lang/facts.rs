use std::collections::BTreeMap;
use std::sync::Arc;

use crate::slice::{
    AttrValue, Attributes, Children, Element, ElementId, FactProvider, Kind, Link, LinkId, ProviderError, Schema,
    ValueType,
};

use super::ast::*;
use super::forest::SyntaxForest;

pub const PROJECT: &str = "Project";
pub const NAMESPACE: &str = "Namespace";
pub const CLASS: &str = "Class";
pub const METHOD: &str = "Method";
pub const CALLS: &str = "calls";

pub fn minilang_schema() -> Schema {
    let located = |name: &str| {
        Kind::new(name)
            .with_attr("name", ValueType::Text)
            .with_attr("file", ValueType::Text)
            .with_attr("startLine", ValueType::Integer)
            .with_attr("startCol", ValueType::Integer)
            .with_attr("endLine", ValueType::Integer)
            .with_attr("endCol", ValueType::Integer)
    };
    Schema::define(
        vec![
            Kind::new(PROJECT).with_attr("name", ValueType::Text).with_attr("root", ValueType::Text),
            located(NAMESPACE),
            located(CLASS),
            located(METHOD)
                .with_attr("qualifiedName", ValueType::Text)
                .with_attr("arity", ValueType::Integer)
                .with_attr("returnType", ValueType::Text)
                .with_attr("verb", ValueType::Text)
                .with_attr("route", ValueType::Text),
        ],
        vec![Kind::new(CALLS).with_attr("line", ValueType::Integer).with_attr("col", ValueType::Integer)],
    )
    .expect("static schema is valid")
}

#[derive(Debug, Clone, Copy)]
pub struct MethodRef {
    pub file: FileId,
    pub namespace: usize,
    pub class: usize,
    pub method: usize,
}

#[derive(Debug, Clone)]
struct Container {
    name: String,
    span: Span,
    parent: ElementId,
    children: Vec<ElementId>,
}

/// Id and containment index over a parsed forest.
#[derive(Debug, Clone)]
pub struct ProjectIndex {
    pub name: String,
    pub project_id: ElementId,
    namespaces: Vec<ElementId>,
    containers: BTreeMap<ElementId, Container>,
    methods: BTreeMap<ElementId, (QualifiedName, MethodRef, ElementId)>,
    by_qname: BTreeMap<QualifiedName, ElementId>,
}

impl ProjectIndex {
    pub fn build(name: &str, forest: &SyntaxForest) -> Self {
        let project_id = ElementId::new(name);
        let mut index = ProjectIndex {
            name: name.to_string(),
            project_id: project_id.clone(),
            namespaces: Vec::new(),
            containers: BTreeMap::new(),
            methods: BTreeMap::new(),
            by_qname: BTreeMap::new(),
        };
        for (file_idx, file) in forest.files.iter().enumerate() {
            for (ns_idx, ns) in file.ast.namespaces.iter().enumerate() {
                let ns_id = ElementId::new(format!("{name}/{}", ns.name));
                if !index.containers.contains_key(&ns_id) {
                    index.namespaces.push(ns_id.clone());
                    index.containers.insert(
                        ns_id.clone(),
                        Container { name: ns.name.clone(), span: ns.span, parent: project_id.clone(), children: vec![] },
                    );
                }
                for (class_idx, class) in ns.classes.iter().enumerate() {
                    let class_id = ElementId::new(format!("{ns_id}/{}", class.name));
                    if index.containers.contains_key(&class_id) {
                        continue;
                    }
                    index.containers.get_mut(&ns_id).expect("namespace registered").children.push(class_id.clone());
                    index.containers.insert(
                        class_id.clone(),
                        Container { name: class.name.clone(), span: class.span, parent: ns_id.clone(), children: vec![] },
                    );
                    for (method_idx, method) in class.methods.iter().enumerate() {
                        let method_id = ElementId::new(format!("{class_id}/{}", method.name));
                        if index.methods.contains_key(&method_id) {
                            continue;
                        }
                        let qname = QualifiedName::new(&ns.name, &class.name, &method.name);
                        let mref = MethodRef {
                            file: FileId(file_idx as u32),
                            namespace: ns_idx,
                            class: class_idx,
                            method: method_idx,
                        };
                        index.containers.get_mut(&class_id).expect("class registered").children.push(method_id.clone());
                        index.by_qname.insert(qname.clone(), method_id.clone());
                        index.methods.insert(method_id, (qname, mref, class_id.clone()));
                    }
                }
            }
        }
        index
    }

    pub fn method_id(&self, qname: &QualifiedName) -> Option<&ElementId> {
        self.by_qname.get(qname)
    }

    pub fn method_ref(&self, id: &ElementId) -> Option<MethodRef> {
        self.methods.get(id).map(|(_, r, _)| *r)
    }

    pub fn qualified_name(&self, id: &ElementId) -> Option<&QualifiedName> {
        self.methods.get(id).map(|(q, _, _)| q)
    }

    pub fn is_method(&self, id: &ElementId) -> bool {
        self.methods.contains_key(id)
    }

    pub fn method_ids(&self) -> impl Iterator<Item = &ElementId> {
        self.methods.keys()
    }

    pub fn contains(&self, id: &ElementId) -> bool {
        *id == self.project_id || self.containers.contains_key(id) || self.methods.contains_key(id)
    }

    pub fn parent(&self, id: &ElementId) -> Option<&ElementId> {
        if let Some((_, _, class)) = self.methods.get(id) {
            return Some(class);
        }
        self.containers.get(id).map(|c| &c.parent)
    }

    /// Declaration span of a namespace (first declaration), class or method.
    pub fn span(&self, forest: &SyntaxForest, id: &ElementId) -> Option<Span> {
        if let Some(mref) = self.method_ref(id) {
            return Some(method_at(forest, mref).span);
        }
        self.containers.get(id).map(|c| c.span)
    }
}

pub fn method_at(forest: &SyntaxForest, mref: MethodRef) -> &Method {
    &forest.files[mref.file.0 as usize].ast.namespaces[mref.namespace].classes[mref.class].methods[mref.method]
}

/// Calls in a method body in source order.
pub fn calls_in(method: &Method) -> Vec<&Call> {
    fn expr<'a>(e: &'a Expr, out: &mut Vec<&'a Call>) {
        match &e.kind {
            ExprKind::Int(_) | ExprKind::Str(_) | ExprKind::Bool(_) | ExprKind::Var(_) => {}
            ExprKind::Unary(_, x) | ExprKind::Len(x) | ExprKind::Matches(x, _) => expr(x, out),
            ExprKind::Binary(_, l, r) => {
                expr(l, out);
                expr(r, out);
            }
            ExprKind::Call(call) => {
                call.args.iter().for_each(|a| expr(a, out));
                out.push(call);
            }
        }
    }
    fn block<'a>(b: &'a Block, out: &mut Vec<&'a Call>) {
        for stmt in &b.stmts {
            match &stmt.kind {
                StmtKind::Let { value, .. } | StmtKind::Assign { value, .. } => expr(value, out),
                StmtKind::If { cond, then_block, else_block } => {
                    expr(cond, out);
                    block(then_block, out);
                    if let Some(e) = else_block {
                        block(e, out);
                    }
                }
                StmtKind::While { cond, body } => {
                    expr(cond, out);
                    block(body, out);
                }
                StmtKind::Return(value) => {
                    if let Some(v) = value {
                        expr(v, out);
                    }
                }
                StmtKind::Call(call) => {
                    call.args.iter().for_each(|a| expr(a, out));
                    out.push(call);
                }
            }
        }
    }
    let mut out = Vec::new();
    block(&method.body, &mut out);
    out
}

/// Raw (unmemoized) fact extraction over a parsed forest.
pub struct MiniLangFacts {
    forest: Arc<SyntaxForest>,
    index: Arc<ProjectIndex>,
    schema: Schema,
}

impl MiniLangFacts {
    pub fn new(forest: Arc<SyntaxForest>, index: Arc<ProjectIndex>) -> Self {
        MiniLangFacts { forest, index, schema: minilang_schema() }
    }

    fn located(&self, attrs: &mut Attributes, span: Span) {
        let resolved = self.forest.resolve(span);
        attrs.insert("file".into(), resolved.file.into());
        attrs.insert("startLine".into(), AttrValue::Integer(resolved.start_line.into()));
        attrs.insert("startCol".into(), AttrValue::Integer(resolved.start_col.into()));
        attrs.insert("endLine".into(), AttrValue::Integer(resolved.end_line.into()));
        attrs.insert("endCol".into(), AttrValue::Integer(resolved.end_col.into()));
    }

    fn element(&self, id: &ElementId) -> Option<Element> {
        let mut attributes = Attributes::new();
        let kind = if *id == self.index.project_id {
            attributes.insert("name".into(), self.index.name.clone().into());
            attributes.insert("root".into(), self.forest.root.display().to_string().into());
            PROJECT
        } else if let Some((qname, mref, _)) = self.index.methods.get(id) {
            let method = method_at(&self.forest, *mref);
            attributes.insert("name".into(), method.name.clone().into());
            attributes.insert("qualifiedName".into(), qname.to_string().into());
            attributes.insert("arity".into(), AttrValue::Integer(method.params.len() as i64));
            if let Some(ret) = method.ret {
                attributes.insert("returnType".into(), ret.to_string().into());
            }
            if let Some((verb, route)) = method.endpoint() {
                attributes.insert("verb".into(), verb.into());
                attributes.insert("route".into(), route.into());
            }
            self.located(&mut attributes, method.span);
            METHOD
        } else {
            let container = self.index.containers.get(id)?;
            attributes.insert("name".into(), container.name.clone().into());
            self.located(&mut attributes, container.span);
            if container.parent == self.index.project_id {
                NAMESPACE
            } else {
                CLASS
            }
        };
        Some(Element { id: id.clone(), kind: kind.to_string(), attributes })
    }

    fn known(&self, id: &ElementId) -> Result<(), ProviderError> {
        if self.index.contains(id) {
            Ok(())
        } else {
            Err(ProviderError::UnknownElement(id.clone()))
        }
    }
}

impl FactProvider for MiniLangFacts {
    fn schema(&self) -> &Schema {
        &self.schema
    }

    fn load_roots(&self) -> Result<Vec<Element>, ProviderError> {
        Ok(vec![self.element(&self.index.project_id).expect("project element")])
    }

    fn load_children(&self, id: &ElementId) -> Result<Children, ProviderError> {
        self.known(id)?;
        let ids: &[ElementId] = if *id == self.index.project_id {
            &self.index.namespaces
        } else {
            self.index.containers.get(id).map(|c| c.children.as_slice()).unwrap_or_default()
        };
        Ok(Children {
            elements: ids.iter().map(|c| self.element(c).expect("indexed child")).collect(),
            links: ids.iter().map(|c| Link::contains(id, c)).collect(),
        })
    }

    fn load_links(&self, kind: &str, id: &ElementId) -> Result<Vec<Link>, ProviderError> {
        self.known(id)?;
        if kind != CALLS {
            return Err(ProviderError::Failure {
                request: format!("load_links({kind}, {id})"),
                message: "unknown link kind".into(),
            });
        }
        let Some(mref) = self.index.method_ref(id) else { return Ok(Vec::new()) };
        let method = method_at(&self.forest, mref);
        let links = calls_in(method)
            .into_iter()
            .enumerate()
            .filter_map(|(n, call)| {
                let target = self.index.method_id(&call.callee)?;
                let mut attributes = Attributes::new();
                attributes.insert("line".into(), AttrValue::Integer(call.span.start.line.into()));
                attributes.insert("col".into(), AttrValue::Integer(call.span.start.col.into()));
                Some(Link {
                    id: LinkId(format!("{CALLS}:{id}#{n}")),
                    kind: CALLS.to_string(),
                    source: id.clone(),
                    target: target.clone(),
                    attributes,
                })
            })
            .collect();
        Ok(links)
    }

    fn load_element(&self, id: &ElementId) -> Result<Element, ProviderError> {
        self.element(id).ok_or_else(|| ProviderError::UnknownElement(id.clone()))
    }

    fn load_parent(&self, id: &ElementId) -> Result<Option<ElementId>, ProviderError> {
        self.known(id)?;
        Ok(self.index.parent(id).cloned())
    }
}
