//! Inline-and-taint: which methods receive a value derived from one entry
//! parameter, found by abstractly running the syntax tree with every call
//! inlined. Only data flow counts; branching on a tainted value taints
//! nothing.

use std::collections::{BTreeMap, BTreeSet};

use pcw_core::lang::ast::{Block, Expr, ExprKind, Method, StmtKind};
use pcw_core::lang::{Project, QualifiedName};

use crate::interp::methods_of;

type State = BTreeSet<String>;

struct Taint<'a> {
    methods: BTreeMap<QualifiedName, &'a Method>,
    reached: BTreeSet<QualifiedName>,
    memo: BTreeMap<(QualifiedName, BTreeSet<usize>), bool>,
    active: BTreeSet<QualifiedName>,
}

impl Taint<'_> {
    /// Returns whether the method's return value can be tainted when the
    /// parameters in `tainted` are.
    fn method(&mut self, name: &QualifiedName, tainted: BTreeSet<usize>) -> bool {
        if tainted.is_empty() {
            return false;
        }
        self.reached.insert(name.clone());
        let key = (name.clone(), tainted.clone());
        if let Some(&r) = self.memo.get(&key) {
            return r;
        }
        if !self.active.insert(name.clone()) {
            // Recursive programs are not generated; stay conservative anyway.
            return true;
        }
        let Some(m) = self.methods.get(name).copied() else { return true };
        let state: State = tainted.iter().filter_map(|&i| m.params.get(i)).map(|p| p.name.clone()).collect();
        let mut ret = false;
        self.block(&m.body, state, &mut ret);
        self.active.remove(name);
        self.memo.insert(key, ret);
        ret
    }

    /// `None` when every path through the block returns.
    fn block(&mut self, block: &Block, mut state: State, ret: &mut bool) -> Option<State> {
        for stmt in &block.stmts {
            match &stmt.kind {
                StmtKind::Let { name, value } | StmtKind::Assign { name, value } => {
                    if self.expr(value, &state) {
                        state.insert(name.clone());
                    } else {
                        state.remove(name);
                    }
                }
                StmtKind::If { cond, then_block, else_block } => {
                    self.expr(cond, &state);
                    let a = self.block(then_block, state.clone(), ret);
                    let b = match else_block {
                        Some(e) => self.block(e, state, ret),
                        None => Some(state),
                    };
                    state = match (a, b) {
                        (None, None) => return None,
                        (Some(s), None) | (None, Some(s)) => s,
                        (Some(a), Some(b)) => a.union(&b).cloned().collect(),
                    };
                }
                StmtKind::While { cond, body } => {
                    let mut head = state;
                    loop {
                        self.expr(cond, &head);
                        let after = self.block(body, head.clone(), ret).unwrap_or_default();
                        let next: State = head.union(&after).cloned().collect();
                        if next == head {
                            break;
                        }
                        head = next;
                    }
                    state = head;
                }
                StmtKind::Return(e) => {
                    if let Some(e) = e {
                        *ret |= self.expr(e, &state);
                    }
                    return None;
                }
                StmtKind::Call(call) => {
                    let tainted = call.args.iter().enumerate().filter(|(_, a)| self.expr(a, &state)).map(|(i, _)| i);
                    let tainted: BTreeSet<usize> = tainted.collect();
                    self.method(&call.callee, tainted);
                }
            }
        }
        Some(state)
    }

    fn expr(&mut self, e: &Expr, state: &State) -> bool {
        match &e.kind {
            ExprKind::Int(_) | ExprKind::Str(_) | ExprKind::Bool(_) => false,
            ExprKind::Var(name) => state.contains(name),
            ExprKind::Unary(_, inner) | ExprKind::Len(inner) | ExprKind::Matches(inner, _) => self.expr(inner, state),
            ExprKind::Binary(_, l, r) => {
                let a = self.expr(l, state);
                let b = self.expr(r, state);
                a || b
            }
            ExprKind::Call(call) => {
                let tainted: BTreeSet<usize> =
                    call.args.iter().enumerate().filter(|(_, a)| self.expr(a, state)).map(|(i, _)| i).collect();
                self.method(&call.callee, tainted)
            }
        }
    }
}

/// Methods that receive a value derived from parameter `param` of `entry`,
/// including `entry` itself.
pub fn inline_and_taint(project: &Project, entry: &QualifiedName, param: usize) -> BTreeSet<QualifiedName> {
    let mut t = Taint {
        methods: methods_of(project),
        reached: BTreeSet::new(),
        memo: BTreeMap::new(),
        active: BTreeSet::new(),
    };
    t.method(entry, BTreeSet::from([param]));
    t.reached
}
