//! Random control flow graphs for solver comparisons.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use pcw_core::lang::ast::{BinOp, QualifiedName, Type};
use pcw_core::lang::cfg::{Expr, StmtKind};
use pcw_core::lang::{BasicBlock, BlockId, ControlFlowGraph, Statement, StmtId, Terminator, TerminatorKind, Var};
use pcw_core::slice::ElementId;
use rand::Rng;

pub const MAX_BLOCKS: usize = 12;
pub const MAX_VARS: usize = 6;

fn operand(rng: &mut impl Rng, vars: &[Var]) -> Expr {
    if rng.random_bool(0.7) {
        Expr::Var(vars[rng.random_range(0..vars.len())].clone())
    } else {
        Expr::Int(BigInt::from(rng.random_range(-3..10)))
    }
}

/// A graph of up to [`MAX_BLOCKS`] blocks over up to [`MAX_VARS`] int
/// variables. Every block is reachable from block 0; back edges, self loops
/// and returns occur freely. Statement ids are sequential in block order.
pub fn random_cfg(rng: &mut impl Rng) -> ControlFlowGraph {
    let n = rng.random_range(1..=MAX_BLOCKS);
    let nvars = rng.random_range(1..=MAX_VARS);
    let nparams = rng.random_range(0..=nvars.min(2));
    let vars: Vec<Var> = (0..nvars).map(|i| Var::Local(format!("v{i}"))).collect();

    let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for b in 1..n {
        let open: Vec<usize> = (0..b).filter(|&p| succs[p].len() < 2).collect();
        let parent = open[rng.random_range(0..open.len())];
        succs[parent].push(b);
    }
    for s in succs.iter_mut() {
        while s.len() < 2 && rng.random_bool(0.4) {
            s.push(rng.random_range(0..n));
        }
    }

    let mut next_id = 0u32;
    let mut id = || {
        next_id += 1;
        StmtId(next_id - 1)
    };
    let blocks = (0..n)
        .map(|b| {
            let stmts = (0..rng.random_range(0..=3))
                .map(|_| {
                    let target = vars[rng.random_range(0..nvars)].clone();
                    let kind = if rng.random_bool(0.15) {
                        let args = (0..rng.random_range(0..=2)).map(|_| operand(rng, &vars)).collect();
                        StmtKind::Call {
                            target: rng.random_bool(0.7).then_some(target),
                            callee: QualifiedName::new("Gen", "Ext", "f"),
                            args,
                        }
                    } else {
                        let value = match rng.random_range(0..3) {
                            0 => operand(rng, &vars),
                            1 => Expr::Binary(BinOp::Add, Box::new(operand(rng, &vars)), Box::new(operand(rng, &vars))),
                            _ => Expr::Binary(BinOp::Mul, Box::new(operand(rng, &vars)), Box::new(operand(rng, &vars))),
                        };
                        StmtKind::Assign { target, value }
                    };
                    Statement { id: id(), kind, span: None }
                })
                .collect();
            let kind = match succs[b].as_slice() {
                [] => TerminatorKind::Return(rng.random_bool(0.5).then(|| operand(rng, &vars))),
                [t] => TerminatorKind::Jump(BlockId(*t)),
                [t, e, ..] => TerminatorKind::Branch {
                    cond: Expr::Binary(BinOp::Lt, Box::new(operand(rng, &vars)), Box::new(operand(rng, &vars))),
                    then_block: BlockId(*t),
                    else_block: BlockId(*e),
                },
            };
            BasicBlock { id: BlockId(b), stmts, terminator: Terminator { id: id(), kind, span: None } }
        })
        .collect();

    let var_types: BTreeMap<Var, Type> = vars.iter().map(|v| (v.clone(), Type::Int)).collect();
    ControlFlowGraph {
        method: ElementId::new("gen/Gen/Rand/m"),
        name: QualifiedName::new("Gen", "Rand", "m"),
        params: (0..nparams).map(|i| (format!("v{i}"), Type::Int)).collect(),
        ret: Some(Type::Int),
        blocks,
        entry: BlockId(0),
        var_types,
    }
}
