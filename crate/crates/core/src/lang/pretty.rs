//! Source printer. Output re-parses to a structurally equal tree.

use std::fmt::Write;

use super::ast::*;
use super::lexer::quote;

pub fn print_file(file: &SourceFile) -> String {
    let mut out = String::new();
    for ns in &file.namespaces {
        let _ = writeln!(out, "namespace {} {{", ns.name);
        for class in &ns.classes {
            let _ = writeln!(out, "    class {} {{", class.name);
            for method in &class.methods {
                print_method(&mut out, method, 2);
            }
            out.push_str("    }\n");
        }
        out.push_str("}\n");
    }
    out
}

pub fn print_method(out: &mut String, method: &Method, depth: usize) {
    let pad = "    ".repeat(depth);
    for attr in &method.attrs {
        let args: Vec<String> = attr.args.iter().map(|a| quote(a)).collect();
        let _ = writeln!(out, "{pad}@{}({})", attr.name, args.join(", "));
    }
    let params: Vec<String> = method.params.iter().map(|p| format!("{}: {}", p.name, p.ty)).collect();
    let _ = write!(out, "{pad}fn {}({})", method.name, params.join(", "));
    if let Some(ret) = method.ret {
        let _ = write!(out, " -> {ret}");
    }
    out.push(' ');
    print_block(out, &method.body, depth);
    out.push('\n');
}

fn print_block(out: &mut String, block: &Block, depth: usize) {
    out.push_str("{\n");
    for stmt in &block.stmts {
        print_stmt(out, stmt, depth + 1);
    }
    let _ = write!(out, "{}}}", "    ".repeat(depth));
}

fn print_stmt(out: &mut String, stmt: &Stmt, depth: usize) {
    out.push_str(&"    ".repeat(depth));
    match &stmt.kind {
        StmtKind::Let { name, value } => {
            let _ = writeln!(out, "let {name} = {};", print_expr(value));
        }
        StmtKind::Assign { name, value } => {
            let _ = writeln!(out, "{name} = {};", print_expr(value));
        }
        StmtKind::If { cond, then_block, else_block } => {
            let _ = write!(out, "if ({}) ", print_expr(cond));
            print_block(out, then_block, depth);
            if let Some(else_block) = else_block {
                out.push_str(" else ");
                print_block(out, else_block, depth);
            }
            out.push('\n');
        }
        StmtKind::While { cond, body } => {
            let _ = write!(out, "while ({}) ", print_expr(cond));
            print_block(out, body, depth);
            out.push('\n');
        }
        StmtKind::Return(None) => out.push_str("return;\n"),
        StmtKind::Return(Some(value)) => {
            let _ = writeln!(out, "return {};", print_expr(value));
        }
        StmtKind::Call(call) => {
            let _ = writeln!(out, "{};", print_call(call));
        }
    }
}

fn print_call(call: &Call) -> String {
    let args: Vec<String> = call.args.iter().map(print_expr).collect();
    format!("{}({})", call.callee, args.join(", "))
}

pub fn print_expr(expr: &Expr) -> String {
    match &expr.kind {
        ExprKind::Int(v) => v.to_string(),
        ExprKind::Str(s) => quote(s),
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Var(name) => name.clone(),
        ExprKind::Unary(op, operand) => {
            let sym = match op {
                UnOp::Not => "!",
                UnOp::Neg => "-",
            };
            format!("{sym}{}", print_expr(operand))
        }
        ExprKind::Binary(op, lhs, rhs) => format!("({} {op} {})", print_expr(lhs), print_expr(rhs)),
        ExprKind::Call(call) => print_call(call),
        ExprKind::Len(arg) => format!("len({})", print_expr(arg)),
        ExprKind::Matches(arg, pattern) => format!("matches({}, {})", print_expr(arg), quote(pattern)),
    }
}
