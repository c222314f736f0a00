//! Random well-typed MiniLang programs.
//!
//! A program has up to three methods in `Gen.P` with fixed signatures:
//!
//! ```text
//! m0(x: int, y: int, s: string, b: bool) -> int
//! m1(a: int, t: string) -> int
//! m2(c: int, u: string) -> bool
//! ```
//!
//! `mi` only calls `mj` for `j > i`, so there is no recursion. Loops are
//! counted and run at most three times; they are never nested.

use pcw_core::lang::QualifiedName;
use rand::Rng;

pub const NAMESPACE: &str = "Gen";
pub const CLASS: &str = "P";

const STRINGS: [&str; 7] = ["", "a", "ab", "-", "a-b", "9z", "zz"];
const PATTERNS: [&str; 6] = [
    "[a-z]+",
    "a*b",
    "[0-9a-z-]{1,4}",
    "[0-9a-z]([0-9a-z-]{0,2}[0-9a-z])?",
    "(ab|-)*",
    "9?z+",
];

#[derive(Debug, Clone, Copy)]
enum Ty {
    Int,
    Bool,
    Str,
}

struct Sig {
    params: &'static [(&'static str, Ty)],
    ret: Ty,
}

const SIGS: [Sig; 3] = [
    Sig { params: &[("x", Ty::Int), ("y", Ty::Int), ("s", Ty::Str), ("b", Ty::Bool)], ret: Ty::Int },
    Sig { params: &[("a", Ty::Int), ("t", Ty::Str)], ret: Ty::Int },
    Sig { params: &[("c", Ty::Int), ("u", Ty::Str)], ret: Ty::Bool },
];

fn ty_name(t: Ty) -> &'static str {
    match t {
        Ty::Int => "int",
        Ty::Bool => "bool",
        Ty::Str => "string",
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedProgram {
    pub source: String,
    pub methods: Vec<QualifiedName>,
}

#[derive(Clone, Default)]
struct Scope {
    ints: Vec<String>,
    bools: Vec<String>,
    strs: Vec<String>,
    /// Int locals that may be reassigned; loop counters and parameters are not.
    assignable: Vec<String>,
}

struct Gen<'r, R: Rng> {
    rng: &'r mut R,
    method: usize,
    count: usize,
    next_name: usize,
}

impl<R: Rng> Gen<'_, R> {
    fn pick<'a>(&mut self, items: &'a [String]) -> Option<&'a String> {
        if items.is_empty() {
            None
        } else {
            Some(&items[self.rng.random_range(0..items.len())])
        }
    }

    fn fresh(&mut self, prefix: &str) -> String {
        self.next_name += 1;
        format!("{prefix}{}", self.next_name)
    }

    fn callable(&mut self, ret: Ty) -> Option<usize> {
        let options: Vec<usize> = (self.method + 1..self.count)
            .filter(|&j| std::mem::discriminant(&SIGS[j].ret) == std::mem::discriminant(&ret))
            .collect();
        if options.is_empty() || !self.rng.random_bool(0.3) {
            None
        } else {
            Some(options[self.rng.random_range(0..options.len())])
        }
    }

    fn call(&mut self, j: usize, scope: &Scope, depth: u32) -> String {
        let args: Vec<String> = SIGS[j].params.iter().map(|&(_, t)| self.expr(t, scope, depth)).collect();
        format!("{NAMESPACE}.{CLASS}.m{j}({})", args.join(", "))
    }

    fn expr(&mut self, ty: Ty, scope: &Scope, depth: u32) -> String {
        match ty {
            Ty::Int => self.int(scope, depth),
            Ty::Bool => self.boolean(scope, depth),
            Ty::Str => self.string(scope),
        }
    }

    fn string(&mut self, scope: &Scope) -> String {
        match self.pick(&scope.strs) {
            Some(v) if self.rng.random_bool(0.8) => v.clone(),
            _ => format!("{:?}", STRINGS[self.rng.random_range(0..STRINGS.len())]),
        }
    }

    fn int(&mut self, scope: &Scope, depth: u32) -> String {
        if depth > 0 {
            if let Some(j) = self.callable(Ty::Int) {
                return self.call(j, scope, depth - 1);
            }
        }
        let choice = if depth == 0 { self.rng.random_range(0..3) } else { self.rng.random_range(0..7) };
        match choice {
            0 => self.rng.random_range(-3..=12).to_string(),
            1 => match self.pick(&scope.ints) {
                Some(v) => v.clone(),
                None => self.rng.random_range(0..=5).to_string(),
            },
            2 => match self.pick(&scope.strs) {
                Some(v) => format!("len({v})"),
                None => "1".into(),
            },
            3 | 4 => {
                let op = ["+", "-", "*"][self.rng.random_range(0..3)];
                format!("({} {op} {})", self.int(scope, depth - 1), self.int(scope, depth - 1))
            }
            5 => {
                let op = ["/", "%"][self.rng.random_range(0..2)];
                let divisor = if self.rng.random_bool(0.8) {
                    self.rng.random_range(1..=4).to_string()
                } else {
                    self.int(scope, 0)
                };
                format!("({} {op} {divisor})", self.int(scope, depth - 1))
            }
            _ => format!("-({})", self.int(scope, depth - 1)),
        }
    }

    fn boolean(&mut self, scope: &Scope, depth: u32) -> String {
        if depth > 0 {
            if let Some(j) = self.callable(Ty::Bool) {
                return self.call(j, scope, depth - 1);
            }
        }
        let choice = if depth == 0 { self.rng.random_range(0..3) } else { self.rng.random_range(0..7) };
        match choice {
            0 => {
                let op = ["<", "<=", ">", ">=", "==", "!="][self.rng.random_range(0..6)];
                format!("{} {op} {}", self.int(scope, depth.saturating_sub(1)), self.int(scope, depth.saturating_sub(1)))
            }
            1 => match self.pick(&scope.bools) {
                Some(v) => v.clone(),
                None => format!("{} > 0", self.int(scope, 0)),
            },
            2 => {
                let s = self.string(scope);
                if self.rng.random_bool(0.5) {
                    format!("matches({s}, {:?})", PATTERNS[self.rng.random_range(0..PATTERNS.len())])
                } else {
                    let op = ["==", "!="][self.rng.random_range(0..2)];
                    format!("{s} {op} {:?}", STRINGS[self.rng.random_range(0..STRINGS.len())])
                }
            }
            3 => format!("!({})", self.boolean(scope, depth - 1)),
            4 => format!("({} && {})", self.boolean(scope, depth - 1), self.boolean(scope, depth - 1)),
            5 => format!("({} || {})", self.boolean(scope, depth - 1), self.boolean(scope, depth - 1)),
            _ => format!("{} < {}", self.int(scope, depth - 1), self.int(scope, depth - 1)),
        }
    }

    fn block(&mut self, scope: &Scope, indent: usize, in_loop: bool, nesting: u32, out: &mut String) {
        let mut scope = scope.clone();
        let pad = "    ".repeat(indent);
        for _ in 0..self.rng.random_range(1..=4) {
            match self.rng.random_range(0..10) {
                0 | 1 => {
                    let name = self.fresh("i");
                    let e = self.int(&scope, 2);
                    out.push_str(&format!("{pad}let {name} = {e};\n"));
                    scope.ints.push(name.clone());
                    scope.assignable.push(name);
                }
                2 => {
                    let name = self.fresh("q");
                    let e = self.boolean(&scope, 2);
                    out.push_str(&format!("{pad}let {name} = {e};\n"));
                    scope.bools.push(name);
                }
                3 => {
                    let name = self.fresh("r");
                    let e = self.string(&scope);
                    out.push_str(&format!("{pad}let {name} = {e};\n"));
                    scope.strs.push(name);
                }
                4 => {
                    let Some(v) = self.pick(&scope.assignable).cloned() else { continue };
                    let e = self.int(&scope, 2);
                    out.push_str(&format!("{pad}{v} = {e};\n"));
                }
                5 | 6 if nesting < 2 => {
                    let cond = self.boolean(&scope, 2);
                    out.push_str(&format!("{pad}if ({cond}) {{\n"));
                    self.block(&scope, indent + 1, in_loop, nesting + 1, out);
                    if self.rng.random_bool(0.25) {
                        let ret = self.expr(SIGS[self.method].ret, &scope, 1);
                        out.push_str(&format!("{pad}    return {ret};\n"));
                    }
                    if self.rng.random_bool(0.5) {
                        out.push_str(&format!("{pad}}} else {{\n"));
                        self.block(&scope, indent + 1, in_loop, nesting + 1, out);
                    }
                    out.push_str(&format!("{pad}}}\n"));
                }
                7 if !in_loop && nesting < 2 => {
                    let counter = self.fresh("w");
                    let limit = self.rng.random_range(1..=3);
                    out.push_str(&format!("{pad}let {counter} = 0;\n"));
                    let mut inner = scope.clone();
                    inner.ints.push(counter.clone());
                    let extra = if self.rng.random_bool(0.3) {
                        format!(" && {}", self.boolean(&scope, 1))
                    } else {
                        String::new()
                    };
                    out.push_str(&format!("{pad}while ({counter} < {limit}{extra}) {{\n"));
                    self.block(&inner, indent + 1, true, nesting + 1, out);
                    out.push_str(&format!("{pad}    {counter} = {counter} + 1;\n{pad}}}\n"));
                    scope.ints.push(counter);
                }
                _ => {
                    let targets: Vec<usize> = (self.method + 1..self.count).collect();
                    if targets.is_empty() {
                        continue;
                    }
                    let j = targets[self.rng.random_range(0..targets.len())];
                    let call = self.call(j, &scope, 1);
                    out.push_str(&format!("{pad}{call};\n"));
                }
            }
        }
    }
}

/// A program with one to three methods; `methods[0]` is the entry.
pub fn random_program(rng: &mut impl Rng) -> GeneratedProgram {
    let count = rng.random_range(1..=3);
    let mut body = String::new();
    body.push_str(&format!("namespace {NAMESPACE} {{\n    class {CLASS} {{\n"));
    let mut gen = Gen { rng, method: 0, count, next_name: 0 };
    for (m, sig) in SIGS.iter().enumerate().take(count) {
        gen.method = m;
        gen.next_name = 0;
        let params: Vec<String> = sig.params.iter().map(|(n, t)| format!("{n}: {}", ty_name(*t))).collect();
        body.push_str(&format!("        fn m{m}({}) -> {} {{\n", params.join(", "), ty_name(sig.ret)));
        let mut scope = Scope::default();
        for &(name, t) in sig.params {
            match t {
                Ty::Int => scope.ints.push(name.into()),
                Ty::Bool => scope.bools.push(name.into()),
                Ty::Str => scope.strs.push(name.into()),
            }
        }
        gen.block(&scope, 3, false, 0, &mut body);
        let ret = gen.expr(sig.ret, &scope, 2);
        body.push_str(&format!("            return {ret};\n        }}\n"));
    }
    body.push_str("    }\n}\n");
    GeneratedProgram {
        source: body,
        methods: (0..count).map(|m| QualifiedName::new(NAMESPACE, CLASS, &format!("m{m}"))).collect(),
    }
}
