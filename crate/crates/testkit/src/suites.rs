//! Property runs shared by the crate tests and the acceptance report. Each
//! run returns how much it checked and every mismatch it found.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use pcw_core::analysis::{interprocedural_dependency, solve, solve_with, CallGraph, Liveness, ReachingDefinitions};
use pcw_core::analysis::{SolverOptions, WorklistOrder};
use pcw_core::lang::{BlockId, ControlFlowGraph, Project, QualifiedName, Type};
use pcw_core::regex::parse;
use pcw_core::slice::{ElementId, Slice, CONTAINS};
use pcw_core::symexec::{
    analyze_reachability, concrete_execute, parse_constraint, query_symbols, Bounds, Dfa, ExecError, ProductMode,
    ReachQuery, ReachStatus, SymExpr, Target, Trace, Value, DEFAULT_FUEL, RETURN_SYMBOL,
};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::cfg_gen::random_cfg;
use crate::dataflow::{live_in, reaching_in, round_robin};
use crate::program_gen::random_program;
use crate::regex_gen::{all_strings, random_pattern, TEST_CHARS};
use crate::regex_oracle::Backtracker;
use crate::slice_gen::random_hierarchy;
use crate::taint::inline_and_taint;
use crate::{random_value, seeded};

#[derive(Debug, Clone, Default)]
pub struct SuiteReport {
    pub checked: usize,
    pub mismatches: usize,
    /// Descriptions of the first few mismatches.
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.mismatches += 1;
            if self.failures.len() < 20 {
                self.failures.push(describe());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }
}

/// Lowers every method of `project`.
pub fn all_cfgs(project: &Project) -> Vec<ControlFlowGraph> {
    let methods = crate::interp::methods_of(project);
    methods
        .keys()
        .map(|q| {
            let id = project.resolve_method(&q.to_string()).expect("indexed method");
            project.lower(&id).expect("corpus lowers").as_ref().clone()
        })
        .collect()
}

fn compare_cfg(cfg: &ControlFlowGraph, rng: &mut impl Rng, report: &mut SuiteReport) {
    for with_uninit in [false, true] {
        let problem = ReachingDefinitions { with_uninit };
        let worklist = solve(cfg, &problem).expect("solves");
        let (ins, outs) = round_robin(cfg, &problem);
        report.check(worklist.ins == ins && worklist.outs == outs, || {
            format!("reaching definitions differ from round robin on {}", cfg.name)
        });
        let restated = reaching_in(cfg, with_uninit);
        report.check(worklist.ins == restated, || format!("reaching definitions differ from restated equations on {}", cfg.name));

        let mut perm: Vec<BlockId> = (0..cfg.blocks.len()).map(BlockId).collect();
        perm.shuffle(rng);
        for order in [WorklistOrder::Fifo, WorklistOrder::Priority(perm.clone())] {
            let other = solve_with(cfg, &problem, &SolverOptions { order, ..SolverOptions::default() }).expect("solves");
            report.check(other.ins == worklist.ins && other.outs == worklist.outs, || {
                format!("worklist order changes the fixpoint on {}", cfg.name)
            });
        }
    }
    let live = solve(cfg, &Liveness).expect("solves");
    let (ins, outs) = round_robin(cfg, &Liveness);
    report.check(live.ins == ins && live.outs == outs, || format!("liveness differs from round robin on {}", cfg.name));
    report.check(live.ins == live_in(cfg), || format!("liveness differs from restated equations on {}", cfg.name));
}

/// Worklist solver against round robin and restated equations, on `cfgs`
/// and on `random` generated graphs.
pub fn dataflow_suite(cfgs: &[ControlFlowGraph], random: usize, seed: u64) -> SuiteReport {
    let mut rng = seeded(seed);
    let mut report = SuiteReport::default();
    for cfg in cfgs {
        compare_cfg(cfg, &mut rng, &mut report);
    }
    for _ in 0..random {
        let cfg = random_cfg(&mut rng);
        compare_cfg(&cfg, &mut rng, &mut report);
    }
    report
}

const STATE_BUDGET: usize = 100_000;

/// Compiled DFAs, their products and complements against the backtracker,
/// on every string over the test alphabet up to `max_len`.
pub fn dfa_suite(pairs: usize, max_len: usize, seed: u64) -> SuiteReport {
    let mut rng = seeded(seed);
    let mut report = SuiteReport::default();
    let strings = all_strings(&TEST_CHARS, max_len);
    for _ in 0..pairs {
        let (p, q) = (random_pattern(&mut rng), random_pattern(&mut rng));
        let compile = |p: &str| Dfa::from_regex(&parse(p).expect("generated pattern parses"), STATE_BUDGET);
        let (Ok(a), Ok(b)) = (compile(&p), compile(&q)) else {
            report.check(false, || format!("state budget exceeded on {p:?} or {q:?}"));
            continue;
        };
        let (bp, bq) = (Backtracker::new(&p).expect("oracle parses"), Backtracker::new(&q).expect("oracle parses"));
        let inter = a.product(&b, ProductMode::Intersect, STATE_BUDGET).expect("product fits");
        let diff = a.product(&b, ProductMode::Difference, STATE_BUDGET).expect("product fits");
        let comp = a.complement();
        let mut any_inter = false;
        let mut any_diff = false;
        for s in &strings {
            let (x, y) = (bp.is_match(s), bq.is_match(s));
            any_inter |= x && y;
            any_diff |= x && !y;
            report.check(
                a.accepts(s) == x
                    && b.accepts(s) == y
                    && inter.accepts(s) == (x && y)
                    && diff.accepts(s) == (x && !y)
                    && comp.accepts(s) == !x,
                || format!("membership of {s:?} disagrees for {p:?} / {q:?}"),
            );
        }
        // Emptiness agrees with the enumeration wherever it found a member.
        report.check(!any_inter || !inter.is_empty(), || format!("{p:?} & {q:?} reported empty"));
        report.check(!any_diff || !diff.is_empty(), || format!("{p:?} - {q:?} reported empty"));
        if let Some(w) = inter.witness() {
            report.check(bp.is_match(&w) && bq.is_match(&w), || format!("witness {w:?} of {p:?} & {q:?} rejected"));
        }
        if let Some(w) = diff.witness() {
            report.check(bp.is_match(&w) && !bq.is_match(&w), || format!("witness {w:?} of {p:?} - {q:?} rejected"));
        }
    }
    report
}

/// Include/restrict sequences over random hierarchies; every slice must be
/// closed and must equal the set-based model.
pub fn slice_suite(sequences: usize, seed: u64) -> SuiteReport {
    let mut rng = seeded(seed);
    let mut report = SuiteReport::default();
    for round in 0..sequences {
        let h = random_hierarchy(&mut rng, 30);
        let ids = h.ids();
        let provider: Arc<dyn pcw_core::slice::FactProvider> = Arc::new(h.provider.clone());
        let (mut slice, mut model) = if rng.random_bool(0.3) {
            let keep: BTreeSet<String> = ids.iter().filter(|_| rng.random_bool(0.3)).cloned().collect();
            let k = keep.clone();
            let slice = Slice::build(provider.clone(), move |e| k.contains(e.id.as_str())).expect("builds");
            (slice, h.close(keep))
        } else {
            (Slice::empty(provider.clone()), BTreeSet::new())
        };
        for _ in 0..rng.random_range(1..=8) {
            if rng.random_bool(0.6) {
                let id = ids[rng.random_range(0..ids.len())].clone();
                slice = slice.include(&ElementId::new(id.clone())).expect("include");
                model.extend(h.close([id]));
            } else {
                let kind = ["Project", "Namespace", "Class", "Method"][rng.random_range(0..4)];
                let salt = rng.random_range(0..3usize);
                let keep = move |id: &str, k: &str| k == kind || id.len() % 3 == salt;
                slice = slice.restrict(|e| keep(e.id.as_str(), &e.kind)).expect("restrict");
                let kept = model.iter().filter(|id| keep(id, h.kinds[*id])).cloned().collect::<Vec<_>>();
                model = h.close(kept);
            }
            let members: BTreeSet<String> = slice.elements().map(|e| e.id.as_str().to_string()).collect();
            let links: Vec<(String, String, bool)> = slice
                .links()
                .map(|l| (l.source.as_str().to_string(), l.target.as_str().to_string(), l.kind == CONTAINS))
                .collect();
            let violations = h.violations(&members, &links);
            report.check(violations.is_empty(), || format!("round {round}: {}", violations.join("; ")));
            report.check(members == model, || format!("round {round}: members {members:?}, expected {model:?}"));
        }
    }
    report
}

/// Emphasis from the summary-based analysis against inline-and-taint on
/// random programs, for every parameter of the entry method.
pub fn taint_suite(programs: usize, seed: u64) -> SuiteReport {
    let mut rng = seeded(seed);
    let mut report = SuiteReport::default();
    for _ in 0..programs {
        let program = random_program(&mut rng);
        let project = Project::from_sources("gen", vec![("gen.mini".into(), program.source.clone())])
            .expect("generated program parses");
        let entry_q = &program.methods[0];
        let entry = project.resolve_method(&entry_q.to_string()).expect("entry");
        let graph = CallGraph::build(&project, std::slice::from_ref(&entry)).expect("call graph");
        let names: BTreeMap<ElementId, QualifiedName> =
            graph.nodes.iter().map(|n| (n.clone(), project.lower(n).expect("lowers").name.clone())).collect();
        for param in 0..4 {
            let got: BTreeSet<QualifiedName> = interprocedural_dependency(&graph, &entry, param)
                .expect("dependency")
                .iter()
                .map(|n| names[n].clone())
                .collect();
            let expected = inline_and_taint(&project, entry_q, param);
            report.check(got == expected, || {
                format!("param {param}: analysis {got:?}, oracle {expected:?}\n{}", program.source)
            });
        }
    }
    report
}

#[derive(Debug, Clone, Default)]
pub struct SoundnessReport {
    pub queries: usize,
    pub statuses: BTreeMap<&'static str, usize>,
    pub models: usize,
    pub confirmed: usize,
    /// Proven-unreachable queries, and how many random inputs probed each.
    pub unreachable_probes: usize,
    pub failures: Vec<String>,
}

const INT_TEMPLATES: [&str; 5] = ["{v} > 2", "{v} < 7", "{v} != 0", "{v} == 4", "{v} >= -1 && {v} <= 3"];
const STR_TEMPLATES: [&str; 5] = ["len({v}) < 3", "{v} ~ \"[a-z]+\"", "{v} !~ \"a*\"", "{v} == \"ab\"", "len({v}) >= 2"];
const RET_TEMPLATES: [&str; 4] = ["ret > 3", "ret == 0", "ret < -2", "ret != 1"];

fn random_constraints(rng: &mut impl Rng, params: &[(String, Type)]) -> Vec<String> {
    let mut out = Vec::new();
    for (name, ty) in params {
        if !rng.random_bool(0.35) {
            continue;
        }
        let text = match ty {
            Type::Int => INT_TEMPLATES[rng.random_range(0..INT_TEMPLATES.len())],
            Type::String => STR_TEMPLATES[rng.random_range(0..STR_TEMPLATES.len())],
            Type::Bool => ["{v}", "!{v}"][rng.random_range(0..2)],
        };
        out.push(text.replace("{v}", name));
    }
    out
}

fn run_model(project: &Project, method: &ElementId, cfg: &ControlFlowGraph, model: &BTreeMap<String, Value>) -> Trace {
    let args: Vec<Value> = cfg.params.iter().map(|(n, _)| model[n].clone()).collect();
    match concrete_execute(project, method, &args, DEFAULT_FUEL) {
        Ok(t) => t,
        Err(ExecError::DivisionByZero(t)) | Err(ExecError::FuelExhausted(t)) => *t,
        Err(e) => panic!("concrete execution failed: {e}"),
    }
}

fn holds(e: &SymExpr, model: &BTreeMap<String, Value>) -> bool {
    matches!(e.eval(model), Ok(Value::Bool(true)))
}

/// Random reachability queries on random programs. Every witness must drive
/// the concrete executor to the target and satisfy the constraints. For
/// proven-unreachable queries, random inputs must not reach the target.
pub fn soundness_suite(programs: usize, seed: u64) -> SoundnessReport {
    let mut rng = seeded(seed);
    let mut report = SoundnessReport::default();
    let bounds = Bounds { max_paths: 2_000, ..Bounds::default() };
    for _ in 0..programs {
        let program = random_program(&mut rng);
        let project = Project::from_sources("gen", vec![("gen.mini".into(), program.source.clone())])
            .expect("generated program parses");
        let method = project.resolve_method(&program.methods[0].to_string()).expect("entry");
        let cfg = project.lower(&method).expect("lowers");
        let mut targets: Vec<(Target, Option<&str>)> = Vec::new();
        let stmts: Vec<_> = cfg.blocks.iter().flat_map(|b| b.stmts.iter().map(|s| s.id).chain([b.terminator.id])).collect();
        for _ in 0..3 {
            targets.push((Target::Stmt { method: method.clone(), stmt: stmts[rng.random_range(0..stmts.len())] }, None));
        }
        for q in &program.methods[1..] {
            targets.push((Target::CallTo { method: project.resolve_method(&q.to_string()).expect("callee") }, None));
        }
        targets.push((Target::Return, Some(RET_TEMPLATES[rng.random_range(0..RET_TEMPLATES.len())])));

        let params = query_symbols(&project, &method, false).expect("symbols");
        let with_ret = query_symbols(&project, &method, true).expect("symbols");
        for (target, ret) in targets {
            let texts = random_constraints(&mut rng, &cfg.params);
            let mut query = ReachQuery::new(method.clone(), target.clone());
            query.bounds = bounds;
            query.param_constraints =
                texts.iter().map(|t| parse_constraint(t, &params).expect("template parses")).collect();
            query.return_constraint = ret.map(|r| parse_constraint(r, &with_ret).expect("template parses"));
            let result = match analyze_reachability(&project, &query) {
                Ok(r) => r,
                Err(e) => {
                    report.failures.push(format!("query failed: {e}\n{}", program.source));
                    continue;
                }
            };
            report.queries += 1;
            *report.statuses.entry(result.status.label()).or_default() += 1;
            for model in &result.models {
                report.models += 1;
                let trace = run_model(&project, &method, &cfg, model);
                let mut ok = trace.reaches(&target);
                ok &= query.param_constraints.iter().all(|c| holds(c, model));
                if let (Some(rc), true) = (&query.return_constraint, ok) {
                    let mut full = model.clone();
                    match &trace.returned {
                        Some(v) => {
                            full.insert(RETURN_SYMBOL.into(), v.clone());
                            ok &= holds(rc, &full);
                        }
                        None => ok = false,
                    }
                }
                if ok {
                    report.confirmed += 1;
                } else {
                    report.failures.push(format!(
                        "witness {model:?} does not reach {target:?} under {texts:?} / {ret:?}\n{}",
                        program.source
                    ));
                }
            }
            if result.status == ReachStatus::ProvenUnreachable {
                report.unreachable_probes += 1;
                for _ in 0..50 {
                    let model: BTreeMap<String, Value> =
                        cfg.params.iter().map(|(n, t)| (n.clone(), random_value(&mut rng, *t))).collect();
                    if !query.param_constraints.iter().all(|c| holds(c, &model)) {
                        continue;
                    }
                    let trace = run_model(&project, &method, &cfg, &model);
                    let mut reached = trace.reaches(&target);
                    if let (Some(rc), true) = (&query.return_constraint, reached) {
                        let mut full = model.clone();
                        full.insert(RETURN_SYMBOL.into(), trace.returned.clone().expect("completed"));
                        reached = holds(rc, &full);
                    }
                    if reached {
                        report.failures.push(format!(
                            "{model:?} reaches {target:?} proven unreachable under {texts:?} / {ret:?}\n{}",
                            program.source
                        ));
                    }
                }
            }
        }
    }
    report
}
