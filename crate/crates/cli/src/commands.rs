//! Command-line front end. Every tool result reachable over HTTP is also
//! available here.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pcw_core::analysis::{interprocedural_dependency, AnalysisError, CallGraph};
use pcw_core::lang::{parse_project, FrontendError, Project, Severity};
use pcw_core::symexec::{analyze_reachability, Bounds, ProcessBackend, SolverConfig, SymexecError};
use pcw_core::tools::{run_tool_script, ActionOutcome, QueryError, ReachabilityRequest, ToolContext, ToolError, ToolModel};
use thiserror::Error;

use crate::config::{ConfigError, ServerConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Symexec(#[from] SymexecError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Tool(#[from] ToolError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Parser)]
#[command(name = "pcw", version, about = "Program comprehension workbench for MiniLang projects")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphFormat {
    Dot,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a project and report its diagnostics.
    Parse {
        dir: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// List `@endpoint` handlers.
    Endpoints {
        dir: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Call graph reachable from a method.
    Callgraph {
        dir: PathBuf,
        #[arg(long)]
        entry: String,
        /// Emphasize methods that receive values derived from this parameter.
        #[arg(long)]
        emphasize_param: Option<usize>,
        #[arg(long, value_enum, default_value = "dot")]
        format: GraphFormat,
    },
    /// Reachability of a call, statement or return under constraints.
    Reach(ReachArgs),
    /// Run a tool script, optionally applying actions and exporting.
    Tool {
        dir: PathBuf,
        /// Script file, `-` for stdin.
        #[arg(long)]
        script: PathBuf,
        /// Action ids to apply in order.
        #[arg(long = "action")]
        actions: Vec<String>,
        #[arg(long)]
        export: Option<String>,
    },
    /// Start the HTTP service.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the configured port.
        #[arg(long)]
        port: Option<u32>,
    },
}

#[derive(Debug, Args)]
pub struct ReachArgs {
    pub dir: PathBuf,
    #[arg(long)]
    pub method: String,
    /// `call:<QName>`, `stmt:<id>` or `return`.
    #[arg(long)]
    pub target: String,
    #[arg(long = "constraint")]
    pub constraints: Vec<String>,
    #[arg(long)]
    pub return_constraint: Option<String>,
    #[arg(long)]
    pub loop_unroll: Option<usize>,
    #[arg(long)]
    pub max_paths: Option<usize>,
    #[arg(long)]
    pub inline_depth: Option<usize>,
    #[arg(long)]
    pub int_bound: Option<i64>,
    /// External SMT-LIB solver command line, e.g. `z3 -in`.
    #[arg(long)]
    pub solver: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    pub solver_timeout_ms: u64,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

fn open(dir: &Path) -> Result<Project, CliError> {
    Ok(Project::open(dir)?)
}

fn json_line(out: &mut dyn Write, value: &impl serde::Serialize) -> Result<(), CliError> {
    writeln!(out, "{}", serde_json::to_string_pretty(value).expect("output serializes"))?;
    Ok(())
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Parse { dir, format } => parse(&dir, format, out),
        Command::Endpoints { dir, format } => endpoints(&dir, format, out),
        Command::Callgraph { dir, entry, emphasize_param, format } => {
            let project = open(&dir)?;
            let entry = project.resolve_method(&entry)?;
            let graph = CallGraph::build(&project, std::slice::from_ref(&entry))?;
            let emphasized = match emphasize_param {
                Some(p) => interprocedural_dependency(&graph, &entry, p)?,
                None => BTreeSet::new(),
            };
            match format {
                GraphFormat::Dot => write!(out, "{}", graph.to_dot(&emphasized))?,
                GraphFormat::Json => json_line(out, &graph.to_json(&emphasized))?,
            }
            Ok(())
        }
        Command::Reach(args) => reach(args, out),
        Command::Tool { dir, script, actions, export } => {
            let text = if script.as_os_str() == "-" {
                let mut s = String::new();
                std::io::stdin().read_to_string(&mut s)?;
                s
            } else {
                std::fs::read_to_string(&script)?
            };
            let ctx = ToolContext::new(Arc::new(open(&dir)?));
            let mut tool = run_tool_script(&text, &ctx)?;
            let mut last = None;
            for a in &actions {
                last = Some(tool.apply(a)?);
            }
            match (export, last) {
                (Some(format), _) => write!(out, "{}", tool.export(&format)?)?,
                (None, Some(ActionOutcome::Navigate(nav))) => json_line(out, &serde_json::json!({ "navigate": nav }))?,
                (None, _) => json_line(out, tool.model())?,
            }
            Ok(())
        }
        Command::Serve { config, port } => {
            let mut config = match config {
                Some(path) => ServerConfig::load(&path)?,
                None => ServerConfig::default(),
            };
            if let Some(p) = port {
                config.port = p;
                config.validate()?;
            }
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(crate::server::serve(config))?;
            Ok(())
        }
    }
}

fn parse(dir: &Path, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let forest = parse_project(dir)?;
    let errors = forest.diagnostics.iter().filter(|d| d.severity == Severity::Error).count();
    let diagnostics = forest.diagnostics.clone();
    let files: Vec<String> = forest.files.iter().map(|f| f.path.clone()).collect();
    let methods = if errors == 0 {
        let project = Project::from_forest("project", forest)?;
        Some(project.index().method_ids().count())
    } else {
        None
    };
    match format {
        Format::Json => {
            json_line(out, &serde_json::json!({ "files": files, "methods": methods, "diagnostics": diagnostics }))?
        }
        Format::Text => {
            for d in &diagnostics {
                writeln!(out, "{}:{}:{}: {:?}: {}", d.file, d.line, d.column, d.severity, d.message)?;
            }
            match methods {
                Some(m) => writeln!(out, "{} file(s), {m} method(s), {} diagnostic(s)", files.len(), diagnostics.len())?,
                None => writeln!(out, "{} file(s), {errors} error(s)", files.len())?,
            }
        }
    }
    if errors > 0 {
        return Err(FrontendError::InvalidForest(diagnostics).into());
    }
    Ok(())
}

fn endpoints(dir: &Path, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let ctx = ToolContext::new(Arc::new(open(dir)?));
    let tool = run_tool_script(r#"{"tool": "apiEndpointCatalog"}"#, &ctx)?;
    let ToolModel::Tree { items, .. } = tool.model() else { unreachable!("the catalog is a tree") };
    let project = &ctx.project;
    let rows: Vec<serde_json::Value> = items
        .iter()
        .map(|item| {
            let id = item.element_id.as_ref().expect("catalog items name their handler");
            let handler = project.index().qualified_name(id).map(|q| q.to_string());
            let span = match item.action.as_ref().map(|a| &a.kind) {
                Some(pcw_core::tools::ActionKind::Navigate { span, .. }) => Some(span.clone()),
                _ => None,
            };
            serde_json::json!({ "label": item.label, "handler": handler, "elementId": id, "span": span })
        })
        .collect();
    match format {
        Format::Json => json_line(out, &rows)?,
        Format::Text => {
            for (item, row) in items.iter().zip(&rows) {
                let at = match &row["span"] {
                    serde_json::Value::Null => String::new(),
                    s => format!(
                        "{}:{}:{}",
                        s["file"].as_str().unwrap_or_default(),
                        s["startLine"],
                        s["startCol"]
                    ),
                };
                writeln!(out, "{}\t{}\t{at}", item.label, row["handler"].as_str().unwrap_or_default())?;
            }
        }
    }
    Ok(())
}

fn reach(args: ReachArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let project = open(&args.dir)?;
    let defaults = Bounds::default();
    let bounds = Bounds {
        loop_unroll: args.loop_unroll.unwrap_or(defaults.loop_unroll),
        max_paths: args.max_paths.unwrap_or(defaults.max_paths),
        inline_depth: args.inline_depth.unwrap_or(defaults.inline_depth),
    };
    let mut solver = SolverConfig::default();
    if let Some(b) = args.int_bound {
        if b <= 0 {
            return Err(CliError::Usage("--int-bound must be positive".into()));
        }
        solver.int_bound = b;
    }
    if let Some(cmd) = &args.solver {
        solver.backend = Some(
            ProcessBackend::from_command(cmd, Duration::from_millis(args.solver_timeout_ms))
                .ok_or_else(|| CliError::Usage("--solver is empty".into()))?,
        );
    }
    let request = ReachabilityRequest {
        method: args.method,
        target: args.target,
        constraints: args.constraints,
        return_constraint: args.return_constraint,
        bounds: Some(bounds),
    };
    let query = request.to_query(&project, &solver, bounds)?;
    let report = analyze_reachability(&project, &query)?;
    match args.format {
        Format::Json => {
            let mut value = serde_json::to_value(&report).expect("report serializes");
            // Methods whose CFGs the query needed, with lowering counts.
            let lowered: serde_json::Map<String, serde_json::Value> = project
                .lowering_counts()
                .into_iter()
                .filter_map(|(id, n)| project.index().qualified_name(&id).map(|q| (q.to_string(), n.into())))
                .collect();
            value["loweredMethods"] = lowered.into();
            json_line(out, &value)?
        }
        Format::Text => {
            writeln!(out, "Status: {}", report.status.label())?;
            writeln!(out, "Paths explored: {}{}", report.paths_explored, if report.truncated { " (truncated)" } else { "" })?;
            for (i, model) in report.models.iter().enumerate() {
                let values: Vec<String> = model.iter().map(|(k, v)| format!("{k} = {v}")).collect();
                writeln!(out, "Witness {}: {}", i + 1, values.join(", "))?;
            }
            for reason in &report.unknown {
                writeln!(out, "Unknown: {reason}")?;
            }
        }
    }
    Ok(())
}
