//! Declarative JSON tool scripts.
//!
//! ```json
//! {"tool": "callGraphExplorer",
//!  "roots": ["Configurations.ConfigurationController.CreateConfiguration"],
//!  "emphasize": {"param": 0}}
//! ```

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::analysis::CallGraph;
use crate::lang::Project;
use crate::slice::{ElementId, Slice};
use crate::symexec::{Bounds, SolverConfig};

use super::{
    CallGraphExplorer, Controller, EndpointCatalog, ExplorerOptions, ReachabilityInspector, ReachabilityRequest,
    StructureBrowser, ToolError, ToolInstance,
};

/// Project and analysis defaults a script runs against.
#[derive(Clone)]
pub struct ToolContext {
    pub project: Arc<Project>,
    pub solver: SolverConfig,
    pub bounds: Bounds,
}

impl ToolContext {
    pub fn new(project: Arc<Project>) -> Self {
        ToolContext { project, solver: SolverConfig::default(), bounds: Bounds::default() }
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct SliceParams {
    /// Element ids to include; the whole project when absent.
    #[serde(default)]
    elements: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct Emphasis {
    #[serde(default)]
    entry: Option<String>,
    param: usize,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PreExpand {
    All(String),
    Methods(Vec<String>),
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct ExplorerParams {
    roots: Vec<String>,
    #[serde(default)]
    emphasize: Option<Emphasis>,
    #[serde(default)]
    pre_expand: Option<PreExpand>,
}

fn params<T: DeserializeOwned>(value: serde_json::Value) -> Result<T, ToolError> {
    serde_json::from_value(value).map_err(|e| ToolError::ParamValidation(e.to_string()))
}

fn slice_of(ctx: &ToolContext, elements: Option<Vec<String>>) -> Result<Slice, ToolError> {
    match elements {
        None => Ok(ctx.project.full_slice()?),
        Some(ids) => {
            let mut slice = Slice::empty(ctx.project.provider());
            for id in ids {
                slice = slice.include(&ElementId::new(id))?;
            }
            Ok(slice)
        }
    }
}

fn method(ctx: &ToolContext, name: &str) -> Result<ElementId, ToolError> {
    ctx.project.resolve_method(name).map_err(|e| ToolError::ParamValidation(e.to_string()))
}

/// Parses `text` and instantiates the named tool.
pub fn run_tool_script(text: &str, ctx: &ToolContext) -> Result<ToolInstance, ToolError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ToolError::ScriptSyntaxError {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut value = value;
    let tool = value
        .as_object_mut()
        .and_then(|o| o.remove("tool"))
        .and_then(|t| t.as_str().map(str::to_string))
        .ok_or_else(|| ToolError::ParamValidation("a script must be an object with a string `tool`".into()))?;
    let controller = match tool.as_str() {
        "structureBrowser" => {
            let p: SliceParams = params(value)?;
            Controller::Structure(StructureBrowser::new(slice_of(ctx, p.elements)?)?)
        }
        "apiEndpointCatalog" => {
            let p: SliceParams = params(value)?;
            Controller::Catalog(EndpointCatalog::new(&slice_of(ctx, p.elements)?))
        }
        "callGraphExplorer" => {
            let p: ExplorerParams = params(value)?;
            if p.roots.is_empty() {
                return Err(ToolError::ParamValidation("`roots` must not be empty".into()));
            }
            let roots = p.roots.iter().map(|r| method(ctx, r)).collect::<Result<Vec<_>, _>>()?;
            let graph = Arc::new(CallGraph::build(&ctx.project, &roots)?);
            let mut options = ExplorerOptions::default();
            if let Some(e) = &p.emphasize {
                let entry = match &e.entry {
                    Some(name) => method(ctx, name)?,
                    None if roots.len() == 1 => roots[0].clone(),
                    None => {
                        return Err(ToolError::ParamValidation("`emphasize.entry` is required with several roots".into()))
                    }
                };
                options.emphasize_entry = Some(entry);
                options.emphasize_param = Some(e.param);
            }
            let explicit = p.pre_expand.is_some();
            options.pre_expand = match p.pre_expand {
                Some(PreExpand::All(s)) if s == "all" => graph.nodes.clone(),
                Some(PreExpand::All(s)) => {
                    return Err(ToolError::ParamValidation(format!("`preExpand` must be \"all\" or a list, got {s:?}")))
                }
                Some(PreExpand::Methods(names)) => {
                    names.iter().map(|n| method(ctx, n)).collect::<Result<BTreeSet<_>, _>>()?
                }
                None => BTreeSet::new(),
            };
            let mut explorer = CallGraphExplorer::new(graph, options)?;
            if !explicit {
                // With emphasis and no explicit expansion, show where the value flows.
                explorer.expand_all(explorer.emphasized().clone());
            }
            Controller::CallGraph(explorer)
        }
        "reachabilityInspector" => {
            let request: ReachabilityRequest = params(value)?;
            Controller::Reachability(Box::new(ReachabilityInspector::new(
                ctx.project.clone(),
                request,
                ctx.solver.clone(),
                ctx.bounds,
            )))
        }
        other => return Err(ToolError::UnknownTool(other.to_string())),
    };
    Ok(ToolInstance::new(controller))
}
