//! Reading inputs: graphs, windows, groups, ledgers and constants.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use coarse_cancel::action::{ActionSpec, ActionWindow, AcylRow};
use coarse_cancel::grouptheory::{bass_serre_window, AmalgamSpec, GroupSpec, GroupTable};
use coarse_cancel::metric::{GraphSpec, PLANE_DELTA_DEFAULT};
use coarse_cancel::smallcancel::{Constants, ConstantsSpec, DEFAULT_L_S};

pub fn read_value(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text)
        .map_err(|e| anyhow!("{}: malformed JSON at line {} column {}: {e}", path.display(), e.line(), e.column()))
}

/// Accepts the bare document, a report envelope wrapping it in `result`, or a
/// corpus golden `{exit, report}` around such an envelope.
pub fn unwrap_report(v: Value) -> Value {
    match v {
        Value::Object(mut m) if m.contains_key("report") && m.contains_key("exit") => {
            unwrap_report(m.remove("report").unwrap())
        }
        Value::Object(mut m) if m.contains_key("result") && m.contains_key("command") => m.remove("result").unwrap(),
        v => v,
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let v = unwrap_report(read_value(path)?);
    serde_json::from_value(v).with_context(|| format!("{}: unexpected document shape", path.display()))
}

/// Where a tree window came from, so it can be rebuilt with its word problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AmalgamSource {
    pub spec: AmalgamSpec,
    pub radius: usize,
}

/// A space together with an action on it; written by `tree build`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowBundle {
    pub graph: GraphSpec,
    pub action: ActionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amalgam: Option<AmalgamSource>,
}

pub fn load_graph(path: &Path) -> Result<GraphSpec> {
    let v = unwrap_report(read_value(path)?);
    let v = match v {
        Value::Object(mut m) if m.contains_key("graph") => m.remove("graph").unwrap(),
        v => v,
    };
    serde_json::from_value(v).with_context(|| format!("{}: expected a graph with `vertices` and `edges`", path.display()))
}

pub fn load_window(space: &Path, action: Option<&Path>, max_word_length: Option<usize>) -> Result<ActionWindow> {
    let mut w = match action {
        Some(a) => {
            let graph = load_graph(space)?;
            let spec: ActionSpec = read_json(a)?;
            ActionWindow::from_spec(&graph, &spec)?
        }
        None => {
            let b: WindowBundle = read_json(space).context("expected a window bundle or a separate action file")?;
            match b.amalgam {
                Some(src) => {
                    let (data, gens) = src.spec.build()?;
                    let len = max_word_length.unwrap_or(b.action.max_word_length);
                    bass_serre_window(Arc::new(data), &gens, src.radius, len)?
                }
                None => ActionWindow::from_spec(&b.graph, &b.action)?,
            }
        }
    };
    if let Some(m) = max_word_length {
        w.max_word_length = m;
    }
    Ok(w)
}

pub fn load_group(path: &Path) -> Result<GroupTable> {
    let spec: GroupSpec = read_json(path)?;
    Ok(spec.build()?)
}

/// Rows of an acylindricity table: a bare list or any object with a `rows` list.
pub fn load_acyl_rows(path: &Path) -> Result<Vec<AcylRow>> {
    let v = unwrap_report(read_value(path)?);
    let rows = match v {
        Value::Object(mut m) if m.contains_key("rows") => m.remove("rows").unwrap(),
        Value::Array(_) => v,
        _ => bail!("{}: expected a list of acylindricity rows", path.display()),
    };
    Ok(serde_json::from_value(rows)?)
}

pub fn load_constants(path: Option<&Path>) -> Result<Constants> {
    match path {
        Some(p) => {
            let spec: ConstantsSpec = read_json(p)?;
            Ok(Constants::from_spec(&spec)?)
        }
        None => Ok(Constants::canonical(PLANE_DELTA_DEFAULT, DEFAULT_L_S)),
    }
}
