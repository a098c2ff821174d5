//! Corpus runner: execute every instance of a manifest and diff the reports
//! against stored goldens.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Parser;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::{dispatch, Cli, Command, EXIT_ERROR};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default)]
    pub instances: Vec<Instance>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Instance {
    pub name: String,
    /// Command line without the program name; paths are relative to the manifest.
    pub args: Vec<String>,
    pub golden: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub name: String,
    pub pass: bool,
    pub exit: i32,
    pub diffs: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct CorpusRun {
    pub results: Vec<InstanceResult>,
    /// Serialized golden-form output of every instance, in manifest order.
    pub outputs: Vec<(String, String)>,
}

impl CorpusRun {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    pub fn summary(&self) -> Value {
        let failed: Vec<&InstanceResult> = self.results.iter().filter(|r| !r.pass).collect();
        json!({
            "instances": self.results.len(),
            "passed": self.results.len() - failed.len(),
            "failed": failed,
            "names": self.results.iter().map(|r| &r.name).collect::<Vec<_>>(),
        })
    }
}

/// Run one instance and return its golden form: `{exit, report}` or `{exit, error}`.
pub fn run_instance(base: &Path, args: &[String]) -> Result<Value> {
    let cli = Cli::try_parse_from(std::iter::once("coarse-cancel".to_string()).chain(args.iter().cloned()))
        .with_context(|| format!("bad corpus arguments {args:?}"))?;
    if matches!(cli.command, Command::Corpus { .. }) {
        bail!("corpus instances cannot run corpora");
    }
    let saved = coarse_cancel::tol();
    coarse_cancel::set_tolerance(cli.tolerance);
    let out = dispatch(&cli, base);
    coarse_cancel::set_tolerance(saved);
    Ok(match out {
        Ok(o) => json!({ "exit": o.exit, "report": o.report }),
        Err(e) => {
            let prefix = format!("{}/", base.display());
            json!({ "exit": EXIT_ERROR, "error": format!("{e:#}").replace(&prefix, "") })
        }
    })
}

/// Execute a manifest in the current worker pool; with `bless`, rewrite the goldens.
pub fn run_manifest(path: &Path, bless: bool) -> Result<CorpusRun> {
    let manifest: Manifest = crate::io::read_json(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut results = vec![];
    let mut outputs = vec![];
    for inst in &manifest.instances {
        let got = run_instance(base, &inst.args)?;
        let text = serde_json::to_string_pretty(&got)? + "\n";
        let golden_path = base.join(&inst.golden);
        let diffs = if bless {
            if let Some(dir) = golden_path.parent() {
                fs::create_dir_all(dir)?;
            }
            fs::write(&golden_path, &text).with_context(|| format!("cannot write {}", golden_path.display()))?;
            vec![]
        } else {
            match crate::io::read_value(&golden_path) {
                Ok(want) => {
                    let mut d = vec![];
                    diff(&want, &got, "$", &mut d);
                    d
                }
                Err(e) => vec![format!("{e:#}")],
            }
        };
        let exit = got["exit"].as_i64().unwrap_or(EXIT_ERROR as i64) as i32;
        results.push(InstanceResult { name: inst.name.clone(), pass: diffs.is_empty(), exit, diffs });
        outputs.push((inst.name.clone(), text));
    }
    Ok(CorpusRun { results, outputs })
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-9 * 1f64.max(a.abs()).max(b.abs())
}

/// Structural comparison; numbers agree within a relative 1e-9.
pub fn diff(want: &Value, got: &Value, at: &str, out: &mut Vec<String>) {
    match (want, got) {
        (Value::Number(a), Value::Number(b)) => {
            let (a, b) = (a.as_f64().unwrap(), b.as_f64().unwrap());
            if !close(a, b) {
                out.push(format!("{at}: expected {a}, got {b}"));
            }
        }
        (Value::Array(a), Value::Array(b)) => {
            if a.len() != b.len() {
                out.push(format!("{at}: expected {} entries, got {}", a.len(), b.len()));
                return;
            }
            for (i, (x, y)) in a.iter().zip(b).enumerate() {
                diff(x, y, &format!("{at}[{i}]"), out);
            }
        }
        (Value::Object(a), Value::Object(b)) => {
            for (k, x) in a {
                match b.get(k) {
                    Some(y) => diff(x, y, &format!("{at}.{k}"), out),
                    None => out.push(format!("{at}.{k}: missing")),
                }
            }
            for k in b.keys().filter(|k| !a.contains_key(*k)) {
                out.push(format!("{at}.{k}: unexpected"));
            }
        }
        _ if want == got => {}
        _ => out.push(format!("{at}: expected {want}, got {got}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diff_tolerates_rounding_only() {
        let mut d = vec![];
        diff(&json!({"a": [1.0, 2.0]}), &json!({"a": [1.0, 2.0 + 1e-12]}), "$", &mut d);
        assert!(d.is_empty());
        diff(&json!({"a": [1.0, 2.0], "b": true}), &json!({"a": [1.0, 2.5], "c": 1}), "$", &mut d);
        assert_eq!(d.len(), 3, "{d:?}");
    }

    #[test]
    fn empty_manifest() {
        let dir = std::env::temp_dir().join(format!("cc-corpus-empty-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let m = dir.join("manifest.json");
        fs::write(&m, "{\"instances\": []}").unwrap();
        let run = run_manifest(&m, false).unwrap();
        assert!(run.all_passed() && run.results.is_empty());
        fs::remove_dir_all(&dir).unwrap();
    }
}
