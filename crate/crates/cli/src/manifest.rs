//! Run manifests: a line-oriented `key=value` record written next to every
//! output file. `arg=` lines hold the exact argument vector, one per line, so
//! `replay` can re-run the command that produced the file.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub params: Vec<(String, String)>,
    pub outputs: Vec<PathBuf>,
    pub args: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, params: Vec<(String, String)>, outputs: Vec<PathBuf>, args: Vec<String>) -> Self {
        Self {
            command: command.to_string(),
            version: VERSION.to_string(),
            params,
            outputs,
            args,
        }
    }

    /// `<output>.manifest`
    pub fn path_for(output: &Path) -> PathBuf {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest");
        PathBuf::from(name)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command={}", self.command);
        let _ = writeln!(out, "version={}", self.version);
        for (k, v) in &self.params {
            let _ = writeln!(out, "{k}={v}");
        }
        for p in &self.outputs {
            let _ = writeln!(out, "output={}", p.display());
        }
        for a in &self.args {
            let _ = writeln!(out, "arg={a}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut command = None;
        let mut version = None;
        let mut params = Vec::new();
        let mut outputs = Vec::new();
        let mut args = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("manifest line {} has no '=': {line:?}", lineno + 1);
            };
            match key {
                "command" => command = Some(value.to_string()),
                "version" => version = Some(value.to_string()),
                "output" => outputs.push(PathBuf::from(value)),
                "arg" => args.push(value.to_string()),
                _ => params.push((key.to_string(), value.to_string())),
            }
        }
        let command = command.context("manifest has no command")?;
        if args.is_empty() {
            bail!("manifest has no arg lines");
        }
        Ok(Self {
            command,
            version: version.context("manifest has no version")?,
            params,
            outputs,
            args,
        })
    }

    pub fn write_for(&self, output: &Path) -> Result<PathBuf> {
        let path = Self::path_for(output);
        fs::write(&path, self.render()).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
