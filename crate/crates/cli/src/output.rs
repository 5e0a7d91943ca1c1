use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use tll_core::TllError;

use crate::{Format, GlobalArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(TllError),
    /// A run finished but its verdict is a numerical failure.
    Numerical(String),
    SuiteFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::SuiteFailed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Numerical(m) => write!(f, "{m}"),
            CliError::SuiteFailed(n) => write!(f, "{n} suite(s) failed"),
        }
    }
}

impl From<TllError> for CliError {
    fn from(e: TllError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(TllError::Io(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(TllError::Json(e))
    }
}

/// Reproducibility record written next to every command's outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: Value,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub wall_time_s: f64,
    pub seed: Option<u64>,
    pub threads: usize,
}

/// Collects outputs of one command and finally writes the manifest.
pub struct Run<'a> {
    pub global: &'a GlobalArgs,
    command: &'static str,
    started: Instant,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl<'a> Run<'a> {
    pub fn start(global: &'a GlobalArgs, command: &'static str) -> Result<Self, CliError> {
        fs::create_dir_all(&global.out)?;
        Ok(Run {
            global,
            command,
            started: Instant::now(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.global.out.join(name)
    }

    pub fn record(&mut self, path: PathBuf) {
        self.outputs.push(path);
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        fs::write(&path, contents)?;
        self.record(path.clone());
        Ok(path)
    }

    /// Writes a main result as `<stem>.json` or `<stem>.csv` per `--format`
    /// and echoes it to stdout.
    pub fn emit(&mut self, stem: &str, json: &Value, csv: impl FnOnce() -> String) -> Result<(), CliError> {
        let text = match self.global.format {
            Format::Json => serde_json::to_string_pretty(json)? + "\n",
            Format::Csv => csv(),
        };
        let ext = match self.global.format {
            Format::Json => "json",
            Format::Csv => "csv",
        };
        self.write(&format!("{stem}.{ext}"), &text)?;
        print!("{text}");
        Ok(())
    }

    pub fn finish(self, config: Value) -> Result<(), CliError> {
        let threads = if self.global.threads > 0 {
            self.global.threads
        } else {
            rayon::current_num_threads()
        };
        let manifest = RunManifest {
            command: self.command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config,
            inputs: self.inputs,
            outputs: self.outputs,
            wall_time_s: self.started.elapsed().as_secs_f64(),
            seed: self.global.seed,
            threads,
        };
        fs::write(
            self.global.out.join("run_manifest.json"),
            serde_json::to_string_pretty(&manifest)? + "\n",
        )?;
        Ok(())
    }
}

/// Two-column `key,value` CSV of a flat JSON object; nested values are
/// written as compact JSON.
pub fn flat_csv(value: &Value) -> String {
    let mut out = String::from("key,value\n");
    if let Value::Object(map) = value {
        for (k, v) in map {
            let cell = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("{k},\"{}\"\n", cell.replace('"', "\"\"")));
        }
    }
    out
}
