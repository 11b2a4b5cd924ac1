use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crestwave::RunConfig;

pub const CONFIG_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Identities,
    Commutators,
    Inequalities,
    Taylor,
    Crest,
    Transport,
    Characterization,
    All,
}

impl Suite {
    pub const EACH: [Suite; 7] = [
        Suite::Identities,
        Suite::Commutators,
        Suite::Inequalities,
        Suite::Taylor,
        Suite::Crest,
        Suite::Transport,
        Suite::Characterization,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Commutators => "commutators",
            Suite::Inequalities => "inequalities",
            Suite::Taylor => "taylor",
            Suite::Crest => "crest",
            Suite::Transport => "transport",
            Suite::Characterization => "characterization",
            Suite::All => "all",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub suite: Suite,
    pub trials: usize,
    /// Grid size for identities and the coarse inequality resolution.
    pub n: usize,
    /// Grid size for the commutator identities, which step the dynamics.
    pub commutator_n: usize,
    /// Family size for the characterization constants.
    pub states: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { suite: Suite::Identities, trials: 100, n: 256, commutator_n: 128, states: 50, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub r_list: Vec<f64>,
    pub n_list: Vec<usize>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { r_list: vec![1.5, 2.5], n_list: vec![128, 256, 512, 1024, 2048] }
    }
}

/// Everything a config file can hold. Every section is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub format_version: u32,
    pub run: RunConfig,
    pub verify: VerifyConfig,
    pub scan: ScanConfig,
}

impl Default for FileConfig {
    fn default() -> Self {
        Self {
            format_version: CONFIG_FORMAT_VERSION,
            run: RunConfig::default(),
            verify: VerifyConfig::default(),
            scan: ScanConfig::default(),
        }
    }
}

/// Reads `path` (or the defaults) and applies `key=value` overrides.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<FileConfig> {
    let mut doc = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str::<Value>(&text).map_err(|e| {
                let line = text.lines().nth(e.line().saturating_sub(1)).unwrap_or("");
                anyhow!("{}:{}:{}: {e}\n    {line}", p.display(), e.line(), e.column())
            })?
        }
        None => serde_json::to_value(FileConfig::default())?,
    };
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    let cfg: FileConfig = serde_json::from_value(doc).context("invalid configuration")?;
    if cfg.format_version != CONFIG_FORMAT_VERSION {
        bail!("unsupported config format_version {}", cfg.format_version);
    }
    Ok(cfg)
}

/// `a.b.c=v`: `v` is parsed as JSON, falling back to a plain string.
pub fn apply_override(doc: &mut Value, spec: &str) -> Result<()> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| anyhow!("override `{spec}` is not key=value"))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            bail!("override key `{key}` has an empty component");
        }
        let obj = match cur {
            Value::Object(m) => m,
            Value::Null => {
                *cur = Value::Object(Default::default());
                cur.as_object_mut().unwrap()
            }
            _ => bail!("override `{key}`: `{}` is not a section", parts[..i].join(".")),
        };
        if i + 1 == parts.len() {
            obj.insert((*part).to_string(), value);
            return Ok(());
        }
        cur = obj.entry((*part).to_string()).or_insert(Value::Null);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_reach_nested_fields() {
        let cfg = load(None, &["run.grid_n=64".into(), "run.ic.kind=mode".into(), "run.ic.k=-1".into(), "run.ic.eps=0.01".into()])
            .unwrap();
        assert_eq!(cfg.run.grid_n, 64);
        assert_eq!(cfg.run.ic, crestwave::InitialData::Mode { k: -1, eps: 0.01 });
    }

    #[test]
    fn bad_overrides_are_rejected() {
        assert!(load(None, &["run.grid_n".into()]).is_err());
        assert!(load(None, &["run.no_such_field=1".into()]).is_err());
        assert!(load(None, &["run.grid_n.x=1".into()]).is_err());
    }
}
