//! Flat `key = value` run manifests.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use qcdperf_core::MachineProfile;

/// Everything needed to repeat a run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunManifest {
    /// Keys in file order.
    entries: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) {
        let key = key.into();
        let value = value.to_string().replace('\n', " ");
        match self.entries.iter_mut().find(|(k, _)| *k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key, value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).with_context(|| format!("manifest has no {key:?} entry"))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn set_host(&mut self, p: &MachineProfile) {
        self.set("host.label", &p.label);
        self.set("host.cache_line_bytes", p.cache_line_bytes);
        self.set("host.l2_bytes", p.l2_bytes);
        self.set("host.llc_bytes", p.llc_bytes.map_or("unknown".to_string(), |b| b.to_string()));
        self.set("host.hardware_threads", p.hardware_threads);
    }

    /// Resolved argument vector, without the program name.
    pub fn args(&self) -> Result<Vec<String>> {
        let raw = self.require("args")?;
        serde_json::from_str(raw).with_context(|| format!("manifest args entry is not a JSON string list: {raw}"))
    }

    pub fn output(&self) -> Result<PathBuf> {
        Ok(PathBuf::from(self.require("output")?))
    }

    pub fn render(&self) -> String {
        let mut s = String::from("# qcdperf run manifest\n");
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut m = RunManifest::new();
        let mut seen = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("manifest line {}: expected `key = value`, got {line:?}", n + 1);
            };
            let k = k.trim();
            if seen.insert(k.to_string(), n).is_some() {
                bail!("manifest line {}: duplicate key {k:?}", n + 1);
            }
            m.entries.push((k.to_string(), v.trim().to_string()));
        }
        Ok(m)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render()).with_context(|| format!("writing manifest {}", path.display()))
    }
}

/// `<csv>.manifest`
pub fn manifest_path(csv: &Path) -> PathBuf {
    sibling(csv, "manifest")
}

/// `<csv>.<ext>` next to the output file.
pub fn sibling(csv: &Path, ext: &str) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}
