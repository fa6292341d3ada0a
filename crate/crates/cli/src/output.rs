//! Artifact writing. Every file carries the config hash; CSV bytes depend
//! only on the config.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

/// Shortest round-trip scientific form.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

pub struct Artifacts {
    dir: PathBuf,
    hash: String,
    written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn new(dir: &Path, hash: String) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), hash, written: Vec::new() })
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path);
        Ok(())
    }

    /// `# config_hash=…`, a header row, then one line per row.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let mut text = format!("# config_hash={}\n{}\n", self.hash, header.join(","));
        for row in rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        self.write(name, &text)
    }

    /// Pretty JSON with `config_hash`, a `meta` block and the body fields.
    pub fn json<T: Serialize>(&mut self, name: &str, config: &impl Serialize, body: &T) -> Result<()> {
        let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let mut doc = json!({
            "config_hash": self.hash,
            "meta": {
                "tool": concat!("lrfput ", env!("CARGO_PKG_VERSION")),
                "created_unix": created,
                "config": config,
            },
        });
        if let (Value::Object(map), Value::Object(fields)) = (&mut doc, serde_json::to_value(body)?) {
            map.extend(fields);
        }
        self.write(name, &(serde_json::to_string_pretty(&doc)? + "\n"))
    }

    pub fn text(&mut self, name: &str, contents: &str) -> Result<()> {
        self.write(name, contents)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_round_trips() {
        for v in [0.1, -3.25e-17, 1.0, 123456.789, 0.0] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(1e-20), "1e-20");
    }

    #[test]
    fn csv_and_json_carry_hash() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = Artifacts::new(dir.path(), "deadbeef".into()).unwrap();
        out.csv("a.csv", &["x", "y"], vec![vec![num(1.0), num(2.0)]]).unwrap();
        out.json("a.json", &json!({"k": 1}), &json!({"value": 3})).unwrap();
        let csv = fs::read_to_string(dir.path().join("a.csv")).unwrap();
        assert_eq!(csv, "# config_hash=deadbeef\nx,y\n1e0,2e0\n");
        let doc: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
        assert_eq!(doc["config_hash"], "deadbeef");
        assert_eq!(doc["value"], 3);
        assert_eq!(out.written().len(), 2);
    }
}
