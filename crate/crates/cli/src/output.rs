//! Atomic file output and report encoders.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Collects artifacts under one output directory.
pub struct OutDir {
    root: PathBuf,
    pub written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::Io(format!("{}: {e}", root.display())))?;
        Ok(OutDir { root: root.to_path_buf(), written: vec![] })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Writes through a temporary sibling and renames into place.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let target = self.root.join(name);
        let tmp = self.root.join(format!(".{name}.tmp"));
        let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", target.display()));
        {
            let mut f = fs::File::create(&tmp).map_err(io)?;
            f.write_all(bytes).map_err(io)?;
            f.sync_all().map_err(io)?;
        }
        fs::rename(&tmp, &target).map_err(io)?;
        self.written.push(target);
        Ok(())
    }

    /// JSON with `schema_version` inserted first.
    pub fn write_json(&mut self, name: &str, kind: &str, body: Value) -> Result<(), CliError> {
        let mut map = serde_json::Map::new();
        map.insert("schema_version".into(), SCHEMA_VERSION.into());
        map.insert("kind".into(), kind.into());
        if let Value::Object(o) = body {
            map.extend(o);
        } else {
            map.insert("data".into(), body);
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(map)).expect("JSON values serialize");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let enc = |e: csv::Error| CliError::Io(format!("{name}: {e}"));
        w.write_record(header).map_err(enc)?;
        for r in rows {
            w.write_record(r).map_err(enc)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(format!("{name}: {e}")))?;
        self.write(name, &bytes)
    }
}

/// Shortest round-tripping decimal; `inf`/`nan` spelled out.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// JSON number, or the string `"inf"` for non-finite values.
pub fn jnum(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or_else(|| Value::String(num(v)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_and_formats() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutDir::create(dir.path()).unwrap();
        out.write_csv("t.csv", &["a", "b"], &[vec!["1".into(), "x, y".into()]]).unwrap();
        assert_eq!(fs::read_to_string(dir.path().join("t.csv")).unwrap(), "a,b\n1,\"x, y\"\n");
        out.write_json("t.json", "test", serde_json::json!({"v": jnum(f64::INFINITY)})).unwrap();
        let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("t.json")).unwrap()).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["v"], "inf");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 2);
        assert_eq!(num(0.1), "0.1");
    }
}
