//! Flat key-value configuration files with command-line overrides.
//!
//! Format: one `key = value` per line, `#` comments. Unknown keys are
//! errors, and every violated constraint is reported, not just the first.

use std::collections::BTreeMap;
use std::path::Path;

pub const KNOWN_KEYS: &[&str] = &[
    "kappa", "points", "speeds", "partition", "samples", "seed", "dt", "epsilon", "cap",
    "gap-scale", "out", "format", "model", "grid", "x", "n", "m", "traces", "outcomes", "stride",
    "integrate", "threads",
];

#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    map: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig, Vec<String>> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| vec![format!("cannot read config {}: {e}", path.display())])?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<FileConfig, Vec<String>> {
        let mut map = BTreeMap::new();
        let mut errors = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line.split_once('=') {
                Some((k, v)) => {
                    let key = k.trim().to_ascii_lowercase();
                    if !KNOWN_KEYS.contains(&key.as_str()) {
                        errors.push(format!("line {}: unknown key \"{key}\"", no + 1));
                    } else if map.insert(key.clone(), v.trim().to_string()).is_some() {
                        errors.push(format!("line {}: duplicate key \"{key}\"", no + 1));
                    }
                }
                None => errors.push(format!("line {}: expected key = value", no + 1)),
            }
        }
        if errors.is_empty() {
            Ok(FileConfig { map })
        } else {
            Err(errors)
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|s| s.as_str())
    }

    /// Fill an unset option from the file, parsing with `parse`.
    pub fn fill<T, F: FnOnce(&str) -> Result<T, String>>(
        &self,
        slot: &mut Option<T>,
        key: &str,
        parse: F,
        errors: &mut Vec<String>,
    ) {
        if slot.is_none() {
            if let Some(raw) = self.get(key) {
                match parse(raw) {
                    Ok(v) => *slot = Some(v),
                    Err(e) => errors.push(format!("config key \"{key}\": {e}")),
                }
            }
        }
    }
}

pub fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|e| e.to_string())
}

pub fn parse_u64(s: &str) -> Result<u64, String> {
    s.trim().parse::<u64>().map_err(|e| e.to_string())
}

pub fn parse_usize(s: &str) -> Result<usize, String> {
    s.trim().parse::<usize>().map_err(|e| e.to_string())
}

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("\"{p}\": {e}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects() {
        let cfg = FileConfig::parse("kappa = 6.0\n# comment\npoints = 0,0.5,1\n").unwrap();
        assert_eq!(cfg.get("kappa"), Some("6.0"));
        assert_eq!(parse_f64_list(cfg.get("points").unwrap()).unwrap(), vec![0.0, 0.5, 1.0]);

        let errs = FileConfig::parse("kappa = 6\nbogus = 1\nkappa = 7\nnoequal\n").unwrap_err();
        assert_eq!(errs.len(), 3, "{errs:?}");
        assert!(errs.iter().any(|e| e.contains("unknown key \"bogus\"")));
        assert!(errs.iter().any(|e| e.contains("duplicate")));
        assert!(errs.iter().any(|e| e.contains("expected key")));
    }
}
