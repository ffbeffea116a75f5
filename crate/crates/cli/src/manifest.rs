use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use charprobe::corpus::file_checksum;

use crate::Failure;

pub const MANIFEST_FILE: &str = "manifest.json";

/// What produced an output directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command_line: String,
    pub global_seed: u64,
    /// Input path → FNV-1a 64 checksum, hex. Directories contribute one
    /// entry per file.
    pub inputs: BTreeMap<String, String>,
    /// Output files written next to the manifest, same checksum.
    pub outputs: BTreeMap<String, String>,
    pub tool_version: String,
    pub timestamp: String,
}

fn checksum_hex(path: &Path) -> Result<String, Failure> {
    Ok(format!("{:016x}", file_checksum(path)?))
}

fn hash_into(map: &mut BTreeMap<String, String>, path: &Path, skip_manifest: bool) -> Result<(), Failure> {
    if path.is_dir() {
        let mut entries: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .collect();
        entries.sort();
        for p in entries {
            if skip_manifest && p.file_name().is_some_and(|n| n == MANIFEST_FILE) {
                continue;
            }
            hash_into(map, &p, skip_manifest)?;
        }
    } else {
        map.insert(path.display().to_string(), checksum_hex(path)?);
    }
    Ok(())
}

/// Writes `manifest.json` into `out`, hashing `inputs` and everything
/// already written to `out`.
pub fn write_manifest(out: &Path, seed: u64, inputs: &[&Path]) -> Result<(), Failure> {
    let mut input_hashes = BTreeMap::new();
    for p in inputs {
        hash_into(&mut input_hashes, p, false)?;
    }
    let mut outputs = BTreeMap::new();
    hash_into(&mut outputs, out, true)?;
    let outputs = outputs
        .into_iter()
        .map(|(k, v)| {
            let rel = Path::new(&k).strip_prefix(out).map(|r| r.display().to_string()).unwrap_or(k);
            (rel, v)
        })
        .collect();
    let manifest = RunManifest {
        command_line: std::env::args().collect::<Vec<_>>().join(" "),
        global_seed: seed,
        inputs: input_hashes,
        outputs,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    let path = out.join(MANIFEST_FILE);
    fs::write(&path, json + "\n").map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}
