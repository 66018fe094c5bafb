#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;

use rydkick::ExperimentConfig;

/// A both-engine scan small enough to finish in seconds.
pub fn small_scan(points: usize) -> ExperimentConfig {
    ExperimentConfig::from_toml(&format!(
        r#"
engine = "both"

[system]
n_i = 5
nu0 = {{ start = 1.45, stop = 1.46, points = {points} }}
f0av = 0.02

[quantum]
q_max = 250.0
points = 110
histograms = true

[classical]
trajectories = 3000
seed = 11
histograms = true

[schedule]
k_final = 60
ratio = 1.5

[analysis]
passes = ["fit", "log_average"]
"#
    ))
    .unwrap()
}

/// Every file under `root` except the manifest, keyed by relative path.
pub fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path
                    .strip_prefix(root)
                    .unwrap()
                    .to_string_lossy()
                    .replace('\\', "/");
                if rel != "manifest" {
                    out.insert(rel, std::fs::read(&path).unwrap());
                }
            }
        }
    }
    out
}
