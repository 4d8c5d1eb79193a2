use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, Result};

/// Optional settings read from `--config`. Flags win over the file, the file
/// wins over built-in defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub seed: Option<u64>,
    pub env: Option<String>,
    /// Scenarios sampled by `gen-demos`.
    pub count: Option<usize>,
    pub pool_size: Option<usize>,
    pub latent_dim: Option<usize>,
    pub n: Option<usize>,
    pub n_rep: Option<usize>,
    pub n_target: Option<usize>,
    pub n_drills: Option<usize>,
    pub k: Option<usize>,
    pub noise: Option<f64>,
    pub student: Option<String>,
    pub runs: Option<usize>,
    /// Partial experiment configuration merged over the defaults.
    pub experiment: Option<Value>,
}

impl CliConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::new("config", format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| {
            CliError::new("config", format!("{}: {e}", path.display()))
                .hint("see `teachkit --help` for the recognised keys")
        })
    }
}

/// Recursively overlays `patch` on `base`; objects merge, everything else is
/// replaced.
pub fn merge(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, p) => *b = p.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn merge_is_deep() {
        let mut a = json!({"x": 1, "d": {"n": 3, "n_rep": 1}});
        merge(&mut a, &json!({"d": {"n": 2}, "y": [1]}));
        assert_eq!(a, json!({"x": 1, "d": {"n": 2, "n_rep": 1}, "y": [1]}));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<CliConfig>(r#"{"sed": 1}"#).is_err());
        let c: CliConfig = serde_json::from_str(r#"{"seed": 4, "n_rep": 2}"#).unwrap();
        assert_eq!((c.seed, c.n_rep), (Some(4), Some(2)));
    }
}
