//! Run configuration: a TOML file whose keys mirror the command-line flags.
//! Flags given on the command line take precedence.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use uctg::lexicons::LexiconProfile;

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_GROUPS: usize = 3;
pub const DEFAULT_TOP: usize = 10;
pub const DEFAULT_HUMAN: &str = "human";
/// Overrides the base directory for relative lexicon paths.
pub const LEXICON_DIR_ENV: &str = "UCTG_LEXICON_DIR";

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub pairs: Vec<PathBuf>,
    pub conllu: Option<PathBuf>,
    pub trees: Option<PathBuf>,
    pub lexicons: Option<PathBuf>,
    pub tier: Option<String>,
    pub alpha: Option<f64>,
    pub groups: Option<usize>,
    pub top: Option<usize>,
    pub min_prompt_words: Option<usize>,
    pub min_cont_words: Option<usize>,
    pub max_cont_words: Option<usize>,
    pub human: Option<String>,
    pub format: Option<String>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Loads a config file; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.pairs.iter_mut().for_each(fix);
        for p in [&mut cfg.conllu, &mut cfg.trees, &mut cfg.lexicons, &mut cfg.out].into_iter().flatten() {
            fix(p);
        }
        Ok(cfg)
    }

    pub fn load_opt(path: Option<&Path>) -> Result<Self> {
        path.map(Self::load).transpose().map(Option::unwrap_or_default)
    }
}

/// Lexicon profile file: a list of `[[lexicon]]` tables.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconProfiles {
    #[serde(default, rename = "lexicon")]
    pub lexicons: Vec<LexiconProfile>,
}

impl LexiconProfiles {
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read lexicon profiles {}", path.display()))?;
        let profiles: LexiconProfiles =
            toml::from_str(&text).with_context(|| format!("invalid lexicon profiles {}", path.display()))?;
        let base = match std::env::var_os(LEXICON_DIR_ENV) {
            Some(dir) => PathBuf::from(dir),
            None => path.parent().map(Path::to_path_buf).unwrap_or_default(),
        };
        Ok((profiles, base))
    }
}

pub fn validate_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        bail!("alpha must lie strictly between 0 and 1, got {alpha}");
    }
    Ok(alpha)
}
