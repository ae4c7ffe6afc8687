use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use gridsched::ga::GaConfig;
use serde::{Deserialize, Deserializer};

use crate::CliError;

/// Environment variable naming the default output directory.
pub const OUTPUT_ENV: &str = "GRIDSCHED_OUT";
const FALLBACK_OUTPUT: &str = "gridsched-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Static,
    CcfGreedy,
    CcfGa,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Static => "static",
            Strategy::CcfGreedy => "ccf-greedy",
            Strategy::CcfGa => "ccf-ga",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim() {
            "static" => Ok(Strategy::Static),
            "ccf-greedy" => Ok(Strategy::CcfGreedy),
            "ccf-ga" => Ok(Strategy::CcfGa),
            "" => Err(CliError::Usage("strategy is empty".into())),
            other => Err(CliError::Usage(format!(
                "unknown strategy `{other}` (expected static, ccf-greedy or ccf-ga)"
            ))),
        }
    }
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<PathBuf>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(PathBuf),
        Many(Vec<PathBuf>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(p) => vec![p],
        OneOrMany::Many(v) => v,
    })
}

fn one() -> usize {
    1
}

/// Experiment description read from a TOML file. Relative paths are taken
/// relative to the file's directory.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Graph files or directories of graph files.
    #[serde(alias = "graph", deserialize_with = "one_or_many")]
    pub graphs: Vec<PathBuf>,
    pub platform: PathBuf,
    /// Strategy for `schedule`.
    #[serde(default)]
    pub strategy: Option<String>,
    /// Strategies for `compare`.
    #[serde(default)]
    pub strategies: Vec<String>,
    #[serde(default)]
    pub ga: GaConfig,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default = "one")]
    pub repetitions: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Write the GA history file next to each ccf-ga schedule.
    #[serde(default)]
    pub history: bool,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?;
        for g in &mut cfg.graphs {
            *g = base.join(&*g);
        }
        cfg.platform = base.join(&cfg.platform);
        if let Some(out) = &mut cfg.output_dir {
            *out = base.join(&*out);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.graphs.is_empty() {
            return Err(CliError::Validation("config lists no graphs".into()));
        }
        if self.repetitions == 0 {
            return Err(CliError::Validation("repetitions must be at least 1".into()));
        }
        for p in self.graphs.iter().chain([&self.platform]) {
            if !p.exists() {
                return Err(CliError::Validation(format!("{} does not exist", p.display())));
            }
        }
        self.ga.validate().map_err(CliError::Validation)
    }

    pub fn schedule_strategy(&self) -> Result<Strategy, CliError> {
        match &self.strategy {
            Some(s) => s.parse(),
            None => Err(CliError::Usage("config has no `strategy`".into())),
        }
    }

    pub fn compare_strategies(&self) -> Result<Vec<Strategy>, CliError> {
        if self.strategies.len() < 2 {
            return Err(CliError::Usage("compare needs at least two `strategies`".into()));
        }
        self.strategies.iter().map(|s| s.parse()).collect()
    }

    /// `seeds` if given, else `[seed]`, else the GA section's seed.
    pub fn seed_list(&self) -> Vec<u64> {
        if !self.seeds.is_empty() {
            self.seeds.clone()
        } else {
            vec![self.seed.unwrap_or(self.ga.seed)]
        }
    }

    /// Graph files in order; directories expand to their sorted graph files.
    pub fn graph_files(&self) -> Result<Vec<PathBuf>, CliError> {
        let mut out = Vec::new();
        for p in &self.graphs {
            if p.is_dir() {
                let mut found: Vec<PathBuf> = std::fs::read_dir(p)?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|f| is_graph_file(f))
                    .collect();
                found.sort();
                out.extend(found);
            } else {
                out.push(p.clone());
            }
        }
        Ok(out)
    }

    pub fn output_dir(&self, flag: Option<&Path>) -> PathBuf {
        resolve_output_dir(flag, self.output_dir.as_deref())
    }
}

fn is_graph_file(path: &Path) -> bool {
    let ext = path.extension().and_then(|e| e.to_str());
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
    matches!(ext, Some("json") | Some("xml")) && stem != "manifest"
}

/// Command-line flag, then config value, then the environment, then a fixed
/// default.
pub fn resolve_output_dir(flag: Option<&Path>, configured: Option<&Path>) -> PathBuf {
    flag.or(configured)
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(FALLBACK_OUTPUT))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dir_with_inputs() -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("g.json"), "{}").unwrap();
        std::fs::write(dir.path().join("p.json"), "{}").unwrap();
        dir
    }

    #[test]
    fn parses_and_resolves_paths() {
        let dir = dir_with_inputs();
        let cfg = ExperimentConfig::from_toml(
            "graph = \"g.json\"\nplatform = \"p.json\"\nstrategy = \"ccf-ga\"\nseeds = [3, 4]\n[ga]\ngenerations = 7\n",
            dir.path(),
        )
        .unwrap();
        assert_eq!(cfg.graphs, vec![dir.path().join("g.json")]);
        assert_eq!(cfg.schedule_strategy().unwrap(), Strategy::CcfGa);
        assert_eq!(cfg.seed_list(), vec![3, 4]);
        assert_eq!(cfg.ga.generations, 7);
        assert_eq!(cfg.repetitions, 1);
    }

    #[test]
    fn rejects_bad_configs() {
        let dir = dir_with_inputs();
        let base = dir.path();
        let missing = ExperimentConfig::from_toml("graphs = [\"nope.json\"]\nplatform = \"p.json\"", base);
        assert!(matches!(missing, Err(CliError::Validation(_))));
        let reps = ExperimentConfig::from_toml("graphs = [\"g.json\"]\nplatform = \"p.json\"\nrepetitions = 0", base);
        assert!(matches!(reps, Err(CliError::Validation(_))));
        let unknown = ExperimentConfig::from_toml("graphs = [\"g.json\"]\nplatform = \"p.json\"\nfoo = 1", base);
        assert!(matches!(unknown, Err(CliError::Validation(_))));

        let cfg = ExperimentConfig::from_toml("graphs = [\"g.json\"]\nplatform = \"p.json\"\nstrategy = \"\"", base).unwrap();
        assert!(matches!(cfg.schedule_strategy(), Err(CliError::Usage(_))));
        assert!(matches!(cfg.compare_strategies(), Err(CliError::Usage(_))));
    }

    #[test]
    fn output_dir_precedence() {
        assert_eq!(
            resolve_output_dir(Some(Path::new("a")), Some(Path::new("b"))),
            PathBuf::from("a")
        );
        assert_eq!(resolve_output_dir(None, Some(Path::new("b"))), PathBuf::from("b"));
    }
}
