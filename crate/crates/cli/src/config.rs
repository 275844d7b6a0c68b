use std::path::{Path, PathBuf};

use padic_pme::grid::DEFAULT_CELL_CAP;
use padic_pme::initial::InitialCondition;
use padic_pme::verify::{Corruption, VerifyConfig};
use padic_pme::{BallGrid, GridFunction, PowerLaw, ProxConfig, SolverConfig, Vladimirov};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub grid: GridSection,
    pub model: ModelSection,
    pub time: TimeSection,
    pub initial: InitialSection,
    pub solver: ProxConfig,
    pub norms: NormsSection,
    pub contraction: ContractionSection,
    pub verify: VerifySection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub p: u64,
    #[serde(alias = "N")]
    pub n: i32,
    #[serde(alias = "K")]
    pub k: i32,
    pub max_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub alpha: f64,
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSection {
    pub tau: f64,
    #[serde(alias = "T")]
    pub horizon: f64,
    pub refinement: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSection {
    /// `psi0`, `random`, `indicator`, `character:<b>` or `file:<path>`.
    pub generator: String,
    /// Seed for `random`; the run seed when absent.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormsSection {
    /// Smoothness of the AGS seminorm; `alpha` when absent.
    pub s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContractionSection {
    /// Generator of the second initial condition, seeded with `seed + 1`.
    pub other: String,
    /// Additional random pairs.
    pub pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub samples: usize,
    pub pairs: usize,
    /// Suite ids to run; all when empty.
    pub suites: Vec<u8>,
    pub negative_controls: bool,
    /// `none`, `symbol` or `haar`.
    pub corruption: String,
    pub corruption_factor: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            p: 2,
            n: 1,
            k: 3,
            max_cells: DEFAULT_CELL_CAP,
        }
    }
}

impl Default for ModelSection {
    fn default() -> Self {
        Self { alpha: 0.5, m: 2.0 }
    }
}

impl Default for TimeSection {
    fn default() -> Self {
        Self {
            tau: 0.1,
            horizon: 1.0,
            refinement: vec![0.1, 0.05, 0.025, 0.0125],
        }
    }
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            generator: "random".into(),
            seed: None,
        }
    }
}

impl Default for ContractionSection {
    fn default() -> Self {
        Self {
            other: "random".into(),
            pairs: 20,
        }
    }
}

impl Default for VerifySection {
    fn default() -> Self {
        let d = VerifyConfig::default();
        Self {
            samples: d.samples,
            pairs: d.pairs,
            suites: Vec::new(),
            negative_controls: d.negative_controls,
            corruption: "none".into(),
            corruption_factor: 1.01,
        }
    }
}

/// A parsed config plus the directory relative file paths are resolved against.
pub struct Loaded {
    pub config: ExperimentConfig,
    pub base_dir: PathBuf,
}

pub fn load(path: Option<&Path>, seed: Option<u64>) -> Result<Loaded, CliError> {
    let (mut config, base_dir) = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            let config: ExperimentConfig = toml::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            let dir = p.parent().map(Path::to_path_buf).unwrap_or_default();
            (config, dir)
        }
        None => (ExperimentConfig::default(), PathBuf::from(".")),
    };
    if let Some(s) = seed {
        config.seed = s;
    }
    config.validate()?;
    Ok(Loaded { config, base_dir })
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.grid()?;
        self.operator()?;
        self.nonlinearity()?;
        self.solver_config()?;
        for &tau in &self.time.refinement {
            if tau.is_nan() || tau <= 0.0 {
                return Err(config_err(format!(
                    "time.refinement entries must be positive, got {tau}"
                )));
            }
        }
        if self.time.refinement.len() < 2 {
            return Err(config_err("time.refinement needs at least two step sizes"));
        }
        if !(self.solver.tol > 0.0
            && self.solver.mu_min > 0.0
            && self.solver.mu_start >= self.solver.mu_min)
            || !(self.solver.mu_factor > 0.0 && self.solver.mu_factor < 1.0)
        {
            return Err(config_err(
                "solver: need tol > 0, 0 < mu_min <= mu_start and 0 < mu_factor < 1",
            ));
        }
        self.corruption()?;
        if let Some(id) = self
            .verify
            .suites
            .iter()
            .find(|&&id| !(1..=11).contains(&id))
        {
            return Err(config_err(format!(
                "verify.suites: no suite {id} (valid ids are 1 to 11)"
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<BallGrid, CliError> {
        BallGrid::with_cap(self.grid.p, self.grid.n, self.grid.k, self.grid.max_cells)
            .map_err(config_err)
    }

    pub fn operator(&self) -> Result<Vladimirov, CliError> {
        Vladimirov::new(self.grid()?, self.model.alpha).map_err(config_err)
    }

    pub fn nonlinearity(&self) -> Result<PowerLaw, CliError> {
        PowerLaw::new(self.model.m).map_err(config_err)
    }

    pub fn solver_config(&self) -> Result<SolverConfig, CliError> {
        let mut cfg = SolverConfig::new(self.time.tau, self.time.horizon).map_err(config_err)?;
        cfg.prox = self.solver.clone();
        Ok(cfg)
    }

    /// AGS smoothness: `norms.s`, else `alpha`.
    pub fn smoothness(&self) -> Result<f64, CliError> {
        let s = self.norms.s.unwrap_or(self.model.alpha);
        if s > 0.0 && s < 1.0 {
            Ok(s)
        } else {
            Err(config_err(format!(
                "AGS smoothness must lie in (0, 1), got {s} (set norms.s when alpha >= 1)"
            )))
        }
    }

    pub fn corruption(&self) -> Result<Corruption, CliError> {
        let factor = self.verify.corruption_factor;
        match self.verify.corruption.as_str() {
            "none" => Ok(Corruption::None),
            "symbol" => Ok(Corruption::Symbol { factor }),
            "haar" => Ok(Corruption::Haar { factor }),
            other => Err(config_err(format!(
                "verify.corruption must be none, symbol or haar, got '{other}'"
            ))),
        }
    }

    pub fn verify_config(&self) -> Result<VerifyConfig, CliError> {
        Ok(VerifyConfig {
            p: self.grid.p,
            n: self.grid.n,
            k: self.grid.k,
            alpha: self.model.alpha,
            m: self.model.m,
            seed: self.seed,
            samples: self.verify.samples,
            pairs: self.verify.pairs,
            tau: self.time.tau,
            horizon: self.time.horizon,
            refinement: self.time.refinement.clone(),
            prox: self.solver.clone(),
            corruption: self.corruption()?,
            negative_controls: self.verify.negative_controls,
        })
    }

    pub fn initial_seed(&self) -> u64 {
        self.initial.seed.unwrap_or(self.seed)
    }
}

/// Builds a function from a generator name; `file:<path>` reads whitespace or
/// comma separated cell values.
pub fn generate(
    spec: &str,
    grid: BallGrid,
    seed: u64,
    base_dir: &Path,
) -> Result<GridFunction, CliError> {
    let ic = match spec.trim().strip_prefix("file:") {
        Some(path) => {
            let path = base_dir.join(path.trim());
            let text = std::fs::read_to_string(&path)
                .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
            let values = text
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<f64>().map_err(|_| {
                        config_err(format!("{}: '{t}' is not a number", path.display()))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            InitialCondition::Values(values)
        }
        None => spec.parse().map_err(config_err)?,
    };
    ic.build(grid, seed).map_err(config_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn parses_sections_and_aliases() {
        let c: ExperimentConfig = toml::from_str(
            "seed = 4\n[grid]\np = 3\nN = 0\nK = 2\n[model]\nalpha = 0.7\nm = 3.0\n[time]\nT = 2.0\n",
        )
        .unwrap();
        assert_eq!((c.grid.p, c.grid.n, c.grid.k), (3, 0, 2));
        assert_eq!(c.time.horizon, 2.0);
        assert_eq!(c.solver, ProxConfig::default());
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = ExperimentConfig::default();
        c.grid.p = 4;
        assert!(matches!(c.validate(), Err(CliError::Config(m)) if m.contains("prime")));
        let mut c = ExperimentConfig::default();
        c.grid.n = 0;
        c.grid.k = 0;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::default();
        c.verify.corruption = "bits".into();
        assert!(c.validate().is_err());
        assert!(toml::from_str::<ExperimentConfig>("[grid]\nq = 1\n").is_err());
    }

    #[test]
    fn file_generator_reads_values() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("u0.txt"), "1, 2\n3 4\n").unwrap();
        let g = BallGrid::new(2, 0, 2).unwrap();
        let f = generate("file:u0.txt", g, 0, dir.path()).unwrap();
        assert_eq!(f.real_parts(), vec![1.0, 2.0, 3.0, 4.0]);
        assert!(generate("file:missing.txt", g, 0, dir.path()).is_err());
        assert!(generate("gauss", g, 0, dir.path()).is_err());
    }
}
