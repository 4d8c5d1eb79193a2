//! Curriculum assets a session draws from: expert demonstrations, the fitted
//! extractor and the diverse scenario pool.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use teachkit_core::curriculum::{select_diverse_scenarios, DrillConfig};
use teachkit_core::envs::{scripted_parking_expert, writing_expert, EnvSpec};
use teachkit_core::extract::builtin::fit_builtin;
use teachkit_core::extract::{label_all, BuiltinExtractor};
use teachkit_core::{ExtractorConfig, Trajectory};

use crate::error::{Result, ServeError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssetConfig {
    pub seed: u64,
    pub n_demos: usize,
    pub pool_size: usize,
    pub extractor: ExtractorConfig,
    pub drill: DrillConfig,
    /// Skills targeted by the drill settings.
    pub targets: usize,
    /// Segments per demonstration for the time-heuristic setting.
    pub time_heuristic_k: usize,
    /// Practice steps allotted to every setting.
    pub budget: usize,
    pub pretest: usize,
    pub evaluation: usize,
    /// Practice rounds per skill in the skills and time-heuristic settings.
    pub sessions_per_skill: usize,
}

impl AssetConfig {
    pub fn for_env(env: &EnvSpec, seed: u64) -> Self {
        let (n_demos, pool_size, extractor, k, budget) = match env {
            EnvSpec::Parking(_) => (120, 25, ExtractorConfig::parking(), 3, 360),
            EnvSpec::Writing(_) => (40, 15, ExtractorConfig::writing(), 8, 5400),
        };
        AssetConfig {
            seed,
            n_demos,
            pool_size,
            extractor,
            drill: DrillConfig {
                n_drills: 2,
                ..DrillConfig::for_env(env)
            },
            targets: 3,
            time_heuristic_k: k,
            budget,
            pretest: 2,
            evaluation: 5,
            sessions_per_skill: 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let rounds = self.targets * self.sessions_per_skill;
        if rounds == 0 || self.budget % rounds != 0 {
            return Err(ServeError::Config(format!(
                "budget {} must split evenly into {rounds} skill rounds",
                self.budget
            )));
        }
        if self.pretest == 0 || self.pretest > self.pool_size {
            return Err(ServeError::Config("need 1 <= pretest <= pool size".into()));
        }
        if self.evaluation == 0 || self.n_demos < self.pool_size {
            return Err(ServeError::Config("need evaluation rounds and n_demos >= pool size".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Assets {
    pub id: String,
    pub env: EnvSpec,
    pub config: AssetConfig,
    pub demos: Vec<Trajectory>,
    pub demos_by_id: BTreeMap<String, Trajectory>,
    /// Expert skill sequence per scenario id.
    pub labels: BTreeMap<String, Vec<usize>>,
    pub extractor: BuiltinExtractor,
    /// Scenario ids picked by greedy skill coverage.
    pub pool: Vec<String>,
}

impl Assets {
    pub fn build(env: EnvSpec, config: AssetConfig) -> Result<Self> {
        config.validate()?;
        let scenarios = env.sample_scenarios(config.n_demos, config.seed)?;
        let mut demos = Vec::with_capacity(scenarios.len());
        for sc in &scenarios {
            match &env {
                EnvSpec::Parking(p) => {
                    let o = scripted_parking_expert(sc, p)?;
                    if o.success {
                        demos.push(o.trajectory);
                    }
                }
                EnvSpec::Writing(_) => demos.push(writing_expert(sc, &env)?),
            }
        }
        if demos.len() < config.pool_size {
            return Err(ServeError::Config(format!(
                "only {} expert demonstrations for a pool of {}",
                demos.len(),
                config.pool_size
            )));
        }
        let extractor = fit_builtin(&demos, &config.extractor, config.seed)?;
        let by_traj = label_all(&extractor, &demos)?;
        let labels: BTreeMap<String, Vec<usize>> = demos
            .iter()
            .map(|d| (d.scenario.id.clone(), by_traj[&d.id].skills.clone()))
            .collect();
        let pool = select_diverse_scenarios(&labels, config.pool_size)?;
        let demos_by_id = demos.iter().map(|d| (d.id.clone(), d.clone())).collect();
        Ok(Assets {
            id: format!("{}-{}", env.name(), config.seed),
            env,
            config,
            demos,
            demos_by_id,
            labels,
            extractor,
            pool,
        })
    }

    /// The expert demonstration of a scenario.
    pub fn demo_for(&self, scenario_id: &str) -> Option<&Trajectory> {
        self.demos.iter().find(|d| d.scenario.id == scenario_id)
    }
}
