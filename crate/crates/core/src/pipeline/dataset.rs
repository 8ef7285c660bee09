use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::prepare_output;
use crate::env::{load_environment, GridEnvironment};
use crate::error::{HozError, Result};
use crate::rng::{derive_seed, tag_of, SeededRng};
use crate::sim::{generate_environment, standard_templates};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const ENV_DIR: &str = "envs";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSplits {
    pub label: usize,
    pub name: String,
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
}

impl SceneSplits {
    pub fn rooms(&self, split: Split) -> &[String] {
        match split {
            Split::Train => &self.train,
            Split::Val => &self.val,
            Split::Test => &self.test,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub seed: u64,
    pub scenes: Vec<SceneSplits>,
}

impl Manifest {
    pub fn room_ids(&self, split: Split) -> Vec<String> {
        self.scenes
            .iter()
            .flat_map(|s| s.rooms(split).iter().cloned())
            .collect()
    }

    pub fn all_room_ids(&self) -> Vec<String> {
        [Split::Train, Split::Val, Split::Test]
            .into_iter()
            .flat_map(|s| self.room_ids(s))
            .collect()
    }
}

/// Generate every room of every scene category and partition them into splits.
pub fn generate_dataset(cfg: &RunConfig) -> Result<(Manifest, Vec<GridEnvironment>)> {
    cfg.validate()?;
    let mut scenes = Vec::new();
    let mut envs = Vec::new();
    for template in standard_templates() {
        let mut ids = Vec::new();
        for i in 0..cfg.splits.total() {
            let room_id = format!("{}_{i:02}", template.name);
            let seed = derive_seed(cfg.seed, &[tag_of("env"), template.label as u64, i as u64]);
            let env = generate_environment(&template, &room_id, &mut SeededRng::new(seed))?;
            ids.push(room_id);
            envs.push(env);
        }
        let mut order = ids.clone();
        let split_seed = derive_seed(cfg.seed, &[tag_of("split"), template.label as u64]);
        SeededRng::new(split_seed).shuffle(&mut order);
        let (train, rest) = order.split_at(cfg.splits.train);
        let (val, test) = rest.split_at(cfg.splits.val);
        let sorted = |s: &[String]| {
            let mut v = s.to_vec();
            v.sort();
            v
        };
        scenes.push(SceneSplits {
            label: template.label,
            name: template.name.clone(),
            train: sorted(train),
            val: sorted(val),
            test: sorted(test),
        });
    }
    Ok((
        Manifest {
            version: 1,
            seed: cfg.seed,
            scenes,
        },
        envs,
    ))
}

/// Write a generated dataset: `manifest.json` and one `envs/<room>.toml` per room.
pub fn write_dataset(out: &Path, manifest: &Manifest, envs: &[GridEnvironment], force: bool) -> Result<()> {
    prepare_output(out, force)?;
    let env_dir = out.join(ENV_DIR);
    std::fs::create_dir_all(&env_dir).map_err(|e| HozError::io(&env_dir, e))?;
    for env in envs {
        env.save(&env_dir.join(format!("{}.toml", env.room_id)))?;
    }
    super::write_json(&out.join(MANIFEST_FILE), manifest)
}

/// A dataset on disk.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub root: PathBuf,
    pub manifest: Manifest,
}

impl Dataset {
    pub fn open(root: &Path) -> Result<Self> {
        let path = root.join(MANIFEST_FILE);
        if !path.is_file() {
            return Err(HozError::MissingArtifact(format!(
                "dataset manifest {}",
                path.display()
            )));
        }
        let text = std::fs::read_to_string(&path).map_err(|e| HozError::io(&path, e))?;
        let manifest: Manifest =
            serde_json::from_str(&text).map_err(|e| HozError::parse(&path, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            manifest,
        })
    }

    pub fn env_path(&self, room_id: &str) -> PathBuf {
        self.root.join(ENV_DIR).join(format!("{room_id}.toml"))
    }

    /// Load every room of a split, scene by scene, in manifest order.
    pub fn load_split(&self, split: Split) -> Result<Vec<GridEnvironment>> {
        let ids = self.manifest.room_ids(split);
        if ids.is_empty() {
            return Err(HozError::MissingArtifact(format!("{} split", split.name())));
        }
        ids.iter().map(|id| load_environment(&self.env_path(id))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn small() -> RunConfig {
        RunConfig {
            splits: super::super::config::SplitSizes {
                train: 3,
                val: 1,
                test: 2,
            },
            ..RunConfig::default()
        }
    }

    #[test]
    fn splits_partition_rooms() {
        let (manifest, envs) = generate_dataset(&small()).unwrap();
        assert_eq!(envs.len(), 4 * 6);
        for scene in &manifest.scenes {
            let all: BTreeSet<&String> = scene
                .train
                .iter()
                .chain(&scene.val)
                .chain(&scene.test)
                .collect();
            assert_eq!(all.len(), 6);
            assert_eq!(scene.train.len(), 3);
            assert_eq!(scene.test.len(), 2);
        }
    }

    #[test]
    fn written_dataset_loads() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("data");
        let (manifest, envs) = generate_dataset(&small()).unwrap();
        write_dataset(&out, &manifest, &envs, false).unwrap();
        assert!(matches!(
            write_dataset(&out, &manifest, &envs, false),
            Err(HozError::PathCollision(_))
        ));
        write_dataset(&out, &manifest, &envs, true).unwrap();
        let ds = Dataset::open(&out).unwrap();
        assert_eq!(ds.manifest, manifest);
        assert_eq!(ds.load_split(Split::Test).unwrap().len(), 8);
    }
}
