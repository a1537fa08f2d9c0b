use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Deserialize;
use spinorflow::{CauchyPair, LapseProfile, Sym3};

/// One input document: the shape operator and an optional lapse.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairInput {
    pub theta: Sym3,
    #[serde(default)]
    pub beta: LapseProfile,
}

#[derive(Clone, Debug)]
pub struct Job {
    pub pair: CauchyPair,
    pub lapse: LapseProfile,
}

impl PairInput {
    pub fn into_job(self) -> Result<Job> {
        Ok(Job {
            pair: CauchyPair::new(self.theta)?,
            lapse: self.beta,
        })
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn load_one(path: &Path) -> Result<Job> {
    let text = read(path)?;
    let input: PairInput = serde_json::from_str(&text)
        .with_context(|| format!("{} does not match the pair schema", path.display()))?;
    input.into_job()
}

/// A JSON array of pair documents.
pub fn load_sweep(path: &Path) -> Result<Vec<Job>> {
    let text = read(path)?;
    let inputs: Vec<PairInput> = serde_json::from_str(&text)
        .with_context(|| format!("{} is not an array of pair documents", path.display()))?;
    inputs.into_iter().map(PairInput::into_job).collect()
}
