//! JSON scenario files: a chart, a tensor, truncation caps and a battery of
//! sample inputs.

use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algebra::json::{from_terms, JsonTerm};
use crate::algebra::random::{random_series, RandomSpec};
use crate::algebra::{Parity, SuperSeries, TruncationPolicy};
use crate::chart::{Block, Chart, Coordinate};
use crate::error::{Error, Result};
use crate::koszul::HomotopyPoisson;
use crate::microformal::SignConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// A series given either as infix text or as canonical JSON terms.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeriesInput {
    Text(String),
    Terms(Vec<JsonTerm>),
}

impl SeriesInput {
    pub fn resolve(&self, chart: &Chart) -> Result<SuperSeries> {
        match self {
            SeriesInput::Text(t) => chart.parse(t),
            SeriesInput::Terms(ts) => from_terms(chart.ctx(), ts),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Battery {
    #[serde(default)]
    pub functions: Vec<SeriesInput>,
    #[serde(default)]
    pub forms: Vec<SeriesInput>,
    #[serde(default)]
    pub multivectors: Vec<SeriesInput>,
    /// Extra seeded random even forms.
    #[serde(default)]
    pub random_forms: usize,
    /// Extra seeded random multivectors.
    #[serde(default)]
    pub random_multivectors: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub coordinates: Vec<Coordinate>,
    pub poisson_tensor: SeriesInput,
    #[serde(default)]
    pub truncation: BTreeMap<String, u32>,
    #[serde(default)]
    pub test_battery: Battery,
    #[serde(default)]
    pub seed: u64,
    /// Overrides the verified signs of the direct forms-to-multivectors map.
    #[serde(default)]
    pub sign_config: Option<SignConfig>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub chart: Chart,
    pub tensor: SuperSeries,
    pub policy: TruncationPolicy,
    pub functions: Vec<SuperSeries>,
    pub forms: Vec<SuperSeries>,
    pub multivectors: Vec<SuperSeries>,
    pub random_forms: usize,
    pub random_multivectors: usize,
    pub seed: u64,
    pub signs: SignConfig,
    /// SHA-256 of the scenario text.
    pub hash: String,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
        Scenario::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Scenario> {
        let file: ScenarioFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("scenario: {e}")))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        let chart = Chart::new(&file.coordinates)?;
        let tensor = file.poisson_tensor.resolve(&chart)?;
        if !chart.lives_on(&tensor, &[Block::X, Block::Xs]) {
            return Err(Error::Parse("poisson_tensor must be a function of x and x*".into()));
        }
        if !tensor.is_zero() && tensor.parity() != Some(Parity::Even) {
            return Err(Error::Parse("poisson_tensor must be even".into()));
        }
        let mut policy = TruncationPolicy::none();
        for (g, &cap) in &file.truncation {
            if !chart.ctx().has_grading(g) && g != "lambda" {
                return Err(Error::Parse(format!("unknown grading `{g}` in truncation")));
            }
            policy = policy.with_cap(g, cap);
        }
        let resolve = |v: &[SeriesInput], blocks: &[Block], what: &str| -> Result<Vec<SuperSeries>> {
            v.iter()
                .map(|s| {
                    let s = s.resolve(&chart)?;
                    if chart.lives_on(&s, blocks) {
                        Ok(s)
                    } else {
                        Err(Error::Parse(format!("{what} `{s}` uses foreign variables")))
                    }
                })
                .collect()
        };
        let b = &file.test_battery;
        Ok(Scenario {
            name: file.name.clone(),
            functions: resolve(&b.functions, &[Block::X], "function")?,
            forms: resolve(&b.forms, &[Block::X, Block::Dx], "form")?,
            multivectors: resolve(&b.multivectors, &[Block::X, Block::Xs], "multivector")?,
            random_forms: b.random_forms,
            random_multivectors: b.random_multivectors,
            chart,
            tensor,
            policy,
            seed: file.seed,
            signs: file.sign_config.unwrap_or(SignConfig::VERIFIED),
            hash: sha256_hex(text),
        })
    }

    /// Replaces one truncation cap.
    pub fn with_cap(mut self, grading: &str, cap: u32) -> Result<Scenario> {
        if !self.chart.ctx().has_grading(grading) && grading != "lambda" {
            return Err(Error::Parse(format!("unknown grading `{grading}`")));
        }
        self.policy = self.policy.with_cap(grading, cap);
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Scenario {
        self.seed = seed;
        self
    }

    pub fn structure(&self) -> Result<HomotopyPoisson> {
        let mut hp = HomotopyPoisson::new(&self.chart, self.tensor.clone())?;
        hp.validate()?;
        Ok(hp)
    }

    /// Battery forms followed by the seeded random even forms.
    pub fn sample_forms(&self) -> Vec<SuperSeries> {
        let c = &self.chart;
        let vars: Vec<usize> = c.block(Block::X).into_iter().chain(c.block(Block::Dx)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let spec = RandomSpec::new(vars, 3, 3).with_parity(Parity::Even);
        let mut out = self.forms.clone();
        out.extend((0..self.random_forms).map(|_| random_series(c.ctx(), &mut rng, &spec)));
        out
    }

    pub fn even_forms(&self) -> Vec<SuperSeries> {
        self.sample_forms()
            .into_iter()
            .filter(|w| w.is_zero() || w.parity() == Some(Parity::Even))
            .collect()
    }

    pub fn sample_multivectors(&self) -> Vec<SuperSeries> {
        let c = &self.chart;
        let vars: Vec<usize> = c.block(Block::X).into_iter().chain(c.block(Block::Xs)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed.wrapping_add(1));
        let spec = RandomSpec::new(vars, 3, 3);
        let mut out = self.multivectors.clone();
        out.extend((0..self.random_multivectors).map(|_| random_series(c.ctx(), &mut rng, &spec)));
        out
    }
}

fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
