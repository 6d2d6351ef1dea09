#![allow(dead_code)]

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use superkoszul::algebra::random::{random_series, RandomSpec};
use superkoszul::algebra::{Parity, SuperSeries};
use superkoszul::chart::{Block, Chart};
use superkoszul::scenario::Scenario;

pub const BUNDLED: [&str; 3] = ["classical_r2", "cubic_r21", "broken_sign"];
pub const VALID: [&str; 2] = ["classical_r2", "cubic_r21"];

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("examples/scenarios")
        .join(format!("{name}.json"))
}

pub fn scenario(name: &str) -> Scenario {
    Scenario::load(&scenario_path(name)).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn vars(c: &Chart, blocks: &[Block]) -> Vec<usize> {
    blocks.iter().flat_map(|&b| c.block(b)).collect()
}

/// Random homogeneous series in the given blocks.
pub fn random(c: &Chart, rng: &mut ChaCha8Rng, blocks: &[Block], degree: u16, parity: Parity) -> SuperSeries {
    let spec = RandomSpec::new(vars(c, blocks), degree, 3).with_parity(parity);
    random_series(c.ctx(), rng, &spec)
}

pub fn random_parity(rng: &mut ChaCha8Rng) -> Parity {
    use rand::Rng;
    if rng.gen_bool(0.5) {
        Parity::Odd
    } else {
        Parity::Even
    }
}

/// Parity of a homogeneous series, zero counting as even.
pub fn parity_of(s: &SuperSeries) -> Parity {
    s.parity().unwrap_or(Parity::Even)
}
