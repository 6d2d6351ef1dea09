use std::path::PathBuf;

use superkoszul::scenario::Scenario;
use superkoszul::verify::{verify, Check};

fn main() -> superkoszul::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "cubic_r21".into());
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("examples/scenarios")
        .join(format!("{name}.json"));
    let s = Scenario::load(&path)?;
    let report = verify(&s, &Check::defaults(&s), 3)?;
    print!("{}", report.to_text());
    std::process::exit(if report.pass { 0 } else { 1 });
}
