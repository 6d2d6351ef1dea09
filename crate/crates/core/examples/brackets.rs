use superkoszul::brackets::{canonical_poisson, canonical_schouten, poisson_master, schouten_master, Convention};
use superkoszul::chart::{Chart, PhaseSpaceKind};

fn main() -> superkoszul::Result<()> {
    let c = Chart::standard(2, 0)?;
    let tm = c.phase_space(PhaseSpaceKind::Cotangent);
    let pm = c.phase_space(PhaseSpaceKind::AntiCotangent);

    let (p1, x1) = (c.parse("p1")?, c.parse("x1")?);
    println!("(p1, x1) = {}", canonical_poisson(&p1, &x1, &tm)?);
    let (xs1, x1) = (c.parse("xs1")?, c.parse("x1")?);
    println!("[x*1, x1] = {}", canonical_schouten(&xs1, &x1, &pm, Convention::Original)?);

    let p = c.parse("x1*xs2*xs1")?;
    let q = c.parse("x2^2*xs1")?;
    let direct = canonical_schouten(&p, &q, &pm, Convention::Original)?;

    // the same bracket from the master Hamiltonian on T*(ΠT*M)
    let s = schouten_master(&c)?;
    let double = c.phase_space(PhaseSpaceKind::CotangentOfMultivectors);
    let derived = canonical_poisson(&canonical_poisson(&p, &s, &double)?, &q, &double)?;
    println!("Ŝ = {s}");
    println!("[P,Q]      = {direct}");
    println!("((P,Ŝ),Q)  = {derived}");

    let poi = poisson_master(&c)?;
    let anti = c.phase_space(PhaseSpaceKind::AntiCotangentOfCotangent);
    let (h, g) = (c.parse("x1*p2")?, c.parse("x2^3")?);
    let inner = canonical_schouten(&h, &poi, &anti, Convention::Original)?;
    println!("P̂oi = {poi}");
    println!("(H,G)          = {}", canonical_poisson(&h, &g, &tm)?);
    println!("[[H,P̂oi],G]    = {}", canonical_schouten(&inner, &g, &anti, Convention::Original)?);
    Ok(())
}
