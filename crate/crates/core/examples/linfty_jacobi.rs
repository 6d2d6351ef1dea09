use superkoszul::chart::Chart;
use superkoszul::koszul::HomotopyPoisson;
use superkoszul::linfty::{verify_generalized_jacobi, Graded};

fn report(c: &Chart, p: &str) -> superkoszul::Result<()> {
    let hp = HomotopyPoisson::new(c, c.parse(p)?)?;
    let fam = hp.poisson_family()?;
    let pool: Vec<Graded> = ["x1", "x2", "x3", "x1*x2"]
        .iter()
        .map(|t| Graded::homogeneous(c.parse(t)?))
        .collect::<superkoszul::Result<_>>()?;
    let br = |a: &[Graded]| fam.graded(a);
    let cases = verify_generalized_jacobi(&br, fam.version(), 3, &pool);
    let failures = cases.iter().filter(|r| !r.pass).count();
    println!("P = {p}");
    println!("  [P,P] = {}", hp.master_equation()?);
    println!("  {} Jacobi cases, {failures} nonzero", cases.len());
    Ok(())
}

fn main() -> superkoszul::Result<()> {
    let c = Chart::standard(3, 0)?;
    report(&c, "x1*xs2*xs3 + x2*xs3*xs1 + x3*xs1*xs2")?;
    report(&c, "x1*xs2*xs3 + x2*xs1*xs2")?;

    let hp = HomotopyPoisson::validated(&c, c.parse("x1*xs2*xs3 + x2*xs3*xs1 + x3*xs1*xs2")?)?;
    let (x1, x2) = (c.parse("x1")?, c.parse("x2")?);
    println!("{{x1, x2}}_P = {}", hp.poisson_bracket(&[x1, x2])?);
    Ok(())
}
