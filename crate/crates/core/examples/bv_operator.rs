use superkoszul::bv_operator::{bv_delta, classical_brackets_from_delta, principal_symbol};
use superkoszul::chart::Chart;
use superkoszul::koszul::HomotopyPoisson;

fn main() -> superkoszul::Result<()> {
    let c = Chart::standard(2, 0)?;
    let p = c.parse("x1*xs2*xs1 + 1/2*x1^2*x2*xs2*xs1")?;
    let hp = HomotopyPoisson::validated(&c, p.clone())?;

    let delta = bv_delta(&c, &p)?;
    let w = c.parse("x2*dx1")?;
    println!("Δ(x2 dx1) = {}", delta.apply(&w)?);

    let args = [c.parse("dx1")?, c.parse("x2*dx2")?];
    println!("from Δ   [dx1, x2 dx2] = {}", classical_brackets_from_delta(&c, &p, &args)?);
    println!("from K   [dx1, x2 dx2] = {}", hp.higher_koszul_bracket(&args)?);
    println!("symbol(Δ) = {}", principal_symbol(&c, &p)?);
    println!("K         = {}", hp.master_hamiltonian()?);
    Ok(())
}
