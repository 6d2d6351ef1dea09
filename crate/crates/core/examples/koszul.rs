use superkoszul::chart::Chart;
use superkoszul::koszul::{closed_koszul_bracket, de_rham, Generator, HomotopyPoisson};

fn main() -> superkoszul::Result<()> {
    // a cubic homotopy Poisson tensor on ℝ^{2|1}
    let c = Chart::standard(2, 1)?;
    let hp = HomotopyPoisson::validated(&c, c.parse("x1*xs2*xs1 + x3*xs2*xs3 + x1*xs1*xs2*xs3")?)?;
    println!("K = {}", hp.master_hamiltonian()?);

    let (x1, x2, x3) = (c.parse("x1")?, c.parse("x2")?, c.parse("x3")?);
    let forms = [de_rham(&c, &x1)?, de_rham(&c, &x2)?, de_rham(&c, &x3)?];
    println!("[dx1, dx2]      = {}", hp.higher_koszul_bracket(&forms[..2])?);
    println!("[dx1, dx2, dx3] = {}", hp.higher_koszul_bracket(&forms)?);

    let gens = [
        Generator::Function(x1.clone()),
        Generator::Differential(x2.clone()),
        Generator::Differential(x3.clone()),
    ];
    println!("closed formula  = {}", closed_koszul_bracket(&hp, &gens)?);
    let mixed = [x1, forms[1].clone(), forms[2].clone()];
    println!("from K          = {}", hp.higher_koszul_bracket(&mixed)?);

    let w = c.parse("x1*dx2")?;
    println!("a_P*(x1 dx2)    = {}", hp.anchor_pullback(&w)?);
    println!("a_P*(d(x1 dx2)) = {}", hp.anchor_pullback(&de_rham(&c, &w)?)?);
    println!("d_P a_P*(x1 dx2) = {}", hp.lichnerowicz(&hp.anchor_pullback(&w)?)?);
    Ok(())
}
