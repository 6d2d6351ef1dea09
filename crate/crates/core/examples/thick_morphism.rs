use superkoszul::algebra::TruncationPolicy;
use superkoszul::chart::Chart;
use superkoszul::koszul::HomotopyPoisson;
use superkoszul::microformal::{GeneratingFunction, KoszulSchoutenMap, Route, ThickFlavor};

fn main() -> superkoszul::Result<()> {
    // S(x, q) = xq + q²/2 with target coordinate y = x2 and q = p1
    let c = Chart::standard(2, 0)?;
    let phi = GeneratingFunction::new(
        c.parse("x1*p1 + 1/2*p1^2")?,
        (vec![c.x(0)], vec![]),
        (vec![c.x(1)], vec![c.p(0)]),
        ThickFlavor::EvenThick,
    )?;
    for g in ["x2", "x2^2", "x2^2 + x2"] {
        let g = c.parse(g)?;
        println!("Φ*[{g}] = {}", phi.pullback(&g)?);
    }

    // forms to multivectors through the adjoint of the anchor
    let c = Chart::standard(2, 1)?;
    let hp = HomotopyPoisson::validated(&c, c.parse("x1*xs2*xs1 + x3*xs2*xs3 + x1*xs1*xs2*xs3")?)?;
    let caps = TruncationPolicy::none().with_cap("antimomentum", 4).with_cap("form", 4);
    let map = KoszulSchoutenMap::new(hp, caps)?;
    println!("S* = {}", map.adjoint_anchor()?.s);
    let w = c.parse("x3*dx2 + x1*dx1*dx2")?;
    println!("ω        = {w}");
    println!("direct   = {}", map.direct(&w)?);
    println!("pullback = {}", map.via_pullback(&w)?);
    println!("Q-map residual = {}", map.q_map_residual(&w, Route::Direct)?);
    println!("Hamilton-Jacobi residual = {}", map.hamilton_jacobi()?);
    Ok(())
}
