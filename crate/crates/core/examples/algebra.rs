use superkoszul::algebra::TruncationPolicy;
use superkoszul::chart::Chart;

fn main() -> superkoszul::Result<()> {
    // ℝ^{1|1}: x1 even, x2 odd
    let c = Chart::standard(1, 1)?;
    let f = c.parse("x1^2*x2 + 3*xs1")?;
    let g = c.parse("x2*xs2 - 1/2*x1")?;
    println!("f        = {f}");
    println!("g        = {g}");
    println!("f*g      = {}", f.mul(&g)?);
    println!("g*f      = {}", g.mul(&f)?);

    let x2 = c.x(1);
    println!("∂f/∂x2 (left)  = {}", f.left_derivative(x2)?);
    println!("∂f/∂x2 (right) = {}", f.right_derivative(x2)?);

    let caps = TruncationPolicy::none().with_cap("antimomentum", 1);
    let h = c.parse("x1 + xs1 + xs1*xs2")?.truncated(&caps)?;
    println!("antimomentum ≤ 1: {h}");

    let sub = f.substitute_named(&[("x1", &c.parse("x1 + 1")?)])?;
    println!("f(x1+1)  = {sub}");
    Ok(())
}
