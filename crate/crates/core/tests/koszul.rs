mod common;

use common::{random, random_parity, rng, scenario, VALID};
use superkoszul::algebra::{Parity, SuperSeries};
use superkoszul::brackets::{canonical_poisson, canonical_schouten, Convention};
use superkoszul::chart::{Block, Chart, PhaseSpaceKind};
use superkoszul::koszul::{closed_koszul_bracket, de_rham, Generator, HomotopyPoisson};
use superkoszul::verify::ordered_tuples;
use superkoszul::Error;

const CUBIC: &str = "x1*xs2*xs1 + x3*xs2*xs3 + x1*xs1*xs2*xs3";

fn cubic() -> (Chart, HomotopyPoisson) {
    let c = Chart::standard(2, 1).unwrap();
    let hp = HomotopyPoisson::validated(&c, c.parse(CUBIC).unwrap()).unwrap();
    (c, hp)
}

/// P = P¹² x*_2 x*_1 on ℝ², i.e. ½Pᵃᵇx*_b x*_a with P²¹ = −P¹².
fn classical(p12: &str) -> (Chart, HomotopyPoisson, SuperSeries) {
    let c = Chart::standard(2, 0).unwrap();
    let coeff = c.parse(p12).unwrap();
    let p = coeff.mul(&c.parse("xs2*xs1").unwrap()).unwrap();
    let hp = HomotopyPoisson::validated(&c, p).unwrap();
    (c, hp, coeff)
}

#[test]
fn koszul_master_hamiltonian_of_a_bivector() {
    let (c, hp, p12) = classical("x1 + 1/2*x1^2*x2");
    // −Pᵃᵇπ_b p_a + ½ dPᵃᵇ π_b π_a
    let dp = de_rham(&c, &p12).unwrap();
    let expected = p12
        .mul(&c.parse("-pi2*p1 + pi1*p2").unwrap())
        .unwrap()
        .add(&dp.mul(&c.parse("pi2*pi1").unwrap()).unwrap())
        .unwrap();
    assert_eq!(hp.master_hamiltonian().unwrap(), expected);
}

#[test]
fn zero_tensor_has_zero_master_hamiltonian() {
    let c = Chart::standard(2, 1).unwrap();
    let hp = HomotopyPoisson::validated(&c, c.zero()).unwrap();
    assert!(hp.master_hamiltonian().unwrap().is_zero());
}

#[test]
fn koszul_master_equation_for_valid_tensors() {
    for name in VALID {
        let s = scenario(name);
        let k = s.structure().unwrap().master_hamiltonian().unwrap();
        let ps = s.chart.phase_space(PhaseSpaceKind::CotangentOfForms);
        assert!(canonical_poisson(&k, &k, &ps).unwrap().is_zero(), "{name}");
    }
}

#[test]
fn unvalidated_tensor_is_refused() {
    let c = Chart::standard(3, 0).unwrap();
    let hp = HomotopyPoisson::new(&c, c.parse("x1*xs2*xs3 + x2*xs1*xs2").unwrap()).unwrap();
    assert!(matches!(hp.master_hamiltonian(), Err(Error::State(_))));
    assert!(matches!(HomotopyPoisson::validated(&c, hp.tensor().clone()), Err(Error::State(_))));
}

#[test]
fn classical_binary_koszul_bracket() {
    let (c, hp, _) = classical("x1 + 1/2*x1^2*x2");
    let pm = c.phase_space(PhaseSpaceKind::AntiCotangent);
    let table = |f: &SuperSeries, g: &SuperSeries| {
        let inner = canonical_schouten(hp.tensor(), g, &pm, Convention::Original).unwrap();
        canonical_schouten(f, &inner, &pm, Convention::Original).unwrap()
    };
    let fs = ["x1", "x2", "x1*x2^2"].map(|t| c.parse(t).unwrap());
    for f in &fs {
        for g in &fs {
            // the homotopy bracket [[P,f],g]| is minus the table bracket on even functions
            let fg = hp.poisson_bracket(&[f.clone(), g.clone()]).unwrap();
            assert_eq!(fg, table(f, g).neg());
            let dg = de_rham(&c, g).unwrap();
            assert!(hp.higher_koszul_bracket(&[f.clone(), g.clone()]).unwrap().is_zero());
            // [f,dg] = (−1)^f̃ {f,g} and [df,dg] = −(−1)^f̃ d{f,g} with f even
            assert_eq!(hp.higher_koszul_bracket(&[f.clone(), dg.clone()]).unwrap(), fg);
            let df = de_rham(&c, f).unwrap();
            let expected = de_rham(&c, &fg).unwrap().neg();
            assert_eq!(hp.higher_koszul_bracket(&[df, dg]).unwrap(), expected);
        }
    }
}

#[test]
fn brackets_of_functions_alone_vanish() {
    let (c, hp) = cubic();
    let fs: Vec<SuperSeries> = ["x1", "x3", "x1*x2"].iter().map(|t| c.parse(t).unwrap()).collect();
    for k in 2..=3 {
        assert!(hp.higher_koszul_bracket(&fs[..k]).unwrap().is_zero());
    }
}

#[test]
fn closed_formulas_on_generator_tuples() {
    let (c, hp) = cubic();
    let fs = ["x1", "x2", "x3", "x1*x3"];
    let gens: Vec<Generator> = fs
        .iter()
        .flat_map(|t| {
            let f = c.parse(t).unwrap();
            [Generator::Function(f.clone()), Generator::Differential(f)]
        })
        .collect();
    for t in ordered_tuples(gens.len(), 1, 3) {
        let g: Vec<Generator> = t.iter().map(|&i| gens[i].clone()).collect();
        let forms: Vec<SuperSeries> = g.iter().map(|x| x.to_form(&c).unwrap()).collect();
        let derived = hp.higher_koszul_bracket(&forms).unwrap();
        assert_eq!(derived, closed_koszul_bracket(&hp, &g).unwrap(), "{t:?}");
    }
}

#[test]
fn nullary_bracket_is_the_differential_of_the_constant_part() {
    // the closed formula with ε = n would give −dP₀ here; the K route gives +dP₀
    let c = Chart::standard(2, 0).unwrap();
    let hp = HomotopyPoisson::validated(&c, c.parse("x1^2*x2").unwrap()).unwrap();
    let dp0 = c.parse("2*x1*x2*dx1 + x1^2*dx2").unwrap();
    assert_eq!(hp.higher_koszul_bracket(&[]).unwrap(), dp0);
    assert_eq!(closed_koszul_bracket(&hp, &[]).unwrap(), dp0.neg());
}

#[test]
fn leibniz_in_the_last_slot() {
    // the binary bracket only sees the momentum-quadratic part of K, a biderivation
    let (c, hp) = cubic();
    let mut r = rng(70);
    let br = |x: &SuperSeries, y: &SuperSeries| hp.higher_koszul_bracket(&[x.clone(), y.clone()]).unwrap();
    for _ in 0..15 {
        let (pa, pf) = (random_parity(&mut r), random_parity(&mut r));
        let a = random(&c, &mut r, &[Block::X, Block::Dx], 2, pa);
        let f = random(&c, &mut r, &[Block::X, Block::Dx], 2, pf);
        let g = random(&c, &mut r, &[Block::X, Block::Dx], 2, Parity::Even);
        let (pa, pf) = (a.parity().unwrap_or(Parity::Even), f.parity().unwrap_or(Parity::Even));
        let lhs = br(&a, &f.mul(&g).unwrap());
        let rhs = br(&a, &f)
            .mul(&g)
            .unwrap()
            .add(&f.mul(&br(&a, &g)).unwrap().signed(pa.flip().koszul(pf)))
            .unwrap();
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn bracket_arity_is_bounded_by_the_momentum_degree() {
    let (c, hp, _) = classical("x1");
    let ws: Vec<SuperSeries> = ["dx1", "x2*dx2", "dx1*dx2"].iter().map(|t| c.parse(t).unwrap()).collect();
    assert!(hp.higher_koszul_bracket(&ws).unwrap().is_zero());
}

#[test]
fn lichnerowicz_examples() {
    let (c, hp, _) = classical("3");
    assert!(hp.lichnerowicz(&c.one()).unwrap().is_zero());
    // d_P x¹ = ∂P/∂x*_1 for P = 3x*_2x*_1
    assert_eq!(hp.lichnerowicz(&c.parse("x1").unwrap()).unwrap(), c.parse("-3*xs2").unwrap());
    for name in VALID {
        let s = scenario(name);
        let hp = s.structure().unwrap();
        for m in s.sample_multivectors() {
            assert!(hp.lichnerowicz(&hp.lichnerowicz(&m).unwrap()).unwrap().is_zero(), "{name}: {m}");
        }
    }
}

#[test]
fn anchor_pullback_examples() {
    let (c, hp, p12) = classical("x1 + x2^2");
    // dxᵃ ↦ (−1)^ã ∂P/∂x*_a = −Pᵃᵇx*_b
    assert_eq!(
        hp.anchor_pullback(&c.parse("dx1").unwrap()).unwrap(),
        p12.mul(&c.parse("-xs2").unwrap()).unwrap()
    );
    assert_eq!(
        hp.anchor_pullback(&c.parse("dx2").unwrap()).unwrap(),
        p12.mul(&c.parse("xs1").unwrap()).unwrap()
    );
    let f = c.parse("x1^2*x2 + 4").unwrap();
    assert_eq!(hp.anchor_pullback(&f).unwrap(), f);
    let (c, hp) = cubic();
    let (d1, d2) = (c.parse("dx1").unwrap(), c.parse("dx2").unwrap());
    let separately = hp
        .anchor_pullback(&d1)
        .unwrap()
        .mul(&hp.anchor_pullback(&d2).unwrap())
        .unwrap();
    assert_eq!(hp.anchor_pullback(&d1.mul(&d2).unwrap()).unwrap(), separately);
}

#[test]
fn diagram_commutes() {
    for name in VALID {
        let s = scenario(name);
        let hp = s.structure().unwrap();
        let mut forms = s.sample_forms();
        forms.push(s.chart.one());
        assert!(hp.verify_diagram(&forms).unwrap().iter().all(|r| r.pass), "{name}");
    }
    let (c, hp, _) = classical("x1 + x2^2");
    let w = c.parse("dx1").unwrap();
    let left = hp.anchor_pullback(&de_rham(&c, &w).unwrap()).unwrap();
    assert!(left.is_zero());
    assert!(hp.lichnerowicz(&hp.anchor_pullback(&w).unwrap()).unwrap().is_zero());
}
