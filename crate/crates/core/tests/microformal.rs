mod common;

use common::{random, rng, scenario, VALID};
use superkoszul::algebra::{Parity, TruncationPolicy};
use superkoszul::chart::{Block, Chart};
use superkoszul::koszul::HomotopyPoisson;
use superkoszul::microformal::{KoszulSchoutenMap, Route, SignConfig};
use superkoszul::verify::{verify, Check};
use superkoszul::Error;

fn map_of(name: &str) -> (superkoszul::scenario::Scenario, KoszulSchoutenMap) {
    let s = scenario(name);
    let m = KoszulSchoutenMap::new(s.structure().unwrap(), s.policy.clone())
        .unwrap()
        .with_signs(s.signs);
    (s, m)
}

#[test]
fn bundled_valid_scenarios_use_the_pinned_signs() {
    for name in VALID {
        assert_eq!(scenario(name).signs, SignConfig::VERIFIED);
    }
    assert_ne!(scenario("broken_sign").signs, SignConfig::VERIFIED);
}

#[test]
fn routes_agree() {
    for name in VALID {
        let (s, m) = map_of(name);
        let forms = s.even_forms();
        assert!(forms.len() >= 20);
        for r in m.route_equivalence(&forms) {
            assert!(r.pass, "{name}: {r:?}");
        }
    }
}

#[test]
fn image_is_a_q_map() {
    for name in VALID {
        let (s, m) = map_of(name);
        for route in [Route::Direct, Route::Pullback] {
            for r in m.verify_linfty_morphism(&s.even_forms(), route) {
                assert!(r.pass, "{name} {route:?}: {r:?}");
            }
        }
    }
}

#[test]
fn adjoint_anchor_solves_hamilton_jacobi() {
    for name in VALID {
        let (_, m) = map_of(name);
        assert!(m.hamilton_jacobi().unwrap().is_zero(), "{name}");
    }
}

#[test]
fn adjoint_anchor_generating_function() {
    // S* = xᵃp_a + (−1)^ã ∂P/∂x*_a(x,π) x*_a
    let (s, m) = map_of("cubic_r21");
    let c = &s.chart;
    let p = c.parse("x1*pi2*pi1 + x3*pi2*pi3 + x1*pi1*pi2*pi3").unwrap();
    let mut expected = c.parse("x1*p1 + x2*p2 + x3*p3").unwrap();
    let dp = |a: usize| p.left_derivative(c.pi(a)).unwrap();
    for a in 0..3 {
        let term = dp(a).mul(&c.var(c.xs(a))).unwrap().signed(c.parity(a).sign());
        expected = expected.add(&term).unwrap();
    }
    assert_eq!(m.adjoint_anchor().unwrap().s, expected);
}

#[test]
fn broken_sign_fails_only_the_morphism_check() {
    let s = scenario("broken_sign");
    let report = verify(&s, &Check::defaults(&s), 3).unwrap();
    assert!(!report.pass);
    let failing: Vec<&str> = report.checks.iter().filter(|e| !e.pass).map(|e| e.name.as_str()).collect();
    assert_eq!(failing, ["linfty-morphism"]);
    let (s, m) = map_of("broken_sign");
    assert!(m.route_equivalence(&s.even_forms()).iter().any(|r| !r.pass));
}

#[test]
fn quadratic_tensor_degenerates_to_the_anchor_pullback() {
    let (s, m) = map_of("classical_r2");
    for w in s.even_forms() {
        let expected = m.hp.anchor_pullback(&w).unwrap();
        assert_eq!(m.direct(&w).unwrap(), expected, "{w}");
        assert_eq!(m.via_pullback(&w).unwrap(), expected, "{w}");
    }
    let c = Chart::standard(2, 1).unwrap();
    let hp = HomotopyPoisson::validated(&c, c.parse("x1*xs2*xs1 + x3*xs2*xs3").unwrap()).unwrap();
    let m = KoszulSchoutenMap::new(hp, TruncationPolicy::none()).unwrap();
    let mut r = rng(11);
    for _ in 0..10 {
        let w = random(&c, &mut r, &[Block::X, Block::Dx], 3, Parity::Even);
        assert_eq!(m.direct(&w).unwrap(), m.hp.anchor_pullback(&w).unwrap(), "{w}");
    }
}

#[test]
fn functions_are_fixed() {
    let (s, m) = map_of("cubic_r21");
    let f = s.chart.parse("x1^2 + 3*x2").unwrap();
    assert_eq!(m.direct(&f).unwrap(), f);
    assert_eq!(m.via_pullback(&f).unwrap(), f);
}

#[test]
fn bad_inputs() {
    let (s, m) = map_of("cubic_r21");
    let c = &s.chart;
    assert!(matches!(m.direct(&c.parse("dx1").unwrap()), Err(Error::Parity(_))));
    assert!(matches!(m.via_pullback(&c.parse("xs1*dx1").unwrap()), Err(Error::Argument(_))));
    let c = Chart::standard(3, 0).unwrap();
    let hp = HomotopyPoisson::new(&c, c.parse("x1*xs2*xs3 + x2*xs1*xs2").unwrap()).unwrap();
    assert!(matches!(KoszulSchoutenMap::new(hp, TruncationPolicy::none()), Err(Error::State(_))));
}
