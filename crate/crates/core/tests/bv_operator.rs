mod common;

use common::{scenario, VALID};
use superkoszul::bv_operator::{bv_delta, classical_brackets_from_delta, de_rham_operator, principal_symbol};
use superkoszul::chart::Chart;
use superkoszul::koszul::{de_rham, HomotopyPoisson};
use superkoszul::verify::ordered_tuples;
use superkoszul::Error;

#[test]
fn classical_brackets_match_the_koszul_brackets() {
    for name in VALID {
        let s = scenario(name);
        let hp = s.structure().unwrap();
        let mut forms = s.forms.clone();
        forms.truncate(5);
        for t in ordered_tuples(forms.len(), 1, 3) {
            let args: Vec<_> = t.iter().map(|&i| forms[i].clone()).collect();
            let from_delta = classical_brackets_from_delta(&s.chart, hp.tensor(), &args).unwrap();
            assert_eq!(from_delta, hp.higher_koszul_bracket(&args).unwrap(), "{name} {t:?}");
        }
    }
}

#[test]
fn principal_symbol_is_the_master_hamiltonian() {
    for name in VALID {
        let s = scenario(name);
        let hp = s.structure().unwrap();
        assert_eq!(principal_symbol(&s.chart, hp.tensor()).unwrap(), hp.master_hamiltonian().unwrap(), "{name}");
    }
    let c = Chart::standard(3, 0).unwrap();
    let hp = HomotopyPoisson::validated(&c, c.parse("x1*xs2*xs3 + x1^2").unwrap()).unwrap();
    assert_eq!(principal_symbol(&c, hp.tensor()).unwrap(), hp.master_hamiltonian().unwrap());
}

#[test]
fn de_rham_operator_is_d() {
    let c = Chart::standard(2, 1).unwrap();
    let w = c.parse("x1^2*x3*dx2 + x2*dx3").unwrap();
    assert_eq!(de_rham_operator(&c).apply(&w).unwrap(), de_rham(&c, &w).unwrap());
}

#[test]
fn delta_is_order_one_in_lambda_per_antimomentum() {
    // P = x*_1 gives Δ = λ(d∂/∂dx¹ + ∂/∂dx¹d), the Lie derivative along ∂/∂x¹
    let c = Chart::standard(2, 0).unwrap();
    let delta = bv_delta(&c, &c.parse("xs1").unwrap()).unwrap();
    assert_eq!(delta.apply(&c.parse("x1*dx1").unwrap()).unwrap(), c.parse("lambda*dx1").unwrap());
    assert!(delta.apply(&c.parse("x2*dx1").unwrap()).unwrap().is_zero());
    assert_eq!(delta.apply(&c.parse("x1^2*dx2").unwrap()).unwrap(), c.parse("2*lambda*x1*dx2").unwrap());
}

#[test]
fn divergent_limits_and_symbols_are_errors() {
    let c = Chart::standard(2, 0).unwrap();
    let p = c.parse("x1*xs2*xs1").unwrap().mul_lambda(-1).unwrap();
    let args = [c.parse("dx1").unwrap(), c.parse("dx2").unwrap()];
    assert!(matches!(classical_brackets_from_delta(&c, &p, &args), Err(Error::Limit(_))));
    assert!(matches!(principal_symbol(&c, &p), Err(Error::Symbol(_))));
    assert!(matches!(classical_brackets_from_delta(&c, &p, &[]), Err(Error::Argument(_))));
    let not_a_form = [c.parse("xs1").unwrap()];
    let p = c.parse("x1*xs2*xs1").unwrap();
    assert!(matches!(classical_brackets_from_delta(&c, &p, &not_a_form), Err(Error::Argument(_))));
    assert!(matches!(bv_delta(&c, &c.parse("dx1").unwrap()), Err(Error::Argument(_))));
}
