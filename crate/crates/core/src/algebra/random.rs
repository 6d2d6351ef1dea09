//! Seeded random series for property checks and sample batteries.

use std::sync::Arc;

use rand::Rng;

use super::context::{Parity, VariableContext};
use super::series::{rat, SuperSeries};

#[derive(Debug, Clone)]
pub struct RandomSpec {
    /// Variables allowed to appear.
    pub vars: Vec<usize>,
    /// Cap on the total exponent of a monomial.
    pub max_degree: u16,
    pub terms: usize,
    /// Numerators are drawn from `-coeff_bound..=coeff_bound`, denominators from 1..=3.
    pub coeff_bound: i64,
    pub parity: Option<Parity>,
}

impl RandomSpec {
    pub fn new(vars: Vec<usize>, max_degree: u16, terms: usize) -> Self {
        RandomSpec {
            vars,
            max_degree,
            terms,
            coeff_bound: 3,
            parity: None,
        }
    }

    pub fn with_parity(mut self, parity: Parity) -> Self {
        self.parity = Some(parity);
        self
    }
}

pub fn random_series<R: Rng>(ctx: &Arc<VariableContext>, rng: &mut R, spec: &RandomSpec) -> SuperSeries {
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < spec.terms && attempts < spec.terms * 20 + 20 {
        attempts += 1;
        let mut exps = vec![0u16; ctx.len()];
        let degree = rng.gen_range(0..=spec.max_degree);
        for _ in 0..degree {
            if spec.vars.is_empty() {
                break;
            }
            let v = spec.vars[rng.gen_range(0..spec.vars.len())];
            if ctx.parity(v).is_odd() && exps[v] > 0 {
                continue;
            }
            exps[v] += 1;
        }
        let odd = ctx.odd_indices().iter().filter(|&&i| exps[i] > 0).count();
        if let Some(p) = spec.parity {
            if Parity::from_bit(odd as u32) != p {
                continue;
            }
        }
        let mut n = 0;
        while n == 0 {
            n = rng.gen_range(-spec.coeff_bound..=spec.coeff_bound);
        }
        let d = rng.gen_range(1..=3);
        out.push((exps, 0, rat(n, d)));
    }
    SuperSeries::from_terms(ctx, out).expect("exponents sized to the context")
}
