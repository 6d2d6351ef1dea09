//! Canonical JSON form of a series: a list of terms, odd factors listed in
//! declaration order.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::context::VariableContext;
use super::series::{Rational, SuperSeries};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonMonomial {
    pub even: BTreeMap<String, u16>,
    pub odd: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonTerm {
    pub coeff: String,
    pub lambda: i32,
    pub monomial: JsonMonomial,
}

pub fn format_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("bad rational `{s}`"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d == BigInt::from(0) {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

pub fn to_terms(s: &SuperSeries) -> Vec<JsonTerm> {
    let ctx = s.context();
    s.terms()
        .map(|(t, c)| {
            let mut even = BTreeMap::new();
            let mut odd = Vec::new();
            for (i, &e) in t.monomial.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let v = ctx.var(i);
                if v.parity.is_odd() {
                    odd.push(v.name.clone());
                } else {
                    even.insert(v.name.clone(), e);
                }
            }
            JsonTerm {
                coeff: format_rational(c),
                lambda: t.lambda,
                monomial: JsonMonomial { even, odd },
            }
        })
        .collect()
}

pub fn from_terms(ctx: &Arc<VariableContext>, terms: &[JsonTerm]) -> Result<SuperSeries> {
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        let mut exps = vec![0u16; ctx.len()];
        for (name, &e) in &t.monomial.even {
            let i = ctx.lookup(name)?;
            if ctx.parity(i).is_odd() {
                return Err(Error::Parse(format!("`{name}` is odd but listed as even")));
            }
            exps[i] += e;
        }
        // odd factors may arrive in any order; reorder with sign
        let mut idx = Vec::with_capacity(t.monomial.odd.len());
        for name in &t.monomial.odd {
            let i = ctx.lookup(name)?;
            if !ctx.parity(i).is_odd() {
                return Err(Error::Parse(format!("`{name}` is even but listed as odd")));
            }
            idx.push(i);
        }
        let mut inversions = 0usize;
        for a in 0..idx.len() {
            for b in a + 1..idx.len() {
                if idx[a] > idx[b] {
                    inversions += 1;
                }
            }
        }
        let mut coeff = parse_rational(&t.coeff)?;
        if inversions % 2 == 1 {
            coeff = -coeff;
        }
        for i in idx {
            exps[i] += 1;
        }
        out.push((exps, t.lambda, coeff));
    }
    SuperSeries::from_terms(ctx, out)
}

pub fn to_json(s: &SuperSeries) -> String {
    serde_json::to_string(&to_terms(s)).expect("terms serialize")
}

pub fn from_json(ctx: &Arc<VariableContext>, text: &str) -> Result<SuperSeries> {
    let terms: Vec<JsonTerm> =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    from_terms(ctx, &terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::context::{Parity, Role};

    #[test]
    fn round_trip_is_exact() {
        let ctx = VariableContext::builder()
            .var("x1", Parity::Even, Role::Base)
            .var("xs1", Parity::Odd, Role::Base)
            .var("xs2", Parity::Odd, Role::Base)
            .build()
            .unwrap();
        let text = r#"[{"coeff":"-3/4","lambda":2,"monomial":{"even":{"x1":2},"odd":["xs2","xs1"]}}]"#;
        let s = from_json(&ctx, text).unwrap();
        let canon = to_json(&s);
        assert!(canon.contains(r#""coeff":"3/4""#));
        assert!(canon.contains(r#"["xs1","xs2"]"#));
        assert_eq!(to_json(&from_json(&ctx, &canon).unwrap()), canon);
    }
}
