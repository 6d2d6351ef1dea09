use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::context::{Parity, VariableContext, LAMBDA};
use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Dense exponent vector; odd variables only ever carry exponent 0 or 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Vec<u16>);

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    /// The single variable `var` in a context of `n` variables.
    pub fn variable(n: usize, var: usize) -> Self {
        let mut e = vec![0; n];
        e[var] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u16] {
        &self.0
    }

    pub fn exponent(&self, var: usize) -> u16 {
        self.0[var]
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn parity(&self, ctx: &VariableContext) -> Parity {
        let odd = ctx.odd_indices().iter().filter(|&&i| self.0[i] > 0).count();
        Parity::from_bit(odd as u32)
    }

    fn degree(&self, weights: &[u32]) -> u32 {
        self.0
            .iter()
            .zip(weights)
            .map(|(&e, &w)| e as u32 * w)
            .sum()
    }

    /// Product in canonical order; `None` when an odd variable repeats.
    /// The boolean is true when the reordering sign is −1.
    fn mul(&self, other: &Monomial, odd: &[usize]) -> Option<(Monomial, bool)> {
        let mut above = 0u32;
        let mut inversions = 0u32;
        for &v in odd.iter().rev() {
            if other.0[v] > 0 {
                if self.0[v] > 0 {
                    return None;
                }
                inversions += above;
            }
            if self.0[v] > 0 {
                above += 1;
            }
        }
        let exps = self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect();
        Some((Monomial(exps), inversions % 2 == 1))
    }
}

/// Term key: monomial together with the exponent of λ.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    pub monomial: Monomial,
    pub lambda: i32,
}

/// Coefficient of a term: a rational times a power of λ = ħ/i.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coefficient {
    pub rational: Rational,
    pub lambda_degree: i32,
}

/// Degree caps per grading. Terms exceeding any cap are discarded eagerly.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub caps: BTreeMap<String, u32>,
}

impl TruncationPolicy {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn with_cap(mut self, grading: &str, cap: u32) -> Self {
        self.caps.insert(grading.to_string(), cap);
        self
    }

    pub fn cap(&self, grading: &str) -> Option<u32> {
        self.caps.get(grading).copied()
    }

    pub fn is_none(&self) -> bool {
        self.caps.is_empty()
    }

    /// The common policy of two operands: the tighter cap wins.
    pub fn meet(&self, other: &TruncationPolicy) -> TruncationPolicy {
        if self == other {
            return self.clone();
        }
        let mut caps = self.caps.clone();
        for (k, &v) in &other.caps {
            caps.entry(k.clone())
                .and_modify(|c| *c = (*c).min(v))
                .or_insert(v);
        }
        TruncationPolicy { caps }
    }

    fn resolve(&self, ctx: &VariableContext) -> Result<Vec<ResolvedCap>> {
        self.caps
            .iter()
            .map(|(name, &cap)| {
                if name == LAMBDA {
                    Ok(ResolvedCap { weights: None, cap })
                } else {
                    Ok(ResolvedCap {
                        weights: Some(ctx.grading(name)?.to_vec()),
                        cap,
                    })
                }
            })
            .collect()
    }
}

struct ResolvedCap {
    weights: Option<Vec<u32>>,
    cap: u32,
}

impl ResolvedCap {
    fn degree(&self, t: &Term) -> i64 {
        match &self.weights {
            Some(w) => t.monomial.degree(w) as i64,
            None => t.lambda as i64,
        }
    }
}

/// A truncated supercommutative formal power series with exact rational
/// coefficients, polynomial (Laurent inside symbol computations) in λ.
#[derive(Clone)]
pub struct SuperSeries {
    ctx: Arc<VariableContext>,
    terms: BTreeMap<Term, Rational>,
    truncation: TruncationPolicy,
}

impl PartialEq for SuperSeries {
    fn eq(&self, other: &Self) -> bool {
        self.same_context(other) && self.terms == other.terms
    }
}

impl Eq for SuperSeries {}

impl SuperSeries {
    pub fn zero(ctx: &Arc<VariableContext>) -> Self {
        SuperSeries {
            ctx: ctx.clone(),
            terms: BTreeMap::new(),
            truncation: TruncationPolicy::none(),
        }
    }

    pub fn constant(ctx: &Arc<VariableContext>, c: Rational) -> Self {
        Self::monomial(ctx, Monomial::one(ctx.len()), 0, c)
    }

    pub fn one(ctx: &Arc<VariableContext>) -> Self {
        Self::constant(ctx, Rational::one())
    }

    pub fn lambda(ctx: &Arc<VariableContext>) -> Self {
        Self::monomial(ctx, Monomial::one(ctx.len()), 1, Rational::one())
    }

    pub fn var(ctx: &Arc<VariableContext>, index: usize) -> Self {
        let mut m = Monomial::one(ctx.len());
        m.0[index] = 1;
        Self::monomial(ctx, m, 0, Rational::one())
    }

    pub fn named(ctx: &Arc<VariableContext>, name: &str) -> Result<Self> {
        Ok(Self::var(ctx, ctx.lookup(name)?))
    }

    fn monomial(ctx: &Arc<VariableContext>, m: Monomial, lambda: i32, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Term { monomial: m, lambda }, c);
        }
        SuperSeries {
            ctx: ctx.clone(),
            terms,
            truncation: TruncationPolicy::none(),
        }
    }

    /// Builds a series from explicit terms; odd exponents above one vanish.
    pub fn from_terms(
        ctx: &Arc<VariableContext>,
        terms: impl IntoIterator<Item = (Vec<u16>, i32, Rational)>,
    ) -> Result<Self> {
        let mut map: BTreeMap<Term, Rational> = BTreeMap::new();
        for (exps, lambda, c) in terms {
            if exps.len() != ctx.len() {
                return Err(Error::Context("exponent vector length mismatch".into()));
            }
            if ctx.odd_indices().iter().any(|&i| exps[i] > 1) {
                continue;
            }
            let key = Term {
                monomial: Monomial(exps),
                lambda,
            };
            *map.entry(key).or_insert_with(Rational::zero) += c;
        }
        map.retain(|_, c| !c.is_zero());
        Ok(SuperSeries {
            ctx: ctx.clone(),
            terms: map,
            truncation: TruncationPolicy::none(),
        })
    }

    pub fn context(&self) -> &Arc<VariableContext> {
        &self.ctx
    }

    pub fn truncation(&self) -> &TruncationPolicy {
        &self.truncation
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Term, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn same_context(&self, other: &SuperSeries) -> bool {
        Arc::ptr_eq(&self.ctx, &other.ctx) || *self.ctx == *other.ctx
    }

    fn check_context(&self, other: &SuperSeries) -> Result<()> {
        if self.same_context(other) {
            Ok(())
        } else {
            Err(Error::Context("operands live in different variable contexts".into()))
        }
    }

    /// Applies `policy` (merged with the current one) and drops over-cap terms.
    pub fn truncated(mut self, policy: &TruncationPolicy) -> Result<Self> {
        self.truncation = self.truncation.meet(policy);
        self.enforce()?;
        Ok(self)
    }

    /// Replaces the policy without merging.
    pub fn with_policy(mut self, policy: TruncationPolicy) -> Result<Self> {
        self.truncation = policy;
        self.enforce()?;
        Ok(self)
    }

    fn enforce(&mut self) -> Result<()> {
        if self.truncation.is_none() {
            return Ok(());
        }
        let caps = self.truncation.resolve(&self.ctx)?;
        self.terms
            .retain(|t, _| caps.iter().all(|c| c.degree(t) <= c.cap as i64));
        Ok(())
    }

    pub fn coefficient(&self, monomial: &Monomial, lambda: i32) -> Rational {
        self.terms
            .get(&Term {
                monomial: monomial.clone(),
                lambda,
            })
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Coefficient of the monomial given as `(name, exponent)` pairs.
    pub fn coefficient_of(&self, factors: &[(&str, u16)], lambda: i32) -> Result<Rational> {
        let mut m = Monomial::one(self.ctx.len());
        for &(name, e) in factors {
            m.0[self.ctx.lookup(name)?] += e;
        }
        Ok(self.coefficient(&m, lambda))
    }

    /// The constant (variable-free, λ⁰) coefficient.
    pub fn constant_term(&self) -> Rational {
        self.coefficient(&Monomial::one(self.ctx.len()), 0)
    }

    /// `Some(p)` when every term has parity `p`; zero counts as even.
    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.terms.keys().map(|t| t.monomial.parity(&self.ctx));
        let first = match it.next() {
            Some(p) => p,
            None => return Some(Parity::Even),
        };
        if it.all(|p| p == first) {
            Some(first)
        } else {
            None
        }
    }

    pub fn homogeneous_parity(&self, what: &str) -> Result<Parity> {
        self.parity()
            .ok_or_else(|| Error::Parity(format!("{what} is not parity-homogeneous")))
    }

    /// (even part, odd part).
    pub fn split_parity(&self) -> (SuperSeries, SuperSeries) {
        let mut even = BTreeMap::new();
        let mut odd = BTreeMap::new();
        for (t, c) in &self.terms {
            if t.monomial.parity(&self.ctx).is_odd() {
                odd.insert(t.clone(), c.clone());
            } else {
                even.insert(t.clone(), c.clone());
            }
        }
        (self.with_terms(even), self.with_terms(odd))
    }

    fn with_terms(&self, terms: BTreeMap<Term, Rational>) -> SuperSeries {
        SuperSeries {
            ctx: self.ctx.clone(),
            terms,
            truncation: self.truncation.clone(),
        }
    }

    pub fn filter(&self, mut keep: impl FnMut(&Term) -> bool) -> SuperSeries {
        self.with_terms(
            self.terms
                .iter()
                .filter(|(t, _)| keep(t))
                .map(|(t, c)| (t.clone(), c.clone()))
                .collect(),
        )
    }

    pub fn degree_in(&self, grading: &str, t: &Term) -> Result<i64> {
        if grading == LAMBDA {
            Ok(t.lambda as i64)
        } else {
            Ok(t.monomial.degree(self.ctx.grading(grading)?) as i64)
        }
    }

    /// Sum of the terms of exactly `degree` in `grading`.
    pub fn grading_component(&self, grading: &str, degree: i64) -> Result<SuperSeries> {
        if grading == LAMBDA {
            return Ok(self.filter(|t| t.lambda as i64 == degree));
        }
        let w = self.ctx.grading(grading)?.to_vec();
        Ok(self.filter(|t| t.monomial.degree(&w) as i64 == degree))
    }

    /// Sum of the terms of degree at most `degree` in `grading`.
    pub fn up_to_degree(&self, grading: &str, degree: i64) -> Result<SuperSeries> {
        if grading == LAMBDA {
            return Ok(self.filter(|t| t.lambda as i64 <= degree));
        }
        let w = self.ctx.grading(grading)?.to_vec();
        Ok(self.filter(|t| t.monomial.degree(&w) as i64 <= degree))
    }

    pub fn max_degree(&self, grading: &str) -> Result<Option<i64>> {
        let mut best = None;
        for t in self.terms.keys() {
            let d = self.degree_in(grading, t)?;
            best = Some(best.map_or(d, |b: i64| b.max(d)));
        }
        Ok(best)
    }

    pub fn min_lambda(&self) -> Option<i32> {
        self.terms.keys().map(|t| t.lambda).min()
    }

    pub fn depends_on(&self, var: usize) -> bool {
        self.terms.keys().any(|t| t.monomial.0[var] > 0)
    }

    pub fn depends_on_any(&self, vars: &[usize]) -> bool {
        vars.iter().any(|&v| self.depends_on(v))
    }

    /// Sets every listed variable to zero.
    pub fn restrict_zero(&self, vars: &[usize]) -> SuperSeries {
        self.filter(|t| vars.iter().all(|&v| t.monomial.0[v] == 0))
    }

    pub fn add(&self, other: &SuperSeries) -> Result<SuperSeries> {
        self.check_context(other)?;
        let mut terms = self.terms.clone();
        for (t, c) in &other.terms {
            let e = terms.entry(t.clone()).or_insert_with(Rational::zero);
            *e += c;
            if e.is_zero() {
                terms.remove(t);
            }
        }
        let mut out = SuperSeries {
            ctx: self.ctx.clone(),
            terms,
            truncation: self.truncation.meet(&other.truncation),
        };
        out.enforce()?;
        Ok(out)
    }

    pub fn sub(&self, other: &SuperSeries) -> Result<SuperSeries> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> SuperSeries {
        self.with_terms(self.terms.iter().map(|(t, c)| (t.clone(), -c)).collect())
    }

    pub fn scale(&self, k: &Rational) -> SuperSeries {
        if k.is_zero() {
            return self.with_terms(BTreeMap::new());
        }
        self.with_terms(self.terms.iter().map(|(t, c)| (t.clone(), c * k)).collect())
    }

    pub fn scale_int(&self, k: i64) -> SuperSeries {
        self.scale(&int(k))
    }

    pub fn signed(&self, sign: i32) -> SuperSeries {
        if sign < 0 {
            self.neg()
        } else {
            self.clone()
        }
    }

    /// Multiplies by λ^k.
    pub fn mul_lambda(&self, k: i32) -> Result<SuperSeries> {
        let mut out = self.with_terms(
            self.terms
                .iter()
                .map(|(t, c)| {
                    (
                        Term {
                            monomial: t.monomial.clone(),
                            lambda: t.lambda + k,
                        },
                        c.clone(),
                    )
                })
                .collect(),
        );
        out.enforce()?;
        Ok(out)
    }

    /// Supercommutative product, truncated by the meet of both policies.
    pub fn mul(&self, other: &SuperSeries) -> Result<SuperSeries> {
        self.check_context(other)?;
        let policy = self.truncation.meet(&other.truncation);
        let caps = policy.resolve(&self.ctx)?;
        let odd = self.ctx.odd_indices();
        let degs_a: Vec<Vec<i64>> = self
            .terms
            .keys()
            .map(|t| caps.iter().map(|c| c.degree(t)).collect())
            .collect();
        let degs_b: Vec<Vec<i64>> = other
            .terms
            .keys()
            .map(|t| caps.iter().map(|c| c.degree(t)).collect())
            .collect();
        let mut acc: HashMap<Term, Rational> = HashMap::new();
        for ((ta, ca), da) in self.terms.iter().zip(&degs_a) {
            for ((tb, cb), db) in other.terms.iter().zip(&degs_b) {
                if caps
                    .iter()
                    .enumerate()
                    .any(|(k, c)| da[k] + db[k] > c.cap as i64)
                {
                    continue;
                }
                let Some((m, negative)) = ta.monomial.mul(&tb.monomial, odd) else {
                    continue;
                };
                let c = ca * cb;
                let key = Term {
                    monomial: m,
                    lambda: ta.lambda + tb.lambda,
                };
                let e = acc.entry(key).or_insert_with(Rational::zero);
                if negative {
                    *e -= c;
                } else {
                    *e += c;
                }
            }
        }
        let terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Ok(SuperSeries {
            ctx: self.ctx.clone(),
            terms,
            truncation: policy,
        })
    }

    pub fn pow(&self, e: u32) -> Result<SuperSeries> {
        let mut out = SuperSeries::one(&self.ctx).with_policy(self.truncation.clone())?;
        for _ in 0..e {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Left partial derivative ∂/∂v: v is moved to the front of each
    /// monomial before being removed.
    pub fn left_derivative(&self, var: usize) -> Result<SuperSeries> {
        self.ctx.check_index(var)?;
        let odd_var = self.ctx.parity(var).is_odd();
        let mut terms = BTreeMap::new();
        for (t, c) in &self.terms {
            let e = t.monomial.0[var];
            if e == 0 {
                continue;
            }
            let mut m = t.monomial.clone();
            m.0[var] -= 1;
            let coeff = if odd_var {
                let before = self
                    .ctx
                    .odd_indices()
                    .iter()
                    .take_while(|&&j| j < var)
                    .filter(|&&j| t.monomial.0[j] > 0)
                    .count();
                if before % 2 == 1 {
                    -c.clone()
                } else {
                    c.clone()
                }
            } else {
                c * int(e as i64)
            };
            terms.insert(
                Term {
                    monomial: m,
                    lambda: t.lambda,
                },
                coeff,
            );
        }
        Ok(self.with_terms(terms))
    }

    /// Right partial derivative: (−1)^{ṽ(ã+ṽ)} times the left one, termwise.
    pub fn right_derivative(&self, var: usize) -> Result<SuperSeries> {
        self.ctx.check_index(var)?;
        let pv = self.ctx.parity(var);
        let left = self.left_derivative(var)?;
        let (even, odd) = left.split_parity();
        // a term of the derivative has parity ã + ṽ
        let s_even = pv.koszul(Parity::Even);
        let s_odd = pv.koszul(Parity::Odd);
        even.signed(s_even).add(&odd.signed(s_odd))
    }

    pub fn named_derivative(&self, name: &str) -> Result<SuperSeries> {
        self.left_derivative(self.ctx.lookup(name)?)
    }

    /// Simultaneous substitution of variables by series (an algebra
    /// homomorphism). Each image must share the parity of its variable.
    pub fn substitute(&self, assignment: &BTreeMap<usize, SuperSeries>) -> Result<SuperSeries> {
        if assignment.is_empty() {
            return Ok(self.clone());
        }
        let mut policy = self.truncation.clone();
        for (&v, s) in assignment {
            self.ctx.check_index(v)?;
            self.check_context(s)?;
            match s.parity() {
                Some(p) if p == self.ctx.parity(v) || s.is_zero() => {}
                _ => {
                    return Err(Error::Parity(format!(
                        "image of `{}` does not have parity {}",
                        self.ctx.var(v).name,
                        self.ctx.parity(v)
                    )))
                }
            }
            policy = policy.meet(&s.truncation);
        }
        let n = self.ctx.len();
        let mut powers: HashMap<(usize, u16), SuperSeries> = HashMap::new();
        let mut total = SuperSeries::zero(&self.ctx).with_policy(policy.clone())?;
        let mut pending: HashMap<Term, Rational> = HashMap::new();
        for (t, c) in &self.terms {
            // Split the monomial into runs of untouched variables and
            // substituted powers, multiplied left to right in index order.
            let mut acc = SuperSeries::monomial(
                &self.ctx,
                Monomial::one(n),
                t.lambda,
                c.clone(),
            )
            .with_policy(policy.clone())?;
            let mut run = Monomial::one(n);
            let mut touched = false;
            for v in 0..n {
                let e = t.monomial.0[v];
                if e == 0 {
                    continue;
                }
                match assignment.get(&v) {
                    None => run.0[v] = e,
                    Some(img) => {
                        touched = true;
                        if !run.is_one() {
                            let r = SuperSeries::monomial(&self.ctx, run, 0, Rational::one());
                            acc = acc.mul(&r)?;
                            run = Monomial::one(n);
                        }
                        if !powers.contains_key(&(v, e)) {
                            let p = img.clone().with_policy(policy.clone())?.pow(e as u32)?;
                            powers.insert((v, e), p);
                        }
                        acc = acc.mul(&powers[&(v, e)])?;
                        if acc.is_zero() {
                            break;
                        }
                    }
                }
            }
            if !touched {
                *pending.entry(t.clone()).or_insert_with(Rational::zero) += c;
                continue;
            }
            if !run.is_one() && !acc.is_zero() {
                let r = SuperSeries::monomial(&self.ctx, run, 0, Rational::one());
                acc = acc.mul(&r)?;
            }
            for (k, v) in acc.terms {
                *pending.entry(k).or_insert_with(Rational::zero) += v;
            }
        }
        total.terms = pending.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        total.enforce()?;
        Ok(total)
    }

    pub fn substitute_named(&self, pairs: &[(&str, &SuperSeries)]) -> Result<SuperSeries> {
        let mut map = BTreeMap::new();
        for (name, s) in pairs {
            map.insert(self.ctx.lookup(name)?, (*s).clone());
        }
        self.substitute(&map)
    }

    /// Renames variables (a parity-preserving substitution by variables).
    pub fn rename(&self, mapping: &[(usize, usize)]) -> Result<SuperSeries> {
        let map = mapping
            .iter()
            .map(|&(from, to)| (from, SuperSeries::var(&self.ctx, to)))
            .collect();
        self.substitute(&map)
    }
}

impl fmt::Debug for SuperSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SuperSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (t, c) in &self.terms {
            let mut factors = Vec::new();
            if t.lambda == 1 {
                factors.push("lambda".to_string());
            } else if t.lambda != 0 {
                factors.push(format!("lambda^{}", t.lambda));
            }
            for (i, &e) in t.monomial.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(self.ctx.var(i).name.clone()),
                    _ => factors.push(format!("{}^{}", self.ctx.var(i).name, e)),
                }
            }
            let negative = c.is_negative();
            let abs = c.abs();
            if first {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if negative { " - " } else { " + " })?;
            }
            first = false;
            let unit = abs.is_one();
            if factors.is_empty() {
                write!(f, "{abs}")?;
            } else if unit {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{abs}*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::context::{Parity, Role};

    fn ctx() -> Arc<VariableContext> {
        VariableContext::builder()
            .var("x1", Parity::Even, Role::Base)
            .var("x2", Parity::Even, Role::Base)
            .paired("xs1", Parity::Odd, Role::OddAntimomentum, "x1")
            .paired("xs2", Parity::Odd, Role::OddAntimomentum, "x2")
            .grading("antimomentum", &["xs1", "xs2"])
            .build()
            .unwrap()
    }

    fn v(c: &Arc<VariableContext>, n: &str) -> SuperSeries {
        SuperSeries::named(c, n).unwrap()
    }

    #[test]
    fn odd_variables_anticommute() {
        let c = ctx();
        let a = v(&c, "xs1").mul(&v(&c, "xs2")).unwrap();
        let b = v(&c, "xs2").mul(&v(&c, "xs1")).unwrap();
        assert_eq!(a, b.neg());
        assert!(v(&c, "xs1").mul(&v(&c, "xs1")).unwrap().is_zero());
    }

    #[test]
    fn square_of_one_plus_nilpotent() {
        let c = ctx();
        let n = v(&c, "x1").mul(&v(&c, "xs1")).unwrap();
        let a = SuperSeries::one(&c)
            .add(&n)
            .unwrap()
            .truncated(&TruncationPolicy::none().with_cap("antimomentum", 2))
            .unwrap();
        let sq = a.mul(&a).unwrap();
        let expected = SuperSeries::one(&c).add(&n.scale_int(2)).unwrap();
        assert_eq!(sq, expected);
    }

    #[test]
    fn left_derivative_signs() {
        let c = ctx();
        let m = v(&c, "xs1").mul(&v(&c, "xs2")).unwrap();
        assert_eq!(m.named_derivative("xs1").unwrap(), v(&c, "xs2"));
        assert_eq!(m.named_derivative("xs2").unwrap(), v(&c, "xs1").neg());
        let x = v(&c, "x1");
        let f = x.mul(&x).unwrap().mul(&v(&c, "xs1")).unwrap();
        assert_eq!(
            f.named_derivative("x1").unwrap(),
            x.mul(&v(&c, "xs1")).unwrap().scale_int(2)
        );
    }

    #[test]
    fn right_derivative_moves_to_the_end() {
        let c = ctx();
        let m = v(&c, "xs1").mul(&v(&c, "xs2")).unwrap();
        let i = c.lookup("xs1").unwrap();
        assert_eq!(m.right_derivative(i).unwrap(), v(&c, "xs2").neg());
    }

    #[test]
    fn substitution_examples() {
        let c = ctx();
        let x = v(&c, "x1");
        let sq = x.mul(&x).unwrap();
        let img = x.add(&SuperSeries::one(&c)).unwrap();
        let out = sq.substitute_named(&[("x1", &img)]).unwrap();
        let expected = sq
            .add(&x.scale_int(2))
            .unwrap()
            .add(&SuperSeries::one(&c))
            .unwrap();
        assert_eq!(out, expected);
        assert_eq!(sq.substitute(&BTreeMap::new()).unwrap(), sq);
    }

    #[test]
    fn substitution_rejects_parity_mismatch() {
        let c = ctx();
        let x = v(&c, "x1");
        let err = x.substitute_named(&[("x1", &v(&c, "xs1"))]).unwrap_err();
        assert!(matches!(err, Error::Parity(_)));
    }

    #[test]
    fn components_by_grading() {
        let c = ctx();
        let p = SuperSeries::one(&c)
            .add(&v(&c, "x1").mul(&v(&c, "xs1")).unwrap())
            .unwrap();
        assert_eq!(
            p.grading_component("antimomentum", 1).unwrap(),
            v(&c, "x1").mul(&v(&c, "xs1")).unwrap()
        );
        assert!(p.grading_component("antimomentum", 5).unwrap().is_zero());
        let l = SuperSeries::one(&c)
            .add(&SuperSeries::lambda(&c).mul(&v(&c, "x1")).unwrap())
            .unwrap();
        assert_eq!(l.grading_component(LAMBDA, 0).unwrap(), SuperSeries::one(&c));
        assert!(matches!(
            p.grading_component("nope", 0),
            Err(Error::Context(_))
        ));
    }
}
