//! The generating operator Δ = [d, P̂] on forms, its classical brackets and
//! its principal symbol.

use std::sync::Arc;

use crate::algebra::{Parity, SuperSeries, VariableContext};
use crate::chart::{Block, Chart};
use crate::error::{Error, Result};

/// A differential operator on forms built from primitive pieces.
#[derive(Debug, Clone)]
pub enum FormOperator {
    /// Left multiplication.
    Multiply(SuperSeries),
    /// Left derivative along a variable.
    Derivative(usize),
    /// Multiplication by λᵏ.
    Lambda(i32),
    /// A∘B∘…; the last factor acts first.
    Compose(Vec<FormOperator>),
    /// Signed sum.
    Sum(Vec<(i32, FormOperator)>),
}

impl FormOperator {
    pub fn identity() -> Self {
        FormOperator::Compose(vec![])
    }

    pub fn apply(&self, omega: &SuperSeries) -> Result<SuperSeries> {
        match self {
            FormOperator::Multiply(s) => s.mul(omega),
            FormOperator::Derivative(v) => omega.left_derivative(*v),
            FormOperator::Lambda(k) => omega.mul_lambda(*k),
            FormOperator::Compose(ops) => {
                let mut out = omega.clone();
                for op in ops.iter().rev() {
                    if out.is_zero() {
                        break;
                    }
                    out = op.apply(&out)?;
                }
                Ok(out)
            }
            FormOperator::Sum(parts) => {
                let mut out = SuperSeries::zero(omega.context());
                for (sign, op) in parts {
                    out = out.add(&op.apply(omega)?.signed(*sign))?;
                }
                Ok(out)
            }
        }
    }

    /// Parity, or `None` for an inhomogeneous operator.
    pub fn parity(&self, ctx: &VariableContext) -> Option<Parity> {
        match self {
            FormOperator::Multiply(s) => {
                if s.is_zero() {
                    Some(Parity::Even)
                } else {
                    s.parity()
                }
            }
            FormOperator::Derivative(v) => Some(ctx.parity(*v)),
            FormOperator::Lambda(_) => Some(Parity::Even),
            FormOperator::Compose(ops) => ops
                .iter()
                .try_fold(Parity::Even, |acc, op| Some(acc + op.parity(ctx)?)),
            FormOperator::Sum(parts) => {
                let mut out = None;
                for (_, op) in parts {
                    let p = op.parity(ctx)?;
                    match out {
                        None => out = Some(p),
                        Some(q) if q != p => return None,
                        _ => {}
                    }
                }
                Some(out.unwrap_or(Parity::Even))
            }
        }
    }

    /// [A,B] = AB − (−1)^{ÃB̃} BA.
    pub fn commutator(&self, other: &FormOperator, ctx: &VariableContext) -> Result<FormOperator> {
        let a = self
            .parity(ctx)
            .ok_or_else(|| Error::Parity("commutator of an inhomogeneous operator".into()))?;
        let b = other
            .parity(ctx)
            .ok_or_else(|| Error::Parity("commutator of an inhomogeneous operator".into()))?;
        Ok(FormOperator::Sum(vec![
            (1, FormOperator::Compose(vec![self.clone(), other.clone()])),
            (-a.koszul(b), FormOperator::Compose(vec![other.clone(), self.clone()])),
        ]))
    }

    /// e^{−S/λ} ∘ A ∘ e^{S/λ} for S = Σ z^k m_k: every derivative along z^k
    /// becomes ∂/∂z^k + λ⁻¹m_k.
    pub fn conjugate(&self, ctx: &Arc<VariableContext>, pairs: &[(usize, usize)]) -> FormOperator {
        match self {
            FormOperator::Derivative(v) => match pairs.iter().find(|(z, _)| z == v) {
                Some(&(_, m)) => FormOperator::Sum(vec![
                    (1, FormOperator::Derivative(*v)),
                    (
                        1,
                        FormOperator::Compose(vec![
                            FormOperator::Lambda(-1),
                            FormOperator::Multiply(SuperSeries::var(ctx, m)),
                        ]),
                    ),
                ]),
                None => self.clone(),
            },
            FormOperator::Compose(ops) => {
                FormOperator::Compose(ops.iter().map(|o| o.conjugate(ctx, pairs)).collect())
            }
            FormOperator::Sum(parts) => FormOperator::Sum(
                parts
                    .iter()
                    .map(|(s, o)| (*s, o.conjugate(ctx, pairs)))
                    .collect(),
            ),
            other => other.clone(),
        }
    }
}

/// d = dxᵃ ∂/∂xᵃ.
pub fn de_rham_operator(chart: &Chart) -> FormOperator {
    FormOperator::Sum(
        (0..chart.dim())
            .map(|a| {
                (
                    1,
                    FormOperator::Compose(vec![
                        FormOperator::Multiply(chart.var(chart.dx(a))),
                        FormOperator::Derivative(chart.x(a)),
                    ]),
                )
            })
            .collect(),
    )
}

/// P̂ = P(x, λ∂/∂dx), each x*_a replaced in place by λ∂/∂dxᵃ.
pub fn interior_operator(chart: &Chart, p: &SuperSeries) -> Result<FormOperator> {
    if !chart.lives_on(p, &[Block::X, Block::Xs]) {
        return Err(Error::Argument("P must be a function of x and x*".into()));
    }
    let ctx = chart.ctx();
    let xs = chart.block(Block::Xs);
    let mut parts = Vec::new();
    for (term, c) in p.terms() {
        let e = term.monomial.exponents();
        let mut base = e.to_vec();
        for &v in &xs {
            base[v] = 0;
        }
        let mult = SuperSeries::from_terms(ctx, [(base, term.lambda, c.clone())])?;
        let mut ops = vec![FormOperator::Multiply(mult)];
        let mut order = 0;
        for (a, &v) in xs.iter().enumerate() {
            for _ in 0..e[v] {
                ops.push(FormOperator::Derivative(chart.dx(a)));
                order += 1;
            }
        }
        if order > 0 {
            ops.push(FormOperator::Lambda(order));
        }
        parts.push((1, FormOperator::Compose(ops)));
    }
    Ok(FormOperator::Sum(parts))
}

/// Δ = [d, P̂], split by the parity of P.
pub fn bv_delta(chart: &Chart, p: &SuperSeries) -> Result<FormOperator> {
    let d = de_rham_operator(chart);
    let (even, odd) = p.split_parity();
    let mut parts = Vec::new();
    for part in [even, odd] {
        if part.is_zero() {
            continue;
        }
        let ph = interior_operator(chart, &part)?;
        parts.push((1, d.commutator(&ph, chart.ctx())?));
    }
    Ok(FormOperator::Sum(parts))
}

/// [ω₁,…,ω_k] = λ⁻ᵏ[..[Δ,ω₁]..,ω_k](1) as λ → 0.
pub fn classical_brackets_from_delta(
    chart: &Chart,
    p: &SuperSeries,
    args: &[SuperSeries],
) -> Result<SuperSeries> {
    if args.is_empty() {
        return Err(Error::Argument("classical brackets need at least one argument".into()));
    }
    let ctx = chart.ctx();
    let mut op = bv_delta(chart, p)?;
    for w in args {
        if !chart.lives_on(w, &[Block::X, Block::Dx]) {
            return Err(Error::Argument("bracket arguments must be forms".into()));
        }
        op = op.commutator(&FormOperator::Multiply(w.clone()), ctx)?;
    }
    let value = op.apply(&chart.one())?;
    let k = args.len() as i32;
    if let Some(low) = value.min_lambda() {
        if low < k {
            return Err(Error::Limit(format!(
                "λ-degree {low} below the arity {k}: the limit diverges"
            )));
        }
    }
    value.filter(|t| t.lambda == k).mul_lambda(-k)
}

/// λ⁰ part of e^{−(xp+dxπ)/λ} Δ e^{(xp+dxπ)/λ}(1).
pub fn principal_symbol(chart: &Chart, p: &SuperSeries) -> Result<SuperSeries> {
    let ctx = chart.ctx();
    let pairs: Vec<(usize, usize)> = (0..chart.dim())
        .flat_map(|a| [(chart.x(a), chart.p(a)), (chart.dx(a), chart.pi(a))])
        .collect();
    let conj = bv_delta(chart, p)?.conjugate(ctx, &pairs);
    let value = conj.apply(&chart.one())?;
    let negative = value.filter(|t| t.lambda < 0);
    if !negative.is_zero() {
        return Err(Error::Symbol(format!("negative λ-powers survive: {negative}")));
    }
    Ok(value.filter(|t| t.lambda == 0))
}
