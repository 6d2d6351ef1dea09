//! Canonical Poisson and Schouten brackets, Hamiltonian lifts of vector
//! fields and the invariant master Hamiltonians Ŝ and P̂oi.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{Parity, SuperSeries, VariableContext};
use crate::chart::{Chart, PhaseSpace, PhaseSpaceKind};
use crate::error::{Error, Result};

/// Sign convention of the odd bracket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// ⟦P,R⟧
    Original,
    /// [P,R] = (−1)^{P̃+1}⟦P,R⟧
    Redefined,
}

fn sign(bit: u32) -> i32 {
    if bit % 2 == 0 {
        1
    } else {
        -1
    }
}

fn derivatives(s: &SuperSeries, vars: &[usize]) -> Result<Vec<SuperSeries>> {
    vars.iter().map(|&v| s.left_derivative(v)).collect()
}

/// The even canonical bracket (H,G) on a cotangent-type phase space.
pub fn canonical_poisson(h: &SuperSeries, g: &SuperSeries, ps: &PhaseSpace) -> Result<SuperSeries> {
    if ps.parity != Parity::Even {
        return Err(Error::PhaseSpace("Poisson bracket needs an even phase space".into()));
    }
    let ctx = h.context().clone();
    ps.validate(&ctx)?;
    let dg_x = derivatives(g, &ps.coords)?;
    let dg_p = derivatives(g, &ps.momenta)?;
    let (h0, h1) = h.split_parity();
    let mut out = SuperSeries::zero(&ctx);
    for (part, hp) in [(h0, 0u32), (h1, 1u32)] {
        if part.is_zero() {
            continue;
        }
        for (k, (x, p)) in ps.pairs().enumerate() {
            let a = ctx.parity(x).bit();
            let dh_p = part.left_derivative(p)?;
            if !dh_p.is_zero() && !dg_x[k].is_zero() {
                out = out.add(&dh_p.mul(&dg_x[k])?.signed(sign(hp * a + a)))?;
            }
            let dh_x = part.left_derivative(x)?;
            if !dh_x.is_zero() && !dg_p[k].is_zero() {
                out = out.sub(&dh_x.mul(&dg_p[k])?.signed(sign(hp * a)))?;
            }
        }
    }
    Ok(out)
}

/// The odd canonical bracket on an anticotangent-type phase space.
pub fn canonical_schouten(
    p: &SuperSeries,
    r: &SuperSeries,
    ps: &PhaseSpace,
    convention: Convention,
) -> Result<SuperSeries> {
    if ps.parity != Parity::Odd {
        return Err(Error::PhaseSpace("Schouten bracket needs an odd phase space".into()));
    }
    let ctx = p.context().clone();
    ps.validate(&ctx)?;
    let dr_x = derivatives(r, &ps.coords)?;
    let dr_s = derivatives(r, &ps.momenta)?;
    let (p0, p1) = p.split_parity();
    let mut out = SuperSeries::zero(&ctx);
    for (part, pp) in [(p0, 0u32), (p1, 1u32)] {
        if part.is_zero() {
            continue;
        }
        let mut acc = SuperSeries::zero(&ctx);
        for (k, (x, s)) in ps.pairs().enumerate() {
            let a = ctx.parity(x).bit();
            let dp_s = part.left_derivative(s)?;
            if !dp_s.is_zero() && !dr_x[k].is_zero() {
                acc = acc.add(&dp_s.mul(&dr_x[k])?.signed(sign((pp + 1) * (a + 1))))?;
            }
            let dp_x = part.left_derivative(x)?;
            if !dp_x.is_zero() && !dr_s[k].is_zero() {
                acc = acc.sub(&dp_x.mul(&dr_s[k])?.signed(sign((pp + 1) * a)))?;
            }
        }
        if convention == Convention::Redefined {
            acc = acc.signed(sign(pp + 1));
        }
        out = out.add(&acc)?;
    }
    Ok(out)
}

/// A vector field Σ X^k ∂/∂z^k with components keyed by variable index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    pub components: BTreeMap<usize, SuperSeries>,
    pub parity: Parity,
}

impl VectorField {
    pub fn new(parity: Parity, components: BTreeMap<usize, SuperSeries>) -> Result<Self> {
        for (&v, c) in &components {
            let ctx = c.context();
            ctx.check_index(v)?;
            match c.parity() {
                Some(q) if q == parity + ctx.parity(v) || c.is_zero() => {}
                _ => {
                    return Err(Error::Parity(format!(
                        "component along `{}` has the wrong parity",
                        ctx.var(v).name
                    )))
                }
            }
        }
        let components = components.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Ok(VectorField { components, parity })
    }

    pub fn zero(parity: Parity) -> Self {
        VectorField {
            components: BTreeMap::new(),
            parity,
        }
    }

    pub fn apply(&self, f: &SuperSeries) -> Result<SuperSeries> {
        let mut out = SuperSeries::zero(f.context());
        for (&v, c) in &self.components {
            let d = f.left_derivative(v)?;
            if !d.is_zero() {
                out = out.add(&c.mul(&d)?)?;
            }
        }
        Ok(out)
    }

    /// [X,Y] = XY − (−1)^{X̃Ỹ} YX, componentwise.
    pub fn commutator(&self, other: &VectorField) -> Result<VectorField> {
        let s = self.parity.koszul(other.parity);
        let keys: std::collections::BTreeSet<usize> = self
            .components
            .keys()
            .chain(other.components.keys())
            .copied()
            .collect();
        let mut comps = BTreeMap::new();
        for k in keys {
            let mut c: Option<SuperSeries> = None;
            if let Some(yk) = other.components.get(&k) {
                c = Some(self.apply(yk)?);
            }
            if let Some(xk) = self.components.get(&k) {
                let t = other.apply(xk)?.signed(s);
                c = Some(match c {
                    Some(a) => a.sub(&t)?,
                    None => t.neg(),
                });
            }
            if let Some(c) = c {
                if !c.is_zero() {
                    comps.insert(k, c);
                }
            }
        }
        Ok(VectorField {
            components: comps,
            parity: self.parity + other.parity,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }
}

/// H_X = X^a p_a on an even phase space, P_X = (−1)^{X̃} X^a x*_a on an odd one.
pub fn lift_vector_field(
    x: &VectorField,
    ps: &PhaseSpace,
    ctx: &Arc<VariableContext>,
) -> Result<SuperSeries> {
    ps.validate(ctx)?;
    let mut out = SuperSeries::zero(ctx);
    for (&v, c) in &x.components {
        let k = ps.coords.iter().position(|&z| z == v).ok_or_else(|| {
            Error::PhaseSpace(format!("`{}` is not a coordinate of the phase space", c.context().var(v).name))
        })?;
        let m = SuperSeries::var(ctx, ps.momenta[k]);
        let mut term = c.mul(&m)?;
        if ps.parity == Parity::Odd {
            term = term.signed(x.parity.sign());
        }
        out = out.add(&term)?;
    }
    Ok(out)
}

/// Ŝ = Σ (−1)^ã π^a p_a on T*(ΠT*M).
pub fn schouten_master(chart: &Chart) -> Result<SuperSeries> {
    let mut out = chart.zero();
    for a in 0..chart.dim() {
        let t = chart.var(chart.pis(a)).mul(&chart.var(chart.p(a)))?;
        out = out.add(&t.signed(chart.parity(a).sign()))?;
    }
    Ok(out)
}

/// P̂oi = Σ (−1)^ã x*_a p*^a on ΠT*(T*M), so that ⟦⟦H,P̂oi⟧,G⟧ = (H,G).
pub fn poisson_master(chart: &Chart) -> Result<SuperSeries> {
    let mut out = chart.zero();
    for a in 0..chart.dim() {
        let t = chart.var(chart.xs(a)).mul(&chart.var(chart.ps(a)))?;
        out = out.add(&t.signed(chart.parity(a).sign()))?;
    }
    Ok(out)
}

/// Ŝ or P̂oi according to the iterated phase space.
pub fn canonical_master_hamiltonians(chart: &Chart, double: &PhaseSpace) -> Result<SuperSeries> {
    match double.kind {
        PhaseSpaceKind::CotangentOfMultivectors => schouten_master(chart),
        PhaseSpaceKind::AntiCotangentOfCotangent => poisson_master(chart),
        other => Err(Error::PhaseSpace(format!("{other:?} is not an iterated phase space"))),
    }
}
