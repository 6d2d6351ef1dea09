//! Even thick morphisms, their nonlinear pullbacks, adjoints of fiberwise
//! maps and the transformation of forms into multivectors.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{rat, Monomial, Parity, Rational, Role, SuperSeries, TruncationPolicy, VariableContext};
use crate::brackets::{canonical_schouten, schouten_master, Convention};
use crate::chart::{Block, Chart, PhaseSpaceKind};
use crate::error::{Error, Result};
use crate::koszul::HomotopyPoisson;
use crate::linfty::{hamiltonian_field_on_functions, CaseReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThickFlavor {
    EvenThick,
    OddThick,
}

/// S(x, q) together with the coordinates it pairs.
///
/// `target_coords[i]` is conjugate to `target_momenta[i]`, and
/// `source_coords[a]` to `source_momenta[a]`. Source and target coordinates
/// may reuse the same variables: the pullback substitutes simultaneously.
#[derive(Debug, Clone)]
pub struct GeneratingFunction {
    pub s: SuperSeries,
    pub source_coords: Vec<usize>,
    pub source_momenta: Vec<usize>,
    pub target_coords: Vec<usize>,
    pub target_momenta: Vec<usize>,
    pub flavor: ThickFlavor,
}

impl GeneratingFunction {
    pub fn new(
        s: SuperSeries,
        source: (Vec<usize>, Vec<usize>),
        target: (Vec<usize>, Vec<usize>),
        flavor: ThickFlavor,
    ) -> Result<Self> {
        let ctx = s.context().clone();
        let unpaired = !source.1.is_empty() && source.0.len() != source.1.len();
        if unpaired || target.0.len() != target.1.len() {
            return Err(Error::PhaseSpace("coordinates and momenta must pair up".into()));
        }
        let expected = match flavor {
            ThickFlavor::EvenThick => Parity::Even,
            ThickFlavor::OddThick => Parity::Odd,
        };
        if !s.is_zero() && s.parity() != Some(expected) {
            return Err(Error::Parity("generating function has the wrong parity".into()));
        }
        for (&y, &q) in target.0.iter().zip(&target.1) {
            let want = match flavor {
                ThickFlavor::EvenThick => ctx.parity(y),
                ThickFlavor::OddThick => ctx.parity(y).flip(),
            };
            if ctx.parity(q) != want {
                return Err(Error::PhaseSpace(format!(
                    "`{}` cannot be conjugate to `{}`",
                    ctx.var(q).name,
                    ctx.var(y).name
                )));
            }
        }
        let allowed: Vec<usize> = source.0.iter().chain(&target.1).copied().collect();
        if (0..ctx.len()).any(|v| !allowed.contains(&v) && s.depends_on(v)) {
            return Err(Error::Argument(
                "S may depend only on source coordinates and target momenta".into(),
            ));
        }
        Ok(GeneratingFunction {
            s,
            source_coords: source.0,
            source_momenta: source.1,
            target_coords: target.0,
            target_momenta: target.1,
            flavor,
        })
    }

    pub fn context(&self) -> &Arc<VariableContext> {
        self.s.context()
    }

    /// Solves yⁱ = (−1)^ĩ ∂S/∂q_i(x, ∂g/∂y(y)), returning (y, q, passes).
    pub fn solve(&self, g: &SuperSeries, max_passes: Option<usize>) -> Result<Solution> {
        let ctx = self.context().clone();
        if g.depends_on_any(&self.target_momenta) {
            return Err(Error::Argument("g must be a function on the target".into()));
        }
        let dg: Vec<SuperSeries> = self
            .target_coords
            .iter()
            .map(|&y| g.left_derivative(y))
            .collect::<Result<_>>()?;
        let ds: Vec<SuperSeries> = self
            .target_momenta
            .iter()
            .zip(&self.target_coords)
            .map(|(&q, &y)| Ok(self.s.left_derivative(q)?.signed(ctx.parity(y).sign())))
            .collect::<Result<_>>()?;
        let policy = g.truncation().meet(self.s.truncation());
        let coords = self.target_coords.clone();
        let momenta = self.target_momenta.clone();
        let momenta_of = |ys: &[SuperSeries]| -> Result<Vec<SuperSeries>> {
            let map: BTreeMap<usize, SuperSeries> =
                coords.iter().copied().zip(ys.iter().cloned()).collect();
            dg.iter().map(|d| d.substitute(&map)).collect()
        };
        let step = |ys: &[SuperSeries]| -> Result<Vec<SuperSeries>> {
            let qs = momenta_of(ys)?;
            let map: BTreeMap<usize, SuperSeries> =
                momenta.iter().copied().zip(qs).collect();
            ds.iter().map(|d| d.substitute(&map)).collect()
        };
        let parities: Vec<Parity> = coords.iter().map(|&y| ctx.parity(y)).collect();
        let avoid = [g, &self.s];
        let (ys, passes) = solve_fixed_point(&ctx, &parities, &step, &policy, max_passes, &avoid)?;
        let qs = momenta_of(&ys)?;
        Ok(Solution { y: ys, q: qs, passes })
    }

    /// Φ*[g] = g(y) + S(x,q) − yⁱq_i.
    pub fn pullback(&self, g: &SuperSeries) -> Result<SuperSeries> {
        let sol = self.solve(g, None)?;
        self.assemble(g, &sol)
    }

    pub fn assemble(&self, g: &SuperSeries, sol: &Solution) -> Result<SuperSeries> {
        let ymap: BTreeMap<usize, SuperSeries> = self
            .target_coords
            .iter()
            .copied()
            .zip(sol.y.iter().cloned())
            .collect();
        let qmap: BTreeMap<usize, SuperSeries> = self
            .target_momenta
            .iter()
            .copied()
            .zip(sol.q.iter().cloned())
            .collect();
        let mut out = g.substitute(&ymap)?.add(&self.s.substitute(&qmap)?)?;
        for (y, q) in sol.y.iter().zip(&sol.q) {
            out = out.sub(&y.mul(q)?)?;
        }
        Ok(out)
    }

    /// H₁(x, ∂S/∂x) − H₂((−1)^ĩ ∂S/∂q, q), a function of (x, q).
    pub fn hamilton_jacobi_residual(&self, h1: &SuperSeries, h2: &SuperSeries) -> Result<SuperSeries> {
        let ctx = self.context();
        let mut left = BTreeMap::new();
        for (&x, &p) in self.source_coords.iter().zip(&self.source_momenta) {
            left.insert(p, self.s.left_derivative(x)?);
        }
        let mut right = BTreeMap::new();
        for (&y, &q) in self.target_coords.iter().zip(&self.target_momenta) {
            right.insert(y, self.s.left_derivative(q)?.signed(ctx.parity(y).sign()));
        }
        h1.substitute(&left)?.sub(&h2.substitute(&right)?)
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub y: Vec<SuperSeries>,
    pub q: Vec<SuperSeries>,
    pub passes: usize,
}

fn probe_variable(ctx: &VariableContext, parity: Parity, avoid: &[&SuperSeries]) -> Option<usize> {
    ctx.with_role(Role::Auxiliary)
        .into_iter()
        .find(|&v| ctx.parity(v) == parity && avoid.iter().all(|s| !s.depends_on(v)))
}

/// Constant linear part A₀ of `step` at zero, read off by substituting a
/// fresh auxiliary variable for one unknown at a time.
fn constant_linear_part<F>(
    ctx: &Arc<VariableContext>,
    parities: &[Parity],
    step: &F,
    avoid: &[&SuperSeries],
) -> Result<Vec<Vec<Rational>>>
where
    F: Fn(&[SuperSeries]) -> Result<Vec<SuperSeries>>,
{
    let n = parities.len();
    let zero = vec![SuperSeries::zero(ctx); n];
    let base = step(&zero)?;
    let mut a = vec![vec![Rational::zero(); n]; n];
    for j in 0..n {
        let Some(v) = probe_variable(ctx, parities[j], avoid) else {
            continue;
        };
        let mut ys = zero.clone();
        ys[j] = SuperSeries::var(ctx, v);
        let out = step(&ys)?;
        let m = Monomial::variable(ctx.len(), v);
        for i in 0..n {
            a[i][j] = out[i].coefficient(&m, 0) - base[i].coefficient(&m, 0);
        }
    }
    Ok(a)
}

fn invert(mut m: Vec<Vec<Rational>>) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut inv: Vec<Vec<Rational>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let pv = m[col][col].clone();
        for k in 0..n {
            m[col][k] = &m[col][k] / &pv;
            inv[col][k] = &inv[col][k] / &pv;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for k in 0..n {
                    let a = &m[col][k] * &f;
                    m[r][k] = &m[r][k] - a;
                    let b = &inv[col][k] * &f;
                    inv[r][k] = &inv[r][k] - b;
                }
            }
        }
    }
    Some(inv)
}

fn apply_matrix(m: &[Vec<Rational>], v: &[SuperSeries]) -> Result<Vec<SuperSeries>> {
    m.iter()
        .map(|row| {
            let mut acc = SuperSeries::zero(v[0].context());
            for (c, s) in row.iter().zip(v) {
                if !c.is_zero() {
                    acc = acc.add(&s.scale(c))?;
                }
            }
            Ok(acc)
        })
        .collect()
}

/// Fixed-point iteration Y = F(Y) from the zero seed.
///
/// The constant linear part A₀ of F is solved exactly at every pass,
/// Y ← (I − A₀)⁻¹(F(Y) − A₀Y), so only the contracting remainder is
/// iterated. Stops once a pass reproduces its input exactly.
pub fn solve_fixed_point<F>(
    ctx: &Arc<VariableContext>,
    parities: &[Parity],
    step: &F,
    policy: &TruncationPolicy,
    max_passes: Option<usize>,
    avoid: &[&SuperSeries],
) -> Result<(Vec<SuperSeries>, usize)>
where
    F: Fn(&[SuperSeries]) -> Result<Vec<SuperSeries>>,
{
    let n = parities.len();
    if n == 0 {
        return Ok((vec![], 0));
    }
    let a0 = constant_linear_part(ctx, parities, step, avoid)?;
    let linear = a0.iter().any(|r| r.iter().any(|c| !c.is_zero()));
    let precond = if linear {
        let i_minus_a: Vec<Vec<Rational>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let id = if i == j { Rational::one() } else { Rational::zero() };
                        id - &a0[i][j]
                    })
                    .collect()
            })
            .collect();
        Some(invert(i_minus_a).ok_or_else(|| {
            Error::Iteration("the linear part of the fixed-point map has eigenvalue 1".into())
        })?)
    } else {
        None
    };
    let limit = max_passes.unwrap_or_else(|| {
        if policy.is_none() {
            64
        } else {
            policy.caps.values().map(|&c| c as usize).sum::<usize>() + 3
        }
    });
    let mut ys: Vec<SuperSeries> = (0..n)
        .map(|_| SuperSeries::zero(ctx).with_policy(policy.clone()))
        .collect::<Result<_>>()?;
    for pass in 1..=limit {
        let mut next = step(&ys)?;
        if let Some(m) = &precond {
            let a_y = apply_matrix(&a0, &ys)?;
            let rhs: Vec<SuperSeries> = next
                .iter()
                .zip(&a_y)
                .map(|(f, ay)| f.sub(ay))
                .collect::<Result<_>>()?;
            next = apply_matrix(m, &rhs)?;
        }
        let next: Vec<SuperSeries> = next
            .into_iter()
            .map(|s| s.truncated(policy))
            .collect::<Result<_>>()?;
        if next == ys {
            return Ok((ys, pass));
        }
        ys = next;
    }
    Err(Error::Iteration(format!(
        "no exact fixed point after {limit} passes; set truncation caps"
    )))
}

/// A fiberwise map over a fixed base: target fiber coordinate `w_i` is sent
/// to `images[i]`, a series in base and source fiber coordinates.
#[derive(Debug, Clone)]
pub struct FiberwiseMap {
    pub base: Vec<usize>,
    pub source_fiber: Vec<usize>,
    pub target_fiber: Vec<usize>,
    pub images: Vec<SuperSeries>,
}

impl FiberwiseMap {
    /// `base_images` must be the identity; anything else is unsupported.
    pub fn new(
        base: Vec<usize>,
        base_images: Option<Vec<SuperSeries>>,
        source_fiber: Vec<usize>,
        target_fiber: Vec<usize>,
        images: Vec<SuperSeries>,
    ) -> Result<Self> {
        if images.len() != target_fiber.len() {
            return Err(Error::Argument("one image per target fiber coordinate".into()));
        }
        if let Some(bi) = base_images {
            let ctx = images
                .first()
                .or(bi.first())
                .map(|s| s.context().clone())
                .ok_or_else(|| Error::Argument("empty map".into()))?;
            for (&x, img) in base.iter().zip(&bi) {
                if *img != SuperSeries::var(&ctx, x) {
                    return Err(Error::Unsupported("adjoints need a fixed base".into()));
                }
            }
        }
        Ok(FiberwiseMap {
            base,
            source_fiber,
            target_fiber,
            images,
        })
    }
}

/// Coordinates on the dual bundles used by the adjoint.
#[derive(Debug, Clone)]
pub struct DualCoordinates {
    /// Momenta conjugate to the base coordinates.
    pub base_momenta: Vec<usize>,
    /// Fiber coordinates of the dual of the source bundle, one per source
    /// fiber coordinate; the adjoint lands here.
    pub source_duals: Vec<usize>,
    /// Momenta conjugate to `source_duals`; they replace the source fiber
    /// coordinates inside the images.
    pub source_dual_momenta: Vec<usize>,
    /// Fiber coordinates of the dual of the target bundle; the adjoint
    /// starts here.
    pub target_duals: Vec<usize>,
    /// Sign attached to each pairing image·dual.
    pub signs: Vec<i32>,
}

/// S* = xᵃp_a + Σ cᵢ Fⁱ(x, u ↦ momenta) ηᵢ.
pub fn adjoint_of_fiberwise_map(f: &FiberwiseMap, duals: &DualCoordinates) -> Result<GeneratingFunction> {
    let ctx = f
        .images
        .first()
        .map(|s| s.context().clone())
        .ok_or_else(|| Error::Argument("empty map".into()))?;
    let mut s = SuperSeries::zero(&ctx);
    for (&x, &p) in f.base.iter().zip(&duals.base_momenta) {
        s = s.add(&SuperSeries::var(&ctx, x).mul(&SuperSeries::var(&ctx, p))?)?;
    }
    let rename: BTreeMap<usize, SuperSeries> = f
        .source_fiber
        .iter()
        .zip(&duals.source_dual_momenta)
        .map(|(&u, &m)| (u, SuperSeries::var(&ctx, m)))
        .collect();
    for ((img, &eta), &c) in f.images.iter().zip(&duals.target_duals).zip(&duals.signs) {
        let moved = img.substitute(&rename)?;
        s = s.add(&moved.mul(&SuperSeries::var(&ctx, eta))?.signed(c))?;
    }
    let source_coords: Vec<usize> = f.base.iter().chain(&duals.target_duals).copied().collect();
    let target_coords: Vec<usize> = f.base.iter().chain(&duals.source_duals).copied().collect();
    let target_momenta: Vec<usize> = duals
        .base_momenta
        .iter()
        .chain(&duals.source_dual_momenta)
        .copied()
        .collect();
    GeneratingFunction::new(
        s,
        (source_coords, vec![]),
        (target_coords, target_momenta),
        ThickFlavor::EvenThick,
    )
}

/// One sign factor in the direct formulas: ±1 or ±(−1)^ã.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotSign {
    Plus,
    Minus,
    PlusParity,
    MinusParity,
}

impl SlotSign {
    pub const ALL: [SlotSign; 4] = [
        SlotSign::Plus,
        SlotSign::Minus,
        SlotSign::PlusParity,
        SlotSign::MinusParity,
    ];

    pub fn value(self, index_parity: Parity) -> i32 {
        match self {
            SlotSign::Plus => 1,
            SlotSign::Minus => -1,
            SlotSign::PlusParity => index_parity.sign(),
            SlotSign::MinusParity => -index_parity.sign(),
        }
    }
}

/// Signs in the direct formulas
/// σ = s₁ω + s₂ ∂P/∂x*_a(x, π) x*_a + s₃ dxᵃ π_a with π = ∂ω/∂dx and
/// dxᵃ = Σ_b s₄ ∂²P/∂x*_a∂x*_b(x, π) x*_b. The parity variants of s₂ and s₃
/// use ã, those of s₄ use ã + b̃, and s₁ has no index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignConfig(pub [SlotSign; 4]);

impl SignConfig {
    /// The configuration pinned by the route-equivalence and Q-map checks.
    pub const VERIFIED: SignConfig = SignConfig([
        SlotSign::Plus,
        SlotSign::PlusParity,
        SlotSign::Minus,
        SlotSign::MinusParity,
    ]);

    /// Every configuration with a plain first slot.
    pub fn all() -> Vec<SignConfig> {
        let mut out = Vec::with_capacity(128);
        for a in [SlotSign::Plus, SlotSign::Minus] {
            for b in SlotSign::ALL {
                for c in SlotSign::ALL {
                    for d in SlotSign::ALL {
                        out.push(SignConfig([a, b, c, d]));
                    }
                }
            }
        }
        out
    }
}

impl std::fmt::Display for SignConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: Vec<&str> = self
            .0
            .iter()
            .map(|s| match s {
                SlotSign::Plus => "+",
                SlotSign::Minus => "-",
                SlotSign::PlusParity => "+(-1)^a",
                SlotSign::MinusParity => "-(-1)^a",
            })
            .collect();
        write!(f, "[{}]", s.join(", "))
    }
}

/// The forms-to-multivectors map attached to a homotopy Poisson structure.
#[derive(Debug, Clone)]
pub struct KoszulSchoutenMap {
    pub hp: HomotopyPoisson,
    pub policy: TruncationPolicy,
    pub signs: SignConfig,
}

impl KoszulSchoutenMap {
    pub fn new(hp: HomotopyPoisson, policy: TruncationPolicy) -> Result<Self> {
        if !hp.is_validated() {
            return Err(Error::State("P has not passed the master-equation check".into()));
        }
        Ok(KoszulSchoutenMap {
            hp,
            policy,
            signs: SignConfig::VERIFIED,
        })
    }

    pub fn with_signs(mut self, signs: SignConfig) -> Self {
        self.signs = signs;
        self
    }

    fn chart(&self) -> &Chart {
        self.hp.chart()
    }

    /// The anchor a_P as a fiberwise map ΠT*M → ΠTM.
    pub fn anchor_map(&self) -> Result<FiberwiseMap> {
        let c = self.chart();
        FiberwiseMap::new(
            c.block(Block::X),
            None,
            c.block(Block::Xs),
            c.block(Block::Dx),
            self.hp.anchor_images()?,
        )
    }

    /// Dual coordinates identifying (ΠTM)* with ΠT*M through the odd pairing.
    pub fn anchor_duals(&self) -> DualCoordinates {
        let c = self.chart();
        DualCoordinates {
            base_momenta: c.block(Block::P),
            source_duals: c.block(Block::Dx),
            source_dual_momenta: c.block(Block::Pi),
            target_duals: c.block(Block::Xs),
            signs: vec![1; c.dim()],
        }
    }

    /// S* = xᵃp_a + (−1)^ã ∂P/∂x*_a(x,π) x*_a.
    pub fn adjoint_anchor(&self) -> Result<GeneratingFunction> {
        let mut g = adjoint_of_fiberwise_map(&self.anchor_map()?, &self.anchor_duals())?;
        let c = self.chart();
        g.source_momenta = c.block(Block::P).into_iter().chain(c.block(Block::Pis)).collect();
        Ok(g)
    }

    fn check_form(&self, omega: &SuperSeries) -> Result<SuperSeries> {
        let c = self.chart();
        let aux = c.ctx().with_role(Role::Auxiliary);
        let allowed: Vec<usize> = c.block(Block::X).into_iter().chain(c.block(Block::Dx)).chain(aux).collect();
        if (0..c.ctx().len()).any(|v| !allowed.contains(&v) && omega.depends_on(v)) {
            return Err(Error::Argument("ω must be a form, possibly with auxiliary parameters".into()));
        }
        if omega.parity() != Some(Parity::Even) {
            return Err(Error::Parity("ω must be even".into()));
        }
        omega.clone().truncated(&self.policy)
    }

    /// Thick route: pullback of ω by the adjoint of the anchor.
    pub fn via_pullback(&self, omega: &SuperSeries) -> Result<SuperSeries> {
        let w = self.check_form(omega)?;
        self.pullback_unchecked(&w)
    }

    fn pullback_unchecked(&self, w: &SuperSeries) -> Result<SuperSeries> {
        let mut g = self.adjoint_anchor()?;
        g.s = g.s.truncated(&self.policy)?;
        g.pullback(w)
    }

    /// Direct route: the closed formulas with the configured signs.
    pub fn direct(&self, omega: &SuperSeries) -> Result<SuperSeries> {
        let w = self.check_form(omega)?;
        self.direct_unchecked(&w)
    }

    fn direct_unchecked(&self, w: &SuperSeries) -> Result<SuperSeries> {
        let c = self.chart();
        let ctx = c.ctx().clone();
        let n = c.dim();
        let [s1, s2, s3, s4] = self.signs.0;
        let p = self.hp.tensor().clone().truncated(&self.policy)?;
        let dw: Vec<SuperSeries> = (0..n)
            .map(|a| w.left_derivative(c.dx(a)))
            .collect::<Result<_>>()?;
        let dp: Vec<SuperSeries> = (0..n)
            .map(|a| p.left_derivative(c.xs(a)))
            .collect::<Result<_>>()?;
        let ddp: Vec<Vec<SuperSeries>> = (0..n)
            .map(|a| (0..n).map(|b| dp[b].left_derivative(c.xs(a))).collect())
            .collect::<Result<_>>()?;
        let xs: Vec<SuperSeries> = (0..n).map(|b| c.var(c.xs(b))).collect();
        // π = ∂ω/∂dx evaluated at the current dx
        let pi_at = |dxs: &[SuperSeries]| -> Result<BTreeMap<usize, SuperSeries>> {
            let map: BTreeMap<usize, SuperSeries> =
                (0..n).map(|a| (c.dx(a), dxs[a].clone())).collect();
            (0..n)
                .map(|a| Ok((c.xs(a), dw[a].substitute(&map)?)))
                .collect()
        };
        let step = |dxs: &[SuperSeries]| -> Result<Vec<SuperSeries>> {
            let at = pi_at(dxs)?;
            (0..n)
                .map(|a| {
                    let mut acc = SuperSeries::zero(&ctx);
                    for b in 0..n {
                        if ddp[a][b].is_zero() {
                            continue;
                        }
                        let t = ddp[a][b].substitute(&at)?.mul(&xs[b])?;
                        acc = acc.add(&t.signed(s4.value(c.parity(a) + c.parity(b))))?;
                    }
                    Ok(acc)
                })
                .collect()
        };
        let parities: Vec<Parity> = (0..n).map(|a| c.parity(a).flip()).collect();
        let (dxs, _) = solve_fixed_point(&ctx, &parities, &step, &self.policy, None, &[w, &p])?;
        let dx_map: BTreeMap<usize, SuperSeries> =
            (0..n).map(|a| (c.dx(a), dxs[a].clone())).collect();
        let at = pi_at(&dxs)?;
        let mut sigma = w.substitute(&dx_map)?.signed(s1.value(Parity::Even));
        for a in 0..n {
            let pa = c.parity(a);
            let t2 = dp[a].substitute(&at)?.mul(&xs[a])?.signed(s2.value(pa));
            let t3 = dxs[a].mul(&dw[a].substitute(&dx_map)?)?.signed(s3.value(pa));
            sigma = sigma.add(&t2)?.add(&t3)?;
        }
        sigma.truncated(&self.policy)
    }

    /// Q_K(ω) = K(x, dx, ∂ω/∂x, ∂ω/∂dx).
    pub fn koszul_field(&self, omega: &SuperSeries) -> Result<SuperSeries> {
        let k = self.hp.master_hamiltonian()?.truncated(&self.policy)?;
        let ps = self.chart().phase_space(PhaseSpaceKind::CotangentOfForms);
        hamiltonian_field_on_functions(&k, &ps, omega)
    }

    /// Q_Ŝ(σ) = ½⟦σ,σ⟧. Ŝ produces ⟦P,R⟧ from the right slot, ((P,Ŝ),R), so
    /// this is minus the substitution Ŝ(x, x*, ∂σ/∂x, ∂σ/∂x*).
    pub fn schouten_field(&self, sigma: &SuperSeries) -> Result<SuperSeries> {
        let ps = self.chart().phase_space(PhaseSpaceKind::AntiCotangent);
        Ok(canonical_schouten(sigma, sigma, &ps, Convention::Original)?.scale(&rat(1, 2)))
    }

    /// Residual of the Q-map condition at ω, on antimomentum degrees the
    /// truncation resolves exactly.
    pub fn q_map_residual(&self, omega: &SuperSeries, route: Route) -> Result<SuperSeries> {
        let c = self.chart();
        let w = self.check_form(omega)?;
        let tau = c.var(c.tau());
        let qk = self.koszul_field(&w)?;
        let moved = w.add(&tau.mul(&qk)?)?;
        let image = |f: &SuperSeries| match route {
            Route::Direct => self.direct_unchecked(f),
            Route::Pullback => self.pullback_unchecked(f),
        };
        let lhs = image(&moved)?.left_derivative(c.tau())?;
        let sigma = image(&w)?;
        let rhs = self.schouten_field(&sigma)?;
        let diff = lhs.sub(&rhs)?;
        match self.policy.cap(crate::chart::ANTIMOMENTUM) {
            Some(cap) => diff.up_to_degree(crate::chart::ANTIMOMENTUM, cap as i64 - 1),
            None => Ok(diff),
        }
    }

    pub fn verify_linfty_morphism(&self, samples: &[SuperSeries], route: Route) -> Vec<CaseReport> {
        samples
            .par_iter()
            .enumerate()
            .map(|(i, w)| {
                let key = format!("q-map sample {i}");
                match self.q_map_residual(w, route) {
                    Ok(r) => CaseReport::from_residual(key, &r),
                    Err(e) => CaseReport::failed(key, e.to_string()),
                }
            })
            .collect()
    }

    pub fn route_equivalence(&self, samples: &[SuperSeries]) -> Vec<CaseReport> {
        samples
            .par_iter()
            .enumerate()
            .map(|(i, w)| {
                let key = format!("routes sample {i}");
                let r = self
                    .direct(w)
                    .and_then(|a| self.via_pullback(w).and_then(|b| a.sub(&b)));
                match r {
                    Ok(r) => CaseReport::from_residual(key, &r),
                    Err(e) => CaseReport::failed(key, e.to_string()),
                }
            })
            .collect()
    }

    /// Hamilton–Jacobi residual for the adjoint anchor: −Ŝ on the
    /// multivector side, matching Q_Ŝ, and K on the form side.
    pub fn hamilton_jacobi(&self) -> Result<SuperSeries> {
        let g = self.adjoint_anchor()?;
        let s_hat = schouten_master(self.chart())?.neg();
        let k = self.hp.master_hamiltonian()?;
        g.hamilton_jacobi_residual(&s_hat, &k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Direct,
    Pullback,
}

#[cfg(test)]
mod tests {
    use super::*;

    /// S(x¹, p₁) with target coordinate x² conjugate to p₁.
    fn thick(c: &Chart, s: &str) -> GeneratingFunction {
        GeneratingFunction::new(
            c.parse(s).unwrap(),
            (vec![c.x(0)], vec![]),
            (vec![c.x(1)], vec![c.p(0)]),
            ThickFlavor::EvenThick,
        )
        .unwrap()
    }

    #[test]
    fn toy_pullback() {
        let c = Chart::standard(2, 0).unwrap();
        let phi = thick(&c, "x1*p1 + 1/2*p1^2");
        let g = c.parse("x2^2").unwrap();
        let sol = phi.solve(&g, None).unwrap();
        assert_eq!(sol.y, vec![c.parse("-x1").unwrap()]);
        assert_eq!(sol.q, vec![c.parse("-2*x1").unwrap()]);
        assert_eq!(phi.pullback(&g).unwrap(), c.parse("-x1^2").unwrap());
    }

    #[test]
    fn pullback_is_nonlinear() {
        let c = Chart::standard(2, 0).unwrap();
        let phi = thick(&c, "x1*p1 + 1/2*p1^2");
        let (g1, g2) = (c.parse("x2^2").unwrap(), c.parse("x2").unwrap());
        let sum = phi.pullback(&g1.add(&g2).unwrap()).unwrap();
        let separate = phi.pullback(&g1).unwrap().add(&phi.pullback(&g2).unwrap()).unwrap();
        assert_ne!(sum, separate);
    }

    #[test]
    fn ordinary_maps_pull_back_by_composition() {
        let c = Chart::standard(2, 0).unwrap();
        let phi = thick(&c, "x1^2*p1");
        let g = c.parse("x2^3 + 2*x2").unwrap();
        assert_eq!(phi.pullback(&g).unwrap(), c.parse("x1^6 + 2*x1^2").unwrap());
        let id = GeneratingFunction::new(
            c.parse("x1*p1").unwrap(),
            (vec![c.x(0)], vec![]),
            (vec![c.x(0)], vec![c.p(0)]),
            ThickFlavor::EvenThick,
        )
        .unwrap();
        let g = c.parse("x1^2 + x1 + 5").unwrap();
        assert_eq!(id.pullback(&g).unwrap(), g);
    }

    #[test]
    fn singular_linear_part_is_an_iteration_error() {
        // y = x + q with q = y has no solution
        let c = Chart::standard(2, 0).unwrap();
        let phi = thick(&c, "x1*p1 + 1/2*p1^2");
        let g = c.parse("1/2*x2^2").unwrap();
        assert!(matches!(phi.pullback(&g), Err(Error::Iteration(_))));
    }

    #[test]
    fn generating_function_checks() {
        let c = Chart::standard(2, 0).unwrap();
        let bad = GeneratingFunction::new(
            c.parse("x2*p1").unwrap(),
            (vec![c.x(0)], vec![]),
            (vec![c.x(1)], vec![c.p(0)]),
            ThickFlavor::EvenThick,
        );
        assert!(matches!(bad, Err(Error::Argument(_))));
        let odd = GeneratingFunction::new(
            c.parse("x1*xs1").unwrap(),
            (vec![c.x(0)], vec![]),
            (vec![c.x(1)], vec![c.xs(0)]),
            ThickFlavor::EvenThick,
        );
        assert!(odd.is_err());
    }

    #[test]
    fn moving_base_is_unsupported() {
        let c = Chart::standard(1, 0).unwrap();
        let r = FiberwiseMap::new(
            vec![c.x(0)],
            Some(vec![c.parse("x1^2").unwrap()]),
            vec![c.xs(0)],
            vec![c.dx(0)],
            vec![c.parse("xs1").unwrap()],
        );
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }

    #[test]
    fn adjoint_of_a_linear_fiber_map() {
        // u ↦ 2u over a point-like base gives S* = xp + 2πx*
        let c = Chart::standard(1, 0).unwrap();
        let f = FiberwiseMap::new(
            vec![c.x(0)],
            None,
            vec![c.xs(0)],
            vec![c.dx(0)],
            vec![c.parse("2*xs1").unwrap()],
        )
        .unwrap();
        let duals = DualCoordinates {
            base_momenta: vec![c.p(0)],
            source_duals: vec![c.dx(0)],
            source_dual_momenta: vec![c.pi(0)],
            target_duals: vec![c.xs(0)],
            signs: vec![1],
        };
        let g = adjoint_of_fiberwise_map(&f, &duals).unwrap();
        assert_eq!(g.s, c.parse("x1*p1 + 2*pi1*xs1").unwrap());
    }

    #[test]
    fn sign_configs_are_enumerated_once() {
        let all = SignConfig::all();
        assert_eq!(all.len(), 128);
        assert!(all.contains(&SignConfig::VERIFIED));
    }
}
