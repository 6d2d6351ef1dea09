//! Homotopy brackets: derived brackets of master Hamiltonians, the
//! generalized Jacobi identities, parity shift, and L∞-algebroids from a
//! homological vector field.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{Parity, SuperSeries};
use crate::brackets::{canonical_poisson, canonical_schouten, Convention, VectorField};
use crate::chart::PhaseSpace;
use crate::error::{Error, Result};

/// Which generalized Jacobi identity a family of brackets obeys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Version {
    /// Brackets of parity n, antisymmetric.
    Antisymmetric,
    /// Odd symmetric brackets.
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    PInfinity,
    SInfinity,
}

/// An element together with the parity it carries as a bracket argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graded {
    pub value: SuperSeries,
    pub parity: Parity,
}

impl Graded {
    pub fn new(value: SuperSeries, parity: Parity) -> Self {
        Graded { value, parity }
    }

    /// Uses the parity of a homogeneous series.
    pub fn homogeneous(value: SuperSeries) -> Result<Self> {
        let parity = value.homogeneous_parity("bracket argument")?;
        Ok(Graded { value, parity })
    }
}

/// ε = Σ ũ_k (n − k) with k counted from 1.
pub fn epsilon(parities: &[Parity]) -> Parity {
    let n = parities.len();
    let sum: usize = parities
        .iter()
        .enumerate()
        .map(|(k, p)| p.bit() as usize * (n - k - 1))
        .sum();
    Parity::from_bit(sum as u32)
}

/// Restriction of `s` to the terms of total degree `n` in `vars`.
fn degree_component(s: &SuperSeries, vars: &[usize], n: usize) -> SuperSeries {
    s.filter(|t| {
        vars.iter()
            .map(|&v| t.monomial.exponent(v) as usize)
            .sum::<usize>()
            == n
    })
}

/// n-ary brackets generated by a master Hamiltonian.
#[derive(Debug, Clone)]
pub struct BracketFamily {
    pub master: SuperSeries,
    pub flavor: Flavor,
    pub phase: PhaseSpace,
}

impl BracketFamily {
    pub fn new(master: SuperSeries, flavor: Flavor, phase: PhaseSpace) -> Result<Self> {
        phase.validate(master.context())?;
        let parity = master.homogeneous_parity("master Hamiltonian")?;
        match flavor {
            Flavor::PInfinity => {
                if phase.parity != Parity::Odd || parity != Parity::Even {
                    return Err(Error::PhaseSpace(
                        "a P∞ master is even on an odd phase space".into(),
                    ));
                }
            }
            Flavor::SInfinity => {
                if phase.parity != Parity::Even || (parity != Parity::Odd && !master.is_zero()) {
                    return Err(Error::PhaseSpace(
                        "an S∞ master is odd on an even phase space".into(),
                    ));
                }
            }
        }
        Ok(BracketFamily {
            master,
            flavor,
            phase,
        })
    }

    pub fn version(&self) -> Version {
        match self.flavor {
            Flavor::PInfinity => Version::Antisymmetric,
            Flavor::SInfinity => Version::Symmetric,
        }
    }

    pub fn bracket_pair(&self, a: &SuperSeries, b: &SuperSeries) -> Result<SuperSeries> {
        match self.flavor {
            Flavor::PInfinity => canonical_schouten(a, b, &self.phase, Convention::Redefined),
            Flavor::SInfinity => canonical_poisson(a, b, &self.phase),
        }
    }

    /// [P,P] or (H,H).
    pub fn master_equation(&self) -> Result<SuperSeries> {
        self.bracket_pair(&self.master, &self.master)
    }

    /// [..[P,f₁]..,f_n] resp. (..(H,f₁)..,f_n), restricted to zero momenta.
    pub fn derived(&self, args: &[SuperSeries]) -> Result<SuperSeries> {
        let ctx = self.master.context();
        for a in args {
            if a.depends_on_any(&self.phase.momenta) {
                return Err(Error::Argument("bracket arguments must not depend on momenta".into()));
            }
            let allowed = &self.phase.coords;
            if (0..ctx.len()).any(|v| !allowed.contains(&v) && a.depends_on(v)) {
                return Err(Error::Argument(
                    "bracket arguments must be functions of the base coordinates".into(),
                ));
            }
        }
        // each step lowers the momentum degree by exactly one
        let mut acc = degree_component(&self.master, &self.phase.momenta, args.len());
        for a in args {
            if acc.is_zero() {
                break;
            }
            acc = self.bracket_pair(&acc, a)?;
        }
        Ok(acc.restrict_zero(&self.phase.momenta))
    }

    pub fn graded(&self, args: &[Graded]) -> Result<Graded> {
        let values: Vec<SuperSeries> = args.iter().map(|g| g.value.clone()).collect();
        let value = self.derived(&values)?;
        Ok(Graded {
            value,
            parity: output_parity(self.version(), args),
        })
    }
}

/// Nominal parity of an n-bracket of the given arguments.
pub fn output_parity(version: Version, args: &[Graded]) -> Parity {
    let base = match version {
        Version::Antisymmetric => Parity::from_bit(args.len() as u32),
        Version::Symmetric => Parity::Odd,
    };
    args.iter().fold(base, |acc, a| acc + a.parity)
}

/// All (r,s)-shuffles of 0..r+s as permutations σ (σ[i] = source position).
pub fn shuffles(r: usize, s: usize) -> Vec<Vec<usize>> {
    let n = r + s;
    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(r);
    fn rec(start: usize, n: usize, r: usize, chosen: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if chosen.len() == r {
            let mut perm = chosen.clone();
            perm.extend((0..n).filter(|i| !chosen.contains(i)));
            out.push(perm);
            return;
        }
        for i in start..n {
            chosen.push(i);
            rec(i + 1, n, r, chosen, out);
            chosen.pop();
        }
    }
    rec(0, n, r, &mut chosen, &mut out);
    out
}

/// (sign of σ, Koszul sign of σ) as booleans "is negative".
pub fn permutation_signs(perm: &[usize], parities: &[Parity]) -> (bool, bool) {
    let mut inv = 0u32;
    let mut odd_inv = 0u32;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inv += 1;
                if parities[perm[i]].is_odd() && parities[perm[j]].is_odd() {
                    odd_inv += 1;
                }
            }
        }
    }
    (inv % 2 == 1, odd_inv % 2 == 1)
}

/// Left-hand side of the n-argument generalized Jacobi identity.
pub fn jacobi_residual<F>(bracket: &F, version: Version, args: &[Graded]) -> Result<SuperSeries>
where
    F: Fn(&[Graded]) -> Result<Graded>,
{
    let n = args.len();
    let parities: Vec<Parity> = args.iter().map(|a| a.parity).collect();
    let mut out: Option<SuperSeries> = None;
    for r in 0..=n {
        let s = n - r;
        for perm in shuffles(r, s) {
            let (sgn, koszul) = permutation_signs(&perm, &parities);
            let mut negative = koszul;
            if version == Version::Antisymmetric {
                negative ^= sgn ^ ((r * s) % 2 == 1);
            }
            let inner_args: Vec<Graded> = perm[..r].iter().map(|&i| args[i].clone()).collect();
            let inner = bracket(&inner_args)?;
            let mut outer_args = vec![inner];
            outer_args.extend(perm[r..].iter().map(|&i| args[i].clone()));
            let term = bracket(&outer_args)?.value;
            let term = if negative { term.neg() } else { term };
            out = Some(match out {
                Some(o) => o.add(&term)?,
                None => term,
            });
        }
    }
    Ok(out.expect("r = 0 always contributes"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseReport {
    pub case: String,
    pub residual_term_count: usize,
    pub residual_sample: String,
    pub pass: bool,
}

impl CaseReport {
    pub fn from_residual(case: String, residual: &SuperSeries) -> Self {
        let sample = if residual.is_zero() {
            "0".to_string()
        } else {
            let text = residual.to_string();
            let mut cut: String = text.chars().take(160).collect();
            if cut.len() < text.len() {
                cut.push_str(" ...");
            }
            cut
        };
        CaseReport {
            case,
            residual_term_count: residual.len(),
            residual_sample: sample,
            pass: residual.is_zero(),
        }
    }

    pub fn failed(case: String, message: String) -> Self {
        CaseReport {
            case,
            residual_term_count: 0,
            residual_sample: message,
            pass: false,
        }
    }
}

/// Argument tuples of every arity up to `max_arity`, drawn with repetition
/// from `pool` in non-decreasing index order.
pub fn jacobi_cases(pool_len: usize, max_arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..max_arity {
        let mut next = Vec::new();
        for t in &frontier {
            let start = t.last().copied().unwrap_or(0);
            for i in start..pool_len {
                let mut u: Vec<usize> = t.clone();
                u.push(i);
                next.push(u);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Evaluates the generalized Jacobi identities on every case in parallel.
/// Results are sorted by case key.
pub fn verify_generalized_jacobi<F>(
    bracket: &F,
    version: Version,
    max_arity: usize,
    pool: &[Graded],
) -> Vec<CaseReport>
where
    F: Fn(&[Graded]) -> Result<Graded> + Sync,
{
    let cases = jacobi_cases(pool.len(), max_arity);
    let mut reports: Vec<(usize, Vec<usize>, CaseReport)> = cases
        .into_par_iter()
        .map(|idx| {
            let args: Vec<Graded> = idx.iter().map(|&i| pool[i].clone()).collect();
            let key = format!(
                "jacobi n={} args=[{}]",
                idx.len(),
                idx.iter().map(|i| format!("u{i}")).collect::<Vec<_>>().join(",")
            );
            let report = match jacobi_residual(bracket, version, &args) {
                Ok(r) => CaseReport::from_residual(key, &r),
                Err(e) => CaseReport::failed(key, e.to_string()),
            };
            (idx.len(), idx, report)
        })
        .collect();
    reports.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    reports.into_iter().map(|r| r.2).collect()
}

/// Symmetric odd brackets on ΠL from antisymmetric brackets on L:
/// [Πu₁,…,Πu_n] = (−1)^ε Π[u₁,…,u_n]. Arguments carry their ΠL parities.
pub fn shift_to_symmetric<F>(bracket: F) -> impl Fn(&[Graded]) -> Result<Graded>
where
    F: Fn(&[Graded]) -> Result<Graded>,
{
    move |args: &[Graded]| {
        let unshifted: Vec<Graded> = args
            .iter()
            .map(|a| Graded::new(a.value.clone(), a.parity.flip()))
            .collect();
        let eps = epsilon(&unshifted.iter().map(|a| a.parity).collect::<Vec<_>>());
        let b = bracket(&unshifted)?;
        Ok(Graded::new(b.value.signed(eps.sign()), b.parity.flip()))
    }
}

/// Inverse of [`shift_to_symmetric`]; arguments carry their L parities.
pub fn shift_to_antisymmetric<F>(bracket: F) -> impl Fn(&[Graded]) -> Result<Graded>
where
    F: Fn(&[Graded]) -> Result<Graded>,
{
    move |args: &[Graded]| {
        let eps = epsilon(&args.iter().map(|a| a.parity).collect::<Vec<_>>());
        let shifted: Vec<Graded> = args
            .iter()
            .map(|a| Graded::new(a.value.clone(), a.parity.flip()))
            .collect();
        let b = bracket(&shifted)?;
        Ok(Graded::new(b.value.signed(eps.sign()), b.parity.flip()))
    }
}

/// Componentwise residual of [Q,Q]; an empty map means Q is homological.
pub fn verify_q_squared(q: &VectorField) -> Result<BTreeMap<usize, SuperSeries>> {
    if q.parity != Parity::Odd {
        return Err(Error::Parity("a homological field must be odd".into()));
    }
    Ok(q.commutator(q)?.components)
}

/// Fibered chart data for an L∞-algebroid: base coordinates and fiber
/// coordinates ξ of ΠE, the latter carrying weight 1.
#[derive(Debug, Clone)]
pub struct FiberedChart {
    pub base: Vec<usize>,
    pub fiber: Vec<usize>,
}

impl FiberedChart {
    fn weight_of_var(&self, v: usize) -> i64 {
        i64::from(self.fiber.contains(&v))
    }

    fn weight_of_term(&self, t: &crate::algebra::Term) -> i64 {
        self.fiber
            .iter()
            .map(|&v| t.monomial.exponent(v) as i64)
            .sum()
    }

    /// Weight-`w` part of a vector field.
    pub fn project(&self, x: &VectorField, w: i64) -> VectorField {
        let mut comps = BTreeMap::new();
        for (&k, c) in &x.components {
            let target = w + self.weight_of_var(k);
            let part = c.filter(|t| self.weight_of_term(t) == target);
            if !part.is_zero() {
                comps.insert(k, part);
            }
        }
        VectorField {
            components: comps,
            parity: x.parity,
        }
    }
}

/// A section u = uⁱ(x) e_i of E, with ũ its parity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub components: BTreeMap<usize, SuperSeries>,
    pub parity: Parity,
}

impl Section {
    /// ι(u) = (−1)^ũ uⁱ ∂/∂ξⁱ, an element of weight −1.
    pub fn iota(&self, chart: &FiberedChart) -> Result<VectorField> {
        let mut comps = BTreeMap::new();
        for (&i, c) in &self.components {
            if !chart.fiber.contains(&i) {
                return Err(Error::Argument("section components must be along fiber coordinates".into()));
            }
            if c.depends_on_any(&chart.fiber) {
                return Err(Error::Argument("section components must have weight 0".into()));
            }
            comps.insert(i, c.signed(self.parity.sign()));
        }
        VectorField::new(self.parity.flip(), comps)
    }

    pub fn scale_by(&self, f: &SuperSeries, f_parity: Parity) -> Result<Section> {
        let comps = self
            .components
            .iter()
            .map(|(&i, c)| Ok((i, f.mul(c)?)))
            .collect::<Result<_>>()?;
        Ok(Section {
            components: comps,
            parity: self.parity + f_parity,
        })
    }
}

fn iterated_commutator(q: &VectorField, fields: &[VectorField]) -> Result<VectorField> {
    let mut acc = q.clone();
    for f in fields {
        acc = acc.commutator(f)?;
    }
    Ok(acc)
}

/// The n-ary algebroid bracket extracted from the weight −1 projection.
pub fn algebroid_bracket(q: &VectorField, chart: &FiberedChart, sections: &[Section]) -> Result<Section> {
    let fields: Vec<VectorField> = sections.iter().map(|s| s.iota(chart)).collect::<Result<_>>()?;
    let parities: Vec<Parity> = sections.iter().map(|s| s.parity).collect();
    let eps = epsilon(&parities);
    let proj = chart.project(&iterated_commutator(q, &fields)?, -1);
    let parity = parities
        .iter()
        .fold(Parity::from_bit(sections.len() as u32), |a, &p| a + p);
    // ι(w) = (−1)^w̃ wⁱ∂/∂ξⁱ
    let sign = eps.sign() * parity.sign();
    let mut comps = BTreeMap::new();
    for (k, c) in proj.components {
        if chart.fiber.contains(&k) {
            comps.insert(k, c.signed(sign));
        }
    }
    Ok(Section {
        components: comps,
        parity,
    })
}

/// The n-ary anchor a_n(u₁,…,u_n) applied to a base function f.
pub fn algebroid_anchor(
    q: &VectorField,
    chart: &FiberedChart,
    sections: &[Section],
    f: &SuperSeries,
) -> Result<SuperSeries> {
    if f.depends_on_any(&chart.fiber) {
        return Err(Error::Argument("anchors act on base functions".into()));
    }
    let fields: Vec<VectorField> = sections.iter().map(|s| s.iota(chart)).collect::<Result<_>>()?;
    let eps = epsilon(&sections.iter().map(|s| s.parity).collect::<Vec<_>>());
    let proj = chart.project(&iterated_commutator(q, &fields)?, 0);
    Ok(proj.apply(f)?.signed(eps.sign()))
}

/// The odd field ω ↦ H(x, ∂ω/∂x) on functions of the phase-space
/// coordinates: each momentum is replaced by the left derivative of ω along
/// its conjugate coordinate.
pub fn hamiltonian_field_on_functions(
    master: &SuperSeries,
    phase: &PhaseSpace,
    omega: &SuperSeries,
) -> Result<SuperSeries> {
    if omega.depends_on_any(&phase.momenta) {
        return Err(Error::Argument("ω must not depend on momenta".into()));
    }
    let mut assignment = BTreeMap::new();
    for (x, p) in phase.pairs() {
        assignment.insert(p, omega.left_derivative(x)?);
    }
    master.substitute(&assignment)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shuffle_counts_are_binomial() {
        assert_eq!(shuffles(2, 2).len(), 6);
        assert_eq!(shuffles(0, 3).len(), 1);
        assert_eq!(shuffles(3, 1), vec![vec![0, 1, 2, 3], vec![0, 1, 3, 2], vec![0, 2, 3, 1], vec![1, 2, 3, 0]]);
    }

    #[test]
    fn epsilon_examples() {
        use Parity::*;
        assert_eq!(epsilon(&[Odd]), Even);
        assert_eq!(epsilon(&[Odd, Even]), Odd);
        assert_eq!(epsilon(&[Even, Odd]), Even);
        assert_eq!(epsilon(&[Odd, Odd, Odd]), Odd);
    }

    #[test]
    fn case_enumeration() {
        let c = jacobi_cases(2, 2);
        assert_eq!(c, vec![vec![], vec![0], vec![1], vec![0, 0], vec![0, 1], vec![1, 1]]);
    }
}
