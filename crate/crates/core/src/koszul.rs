//! Higher Koszul brackets of a homotopy Poisson structure.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::algebra::{Parity, SuperSeries};
use crate::brackets::{canonical_schouten, Convention};
use crate::chart::{Block, Chart, PhaseSpaceKind};
use crate::error::{Error, Result};
use crate::linfty::{BracketFamily, CaseReport, Flavor};

/// An even P(x, x*) together with the outcome of its master-equation check.
#[derive(Debug, Clone)]
pub struct HomotopyPoisson {
    chart: Chart,
    p: SuperSeries,
    validated: bool,
}

impl HomotopyPoisson {
    pub fn new(chart: &Chart, p: SuperSeries) -> Result<Self> {
        if !chart.lives_on(&p, &[Block::X, Block::Xs]) {
            return Err(Error::Argument("P must be a function of x and x*".into()));
        }
        if p.parity() != Some(Parity::Even) {
            return Err(Error::Parity("P must be even".into()));
        }
        Ok(HomotopyPoisson {
            chart: chart.clone(),
            p,
            validated: false,
        })
    }

    /// Builds and validates; fails with a state error when [P,P] ≠ 0.
    pub fn validated(chart: &Chart, p: SuperSeries) -> Result<Self> {
        let mut hp = Self::new(chart, p)?;
        let r = hp.validate()?;
        if !r.is_zero() {
            return Err(Error::State(format!("[P,P] = {r}")));
        }
        Ok(hp)
    }

    /// Computes [P,P]; marks the structure validated when it vanishes.
    pub fn validate(&mut self) -> Result<SuperSeries> {
        let r = self.master_equation()?;
        self.validated = r.is_zero();
        Ok(r)
    }

    pub fn master_equation(&self) -> Result<SuperSeries> {
        let ps = self.chart.phase_space(PhaseSpaceKind::AntiCotangent);
        canonical_schouten(&self.p, &self.p, &ps, Convention::Redefined)
    }

    pub fn is_validated(&self) -> bool {
        self.validated
    }

    fn require(&self) -> Result<()> {
        if self.validated {
            Ok(())
        } else {
            Err(Error::State("P has not passed the master-equation check".into()))
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn tensor(&self) -> &SuperSeries {
        &self.p
    }

    /// The P∞ family {f₁,…,f_n}_P = [..[P,f₁]..,f_n]|_M.
    pub fn poisson_family(&self) -> Result<BracketFamily> {
        BracketFamily::new(
            self.p.clone(),
            Flavor::PInfinity,
            self.chart.phase_space(PhaseSpaceKind::AntiCotangent),
        )
    }

    pub fn poisson_bracket(&self, args: &[SuperSeries]) -> Result<SuperSeries> {
        self.poisson_family()?.derived(args)
    }

    /// P(x, π): every x*_a renamed to π_a.
    pub fn tensor_on_pi(&self) -> Result<SuperSeries> {
        let c = &self.chart;
        let pairs: Vec<(usize, usize)> = (0..c.dim()).map(|a| (c.xs(a), c.pi(a))).collect();
        self.p.rename(&pairs)
    }

    /// K = dxᵃ ∂P/∂xᵃ(x,π) + (−1)^ã ∂P/∂π_a(x,π) p_a on T*(ΠTM).
    pub fn master_hamiltonian(&self) -> Result<SuperSeries> {
        self.require()?;
        self.master_hamiltonian_unchecked()
    }

    pub(crate) fn master_hamiltonian_unchecked(&self) -> Result<SuperSeries> {
        let c = &self.chart;
        let ppi = self.tensor_on_pi()?;
        let mut k = c.zero();
        for a in 0..c.dim() {
            let t1 = c.var(c.dx(a)).mul(&ppi.left_derivative(c.x(a))?)?;
            let t2 = ppi
                .left_derivative(c.pi(a))?
                .mul(&c.var(c.p(a)))?
                .signed(c.parity(a).sign());
            k = k.add(&t1)?.add(&t2)?;
        }
        Ok(k)
    }

    /// The S∞ family on forms generated by K.
    pub fn koszul_family(&self) -> Result<BracketFamily> {
        BracketFamily::new(
            self.master_hamiltonian()?,
            Flavor::SInfinity,
            self.chart.phase_space(PhaseSpaceKind::CotangentOfForms),
        )
    }

    pub fn higher_koszul_bracket(&self, forms: &[SuperSeries]) -> Result<SuperSeries> {
        self.koszul_family()?.derived(forms)
    }

    /// d_P σ = [P, σ].
    pub fn lichnerowicz(&self, sigma: &SuperSeries) -> Result<SuperSeries> {
        self.require()?;
        let ps = self.chart.phase_space(PhaseSpaceKind::AntiCotangent);
        canonical_schouten(&self.p, sigma, &ps, Convention::Redefined)
    }

    /// Images (−1)^ã ∂P/∂x*_a of the differentials under the anchor.
    pub fn anchor_images(&self) -> Result<Vec<SuperSeries>> {
        let c = &self.chart;
        (0..c.dim())
            .map(|a| Ok(self.p.left_derivative(c.xs(a))?.signed(c.parity(a).sign())))
            .collect()
    }

    /// a_P*ω: dxᵃ ↦ (−1)^ã ∂P/∂x*_a.
    pub fn anchor_pullback(&self, omega: &SuperSeries) -> Result<SuperSeries> {
        self.require()?;
        let c = &self.chart;
        let map: BTreeMap<usize, SuperSeries> = self
            .anchor_images()?
            .into_iter()
            .enumerate()
            .map(|(a, s)| (c.dx(a), s))
            .collect();
        omega.substitute(&map)
    }

    /// Residuals of a_P* ∘ d − d_P ∘ a_P* on each form.
    pub fn verify_diagram(&self, forms: &[SuperSeries]) -> Result<Vec<CaseReport>> {
        self.require()?;
        forms
            .par_iter()
            .enumerate()
            .map(|(i, w)| {
                let left = self.anchor_pullback(&de_rham(&self.chart, w)?)?;
                let right = self.lichnerowicz(&self.anchor_pullback(w)?)?;
                Ok(CaseReport::from_residual(format!("diagram form {i}"), &left.sub(&right)?))
            })
            .collect()
    }
}

/// dω = dxᵃ ∂ω/∂xᵃ.
pub fn de_rham(chart: &Chart, omega: &SuperSeries) -> Result<SuperSeries> {
    let mut out = chart.zero();
    for a in 0..chart.dim() {
        let d = omega.left_derivative(chart.x(a))?;
        if !d.is_zero() {
            out = out.add(&chart.var(chart.dx(a)).mul(&d)?)?;
        }
    }
    Ok(out)
}

/// A function f or its differential df, as an argument of a Koszul bracket.
#[derive(Debug, Clone)]
pub enum Generator {
    Function(SuperSeries),
    Differential(SuperSeries),
}

impl Generator {
    pub fn function(&self) -> &SuperSeries {
        match self {
            Generator::Function(f) | Generator::Differential(f) => f,
        }
    }

    pub fn is_differential(&self) -> bool {
        matches!(self, Generator::Differential(_))
    }

    pub fn function_parity(&self) -> Result<Parity> {
        self.function().homogeneous_parity("generator")
    }

    pub fn form_parity(&self) -> Result<Parity> {
        let p = self.function_parity()?;
        Ok(if self.is_differential() { p.flip() } else { p })
    }

    pub fn to_form(&self, chart: &Chart) -> Result<SuperSeries> {
        match self {
            Generator::Function(f) => Ok(f.clone()),
            Generator::Differential(f) => de_rham(chart, f),
        }
    }
}

/// ε = (n−1)f̃₁ + (n−2)f̃₂ + … + f̃_{n−1} + n.
pub fn closed_epsilon(function_parities: &[Parity]) -> Parity {
    let n = function_parities.len();
    let s: usize = function_parities
        .iter()
        .enumerate()
        .map(|(k, p)| p.bit() as usize * (n - 1 - k))
        .sum();
    Parity::from_bit((s + n) as u32)
}

/// The explicit values of the higher Koszul brackets on functions and
/// differentials, independent of K.
pub fn closed_koszul_bracket(hp: &HomotopyPoisson, gens: &[Generator]) -> Result<SuperSeries> {
    let chart = hp.chart();
    let n = gens.len();
    let functions: Vec<usize> = (0..n).filter(|&i| !gens[i].is_differential()).collect();
    match functions.len() {
        0 => {
            let fs: Vec<SuperSeries> = gens.iter().map(|g| g.function().clone()).collect();
            let ps: Vec<Parity> = gens.iter().map(|g| g.function_parity()).collect::<Result<_>>()?;
            let b = hp.poisson_bracket(&fs)?;
            Ok(de_rham(chart, &b)?.signed(closed_epsilon(&ps).flip().sign()))
        }
        1 if n == 1 => hp.poisson_bracket(&[gens[0].function().clone()]),
        1 => {
            // bring the function to the front using symmetry
            let j = functions[0];
            let fj = gens[j].form_parity()?;
            let mut sign = 1;
            for g in &gens[..j] {
                sign *= fj.koszul(g.form_parity()?);
            }
            let mut order = vec![j];
            order.extend((0..n).filter(|&i| i != j));
            let fs: Vec<SuperSeries> = order.iter().map(|&i| gens[i].function().clone()).collect();
            let ps: Vec<Parity> = order
                .iter()
                .map(|&i| gens[i].function_parity())
                .collect::<Result<_>>()?;
            let b = hp.poisson_bracket(&fs)?;
            Ok(b.signed(sign * closed_epsilon(&ps).sign()))
        }
        _ => Ok(chart.zero()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unvalidated_structure_is_refused() {
        let c = Chart::standard(3, 0).unwrap();
        let p = c.parse("x1*xs2*xs3 + x2*xs1*xs2").unwrap();
        let mut hp = HomotopyPoisson::new(&c, p).unwrap();
        assert!(matches!(hp.master_hamiltonian(), Err(Error::State(_))));
        let r = hp.validate().unwrap();
        assert!(!r.is_zero());
        assert!(!hp.is_validated());
    }

    #[test]
    fn zero_tensor_gives_zero_hamiltonian() {
        let c = Chart::standard(2, 0).unwrap();
        let hp = HomotopyPoisson::validated(&c, c.zero()).unwrap();
        assert!(hp.master_hamiltonian().unwrap().is_zero());
    }

    #[test]
    fn odd_tensor_rejected() {
        let c = Chart::standard(2, 0).unwrap();
        assert!(matches!(
            HomotopyPoisson::new(&c, c.parse("xs1").unwrap()),
            Err(Error::Parity(_))
        ));
    }
}
