//! Runs the verification battery of a scenario and assembles a report.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::SuperSeries;
use crate::brackets::canonical_poisson;
use crate::bv_operator::{classical_brackets_from_delta, principal_symbol};
use crate::chart::{PhaseSpaceKind, ANTIMOMENTUM};
use crate::error::{Error, Result};
use crate::koszul::{closed_koszul_bracket, Generator, HomotopyPoisson};
use crate::linfty::{jacobi_cases, verify_generalized_jacobi, CaseReport, Graded};
use crate::microformal::{KoszulSchoutenMap, Route};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Check {
    BvBrackets,
    ClassicalDegeneration,
    Diagram,
    HamiltonJacobi,
    KoszulClosedFormulas,
    KoszulJacobi,
    KoszulMasterEquation,
    LichnerowiczSquare,
    LinftyMorphism,
    MasterEquation,
    PoissonJacobi,
    PrincipalSymbol,
    RouteEquivalence,
}

impl Check {
    pub const ALL: [Check; 13] = [
        Check::BvBrackets,
        Check::ClassicalDegeneration,
        Check::Diagram,
        Check::HamiltonJacobi,
        Check::KoszulClosedFormulas,
        Check::KoszulJacobi,
        Check::KoszulMasterEquation,
        Check::LichnerowiczSquare,
        Check::LinftyMorphism,
        Check::MasterEquation,
        Check::PoissonJacobi,
        Check::PrincipalSymbol,
        Check::RouteEquivalence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::BvBrackets => "bv-brackets",
            Check::ClassicalDegeneration => "classical-degeneration",
            Check::Diagram => "diagram",
            Check::HamiltonJacobi => "hamilton-jacobi",
            Check::KoszulClosedFormulas => "koszul-closed-formulas",
            Check::KoszulJacobi => "koszul-jacobi",
            Check::KoszulMasterEquation => "koszul-master-equation",
            Check::LichnerowiczSquare => "lichnerowicz-square",
            Check::LinftyMorphism => "linfty-morphism",
            Check::MasterEquation => "master-equation",
            Check::PoissonJacobi => "poisson-jacobi",
            Check::PrincipalSymbol => "principal-symbol",
            Check::RouteEquivalence => "route-equivalence",
        }
    }

    pub fn parse(name: &str) -> Result<Check> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| Error::Parse(format!("unknown check `{name}`")))
    }

    /// The checks `verify-all` runs when none are named. Route equivalence
    /// is opt-in; classical degeneration only applies to quadratic tensors.
    pub fn defaults(scenario: &Scenario) -> Vec<Check> {
        let mut out: Vec<Check> = Check::ALL
            .into_iter()
            .filter(|c| !matches!(c, Check::RouteEquivalence | Check::ClassicalDegeneration))
            .collect();
        if is_quadratic(&scenario.tensor) {
            out.push(Check::ClassicalDegeneration);
        }
        out.sort();
        out
    }
}

fn is_quadratic(p: &SuperSeries) -> bool {
    !p.is_zero() && p.max_degree(ANTIMOMENTUM).ok().flatten() == Some(2) && {
        p.terms().all(|(t, _)| p.degree_in(ANTIMOMENTUM, t).ok() == Some(2))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    pub pass: bool,
    pub cases: usize,
    pub failures: usize,
    /// First failing case and its residual, or "0".
    pub residual: String,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl CheckEntry {
    fn from_cases(name: &str, cases: &[CaseReport]) -> Self {
        let failures: Vec<&CaseReport> = cases.iter().filter(|c| !c.pass).collect();
        CheckEntry {
            name: name.to_string(),
            pass: failures.is_empty(),
            cases: cases.len(),
            failures: failures.len(),
            residual: failures
                .first()
                .map(|c| format!("{}: {}", c.case, c.residual_sample))
                .unwrap_or_else(|| "0".into()),
            elapsed: Duration::ZERO,
        }
    }

    fn error(name: &str, e: &Error) -> Self {
        CheckEntry {
            name: name.to_string(),
            pass: false,
            cases: 0,
            failures: 1,
            residual: e.to_string(),
            elapsed: Duration::ZERO,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub tool: String,
    pub version: String,
    pub scenario: String,
    pub scenario_hash: String,
    pub seed: u64,
    pub max_arity: usize,
    pub pass: bool,
    pub checks: Vec<CheckEntry>,
}

impl VerificationReport {
    pub fn new(scenario: &Scenario, max_arity: usize, mut checks: Vec<CheckEntry>) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        VerificationReport {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            scenario: scenario.name.clone(),
            scenario_hash: scenario.hash.clone(),
            seed: scenario.seed,
            max_arity,
            pass: checks.iter().all(|c| c.pass),
            checks,
        }
    }

    pub fn entry(&self, name: &str) -> Option<&CheckEntry> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Text rendering; the only place timings appear.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} {} scenario {} ({})\n",
            self.tool,
            self.version,
            self.scenario,
            &self.scenario_hash[..12.min(self.scenario_hash.len())]
        );
        for c in &self.checks {
            out.push_str(&format!(
                "{:4} {:<24} {:>5} cases {:>8.3}s  {}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.cases,
                c.elapsed.as_secs_f64(),
                c.residual
            ));
        }
        out.push_str(if self.pass { "all checks passed\n" } else { "verification failed\n" });
        out
    }
}

/// Everything the checks share.
struct Context<'a> {
    scenario: &'a Scenario,
    hp: HomotopyPoisson,
    max_arity: usize,
}

impl Context<'_> {
    fn validated(&self) -> Result<&HomotopyPoisson> {
        if self.hp.is_validated() {
            Ok(&self.hp)
        } else {
            Err(Error::State("P does not satisfy [P,P] = 0".into()))
        }
    }

    fn map(&self) -> Result<KoszulSchoutenMap> {
        Ok(KoszulSchoutenMap::new(self.validated()?.clone(), self.scenario.policy.clone())?
            .with_signs(self.scenario.signs))
    }

    fn run(&self, check: Check) -> Result<Vec<CaseReport>> {
        let s = self.scenario;
        let c = &s.chart;
        let single = |name: &str, r: SuperSeries| vec![CaseReport::from_residual(name.into(), &r)];
        match check {
            Check::MasterEquation => Ok(single("[P,P]", self.hp.master_equation()?)),
            Check::KoszulMasterEquation => {
                let k = self.validated()?.master_hamiltonian()?;
                let ps = c.phase_space(PhaseSpaceKind::CotangentOfForms);
                Ok(single("(K,K)", canonical_poisson(&k, &k, &ps)?))
            }
            Check::LichnerowiczSquare => {
                let hp = self.validated()?;
                s.sample_multivectors()
                    .par_iter()
                    .enumerate()
                    .map(|(i, m)| {
                        let r = hp.lichnerowicz(&hp.lichnerowicz(m)?)?;
                        Ok(CaseReport::from_residual(format!("multivector {i}"), &r))
                    })
                    .collect()
            }
            Check::Diagram => self.validated()?.verify_diagram(&s.sample_forms()),
            Check::PoissonJacobi => {
                let fam = self.hp.poisson_family()?;
                let pool = graded_pool(&s.functions)?;
                let br = |a: &[Graded]| fam.graded(a);
                Ok(verify_generalized_jacobi(&br, fam.version(), self.max_arity, &pool))
            }
            Check::KoszulJacobi => {
                let fam = self.validated()?.koszul_family()?;
                let pool = graded_pool(&s.forms)?;
                let br = |a: &[Graded]| fam.graded(a);
                Ok(verify_generalized_jacobi(&br, fam.version(), self.max_arity, &pool))
            }
            Check::KoszulClosedFormulas => {
                let hp = self.validated()?;
                let gens: Vec<Generator> = s
                    .functions
                    .iter()
                    .flat_map(|f| [Generator::Function(f.clone()), Generator::Differential(f.clone())])
                    .collect();
                let tuples = ordered_tuples(gens.len(), 1, self.max_arity);
                tuples
                    .par_iter()
                    .map(|t| {
                        let g: Vec<Generator> = t.iter().map(|&i| gens[i].clone()).collect();
                        let forms: Vec<SuperSeries> =
                            g.iter().map(|x| x.to_form(c)).collect::<Result<_>>()?;
                        let r = hp
                            .higher_koszul_bracket(&forms)?
                            .sub(&closed_koszul_bracket(hp, &g)?)?;
                        Ok(CaseReport::from_residual(format!("generators {t:?}"), &r))
                    })
                    .collect()
            }
            Check::HamiltonJacobi => Ok(single("adjoint anchor", self.map()?.hamilton_jacobi()?)),
            Check::LinftyMorphism => {
                Ok(self.map()?.verify_linfty_morphism(&s.even_forms(), Route::Direct))
            }
            Check::RouteEquivalence => Ok(self.map()?.route_equivalence(&s.even_forms())),
            Check::ClassicalDegeneration => {
                let m = self.map()?;
                let hp = self.validated()?;
                s.even_forms()
                    .par_iter()
                    .enumerate()
                    .map(|(i, w)| {
                        let r = m.direct(w)?.sub(&hp.anchor_pullback(w)?.truncated(&s.policy)?)?;
                        Ok(CaseReport::from_residual(format!("form {i}"), &r))
                    })
                    .collect()
            }
            Check::BvBrackets => {
                let hp = self.validated()?;
                let forms = &s.forms;
                jacobi_cases(forms.len(), self.max_arity.min(3))
                    .into_par_iter()
                    .filter(|t| !t.is_empty())
                    .map(|t| {
                        let args: Vec<SuperSeries> = t.iter().map(|&i| forms[i].clone()).collect();
                        let r = classical_brackets_from_delta(c, hp.tensor(), &args)?
                            .sub(&hp.higher_koszul_bracket(&args)?)?;
                        Ok(CaseReport::from_residual(format!("forms {t:?}"), &r))
                    })
                    .collect()
            }
            Check::PrincipalSymbol => {
                let hp = self.validated()?;
                let r = principal_symbol(c, hp.tensor())?.sub(&hp.master_hamiltonian()?)?;
                Ok(single("symbol - K", r))
            }
        }
    }
}

fn graded_pool(items: &[SuperSeries]) -> Result<Vec<Graded>> {
    items.iter().cloned().map(Graded::homogeneous).collect()
}

/// All index tuples of length lo..=hi over 0..n, in lexicographic order.
pub fn ordered_tuples(n: usize, lo: usize, hi: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<usize>> = vec![vec![]];
    for len in 1..=hi {
        layer = layer
            .iter()
            .flat_map(|t| {
                (0..n).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
        if len >= lo {
            out.extend(layer.iter().cloned());
        }
    }
    out
}

/// Runs `checks` on the scenario; the report lists them sorted by name.
pub fn verify(scenario: &Scenario, checks: &[Check], max_arity: usize) -> Result<VerificationReport> {
    let hp = scenario.structure()?;
    let ctx = Context {
        scenario,
        hp,
        max_arity,
    };
    let entries: Vec<CheckEntry> = checks
        .par_iter()
        .map(|&check| {
            let start = Instant::now();
            let mut entry = match ctx.run(check) {
                Ok(cases) => CheckEntry::from_cases(check.name(), &cases),
                Err(e) => CheckEntry::error(check.name(), &e),
            };
            entry.elapsed = start.elapsed();
            entry
        })
        .collect();
    Ok(VerificationReport::new(scenario, max_arity, entries))
}
