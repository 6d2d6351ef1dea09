//! A single coordinate chart of a supermanifold M together with every
//! derived coordinate the bracket calculus needs.
//!
//! For a base coordinate `x<s>` of parity a the chart declares, in this order:
//! `x<s>` (a), `xs<s>` = x*_a (a+1), `dx<s>` (a+1), `p<s>` (a), `pi<s>` = π_a
//! conjugate to dx (a+1), `pis<s>` = π^a conjugate to x* (a+1), `ps<s>` = p*^a
//! conjugate to p (a+1), followed by the auxiliaries `t` (even), `tau`
//! (odd), `u` (even) and `theta` (odd). Each block lists all base indices
//! before the next block starts.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{Parity, Role, SuperSeries, VariableContext};
use crate::error::{Error, Result};

pub const ANTIMOMENTUM: &str = "antimomentum";
pub const FORM: &str = "form";
pub const MOMENTUM: &str = "momentum";
pub const PI: &str = "pi";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coordinate {
    pub name: String,
    pub parity: u8,
}

/// Index blocks of the derived coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    X,
    Xs,
    Dx,
    P,
    Pi,
    Pis,
    Ps,
}

const BLOCKS: [Block; 7] = [
    Block::X,
    Block::Xs,
    Block::Dx,
    Block::P,
    Block::Pi,
    Block::Pis,
    Block::Ps,
];

#[derive(Debug, Clone)]
pub struct Chart {
    ctx: Arc<VariableContext>,
    parities: Vec<Parity>,
    names: Vec<String>,
}

fn suffix(name: &str) -> &str {
    match name.strip_prefix('x') {
        Some(s) if !s.is_empty() => s,
        _ => name,
    }
}

impl Chart {
    pub fn new(coords: &[Coordinate]) -> Result<Chart> {
        if coords.is_empty() {
            return Err(Error::Context("a chart needs at least one coordinate".into()));
        }
        let parities: Vec<Parity> = coords
            .iter()
            .map(|c| match c.parity {
                0 => Ok(Parity::Even),
                1 => Ok(Parity::Odd),
                p => Err(Error::Parse(format!("parity of `{}` must be 0 or 1, got {p}", c.name))),
            })
            .collect::<Result<_>>()?;
        let names: Vec<String> = coords.iter().map(|c| c.name.clone()).collect();
        let n = coords.len();
        let label = |b: Block, a: usize| -> String {
            let s = suffix(&names[a]);
            match b {
                Block::X => names[a].clone(),
                Block::Xs => format!("xs{s}"),
                Block::Dx => format!("dx{s}"),
                Block::P => format!("p{s}"),
                Block::Pi => format!("pi{s}"),
                Block::Pis => format!("pis{s}"),
                Block::Ps => format!("ps{s}"),
            }
        };
        let mut b = VariableContext::builder();
        for a in 0..n {
            b = b.var(&label(Block::X, a), parities[a], Role::Base);
        }
        for a in 0..n {
            b = b.paired(&label(Block::Xs, a), parities[a].flip(), Role::OddAntimomentum, &names[a]);
        }
        for a in 0..n {
            b = b.paired(&label(Block::Dx, a), parities[a].flip(), Role::FormDifferential, &names[a]);
        }
        for a in 0..n {
            b = b.paired(&label(Block::P, a), parities[a], Role::EvenMomentum, &names[a]);
        }
        for a in 0..n {
            b = b.paired(&label(Block::Pi, a), parities[a].flip(), Role::EvenMomentum, &label(Block::Dx, a));
        }
        for a in 0..n {
            b = b.paired(&label(Block::Pis, a), parities[a].flip(), Role::EvenMomentum, &label(Block::Xs, a));
        }
        for a in 0..n {
            b = b.paired(&label(Block::Ps, a), parities[a].flip(), Role::OddAntimomentum, &label(Block::P, a));
        }
        b = b
            .var("t", Parity::Even, Role::Auxiliary)
            .var("tau", Parity::Odd, Role::Auxiliary)
            .var("u", Parity::Even, Role::Auxiliary)
            .var("theta", Parity::Odd, Role::Auxiliary);
        let block_names = |blk: Block| (0..n).map(|a| label(blk, a)).collect::<Vec<_>>();
        let xs = block_names(Block::Xs);
        let dx = block_names(Block::Dx);
        let p = block_names(Block::P);
        let pi = block_names(Block::Pi);
        fn refs(v: &[String]) -> Vec<&str> {
            v.iter().map(String::as_str).collect()
        }
        b = b
            .grading(ANTIMOMENTUM, &refs(&xs))
            .grading(FORM, &refs(&dx))
            .grading(MOMENTUM, &refs(&p))
            .grading(PI, &refs(&pi));
        Ok(Chart {
            ctx: b.build()?,
            parities,
            names,
        })
    }

    /// ℝ^{n|m} with names x1..x(n+m), even coordinates first.
    pub fn standard(even: usize, odd: usize) -> Result<Chart> {
        let coords: Vec<Coordinate> = (0..even + odd)
            .map(|i| Coordinate {
                name: format!("x{}", i + 1),
                parity: u8::from(i >= even),
            })
            .collect();
        Chart::new(&coords)
    }

    pub fn ctx(&self) -> &Arc<VariableContext> {
        &self.ctx
    }

    pub fn dim(&self) -> usize {
        self.parities.len()
    }

    pub fn base_names(&self) -> &[String] {
        &self.names
    }

    /// Parity ã of the base coordinate x^a.
    pub fn parity(&self, a: usize) -> Parity {
        self.parities[a]
    }

    pub fn index(&self, block: Block, a: usize) -> usize {
        let pos = BLOCKS.iter().position(|&b| b == block).expect("block");
        pos * self.dim() + a
    }

    pub fn block(&self, block: Block) -> Vec<usize> {
        (0..self.dim()).map(|a| self.index(block, a)).collect()
    }

    pub fn x(&self, a: usize) -> usize {
        self.index(Block::X, a)
    }
    pub fn xs(&self, a: usize) -> usize {
        self.index(Block::Xs, a)
    }
    pub fn dx(&self, a: usize) -> usize {
        self.index(Block::Dx, a)
    }
    pub fn p(&self, a: usize) -> usize {
        self.index(Block::P, a)
    }
    pub fn pi(&self, a: usize) -> usize {
        self.index(Block::Pi, a)
    }
    pub fn pis(&self, a: usize) -> usize {
        self.index(Block::Pis, a)
    }
    pub fn ps(&self, a: usize) -> usize {
        self.index(Block::Ps, a)
    }

    pub fn t(&self) -> usize {
        7 * self.dim()
    }

    pub fn tau(&self) -> usize {
        7 * self.dim() + 1
    }

    pub fn var(&self, i: usize) -> SuperSeries {
        SuperSeries::var(&self.ctx, i)
    }

    pub fn parse(&self, text: &str) -> Result<SuperSeries> {
        self.ctx.parse(text)
    }

    pub fn zero(&self) -> SuperSeries {
        SuperSeries::zero(&self.ctx)
    }

    pub fn one(&self) -> SuperSeries {
        SuperSeries::one(&self.ctx)
    }

    /// True when `s` involves only variables from the listed blocks.
    pub fn lives_on(&self, s: &SuperSeries, blocks: &[Block]) -> bool {
        let allowed: Vec<usize> = blocks.iter().flat_map(|&b| self.block(b)).collect();
        (0..self.ctx.len())
            .filter(|i| !allowed.contains(i))
            .all(|i| !s.depends_on(i))
    }

    pub fn phase_space(&self, kind: PhaseSpaceKind) -> PhaseSpace {
        let (coords, momenta, parity) = match kind {
            PhaseSpaceKind::Cotangent => (vec![Block::X], vec![Block::P], Parity::Even),
            PhaseSpaceKind::AntiCotangent => (vec![Block::X], vec![Block::Xs], Parity::Odd),
            PhaseSpaceKind::CotangentOfForms => {
                (vec![Block::X, Block::Dx], vec![Block::P, Block::Pi], Parity::Even)
            }
            PhaseSpaceKind::CotangentOfMultivectors => {
                (vec![Block::X, Block::Xs], vec![Block::P, Block::Pis], Parity::Even)
            }
            PhaseSpaceKind::AntiCotangentOfCotangent => {
                (vec![Block::X, Block::P], vec![Block::Xs, Block::Ps], Parity::Odd)
            }
        };
        let flat = |bs: &[Block]| -> Vec<usize> { bs.iter().flat_map(|&b| self.block(b)).collect() };
        PhaseSpace {
            kind,
            coords: flat(&coords),
            momenta: flat(&momenta),
            parity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseSpaceKind {
    /// T*M with coordinates (x, p).
    Cotangent,
    /// ΠT*M with coordinates (x, x*).
    AntiCotangent,
    /// T*(ΠTM) with coordinates (x, dx, p, π).
    CotangentOfForms,
    /// T*(ΠT*M) with coordinates (x, x*, p, π^a).
    CotangentOfMultivectors,
    /// ΠT*(T*M) with coordinates (x, p, x*, p*).
    AntiCotangentOfCotangent,
}

/// Coordinates paired with conjugate (anti)momenta; `coords[k]` is conjugate
/// to `momenta[k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseSpace {
    pub kind: PhaseSpaceKind,
    pub coords: Vec<usize>,
    pub momenta: Vec<usize>,
    pub parity: Parity,
}

impl PhaseSpace {
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.coords.iter().copied().zip(self.momenta.iter().copied())
    }

    pub fn validate(&self, ctx: &VariableContext) -> Result<()> {
        if self.coords.len() != self.momenta.len() {
            return Err(Error::PhaseSpace("pairing is not a bijection".into()));
        }
        for (c, m) in self.pairs() {
            let expected = match self.parity {
                Parity::Even => ctx.parity(c),
                Parity::Odd => ctx.parity(c).flip(),
            };
            if ctx.parity(m) != expected {
                return Err(Error::PhaseSpace(format!(
                    "momentum `{}` has the wrong parity for `{}`",
                    ctx.var(m).name,
                    ctx.var(c).name
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_base_coordinate_flips_derived_parities() {
        let c = Chart::standard(2, 1).unwrap();
        let ctx = c.ctx();
        assert_eq!(ctx.var(c.xs(2)).name, "xs3");
        assert_eq!(ctx.parity(c.xs(2)), Parity::Even);
        assert_eq!(ctx.parity(c.dx(0)), Parity::Odd);
        assert_eq!(ctx.parity(c.p(2)), Parity::Odd);
        assert_eq!(ctx.parity(c.pis(2)), Parity::Even);
        assert_eq!(ctx.var(c.tau()).name, "tau");
        for kind in [
            PhaseSpaceKind::Cotangent,
            PhaseSpaceKind::AntiCotangent,
            PhaseSpaceKind::CotangentOfForms,
            PhaseSpaceKind::CotangentOfMultivectors,
            PhaseSpaceKind::AntiCotangentOfCotangent,
        ] {
            c.phase_space(kind).validate(ctx).unwrap();
        }
    }
}
