use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::Add;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The reserved grading name for the exponent of the formal parameter λ = ħ/i.
pub const LAMBDA: &str = "lambda";

/// A ℤ₂-degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn from_bit(bit: u32) -> Self {
        if bit % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn bit(self) -> u32 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    /// The sign (−1)^{self·other}.
    pub fn koszul(self, other: Parity) -> i32 {
        if self.is_odd() && other.is_odd() {
            -1
        } else {
            1
        }
    }

    /// (−1)^{self}.
    pub fn sign(self) -> i32 {
        if self.is_odd() {
            -1
        } else {
            1
        }
    }
}

impl Add for Parity {
    type Output = Parity;
    fn add(self, rhs: Parity) -> Parity {
        Parity::from_bit(self.bit() + rhs.bit())
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bit())
    }
}

/// What a coordinate stands for in a chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Base,
    EvenMomentum,
    OddAntimomentum,
    FormDifferential,
    Auxiliary,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedVariable {
    pub name: String,
    pub parity: Parity,
    pub weight: u32,
    pub role: Role,
    /// The coordinate this variable is conjugate to (momenta, antimomenta,
    /// differentials).
    pub partner: Option<usize>,
}

/// An ordered set of graded variables plus named integer gradings.
///
/// Declaration order is the canonical order of odd factors in every monomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableContext {
    vars: Vec<GradedVariable>,
    index: HashMap<String, usize>,
    odd: Vec<usize>,
    gradings: BTreeMap<String, Vec<u32>>,
}

impl VariableContext {
    pub fn builder() -> ContextBuilder {
        ContextBuilder::default()
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn var(&self, i: usize) -> &GradedVariable {
        &self.vars[i]
    }

    pub fn vars(&self) -> &[GradedVariable] {
        &self.vars
    }

    pub fn parity(&self, i: usize) -> Parity {
        self.vars[i].parity
    }

    pub fn odd_indices(&self) -> &[usize] {
        &self.odd
    }

    pub fn lookup(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::Context(format!("unknown variable `{name}`")))
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.vars.len() {
            Ok(())
        } else {
            Err(Error::Context(format!("variable index {i} out of range")))
        }
    }

    pub fn grading(&self, name: &str) -> Result<&[u32]> {
        self.gradings
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Context(format!("unknown grading `{name}`")))
    }

    pub fn has_grading(&self, name: &str) -> bool {
        name == LAMBDA || self.gradings.contains_key(name)
    }

    pub fn grading_names(&self) -> impl Iterator<Item = &str> {
        self.gradings.keys().map(String::as_str)
    }

    /// Variables carrying `role`, in declaration order.
    pub fn with_role(&self, role: Role) -> Vec<usize> {
        (0..self.vars.len()).filter(|&i| self.vars[i].role == role).collect()
    }

    pub fn first_auxiliary(&self, parity: Parity) -> Option<usize> {
        (0..self.vars.len())
            .find(|&i| self.vars[i].role == Role::Auxiliary && self.vars[i].parity == parity)
    }
}

#[derive(Debug, Default)]
pub struct ContextBuilder {
    vars: Vec<GradedVariable>,
    gradings: BTreeMap<String, Vec<String>>,
}

impl ContextBuilder {
    pub fn var(mut self, name: &str, parity: Parity, role: Role) -> Self {
        self.vars.push(GradedVariable {
            name: name.to_string(),
            parity,
            weight: 0,
            role,
            partner: None,
        });
        self
    }

    /// Adds a variable conjugate to (or the differential of) `partner`.
    pub fn paired(mut self, name: &str, parity: Parity, role: Role, partner: &str) -> Self {
        let idx = self.vars.iter().position(|v| v.name == partner);
        self.vars.push(GradedVariable {
            name: name.to_string(),
            parity,
            weight: 0,
            role,
            partner: idx.or(Some(usize::MAX)),
        });
        self
    }

    pub fn weighted(mut self, name: &str, parity: Parity, role: Role, weight: u32) -> Self {
        self.vars.push(GradedVariable {
            name: name.to_string(),
            parity,
            weight,
            role,
            partner: None,
        });
        self
    }

    /// Registers a grading assigning weight 1 to each listed variable.
    pub fn grading(mut self, name: &str, members: &[&str]) -> Self {
        self.gradings.insert(
            name.to_string(),
            members.iter().map(|s| s.to_string()).collect(),
        );
        self
    }

    pub fn build(self) -> Result<Arc<VariableContext>> {
        let mut index = HashMap::new();
        for (i, v) in self.vars.iter().enumerate() {
            if index.insert(v.name.clone(), i).is_some() {
                return Err(Error::Context(format!("duplicate variable `{}`", v.name)));
            }
        }
        for v in &self.vars {
            if let Some(p) = v.partner {
                if p == usize::MAX {
                    return Err(Error::Context(format!(
                        "partner of `{}` must be declared first",
                        v.name
                    )));
                }
                let partner = &self.vars[p];
                let expected = match v.role {
                    Role::EvenMomentum => partner.parity,
                    Role::OddAntimomentum | Role::FormDifferential => partner.parity.flip(),
                    Role::Base | Role::Auxiliary => v.parity,
                };
                if v.parity != expected {
                    return Err(Error::Parity(format!(
                        "`{}` must have parity {} as {:?} of `{}`",
                        v.name, expected, v.role, partner.name
                    )));
                }
            }
        }
        if self.gradings.contains_key(LAMBDA) {
            return Err(Error::Context("`lambda` is a reserved grading".into()));
        }
        let mut gradings = BTreeMap::new();
        for (name, members) in self.gradings {
            let mut w = vec![0u32; self.vars.len()];
            for m in members {
                let i = *index
                    .get(&m)
                    .ok_or_else(|| Error::Context(format!("grading `{name}` names unknown `{m}`")))?;
                w[i] = 1;
            }
            gradings.insert(name, w);
        }
        // the per-variable weight doubles as a grading
        if self.vars.iter().any(|v| v.weight > 0) {
            gradings
                .entry("weight".to_string())
                .or_insert_with(|| self.vars.iter().map(|v| v.weight).collect());
        }
        let odd = (0..self.vars.len())
            .filter(|&i| self.vars[i].parity.is_odd())
            .collect();
        Ok(Arc::new(VariableContext {
            vars: self.vars,
            index,
            odd,
            gradings,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_names_rejected() {
        let err = VariableContext::builder()
            .var("x", Parity::Even, Role::Base)
            .var("x", Parity::Odd, Role::Base)
            .build()
            .unwrap_err();
        assert!(matches!(err, Error::Context(_)));
    }

    #[test]
    fn antimomentum_parity_is_checked() {
        let err = VariableContext::builder()
            .var("x", Parity::Even, Role::Base)
            .paired("xs", Parity::Even, Role::OddAntimomentum, "x")
            .build()
            .unwrap_err();
        assert!(matches!(err, Error::Parity(_)));
        VariableContext::builder()
            .var("x", Parity::Even, Role::Base)
            .paired("xs", Parity::Odd, Role::OddAntimomentum, "x")
            .paired("p", Parity::Even, Role::EvenMomentum, "x")
            .build()
            .unwrap();
    }
}
