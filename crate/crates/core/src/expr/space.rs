use std::collections::HashMap;

use super::store::jet_name;
use super::{ExprError, Expression, Var};

/// What a declared variable stands for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Role {
    /// Base coordinate `x`, `y` or `p`.
    Base,
    /// Jet coordinate of a fiber function: derivative counts over `(x, y, p)`.
    Jet { func: String, counts: [u8; 3] },
    /// Formal parameter, e.g. the sl₃ coefficients.
    Param,
    Free,
}

/// Ordered, duplicate-free set of declared variables.
#[derive(Clone, Debug, Default)]
pub struct VariableSpace {
    entries: Vec<(String, Role)>,
    index: HashMap<String, usize>,
}

impl VariableSpace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Base coordinates plus all jets of `fibers` up to `order`.
    pub fn jet_space(fibers: &[&str], order: u8) -> Self {
        let mut s = Self::new();
        for b in ["x", "y", "p"] {
            s.declare(b, Role::Base).unwrap();
        }
        for f in fibers {
            for counts in multi_indices(order) {
                let name = jet_name(f, counts);
                s.declare(
                    &name,
                    Role::Jet {
                        func: f.to_string(),
                        counts,
                    },
                )
                .unwrap();
            }
        }
        s
    }

    pub fn with_params(mut self, names: &[&str]) -> Self {
        for n in names {
            self.declare(n, Role::Param).unwrap();
        }
        self
    }

    pub fn declare(&mut self, name: &str, role: Role) -> Result<Var, ExprError> {
        let v = Var::named(name);
        let canonical = v.name();
        if self.index.contains_key(&canonical) {
            return Err(ExprError::Unsupported(format!("`{canonical}` declared twice")));
        }
        self.index.insert(canonical.clone(), self.entries.len());
        self.entries.push((canonical, role));
        Ok(v)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(&Var::named(name).name())
    }

    pub fn role(&self, name: &str) -> Option<&Role> {
        self.index.get(&Var::named(name).name()).map(|&i| &self.entries[i].1)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// ∂e/∂v for a declared variable.
    pub fn differentiate(&self, e: &Expression, name: &str) -> Result<Expression, ExprError> {
        if !self.contains(name) {
            return Err(ExprError::UndeclaredVariable(name.to_string()));
        }
        Ok(e.differentiate(Var::named(name)))
    }
}

/// All derivative-count triples over `(x, y, p)` of total order ≤ `order`,
/// grouped by order.
pub fn multi_indices(order: u8) -> Vec<[u8; 3]> {
    let mut out = Vec::new();
    for n in 0..=order {
        for a in (0..=n).rev() {
            for b in (0..=n - a).rev() {
                out.push([a, b, n - a - b]);
            }
        }
    }
    out
}
