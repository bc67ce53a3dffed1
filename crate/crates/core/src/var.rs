//! Program variables and sets of variables.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// A program variable. Ordering is lexicographic on the name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(Arc<str>);

/// Finite set of variables, iterated in lexicographic order.
pub type VarSet = BTreeSet<Var>;

impl Var {
    pub fn new(name: &str) -> Self {
        Var(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// True when the name can be written without separators inside a
    /// group: one letter followed by digits or underscores (`x`, `u_1`, `w7`).
    pub fn is_compact(&self) -> bool {
        let mut chars = self.0.chars();
        match chars.next() {
            Some(c) if c.is_ascii_alphabetic() => {
                chars.all(|c| c.is_ascii_digit() || c == '_')
            }
            _ => false,
        }
    }

    /// Names starting with `_` are reserved for generated variables.
    pub fn is_reserved(&self) -> bool {
        self.0.starts_with('_')
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var::new(s)
    }
}

/// Builds a variable set from a comma-separated list (`"x,y,z"`) or, when
/// no comma is present, from single-letter names (`"xyz"`).
pub fn var_set(spec: &str) -> VarSet {
    let spec = spec.trim();
    if spec.contains(',') {
        spec.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(Var::new)
            .collect()
    } else if spec.chars().all(|c| c.is_ascii_alphabetic()) {
        spec.chars().map(|c| Var::new(&c.to_string())).collect()
    } else if spec.is_empty() {
        VarSet::new()
    } else {
        std::iter::once(Var::new(spec)).collect()
    }
}

pub(crate) struct SetDisplay<'a>(pub &'a VarSet);

impl fmt::Display for SetDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compact_names() {
        assert!(Var::new("x").is_compact());
        assert!(Var::new("u_1").is_compact());
        assert!(!Var::new("xs").is_compact());
        assert!(!Var::new("_1").is_compact());
    }

    #[test]
    fn var_set_forms() {
        assert_eq!(var_set("xyz"), var_set("x, y, z"));
        assert_eq!(var_set("").len(), 0);
        assert_eq!(var_set("u_1").len(), 1);
    }
}
