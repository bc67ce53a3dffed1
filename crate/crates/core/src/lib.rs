//! Sharing and linearity abstract domains for logic programs, with optimal
//! abstract matching for backward unification.

pub mod analyzer;
pub mod domain;
pub mod error;
pub mod existential;
pub mod multiset;
pub mod omega;
pub mod oracle;
pub mod sl;
mod syntax;
pub mod terms;
pub mod two;
pub mod var;

pub use domain::Domain;
pub use error::{Error, Result};
pub use existential::ExistentialSubstitution;
pub use multiset::Multiset;
pub use terms::{Substitution, Term, UnifyError};
pub use var::{var_set, Var, VarSet};
pub use omega::{match_omega, ShLinOmega};
pub use two::{match2, match2_opt, match2_ref, ShLin2, TwoGroup};
pub use sl::{match_sl, ShLinSl};
