//! Domain selection shared by the oracle, the analyzer and front ends.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{parse_err, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Omega,
    Two,
    Sl,
}

impl Domain {
    pub const ALL: [Domain; 3] = [Domain::Omega, Domain::Two, Domain::Sl];

    pub fn name(self) -> &'static str {
        match self {
            Domain::Omega => "omega",
            Domain::Two => "two",
            Domain::Sl => "sl",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "omega" => Ok(Domain::Omega),
            "two" => Ok(Domain::Two),
            "sl" => Ok(Domain::Sl),
            other => parse_err(format!("unknown domain '{other}' (expected omega, two or sl)")),
        }
    }
}
