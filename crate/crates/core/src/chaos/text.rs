//! Canonical line-oriented text form of a [`ChaosPoly`].
//!
//! One term per line, `coeff i1:k1 i2:k2 ...`, in canonical term order. A line
//! with no index pairs is the constant term; the zero polynomial is empty.

use std::fmt;

use super::multi_index::MultiIndex;
use super::poly::{Ambient, ChaosPoly};
use crate::error::{Error, Result};

impl ChaosPoly {
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn from_text(ambient: Ambient, text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            let mut fields = line.split_whitespace();
            let Some(head) = fields.next() else { continue };
            let coeff: f64 = head.parse().map_err(|_| Error::ChaosText {
                line: line_no,
                message: format!("bad coefficient `{head}`"),
            })?;
            let mut pairs = Vec::new();
            for field in fields {
                let bad = || Error::ChaosText { line: line_no, message: format!("bad index pair `{field}`") };
                let (i, k) = field.split_once(':').ok_or_else(bad)?;
                let i: u32 = i.parse().map_err(|_| bad())?;
                let k: u32 = k.parse().map_err(|_| bad())?;
                if i == 0 || k == 0 {
                    return Err(bad());
                }
                pairs.push((i, k));
            }
            terms.push((MultiIndex::from_pairs(pairs), coeff));
        }
        ChaosPoly::from_terms(ambient, terms)
    }
}

impl fmt::Display for ChaosPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, (idx, c)) in self.terms().enumerate() {
            if n > 0 {
                writeln!(f)?;
            }
            write!(f, "{c}")?;
            for (i, k) in idx.iter() {
                write!(f, " {i}:{k}")?;
            }
        }
        Ok(())
    }
}
