use std::collections::HashMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a spam percentile is turned into a spam/not-spam decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpamRule {
    /// Percentiles strictly above the threshold are spam.
    #[default]
    Gt70,
    /// Percentiles at or below the threshold are spam (lower is spammier).
    Le70,
}

impl SpamRule {
    pub const THRESHOLD: u8 = 70;

    pub fn is_spam(self, percentile: u8) -> bool {
        match self {
            SpamRule::Gt70 => percentile > Self::THRESHOLD,
            SpamRule::Le70 => percentile <= Self::THRESHOLD,
        }
    }
}

impl FromStr for SpamRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gt70" => Ok(SpamRule::Gt70),
            "le70" => Ok(SpamRule::Le70),
            other => Err(Error::invalid(format!("unknown spam rule `{other}`"))),
        }
    }
}

/// Spam percentiles keyed by document id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpamScores {
    pub percentiles: HashMap<String, u8>,
}

impl SpamScores {
    pub fn get(&self, doc_id: &str) -> Option<u8> {
        self.percentiles.get(doc_id).copied()
    }

    pub fn is_spam(&self, doc_id: &str, rule: SpamRule) -> Option<bool> {
        self.get(doc_id).map(|p| rule.is_spam(p))
    }

    pub fn len(&self) -> usize {
        self.percentiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.percentiles.is_empty()
    }
}

/// Parses `percentile doc_id` lines.
pub fn parse_spam_scores(input: &str) -> Result<SpamScores> {
    let mut percentiles = HashMap::new();
    for (n, line) in input.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 2 {
            return Err(Error::line(
                n + 1,
                format!("expected 2 columns, found {}", cols.len()),
            ));
        }
        let p: i64 = cols[0]
            .parse()
            .map_err(|_| Error::line(n + 1, format!("bad percentile `{}`", cols[0])))?;
        if !(0..=99).contains(&p) {
            return Err(Error::line(n + 1, format!("percentile {p} outside [0, 99]")));
        }
        if percentiles.insert(cols[1].to_string(), p as u8).is_some() {
            return Err(Error::line(n + 1, format!("duplicate record for {}", cols[1])));
        }
    }
    Ok(SpamScores { percentiles })
}
