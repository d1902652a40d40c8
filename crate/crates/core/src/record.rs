use serde::{Deserialize, Serialize};

use crate::error::{MaddError, Result};

/// Binary value of the sensitive attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    G0,
    G1,
}

impl Group {
    pub fn as_u8(self) -> u8 {
        match self {
            Group::G0 => 0,
            Group::G1 => 1,
        }
    }

    pub fn from_u8(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Group::G0),
            1 => Ok(Group::G1),
            other => Err(MaddError::Parse(format!("group must be 0 or 1, got {other}"))),
        }
    }
}

/// One individual's predicted success probability, group tag and optional
/// ground-truth label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredRecord {
    proba: f64,
    pub group: Group,
    pub label: Option<bool>,
}

impl ScoredRecord {
    pub fn new(proba: f64, group: Group, label: Option<bool>) -> Result<Self> {
        check_probability(proba)?;
        Ok(Self { proba, group, label })
    }

    pub fn proba(&self) -> f64 {
        self.proba
    }

    /// Same record with a different probability.
    pub fn with_proba(&self, proba: f64) -> Result<Self> {
        Self::new(proba, self.group, self.label)
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if p.is_finite() && (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(MaddError::InvalidProbability(p))
    }
}

/// Probabilities of one group, in record order.
pub fn group_probas(records: &[ScoredRecord], group: Group) -> Vec<f64> {
    records.iter().filter(|r| r.group == group).map(|r| r.proba).collect()
}

/// Labels of every record, failing if any is absent.
pub fn require_labels(records: &[ScoredRecord]) -> Result<Vec<bool>> {
    let missing = records.iter().filter(|r| r.label.is_none()).count();
    if missing > 0 {
        return Err(MaddError::MissingLabels(missing));
    }
    Ok(records.iter().map(|r| r.label.unwrap_or_default()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_probabilities() {
        for p in [-0.01, 1.0001, f64::NAN, f64::INFINITY] {
            assert!(matches!(ScoredRecord::new(p, Group::G0, None), Err(MaddError::InvalidProbability(_))));
        }
        assert!(ScoredRecord::new(0.0, Group::G1, Some(true)).is_ok());
        assert!(ScoredRecord::new(1.0, Group::G1, Some(false)).is_ok());
    }

    #[test]
    fn missing_labels_are_counted() {
        let recs = vec![
            ScoredRecord::new(0.2, Group::G0, Some(true)).unwrap(),
            ScoredRecord::new(0.3, Group::G1, None).unwrap(),
            ScoredRecord::new(0.4, Group::G1, None).unwrap(),
        ];
        assert!(matches!(require_labels(&recs), Err(MaddError::MissingLabels(2))));
    }
}
