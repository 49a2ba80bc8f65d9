use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Every stability test the toolkit knows how to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CriterionId {
    Thm1A,
    Thm1B,
    Cor1A,
    Cor1B,
    Cor2,
    LogThmA,
    LogThmB,
    LogThmADerived,
    LogThmBDerived,
    LogCor,
    YuProp1,
    #[serde(rename = "TANGZOU_1")]
    Tangzou1,
    #[serde(rename = "TANGZOU_2")]
    Tangzou2,
}

impl CriterionId {
    pub const ALL: [CriterionId; 13] = [
        CriterionId::Thm1A,
        CriterionId::Thm1B,
        CriterionId::Cor1A,
        CriterionId::Cor1B,
        CriterionId::Cor2,
        CriterionId::LogThmA,
        CriterionId::LogThmB,
        CriterionId::LogThmADerived,
        CriterionId::LogThmBDerived,
        CriterionId::LogCor,
        CriterionId::YuProp1,
        CriterionId::Tangzou1,
        CriterionId::Tangzou2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CriterionId::Thm1A => "THM1_A",
            CriterionId::Thm1B => "THM1_B",
            CriterionId::Cor1A => "COR1_A",
            CriterionId::Cor1B => "COR1_B",
            CriterionId::Cor2 => "COR2",
            CriterionId::LogThmA => "LOG_THM_A",
            CriterionId::LogThmB => "LOG_THM_B",
            CriterionId::LogThmADerived => "LOG_THM_A_DERIVED",
            CriterionId::LogThmBDerived => "LOG_THM_B_DERIVED",
            CriterionId::LogCor => "LOG_COR",
            CriterionId::YuProp1 => "YU_PROP1",
            CriterionId::Tangzou1 => "TANGZOU_1",
            CriterionId::Tangzou2 => "TANGZOU_2",
        }
    }

    /// Printed logistic forms whose parameter mapping does not follow from the
    /// linearization; reported, but never counted toward a sound certificate.
    pub fn is_as_printed_logistic(self) -> bool {
        matches!(self, CriterionId::LogThmA | CriterionId::LogThmB | CriterionId::LogCor)
    }
}

impl fmt::Display for CriterionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CriterionId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CriterionId::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown criterion `{s}`"))
    }
}

/// Outcome of one sufficient condition: `satisfied` iff the precondition holds and `lhs < rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub criterion: CriterionId,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub satisfied: bool,
    pub precondition_ok: bool,
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn new(criterion: CriterionId, lhs: f64, rhs: f64, precondition_ok: bool) -> Self {
        Verdict {
            criterion,
            lhs,
            rhs,
            margin: rhs - lhs,
            satisfied: precondition_ok && lhs < rhs,
            precondition_ok,
            notes: Vec::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub(crate) fn relabel(mut self, criterion: CriterionId) -> Self {
        self.criterion = criterion;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_inequality() {
        let v = Verdict::new(CriterionId::Thm1A, 0.4, 0.4, true);
        assert!(!v.satisfied);
        assert_eq!(v.margin, 0.0);
        let v = Verdict::new(CriterionId::Thm1A, 0.1, 0.4, false);
        assert!(!v.satisfied);
    }

    #[test]
    fn ids_round_trip_through_strings() {
        for id in CriterionId::ALL {
            assert_eq!(id.as_str().parse::<CriterionId>().unwrap(), id);
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(json, format!("\"{}\"", id.as_str()));
        }
        assert!("THM9".parse::<CriterionId>().is_err());
    }
}
