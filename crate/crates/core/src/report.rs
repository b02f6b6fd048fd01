//! Line-oriented findings: `SEVERITY record-id message`, stable ordering.

use alloc::string::String;
use core::fmt;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Warning => write!(f, "WARN"),
            Severity::Error => write!(f, "ERROR"),
        }
    }
}

/// One checker finding against a stable record id.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Finding {
    pub severity: Severity,
    pub record: String,
    pub message: String,
}

impl Finding {
    pub fn error(record: impl Into<String>, message: impl Into<String>) -> Self {
        Finding { severity: Severity::Error, record: record.into(), message: message.into() }
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.severity, self.record, self.message)
    }
}

/// Canonical report order: by record id, then message.
pub fn sort_findings(findings: &mut alloc::vec::Vec<Finding>) {
    findings.sort_by(|a, b| (&a.record, &a.message).cmp(&(&b.record, &b.message)));
    findings.dedup();
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;
    use alloc::vec::Vec;

    #[test]
    fn display_format() {
        let f = Finding::error("diff:5:Ph5e0", "bad target");
        assert_eq!(f.to_string(), "ERROR diff:5:Ph5e0 bad target");
    }

    #[test]
    fn stable_order() {
        let mut v = vec![
            Finding::error("b", "y"),
            Finding::error("a", "z"),
            Finding::error("a", "z"),
            Finding::error("a", "x"),
        ];
        sort_findings(&mut v);
        assert_eq!(
            v.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
            vec!["ERROR a x", "ERROR a z", "ERROR b y"]
        );
    }
}
