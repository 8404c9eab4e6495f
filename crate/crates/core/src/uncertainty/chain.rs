use serde::{Deserialize, Serialize};

/// Mixed tolerance `abs + rel * max|term|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    /// Inequality chains.
    pub const CHAIN: Tolerance = Tolerance { abs: 1e-10, rel: 1e-10 };
    /// Two-sided identities (Hilbert reduction, Schrödinger forms).
    pub const IDENTITY: Tolerance = Tolerance { abs: 1e-9, rel: 1e-9 };

    pub fn uniform(tol: f64) -> Self {
        Self { abs: tol, rel: tol }
    }

    pub fn threshold(&self, scale: f64) -> f64 {
        self.abs + self.rel * scale
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::CHAIN
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub name: String,
    pub value: f64,
}

/// `value = upper - lower`. `exact` is false when an estimate or an
/// unproven step is involved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slack {
    pub name: String,
    pub upper: String,
    pub lower: String,
    pub value: f64,
    pub exact: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Passed,
    EmpiricalNegative,
    Violation,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Passed => "passed",
            Status::EmpiricalNegative => "empirical_negative",
            Status::Violation => "violation",
        }
    }
}

/// Every term of one inequality chain and the signed slack of each link.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub chain: String,
    pub terms: Vec<Term>,
    pub slacks: Vec<Slack>,
    pub violated: bool,
    pub tol: f64,
    pub notes: Vec<String>,
}

impl ChainReport {
    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.name == name).map(|t| t.value)
    }

    pub fn slack(&self, name: &str) -> Option<&Slack> {
        self.slacks.iter().find(|s| s.name == name)
    }

    pub fn min_slack(&self) -> Option<f64> {
        self.slacks.iter().map(|s| s.value).reduce(f64::min)
    }

    pub fn status(&self) -> Status {
        let negative = |s: &&Slack| s.value < -self.tol;
        if self.slacks.iter().filter(negative).any(|s| s.exact) {
            Status::Violation
        } else if self.violated {
            Status::EmpiricalNegative
        } else {
            Status::Passed
        }
    }

    /// Recomputes every slack from the stored terms and compares bitwise.
    pub fn is_consistent(&self) -> bool {
        self.slacks.iter().all(|s| match (self.term(&s.upper), self.term(&s.lower)) {
            (Some(u), Some(l)) => (u - l).to_bits() == s.value.to_bits(),
            _ => false,
        }) && self.violated == self.min_slack().is_some_and(|m| m < -self.tol)
    }
}

pub(crate) struct ChainBuilder {
    chain: String,
    terms: Vec<Term>,
    slacks: Vec<Slack>,
    notes: Vec<String>,
}

impl ChainBuilder {
    pub fn new(chain: &str) -> Self {
        Self { chain: chain.to_string(), terms: Vec::new(), slacks: Vec::new(), notes: Vec::new() }
    }

    pub fn term(&mut self, name: &str, value: f64) -> &mut Self {
        self.terms.push(Term { name: name.to_string(), value });
        self
    }

    /// Adds the link `upper >= lower`; both terms must already be present.
    pub fn link(&mut self, upper: &str, lower: &str, exact: bool) -> &mut Self {
        let get = |n: &str| self.terms.iter().find(|t| t.name == n).map(|t| t.value).expect("term registered");
        let value = get(upper) - get(lower);
        self.slacks.push(Slack {
            name: format!("{upper}>={lower}"),
            upper: upper.to_string(),
            lower: lower.to_string(),
            value,
            exact,
        });
        self
    }

    pub fn note(&mut self, note: impl Into<String>) -> &mut Self {
        self.notes.push(note.into());
        self
    }

    pub fn finish(self, tol: Tolerance) -> ChainReport {
        let scale = self.terms.iter().map(|t| t.value.abs()).fold(0.0, f64::max);
        let tol = tol.threshold(scale);
        let violated = self.slacks.iter().any(|s| s.value < -tol);
        ChainReport { chain: self.chain, terms: self.terms, slacks: self.slacks, violated, tol, notes: self.notes }
    }
}

/// The algebraic prefix shared by every chain:
/// `(a^2 + b^2)/2 >= (a + b)^2/4 >= a b`.
pub(crate) fn mean_terms(builder: &mut ChainBuilder, a: f64, b: f64) {
    builder
        .term("half_sum_squares", 0.5 * (a * a + b * b))
        .term("quarter_square_sum", 0.25 * (a + b) * (a + b))
        .term("product", a * b)
        .link("half_sum_squares", "quarter_square_sum", true)
        .link("quarter_square_sum", "product", true);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_classification() {
        let mut b = ChainBuilder::new("t");
        b.term("x", 1.0).term("y", 2.0).link("x", "y", false);
        let r = b.finish(Tolerance::CHAIN);
        assert!(r.violated);
        assert_eq!(r.status(), Status::EmpiricalNegative);
        assert!(r.is_consistent());

        let mut b = ChainBuilder::new("t");
        b.term("x", 1.0).term("y", 2.0).link("x", "y", true);
        assert_eq!(b.finish(Tolerance::CHAIN).status(), Status::Violation);

        let mut b = ChainBuilder::new("t");
        b.term("x", 1.0).term("y", 1.0 + 1e-12).link("x", "y", true);
        let r = b.finish(Tolerance::CHAIN);
        assert_eq!(r.status(), Status::Passed);
        assert!(r.min_slack().unwrap() < 0.0);
    }

    #[test]
    fn threshold_is_mixed() {
        let t = Tolerance::CHAIN;
        assert_eq!(t.threshold(0.0), 1e-10);
        assert!((t.threshold(100.0) - (1e-10 + 1e-8)).abs() < 1e-24);
    }
}
