use std::fmt;

/// Default certification band for inequality checks.
pub const VERDICT_TOL: f64 = 1e-9;

/// Outcome of checking one inequality `lhs <= rhs` numerically.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityVerdict {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub slack: f64,
    pub pass: bool,
    pub tolerance: f64,
    /// The inequality's hypothesis did not hold, so it passes trivially.
    pub vacuous: bool,
    /// Parameters of the instance, e.g. `eps`, `t`, `start`.
    pub context: Vec<(String, f64)>,
}

impl InequalityVerdict {
    pub fn check(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let slack = rhs - lhs;
        Self {
            name: name.into(),
            lhs,
            rhs,
            slack,
            pass: slack >= -tolerance,
            tolerance,
            vacuous: false,
            context: Vec::new(),
        }
    }

    /// Records the numbers but passes, because the hypothesis failed.
    pub fn vacuous(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self {
            pass: true,
            vacuous: true,
            ..Self::check(name, lhs, rhs, tolerance)
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.context.push((key.to_owned(), value));
        self
    }

    pub fn context_value(&self, key: &str) -> Option<f64> {
        self.context.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn context_string(&self) -> String {
        self.context
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

impl fmt::Display for InequalityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {} lhs={:.6e} rhs={:.6e} slack={:.3e}{} {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.lhs,
            self.rhs,
            self.slack,
            if self.vacuous { " (vacuous)" } else { "" },
            self.context_string()
        )
    }
}

/// Keeps the verdict with the smallest slack.
pub fn worst_of(verdicts: impl IntoIterator<Item = InequalityVerdict>) -> Option<InequalityVerdict> {
    verdicts
        .into_iter()
        .min_by(|a, b| a.slack.total_cmp(&b.slack))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_tracks_slack_and_tolerance() {
        assert!(InequalityVerdict::check("a", 1.0, 1.0 - 1e-10, 1e-9).pass);
        assert!(!InequalityVerdict::check("a", 1.0, 1.0 - 1e-8, 1e-9).pass);
        let v = InequalityVerdict::vacuous("b", 5.0, 1.0, 1e-9);
        assert!(v.pass && v.vacuous && v.slack == -4.0);
    }

    #[test]
    fn worst_picks_minimum_slack() {
        let w = worst_of([
            InequalityVerdict::check("a", 0.0, 2.0, 0.0),
            InequalityVerdict::check("b", 0.0, 1.0, 0.0),
        ])
        .unwrap();
        assert_eq!(w.name, "b");
    }
}
