use std::fmt;

/// One named check with a signed margin: `pass` iff `margin >= 0`, so a
/// margin of exactly zero (condition holding with equality) still passes.
#[derive(Debug, Clone)]
pub struct CheckItem {
    pub name: String,
    pub pass: bool,
    pub margin: f64,
    pub formula: String,
    /// Required items gate downstream work; advisory ones are informational
    /// and can be overridden explicitly.
    pub required: bool,
}

#[derive(Debug, Clone, Default)]
pub struct CheckReport {
    pub items: Vec<CheckItem>,
}

impl CheckReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: &str, margin: f64, formula: String, required: bool) {
        self.items.push(CheckItem {
            name: name.to_string(),
            pass: margin >= 0.0,
            margin,
            formula,
            required,
        });
    }

    pub fn get(&self, name: &str) -> Option<&CheckItem> {
        self.items.iter().find(|i| i.name == name)
    }

    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }

    pub fn required_pass(&self) -> bool {
        self.items.iter().filter(|i| i.required).all(|i| i.pass)
    }

    pub fn failed_names(&self) -> Vec<&str> {
        self.items
            .iter()
            .filter(|i| !i.pass)
            .map(|i| i.name.as_str())
            .collect()
    }

    pub fn extend(&mut self, other: CheckReport) {
        self.items.extend(other.items);
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.items.iter().map(|i| i.name.len()).max().unwrap_or(0);
        for item in &self.items {
            writeln!(
                f,
                "{}  {:width$}  margin={:+.6e}{}  {}",
                if item.pass { "PASS" } else { "FAIL" },
                item.name,
                item.margin,
                if item.required { "" } else { "  (advisory)" },
                item.formula,
                width = width,
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margin_sign_decides_pass() {
        let mut r = CheckReport::new();
        r.push("a", 0.0, "x >= 0".into(), true);
        r.push("b", -1e-300, "y >= 0".into(), true);
        r.push("c", f64::NAN, "z >= 0".into(), false);
        assert!(r.get("a").unwrap().pass, "zero margin is a pass");
        assert!(!r.get("b").unwrap().pass);
        assert!(!r.get("c").unwrap().pass, "NaN margin must fail");
        assert!(!r.all_pass());
        assert!(!r.required_pass());
        assert_eq!(r.failed_names(), vec!["b", "c"]);
    }

    #[test]
    fn required_pass_ignores_advisory_failures() {
        let mut r = CheckReport::new();
        r.push("hard", 1.0, "ok".into(), true);
        r.push("soft", -1.0, "not ok".into(), false);
        assert!(r.required_pass());
        assert!(!r.all_pass());
        let shown = r.to_string();
        assert!(shown.contains("(advisory)"));
        assert!(shown.lines().count() == 2);
    }
}
