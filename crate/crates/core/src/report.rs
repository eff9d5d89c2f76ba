use serde::{Deserialize, Serialize};

/// Outcome of a relation check: named residuals against a tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub ok: bool,
    pub tol: f64,
    pub residuals: Vec<Residual>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub name: String,
    /// Largest entry of the defect.
    pub value: f64,
    /// Scale the defect is compared against (`tol * scale`).
    pub scale: f64,
}

impl Report {
    pub fn new(tol: f64) -> Self {
        Report { ok: true, tol, residuals: Vec::new(), warnings: Vec::new() }
    }

    pub fn push(&mut self, name: impl Into<String>, value: f64, scale: f64) {
        let scale = scale.max(1.0);
        if !(value <= self.tol * scale) {
            self.ok = false;
        }
        self.residuals.push(Residual { name: name.into(), value, scale });
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.residuals.iter().find(|r| r.name == name).map(|r| r.value)
    }

    /// Largest residual relative to its scale.
    pub fn worst(&self) -> f64 {
        self.residuals.iter().map(|r| r.value / r.scale).fold(0.0, f64::max)
    }

    pub fn merge(&mut self, other: Report) {
        self.ok &= other.ok;
        self.residuals.extend(other.residuals);
        self.warnings.extend(other.warnings);
    }
}
