use serde::Serialize;

use crate::syntax::Path;
use crate::typing::{CheckReport, ReportError};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub position: Path,
    pub explanation: String,
}

/// Outcome of a property checker. `holds` is true exactly when there are no witnesses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropertyReport {
    pub property: String,
    pub holds: bool,
    /// False when the property's precondition did not apply (the report then holds vacuously).
    pub applicable: bool,
    pub witnesses: Vec<Witness>,
}

impl PropertyReport {
    pub fn new(property: &str) -> PropertyReport {
        PropertyReport { property: property.to_string(), holds: true, applicable: true, witnesses: Vec::new() }
    }

    pub fn not_applicable(property: &str) -> PropertyReport {
        PropertyReport { applicable: false, ..PropertyReport::new(property) }
    }

    pub fn fail(&mut self, position: Path, explanation: String) {
        self.holds = false;
        self.witnesses.push(Witness { position, explanation });
    }

    pub fn merge(&mut self, other: PropertyReport) {
        for w in other.witnesses {
            self.fail(w.position, format!("{}: {}", other.property, w.explanation));
        }
    }

    /// The `{ok, type, errors}` shape shared with the type checker.
    pub fn to_check_report(&self) -> CheckReport {
        CheckReport {
            ok: self.holds,
            ty: None,
            errors: self
                .witnesses
                .iter()
                .map(|w| ReportError {
                    code: self.property.clone(),
                    position: w.position.clone(),
                    message: w.explanation.clone(),
                })
                .collect(),
        }
    }
}
