use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const DEFAULT_BUDGET: &str = include_str!("../../data/mass_budget.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassCategory {
    Structure,
    Propulsion,
    Energy,
    Gam,
    Electronics,
    Payload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassComponent {
    pub name: String,
    pub mass_kg: f64,
    pub category: MassCategory,
}

#[derive(Debug, Error)]
pub enum MassBudgetError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: mass must be positive and finite, got {mass}")]
    BadMass { line: u64, mass: f64 },
    #[error("cannot read mass budget {path}: {message}")]
    Io { path: String, message: String },
    #[error("mass budget is empty")]
    Empty,
}

/// Component-level mass breakdown (`name,mass_kg,category` CSV).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassBudget {
    pub components: Vec<MassComponent>,
}

impl MassBudget {
    pub fn default_budget() -> Self {
        Self::from_csv_str(DEFAULT_BUDGET).expect("bundled mass budget is valid")
    }

    pub fn from_path(path: &Path) -> Result<Self, MassBudgetError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| MassBudgetError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_csv_str(&text)
    }

    pub fn from_csv_str(text: &str) -> Result<Self, MassBudgetError> {
        let mut reader =
            csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut components = Vec::new();
        for record in reader.deserialize::<MassComponent>() {
            let component = record.map_err(|e| MassBudgetError::Parse {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })?;
            if !(component.mass_kg.is_finite() && component.mass_kg > 0.0) {
                return Err(MassBudgetError::BadMass { line: components.len() as u64 + 1, mass: component.mass_kg });
            }
            components.push(component);
        }
        if components.is_empty() {
            return Err(MassBudgetError::Empty);
        }
        Ok(Self { components })
    }

    pub fn category_total(&self, category: MassCategory) -> f64 {
        self.components.iter().filter(|c| c.category == category).map(|c| c.mass_kg).sum()
    }

    /// Empty-vehicle mass: everything except payload.
    pub fn empty_mass(&self) -> f64 {
        self.components.iter().filter(|c| c.category != MassCategory::Payload).map(|c| c.mass_kg).sum()
    }

    pub fn gam_mass(&self) -> f64 {
        self.category_total(MassCategory::Gam)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_budget_closes_to_empty_mass() {
        let budget = MassBudget::default_budget();
        assert!((budget.empty_mass() - 2.7).abs() < 1e-9);
        assert!((budget.gam_mass() - 0.3288).abs() < 1e-12);
    }

    #[test]
    fn categories_partition_the_total() {
        use MassCategory::*;
        let budget = MassBudget::default_budget();
        let sum: f64 =
            [Structure, Propulsion, Energy, Gam, Electronics].iter().map(|&c| budget.category_total(c)).sum();
        assert!((sum - budget.empty_mass()).abs() < 1e-9);
    }

    #[test]
    fn payload_rows_are_excluded_from_empty_mass() {
        let text = "name,mass_kg,category\nframe,1.0,structure\ncamera,0.5,payload\n";
        let budget = MassBudget::from_csv_str(text).unwrap();
        assert_eq!(budget.empty_mass(), 1.0);
    }

    #[test]
    fn unknown_category_is_a_parse_error() {
        let err = MassBudget::from_csv_str("name,mass_kg,category\nframe,1.0,chassis\n").unwrap_err();
        assert!(matches!(err, MassBudgetError::Parse { line: 2, .. }), "{err}");
    }
}
