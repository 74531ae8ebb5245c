use serde::{Deserialize, Serialize};

const DATASET: &str = include_str!("../../data/multimodal_comparison.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GamType {
    Active,
    Passive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GainQualifier {
    #[serde(rename = "=")]
    Exact,
    #[serde(rename = "~")]
    Approx,
    #[serde(rename = ">")]
    Above,
    #[serde(rename = "<")]
    Below,
    #[serde(rename = "<~")]
    AtMost,
}

/// One reviewed vehicle. `None` means the figure was not reported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonEntry {
    pub name: String,
    pub gam_type: GamType,
    pub payload_kg: Option<f64>,
    pub mtom_kg: Option<f64>,
    pub tw_ratio: Option<f64>,
    pub gam_mass_pct: Option<f64>,
    /// Ground over flight operating time.
    pub ground_gain: Option<f64>,
    pub ground_gain_qualifier: Option<GainQualifier>,
    /// Whether the source states the gain as an explicit multiplier.
    pub gain_is_multiplier: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub entries: usize,
    pub min_ground_gain: f64,
    pub max_ground_gain: f64,
    /// Lowest GAM mass share among passive designs that report one,
    /// excluding `exclude` (designs needing power to stay stationary).
    pub lowest_passive_gam_pct: Option<(String, f64)>,
}

/// Literature dataset of multi-modal rotary-wing vehicles, used to place a
/// design's GAM fraction and endurance gain in context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultimodalComparison {
    pub entries: Vec<ComparisonEntry>,
}

impl MultimodalComparison {
    pub fn bundled() -> Self {
        let mut reader =
            csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(DATASET.as_bytes());
        let entries =
            reader.deserialize().collect::<Result<Vec<ComparisonEntry>, _>>().expect("bundled dataset parses");
        Self { entries }
    }

    pub fn summary(&self, exclude: &[&str]) -> ComparisonSummary {
        let gains: Vec<f64> =
            self.entries.iter().filter(|e| e.gain_is_multiplier == Some(true)).filter_map(|e| e.ground_gain).collect();
        let lowest_passive = self
            .entries
            .iter()
            .filter(|e| e.gam_type == GamType::Passive && !exclude.contains(&e.name.as_str()))
            .filter_map(|e| e.gam_mass_pct.map(|p| (e.name.clone(), p)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        ComparisonSummary {
            entries: self.entries.len(),
            min_ground_gain: gains.iter().copied().fold(f64::INFINITY, f64::min),
            max_ground_gain: gains.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            lowest_passive_gam_pct: lowest_passive,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gain_range_spans_reported_multipliers() {
        let summary = MultimodalComparison::bundled().summary(&[]);
        assert_eq!(summary.entries, 25);
        assert_eq!(summary.min_ground_gain, 1.33);
        assert_eq!(summary.max_ground_gain, 11.25);
    }

    #[test]
    fn lowest_stationary_passive_gam() {
        // Gemini needs continuous actuation to stay still, so it is excluded.
        let summary = MultimodalComparison::bundled().summary(&["Gemini"]);
        assert_eq!(summary.lowest_passive_gam_pct, Some(("Rollocopter v2".to_string(), 11.8)));
        let with_gemini = MultimodalComparison::bundled().summary(&[]);
        assert_eq!(with_gemini.lowest_passive_gam_pct.unwrap().1, 1.03);
    }
}
