use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::BatteryId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSample {
    pub time_s: f64,
    pub power_w: f64,
    pub dt_s: f64,
}

/// Propulsion energy booked per mode, charge drawn per battery, and the
/// power timeline it was integrated from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub per_mode_wh: BTreeMap<String, f64>,
    pub per_battery_ah: BTreeMap<BatteryId, f64>,
    pub avionics_wh: f64,
    pub total_wh: f64,
    pub timeline: Vec<PowerSample>,
}

impl EnergyLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Books `power_w` held over `[time_s, time_s + dt_s)` against `mode`.
    pub fn record(&mut self, mode: &str, time_s: f64, power_w: f64, dt_s: f64) {
        let wh = power_w * dt_s / 3600.0;
        *self.per_mode_wh.entry(mode.to_string()).or_insert(0.0) += wh;
        self.total_wh += wh;
        self.timeline.push(PowerSample { time_s, power_w, dt_s });
    }

    pub fn record_draw(&mut self, battery: BatteryId, ah: f64) {
        *self.per_battery_ah.entry(battery).or_insert(0.0) += ah;
    }

    pub fn record_avionics(&mut self, wh: f64) {
        self.avionics_wh += wh;
    }

    pub fn mode_sum_wh(&self) -> f64 {
        self.per_mode_wh.values().sum()
    }

    /// Energy integrated back from the timeline.
    pub fn integrate_timeline_wh(&self) -> f64 {
        self.timeline.iter().map(|s| s.power_w * s.dt_s).sum::<f64>() / 3600.0
    }

    /// JSON export without the timeline.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "total_wh": self.total_wh,
            "per_mode_wh": self.per_mode_wh,
            "per_battery_ah": self.per_battery_ah,
            "avionics_wh": self.avionics_wh,
            "samples": self.timeline.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn ledger_conserves_energy(samples in proptest::collection::vec((0usize..4, 0.0f64..2000.0, 1e-4f64..0.05), 0..500)) {
            let modes = ["ground", "flight", "incline", "wall"];
            let mut ledger = EnergyLedger::new();
            let mut t = 0.0;
            for (m, p, dt) in samples {
                ledger.record(modes[m], t, p, dt);
                t += dt;
            }
            prop_assert!((ledger.total_wh - ledger.mode_sum_wh()).abs() < 1e-6);
            prop_assert!((ledger.integrate_timeline_wh() - ledger.total_wh).abs() < 1e-6);
        }
    }

    #[test]
    fn summary_breaks_down_modes() {
        let mut ledger = EnergyLedger::new();
        ledger.record("ground", 0.0, 36.0, 100.0);
        ledger.record_draw(BatteryId::PropA, 0.05);
        let json = ledger.summary_json();
        assert_eq!(json["per_mode_wh"]["ground"], 1.0);
        assert_eq!(json["per_battery_ah"]["PropA"], 0.05);
    }
}
