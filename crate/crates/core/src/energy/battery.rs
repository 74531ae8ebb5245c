use serde::{Deserialize, Serialize};

use super::EnergyError;

/// Usable propulsion energy that makes both measured ranges hold
/// (29.8 W for 11 500 s).
const PROPULSION_USABLE_WH: f64 = 95.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BatteryId {
    PropA,
    PropB,
    Electronics,
}

impl BatteryId {
    pub fn is_propulsion(self) -> bool {
        !matches!(self, BatteryId::Electronics)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtectionEvent {
    pub battery: BatteryId,
    pub soc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrainOutcome {
    pub delivered_wh: f64,
    pub drawn_ah: f64,
    pub event: Option<ProtectionEvent>,
}

/// A pack with over-discharge protection. Voltage sag is not modeled; energy
/// is booked at nominal voltage, and the cutoff voltage is represented by the
/// SoC floor `1 − usable_fraction`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Battery {
    pub id: BatteryId,
    pub cells_series: u32,
    pub capacity_ah: f64,
    pub nominal_cell_voltage_v: f64,
    pub cutoff_cell_voltage_v: f64,
    pub soc: f64,
    pub usable_fraction: f64,
    #[serde(default)]
    pub tripped: bool,
}

impl Battery {
    /// 4S 5 Ah LiPo propulsion pack.
    pub fn propulsion(id: BatteryId) -> Self {
        let mut pack = Self {
            id,
            cells_series: 4,
            capacity_ah: 5.0,
            nominal_cell_voltage_v: 3.7,
            cutoff_cell_voltage_v: 3.3,
            soc: 1.0,
            usable_fraction: 1.0,
            tripped: false,
        };
        pack.usable_fraction = PROPULSION_USABLE_WH / 2.0 / pack.nominal_energy_wh();
        pack
    }

    /// 2S 3.2 Ah Li-ion avionics pack.
    pub fn electronics() -> Self {
        Self {
            id: BatteryId::Electronics,
            cells_series: 2,
            capacity_ah: 3.2,
            nominal_cell_voltage_v: 3.6,
            cutoff_cell_voltage_v: 3.0,
            soc: 1.0,
            usable_fraction: 0.8,
            tripped: false,
        }
    }

    pub fn validate(&self) -> Result<(), EnergyError> {
        let fail = |reason: &str| Err(EnergyError::InvalidBattery { id: self.id, reason: reason.into() });
        if self.cells_series == 0 || !(self.capacity_ah > 0.0) || !(self.nominal_cell_voltage_v > 0.0) {
            return fail("cells, capacity and voltage must be positive");
        }
        if !(self.cutoff_cell_voltage_v < self.nominal_cell_voltage_v) {
            return fail("cutoff voltage must be below nominal");
        }
        if !(0.0..=1.0).contains(&self.soc) {
            return fail("soc must lie in [0, 1]");
        }
        if !(self.usable_fraction > 0.0 && self.usable_fraction <= 1.0) {
            return fail("usable_fraction must lie in (0, 1]");
        }
        Ok(())
    }

    pub fn pack_voltage(&self) -> f64 {
        self.cells_series as f64 * self.nominal_cell_voltage_v
    }

    pub fn nominal_energy_wh(&self) -> f64 {
        self.capacity_ah * self.pack_voltage()
    }

    pub fn usable_energy_wh(&self) -> f64 {
        self.nominal_energy_wh() * self.usable_fraction
    }

    /// SoC at which the protection board disconnects the pack.
    pub fn protection_threshold(&self) -> f64 {
        1.0 - self.usable_fraction
    }

    /// Energy still available before protection trips.
    pub fn remaining_usable_wh(&self) -> f64 {
        if self.tripped {
            0.0
        } else {
            (self.soc - self.protection_threshold()).max(0.0) * self.nominal_energy_wh()
        }
    }

    /// Draws `power_w` for `dt_s`. The SoC never drops below the protection
    /// threshold: the step that reaches it delivers only what is left, trips
    /// the pack and reports one event. Later calls are refused.
    pub fn drain(&mut self, power_w: f64, dt_s: f64) -> Result<DrainOutcome, EnergyError> {
        if !(power_w.is_finite() && power_w >= 0.0) {
            return Err(EnergyError::NegativePower(power_w));
        }
        if self.tripped {
            return Err(EnergyError::Protection(self.id));
        }
        let capacity_wh = self.nominal_energy_wh();
        let requested_wh = power_w * dt_s / 3600.0;
        let floor = self.protection_threshold();
        let next = self.soc - requested_wh / capacity_wh;
        let (delivered_wh, event) = if next <= floor {
            let delivered = ((self.soc - floor) * capacity_wh).max(0.0);
            self.soc = floor;
            self.tripped = true;
            (delivered, Some(ProtectionEvent { battery: self.id, soc: floor }))
        } else {
            self.soc = next;
            (requested_wh, None)
        };
        Ok(DrainOutcome { delivered_wh, drawn_ah: delivered_wh / self.pack_voltage(), event })
    }
}

pub fn default_batteries() -> Vec<Battery> {
    vec![Battery::propulsion(BatteryId::PropA), Battery::propulsion(BatteryId::PropB), Battery::electronics()]
}

/// Sum of usable energy over the propulsion packs.
pub fn propulsion_usable_energy_wh(batteries: &[Battery]) -> f64 {
    batteries.iter().filter(|b| b.id.is_propulsion()).map(Battery::usable_energy_wh).sum()
}
