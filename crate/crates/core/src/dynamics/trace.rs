use std::fmt::Write;

use super::state::SimState;

pub const TRACE_COLUMNS: [&str; 20] = [
    "time_s",
    "pos_x_m",
    "pos_y_m",
    "pos_z_m",
    "vel_x_mps",
    "vel_y_mps",
    "vel_z_mps",
    "quat_w",
    "quat_x",
    "quat_y",
    "quat_z",
    "tilt_front_deg",
    "tilt_rear_deg",
    "cmd_fl",
    "cmd_fr",
    "cmd_rl",
    "cmd_rr",
    "mode",
    "power_w",
    "axle_sense",
];

/// Accumulates a CSV trace, keeping every `decimation`-th row offered.
#[derive(Debug, Clone)]
pub struct TraceWriter {
    buffer: String,
    decimation: usize,
    offered: usize,
}

impl TraceWriter {
    pub fn new(decimation: usize) -> Self {
        let mut buffer = TRACE_COLUMNS.join(",");
        buffer.push('\n');
        Self { buffer, decimation: decimation.max(1), offered: 0 }
    }

    pub fn push(&mut self, state: &SimState) {
        if self.offered.is_multiple_of(self.decimation) {
            write_row(&mut self.buffer, state);
        }
        self.offered += 1;
    }

    /// Appends `state` regardless of decimation (used for the final row).
    pub fn push_always(&mut self, state: &SimState) {
        write_row(&mut self.buffer, state);
        self.offered += 1;
    }

    pub fn rows(&self) -> usize {
        self.buffer.lines().count() - 1
    }

    pub fn finish(self) -> String {
        self.buffer
    }
}

fn write_row(out: &mut String, s: &SimState) {
    let q = s.attitude.quaternion();
    let values = [
        s.time_s,
        s.position.x,
        s.position.y,
        s.position.z,
        s.velocity.x,
        s.velocity.y,
        s.velocity.z,
        q.w,
        q.i,
        q.j,
        q.k,
        s.tilt.front_deg,
        s.tilt.rear_deg,
    ];
    for v in values {
        let _ = write!(out, "{v},");
    }
    for c in s.rotor_commands {
        let _ = write!(out, "{c},");
    }
    let sense = match s.tilt.sense {
        super::AxleSense::Inward => "inward",
        super::AxleSense::Same => "same",
    };
    let _ = writeln!(out, "{},{},{}", s.mode.name(), s.power_w, sense);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Mode, SurfaceModel};
    use crate::vehicle::VehicleParams;

    #[test]
    fn decimation_keeps_every_nth_row() {
        let state = SimState::resting(&VehicleParams::default(), &SurfaceModel::flat(), Mode::Ground, 0.0);
        let mut w = TraceWriter::new(10);
        for _ in 0..25 {
            w.push(&state);
        }
        assert_eq!(w.rows(), 3);
        let text = w.finish();
        let row = text.lines().nth(1).unwrap();
        assert_eq!(row.split(',').count(), TRACE_COLUMNS.len());
        assert!(row.contains(",ground,"));
    }
}
