use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::STANDARD_GRAVITY;

const DEFAULT_TABLE: &str = include_str!("../../data/default_rotor.csv");
const HEADER: [&str; 3] = ["command", "thrust_n", "power_w"];

#[derive(Debug, Error, PartialEq)]
pub enum RotorError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("invalid rotor table: {reason} (lines {lines:?})")]
    Validation { reason: String, lines: Vec<u64> },
    #[error("cannot read rotor table {path}: {message}")]
    Io { path: String, message: String },
    #[error("command {0} outside [0, 1]")]
    CommandOutOfRange(f64),
    #[error("thrust {thrust} N outside [0, {max}] N")]
    ThrustOutOfRange { thrust: f64, max: f64 },
    #[error("power {power} W outside tabulated range [{min}, {max}] W")]
    PowerOutOfRange { power: f64, min: f64, max: f64 },
}

/// Static performance of one rotor (motor + propeller + ESC), from a
/// thrust-stand style table.
///
/// Both curves are piecewise linear between samples and exact at the samples.
/// The power curve is indexed by thrust, so efficiency (g/W) is thrust over
/// power at any point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotorModel {
    pub name: String,
    commands: Vec<f64>,
    thrusts: Vec<f64>,
    powers: Vec<f64>,
}

impl RotorModel {
    /// The bundled table. It is synthetic: anchored at the measured 1.843 kgf
    /// maximum thrust and shaped so the hover sizing and energy figures hold.
    pub fn default_rotor() -> Self {
        Self::from_csv_str("default-synthetic", DEFAULT_TABLE).expect("bundled rotor table is valid")
    }

    pub fn from_path(path: &Path) -> Result<Self, RotorError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RotorError::Io { path: path.display().to_string(), message: e.to_string() })?;
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Self::from_csv_str(&name, &text)
    }

    /// Parses `command,thrust_n,power_w` CSV; `#` starts a comment line.
    pub fn from_csv_str(name: &str, text: &str) -> Result<Self, RotorError> {
        let mut reader =
            csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());

        let header = reader.headers().map_err(|e| csv_error(&e))?.clone();
        let got: Vec<&str> = header.iter().collect();
        if got != HEADER {
            let line = header.position().map_or(1, |p| p.line());
            return Err(RotorError::Parse {
                line,
                message: format!("expected header {:?}, found {:?}", HEADER.join(","), got.join(",")),
            });
        }

        let mut rows: Vec<(u64, [f64; 3])> = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| csv_error(&e))?;
            let line = record.position().map_or(0, |p| p.line());
            let mut values = [0.0; 3];
            for (slot, (field, column)) in values.iter_mut().zip(record.iter().zip(HEADER)) {
                *slot = field.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| RotorError::Parse {
                    line,
                    message: format!("{column}: not a finite number: {field:?}"),
                })?;
            }
            rows.push((line, values));
        }
        Self::from_rows(name, &rows)
    }

    /// Builds a model from `(line, [command, thrust_n, power_w])` rows.
    pub fn from_rows(name: &str, rows: &[(u64, [f64; 3])]) -> Result<Self, RotorError> {
        let lines: Vec<u64> = rows.iter().map(|r| r.0).collect();
        if rows.len() < 2 {
            return Err(RotorError::Validation { reason: "at least two rows are required".into(), lines });
        }
        let invalid = |reason: &str, lines: Vec<u64>| RotorError::Validation { reason: reason.into(), lines };

        let out_of_range: Vec<u64> = rows.iter().filter(|(_, v)| !(0.0..=1.0).contains(&v[0])).map(|r| r.0).collect();
        if !out_of_range.is_empty() {
            return Err(invalid("commands must lie in [0, 1]", out_of_range));
        }
        let (first, last) = (rows[0], rows[rows.len() - 1]);
        if first.1[0] != 0.0 || first.1[1] != 0.0 {
            return Err(invalid("first row must be command 0 with thrust 0", vec![first.0]));
        }
        if last.1[0] != 1.0 {
            return Err(invalid("last row must be command 1", vec![last.0]));
        }
        let negative_power: Vec<u64> = rows.iter().filter(|(_, v)| v[2] < 0.0).map(|r| r.0).collect();
        if !negative_power.is_empty() {
            return Err(invalid("power must be non-negative", negative_power));
        }
        for (column, label) in [(0, "commands"), (1, "thrust"), (2, "power")] {
            let offending: Vec<u64> =
                rows.windows(2).filter(|w| w[1].1[column] <= w[0].1[column]).map(|w| w[1].0).collect();
            if !offending.is_empty() {
                return Err(invalid(&format!("{label} must be strictly increasing"), offending));
            }
        }

        Ok(Self {
            name: name.to_string(),
            commands: rows.iter().map(|r| r.1[0]).collect(),
            thrusts: rows.iter().map(|r| r.1[1]).collect(),
            powers: rows.iter().map(|r| r.1[2]).collect(),
        })
    }

    /// Same as [`RotorModel::from_rows`] with thrust given in kgf, converted
    /// once at `g = 9.81`.
    pub fn from_kgf_rows(name: &str, rows: &[(u64, [f64; 3])]) -> Result<Self, RotorError> {
        let converted: Vec<(u64, [f64; 3])> =
            rows.iter().map(|&(l, [c, t, p])| (l, [c, t * STANDARD_GRAVITY, p])).collect();
        Self::from_rows(name, &converted)
    }

    pub fn max_thrust(&self) -> f64 {
        *self.thrusts.last().expect("validated non-empty")
    }

    pub fn idle_power(&self) -> f64 {
        self.powers[0]
    }

    pub fn max_power(&self) -> f64 {
        *self.powers.last().expect("validated non-empty")
    }

    /// Tabulated `(command, thrust_n, power_w)` rows.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.commands.iter().zip(&self.thrusts).zip(&self.powers).map(|((&c, &t), &p)| (c, t, p))
    }

    pub fn thrust_at(&self, command: f64) -> Result<f64, RotorError> {
        if !(0.0..=1.0).contains(&command) {
            return Err(RotorError::CommandOutOfRange(command));
        }
        Ok(interpolate(&self.commands, &self.thrusts, command))
    }

    pub fn power_at_thrust(&self, thrust: f64) -> Result<f64, RotorError> {
        self.check_thrust(thrust)?;
        Ok(interpolate(&self.thrusts, &self.powers, thrust))
    }

    /// Inverse of [`RotorModel::thrust_at`].
    pub fn command_for_thrust(&self, thrust: f64) -> Result<f64, RotorError> {
        self.check_thrust(thrust)?;
        Ok(interpolate(&self.thrusts, &self.commands, thrust))
    }

    /// Inverse of [`RotorModel::power_at_thrust`].
    pub fn thrust_for_power(&self, power: f64) -> Result<f64, RotorError> {
        if !(self.idle_power()..=self.max_power()).contains(&power) {
            return Err(RotorError::PowerOutOfRange { power, min: self.idle_power(), max: self.max_power() });
        }
        Ok(interpolate(&self.powers, &self.thrusts, power))
    }

    /// Static efficiency in grams of thrust per watt at each tabulated
    /// thrust, skipping the zero-thrust row.
    pub fn efficiency_curve(&self) -> Vec<(f64, f64)> {
        self.thrusts
            .iter()
            .zip(&self.powers)
            .filter(|(t, _)| **t > 0.0)
            .map(|(&t, &p)| {
                let grams = t / STANDARD_GRAVITY * 1000.0;
                (grams, grams / p)
            })
            .collect()
    }

    /// Copy with every thrust sample multiplied by `factor`.
    pub fn scaled_thrust(&self, factor: f64) -> Self {
        Self { thrusts: self.thrusts.iter().map(|t| t * factor).collect(), ..self.clone() }
    }

    fn check_thrust(&self, thrust: f64) -> Result<(), RotorError> {
        if !(0.0..=self.max_thrust()).contains(&thrust) {
            return Err(RotorError::ThrustOutOfRange { thrust, max: self.max_thrust() });
        }
        Ok(())
    }
}

fn csv_error(e: &csv::Error) -> RotorError {
    RotorError::Parse { line: e.position().map_or(0, |p| p.line()), message: e.to_string() }
}

/// Piecewise-linear lookup on strictly increasing `xs`; `x` must be in range.
fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let upper = xs.partition_point(|&v| v < x);
    if upper == 0 {
        return ys[0];
    }
    if upper == xs.len() {
        return ys[ys.len() - 1];
    }
    if xs[upper] == x {
        return ys[upper];
    }
    let (x0, x1, y0, y1) = (xs[upper - 1], xs[upper], ys[upper - 1], ys[upper]);
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const EXAMPLE: &str = "command,thrust_n,power_w\n0,0,3\n0.5,9.0,90\n1.0,18.08,330\n";

    #[test]
    fn example_table_interpolates() {
        let rotor = RotorModel::from_csv_str("example", EXAMPLE).unwrap();
        assert_eq!(rotor.max_thrust(), 18.08);
        assert_eq!(rotor.thrust_at(0.0).unwrap(), 0.0);
        assert_relative_eq!(rotor.thrust_at(0.25).unwrap(), 4.5, epsilon = 1e-12);
        assert_relative_eq!(rotor.thrust_at(0.75).unwrap(), 13.54, epsilon = 1e-12);
        assert_eq!(rotor.power_at_thrust(0.0).unwrap(), 3.0);
        assert_eq!(rotor.power_at_thrust(18.08).unwrap(), 330.0);
    }

    #[test]
    fn single_row_is_rejected() {
        let err = RotorModel::from_csv_str("x", "command,thrust_n,power_w\n0,0,3\n").unwrap_err();
        assert!(matches!(err, RotorError::Validation { .. }));
    }

    #[test]
    fn malformed_row_reports_its_line() {
        let text = "# comment\ncommand,thrust_n,power_w\n0,0,3\n0.5,abc,90\n1,18,300\n";
        match RotorModel::from_csv_str("x", text).unwrap_err() {
            RotorError::Parse { line, message } => {
                assert_eq!(line, 4);
                assert!(message.contains("thrust_n"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_monotone_thrust_names_rows() {
        let text = "command,thrust_n,power_w\n0,0,3\n0.4,9,90\n0.6,8,95\n1,18,300\n";
        match RotorModel::from_csv_str("x", text).unwrap_err() {
            RotorError::Validation { reason, lines } => {
                assert!(reason.contains("thrust"));
                assert_eq!(lines, vec![4]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn out_of_domain_queries() {
        let rotor = RotorModel::default_rotor();
        assert_eq!(rotor.thrust_at(1.2), Err(RotorError::CommandOutOfRange(1.2)));
        assert!(matches!(rotor.power_at_thrust(20.0), Err(RotorError::ThrustOutOfRange { .. })));
    }

    #[test]
    fn default_table_matches_measured_max_thrust() {
        let rotor = RotorModel::default_rotor();
        assert_relative_eq!(rotor.thrust_at(1.0).unwrap(), 1.843 * 9.81, epsilon = 1e-3);
    }

    #[test]
    fn default_hover_power_sizes_a_ten_minute_flight() {
        // 95.2 Wh usable over 600 s is 571.2 W total.
        let rotor = RotorModel::default_rotor();
        let hover = 4.0 * rotor.power_at_thrust(4.0 * 9.81 / 4.0).unwrap();
        assert!((hover - 571.2).abs() / 571.2 < 0.10, "hover {hover}");
    }

    #[test]
    fn kgf_rows_are_converted_once() {
        let rows = [(1, [0.0, 0.0, 3.0]), (2, [1.0, 1.843, 330.0])];
        let rotor = RotorModel::from_kgf_rows("kgf", &rows).unwrap();
        assert_relative_eq!(rotor.max_thrust(), 18.07983, epsilon = 1e-9);
    }

    #[test]
    fn efficiency_falls_at_high_thrust() {
        let curve = RotorModel::default_rotor().efficiency_curve();
        let peak = curve.iter().map(|c| c.1).fold(0.0, f64::max);
        assert!(curve.last().unwrap().1 < peak);
    }

    proptest! {
        #[test]
        fn curves_are_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let rotor = RotorModel::default_rotor();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(rotor.thrust_at(lo).unwrap() <= rotor.thrust_at(hi).unwrap());
            let (tl, th) = (lo * rotor.max_thrust(), hi * rotor.max_thrust());
            prop_assert!(rotor.power_at_thrust(tl).unwrap() <= rotor.power_at_thrust(th).unwrap());
        }

        #[test]
        fn command_round_trips_through_thrust(c in 0.0f64..=1.0) {
            let rotor = RotorModel::default_rotor();
            let t = rotor.thrust_at(c).unwrap();
            prop_assert!((rotor.command_for_thrust(t).unwrap() - c).abs() < 1e-9);
        }
    }

    #[test]
    fn sample_points_are_exact() {
        let rotor = RotorModel::default_rotor();
        for (c, t, p) in rotor.samples() {
            assert_eq!(rotor.thrust_at(c).unwrap(), t);
            assert_eq!(rotor.power_at_thrust(t).unwrap(), p);
        }
    }
}
