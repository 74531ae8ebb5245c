use serde::{Deserialize, Serialize};

use super::PlanError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellClass {
    Free,
    Obstacle,
    NoFlyZone,
}

/// Grid cell as `(column, row)`.
pub type Cell = (usize, usize);

/// Row-major elevation and class map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TerrainSpec", into = "TerrainSpec")]
pub struct TerrainGrid {
    width: usize,
    height: usize,
    cell_size_m: f64,
    elevation_m: Vec<f64>,
    classes: Vec<CellClass>,
}

/// JSON layout: elevations row-major, classes as cell lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerrainSpec {
    pub width: usize,
    pub height: usize,
    pub cell_size_m: f64,
    /// Omitted means flat at zero.
    #[serde(default)]
    pub elevation_m: Vec<f64>,
    #[serde(default)]
    pub obstacles: Vec<Cell>,
    #[serde(default)]
    pub no_fly_zones: Vec<Cell>,
}

impl TryFrom<TerrainSpec> for TerrainGrid {
    type Error = PlanError;

    fn try_from(spec: TerrainSpec) -> Result<Self, PlanError> {
        let n = spec.width * spec.height;
        let elevation = if spec.elevation_m.is_empty() { vec![0.0; n] } else { spec.elevation_m };
        let mut grid = TerrainGrid::new(spec.width, spec.height, spec.cell_size_m, elevation)?;
        for (cells, class) in [(&spec.obstacles, CellClass::Obstacle), (&spec.no_fly_zones, CellClass::NoFlyZone)] {
            for &cell in cells {
                grid.set_class(cell, class)?;
            }
        }
        Ok(grid)
    }
}

impl From<TerrainGrid> for TerrainSpec {
    fn from(grid: TerrainGrid) -> Self {
        let of = |class| grid.cells().filter(|&c| grid.class(c) == class).collect();
        TerrainSpec {
            width: grid.width,
            height: grid.height,
            cell_size_m: grid.cell_size_m,
            obstacles: of(CellClass::Obstacle),
            no_fly_zones: of(CellClass::NoFlyZone),
            elevation_m: grid.elevation_m,
        }
    }
}

impl TerrainGrid {
    pub fn new(width: usize, height: usize, cell_size_m: f64, elevation_m: Vec<f64>) -> Result<Self, PlanError> {
        if width == 0 || height == 0 {
            return Err(PlanError::InvalidTerrain("dimensions must be at least 1".into()));
        }
        if !(cell_size_m.is_finite() && cell_size_m > 0.0) {
            return Err(PlanError::InvalidTerrain(format!("cell size must be positive, got {cell_size_m}")));
        }
        if elevation_m.len() != width * height {
            return Err(PlanError::InvalidTerrain(format!(
                "expected {} elevations, got {}",
                width * height,
                elevation_m.len()
            )));
        }
        if let Some(i) = elevation_m.iter().position(|e| !e.is_finite()) {
            return Err(PlanError::InvalidTerrain(format!("elevation {i} is not finite")));
        }
        Ok(Self { width, height, cell_size_m, classes: vec![CellClass::Free; width * height], elevation_m })
    }

    pub fn flat(width: usize, height: usize, cell_size_m: f64) -> Result<Self, PlanError> {
        Self::new(width, height, cell_size_m, vec![0.0; width * height])
    }

    /// `.` free, `#` obstacle, `X` no-fly zone; one text line per row.
    pub fn from_ascii(text: &str, cell_size_m: f64) -> Result<Self, PlanError> {
        let rows: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut grid = Self::flat(width, rows.len(), cell_size_m)?;
        for (y, row) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(PlanError::InvalidTerrain(format!(
                    "row {} has {} cells, expected {width}",
                    y + 1,
                    row.chars().count()
                )));
            }
            for (x, ch) in row.chars().enumerate() {
                let class = match ch {
                    '.' => CellClass::Free,
                    '#' => CellClass::Obstacle,
                    'X' => CellClass::NoFlyZone,
                    other => {
                        return Err(PlanError::InvalidTerrain(format!(
                            "row {} column {}: unknown cell '{other}'",
                            y + 1,
                            x + 1
                        )))
                    }
                };
                grid.classes[y * width + x] = class;
            }
        }
        Ok(grid)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_size_m(&self) -> f64 {
        self.cell_size_m
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, cell: Cell) -> usize {
        cell.1 * self.width + cell.0
    }

    pub fn cell(&self, index: usize) -> Cell {
        (index % self.width, index / self.width)
    }

    pub fn contains(&self, cell: Cell) -> bool {
        cell.0 < self.width && cell.1 < self.height
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.len()).map(|i| self.cell(i))
    }

    pub fn elevation(&self, cell: Cell) -> f64 {
        self.elevation_m[self.index(cell)]
    }

    pub fn class(&self, cell: Cell) -> CellClass {
        self.classes[self.index(cell)]
    }

    pub fn set_class(&mut self, cell: Cell, class: CellClass) -> Result<(), PlanError> {
        if !self.contains(cell) {
            return Err(PlanError::OutOfBounds(cell));
        }
        let i = self.index(cell);
        self.classes[i] = class;
        Ok(())
    }

    pub fn set_elevation(&mut self, cell: Cell, elevation_m: f64) -> Result<(), PlanError> {
        if !self.contains(cell) {
            return Err(PlanError::OutOfBounds(cell));
        }
        if !elevation_m.is_finite() {
            return Err(PlanError::InvalidTerrain("elevation must be finite".into()));
        }
        let i = self.index(cell);
        self.elevation_m[i] = elevation_m;
        Ok(())
    }

    /// 4-neighbors in the fixed order left, right, up, down.
    pub fn neighbors(&self, cell: Cell) -> impl Iterator<Item = Cell> + '_ {
        let (x, y) = cell;
        [(x.wrapping_sub(1), y), (x + 1, y), (x, y.wrapping_sub(1)), (x, y + 1)]
            .into_iter()
            .filter(move |&c| self.contains(c))
    }

    /// Slope between two adjacent cells.
    pub fn gradient_deg(&self, a: Cell, b: Cell) -> f64 {
        (self.elevation(b) - self.elevation(a)).abs().atan2(self.cell_size_m).to_degrees()
    }

    /// Steepest gradient to any 4-neighbor.
    pub fn local_slope_deg(&self, cell: Cell) -> f64 {
        self.neighbors(cell).map(|n| self.gradient_deg(cell, n)).fold(0.0, f64::max)
    }

    /// Left-right mirror image.
    pub fn mirrored(&self) -> Self {
        let mut out = self.clone();
        for c in self.cells() {
            let m = self.index((self.width - 1 - c.0, c.1));
            out.elevation_m[m] = self.elevation(c);
            out.classes[m] = self.class(c);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_parses_classes() {
        let g = TerrainGrid::from_ascii("..#\n.X.\n", 1.0).unwrap();
        assert_eq!((g.width(), g.height()), (3, 2));
        assert_eq!(g.class((2, 0)), CellClass::Obstacle);
        assert_eq!(g.class((1, 1)), CellClass::NoFlyZone);
        assert!(TerrainGrid::from_ascii("..\n.\n", 1.0).is_err());
        assert!(TerrainGrid::from_ascii("..?\n", 1.0).is_err());
    }

    #[test]
    fn json_round_trips() {
        let mut g = TerrainGrid::flat(3, 2, 0.5).unwrap();
        g.set_class((1, 1), CellClass::Obstacle).unwrap();
        g.set_elevation((2, 0), 0.3).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        assert!(text.contains("\"obstacles\":[[1,1]]"));
        assert_eq!(serde_json::from_str::<TerrainGrid>(&text).unwrap(), g);
        assert!(serde_json::from_str::<TerrainGrid>(r#"{"width":0,"height":1,"cell_size_m":1}"#).is_err());
    }

    #[test]
    fn slope_uses_steepest_neighbor() {
        let mut g = TerrainGrid::flat(3, 1, 1.0).unwrap();
        g.set_elevation((2, 0), 1.0).unwrap();
        assert_eq!(g.local_slope_deg((0, 0)), 0.0);
        assert!((g.local_slope_deg((1, 0)) - 45.0).abs() < 1e-12);
    }
}
