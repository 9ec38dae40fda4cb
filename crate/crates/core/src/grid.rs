//! Metric occupancy grids.
//!
//! Cell `(i, j)` covers `[ox + i·res, ox + (i+1)·res) × [oy + j·res, oy + (j+1)·res)`.
//! A world point maps to its cell with `floor((p - origin) / res)`, so a point lying
//! exactly on a shared edge belongs to the higher-index cell. Anything outside the
//! grid is reported as occupied.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::GridError;

/// Integer cell coordinates, column `i` along x and row `j` along y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub i: usize,
    pub j: usize,
}

impl Cell {
    pub fn new(i: usize, j: usize) -> Self {
        Self { i, j }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    resolution: f64,
    origin: [f64; 2],
    cells: Vec<bool>,
}

impl OccupancyGrid {
    /// An all-free grid.
    pub fn new(
        width: usize,
        height: usize,
        resolution: f64,
        origin: [f64; 2],
    ) -> Result<Self, GridError> {
        Self::from_cells(width, height, resolution, origin, vec![false; width * height])
    }

    /// Builds a grid from a row-major occupancy vector (row 0 is the lowest y).
    pub fn from_cells(
        width: usize,
        height: usize,
        resolution: f64,
        origin: [f64; 2],
        cells: Vec<bool>,
    ) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::InvalidDimensions { width, height });
        }
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(GridError::InvalidResolution(resolution));
        }
        if !(origin[0].is_finite() && origin[1].is_finite()) {
            return Err(GridError::InvalidOrigin);
        }
        if cells.len() != width * height {
            return Err(GridError::CellCount {
                expected: width * height,
                found: cells.len(),
            });
        }
        Ok(Self {
            width,
            height,
            resolution,
            origin,
            cells,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    /// World extent as `[min_x, min_y, max_x, max_y]`.
    pub fn bounds(&self) -> [f64; 4] {
        [
            self.origin[0],
            self.origin[1],
            self.origin[0] + self.width as f64 * self.resolution,
            self.origin[1] + self.height as f64 * self.resolution,
        ]
    }

    fn index(&self, cell: Cell) -> usize {
        cell.j * self.width + cell.i
    }

    pub fn contains_cell(&self, cell: Cell) -> bool {
        cell.i < self.width && cell.j < self.height
    }

    /// Occupancy of a cell; out-of-range cells are occupied.
    pub fn cell_occupied(&self, cell: Cell) -> bool {
        !self.contains_cell(cell) || self.cells[self.index(cell)]
    }

    pub fn set_occupied(&mut self, cell: Cell, occupied: bool) {
        assert!(self.contains_cell(cell), "cell {cell:?} outside grid");
        let idx = self.index(cell);
        self.cells[idx] = occupied;
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    /// Cell containing a world point, or `None` when the point is off the grid.
    pub fn world_to_cell(&self, p: [f64; 2]) -> Option<Cell> {
        let fx = ((p[0] - self.origin[0]) / self.resolution).floor();
        let fy = ((p[1] - self.origin[1]) / self.resolution).floor();
        if !(fx >= 0.0 && fy >= 0.0) || fx >= self.width as f64 || fy >= self.height as f64 {
            return None;
        }
        Some(Cell::new(fx as usize, fy as usize))
    }

    /// World coordinates of a cell center.
    pub fn cell_to_world(&self, cell: Cell) -> [f64; 2] {
        [
            self.origin[0] + (cell.i as f64 + 0.5) * self.resolution,
            self.origin[1] + (cell.j as f64 + 0.5) * self.resolution,
        ]
    }

    /// True when every cell of the axis-aligned cell box spanned by two points is free.
    pub fn span_is_free(&self, a: [f64; 2], b: [f64; 2]) -> bool {
        let (Some(ca), Some(cb)) = (self.world_to_cell(a), self.world_to_cell(b)) else {
            return false;
        };
        let (i0, i1) = (ca.i.min(cb.i), ca.i.max(cb.i));
        let (j0, j1) = (ca.j.min(cb.j), ca.j.max(cb.j));
        (j0..=j1).all(|j| (i0..=i1).all(|i| !self.cells[j * self.width + i]))
    }

    pub fn is_occupied(&self, p: [f64; 2]) -> bool {
        match self.world_to_cell(p) {
            Some(cell) => self.cells[self.index(cell)],
            None => true,
        }
    }

    /// Marks every cell whose center lies within `radius` of an occupied cell center.
    pub fn inflate(&self, radius: f64) -> Result<OccupancyGrid, GridError> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(GridError::NegativeRadius(radius));
        }
        let reach = (radius / self.resolution).floor() as isize;
        let limit = (radius / self.resolution).powi(2) * (1.0 + 1e-12);
        let kernel: Vec<(isize, isize)> = (-reach..=reach)
            .flat_map(|di| (-reach..=reach).map(move |dj| (di, dj)))
            .filter(|&(di, dj)| ((di * di + dj * dj) as f64) <= limit)
            .collect();

        let mut out = self.clone();
        for j in 0..self.height {
            for i in 0..self.width {
                if !self.cells[j * self.width + i] {
                    continue;
                }
                for &(di, dj) in &kernel {
                    let (ni, nj) = (i as isize + di, j as isize + dj);
                    if ni >= 0 && nj >= 0 && (ni as usize) < self.width && (nj as usize) < self.height
                    {
                        out.cells[nj as usize * self.width + ni as usize] = true;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GridError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| GridError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Parses the `GRID <w> <h> <res> <ox> <oy>` text format.
    pub fn parse(text: &str) -> Result<Self, GridError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (header_line, header) = lines.next().ok_or(GridError::Format {
            line: 1,
            message: "missing GRID header".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 6 || fields[0] != "GRID" {
            return Err(GridError::Format {
                line: header_line,
                message: format!(
                    "expected `GRID <width> <height> <resolution> <origin_x> <origin_y>`, got `{header}`"
                ),
            });
        }
        let bad = |what: &str, tok: &str| GridError::Format {
            line: header_line,
            message: format!("invalid {what} `{tok}`"),
        };
        let width: usize = fields[1].parse().map_err(|_| bad("width", fields[1]))?;
        let height: usize = fields[2].parse().map_err(|_| bad("height", fields[2]))?;
        let resolution: f64 = fields[3].parse().map_err(|_| bad("resolution", fields[3]))?;
        let ox: f64 = fields[4].parse().map_err(|_| bad("origin_x", fields[4]))?;
        let oy: f64 = fields[5].parse().map_err(|_| bad("origin_y", fields[5]))?;

        let mut cells = Vec::with_capacity(width.saturating_mul(height).min(1 << 26));
        let mut rows = 0usize;
        let mut last_line = header_line;
        for (line, row) in lines {
            last_line = line;
            if rows == height {
                return Err(GridError::Format {
                    line,
                    message: format!("more than the declared {height} rows"),
                });
            }
            let before = cells.len();
            for (col, tok) in row.split_whitespace().enumerate() {
                match tok {
                    "0" => cells.push(false),
                    "1" => cells.push(true),
                    _ => {
                        return Err(GridError::Format {
                            line,
                            message: format!("token {} is `{tok}`, expected 0 or 1", col + 1),
                        })
                    }
                }
            }
            let found = cells.len() - before;
            if found != width {
                return Err(GridError::Format {
                    line,
                    message: format!("row has {found} cells, expected {width}"),
                });
            }
            rows += 1;
        }
        if rows != height {
            return Err(GridError::Format {
                line: last_line,
                message: format!(
                    "payload has {} cells, declared {width}x{height} = {}",
                    cells.len(),
                    width * height
                ),
            });
        }
        Self::from_cells(width, height, resolution, [ox, oy], cells)
    }

    /// Serializes to the text format accepted by [`OccupancyGrid::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.cells.len() * 2 + 64);
        let _ = writeln!(
            out,
            "GRID {} {} {} {} {}",
            self.width, self.height, self.resolution, self.origin[0], self.origin[1]
        );
        for row in self.cells.chunks(self.width) {
            let line: Vec<&str> = row.iter().map(|&c| if c { "1" } else { "0" }).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}
