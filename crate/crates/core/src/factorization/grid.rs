use crate::error::{Error, Result};

/// Uniform grid `ω_j = -Ω + j h`, `h = 2Ω / n`, `j = 0..n`.
///
/// Node `n/2` is ω = 0 and nodes `1..n` are symmetric about it; node 0
/// (ω = -Ω) has no mirror and is treated as an end point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    halfwidth: f64,
    n_points: usize,
}

impl FrequencyGrid {
    pub const DEFAULT_HALFWIDTH: f64 = 200.0;
    pub const DEFAULT_POINTS: usize = 1 << 14;
    pub const MAX_POINTS: usize = 1 << 20;

    pub fn new(halfwidth: f64, n_points: usize) -> Result<Self> {
        if !(halfwidth >= 10.0 && halfwidth.is_finite()) {
            return Err(Error::invalid("grid.omega_max", format!("{halfwidth} is below 10")));
        }
        if n_points < 256 || !n_points.is_power_of_two() {
            return Err(Error::invalid(
                "grid.n_points",
                format!("{n_points} is not a power of two >= 256"),
            ));
        }
        if n_points > Self::MAX_POINTS {
            return Err(Error::invalid("grid.n_points", format!("{n_points} exceeds 2^20")));
        }
        let grid = Self { halfwidth, n_points };
        if grid.spacing() > 0.1 {
            return Err(Error::invalid(
                "grid.n_points",
                format!("spacing {} exceeds 0.1; use more points", grid.spacing()),
            ));
        }
        Ok(grid)
    }

    pub fn halfwidth(&self) -> f64 {
        self.halfwidth
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.halfwidth / self.n_points as f64
    }

    pub fn zero_index(&self) -> usize {
        self.n_points / 2
    }

    pub fn node(&self, j: usize) -> f64 {
        (j as f64 - self.zero_index() as f64) * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.node(j)).collect()
    }

    /// Index of the mirror node `-ω_j`; `None` for the unmatched end node.
    pub fn mirror(&self, j: usize) -> Option<usize> {
        (j > 0).then(|| self.n_points - j)
    }

    /// Indices with `|ω| ≤ fraction · Ω`.
    pub fn interior(&self, fraction: f64) -> impl Iterator<Item = usize> + '_ {
        let limit = fraction * self.halfwidth * (1.0 + 1e-12);
        (0..self.n_points).filter(move |&j| self.node(j).abs() <= limit)
    }

    /// Indices with `|ω| ≤ omega`.
    pub fn within(&self, omega: f64) -> impl Iterator<Item = usize> + '_ {
        let limit = omega * (1.0 + 1e-12);
        (0..self.n_points).filter(move |&j| self.node(j).abs() <= limit)
    }

    /// Same half-width, twice the points.
    pub fn refined(&self) -> Option<Self> {
        let n = self.n_points * 2;
        (n <= Self::MAX_POINTS).then_some(Self {
            halfwidth: self.halfwidth,
            n_points: n,
        })
    }
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        Self {
            halfwidth: Self::DEFAULT_HALFWIDTH,
            n_points: Self::DEFAULT_POINTS,
        }
    }
}
