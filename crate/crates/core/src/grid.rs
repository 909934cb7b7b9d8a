use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{GeomError, Result};

/// Uniform nodes `2πi/n` on the circle.
///
/// `n` is even so that every node has its antipode on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AngleGrid {
    n: usize,
}

pub const DEFAULT_GRID: usize = 720;

impl AngleGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(GeomError::BadGrid(n));
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> f64 {
        TAU / self.n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        TAU * (i % self.n) as f64 / self.n as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }

    /// Index of the antipodal node.
    pub fn antipode(&self, i: usize) -> usize {
        (i + self.n / 2) % self.n
    }
}

impl Default for AngleGrid {
    fn default() -> Self {
        Self { n: DEFAULT_GRID }
    }
}

/// Reduce an angle to `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Reduce an angle to `[-π, π)`.
pub fn wrap_signed(theta: f64) -> f64 {
    let r = wrap_angle(theta + std::f64::consts::PI) - std::f64::consts::PI;
    if r < -std::f64::consts::PI {
        r + TAU
    } else {
        r
    }
}

/// Reduce an axis angle to `[0, π)`.
pub fn wrap_axis(theta: f64) -> f64 {
    let r = theta.rem_euclid(std::f64::consts::PI);
    if r >= std::f64::consts::PI {
        0.0
    } else {
        r
    }
}

/// Shortest distance between two axis angles, modulo π.
pub fn axis_distance(a: f64, b: f64) -> f64 {
    let d = wrap_axis(a - b);
    d.min(std::f64::consts::PI - d)
}

/// Shortest circular distance between two angles.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    wrap_signed(a - b).abs()
}
