//! Radius-of-curvature measures `R = h'' + h`.

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::grid::wrap_angle;
use crate::quadrature::trapezoid;
use crate::support::GridSamples;

/// Relative threshold deciding which nodes belong to the support of `R`.
pub const SUPPORT_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub angle: f64,
    pub weight: f64,
}

impl Atom {
    pub fn new(angle: f64, weight: f64) -> Self {
        Self {
            angle: wrap_angle(angle),
            weight,
        }
    }
}

/// Point atoms plus an optional density sampled on a grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurvatureMeasure {
    pub atoms: Vec<Atom>,
    pub density: Option<GridSamples>,
}

impl CurvatureMeasure {
    pub fn from_atoms(atoms: Vec<Atom>) -> Self {
        Self {
            atoms,
            density: None,
        }
    }

    pub fn from_density(density: GridSamples) -> Self {
        Self {
            atoms: Vec::new(),
            density: Some(density),
        }
    }

    pub fn with_density(mut self, density: GridSamples) -> Self {
        self.density = Some(density);
        self
    }

    pub fn check_nonnegative(&self) -> Result<()> {
        if let Some(a) = self.atoms.iter().find(|a| a.weight < 0.0) {
            return Err(GeomError::NegativeMass(format!(
                "atom at {} has weight {}",
                a.angle, a.weight
            )));
        }
        if let Some(d) = &self.density {
            if let Some((i, v)) = d.samples().iter().enumerate().find(|(_, v)| **v < 0.0) {
                return Err(GeomError::NegativeMass(format!(
                    "density sample {i} is {v}"
                )));
            }
        }
        Ok(())
    }

    /// Total mass: atom weights plus the trapezoid integral of the density.
    pub fn mass(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.weight).sum();
        atoms + self.density.as_ref().map_or(0.0, |d| trapezoid(d.samples()))
    }

    /// `(∫ R cos θ, ∫ R sin θ)`.
    pub fn first_moments(&self) -> (f64, f64) {
        let mut c: f64 = self.atoms.iter().map(|a| a.weight * a.angle.cos()).sum();
        let mut s: f64 = self.atoms.iter().map(|a| a.weight * a.angle.sin()).sum();
        if let Some(d) = &self.density {
            let g = d.grid();
            let dt = g.spacing();
            for (t, v) in g.nodes().zip(d.samples()) {
                c += dt * v * t.cos();
                s += dt * v * t.sin();
            }
        }
        (c, s)
    }

    /// Scale every weight and density sample.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom::new(a.angle, a.weight * k))
                .collect(),
            density: self.density.as_ref().map(|d| d.scaled(k)),
        }
    }

    /// Angles carrying more than `SUPPORT_THRESHOLD · mass`: atoms, then
    /// density nodes whose cell mass `R(θ_i)Δθ` exceeds the threshold.
    pub fn support(&self) -> Vec<f64> {
        let tau = SUPPORT_THRESHOLD * self.mass();
        let mut out: Vec<f64> = self
            .atoms
            .iter()
            .filter(|a| a.weight > tau)
            .map(|a| a.angle)
            .collect();
        if let Some(d) = &self.density {
            let g = d.grid();
            let dt = g.spacing();
            out.extend(
                g.nodes()
                    .zip(d.samples())
                    .filter(|(_, v)| **v * dt > tau)
                    .map(|(t, _)| t),
            );
        }
        out
    }
}
