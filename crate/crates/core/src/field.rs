//! Energy density sampled on a rectangle of the cylinder.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lump::{CylinderPoint, RationalLump};

/// Sampling rectangle. The `x` samples include both ends; the `y` samples
/// are `y_min + j (y_max - y_min) / ny`, `j < ny`, so a full period is
/// covered without repeating the seam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub ny: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            x_min: -4.0,
            x_max: 4.0,
            nx: 161,
            y_min: -PI,
            y_max: PI,
            ny: 128,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite
            || self.x_max <= self.x_min
            || self.y_max <= self.y_min
            || self.nx < 2
            || self.ny < 1
        {
            return Err(Error::InvalidParameter(format!("invalid grid {self:?}")));
        }
        Ok(())
    }

    pub fn xs(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.nx)
            .map(|i| {
                if i + 1 == self.nx {
                    self.x_max
                } else {
                    self.x_min + dx * i as f64
                }
            })
            .collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        let dy = self.dy();
        (0..self.ny).map(|j| self.y_min + dy * j as f64).collect()
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / self.ny as f64
    }
}

/// Energy density values, row-major with `y` as the slow index.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub spec: GridSpec,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub values: Vec<f64>,
}

impl FieldGrid {
    pub fn sample(lump: &RationalLump, spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        let x = spec.xs();
        let y = spec.ys();
        let values = y
            .par_iter()
            .flat_map_iter(|&yj| {
                x.iter()
                    .map(move |&xi| lump.energy_density(CylinderPoint::new(xi, yj)))
            })
            .collect();
        Ok(Self { spec, x, y, values })
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.x.len() + ix]
    }

    /// Trapezoidal integral over the rectangle.
    pub fn integral(&self) -> f64 {
        let nx = self.x.len();
        let sum: f64 = self
            .values
            .chunks(nx)
            .map(|row| row.iter().sum::<f64>() - 0.5 * (row[0] + row[nx - 1]))
            .sum();
        sum * self.spec.dx() * self.spec.dy()
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}
