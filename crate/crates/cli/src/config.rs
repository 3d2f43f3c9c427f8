//! Run configuration: defaults, an optional `key = value` file, then
//! command-line overrides.

use std::path::Path;

use lumpcyl::QuadratureConfig;

pub const DEFAULT_PRECISION: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub quadrature: QuadratureConfig,
    pub precision: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            quadrature: QuadratureConfig::default(),
            precision: DEFAULT_PRECISION,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub x_cutoff: Option<f64>,
    pub y_points: Option<usize>,
    pub x_panels: Option<usize>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_refinements: Option<u32>,
    pub precision: Option<usize>,
}

impl RunConfig {
    pub fn load(file: Option<&Path>, overrides: &Overrides) -> Result<Self, String> {
        let mut cfg = Self::default();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            cfg.apply_file(&text)?;
        }
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_file(&mut self, text: &str) -> Result<(), String> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected key = value", lineno + 1))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |e: &dyn std::fmt::Display| format!("config line {}: {key}: {e}", lineno + 1);
            let q = &mut self.quadrature;
            match key {
                "x_cutoff" => q.x_cutoff = value.parse().map_err(|e| bad(&e))?,
                "y_points" => q.y_points = value.parse().map_err(|e| bad(&e))?,
                "x_panels" => q.x_panels = value.parse().map_err(|e| bad(&e))?,
                "rel_tol" => q.rel_tol = value.parse().map_err(|e| bad(&e))?,
                "abs_tol" => q.abs_tol = value.parse().map_err(|e| bad(&e))?,
                "max_refinements" => q.max_refinements = value.parse().map_err(|e| bad(&e))?,
                "precision" => self.precision = value.parse().map_err(|e| bad(&e))?,
                _ => return Err(format!("config line {}: unknown key '{key}'", lineno + 1)),
            }
        }
        Ok(())
    }

    fn apply(&mut self, o: &Overrides) {
        let q = &mut self.quadrature;
        if let Some(v) = o.x_cutoff {
            q.x_cutoff = v;
        }
        if let Some(v) = o.y_points {
            q.y_points = v;
        }
        if let Some(v) = o.x_panels {
            q.x_panels = v;
        }
        if let Some(v) = o.rel_tol {
            q.rel_tol = v;
        }
        if let Some(v) = o.abs_tol {
            q.abs_tol = v;
        }
        if let Some(v) = o.max_refinements {
            q.max_refinements = v;
        }
        if let Some(v) = o.precision {
            self.precision = v;
        }
    }

    fn validate(&self) -> Result<(), String> {
        self.quadrature.validate().map_err(|e| e.to_string())?;
        if !(1..=17).contains(&self.precision) {
            return Err(format!(
                "precision {} must be between 1 and 17",
                self.precision
            ));
        }
        Ok(())
    }
}
