//! Flat JSON configuration files and their merge with defaults and flags.

use std::path::Path;

use engel_core::bvp::ShootingOptions;
use engel_core::IntegratorConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Every field is optional; present fields override the defaults and are in
/// turn overridden by command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub max_step: Option<f64>,
    pub max_steps: Option<usize>,
    pub residual_tol: Option<f64>,
    pub max_newton_iters: Option<usize>,
    pub t_max: Option<f64>,
    pub max_momentum: Option<f64>,
    pub jacobian_step: Option<f64>,
    pub max_halvings: Option<usize>,
    pub coarse_tol: Option<f64>,
    pub alpha0_count: Option<usize>,
    pub h30_grid: Option<Vec<f64>>,
    pub h40_grid: Option<Vec<f64>>,
    pub duration_factors: Option<Vec<f64>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    pub fn load_optional(path: Option<&Path>) -> Result<Self, CliError> {
        path.map_or(Ok(Self::default()), Self::load)
    }

    /// Later values win.
    pub fn overlay(mut self, top: FileConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if top.$f.is_some() { self.$f = top.$f; } )* };
        }
        take!(
            rtol,
            atol,
            max_step,
            max_steps,
            residual_tol,
            max_newton_iters,
            t_max,
            max_momentum,
            jacobian_step,
            max_halvings,
            coarse_tol,
            alpha0_count,
            h30_grid,
            h40_grid,
            duration_factors
        );
        self
    }

    pub fn integrator(&self, base: IntegratorConfig) -> IntegratorConfig {
        IntegratorConfig {
            rtol: self.rtol.unwrap_or(base.rtol),
            atol: self.atol.unwrap_or(base.atol),
            max_step: self.max_step.unwrap_or(base.max_step),
            max_steps: self.max_steps.unwrap_or(base.max_steps),
        }
    }

    pub fn shooting(&self) -> ShootingOptions {
        let mut o = ShootingOptions::default();
        o.integrator = self.integrator(o.integrator);
        o.residual_tol = self.residual_tol.unwrap_or(o.residual_tol);
        o.max_newton_iters = self.max_newton_iters.unwrap_or(o.max_newton_iters);
        o.t_max = self.t_max.unwrap_or(o.t_max);
        o.max_momentum = self.max_momentum.unwrap_or(o.max_momentum);
        o.jacobian_step = self.jacobian_step.unwrap_or(o.jacobian_step);
        o.max_halvings = self.max_halvings.unwrap_or(o.max_halvings);
        o.coarse_tol = self.coarse_tol.unwrap_or(o.coarse_tol);
        let g = &mut o.multistart_grid;
        g.alpha0_count = self.alpha0_count.unwrap_or(g.alpha0_count);
        if let Some(v) = &self.h30_grid {
            g.h30 = v.clone();
        }
        if let Some(v) = &self.h40_grid {
            g.h40 = v.clone();
        }
        if let Some(v) = &self.duration_factors {
            g.duration_factors = v.clone();
        }
        o
    }
}
