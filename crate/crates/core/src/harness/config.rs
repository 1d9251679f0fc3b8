use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bie::ProblemKind;
use crate::error::{KfbiError, Result};
use crate::geometry::{ParamDomain, ParametricSurface, SurfaceKind};
use crate::harness::catalog::ExactId;
use crate::interface::ParametricCurve;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceSpec {
    Plane { half_width: f64 },
    Helicoid { half_width: f64 },
    ShearedCubic { half_width: f64 },
    Saddle { half_width: f64 },
    Paraboloid { half_width: f64 },
    Torus { major: f64, minor: f64 },
    Dupin { a: f64, b: f64, c: f64, d: f64 },
}

impl SurfaceSpec {
    pub fn build(&self) -> ParametricSurface {
        let sq = ParamDomain::square;
        match *self {
            SurfaceSpec::Plane { half_width } => {
                ParametricSurface::new(SurfaceKind::Plane, sq(half_width))
            }
            SurfaceSpec::Helicoid { half_width } => {
                ParametricSurface::new(SurfaceKind::Helicoid, sq(half_width))
            }
            SurfaceSpec::ShearedCubic { half_width } => {
                ParametricSurface::new(SurfaceKind::ShearedCubic, sq(half_width))
            }
            SurfaceSpec::Saddle { half_width } => {
                ParametricSurface::new(SurfaceKind::Saddle, sq(half_width))
            }
            SurfaceSpec::Paraboloid { half_width } => {
                ParametricSurface::new(SurfaceKind::Paraboloid, sq(half_width))
            }
            SurfaceSpec::Torus { major, minor } => ParametricSurface::new(
                SurfaceKind::Torus { major, minor },
                ParamDomain::periodic_torus(),
            ),
            SurfaceSpec::Dupin { a, b, c, d } => ParametricSurface::new(
                SurfaceKind::DupinCyclide { a, b, c, d },
                ParamDomain::periodic_torus(),
            ),
        }
    }

    fn check(&self) -> Result<()> {
        let ok = match *self {
            SurfaceSpec::Plane { half_width }
            | SurfaceSpec::Helicoid { half_width }
            | SurfaceSpec::ShearedCubic { half_width }
            | SurfaceSpec::Saddle { half_width }
            | SurfaceSpec::Paraboloid { half_width } => half_width > 0.0,
            SurfaceSpec::Torus { major, minor } => minor > 0.0 && major > minor,
            SurfaceSpec::Dupin { a, b, c, d } => [a, b, c, d].iter().all(|v| v.is_finite()),
        };
        if !ok {
            return Err(KfbiError::Config(format!(
                "invalid surface parameters {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveSpec {
    Circle {
        radius: f64,
    },
    Ellipse {
        ra: f64,
        rb: f64,
        alpha: f64,
    },
    Star {
        ra: f64,
        rb: f64,
        alpha: f64,
        epsilon: f64,
        folds: u32,
    },
}

impl CurveSpec {
    pub fn build(&self) -> ParametricCurve {
        match *self {
            CurveSpec::Circle { radius } => ParametricCurve::circle(radius),
            CurveSpec::Ellipse { ra, rb, alpha } => ParametricCurve::ellipse(ra, rb, alpha),
            CurveSpec::Star {
                ra,
                rb,
                alpha,
                epsilon,
                folds,
            } => ParametricCurve::star(ra, rb, alpha, epsilon, folds),
        }
    }
}

fn default_gmres_tol() -> f64 {
    1e-8
}

fn default_gmres_max_iter() -> usize {
    100
}

fn default_mg_tol() -> f64 {
    1e-10
}

/// One experiment: geometry, coefficients, manufactured solution and the
/// list of grid sizes to sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub surface: SurfaceSpec,
    pub curve: CurveSpec,
    pub problem: ProblemKind,
    pub kappa_plus: f64,
    #[serde(default)]
    pub kappa_minus: f64,
    #[serde(default = "one")]
    pub beta_plus: f64,
    #[serde(default = "one")]
    pub beta_minus: f64,
    pub exact: ExactId,
    pub grids: Vec<usize>,
    #[serde(default = "default_gmres_tol")]
    pub gmres_tol: f64,
    #[serde(default = "default_gmres_max_iter")]
    pub gmres_max_iter: usize,
    #[serde(default = "default_mg_tol")]
    pub mg_tol: f64,
    /// CSV destination for `convergence`.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Field dump destination for `solve` (finest grid).
    #[serde(default)]
    pub dump: Option<PathBuf>,
    #[serde(default)]
    pub parallel_rows: bool,
}

/// Grid sizes are powers of two, at least 32, so multigrid can coarsen.
pub fn check_grid_size(n: usize) -> Result<()> {
    if n < 32 || !n.is_power_of_two() {
        return Err(KfbiError::Config(format!(
            "grid size {n} must be a power of two ≥ 32"
        )));
    }
    Ok(())
}

fn one() -> f64 {
    1.0
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| KfbiError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| KfbiError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.surface.check()?;
        if self.grids.is_empty() {
            return Err(KfbiError::Config("grid list is empty".into()));
        }
        for &n in &self.grids {
            check_grid_size(n)?;
        }
        if !(self.gmres_tol > 0.0 && self.mg_tol > 0.0 && self.gmres_max_iter > 0) {
            return Err(KfbiError::Config(
                "tolerances and iteration caps must be positive".into(),
            ));
        }
        Ok(())
    }
}
