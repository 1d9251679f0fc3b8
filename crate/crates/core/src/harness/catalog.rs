use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bie::ProblemKind;
use crate::geometry::{Point2, Vec3};
use crate::harness::config::{CurveSpec, ExperimentConfig, SurfaceSpec};
use crate::interface::Side;

/// Manufactured exact solutions. Each is smooth on the whole parameter
/// domain on both sides so one-sided data can be sampled anywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactId {
    Zero,
    /// `exp((2x + y)/7) cos((x − 3y)/7)` on both sides.
    ExpCos,
    /// `sin x sin y sin z` inside, `(x² − z − 1)(y² + z − 1)` outside.
    Helicoid,
    /// `z eˣ cos y` inside, `z eʸ sin x` outside.
    Saddle,
    /// `cos(x + y) sin z` inside, `(x² − 1)(y² − 1)` outside.
    Paraboloid,
    /// `sin u cos v` inside, `cos u sin v` outside (parameter coordinates).
    Torus,
    /// `sin u sin v` inside, `cos u cos v` outside (parameter coordinates).
    Dupin,
}

impl ExactId {
    /// Value of the `side` solution at embedded point `x` with parameter `p`.
    pub fn eval(self, side: Side, x: Vec3, p: Point2) -> f64 {
        let (a, b, c) = (x[0], x[1], x[2]);
        let inside = side == Side::Plus;
        match self {
            ExactId::Zero => 0.0,
            ExactId::ExpCos => ((2.0 * a + b) / 7.0).exp() * ((a - 3.0 * b) / 7.0).cos(),
            ExactId::Helicoid if inside => a.sin() * b.sin() * c.sin(),
            ExactId::Helicoid => (a * a - c - 1.0) * (b * b + c - 1.0),
            ExactId::Saddle if inside => c * a.exp() * b.cos(),
            ExactId::Saddle => c * b.exp() * a.sin(),
            ExactId::Paraboloid if inside => (a + b).cos() * c.sin(),
            ExactId::Paraboloid => (a * a - 1.0) * (b * b - 1.0),
            ExactId::Torus if inside => p[0].sin() * p[1].cos(),
            ExactId::Torus => p[0].cos() * p[1].sin(),
            ExactId::Dupin if inside => p[0].sin() * p[1].sin(),
            ExactId::Dupin => p[0].cos() * p[1].cos(),
        }
    }
}

/// Reference values reported for a preset at a given grid size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub n: usize,
    pub max_error: f64,
    pub gmres_iterations: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Preset {
    pub config: ExperimentConfig,
    pub description: &'static str,
    pub reference: Vec<ReferenceRow>,
}

fn row(n: usize, max_error: f64, iters: Option<usize>) -> ReferenceRow {
    ReferenceRow {
        n,
        max_error,
        gmres_iterations: iters,
    }
}

#[allow(clippy::too_many_arguments)]
fn config(
    name: &str,
    surface: SurfaceSpec,
    curve: CurveSpec,
    problem: ProblemKind,
    kappa: (f64, f64),
    beta: (f64, f64),
    exact: ExactId,
) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        surface,
        curve,
        problem,
        kappa_plus: kappa.0,
        kappa_minus: kappa.1,
        beta_plus: beta.0,
        beta_minus: beta.1,
        exact,
        grids: vec![64, 128, 256],
        gmres_tol: 1e-8,
        gmres_max_iter: 100,
        mg_tol: 1e-10,
        output: None,
        dump: None,
        parallel_rows: false,
    }
}

const EX1_CURVE: CurveSpec = CurveSpec::Ellipse {
    ra: 0.7,
    rb: 0.4,
    alpha: 3.0 * PI / 5.0,
};

const SADDLE_CURVE: CurveSpec = CurveSpec::Star {
    ra: 0.7,
    rb: 0.4,
    alpha: 6.0 * PI / 7.0,
    epsilon: 0.3,
    folds: 3,
};

fn saddle(name: &str, kappa: (f64, f64), beta: (f64, f64)) -> ExperimentConfig {
    config(
        name,
        SurfaceSpec::Saddle { half_width: 1.0 },
        SADDLE_CURVE,
        ProblemKind::InterfaceEqualRatio,
        kappa,
        beta,
        ExactId::Saddle,
    )
}

/// Every built-in example, in catalog order.
pub fn presets() -> Vec<Preset> {
    let cubic = SurfaceSpec::ShearedCubic { half_width: 1.0 };
    vec![
        Preset {
            config: config(
                "ex1-dirichlet",
                cubic,
                EX1_CURVE,
                ProblemKind::DirichletBvp,
                (5.0, 5.0),
                (1.0, 1.0),
                ExactId::ExpCos,
            ),
            description: "Dirichlet BVP on the sheared cubic surface, rotated ellipse",
            reference: vec![
                row(64, 5.56e-4, Some(7)),
                row(128, 8.97e-5, Some(6)),
                row(256, 2.08e-5, Some(5)),
            ],
        },
        Preset {
            config: config(
                "ex1-neumann",
                cubic,
                EX1_CURVE,
                ProblemKind::NeumannBvp,
                (5.0, 5.0),
                (1.0, 1.0),
                ExactId::ExpCos,
            ),
            description: "Neumann BVP on the sheared cubic surface, rotated ellipse",
            reference: vec![row(128, 3.37e-2, None), row(256, 1.02e-2, None)],
        },
        Preset {
            config: config(
                "ex2-helicoid",
                SurfaceSpec::Helicoid { half_width: 1.0 },
                CurveSpec::Circle { radius: 0.5 },
                ProblemKind::InterfaceEqualRatio,
                (1.0, 1.0),
                (1.0, 1.0),
                ExactId::Helicoid,
            ),
            description: "interface problem on the helicoid, κ/β = 1",
            reference: vec![row(128, 8.70e-5, None), row(256, 2.36e-5, None)],
        },
        Preset {
            config: saddle("ex3-c-1", (1.2e3, 8e2), (1.2, 0.8)),
            description: "saddle, κ/β = 1e3 with β = 1.2/0.8",
            reference: vec![row(128, 7.15e-5, None)],
        },
        Preset {
            config: saddle("ex3-c-2", (1.2e-3, 8e-4), (1.2, 0.8)),
            description: "saddle, κ/β = 1e-3 with β = 1.2/0.8",
            reference: vec![row(128, 7.40e-4, None)],
        },
        Preset {
            config: saddle("ex3-c-3", (2.0, 0.7), (2e-3, 7e-4)),
            description: "saddle, κ/β = 1e3 with tiny β",
            reference: vec![row(128, 7.22e-5, None)],
        },
        Preset {
            config: saddle("ex3-c-4", (2.0, 0.7), (2e3, 7e2)),
            description: "saddle, κ/β = 1e-3 with large β",
            reference: vec![row(128, 9.97e-4, None)],
        },
        Preset {
            config: saddle("ex3-q-0.001", (1.0, 1000.0), (1.0, 1000.0)),
            description: "saddle, β⁺/β⁻ = 0.001, κ = β",
            reference: vec![],
        },
        Preset {
            config: saddle("ex3-q-0.5", (1.0, 2.0), (1.0, 2.0)),
            description: "saddle, β⁺/β⁻ = 0.5, κ = β",
            reference: vec![row(256, 1.18e-4, Some(10))],
        },
        Preset {
            config: saddle("ex3-q-1000", (1.0, 0.001), (1.0, 0.001)),
            description: "saddle, β⁺/β⁻ = 1000, κ = β",
            reference: vec![],
        },
        Preset {
            config: config(
                "ex4-paraboloid",
                SurfaceSpec::Paraboloid { half_width: 1.4 },
                CurveSpec::Star {
                    ra: 0.7,
                    rb: 0.7,
                    alpha: 11.0 * PI / 13.0,
                    epsilon: 0.3,
                    folds: 5,
                },
                ProblemKind::InterfaceGeneric,
                (3.0, 0.5),
                (1.0, 1.0),
                ExactId::Paraboloid,
            ),
            description: "interface problem on the elliptic paraboloid, κ⁺/β⁺ = 3, κ⁻/β⁻ = 0.5",
            reference: vec![row(128, 8.66e-4, Some(10)), row(256, 1.96e-4, Some(9))],
        },
        Preset {
            config: config(
                "ex5-torus",
                SurfaceSpec::Torus {
                    major: 2.0,
                    minor: 0.8,
                },
                CurveSpec::Ellipse {
                    ra: 1.0,
                    rb: 0.6,
                    alpha: 9.0 * PI / 13.0,
                },
                ProblemKind::InterfaceGeneric,
                (2.0, 0.5),
                (2.0, 0.5),
                ExactId::Torus,
            ),
            description: "interface problem on the torus, elliptic interface",
            reference: vec![
                row(64, 1.37e-2, Some(17)),
                row(128, 2.12e-3, Some(17)),
                row(256, 3.56e-4, Some(17)),
            ],
        },
        Preset {
            config: config(
                "ex5-torus-star",
                SurfaceSpec::Torus {
                    major: 2.0,
                    minor: 0.8,
                },
                CurveSpec::Star {
                    ra: 0.6,
                    rb: 0.6,
                    alpha: PI / 4.0,
                    epsilon: 0.4,
                    folds: 3,
                },
                ProblemKind::InterfaceGeneric,
                (2.0, 0.5),
                (2.0, 0.5),
                ExactId::Torus,
            ),
            description: "interface problem on the torus, star interface",
            reference: vec![],
        },
        Preset {
            config: config(
                "ex6-dupin",
                SurfaceSpec::Dupin {
                    a: 1.0,
                    b: 1.0,
                    c: -0.3,
                    d: 0.5,
                },
                CurveSpec::Circle { radius: 1.0 },
                ProblemKind::InterfaceGeneric,
                (3.0, 0.8),
                (3.0, 0.8),
                ExactId::Dupin,
            ),
            description: "interface problem on the Dupin cyclide, unit circle",
            reference: vec![
                row(64, 7.44e-3, Some(8)),
                row(128, 1.95e-3, Some(8)),
                row(256, 5.03e-4, Some(8)),
            ],
        },
    ]
}

pub fn preset(name: &str) -> Option<Preset> {
    presets().into_iter().find(|p| p.config.name == name)
}
