//! Closed-form homogeneous backgrounds.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::curvature::CurvatureTensor;
use crate::error::{Error, Result};

/// Volume of the unit `n`-sphere, `2π^{(n+1)/2} / Γ((n+1)/2)`.
pub fn unit_sphere_volume(n: usize) -> f64 {
    let h = (n as f64 + 1.0) / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelGeometry {
    RoundSphere {
        n: usize,
        #[serde(default = "one")]
        radius: f64,
    },
    /// Compact hyperbolic form, known only through its volume.
    HyperbolicForm { n: usize, volume: f64 },
    /// Flat torus; an empty `periods` list means unit periods.
    FlatTorus {
        n: usize,
        #[serde(default)]
        periods: Vec<f64>,
    },
    /// `a·h₁ ⊕ b·h₂` for two hyperbolic surfaces of curvature −1 with
    /// areas `v1`, `v2` at unit scale.
    HyperbolicSurfaceProduct {
        v1: f64,
        v2: f64,
        #[serde(default = "one")]
        a: f64,
        #[serde(default = "one")]
        b: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometrySummary {
    pub scalar: f64,
    pub ricci_eigenvalues: Vec<f64>,
    pub volume: f64,
    pub euler: Option<f64>,
}

impl ModelGeometry {
    pub fn dim(&self) -> usize {
        match self {
            Self::RoundSphere { n, .. }
            | Self::HyperbolicForm { n, .. }
            | Self::FlatTorus { n, .. } => *n,
            Self::HyperbolicSurfaceProduct { .. } => 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidGeometry(msg.to_string()));
        let pos = |x: f64| x.is_finite() && x > 0.0;
        if self.dim() < 2 {
            return Err(Error::InvalidDimension(self.dim()));
        }
        match self {
            Self::RoundSphere { radius, .. } if !pos(*radius) => bad("radius must be positive"),
            Self::HyperbolicForm { volume, .. } if !pos(*volume) => bad("volume must be positive"),
            Self::FlatTorus { n, periods } => {
                if !periods.is_empty() && periods.len() != *n {
                    bad("torus needs one period per dimension")
                } else if periods.iter().any(|&p| !pos(p)) {
                    bad("periods must be positive")
                } else {
                    Ok(())
                }
            }
            Self::HyperbolicSurfaceProduct { v1, v2, a, b } => {
                if [*v1, *v2, *a, *b].iter().all(|&x| pos(x)) {
                    Ok(())
                } else {
                    bad("product areas and scales must be positive")
                }
            }
            _ => Ok(()),
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        true
    }

    pub fn volume(&self) -> f64 {
        match self {
            Self::RoundSphere { n, radius } => unit_sphere_volume(*n) * radius.powi(*n as i32),
            Self::HyperbolicForm { volume, .. } => *volume,
            Self::FlatTorus { periods, .. } => periods.iter().product(),
            Self::HyperbolicSurfaceProduct { v1, v2, a, b } => a * b * v1 * v2,
        }
    }

    /// Pointwise curvature tensor in an orthonormal frame.
    pub fn curvature_tensor(&self) -> Result<CurvatureTensor> {
        self.validate()?;
        match self {
            Self::RoundSphere { n, radius } => {
                CurvatureTensor::constant_curvature(*n, radius.powi(-2))
            }
            Self::HyperbolicForm { n, .. } => CurvatureTensor::constant_curvature(*n, -1.0),
            Self::FlatTorus { n, .. } => CurvatureTensor::zeros(*n),
            Self::HyperbolicSurfaceProduct { a, b, .. } => {
                let mut raw = vec![0.0; 256];
                let at = |i: usize, j: usize, k: usize, l: usize| ((i * 4 + j) * 4 + k) * 4 + l;
                for (p, q, sec) in [(0, 1, -1.0 / a), (2, 3, -1.0 / b)] {
                    raw[at(p, q, p, q)] = sec;
                    raw[at(q, p, q, p)] = sec;
                    raw[at(p, q, q, p)] = -sec;
                    raw[at(q, p, p, q)] = -sec;
                }
                Ok(CurvatureTensor::from_raw_unchecked(4, raw))
            }
        }
    }

    pub fn ricci_eigenvalues(&self) -> Vec<f64> {
        match self {
            Self::RoundSphere { n, radius } => vec![(*n as f64 - 1.0) / (radius * radius); *n],
            Self::HyperbolicForm { n, .. } => vec![-(*n as f64 - 1.0); *n],
            Self::FlatTorus { n, .. } => vec![0.0; *n],
            Self::HyperbolicSurfaceProduct { a, b, .. } => {
                vec![-1.0 / a, -1.0 / a, -1.0 / b, -1.0 / b]
            }
        }
    }

    /// Euler characteristic where it is known in closed form. Hyperbolic
    /// 4-forms use `χ = 3V/(4π²)`; products use `χ = v1·v2/(4π²)`.
    pub fn euler_characteristic(&self) -> Option<f64> {
        match self {
            Self::RoundSphere { n, .. } => (n % 2 == 0).then_some(2.0),
            Self::FlatTorus { .. } => Some(0.0),
            Self::HyperbolicForm { n: 4, volume } => Some(3.0 * volume / (4.0 * PI * PI)),
            Self::HyperbolicForm { .. } => None,
            Self::HyperbolicSurfaceProduct { v1, v2, .. } => Some(v1 * v2 / (4.0 * PI * PI)),
        }
    }

    pub fn summary(&self) -> Result<GeometrySummary> {
        self.validate()?;
        let ricci_eigenvalues = self.ricci_eigenvalues();
        Ok(GeometrySummary {
            scalar: ricci_eigenvalues.iter().sum(),
            ricci_eigenvalues,
            volume: self.volume(),
            euler: self.euler_characteristic(),
        })
    }

    /// Unit periods are filled in when `periods` is empty.
    pub fn normalized(mut self) -> Self {
        if let Self::FlatTorus { n, periods } = &mut self {
            if periods.is_empty() {
                *periods = vec![1.0; *n];
            }
        }
        self
    }
}
