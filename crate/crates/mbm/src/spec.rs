//! JSON experiment specifications.

use mbm_core::coupling::RegionParams;
use mbm_core::reduced::ReducedParams;
use mbm_core::surface::MinimalGraph;
use mbm_core::{Point2, Surface};
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Simulate,
    Hitting,
    Harmonic,
    CrossCheck,
    CouplingVerify,
    CalibrateRegions,
    Reduced,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Hitting => "hitting",
            ExperimentKind::Harmonic => "harmonic",
            ExperimentKind::CrossCheck => "cross-check",
            ExperimentKind::CouplingVerify => "coupling-verify",
            ExperimentKind::CalibrateRegions => "calibrate-regions",
            ExperimentKind::Reduced => "reduced",
        }
    }
}

/// A bounded function on boundary points, averaged over exit locations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum BoundaryFunctional {
    Constant { value: f64 },
    /// Indicator of `y > 0`.
    UpperHalf,
    /// Indicator of the polar angle of the exit point lying in `[lo, hi)`, angles
    /// taken in `[0, 2π)`.
    AngleInRange { lo: f64, hi: f64 },
}

impl BoundaryFunctional {
    pub fn eval(&self, p: Point2) -> f64 {
        match *self {
            BoundaryFunctional::Constant { value } => value,
            BoundaryFunctional::UpperHalf => f64::from(p.y > 0.0),
            BoundaryFunctional::AngleInRange { lo, hi } => {
                let a = p.y.atan2(p.x).rem_euclid(std::f64::consts::TAU);
                f64::from(a >= lo && a < hi)
            }
        }
    }

    pub fn is_indicator(&self) -> bool {
        !matches!(self, BoundaryFunctional::Constant { .. })
    }
}

/// Settings of the pathwise Bessel comparison run alongside a reduced experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BesselSpec {
    pub paths: u64,
    pub r0: f64,
    pub dtau: f64,
    pub horizon: f64,
    /// Volatility of the great-circle coordinates driving `(f, g)`.
    pub vol: f64,
    pub theta0: f64,
    pub phi0: f64,
}

impl Default for BesselSpec {
    fn default() -> Self {
        Self {
            paths: 1000,
            r0: 5.0,
            dtau: 1e-4,
            horizon: 1.0,
            vol: 1.0,
            theta0: 0.3,
            phi0: -1.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<String>,
}

impl OutputSpec {
    pub fn is_empty(&self) -> bool {
        self.csv.is_none() && self.summary.is_none()
    }
}

pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_GRID: usize = 1000;
pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_DELTA: f64 = 0.01;
pub const DEFAULT_BOOTSTRAP: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<Surface>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<[f64; 2]>,
    /// Surface-time step of the graph simulator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Chart-time step of the conformal simulator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dvarsigma: Option<f64>,
    /// `s`-time step of the reduced engine.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ds: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    /// Extra times at which hitting probabilities and clocks are reported.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checkpoints: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundaryFunctional>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regions: Option<RegionParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduced: Option<ReducedParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bessel: Option<BesselSpec>,
    #[serde(default, skip_serializing_if = "OutputSpec::is_empty")]
    pub output: OutputSpec,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            surface: None,
            start: None,
            dt: None,
            dvarsigma: None,
            ds: None,
            horizon: None,
            paths: None,
            seed: 0,
            checkpoints: Vec::new(),
            boundary: None,
            grid: None,
            samples: None,
            regions: None,
            reduced: None,
            delta: None,
            rho0: None,
            psi0: None,
            bootstrap: None,
            bessel: None,
            output: OutputSpec::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let spec: Self =
            serde_json::from_str(text).map_err(|e| HarnessError::config(format!("invalid spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("specs always serialize")
    }

    pub fn dt(&self) -> f64 {
        self.dt.unwrap_or(DEFAULT_STEP)
    }

    pub fn dvarsigma(&self) -> f64 {
        self.dvarsigma.unwrap_or(DEFAULT_STEP)
    }

    pub fn ds(&self) -> f64 {
        self.ds.unwrap_or(DEFAULT_STEP)
    }

    pub fn surface(&self) -> Result<Surface, HarnessError> {
        self.surface
            .ok_or_else(|| HarnessError::config(format!("{} needs a `surface`", self.kind.name())))
    }

    pub fn start(&self) -> Result<Point2, HarnessError> {
        self.start
            .map(Point2::from)
            .ok_or_else(|| HarnessError::config(format!("{} needs a `start` point", self.kind.name())))
    }

    pub fn horizon(&self) -> Result<f64, HarnessError> {
        self.horizon
            .ok_or_else(|| HarnessError::config(format!("{} needs a `horizon`", self.kind.name())))
    }

    pub fn paths(&self) -> Result<u64, HarnessError> {
        self.paths
            .ok_or_else(|| HarnessError::config(format!("{} needs `paths`", self.kind.name())))
    }

    /// Checks required fields, positivity of step sizes and horizons, `paths ≥ 1` and
    /// that the start point is interior.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => Err(HarnessError::config(format!(
                "`{name}` must be positive and finite, got {x}"
            ))),
            _ => Ok(()),
        };
        positive("dt", self.dt)?;
        positive("dvarsigma", self.dvarsigma)?;
        positive("ds", self.ds)?;
        positive("horizon", self.horizon)?;
        positive("delta", self.delta)?;
        if self.paths == Some(0) {
            return Err(HarnessError::config("`paths` must be at least 1"));
        }
        for &c in &self.checkpoints {
            positive("checkpoints", Some(c))?;
        }
        if let Some(Surface::Scherk { half_width }) = self.surface {
            Surface::scherk(half_width)?;
        }
        match self.kind {
            ExperimentKind::Simulate
            | ExperimentKind::Hitting
            | ExperimentKind::Harmonic
            | ExperimentKind::CrossCheck => {
                let surface = self.surface()?;
                let start = self.start()?;
                self.horizon()?;
                self.paths()?;
                if !surface.contains(start) {
                    return Err(HarnessError::config(format!(
                        "start ({}, {}) is not interior to {}",
                        start.x,
                        start.y,
                        surface.name()
                    )));
                }
                if self.kind == ExperimentKind::Harmonic && self.boundary.is_none() {
                    return Err(HarnessError::config("harmonic needs a `boundary` functional"));
                }
            }
            ExperimentKind::CouplingVerify => {
                if self.grid == Some(0) {
                    return Err(HarnessError::config("`grid` must be at least 1"));
                }
            }
            ExperimentKind::CalibrateRegions => {
                self.regions.unwrap_or_default().validate()?;
                if self.samples.unwrap_or(DEFAULT_SAMPLES) < 1000 {
                    return Err(HarnessError::config("`samples` must be at least 1000"));
                }
            }
            ExperimentKind::Reduced => {
                self.horizon()?;
                self.paths()?;
                self.reduced.unwrap_or_default().validate()?;
                if let Some(b) = &self.bessel {
                    positive("bessel.r0", Some(b.r0))?;
                    positive("bessel.dtau", Some(b.dtau))?;
                    positive("bessel.horizon", Some(b.horizon))?;
                    if b.paths == 0 {
                        return Err(HarnessError::config("`bessel.paths` must be at least 1"));
                    }
                }
            }
        }
        Ok(())
    }
}
