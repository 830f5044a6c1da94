//! Parameter files. Every struct rejects unknown keys; durations and rates
//! are strings with units (`"350ns"`, `"100us"`, `"200MHz"`).

use std::fs;
use std::path::Path;

use phonon_qram::router::Source;
use phonon_qram::units::{AngularRate, Time};
use phonon_qram::wavepackets::{PulseShape, ScatteringTransition};
use phonon_qram::Encoding;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn ns(v: f64) -> Time {
    Time::from_ns(v)
}

fn us(v: f64) -> Time {
    Time::from_us(v)
}

fn mhz(v: f64) -> AngularRate {
    AngularRate::from_cyclic_mhz(v)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RouteFidelityConfig {
    pub fwhm: Time,
    pub shapes: Vec<PulseShape>,
    pub transition: ScatteringTransition,
    /// κ_max grid for the closed-form sweep.
    pub kappas: Vec<AngularRate>,
    /// Also run the long-window time-domain simulation at each κ_max.
    pub time_domain: bool,
    /// κ_max used for the window sweep.
    pub window_kappa: AngularRate,
    pub windows: Vec<Time>,
}

impl Default for RouteFidelityConfig {
    fn default() -> Self {
        let points = 13;
        let kappas = (0..points)
            .map(|i| mhz(10.0 * 100f64.powf(i as f64 / (points - 1) as f64)))
            .collect();
        RouteFidelityConfig {
            fwhm: ns(50.0),
            shapes: vec![PulseShape::Gaussian, PulseShape::Sech],
            transition: ScatteringTransition::default(),
            kappas,
            time_domain: true,
            window_kappa: mhz(200.0),
            windows: (0..17).map(|i| ns(100.0 + 25.0 * i as f64)).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RouterSimCliConfig {
    pub shape: PulseShape,
    pub fwhm: Time,
    pub kappa_max: AngularRate,
    pub transition: ScatteringTransition,
    pub window: Time,
    pub dt: Option<Time>,
    /// Control amplitudes `[[re, im], [re, im]]` on `|g⟩`, `|e⟩`.
    pub control: [[f64; 2]; 2],
    pub source: Source,
}

impl Default for RouterSimCliConfig {
    fn default() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        RouterSimCliConfig {
            shape: PulseShape::Gaussian,
            fwhm: ns(50.0),
            kappa_max: mhz(200.0),
            transition: ScatteringTransition::default(),
            window: ns(350.0),
            dt: None,
            control: [[h, 0.0], [h, 0.0]],
            source: Source::Left,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeSpec {
    Classical,
    Quantum,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DataSpec {
    Bits(Vec<u8>),
    /// One `[[re, im], [re, im]]` qubit per cell.
    Qubits(Vec<[[f64; 2]; 2]>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuerySimConfig {
    pub n: u32,
    pub encoding: Encoding,
    pub t: Time,
    pub t_f: Time,
    pub mode: ModeSpec,
    pub data: DataSpec,
    /// Basis addresses as bit strings, most significant first. Empty scans all.
    pub addresses: Vec<String>,
    /// Optional address superposition `[[re, im], ...]` of length `2^n`.
    pub superposition: Option<Vec<[f64; 2]>>,
    /// Include the gate trace of the first query.
    pub trace: bool,
}

impl Default for QuerySimConfig {
    fn default() -> Self {
        QuerySimConfig {
            n: 2,
            encoding: Encoding::HybridDualRail,
            t: ns(350.0),
            t_f: Time::ZERO,
            mode: ModeSpec::Classical,
            data: DataSpec::Bits(vec![0, 1, 1, 0]),
            addresses: Vec::new(),
            superposition: None,
            trace: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeraldingConfig {
    pub n_min: u32,
    pub n_max: u32,
    pub t: Time,
    pub t1_q: Time,
    pub t1_m: Vec<Time>,
    pub encoding: Encoding,
    pub t2_q: Vec<Time>,
    pub t2_m: Time,
}

impl Default for HeraldingConfig {
    fn default() -> Self {
        HeraldingConfig {
            n_min: 1,
            n_max: 10,
            t: ns(350.0),
            t1_q: us(100.0),
            t1_m: vec![us(0.5), us(2.0), us(10.0), Time::INFINITE],
            encoding: Encoding::HybridDualRail,
            t2_q: vec![us(20.0), us(50.0), us(100.0), us(200.0), us(500.0)],
            t2_m: Time::INFINITE,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridPoint {
    pub n: u32,
    pub encoding: Encoding,
    pub t1_q: Time,
    pub t1_m: Time,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarloConfig {
    pub t: Time,
    pub trials: u64,
    pub grid: Vec<GridPoint>,
    /// Fully propagated trajectories logged per grid point.
    pub verdicts_per_point: u64,
    pub n_th: f64,
    pub t2_q: Time,
    pub t2_m: Time,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        let mut grid = Vec::new();
        for (n, t1_q, t1_m) in [(2, 100.0, 100.0), (4, 100.0, 2.0), (7, 100.0, 2.0), (5, 50.0, 10.0), (3, 100.0, 0.5), (6, 20.0, 20.0)] {
            for encoding in [Encoding::HybridDualRail, Encoding::StandardDualRailVacuum] {
                grid.push(GridPoint { n, encoding, t1_q: us(t1_q), t1_m: us(t1_m) });
            }
        }
        MonteCarloConfig {
            t: ns(350.0),
            trials: 100_000,
            grid,
            verdicts_per_point: 100,
            n_th: 0.0,
            t2_q: Time::INFINITE,
            t2_m: Time::INFINITE,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleConfig {
    pub depths: Vec<u32>,
    pub encodings: Vec<Encoding>,
    pub t: Time,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            depths: vec![4],
            encodings: vec![Encoding::HybridDualRail, Encoding::StandardDualRailVacuum],
            t: ns(350.0),
        }
    }
}
