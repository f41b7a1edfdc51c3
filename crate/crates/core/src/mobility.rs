//! Compact normal-walk mobility model on a hexagonal lattice.
//!
//! Every step rotates the previous move anticlockwise by a drift angle
//! `θ ~ N(0°, σ²)` restricted to `(−270°, 270°)`. The drift angle is mapped
//! onto one of six relative directions (`B, R, Fr, F, Fl, L`) using three
//! confining angles derived from the cell's inner and outer radii.
//!
//! Direction probabilities use the zero-to-z area `A(z) = Φ(z) − ½` of the
//! standard normal. Reading the table's symbol as the density `φ` yields
//! negative entries, so the cumulative-area reading is the one implemented
//! here. The back-turn probability `b` is taken as the residual so that the
//! six entries sum to one exactly.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hex::HexCoord;

pub const SIGMA_MIN_DEG: f64 = 5.0;
pub const SIGMA_MAX_DEG: f64 = 90.0;

/// Open support of the drift angle, in degrees.
pub const DRIFT_LIMIT_DEG: f64 = 270.0;

/// Parameters of the drift-angle distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityParams {
    sigma_deg: f64,
}

impl MobilityParams {
    pub fn new(sigma_deg: f64) -> Result<Self> {
        if !(SIGMA_MIN_DEG..=SIGMA_MAX_DEG).contains(&sigma_deg) {
            return Err(Error::SigmaOutOfRange(sigma_deg));
        }
        Ok(Self { sigma_deg })
    }

    pub fn sigma_deg(&self) -> f64 {
        self.sigma_deg
    }

    /// The mean drift angle is always zero.
    pub fn mean_deg(&self) -> f64 {
        0.0
    }
}

/// Inner (apothem) and outer (circumradius) radii of a hexagonal cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGeometry {
    ri: f64,
    ro: f64,
}

impl CellGeometry {
    pub fn new(ri: f64, ro: f64) -> Result<Self> {
        if !(ri.is_finite() && ro.is_finite() && ri > 0.0 && ro > ri) {
            return Err(Error::InvalidGeometry { ri, ro });
        }
        Ok(Self { ri, ro })
    }

    /// Regular hexagon with the given inner radius, `ro = 2·ri/√3`.
    pub fn regular(ri: f64) -> Result<Self> {
        Self::new(ri, 2.0 * ri / 3f64.sqrt())
    }

    pub fn ri(&self) -> f64 {
        self.ri
    }

    pub fn ro(&self) -> f64 {
        self.ro
    }
}

impl Default for CellGeometry {
    fn default() -> Self {
        Self {
            ri: 1.0,
            ro: 2.0 / 3f64.sqrt(),
        }
    }
}

/// Band boundaries (degrees) separating the six relative directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfiningAngles {
    pub ang_f: f64,
    pub ang_fl: f64,
    pub ang_l: f64,
}

impl Default for ConfiningAngles {
    fn default() -> Self {
        confining_angles(&CellGeometry::default())
    }
}

pub fn confining_angles(geom: &CellGeometry) -> ConfiningAngles {
    ConfiningAngles {
        ang_f: (geom.ro / (4.0 * geom.ri)).atan().to_degrees(),
        ang_fl: (geom.ro / geom.ri).atan().to_degrees(),
        // atan(∞)
        ang_l: 90.0,
    }
}

/// A drift angle standardized by σ.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ZScore(f64);

impl ZScore {
    pub fn new(z: f64) -> Result<Self> {
        if !z.is_finite() {
            return Err(Error::NonFinite("z"));
        }
        Ok(Self(z))
    }

    pub fn standardize(theta_deg: f64, params: &MobilityParams) -> Result<Self> {
        Self::new(theta_deg / params.sigma_deg)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Direction relative to the inlet the station is currently crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelativeDirection {
    Back = 0,
    Right = 1,
    FrontRight = 2,
    Front = 3,
    FrontLeft = 4,
    Left = 5,
}

impl RelativeDirection {
    pub const ALL: [RelativeDirection; 6] = [
        RelativeDirection::Back,
        RelativeDirection::Right,
        RelativeDirection::FrontRight,
        RelativeDirection::Front,
        RelativeDirection::FrontLeft,
        RelativeDirection::Left,
    ];

    pub fn from_index(k: usize) -> Result<Self> {
        Self::ALL.get(k).copied().ok_or(Error::InvalidDirection(k))
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Heading rotation in lattice steps (anticlockwise positive).
    pub fn rotation(self) -> i32 {
        self as i32 - 3
    }

    pub fn label(self) -> &'static str {
        match self {
            RelativeDirection::Back => "B",
            RelativeDirection::Right => "R",
            RelativeDirection::FrontRight => "Fr",
            RelativeDirection::Front => "F",
            RelativeDirection::FrontLeft => "Fl",
            RelativeDirection::Left => "L",
        }
    }
}

impl fmt::Display for RelativeDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Handoff probabilities for the six relative directions, indexed by `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionProbabilities {
    p: [f64; 6],
}

impl DirectionProbabilities {
    /// Builds a table from raw values. Used for degenerate or externally
    /// supplied distributions; entries must be nonnegative and sum to one.
    pub fn from_array(p: [f64; 6]) -> Result<Self> {
        let sum: f64 = p.iter().sum();
        if p.iter().any(|v| !v.is_finite() || *v < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidProbabilities);
        }
        Ok(Self { p })
    }

    pub fn get(&self, k: RelativeDirection) -> f64 {
        self.p[k.index()]
    }

    pub fn as_array(&self) -> [f64; 6] {
        self.p
    }

    pub fn sum(&self) -> f64 {
        self.p.iter().sum()
    }

    fn cumulative(&self) -> [f64; 6] {
        let mut acc = 0.0;
        let mut cdf = [0.0; 6];
        for (c, p) in cdf.iter_mut().zip(self.p) {
            acc += p;
            *c = acc;
        }
        cdf
    }
}

/// Standard normal cumulative distribution function.
pub fn std_normal_cdf(z: ZScore) -> f64 {
    0.5 * libm::erfc(-z.0 * FRAC_1_SQRT_2)
}

/// Area under the standard normal density between 0 and `z`.
fn zero_to_z_area(z: f64) -> f64 {
    0.5 * libm::erf(z * FRAC_1_SQRT_2)
}

/// Density of the drift angle, per degree, on the open interval (−270°, 270°).
pub fn drift_density(theta_deg: f64, params: &MobilityParams) -> Result<f64> {
    check_drift_angle(theta_deg)?;
    let sigma = params.sigma_deg;
    let z = theta_deg / sigma;
    Ok((-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * sigma))
}

fn check_drift_angle(theta_deg: f64) -> Result<()> {
    if theta_deg.is_finite() && theta_deg.abs() < DRIFT_LIMIT_DEG {
        Ok(())
    } else {
        Err(Error::DriftAngleOutOfRange(theta_deg))
    }
}

pub fn direction_probabilities(
    params: &MobilityParams,
    angles: &ConfiningAngles,
) -> DirectionProbabilities {
    let sigma = params.sigma_deg;
    let a_f = zero_to_z_area(angles.ang_f / sigma);
    let a_fl = zero_to_z_area(angles.ang_fl / sigma);
    let a_l = zero_to_z_area(angles.ang_l / sigma);

    let f = 2.0 * a_f;
    let fl = a_fl - a_f;
    let l = a_l - a_fl;
    // Residual absorbs the tail beyond ±270° so the table is exactly normalized.
    let b = (1.0 - (f + 2.0 * fl + 2.0 * l)).max(0.0);

    DirectionProbabilities {
        p: [b, l, fl, f, fl, l],
    }
}

/// Draws a drift angle from `N(0, σ²)` restricted to (−270°, 270°).
pub fn sample_drift_angle<R: Rng + ?Sized>(rng: &mut R, params: &MobilityParams) -> f64 {
    loop {
        let z: f64 = rng.sample(StandardNormal);
        let theta = z * params.sigma_deg;
        if theta.abs() < DRIFT_LIMIT_DEG {
            return theta;
        }
    }
}

/// Maps a drift angle onto a relative direction. Positive angles turn left.
pub fn classify_angle(theta_deg: f64, angles: &ConfiningAngles) -> Result<RelativeDirection> {
    check_drift_angle(theta_deg)?;
    let mag = theta_deg.abs();
    let left = theta_deg > 0.0;
    let dir = if mag < angles.ang_f {
        RelativeDirection::Front
    } else if mag < angles.ang_fl {
        if left {
            RelativeDirection::FrontLeft
        } else {
            RelativeDirection::FrontRight
        }
    } else if mag < angles.ang_l {
        if left {
            RelativeDirection::Left
        } else {
            RelativeDirection::Right
        }
    } else {
        RelativeDirection::Back
    };
    Ok(dir)
}

/// Categorical draw over the direction table.
pub fn sample_direction<R: Rng + ?Sized>(
    rng: &mut R,
    probs: &DirectionProbabilities,
) -> RelativeDirection {
    let u: f64 = rng.random::<f64>() * probs.sum();
    let cdf = probs.cumulative();
    for (k, c) in cdf.iter().enumerate() {
        if u < *c && probs.p[k] > 0.0 {
            return RelativeDirection::ALL[k];
        }
    }
    // u landed on the rounding slack at the top; fall back to the last live entry.
    let k = probs.p.iter().rposition(|p| *p > 0.0).unwrap_or(3);
    RelativeDirection::ALL[k]
}

/// Position and absolute heading of a walker on the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WalkerState {
    pub cell: HexCoord,
    heading: u8,
}

impl WalkerState {
    pub fn new(cell: HexCoord, heading: u8) -> Result<Self> {
        if heading > 5 {
            return Err(Error::InvalidHeading(heading));
        }
        Ok(Self { cell, heading })
    }

    pub fn heading(&self) -> u8 {
        self.heading
    }
}

/// Turns the heading by the relative direction, then steps to the neighbor.
pub fn advance(state: WalkerState, k: RelativeDirection) -> WalkerState {
    let heading = (state.heading as i32 + k.rotation()).rem_euclid(6) as u8;
    WalkerState {
        cell: state.cell.neighbor(heading),
        heading,
    }
}
