//! Closed-form device physics: the conveyor drive waveform, screening-gate
//! displacement, singlet-triplet precession frequency and the valley-mixture
//! algebra relating g-factor pairs to the intervalley coupling phase.
//!
//! Everything here is a pure function of its inputs. Units at the API
//! boundary: energies in µeV, lengths in nm, fields in T, times in ns
//! (drive waveforms take seconds since they live on the AWG time base).

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default absolute electron g-factor; only g-factor differences are
/// observable downstream.
pub const DEFAULT_G0: f64 = 2.0;

/// Default maximum valley-induced g-deviation (peak-to-peak 3e-3).
pub const DEFAULT_DELTA_G_MAX: f64 = 1.5e-3;

/// CODATA 2018 values used for all unit conversions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Bohr magneton in J/T.
    pub mu_b: f64,
    /// Reduced Planck constant in J·s.
    pub hbar: f64,
    /// Planck constant in J·s.
    pub h: f64,
}

impl PhysicalConstants {
    pub fn codata2018() -> Self {
        let h = 6.62607015e-34;
        PhysicalConstants {
            mu_b: 9.2740100783e-24,
            hbar: h / TAU,
            h,
        }
    }

    /// Checks the h = 2π·ħ identity to 1e-12 relative.
    pub fn validate(&self) -> Result<()> {
        let rel = (self.h - TAU * self.hbar).abs() / self.h;
        if rel > 1e-12 {
            return Err(Error::invalid(format!(
                "inconsistent Planck constants: |h - 2π·ħ|/h = {rel:e}"
            )));
        }
        if self.mu_b <= 0.0 || self.h <= 0.0 {
            return Err(Error::invalid("physical constants must be positive"));
        }
        Ok(())
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::codata2018()
    }
}

/// Complex intervalley coupling Δ = Δre + i·Δim in µeV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexCoupling {
    pub re: f64,
    pub im: f64,
}

impl ComplexCoupling {
    pub const ZERO: ComplexCoupling = ComplexCoupling { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Self {
        ComplexCoupling { re, im }
    }

    pub fn from_polar(magnitude: f64, phi: f64) -> Self {
        ComplexCoupling {
            re: magnitude * phi.cos(),
            im: magnitude * phi.sin(),
        }
    }

    /// |Δ| in µeV.
    pub fn magnitude(&self) -> f64 {
        self.re.hypot(self.im)
    }

    /// Valley phase in (−π, π]; 0 by convention when |Δ| = 0.
    pub fn phase(&self) -> f64 {
        if self.re == 0.0 && self.im == 0.0 {
            return 0.0;
        }
        let p = self.im.atan2(self.re);
        if p == -PI {
            PI
        } else {
            p
        }
    }
}

/// The two valley-resolved g-factors g± = g0 ± δg_max·cos φ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GFactorPair {
    pub g_plus: f64,
    pub g_minus: f64,
}

/// Which quantum dot hosts the valley-state mixture.
///
/// The observable frequency pair is identical in both scenarios (that is
/// exactly why the measurement cannot tell them apart at fixed position);
/// the distinction only matters for interpreting position-dependent
/// population switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    /// The shuttled dot occupies both valley states; the inert dot is pure.
    ShuttledMixed,
    /// The inert dot occupies both valley states; the shuttled dot is pure.
    InertMixed,
}

/// Valley-mixture scenario parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    /// |δg_i|, the inert dot's valley g-deviation modulus.
    pub delta_g_i: f64,
    /// Occupation probabilities (w₊, w₋) of the mixed dot's valley states.
    pub occupation_weights: (f64, f64),
    pub g0: f64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let (wp, wm) = self.occupation_weights;
        if wp < 0.0 || wm < 0.0 || (wp + wm - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "occupation weights must be non-negative and sum to 1, got ({wp}, {wm})"
            )));
        }
        if self.delta_g_i < 0.0 {
            return Err(Error::invalid("delta_g_i must be non-negative"));
        }
        Ok(())
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            scenario: Scenario::ShuttledMixed,
            delta_g_i: DEFAULT_DELTA_G_MAX,
            occupation_weights: (0.7, 0.3),
            g0: DEFAULT_G0,
        }
    }
}

/// Sinusoidal four-phase conveyor drive parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    /// Drive frequency in Hz.
    pub frequency_hz: f64,
    /// Drive amplitudes A₁..A₄ in mV.
    pub amplitudes_mv: [f64; 4],
    /// Static offsets B₁..B₄ in mV.
    pub offsets_mv: [f64; 4],
    /// Shuttle velocity in m/s; must equal frequency · pitch.
    pub velocity_m_per_s: f64,
    /// Distance travelled per drive period in nm.
    pub pitch_nm: f64,
}

impl DriveParams {
    /// Builds a drive with the velocity derived from frequency and pitch.
    pub fn new(
        frequency_hz: f64,
        amplitudes_mv: [f64; 4],
        offsets_mv: [f64; 4],
        pitch_nm: f64,
    ) -> Self {
        DriveParams {
            frequency_hz,
            amplitudes_mv,
            offsets_mv,
            velocity_m_per_s: frequency_hz * pitch_nm * 1e-9,
            pitch_nm,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.amplitudes_mv.iter().any(|&a| a < 0.0) {
            return Err(Error::invalid("drive amplitudes must be non-negative"));
        }
        if self.frequency_hz <= 0.0 || self.pitch_nm <= 0.0 {
            return Err(Error::invalid("drive frequency and pitch must be positive"));
        }
        let expected = self.frequency_hz * self.pitch_nm * 1e-9;
        if (self.velocity_m_per_s - expected).abs() > 1e-9 * expected.abs() {
            return Err(Error::invalid(format!(
                "velocity {} m/s does not match frequency·pitch = {} m/s",
                self.velocity_m_per_s, expected
            )));
        }
        Ok(())
    }

    /// Separation distance in nm reached after driving for `t_stop` seconds.
    pub fn separation_distance_nm(&self, t_stop_s: f64) -> f64 {
        self.velocity_m_per_s * t_stop_s * 1e9
    }
}

impl Default for DriveParams {
    /// 5.6 m/s conveyor: 80 MHz drive over a 70 nm gate-set pitch.
    fn default() -> Self {
        DriveParams::new(
            80e6,
            [150.0, 180.0, 150.0, 180.0],
            [700.0, 700.0, 700.0, 700.0],
            70.0,
        )
    }
}

/// E_VS = 2|Δ| in µeV.
pub fn evs_from_delta(delta: ComplexCoupling) -> f64 {
    2.0 * delta.magnitude()
}

/// Valley-resolved g-factors g± = g0 ± δg_max·cos φ.
pub fn g_factors(phi: f64, g0: f64, delta_g_max: f64) -> GFactorPair {
    debug_assert!(delta_g_max >= 0.0);
    let dev = delta_g_max * phi.cos();
    GFactorPair {
        g_plus: g0 + dev,
        g_minus: g0 - dev,
    }
}

/// Singlet-triplet oscillation frequency f = μ_B·B·Δg / h in Hz.
pub fn st_frequency(b_tesla: f64, delta_g: f64, constants: &PhysicalConstants) -> Result<f64> {
    if b_tesla <= 0.0 {
        return Err(Error::invalid(format!(
            "magnetic field must be positive, got {b_tesla} T"
        )));
    }
    if delta_g < 0.0 {
        return Err(Error::invalid("delta_g must be non-negative"));
    }
    Ok(constants.mu_b * b_tesla * delta_g / constants.h)
}

/// Inverse of [`st_frequency`]: Δg = h·f / (μ_B·B).
pub fn delta_g_from_frequency(
    frequency_hz: f64,
    b_tesla: f64,
    constants: &PhysicalConstants,
) -> Result<f64> {
    if b_tesla <= 0.0 {
        return Err(Error::invalid(format!(
            "magnetic field must be positive, got {b_tesla} T"
        )));
    }
    Ok(constants.h * frequency_hz / (constants.mu_b * b_tesla))
}

/// The two observable Δg components with their occupation weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaGPair {
    /// ||δg_i| − δg_s|, the low-frequency component.
    pub dg1: f64,
    /// |δg_i| + δg_s, the high-frequency component.
    pub dg2: f64,
    /// Weight of `dg1`.
    pub w1: f64,
    /// Weight of `dg2`.
    pub w2: f64,
}

/// Observable frequency pair for a given shuttled-dot deviation modulus.
///
/// Sign convention: the fixed (unmixed) dot sits in its lower-g valley, so
/// the mixed dot's + valley state (weight w₊) beats against it at the
/// higher frequency when its own g-deviation is positive. `delta_g_s` is
/// the deviation modulus; callers holding a signed deviation swap the
/// weights when the sign is negative (see the raster synthesizer).
pub fn delta_g_pair(config: &ScenarioConfig, delta_g_s: f64) -> DeltaGPair {
    debug_assert!(delta_g_s >= 0.0);
    let (w_plus, w_minus) = config.occupation_weights;
    DeltaGPair {
        dg1: (config.delta_g_i - delta_g_s).abs(),
        dg2: config.delta_g_i + delta_g_s,
        w1: w_minus,
        w2: w_plus,
    }
}

/// Conveyor gate-set voltages V_{S,i}(t) = A_i·cos(2πft − (i−1)π/2) + B_i,
/// in mV, for i = 1..4.
pub fn conveyor_waveform(t_s: f64, drive: &DriveParams) -> [f64; 4] {
    let mut v = [0.0; 4];
    for (i, out) in v.iter_mut().enumerate() {
        let phase = TAU * drive.frequency_hz * t_s - i as f64 * PI / 2.0;
        *out = drive.amplitudes_mv[i] * phase.cos() + drive.offsets_mv[i];
    }
    v
}

/// Which screening gate receives the positive displacement coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ScreeningSign {
    /// V_ST = 100 + (50/6)·y, V_SB = 100 − (50/6)·y (in mV, y in nm).
    #[default]
    PlusSt,
    PlusSb,
}

/// Screening-gate voltages (V_ST, V_SB) in mV displacing the channel by
/// `y_nm`. Valid for |y| ≤ 30 nm.
pub fn screening_voltages(y_nm: f64, sign: ScreeningSign) -> Result<(f64, f64)> {
    if !(y_nm.abs() <= 30.0) {
        return Err(Error::invalid(format!(
            "channel displacement y = {y_nm} nm outside the ±30 nm sanity bound"
        )));
    }
    let delta = 50.0 / 6.0 * y_nm;
    match sign {
        ScreeningSign::PlusSt => Ok((100.0 + delta, 100.0 - delta)),
        ScreeningSign::PlusSb => Ok((100.0 - delta, 100.0 + delta)),
    }
}

/// Wraps an angle to (−π, π].
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else if w == 0.0 && phi < 0.0 {
        0.0
    } else {
        w
    }
}
