//! Single-phonon wavepacket envelopes and the resonant reflection response.
//!
//! Fourier convention, used everywhere in this crate:
//!
//! ```text
//! u(ω) = (2π)^(-1/2) ∫ u(t) e^{+iωt} dt,     u(t) = (2π)^(-1/2) ∫ u(ω) e^{-iωt} dω
//! ```
//!
//! With that convention a field component `e^{-iωt}` reflected by a scatterer
//! of linewidth κ picks up `r(ω) = (iω + κ/2)/(iω − κ/2)`, so `r(0) = −1`.
//!
//! FWHM is measured on the amplitude envelope `|u(t)|`:
//!
//! | shape | envelope | width parameter |
//! |-------|----------|-----------------|
//! | Gaussian | `(2κ_w²/π)^{1/4} exp(−(κ_w t)²)` | `κ_w = 2√(ln 2) / FWHM` |
//! | sech | `(2τ)^{-1/2} sech(t/τ)` | `τ = FWHM / (2 arccosh 2)` |
//!
//! For an intensity FWHM instead, divide `κ_w` by `√2` (Gaussian) or use
//! `τ = FWHM / (2 arccosh √2)` (sech).

use std::f64::consts::{LN_2, PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance};
use crate::units::{AngularRate, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseShape {
    Gaussian,
    #[serde(alias = "hyperbolic-secant")]
    Sech,
}

impl PulseShape {
    pub fn name(self) -> &'static str {
        match self {
            PulseShape::Gaussian => "gaussian",
            PulseShape::Sech => "sech",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavePacket {
    pub shape: PulseShape,
    pub fwhm: Time,
    #[serde(default)]
    pub center: Time,
}

impl WavePacket {
    pub fn new(shape: PulseShape, fwhm: Time) -> Result<Self> {
        let packet = WavePacket { shape, fwhm, center: Time::ZERO };
        packet.validate()?;
        Ok(packet)
    }

    pub fn gaussian(fwhm: Time) -> Result<Self> {
        Self::new(PulseShape::Gaussian, fwhm)
    }

    pub fn sech(fwhm: Time) -> Result<Self> {
        Self::new(PulseShape::Sech, fwhm)
    }

    pub fn centered_at(mut self, center: Time) -> Self {
        self.center = center;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.fwhm.ns();
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::invalid(format!("wavepacket FWHM must be positive and finite, got {w} ns")));
        }
        if !self.center.ns().is_finite() {
            return Err(Error::invalid("wavepacket center must be finite"));
        }
        Ok(())
    }

    /// Width parameter in ns⁻¹ (Gaussian `κ_w`) or ns (sech `τ`).
    fn width(&self) -> f64 {
        match self.shape {
            PulseShape::Gaussian => 2.0 * LN_2.sqrt() / self.fwhm.ns(),
            PulseShape::Sech => self.fwhm.ns() / (2.0 * (2.0f64).acosh()),
        }
    }

    /// Amplitude at time `t` (ns).
    pub fn envelope_time(&self, t: f64) -> Result<Complex64> {
        self.validate()?;
        Ok(Complex64::new(self.amplitude_unchecked(t), 0.0))
    }

    /// Real envelope value without validation; the hot loop of the router uses this.
    pub(crate) fn amplitude_unchecked(&self, t: f64) -> f64 {
        let x = t - self.center.ns();
        match self.shape {
            PulseShape::Gaussian => {
                let k = self.width();
                (2.0 * k * k / PI).powf(0.25) * (-(k * x).powi(2)).exp()
            }
            PulseShape::Sech => {
                let tau = self.width();
                sech(x / tau) / (2.0 * tau).sqrt()
            }
        }
    }

    /// Spectral amplitude at angular frequency `omega` (rad/ns).
    pub fn envelope_freq(&self, omega: f64) -> Result<Complex64> {
        self.validate()?;
        let phase = Complex64::from_polar(1.0, omega * self.center.ns());
        Ok(phase * self.spectral_magnitude(omega))
    }

    fn spectral_magnitude(&self, omega: f64) -> f64 {
        match self.shape {
            PulseShape::Gaussian => {
                let k = self.width();
                (2.0 * k * k / PI).powf(0.25) / (k * SQRT_2) * (-(omega * omega) / (4.0 * k * k)).exp()
            }
            PulseShape::Sech => {
                let tau = self.width();
                let a = PI * tau / 2.0;
                (PI * tau / 4.0).sqrt() * sech(a * omega)
            }
        }
    }

    /// `|u(ω)|²`.
    pub fn spectral_density(&self, omega: f64) -> f64 {
        self.spectral_magnitude(omega).powi(2)
    }

    /// Standard deviation of `|u(ω)|²` in rad/ns.
    pub fn spectral_std(&self) -> f64 {
        match self.shape {
            PulseShape::Gaussian => self.width(),
            PulseShape::Sech => 1.0 / (3.0f64.sqrt() * self.width()),
        }
    }

    /// Upper bound on `∫_{|ω|>w} |u(ω)|² dω`.
    pub fn spectral_tail_bound(&self, w: f64) -> f64 {
        match self.shape {
            // erfc(x) <= exp(-x^2)
            PulseShape::Gaussian => (-(w / self.spectral_std()).powi(2) / 2.0).exp(),
            // 1 - tanh(y) <= 2 exp(-2y)
            PulseShape::Sech => 2.0 * (-PI * self.width() * w).exp(),
        }
    }
}

fn sech(x: f64) -> f64 {
    // 2 e^{-|x|} / (1 + e^{-2|x|}) never overflows.
    let e = (-x.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

/// Which transmon transition does the scattering, relative to the quoted
/// maximum coupling κ_max.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScatteringTransition {
    /// The scatterer linewidth is κ_max itself.
    Bare,
    /// Scattering on e↔f of a transmon whose g↔e coupling is κ_max. The
    /// ladder matrix element `⟨e|b|f⟩ = √2` doubles the decay rate.
    #[default]
    TransmonEf,
}

impl ScatteringTransition {
    pub fn linewidth(self, kappa_max: AngularRate) -> AngularRate {
        match self {
            ScatteringTransition::Bare => kappa_max,
            ScatteringTransition::TransmonEf => AngularRate::from_rad_per_ns(2.0 * kappa_max.rad_per_ns()),
        }
    }
}

/// Reflection off a resonantly coupled scatterer of linewidth `kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionResponse {
    pub kappa: AngularRate,
}

impl ReflectionResponse {
    pub fn new(kappa: AngularRate) -> Result<Self> {
        let k = kappa.rad_per_ns();
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::invalid(format!("scatterer linewidth must be positive, got {k} rad/ns")));
        }
        Ok(ReflectionResponse { kappa })
    }

    pub fn for_transmon(kappa_max: AngularRate, transition: ScatteringTransition) -> Result<Self> {
        Self::new(transition.linewidth(kappa_max))
    }

    pub fn transfer(&self, omega: f64) -> Complex64 {
        let half = self.kappa.rad_per_ns() / 2.0;
        Complex64::new(half, omega) / Complex64::new(-half, omega)
    }
}

/// `r(ω)`; unit modulus, `r(0) = −1`, `r(±∞) = 1`.
pub fn reflection_transfer(resp: &ReflectionResponse, omega: f64) -> Complex64 {
    resp.transfer(omega)
}

/// Conditional-routing fidelity limited only by reflection distortion
/// (infinite routing window), `F = (1 − 2∫|u(ω)|² ω²/(κ² + 4ω²) dω)²`.
pub fn distortion_fidelity(packet: &WavePacket, resp: &ReflectionResponse) -> Result<f64> {
    packet.validate()?;
    let kappa = resp.kappa.rad_per_ns();
    let sigma = packet.spectral_std();
    let mut cutoff = 50.0 * sigma;
    // The integrand is bounded by |u|²/4, so the truncated tail is below tail_bound/4.
    while packet.spectral_tail_bound(cutoff) > 1e-14 {
        cutoff *= 1.5;
    }
    let integrand = |w: f64| packet.spectral_density(w) * w * w / (kappa * kappa + 4.0 * w * w);
    let tol = Tolerance { abs: 1e-15, rel: 1e-10, max_subdivisions: 4000 };
    // Even integrand; split at a few spectral widths so the bulk is resolved first.
    let knee = (8.0 * sigma).min(cutoff);
    let inner = quadrature::integrate(integrand, 0.0, knee, tol)?;
    let outer = quadrature::integrate(integrand, knee, cutoff, tol)?;
    let half_integral = inner.value + outer.value;
    let err = inner.error + outer.error;
    if err > (1e-8 * half_integral.abs()).max(1e-15) {
        return Err(Error::NumericalFailure {
            routine: "distortion_fidelity",
            detail: format!("integral {half_integral:.6e} with error {err:.3e} misses 1e-8 relative accuracy"),
        });
    }
    let f = (1.0 - 4.0 * half_integral).powi(2);
    Ok(f.clamp(0.0, 1.0))
}
