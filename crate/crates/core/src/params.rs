//! Physical constants, particle and packet parameters, and the small derived
//! quantities every other module builds on. All values are SI.

use std::f64::consts::PI;

use crate::error::{require_positive, Error, Result};

/// Reduced Planck constant, CODATA 2018 (J·s).
pub const HBAR: f64 = 1.054571817e-34;
/// Atomic mass unit, CODATA 2018 (kg).
pub const AMU: f64 = 1.66053907e-27;
/// Standard atomic weight of carbon (u).
pub const CARBON_MASS_U: f64 = 12.011;
/// C70 fullerene mass in atomic mass units.
pub const C70_MASS_U: f64 = 70.0 * CARBON_MASS_U;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub planck: f64,
    pub atomic_mass_unit: f64,
}

impl PhysicalConstants {
    pub const CODATA_2018: Self = Self {
        hbar: HBAR,
        planck: 2.0 * PI * HBAR,
        atomic_mass_unit: AMU,
    };

    /// Builds a constant table from ħ and u; h is derived as 2πħ.
    pub fn new(hbar: f64, atomic_mass_unit: f64) -> Result<Self> {
        require_positive("hbar", hbar, false)?;
        require_positive("amu", atomic_mass_unit, false)?;
        Ok(Self {
            hbar,
            planck: 2.0 * PI * hbar,
            atomic_mass_unit,
        })
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA_2018
    }
}

/// A massive particle moving along z. The longitudinal velocity is only
/// needed for λ_P, k_z and time/distance conversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    mass: f64,
    v_z: Option<f64>,
}

impl Particle {
    pub fn new(mass: f64) -> Result<Self> {
        require_positive("mass", mass, false)?;
        Ok(Self { mass, v_z: None })
    }

    pub fn from_mass_u(mass_u: f64, constants: &PhysicalConstants) -> Result<Self> {
        require_positive("particle.mass_u", mass_u, false)?;
        Self::new(mass_u * constants.atomic_mass_unit)
    }

    /// C70 with mass 70 × 12.011 u.
    pub fn c70(constants: &PhysicalConstants) -> Self {
        Self {
            mass: C70_MASS_U * constants.atomic_mass_unit,
            v_z: None,
        }
    }

    pub fn with_velocity(mut self, v_z: f64) -> Result<Self> {
        require_positive("v_z", v_z, false)?;
        self.v_z = Some(v_z);
        Ok(self)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn v_z(&self) -> Option<f64> {
        self.v_z
    }

    pub fn require_v_z(&self) -> Result<f64> {
        self.v_z.ok_or(Error::MissingVelocity)
    }

    /// Longitudinal wavenumber k_z = m v_z / ħ.
    pub fn k_z(&self, constants: &PhysicalConstants) -> Result<f64> {
        Ok(self.mass * self.require_v_z()? / constants.hbar)
    }
}

/// de Broglie wavelength λ_P = h / (m v_z).
pub fn de_broglie_wavelength(particle: &Particle, constants: &PhysicalConstants) -> Result<f64> {
    Ok(constants.planck / (particle.mass() * particle.require_v_z()?))
}

/// Packet timescale τ_b = m b² / ħ, the matter-wave Rayleigh range.
pub fn timescale_tau(mass: f64, b: f64, constants: &PhysicalConstants) -> Result<f64> {
    require_positive("mass", mass, false)?;
    require_positive("b", b, true)?;
    Ok(mass * b * b / constants.hbar)
}

/// Coherence factor ε = 1 + b² δk_x².
pub fn coherence_epsilon(b: f64, delta_kx: f64) -> Result<f64> {
    require_positive("b", b, true)?;
    require_positive("delta_kx", delta_kx, true)?;
    let product = b * delta_kx;
    Ok(1.0 + product * product)
}

/// Number of transverse dimensions carried by a packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dim {
    One,
    Two,
}

impl Dim {
    pub fn count(self) -> u32 {
        match self {
            Dim::One => 1,
            Dim::Two => 2,
        }
    }
}

impl TryFrom<u32> for Dim {
    type Error = Error;

    fn try_from(value: u32) -> Result<Self> {
        match value {
            1 => Ok(Dim::One),
            2 => Ok(Dim::Two),
            other => Err(Error::InvalidDimension(other)),
        }
    }
}

/// Initial Gaussian packet: amplitude ∝ exp(−x²/2b²) per transverse axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketParams {
    b: f64,
    dim: Dim,
    tau_b: f64,
    mass: f64,
    hbar: f64,
}

impl PacketParams {
    pub fn new(b: f64, dim: Dim, mass: f64, constants: &PhysicalConstants) -> Result<Self> {
        require_positive("b", b, false)?;
        let tau_b = timescale_tau(mass, b, constants)?;
        Ok(Self {
            b,
            dim,
            tau_b,
            mass,
            hbar: constants.hbar,
        })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn tau_b(&self) -> f64 {
        self.tau_b
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn with_dim(mut self, dim: Dim) -> Self {
        self.dim = dim;
        self
    }
}

/// Transverse-momentum spread of the slit-exit ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceSpec {
    delta_kx: f64,
    epsilon: f64,
}

impl CoherenceSpec {
    pub fn new(delta_kx: f64, b: f64) -> Result<Self> {
        let epsilon = coherence_epsilon(b, delta_kx)?;
        Ok(Self { delta_kx, epsilon })
    }

    pub fn coherent() -> Self {
        Self {
            delta_kx: 0.0,
            epsilon: 1.0,
        }
    }

    pub fn delta_kx(&self) -> f64 {
        self.delta_kx
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// Symmetrized second moments of a one-dimensional state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix {
    /// ⟨x²⟩ − ⟨x⟩², m².
    pub sigma_xx: f64,
    /// ⟨p²⟩ − ⟨p⟩², kg²·m²/s².
    pub sigma_pp: f64,
    /// ½⟨xp + px⟩ − ⟨x⟩⟨p⟩, J·s.
    pub sigma_xp: f64,
}

impl CovarianceMatrix {
    /// σ_xx σ_pp − σ_xp², with both products carried exactly (fma), so the
    /// result is limited only by the rounding of the entries themselves.
    pub fn determinant(&self) -> f64 {
        let p = self.sigma_xx * self.sigma_pp;
        let p_err = self.sigma_xx.mul_add(self.sigma_pp, -p);
        let q = self.sigma_xp * self.sigma_xp;
        let q_err = self.sigma_xp.mul_add(self.sigma_xp, -q);
        (p - q) + (p_err - q_err)
    }

    /// Checks positivity and the Schrödinger–Robertson bound det ≥ ħ²/4.
    pub fn validate(&self, hbar: f64) -> Result<()> {
        if !(self.sigma_xx > 0.0 && self.sigma_pp > 0.0) {
            return Err(Error::Domain(format!(
                "non-positive variance (sigma_xx = {}, sigma_pp = {})",
                self.sigma_xx, self.sigma_pp
            )));
        }
        let bound = hbar * hbar / 4.0;
        if self.determinant() < bound * (1.0 - 1e-9) {
            return Err(Error::Domain(format!(
                "determinant {} below hbar^2/4 = {}",
                self.determinant(),
                bound
            )));
        }
        Ok(())
    }
}
