//! Partially coherent slit-exit state: a Gaussian packet mixed over a
//! Gaussian distribution of transverse momenta. Covariance, effective width,
//! Gouy phase, detected intensity and the FWHM → σ_xp inversion.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use statrs::function::erf::erf;

use crate::error::{require_positive, Error, Result};
use crate::params::{
    CoherenceSpec, CovarianceMatrix, Dim, PacketParams, Particle, PhysicalConstants,
};

/// One-dimensional mixed state leaving the slit.
#[derive(Debug, Clone, Copy)]
pub struct MixedState {
    pub params: PacketParams,
    pub coherence: CoherenceSpec,
    pub particle: Particle,
}

impl MixedState {
    pub fn new(
        b: f64,
        delta_kx: f64,
        particle: Particle,
        constants: &PhysicalConstants,
    ) -> Result<Self> {
        let params = PacketParams::new(b, Dim::One, particle.mass(), constants)?;
        let coherence = CoherenceSpec::new(delta_kx, b)?;
        Ok(Self {
            params,
            coherence,
            particle,
        })
    }

    pub fn b(&self) -> f64 {
        self.params.b()
    }

    pub fn delta_kx(&self) -> f64 {
        self.coherence.delta_kx()
    }

    pub fn epsilon(&self) -> f64 {
        self.coherence.epsilon()
    }

    pub fn hbar(&self) -> f64 {
        self.params.hbar()
    }

    /// ρ(x, x', 0) after carrying out the k_x average in closed form.
    pub fn density_initial(&self, x: f64, x_prime: f64) -> Complex64 {
        let b = self.b();
        let dk = self.delta_kx();
        let d = x - x_prime;
        let value = 1.0 / (b * PI.sqrt())
            * (-(x * x + x_prime * x_prime) / (2.0 * b * b)).exp()
            * (-dk * dk * d * d / 4.0).exp();
        Complex64::new(value, 0.0)
    }

    /// Covariance at time t.
    ///
    /// σ_xx = (B²/2)(1 + (τ_b B δk / R)²) reduces to (b²/2)(1 + ε s²) with
    /// s = t/τ_b; the reduced form is evaluated because it keeps the
    /// determinant accurate at large s.
    pub fn covariance(&self, t: f64) -> CovarianceMatrix {
        let hbar = self.hbar();
        let b = self.b();
        let eps = self.epsilon();
        let s = t / self.params.tau_b();
        CovarianceMatrix {
            sigma_xx: 0.5 * b * b * (eps * s).mul_add(s, 1.0),
            sigma_pp: 0.5 * (hbar / b) * (hbar / b) * eps,
            sigma_xp: 0.5 * hbar * s * eps,
        }
    }

    /// B̄(t) = √(2 σ_xx).
    pub fn effective_width(&self, t: f64) -> f64 {
        (2.0 * self.covariance(t).sigma_xx).sqrt()
    }

    /// Gouy phase −(1/2√ε) arctan(2σ_xp / ħ√ε).
    pub fn gouy(&self, t: f64) -> f64 {
        let root_eps = self.epsilon().sqrt();
        let sigma_xp = self.covariance(t).sigma_xp;
        -0.5 / root_eps * (2.0 * sigma_xp / (self.hbar() * root_eps)).atan()
    }

    /// I(x, t) = ρ(x, x, t), a normalized Gaussian with variance σ_xx(t).
    pub fn intensity(&self, x: f64, t: f64) -> f64 {
        gaussian_density(x, self.covariance(t).sigma_xx)
    }

    pub fn detected_intensity(&self, x: f64, t: f64, detector: &DetectorSpec) -> f64 {
        let var = self.covariance(t).sigma_xx;
        match detector.kernel {
            _ if detector.fwhm == 0.0 => gaussian_density(x, var),
            Kernel::Gaussian => gaussian_density(x, var + detector.variance()),
            Kernel::TopHat => tophat_smeared_density(x, var, detector.fwhm),
        }
    }

    /// FWHM of the detected pattern.
    pub fn fwhm(&self, t: f64, detector: &DetectorSpec) -> f64 {
        detector.smeared_fwhm(self.covariance(t).sigma_xx)
    }

    /// Detected intensity sampled on `grid`.
    pub fn profile(&self, t: f64, grid: Vec<f64>, detector: &DetectorSpec) -> IntensityProfile {
        let values = grid
            .iter()
            .map(|&x| self.detected_intensity(x, t, detector))
            .collect();
        IntensityProfile { t, grid, values }
    }
}

pub fn covariance_mixed(t: f64, state: &MixedState) -> CovarianceMatrix {
    state.covariance(t)
}

pub fn effective_width(t: f64, state: &MixedState) -> f64 {
    state.effective_width(t)
}

pub fn gouy_mixed(t: f64, state: &MixedState) -> f64 {
    state.gouy(t)
}

fn gaussian_density(x: f64, variance: f64) -> f64 {
    (-x * x / (2.0 * variance)).exp() / (2.0 * PI * variance).sqrt()
}

fn tophat_smeared_density(x: f64, variance: f64, full_width: f64) -> f64 {
    let s = (2.0 * variance).sqrt();
    let half = 0.5 * full_width;
    0.5 * (erf((x + half) / s) - erf((x - half) / s)) / full_width
}

/// Shape of the detector resolution function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kernel {
    #[default]
    Gaussian,
    TopHat,
}

impl std::str::FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Kernel::Gaussian),
            "tophat" => Ok(Kernel::TopHat),
            other => Err(Error::Config(format!(
                "unknown kernel `{other}` (expected gaussian or tophat)"
            ))),
        }
    }
}

impl std::fmt::Display for Kernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Kernel::Gaussian => "gaussian",
            Kernel::TopHat => "tophat",
        })
    }
}

/// Detector resolution: a kernel whose FWHM is `fwhm` (0 = ideal detector).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorSpec {
    pub fwhm: f64,
    pub kernel: Kernel,
}

const FWHM_PER_SIGMA_SQ: f64 = 8.0 * LN_2;

impl DetectorSpec {
    pub fn new(fwhm: f64, kernel: Kernel) -> Result<Self> {
        require_positive("detector.fwhm_m", fwhm, true)?;
        Ok(Self { fwhm, kernel })
    }

    pub fn ideal() -> Self {
        Self {
            fwhm: 0.0,
            kernel: Kernel::Gaussian,
        }
    }

    /// Variance added by a Gaussian kernel, D²/(8 ln 2).
    pub fn variance(&self) -> f64 {
        match self.kernel {
            Kernel::Gaussian => self.fwhm * self.fwhm / FWHM_PER_SIGMA_SQ,
            Kernel::TopHat => self.fwhm * self.fwhm / 12.0,
        }
    }

    /// FWHM of a Gaussian of variance `variance` after smearing by this kernel.
    pub fn smeared_fwhm(&self, variance: f64) -> f64 {
        if self.fwhm == 0.0 {
            return fwhm_of_variance(variance);
        }
        match self.kernel {
            Kernel::Gaussian => fwhm_of_variance(variance + self.variance()),
            Kernel::TopHat => {
                let peak = tophat_smeared_density(0.0, variance, self.fwhm);
                let f = |x: f64| tophat_smeared_density(x, variance, self.fwhm) - 0.5 * peak;
                let mut hi = 0.5 * self.fwhm + fwhm_of_variance(variance);
                while f(hi) > 0.0 {
                    hi *= 2.0;
                }
                2.0 * bisect(f, 0.0, hi)
            }
        }
    }

    /// Removes the detector contribution from a measured FWHM.
    pub fn deconvolve_fwhm(&self, measured: f64) -> Result<f64> {
        require_positive("fwhm", measured, true)?;
        if self.fwhm == 0.0 {
            return Ok(measured);
        }
        match self.kernel {
            Kernel::Gaussian => {
                let intrinsic = measured * measured - self.fwhm * self.fwhm;
                if intrinsic < 0.0 {
                    return Err(Error::Domain(format!(
                        "measured width {measured} is below the detector resolution {}",
                        self.fwhm
                    )));
                }
                Ok(intrinsic.sqrt())
            }
            Kernel::TopHat => {
                // the smeared FWHM is monotone in the intrinsic width
                if measured <= self.fwhm {
                    return Err(Error::Domain(format!(
                        "measured width {measured} is below the detector resolution {}",
                        self.fwhm
                    )));
                }
                let f = |w: f64| self.smeared_fwhm(variance_of_fwhm(w)) - measured;
                Ok(bisect(f, 1e-12 * measured, measured))
            }
        }
    }
}

/// FWHM of a Gaussian with the given variance, 2√(2 ln2 σ²).
pub fn fwhm_of_variance(variance: f64) -> f64 {
    2.0 * (2.0 * LN_2 * variance).sqrt()
}

pub fn variance_of_fwhm(w: f64) -> f64 {
    w * w / FWHM_PER_SIGMA_SQ
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// σ_xp from an intrinsic (detector-free) FWHM via determinant saturation:
/// (ħ/2) √ε √[(W / 2√(ln2) b)² − 1]. Returns the nonnegative root.
pub fn sigma_xp_from_fwhm(w: f64, b: f64, delta_kx: f64, hbar: f64) -> Result<f64> {
    require_positive("fwhm", w, true)?;
    require_positive("b", b, false)?;
    let eps = crate::params::coherence_epsilon(b, delta_kx)?;
    let floor = 2.0 * LN_2.sqrt() * b;
    let ratio = w / floor;
    let excess = ratio * ratio - 1.0;
    if excess < 0.0 {
        // tolerate round-off right at the floor
        if excess > -1e-12 {
            return Ok(0.0);
        }
        return Err(Error::Domain(format!(
            "width below initial-state minimum: W = {w} < 2 sqrt(ln2) b = {floor}"
        )));
    }
    Ok(0.5 * hbar * eps.sqrt() * excess.sqrt())
}

/// Sampled intensity pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityProfile {
    pub t: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl IntensityProfile {
    pub fn trapezoid_integral(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1]))
            .sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, v)| 0.5 * (x[1] - x[0]) * (x[0] * x[0] * v[0] + x[1] * x[1] * v[1]))
            .sum()
    }
}

/// Evenly spaced grid of `n` points over [−half_span, half_span].
pub fn symmetric_grid(half_span: f64, n: usize) -> Vec<f64> {
    let step = 2.0 * half_span / (n - 1) as f64;
    (0..n).map(|i| -half_span + i as f64 * step).collect()
}
