//! Closed-form free evolution of a pure Gaussian matter-wave packet, the
//! width-integral form of the Gouy phase, and the paraxial optical analogue.
//!
//! Conventions: the initial amplitude is `(b√π)^{-1/2} exp(−x²/2b²)` per
//! transverse axis, so that σ_xx(0) = b²/2 and τ_b = m b²/ħ. The Gouy phase is
//! accumulated per axis as −½ arctan(t/τ_b) and multiplied by the packet's
//! dimension count.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{require_positive, Error, Result};
use crate::params::{
    de_broglie_wavelength, CovarianceMatrix, PacketParams, Particle, PhysicalConstants,
};
use crate::quadrature::{integrate, QuadratureOptions};

/// Amplitude width B(t) = b √(1 + (t/τ_b)²).
pub fn width(t: f64, params: &PacketParams) -> f64 {
    let s = t / params.tau_b();
    params.b() * (1.0 + s * s).sqrt()
}

/// Wavefront curvature R(t) = t (1 + (τ_b/t)²), in seconds.
///
/// At t = ±0 the wavefront is flat and the result is a signed infinity.
pub fn curvature_radius(t: f64, params: &PacketParams) -> f64 {
    if t == 0.0 {
        return f64::INFINITY.copysign(t);
    }
    let s = params.tau_b() / t;
    t * (1.0 + s * s)
}

/// Gouy phase −(dim/2) arctan(t/τ_b).
pub fn gouy_pure(t: f64, params: &PacketParams) -> f64 {
    -0.5 * params.dim().count() as f64 * (t / params.tau_b()).atan()
}

/// Gouy phase from the width history, −(ħ/2m) ∫₀ᵗ dt'/w(t')².
///
/// Yields the per-axis phase; any sample with w ≤ 0 is a domain error.
pub fn gouy_from_width_integral<F>(width_fn: F, t: f64, mass: f64, hbar: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    require_positive("mass", mass, false)?;
    let bad_sample = std::cell::Cell::new(None);
    let integrand = |s: f64| {
        let w = width_fn(s);
        if !(w > 0.0) || !w.is_finite() {
            bad_sample.set(Some((s, w)));
            return f64::NAN;
        }
        1.0 / (w * w)
    };
    let result = integrate(integrand, 0.0, t, QuadratureOptions::default());
    if let Some((s, w)) = bad_sample.get() {
        return Err(Error::Domain(format!(
            "width must be positive, got {w} at t = {s}"
        )));
    }
    Ok(-hbar / (2.0 * mass) * result?.value)
}

/// A pure packet evolving freely from its waist at t = 0.
#[derive(Debug, Clone, Copy)]
pub struct PureEvolution {
    pub params: PacketParams,
    pub particle: Particle,
}

impl PureEvolution {
    pub fn new(params: PacketParams, particle: Particle) -> Self {
        Self { params, particle }
    }

    pub fn width(&self, t: f64) -> f64 {
        width(t, &self.params)
    }

    pub fn curvature_radius(&self, t: f64) -> f64 {
        curvature_radius(t, &self.params)
    }

    pub fn gouy(&self, t: f64) -> f64 {
        gouy_pure(t, &self.params)
    }

    /// One transverse axis of the evolved packet.
    pub fn wavefunction_1d(&self, x: f64, t: f64) -> Complex64 {
        let p = &self.params;
        let big_b = width(t, p);
        let radius = curvature_radius(t, p);
        let amplitude = 1.0 / (big_b * PI.sqrt()).sqrt() * (-x * x / (2.0 * big_b * big_b)).exp();
        let phase = p.mass() * x * x / (2.0 * p.hbar() * radius) - 0.5 * (t / p.tau_b()).atan();
        Complex64::from_polar(amplitude, phase)
    }

    /// The full transverse-plane wavefunction ψ(x, y, t).
    pub fn wavefunction(&self, x: f64, y: f64, t: f64) -> Complex64 {
        self.wavefunction_1d(x, t) * self.wavefunction_1d(y, t)
    }

    /// Per-axis covariance: σ_xx = B²/2, σ_pp = ħ²/2b², σ_xp = ħt/2τ_b.
    pub fn covariance(&self, t: f64) -> CovarianceMatrix {
        covariance_pure(t, &self.params)
    }
}

pub fn covariance_pure(t: f64, params: &PacketParams) -> CovarianceMatrix {
    let hbar = params.hbar();
    let b = params.b();
    let s = t / params.tau_b();
    // B²/2 without the round trip through the square root
    CovarianceMatrix {
        sigma_xx: 0.5 * b * b * s.mul_add(s, 1.0),
        sigma_pp: 0.5 * (hbar / b) * (hbar / b),
        sigma_xp: 0.5 * hbar * s,
    }
}

/// Paraxial optical beam whose propagation in z mirrors the packet's evolution
/// in t = z/v_z.
///
/// `w0` follows the optics convention (1/e² intensity radius), which for an
/// amplitude ∝ exp(−r²/2b²) is √2·b; with it `z_r = π w0²/λ = v_z τ_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalBeam {
    pub lambda_l: f64,
    pub w0: f64,
    pub z_r: f64,
}

impl OpticalBeam {
    pub fn new(lambda_l: f64, w0: f64) -> Result<Self> {
        require_positive("lambda_l", lambda_l, false)?;
        require_positive("w0", w0, false)?;
        Ok(Self {
            lambda_l,
            w0,
            z_r: PI * w0 * w0 / lambda_l,
        })
    }

    /// 1/e² intensity radius w(z).
    pub fn width(&self, z: f64) -> f64 {
        let s = z / self.z_r;
        self.w0 * (1.0 + s * s).sqrt()
    }

    /// Same width expressed in the packet's amplitude convention.
    pub fn amplitude_width(&self, z: f64) -> f64 {
        self.width(z) / std::f64::consts::SQRT_2
    }

    pub fn radius(&self, z: f64) -> f64 {
        if z == 0.0 {
            return f64::INFINITY.copysign(z);
        }
        let s = self.z_r / z;
        z * (1.0 + s * s)
    }

    /// Gouy phase ζ(z) = arctan(z/z_R) of a beam confined in both transverse axes.
    pub fn gouy(&self, z: f64) -> f64 {
        (z / self.z_r).atan()
    }
}

/// Optical beam with λ_L = λ_P and the same waist as the packet.
pub fn optical_equivalent(
    params: &PacketParams,
    particle: &Particle,
    constants: &PhysicalConstants,
) -> Result<OpticalBeam> {
    let lambda = de_broglie_wavelength(particle, constants)?;
    OpticalBeam::new(lambda, std::f64::consts::SQRT_2 * params.b())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{Dim, C70_MASS_U};

    fn c70() -> (PhysicalConstants, Particle) {
        let c = PhysicalConstants::default();
        (c, Particle::c70(&c))
    }

    fn packet(b: f64, dim: Dim) -> PacketParams {
        let (c, p) = c70();
        PacketParams::new(b, dim, p.mass(), &c).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn width_landmarks() {
        let p = packet(1e-7, Dim::One);
        assert_eq!(width(0.0, &p), 1e-7);
        assert!(rel(width(p.tau_b(), &p), 1e-7 * 2f64.sqrt()) < 1e-15);
        // b sqrt(1 + (6.65e-3 / 1.32391e-4)^2)
        assert!(rel(width(6.65e-3, &p), 5.024e-6) < 1e-3);
        assert_eq!(width(-3e-4, &p), width(3e-4, &p));
    }

    #[test]
    fn radius_landmarks() {
        let p = packet(1e-7, Dim::One);
        let tau = p.tau_b();
        assert!(rel(curvature_radius(tau, &p), 2.0 * tau) < 1e-15);
        assert!(rel(curvature_radius(10.0 * tau, &p), 10.1 * tau) < 1e-14);
        assert_eq!(curvature_radius(0.0, &p), f64::INFINITY);
        assert_eq!(curvature_radius(-0.0, &p), f64::NEG_INFINITY);
        assert!(curvature_radius(1e-9 * tau, &p) > 1e8 * tau);
    }

    #[test]
    fn gouy_landmarks() {
        let p2 = packet(1e-7, Dim::Two);
        let p1 = p2.with_dim(Dim::One);
        assert!((gouy_pure(p2.tau_b(), &p2) + PI / 4.0).abs() < 1e-15);
        assert!((gouy_pure(1e12 * p1.tau_b(), &p1) + PI / 4.0).abs() < 1e-12);
        assert!((gouy_pure(1e12 * p2.tau_b(), &p2) + PI / 2.0).abs() < 1e-12);
        assert_eq!(gouy_pure(0.0, &p1), 0.0);
        assert_eq!(gouy_pure(-2e-4, &p1), -gouy_pure(2e-4, &p1));
    }

    #[test]
    fn wavefunction_matches_initial_gaussian() {
        let (_, particle) = c70();
        let b = 2e-7;
        let ev = PureEvolution::new(packet(b, Dim::Two), particle);
        for &(x, y) in &[(0.0, 0.0), (1e-7, -3e-7), (4e-7, 2e-7)] {
            let psi = ev.wavefunction(x, y, 0.0);
            let expected = 1.0 / (b * PI.sqrt()) * (-(x * x + y * y) / (2.0 * b * b)).exp();
            assert!((psi.re - expected).abs() < 1e-12 * expected);
            assert!(psi.im.abs() < 1e-12 * expected);
        }
    }

    #[test]
    fn on_axis_phase_is_gouy() {
        let (_, particle) = c70();
        let ev = PureEvolution::new(packet(1e-7, Dim::Two), particle);
        let tau = ev.params.tau_b();
        for k in [0.1, 0.7, 1.0, 3.0, 20.0] {
            let t = k * tau;
            let arg = ev.wavefunction(0.0, 0.0, t).arg();
            assert!((arg - ev.gouy(t)).abs() < 1e-14);
        }
    }

    #[test]
    fn plane_normalization_at_three_tau() {
        // |ψ|² factorizes; integrate one axis by adaptive quadrature and square.
        let (_, particle) = c70();
        let ev = PureEvolution::new(packet(1e-7, Dim::Two), particle);
        let t = 3.0 * ev.params.tau_b();
        let span = 20.0 * ev.width(t);
        let axis = integrate(
            |x| ev.wavefunction_1d(x, t).norm_sqr(),
            -span,
            span,
            QuadratureOptions::default(),
        )
        .unwrap()
        .value;
        assert!((axis * axis - 1.0).abs() < 1e-9);
    }

    #[test]
    fn covariance_landmarks() {
        let (_, particle) = c70();
        let ev = PureEvolution::new(packet(1e-7, Dim::One), particle);
        let c0 = ev.covariance(0.0);
        assert_eq!(c0.sigma_xp, 0.0);
        assert!(rel(c0.sigma_xx, 0.5e-14) < 1e-15);
        let hbar = ev.params.hbar();
        let c1 = ev.covariance(ev.params.tau_b());
        assert!(rel(c1.sigma_xp, hbar / 2.0) < 1e-15);
        assert!(rel(c1.determinant(), hbar * hbar / 4.0) < 1e-12);
    }

    #[test]
    fn width_integral_reproduces_per_axis_phase() {
        let p = packet(1e-7, Dim::One);
        let tau = p.tau_b();
        let mu = gouy_from_width_integral(|s| width(s, &p), tau, p.mass(), p.hbar()).unwrap();
        assert!((mu + PI / 8.0).abs() < 1e-10);

        let t = 5e-5;
        let flat = gouy_from_width_integral(|_| p.b(), t, p.mass(), p.hbar()).unwrap();
        assert!(rel(flat, -t / (2.0 * tau)) < 1e-12);
    }

    #[test]
    fn width_integral_rejects_nonpositive_width() {
        let p = packet(1e-7, Dim::One);
        let err = gouy_from_width_integral(|s| 1e-7 - s, 1.0, p.mass(), p.hbar()).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn optical_analogue_coincides_pointwise() {
        let c = PhysicalConstants::default();
        let particle = Particle::from_mass_u(C70_MASS_U, &c)
            .unwrap()
            .with_velocity(188.0)
            .unwrap();
        let params = PacketParams::new(1e-7, Dim::Two, particle.mass(), &c).unwrap();
        let beam = optical_equivalent(&params, &particle, &c).unwrap();
        let v = 188.0;
        assert!(rel(beam.z_r, v * params.tau_b()) < 1e-12);
        assert!(rel(beam.amplitude_width(0.0), params.b()) < 1e-15);
        for k in [0.01, 0.5, 1.0, 7.0, 300.0] {
            let t = k * params.tau_b();
            let z = v * t;
            assert!(rel(beam.amplitude_width(z), width(t, &params)) < 1e-12);
            assert!(rel(beam.radius(z), v * curvature_radius(t, &params)) < 1e-12);
            assert!((beam.gouy(z) + gouy_pure(t, &params)).abs() < 1e-12);
        }
        assert!((beam.gouy(1e20) - PI / 2.0).abs() < 1e-12);
        assert!(optical_equivalent(&params, &Particle::c70(&c), &c).is_err());
    }
}
