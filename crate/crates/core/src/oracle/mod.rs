//! Independent numerical checks. Packets are sampled on a periodic grid and
//! evolved with the exact free propagator exp(−iħk²t/2m) in momentum space;
//! moments, on-axis phases and wavefront curvature are then measured from the
//! samples. Partial coherence is realized by averaging boosted copies of the
//! packet over a Gauss–Hermite rule in k_x. None of this reuses the closed
//! forms in [`crate::gaussian`] or [`crate::coherence`], apart from grid sizing.

mod hermite;

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

pub use hermite::gauss_hermite;

use crate::coherence::{IntensityProfile, MixedState};
use crate::error::{Error, Result};
use crate::params::CovarianceMatrix;
use crate::quadrature::romberg;

/// Density at the grid edge, relative to the peak, above which a propagation
/// is rejected.
pub const OVERFLOW_LIMIT: f64 = 1e-12;
const NORM_TOLERANCE: f64 = 1e-9;
const MIN_POINTS: usize = 256;

/// Extent and resolution of a periodic grid centred on x = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub half_span: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(half_span: f64, n: usize) -> Result<Self> {
        if !(half_span > 0.0 && half_span.is_finite()) {
            return Err(Error::invalid(
                "half_span",
                format!("must be > 0, got {half_span}"),
            ));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::invalid(
                "n",
                format!("must be a power of two >= 8, got {n}"),
            ));
        }
        Ok(Self { half_span, n })
    }

    /// Sizes a grid for a packet of initial width `b` propagated up to
    /// `t_final`, possibly boosted by up to `k_boost`.
    ///
    /// The half-span covers eight spread widths beyond the furthest drifted
    /// centre; the spacing resolves wavenumbers up to `k_boost + 10/b`.
    pub fn auto(b: f64, mass: f64, hbar: f64, t_final: f64, k_boost: f64) -> Self {
        let half_span = Self::auto_half_span(b, mass, hbar, t_final, k_boost);
        let k_needed = k_boost.abs() + 10.0 / b;
        let dx = PI / k_needed;
        let n = ((2.0 * half_span / dx).ceil() as usize)
            .next_power_of_two()
            .max(MIN_POINTS);
        Self { half_span, n }
    }

    pub fn auto_half_span(b: f64, mass: f64, hbar: f64, t_final: f64, k_boost: f64) -> f64 {
        let spread = hbar * t_final.abs() / (mass * b);
        let width = (b * b + spread * spread).sqrt();
        let drift = hbar * k_boost.abs() * t_final.abs() / mass;
        (8.0 * b).max(8.0 * width + drift)
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_span / self.n as f64
    }
}

/// Complex amplitudes sampled at x_j = x_min + j·dx, j = 0..n.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    x_min: f64,
    dx: f64,
    values: Vec<Complex64>,
}

impl GridField {
    pub fn new(x_min: f64, x_max: f64, values: Vec<Complex64>) -> Result<Self> {
        let n = values.len();
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::invalid(
                "n",
                format!("must be a power of two >= 8, got {n}"),
            ));
        }
        if !(x_max > x_min) {
            return Err(Error::invalid("x_max", "must exceed x_min"));
        }
        Ok(Self {
            x_min,
            dx: (x_max - x_min) / n as f64,
            values,
        })
    }

    /// Samples `f` on the grid.
    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: &GridSpec, f: F) -> Self {
        let dx = grid.dx();
        let x_min = -grid.half_span;
        let values = (0..grid.n).map(|j| f(x_min + j as f64 * dx)).collect();
        Self { x_min, dx, values }
    }

    /// Minimum-uncertainty packet (b√π)^{-1/2} exp(−x²/2b²), renormalized on
    /// the grid.
    pub fn gaussian(b: f64, grid: &GridSpec) -> Self {
        let amp = (b * PI.sqrt()).sqrt().recip();
        Self::from_fn(grid, |x| {
            Complex64::new(amp * (-x * x / (2.0 * b * b)).exp(), 0.0)
        })
        .normalized()
    }

    /// Copy multiplied by exp(ikx).
    pub fn boosted(&self, k: f64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| v * Complex64::from_polar(1.0, k * self.x(j)))
            .collect();
        Self {
            values,
            ..self.clone()
        }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_min + self.dx * self.n() as f64
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dx
    }

    pub fn normalized(mut self) -> Self {
        let scale = self.norm().sqrt().recip();
        self.values.iter_mut().for_each(|v| *v *= scale);
        self
    }

    /// Index of the sample closest to x = 0.
    pub fn axis_index(&self) -> usize {
        (-self.x_min / self.dx)
            .round()
            .clamp(0.0, (self.n() - 1) as f64) as usize
    }

    pub fn on_axis(&self) -> Complex64 {
        self.values[self.axis_index()]
    }

    fn check_boundary(&self) -> Result<()> {
        let density: Vec<f64> = self.values.iter().map(|v| v.norm_sqr()).collect();
        let peak = density.iter().cloned().fold(0.0, f64::max);
        let edge = (self.n() / 64).max(1);
        let boundary = density[..edge]
            .iter()
            .chain(&density[self.n() - edge..])
            .cloned()
            .fold(0.0, f64::max);
        let ratio = boundary / peak;
        if ratio > OVERFLOW_LIMIT {
            return Err(Error::GridOverflow {
                ratio,
                limit: OVERFLOW_LIMIT,
            });
        }
        Ok(())
    }
}

/// Raw moments of one pure state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawMoments {
    pub mean_x: f64,
    pub mean_p: f64,
    pub mean_xx: f64,
    pub mean_pp: f64,
    /// ½⟨xp + px⟩.
    pub mean_xp: f64,
}

impl RawMoments {
    pub fn covariance(&self) -> CovarianceMatrix {
        CovarianceMatrix {
            sigma_xx: self.mean_xx - self.mean_x * self.mean_x,
            sigma_pp: self.mean_pp - self.mean_p * self.mean_p,
            sigma_xp: self.mean_xp - self.mean_x * self.mean_p,
        }
    }

    fn weighted_sum<'a, I: IntoIterator<Item = (f64, &'a RawMoments)>>(items: I) -> Self {
        let mut acc = RawMoments {
            mean_x: 0.0,
            mean_p: 0.0,
            mean_xx: 0.0,
            mean_pp: 0.0,
            mean_xp: 0.0,
        };
        for (w, m) in items {
            acc.mean_x += w * m.mean_x;
            acc.mean_p += w * m.mean_p;
            acc.mean_xx += w * m.mean_xx;
            acc.mean_pp += w * m.mean_pp;
            acc.mean_xp += w * m.mean_xp;
        }
        acc
    }
}

/// FFT plans and the wavenumber table for one grid size.
pub struct FreePropagator {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    k: Vec<f64>,
    n: usize,
    dx: f64,
}

impl std::fmt::Debug for FreePropagator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FreePropagator")
            .field("n", &self.n)
            .field("dx", &self.dx)
            .finish()
    }
}

impl FreePropagator {
    pub fn new(n: usize, dx: f64) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let dk = TAU / (n as f64 * dx);
        let k = (0..n)
            .map(|j| {
                let j = if j < n / 2 {
                    j as f64
                } else {
                    j as f64 - n as f64
                };
                j * dk
            })
            .collect();
        Self {
            forward,
            inverse,
            k,
            n,
            dx,
        }
    }

    pub fn for_field(field: &GridField) -> Self {
        Self::new(field.n(), field.dx())
    }

    fn check_grid(&self, field: &GridField) -> Result<()> {
        if field.n() != self.n || (field.dx() - self.dx).abs() > 1e-12 * self.dx {
            return Err(Error::invalid("field", "grid does not match propagator"));
        }
        Ok(())
    }

    pub fn spectrum(&self, field: &GridField) -> Vec<Complex64> {
        let mut buf = field.values.clone();
        self.forward.process(&mut buf);
        buf
    }

    fn synthesize(&self, mut spectrum: Vec<Complex64>, template: &GridField) -> GridField {
        self.inverse.process(&mut spectrum);
        let scale = 1.0 / self.n as f64;
        spectrum.iter_mut().for_each(|v| *v *= scale);
        GridField {
            values: spectrum,
            ..template.clone()
        }
    }

    fn evolve_spectrum(
        &self,
        spectrum: &[Complex64],
        t: f64,
        mass: f64,
        hbar: f64,
    ) -> Vec<Complex64> {
        let c = hbar * t / (2.0 * mass);
        spectrum
            .iter()
            .zip(&self.k)
            .map(|(v, &k)| v * Complex64::from_polar(1.0, -c * k * k))
            .collect()
    }

    /// Exact free evolution by time `t`, followed by a boundary check.
    pub fn propagate(&self, field: &GridField, t: f64, mass: f64, hbar: f64) -> Result<GridField> {
        self.check_grid(field)?;
        if !t.is_finite() {
            return Err(Error::invalid("t", "must be finite"));
        }
        if t == 0.0 {
            return Ok(field.clone());
        }
        let spectrum = self.spectrum(field);
        let out = self.synthesize(self.evolve_spectrum(&spectrum, t, mass, hbar), field);
        out.check_boundary()?;
        Ok(out)
    }

    /// Position, momentum and symmetrized cross moments. Momentum moments are
    /// taken in k-space; ½⟨xp + px⟩ = Re⟨ψ| x (−iħ∂ₓ) |ψ⟩ with the derivative
    /// evaluated spectrally.
    pub fn moments(&self, field: &GridField, hbar: f64) -> Result<RawMoments> {
        self.check_grid(field)?;
        let norm = field.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        let spectrum = self.spectrum(field);
        self.moments_from_parts(field, &spectrum, hbar)
    }

    fn moments_from_parts(
        &self,
        field: &GridField,
        spectrum: &[Complex64],
        hbar: f64,
    ) -> Result<RawMoments> {
        let dx = field.dx();
        let (mut sx, mut sxx, mut norm) = (0.0, 0.0, 0.0);
        for (j, v) in field.values.iter().enumerate() {
            let x = field.x(j);
            let d = v.norm_sqr();
            norm += d;
            sx += x * d;
            sxx += x * x * d;
        }
        norm *= dx;
        let mean_x = sx * dx / norm;
        let mean_xx = sxx * dx / norm;

        let (mut sk, mut skk, mut sn) = (0.0, 0.0, 0.0);
        for (v, &k) in spectrum.iter().zip(&self.k) {
            let d = v.norm_sqr();
            sn += d;
            sk += k * d;
            skk += k * k * d;
        }
        let mean_p = hbar * sk / sn;
        let mean_pp = hbar * hbar * skk / sn;

        let nyquist = self.n / 2;
        let derivative_spectrum: Vec<Complex64> = spectrum
            .iter()
            .zip(&self.k)
            .enumerate()
            .map(|(j, (v, &k))| {
                if j == nyquist {
                    Complex64::new(0.0, 0.0)
                } else {
                    v * Complex64::new(0.0, k)
                }
            })
            .collect();
        let derivative = self.synthesize(derivative_spectrum, field);
        let cross: f64 = field
            .values
            .iter()
            .zip(&derivative.values)
            .enumerate()
            .map(|(j, (v, dv))| {
                // Re[ψ* x (−iħ ψ')] = ħ x Im(ψ* ψ')
                field.x(j) * (v.conj() * dv).im
            })
            .sum();
        let mean_xp = hbar * cross * dx / norm;

        Ok(RawMoments {
            mean_x,
            mean_p,
            mean_xx,
            mean_pp,
            mean_xp,
        })
    }
}

/// Free propagation of a normalized field.
pub fn propagate_free(field: &GridField, t: f64, mass: f64, hbar: f64) -> Result<GridField> {
    let norm = field.norm();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized(norm));
    }
    FreePropagator::for_field(field).propagate(field, t, mass, hbar)
}

pub fn numeric_moments(field: &GridField, hbar: f64) -> Result<CovarianceMatrix> {
    Ok(FreePropagator::for_field(field)
        .moments(field, hbar)?
        .covariance())
}

fn wrap(angle: f64) -> f64 {
    (angle + PI).rem_euclid(TAU) - PI
}

fn on_axis_phase(field: &GridField) -> Result<f64> {
    let peak = field.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let amp = field.on_axis();
    if amp.norm() < 1e-12 * peak {
        return Err(Error::PhaseUndefined(amp.norm() / peak));
    }
    Ok(amp.arg())
}

/// On-axis phase relative to `reference` at each time of an ascending ladder
/// starting at 0, unwrapped along the ladder. The ladder is refined until
/// consecutive phases differ by less than π/2.
pub fn numeric_gouy_ladder(
    reference: &GridField,
    times: &[f64],
    mass: f64,
    hbar: f64,
) -> Result<Vec<f64>> {
    let propagator = FreePropagator::for_field(reference);
    let phase0 = on_axis_phase(reference)?;
    let raw = |t: f64| -> Result<f64> {
        let field = propagator.propagate(reference, t, mass, hbar)?;
        Ok(on_axis_phase(&field)? - phase0)
    };

    let mut out = Vec::with_capacity(times.len());
    let mut last_t = 0.0;
    let mut last_phase = 0.0;
    for &t in times {
        let mut substeps = 1usize;
        'refine: loop {
            let mut phase = last_phase;
            let mut ok = true;
            for s in 1..=substeps {
                let ts = last_t + (t - last_t) * s as f64 / substeps as f64;
                let step = wrap(raw(ts)? - phase);
                if step.abs() >= PI / 2.0 {
                    ok = false;
                    break;
                }
                phase += step;
            }
            if ok {
                last_phase = phase;
                break 'refine;
            }
            substeps *= 2;
            if substeps > 1 << 16 {
                return Err(Error::Domain("phase unwrapping did not settle".into()));
            }
        }
        last_t = t;
        out.push(last_phase);
    }
    Ok(out)
}

/// Gouy phase of a zero-mean-momentum packet at time `t`, unwrapped over a
/// ladder of `steps` equal intervals.
pub fn numeric_gouy(
    reference: &GridField,
    t: f64,
    mass: f64,
    hbar: f64,
    steps: usize,
) -> Result<f64> {
    let steps = steps.max(1);
    let times: Vec<f64> = (1..=steps).map(|i| t * i as f64 / steps as f64).collect();
    Ok(*numeric_gouy_ladder(reference, &times, mass, hbar)?
        .last()
        .expect("at least one ladder step"))
}

/// Wavefront curvature radius (in seconds) from a least-squares fit of the
/// spatial phase to a + c·x² over the central ±width of the packet:
/// R = m / (2ħc).
pub fn fit_curvature_radius(field: &GridField, mass: f64, hbar: f64) -> Result<f64> {
    let propagator = FreePropagator::for_field(field);
    let moments = propagator.moments(field, hbar)?;
    let width = (2.0 * moments.covariance().sigma_xx).sqrt();
    let centre = field.axis_index();
    let reach = (width / field.dx()).floor() as usize;
    if reach < 2 {
        return Err(Error::Domain(
            "packet narrower than the grid spacing".into(),
        ));
    }

    let mut phases = vec![0.0; 2 * reach + 1];
    phases[reach] = on_axis_phase(field)?;
    for dir in [1isize, -1] {
        let mut prev = phases[reach];
        for s in 1..=reach as isize {
            let j = (centre as isize + dir * s) as usize;
            let next = prev + wrap(field.values[j].arg() - prev);
            phases[(reach as isize + dir * s) as usize] = next;
            prev = next;
        }
    }

    // linear regression of phase on u = x²
    let n = phases.len() as f64;
    let (mut su, mut sp, mut suu, mut sup) = (0.0, 0.0, 0.0, 0.0);
    for (i, &phase) in phases.iter().enumerate() {
        let x = field.x(centre + i - reach);
        let u = x * x;
        su += u;
        sp += phase;
        suu += u * u;
        sup += u * phase;
    }
    let slope = (n * sup - su * sp) / (n * suu - su * su);
    if slope == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(mass / (2.0 * hbar * slope))
}

/// How the k_x average is realized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSpec {
    /// Gauss–Hermite nodes, or the sample count in sampling mode.
    pub quadrature_nodes: usize,
    /// `Some(seed)` switches to seeded Monte Carlo sampling of k_x.
    pub seed: Option<u64>,
    /// Overrides the automatic point count.
    pub grid_n: Option<usize>,
    /// Overrides the automatic half-span (m).
    pub half_span: Option<f64>,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            quadrature_nodes: 32,
            seed: None,
            grid_n: None,
            half_span: None,
        }
    }
}

impl EnsembleSpec {
    fn validate(&self) -> Result<()> {
        if self.quadrature_nodes < 8 {
            return Err(Error::invalid(
                "quadrature_nodes",
                format!("must be >= 8, got {}", self.quadrature_nodes),
            ));
        }
        Ok(())
    }
}

/// Boosted members of a mixed state, ready to be evolved to any time up to
/// the horizon the grid was sized for.
pub struct Ensemble {
    propagator: FreePropagator,
    template: GridField,
    members: Vec<(f64, Vec<Complex64>)>,
    mass: f64,
    hbar: f64,
}

impl std::fmt::Debug for Ensemble {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Ensemble")
            .field("grid_n", &self.template.n())
            .field("members", &self.members.len())
            .finish()
    }
}

/// Ensemble second moments and the averaged intensity at one time.
#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub covariance: CovarianceMatrix,
    pub profile: IntensityProfile,
}

impl Ensemble {
    pub fn new(state: &MixedState, t_horizon: f64, spec: &EnsembleSpec) -> Result<Self> {
        spec.validate()?;
        let b = state.b();
        let dk = state.delta_kx();
        let mass = state.particle.mass();
        let hbar = state.hbar();

        // k_x = δk·u with weight exp(−u²)/√π realizes g(k) ∝ exp(−k²/δk²)
        let nodes: Vec<(f64, f64)> = if dk == 0.0 {
            vec![(0.0, 1.0)]
        } else if let Some(seed) = spec.seed {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let normal = Normal::new(0.0, dk / 2f64.sqrt()).expect("finite spread");
            let w = 1.0 / spec.quadrature_nodes as f64;
            (0..spec.quadrature_nodes)
                .map(|_| (normal.sample(&mut rng), w))
                .collect()
        } else {
            let (u, w) = gauss_hermite(spec.quadrature_nodes);
            u.iter()
                .zip(&w)
                .map(|(&ui, &wi)| (dk * ui, wi / PI.sqrt()))
                .collect()
        };
        let k_boost = nodes.iter().map(|(k, _)| k.abs()).fold(0.0, f64::max);

        let auto = GridSpec::auto(b, mass, hbar, t_horizon, k_boost);
        let grid = GridSpec::new(
            spec.half_span.unwrap_or(auto.half_span),
            spec.grid_n.unwrap_or(auto.n),
        )?;
        let template = GridField::gaussian(b, &grid);
        let propagator = FreePropagator::for_field(&template);
        let members = nodes
            .par_iter()
            .map(|&(k, w)| (w, propagator.spectrum(&template.boosted(k))))
            .collect();
        Ok(Self {
            propagator,
            template,
            members,
            mass,
            hbar,
        })
    }

    pub fn grid_n(&self) -> usize {
        self.template.n()
    }

    fn evolve_member(&self, spectrum: &[Complex64], t: f64) -> Result<(GridField, Vec<Complex64>)> {
        let evolved = self
            .propagator
            .evolve_spectrum(spectrum, t, self.mass, self.hbar);
        let field = self.propagator.synthesize(evolved.clone(), &self.template);
        field.check_boundary()?;
        Ok((field, evolved))
    }

    fn raw_at(&self, t: f64, want_density: bool) -> Result<(RawMoments, Vec<f64>)> {
        let per_member: Vec<(f64, RawMoments, Vec<f64>)> = self
            .members
            .par_iter()
            .map(|(w, spectrum)| {
                let (field, evolved) = self.evolve_member(spectrum, t)?;
                let m = self
                    .propagator
                    .moments_from_parts(&field, &evolved, self.hbar)?;
                let density = if want_density {
                    field.values.iter().map(|v| v.norm_sqr()).collect()
                } else {
                    Vec::new()
                };
                Ok((*w, m, density))
            })
            .collect::<Result<_>>()?;

        let moments = RawMoments::weighted_sum(per_member.iter().map(|(w, m, _)| (*w, m)));
        let mut density = vec![0.0; if want_density { self.template.n() } else { 0 }];
        if want_density {
            for (w, _, d) in &per_member {
                density.iter_mut().zip(d).for_each(|(acc, v)| *acc += w * v);
            }
        }
        Ok((moments, density))
    }

    pub fn covariance_at(&self, t: f64) -> Result<CovarianceMatrix> {
        Ok(self.raw_at(t, false)?.0.covariance())
    }

    pub fn average_at(&self, t: f64) -> Result<EnsembleResult> {
        let (moments, density) = self.raw_at(t, true)?;
        let grid = (0..self.template.n()).map(|j| self.template.x(j)).collect();
        Ok(EnsembleResult {
            covariance: moments.covariance(),
            profile: IntensityProfile {
                t,
                grid,
                values: density,
            },
        })
    }
}

/// Averages grid-propagated boosted packets over the k_x distribution.
pub fn ensemble_average(state: &MixedState, t: f64, spec: &EnsembleSpec) -> Result<EnsembleResult> {
    Ensemble::new(state, t, spec)?.average_at(t)
}

/// One checkpoint of the width-integral check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjectureRow {
    pub t: f64,
    pub numeric: f64,
    pub closed_form: f64,
    pub rel_deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjectureReport {
    pub rows: Vec<ConjectureRow>,
    pub max_rel_deviation: f64,
    pub ladder_points: usize,
}

/// Integrates −(ħ/2m) dt/B̄² with B̄ measured from the ensemble and compares
/// the result to the closed-form mixed-state Gouy phase.
///
/// The ladder is uniform in φ = arctan(t/τ_b), so dt = τ_b sec²φ dφ; Romberg
/// extrapolation is applied on the prefixes ending at 1/8, 1/4, 1/2 and all
/// of the ladder. `steps` is rounded up to a power of two.
pub fn verify_conjecture(
    state: &MixedState,
    t_max: f64,
    steps: usize,
    spec: &EnsembleSpec,
) -> Result<ConjectureReport> {
    if steps < 16 {
        return Err(Error::invalid(
            "steps",
            format!("must be >= 16, got {steps}"),
        ));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::invalid("t_max", "must be positive and finite"));
    }
    let steps = steps.next_power_of_two();
    let tau = state.params.tau_b();
    let mass = state.particle.mass();
    let hbar = state.hbar();
    let ensemble = Ensemble::new(state, t_max, spec)?;

    let phi_max = (t_max / tau).atan();
    let h = phi_max / steps as f64;
    let integrand: Vec<f64> = (0..=steps)
        .into_iter()
        .map(|j| {
            let phi = j as f64 * h;
            let t = if j == steps { t_max } else { tau * phi.tan() };
            let sigma_xx = ensemble.covariance_at(t)?.sigma_xx;
            let sec = 1.0 / phi.cos();
            Ok(tau * sec * sec / (2.0 * sigma_xx))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for divisor in [8usize, 4, 2, 1] {
        let end = steps / divisor;
        let t = if end == steps {
            t_max
        } else {
            tau * (end as f64 * h).tan()
        };
        let numeric = -hbar / (2.0 * mass) * romberg(&integrand[..=end], h)?;
        let closed_form = state.gouy(t);
        rows.push(ConjectureRow {
            t,
            numeric,
            closed_form,
            rel_deviation: ((numeric - closed_form) / closed_form).abs(),
        });
    }
    let max_rel_deviation = rows.iter().map(|r| r.rel_deviation).fold(0.0, f64::max);
    Ok(ConjectureReport {
        rows,
        max_rel_deviation,
        ladder_points: steps + 1,
    })
}
