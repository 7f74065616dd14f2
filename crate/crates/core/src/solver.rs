//! Time integration of the rotational form
//!
//! ```text
//! ∂ₜu + ℙ((curl u) × u) + ν curl² u = 0
//! ```
//!
//! on the periodic lattice. On divergence-free fields `curl² = |D|²`, so the
//! viscous term is diagonal in Fourier space and is integrated exactly by the
//! factor `e^{−ν|ξ|²τ}`; the nonlinearity is advanced with classical
//! four-stage Runge–Kutta in the integrating-factor variables.

use crate::curl::{curl, leray_project};
use crate::error::{Error, Result};
use crate::grid::{
    cross_field, dealias, forward_scalar_field, forward_transform, gradient_tensor, i_times,
    inverse_transform_unchecked, rdot, strip_nyquist, Lattice, PhysicalScalarField,
    PhysicalVectorField, SpectralScalarField, SpectralVectorField, C64,
};
use crate::par;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Kinematic viscosity (L²/T).
    pub nu: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Apply the two-thirds rule to the nonlinear term.
    pub dealias: bool,
    pub diag_stride: u64,
    pub checkpoint_stride: u64,
    /// A step fails once `max|û|` exceeds this multiple of its initial value.
    pub blowup_factor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            nu: 0.05,
            dt: 1e-3,
            t_end: 1.0,
            dealias: true,
            diag_stride: 10,
            checkpoint_stride: 100,
            blowup_factor: 1e12,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::InvalidConfig(format!("nu = {} must be positive", self.nu)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidConfig(format!("t_end = {} must be non-negative", self.t_end)));
        }
        if self.diag_stride == 0 || self.checkpoint_stride == 0 {
            return Err(Error::InvalidConfig("strides must be at least 1".into()));
        }
        if self.blowup_factor.is_nan() || self.blowup_factor <= 1.0 {
            return Err(Error::InvalidConfig("blowup_factor must exceed 1".into()));
        }
        let steps = self.t_end / self.dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(Error::InvalidConfig(format!(
                "t_end = {} is not a whole number of steps of dt = {}",
                self.t_end, self.dt
            )));
        }
        Ok(())
    }

    pub fn step_count(&self) -> u64 {
        (self.t_end / self.dt).round() as u64
    }

    /// Advisory CFL step `0.5 h / max|u|` for a field (infinite for u = 0).
    pub fn cfl_advisory(lattice: &Lattice, max_u: f64) -> f64 {
        let h = lattice.spacing().iter().copied().fold(f64::INFINITY, f64::min);
        if max_u > 0.0 {
            0.5 * h / max_u
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub t: f64,
    pub u_hat: SpectralVectorField,
    pub step_index: u64,
}

impl SolverState {
    /// Leray-projects and dealiases a physical initial condition.
    pub fn initial(u0: &PhysicalVectorField) -> Self {
        Self::from_spectral(&forward_transform(u0))
    }

    pub fn from_spectral(u0: &SpectralVectorField) -> Self {
        SolverState { t: 0.0, u_hat: dealias(&leray_project(u0)), step_index: 0 }
    }
}

/// Tendency `−ℙ[(ω × u)]` with `ω = curl u`; dealiased when `dealias` is set.
pub fn nonlinear_term_with(u: &SpectralVectorField, dealias_output: bool) -> SpectralVectorField {
    let omega = inverse_transform_unchecked(&curl(u));
    let vel = inverse_transform_unchecked(u);
    let lamb = forward_transform(&cross_field(&omega, &vel));
    let lamb = if dealias_output { dealias(&lamb) } else { strip_nyquist(&lamb) };
    leray_project(&lamb).scaled(-1.0)
}

/// Dealiased rotational nonlinearity `−ℙ(ω × u)`.
pub fn nonlinear_term(u: &SpectralVectorField) -> SpectralVectorField {
    nonlinear_term_with(u, true)
}

/// Divergence form `−ℙ div(u ⊗ u)`, an independent route to the same
/// tendency for divergence-free `u`.
pub fn nonlinear_term_divergence_form(u: &SpectralVectorField) -> SpectralVectorField {
    let lat = u.lattice;
    let vel = inverse_transform_unchecked(u);
    // flux[i][j] = uᵢ uⱼ, transformed
    let mut flux: Vec<Vec<SpectralScalarField>> = Vec::with_capacity(3);
    for i in 0..3 {
        let mut row = Vec::with_capacity(3);
        for j in 0..3 {
            let data: Vec<f64> = vel.data[i].iter().zip(&vel.data[j]).map(|(a, b)| a * b).collect();
            row.push(forward_scalar_field(&PhysicalScalarField { lattice: lat, data }));
        }
        flux.push(row);
    }
    let div = SpectralVectorField::zeros(lat).map_modes(|m, _| {
        let mut out = [C64::new(0.0, 0.0); 3];
        for (i, o) in out.iter_mut().enumerate() {
            // (div(u⊗u))ᵢ = ∂ⱼ(uᵢuⱼ) — written with uⱼuᵢ symmetry
            let v = [flux[0][i].coeff[m.index], flux[1][i].coeff[m.index], flux[2][i].coeff[m.index]];
            *o = i_times(rdot(m.xi, v));
        }
        out
    });
    leray_project(&dealias(&div)).scaled(-1.0)
}

/// Pressure with `∇p = ∇(−Δ)⁻¹ div((u·∇)u)`, i.e. minus the gradient part of
/// the advection term; `p̂(0) = 0`.
pub fn pressure_recover(u: &SpectralVectorField) -> SpectralScalarField {
    let adv = forward_transform(&advection(u));
    let lat = u.lattice;
    let coeff = par::map_range(lat.len(), |i| {
        let m = adv.mode(i);
        if m.is_zero() || lat.is_nyquist(i) {
            return C64::new(0.0, 0.0);
        }
        i_times(rdot(m.xi, adv.at(i))) / m.xi_sq
    });
    SpectralScalarField { lattice: lat, coeff }
}

/// `(u·∇)u` in physical space.
pub fn advection(u: &SpectralVectorField) -> PhysicalVectorField {
    let grad = gradient_tensor(u);
    let vel = inverse_transform_unchecked(u);
    crate::grid::advect(&vel, &grad)
}

/// Precomputed integrating factors for a fixed `(lattice, ν, dt)`.
pub struct Stepper {
    cfg: SolverConfig,
    half: Vec<f64>,
    full: Vec<f64>,
    reference_max: Option<f64>,
}

impl Stepper {
    pub fn new(lattice: Lattice, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let factors = par::map_range(lattice.len(), |i| {
            let xi = lattice.wavevector(i);
            let k2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
            ((-cfg.nu * k2 * 0.5 * cfg.dt).exp(), (-cfg.nu * k2 * cfg.dt).exp())
        });
        let (half, full) = factors.into_iter().unzip();
        Ok(Stepper { cfg: cfg.clone(), half, full, reference_max: None })
    }

    fn tendency(&self, u: &SpectralVectorField) -> SpectralVectorField {
        nonlinear_term_with(u, self.cfg.dealias)
    }

    fn apply(&self, factor: &[f64], u: &SpectralVectorField) -> SpectralVectorField {
        u.map_modes(|m, v| {
            let f = factor[m.index];
            [v[0] * f, v[1] * f, v[2] * f]
        })
    }

    /// One integrating-factor RK4 step.
    pub fn step(&mut self, state: &SolverState) -> Result<SolverState> {
        let dt = self.cfg.dt;
        let u = &state.u_hat;
        let reference = *self.reference_max.get_or_insert_with(|| u.max_abs());

        let k1 = self.tendency(u);
        let a = self.apply(&self.half, &u.combine(&k1, 0.5 * dt));
        let k2 = self.tendency(&a);
        let eu = self.apply(&self.half, u);
        let b = eu.combine(&k2, 0.5 * dt);
        let k3 = self.tendency(&b);
        let c = self.apply(&self.full, u).combine(&self.apply(&self.half, &k3), dt);
        let k4 = self.tendency(&c);

        let mid = self.apply(&self.half, &k2.add(&k3));
        let incr = self.apply(&self.full, &k1).combine(&mid, 2.0).add(&k4);
        let next = self.apply(&self.full, u).combine(&incr, dt / 6.0);
        let next = if self.cfg.dealias { dealias(&next) } else { next };

        let step_index = state.step_index + 1;
        let t = step_index as f64 * dt;
        let peak = next.max_abs();
        let has_nan = next.coeff.iter().any(|c| c.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()));
        if has_nan {
            return Err(Error::BlowupDetected { t, step: step_index, reason: "non-finite coefficient".into() });
        }
        if reference > 0.0 && peak > self.cfg.blowup_factor * reference {
            return Err(Error::BlowupDetected {
                t,
                step: step_index,
                reason: format!("max |û| = {peak:e} exceeds {:e} × initial", self.cfg.blowup_factor),
            });
        }
        Ok(SolverState { t, u_hat: next, step_index })
    }
}

/// Single step with a freshly built [`Stepper`].
pub fn step(state: &SolverState, cfg: &SolverConfig) -> Result<SolverState> {
    Stepper::new(state.u_hat.lattice, cfg)?.step(state)
}

/// Consumer of solver output.
pub trait Observer {
    /// Called at step 0 and every `diag_stride` steps.
    fn on_diagnostic(&mut self, _state: &SolverState) -> Result<()> {
        Ok(())
    }

    /// Called at step 0 and every `checkpoint_stride` steps.
    fn on_checkpoint(&mut self, _state: &SolverState) -> Result<()> {
        Ok(())
    }
}

/// Runs from `u0` to `cfg.t_end`.
pub fn evolve(u0: &PhysicalVectorField, cfg: &SolverConfig, observers: &mut [&mut dyn Observer]) -> Result<SolverState> {
    evolve_spectral(&forward_transform(u0), cfg, observers)
}

pub fn evolve_spectral(
    u0: &SpectralVectorField,
    cfg: &SolverConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<SolverState> {
    let mut stepper = Stepper::new(u0.lattice, cfg)?;
    let mut state = SolverState::from_spectral(u0);
    let notify = |state: &SolverState, observers: &mut [&mut dyn Observer]| -> Result<()> {
        if state.step_index.is_multiple_of(cfg.diag_stride) {
            for o in observers.iter_mut() {
                o.on_diagnostic(state)?;
            }
        }
        if state.step_index.is_multiple_of(cfg.checkpoint_stride) {
            for o in observers.iter_mut() {
                o.on_checkpoint(state)?;
            }
        }
        Ok(())
    };
    notify(&state, observers)?;
    for _ in 0..cfg.step_count() {
        state = stepper.step(&state)?;
        notify(&state, observers)?;
    }
    Ok(state)
}

/// Collects every diagnostic-stride state.
#[derive(Default)]
pub struct StateRecorder {
    pub states: Vec<SolverState>,
}

impl Observer for StateRecorder {
    fn on_diagnostic(&mut self, state: &SolverState) -> Result<()> {
        self.states.push(state.clone());
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curl::Spin;
    use crate::forge::{beltrami_wave, random_spin_field_spectral, BeltramiWaveSpec, Chirality, Spectrum};
    use crate::grid::Lattice;

    #[test]
    fn config_validation() {
        let mut cfg = SolverConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.nu = 0.0;
        assert!(cfg.validate().is_err());
        let cfg = SolverConfig { t_end: 0.0105, dt: 1e-3, ..SolverConfig::default() };
        assert!(cfg.validate().is_err());
        let cfg = SolverConfig { diag_stride: 0, ..SolverConfig::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn beltrami_nonlinearity_vanishes() {
        let lat = Lattice::cubic(16).unwrap();
        let w = forward_transform(&beltrami_wave(lat, &BeltramiWaveSpec::new([1, 2, 0], Spin::Plus)).unwrap());
        assert!(nonlinear_term(&w).max_abs() < 1e-14);
    }

    #[test]
    fn nonlinearity_is_energy_neutral() {
        let lat = Lattice::cubic(16).unwrap();
        let u = random_spin_field_spectral(lat, 3, Chirality::Mixed, &Spectrum::default());
        let n = nonlinear_term(&u);
        let scale = (n.spectral_dot(&n) * u.spectral_dot(&u)).sqrt();
        assert!(n.spectral_dot(&u).abs() <= 1e-11 * scale);
        let w = curl(&u);
        let scale = (n.spectral_dot(&n) * w.spectral_dot(&w)).sqrt();
        assert!(n.spectral_dot(&w).abs() <= 1e-11 * scale);
    }

    #[test]
    fn zero_field_stays_zero() {
        let lat = Lattice::cubic(8).unwrap();
        let cfg = SolverConfig { t_end: 0.05, dt: 0.01, ..SolverConfig::default() };
        let end = evolve(&PhysicalVectorField::zeros(lat), &cfg, &mut []).unwrap();
        assert_eq!(end.u_hat.max_abs(), 0.0);
        assert_eq!(end.step_index, 5);
    }

    #[test]
    fn momentum_is_conserved_exactly() {
        let lat = Lattice::cubic(16).unwrap();
        let mut u = random_spin_field_spectral(lat, 8, Chirality::Mixed, &Spectrum::default());
        u.set(0, [C64::new(0.3, 0.0), C64::new(-0.1, 0.0), C64::new(0.05, 0.0)]);
        let cfg = SolverConfig { t_end: 0.05, dt: 0.01, ..SolverConfig::default() };
        let end = evolve_spectral(&u, &cfg, &mut []).unwrap();
        assert_eq!(end.u_hat.mean(), u.mean());
    }

    #[test]
    fn large_viscosity_decreases_energy_each_step() {
        let lat = Lattice::cubic(16).unwrap();
        let u = random_spin_field_spectral(lat, 5, Chirality::Mixed, &Spectrum::default());
        let cfg = SolverConfig { nu: 2.0, dt: 1e-3, t_end: 0.02, diag_stride: 1, ..SolverConfig::default() };
        let mut rec = StateRecorder::default();
        evolve_spectral(&u, &cfg, &mut [&mut rec]).unwrap();
        for w in rec.states.windows(2) {
            assert!(w[1].u_hat.l2_norm_sq() < w[0].u_hat.l2_norm_sq());
        }
    }

    #[test]
    fn blowup_sentinel_fires() {
        let lat = Lattice::cubic(16).unwrap();
        let u = random_spin_field_spectral(lat, 5, Chirality::Mixed, &Spectrum::default()).scaled(1e3);
        // tiny viscosity and a huge step force the explicit stages to diverge
        let cfg = SolverConfig { nu: 1e-6, dt: 1.0, t_end: 50.0, blowup_factor: 10.0, ..SolverConfig::default() };
        match evolve_spectral(&u, &cfg, &mut []) {
            Err(Error::BlowupDetected { t, .. }) => assert!(t > 0.0),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }
}
