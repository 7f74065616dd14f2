//! Scalar functionals of a velocity field: energies, helicity, spin-resolved
//! Sobolev norms, critical determinants, the weak–strong rate `γ`, and the
//! dynamic wavenumber `Q`.
//!
//! Homogeneous norms (`spin_sobolev` and friends) run over `ξ ≠ 0`; the mean
//! flow carries no helicity and is excluded. Nyquist planes are never part of
//! the resolved field and are skipped as well.

mod audit;

pub use audit::{
    balance_audit, convergence_orders, subsample, weak_strong_audit, BalanceAudit, GaugeResidual,
    ThetaResidual, WeakStrongAudit,
};

use crate::curl::{curl, fractional_laplacian_half_pow, signed_curl_pow, spin_mode, spin_split, Spin};
use crate::error::{Error, Result};
use crate::grid::{
    cross_field, det_field, dot_field, gradient_tensor, inverse_transform_unchecked, norm_c3, Lattice,
    PhysicalScalarField, PhysicalVectorField, SpectralVectorField,
};
use crate::par;
use crate::solver::{advection, pressure_recover};

/// Relative tolerance between the physical and spectral helicity routes.
pub const HELICITY_ROUTE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasicFunctionals {
    pub energy: f64,
    pub enstrophy: f64,
    /// `∫u`.
    pub momentum: [f64; 3],
    pub max_u: f64,
    pub max_omega: f64,
}

pub fn basic_functionals(u: &SpectralVectorField) -> BasicFunctionals {
    let omega_hat = curl(u);
    let vel = inverse_transform_unchecked(u);
    let omega = inverse_transform_unchecked(&omega_hat);
    basic_from_parts(u, &omega_hat, &vel, &omega)
}

fn basic_from_parts(
    u: &SpectralVectorField,
    omega_hat: &SpectralVectorField,
    vel: &PhysicalVectorField,
    omega: &PhysicalVectorField,
) -> BasicFunctionals {
    let v = u.lattice.volume();
    let mean = u.mean();
    BasicFunctionals {
        energy: u.l2_norm_sq(),
        enstrophy: omega_hat.l2_norm_sq(),
        momentum: [mean[0].re * v, mean[1].re * v, mean[2].re * v],
        max_u: vel.max_norm(),
        max_omega: omega.max_norm(),
    }
}

// ---------------------------------------------------------------------------
// spin-resolved norms

/// `(‖rot₊^{s/2}u‖², ‖rot₋^{s/2}u‖²)` for every exponent `s` in `orders`.
pub fn spin_sobolev_orders(u: &SpectralVectorField, orders: &[f64]) -> Vec<(f64, f64)> {
    let lat = u.lattice;
    // |ξ|, |ℚ₊û|², |ℚ₋û|² per resolved mode
    let weights = par::map_range(lat.len(), |i| {
        if i == 0 || lat.is_nyquist(i) {
            return (0.0, 0.0, 0.0);
        }
        let m = u.mode(i);
        let v = u.at(i);
        let p = norm_c3(spin_mode(m.xi, m.xi_sq, v, Spin::Plus));
        let q = norm_c3(spin_mode(m.xi, m.xi_sq, v, Spin::Minus));
        (m.xi_norm(), p * p, q * q)
    });
    let vol = lat.volume();
    orders
        .iter()
        .map(|&s| {
            let plus = par::sum_range(weights.len(), |i| {
                let (r, p, _) = weights[i];
                if r == 0.0 { 0.0 } else { r.powf(s) * p }
            });
            let minus = par::sum_range(weights.len(), |i| {
                let (r, _, q) = weights[i];
                if r == 0.0 { 0.0 } else { r.powf(s) * q }
            });
            (vol * plus, vol * minus)
        })
        .collect()
}

/// `(‖rot₊^{n/2}u‖², ‖rot₋^{n/2}u‖²)`; `n = 0` gives the spin energies.
pub fn spin_sobolev(u: &SpectralVectorField, n: u32) -> (f64, f64) {
    spin_sobolev_orders(u, &[n as f64])[0]
}

/// `‖u‖²_{Ḣ^{n/2}}` from `|ξ|ⁿ` weights, without any spin projection.
pub fn homogeneous_sobolev(u: &SpectralVectorField, n: u32) -> f64 {
    let lat = u.lattice;
    lat.volume()
        * par::sum_range(lat.len(), |i| {
            if i == 0 || lat.is_nyquist(i) {
                return 0.0;
            }
            let m = u.mode(i);
            let a = norm_c3(u.at(i));
            m.xi_norm().powi(n as i32) * a * a
        })
}

/// `‖rot₊^{1/2}u‖² − ‖rot₋^{1/2}u‖²`.
pub fn helicity_spectral(u: &SpectralVectorField) -> f64 {
    let (p, m) = spin_sobolev(u, 1);
    p - m
}

/// `∫ω·u` as a grid sum.
pub fn helicity_physical(u: &SpectralVectorField) -> f64 {
    let vel = inverse_transform_unchecked(u);
    let omega = inverse_transform_unchecked(&curl(u));
    dot_field(&omega, &vel).integral()
}

/// Helicity by both routes; fails with [`Error::RouteMismatch`] when they
/// disagree by more than [`HELICITY_ROUTE_TOLERANCE`] relative to
/// `‖u‖²_{Ḣ^{1/2}}`. Returns the spectral value.
pub fn helicity(u: &SpectralVectorField) -> Result<f64> {
    let (p, m) = spin_sobolev(u, 1);
    check_helicity(p, m, helicity_physical(u))
}

fn check_helicity(plus: f64, minus: f64, physical: f64) -> Result<f64> {
    let spectral = plus - minus;
    let scale = plus + minus;
    if (spectral - physical).abs() > HELICITY_ROUTE_TOLERANCE * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::RouteMismatch { quantity: "helicity", a: spectral, b: physical });
    }
    Ok(spectral)
}

/// `∫∇ω : ∇u`, the helicity dissipation density, in physical space.
pub fn helicity_dissipation_physical(u: &SpectralVectorField) -> f64 {
    let gu = gradient_tensor(u);
    let gw = gradient_tensor(&curl(u));
    let lat = u.lattice;
    lat.cell_volume()
        * par::sum_range(lat.len(), |i| {
            let mut s = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    s += gw[a][b].data[i] * gu[a][b].data[i];
                }
            }
            s
        })
}

// ---------------------------------------------------------------------------
// determinants

/// A grid integral together with the integral of its absolute value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeterminantIntegral {
    pub integral: f64,
    pub mass: f64,
}

impl DeterminantIntegral {
    fn of(f: &PhysicalScalarField) -> Self {
        DeterminantIntegral { integral: f.integral(), mass: f.abs_integral() }
    }
}

fn det_integral(a: &PhysicalVectorField, b: &PhysicalVectorField, c: &PhysicalVectorField) -> DeterminantIntegral {
    DeterminantIntegral::of(&det_field(a, b, c))
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta >= 0.0 && theta.is_finite()) {
        return Err(Error::InvalidConfig(format!("determinant exponent θ = {theta} must be ≥ 0")));
    }
    Ok(())
}

/// `∫det(rot u, u, |D|^{2θ}u)` with its pointwise L¹ mass.
///
/// Since `det(rot u, u, −Δu) = det(u, rot u, Δu)`, θ = 1 is exactly the
/// vortex-stretching drive of the enstrophy.
pub fn critical_determinant_with_mass(u: &SpectralVectorField, theta: f64) -> Result<DeterminantIntegral> {
    check_theta(theta)?;
    let vel = inverse_transform_unchecked(u);
    let omega = inverse_transform_unchecked(&curl(u));
    let w = inverse_transform_unchecked(&fractional_laplacian_half_pow(u, 2.0 * theta)?);
    Ok(det_integral(&omega, &vel, &w))
}

pub fn critical_determinant(u: &SpectralVectorField, theta: f64) -> Result<f64> {
    critical_determinant_with_mass(u, theta).map(|d| d.integral)
}

/// `∫det(rot u, u, rot±^{2θ}u)`; the two spins sum to the plain determinant.
pub fn critical_determinant_spin(u: &SpectralVectorField, theta: f64, spin: Spin) -> Result<DeterminantIntegral> {
    check_theta(theta)?;
    let vel = inverse_transform_unchecked(u);
    let omega = inverse_transform_unchecked(&curl(u));
    let w = inverse_transform_unchecked(&signed_curl_pow(u, spin, 2.0 * theta)?);
    Ok(det_integral(&omega, &vel, &w))
}

/// `−2∫det(u, rot₊u, rot₋u)`, the spin-interaction form of the θ = ½ determinant.
pub fn helical_interaction_determinant(u: &SpectralVectorField) -> Result<DeterminantIntegral> {
    let vel = inverse_transform_unchecked(u);
    let rp = inverse_transform_unchecked(&signed_curl_pow(u, Spin::Plus, 1.0)?);
    let rm = inverse_transform_unchecked(&signed_curl_pow(u, Spin::Minus, 1.0)?);
    let d = det_integral(&vel, &rp, &rm);
    Ok(DeterminantIntegral { integral: -2.0 * d.integral, mass: 2.0 * d.mass })
}

/// `∫det(rot u, u⁻, u⁺)`.
pub fn det_zero_mode_with_mass(u: &SpectralVectorField) -> DeterminantIntegral {
    let pair = spin_split(u);
    let omega = inverse_transform_unchecked(&curl(u));
    let plus = inverse_transform_unchecked(&pair.plus);
    let minus = inverse_transform_unchecked(&pair.minus);
    det_integral(&omega, &minus, &plus)
}

pub fn det_zero_mode(u: &SpectralVectorField) -> f64 {
    det_zero_mode_with_mass(u).integral
}

/// `(∫det(rot u, u, u⁺), ∫det(rot u, u, u⁻))`, which equal `±det_zero_mode`.
pub fn det_zero_partials(u: &SpectralVectorField) -> (f64, f64) {
    let pair = spin_split(u);
    let vel = inverse_transform_unchecked(u);
    let omega = inverse_transform_unchecked(&curl(u));
    let plus = inverse_transform_unchecked(&pair.plus);
    let minus = inverse_transform_unchecked(&pair.minus);
    (det_integral(&omega, &vel, &plus).integral, det_integral(&omega, &vel, &minus).integral)
}

// ---------------------------------------------------------------------------
// weak–strong rate

/// `γ = ‖u₁×u₂‖² / ‖u₁−u₂‖²`.
pub fn weak_strong_gamma(u1: &SpectralVectorField, u2: &SpectralVectorField) -> Result<f64> {
    if u1.lattice != u2.lattice {
        return Err(Error::LatticeMismatch);
    }
    let diff = u1.sub(u2).l2_norm_sq();
    let scale = u1.l2_norm_sq().max(u2.l2_norm_sq());
    if diff < 1e-28 * scale || diff == 0.0 {
        return Err(Error::IdenticalFields);
    }
    let a = inverse_transform_unchecked(u1);
    let b = inverse_transform_unchecked(u2);
    Ok(cross_field(&a, &b).l2_norm_sq() / diff)
}

// ---------------------------------------------------------------------------
// dynamic wavenumber

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicWavenumber {
    pub q: u32,
    /// `‖ω_{≤Q}‖_{L∞}` with `ω_{≤Q}` the part of `ω` on `|ξ| < 2^Q`.
    pub omega_lowpass_max: f64,
}

/// Sharp dyadic shell index `p ≥ 1` with `2^{p−1} ≤ |ξ| < 2^p`; `0` for `|ξ| < 1`.
pub fn shell_index(xi_norm: f64) -> u32 {
    if xi_norm < 1.0 {
        0
    } else {
        xi_norm.log2().floor() as u32 + 1
    }
}

fn band_pass(u: &SpectralVectorField, keep: impl Fn(f64) -> bool + Sync + Send) -> SpectralVectorField {
    u.map_modes(|m, v| if keep(m.xi_norm()) { v } else { [crate::grid::C64::new(0.0, 0.0); 3] })
}

/// `Q = min{q : 2^{−p}‖Δ_p u‖_{L∞} < c₀ν for all p > q}` over sharp shells.
pub fn dynamic_wavenumber(u: &SpectralVectorField, nu: f64, c0: f64) -> DynamicWavenumber {
    let lat = u.lattice;
    let top = par::max_range(lat.len(), |i| if lat.is_nyquist(i) { 0.0 } else { u.mode(i).xi_norm() });
    let p_max = shell_index(top);
    let mut q = 0;
    for p in (1..=p_max).rev() {
        let shell = band_pass(u, |r| shell_index(r) == p);
        let sup = inverse_transform_unchecked(&shell).max_norm();
        if sup / 2f64.powi(p as i32) >= c0 * nu {
            q = p;
            break;
        }
    }
    let cutoff = 2f64.powi(q as i32);
    let low = band_pass(&curl(u), |r| r < cutoff);
    DynamicWavenumber { q, omega_lowpass_max: inverse_transform_unchecked(&low).max_norm() }
}

// ---------------------------------------------------------------------------
// orthogonality

/// Normalized residuals of the inner products that vanish identically for
/// smooth divergence-free fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthogonalityReport {
    /// `⟨(u·∇)u, ω⟩`
    pub advection_vorticity: f64,
    /// `⟨(u·∇)ω, u⟩`
    pub vorticity_transport_velocity: f64,
    /// `⟨(ω·∇)u, u⟩`
    pub stretching_velocity: f64,
    /// `⟨(u·∇)u, u⟩`
    pub advection_velocity: f64,
    /// `⟨∇p, ω⟩`
    pub pressure_vorticity: f64,
}

impl OrthogonalityReport {
    pub fn entries(&self) -> [(&'static str, f64); 5] {
        [
            ("<(u.grad)u, w>", self.advection_vorticity),
            ("<(u.grad)w, u>", self.vorticity_transport_velocity),
            ("<(w.grad)u, u>", self.stretching_velocity),
            ("<(u.grad)u, u>", self.advection_velocity),
            ("<grad p, w>", self.pressure_vorticity),
        ]
    }

    pub fn max(&self) -> f64 {
        self.entries().iter().map(|e| e.1).fold(0.0, f64::max)
    }
}

fn tensor_norm(g: &[[PhysicalScalarField; 3]; 3]) -> f64 {
    let lat = g[0][0].lattice;
    let s = par::sum_range(lat.len(), |i| {
        let mut s = 0.0;
        for row in g {
            for f in row {
                s += f.data[i] * f.data[i];
            }
        }
        s
    });
    (s * lat.cell_volume()).sqrt()
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 { 0.0 } else { num.abs() / den }
}

/// Each inner product is divided by `‖a‖_{L∞}‖∇b‖_{L²}‖c‖_{L²}` for its
/// factors `⟨(a·∇)b, c⟩`; the pressure term shares the scale of the first.
pub fn orthogonality_suite(u: &SpectralVectorField) -> OrthogonalityReport {
    let omega_hat = curl(u);
    let vel = inverse_transform_unchecked(u);
    let omega = inverse_transform_unchecked(&omega_hat);
    let gu = gradient_tensor(u);
    let gw = gradient_tensor(&omega_hat);
    let adv_u = advection(u);
    let adv_w = crate::grid::advect(&vel, &gw);
    let stretch = crate::grid::advect(&omega, &gu);
    let grad_p = inverse_transform_unchecked(&crate::grid::gradient_spectral(&pressure_recover(u)));

    let (nu_inf, nw_inf) = (vel.max_norm(), omega.max_norm());
    let (nu2, nw2) = (vel.l2_norm_sq().sqrt(), omega.l2_norm_sq().sqrt());
    let (ngu, ngw) = (tensor_norm(&gu), tensor_norm(&gw));
    let base = nu_inf * ngu * nw2;
    OrthogonalityReport {
        advection_vorticity: ratio(adv_u.inner(&omega), base),
        vorticity_transport_velocity: ratio(adv_w.inner(&vel), nu_inf * ngw * nu2),
        stretching_velocity: ratio(stretch.inner(&vel), nw_inf * ngu * nu2),
        advection_velocity: ratio(adv_u.inner(&vel), nu_inf * ngu * nu2),
        pressure_vorticity: ratio(grad_p.inner(&omega), base),
    }
}

// ---------------------------------------------------------------------------
// records

#[derive(Debug, Clone, PartialEq)]
pub struct DiagConfig {
    pub nu: f64,
    /// Orders `n` of `‖rot±^{n/2}u‖²`.
    pub n_list: Vec<u32>,
    /// Exponents θ of `∫det(rot u, u, |D|^{2θ}u)`.
    pub theta_list: Vec<f64>,
    pub c0: f64,
}

impl Default for DiagConfig {
    fn default() -> Self {
        DiagConfig { nu: 0.05, n_list: vec![0, 2, 4], theta_list: vec![0.0, 0.5, 1.0, 1.3], c0: 1.0 }
    }
}

impl DiagConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.c0 > 0.0) {
            return Err(Error::InvalidConfig("nu and c0 must be positive".into()));
        }
        for &t in &self.theta_list {
            check_theta(t)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinOrder {
    pub n: u32,
    pub plus: f64,
    pub minus: f64,
}

/// One time-stamped row of scalar diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagRecord {
    pub t: f64,
    pub energy: f64,
    pub enstrophy: f64,
    pub helicity: f64,
    pub hhalf_plus: f64,
    pub hhalf_minus: f64,
    pub h3half_plus: f64,
    pub h3half_minus: f64,
    pub hs: Vec<SpinOrder>,
    /// `(θ, ∫det(rot u, u, |D|^{2θ}u))`
    pub det_theta: Vec<(f64, f64)>,
    pub det_zero: f64,
    pub max_u: f64,
    pub max_omega: f64,
    pub q_dyn: u32,
    pub omega_lowpass_max: f64,
    pub momentum: [f64; 3],
}

impl DiagRecord {
    pub fn hs(&self, n: u32) -> Option<(f64, f64)> {
        self.hs.iter().find(|s| s.n == n).map(|s| (s.plus, s.minus))
    }

    pub fn det_theta(&self, theta: f64) -> Option<f64> {
        self.det_theta.iter().find(|d| d.0 == theta).map(|d| d.1)
    }

    /// Sign and bound invariants: non-negative norms,
    /// `|ℋ| ≤ ‖u‖²_{Ḣ^{1/2}}` and `|ℋ| ≤ ‖u‖‖ω‖`.
    pub fn invariants_hold(&self) -> bool {
        let slack = 1.0 + 1e-12;
        let nonneg = self.energy >= 0.0
            && self.enstrophy >= 0.0
            && [self.hhalf_plus, self.hhalf_minus, self.h3half_plus, self.h3half_minus]
                .iter()
                .all(|v| *v >= 0.0)
            && self.hs.iter().all(|s| s.plus >= 0.0 && s.minus >= 0.0);
        let h = self.helicity.abs();
        nonneg
            && h <= (self.hhalf_plus + self.hhalf_minus) * slack
            && h <= (self.energy * self.enstrophy).sqrt() * slack
    }
}

/// Evaluates every configured diagnostic for one state.
pub fn compute_record(u: &SpectralVectorField, t: f64, cfg: &DiagConfig) -> Result<DiagRecord> {
    let lat: Lattice = u.lattice;
    let omega_hat = curl(u);
    let vel = inverse_transform_unchecked(u);
    let omega = inverse_transform_unchecked(&omega_hat);
    let basic = basic_from_parts(u, &omega_hat, &vel, &omega);

    let mut orders = vec![1.0, 3.0];
    orders.extend(cfg.n_list.iter().map(|&n| n as f64));
    let norms = spin_sobolev_orders(u, &orders);
    let (hp, hm) = norms[0];
    let (h3p, h3m) = norms[1];
    let helicity = check_helicity(hp, hm, dot_field(&omega, &vel).integral())?;
    let hs = cfg
        .n_list
        .iter()
        .zip(&norms[2..])
        .map(|(&n, &(plus, minus))| SpinOrder { n, plus, minus })
        .collect();

    let mut det_theta = Vec::with_capacity(cfg.theta_list.len());
    for &theta in &cfg.theta_list {
        check_theta(theta)?;
        let w = inverse_transform_unchecked(&fractional_laplacian_half_pow(u, 2.0 * theta)?);
        det_theta.push((theta, det_field(&omega, &vel, &w).integral()));
    }
    let pair = spin_split(u);
    let det_zero = det_field(
        &omega,
        &inverse_transform_unchecked(&pair.minus),
        &inverse_transform_unchecked(&pair.plus),
    )
    .integral();
    let dynamic = dynamic_wavenumber(u, cfg.nu, cfg.c0);
    debug_assert_eq!(lat, omega.lattice);

    Ok(DiagRecord {
        t,
        energy: basic.energy,
        enstrophy: basic.enstrophy,
        helicity,
        hhalf_plus: hp,
        hhalf_minus: hm,
        h3half_plus: h3p,
        h3half_minus: h3m,
        hs,
        det_theta,
        det_zero,
        max_u: basic.max_u,
        max_omega: basic.max_omega,
        q_dyn: dynamic.q,
        omega_lowpass_max: dynamic.omega_lowpass_max,
        momentum: basic.momentum,
    })
}
