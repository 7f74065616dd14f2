//! Time-series audits over diagnostic records.
//!
//! Time integrals use the cumulative trapezoid rule on the record grid, so
//! every residual carries an `O(Δt²)` quadrature error on top of the
//! integrator's own error.

use super::{weak_strong_gamma, DiagRecord};
use crate::error::{Error, Result};
use crate::solver::SolverState;

/// Relative spacing deviation tolerated before a series counts as non-uniform.
const UNIFORMITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GaugeResidual {
    pub lambda: f64,
    pub residual: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaResidual {
    pub theta: f64,
    pub residual: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceAudit {
    pub times: Vec<f64>,
    /// `(E(t) + 2ν∫‖ω‖² − E(0)) / E(0)`.
    pub energy_residual: Vec<f64>,
    /// `N₊(u,t) − N₋(u,t)` with `N± = ‖rot±^{1/2}u‖² + 2ν∫‖rot±^{3/2}u‖²`.
    pub np_minus_nm: Vec<f64>,
    /// `N₊/N₋`, infinite while `N₋ = 0`.
    pub np_over_nm: Vec<f64>,
    /// Drift of `N₊ − N₋` relative to `N₊(0) + N₋(0)`.
    pub np_minus_nm_residual: Vec<f64>,
    /// `ℋ(t) + 2ν∫(‖rot₊^{3/2}u‖² − ‖rot₋^{3/2}u‖²) − ℋ(0)`, same scale as above.
    pub helicity_balance_residual: Vec<f64>,
    /// Gauge-weighted energy balance with weight `e^{−2λt}`, relative to `E(0)`.
    pub gauge: Vec<GaugeResidual>,
    /// `‖|D|^θu‖²` balances driven by `−2∫det(rot u, u, |D|^{2θ}u)`, for every θ
    /// whose orders `2θ` and `2θ + 2` are recorded. θ = 1 is the enstrophy balance.
    pub theta: Vec<ThetaResidual>,
    /// Balance of `‖u⁺‖² − ‖u⁻‖²` driven by `−4∫det(rot u, u⁻, u⁺)`
    /// (requires orders 0 and 2; assumes zero mean flow).
    pub zero_mode_residual: Option<Vec<f64>>,
    /// `Z′/Z³` for the enstrophy `Z`, by finite differences.
    pub lu_doering_ratio: Vec<f64>,
    /// `∫‖ω‖_{L∞}`.
    pub bkm_vorticity: Vec<f64>,
    /// `∫‖u‖²_{L∞}`.
    pub bkm_velocity_sq: Vec<f64>,
    /// `∫‖ω_{≤Q}‖_{L∞}`.
    pub bkm_lowpass: Vec<f64>,
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

impl BalanceAudit {
    pub fn max_energy_residual(&self) -> f64 {
        max_abs(&self.energy_residual)
    }

    pub fn max_np_minus_nm_residual(&self) -> f64 {
        max_abs(&self.np_minus_nm_residual)
    }

    pub fn max_helicity_balance_residual(&self) -> f64 {
        max_abs(&self.helicity_balance_residual)
    }

    /// Largest gap between the helicity-balance and `N₊ − N₋` routes.
    pub fn route_gap(&self) -> f64 {
        self.np_minus_nm_residual
            .iter()
            .zip(&self.helicity_balance_residual)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn check_uniform(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::EmptySeries);
    }
    if times.len() < 3 {
        return Ok(());
    }
    let dt = times[1] - times[0];
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::NonUniformSeries { index: 1 });
    }
    for (i, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - dt).abs() > UNIFORMITY_TOLERANCE * dt.max(w[1].abs()) {
            return Err(Error::NonUniformSeries { index: i + 1 });
        }
    }
    Ok(())
}

/// Cumulative trapezoid integral `∫_{t₀}^{tᵢ} f`.
fn cumulative(times: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    out.push(acc);
    for i in 1..f.len() {
        acc += 0.5 * (times[i] - times[i - 1]) * (f[i - 1] + f[i]);
        out.push(acc);
    }
    out
}

fn scale_or_one(s: f64) -> f64 {
    if s == 0.0 { 1.0 } else { s }
}

fn column(series: &[DiagRecord], f: impl Fn(&DiagRecord) -> f64) -> Vec<f64> {
    series.iter().map(f).collect()
}

/// Residuals of every balance law along a uniformly sampled run.
pub fn balance_audit(series: &[DiagRecord], nu: f64, gauge_lambdas: &[f64]) -> Result<BalanceAudit> {
    let times = column(series, |r| r.t);
    check_uniform(&times)?;
    let energy = column(series, |r| r.energy);
    let enstrophy = column(series, |r| r.enstrophy);
    let e0 = scale_or_one(energy[0]);

    let int_z = cumulative(&times, &enstrophy);
    let energy_residual: Vec<f64> =
        (0..times.len()).map(|i| (energy[i] + 2.0 * nu * int_z[i] - energy[0]) / e0).collect();

    let gauge = gauge_lambdas
        .iter()
        .map(|&lambda| {
            let weight: Vec<f64> = times.iter().map(|t| (-2.0 * lambda * (t - times[0])).exp()).collect();
            let we: Vec<f64> = weight.iter().zip(&energy).map(|(w, e)| w * e).collect();
            let wz: Vec<f64> = weight.iter().zip(&enstrophy).map(|(w, z)| w * z).collect();
            let (ie, iz) = (cumulative(&times, &we), cumulative(&times, &wz));
            let residual = (0..times.len())
                .map(|i| (we[i] + 2.0 * lambda * ie[i] + 2.0 * nu * iz[i] - energy[0]) / e0)
                .collect();
            GaugeResidual { lambda, residual }
        })
        .collect();

    let int_p = cumulative(&times, &column(series, |r| r.h3half_plus));
    let int_m = cumulative(&times, &column(series, |r| r.h3half_minus));
    let n_plus: Vec<f64> = (0..times.len()).map(|i| series[i].hhalf_plus + 2.0 * nu * int_p[i]).collect();
    let n_minus: Vec<f64> = (0..times.len()).map(|i| series[i].hhalf_minus + 2.0 * nu * int_m[i]).collect();
    let np_minus_nm: Vec<f64> = n_plus.iter().zip(&n_minus).map(|(p, m)| p - m).collect();
    let np_over_nm = n_plus.iter().zip(&n_minus).map(|(p, m)| p / m).collect();
    let n_scale = scale_or_one(n_plus[0] + n_minus[0]);
    let np_minus_nm_residual = np_minus_nm.iter().map(|d| (d - np_minus_nm[0]) / n_scale).collect();

    let h3diff = column(series, |r| r.h3half_plus - r.h3half_minus);
    let int_h3 = cumulative(&times, &h3diff);
    let helicity_balance_residual = (0..times.len())
        .map(|i| (series[i].helicity + 2.0 * nu * int_h3[i] - series[0].helicity) / n_scale)
        .collect();

    let theta = theta_balances(series, &times, nu);
    let zero_mode_residual = zero_mode_balance(series, &times, nu);

    let lu_doering_ratio = lu_doering(&times, &enstrophy);
    let bkm_vorticity = cumulative(&times, &column(series, |r| r.max_omega));
    let bkm_velocity_sq = cumulative(&times, &column(series, |r| r.max_u * r.max_u));
    let bkm_lowpass = cumulative(&times, &column(series, |r| r.omega_lowpass_max));

    Ok(BalanceAudit {
        times,
        energy_residual,
        np_minus_nm,
        np_over_nm,
        np_minus_nm_residual,
        helicity_balance_residual,
        gauge,
        theta,
        zero_mode_residual,
        lu_doering_ratio,
        bkm_vorticity,
        bkm_velocity_sq,
        bkm_lowpass,
    })
}

fn hs_total(r: &DiagRecord, n: u32) -> Option<f64> {
    r.hs(n).map(|(p, m)| p + m)
}

fn theta_balances(series: &[DiagRecord], times: &[f64], nu: f64) -> Vec<ThetaResidual> {
    let first = &series[0];
    let mut out = Vec::new();
    for &(theta, _) in &first.det_theta {
        let two_theta = 2.0 * theta;
        if two_theta.fract() != 0.0 {
            continue;
        }
        let n = two_theta as u32;
        let (Some(s0), Some(_)) = (hs_total(first, n), hs_total(first, n + 2)) else { continue };
        let norm: Vec<f64> = series.iter().map(|r| hs_total(r, n).unwrap_or(f64::NAN)).collect();
        let diss: Vec<f64> = series.iter().map(|r| hs_total(r, n + 2).unwrap_or(f64::NAN)).collect();
        let drive: Vec<f64> = series.iter().map(|r| r.det_theta(theta).unwrap_or(f64::NAN)).collect();
        let (id, idr) = (cumulative(times, &diss), cumulative(times, &drive));
        let scale = scale_or_one(s0);
        let residual = (0..times.len())
            .map(|i| (norm[i] + 2.0 * nu * id[i] + 2.0 * idr[i] - s0) / scale)
            .collect();
        out.push(ThetaResidual { theta, residual });
    }
    out
}

fn zero_mode_balance(series: &[DiagRecord], times: &[f64], nu: f64) -> Option<Vec<f64>> {
    let first = &series[0];
    let (p0, m0) = first.hs(0)?;
    first.hs(2)?;
    let diff: Vec<f64> = series.iter().map(|r| r.hs(0).map(|(p, m)| p - m).unwrap_or(f64::NAN)).collect();
    let diss: Vec<f64> = series.iter().map(|r| r.hs(2).map(|(p, m)| p - m).unwrap_or(f64::NAN)).collect();
    let drive: Vec<f64> = series.iter().map(|r| r.det_zero).collect();
    let (id, idr) = (cumulative(times, &diss), cumulative(times, &drive));
    let scale = scale_or_one(p0 + m0);
    Some((0..times.len()).map(|i| (diff[i] + 2.0 * nu * id[i] + 4.0 * idr[i] - diff[0]) / scale).collect())
}

fn lu_doering(times: &[f64], z: &[f64]) -> Vec<f64> {
    let n = z.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            let (a, b) = if i == 0 { (0, 1) } else if i == n - 1 { (n - 2, n - 1) } else { (i - 1, i + 1) };
            let dz = (z[b] - z[a]) / (times[b] - times[a]);
            if z[i] == 0.0 { 0.0 } else { dz / z[i].powi(3) }
        })
        .collect()
}

/// Every `stride`-th record, starting with the first.
pub fn subsample(series: &[DiagRecord], stride: usize) -> Vec<DiagRecord> {
    series.iter().step_by(stride.max(1)).cloned().collect()
}

/// Observed orders `ln(eᵢ/eᵢ₊₁) / ln(hᵢ/hᵢ₊₁)` between consecutive refinements.
pub fn convergence_orders(steps: &[f64], errors: &[f64]) -> Vec<f64> {
    steps
        .windows(2)
        .zip(errors.windows(2))
        .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect()
}

/// Paired-run check of `‖δ(t)‖² ≤ ‖δ(0)‖² exp(∫₀ᵗγ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakStrongAudit {
    pub times: Vec<f64>,
    pub delta_sq: Vec<f64>,
    pub gamma: Vec<f64>,
    pub bound: Vec<f64>,
}

impl WeakStrongAudit {
    /// `min_t (bound − ‖δ‖²)/bound`; non-negative exactly when the bound holds throughout.
    /// Smallest relative slack `(bound − ‖δ‖²)/bound` after the initial
    /// time, where the two coincide by construction.
    pub fn margin(&self) -> f64 {
        self.bound
            .iter()
            .zip(&self.delta_sq)
            .skip(1)
            .map(|(b, d)| (b - d) / b)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn holds(&self) -> bool {
        self.bound.iter().zip(&self.delta_sq).all(|(b, d)| d <= b)
    }
}

pub fn weak_strong_audit(a: &[SolverState], b: &[SolverState]) -> Result<WeakStrongAudit> {
    if a.len() != b.len() {
        return Err(Error::InvalidConfig(format!("paired runs have {} and {} states", a.len(), b.len())));
    }
    let times: Vec<f64> = a.iter().map(|s| s.t).collect();
    check_uniform(&times)?;
    if let Some(i) = a.iter().zip(b).position(|(x, y)| x.t != y.t) {
        return Err(Error::NonUniformSeries { index: i });
    }
    let mut delta_sq = Vec::with_capacity(a.len());
    let mut gamma = Vec::with_capacity(a.len());
    for (x, y) in a.iter().zip(b) {
        delta_sq.push(x.u_hat.sub(&y.u_hat).l2_norm_sq());
        gamma.push(weak_strong_gamma(&x.u_hat, &y.u_hat)?);
    }
    let integral = cumulative(&times, &gamma);
    let bound = integral.iter().map(|g| delta_sq[0] * g.exp()).collect();
    Ok(WeakStrongAudit { times, delta_sq, gamma, bound })
}
