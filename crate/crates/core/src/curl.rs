//! Fourier multipliers built from the curl: Leray projection, the helical
//! projectors `ℚ±`, signed curls `rot±^s = |D|^s ℚ±`, the helical eigenbasis
//! and the spin decomposition.
//!
//! At a nonzero wavevector `ξ` the curl acts as `η ↦ iξ × η`, with spectrum
//! `{0, ±|ξ|}`. The projectors
//!
//! ```text
//! ℚ±(ξ) = ½ (I − ξ⊗ξ/|ξ|² ± |ξ|⁻¹ iξ×)
//! ```
//!
//! are the rank-one spectral projectors onto the `±|ξ|` eigenlines; they sum to
//! the Leray projector and diagonalize the curl as `|ξ|ℚ₊ − |ξ|ℚ₋`.
//!
//! The mean mode carries no spin. It is split evenly between `ℚ₊` and `ℚ₋` so
//! that `ℚ₊ + ℚ₋ = ℙ` holds everywhere and mirror symmetry is preserved.

use crate::error::{Error, Result};
use crate::grid::{
    cdot, dot3, forward_transform, i_times, inverse_transform_unchecked, norm3, rcross, rdot,
    Lattice, PhysicalVectorField, SpectralVectorField, C64,
};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Below this ratio `(ξ₂² + ξ₃²)/|ξ|²` the helical basis switches to the
/// second column of `ℚ±(ξ)`.
pub const AXIS_FALLBACK_RATIO: f64 = 1e-8;
pub const MEAN_TOLERANCE: f64 = 1e-12;

/// One of the two helical branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Plus,
    Minus,
}

impl Spin {
    pub fn sign(self) -> f64 {
        match self {
            Spin::Plus => 1.0,
            Spin::Minus => -1.0,
        }
    }

    pub fn opposite(self) -> Spin {
        match self {
            Spin::Plus => Spin::Minus,
            Spin::Minus => Spin::Plus,
        }
    }
}

pub type Matrix3 = [[C64; 3]; 3];

/// `ℙ(ξ) = I − ξ⊗ξ/|ξ|²` (identity at ξ = 0).
pub fn leray_matrix(xi: [f64; 3]) -> Matrix3 {
    let xi_sq = dot3(xi, xi);
    let mut m = [[ZERO; 3]; 3];
    for (r, row) in m.iter_mut().enumerate() {
        for (c, entry) in row.iter_mut().enumerate() {
            let id = if r == c { 1.0 } else { 0.0 };
            let proj = if xi_sq > 0.0 { xi[r] * xi[c] / xi_sq } else { 0.0 };
            *entry = C64::new(id - proj, 0.0);
        }
    }
    m
}

/// Matrix of `η ↦ iξ × η`.
pub fn curl_matrix(xi: [f64; 3]) -> Matrix3 {
    let i = |v: f64| C64::new(0.0, v);
    [
        [ZERO, i(-xi[2]), i(xi[1])],
        [i(xi[2]), ZERO, i(-xi[0])],
        [i(-xi[1]), i(xi[0]), ZERO],
    ]
}

/// `ℚ±(ξ)`; at ξ = 0 this is `½ I`.
pub fn spin_projector_matrix(xi: [f64; 3], spin: Spin) -> Matrix3 {
    let p = leray_matrix(xi);
    let norm = norm3(xi);
    let r = curl_matrix(xi);
    let mut m = [[ZERO; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            let rot = if norm > 0.0 { r[a][b] * (spin.sign() / norm) } else { ZERO };
            m[a][b] = (p[a][b] + rot) * 0.5;
        }
    }
    m
}

pub fn mat_mul(a: &Matrix3, b: &Matrix3) -> Matrix3 {
    let mut m = [[ZERO; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            m[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c] + a[r][2] * b[2][c];
        }
    }
    m
}

pub fn mat_vec(a: &Matrix3, v: [C64; 3]) -> [C64; 3] {
    [
        a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2],
        a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
        a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2],
    ]
}

/// Largest entry modulus of `a − b`.
pub fn mat_max_diff(a: &Matrix3, b: &Matrix3) -> f64 {
    let mut worst = 0.0_f64;
    for r in 0..3 {
        for c in 0..3 {
            worst = worst.max((a[r][c] - b[r][c]).norm());
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// mode-wise kernels

#[inline]
fn leray_mode(xi: [f64; 3], xi_sq: f64, v: [C64; 3]) -> [C64; 3] {
    if xi_sq == 0.0 {
        return v;
    }
    let s = rdot(xi, v) / xi_sq;
    [v[0] - s * xi[0], v[1] - s * xi[1], v[2] - s * xi[2]]
}

#[inline]
fn curl_mode(xi: [f64; 3], v: [C64; 3]) -> [C64; 3] {
    let c = rcross(xi, v);
    [i_times(c[0]), i_times(c[1]), i_times(c[2])]
}

/// `ℚ±(ξ) v`, evaluated as `½(ℙv ± iξ×v/|ξ|)`.
#[inline]
pub(crate) fn spin_mode(xi: [f64; 3], xi_sq: f64, v: [C64; 3], spin: Spin) -> [C64; 3] {
    if xi_sq == 0.0 {
        return [v[0] * 0.5, v[1] * 0.5, v[2] * 0.5];
    }
    let p = leray_mode(xi, xi_sq, v);
    let r = curl_mode(xi, v);
    let f = spin.sign() / xi_sq.sqrt();
    [(p[0] + r[0] * f) * 0.5, (p[1] + r[1] * f) * 0.5, (p[2] + r[2] * f) * 0.5]
}

// ---------------------------------------------------------------------------
// field operators

/// Leray projection `û ↦ û − (ξ·û)ξ/|ξ|²`; the mean mode passes through.
pub fn leray_project(u: &SpectralVectorField) -> SpectralVectorField {
    u.map_modes(|m, v| leray_mode(m.xi, m.xi_sq, v))
}

/// `curl u`, i.e. `iξ × û` mode-wise.
pub fn curl(u: &SpectralVectorField) -> SpectralVectorField {
    u.map_modes(|m, v| curl_mode(m.xi, v))
}

/// `ℚ± u`.
pub fn spin_project(u: &SpectralVectorField, spin: Spin) -> SpectralVectorField {
    u.map_modes(|m, v| spin_mode(m.xi, m.xi_sq, v, spin))
}

/// Spin-definite components of a field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinPair {
    pub plus: SpectralVectorField,
    pub minus: SpectralVectorField,
}

impl SpinPair {
    pub fn get(&self, spin: Spin) -> &SpectralVectorField {
        match spin {
            Spin::Plus => &self.plus,
            Spin::Minus => &self.minus,
        }
    }

    /// `u⁺ + u⁻`, which equals `ℙu`.
    pub fn sum(&self) -> SpectralVectorField {
        self.plus.add(&self.minus)
    }
}

/// Splits `u` into `(ℚ₊u, ℚ₋u)`. Gradient parts are discarded.
pub fn spin_split(u: &SpectralVectorField) -> SpinPair {
    SpinPair { plus: spin_project(u, Spin::Plus), minus: spin_project(u, Spin::Minus) }
}

fn power(norm: f64, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else {
        norm.powf(s)
    }
}

/// Negative powers are undefined on a mean flow. Means at round-off level
/// relative to the largest coefficient (what a transform of a mean-free
/// physical field leaves behind) are treated as zero and discarded.
fn check_mean(u: &SpectralVectorField, v: [C64; 3], s: f64) -> Result<()> {
    if s < 0.0 && crate::grid::norm_c3(v) > MEAN_TOLERANCE * u.max_abs() {
        return Err(Error::NegativePowerAtZeroMode { s });
    }
    Ok(())
}

/// `rot±^s u = |D|^s ℚ± u`.
pub fn signed_curl_pow(u: &SpectralVectorField, spin: Spin, s: f64) -> Result<SpectralVectorField> {
    check_mean(u, spin_mode([0.0; 3], 0.0, u.mean(), spin), s)?;
    Ok(u.map_modes(|m, v| {
        if m.is_zero() {
            return if s == 0.0 { spin_mode(m.xi, m.xi_sq, v, spin) } else { [ZERO; 3] };
        }
        let w = spin_mode(m.xi, m.xi_sq, v, spin);
        let f = power(m.xi_norm(), s);
        [w[0] * f, w[1] * f, w[2] * f]
    }))
}

/// `|D|^s u` mode-wise.
pub fn fractional_laplacian_half_pow(u: &SpectralVectorField, s: f64) -> Result<SpectralVectorField> {
    check_mean(u, u.mean(), s)?;
    Ok(u.map_modes(|m, v| {
        if m.is_zero() {
            return if s == 0.0 { v } else { [ZERO; 3] };
        }
        let f = power(m.xi_norm(), s);
        [v[0] * f, v[1] * f, v[2] * f]
    }))
}

/// Unit eigenvectors `δ±(ξ)` of `iξ×` for the eigenvalues `±|ξ|`.
///
/// Built from the first column of `ℚ±(ξ)`, or the second column near the
/// `ξ₂ = ξ₃ = 0` axis. The phase is fixed by making the first nonzero
/// component real and positive; `δ₋ = conj(δ₊)`.
pub fn helical_basis(xi: [f64; 3]) -> Result<([C64; 3], [C64; 3])> {
    let xi_sq = dot3(xi, xi);
    if xi_sq == 0.0 {
        return Err(Error::ZeroWavevector);
    }
    let q = spin_projector_matrix(xi, Spin::Plus);
    let col = if xi[1] * xi[1] + xi[2] * xi[2] < AXIS_FALLBACK_RATIO * xi_sq { 1 } else { 0 };
    let mut d = [q[0][col], q[1][col], q[2][col]];
    let norm = crate::grid::norm_c3(d);
    for z in &mut d {
        *z /= norm;
    }
    // phase: first component with non-negligible modulus becomes real positive
    if let Some(lead) = d.iter().copied().find(|z| z.norm() > 1e-12) {
        let phase = lead.conj() / lead.norm();
        for z in &mut d {
            *z *= phase;
        }
    }
    let minus = [d[0].conj(), d[1].conj(), d[2].conj()];
    Ok((d, minus))
}

/// Helical weights `ϑ±(ξ)` of a field.
#[derive(Debug, Clone, PartialEq)]
pub struct HelicalCoefficients {
    pub lattice: Lattice,
    pub theta_plus: Vec<C64>,
    pub theta_minus: Vec<C64>,
}

/// `ϑ±(ξ) = ⟨ℙû(ξ), δ±(ξ)⟩`, zero at ξ = 0 and on the Nyquist planes.
pub fn helical_coefficients(u: &SpectralVectorField) -> HelicalCoefficients {
    let lat = u.lattice;
    let pairs = crate::par::map_range(lat.len(), |idx| {
        let m = u.mode(idx);
        if m.is_zero() || lat.is_nyquist(idx) {
            return (ZERO, ZERO);
        }
        let (dp, dm) = helical_basis(m.xi).expect("nonzero wavevector");
        let v = leray_mode(m.xi, m.xi_sq, u.at(idx));
        (cdot(v, dp), cdot(v, dm))
    });
    let (theta_plus, theta_minus) = pairs.into_iter().unzip();
    HelicalCoefficients { lattice: lat, theta_plus, theta_minus }
}

/// Rebuilds `Σ ϑ₊δ₊ + ϑ₋δ₋` (the mean mode is left at zero).
pub fn reconstruct_from_helical(h: &HelicalCoefficients) -> SpectralVectorField {
    SpectralVectorField::zeros(h.lattice).map_modes(|m, _| {
        if m.is_zero() {
            return [ZERO; 3];
        }
        let (dp, dm) = helical_basis(m.xi).expect("nonzero wavevector");
        let a = h.theta_plus[m.index];
        let b = h.theta_minus[m.index];
        [a * dp[0] + b * dm[0], a * dp[1] + b * dm[1], a * dp[2] + b * dm[2]]
    })
}

/// Stream vector `Ψ = |D|⁻² rot u`, so that `curl Ψ = ℙu`.
pub fn stream_vector(u: &SpectralVectorField) -> Result<SpectralVectorField> {
    check_mean(u, u.mean(), -2.0)?;
    Ok(u.map_modes(|m, v| {
        if m.is_zero() {
            return [ZERO; 3];
        }
        let c = curl_mode(m.xi, v);
        [c[0] / m.xi_sq, c[1] / m.xi_sq, c[2] / m.xi_sq]
    }))
}

/// Quintic smoothstep cutoff: 1 inside `r/2`, 0 beyond `r`, C² in between.
pub fn bump(distance: f64, radius: f64) -> f64 {
    let inner = 0.5 * radius;
    if distance <= inner {
        1.0
    } else if distance >= radius {
        0.0
    } else {
        let s = (radius - distance) / (radius - inner);
        s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
    }
}

/// Minimal-image distance on the periodic box.
pub fn periodic_distance(lat: &Lattice, a: [f64; 3], b: [f64; 3]) -> f64 {
    let l = lat.l();
    let mut d = [0.0; 3];
    for ax in 0..3 {
        let mut delta = (a[ax] - b[ax]).rem_euclid(l[ax]);
        if delta > 0.5 * l[ax] {
            delta -= l[ax];
        }
        d[ax] = delta;
    }
    norm3(d)
}

/// Spin decomposition of `curl(χ Ψ)`, the field localized around `center`
/// with the smooth cutoff `χ` of radius `radius`.
pub fn localized_spin(u: &PhysicalVectorField, center: [f64; 3], radius: f64) -> Result<SpinPair> {
    let max = 0.5 * u.lattice.min_side();
    if !(radius > 0.0 && radius < max) {
        return Err(Error::InvalidRadius { radius, max });
    }
    localized_spin_unchecked(u, center, radius)
}

/// [`localized_spin`] without the radius bound.
pub fn localized_spin_unchecked(u: &PhysicalVectorField, center: [f64; 3], radius: f64) -> Result<SpinPair> {
    let localized = localized_field(u, center, radius)?;
    Ok(spin_split(&localized))
}

/// `ũ = curl(χ Ψ)`, exactly divergence-free in spectral representation.
pub fn localized_field(u: &PhysicalVectorField, center: [f64; 3], radius: f64) -> Result<SpectralVectorField> {
    let lat = u.lattice;
    let psi = inverse_transform_unchecked(&stream_vector(&forward_transform(u))?);
    let cut = crate::grid::pointwise(lat, |i| {
        let chi = bump(periodic_distance(&lat, lat.position(i), center), radius);
        let p = psi.at(i);
        [chi * p[0], chi * p[1], chi * p[2]]
    });
    Ok(curl(&forward_transform(&cut)))
}
