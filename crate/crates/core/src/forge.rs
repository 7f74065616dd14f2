//! Constructors for the test and example fields: planar Beltrami waves, the
//! two closed-form positive-spin fields `u₁`, `u₂`, a three-wave
//! superposition, planar flows from a stream function, and seeded random
//! fields with prescribed spin.

use std::f64::consts::{PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::curl::{helical_basis, Spin};
use crate::error::{Error, Result};
use crate::grid::{
    cross3, dot3, forward_scalar_field, forward_transform, i_times, inverse_transform_unchecked, norm3,
    Lattice, PhysicalScalarField, PhysicalVectorField, SpectralVectorField, C64,
};

/// One planar Beltrami wave
/// `A [cos(ξ·x + φ) e₂ ∓ sin(ξ·x + φ) e₃]`, with `e₁ = ξ/|ξ|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeltramiWaveSpec {
    /// Integer wavevector on the lattice.
    pub k: [i64; 3],
    pub phase: f64,
    pub sign: Spin,
    pub amplitude: f64,
}

impl BeltramiWaveSpec {
    pub fn new(k: [i64; 3], sign: Spin) -> Self {
        BeltramiWaveSpec { k, phase: 0.0, sign, amplitude: 1.0 }
    }
}

/// Right-handed orthonormal frame with `e₁ = direction/|direction|`.
///
/// `e₂` is the normalized component of `a` orthogonal to `e₁`, where `a` is the
/// canonical axis least aligned with `e₁` (ties go to the lower axis).
pub fn wave_frame(direction: [f64; 3]) -> [[f64; 3]; 3] {
    let n = norm3(direction);
    let e1 = [direction[0] / n, direction[1] / n, direction[2] / n];
    let mut axis = 0;
    for a in 1..3 {
        if e1[a].abs() < e1[axis].abs() {
            axis = a;
        }
    }
    let mut a = [0.0; 3];
    a[axis] = 1.0;
    let along = dot3(a, e1);
    let c = [a[0] - along * e1[0], a[1] - along * e1[1], a[2] - along * e1[2]];
    let cn = norm3(c);
    let e2 = [c[0] / cn, c[1] / cn, c[2] / cn];
    let e3 = cross3(e1, e2);
    [e1, e2, e3]
}

/// Samples a planar Beltrami wave; `curl W = ±|ξ| W`.
pub fn beltrami_wave(lattice: Lattice, spec: &BeltramiWaveSpec) -> Result<PhysicalVectorField> {
    let lim = lattice.dealias_limit();
    if spec.k == [0, 0, 0] || (0..3).any(|a| spec.k[a].abs() > lim[a]) {
        return Err(Error::UnrepresentableWavevector { k: spec.k, limit: lim });
    }
    let xi = lattice.scale_wavevector(spec.k);
    let [_, e2, e3] = wave_frame(xi);
    let s = spec.sign.sign();
    let amp = spec.amplitude;
    Ok(PhysicalVectorField::from_fn(lattice, |x| {
        let arg = xi[0] * x[0] + xi[1] * x[1] + xi[2] * x[2] + spec.phase;
        let (sn, cs) = arg.sin_cos();
        [
            amp * (cs * e2[0] - s * sn * e3[0]),
            amp * (cs * e2[1] - s * sn * e3[1]),
            amp * (cs * e2[2] - s * sn * e3[2]),
        ]
    }))
}

/// Named closed-form fields on the `(2π)³` box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedField {
    /// Beltrami field with `curl u₁ = √2 u₁`.
    U1,
    /// Positive spin, spectral support on `|ξ| ∈ {√2, √5}`.
    U2,
    /// Three positive-spin waves along `(1,−1,0)`, `(0,1,1)`, `(1,0,−2)`.
    ThreeWave,
}

impl std::str::FromStr for NamedField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "u1" => Ok(NamedField::U1),
            "u2" => Ok(NamedField::U2),
            "three_wave" => Ok(NamedField::ThreeWave),
            other => Err(Error::InvalidConfig(format!("unknown field `{other}`"))),
        }
    }
}

pub const THREE_WAVE_VECTORS: [[i64; 3]; 3] = [[1, -1, 0], [0, 1, 1], [1, 0, -2]];

pub fn named_field(lattice: Lattice, which: NamedField) -> Result<PhysicalVectorField> {
    let l = lattice.l();
    if l.iter().any(|&lj| (lj - 2.0 * PI).abs() > 1e-12) {
        return Err(Error::InvalidConfig("closed-form fields require a (2π)³ box".into()));
    }
    let s5 = 5f64.sqrt();
    match which {
        NamedField::U1 => Ok(PhysicalVectorField::from_fn(lattice, |x| {
            let a = x[0] - x[1];
            let b = x[1] + x[2];
            [
                -0.5 * (a.cos() + 2.0 * b.sin()),
                -0.5 * (a.cos() + SQRT_2 * b.cos()),
                0.5 * SQRT_2 * (a.sin() + b.cos()),
            ]
        })),
        NamedField::U2 => Ok(PhysicalVectorField::from_fn(lattice, |x| {
            let a = x[0] - 2.0 * x[1];
            let b = x[1] + x[2];
            [
                -0.2 * (4.0 * a.cos() + 5.0 * b.sin()),
                -0.1 * (4.0 * a.cos() + 5.0 * SQRT_2 * b.cos()),
                0.1 * (4.0 * s5 * a.sin() + 5.0 * SQRT_2 * b.cos()),
            ]
        })),
        NamedField::ThreeWave => {
            let mut total = PhysicalVectorField::zeros(lattice);
            for k in THREE_WAVE_VECTORS {
                let w = beltrami_wave(lattice, &BeltramiWaveSpec::new(k, Spin::Plus))?;
                total = total.add_scaled(&w, 1.0);
            }
            Ok(total)
        }
    }
}

/// Real scalar `ψ(x₁, x₂)` sampled on a 3D lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamFunction2D {
    pub psi: PhysicalScalarField,
}

impl StreamFunction2D {
    /// Validates that `ψ` does not depend on `x₃`.
    pub fn new(psi: PhysicalScalarField) -> Result<Self> {
        let lat = psi.lattice;
        let mut deviation = 0.0_f64;
        for idx in 0..lat.len() {
            let [i, j, _] = lat.coords(idx);
            deviation = deviation.max((psi.data[idx] - psi.data[lat.index(i, j, 0)]).abs());
        }
        if deviation > 0.0 {
            return Err(Error::NotConstantAlongX3 { deviation });
        }
        Ok(StreamFunction2D { psi })
    }

    pub fn from_fn(lattice: Lattice, f: impl Fn(f64, f64) -> f64 + Sync + Send) -> Self {
        StreamFunction2D { psi: PhysicalScalarField::from_fn(lattice, |x| f(x[0], x[1])) }
    }
}

/// `v = (∂₂ψ, −∂₁ψ, 0)` computed spectrally.
pub fn embed_2d(stream: &StreamFunction2D) -> PhysicalVectorField {
    inverse_transform_unchecked(&embed_2d_spectral(stream))
}

/// Spectral form of [`embed_2d`].
pub fn embed_2d_spectral(stream: &StreamFunction2D) -> SpectralVectorField {
    let lat = stream.psi.lattice;
    let psi = forward_scalar_field(&stream.psi);
    let mut out = SpectralVectorField::zeros(lat);
    for idx in 0..lat.len() {
        if lat.is_nyquist(idx) {
            continue;
        }
        let xi = lat.wavevector(idx);
        let d = i_times(psi.coeff[idx]);
        out.set(idx, [d * xi[1], -(d * xi[0]), C64::new(0.0, 0.0)]);
    }
    out
}

/// Spin content of a random field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chirality {
    Plus,
    Minus,
    /// Both branches with equal modulus at every mode (zero helicity).
    Mixed,
}

impl std::str::FromStr for Chirality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" => Ok(Chirality::Plus),
            "-" | "minus" => Ok(Chirality::Minus),
            "mixed" => Ok(Chirality::Mixed),
            other => Err(Error::InvalidConfig(format!("unknown chirality `{other}`"))),
        }
    }
}

/// Per-mode amplitude `|k|^exponent` on the integer shell band
/// `k_min ≤ |k| ≤ k_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum {
    pub k_min: f64,
    pub k_max: f64,
    pub exponent: f64,
}

impl Default for Spectrum {
    fn default() -> Self {
        Spectrum { k_min: 1.0, k_max: 4.0, exponent: -11.0 / 6.0 }
    }
}

impl Spectrum {
    pub fn band(k_min: f64, k_max: f64) -> Self {
        Spectrum { k_min, k_max, ..Self::default() }
    }

    fn amplitude(&self, k: [i64; 3]) -> Option<f64> {
        let r = ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt();
        (r >= self.k_min && r <= self.k_max && r > 0.0).then(|| r.powf(self.exponent))
    }
}

/// True for exactly one of each `{k, −k}` pair with `k ≠ 0`.
fn is_representative(k: [i64; 3]) -> bool {
    k[2] > 0 || (k[2] == 0 && (k[1] > 0 || (k[1] == 0 && k[0] > 0)))
}

fn gaussian_c(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Seeded divergence-free field assembled from helical modes.
///
/// Modes outside the two-thirds band are never populated. Deterministic for a
/// given `(lattice, seed, chirality, spectrum)`.
pub fn random_spin_field_spectral(
    lattice: Lattice,
    seed: u64,
    chirality: Chirality,
    spectrum: &Spectrum,
) -> SpectralVectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SpectralVectorField::zeros(lattice);
    for idx in 0..lattice.len() {
        let k = lattice.integer_wavevector(idx);
        if !is_representative(k) || !lattice.is_dealiased_mode(k) || lattice.is_nyquist(idx) {
            continue;
        }
        let Some(amp) = spectrum.amplitude(k) else { continue };
        let xi = lattice.scale_wavevector(k);
        let (dp, dm) = helical_basis(xi).expect("nonzero wavevector");
        let a = gaussian_c(&mut rng) * amp;
        let (tp, tm) = match chirality {
            Chirality::Plus => (a, C64::new(0.0, 0.0)),
            Chirality::Minus => (C64::new(0.0, 0.0), a),
            Chirality::Mixed => {
                let phase: f64 = rng.random_range(0.0..2.0 * PI);
                (a, C64::from_polar(a.norm(), phase))
            }
        };
        let v = [
            tp * dp[0] + tm * dm[0],
            tp * dp[1] + tm * dm[1],
            tp * dp[2] + tm * dm[2],
        ];
        out.set(idx, v);
        out.set(lattice.conjugate_index(idx), [v[0].conj(), v[1].conj(), v[2].conj()]);
    }
    out
}

pub fn random_spin_field(lattice: Lattice, seed: u64, chirality: Chirality, spectrum: &Spectrum) -> PhysicalVectorField {
    inverse_transform_unchecked(&random_spin_field_spectral(lattice, seed, chirality, spectrum))
}

/// Seeded field with independent Gaussian Cartesian coefficients on the band
/// (not divergence-free, mean zero).
pub fn random_vector_field_spectral(lattice: Lattice, seed: u64, spectrum: &Spectrum) -> SpectralVectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SpectralVectorField::zeros(lattice);
    for idx in 0..lattice.len() {
        let k = lattice.integer_wavevector(idx);
        if !is_representative(k) || !lattice.is_dealiased_mode(k) || lattice.is_nyquist(idx) {
            continue;
        }
        let Some(amp) = spectrum.amplitude(k) else { continue };
        let v = [gaussian_c(&mut rng) * amp, gaussian_c(&mut rng) * amp, gaussian_c(&mut rng) * amp];
        out.set(idx, v);
        out.set(lattice.conjugate_index(idx), [v[0].conj(), v[1].conj(), v[2].conj()]);
    }
    out
}

/// Seeded real scalar with Gaussian coefficients on the band.
pub fn random_scalar_field(lattice: Lattice, seed: u64, spectrum: &Spectrum) -> PhysicalScalarField {
    let v = random_vector_field_spectral(lattice, seed, spectrum);
    inverse_transform_unchecked(&v).component(0)
}

/// Spectral transform of a closed-form field, for callers that work in Fourier space.
pub fn named_field_spectral(lattice: Lattice, which: NamedField) -> Result<SpectralVectorField> {
    named_field(lattice, which).map(|u| forward_transform(&u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curl::{curl, spin_split};
    use crate::grid::forward_transform;

    #[test]
    fn frame_is_orthonormal_right_handed() {
        for d in [[1.0, 0.0, 0.0], [1.0, -1.0, 0.0], [0.3, 0.3, 0.3], [1.0, 0.0, -2.0]] {
            let [e1, e2, e3] = wave_frame(d);
            for (a, b) in [(e1, e2), (e1, e3), (e2, e3)] {
                assert!(dot3(a, b).abs() < 1e-15);
            }
            for e in [e1, e2, e3] {
                assert!((norm3(e) - 1.0).abs() < 1e-15);
            }
            let c = cross3(e1, e2);
            assert!((0..3).all(|i| (c[i] - e3[i]).abs() < 1e-15));
        }
    }

    #[test]
    fn unit_wave_along_x1() {
        let lat = Lattice::cubic(8).unwrap();
        let w = beltrami_wave(lat, &BeltramiWaveSpec::new([1, 0, 0], Spin::Plus)).unwrap();
        // e1 = x̂: least aligned axis is ŷ, so e2 = ŷ and e3 = ẑ
        let expect = PhysicalVectorField::from_fn(lat, |x| [0.0, x[0].cos(), -x[0].sin()]);
        assert!(w.max_abs_diff(&expect) < 1e-15);
        let wh = forward_transform(&w);
        assert!(curl(&wh).max_abs_diff(&wh) < 1e-14);
    }

    #[test]
    fn unrepresentable_wave_rejected() {
        let lat = Lattice::cubic(16).unwrap();
        assert!(beltrami_wave(lat, &BeltramiWaveSpec::new([5, 0, 0], Spin::Plus)).is_ok());
        assert!(matches!(
            beltrami_wave(lat, &BeltramiWaveSpec::new([6, 0, 0], Spin::Plus)),
            Err(Error::UnrepresentableWavevector { .. })
        ));
        assert!(beltrami_wave(lat, &BeltramiWaveSpec::new([0, 0, 0], Spin::Plus)).is_err());
    }

    #[test]
    fn stream_function_must_be_planar() {
        let lat = Lattice::cubic(8).unwrap();
        let bad = PhysicalScalarField::from_fn(lat, |x| x[2].sin());
        assert!(matches!(StreamFunction2D::new(bad), Err(Error::NotConstantAlongX3 { .. })));
        let good = PhysicalScalarField::from_fn(lat, |x| x[0].cos());
        assert!(StreamFunction2D::new(good).is_ok());
    }

    #[test]
    fn embed_cosine_product() {
        let lat = Lattice::cubic(16).unwrap();
        let v = embed_2d(&StreamFunction2D::from_fn(lat, |a, b| a.cos() * b.cos()));
        let expect = PhysicalVectorField::from_fn(lat, |x| {
            [-x[0].cos() * x[1].sin(), x[0].sin() * x[1].cos(), 0.0]
        });
        assert!(v.max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn random_field_is_deterministic_and_spin_definite() {
        let lat = Lattice::cubic(16).unwrap();
        let a = random_spin_field_spectral(lat, 42, Chirality::Plus, &Spectrum::default());
        let b = random_spin_field_spectral(lat, 42, Chirality::Plus, &Spectrum::default());
        assert_eq!(a, b);
        assert_eq!(a.hermitian_residual(), 0.0);
        assert!(a.is_dealiased());
        let pair = spin_split(&a);
        assert!(pair.minus.max_abs() < 1e-15 * a.max_abs().max(1.0) * 10.0);
        assert!(pair.plus.max_abs_diff(&a) < 1e-14);
    }
}
