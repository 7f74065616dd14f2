//! Periodic lattice bookkeeping, vector-field containers and the discrete
//! Fourier transform between physical and spectral representations.
//!
//! Coefficients follow the mean-value convention
//!
//! ```text
//! û(ξ) = (1/N) Σₓ u(x) e^{−iξ·x},        u(x) = Σ_ξ û(ξ) e^{iξ·x}
//! ```
//!
//! so `û(0)` is the spatial mean and Parseval reads
//! `Σₓ |u(x)|² · (V/N) = V · Σ_ξ |û(ξ)|²`, with `V` the box volume and `N` the
//! number of sites. All arrays are stored x-fastest: site `(i, j, k)` lives at
//! `i + n₁ (j + n₂ k)`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::par;

pub type C64 = Complex64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Relative Hermitian residual accepted by [`inverse_transform`].
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Uniform periodic grid on the box `[0, l₁) × [0, l₂) × [0, l₃)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    n: [usize; 3],
    l: [f64; 3],
}

impl Lattice {
    pub fn new(n: [usize; 3], l: [f64; 3]) -> Result<Self> {
        for (axis, &nj) in n.iter().enumerate() {
            if nj < 4 || nj % 2 != 0 {
                return Err(Error::InvalidLattice(format!(
                    "axis {axis}: resolution {nj} must be even and at least 4"
                )));
            }
        }
        for (axis, &lj) in l.iter().enumerate() {
            if !(lj.is_finite() && lj > 0.0) {
                return Err(Error::InvalidLattice(format!(
                    "axis {axis}: box length {lj} must be positive"
                )));
            }
        }
        Ok(Lattice { n, l })
    }

    /// `n³` sites on the `(2π)³` box.
    pub fn cubic(n: usize) -> Result<Self> {
        Self::new([n; 3], [2.0 * PI; 3])
    }

    pub fn n(&self) -> [usize; 3] {
        self.n
    }

    pub fn l(&self) -> [f64; 3] {
        self.l
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn volume(&self) -> f64 {
        self.l[0] * self.l[1] * self.l[2]
    }

    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.len() as f64
    }

    pub fn spacing(&self) -> [f64; 3] {
        [
            self.l[0] / self.n[0] as f64,
            self.l[1] / self.n[1] as f64,
            self.l[2] / self.n[2] as f64,
        ]
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n[0] * (j + self.n[1] * k)
    }

    #[inline]
    pub fn coords(&self, index: usize) -> [usize; 3] {
        let i = index % self.n[0];
        let rest = index / self.n[0];
        [i, rest % self.n[1], rest / self.n[1]]
    }

    /// Physical position of a site.
    #[inline]
    pub fn position(&self, index: usize) -> [f64; 3] {
        let c = self.coords(index);
        let h = self.spacing();
        [c[0] as f64 * h[0], c[1] as f64 * h[1], c[2] as f64 * h[2]]
    }

    /// Signed integer wavenumber along `axis` for storage offset `i`,
    /// in `−n/2 ..= n/2 − 1`.
    #[inline]
    pub fn wavenumber(&self, axis: usize, i: usize) -> i64 {
        let n = self.n[axis];
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    #[inline]
    pub fn integer_wavevector(&self, index: usize) -> [i64; 3] {
        let c = self.coords(index);
        [
            self.wavenumber(0, c[0]),
            self.wavenumber(1, c[1]),
            self.wavenumber(2, c[2]),
        ]
    }

    /// Physical wavevector `ξⱼ = 2π kⱼ / lⱼ`.
    #[inline]
    pub fn wavevector(&self, index: usize) -> [f64; 3] {
        self.scale_wavevector(self.integer_wavevector(index))
    }

    #[inline]
    pub fn scale_wavevector(&self, k: [i64; 3]) -> [f64; 3] {
        [
            2.0 * PI * k[0] as f64 / self.l[0],
            2.0 * PI * k[1] as f64 / self.l[1],
            2.0 * PI * k[2] as f64 / self.l[2],
        ]
    }

    /// Storage offset of the integer wavevector `k` (taken modulo the box).
    #[inline]
    pub fn mode_index(&self, k: [i64; 3]) -> usize {
        let wrap = |kj: i64, n: usize| kj.rem_euclid(n as i64) as usize;
        self.index(wrap(k[0], self.n[0]), wrap(k[1], self.n[1]), wrap(k[2], self.n[2]))
    }

    /// Storage offset of `−k` for the mode stored at `index`.
    #[inline]
    pub fn conjugate_index(&self, index: usize) -> usize {
        let c = self.coords(index);
        let flip = |i: usize, n: usize| (n - i) % n;
        self.index(flip(c[0], self.n[0]), flip(c[1], self.n[1]), flip(c[2], self.n[2]))
    }

    /// True when some `kⱼ = −nⱼ/2` (a mode without a distinct Hermitian partner).
    #[inline]
    pub fn is_nyquist(&self, index: usize) -> bool {
        let c = self.coords(index);
        (0..3).any(|a| c[a] == self.n[a] / 2)
    }

    /// Largest retained `|kⱼ|` under the two-thirds rule.
    pub fn dealias_limit(&self) -> [i64; 3] {
        [
            (self.n[0] / 3) as i64,
            (self.n[1] / 3) as i64,
            (self.n[2] / 3) as i64,
        ]
    }

    #[inline]
    pub fn is_dealiased_mode(&self, k: [i64; 3]) -> bool {
        let lim = self.dealias_limit();
        (0..3).all(|a| k[a].abs() <= lim[a])
    }

    /// Smallest box side.
    pub fn min_side(&self) -> f64 {
        self.l.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// Real scalar samples on the lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalScalarField {
    pub lattice: Lattice,
    pub data: Vec<f64>,
}

impl PhysicalScalarField {
    pub fn zeros(lattice: Lattice) -> Self {
        PhysicalScalarField { lattice, data: vec![0.0; lattice.len()] }
    }

    pub fn from_fn(lattice: Lattice, f: impl Fn([f64; 3]) -> f64 + Sync + Send) -> Self {
        let data = par::map_range(lattice.len(), |idx| f(lattice.position(idx)));
        PhysicalScalarField { lattice, data }
    }

    pub fn max_abs(&self) -> f64 {
        par::max_range(self.data.len(), |i| self.data[i].abs())
    }

    /// Grid quadrature of the field over the box.
    pub fn integral(&self) -> f64 {
        par::sum_range(self.data.len(), |i| self.data[i]) * self.lattice.cell_volume()
    }

    /// Grid quadrature of `|f|`.
    pub fn abs_integral(&self) -> f64 {
        par::sum_range(self.data.len(), |i| self.data[i].abs()) * self.lattice.cell_volume()
    }
}

/// Complex scalar Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralScalarField {
    pub lattice: Lattice,
    pub coeff: Vec<C64>,
}

impl SpectralScalarField {
    pub fn zeros(lattice: Lattice) -> Self {
        SpectralScalarField { lattice, coeff: vec![ZERO; lattice.len()] }
    }
}

/// Three-component real field sampled on the lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalVectorField {
    pub lattice: Lattice,
    pub data: [Vec<f64>; 3],
}

impl PhysicalVectorField {
    pub fn zeros(lattice: Lattice) -> Self {
        let z = vec![0.0; lattice.len()];
        PhysicalVectorField { lattice, data: [z.clone(), z.clone(), z] }
    }

    /// Validates lengths and finiteness.
    pub fn new(lattice: Lattice, data: [Vec<f64>; 3]) -> Result<Self> {
        for comp in &data {
            if comp.len() != lattice.len() {
                return Err(Error::InvalidLattice(format!(
                    "component has {} samples, lattice has {}",
                    comp.len(),
                    lattice.len()
                )));
            }
            check_finite(comp)?;
        }
        Ok(PhysicalVectorField { lattice, data })
    }

    /// Samples `f` at every lattice site.
    pub fn from_fn(lattice: Lattice, f: impl Fn([f64; 3]) -> [f64; 3] + Sync + Send) -> Self {
        let values = par::map_range(lattice.len(), |idx| f(lattice.position(idx)));
        let mut out = Self::zeros(lattice);
        for (idx, v) in values.into_iter().enumerate() {
            out.data[0][idx] = v[0];
            out.data[1][idx] = v[1];
            out.data[2][idx] = v[2];
        }
        out
    }

    #[inline]
    pub fn at(&self, index: usize) -> [f64; 3] {
        [self.data[0][index], self.data[1][index], self.data[2][index]]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|c| c.iter().all(|v| v.is_finite()))
    }

    /// Pointwise maximum of the Euclidean norm.
    pub fn max_norm(&self) -> f64 {
        par::max_range(self.lattice.len(), |i| norm3(self.at(i)))
    }

    /// `∫ |u|²` by grid quadrature.
    pub fn l2_norm_sq(&self) -> f64 {
        par::sum_range(self.lattice.len(), |i| dot3(self.at(i), self.at(i))) * self.lattice.cell_volume()
    }

    /// `∫ u·v` by grid quadrature.
    pub fn inner(&self, other: &Self) -> f64 {
        par::sum_range(self.lattice.len(), |i| dot3(self.at(i), other.at(i))) * self.lattice.cell_volume()
    }

    pub fn component(&self, c: usize) -> PhysicalScalarField {
        PhysicalScalarField { lattice: self.lattice, data: self.data[c].clone() }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for comp in &mut out.data {
            comp.iter_mut().for_each(|v| *v *= factor);
        }
        out
    }

    /// `self + factor · other`.
    pub fn add_scaled(&self, other: &Self, factor: f64) -> Self {
        let mut out = self.clone();
        for c in 0..3 {
            for (a, b) in out.data[c].iter_mut().zip(&other.data[c]) {
                *a += factor * b;
            }
        }
        out
    }

    /// Max over sites and components of `|self − other|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (0..3)
            .map(|c| {
                self.data[c]
                    .iter()
                    .zip(&other.data[c])
                    .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
            })
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .map(|c| c.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
            .fold(0.0, f64::max)
    }

    /// Mirror image `R u(R x)` with `R = diag(1, 1, −1)`.
    pub fn mirror_x3(&self) -> Self {
        let lat = self.lattice;
        let n = lat.n();
        let mut out = Self::zeros(lat);
        for idx in 0..lat.len() {
            let [i, j, k] = lat.coords(idx);
            let src = lat.index(i, j, (n[2] - k) % n[2]);
            out.data[0][idx] = self.data[0][src];
            out.data[1][idx] = self.data[1][src];
            out.data[2][idx] = -self.data[2][src];
        }
        out
    }
}

/// Three-component complex Fourier coefficients (full box, Hermitian).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVectorField {
    pub lattice: Lattice,
    pub coeff: [Vec<C64>; 3],
}

/// Everything a mode-wise multiplier needs to know about one Fourier mode.
#[derive(Debug, Clone, Copy)]
pub struct Mode {
    pub index: usize,
    pub k: [i64; 3],
    pub xi: [f64; 3],
    pub xi_sq: f64,
}

impl Mode {
    #[inline]
    pub fn xi_norm(&self) -> f64 {
        self.xi_sq.sqrt()
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.k == [0, 0, 0]
    }
}

impl SpectralVectorField {
    pub fn zeros(lattice: Lattice) -> Self {
        let z = vec![ZERO; lattice.len()];
        SpectralVectorField { lattice, coeff: [z.clone(), z.clone(), z] }
    }

    #[inline]
    pub fn at(&self, index: usize) -> [C64; 3] {
        [self.coeff[0][index], self.coeff[1][index], self.coeff[2][index]]
    }

    #[inline]
    pub fn set(&mut self, index: usize, v: [C64; 3]) {
        self.coeff[0][index] = v[0];
        self.coeff[1][index] = v[1];
        self.coeff[2][index] = v[2];
    }

    #[inline]
    pub fn mode(&self, index: usize) -> Mode {
        let k = self.lattice.integer_wavevector(index);
        let xi = self.lattice.scale_wavevector(k);
        Mode { index, k, xi, xi_sq: dot3(xi, xi) }
    }

    /// Applies `f` to every mode; Nyquist planes are zeroed in the output.
    pub fn map_modes<F>(&self, f: F) -> SpectralVectorField
    where
        F: Fn(&Mode, [C64; 3]) -> [C64; 3] + Sync + Send,
    {
        let lat = self.lattice;
        let row = lat.n()[0];
        let mut out = SpectralVectorField::zeros(lat);
        let [a, b, c] = &mut out.coeff;
        par::for_chunks3(a, b, c, row, |r, xa, xb, xc| {
            let base = r * row;
            for off in 0..row {
                let idx = base + off;
                if lat.is_nyquist(idx) {
                    continue;
                }
                let v = f(&self.mode(idx), self.at(idx));
                xa[off] = v[0];
                xb[off] = v[1];
                xc[off] = v[2];
            }
        });
        out
    }

    /// Mode-wise combination of two fields on the same lattice; Nyquist zeroed.
    pub fn zip_modes<F>(&self, other: &Self, f: F) -> SpectralVectorField
    where
        F: Fn(&Mode, [C64; 3], [C64; 3]) -> [C64; 3] + Sync + Send,
    {
        debug_assert_eq!(self.lattice, other.lattice);
        self.map_modes(|m, v| f(m, v, other.at(m.index)))
    }

    /// Deterministic sum of `f` over all modes.
    pub fn sum_modes<F>(&self, f: F) -> f64
    where
        F: Fn(&Mode, [C64; 3]) -> f64 + Sync + Send,
    {
        par::sum_range(self.lattice.len(), |idx| f(&self.mode(idx), self.at(idx)))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -1.0)
    }

    /// `self + factor · other`, applied to every stored coefficient.
    pub fn combine(&self, other: &Self, factor: f64) -> Self {
        let mut out = self.clone();
        for c in 0..3 {
            for (a, b) in out.coeff[c].iter_mut().zip(&other.coeff[c]) {
                *a += b * factor;
            }
        }
        out
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for comp in &mut out.coeff {
            comp.iter_mut().for_each(|v| *v *= factor);
        }
        out
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        let lat = self.lattice;
        par::max_range(lat.len(), |i| {
            let v = self.at(i);
            v[0].norm().max(v[1].norm()).max(v[2].norm())
        })
    }

    /// Largest coefficient-wise difference modulus.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        par::max_range(self.lattice.len(), |i| {
            let a = self.at(i);
            let b = other.at(i);
            (0..3).map(|c| (a[c] - b[c]).norm()).fold(0.0, f64::max)
        })
    }

    /// Spectral inner product `Σ_ξ Re(û·conj v̂)` (without the volume factor).
    pub fn spectral_dot(&self, other: &Self) -> f64 {
        par::sum_range(self.lattice.len(), |i| cdot(self.at(i), other.at(i)).re)
    }

    /// `‖u‖²_{L²} = V Σ |û|²`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.lattice.volume() * self.spectral_dot(self)
    }

    /// `∫ u·v = V Σ Re(û·conj v̂)`.
    pub fn l2_inner(&self, other: &Self) -> f64 {
        self.lattice.volume() * self.spectral_dot(other)
    }

    /// `max_ξ |û(ξ) − conj û(−ξ)| / max |û|`.
    pub fn hermitian_residual(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let lat = self.lattice;
        let worst = par::max_range(lat.len(), |i| {
            let j = lat.conjugate_index(i);
            (0..3)
                .map(|c| (self.coeff[c][i] - self.coeff[c][j].conj()).norm())
                .fold(0.0, f64::max)
        });
        worst / scale
    }

    /// `max_ξ |ξ·û(ξ)|` over nonzero modes, relative to `max |ξ||û|`.
    pub fn divergence_residual(&self) -> f64 {
        let lat = self.lattice;
        let scale = par::max_range(lat.len(), |i| {
            let m = self.mode(i);
            m.xi_norm() * norm_c3(self.at(i))
        });
        if scale == 0.0 {
            return 0.0;
        }
        par::max_range(lat.len(), |i| {
            let m = self.mode(i);
            let v = self.at(i);
            (v[0] * m.xi[0] + v[1] * m.xi[1] + v[2] * m.xi[2]).norm()
        }) / scale
    }

    /// Mean (ξ = 0) coefficient.
    pub fn mean(&self) -> [C64; 3] {
        self.at(0)
    }

    /// Mirror image `R û(R ξ)` with `R = diag(1, 1, −1)`.
    pub fn mirror_x3(&self) -> Self {
        let lat = self.lattice;
        let mut out = Self::zeros(lat);
        for idx in 0..lat.len() {
            let k = lat.integer_wavevector(idx);
            let src = lat.mode_index([k[0], k[1], -k[2]]);
            let v = self.at(src);
            out.set(idx, [v[0], v[1], -v[2]]);
        }
        out
    }

    /// True when every mode outside the two-thirds band vanishes.
    pub fn is_dealiased(&self) -> bool {
        let lat = self.lattice;
        (0..lat.len()).all(|i| {
            lat.is_dealiased_mode(lat.integer_wavevector(i)) || self.at(i).iter().all(|z| *z == ZERO)
        })
    }
}

// ---------------------------------------------------------------------------
// small vector helpers

#[inline]
pub fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

/// `det(a, b, c) = a·(b × c)`, exactly zero when `b = c`.
#[inline]
pub fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    dot3(a, cross3(b, c))
}

/// Hermitian product `Σ aⱼ conj(bⱼ)`.
#[inline]
pub fn cdot(a: [C64; 3], b: [C64; 3]) -> C64 {
    a[0] * b[0].conj() + a[1] * b[1].conj() + a[2] * b[2].conj()
}

/// Real-wavevector dot product `ξ·η` for complex `η`.
#[inline]
pub fn rdot(xi: [f64; 3], v: [C64; 3]) -> C64 {
    v[0] * xi[0] + v[1] * xi[1] + v[2] * xi[2]
}

/// `ξ × η` for real `ξ` and complex `η`.
#[inline]
pub fn rcross(xi: [f64; 3], v: [C64; 3]) -> [C64; 3] {
    [
        v[2] * xi[1] - v[1] * xi[2],
        v[0] * xi[2] - v[2] * xi[0],
        v[1] * xi[0] - v[0] * xi[1],
    ]
}

#[inline]
pub fn norm_c3(v: [C64; 3]) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr() + v[2].norm_sqr()).sqrt()
}

#[inline]
pub fn i_times(v: C64) -> C64 {
    C64::new(-v.im, v.re)
}

// ---------------------------------------------------------------------------
// FFT machinery

type Plan = Arc<dyn Fft<f64>>;

fn plan(len: usize, direction: FftDirection) -> Plan {
    type Cache = (FftPlanner<f64>, HashMap<(usize, bool), Plan>);
    static CACHE: OnceLock<Mutex<Cache>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    let forward = direction == FftDirection::Forward;
    if let Some(p) = guard.1.get(&(len, forward)) {
        return p.clone();
    }
    let p = guard.0.plan_fft(len, direction);
    guard.1.insert((len, forward), p.clone());
    p
}

/// In-place unnormalized 3D complex FFT of an x-fastest box.
pub(crate) fn fft3(data: &mut [C64], n: [usize; 3], direction: FftDirection) {
    // x lines are contiguous
    let px = plan(n[0], direction);
    par::for_chunks(data, n[0], |_, line| px.process(line));
    // y and z lines: gather, transform, scatter
    for axis in [1usize, 2] {
        let len = n[axis];
        let p = plan(len, direction);
        let lines = data.len() / len;
        let stride = if axis == 1 { n[0] } else { n[0] * n[1] };
        let line_base = |line: usize| -> usize {
            if axis == 1 {
                // line = i + n0 * k
                let i = line % n[0];
                let k = line / n[0];
                i + n[0] * n[1] * k
            } else {
                line
            }
        };
        let mut buf = vec![ZERO; data.len()];
        {
            let src: &[C64] = data;
            par::for_chunks(&mut buf, len, |line, out| {
                let base = line_base(line);
                for (m, o) in out.iter_mut().enumerate() {
                    *o = src[base + m * stride];
                }
                p.process(out);
            });
        }
        let _ = lines;
        let row = n[0];
        let buf_ref = &buf;
        par::for_chunks(data, row, |r, out| {
            // r = j + n1 * k
            let j = r % n[1];
            let k = r / n[1];
            for (i, o) in out.iter_mut().enumerate() {
                let (line, m) = if axis == 1 { (i + n[0] * k, j) } else { (i + n[0] * j, k) };
                *o = buf_ref[line * len + m];
            }
        });
    }
}

/// Forward transform of one real scalar array (mean-value normalization,
/// Hermitian symmetry enforced exactly).
fn forward_scalar(lat: &Lattice, values: &[f64]) -> Vec<C64> {
    let mut buf: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
    fft3(&mut buf, lat.n(), FftDirection::Forward);
    let scale = 1.0 / lat.len() as f64;
    // symmetrize: û(k) ← ½(û(k) + conj û(−k))
    par::map_range(lat.len(), |i| {
        let j = lat.conjugate_index(i);
        (buf[i] + buf[j].conj()) * (0.5 * scale)
    })
}

fn inverse_scalar(lat: &Lattice, coeff: &[C64]) -> Vec<f64> {
    let mut buf = coeff.to_vec();
    fft3(&mut buf, lat.n(), FftDirection::Inverse);
    buf.into_iter().map(|z| z.re).collect()
}

/// Physical → spectral. Total on valid input.
pub fn forward_transform(u: &PhysicalVectorField) -> SpectralVectorField {
    let lat = u.lattice;
    SpectralVectorField {
        lattice: lat,
        coeff: [
            forward_scalar(&lat, &u.data[0]),
            forward_scalar(&lat, &u.data[1]),
            forward_scalar(&lat, &u.data[2]),
        ],
    }
}

/// Spectral → physical; rejects input whose Hermitian residual exceeds
/// [`HERMITIAN_TOLERANCE`].
pub fn inverse_transform(u: &SpectralVectorField) -> Result<PhysicalVectorField> {
    let residual = u.hermitian_residual();
    if residual > HERMITIAN_TOLERANCE {
        return Err(Error::SymmetryViolation { residual, tolerance: HERMITIAN_TOLERANCE });
    }
    Ok(inverse_transform_unchecked(u))
}

/// Inverse transform without the symmetry audit, for fields produced by the
/// crate's own multipliers (which preserve symmetry by construction).
pub(crate) fn inverse_transform_unchecked(u: &SpectralVectorField) -> PhysicalVectorField {
    let lat = u.lattice;
    PhysicalVectorField {
        lattice: lat,
        data: [
            inverse_scalar(&lat, &u.coeff[0]),
            inverse_scalar(&lat, &u.coeff[1]),
            inverse_scalar(&lat, &u.coeff[2]),
        ],
    }
}

pub fn forward_scalar_field(f: &PhysicalScalarField) -> SpectralScalarField {
    SpectralScalarField { lattice: f.lattice, coeff: forward_scalar(&f.lattice, &f.data) }
}

pub fn inverse_scalar_field(f: &SpectralScalarField) -> PhysicalScalarField {
    PhysicalScalarField { lattice: f.lattice, data: inverse_scalar(&f.lattice, &f.coeff) }
}

/// Two-thirds rule: zero every mode with some `|kⱼ| > ⌊nⱼ/3⌋`, plus the
/// Nyquist planes.
pub fn dealias(u: &SpectralVectorField) -> SpectralVectorField {
    let lat = u.lattice;
    u.map_modes(|m, v| if lat.is_dealiased_mode(m.k) { v } else { [ZERO; 3] })
}

/// Zeroes only the Nyquist planes.
pub fn strip_nyquist(u: &SpectralVectorField) -> SpectralVectorField {
    u.map_modes(|_, v| v)
}

// ---------------------------------------------------------------------------
// spectral calculus on scalars and pointwise products on physical fields

/// `∂ₐ f` spectrally, returned in physical space.
pub fn partial(f: &SpectralScalarField, axis: usize) -> PhysicalScalarField {
    let lat = f.lattice;
    let coeff = par::map_range(lat.len(), |i| {
        if lat.is_nyquist(i) {
            return ZERO;
        }
        let xi = lat.wavevector(i);
        i_times(f.coeff[i]) * xi[axis]
    });
    inverse_scalar_field(&SpectralScalarField { lattice: lat, coeff })
}

/// Gradient of a spectral scalar, in physical space.
pub fn gradient(f: &SpectralScalarField) -> PhysicalVectorField {
    let lat = f.lattice;
    PhysicalVectorField {
        lattice: lat,
        data: [
            partial(f, 0).data,
            partial(f, 1).data,
            partial(f, 2).data,
        ],
    }
}

/// `∂ⱼ uᵢ` as `grad[i][j]`, each in physical space.
pub fn gradient_tensor(u: &SpectralVectorField) -> [[PhysicalScalarField; 3]; 3] {
    let comp = |c: usize| SpectralScalarField { lattice: u.lattice, coeff: u.coeff[c].clone() };
    let row = |c: usize| {
        let s = comp(c);
        [partial(&s, 0), partial(&s, 1), partial(&s, 2)]
    };
    [row(0), row(1), row(2)]
}

/// Spectral divergence `iξ·û`.
pub fn divergence(u: &SpectralVectorField) -> SpectralScalarField {
    let lat = u.lattice;
    let coeff = par::map_range(lat.len(), |i| {
        if lat.is_nyquist(i) {
            return ZERO;
        }
        i_times(rdot(lat.wavevector(i), u.at(i)))
    });
    SpectralScalarField { lattice: lat, coeff }
}

/// Spectral gradient `iξ f̂` as a vector field.
pub fn gradient_spectral(f: &SpectralScalarField) -> SpectralVectorField {
    let lat = f.lattice;
    let mut out = SpectralVectorField::zeros(lat);
    for i in 0..lat.len() {
        if lat.is_nyquist(i) {
            continue;
        }
        let xi = lat.wavevector(i);
        let g = i_times(f.coeff[i]);
        out.set(i, [g * xi[0], g * xi[1], g * xi[2]]);
    }
    out
}

/// Pointwise `a × b`.
pub fn cross_field(a: &PhysicalVectorField, b: &PhysicalVectorField) -> PhysicalVectorField {
    pointwise(a.lattice, |i| cross3(a.at(i), b.at(i)))
}

/// Pointwise `a · b`.
pub fn dot_field(a: &PhysicalVectorField, b: &PhysicalVectorField) -> PhysicalScalarField {
    let data = par::map_range(a.lattice.len(), |i| dot3(a.at(i), b.at(i)));
    PhysicalScalarField { lattice: a.lattice, data }
}

/// Pointwise `det(a, b, c)`.
pub fn det_field(
    a: &PhysicalVectorField,
    b: &PhysicalVectorField,
    c: &PhysicalVectorField,
) -> PhysicalScalarField {
    let data = par::map_range(a.lattice.len(), |i| det3(a.at(i), b.at(i), c.at(i)));
    PhysicalScalarField { lattice: a.lattice, data }
}

/// Pointwise `(u·∇)v` given `u` and the gradient tensor of `v`.
pub fn advect(u: &PhysicalVectorField, grad_v: &[[PhysicalScalarField; 3]; 3]) -> PhysicalVectorField {
    pointwise(u.lattice, |i| {
        let w = u.at(i);
        let mut out = [0.0; 3];
        for (c, o) in out.iter_mut().enumerate() {
            *o = w[0] * grad_v[c][0].data[i] + w[1] * grad_v[c][1].data[i] + w[2] * grad_v[c][2].data[i];
        }
        out
    })
}

/// Builds a physical vector field from a per-site closure.
pub fn pointwise(lat: Lattice, f: impl Fn(usize) -> [f64; 3] + Sync + Send) -> PhysicalVectorField {
    let mut out = PhysicalVectorField::zeros(lat);
    let [a, b, c] = &mut out.data;
    let row = lat.n()[0];
    par::for_chunks3(a, b, c, row, |r, xa, xb, xc| {
        for off in 0..row {
            let v = f(r * row + off);
            xa[off] = v[0];
            xb[off] = v[1];
            xc[off] = v[2];
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(lat: Lattice, seed: u64) -> PhysicalVectorField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut u = PhysicalVectorField::zeros(lat);
        for c in 0..3 {
            for v in &mut u.data[c] {
                *v = rng.random_range(-1.0..1.0);
            }
        }
        u
    }

    #[test]
    fn lattice_rejects_odd_or_small() {
        assert!(Lattice::new([6, 8, 8], [1.0; 3]).is_ok());
        assert!(Lattice::new([5, 8, 8], [1.0; 3]).is_err());
        assert!(Lattice::new([2, 8, 8], [1.0; 3]).is_err());
        assert!(Lattice::new([8, 8, 8], [1.0, -1.0, 1.0]).is_err());
    }

    #[test]
    fn wavevector_enumeration_is_a_bijection() {
        let lat = Lattice::new([4, 6, 8], [1.0, 2.0, 3.0]).unwrap();
        let mut seen = std::collections::HashSet::new();
        let mut zeros = 0;
        for idx in 0..lat.len() {
            let k = lat.integer_wavevector(idx);
            for (n, ka) in lat.n().into_iter().zip(k) {
                let h = n as i64 / 2;
                assert!(-h <= ka && ka < h);
            }
            assert_eq!(lat.mode_index(k), idx);
            assert!(seen.insert(k));
            if k == [0, 0, 0] {
                zeros += 1;
            }
        }
        assert_eq!(zeros, 1);
        let xi = lat.wavevector(lat.mode_index([1, 1, 1]));
        assert!((xi[1] - PI).abs() < 1e-15 && (xi[2] - 2.0 * PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn constant_field_has_only_mean_mode() {
        let lat = Lattice::new([8, 6, 4], [1.0, 2.0, 3.0]).unwrap();
        let u = PhysicalVectorField::from_fn(lat, |_| [1.0, 0.0, 0.0]);
        let uh = forward_transform(&u);
        for idx in 0..lat.len() {
            let v = uh.at(idx);
            if idx == 0 {
                assert!((v[0].re - 1.0).abs() < 1e-15 && v[0].im.abs() < 1e-15);
            } else {
                assert!(norm_c3(v) < 1e-15);
            }
        }
    }

    #[test]
    fn cosine_has_two_half_modes() {
        let lat = Lattice::cubic(16).unwrap();
        let u = PhysicalVectorField::from_fn(lat, |x| [0.0, x[2].cos(), 0.0]);
        let uh = forward_transform(&u);
        for idx in 0..lat.len() {
            let k = lat.integer_wavevector(idx);
            let v = uh.at(idx);
            if k == [0, 0, 1] || k == [0, 0, -1] {
                assert!((v[1] - C64::new(0.5, 0.0)).norm() < 1e-15);
                assert!(v[0].norm() < 1e-15 && v[2].norm() < 1e-15);
            } else {
                assert!(norm_c3(v) < 1e-14, "mode {k:?}");
            }
        }
        let back = inverse_transform(&uh).unwrap();
        assert!(back.max_abs_diff(&u) < 1e-12);
    }

    #[test]
    fn round_trip_and_parseval() {
        for n in [8usize, 16, 32] {
            let lat = Lattice::new([n; 3], [1.0, 2.0, 3.0]).unwrap();
            let u = random_field(lat, n as u64);
            let uh = forward_transform(&u);
            assert_eq!(uh.hermitian_residual(), 0.0);
            let back = inverse_transform(&uh).unwrap();
            assert!(back.max_abs_diff(&u) <= 1e-12 * u.max_abs());
            let phys = u.l2_norm_sq();
            let spec = uh.l2_norm_sq();
            assert!(((phys - spec) / phys).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn forward_of_inverse_is_identity() {
        let lat = Lattice::cubic(8).unwrap();
        let uh = forward_transform(&random_field(lat, 3));
        let again = forward_transform(&inverse_transform(&uh).unwrap());
        assert!(again.max_abs_diff(&uh) <= 1e-12 * uh.max_abs());
    }

    #[test]
    fn broken_symmetry_is_rejected() {
        let lat = Lattice::cubic(8).unwrap();
        let mut uh = forward_transform(&random_field(lat, 5));
        let idx = lat.mode_index([1, 2, 0]);
        uh.coeff[0][idx] += C64::new(1e-3, 0.0);
        assert!(matches!(inverse_transform(&uh), Err(Error::SymmetryViolation { .. })));
    }

    #[test]
    fn dealias_rule() {
        let lat = Lattice::cubic(16).unwrap();
        let mut uh = SpectralVectorField::zeros(lat);
        for k in [[6, 0, 0], [-6, 0, 0], [5, 0, 0], [-5, 0, 0]] {
            uh.set(lat.mode_index(k), [C64::new(1.0, 0.0); 3]);
        }
        let d = dealias(&uh);
        assert!(norm_c3(d.at(lat.mode_index([6, 0, 0]))) == 0.0);
        assert_eq!(d.at(lat.mode_index([5, 0, 0])), uh.at(lat.mode_index([5, 0, 0])));
        // idempotent, exact
        assert_eq!(dealias(&d), d);
        assert!(d.is_dealiased());
    }

    #[test]
    fn dealias_is_self_adjoint() {
        let lat = Lattice::cubic(16).unwrap();
        let a = forward_transform(&random_field(lat, 1));
        let b = forward_transform(&random_field(lat, 2));
        let lhs = dealias(&a).spectral_dot(&b);
        let rhs = a.spectral_dot(&dealias(&b));
        assert!((lhs - rhs).abs() < 1e-15);
    }

    #[test]
    fn mirror_commutes_with_transform() {
        let lat = Lattice::cubic(8).unwrap();
        let u = random_field(lat, 9);
        let a = forward_transform(&u.mirror_x3());
        let b = forward_transform(&u).mirror_x3();
        assert!(a.max_abs_diff(&b) < 1e-15);
    }
}
