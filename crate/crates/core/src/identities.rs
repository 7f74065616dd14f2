//! Executable residual checks for the cross-product algebra and the
//! first-order differential identities used throughout the crate.
//!
//! Differential identities are evaluated on band-limited inputs (half the
//! dealiased band) so that every quadratic product is exactly representable
//! and the residual measures only floating-point round-off.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::curl::curl;
use crate::forge::{random_scalar_field, random_spin_field, random_vector_field_spectral, Chirality, Spectrum};
use crate::grid::{
    advect, cross3, cross_field, divergence, dot3, dot_field, forward_scalar_field, forward_transform, gradient,
    gradient_spectral, gradient_tensor, inverse_scalar_field, inverse_transform_unchecked, norm3, pointwise,
    Lattice, PhysicalScalarField, PhysicalVectorField,
};

pub const ALGEBRAIC_TOLERANCE: f64 = 1e-13;
pub const DIFFERENTIAL_TOLERANCE: f64 = 1e-10;

/// Outcome of one identity over one or more samples; reports the sample with
/// the worst `max_residual / scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub name: String,
    pub max_residual: f64,
    pub scale: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityReport {
    fn new(name: &str, residual: f64, scale: f64, tolerance: f64) -> Self {
        IdentityReport {
            name: name.to_string(),
            max_residual: residual,
            scale,
            tolerance,
            pass: residual <= tolerance * scale,
        }
    }

    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 { self.max_residual } else { self.max_residual / self.scale }
    }

    /// Keeps whichever of `self` and `other` is relatively worse.
    pub fn worst(self, other: Self) -> Self {
        let pass = self.pass && other.pass;
        let mut out = if other.relative() > self.relative() { other } else { self };
        out.pass = pass;
        out
    }
}

pub type Matrix = [[f64; 3]; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgebraicSample {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub c: [f64; 3],
    pub x: [f64; 3],
    pub y: [f64; 3],
    pub r: Matrix,
}

pub fn random_algebraic_samples(seed: u64, count: usize) -> Vec<AlgebraicSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = || -> [f64; 3] { [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)] };
    (0..count)
        .map(|_| AlgebraicSample { a: v(), b: v(), c: v(), x: v(), y: v(), r: [v(), v(), v()] })
        .collect()
}

/// Leibniz expansion, independent of the cross product.
fn leibniz(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    a[0] * b[1] * c[2] + a[1] * b[2] * c[0] + a[2] * b[0] * c[1]
        - a[2] * b[1] * c[0]
        - a[1] * b[0] * c[2]
        - a[0] * b[2] * c[1]
}

fn matvec(r: &Matrix, v: [f64; 3]) -> [f64; 3] {
    [dot3(r[0], v), dot3(r[1], v), dot3(r[2], v)]
}

fn matvec_t(r: &Matrix, v: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (i, row) in r.iter().enumerate() {
        for j in 0..3 {
            out[j] += row[j] * v[i];
        }
    }
    out
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn frobenius(r: &Matrix) -> f64 {
    r.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

fn fold_reports(name: &str, tol: f64, items: impl Iterator<Item = (f64, f64)>) -> IdentityReport {
    items
        .map(|(res, scale)| IdentityReport::new(name, res, scale, tol))
        .reduce(IdentityReport::worst)
        .unwrap_or_else(|| IdentityReport::new(name, 0.0, 0.0, tol))
}

/// Triple product, `(A×B)×C` expansion, Jacobi, the matrix rule
/// `Rᵀ(RA×RB) = det R (A×B)` and the Binet–Cauchy expansion.
pub fn algebraic_identities(samples: &[AlgebraicSample]) -> Vec<IdentityReport> {
    let tol = ALGEBRAIC_TOLERANCE;
    let mag = |v: [f64; 3]| norm3(v);
    vec![
        fold_reports(
            "<AxB,C> = det(A,B,C)",
            tol,
            samples.iter().map(|s| {
                let lhs = dot3(cross3(s.a, s.b), s.c);
                ((lhs - leibniz(s.a, s.b, s.c)).abs(), mag(s.a) * mag(s.b) * mag(s.c))
            }),
        ),
        fold_reports(
            "(AxB)xC = <C,A>B - <C,B>A",
            tol,
            samples.iter().map(|s| {
                let lhs = cross3(cross3(s.a, s.b), s.c);
                let (ca, cb) = (dot3(s.c, s.a), dot3(s.c, s.b));
                let rhs = [0, 1, 2].map(|i| ca * s.b[i] - cb * s.a[i]);
                (norm3(sub(lhs, rhs)), mag(s.a) * mag(s.b) * mag(s.c))
            }),
        ),
        fold_reports(
            "Jacobi",
            tol,
            samples.iter().map(|s| {
                let t1 = cross3(cross3(s.a, s.b), s.c);
                let t2 = cross3(cross3(s.b, s.c), s.a);
                let t3 = cross3(cross3(s.c, s.a), s.b);
                (norm3([0, 1, 2].map(|i| t1[i] + t2[i] + t3[i])), mag(s.a) * mag(s.b) * mag(s.c))
            }),
        ),
        fold_reports(
            "R^T(RA x RB) = det(R) AxB",
            tol,
            samples.iter().map(|s| {
                let lhs = matvec_t(&s.r, cross3(matvec(&s.r, s.a), matvec(&s.r, s.b)));
                let d = leibniz([s.r[0][0], s.r[1][0], s.r[2][0]], [s.r[0][1], s.r[1][1], s.r[2][1]], [
                    s.r[0][2], s.r[1][2], s.r[2][2],
                ]);
                let rhs = cross3(s.a, s.b).map(|x| d * x);
                (norm3(sub(lhs, rhs)), frobenius(&s.r).powi(3) * mag(s.a) * mag(s.b))
            }),
        ),
        fold_reports(
            "<AxB,XxY> = <A,X><B,Y> - <B,X><A,Y>",
            tol,
            samples.iter().map(|s| {
                let lhs = dot3(cross3(s.a, s.b), cross3(s.x, s.y));
                let rhs = dot3(s.a, s.x) * dot3(s.b, s.y) - dot3(s.b, s.x) * dot3(s.a, s.y);
                ((lhs - rhs).abs(), mag(s.a) * mag(s.b) * mag(s.x) * mag(s.y))
            }),
        ),
    ]
}

// ---------------------------------------------------------------------------
// differential identities

fn scalar_mul(a: &PhysicalScalarField, u: &PhysicalVectorField) -> PhysicalVectorField {
    pointwise(u.lattice, |i| {
        let v = u.at(i);
        [a.data[i] * v[0], a.data[i] * v[1], a.data[i] * v[2]]
    })
}

fn sum_fields(terms: &[(&PhysicalVectorField, f64)]) -> PhysicalVectorField {
    let lat = terms[0].0.lattice;
    pointwise(lat, |i| {
        let mut out = [0.0; 3];
        for (f, w) in terms {
            let v = f.at(i);
            for c in 0..3 {
                out[c] += w * v[c];
            }
        }
        out
    })
}

fn physical_curl(u: &PhysicalVectorField) -> PhysicalVectorField {
    inverse_transform_unchecked(&curl(&forward_transform(u)))
}

fn grad_of(f: &PhysicalScalarField) -> PhysicalVectorField {
    gradient(&forward_scalar_field(f))
}

/// Residual `max|lhs − rhs|` against the largest sup norm among the terms,
/// or `floor` (the size of the inputs' products) when every term is smaller,
/// e.g. on Beltrami inputs where each side vanishes identically.
fn compare(
    name: &str,
    lhs: &PhysicalVectorField,
    rhs: &PhysicalVectorField,
    terms: &[&PhysicalVectorField],
    floor: f64,
) -> IdentityReport {
    let scale = terms.iter().map(|t| t.max_abs()).fold(lhs.max_abs().max(rhs.max_abs()).max(floor), f64::max);
    IdentityReport::new(name, lhs.max_abs_diff(rhs), scale, DIFFERENTIAL_TOLERANCE)
}

fn tensor_max(g: &[[PhysicalScalarField; 3]; 3]) -> f64 {
    g.iter().flatten().map(|f| f.max_abs()).fold(0.0, f64::max)
}

/// `curl(αu) = α curl u + ∇α×u`, the dot-product rule
/// `(u·∇)v + (v·∇)u = ∇(u·v) − u×curl v − v×curl u` and its specialization
/// `(curl u)×u = (u·∇)u − ½∇|u|²`.
pub fn curl_product_rules(
    alpha: &PhysicalScalarField,
    u: &PhysicalVectorField,
    v: &PhysicalVectorField,
) -> Vec<IdentityReport> {
    let curl_u = physical_curl(u);
    let curl_v = physical_curl(v);

    let lhs = physical_curl(&scalar_mul(alpha, u));
    let a_curl = scalar_mul(alpha, &curl_u);
    let ga_u = cross_field(&grad_of(alpha), u);
    let rhs = sum_fields(&[(&a_curl, 1.0), (&ga_u, 1.0)]);
    let r1 = compare("curl(au) = a curl u + grad a x u", &lhs, &rhs, &[&a_curl, &ga_u], 0.0);

    let gu = gradient_tensor(&forward_transform(u));
    let gv = gradient_tensor(&forward_transform(v));
    let floor_uv = u.max_abs() * tensor_max(&gv) + v.max_abs() * tensor_max(&gu);
    let u_gv = advect(u, &gv);
    let v_gu = advect(v, &gu);
    let lhs = sum_fields(&[(&u_gv, 1.0), (&v_gu, 1.0)]);
    let g_uv = grad_of(&dot_field(u, v));
    let u_cv = cross_field(u, &curl_v);
    let v_cu = cross_field(v, &curl_u);
    let rhs = sum_fields(&[(&g_uv, 1.0), (&u_cv, -1.0), (&v_cu, -1.0)]);
    let r2 = compare("(u.grad)v + (v.grad)u = grad(u.v) - u x curl v - v x curl u", &lhs, &rhs, &[
        &u_gv, &v_gu, &g_uv, &u_cv, &v_cu,
    ], floor_uv);

    let lhs = cross_field(&curl_u, u);
    let u_gu = advect(u, &gu);
    let g_half = grad_of(&dot_field(u, u)).scaled(0.5);
    let rhs = sum_fields(&[(&u_gu, 1.0), (&g_half, -1.0)]);
    let r3 = compare("(curl u) x u = (u.grad)u - grad|u|^2/2", &lhs, &rhs, &[&u_gu, &g_half], u.max_abs() * tensor_max(&gu));

    vec![r1, r2, r3]
}

/// `curl((u·∇)v) = (u·∇)curl v − ((curl v)·∇)u + (div u) curl v + Σⱼ ∇uⱼ × ∇vⱼ`.
pub fn advection_curl_identity(u: &PhysicalVectorField, v: &PhysicalVectorField) -> IdentityReport {
    let u_hat = forward_transform(u);
    let v_hat = forward_transform(v);
    let gu = gradient_tensor(&u_hat);
    let gv = gradient_tensor(&v_hat);
    let w_hat = curl(&v_hat);
    let w = inverse_transform_unchecked(&w_hat);

    let lhs = physical_curl(&advect(u, &gv));
    let t1 = advect(u, &gradient_tensor(&w_hat));
    let t2 = advect(&w, &gu);
    let t3 = scalar_mul(&inverse_scalar_field(&divergence(&u_hat)), &w);
    let t4 = pointwise(u.lattice, |i| {
        let mut acc = [0.0; 3];
        for j in 0..3 {
            let c = cross3(
                [gu[j][0].data[i], gu[j][1].data[i], gu[j][2].data[i]],
                [gv[j][0].data[i], gv[j][1].data[i], gv[j][2].data[i]],
            );
            for k in 0..3 {
                acc[k] += c[k];
            }
        }
        acc
    });
    let rhs = sum_fields(&[(&t1, 1.0), (&t2, -1.0), (&t3, 1.0), (&t4, 1.0)]);
    let floor = tensor_max(&gu) * tensor_max(&gv);
    compare("curl((u.grad)v) five-term expansion", &lhs, &rhs, &[&t1, &t2, &t3, &t4], floor)
}

// ---------------------------------------------------------------------------
// suite

/// Band radius for identity inputs on `lat`: half the dealiased limit.
pub fn identity_band(lat: &Lattice) -> f64 {
    let limit = lat.dealias_limit().iter().copied().min().unwrap_or(0);
    (limit / 2).max(1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub samples: usize,
    pub n: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 2024, samples: 100, n: 24 }
    }
}

/// Every identity over `cfg.samples` seeded samples, one report per identity.
pub fn run_suite(cfg: &SuiteConfig) -> crate::Result<Vec<IdentityReport>> {
    let lat = Lattice::cubic(cfg.n)?;
    let spectrum = Spectrum::band(1.0, identity_band(&lat));
    let mut reports = algebraic_identities(&random_algebraic_samples(cfg.seed, cfg.samples));

    let mut differential: Vec<IdentityReport> = Vec::new();
    let mut merge = |new: Vec<IdentityReport>| {
        if differential.is_empty() {
            differential = new;
        } else {
            differential = differential.drain(..).zip(new).map(|(a, b)| a.worst(b)).collect();
        }
    };
    for s in 0..cfg.samples as u64 {
        let seed = cfg.seed.wrapping_mul(1_000_003).wrapping_add(4 * s);
        let alpha = random_scalar_field(lat, seed, &spectrum);
        let u = inverse_transform_unchecked(&random_vector_field_spectral(lat, seed + 1, &spectrum));
        let v = inverse_transform_unchecked(&random_vector_field_spectral(lat, seed + 2, &spectrum));
        let w = random_spin_field(lat, seed + 3, Chirality::Mixed, &spectrum);
        let mut batch = curl_product_rules(&alpha, &u, &v);
        let mut general = advection_curl_identity(&u, &v);
        general.name = "curl((u.grad)v), general u".into();
        batch.push(general);
        let mut solenoidal = advection_curl_identity(&w, &w);
        solenoidal.name = "curl((u.grad)u) = (u.grad)w - (w.grad)u, div u = 0".into();
        batch.push(solenoidal);
        merge(batch);
    }
    reports.extend(differential);
    Ok(reports)
}

/// Residual of the `curl(αu)` rule for analytic, non-band-limited inputs at
/// each resolution; decays faster than any power of `1/n`.
pub fn spectral_convergence_study(ns: &[usize]) -> crate::Result<Vec<(usize, f64)>> {
    ns.iter()
        .map(|&n| {
            let lat = Lattice::cubic(n)?;
            let alpha = PhysicalScalarField::from_fn(lat, |x| (x[0] + x[1]).cos().exp());
            let u = PhysicalVectorField::from_fn(lat, |x| [x[1].sin().exp(), x[2].cos().exp(), (0.5 * x[0].sin()).exp()]);
            let v = PhysicalVectorField::from_fn(lat, |x| [x[2].cos(), (x[0] + x[2]).sin().exp(), 1.0]);
            let r = curl_product_rules(&alpha, &u, &v)[0].relative();
            Ok((n, r))
        })
        .collect()
}

/// `∇ψ` as a physical field, for building non-solenoidal inputs.
pub fn gradient_field(psi: &PhysicalScalarField) -> PhysicalVectorField {
    inverse_transform_unchecked(&gradient_spectral(&forward_scalar_field(psi)))
}
