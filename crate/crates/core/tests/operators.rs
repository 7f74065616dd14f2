use spinflow::curl::{
    curl, fractional_laplacian_half_pow, helical_basis, helical_coefficients, leray_project, localized_spin,
    reconstruct_from_helical, signed_curl_pow, spin_split, stream_vector, Spin,
};
use spinflow::forge::{
    beltrami_wave, named_field_spectral, random_spin_field_spectral, random_vector_field_spectral, BeltramiWaveSpec,
    Chirality, NamedField, Spectrum,
};
use spinflow::grid::{forward_transform, inverse_transform, Lattice, PhysicalVectorField};
use spinflow::Error;

fn box16() -> Lattice {
    Lattice::cubic(16).unwrap()
}

fn rel(a: &spinflow::SpectralVectorField, b: &spinflow::SpectralVectorField) -> f64 {
    a.max_abs_diff(b) / b.max_abs().max(a.max_abs())
}

#[test]
fn half_power_twice_is_signed_curl() {
    let u = random_spin_field_spectral(box16(), 3, Chirality::Mixed, &Spectrum::default());
    for spin in [Spin::Plus, Spin::Minus] {
        let twice = signed_curl_pow(&signed_curl_pow(&u, spin, 0.5).unwrap(), spin, 0.5).unwrap();
        let once = signed_curl_pow(&u, spin, 1.0).unwrap();
        assert!(rel(&twice, &once) <= 1e-12);
    }
}

#[test]
fn laplacian_power_on_unit_shell() {
    let lat = box16();
    let u = forward_transform(&PhysicalVectorField::from_fn(lat, |x| [0.0, x[2].cos(), 0.0]));
    let v = inverse_transform(&fractional_laplacian_half_pow(&u, 2.0).unwrap()).unwrap();
    let want = PhysicalVectorField::from_fn(lat, |x| [0.0, x[2].cos(), 0.0]);
    assert!(v.max_abs_diff(&want) <= 1e-12);
}

#[test]
fn curl_is_difference_of_signed_curls() {
    let u = random_vector_field_spectral(box16(), 8, &Spectrum::band(1.0, 5.0));
    let p = signed_curl_pow(&u, Spin::Plus, 1.0).unwrap();
    let m = signed_curl_pow(&u, Spin::Minus, 1.0).unwrap();
    assert!(rel(&p.sub(&m), &curl(&u)) <= 1e-13);
}

#[test]
fn cosine_split_matches_hand_computation() {
    let lat = box16();
    let u = forward_transform(&PhysicalVectorField::from_fn(lat, |x| [x[2].cos(), 0.0, 0.0]));
    let pair = spin_split(&u);
    let plus = inverse_transform(&pair.plus).unwrap();
    let minus = inverse_transform(&pair.minus).unwrap();
    let want_plus = PhysicalVectorField::from_fn(lat, |x| [0.5 * x[2].cos(), -0.5 * x[2].sin(), 0.0]);
    let want_minus = PhysicalVectorField::from_fn(lat, |x| [0.5 * x[2].cos(), 0.5 * x[2].sin(), 0.0]);
    assert!(plus.max_abs_diff(&want_plus) <= 1e-14);
    assert!(minus.max_abs_diff(&want_minus) <= 1e-14);
    // equal-energy split of the helical weights at both active modes
    let h = helical_coefficients(&u);
    for k in [[0, 0, 1], [0, 0, -1]] {
        let i = lat.mode_index(k);
        assert!((h.theta_plus[i].norm() - h.theta_minus[i].norm()).abs() <= 1e-15);
        assert!(h.theta_plus[i].norm() > 0.1);
    }
}

#[test]
fn helical_reconstruction_round_trip() {
    let u = random_spin_field_spectral(box16(), 21, Chirality::Mixed, &Spectrum::band(1.0, 6.0));
    let back = reconstruct_from_helical(&helical_coefficients(&u));
    assert!(rel(&back, &u) <= 1e-13);
}

#[test]
fn minus_basis_is_plus_basis_of_reflected_wavevector() {
    for xi in [[0.3, -1.0, 2.0], [1.0, 0.0, 0.0], [0.0, 0.0, -4.0], [1e-9, 2.0, 0.0]] {
        let (_, dm) = helical_basis(xi).unwrap();
        let (dp_neg, _) = helical_basis([-xi[0], -xi[1], -xi[2]]).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let lhs = dm[a] * dm[b].conj();
                let rhs = dp_neg[a] * dp_neg[b].conj();
                assert!((lhs - rhs).norm() <= 1e-13, "{xi:?}");
            }
        }
    }
    assert!(matches!(helical_basis([0.0; 3]), Err(Error::ZeroWavevector)));
}

#[test]
fn stream_vector_inverts_curl() {
    let lat = box16();
    let u = random_spin_field_spectral(lat, 5, Chirality::Mixed, &Spectrum::default());
    let psi = stream_vector(&u).unwrap();
    assert!(rel(&curl(&psi), &u) <= 1e-13);

    let psi0 = random_vector_field_spectral(lat, 6, &Spectrum::band(1.0, 4.0));
    let back = stream_vector(&curl(&psi0)).unwrap();
    assert!(rel(&back, &leray_project(&psi0)) <= 1e-13);

    let spec = BeltramiWaveSpec::new([1, 2, 0], Spin::Plus);
    let w = forward_transform(&beltrami_wave(lat, &spec).unwrap());
    let lambda = 5f64.sqrt();
    assert!(rel(&stream_vector(&w).unwrap(), &w.scaled(1.0 / lambda)) <= 1e-13);
}

#[test]
fn stream_vector_rejects_mean_flow() {
    let lat = Lattice::cubic(8).unwrap();
    let u = forward_transform(&PhysicalVectorField::from_fn(lat, |_| [1.0, 0.0, 0.0]));
    assert!(matches!(stream_vector(&u), Err(Error::NegativePowerAtZeroMode { .. })));
}

#[test]
fn localized_positive_wave_stays_mostly_positive() {
    let lat = Lattice::cubic(32).unwrap();
    let mut spec = BeltramiWaveSpec::new([0, 0, 4], Spin::Plus);
    spec.phase = 0.3;
    let w = beltrami_wave(lat, &spec).unwrap();
    // a radius of 3 spans about two wavelengths of the |k| = 4 wave
    let pair = localized_spin(&w, [3.0, 2.0, 1.0], 3.0).unwrap();
    let plus = pair.plus.l2_norm_sq();
    let total = plus + pair.minus.l2_norm_sq();
    assert!(plus >= 0.9 * total, "positive share {}", plus / total);
    assert!(matches!(localized_spin(&w, [0.0; 3], 4.0), Err(Error::InvalidRadius { .. })));
}

#[test]
fn named_fields_are_positive_spin_and_solenoidal() {
    let lat = Lattice::cubic(24).unwrap();
    for which in [NamedField::U1, NamedField::U2, NamedField::ThreeWave] {
        let u = named_field_spectral(lat, which).unwrap();
        let pair = spin_split(&u);
        assert!(u.divergence_residual() <= 1e-14, "{which:?}");
        assert!(pair.minus.l2_norm_sq() <= 1e-28 * pair.plus.l2_norm_sq(), "{which:?}");
    }
}

#[test]
fn u2_is_not_a_generalized_beltrami_field() {
    let lat = Lattice::cubic(24).unwrap();
    let u = named_field_spectral(lat, NamedField::U2).unwrap();
    let up = inverse_transform(&u).unwrap();
    let wp = inverse_transform(&curl(&u)).unwrap();
    let mut cross = PhysicalVectorField::zeros(lat);
    for i in 0..lat.len() {
        let c = spinflow::grid::cross3(wp.at(i), up.at(i));
        for (component, value) in cross.data.iter_mut().zip(c) {
            component[i] = value;
        }
    }
    let r = curl(&forward_transform(&cross));
    assert!(r.max_abs() > 0.1);

    // u₁ in contrast is Beltrami, so the same quantity vanishes
    let u1 = named_field_spectral(lat, NamedField::U1).unwrap();
    let w1 = curl(&u1).combine(&u1, -std::f64::consts::SQRT_2);
    assert!(w1.max_abs() <= 1e-14);
}
