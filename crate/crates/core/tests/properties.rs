use std::path::Path;

use proptest::prelude::*;

use spinflow::curl::{curl_matrix, leray_matrix, mat_max_diff, mat_mul, spin_projector_matrix, spin_split, Spin};
use spinflow::diagnostics::{helicity_physical, homogeneous_sobolev, DiagRecord, SpinOrder};
use spinflow::forge::{random_spin_field_spectral, random_vector_field_spectral, Chirality, Spectrum};
use spinflow::grid::{det3, forward_transform, inverse_transform, Lattice, PhysicalVectorField};
use spinflow::io::config::RunConfig;
use spinflow::io::csv;
use spinflow::io::spnf::{decode, encode, FieldData};

fn lattice() -> impl Strategy<Value = Lattice> {
    (prop::sample::select(vec![8usize, 10, 12]), prop::sample::select(vec![8usize, 16]), 1.0f64..10.0)
        .prop_map(|(a, b, l)| Lattice::new([a, b, 8], [l, 2.0 * l, 6.0]).unwrap())
}

fn wavevector() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-50.0f64..50.0).prop_filter("nonzero", |xi| xi.iter().map(|x| x * x).sum::<f64>() > 1e-6)
}

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transform_round_trip_and_parseval(lat in lattice(), seed in any::<u64>()) {
        let u = PhysicalVectorField::from_fn(lat, |x| {
            let s = (seed % 1000) as f64 * 1e-3;
            [(x[0] + s).sin() * 3.0, (x[1] * 0.7 + x[2]).cos(), s + (x[0] - x[2]).sin().exp()]
        });
        let u_hat = forward_transform(&u);
        let back = inverse_transform(&u_hat).unwrap();
        prop_assert!(back.max_abs_diff(&u) <= 1e-12 * u.max_abs());
        let physical = u.l2_norm_sq();
        prop_assert!((u_hat.l2_norm_sq() - physical).abs() <= 1e-12 * physical);
    }

    #[test]
    fn mode_projectors(xi in wavevector()) {
        let p = spin_projector_matrix(xi, Spin::Plus);
        let m = spin_projector_matrix(xi, Spin::Minus);
        let leray = leray_matrix(xi);
        let norm = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(mat_max_diff(&mat_mul(&p, &p), &p) <= 1e-13);
        prop_assert!(mat_max_diff(&mat_mul(&m, &m), &m) <= 1e-13);
        prop_assert!(mat_max_diff(&mat_mul(&p, &m), &[[Default::default(); 3]; 3]) <= 1e-13);
        let mut sum = p;
        for i in 0..3 {
            for j in 0..3 {
                sum[i][j] += m[i][j];
            }
        }
        prop_assert!(mat_max_diff(&sum, &leray) <= 1e-13);
        let c = curl_matrix(xi);
        let mut diff = p;
        for i in 0..3 {
            for j in 0..3 {
                diff[i][j] = (p[i][j] - m[i][j]) * norm;
            }
        }
        prop_assert!(mat_max_diff(&c, &diff) <= 1e-13 * norm);
    }

    #[test]
    fn helicity_is_bounded_by_half_norm(seed in any::<u64>(), w in 0.0f64..2.0, kmax in 2.0f64..4.0) {
        let lat = Lattice::cubic(12).unwrap();
        let spectrum = Spectrum::band(1.0, kmax);
        let u = random_spin_field_spectral(lat, seed, Chirality::Plus, &spectrum)
            .combine(&random_spin_field_spectral(lat, seed ^ 0xabcdef, Chirality::Minus, &spectrum), w);
        let h = helicity_physical(&u).abs();
        prop_assert!(h <= homogeneous_sobolev(&u, 1) * (1.0 + 1e-12));
    }

    #[test]
    fn spin_split_is_a_decomposition(seed in any::<u64>()) {
        let lat = Lattice::cubic(8).unwrap();
        let u = random_vector_field_spectral(lat, seed, &Spectrum::band(1.0, 3.0));
        let pair = spin_split(&u);
        let again = spin_split(&pair.plus);
        prop_assert!(again.plus.max_abs_diff(&pair.plus) <= 1e-13 * u.max_abs());
        prop_assert!(again.minus.max_abs() <= 1e-13 * u.max_abs());
        prop_assert!(pair.plus.l2_inner(&pair.minus).abs() <= 1e-12 * u.l2_norm_sq());
    }

    #[test]
    fn determinant_is_alternating(a in prop::array::uniform3(-10.0f64..10.0), b in prop::array::uniform3(-10.0f64..10.0), c in prop::array::uniform3(-10.0f64..10.0)) {
        let d = det3(a, b, c);
        let scale = 1e-13 * (1.0 + d.abs() + 1e3);
        prop_assert!((det3(b, a, c) + d).abs() <= scale);
        prop_assert!((det3(b, c, a) - d).abs() <= scale);
        prop_assert_eq!(det3(a, b, b), 0.0);
    }

    #[test]
    fn spnf_round_trip_is_bitwise(values in prop::collection::vec(finite(), 3 * 512), time in finite()) {
        let lat = Lattice::cubic(8).unwrap();
        let data = [values[..512].to_vec(), values[512..1024].to_vec(), values[1024..].to_vec()];
        let field = FieldData::Physical(PhysicalVectorField::new(lat, data).unwrap());
        let bytes = encode(&field, time);
        let back = decode(&bytes, Path::new("mem")).unwrap();
        prop_assert_eq!(back.time.to_bits(), time.to_bits());
        prop_assert_eq!(encode(&back.data, back.time), bytes);
    }

    #[test]
    fn csv_round_trip_is_exact(values in prop::collection::vec(finite(), 20), q in 0u32..20) {
        let record = DiagRecord {
            t: values[0],
            energy: values[1],
            enstrophy: values[2],
            helicity: values[3],
            hhalf_plus: values[4],
            hhalf_minus: values[5],
            h3half_plus: values[6],
            h3half_minus: values[7],
            hs: vec![SpinOrder { n: 0, plus: values[8], minus: values[9] }, SpinOrder { n: 3, plus: values[10], minus: values[11] }],
            det_theta: vec![(0.5, values[12]), (1.3, values[13])],
            det_zero: values[14],
            max_u: values[15],
            max_omega: values[16],
            q_dyn: q,
            omega_lowpass_max: values[17],
            momentum: [values[18], values[19], -values[18]],
        };
        let text = csv::render(std::slice::from_ref(&record)).unwrap();
        let back = csv::parse(&text, Path::new("mem")).unwrap();
        prop_assert_eq!(back.len(), 1);
        prop_assert_eq!(csv::render(&back).unwrap(), text);
        prop_assert_eq!(&back[0].hs, &record.hs);
        prop_assert_eq!(back[0].energy.to_bits(), record.energy.to_bits());
    }

    #[test]
    fn config_render_parses_back(nu in 1e-4f64..1.0, steps in 1u32..500, seed in any::<u64>(), theta in 0.0f64..3.0) {
        let mut cfg = RunConfig::default();
        cfg.solver.nu = nu;
        cfg.solver.dt = 1e-3;
        cfg.solver.t_end = steps as f64 * 1e-3;
        cfg.seed = seed;
        cfg.theta_list = vec![0.0, theta];
        let text = cfg.render();
        let back = RunConfig::parse(&text, Path::new("mem")).unwrap();
        prop_assert_eq!(back.render(), text);
        prop_assert_eq!(back.solver.nu.to_bits(), nu.to_bits());
        prop_assert_eq!(back.seed, seed);
    }
}
