mod common;

use common::*;
use nlsplit::datagen::{
    plane_wave, plane_wave_solution, rough_field, smooth_field, splitmix64, ModeNoise, RoughDataSpec,
};
use nlsplit::flows::Lambda;
use nlsplit::spectral::{bracket, make_grid, to_physical, to_spectral, SpectralField};
use num_complex::Complex64 as C;
use proptest::prelude::*;

#[test]
fn same_seed_same_field() {
    let spec = RoughDataSpec::new(0.75, 99, 512);
    assert_eq!(rough_field(&spec).unwrap(), rough_field(&spec).unwrap());
    let other = RoughDataSpec { seed: 100, ..spec };
    assert_ne!(rough_field(&spec).unwrap(), rough_field(&other).unwrap());
}

#[test]
fn rough_field_is_normalized_and_band_limited() {
    for gamma in [0.0, 0.5, 1.0, 2.0, 4.0] {
        let f = rough_field(&RoughDataSpec::new(gamma, 7, 256)).unwrap();
        assert!((f.sobolev_norm(gamma) - 1.0).abs() < 1e-12);
        for (k, z) in f.modes() {
            if k.abs() > 64 {
                assert_eq!(z, c(0.0, 0.0));
            } else {
                assert!(z.norm() > 0.0);
            }
        }
    }
}

#[test]
fn coefficients_do_not_depend_on_resolution() {
    let small = rough_field(&RoughDataSpec::new(1.0, 5, 256)).unwrap();
    let large = rough_field(&RoughDataSpec::new(1.0, 5, 1024)).unwrap();
    let ratio = large.coeff(1) / small.coeff(1);
    for k in -64..=64 {
        let r = large.coeff(k) / small.coeff(k);
        assert!((r - ratio).norm() < 1e-12 * ratio.norm());
    }
}

#[test]
fn normals_have_unit_variance() {
    let noise = ModeNoise::new(2024);
    let n = 200_000;
    let draws: Vec<C> = (-(n as i64) / 2..(n as i64) / 2).map(|k| noise.complex_normal(k)).collect();
    let mean: C = draws.iter().sum::<C>() / n as f64;
    let power = draws.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
    let re_var = draws.iter().map(|z| z.re * z.re).sum::<f64>() / n as f64;
    assert!(mean.norm() < 0.01, "{mean}");
    assert!((power - 1.0).abs() < 0.01, "{power}");
    assert!((re_var - 0.5).abs() < 0.01, "{re_var}");
}

#[test]
fn splitmix_matches_reference_stream() {
    // successive outputs of the standard splitmix64 generator seeded with 0
    let mut state = 0u64;
    let mut next = || {
        let out = splitmix64(state);
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        out
    };
    assert_eq!(next(), 0xE220_A839_7B1D_CDAF);
    assert_eq!(next(), 0x6E78_9E6A_A1B9_65F4);
    assert_eq!(next(), 0x06C4_5D18_8009_454F);
}

#[test]
fn spectral_decay_matches_recipe() {
    let modes = 2048;
    for gamma in [0.5, 1.0, 2.0] {
        let mut slopes = Vec::new();
        for seed in 0..64 {
            let f = rough_field(&RoughDataSpec::new(gamma, seed, modes)).unwrap();
            let pts: Vec<(f64, f64)> = (2..=(modes as i64 / 8))
                .flat_map(|k| [k, -k])
                .map(|k| (bracket(k), f.coeff(k).norm()))
                .collect();
            slopes.push(loglog_slope(&pts));
        }
        let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
        let target = -(gamma + 0.5 + 0.01);
        assert!((mean - target).abs() <= 0.15, "gamma {gamma}: {mean} vs {target}");
    }
}

#[test]
fn rougher_data_has_heavier_tails() {
    let modes = 1024;
    let tail = |f: &SpectralField, s: f64, cut: i64| -> f64 {
        f.modes()
            .filter(|(k, _)| k.abs() > cut)
            .map(|(k, z)| bracket(k).powf(2.0 * s) * z.norm_sqr())
            .sum()
    };
    for (g1, g2) in [(0.5, 1.0), (1.0, 2.0), (0.25, 0.5)] {
        let a = rough_field(&RoughDataSpec::new(g1, 3, modes)).unwrap();
        let b = rough_field(&RoughDataSpec::new(g2, 3, modes)).unwrap();
        for cut in [8, 32, 128] {
            let s = g2 - 0.05;
            assert!(tail(&a, s, cut) > tail(&b, s, cut), "{g1} vs {g2} above {cut}");
        }
    }
}

#[test]
fn plane_wave_examples() {
    let g = make_grid(32).unwrap();
    let constant = plane_wave(c(1.0, 0.0), 0, g).unwrap();
    for s in to_physical(&constant) {
        assert!((s - c(1.0, 0.0)).norm() < 1e-15);
    }
    let a = c(0.3, 0.9);
    let u0 = plane_wave(a, 5, g).unwrap();
    assert_eq!(plane_wave_solution(a, 5, g, Lambda::Focusing, 0.0).unwrap(), u0);
    assert!(plane_wave(a, 16, g).is_err());
    assert!(plane_wave(a, -15, g).is_ok());
}

#[test]
fn plane_wave_solution_satisfies_the_equation() {
    let g = make_grid(64).unwrap();
    for lambda in [Lambda::Focusing, Lambda::Defocusing] {
        for (a, m) in [(c(0.5, 0.0), 2), (c(0.2, -0.4), -3), (c(1.0, 0.0), 1)] {
            let t = 0.4;
            let h = 2.5e-4;
            let at = |t: f64| plane_wave_solution(a, m, g, lambda, t).unwrap();
            // fourth-order central difference in time
            let dt: Vec<C> = {
                let (p2, p1, m1, m2) = (at(t + 2.0 * h), at(t + h), at(t - h), at(t - 2.0 * h));
                (0..64)
                    .map(|i| {
                        let s = |f: &SpectralField| f.storage()[i];
                        (-s(&p2) + 8.0 * s(&p1) - 8.0 * s(&m1) + s(&m2)) / (12.0 * h)
                    })
                    .collect()
            };
            let u = at(t);
            let dt = SpectralField::from_storage(g, dt).unwrap();
            let uxx = SpectralField::from_fn(g, |k| -((k * k) as f64) * u.coeff(k)).unwrap();
            let cubic: Vec<C> = to_physical(&u).iter().map(|z| z * z.norm_sqr() * lambda.sign()).collect();
            let cubic = to_spectral(&cubic).unwrap();
            let residual = dt.scale(C::i()).sub(&uxx).unwrap().sub(&cubic).unwrap();
            assert!(residual.l2_norm() <= 1e-10, "{lambda} m={m}: {:e}", residual.l2_norm());
        }
    }
}

#[test]
fn smooth_field_examples() {
    let g = make_grid(128).unwrap();
    let f = smooth_field(g).unwrap();
    assert!((f.sobolev_norm(2.0) - 1.0).abs() < 1e-12);
    let h4 = f.sobolev_norm(4.0);
    assert!(h4.is_finite() && h4 < 10.0, "{h4}");
    assert_eq!(f, smooth_field(g).unwrap());
    let scale = f.coeff(0).re;
    for (k, z) in f.modes() {
        assert_eq!(z.im, 0.0);
        if k.abs() <= 32 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let want = sign * scale * bracket(k).powi(-6);
            assert!((z.re - want).abs() <= 1e-15 * scale, "k = {k}");
        } else {
            assert_eq!(z.re, 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rough_field_is_pure(seed in any::<u64>(), gamma in 0.0f64..3.0) {
        let spec = RoughDataSpec::new(gamma, seed, 64);
        let a = rough_field(&spec).unwrap();
        prop_assert_eq!(a.clone(), rough_field(&spec).unwrap());
        prop_assert!((a.sobolev_norm(gamma) - 1.0).abs() < 1e-12);
    }
}
