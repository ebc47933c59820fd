use std::f64::consts::PI;

use approx::assert_relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use talbot_core::*;

fn lambda(kev: f64) -> Wavelength {
    de_broglie_wavelength(BeamEnergy::from_kev(kev).unwrap())
}

fn random_field(grid: TransverseGrid, seed: &[(f64, f64)], wavelength: Wavelength) -> WaveField {
    let amps = (0..grid.len()).map(|j| {
        let (a, b) = seed[j % seed.len()];
        Complex64::new(
            a * (1.0 + (j as f64 * 0.37).sin()),
            b * (j as f64 * 0.11).cos(),
        )
    });
    WaveField::new(grid, amps.collect(), wavelength, 0.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn propagation_is_unitary_and_composes(
        seed in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 7),
        kev in 1.0f64..10.0,
        z1 in 0.0f64..3e-3,
        z2 in 0.0f64..3e-3,
    ) {
        let grid = TransverseGrid::new(25.6e-6, 2048).unwrap();
        let u = random_field(grid, &seed, lambda(kev));
        let v = u.propagate(z1).unwrap();
        prop_assert!((v.flux() / u.flux() - 1.0).abs() < 1e-12);
        let two = v.propagate(z2).unwrap();
        let one = u.propagate(z1 + z2).unwrap();
        let scale = one.amplitudes().iter().map(|a| a.norm()).fold(0.0, f64::max);
        for (a, b) in two.amplitudes().iter().zip(one.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-10 * scale);
        }
    }

    #[test]
    fn far_field_conserves_flux(
        seed in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 5),
        z_det in 0.1f64..3.0,
    ) {
        let grid = TransverseGrid::new(25.6e-6, 2048).unwrap();
        let u = random_field(grid, &seed, lambda(2.8));
        let frame = u.far_field(z_det).unwrap();
        prop_assert!((frame.total / u.flux() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn wavelength_falls_with_energy(a in 0.1f64..50.0, b in 0.1f64..50.0) {
        prop_assume!(a < b);
        prop_assert!(lambda(a).metres() > lambda(b).metres());
        prop_assert!(lambda(a).metres() < de_broglie_wavelength_nonrelativistic(BeamEnergy::from_kev(a).unwrap()).metres());
    }

    #[test]
    fn binary_grating_orders_follow_sinc(open in 0.1f64..0.9, n in 1i64..6) {
        let d = 100e-9;
        let orders = fourier_orders(&GratingSpec::new(d, open * d).unwrap(), 8).unwrap();
        let expected = open * (PI * n as f64 * open).sin().abs() / (PI * n as f64 * open);
        prop_assert!((orders.get(n).norm() - expected).abs() < 1e-9);
        prop_assert!((orders.get(0).norm() - open).abs() < 1e-12);
    }
}

#[test]
fn nanograting_orders_and_talbot_distance() {
    let orders = fourier_orders(&GratingSpec::nanograting(), 4).unwrap();
    assert_relative_eq!(orders.get(0).norm(), 0.5, epsilon = 1e-6);
    assert_relative_eq!(orders.get(1).norm(), 1.0 / PI, epsilon = 1e-6);
    assert!(orders.get(2).norm() < 1e-6);
    let lt = talbot_distance(100e-9, lambda(2.8)).unwrap();
    assert_relative_eq!(lt, 2.0 * 1e-14 / lambda(2.8).metres(), max_relative = 1e-14);
}

#[test]
fn geometric_laws_agree_with_each_other() {
    let (d, r, l) = (100e-9, 2.15, 0.8641e-3);
    let z = demagnified_revival_plane(l, r);
    assert!(z < l);
    // The demagnified pattern period and the moire beat between it and G2.
    let p = demagnified_period(d, r, z);
    let beat = moire_beat_period(d, r, z);
    assert_relative_eq!(1.0 / beat, (1.0 / p - 1.0 / d).abs(), max_relative = 1e-9);
}

#[test]
fn test_preset_moire_modulation() {
    let preset = Preset::Test;
    let ctx = SimContext::new(
        BeamEnergy::from_kev(2.8).unwrap(),
        preset.grid(),
        preset.members(),
    )
    .unwrap();
    let g = GratingSpec::nanograting();
    let ifm = Interferometer::new(preset.beam(), g, g, ctx).unwrap();
    let shifts: Vec<f64> = (0..20).map(|i| i as f64 * 5e-9).collect();
    let curve = ifm.moire_scan(ifm.talbot_distance(), &shifts).unwrap();
    assert!(curve.contrast() > 0.9, "{}", curve.contrast());
    let blocked = ifm
        .moire_scan(ifm.talbot_distance(), &[0.0, 50e-9])
        .unwrap();
    assert!(blocked.flux[0] > blocked.flux[1]);
}
