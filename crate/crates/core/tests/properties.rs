use num_complex::Complex64;
use proptest::prelude::*;

use sarforge::geometry::{build_primitive, direction_from_angles, PrimitiveSpec, Vector3};
use sarforge::imaging::{
    extract_patch, form_image, image_patch, keystone_resample_with, ClipOptions, KeystoneOptions, ResampledGrid,
    Window,
};
use sarforge::oracle::quadrature::triangle_phase_quadrature;
use sarforge::oracle::{find_peaks_with, synth_run, PointScatterer};
use sarforge::po::{facet_phase_integral, PlaneWaveExcitation, Polarization, PoSolver};
use sarforge::sweep::{load_run, save_run, Channel, RunData, SweepConfig};
use sarforge::wavenumber;

fn small_sweep(el: f64) -> SweepConfig {
    SweepConfig {
        bandwidth_hz: 300e6,
        frequency_step_hz: 15e6,
        rx_elevation_deg: el,
        tx_elevation_deg: el,
        ..SweepConfig::default()
    }
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn pol() -> impl Strategy<Value = Polarization> {
    prop_oneof![Just(Polarization::H), Just(Polarization::V)]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn keystone_reproduces_constants(el in 5.0f64..30.0, start in 0usize..500, cols in prop_oneof![Just(10.8), Just(18.0), Just(36.0)]) {
        let cfg = small_sweep(el);
        let ones = vec![Complex64::new(1.0, 0.0); 2 * cfg.n_azimuth() * cfg.n_frequency()];
        let run = RunData::new(cfg, "ones", "0", ones).unwrap();
        let patch = extract_patch(&run, start, cols, Channel::H).unwrap();
        let g = keystone_resample_with(&patch, &KeystoneOptions::default()).unwrap();
        prop_assert!(g.support_count() > 0);
        for (v, s) in g.data.iter().zip(&g.support) {
            if *s {
                prop_assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            } else {
                prop_assert_eq!(*v, Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn support_grows_with_swath(el in 5.0f64..30.0, start in 0usize..500) {
        let cfg = small_sweep(el);
        let ones = vec![Complex64::new(1.0, 0.0); 2 * cfg.n_azimuth() * cfg.n_frequency()];
        let run = RunData::new(cfg, "ones", "0", ones).unwrap();
        let opts = KeystoneOptions { nx: 256, ny: 128, dkx: Some(0.1), dky: Some(0.3), ..KeystoneOptions::default() };
        let narrow = keystone_resample_with(&extract_patch(&run, (start + 10) % 500, 14.4, Channel::H).unwrap(), &opts);
        let wide = keystone_resample_with(&extract_patch(&run, start, 28.8, Channel::H).unwrap(), &opts);
        if let (Ok(n), Ok(w)) = (narrow, wide) {
            prop_assert!(w.support_count() >= n.support_count(), "{} < {}", w.support_count(), n.support_count());
        }
    }

    #[test]
    fn imaging_is_linear(
        a in (-3.0f64..3.0, -3.0f64..3.0),
        b in (-3.0f64..3.0, -3.0f64..3.0),
        alpha in (-2.0f64..2.0, -2.0f64..2.0),
        start in 0usize..500,
    ) {
        let cfg = small_sweep(15.0);
        let ra = synth_run(&[PointScatterer::new(Vector3::new(a.0, a.1, 0.0), 1.0)], &cfg).unwrap();
        let rb = synth_run(&[PointScatterer::new(Vector3::new(b.0, b.1, 0.0), 1.0)], &cfg).unwrap();
        let al = Complex64::new(alpha.0, alpha.1);
        let mix: Vec<Complex64> = ra.samples.iter().zip(&rb.samples).map(|(x, y)| al * x + y).collect();
        let rm = RunData::new(cfg, "mix", "0", mix).unwrap();
        let opts = ClipOptions::default();
        let (ia, ib, im) = (
            image_patch(&ra, start, 36.0, &opts).unwrap(),
            image_patch(&rb, start, 36.0, &opts).unwrap(),
            image_patch(&rm, start, 36.0, &opts).unwrap(),
        );
        let scale = ia.peak_magnitude().max(ib.peak_magnitude());
        for ((m, x), y) in im.pixels.iter().zip(&ia.pixels).zip(&ib.pixels) {
            prop_assert!((m - (al * x + y)).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn image_energy_matches_grid(seed in any::<u64>(), n in prop_oneof![Just(32usize), Just(64)]) {
        let mut state = seed | 1;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let data: Vec<Complex64> = (0..n * n).map(|_| Complex64::new(next(), next())).collect();
        let grid = ResampledGrid {
            nx: n,
            ny: n,
            dkx: 0.25,
            dky: 0.6,
            ky_center: 40.0,
            range_axis_deg: 0.0,
            beta_mean_deg: 0.0,
            data: data.clone(),
            support: vec![true; n * n],
        };
        let img = form_image(&grid, Window::Rectangular, n, n).unwrap();
        let e: f64 = data.iter().map(|v| v.norm_sqr()).sum();
        prop_assert!((img.energy() - e).abs() <= 1e-10 * e);
    }

    #[test]
    fn image_peak_follows_scatterer(x in -3.0f64..3.0, y in -3.0f64..3.0, start in 0usize..500) {
        let cfg = SweepConfig::default();
        let run = synth_run(&[PointScatterer::new(Vector3::new(x, y, 0.0), 1.0)], &cfg).unwrap();
        let patch = extract_patch(&run, start, 36.0, Channel::H).unwrap();
        prop_assume!(patch.beta_mean_deg() < 90.0);
        let img = image_patch(&run, start, 36.0, &ClipOptions::default()).unwrap();
        let p = find_peaks_with(&img, 3.0, -40.0, 1)[0];
        let ((cx, cy), (rx, ry)) = img.axes();
        let (dx, dy) = (p.x_m - x, p.y_m - y);
        prop_assert!((dx * cx + dy * cy).abs() <= img.meta.dx_m);
        prop_assert!((dx * rx + dy * ry).abs() <= img.meta.dy_m);
    }

    #[test]
    fn translation_is_a_phase_ramp(
        d in (-2.0f64..2.0, -2.0f64..2.0, -1.0f64..1.0),
        tx in (0.0f64..360.0, 5.0f64..60.0),
        rx in (0.0f64..360.0, 5.0f64..60.0),
        p in pol(),
    ) {
        let mesh = build_primitive(&PrimitiveSpec::prism(1.0, 2.0, 0.7)).unwrap();
        let delta = Vector3::new(d.0, d.1, d.2);
        let moved = mesh.translated(delta);
        let f = 1e9;
        let exc = PlaneWaveExcitation::new(f, tx.0, tx.1, p);
        let (s0, s1) = (PoSolver::new(&mesh).unwrap(), PoSolver::new(&moved).unwrap());
        let a = s0.far_field(&s0.illuminate(&exc).unwrap(), f, rx.0, rx.1).unwrap();
        let b = s1.far_field(&s1.illuminate(&exc).unwrap(), f, rx.0, rx.1).unwrap();
        let q = (exc.tx_direction() + direction_from_angles(rx.0, rx.1)) * wavenumber(f);
        let ramp = Complex64::from_polar(1.0, q.dot(delta));
        let scale = a.e_h.norm().max(a.e_v.norm());
        prop_assert!((b.e_h - a.e_h * ramp).norm() <= 1e-10 * scale);
        prop_assert!((b.e_v - a.e_v * ramp).norm() <= 1e-10 * scale);
    }

    #[test]
    fn rotation_commutes_with_scattering(theta in -180.0f64..180.0, tx_az in 0.0f64..360.0, rx_az in 0.0f64..360.0, p in pol()) {
        let mesh = build_primitive(&PrimitiveSpec::prism(1.0, 2.0, 0.7)).unwrap();
        let rot = mesh.rotated_z(theta);
        let exc = PlaneWaveExcitation::new(1e9, tx_az, 20.0, p);
        let rexc = PlaneWaveExcitation::new(1e9, tx_az + theta, 20.0, p);
        let a = PoSolver::new(&mesh).unwrap().bistatic_rcs_sweep(&exc, 25.0, &[rx_az]).unwrap();
        let b = PoSolver::new(&rot).unwrap().bistatic_rcs_sweep(&rexc, 25.0, &[rx_az + theta]).unwrap();
        let (la, lb) = (10f64.powf(a[0].sigma_dbsm / 10.0), 10f64.powf(b[0].sigma_dbsm / 10.0));
        prop_assume!(la > 1e-12);
        prop_assert!((la - lb).abs() <= 1e-9 * la, "{} vs {}", a[0].sigma_dbsm, b[0].sigma_dbsm);
    }

    #[test]
    fn shadowed_facets_carry_no_current(az in 0.0f64..360.0, el in 3.0f64..80.0, p in pol()) {
        let mesh = build_primitive(&PrimitiveSpec::wall_on_ground((4.0, 0.2, 2.0), (10.0, 10.0))).unwrap();
        let cur = PoSolver::new(&mesh).unwrap().illuminate(&PlaneWaveExcitation::new(1e9, az, el, p)).unwrap();
        for (j, lit) in cur.current.iter().zip(&cur.lit) {
            if !lit {
                prop_assert!([j.x, j.y, j.z].iter().all(|c| c.re == 0.0 && c.im == 0.0));
            }
        }
    }

    #[test]
    fn phase_integral_agrees_with_quadrature(
        v in proptest::array::uniform9(-1.0f64..1.0),
        dir in (0.0f64..360.0, -90.0f64..90.0),
        qn in 0.0f64..100.0,
    ) {
        let tri = [Vector3::new(v[0], v[1], v[2]), Vector3::new(v[3], v[4], v[5]), Vector3::new(v[6], v[7], v[8])];
        prop_assume!((tri[1] - tri[0]).cross(tri[2] - tri[0]).norm() > 1e-3);
        let q = direction_from_angles(dir.0, dir.1) * qn;
        let a = facet_phase_integral(&tri, q);
        let b = triangle_phase_quadrature(&tri, q);
        prop_assert!(rel(a, b) <= 1e-8, "{a} vs {b}");
    }

    #[test]
    fn run_files_round_trip(seed in any::<u32>(), el in 5.0f64..30.0) {
        let cfg = small_sweep(el);
        let n = 2 * cfg.n_azimuth() * cfg.n_frequency();
        let samples: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(((i as u64 * 2654435761 + seed as u64) % 1000) as f64 / 7.0, -(i as f64).sqrt()))
            .collect();
        let run = RunData::new(cfg, "r", "abc", samples).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.bsar");
        save_run(&run, &path).unwrap();
        let back = load_run(&path).unwrap();
        prop_assert_eq!(&back.samples, &run.samples);
        prop_assert_eq!(back.content_hash(), run.content_hash());
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
        prop_assert!(load_run(&path).is_err());
    }
}
