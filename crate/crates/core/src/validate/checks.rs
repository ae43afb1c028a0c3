use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};

use super::{timed, Check};
use crate::cli::config::{DatasetConfig, LoadedConfig, ProjectConfig};
use crate::cli::{dataset, tree_digest, DatasetOptions};
use crate::geometry::{
    build_primitive, direction_from_angles, DetailLevel, ObjectSource, PrimitiveSpec, SceneObject, SceneSpec,
    TargetKind, Vector3,
};
use crate::imaging::{
    extract_patch, form_image, image_patch, keystone_resample_with, predict_geometry, start_index_for_beta,
    clip_series, ClipOptions, ImagingError, KeystoneOptions, SarImage, Window,
};
use crate::oracle::{
    angle_diff_deg, find_peaks_with, plate_rcs_analytic, rcs_peaks, specular_peaks, synth_run, PointScatterer,
};
use crate::oracle::quadrature::triangle_phase_quadrature;
use crate::po::{facet_phase_integral, PlaneWaveExcitation, Polarization, PoSolver};
use crate::sweep::{Channel, RunData, SweepConfig};
use crate::SPEED_OF_LIGHT;

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

pub const PRISM_TX_AZIMUTH_DEG: f64 = 45.0;

/// Bistatic RCS of the 1 x 1 x 10 m prism, VV, 0.72 degree receiver steps.
pub fn prism_rcs_trace(pol: Polarization) -> Result<(Vec<f64>, Vec<f64>), String> {
    let mesh = build_primitive(&PrimitiveSpec::prism(1.0, 1.0, 10.0)).map_err(e)?;
    let azimuths: Vec<f64> = (0..500).map(|i| i as f64 * 0.72).collect();
    let exc = PlaneWaveExcitation::new(1e9, PRISM_TX_AZIMUTH_DEG, 0.0, pol);
    let solver = PoSolver::new(&mesh).map_err(e)?;
    let s = solver.bistatic_rcs_sweep(&exc, 0.0, &azimuths).map_err(e)?;
    Ok((azimuths, s.iter().map(|s| s.sigma_dbsm).collect()))
}

pub fn prism_three_peaks() -> Check {
    timed(1, "prism forward-scatter three-peak experiment", |c| {
        let (az, v) = prism_rcs_trace(Polarization::V)?;
        let peaks = rcs_peaks(&v, &az, 20.0);
        let normals = [Vector3::X, Vector3::Y, -Vector3::X, -Vector3::Y];
        let predicted = specular_peaks(&normals, direction_from_angles(PRISM_TX_AZIMUTH_DEG, 0.0));
        c.measure(
            "maxima with prominence >= 20 dB",
            peaks.len().to_string(),
            "3",
            peaks.len() == 3,
        );
        for want in [135.0, 225.0, 315.0] {
            let got = peaks
                .iter()
                .map(|p| p.azimuth_deg)
                .min_by(|a, b| angle_diff_deg(*a, want).total_cmp(&angle_diff_deg(*b, want)));
            let err = got.map(|g| angle_diff_deg(g, want)).unwrap_or(f64::INFINITY);
            c.measure(
                &format!("peak near {want} deg"),
                got.map(|g| format!("{g:.2} deg")).unwrap_or("none".into()),
                format!("{want} +/- 2 deg"),
                err <= 2.0,
            );
        }
        let predicted_ok = predicted.len() == 3
            && [135.0, 225.0, 315.0].iter().zip(&predicted).all(|(w, p)| angle_diff_deg(*w, *p) < 1e-9);
        c.measure(
            "reflection-law prediction",
            format!("{predicted:?}"),
            "[135, 225, 315]",
            predicted_ok,
        );
        let top = peaks.first().map(|p| p.azimuth_deg).unwrap_or(f64::NAN);
        c.measure(
            "global maximum (forward lobe)",
            format!("{top:.2} deg"),
            "225 +/- 2 deg",
            angle_diff_deg(top, 225.0) <= 2.0,
        );
        Ok(())
    })
}

/// Ray/box slab test, independent of the solver's occlusion code.
fn ray_hits_box(o: Vector3, d: Vector3, lo: Vector3, hi: Vector3) -> bool {
    let (mut t0, mut t1) = (0.0f64, f64::INFINITY);
    for a in 0..3 {
        let (oa, da, l, h) = (o.component(a), d.component(a), lo.component(a), hi.component(a));
        if da == 0.0 {
            if oa < l || oa > h {
                return false;
            }
            continue;
        }
        let (ta, tb) = ((l - oa) / da, (h - oa) / da);
        t0 = t0.max(ta.min(tb));
        t1 = t1.min(ta.max(tb));
    }
    t0 <= t1 && t1 > 0.0
}

pub const SHADOW_WALL: (f64, f64, f64) = (4.0, 0.2, 2.0);
pub const SHADOW_GROUND: (f64, f64) = (10.0, 10.0);
pub const SHADOW_TX_ELEVATION_DEG: f64 = 10.0;

pub fn shadow_map() -> Check {
    timed(2, "wall-on-ground shadow map", |c| {
        let mesh = build_primitive(&PrimitiveSpec::wall_on_ground(SHADOW_WALL, SHADOW_GROUND)).map_err(e)?;
        let exc = PlaneWaveExcitation::new(1e9, 0.0, SHADOW_TX_ELEVATION_DEG, Polarization::V);
        let cur = PoSolver::new(&mesh).map_err(e)?.illuminate(&exc).map_err(e)?;
        let ground = mesh.part("ground").ok_or("no ground part")?.facets.clone();
        let (len, thick, height) = SHADOW_WALL;
        let lo = Vector3::new(-thick / 2.0, -len / 2.0, 0.0);
        let hi = Vector3::new(thick / 2.0, len / 2.0, height);
        let u = exc.tx_direction();
        let h_inc = exc.h_field().norm();
        let (mut shadowed, mut nonzero_in_shadow, mut lit, mut worst) = (0, 0, 0, 0.0f64);
        let mut disagreements = 0;
        for i in ground {
            let occluded = ray_hits_box(mesh.facets()[i].centroid, u, lo, hi);
            if occluded != !cur.lit[i] {
                disagreements += 1;
            }
            if occluded {
                shadowed += 1;
                let j = cur.current[i];
                let zero = [j.x, j.y, j.z].iter().all(|z| z.re == 0.0 && z.im == 0.0);
                if !zero {
                    nonzero_in_shadow += 1;
                }
            } else {
                lit += 1;
                let rel = (cur.current[i].norm() - 2.0 * h_inc).abs() / (2.0 * h_inc);
                worst = worst.max(rel);
            }
        }
        c.measure("geometrically shadowed ground facets", shadowed.to_string(), "> 0", shadowed > 0);
        c.measure(
            "shadowed facets with nonzero J",
            nonzero_in_shadow.to_string(),
            "0 (bitwise)",
            nonzero_in_shadow == 0,
        );
        c.measure(
            "solver lit flag vs slab test",
            format!("{disagreements} disagreements"),
            "0",
            disagreements == 0,
        );
        c.measure(
            "lit |J| / 2|H_inc| - 1 (worst)",
            format!("{worst:.2e} over {lit} facets"),
            "<= 1e-9",
            lit > 0 && worst <= 1e-9,
        );
        c.runtime_limit(5.0);
        Ok(())
    })
}

pub fn plate_oracle() -> Check {
    timed(3, "plate RCS oracle", |c| {
        for (a, b) in [(1.0, 1.0), (2.0, 1.0)] {
            let mesh = build_primitive(&PrimitiveSpec::plate(a, b)).map_err(e)?;
            let exc = PlaneWaveExcitation::new(1e9, 0.0, 90.0, Polarization::H);
            let s = PoSolver::new(&mesh)
                .map_err(e)?
                .bistatic_rcs_sweep(&exc, 90.0, &[0.0])
                .map_err(e)?;
            let want = plate_rcs_analytic(a, b, 1e9);
            let got = s[0].sigma_dbsm;
            c.measure(
                &format!("{a}x{b} m broadside sigma"),
                format!("{got:.4} dBsm"),
                format!("{want:.4} +/- 0.5 dBsm"),
                (got - want).abs() <= 0.5,
            );
        }
        c.runtime_limit(1.0);
        Ok(())
    })
}

pub fn default_parameters() -> Check {
    timed(4, "default parameter arithmetic", |c| {
        let cfg = SweepConfig::default();
        let g = predict_geometry(&cfg, 36.0, 0.0).map_err(e)?;
        let exact_res = SPEED_OF_LIGHT / (2.0 * cfg.bandwidth_hz);
        let exact_ext = SPEED_OF_LIGHT / (2.0 * cfg.frequency_step_hz);
        c.measure(
            "range resolution (3 d.p.)",
            format!("{:.3} m", g.range_res_m),
            "0.200 m",
            format!("{:.3}", g.range_res_m) == "0.200",
        );
        c.measure(
            "range resolution vs c/(2B)",
            format!("{:.12} m", g.range_res_m),
            format!("{exact_res:.12} m +/- 1e-9"),
            (g.range_res_m - exact_res).abs() <= 1e-9,
        );
        c.measure(
            "range extent (1 d.p.)",
            format!("{:.1} m", g.range_extent_m),
            "10.0 m",
            format!("{:.1}", g.range_extent_m) == "10.0",
        );
        c.measure(
            "range extent vs c/(2 df)",
            format!("{:.12} m", g.range_extent_m),
            format!("{exact_ext:.12} m +/- 1e-9"),
            (g.range_extent_m - exact_ext).abs() <= 1e-9,
        );
        c.measure(
            "sample grid",
            format!("{} x {}", cfg.n_frequency(), cfg.n_azimuth()),
            "51 x 500",
            cfg.n_frequency() == 51 && cfg.n_azimuth() == 500,
        );
        c.measure(
            "band edges",
            format!("{} .. {} MHz", cfg.frequency(0) / 1e6, cfg.frequency(50) / 1e6),
            "625 .. 1375 MHz",
            (cfg.frequency(0) - 625e6).abs() <= 1e-9 * 625e6 && (cfg.frequency(50) - 1375e6).abs() <= 1e-9 * 1375e6,
        );
        Ok(())
    })
}

/// Scatterers of the end-to-end oracle check: position and amplitude.
pub fn oracle_scatterers() -> Vec<PointScatterer> {
    vec![
        PointScatterer::new(Vector3::new(0.0, 0.0, 0.0), 1.0),
        PointScatterer::new(Vector3::new(1.0, 2.0, 0.0), 0.5),
        PointScatterer::new(Vector3::new(-2.0, -1.0, 0.0), 1.0),
    ]
}

fn clip_opts(window: Window, perturbation: f64, n: usize) -> ClipOptions {
    ClipOptions {
        channel: Channel::H,
        window,
        keystone: KeystoneOptions {
            nx: n,
            ny: n,
            perturbation,
            ..KeystoneOptions::default()
        },
    }
}

/// Position error of `p` relative to `(x, y)` split into image cross-range
/// and range components, metres.
fn axis_errors(img: &SarImage, x: f64, y: f64, px: f64, py: f64) -> (f64, f64) {
    let ((cx, cy), (rx, ry)) = img.axes();
    let (dx, dy) = (px - x, py - y);
    ((dx * cx + dy * cy).abs(), (dx * rx + dy * ry).abs())
}

pub fn point_scatterers(perturbation: f64) -> Check {
    timed(5, "point-scatterer end-to-end", |c| {
        let cfg = SweepConfig::default();
        let scat = oracle_scatterers();
        let run = synth_run(&scat, &cfg).map_err(e)?;
        let start = start_index_for_beta(&run, 36.0, 0.0).map_err(e)?;
        let img = image_patch(&run, start, 36.0, &clip_opts(Window::Rectangular, perturbation, 128)).map_err(e)?;
        let beta = img.meta.beta_mean_deg;
        c.measure("patch mean bistatic angle", format!("{beta:.2} deg"), "<= 30 deg", beta <= 30.0);
        let pred = predict_geometry(&cfg, 36.0, beta).map_err(e)?;
        let peaks = find_peaks_with(&img, 3.0, -30.0, 3);
        let mut amps = Vec::new();
        for s in &scat {
            let (x, y) = (s.position.x, s.position.y);
            let best = peaks
                .iter()
                .min_by(|a, b| ((a.x_m - x).hypot(a.y_m - y)).total_cmp(&(b.x_m - x).hypot(b.y_m - y)));
            let Some(p) = best else {
                c.measure(&format!("scatterer ({x}, {y})"), "no peak", "recovered", false);
                continue;
            };
            let (ec, er) = axis_errors(&img, x, y, p.x_m, p.y_m);
            c.measure(
                &format!("scatterer ({x}, {y}) position error"),
                format!("cr {ec:.3} m, r {er:.3} m"),
                format!("<= {:.3} m, {:.3} m", pred.crossrange_res_m, pred.range_res_m),
                ec <= pred.crossrange_res_m && er <= pred.range_res_m,
            );
            amps.push(p.amplitude_db);
        }
        if amps.len() == 3 {
            let ratio = amps[0] - amps[1];
            c.measure(
                "amplitude ratio 1 : 0.5",
                format!("{ratio:.2} dB"),
                "6.0 +/- 1 dB",
                (ratio - 6.0).abs() <= 1.0,
            );
        }
        c.runtime_limit(10.0);
        Ok(())
    })
}

/// Half-power mainlobe width of `img` along its range axis through the
/// strongest pixel, metres.
pub fn range_width_3db(img: &SarImage) -> f64 {
    let (nx, ny) = (img.nx(), img.ny());
    let (mut best, mut bi) = (0.0, 0);
    for (i, p) in img.pixels.iter().enumerate() {
        if p.norm() > best {
            best = p.norm();
            bi = i;
        }
    }
    let (ix, iy) = (bi / ny, bi % ny);
    let _ = nx;
    let level = best / std::f64::consts::SQRT_2;
    let mag = |j: usize| img.pixel(ix, j).norm();
    let mut hi = iy;
    while hi + 1 < ny && mag(hi + 1) > level {
        hi += 1;
    }
    let mut lo = iy;
    while lo > 0 && mag(lo - 1) > level {
        lo -= 1;
    }
    let cross = |inside: usize, outside: usize| {
        let (a, b) = (mag(inside), mag(outside));
        inside as f64 + (a - level) / (a - b) * (outside as f64 - inside as f64)
    };
    let right = if hi + 1 < ny { cross(hi, hi + 1) } else { hi as f64 };
    let left = if lo > 0 { cross(lo, lo - 1) } else { lo as f64 };
    (right - left) * img.meta.dy_m
}

pub fn bistatic_degradation() -> Check {
    timed(6, "bistatic resolution degradation", |c| {
        let cfg = SweepConfig::default();
        let run = synth_run(&[PointScatterer::new(Vector3::ZERO, 1.0)], &cfg).map_err(e)?;
        let opts = clip_opts(Window::Rectangular, 0.0, 512);
        let mut widths = Vec::new();
        for target in [10.0, 60.0, 120.0] {
            let start = start_index_for_beta(&run, 36.0, target).map_err(e)?;
            let img = image_patch(&run, start, 36.0, &opts).map_err(e)?;
            let beta = img.meta.beta_mean_deg;
            let pred = predict_geometry(&cfg, 36.0, beta).map_err(e)?.range_res_m;
            let w = range_width_3db(&img);
            let ratio = w / pred;
            c.measure(
                &format!("-3 dB range width, beta {beta:.1} deg"),
                format!("{w:.4} m ({ratio:.3} x predicted)"),
                format!("{pred:.4} m +/- 30%"),
                (ratio - 1.0).abs() <= 0.3,
            );
            widths.push(w);
        }
        let monotone = widths.windows(2).all(|w| w[1] >= w[0]);
        c.measure(
            "width non-decreasing in beta",
            format!("{widths:.4?}"),
            "non-decreasing",
            monotone,
        );

        let grazing = SweepConfig {
            tx_elevation_deg: 0.0,
            rx_elevation_deg: 0.0,
            ..SweepConfig::default()
        };
        let run = synth_run(&[PointScatterer::new(Vector3::ZERO, 1.0)], &grazing).map_err(e)?;
        let start = start_index_for_beta(&run, 7.2, 180.0).map_err(e)?;
        let patch = extract_patch(&run, start, 7.2, Channel::H).map_err(e)?;
        let beta = patch.beta_mean_deg();
        let r = keystone_resample_with(&patch, &KeystoneOptions::default());
        c.measure(
            &format!("patch at beta {beta:.2} deg"),
            match &r {
                Err(ImagingError::SupportCollapsed { .. }) => "support collapsed".to_string(),
                Err(other) => format!("error: {other}"),
                Ok(_) => "image formed".into(),
            },
            "support collapsed (beta > 175)",
            beta > 175.0 && matches!(r, Err(ImagingError::SupportCollapsed { .. })),
        );
        Ok(())
    })
}

pub fn clip_accounting() -> Check {
    timed(7, "clip accounting", |c| {
        let cfg = SweepConfig::default();
        let run = synth_run(&[PointScatterer::new(Vector3::ZERO, 1.0)], &cfg).map_err(e)?;
        let opts = ClipOptions::default();
        for (stride, want) in [(10, 50), (20, 25)] {
            let s = clip_series(&run, 36.0, stride, &opts).map_err(e)?;
            c.measure(
                &format!("clips at stride {stride}"),
                format!("{} formed, {} skipped", s.clips.len(), s.skipped.len()),
                format!("{want}"),
                s.clips.len() == want && s.skipped.is_empty(),
            );
        }
        Ok(())
    })
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    if b == Complex64::new(0.0, 0.0) {
        a.norm()
    } else {
        (a - b).norm() / b.norm()
    }
}

pub const QUADRATURE_TRIANGLES: usize = 1000;

/// Worst relative error of the closed-form facet phase integral against
/// quadrature over seeded random triangles with |q| <= 100 rad/m.
pub fn phase_integral_vs_quadrature(count: usize, seed: u64) -> f64 {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < count {
        let mut v = || Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let tri = [v(), v(), v()];
        if (tri[1] - tri[0]).cross(tri[2] - tri[0]).norm() < 1e-3 {
            continue;
        }
        let dir = v();
        if dir.norm() < 1e-3 {
            continue;
        }
        let q = dir.normalized() * rng.random_range(0.0..100.0);
        let a = facet_phase_integral(&tri, q);
        let b = triangle_phase_quadrature(&tri, q);
        worst = worst.max(rel(a, b));
        done += 1;
    }
    worst
}

pub fn invariance_suite(perturbation: f64) -> Check {
    timed(8, "invariance suite", |c| {
        let mesh = crate::geometry::build_target(TargetKind::Msl, DetailLevel::Coarse);
        let solver = PoSolver::new(&mesh).map_err(e)?;
        let f = 1e9;
        let mut exc = PlaneWaveExcitation::new(f, 30.0, 15.0, Polarization::H);
        let cur1 = solver.illuminate(&exc).map_err(e)?;
        exc.amplitude = 2.0;
        let cur2 = solver.illuminate(&exc).map_err(e)?;
        let rx = [(75.0, 15.0), (200.0, 15.0), (300.0, 10.0)];
        let mut lin = 0.0f64;
        for (az, el) in rx {
            let a = solver.far_field(&cur1, f, az, el).map_err(e)?;
            let b = solver.far_field(&cur2, f, az, el).map_err(e)?;
            lin = lin.max(rel(b.e_h, a.e_h * 2.0)).max(rel(b.e_v, a.e_v * 2.0));
        }
        c.measure("linearity in amplitude", format!("{lin:.1e}"), "<= 1e-14", lin <= 1e-14);

        exc.amplitude = 1.0;
        let delta = Vector3::new(0.3, -0.7, 0.2);
        let moved = mesh.translated(delta);
        let ms = PoSolver::new(&moved).map_err(e)?;
        let mcur = ms.illuminate(&exc).map_err(e)?;
        let mut ramp = 0.0f64;
        for (az, el) in rx {
            let a = solver.far_field(&cur1, f, az, el).map_err(e)?;
            let b = ms.far_field(&mcur, f, az, el).map_err(e)?;
            let q = (exc.tx_direction() + direction_from_angles(az, el)) * crate::wavenumber(f);
            let ph = Complex64::from_polar(1.0, q.dot(delta));
            ramp = ramp.max(rel(b.e_h, a.e_h * ph)).max(rel(b.e_v, a.e_v * ph));
        }
        c.measure("translation phase ramp", format!("{ramp:.1e}"), "<= 1e-10", ramp <= 1e-10);

        let rotated = mesh.rotated_z(90.0);
        let rs = PoSolver::new(&rotated).map_err(e)?;
        let azs = [0.0, 45.0, 137.0, 210.0];
        let base = solver.bistatic_rcs_sweep(&exc, 15.0, &azs).map_err(e)?;
        let mut rexc = exc;
        rexc.tx_azimuth_deg += 90.0;
        let razs: Vec<f64> = azs.iter().map(|a| a + 90.0).collect();
        let rot = rs.bistatic_rcs_sweep(&rexc, 15.0, &razs).map_err(e)?;
        let mut frame = 0.0f64;
        for (a, b) in base.iter().zip(&rot) {
            let (la, lb) = (10f64.powf(a.sigma_dbsm / 10.0), 10f64.powf(b.sigma_dbsm / 10.0));
            frame = frame.max((la - lb).abs() / la);
        }
        c.measure("rigid-frame rotation (sigma)", format!("{frame:.1e}"), "<= 1e-9", frame <= 1e-9);

        let cfg = SweepConfig::default();
        let run = synth_run(&oracle_scatterers(), &cfg).map_err(e)?;
        let start = start_index_for_beta(&run, 36.0, 0.0).map_err(e)?;
        let patch = extract_patch(&run, start, 36.0, Channel::H).map_err(e)?;
        let grid = keystone_resample_with(&patch, &KeystoneOptions::default()).map_err(e)?;
        let img = form_image(&grid, Window::Rectangular, grid.nx, grid.ny).map_err(e)?;
        let ge: f64 = grid.data.iter().map(|v| v.norm_sqr()).sum();
        let pars = (img.energy() - ge).abs() / ge;
        c.measure("Parseval (image vs grid energy)", format!("{pars:.1e}"), "<= 1e-10", pars <= 1e-10);

        let zero = RunData::new(
            cfg.clone(),
            "zero",
            "0",
            vec![Complex64::new(0.0, 0.0); run.samples.len()],
        )
        .map_err(e)?;
        let zi = image_patch(&zero, start, 36.0, &ClipOptions::default()).map_err(e)?;
        let all_zero = zi.pixels.iter().all(|p| p.re == 0.0 && p.im == 0.0);
        c.measure("zero input -> zero image", if all_zero { "exact zero" } else { "nonzero" }, "exact zero", all_zero);

        let a = synth_run(&oracle_scatterers()[..1], &cfg).map_err(e)?;
        let b = synth_run(&oracle_scatterers()[1..], &cfg).map_err(e)?;
        let opts = ClipOptions::default();
        let (ia, ib, iab) = (
            image_patch(&a, start, 36.0, &opts).map_err(e)?,
            image_patch(&b, start, 36.0, &opts).map_err(e)?,
            image_patch(&run, start, 36.0, &opts).map_err(e)?,
        );
        let peak = iab.peak_magnitude();
        let lin_img = iab
            .pixels
            .iter()
            .zip(ia.pixels.iter().zip(&ib.pixels))
            .map(|(s, (x, y))| (s - x - y).norm())
            .fold(0.0, f64::max)
            / peak;
        c.measure("imaging linearity", format!("{lin_img:.1e}"), "<= 1e-12", lin_img <= 1e-12);

        let shift = shift_theorem_error(perturbation).map_err(e)?;
        c.measure(
            "shift theorem (peak displacement error)",
            format!("{:.2} px cross-range, {:.2} px range", shift.0, shift.1),
            "<= 1 px",
            shift.0 <= 1.0 && shift.1 <= 1.0,
        );

        let worst = phase_integral_vs_quadrature(QUADRATURE_TRIANGLES, 0x5eed);
        c.measure(
            &format!("phase integral vs quadrature ({QUADRATURE_TRIANGLES} triangles)"),
            format!("{worst:.1e}"),
            "<= 1e-8",
            worst <= 1e-8,
        );
        Ok(())
    })
}

/// Displacement error, in pixels along each image axis, of the image peak
/// when an oracle scatterer moves from (0.4, -0.3) by (1, 2) metres.
pub fn shift_theorem_error(perturbation: f64) -> Result<(f64, f64), ImagingError> {
    let cfg = SweepConfig::default();
    let opts = clip_opts(Window::Rectangular, perturbation, 128);
    let p0 = Vector3::new(0.4, -0.3, 0.0);
    let delta = Vector3::new(1.0, 2.0, 0.0);
    let locate = |p: Vector3| -> Result<(SarImage, f64, f64), ImagingError> {
        let run = synth_run(&[PointScatterer::new(p, 1.0)], &cfg).expect("oracle run");
        let start = start_index_for_beta(&run, 36.0, 0.0)?;
        let img = image_patch(&run, start, 36.0, &opts)?;
        let pk = find_peaks_with(&img, 3.0, -40.0, 1);
        let (x, y) = pk.first().map(|p| (p.x_m, p.y_m)).unwrap_or((f64::NAN, f64::NAN));
        Ok((img, x, y))
    };
    let (img, x0, y0) = locate(p0)?;
    let (_, x1, y1) = locate(p0 + delta)?;
    let (ec, er) = axis_errors(&img, x0 + delta.x, y0 + delta.y, x1, y1);
    Ok((ec / img.meta.dx_m, er / img.meta.dy_m))
}

/// The missile-launcher demo project: one run, default sweep and
/// imaging.
pub fn msl_demo_project() -> ProjectConfig {
    ProjectConfig {
        scene: SceneSpec {
            name: "MSL".into(),
            objects: vec![SceneObject::new(ObjectSource::Target {
                kind: TargetKind::Msl,
                detail: DetailLevel::Coarse,
            })],
        },
        sweep: SweepConfig::default(),
        imaging: Default::default(),
        rcs: Default::default(),
        shadowmap: Default::default(),
        dataset: DatasetConfig {
            targets: Vec::new(),
            tx_azimuths_deg: vec![0.0],
            elevations_deg: vec![15.0],
            polarizations: vec![Polarization::H],
        },
        output: Default::default(),
    }
}

fn scratch_dir(tag: &str) -> PathBuf {
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_nanos())
        .unwrap_or(0);
    std::env::temp_dir().join(format!("sarforge-{tag}-{}-{nanos}", std::process::id()))
}

/// Runs the MSL demo dataset into `out` with `jobs` workers.
pub fn run_msl_demo(out: &Path, jobs: usize) -> Result<crate::cli::DatasetReport, String> {
    let cfg = LoadedConfig {
        config: msl_demo_project(),
        base_dir: PathBuf::from("."),
    };
    dataset(&cfg, out, DatasetOptions { jobs, dry_run: false }).map_err(e)
}

pub fn dataset_determinism() -> Check {
    timed(9, "dataset determinism (MSL demo)", |c| {
        let (a, b) = (scratch_dir("j1"), scratch_dir("j8"));
        let result = (|| -> Result<(), String> {
            let t = std::time::Instant::now();
            let ra = run_msl_demo(&a, 1)?;
            let ta = t.elapsed().as_secs_f64();
            let rb = run_msl_demo(&b, 8)?;
            c.measure("runs / clips (jobs 1)", format!("{} / {}", ra.executed, ra.clips), "1 / 50", ra.executed == 1 && ra.clips == 50);
            c.measure("runs / clips (jobs 8)", format!("{} / {}", rb.executed, rb.clips), "1 / 50", rb.executed == 1 && rb.clips == 50);
            let da = tree_digest(&a).map_err(e)?;
            let db = tree_digest(&b).map_err(e)?;
            let differing = da.iter().filter(|(k, v)| db.get(*k) != Some(v)).count() + db.keys().filter(|k| !da.contains_key(*k)).count();
            c.measure(
                "artifact trees (jobs 1 vs 8)",
                format!("{} files, {differing} differ", da.len()),
                "identical",
                differing == 0 && !da.is_empty(),
            );
            let m = crate::cli::read_manifest(&a.join("dataset")).ok_or("manifest unreadable")?;
            let listed: std::collections::BTreeSet<String> = m.files().iter().map(|f| f.path.clone()).collect();
            let orphans = da
                .keys()
                .filter(|k| k.starts_with("dataset/") && *k != "dataset/manifest.json")
                .filter(|k| !listed.contains(&k["dataset/".len()..]))
                .count();
            c.measure("files not in manifest", orphans.to_string(), "0", orphans == 0);
            c.measure("single demo wall time", format!("{ta:.1} s"), "< 600 s", ta < 600.0);
            Ok(())
        })();
        let _ = std::fs::remove_dir_all(&a);
        let _ = std::fs::remove_dir_all(&b);
        result
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slab_test_cases() {
        let lo = Vector3::new(-1.0, -1.0, 0.0);
        let hi = Vector3::new(1.0, 1.0, 1.0);
        assert!(ray_hits_box(Vector3::new(-3.0, 0.0, 0.0), Vector3::X, lo, hi));
        assert!(!ray_hits_box(Vector3::new(3.0, 0.0, 0.0), Vector3::X, lo, hi));
        assert!(ray_hits_box(Vector3::new(0.0, 0.0, 0.5), Vector3::X, lo, hi));
        assert!(!ray_hits_box(Vector3::new(-3.0, 2.0, 0.5), Vector3::X, lo, hi));
    }

    #[test]
    fn perturbation_breaks_shift_theorem() {
        let (c0, r0) = shift_theorem_error(0.0).unwrap();
        assert!(c0 <= 1.0 && r0 <= 1.0, "{c0} {r0}");
        let (c1, r1) = shift_theorem_error(0.5).unwrap();
        assert!(c1 > 1.0 || r1 > 1.0, "{c1} {r1}");
    }
}
