//! Closed-form integral of a linear phase over a flat triangle.

use num_complex::Complex64;

use crate::geometry::Vector3;

/// Node spread (radians) below which the Taylor series is used.
pub const SERIES_THRESHOLD_RAD: f64 = 1e-4;

/// `(e^{jd} - 1) / (jd)` without cancellation for any `d`.
fn phi1(d: f64) -> Complex64 {
    if d.abs() < SERIES_THRESHOLD_RAD {
        let d2 = d * d;
        // 1 + jd/2 - d^2/6 - jd^3/24
        return Complex64::new(1.0 - d2 / 6.0, d / 2.0 - d * d2 / 24.0);
    }
    let half = 0.5 * d;
    let s = half.sin();
    // e^{jd} - 1 = -2 sin^2(d/2) + j sin d
    let em1 = Complex64::new(-2.0 * s * s, d.sin());
    em1 / Complex64::new(0.0, d)
}

/// First divided difference of g(x) = -e^{jx} on nodes (x0, x1).
fn dd1(x0: f64, x1: f64) -> Complex64 {
    -Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, x0) * phi1(x1 - x0)
}

/// `∫∫_{u,v≥0, u+v≤1} e^{j(a u + b v)} du dv`.
///
/// Evaluated as the second divided difference of `-e^{jx}` on the nodes
/// (0, a, b), pairing the two most distant nodes in the outer difference.
/// When all nodes lie within the series threshold a Taylor expansion is used.
pub fn simplex_phase_integral(a: f64, b: f64) -> Complex64 {
    let nodes = [0.0, a, b];
    let lo = nodes.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = nodes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread = hi - lo;
    if spread < SERIES_THRESHOLD_RAD {
        return series(a, b);
    }
    // outer nodes: the extreme pair; middle node is the remaining one
    let (i_lo, i_hi) = {
        let mut il = 0;
        let mut ih = 0;
        for i in 0..3 {
            if nodes[i] < nodes[il] {
                il = i;
            }
            if nodes[i] > nodes[ih] {
                ih = i;
            }
        }
        if il == ih {
            ih = (il + 1) % 3;
        }
        (il, ih)
    };
    let i_mid = 3 - i_lo - i_hi;
    let (x0, xm, x2) = (nodes[i_lo], nodes[i_mid], nodes[i_hi]);
    (dd1(xm, x2) - dd1(x0, xm)) / spread
}

/// Taylor series: Σ_n j^n h_n(a, b) / (n+2)!, with h_n the complete
/// homogeneous polynomial of degree n.
fn series(a: f64, b: f64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut jn = Complex64::new(1.0, 0.0);
    let mut fact = 2.0; // (n+2)!
    for n in 0..8usize {
        let mut h = 0.0;
        for p in 0..=n {
            h += a.powi(p as i32) * b.powi((n - p) as i32);
        }
        sum += jn * (h / fact);
        jn *= Complex64::new(0.0, 1.0);
        fact *= (n + 3) as f64;
    }
    sum
}

/// `∫_T exp(j q·r) dA` over the triangle with vertices `p`, referenced to
/// the global origin. Returns exactly the facet area for `q = 0`.
pub fn facet_phase_integral(p: &[Vector3; 3], q: Vector3) -> Complex64 {
    let e1 = p[1] - p[0];
    let e2 = p[2] - p[0];
    let twice_area = e1.cross(e2).norm();
    let f = simplex_phase_integral(q.dot(e1), q.dot(e2));
    let phase0 = q.dot(p[0]);
    let ref_phase = if phase0 == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::from_polar(1.0, phase0)
    };
    ref_phase * f * twice_area
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> [Vector3; 3] {
        [Vector3::ZERO, Vector3::X, Vector3::Y]
    }

    #[test]
    fn zero_wavevector_gives_area_exactly() {
        let p = [
            Vector3::new(0.3, -1.2, 0.7),
            Vector3::new(2.1, 0.4, -0.3),
            Vector3::new(-0.5, 1.9, 1.1),
        ];
        let area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).norm();
        let v = facet_phase_integral(&p, Vector3::ZERO);
        assert_eq!(v.re, area);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn normal_only_wavevector_is_constant_phase() {
        let p = tri().map(|v| v + Vector3::new(0.0, 0.0, 0.4));
        let q = Vector3::new(0.0, 0.0, 7.3);
        let v = facet_phase_integral(&p, q);
        let expect = Complex64::from_polar(0.5, 7.3 * 0.4);
        assert!((v - expect).norm() < 1e-15);
        assert!((v.norm() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn closed_form_matches_direct_formula_away_from_singularities() {
        // F = -(e^{ja}-e^{jb})/(b(a-b)) + (e^{ja}-1)/(ab)
        let j = Complex64::new(0.0, 1.0);
        for &(a, b) in &[(1.3, -2.1), (5.0, 0.7), (-3.3, -0.4), (10.0, 20.0)] {
            let ea = (j * a).exp();
            let eb = (j * b).exp();
            let direct = -(ea - eb) / (b * (a - b)) + (ea - 1.0) / (a * b);
            assert!((simplex_phase_integral(a, b) - direct).norm() < 1e-13);
        }
    }

    #[test]
    fn continuous_across_series_switchover() {
        for &(a, b) in &[(0.0, 0.0), (1e-4, 0.0), (0.0, -1e-4), (3.0, 3.0), (3.0, 3.0 + 1e-4), (2.0, 0.0)] {
            for da in [-2e-4, -1e-4 * 0.999, 0.0, 0.999e-4, 2e-4] {
                let x = simplex_phase_integral(a + da, b);
                let y = simplex_phase_integral(a + da + 1e-12, b);
                assert!((x - y).norm() < 1e-11, "jump near ({a},{b})");
            }
        }
    }

    #[test]
    fn series_limit_is_half_at_origin() {
        assert_eq!(simplex_phase_integral(0.0, 0.0), Complex64::new(0.5, 0.0));
    }
}
