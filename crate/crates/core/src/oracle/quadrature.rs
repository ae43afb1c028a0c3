//! Brute-force reference for `∫ exp(j q·r) dA` over a flat triangle.
//!
//! The triangle is mapped to the unit square with the Duffy collapse
//! `s = u(1 - v)`, `t = u v`, split into panels sized to the phase
//! variation, and integrated with tensor Gauss-Legendre rules. Panels are
//! refined until a 16-point and a 24-point rule agree.

use num_complex::Complex64;

use crate::geometry::Vector3;

/// Nodes and weights of the n-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for k in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

struct Rule {
    x: Vec<f64>,
    w: Vec<f64>,
}

impl Rule {
    fn new(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        Rule { x, w }
    }
}

fn integrate(rule: &Rule, a: f64, b: f64, m: usize) -> Complex64 {
    let h = 1.0 / m as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for pu in 0..m {
        for pv in 0..m {
            let mut panel = Complex64::new(0.0, 0.0);
            for (xu, wu) in rule.x.iter().zip(&rule.w) {
                let u = h * (pu as f64 + 0.5 * (xu + 1.0));
                for (xv, wv) in rule.x.iter().zip(&rule.w) {
                    let v = h * (pv as f64 + 0.5 * (xv + 1.0));
                    let phase = u * ((1.0 - v) * a + v * b);
                    panel += Complex64::from_polar(wu * wv * u, phase);
                }
            }
            total += panel;
        }
    }
    total * (0.25 * h * h)
}

/// Reference value of the facet phase integral.
pub fn triangle_phase_quadrature(vertices: &[Vector3; 3], q: Vector3) -> Complex64 {
    let e1 = vertices[1] - vertices[0];
    let e2 = vertices[2] - vertices[0];
    let area2 = e1.cross(e2).norm();
    let a = q.dot(e1);
    let b = q.dot(e2);
    let span = a.abs().max(b.abs()).max((a - b).abs());
    let mut m = ((span / 8.0).ceil() as usize).max(1);
    let (lo, hi) = (Rule::new(16), Rule::new(24));
    let mut best = integrate(&hi, a, b, m);
    for _ in 0..6 {
        let check = integrate(&lo, a, b, m);
        if (check - best).norm() <= 1e-14 {
            break;
        }
        m *= 2;
        best = integrate(&hi, a, b, m);
    }
    best * area2 * Complex64::from_polar(1.0, q.dot(vertices[0]))
}
