//! Gauss–Legendre rules and a product rule over the unit sphere.

use std::f64::consts::PI;

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
///
/// Roots are found by Newton iteration on P_n from the Chebyshev-like
/// initial guess; each root converges to machine precision in a few steps.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// ∫ f(n) d²n over the unit sphere using `order` Gauss–Legendre points in
/// cos θ and a `2·order`-point trapezoid rule in φ.
pub fn sphere_integral<F>(order: usize, mut f: F) -> f64
where
    F: FnMut([f64; 3]) -> f64,
{
    let (us, ws) = gauss_legendre(order);
    let n_phi = 2 * order;
    let dphi = 2.0 * PI / n_phi as f64;
    let mut total = 0.0;
    for (u, w) in us.iter().zip(&ws) {
        let s = (1.0 - u * u).max(0.0).sqrt();
        let mut ring = 0.0;
        for j in 0..n_phi {
            let phi = j as f64 * dphi;
            ring += f([s * phi.cos(), s * phi.sin(), *u]);
        }
        total += w * ring * dphi;
    }
    total
}
