//! Gauss-Laguerre rules and one-dimensional optimizers.

use nalgebra::DMatrix;

/// Nodes and weights for `int_0^inf e^{-x} f(x) dx` (Golub-Welsch).
pub fn gauss_laguerre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "quadrature order must be positive");
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        jac[(i, i)] = (2 * i + 1) as f64;
        if i + 1 < n {
            let b = (i + 1) as f64;
            jac[(i, i + 1)] = b;
            jac[(i + 1, i)] = b;
        }
    }
    let eig = jac.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section maximization of a unimodal function on `[a, b]`.
pub(crate) fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iter = 0;
    while (b - a).abs() > tol * (1.0 + c.abs()) && iter < 200 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iter += 1;
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Golden-section minimization.
pub(crate) fn golden_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (x, v) = golden_max(|t| -f(t), a, b, tol);
    (x, -v)
}
