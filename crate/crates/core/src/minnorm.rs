//! Wolfe's minimum-norm-point algorithm over a convex body given only through
//! its support mapping. Used both for the classical set (certificate search)
//! and the quantum set (consistency of measured data).

use nalgebra::{DMatrix, DVector};

pub(crate) trait SupportOracle {
    type Tag: Clone;

    /// `(h(n), point, tag)` where `point` maximizes `n . p` over the body.
    fn support(&self, n: &[f64]) -> (f64, Vec<f64>, Self::Tag);
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct MinNormOptions {
    pub max_iter: usize,
    /// Stop as soon as the closest point is this close to the target.
    pub tol_inside: f64,
    /// Stop once a direction separates with at least this margin.
    pub stop_margin: Option<f64>,
    /// Absolute part of the duality-gap tolerance.
    pub tol_gap: f64,
    /// Relative part of the duality-gap tolerance.
    pub rel_gap: f64,
}

impl Default for MinNormOptions {
    fn default() -> Self {
        Self { max_iter: 400, tol_inside: 1e-9, stop_margin: None, tol_gap: 1e-10, rel_gap: 1e-6 }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct MinNormResult<T> {
    /// `|x - closest|`, an upper bound on the distance from `x` to the body.
    pub distance: f64,
    /// Largest `n.x - h(n)` seen over unit `n`; a lower bound on the distance.
    pub best_margin: f64,
    pub best_direction: Vec<f64>,
    /// Convex decomposition of `closest`.
    pub atoms: Vec<(f64, Vec<f64>, T)>,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Affine minimum-norm combination of `pts - x`: weights summing to one.
fn affine_min_norm(pts: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let m = pts.len();
    if m == 1 {
        return vec![1.0];
    }
    let q: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().zip(x).map(|(a, b)| a - b).collect()).collect();
    let mut kkt = DMatrix::<f64>::zeros(m + 1, m + 1);
    for i in 0..m {
        for j in 0..=i {
            let g = dot(&q[i], &q[j]);
            kkt[(i, j)] = g;
            kkt[(j, i)] = g;
        }
        kkt[(i, m)] = 1.0;
        kkt[(m, i)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(m + 1);
    rhs[m] = 1.0;
    let svd = kkt.svd(true, true);
    let smax = svd.singular_values.max();
    let sol = svd
        .solve(&rhs, smax * 1e-13)
        .unwrap_or_else(|_| DVector::from_element(m + 1, 1.0 / m as f64));
    let mut w: Vec<f64> = sol.iter().take(m).copied().collect();
    let s: f64 = w.iter().sum();
    if s.abs() > 1e-300 {
        w.iter_mut().for_each(|v| *v /= s);
    }
    w
}

/// Closest point of the body to `x`, with separation bounds.
pub(crate) fn min_norm_point<O: SupportOracle>(
    oracle: &O,
    x: &[f64],
    opts: &MinNormOptions,
) -> MinNormResult<O::Tag> {
    let d = x.len();
    let init_dir: Vec<f64> = if norm(x) > 0.0 {
        x.to_vec()
    } else {
        (0..d).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect()
    };
    let (h0, s0, t0) = oracle.support(&init_dir);
    let mut pts = vec![s0.clone()];
    let mut tags = vec![t0];
    let mut w = vec![1.0];
    let mut y = s0;

    let n0 = norm(&init_dir);
    let mut best_margin = (dot(&init_dir, x) - h0) / n0;
    let mut best_direction: Vec<f64> = init_dir.iter().map(|v| v / n0).collect();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let v: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        let dist = norm(&v);
        if dist <= opts.tol_inside {
            converged = true;
            break;
        }
        let n: Vec<f64> = v.iter().map(|c| c / dist).collect();
        let (h, s, tag) = oracle.support(&n);
        let margin = dot(&n, x) - h;
        if margin > best_margin {
            best_margin = margin;
            best_direction = n.clone();
        }
        if let Some(stop) = opts.stop_margin {
            if best_margin > stop {
                break;
            }
        }
        // dist - margin = h(n) - n.y >= 0
        let gap = dist - margin;
        if gap <= opts.tol_gap + opts.rel_gap * dist {
            converged = true;
            break;
        }
        if pts.iter().any(|p| p.iter().zip(&s).all(|(a, b)| (a - b).abs() < 1e-15)) {
            converged = true;
            break;
        }
        pts.push(s);
        tags.push(tag);
        w.push(0.0);

        // minor cycle
        loop {
            let alpha = affine_min_norm(&pts, x);
            let tiny = 1e-14;
            if alpha.iter().all(|&a| a > tiny) {
                w = alpha;
                break;
            }
            let mut theta = 1.0f64;
            for (wi, ai) in w.iter().zip(&alpha) {
                if *ai <= tiny && wi - ai > 0.0 {
                    theta = theta.min(wi / (wi - ai));
                }
            }
            for (wi, ai) in w.iter_mut().zip(&alpha) {
                *wi = (1.0 - theta) * *wi + theta * ai;
            }
            // drop at least the most negative weight
            let mut drop_idx: Vec<usize> = (0..w.len()).filter(|&i| w[i] <= tiny).collect();
            if drop_idx.is_empty() {
                let (imin, _) = w
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .expect("non-empty active set");
                drop_idx.push(imin);
            }
            for &i in drop_idx.iter().rev() {
                pts.remove(i);
                tags.remove(i);
                w.remove(i);
            }
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= s);
            if pts.len() <= 1 {
                w = vec![1.0; pts.len()];
                break;
            }
        }
        y = vec![0.0; d];
        for (wi, p) in w.iter().zip(&pts) {
            for (yc, pc) in y.iter_mut().zip(p) {
                *yc += wi * pc;
            }
        }
    }

    let distance = norm(&x.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<_>>());
    let atoms = w.into_iter().zip(pts).zip(tags).map(|((w, p), t)| (w, p, t)).collect();
    MinNormResult {
        distance,
        best_margin,
        best_direction,
        atoms,
        iterations,
        converged,
    }
}
