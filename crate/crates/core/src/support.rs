//! Support functions of the classical set C (coherent-state mixtures) and
//! the quantum set Q in an arbitrary observable space, and the search for
//! separating hyperplanes `n.x > h_C(n)`.

use std::f64::consts::{SQRT_2, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{ln_factorial, observable_matrix, CoherentParams, ExpectationVector, ObservableSpace};
use crate::hull::mu_grid;
use crate::minnorm::{min_norm_point, MinNormOptions, SupportOracle};
use crate::quadrature::{golden_max, golden_min};

/// A direction `n` in observable space.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    space: ObservableSpace,
    components: Vec<f64>,
}

impl Direction {
    pub fn new(space: &ObservableSpace, components: Vec<f64>) -> Result<Self> {
        if components.len() != space.len() {
            return Err(Error::Domain(format!(
                "direction has {} components for a {}-dimensional space",
                components.len(),
                space.len()
            )));
        }
        if components.iter().any(|c| !c.is_finite()) || components.iter().all(|c| *c == 0.0) {
            return Err(Error::Domain("direction must be finite and non-zero".into()));
        }
        Ok(Self { space: space.clone(), components })
    }

    pub fn space(&self) -> &ObservableSpace {
        &self.space
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn norm(&self) -> f64 {
        self.components.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn unit(&self) -> Self {
        let r = self.norm();
        Self { space: self.space.clone(), components: self.components.iter().map(|c| c / r).collect() }
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        self.components.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

/// Where a support function is attained.
#[derive(Debug, Clone, PartialEq)]
pub enum SupportArgmax {
    Coherent(CoherentParams),
    /// The `mu -> infinity` limit: every observable vanishes.
    Infinity,
    /// Top eigenvector of `n.O` in the truncated space.
    Eigenvector(DVector<Complex64>),
    /// All weight outside the observed levels (support value 0).
    Outside,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportResult {
    pub value: f64,
    pub argmax: SupportArgmax,
    /// Expectation vector at the argmax; `n . point == value`.
    pub point: Vec<f64>,
    pub restarts: usize,
    /// False when the maximum may lie beyond `mu_max`; `value` is then a lower bound.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportOptions {
    pub mu_max: f64,
    pub mu_samples: usize,
    /// Angular grid points per unit of the largest coherence order.
    pub phi_samples_per_order: usize,
    pub max_restarts: usize,
}

impl Default for SupportOptions {
    fn default() -> Self {
        Self { mu_max: 50.0, mu_samples: 240, phi_samples_per_order: 24, max_restarts: 8 }
    }
}

impl SupportOptions {
    /// Same optimizer with every grid `factor` times finer.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            mu_samples: self.mu_samples * factor,
            phi_samples_per_order: self.phi_samples_per_order * factor,
            max_restarts: self.max_restarts * 2,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Term {
    /// `(index, ln index!)` of the one or two levels
    a: (f64, f64),
    b: (f64, f64),
    coherence: bool,
    order_slot: usize,
    cx: f64,
    cy: f64,
}

/// Coherent-state model of a space: evaluates `n . O(mu, phi)` quickly.
#[derive(Debug, Clone)]
pub struct ClassicalModel {
    space: ObservableSpace,
    terms: Vec<Term>,
    orders: Vec<usize>,
    opts: SupportOptions,
    mus: Vec<f64>,
}

impl ClassicalModel {
    pub fn new(space: &ObservableSpace, opts: SupportOptions) -> Self {
        let mut orders: Vec<usize> = space.iter().filter_map(|o| o.coherence_order()).collect();
        orders.sort_unstable();
        orders.dedup();
        let terms = space
            .iter()
            .map(|o| {
                let (j, k) = o.levels();
                let (cx, cy) = o.phase_weights();
                let order_slot = o
                    .coherence_order()
                    .and_then(|d| orders.iter().position(|&x| x == d))
                    .unwrap_or(0);
                Term {
                    a: (j as f64, ln_factorial(j)),
                    b: (k as f64, ln_factorial(k)),
                    coherence: o.is_coherence(),
                    order_slot,
                    cx,
                    cy,
                }
            })
            .collect();
        Self { space: space.clone(), terms, orders, opts, mus: mu_grid(opts.mu_samples, opts.mu_max) }
    }

    pub fn space(&self) -> &ObservableSpace {
        &self.space
    }

    pub fn options(&self) -> &SupportOptions {
        &self.opts
    }

    /// `max_phi n.O(mu, phi)` and the maximizing phase.
    fn profile(&self, n: &[f64], mu: f64) -> (f64, f64) {
        let lnmu = if mu > 0.0 { mu.ln() } else { f64::NEG_INFINITY };
        let lnp = |(j, lf): (f64, f64)| {
            if mu == 0.0 {
                if j == 0.0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            } else {
                -mu + j * lnmu - lf
            }
        };
        let mut base = 0.0;
        let mut bc = [(0.0f64, 0.0f64); 16];
        let mut bc_vec;
        let bc: &mut [(f64, f64)] = if self.orders.len() <= 16 {
            &mut bc[..self.orders.len()]
        } else {
            bc_vec = vec![(0.0, 0.0); self.orders.len()];
            &mut bc_vec
        };
        for (t, &ni) in self.terms.iter().zip(n) {
            if ni == 0.0 {
                continue;
            }
            if t.coherence {
                let amp = 2.0 * (0.5 * (lnp(t.a) + lnp(t.b))).exp();
                let slot = &mut bc[t.order_slot];
                slot.0 += ni * amp * t.cx;
                slot.1 += ni * amp * t.cy;
            } else {
                base += ni * lnp(t.a).exp();
            }
        }
        match self.orders.len() {
            0 => (base, 0.0),
            1 => {
                let (b, c) = bc[0];
                let d = self.orders[0] as f64;
                (base + b.hypot(c), (c.atan2(b) / d).rem_euclid(TAU))
            }
            _ => {
                let (v, phi) = self.trig_max(bc);
                (base + v, phi)
            }
        }
    }

    /// Maximum over phi of `sum_d B_d cos(d phi) + C_d sin(d phi)`.
    fn trig_max(&self, bc: &[(f64, f64)]) -> (f64, f64) {
        if bc.iter().all(|(b, c)| *b == 0.0 && *c == 0.0) {
            return (0.0, 0.0);
        }
        let eval = |phi: f64| -> f64 {
            self.orders
                .iter()
                .zip(bc)
                .map(|(&d, &(b, c))| {
                    let a = d as f64 * phi;
                    b * a.cos() + c * a.sin()
                })
                .sum()
        };
        let dmax = *self.orders.last().unwrap_or(&1);
        let m = (self.opts.phi_samples_per_order * dmax).max(16);
        let step = TAU / m as f64;
        let vals: Vec<f64> = (0..m).map(|i| eval(i as f64 * step)).collect();
        let mut cands: Vec<usize> = (0..m)
            .filter(|&i| {
                let prev = vals[(i + m - 1) % m];
                let next = vals[(i + 1) % m];
                vals[i] >= prev && vals[i] >= next
            })
            .collect();
        cands.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
        cands.truncate(self.opts.max_restarts.max(1));
        let mut best = (f64::NEG_INFINITY, 0.0);
        for i in cands {
            let c = i as f64 * step;
            let (phi, v) = golden_max(eval, c - step, c + step, 1e-12);
            if v > best.0 {
                best = (v, phi.rem_euclid(TAU));
            }
        }
        best
    }

    /// Coherent point `O(mu, phi)`.
    pub fn point(&self, mu: f64, phi: f64) -> Vec<f64> {
        let p = CoherentParams { mu, phi: phi.rem_euclid(TAU) };
        crate::fock::coherent_point(&self.space, &p)
    }

    /// `h_C(n)`: supremum of `n.O` over coherent states and the `mu -> inf` limit.
    pub fn support(&self, n: &[f64]) -> SupportResult {
        let vals: Vec<f64> = self.mus.iter().map(|&mu| self.profile(n, mu).0).collect();
        let len = vals.len();
        let mut cands: Vec<usize> = (0..len)
            .filter(|&i| {
                let left = if i > 0 { vals[i - 1] } else { f64::NEG_INFINITY };
                let right = if i + 1 < len { vals[i + 1] } else { f64::NEG_INFINITY };
                vals[i] >= left && vals[i] >= right
            })
            .collect();
        cands.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
        cands.truncate(self.opts.max_restarts.max(1));

        let mut best_val = f64::NEG_INFINITY;
        let mut best_mu = 0.0;
        for &i in &cands {
            let lo = self.mus[i.saturating_sub(1)];
            let hi = self.mus[(i + 1).min(len - 1)];
            let (mu, v) = if hi > lo {
                golden_max(|mu| self.profile(n, mu).0, lo, hi, 1e-13)
            } else {
                (self.mus[i], vals[i])
            };
            // the grid point itself can beat a refinement that wandered off a kink
            let (mu, v) = if vals[i] > v { (self.mus[i], vals[i]) } else { (mu, v) };
            if v > best_val {
                best_val = v;
                best_mu = mu;
            }
        }
        let last = vals[len - 1];
        let converged = !(last > 0.0 && last >= vals[len - 2] && cands.first() == Some(&(len - 1)));

        if best_val <= 0.0 {
            return SupportResult {
                value: 0.0,
                argmax: SupportArgmax::Infinity,
                point: vec![0.0; n.len()],
                restarts: cands.len(),
                converged,
            };
        }
        let phi = self.profile(n, best_mu).1;
        let point = self.point(best_mu, phi);
        let value = point.iter().zip(n).map(|(a, b)| a * b).sum::<f64>().max(best_val);
        SupportResult {
            value,
            argmax: SupportArgmax::Coherent(CoherentParams { mu: best_mu, phi }),
            point,
            restarts: cands.len(),
            converged,
        }
    }
}

impl SupportOracle for ClassicalModel {
    type Tag = SupportArgmax;

    fn support(&self, n: &[f64]) -> (f64, Vec<f64>, SupportArgmax) {
        let r = ClassicalModel::support(self, n);
        (r.value, r.point, r.argmax)
    }
}

/// `n.O` matrices of a space at a fixed truncation.
#[derive(Debug, Clone)]
pub struct QuantumModel {
    mats: Vec<DMatrix<Complex64>>,
    dim: usize,
}

impl QuantumModel {
    pub fn new(space: &ObservableSpace, dim: usize) -> Result<Self> {
        let min = space.max_index() + 2;
        if dim < min {
            return Err(Error::Configuration(format!(
                "truncation {dim} is below the minimum {min} for ({space})"
            )));
        }
        let mats = space.iter().map(|o| observable_matrix(o, dim)).collect::<Result<Vec<_>>>()?;
        Ok(Self { mats, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `h_Q(n) = max(0, lambda_max(n.O))`.
    pub fn support(&self, n: &[f64]) -> SupportResult {
        let mut m = DMatrix::<Complex64>::zeros(self.dim, self.dim);
        for (mat, &ni) in self.mats.iter().zip(n) {
            if ni != 0.0 {
                m += mat * Complex64::new(ni, 0.0);
            }
        }
        let eig = m.symmetric_eigen();
        let (imax, lmax) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty spectrum");
        if lmax <= 0.0 {
            return SupportResult {
                value: 0.0,
                argmax: SupportArgmax::Outside,
                point: vec![0.0; n.len()],
                restarts: 0,
                converged: true,
            };
        }
        let v = eig.eigenvectors.column(imax).into_owned();
        let point: Vec<f64> = self
            .mats
            .iter()
            .map(|mat| (v.adjoint() * mat * &v)[(0, 0)].re)
            .collect();
        SupportResult { value: lmax, argmax: SupportArgmax::Eigenvector(v), point, restarts: 0, converged: true }
    }
}

impl SupportOracle for QuantumModel {
    type Tag = SupportArgmax;

    fn support(&self, n: &[f64]) -> (f64, Vec<f64>, SupportArgmax) {
        let r = QuantumModel::support(self, n);
        (r.value, r.point, r.argmax)
    }
}

/// Classical support function `h_C(n)`.
pub fn support_classical(space: &ObservableSpace, n: &Direction, opts: &SupportOptions) -> Result<SupportResult> {
    if n.space() != space {
        return Err(Error::Domain("direction belongs to a different space".into()));
    }
    Ok(ClassicalModel::new(space, *opts).support(n.components()))
}

/// Quantum support function `h_Q(n)` at truncation `dim`.
pub fn support_quantum(space: &ObservableSpace, n: &Direction, dim: usize) -> Result<SupportResult> {
    if n.space() != space {
        return Err(Error::Domain("direction belongs to a different space".into()));
    }
    Ok(QuantumModel::new(space, dim)?.support(n.components()))
}

/// Separating hyperplane proving that no classical state reproduces the data.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    /// Unit normal `n`.
    pub direction: Direction,
    /// `h_C(n)`, re-evaluated on a finer grid.
    pub h_classical: f64,
    /// `n . x`
    pub witness: f64,
    /// `n . x - h_C(n)`
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMethod {
    /// Minimum-norm point of C via its support mapping; returns the max-margin direction.
    MinNorm,
    /// Exhaustive angular grid on the unit sphere plus local refinement (d <= 3).
    AngularScan,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    pub support: SupportOptions,
    /// Minimum margin of an accepted certificate.
    pub tol_margin: f64,
    /// Minimum distance from Q before data are declared inconsistent.
    pub tol_quantum: f64,
    pub max_iter: usize,
    pub method: SearchMethod,
    /// Truncation for the quantum set; defaults to `max_index + 2`.
    pub quantum_dim: Option<usize>,
    /// Grid refinement factor of the independent re-evaluation of `h_C`.
    pub verify_factor: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            support: SupportOptions::default(),
            tol_margin: 1e-6,
            tol_quantum: 1e-7,
            max_iter: 400,
            method: SearchMethod::MinNorm,
            quantum_dim: None,
            verify_factor: 10,
        }
    }
}

/// Result of a certificate search, including diagnostics when nothing was found.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub certificate: Option<Certificate>,
    /// Best `n.x - h_C(n)` found over unit `n` (negative when classical).
    pub best_margin: f64,
    /// Upper bound on the distance from the data to C.
    pub distance_upper: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Classical mixture reproducing the closest point of C (min-norm route only).
    pub mixture: Vec<(f64, SupportArgmax)>,
}

fn check_data(space: &ObservableSpace, x: &ExpectationVector) -> Result<()> {
    if x.space() != space {
        return Err(Error::Domain(format!("data are given in ({}) but the space is ({space})", x.space())));
    }
    Ok(())
}

/// Distance-like separation of the data from the quantum set; positive values
/// above the tolerance mean no quantum state reproduces them.
pub fn quantum_separation(space: &ObservableSpace, x: &[f64], opts: &CertifyOptions) -> Result<f64> {
    let dim = opts.quantum_dim.unwrap_or_else(|| space.default_dim());
    let q = QuantumModel::new(space, dim)?;
    let mn = MinNormOptions {
        max_iter: opts.max_iter.min(150),
        tol_inside: opts.tol_quantum,
        stop_margin: Some(opts.tol_quantum),
        ..Default::default()
    };
    let r = min_norm_point(&q, x, &mn);
    Ok(r.best_margin)
}

/// Looks for `n` with `n.x > h_C(n)`. Returns `None` when the data are
/// compatible with some classical state; fails with
/// [`Error::InconsistentData`] when they fit no quantum state at all.
pub fn certify_nonclassical(
    space: &ObservableSpace,
    x: &ExpectationVector,
    opts: &CertifyOptions,
) -> Result<Option<Certificate>> {
    check_data(space, x)?;
    let sep = quantum_separation(space, x.values(), opts)?;
    if sep > opts.tol_quantum {
        return Err(Error::InconsistentData { distance: sep });
    }
    Ok(search_certificate(space, x.values(), opts)?.certificate)
}

/// Certificate search without the quantum-consistency check.
pub fn search_certificate(space: &ObservableSpace, x: &[f64], opts: &CertifyOptions) -> Result<SearchOutcome> {
    if x.len() != space.len() {
        return Err(Error::Domain("data length does not match the space".into()));
    }
    let model = ClassicalModel::new(space, opts.support);
    let (mut outcome, candidate) = match opts.method {
        SearchMethod::MinNorm => {
            let mn = MinNormOptions {
                max_iter: opts.max_iter,
                tol_inside: opts.tol_margin,
                stop_margin: None,
                ..Default::default()
            };
            let r = min_norm_point(&model, x, &mn);
            let outcome = SearchOutcome {
                certificate: None,
                best_margin: r.best_margin,
                distance_upper: r.distance,
                iterations: r.iterations,
                converged: r.converged,
                mixture: r.atoms.into_iter().map(|(w, _, t)| (w, t)).collect(),
            };
            (outcome, r.best_direction)
        }
        SearchMethod::AngularScan => angular_scan(&model, x)?,
    };
    if outcome.best_margin > 0.0 {
        outcome.certificate = verify_certificate(space, &candidate, x, opts);
    }
    Ok(outcome)
}

/// Independent re-evaluation of `h_C` at `dir` on a finer grid.
fn verify_certificate(space: &ObservableSpace, dir: &[f64], x: &[f64], opts: &CertifyOptions) -> Option<Certificate> {
    let direction = Direction::new(space, dir.to_vec()).ok()?.unit();
    let fine = ClassicalModel::new(space, opts.support.refined(opts.verify_factor.max(1)));
    let coarse = ClassicalModel::new(space, opts.support);
    let h = fine.support(direction.components()).value.max(coarse.support(direction.components()).value);
    let witness = direction.dot(x);
    let margin = witness - h;
    (margin > opts.tol_margin).then_some(Certificate { direction, h_classical: h, witness, margin })
}

fn unit_from_angles(angles: &[f64]) -> Vec<f64> {
    match angles.len() {
        0 => vec![1.0],
        1 => vec![angles[0].cos(), angles[0].sin()],
        _ => {
            let (th, ph) = (angles[0], angles[1]);
            vec![th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]
        }
    }
}

const SCAN_POINTS_PER_ANGLE: usize = 64;

/// Minimizes `h_C(n) - n.x` over a spherical-angle grid, then refines.
fn angular_scan(model: &ClassicalModel, x: &[f64]) -> Result<(SearchOutcome, Vec<f64>)> {
    let d = x.len();
    let g = |n: &[f64]| model.support(n).value - n.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    let (best_n, best_g) = match d {
        1 => [vec![1.0], vec![-1.0]]
            .into_iter()
            .map(|n| {
                let v = g(&n);
                (n, v)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("two candidates"),
        2 => {
            let m = SCAN_POINTS_PER_ANGLE;
            let step = TAU / m as f64;
            let (i, _) = (0..m)
                .map(|i| (i, g(&unit_from_angles(&[i as f64 * step]))))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("non-empty grid");
            let c = i as f64 * step;
            let (th, v) = golden_min(|t| g(&unit_from_angles(&[t])), c - step, c + step, 1e-12);
            (unit_from_angles(&[th]), v)
        }
        3 => {
            let m = SCAN_POINTS_PER_ANGLE;
            let (dt, dp) = (std::f64::consts::PI / (m - 1) as f64, TAU / m as f64);
            let mut best = (0.0, 0.0, f64::INFINITY);
            for i in 0..m {
                for k in 0..m {
                    let (th, ph) = (i as f64 * dt, k as f64 * dp);
                    let v = g(&unit_from_angles(&[th, ph]));
                    if v < best.2 {
                        best = (th, ph, v);
                    }
                }
            }
            let (mut th, mut ph, mut v) = best;
            let (mut wt, mut wp) = (dt, dp);
            for _ in 0..12 {
                let (t, vt) = golden_min(|t| g(&unit_from_angles(&[t, ph])), th - wt, th + wt, 1e-12);
                if vt < v {
                    th = t;
                    v = vt;
                }
                let (p, vp) = golden_min(|p| g(&unit_from_angles(&[th, p])), ph - wp, ph + wp, 1e-12);
                if vp < v {
                    ph = p;
                    v = vp;
                }
                wt *= 0.5;
                wp *= 0.5;
            }
            (unit_from_angles(&[th, ph]), v)
        }
        _ => {
            return Err(Error::UnsupportedSpace(format!(
                "angular scan supports at most 3 observables, got {d}"
            )))
        }
    };
    let out = SearchOutcome {
        certificate: None,
        best_margin: -best_g,
        distance_upper: f64::INFINITY,
        iterations: 0,
        converged: true,
        mixture: Vec::new(),
    };
    Ok((out, best_n))
}

/// Classical envelope of one coordinate of a 2-D space at a fixed value of
/// the other: `min_a [h_C(a e_fixed + e_free) - a value]`.
pub fn legendre_profile(
    space: &ObservableSpace,
    fixed_axis: usize,
    value: f64,
    opts: &SupportOptions,
) -> Result<f64> {
    if space.len() != 2 || fixed_axis > 1 {
        return Err(Error::Domain("legendre_profile needs a 2-observable space and axis 0 or 1".into()));
    }
    let model = ClassicalModel::new(space, *opts);
    let f = |a: f64| {
        let mut n = [0.0; 2];
        n[fixed_axis] = a;
        n[1 - fixed_axis] = 1.0;
        model.support(&n).value - a * value
    };
    // expand a bracket around the minimum of the convex function
    let (mut lo, mut hi) = (-1.0, 1.0);
    let f0 = f(0.0);
    let limit = 1e4;
    while f(hi) < f0.min(f(hi * 0.5)) && hi < limit {
        hi *= 2.0;
    }
    while f(lo) < f0.min(f(lo * 0.5)) && lo > -limit {
        lo *= 2.0;
    }
    if hi >= limit || lo <= -limit {
        return Err(Error::Diverged(format!(
            "no finite minimizer for the profile at {value} (bracket reached |a| = {limit})"
        )));
    }
    let (_, v) = golden_min(f, lo, hi, 1e-12);
    Ok(v)
}

/// Margins `n(b).x - h_C(n(b))` along the pencil `n(b) = base + b e_axis`.
#[derive(Debug, Clone, PartialEq)]
pub struct PencilResult {
    pub best_param: f64,
    pub best_margin: f64,
    /// Maximal parameter intervals with positive margin.
    pub certifying: Vec<(f64, f64)>,
}

pub fn pencil_scan(
    space: &ObservableSpace,
    x: &[f64],
    base: &[f64],
    axis: usize,
    range: (f64, f64),
    samples: usize,
    opts: &SupportOptions,
) -> Result<PencilResult> {
    if base.len() != space.len() || x.len() != space.len() || axis >= space.len() {
        return Err(Error::Domain("pencil dimensions do not match the space".into()));
    }
    if samples < 2 || !(range.1 > range.0) {
        return Err(Error::Configuration("pencil needs an increasing range and >= 2 samples".into()));
    }
    let model = ClassicalModel::new(space, *opts);
    let margin = |b: f64| {
        let mut n = base.to_vec();
        n[axis] += b;
        let nx: f64 = n.iter().zip(x).map(|(a, c)| a * c).sum();
        nx - model.support(&n).value
    };
    let bs: Vec<f64> = (0..samples)
        .map(|i| range.0 + (range.1 - range.0) * i as f64 / (samples - 1) as f64)
        .collect();
    let ms: Vec<f64> = bs.iter().map(|&b| margin(b)).collect();
    let (imax, _) = ms
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty pencil");
    let step = bs[1] - bs[0];
    let (best_param, best_margin) = golden_max(
        margin,
        (bs[imax] - step).max(range.0),
        (bs[imax] + step).min(range.1),
        1e-12,
    );
    let crossing = |a: f64, b: f64| {
        // margin(a) and margin(b) have opposite signs
        let (mut lo, mut hi) = (a, b);
        let pos_lo = margin(lo) > 0.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if (margin(mid) > 0.0) == pos_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let mut certifying = Vec::new();
    let mut start: Option<f64> = if ms[0] > 0.0 { Some(bs[0]) } else { None };
    for i in 1..samples {
        match (ms[i - 1] > 0.0, ms[i] > 0.0) {
            (false, true) => start = Some(crossing(bs[i - 1], bs[i])),
            (true, false) => {
                if let Some(s) = start.take() {
                    certifying.push((s, crossing(bs[i - 1], bs[i])));
                }
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        certifying.push((s, bs[samples - 1]));
    }
    Ok(PencilResult { best_param, best_margin, certifying })
}

/// Closed form of `h_C` in `(X02, P0, P2)` along `n = (1/2, b, 1)`:
/// `sup_mu e^{-mu} (mu^2 + sqrt2 mu + 2b) / 2`, with the interior stationary
/// point `mu_+(b) = (2 - sqrt2)/2 + sqrt(6 - 8b)/2` competing against the
/// vacuum (`b`) and the `mu -> inf` limit (0).
pub fn x02_pencil_support(b: f64) -> f64 {
    let mut best = b.max(0.0);
    if b <= 0.75 {
        let mu = (2.0 - SQRT_2) / 2.0 + (6.0 - 8.0 * b).sqrt() / 2.0;
        best = best.max(0.5 * (-mu).exp() * (mu * mu + SQRT_2 * mu + 2.0 * b));
    }
    best
}

/// Value of `b` where the interior branch of [`x02_pencil_support`] hands over
/// to the vacuum branch.
pub fn x02_pencil_transition() -> f64 {
    let interior = |b: f64| {
        let mu = (2.0 - SQRT_2) / 2.0 + (6.0 - 8.0 * b).sqrt() / 2.0;
        0.5 * (-mu).exp() * (mu * mu + SQRT_2 * mu + 2.0 * b) - b
    };
    let (mut lo, mut hi) = (0.5, 0.75);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if interior(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn space(s: &str) -> ObservableSpace {
        s.parse().unwrap()
    }

    fn h(s: &ObservableSpace, n: &[f64]) -> f64 {
        support_classical(s, &Direction::new(s, n.to_vec()).unwrap(), &SupportOptions::default())
            .unwrap()
            .value
    }

    #[test]
    fn toy_example_support() {
        let s = space("P0,P1");
        for a in [-2.0, -1.0, 0.0, 0.5, 1.0] {
            assert_abs_diff_eq!(h(&s, &[a, 1.0]), (a - 1.0f64).exp(), epsilon = 1e-9);
        }
        // beyond a = 1 the stationary point mu = 1 - a is infeasible and the vacuum wins
        for a in [1.5, 2.0, 3.0] {
            assert_abs_diff_eq!(h(&s, &[a, 1.0]), a, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_coherence_support() {
        let s = space("X01");
        assert_abs_diff_eq!(h(&s, &[1.0]), SQRT_2 * (-0.5f64).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(h(&s, &[-1.0]), SQRT_2 * (-0.5f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn argmax_reproduces_value() {
        let s = space("P0,X01,X02");
        let n = [0.3, -0.7, 0.5];
        let r = support_classical(&s, &Direction::new(&s, n.to_vec()).unwrap(), &SupportOptions::default())
            .unwrap();
        let dot: f64 = r.point.iter().zip(&n).map(|(a, b)| a * b).sum();
        assert_abs_diff_eq!(dot, r.value, epsilon = 1e-8);
        assert!(r.converged);
    }

    #[test]
    fn quantum_support_examples() {
        let s = space("X01");
        let r = support_quantum(&s, &Direction::new(&s, vec![1.0]).unwrap(), 3).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-12);
        let s = space("P0");
        let r = support_quantum(&s, &Direction::new(&s, vec![-1.0]).unwrap(), 2).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(support_quantum(&s, &Direction::new(&s, vec![-1.0]).unwrap(), 1).is_err());
    }

    #[test]
    fn pencil_closed_form_transition() {
        let b = x02_pencil_transition();
        assert!((b - 0.738).abs() < 2e-3, "{b}");
        let s = space("X02,P0,P2");
        for &b in &[0.3, 0.6, 0.7, 0.738, 0.75, 0.8, 0.9] {
            assert_abs_diff_eq!(h(&s, &[0.5, b, 1.0]), x02_pencil_support(b), epsilon = 1e-9);
        }
    }

    #[test]
    fn legendre_profile_p0p1() {
        let s = space("P0,P1");
        let e1 = (-1.0f64).exp();
        let v = legendre_profile(&s, 0, e1, &SupportOptions::default()).unwrap();
        assert_abs_diff_eq!(v, e1, epsilon = 1e-9);
        let v = legendre_profile(&s, 0, 1.0, &SupportOptions::default()).unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn legendre_profile_p0x01_matches_bound() {
        let s = space("P0,X01");
        let v = legendre_profile(&s, 0, 0.2, &SupportOptions::default()).unwrap();
        let b = crate::hull::classical_x01_bound_given_p0(0.2).unwrap();
        assert_abs_diff_eq!(v, b, epsilon = 1e-8);
    }

    #[test]
    fn legendre_profile_edges() {
        let s = space("P0,P1");
        let v = legendre_profile(&s, 0, 0.0, &SupportOptions::default()).unwrap();
        assert!(v.abs() < 1e-9);
        assert!(matches!(
            legendre_profile(&s, 0, 1.5, &SupportOptions::default()),
            Err(Error::Diverged(_))
        ));
    }

    #[test]
    fn certificate_examples() {
        let opts = CertifyOptions::default();
        let s = space("P0,X01");
        let x = ExpectationVector::new(s.clone(), vec![0.2, 0.6]).unwrap();
        let c = certify_nonclassical(&s, &x, &opts).unwrap().expect("certificate");
        assert!(c.margin > 1e-6);
        assert_abs_diff_eq!(c.direction.norm(), 1.0, epsilon = 1e-12);

        let s = space("X01");
        let x = ExpectationVector::new(s.clone(), vec![0.5]).unwrap();
        assert!(certify_nonclassical(&s, &x, &opts).unwrap().is_none());

        let s = space("P0,P1");
        let x = ExpectationVector::new(s.clone(), vec![0.6, 0.6]).unwrap();
        assert!(matches!(certify_nonclassical(&s, &x, &opts), Err(Error::InconsistentData { .. })));
    }

    #[test]
    fn enhanced_power_certificate() {
        let s = space("P0,P2,X02");
        let x = ExpectationVector::new(s.clone(), vec![0.6, 0.1, 2.0 * 0.06f64.sqrt()]).unwrap();
        let c = certify_nonclassical(&s, &x, &CertifyOptions::default()).unwrap();
        assert!(c.is_some());
        let p = pencil_scan(&s, x.values(), &[0.0, 1.0, 0.5], 0, (0.3, 1.0), 141, &SupportOptions::default())
            .unwrap();
        assert!(p.best_param >= 0.6 && p.best_param <= 0.8, "{p:?}");
        assert_eq!(p.certifying.len(), 1);
        assert!(p.certifying[0].0 < 0.6 && p.certifying[0].1 > 0.8);
    }

    #[test]
    fn angular_scan_agrees_with_min_norm() {
        let opts_scan = CertifyOptions { method: SearchMethod::AngularScan, ..Default::default() };
        let opts_mn = CertifyOptions::default();
        for (sp, vals) in [("P0,X01", vec![0.2, 0.6]), ("P1,X01", vec![0.35, 0.84]), ("X01", vec![0.9])] {
            let s = space(sp);
            let a = search_certificate(&s, &vals, &opts_scan).unwrap();
            let b = search_certificate(&s, &vals, &opts_mn).unwrap();
            assert!(a.certificate.is_some() && b.certificate.is_some(), "{sp}");
            assert_abs_diff_eq!(a.best_margin, b.best_margin, epsilon = 1e-6);
        }
    }
}
