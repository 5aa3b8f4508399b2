//! Closed-form boundaries of the classical set C and the quantum set Q in
//! low-dimensional observable spaces, plus a tabulated envelope for pairs of
//! photon-number probabilities.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{ln_factorial, ln_poisson, ObservableId, ObservableSpace};

/// Absolute tolerance of every boundary comparison. Points within it count as
/// classical-compatible / quantum-consistent.
pub const BOUNDARY_EPS: f64 = 1e-9;

/// Lower end of the geometric mean-photon-number grid used to sample coherent curves.
pub const MU_GRID_MIN: f64 = 1e-4;
/// Upper end of the mean-photon-number grid.
pub const MU_GRID_MAX: f64 = 50.0;

/// `0` followed by `n` geometric points on `[MU_GRID_MIN, mu_max]`.
pub fn mu_grid(n: usize, mu_max: f64) -> Vec<f64> {
    let n = n.max(2);
    let (a, b) = (MU_GRID_MIN.ln(), mu_max.ln());
    std::iter::once(0.0)
        .chain((0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetKind {
    Classical,
    Quantum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    ClosedForm,
    Implicit,
    SampledCurve,
}

/// Describes which boundary of C or Q is known for a space, and how.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySpec {
    pub space: ObservableSpace,
    pub kind: SetKind,
    pub representation: Representation,
    pub formula: &'static str,
}

impl fmt::Display for BoundarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} boundary in ({}): {}", self.kind, self.space, self.formula)
    }
}

/// Recognized classical-boundary shapes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum ClassicalShape {
    /// `|R_jk| <= b_jk`
    SingleCoherence { j: usize, k: usize },
    /// `X_jk^2 + Y_jk^2 <= b_jk^2`
    Disk { j: usize, k: usize },
    /// `|X_01| <= 2 P0 sqrt(-ln P0)` (also any `R_01`)
    P0Coherence01 { p_idx: usize, c_idx: usize },
    /// `|X_02| <= sqrt2 P0 ln(1/P0)` (also any `R_02`)
    P0Coherence02 { p_idx: usize, c_idx: usize },
    /// `P1 <= P0 ln(1/P0)`
    P0P1 { p0_idx: usize, p1_idx: usize },
    /// `P_j <= e^{-j} j^j / j!`
    SingleProjector { j: usize },
}

pub(crate) fn classical_shape(space: &ObservableSpace) -> Option<ClassicalShape> {
    use ObservableId::*;
    let obs = space.observables();
    match obs {
        [Projector(j)] => Some(ClassicalShape::SingleProjector { j: *j }),
        [o] if o.is_coherence() => {
            let (j, k) = o.levels();
            Some(ClassicalShape::SingleCoherence { j, k })
        }
        [a, b] => {
            if let (CoherX(j, k), CoherY(j2, k2)) | (CoherY(j2, k2), CoherX(j, k)) = (a, b) {
                if (j, k) == (j2, k2) {
                    return Some(ClassicalShape::Disk { j: *j, k: *k });
                }
            }
            let (p_idx, c_idx) = match (a, b) {
                (Projector(0), c) if c.is_coherence() => (0, 1),
                (c, Projector(0)) if c.is_coherence() => (1, 0),
                (Projector(0), Projector(1)) => {
                    return Some(ClassicalShape::P0P1 { p0_idx: 0, p1_idx: 1 })
                }
                (Projector(1), Projector(0)) => {
                    return Some(ClassicalShape::P0P1 { p0_idx: 1, p1_idx: 0 })
                }
                _ => return None,
            };
            match obs[c_idx].levels() {
                (0, 1) => Some(ClassicalShape::P0Coherence01 { p_idx, c_idx }),
                (0, 2) => Some(ClassicalShape::P0Coherence02 { p_idx, c_idx }),
                _ => None,
            }
        }
        _ => None,
    }
}

impl ClassicalShape {
    /// Signed slack `bound - value`; non-negative means inside the closed classical set.
    pub(crate) fn slack(&self, x: &[f64]) -> f64 {
        match *self {
            ClassicalShape::SingleCoherence { j, k } => {
                classical_coherence_bound(j, k).unwrap_or(0.0) - x[0].abs()
            }
            ClassicalShape::Disk { j, k } => {
                classical_coherence_bound(j, k).unwrap_or(0.0) - x[0].hypot(x[1])
            }
            ClassicalShape::P0Coherence01 { p_idx, c_idx } => {
                let p0 = x[p_idx];
                if !(0.0..=1.0).contains(&p0) {
                    return -f64::INFINITY;
                }
                x01_bound_unchecked(p0) - x[c_idx].abs()
            }
            ClassicalShape::P0Coherence02 { p_idx, c_idx } => {
                let p0 = x[p_idx];
                if !(0.0..=1.0).contains(&p0) {
                    return -f64::INFINITY;
                }
                std::f64::consts::SQRT_2 * xlogx_neg(p0) - x[c_idx].abs()
            }
            ClassicalShape::P0P1 { p0_idx, p1_idx } => {
                let (p0, p1) = (x[p0_idx], x[p1_idx]);
                if !(0.0..=1.0).contains(&p0) {
                    return -f64::INFINITY;
                }
                (xlogx_neg(p0) - p1).min(p1)
            }
            ClassicalShape::SingleProjector { j } => {
                let max = if j == 0 { 1.0 } else { ln_poisson(j, j as f64).exp() };
                (max - x[0]).min(x[0])
            }
        }
    }

    pub(crate) fn name(&self) -> &'static str {
        match self {
            ClassicalShape::SingleCoherence { .. } => "single-coherence bound",
            ClassicalShape::Disk { .. } => "coherence disk bound",
            ClassicalShape::P0Coherence01 { .. } => "|X01| <= 2 P0 sqrt(-ln P0)",
            ClassicalShape::P0Coherence02 { .. } => "|X02| <= sqrt2 P0 ln(1/P0)",
            ClassicalShape::P0P1 { .. } => "P1 <= P0 ln(1/P0)",
            ClassicalShape::SingleProjector { .. } => "Poisson maximum of P_j",
        }
    }
}

/// `p ln(1/p)` with the `p -> 0` limit.
fn xlogx_neg(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.ln()
    }
}

fn x01_bound_unchecked(p0: f64) -> f64 {
    if p0 <= 0.0 || p0 >= 1.0 {
        0.0
    } else {
        2.0 * p0 * (-p0.ln()).sqrt()
    }
}

/// Catalogue of known boundaries for a space (used by the CLI `bound` command).
pub fn known_boundaries(space: &ObservableSpace) -> Vec<BoundarySpec> {
    let mut out = Vec::new();
    let mk = |kind, representation, formula| BoundarySpec {
        space: space.clone(),
        kind,
        representation,
        formula,
    };
    if let Some(shape) = classical_shape(space) {
        out.push(mk(SetKind::Classical, Representation::ClosedForm, shape.name()));
    }
    match space.observables() {
        [ObservableId::Projector(a), ObservableId::Projector(b)] if a != b => {
            out.push(mk(
                SetKind::Classical,
                Representation::SampledCurve,
                "hull of the coherent curve (P_i(mu), P_j(mu))",
            ));
            if (*a, *b) == (1, 2) || (*a, *b) == (2, 1) {
                out.push(mk(
                    SetKind::Classical,
                    Representation::Implicit,
                    "coherent curve: (2 P2 / P1^2) exp(-2 P2 / P1) = 1",
                ));
            }
        }
        [o] if o.is_coherence() => {
            out.push(mk(SetKind::Quantum, Representation::ClosedForm, "|R_jk| <= 1"))
        }
        [ObservableId::Projector(_), c] | [c, ObservableId::Projector(_)] if c.is_coherence() => {
            out.push(mk(
                SetKind::Quantum,
                Representation::ClosedForm,
                "|R_jk| <= 2 sqrt(P_j (1 - P_j))",
            ))
        }
        _ => {}
    }
    out
}

/// Classical maximum of `|R_jk(theta)|`, attained by the coherent state with `mu = (j+k)/2`.
pub fn classical_coherence_bound(j: usize, k: usize) -> Result<f64> {
    if j == k {
        return Err(Error::Domain(format!("coherence bound needs j != k (got {j})")));
    }
    let s = 0.5 * (j + k) as f64;
    let ln = std::f64::consts::LN_2 - s + s * s.ln() - 0.5 * (ln_factorial(j) + ln_factorial(k));
    Ok(ln.exp())
}

/// Quantum maximum of `|R_jk(theta)|`, reached by `(|j> + e^{i theta}|k>)/sqrt2`.
pub fn quantum_coherence_bound(_j: usize, _k: usize) -> f64 {
    1.0
}

/// Quantum bound on `|R_jk|` once `P_j` is known: `2 sqrt(P_j (1 - P_j))`.
pub fn quantum_r_bound_given_pj(pj: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&pj) {
        return Err(Error::Domain(format!("P_j = {pj} is not a probability")));
    }
    Ok(2.0 * (pj * (1.0 - pj)).sqrt())
}

/// Classical bound `2 P0 sqrt(-ln P0)` on `|X_01|`.
pub fn classical_x01_bound_given_p0(p0: f64) -> Result<f64> {
    if !(p0 > 0.0 && p0 <= 1.0) {
        return Err(Error::Domain(format!("P0 must lie in (0, 1] (got {p0})")));
    }
    Ok(x01_bound_unchecked(p0))
}

/// Whether `(P_i, P_j, X_ij, Y_ij)` fit in a valid quantum state:
/// `P_i, P_j >= 0`, `P_i + P_j <= 1`, `X^2 + Y^2 <= 4 P_i P_j`.
pub fn psd_2x2(pi: f64, pj: f64, x: f64, y: f64) -> bool {
    let e = BOUNDARY_EPS;
    pi >= -e && pj >= -e && pi + pj <= 1.0 + e && x * x + y * y <= 4.0 * pi * pj + e
}

/// Whether the Hermitian matrix with diagonal `(p0, p1, p2)` and upper
/// off-diagonal entries `c01, c02, c12` is positive semidefinite (and has
/// trace at most one). Decided on every principal minor of the assembled matrix.
pub fn psd_3x3(p0: f64, p1: f64, p2: f64, c01: Complex64, c02: Complex64, c12: Complex64) -> bool {
    let e = BOUNDARY_EPS;
    if p0 < -e || p1 < -e || p2 < -e || p0 + p1 + p2 > 1.0 + e {
        return false;
    }
    if p0 * p1 - c01.norm_sqr() < -e || p0 * p2 - c02.norm_sqr() < -e || p1 * p2 - c12.norm_sqr() < -e
    {
        return false;
    }
    let det = p0 * p1 * p2 + 2.0 * (c01 * c12 * c02.conj()).re
        - p0 * c12.norm_sqr()
        - p1 * c02.norm_sqr()
        - p2 * c01.norm_sqr();
    det >= -e
}

/// Classical envelope `P_bound^m(P_pivot) <= P_bound <= P_bound^M(P_pivot)`
/// over the convex hull of the coherent curve `(P_pivot(mu), P_bound(mu))`.
#[derive(Debug, Clone)]
pub struct NumericEnvelope {
    pub pivot: usize,
    pub bound: usize,
    /// Tabulated `(P_pivot, min, max)`.
    pub table: Vec<(f64, f64, f64)>,
    upper: Vec<HullVertex>,
    lower: Vec<HullVertex>,
}

/// Hull vertex, tagged with the mu of the coherent sample (`None` for the
/// `mu -> infinity` limit point).
#[derive(Debug, Clone, Copy)]
struct HullVertex {
    x: f64,
    y: f64,
    mu: Option<f64>,
    idx: usize,
}

fn cross(o: &HullVertex, a: &HullVertex, b: &HullVertex) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Monotone-chain hull; returns (lower chain, upper chain), both sorted by x.
fn hull_chains(mut pts: Vec<HullVertex>) -> (Vec<HullVertex>, Vec<HullVertex>) {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    let build = |iter: &mut dyn Iterator<Item = &HullVertex>| {
        let mut chain: Vec<HullVertex> = Vec::new();
        for p in iter {
            while chain.len() >= 2 && cross(&chain[chain.len() - 2], &chain[chain.len() - 1], p) <= 0.0
            {
                chain.pop();
            }
            chain.push(*p);
        }
        chain
    };
    let lower = build(&mut pts.iter());
    let mut upper = build(&mut pts.iter().rev());
    upper.reverse();
    (lower, upper)
}

const ENVELOPE_CURVE_SAMPLES: usize = 6000;

/// Builds the classical envelope of `P_bound` as a function of `P_pivot`.
pub fn numeric_envelope(pivot: usize, bound: usize, grid_size: usize) -> Result<NumericEnvelope> {
    if pivot == bound {
        return Err(Error::Domain("pivot and bound must be different levels".into()));
    }
    if grid_size < 64 {
        return Err(Error::Configuration(format!(
            "envelope grid of {grid_size} points is too coarse (need >= 64)"
        )));
    }
    let mut pts: Vec<HullVertex> = mu_grid(ENVELOPE_CURVE_SAMPLES, MU_GRID_MAX)
        .into_iter()
        .enumerate()
        .map(|(idx, mu)| HullVertex {
            x: ln_poisson(pivot, mu).exp(),
            y: ln_poisson(bound, mu).exp(),
            mu: Some(mu),
            idx,
        })
        .collect();
    pts.push(HullVertex { x: 0.0, y: 0.0, mu: None, idx: usize::MAX });
    let (lower, upper) = hull_chains(pts);
    let x_max = upper.last().map(|v| v.x).unwrap_or(0.0);
    let mut env = NumericEnvelope { pivot, bound, table: Vec::new(), upper, lower };
    env.table = (0..grid_size)
        .into_par_iter()
        .map(|i| {
            let x = x_max * i as f64 / (grid_size - 1) as f64;
            let lo = env.min_at(x).unwrap_or(0.0);
            let hi = env.max_at(x).unwrap_or(0.0);
            (x, lo, hi)
        })
        .collect();
    Ok(env)
}

impl NumericEnvelope {
    /// Largest attainable `P_pivot` for classical states.
    pub fn pivot_max(&self) -> f64 {
        self.upper.last().map(|v| v.x).unwrap_or(0.0)
    }

    pub fn max_at(&self, p: f64) -> Option<f64> {
        self.chain_at(&self.upper, p)
    }

    pub fn min_at(&self, p: f64) -> Option<f64> {
        self.chain_at(&self.lower, p)
    }

    /// Classical bound `2 sqrt(P_i P_j^M(P_i))` on `|X_ij|` given the pivot value.
    pub fn x_bound(&self, p: f64) -> Option<f64> {
        self.max_at(p).map(|m| 2.0 * (p * m).sqrt())
    }

    fn chain_at(&self, chain: &[HullVertex], p: f64) -> Option<f64> {
        let tol = 1e-12;
        if chain.is_empty() || p < chain[0].x - tol || p > chain[chain.len() - 1].x + tol {
            return None;
        }
        let i = chain.partition_point(|v| v.x < p);
        if i == 0 {
            return Some(chain[0].y);
        }
        if i == chain.len() {
            return Some(chain[chain.len() - 1].y);
        }
        let (a, b) = (chain[i - 1], chain[i]);
        if (b.x - a.x).abs() < 1e-300 {
            return Some(a.y.max(b.y));
        }
        // Adjacent samples on the curve itself: evaluate the curve, not the chord.
        if let (Some(ma), Some(mb)) = (a.mu, b.mu) {
            if a.idx.abs_diff(b.idx) == 1 {
                let f = |mu: f64| ln_poisson(self.pivot, mu).exp();
                let (mut lo, mut hi) = (ma, mb);
                let increasing = f(hi) > f(lo);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if (f(mid) < p) == increasing {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return Some(ln_poisson(self.bound, 0.5 * (lo + hi)).exp());
            }
        }
        let w = (p - a.x) / (b.x - a.x);
        Some(a.y + w * (b.y - a.y))
    }
}
