//! Observables, truncated Fock-space states and the coherent-state model.
//!
//! Conventions: `X_jk = |j><k| + |k><j|`, `Y_jk = i(|k><j| - |j><k|)` and
//! `R_jk(theta) = cos(theta) X_jk + sin(theta) Y_jk`, always stored with `j < k`.
//! On a coherent state `|sqrt(mu) e^{i phi}>` with `d = k - j` these evaluate to
//!
//! ```text
//! <X_jk> = 2 sqrt(P_j P_k) cos(d phi)
//! <Y_jk> = 2 sqrt(P_j P_k) sin(d phi)
//! <R_jk(theta)> = 2 sqrt(P_j P_k) cos(theta - d phi)
//! ```
//!
//! which is what the matrix trace gives; the sign of the `Y` term is fixed by
//! that requirement.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;
pub const TRACE_TOL: f64 = 1e-9;

/// A single measured observable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObservableId {
    /// `P_j = |j><j|`
    Projector(usize),
    CoherX(usize, usize),
    CoherY(usize, usize),
    /// Rotated coherence with angle in radians.
    CoherR(usize, usize, f64),
}

impl ObservableId {
    pub fn projector(j: usize) -> Self {
        ObservableId::Projector(j)
    }

    /// `X_jk` is symmetric, so the indices are sorted.
    pub fn coher_x(j: usize, k: usize) -> Result<Self> {
        check_pair(j, k)?;
        Ok(ObservableId::CoherX(j.min(k), j.max(k)))
    }

    pub fn coher_y(j: usize, k: usize) -> Result<Self> {
        check_pair(j, k)?;
        if j > k {
            return Err(Error::Domain(format!(
                "Y coherence must be given with j < k (got Y{j}{k}; Y_kj = -Y_jk)"
            )));
        }
        Ok(ObservableId::CoherY(j, k))
    }

    /// `R_kj(theta) = R_jk(-theta)`, so reversed indices are folded into the angle.
    pub fn coher_r(j: usize, k: usize, theta: f64) -> Result<Self> {
        check_pair(j, k)?;
        if !theta.is_finite() {
            return Err(Error::Domain("rotation angle must be finite".into()));
        }
        let (a, b, th) = if j < k { (j, k, theta) } else { (k, j, -theta) };
        Ok(ObservableId::CoherR(a, b, th.rem_euclid(TAU)))
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ObservableId::Projector(_) => Ok(()),
            ObservableId::CoherX(j, k) | ObservableId::CoherY(j, k) => {
                check_pair(j, k)?;
                if j > k {
                    return Err(Error::Domain(format!("non-canonical coherence {self}")));
                }
                Ok(())
            }
            ObservableId::CoherR(j, k, th) => {
                check_pair(j, k)?;
                if j > k {
                    return Err(Error::Domain(format!("non-canonical coherence {self}")));
                }
                if !(0.0..TAU).contains(&th) {
                    return Err(Error::Domain(format!("angle {th} outside [0, 2pi)")));
                }
                Ok(())
            }
        }
    }

    /// `(j, k)` for coherences, `(j, j)` for projectors.
    pub fn levels(&self) -> (usize, usize) {
        match *self {
            ObservableId::Projector(j) => (j, j),
            ObservableId::CoherX(j, k)
            | ObservableId::CoherY(j, k)
            | ObservableId::CoherR(j, k, _) => (j, k),
        }
    }

    pub fn max_index(&self) -> usize {
        let (j, k) = self.levels();
        j.max(k)
    }

    pub fn is_coherence(&self) -> bool {
        !matches!(self, ObservableId::Projector(_))
    }

    /// `k - j` for coherences.
    pub fn coherence_order(&self) -> Option<usize> {
        match self {
            ObservableId::Projector(_) => None,
            _ => {
                let (j, k) = self.levels();
                Some(k - j)
            }
        }
    }

    /// Weights `(cx, cy)` with `<O> = 2 sqrt(P_j P_k) (cx cos(d phi) + cy sin(d phi))`
    /// on coherent states.
    pub(crate) fn phase_weights(&self) -> (f64, f64) {
        match *self {
            ObservableId::Projector(_) => (0.0, 0.0),
            ObservableId::CoherX(..) => (1.0, 0.0),
            ObservableId::CoherY(..) => (0.0, 1.0),
            ObservableId::CoherR(_, _, th) => (th.cos(), th.sin()),
        }
    }
}

fn check_pair(j: usize, k: usize) -> Result<()> {
    if j == k {
        Err(Error::Domain(format!("coherence needs two distinct levels (got {j},{k})")))
    } else {
        Ok(())
    }
}

fn fmt_index(f: &mut fmt::Formatter<'_>, i: usize) -> fmt::Result {
    if i < 10 {
        write!(f, "{i}")
    } else {
        write!(f, "[{i}]")
    }
}

impl fmt::Display for ObservableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (letter, j, k) = match *self {
            ObservableId::Projector(j) => {
                write!(f, "P")?;
                return fmt_index(f, j);
            }
            ObservableId::CoherX(j, k) => ('X', j, k),
            ObservableId::CoherY(j, k) => ('Y', j, k),
            ObservableId::CoherR(j, k, _) => ('R', j, k),
        };
        write!(f, "{letter}")?;
        fmt_index(f, j)?;
        fmt_index(f, k)?;
        if let ObservableId::CoherR(_, _, th) = self {
            write!(f, "@{th}")?;
        }
        Ok(())
    }
}

/// Reads one index: a single digit, or a bracketed run of digits.
fn take_index(s: &str) -> Result<(usize, &str)> {
    let bad = || Error::Parse(format!("expected a Fock index at '{s}'"));
    if let Some(rest) = s.strip_prefix('[') {
        let end = rest.find(']').ok_or_else(bad)?;
        let idx = rest[..end].parse().map_err(|_| bad())?;
        Ok((idx, &rest[end + 1..]))
    } else {
        let c = s.chars().next().ok_or_else(bad)?;
        let idx = c.to_digit(10).ok_or_else(bad)? as usize;
        Ok((idx, &s[1..]))
    }
}

impl FromStr for ObservableId {
    type Err = Error;

    fn from_str(token: &str) -> Result<Self> {
        let token = token.trim();
        let mut chars = token.chars();
        let letter = chars
            .next()
            .ok_or_else(|| Error::Parse("empty observable token".into()))?;
        let rest = chars.as_str();
        match letter {
            'P' => {
                // a lone projector index is unambiguous, so P10 is accepted as well as P[10]
                if rest.starts_with('[') {
                    let (j, tail) = take_index(rest)?;
                    if !tail.is_empty() {
                        return Err(Error::Parse(format!("trailing input in '{token}'")));
                    }
                    Ok(ObservableId::Projector(j))
                } else {
                    rest.parse()
                        .map(ObservableId::Projector)
                        .map_err(|_| Error::Parse(format!("bad projector '{token}'")))
                }
            }
            'X' | 'Y' | 'R' => {
                let (j, tail) = take_index(rest)?;
                let (k, tail) = take_index(tail)?;
                match letter {
                    'X' | 'Y' if !tail.is_empty() => {
                        Err(Error::Parse(format!("trailing input in '{token}'")))
                    }
                    'X' => ObservableId::coher_x(j, k),
                    'Y' => ObservableId::coher_y(j, k),
                    _ => {
                        let theta = tail
                            .strip_prefix('@')
                            .ok_or_else(|| Error::Parse(format!("'{token}' needs @<theta>")))?
                            .parse::<f64>()
                            .map_err(|_| Error::Parse(format!("bad angle in '{token}'")))?;
                        ObservableId::coher_r(j, k, theta)
                    }
                }
            }
            _ => Err(Error::Parse(format!("unknown observable '{token}'"))),
        }
    }
}

/// Ordered, duplicate-free list of observables.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSpace {
    observables: Vec<ObservableId>,
}

impl ObservableSpace {
    pub fn new(observables: Vec<ObservableId>) -> Result<Self> {
        if observables.is_empty() {
            return Err(Error::Domain("observable space must be non-empty".into()));
        }
        for (i, o) in observables.iter().enumerate() {
            o.validate()?;
            if observables[..i].contains(o) {
                return Err(Error::Domain(format!("duplicate observable {o}")));
            }
        }
        Ok(Self { observables })
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    pub fn observables(&self) -> &[ObservableId] {
        &self.observables
    }

    pub fn iter(&self) -> impl Iterator<Item = &ObservableId> {
        self.observables.iter()
    }

    pub fn max_index(&self) -> usize {
        self.observables.iter().map(|o| o.max_index()).max().unwrap_or(0)
    }

    /// Default truncation: one level above the largest observed index.
    pub fn default_dim(&self) -> usize {
        self.max_index() + 2
    }

    pub fn position(&self, obs: &ObservableId) -> Option<usize> {
        self.observables.iter().position(|o| o == obs)
    }

    pub fn only_coherences(&self) -> bool {
        self.observables.iter().all(|o| o.is_coherence())
    }
}

impl fmt::Display for ObservableSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, o) in self.observables.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{o}")?;
        }
        Ok(())
    }
}

impl FromStr for ObservableSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let obs = s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        ObservableSpace::new(obs)
    }
}

/// Coherent-state parameters `alpha = sqrt(mu) e^{i phi}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentParams {
    pub mu: f64,
    pub phi: f64,
}

impl CoherentParams {
    pub fn new(mu: f64, phi: f64) -> Result<Self> {
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(Error::Domain(format!("mean photon number must be >= 0 (got {mu})")));
        }
        if !phi.is_finite() {
            return Err(Error::Domain("phase must be finite".into()));
        }
        Ok(Self { mu, phi: phi.rem_euclid(TAU) })
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::from_polar(self.mu.sqrt(), self.phi)
    }
}

pub(crate) fn ln_factorial(j: usize) -> f64 {
    if j < 2 {
        0.0
    } else {
        ln_gamma(j as f64 + 1.0)
    }
}

/// `ln(e^{-mu} mu^j / j!)`, `-inf` when the probability is exactly zero.
pub(crate) fn ln_poisson(j: usize, mu: f64) -> f64 {
    if mu == 0.0 {
        return if j == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -mu + j as f64 * mu.ln() - ln_factorial(j)
}

/// Poisson photon-number probability of a coherent state.
pub fn poisson_prob(j: usize, mu: f64) -> Result<f64> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::Domain(format!("mu must be a finite non-negative number (got {mu})")));
    }
    Ok(ln_poisson(j, mu).exp())
}

/// `<O>` on the coherent state with parameters `p`.
pub fn coherent_expectation(obs: &ObservableId, p: &CoherentParams) -> f64 {
    let (j, k) = obs.levels();
    if let ObservableId::Projector(j) = *obs {
        return ln_poisson(j, p.mu).exp();
    }
    let amp = 2.0 * (0.5 * (ln_poisson(j, p.mu) + ln_poisson(k, p.mu))).exp();
    let (cx, cy) = obs.phase_weights();
    let arg = (k - j) as f64 * p.phi;
    amp * (cx * arg.cos() + cy * arg.sin())
}

/// Expectation vector of a coherent state.
pub fn coherent_point(space: &ObservableSpace, p: &CoherentParams) -> Vec<f64> {
    space.iter().map(|o| coherent_expectation(o, p)).collect()
}

/// Dense `dim x dim` matrix of an observable.
pub fn observable_matrix(obs: &ObservableId, dim: usize) -> Result<DMatrix<Complex64>> {
    obs.validate()?;
    if obs.max_index() >= dim {
        return Err(Error::Index { index: obs.max_index(), dim });
    }
    let mut m = DMatrix::zeros(dim, dim);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::i();
    match *obs {
        ObservableId::Projector(j) => m[(j, j)] = one,
        ObservableId::CoherX(j, k) => {
            m[(j, k)] = one;
            m[(k, j)] = one;
        }
        ObservableId::CoherY(j, k) => {
            // i(|k><j| - |j><k|)
            m[(k, j)] = i;
            m[(j, k)] = -i;
        }
        ObservableId::CoherR(j, k, th) => {
            // cos X + sin Y: <j|R|k> = cos - i sin
            m[(j, k)] = Complex64::from_polar(1.0, -th);
            m[(k, j)] = Complex64::from_polar(1.0, th);
        }
    }
    Ok(m)
}

/// Truncated Fock-basis density matrix. The trace may be below one, which
/// represents the projection of a normalized state onto the truncated levels.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        let dim = m.nrows();
        if dim == 0 || m.ncols() != dim {
            return Err(Error::InvalidState(format!(
                "expected a non-empty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let herm_err = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm_err > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (defect {herm_err:.2e})")));
        }
        let tr = m.trace().re;
        if !(-TRACE_TOL..=1.0 + TRACE_TOL).contains(&tr) {
            return Err(Error::InvalidState(format!("trace {tr} outside [0, 1]")));
        }
        let sym = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let min_eig = sym.symmetric_eigenvalues().min();
        if min_eig < -PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(Self { m: sym })
    }

    /// `|psi><psi|` without a normalization check.
    pub(crate) fn from_amplitudes(psi: &DVector<Complex64>) -> Self {
        Self { m: psi * psi.adjoint() }
    }

    /// Skips validation; for channel outputs whose structure guarantees positivity.
    pub(crate) fn from_matrix_unchecked(m: DMatrix<Complex64>) -> Self {
        Self { m }
    }

    /// Fock state `|n><n|`.
    pub fn fock(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::Index { index: n, dim });
        }
        let mut m = DMatrix::zeros(dim, dim);
        m[(n, n)] = Complex64::new(1.0, 0.0);
        Ok(Self { m })
    }

    /// Coherent state truncated to `dim` levels (trace slightly below one).
    pub fn coherent(p: &CoherentParams, dim: usize) -> Self {
        let psi = DVector::from_fn(dim, |n, _| {
            let mag = (0.5 * ln_poisson(n, p.mu)).exp();
            Complex64::from_polar(mag, n as f64 * p.phi)
        });
        Self::from_amplitudes(&psi)
    }

    /// Convex combination; weights must be non-negative and sum to at most one.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let dim = parts.iter().map(|(_, r)| r.dim()).max().ok_or_else(|| {
            Error::InvalidState("empty mixture".into())
        })?;
        let total: f64 = parts.iter().map(|(w, _)| *w).sum();
        if parts.iter().any(|(w, _)| *w < 0.0) || total > 1.0 + TRACE_TOL {
            return Err(Error::InvalidState(format!("invalid mixture weights (sum {total})")));
        }
        let mut m = DMatrix::zeros(dim, dim);
        for (w, r) in parts {
            let d = r.dim();
            let mut view = m.view_mut((0, 0), (d, d));
            view += &r.m * Complex64::new(*w, 0.0);
        }
        Ok(Self { m })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    /// Zero-padded copy in a larger space, or the leading block of a smaller one.
    pub fn resized(&self, dim: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        let d = dim.min(self.dim());
        m.view_mut((0, 0), (d, d)).copy_from(&self.m.view((0, 0), (d, d)));
        Self { m }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.m.clone().symmetric_eigenvalues().min()
    }
}

/// `Tr(O rho)`.
pub fn expectation(rho: &DensityMatrix, obs: &ObservableId) -> Result<f64> {
    obs.validate()?;
    if obs.max_index() >= rho.dim() {
        return Err(Error::Index { index: obs.max_index(), dim: rho.dim() });
    }
    let (j, k) = obs.levels();
    let val = match *obs {
        ObservableId::Projector(j) => rho.entry(j, j),
        ObservableId::CoherX(..) => rho.entry(j, k) + rho.entry(k, j),
        // i(rho_jk - rho_kj)
        ObservableId::CoherY(..) => Complex64::i() * (rho.entry(j, k) - rho.entry(k, j)),
        ObservableId::CoherR(_, _, th) => {
            Complex64::from_polar(1.0, th) * rho.entry(j, k)
                + Complex64::from_polar(1.0, -th) * rho.entry(k, j)
        }
    };
    if val.im.abs() > HERMITIAN_TOL {
        return Err(Error::InvalidState(format!(
            "complex expectation {val} for {obs}; state is not Hermitian"
        )));
    }
    Ok(val.re)
}

/// Measured values of every observable of `space` on `rho`.
pub fn expectations(rho: &DensityMatrix, space: &ObservableSpace) -> Result<ExpectationVector> {
    let values = space.iter().map(|o| expectation(rho, o)).collect::<Result<Vec<_>>>()?;
    Ok(ExpectationVector { space: space.clone(), values })
}

/// Pure superposition `sum c_n |n>`; amplitudes must be normalized to 1e-12.
pub fn make_superposition(coeffs: &[(usize, Complex64)], dim: usize) -> Result<DensityMatrix> {
    let mut psi = DVector::<Complex64>::zeros(dim);
    for &(n, c) in coeffs {
        if n >= dim {
            return Err(Error::Index { index: n, dim });
        }
        psi[n] += c;
    }
    let norm2 = psi.norm_squared();
    if (norm2 - 1.0).abs() > 1e-12 {
        return Err(Error::Normalization(norm2));
    }
    Ok(DensityMatrix::from_amplitudes(&psi))
}

/// Values aligned with an observable space.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationVector {
    space: ObservableSpace,
    values: Vec<f64>,
}

impl ExpectationVector {
    /// Checks length and the per-observable ranges (projectors in `[0,1]`,
    /// coherences in `[-1,1]`).
    pub fn new(space: ObservableSpace, values: Vec<f64>) -> Result<Self> {
        let v = Self::measured(space, values)?;
        if let Some((o, x)) = v.range_violation() {
            return Err(Error::Domain(format!("value {x} is out of range for {o}")));
        }
        Ok(v)
    }

    /// Raw measured data: only the length and finiteness are checked, so noisy
    /// data outside the physical ranges can still be classified.
    pub fn measured(space: ObservableSpace, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::Domain(format!(
                "{} values given for a {}-observable space",
                values.len(),
                space.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite expectation value".into()));
        }
        Ok(Self { space, values })
    }

    pub(crate) fn range_violation(&self) -> Option<(ObservableId, f64)> {
        self.space.iter().zip(&self.values).find_map(|(o, &x)| {
            let ok = if o.is_coherence() {
                x.abs() <= 1.0 + TRACE_TOL
            } else {
                (-TRACE_TOL..=1.0 + TRACE_TOL).contains(&x)
            };
            (!ok).then_some((*o, x))
        })
    }

    pub fn space(&self) -> &ObservableSpace {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, obs: &ObservableId) -> Option<f64> {
        self.space.position(obs).map(|i| self.values[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn projector_and_x_matrices() {
        let p0 = observable_matrix(&ObservableId::Projector(0), 2).unwrap();
        assert_eq!(p0[(0, 0)], c(1.0));
        assert_eq!(p0[(1, 1)], c(0.0));

        let x = observable_matrix(&ObservableId::coher_x(0, 1).unwrap(), 2).unwrap();
        let mut ev: Vec<f64> = x.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(ev[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ev[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn r_matrix_is_rotation_of_x_and_y() {
        for &th in &[0.0, 0.3, 1.0, 2.5, 4.0, 6.0] {
            let r = observable_matrix(&ObservableId::coher_r(0, 1, th).unwrap(), 3).unwrap();
            let x = observable_matrix(&ObservableId::CoherX(0, 1), 3).unwrap();
            let y = observable_matrix(&ObservableId::CoherY(0, 1), 3).unwrap();
            let expected = x * c(th.cos()) + y * c(th.sin());
            assert!((r - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn observable_matrix_rejects_small_dim() {
        let err = observable_matrix(&ObservableId::CoherX(0, 2), 2).unwrap_err();
        assert_eq!(err, Error::Index { index: 2, dim: 2 });
    }

    #[test]
    fn poisson_values() {
        assert_eq!(poisson_prob(0, 0.0).unwrap(), 1.0);
        assert_eq!(poisson_prob(3, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(poisson_prob(1, 1.0).unwrap(), (-1.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(poisson_prob(2, 2.0).unwrap(), 2.0 * (-2.0f64).exp(), epsilon = 1e-15);
        assert!(poisson_prob(0, -0.1).is_err());
        // large j must not overflow
        let p = poisson_prob(170, 170.0).unwrap();
        assert!(p > 0.0 && p < 0.05);
    }

    #[test]
    fn coherent_expectation_examples() {
        let vac = CoherentParams::new(0.0, 0.3).unwrap();
        assert_eq!(coherent_expectation(&ObservableId::Projector(0), &vac), 1.0);
        for o in ["X01", "Y01", "X12", "R02@1.0"] {
            let o: ObservableId = o.parse().unwrap();
            assert_eq!(coherent_expectation(&o, &vac), 0.0);
        }
        let p = CoherentParams::new(1.0, 0.0).unwrap();
        let x = coherent_expectation(&ObservableId::CoherX(0, 1), &p);
        assert_abs_diff_eq!(x, 2.0 * (-1.0f64).exp(), epsilon = 1e-14);
        let half = CoherentParams::new(0.5, 0.0).unwrap();
        let xm = coherent_expectation(&ObservableId::CoherX(0, 1), &half);
        assert_abs_diff_eq!(xm, 2f64.sqrt() * (-0.5f64).exp(), epsilon = 1e-14);
    }

    #[test]
    fn coherent_formula_matches_trace() {
        let space: ObservableSpace = "P0,P1,P3,X01,Y01,X02,Y02,X13,Y13,R12@0.7,R03@5.1"
            .parse()
            .unwrap();
        for &(mu, phi) in &[(0.3, 0.0), (1.2, 0.4), (2.5, 2.0), (4.0, 5.5)] {
            let p = CoherentParams::new(mu, phi).unwrap();
            let rho = DensityMatrix::coherent(&p, 40);
            for o in space.iter() {
                let a = coherent_expectation(o, &p);
                let b = expectation(&rho, o).unwrap();
                assert_abs_diff_eq!(a, b, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn superposition_examples() {
        let s = FRAC_1_SQRT_2;
        let rho = make_superposition(&[(0, c(s)), (1, c(s))], 3).unwrap();
        assert_abs_diff_eq!(expectation(&rho, &ObservableId::Projector(0)).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(expectation(&rho, &ObservableId::CoherX(0, 1)).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-15);

        let rho = make_superposition(&[(0, c(s)), (2, c(s))], 3).unwrap();
        assert_abs_diff_eq!(expectation(&rho, &ObservableId::CoherX(0, 2)).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(expectation(&rho, &ObservableId::CoherX(0, 1)).unwrap(), 0.0);

        let rho = make_superposition(&[(1, c(s)), (2, c(s))], 3).unwrap();
        assert_abs_diff_eq!(expectation(&rho, &ObservableId::CoherX(1, 2)).unwrap(), 1.0, epsilon = 1e-15);

        let err = make_superposition(&[(0, c(0.5)), (1, c(0.5))], 2).unwrap_err();
        assert!(matches!(err, Error::Normalization(_)));
    }

    #[test]
    fn y_sign_matches_phase() {
        // (|0> + i|1>)/sqrt2 is the coherent-like phase phi = pi/2 at order one
        let rho = make_superposition(&[(0, c(FRAC_1_SQRT_2)), (1, Complex64::new(0.0, FRAC_1_SQRT_2))], 2)
            .unwrap();
        assert_abs_diff_eq!(expectation(&rho, &ObservableId::CoherY(0, 1)).unwrap(), 1.0, epsilon = 1e-15);
        let p = CoherentParams::new(0.7, PI / 2.0).unwrap();
        assert!(coherent_expectation(&ObservableId::CoherY(0, 1), &p) > 0.0);
    }

    #[test]
    fn density_matrix_validation() {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 0)] = c(0.5);
        m[(1, 1)] = c(0.6);
        assert!(DensityMatrix::new(m.clone()).is_err());
        m[(1, 1)] = c(-0.1);
        assert!(DensityMatrix::new(m.clone()).is_err());
        m[(1, 1)] = c(0.5);
        m[(0, 1)] = c(0.5);
        assert!(DensityMatrix::new(m.clone()).is_err());
        m[(1, 0)] = c(0.5);
        assert!(DensityMatrix::new(m).is_ok());
    }

    #[test]
    fn space_parsing() {
        let s: ObservableSpace = "P0,X01".parse().unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.max_index(), 1);
        let s: ObservableSpace = "X[10][12],P[10],R13@0.5".parse().unwrap();
        assert_eq!(s.observables()[0], ObservableId::CoherX(10, 12));
        assert_eq!(s.max_index(), 12);
        assert_eq!(s.to_string(), "X[10][12],P[10],R13@0.5");
        assert!("P0,P0".parse::<ObservableSpace>().is_err());
        assert!("X00".parse::<ObservableSpace>().is_err());
        assert!("Q1".parse::<ObservableSpace>().is_err());
        assert!("".parse::<ObservableSpace>().is_err());
        assert!("Y10".parse::<ObservableSpace>().is_err());
        assert_eq!("X10".parse::<ObservableId>().unwrap(), ObservableId::CoherX(0, 1));
    }

    #[test]
    fn reversed_r_folds_angle() {
        let r = ObservableId::coher_r(2, 0, 1.0).unwrap();
        assert_eq!(r.levels(), (0, 2));
        if let ObservableId::CoherR(_, _, th) = r {
            assert_abs_diff_eq!(th, TAU - 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn expectation_vector_ranges() {
        let s: ObservableSpace = "P0,X01".parse().unwrap();
        assert!(ExpectationVector::new(s.clone(), vec![0.5, 1.2]).is_err());
        assert!(ExpectationVector::measured(s.clone(), vec![0.5, 1.2]).is_ok());
        assert!(ExpectationVector::new(s, vec![0.5]).is_err());
    }
}
