//! Attenuation (beamsplitter loss) and thermal-noise channels on truncated
//! Fock-space density matrices, with the closed forms for the standard test
//! families.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{ln_factorial, make_superposition, DensityMatrix, ExpectationVector, ObservableId, ObservableSpace};
use crate::quadrature::gauss_laguerre;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn ln_binom(n: usize, k: usize) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Beamsplitter with complex transmission amplitude `t`; the reflected mode is traced out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamsplitterParams {
    t: Complex64,
}

impl BeamsplitterParams {
    /// `t = sqrt(T) e^{i phase}`.
    pub fn new(transmissivity: f64, phase: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmissivity) {
            return Err(Error::Domain(format!("transmissivity {transmissivity} outside [0, 1]")));
        }
        if !phase.is_finite() {
            return Err(Error::Domain("phase must be finite".into()));
        }
        Ok(Self { t: Complex64::from_polar(transmissivity.sqrt(), phase) })
    }

    pub fn from_amplitude(t: Complex64) -> Result<Self> {
        if !(t.norm_sqr() <= 1.0) {
            return Err(Error::Domain(format!("|t|^2 = {} exceeds one", t.norm_sqr())));
        }
        Ok(Self { t })
    }

    pub fn amplitude(&self) -> Complex64 {
        self.t
    }

    /// `T = |t|^2`
    pub fn transmissivity(&self) -> f64 {
        self.t.norm_sqr()
    }

    /// `R = 1 - T`
    pub fn reflectivity(&self) -> f64 {
        (1.0 - self.transmissivity()).max(0.0)
    }

    pub fn phase(&self) -> f64 {
        self.t.arg()
    }
}

pub const MIN_RADIAL_NODES: usize = 16;
pub const MIN_ANGULAR_NODES: usize = 16;

/// Random-displacement channel with exponentially distributed `|alpha|^2` of mean `nbar`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalParams {
    nbar: f64,
    radial_nodes: usize,
    angular_nodes: usize,
    dim: Option<usize>,
}

impl ThermalParams {
    /// Defaults: 48 Gauss-Laguerre nodes, 64 angular nodes, automatic truncation.
    pub fn new(nbar: f64) -> Result<Self> {
        if !(nbar >= 0.0 && nbar.is_finite()) {
            return Err(Error::Domain(format!("mean thermal occupation {nbar} must be >= 0")));
        }
        Ok(Self { nbar, radial_nodes: 48, angular_nodes: 64, dim: None })
    }

    pub fn with_nodes(mut self, radial: usize, angular: usize) -> Result<Self> {
        if radial < MIN_RADIAL_NODES || angular < MIN_ANGULAR_NODES {
            return Err(Error::Configuration(format!(
                "quadrature needs >= {MIN_RADIAL_NODES} radial and >= {MIN_ANGULAR_NODES} angular nodes"
            )));
        }
        self.radial_nodes = radial;
        self.angular_nodes = angular;
        Ok(self)
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = Some(dim);
        self
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    pub fn radial_nodes(&self) -> usize {
        self.radial_nodes
    }

    pub fn angular_nodes(&self) -> usize {
        self.angular_nodes
    }

    /// Output truncation: the explicit one, or [`auto_thermal_dim`].
    pub fn output_dim(&self, input_dim: usize) -> usize {
        self.dim.unwrap_or_else(|| auto_thermal_dim(input_dim, self.nbar))
    }
}

/// Truncation large enough that the thermal tail beyond it is below ~1e-12.
pub fn auto_thermal_dim(input_dim: usize, nbar: f64) -> usize {
    if nbar <= 0.0 {
        return input_dim;
    }
    let ratio = nbar / (nbar + 1.0);
    let tail = (1e-12f64.ln() / ratio.ln()).ceil() as usize;
    input_dim + tail + 5
}

/// Test-state families: balanced superpositions of two Fock levels, or custom amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub enum StateFamily {
    ZeroOne,
    ZeroTwo,
    OneTwo,
    Custom(Vec<(usize, Complex64)>),
}

impl StateFamily {
    pub fn amplitudes(&self) -> Vec<(usize, Complex64)> {
        let h = c(FRAC_1_SQRT_2);
        match self {
            StateFamily::ZeroOne => vec![(0, h), (1, h)],
            StateFamily::ZeroTwo => vec![(0, h), (2, h)],
            StateFamily::OneTwo => vec![(1, h), (2, h)],
            StateFamily::Custom(v) => v.clone(),
        }
    }

    /// Smallest truncation holding the state.
    pub fn support_dim(&self) -> usize {
        self.amplitudes().iter().map(|(n, _)| n + 1).max().unwrap_or(1)
    }

    pub fn state(&self) -> Result<DensityMatrix> {
        make_superposition(&self.amplitudes(), self.support_dim())
    }

    pub fn name(&self) -> String {
        match self {
            StateFamily::ZeroOne => "zero-one".into(),
            StateFamily::ZeroTwo => "zero-two".into(),
            StateFamily::OneTwo => "one-two".into(),
            StateFamily::Custom(v) => {
                let parts: Vec<String> =
                    v.iter().map(|(n, a)| format!("{}{:+}i@{}", a.re, a.im, n)).collect();
                format!("custom[{}]", parts.join(";"))
            }
        }
    }
}

impl std::str::FromStr for StateFamily {
    type Err = Error;

    /// `zero-one`, `zero-two`, `one-two` (also `01`, `02`, `12`), or
    /// `custom:n=re[+im i],...` with normalized amplitudes.
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['_', ' '], "-");
        match key.as_str() {
            "zero-one" | "01" => return Ok(StateFamily::ZeroOne),
            "zero-two" | "02" => return Ok(StateFamily::ZeroTwo),
            "one-two" | "12" => return Ok(StateFamily::OneTwo),
            _ => {}
        }
        let body = key
            .strip_prefix("custom:")
            .ok_or_else(|| Error::Parse(format!("unknown state family '{s}'")))?;
        let mut coeffs = Vec::new();
        for item in body.split(',') {
            let (n, amp) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected n=amplitude, got '{item}'")))?;
            let n: usize = n.trim().parse().map_err(|_| Error::Parse(format!("bad level '{n}'")))?;
            let amp: Complex64 = amp
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad amplitude '{amp}'")))?;
            coeffs.push((n, amp));
        }
        let fam = StateFamily::Custom(coeffs);
        fam.state()?;
        Ok(fam)
    }
}

/// Attenuated `(|0> + |1>)/sqrt2`: `((2-T) P0 + T P1 + t|1><0| + h.c.) / 2`.
pub fn attenuate_closed_form_01(p: &BeamsplitterParams) -> DensityMatrix {
    let t = p.amplitude();
    let tt = p.transmissivity();
    let mut m = DMatrix::zeros(2, 2);
    m[(0, 0)] = c((2.0 - tt) / 2.0);
    m[(1, 1)] = c(tt / 2.0);
    m[(1, 0)] = t / 2.0;
    m[(0, 1)] = t.conj() / 2.0;
    DensityMatrix::from_matrix_unchecked(m)
}

/// Attenuated `(|0> + |2>)/sqrt2`:
/// `(1+R^2)/2 P0 + T R P1 + T^2/2 P2 + (t^2 |2><0| + h.c.)/2`.
pub fn attenuate_closed_form_02(p: &BeamsplitterParams) -> DensityMatrix {
    let t = p.amplitude();
    let (tt, r) = (p.transmissivity(), p.reflectivity());
    let mut m = DMatrix::zeros(3, 3);
    m[(0, 0)] = c((1.0 + r * r) / 2.0);
    m[(1, 1)] = c(tt * r);
    m[(2, 2)] = c(tt * tt / 2.0);
    m[(2, 0)] = t * t / 2.0;
    m[(0, 2)] = (t * t).conj() / 2.0;
    DensityMatrix::from_matrix_unchecked(m)
}

/// Amplitude-damping Kraus operators
/// `K_k = sum_n sqrt(binom(n,k)) t^{n-k} r^k |n-k><n|` with `r = sqrt(R)`.
fn loss_kraus(p: &BeamsplitterParams, dim: usize) -> Vec<DMatrix<Complex64>> {
    let t = p.amplitude();
    let r = p.reflectivity().sqrt();
    (0..dim)
        .map(|k| {
            DMatrix::from_fn(dim, dim, |a, n| {
                if n < k || a != n - k {
                    return Complex64::new(0.0, 0.0);
                }
                let mag = ln_binom(n, k).exp().sqrt() * r.powi(k as i32);
                t.powu((n - k) as u32) * mag
            })
        })
        .collect()
}

/// `sum_k K_k rho K_k^dag` in a space of `dim >= rho.dim()` levels.
pub fn attenuate_kraus(rho: &DensityMatrix, p: &BeamsplitterParams, dim: usize) -> Result<DensityMatrix> {
    if dim < rho.dim() {
        return Err(Error::Configuration(format!(
            "output truncation {dim} is smaller than the input {}",
            rho.dim()
        )));
    }
    let input = rho.resized(dim);
    let m = input.matrix();
    let mut out = DMatrix::<Complex64>::zeros(dim, dim);
    for k in loss_kraus(p, dim) {
        out += &k * m * k.adjoint();
    }
    let loss = (rho.trace() - out.trace().re).abs();
    if loss > 1e-10 {
        return Err(Error::Truncation(format!("attenuation changed the trace by {loss:.2e}")));
    }
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

/// Associated Laguerre polynomials `L_0^a(x) .. L_n^a(x)`.
fn laguerre_all(n: usize, a: f64, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(1.0 + a - x);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * out[k] - (kf + a) * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

fn displacement_unchecked(alpha: Complex64, dim: usize) -> DMatrix<Complex64> {
    let x = alpha.norm_sqr();
    let r = alpha.norm();
    let mut d = DMatrix::<Complex64>::zeros(dim, dim);
    for delta in 0..dim {
        let lag = laguerre_all(dim - 1 - delta, delta as f64, x);
        for lo in 0..dim - delta {
            let hi = lo + delta;
            // <hi|D|lo> = sqrt(lo!/hi!) alpha^delta e^{-x/2} L_lo^delta(x)
            let ln_pref = 0.5 * (ln_factorial(lo) - ln_factorial(hi)) - 0.5 * x
                + if delta > 0 { delta as f64 * r.ln() } else { 0.0 };
            let val = if delta > 0 && r == 0.0 { 0.0 } else { ln_pref.exp() * lag[lo] };
            let ph = if r > 0.0 { Complex64::from_polar(1.0, alpha.arg() * delta as f64) } else { c(1.0) };
            d[(hi, lo)] = ph * val;
            if delta > 0 {
                // <lo|D|hi> = sqrt(lo!/hi!) (-conj alpha)^delta e^{-x/2} L_lo^delta(x)
                let sign = if delta % 2 == 1 { -1.0 } else { 1.0 };
                d[(lo, hi)] = ph.conj() * (sign * val);
            }
        }
    }
    d
}

/// Truncated Fock matrix of `D(alpha) = exp(alpha a^dag - conj(alpha) a)`.
/// Fails when the leading quarter of the columns is not unitary to 1e-6.
pub fn displacement_matrix(alpha: Complex64, dim: usize) -> Result<DMatrix<Complex64>> {
    if dim < 2 {
        return Err(Error::Configuration("displacement needs dim >= 2".into()));
    }
    let d = displacement_unchecked(alpha, dim);
    let checked = (dim / 4).max(1);
    let defect = (0..checked)
        .map(|n| (1.0 - d.column(n).norm_squared()).abs())
        .fold(0.0, f64::max);
    if defect > 1e-6 {
        return Err(Error::Truncation(format!(
            "|alpha|^2 = {:.3} is too large for dim {dim} (unitarity defect {defect:.2e})",
            alpha.norm_sqr()
        )));
    }
    Ok(d)
}

/// Thermal channel by quadrature: Gauss-Laguerre in `mu` (weight `e^{-mu/nbar}/nbar`)
/// and the uniform trapezoid rule in the displacement phase.
pub fn thermalize_quadrature(rho: &DensityMatrix, tp: &ThermalParams) -> Result<DensityMatrix> {
    if tp.nbar == 0.0 {
        return Ok(rho.clone());
    }
    let dim = tp.output_dim(rho.dim());
    if dim < rho.dim() {
        return Err(Error::Configuration("thermal truncation smaller than the input".into()));
    }
    let d_in = rho.dim();
    let input = rho.matrix();
    let (nodes, weights) = gauss_laguerre(tp.radial_nodes);
    let k = tp.angular_nodes;
    let out = nodes
        .par_iter()
        .zip(weights.par_iter())
        .filter(|(_, w)| **w > 1e-300)
        .map(|(&x, &w)| {
            let mu = tp.nbar * x;
            let d0 = displacement_unchecked(c(mu.sqrt()), dim);
            let cols = d0.columns(0, d_in).into_owned();
            let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
            for i in 0..k {
                let phi = TAU * i as f64 / k as f64;
                let dphi = DMatrix::from_fn(dim, d_in, |m, n| {
                    cols[(m, n)] * Complex64::from_polar(1.0, (m as f64 - n as f64) * phi)
                });
                acc += &dphi * input * dphi.adjoint();
            }
            acc * c(w / k as f64)
        })
        .reduce(|| DMatrix::zeros(dim, dim), |a, b| a + b);
    let loss = rho.trace() - out.trace().re;
    if loss.abs() > 1e-8 {
        return Err(Error::Truncation(format!(
            "thermal output lost {loss:.2e} of the trace at dim {dim}; increase the truncation"
        )));
    }
    let herm = (&out + out.adjoint()) * c(0.5);
    Ok(DensityMatrix::from_matrix_unchecked(herm))
}

/// Quantum-limited amplifier of gain `g >= 1` into `dim` levels:
/// `A_k = g^{-1/2} sum_n sqrt(binom(n+k,k)) (1-1/g)^{k/2} g^{-n/2} |n+k><n|`.
fn amplify(m: &DMatrix<Complex64>, g: f64, dim: usize) -> DMatrix<Complex64> {
    let d_in = m.nrows();
    let mut out = DMatrix::<Complex64>::zeros(dim, dim);
    let (lg, l1) = (g.ln(), (1.0 - 1.0 / g).ln());
    for k in 0..dim {
        let amp = DMatrix::from_fn(dim, d_in, |a, n| {
            if a != n + k {
                return c(0.0);
            }
            let ln = -0.5 * lg + 0.5 * ln_binom(n + k, k) + 0.5 * k as f64 * l1 - 0.5 * n as f64 * lg;
            c(if k > 0 && g == 1.0 { 0.0 } else { ln.exp() })
        });
        out += &amp * m * amp.adjoint();
    }
    out
}

/// Thermal channel in closed Fock form: pure loss with `eta = 1/(1+nbar)`
/// followed by a quantum-limited amplifier of gain `1 + nbar`. Agrees with
/// [`thermalize_quadrature`] up to quadrature error.
pub fn thermalize_fock(rho: &DensityMatrix, nbar: f64, dim: Option<usize>) -> Result<DensityMatrix> {
    if !(nbar >= 0.0 && nbar.is_finite()) {
        return Err(Error::Domain(format!("mean thermal occupation {nbar} must be >= 0")));
    }
    if nbar == 0.0 {
        return Ok(rho.clone());
    }
    let dim = dim.unwrap_or_else(|| auto_thermal_dim(rho.dim(), nbar));
    if dim < rho.dim() {
        return Err(Error::Configuration("thermal truncation smaller than the input".into()));
    }
    let g = 1.0 + nbar;
    let lossy = attenuate_kraus(rho, &BeamsplitterParams::new(1.0 / g, 0.0)?, rho.dim())?;
    let out = amplify(lossy.matrix(), g, dim);
    let loss = rho.trace() - out.trace().re;
    if loss.abs() > 1e-8 {
        return Err(Error::Truncation(format!(
            "thermal output lost {loss:.2e} of the trace at dim {dim}; increase the truncation"
        )));
    }
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

/// Closed-form `P_j` and `X_{j,j+1}` (`j <= j_max`) for the attenuated and
/// thermalized `(|0> + |1>)/sqrt2`:
/// `P_j = nbar^j/(nbar+1)^{j+1} [2 nbar(nbar+1) + T(j - nbar)] / (2 nbar(nbar+1))`,
/// `X_j = nbar^j/(nbar+1)^{j+2} sqrt(j+1) Re t`.
/// The removable `1/nbar` is cancelled, so `nbar = 0` gives the attenuation-only values.
pub fn thermal_closed_form_01(p: &BeamsplitterParams, nbar: f64, j_max: usize) -> Result<ExpectationVector> {
    if !(nbar >= 0.0 && nbar.is_finite()) {
        return Err(Error::Domain(format!("mean thermal occupation {nbar} must be >= 0")));
    }
    let tt = p.transmissivity();
    let re_t = p.amplitude().re;
    let n1 = nbar + 1.0;
    let mut obs = Vec::new();
    let mut vals = Vec::new();
    for j in 0..=j_max {
        let jf = j as f64;
        let bracket = 2.0 * nbar * n1 + tt * (jf - nbar);
        let pj = if j == 0 {
            (2.0 * n1 - tt) / (2.0 * n1 * n1)
        } else {
            nbar.powi(j as i32 - 1) * bracket / (2.0 * n1.powi(j as i32 + 2))
        };
        obs.push(ObservableId::Projector(j));
        vals.push(pj);
    }
    for j in 0..=j_max {
        let xj = nbar.powi(j as i32) / n1.powi(j as i32 + 2) * ((j + 1) as f64).sqrt() * re_t;
        obs.push(ObservableId::CoherX(j, j + 1));
        vals.push(xj);
    }
    ExpectationVector::measured(ObservableSpace::new(obs)?, vals)
}

/// State of `family` after a beamsplitter and (optionally) thermal noise.
/// Uses the closed Fock-space thermal channel.
pub fn prepare_state(family: &StateFamily, bs: &BeamsplitterParams, nbar: f64) -> Result<DensityMatrix> {
    let rho = family.state()?;
    let att = attenuate_kraus(&rho, bs, rho.dim())?;
    thermalize_fock(&att, nbar, None)
}
