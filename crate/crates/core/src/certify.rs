//! Classification pipeline, noise thresholds and region maps.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{prepare_state, BeamsplitterParams, StateFamily};
use crate::error::{Error, Result};
use crate::fock::{expectations, ExpectationVector, ObservableId, ObservableSpace};
use crate::hull::{classical_shape, quantum_r_bound_given_pj, BOUNDARY_EPS};
use crate::support::{quantum_separation, search_certificate, Certificate, CertifyOptions};

/// Largest space handled without a recognized closed form.
pub const MAX_GENERIC_DIM: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Nonclassical(Certificate),
    ClassicalCompatible,
    InconsistentWithQuantum { distance: f64 },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Nonclassical(_) => "nonclassical",
            Verdict::ClassicalCompatible => "classical",
            Verdict::InconsistentWithQuantum { .. } => "inconsistent",
        }
    }

    pub fn is_nonclassical(&self) -> bool {
        matches!(self, Verdict::Nonclassical(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    /// Criterion that decided the verdict.
    pub criterion: String,
    /// Positive: certified separation from C. Non-positive: how deep inside
    /// (analytic slack, or the best witness margin the search found).
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassifyOptions {
    pub certify: CertifyOptions,
    /// Skip the quantum-consistency stage (data known to come from a state).
    pub assume_quantum: bool,
}

/// Classical margins are reported as non-positive depths (no `-0.0`).
fn inside(m: f64) -> f64 {
    m.min(0.0) + 0.0
}

/// Exact quantum-consistency test for spaces whose projection of Q is known.
/// Returns the violation (non-positive when consistent).
fn analytic_quantum(space: &ObservableSpace, x: &[f64]) -> Option<f64> {
    use ObservableId::*;
    let obs = space.observables();
    let prob_excess = |p: f64| (-p).max(p - 1.0);
    if obs.iter().all(|o| matches!(o, Projector(_))) {
        let sum: f64 = x.iter().sum();
        let worst = x.iter().map(|&p| prob_excess(p)).fold(sum - 1.0, f64::max);
        return Some(worst);
    }
    match obs {
        [o] if o.is_coherence() => Some(x[0].abs() - 1.0),
        [Projector(j), c] | [c, Projector(j)] if c.is_coherence() => {
            let (a, b) = c.levels();
            if *j != a && *j != b {
                return None;
            }
            let (pi, ci) = if matches!(obs[0], Projector(_)) { (0, 1) } else { (1, 0) };
            let p = x[pi];
            let bound = quantum_r_bound_given_pj(p.clamp(0.0, 1.0)).ok()?;
            Some(prob_excess(p).max(x[ci].abs() - bound))
        }
        _ => {
            // projectors P_j, P_k plus X_jk and/or Y_jk of the same pair
            let (mut pj, mut pk, mut cx, mut cy) = (None, None, 0.0, 0.0);
            let mut pair = None;
            for o in obs {
                if o.is_coherence() {
                    let lv = o.levels();
                    if pair.is_some_and(|p| p != lv) {
                        return None;
                    }
                    pair = Some(lv);
                }
            }
            let (j, k) = pair?;
            for (o, &v) in obs.iter().zip(x) {
                match *o {
                    Projector(n) if n == j => pj = Some(v),
                    Projector(n) if n == k => pk = Some(v),
                    CoherX(..) => cx = v,
                    CoherY(..) => cy = v,
                    _ => return None,
                }
            }
            let (pj, pk) = (pj?, pk?);
            let probs = prob_excess(pj).max(prob_excess(pk)).max(pj + pk - 1.0);
            let coh = f64::hypot(cx, cy) - 2.0 * (pj.max(0.0) * pk.max(0.0)).sqrt();
            Some(probs.max(coh))
        }
    }
}

/// Decides whether the data certify nonclassicality.
pub fn classify(space: &ObservableSpace, x: &ExpectationVector, opts: &ClassifyOptions) -> Result<Classification> {
    if x.space() != space {
        return Err(Error::Domain(format!("data are given in ({}) but the space is ({space})", x.space())));
    }
    let shape = classical_shape(space);
    if shape.is_none() && space.len() > MAX_GENERIC_DIM {
        return Err(Error::UnsupportedSpace(format!(
            "({space}) has {} observables; at most {MAX_GENERIC_DIM} are supported",
            space.len()
        )));
    }
    let vals = x.values();

    if !opts.assume_quantum {
        let tol = opts.certify.tol_quantum.max(BOUNDARY_EPS);
        if let Some((o, v)) = x.range_violation() {
            let excess = if o.is_coherence() { v.abs() - 1.0 } else { (v - 1.0).max(-v) };
            if excess > tol {
                return Ok(Classification {
                    verdict: Verdict::InconsistentWithQuantum { distance: excess },
                    criterion: format!("range of {o}"),
                    margin: 0.0,
                });
            }
        }
        match analytic_quantum(space, vals) {
            Some(v) if v <= tol => {}
            Some(v) => {
                return Ok(Classification {
                    verdict: Verdict::InconsistentWithQuantum { distance: v },
                    criterion: "positivity of the density matrix".into(),
                    margin: 0.0,
                })
            }
            None => {
                let sep = quantum_separation(space, vals, &opts.certify)?;
                if sep > opts.certify.tol_quantum {
                    return Ok(Classification {
                        verdict: Verdict::InconsistentWithQuantum { distance: sep },
                        criterion: "quantum support-function separation".into(),
                        margin: 0.0,
                    });
                }
            }
        }
    }

    if let Some(shape) = shape {
        let slack = shape.slack(vals);
        if slack >= -BOUNDARY_EPS {
            return Ok(Classification {
                verdict: Verdict::ClassicalCompatible,
                criterion: shape.name().into(),
                margin: inside(-slack),
            });
        }
        let out = search_certificate(space, vals, &opts.certify)?;
        return Ok(match out.certificate {
            Some(cert) => Classification {
                margin: cert.margin,
                verdict: Verdict::Nonclassical(cert),
                criterion: shape.name().into(),
            },
            None => Classification {
                verdict: Verdict::ClassicalCompatible,
                criterion: format!("{} (violation below the certification tolerance)", shape.name()),
                margin: inside(out.best_margin),
            },
        });
    }

    let out = search_certificate(space, vals, &opts.certify)?;
    Ok(match out.certificate {
        Some(cert) => Classification {
            margin: cert.margin,
            verdict: Verdict::Nonclassical(cert),
            criterion: "support-function certificate".into(),
        },
        None => Classification {
            verdict: Verdict::ClassicalCompatible,
            criterion: "no separating hyperplane".into(),
            margin: inside(out.best_margin),
        },
    })
}

/// Classification of `family` after the channels.
pub fn classify_family_point(
    family: &StateFamily,
    space: &ObservableSpace,
    transmissivity: f64,
    nbar: f64,
    opts: &ClassifyOptions,
) -> Result<Classification> {
    let bs = BeamsplitterParams::new(transmissivity, 0.0)?;
    let rho = prepare_state(family, &bs, nbar)?;
    let rho = rho.resized(rho.dim().max(space.default_dim()));
    let x = expectations(&rho, space)?;
    let opts = ClassifyOptions { assume_quantum: true, ..*opts };
    classify(space, &x, &opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ThresholdParameter {
    #[serde(rename = "T")]
    Transmissivity,
    #[serde(rename = "nbar")]
    Nbar,
}

impl fmt::Display for ThresholdParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThresholdParameter::Transmissivity => "T",
            ThresholdParameter::Nbar => "nbar",
        })
    }
}

/// One-parameter path through the channel parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParameterPath {
    /// Vary `T` over `range` at fixed thermal occupation.
    Transmissivity { nbar: f64, range: (f64, f64) },
    /// Vary `nbar` over `range` at fixed transmissivity.
    Thermal { transmissivity: f64, range: (f64, f64) },
}

impl ParameterPath {
    fn parameter(&self) -> ThresholdParameter {
        match self {
            ParameterPath::Transmissivity { .. } => ThresholdParameter::Transmissivity,
            ParameterPath::Thermal { .. } => ThresholdParameter::Nbar,
        }
    }

    fn range(&self) -> (f64, f64) {
        match *self {
            ParameterPath::Transmissivity { range, .. } | ParameterPath::Thermal { range, .. } => range,
        }
    }

    fn point(&self, s: f64) -> (f64, f64) {
        match *self {
            ParameterPath::Transmissivity { nbar, .. } => (s, nbar),
            ParameterPath::Thermal { transmissivity, .. } => (transmissivity, s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub parameter: ThresholdParameter,
    /// Midpoint of the final bracket.
    pub critical: f64,
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
    pub space: String,
    /// Whether the upper end of the bracket is the nonclassical side.
    pub nonclassical_above: bool,
}

/// Bisection on the verdict along `path` down to `resolution`.
pub fn find_threshold(
    family: &StateFamily,
    space: &ObservableSpace,
    path: &ParameterPath,
    resolution: f64,
    opts: &ClassifyOptions,
) -> Result<ThresholdResult> {
    if !(resolution > 0.0) {
        return Err(Error::Configuration("threshold resolution must be positive".into()));
    }
    let (mut lo, mut hi) = path.range();
    if !(hi > lo) {
        return Err(Error::Configuration(format!("empty parameter range [{lo}, {hi}]")));
    }
    let nonclassical = |s: f64| -> Result<bool> {
        let (t, nbar) = path.point(s);
        Ok(classify_family_point(family, space, t, nbar, opts)?.verdict.is_nonclassical())
    };
    let at_lo = nonclassical(lo)?;
    let at_hi = nonclassical(hi)?;
    if at_lo == at_hi {
        return Err(Error::NoThreshold(format!(
            "{} is {} at both ends of [{lo}, {hi}] in ({space})",
            family.name(),
            if at_lo { "nonclassical" } else { "classical" }
        )));
    }
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if nonclassical(mid)? == at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ThresholdResult {
        parameter: path.parameter(),
        critical: 0.5 * (lo + hi),
        lower: lo,
        upper: hi,
        width: hi - lo,
        space: space.to_string(),
        nonclassical_above: at_hi,
    })
}

/// One grid point of a region map; `outcome` holds the error message when
/// the channel or the classification failed there.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionPoint {
    pub transmissivity: f64,
    pub nbar: f64,
    pub outcome: std::result::Result<(f64, &'static str), String>,
}

/// Signed margins over a `T x nbar` grid (rows ordered by `nbar`, then `T`).
pub fn region_map(
    family: &StateFamily,
    space: &ObservableSpace,
    t_grid: &[f64],
    nbar_grid: &[f64],
    opts: &ClassifyOptions,
) -> Result<Vec<RegionPoint>> {
    if t_grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::Domain("transmissivities must lie in [0, 1]".into()));
    }
    if nbar_grid.iter().any(|n| !(*n >= 0.0 && n.is_finite())) {
        return Err(Error::Domain("thermal occupations must be finite and >= 0".into()));
    }
    let points: Vec<(f64, f64)> =
        nbar_grid.iter().flat_map(|&n| t_grid.iter().map(move |&t| (t, n))).collect();
    Ok(points
        .par_iter()
        .map(|&(t, nbar)| RegionPoint {
            transmissivity: t,
            nbar,
            outcome: classify_family_point(family, space, t, nbar, opts)
                .map(|c| (c.margin, c.verdict.label()))
                .map_err(|e| e.to_string()),
        })
        .collect())
}

/// Writes a region map as CSV: `family,space,T,nbar,margin,verdict`.
pub fn write_region_csv<W: Write>(
    out: W,
    family: &StateFamily,
    space: &ObservableSpace,
    points: &[RegionPoint],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Configuration(format!("writing CSV: {e}"));
    w.write_record(["family", "space", "T", "nbar", "margin", "verdict"]).map_err(io)?;
    let (fam, sp) = (family.name(), space.to_string());
    for p in points {
        let (margin, verdict) = match &p.outcome {
            Ok((m, v)) => (format!("{m:.9e}"), v.to_string()),
            Err(e) => ("NaN".to_string(), format!("error: {e}")),
        };
        w.write_record([
            fam.as_str(),
            sp.as_str(),
            &format!("{:.6}", p.transmissivity),
            &format!("{:.6}", p.nbar),
            &margin,
            &verdict,
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Configuration(format!("writing CSV: {e}")))?;
    Ok(())
}

/// `n` evenly spaced points on `[a, b]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(s: &str) -> ObservableSpace {
        s.parse().unwrap()
    }

    fn run(sp: &str, v: &[f64]) -> Classification {
        let s = space(sp);
        let x = ExpectationVector::measured(s.clone(), v.to_vec()).unwrap();
        classify(&s, &x, &ClassifyOptions::default()).unwrap()
    }

    #[test]
    fn spec_examples() {
        assert!(run("X01", &[0.9]).verdict.is_nonclassical());
        assert_eq!(run("P0,P2", &[0.6, 0.1]).verdict, Verdict::ClassicalCompatible);
        let x02 = 2.0 * 0.06f64.sqrt();
        assert!(run("P0,P2,X02", &[0.6, 0.1, x02]).verdict.is_nonclassical());
        // the rounded 0.4899 sits ~1e-6 outside Q; a looser tolerance accepts it
        let s = space("P0,P2,X02");
        let x = ExpectationVector::measured(s.clone(), vec![0.6, 0.1, 0.4899]).unwrap();
        let loose = ClassifyOptions {
            certify: CertifyOptions { tol_quantum: 1e-5, ..Default::default() },
            ..Default::default()
        };
        assert!(classify(&s, &x, &loose).unwrap().verdict.is_nonclassical());
        assert!(matches!(
            classify(&s, &x, &ClassifyOptions::default()).unwrap().verdict,
            Verdict::InconsistentWithQuantum { .. }
        ));
        assert!(run("P0,X01", &[0.2, 0.6]).verdict.is_nonclassical());
        assert!(matches!(run("P0,P1", &[0.6, 0.6]).verdict, Verdict::InconsistentWithQuantum { .. }));
        assert!(matches!(run("X01", &[1.2]).verdict, Verdict::InconsistentWithQuantum { .. }));
        assert!(matches!(run("P0,X01", &[0.9, 0.7]).verdict, Verdict::InconsistentWithQuantum { .. }));
    }

    #[test]
    fn generic_quantum_check() {
        // X01 = X12 = 1 needs P1 = 1/2 from both pairs, jointly impossible
        let c = run("X01,X12", &[1.0, 1.0]);
        assert!(matches!(c.verdict, Verdict::InconsistentWithQuantum { .. }), "{c:?}");
    }

    #[test]
    fn unsupported_space() {
        let s = space("P0,P1,P2,P3,P4,P5,P6");
        let x = ExpectationVector::measured(s.clone(), vec![0.1; 7]).unwrap();
        assert!(matches!(classify(&s, &x, &ClassifyOptions::default()), Err(Error::UnsupportedSpace(_))));
    }

    #[test]
    fn zero_one_threshold() {
        let r = find_threshold(
            &StateFamily::ZeroOne,
            &space("P0,X01"),
            &ParameterPath::Transmissivity { nbar: 0.0, range: (0.0, 1.0) },
            1e-3,
            &ClassifyOptions::default(),
        )
        .unwrap();
        assert!((r.critical - 0.7328).abs() < 2e-3, "{r:?}");
        assert!(r.nonclassical_above && r.width <= 1e-3);
    }

    #[test]
    fn no_threshold_when_flat() {
        let r = find_threshold(
            &StateFamily::ZeroOne,
            &space("P0,X01"),
            &ParameterPath::Transmissivity { nbar: 0.0, range: (0.0, 0.5) },
            1e-3,
            &ClassifyOptions::default(),
        );
        assert!(matches!(r, Err(Error::NoThreshold(_))));
    }

    #[test]
    fn region_csv_shape() {
        let s = space("P0,X01");
        let pts = region_map(&StateFamily::ZeroOne, &s, &[0.5, 1.0], &[0.0, 0.2], &ClassifyOptions::default())
            .unwrap();
        let mut buf = Vec::new();
        write_region_csv(&mut buf, &StateFamily::ZeroOne, &s, &pts).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "family,space,T,nbar,margin,verdict");
        assert_eq!(lines.len(), 5);
        assert!(lines[2].ends_with("nonclassical"));
    }
}
