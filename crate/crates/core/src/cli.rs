//! The `cohwit` command-line front end.
//!
//! Exit codes: 0 classical-compatible (or success), 10 nonclassical,
//! 11 inconsistent with quantum mechanics, 2 usage or parse error,
//! 1 any other failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::certify::{
    classify, classify_family_point, find_threshold, linspace, region_map, write_region_csv, ClassifyOptions,
    ParameterPath, RegionPoint, Verdict,
};
use crate::channels::StateFamily;
use crate::error::{Error, Result};
use crate::fock::{coherent_point, CoherentParams, ExpectationVector, ObservableId, ObservableSpace};
use crate::hull::{
    classical_coherence_bound, classical_shape, known_boundaries, numeric_envelope, ClassicalShape, MU_GRID_MAX,
};
use crate::support::{support_classical, support_quantum, CertifyOptions, Direction, SupportArgmax, SupportOptions};

pub const EXIT_CLASSICAL: i32 = 0;
pub const EXIT_NONCLASSICAL: i32 = 10;
pub const EXIT_INCONSISTENT: i32 = 11;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FAILURE: i32 = 1;

/// Environment variable holding the default Fock truncation of the quantum set.
pub const TRUNCATION_ENV: &str = "COHWIT_TRUNCATION";

#[derive(Debug, Parser)]
#[command(name = "cohwit", version, about = "Certify bosonic nonclassicality from Fock-basis expectation values")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the classical bound of a space (optionally at a fixed coordinate).
    Bound(BoundArgs),
    /// Classify measured expectation values.
    Certify(CertifyArgs),
    /// Evaluate the classical and quantum support functions.
    Support(SupportArgs),
    /// Margin grid over transmissivity and thermal occupation.
    Sweep(SweepArgs),
    /// Export the coherent curve or a family's attenuation trajectory.
    Curve(CurveArgs),
    /// Locate the classical/nonclassical transition of a family.
    Threshold(ThresholdArgs),
}

#[derive(Debug, Args)]
pub struct Tolerances {
    /// Minimum margin of an accepted certificate.
    #[arg(long, default_value_t = 1e-6)]
    pub tol_margin: f64,
    /// Distance from the quantum set above which data are inconsistent.
    #[arg(long, default_value_t = 1e-7)]
    pub tol_quantum: f64,
    /// Fock truncation of the quantum set (default: $COHWIT_TRUNCATION or max index + 2).
    #[arg(long)]
    pub truncation: Option<usize>,
    /// Samples of the mean-photon-number grid of the classical support function.
    #[arg(long, default_value_t = 240)]
    pub mu_samples: usize,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long)]
    pub space: String,
    /// Fix one coordinate, e.g. `P0=0.2`.
    #[arg(long)]
    pub at: Option<String>,
    /// Sample the boundary into a .csv or .json file.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub space: Option<String>,
    /// Comma-separated values in the order of the space.
    #[arg(long, allow_hyphen_values = true)]
    pub values: Option<String>,
    /// JSON file `{"space": "...", "values": [...]}`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Also write the result JSON here.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub tol: Tolerances,
}

#[derive(Debug, Args)]
pub struct SupportArgs {
    #[arg(long)]
    pub space: String,
    #[arg(long, allow_hyphen_values = true)]
    pub direction: String,
    #[command(flatten)]
    pub tol: Tolerances,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub space: String,
    /// `lo:hi`
    #[arg(long, default_value = "0:1")]
    pub t_range: String,
    /// `lo:hi`
    #[arg(long, default_value = "0:1")]
    pub nbar_range: String,
    /// Points per axis (`N` or `NTxNN`).
    #[arg(long, default_value = "101")]
    pub grid: String,
    /// .csv or .json; CSV to stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub tol: Tolerances,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// A state family, or `coherent`.
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub space: String,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// Thermal occupation along a family trajectory.
    #[arg(long, default_value_t = 0.0)]
    pub nbar: f64,
    /// Phase of the coherent curve.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi: f64,
    /// Largest mean photon number of the coherent curve.
    #[arg(long, default_value_t = 10.0)]
    pub mu_max: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub tol: Tolerances,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Vary {
    T,
    Nbar,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub space: String,
    #[arg(long, value_enum, default_value_t = Vary::T)]
    pub vary: Vary,
    /// Fixed thermal occupation when varying T.
    #[arg(long, default_value_t = 0.0)]
    pub nbar: f64,
    /// Fixed transmissivity when varying nbar.
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// `lo:hi` (default 0:1).
    #[arg(long, default_value = "0:1")]
    pub range: String,
    #[arg(long, default_value_t = 1e-3)]
    pub resolution: f64,
    #[command(flatten)]
    pub tol: Tolerances,
}

fn parse_space(s: &str) -> Result<ObservableSpace> {
    s.parse()
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("'{t}' is not a number"))))
        .collect()
}

fn parse_range(s: &str) -> Result<(f64, f64)> {
    let (a, b) = s.split_once(':').ok_or_else(|| Error::Parse(format!("expected lo:hi, got '{s}'")))?;
    let p = |t: &str| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("'{t}' is not a number")));
    let (a, b) = (p(a)?, p(b)?);
    if !(b >= a) {
        return Err(Error::Parse(format!("range '{s}' is decreasing")));
    }
    Ok((a, b))
}

fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let p = |t: &str| t.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad grid size '{t}'")));
    match s.split_once(['x', 'X']) {
        Some((a, b)) => Ok((p(a)?, p(b)?)),
        None => {
            let n = p(s)?;
            Ok((n, n))
        }
    }
}

fn env_truncation() -> Result<Option<usize>> {
    match std::env::var(TRUNCATION_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Parse(format!("{TRUNCATION_ENV}='{v}' is not a positive integer"))),
        Err(_) => Ok(None),
    }
}

fn classify_options(tol: &Tolerances) -> Result<ClassifyOptions> {
    let quantum_dim = match tol.truncation {
        Some(d) => Some(d),
        None => env_truncation()?,
    };
    Ok(ClassifyOptions {
        certify: CertifyOptions {
            support: SupportOptions { mu_samples: tol.mu_samples, ..Default::default() },
            tol_margin: tol.tol_margin,
            tol_quantum: tol.tol_quantum,
            quantum_dim,
            ..Default::default()
        },
        assume_quantum: false,
    })
}

enum Format {
    Csv,
    Json,
}

fn format_of(path: &Path) -> Result<Format> {
    match path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()) {
        Some(e) if e == "csv" => Ok(Format::Csv),
        Some(e) if e == "json" => Ok(Format::Json),
        _ => Err(Error::Parse(format!("cannot infer the output format of {}; use .csv or .json", path.display()))),
    }
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).map_err(|e| Error::Configuration(format!("writing {}: {e}", path.display())))
}

/// Rows of a table to CSV text or a JSON array of objects.
fn render_table(header: &[String], rows: &[Vec<String>], fmt: Format) -> Result<String> {
    match fmt {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let err = |e: csv::Error| Error::Configuration(format!("CSV: {e}"));
            w.write_record(header).map_err(err)?;
            for r in rows {
                w.write_record(r).map_err(err)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Configuration(format!("CSV: {e}")))?;
            Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
        }
        Format::Json => {
            let arr: Vec<Value> = rows
                .iter()
                .map(|r| {
                    let obj: serde_json::Map<String, Value> = header
                        .iter()
                        .zip(r)
                        .map(|(h, v)| {
                            let val = v.parse::<f64>().ok().and_then(|f| serde_json::Number::from_f64(f));
                            (h.clone(), val.map(Value::Number).unwrap_or_else(|| Value::String(v.clone())))
                        })
                        .collect();
                    Value::Object(obj)
                })
                .collect();
            Ok(serde_json::to_string_pretty(&arr).expect("serializable"))
        }
    }
}

fn emit(output: Option<&Path>, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    match output {
        Some(p) => write_file(p, &render_table(header, rows, format_of(p)?)?),
        None => {
            print!("{}", render_table(header, rows, Format::Csv)?);
            Ok(())
        }
    }
}

const RECOGNIZED: &str = "single coherences (X_jk, Y_jk, R_jk@theta), single projectors P_j, \
(X_jk,Y_jk), (P0,X01), (P0,X02), (P0,P1), pairs of projectors (P_i,P_j), and (P_j,X_jk)";

fn cmd_bound(a: &BoundArgs) -> Result<i32> {
    let space = parse_space(&a.space)?;
    let obs = space.observables();
    let shape = classical_shape(&space);

    if let Some(at) = &a.at {
        let (name, val) = at.split_once('=').ok_or_else(|| Error::Parse(format!("expected OBS=value, got '{at}'")))?;
        let fixed: ObservableId = name.trim().parse()?;
        let v: f64 = val.trim().parse().map_err(|_| Error::Parse(format!("'{val}' is not a number")))?;
        let fi = space
            .position(&fixed)
            .ok_or_else(|| Error::Parse(format!("{fixed} is not part of ({space})")))?;
        if space.len() != 2 {
            return Err(Error::UnsupportedSpace("--at needs a two-observable space".into()));
        }
        let other = obs[1 - fi];
        let bound = bound_at(&space, shape, fixed, other, v)?;
        println!("{bound:.6}");
        return Ok(EXIT_CLASSICAL);
    }

    match obs {
        [o] if o.is_coherence() => {
            let (j, k) = o.levels();
            println!("{:.6}", classical_coherence_bound(j, k)?);
        }
        [ObservableId::Projector(j)] => {
            let max = if *j == 0 { 1.0 } else { crate::fock::poisson_prob(*j, *j as f64)? };
            println!("{max:.6}");
        }
        [ObservableId::CoherX(j, k), ObservableId::CoherY(..)] | [ObservableId::CoherY(j, k), ObservableId::CoherX(..)]
            if shape.is_some() =>
        {
            println!("{:.6}", classical_coherence_bound(*j, *k)?);
        }
        [_, _] if shape.is_some() || envelope_pair(&space).is_some() => {
            for b in known_boundaries(&space) {
                println!("{b}");
            }
            if let Some(out) = &a.output {
                export_boundary(&space, shape, a.samples.max(2), out)?;
            }
        }
        _ => {
            return Err(Error::UnsupportedSpace(format!(
                "no boundary is known for ({space}); recognized spaces: {RECOGNIZED}"
            )))
        }
    }
    Ok(EXIT_CLASSICAL)
}

/// `(pivot level, bound level, bound is a coherence)` for envelope-based pairs.
fn envelope_pair(space: &ObservableSpace) -> Option<(usize, usize, bool)> {
    use ObservableId::*;
    match space.observables() {
        [Projector(i), Projector(j)] if i != j => Some((*i, *j, false)),
        [Projector(i), c] if matches!(c, CoherX(..)) => {
            let (a, b) = c.levels();
            if *i == a {
                Some((a, b, true))
            } else if *i == b {
                Some((b, a, true))
            } else {
                None
            }
        }
        _ => None,
    }
}

fn bound_at(
    space: &ObservableSpace,
    shape: Option<ClassicalShape>,
    fixed: ObservableId,
    other: ObservableId,
    v: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Domain(format!("{fixed}={v} is not a probability")));
    }
    match shape {
        Some(ClassicalShape::P0Coherence01 { .. }) | Some(ClassicalShape::P0Coherence02 { .. })
        | Some(ClassicalShape::P0P1 { .. })
            if fixed == ObservableId::Projector(0) =>
        {
            let xlx = if v > 0.0 { -v * v.ln() } else { 0.0 };
            Ok(match shape.expect("matched") {
                ClassicalShape::P0Coherence01 { .. } => {
                    if v > 0.0 && v < 1.0 {
                        2.0 * v * (-v.ln()).sqrt()
                    } else {
                        0.0
                    }
                }
                ClassicalShape::P0Coherence02 { .. } => std::f64::consts::SQRT_2 * xlx,
                _ => xlx,
            })
        }
        _ => {
            let ObservableId::Projector(i) = fixed else {
                return Err(Error::UnsupportedSpace("--at must fix a projector".into()));
            };
            let env_target = match other {
                ObservableId::Projector(j) => (j, false),
                ObservableId::CoherX(a, b) if a == i => (b, true),
                ObservableId::CoherX(a, b) if b == i => (a, true),
                _ => return Err(Error::UnsupportedSpace(format!("no classical bound for ({space}) at {fixed}"))),
            };
            let env = numeric_envelope(i, env_target.0, 512)?;
            let r = if env_target.1 { env.x_bound(v) } else { env.max_at(v) };
            r.ok_or_else(|| Error::Domain(format!("no classical state has {fixed}={v}")))
        }
    }
}

fn export_boundary(space: &ObservableSpace, shape: Option<ClassicalShape>, n: usize, out: &Path) -> Result<()> {
    let obs = space.observables();
    let header: Vec<String> = vec![obs[0].to_string(), obs[1].to_string()];
    let mut rows = Vec::new();
    match (shape, envelope_pair(space)) {
        (Some(ClassicalShape::Disk { j, k }), _) => {
            let b = classical_coherence_bound(j, k)?;
            for i in 0..n {
                let a = std::f64::consts::TAU * i as f64 / (n - 1) as f64;
                rows.push(vec![format!("{:.12}", b * a.cos()), format!("{:.12}", b * a.sin())]);
            }
        }
        (Some(s), _) => {
            let pi = obs.iter().position(|o| *o == ObservableId::Projector(0)).unwrap_or(0);
            for i in 0..n {
                let p0 = i as f64 / (n - 1) as f64;
                let mut x = [0.0; 2];
                x[pi] = p0;
                let b = match s {
                    ClassicalShape::P0P1 { .. } => {
                        if p0 > 0.0 {
                            -p0 * p0.ln()
                        } else {
                            0.0
                        }
                    }
                    _ => s.slack(&x).max(0.0),
                };
                let mut row = vec![String::new(), String::new()];
                row[pi] = format!("{p0:.12}");
                row[1 - pi] = format!("{b:.12}");
                rows.push(row);
            }
        }
        (None, Some((i, j, coh))) => {
            let env = numeric_envelope(i, j, n.max(64))?;
            for &(p, _, hi) in &env.table {
                let b = if coh { 2.0 * (p * hi).sqrt() } else { hi };
                rows.push(vec![format!("{p:.12}"), format!("{b:.12}")]);
            }
        }
        _ => return Err(Error::UnsupportedSpace(format!("no sampled boundary for ({space})"))),
    }
    write_file(out, &render_table(&header, &rows, format_of(out)?)?)
}

#[derive(serde::Deserialize)]
struct CertifyInput {
    space: Option<String>,
    values: Vec<f64>,
}

fn cmd_certify(a: &CertifyArgs) -> Result<i32> {
    let (space_str, values) = match (&a.input, &a.values) {
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("reading {}: {e}", path.display())))?;
            let inp: CertifyInput =
                serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            let sp = a.space.clone().or(inp.space).ok_or_else(|| Error::Parse("no space given".into()))?;
            (sp, inp.values)
        }
        (None, Some(v)) => {
            let sp = a.space.clone().ok_or_else(|| Error::Parse("--space is required with --values".into()))?;
            (sp, parse_list(v)?)
        }
        _ => return Err(Error::Parse("give exactly one of --values or --input".into())),
    };
    let space = parse_space(&space_str)?;
    let x = ExpectationVector::measured(space.clone(), values).map_err(|e| Error::Parse(e.to_string()))?;
    let c = classify(&space, &x, &classify_options(&a.tol)?)?;
    let (direction, h) = match &c.verdict {
        Verdict::Nonclassical(cert) => (json!(cert.direction.components()), json!(cert.h_classical)),
        _ => (Value::Null, Value::Null),
    };
    let distance = match c.verdict {
        Verdict::InconsistentWithQuantum { distance } if distance.is_finite() => json!(distance),
        _ => Value::Null,
    };
    let doc = json!({
        "space": space.to_string(),
        "values": x.values(),
        "verdict": c.verdict.label(),
        "margin": c.margin,
        "direction": direction,
        "h_classical": h,
        "criterion": c.criterion,
        "quantum_distance": distance,
    });
    let text = serde_json::to_string_pretty(&doc).expect("serializable");
    match &a.output {
        Some(p) => write_file(p, &text)?,
        None => println!("{text}"),
    }
    Ok(match c.verdict {
        Verdict::Nonclassical(_) => EXIT_NONCLASSICAL,
        Verdict::ClassicalCompatible => EXIT_CLASSICAL,
        Verdict::InconsistentWithQuantum { .. } => EXIT_INCONSISTENT,
    })
}

fn cmd_support(a: &SupportArgs) -> Result<i32> {
    let space = parse_space(&a.space)?;
    let n = Direction::new(&space, parse_list(&a.direction)?)?;
    let opts = classify_options(&a.tol)?;
    let hc = support_classical(&space, &n, &opts.certify.support)?;
    let dim = opts.certify.quantum_dim.unwrap_or_else(|| space.default_dim());
    let hq = support_quantum(&space, &n, dim)?;
    let argmax = match hc.argmax {
        SupportArgmax::Coherent(p) => json!({"mu": p.mu, "phi": p.phi}),
        _ => json!("infinity"),
    };
    let doc = json!({
        "space": space.to_string(),
        "direction": n.components(),
        "h_classical": hc.value,
        "classical_argmax": argmax,
        "classical_converged": hc.converged,
        "h_quantum": hq.value,
        "quantum_truncation": dim,
    });
    println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
    Ok(EXIT_CLASSICAL)
}

fn region_rows(points: &[RegionPoint]) -> Vec<Vec<String>> {
    points
        .iter()
        .map(|p| {
            let (m, v) = match &p.outcome {
                Ok((m, v)) => (format!("{m:.9e}"), v.to_string()),
                Err(e) => ("NaN".into(), format!("error: {e}")),
            };
            vec![format!("{:.6}", p.transmissivity), format!("{:.6}", p.nbar), m, v]
        })
        .collect()
}

fn cmd_sweep(a: &SweepArgs) -> Result<i32> {
    let family: StateFamily = a.family.parse()?;
    let space = parse_space(&a.space)?;
    let (t0, t1) = parse_range(&a.t_range)?;
    let (n0, n1) = parse_range(&a.nbar_range)?;
    let (nt, nn) = parse_grid(&a.grid)?;
    let tg = linspace(t0, t1, nt);
    let ng = linspace(n0, n1, nn);
    let pts = region_map(&family, &space, &tg, &ng, &classify_options(&a.tol)?)?;
    match &a.output {
        Some(p) => match format_of(p)? {
            Format::Csv => {
                let f = fs::File::create(p)
                    .map_err(|e| Error::Configuration(format!("creating {}: {e}", p.display())))?;
                write_region_csv(std::io::BufWriter::new(f), &family, &space, &pts)?;
            }
            Format::Json => {
                let header: Vec<String> = ["T", "nbar", "margin", "verdict"].map(String::from).to_vec();
                let rows = render_table(&header, &region_rows(&pts), Format::Json)?;
                let points: Value = serde_json::from_str(&rows).expect("rendered table is JSON");
                let doc = json!({ "family": family.name(), "space": space.to_string(), "points": points });
                write_file(p, &(serde_json::to_string_pretty(&doc).expect("serializable") + "\n"))?;
            }
        },
        None => write_region_csv(std::io::stdout().lock(), &family, &space, &pts)?,
    }
    Ok(EXIT_CLASSICAL)
}

fn cmd_curve(a: &CurveArgs) -> Result<i32> {
    let space = parse_space(&a.space)?;
    let opts = classify_options(&a.tol)?;
    let n = a.samples.max(2);
    let mut header: Vec<String> = Vec::new();
    let mut rows = Vec::new();
    let obs_cols = space.iter().map(|o| o.to_string());
    if a.family.eq_ignore_ascii_case("coherent") {
        if !(a.mu_max > 0.0 && a.mu_max <= MU_GRID_MAX) {
            return Err(Error::Parse(format!("--mu-max must lie in (0, {MU_GRID_MAX}]")));
        }
        header.push("mu".into());
        header.extend(obs_cols);
        header.extend(["margin".into(), "verdict".into()]);
        for i in 0..n {
            let mu = a.mu_max * i as f64 / (n - 1) as f64;
            let x = coherent_point(&space, &CoherentParams::new(mu, a.phi)?);
            let ev = ExpectationVector::measured(space.clone(), x.clone())?;
            let c = classify(&space, &ev, &ClassifyOptions { assume_quantum: true, ..opts })?;
            let mut row = vec![format!("{mu:.9}")];
            row.extend(x.iter().map(|v| format!("{v:.12}")));
            row.extend([format!("{:.9e}", c.margin), c.verdict.label().to_string()]);
            rows.push(row);
        }
    } else {
        let family: StateFamily = a.family.parse()?;
        header.push("T".into());
        header.extend(obs_cols);
        header.extend(["margin".into(), "verdict".into()]);
        for i in 0..n {
            let t = i as f64 / (n - 1) as f64;
            let bs = crate::channels::BeamsplitterParams::new(t, 0.0)?;
            let rho = crate::channels::prepare_state(&family, &bs, a.nbar)?;
            let rho = rho.resized(rho.dim().max(space.default_dim()));
            let x = crate::fock::expectations(&rho, &space)?;
            let c = classify_family_point(&family, &space, t, a.nbar, &opts)?;
            let mut row = vec![format!("{t:.9}")];
            row.extend(x.values().iter().map(|v| format!("{v:.12}")));
            row.extend([format!("{:.9e}", c.margin), c.verdict.label().to_string()]);
            rows.push(row);
        }
    }
    emit(a.output.as_deref(), &header, &rows)?;
    Ok(EXIT_CLASSICAL)
}

fn cmd_threshold(a: &ThresholdArgs) -> Result<i32> {
    let family: StateFamily = a.family.parse()?;
    let space = parse_space(&a.space)?;
    let range = parse_range(&a.range)?;
    let path = match a.vary {
        Vary::T => ParameterPath::Transmissivity { nbar: a.nbar, range },
        Vary::Nbar => ParameterPath::Thermal { transmissivity: a.t, range },
    };
    let r = find_threshold(&family, &space, &path, a.resolution, &classify_options(&a.tol)?)?;
    println!("{}", serde_json::to_string_pretty(&r).expect("serializable"));
    Ok(EXIT_CLASSICAL)
}

/// Runs a parsed command and returns its exit code.
pub fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Bound(a) => cmd_bound(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Support(a) => cmd_support(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Curve(a) => cmd_curve(a),
        Command::Threshold(a) => cmd_threshold(a),
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_)
        | Error::Domain(_)
        | Error::Configuration(_)
        | Error::UnsupportedSpace(_)
        | Error::Index { .. }
        | Error::Normalization(_) => EXIT_USAGE,
        Error::InconsistentData { .. } => EXIT_INCONSISTENT,
        _ => EXIT_FAILURE,
    }
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
