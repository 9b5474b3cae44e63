//! Command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use crate::bound::{
    certificate, certificate_extended, corollary_x0, epsilon_log, log_corollary_bound_at,
    log_lower_bound_at, AxiomParams, BoundCertificate, GrowthCase,
};
use crate::error::{Error, Result};
use crate::harness::{default_grid, verify_consistency, ConsistencyReport, VerifyInput};
use crate::lattice::{
    find_witness, shidlovskii_bound, shidlovskii_witness, SearchBox, DEFAULT_CAP,
};
use crate::pade::{
    fit_axioms, hermite_pade, samples_from_tables, FitOptions, FormTable, SeriesKind, SeriesSystem,
    DEFAULT_MAX_N,
};
use crate::precision::{parse_decimal, Precision};
use crate::quadratic::{ratio_to_f64, FieldSpec, QuadRational};
use crate::tuning::{check_half, schedule, HalfCheck, Schedule};

pub const PRECISION_ENV: &str = "BB_PRECISION";

#[derive(Parser, Debug)]
#[command(
    name = "bakerbound",
    version,
    about = "Explicit lower bounds for linear forms over imaginary quadratic rings"
)]
#[command(args_override_self = true, allow_negative_numbers = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// `key = value` file; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// f64 or extended; BB_PRECISION overrides it.
    #[arg(long, global = true)]
    pub precision: Option<Precision>,
    /// Write the main output here instead of stdout.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// Enumeration cap for exhaustive searches.
    #[arg(long, global = true)]
    pub cap: Option<u128>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ParamArgs {
    /// JSON file with an AxiomParams record (or a fit report containing one).
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Growth case: 1 (constant), 2 (log), 3 (linear).
    #[arg(long)]
    pub case: Option<u8>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub d: Option<f64>,
    #[arg(long)]
    pub b0: Option<f64>,
    #[arg(long)]
    pub b1: Option<f64>,
    #[arg(long)]
    pub b2: Option<f64>,
    #[arg(long)]
    pub b3: Option<f64>,
    #[arg(long)]
    pub e0: Option<f64>,
    #[arg(long)]
    pub e1: Option<f64>,
    #[arg(long)]
    pub e2: Option<f64>,
    #[arg(long)]
    pub e3: Option<f64>,
    #[arg(long = "Nmin")]
    pub n_min: Option<u64>,
}

#[derive(Args, Debug, Clone)]
pub struct SystemArgs {
    /// Built-in series family: geometric, log or exp.
    #[arg(long, default_value = "log")]
    pub system: SeriesKind,
    /// Evaluation point in the basis (1, ω): `x` or `x,y` with decimal or `p/q` entries.
    #[arg(long, value_delimiter = ',', default_value = "1/2")]
    pub z0: Vec<String>,
    #[arg(long = "D", default_value_t = 1)]
    pub field: u64,
}

#[derive(Args, Debug, Clone)]
pub struct CurveArgs {
    /// Smallest combined height H (default: the admissibility threshold).
    #[arg(long)]
    pub h_min: Option<f64>,
    #[arg(long)]
    pub h_max: Option<f64>,
    /// Number of log-spaced points.
    #[arg(long, default_value_t = 20)]
    pub points: usize,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Certificate constants for an axiom parameter set.
    Certificate {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value = "text")]
        format: OutputFormat,
    },
    /// CSV curve H,epsilon,bound.
    EpsilonCurve {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        curve: CurveArgs,
    },
    /// CSV curve H,epsilon,bound,corollary for case 2.
    CorollaryCurve {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long)]
        x0: Option<f64>,
    },
    /// Index schedule for the given heights.
    Schedule {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        heights: Vec<f64>,
    },
    /// Minkowski-type witness over the ring of integers.
    Witness {
        #[arg(long = "D", default_value_t = 1)]
        field: u64,
        /// Θ_j as `x`, `x+yi` or `yi`.
        #[arg(long, value_delimiter = ',', required = true)]
        theta: Vec<String>,
        /// Heights H_j (a single value applies to every j).
        #[arg(long = "H", value_delimiter = ',', required = true)]
        heights: Vec<u64>,
    },
    /// Exhaustive search over rational integer vectors.
    Shidlovskii {
        #[arg(long, value_delimiter = ',', required = true)]
        theta: Vec<String>,
        #[arg(long = "H")]
        height: u64,
    },
    /// Hermite–Padé table for one index vector.
    Pade {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u64>,
        #[arg(long, default_value_t = DEFAULT_MAX_N)]
        max_n: u64,
    },
    /// Fits axiom constants to a table family.
    Fit {
        /// FormTable JSON files; when absent a family is generated from the system flags.
        #[arg(long, value_delimiter = ',')]
        tables: Vec<PathBuf>,
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 30)]
        n_max: u64,
        #[arg(long, default_value_t = 1)]
        case: u8,
        #[arg(long)]
        max_rms: Option<f64>,
    },
    /// Consistency report: theorem bound against the exhaustive oracle.
    Verify {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        system: SystemArgs,
        /// Largest N of the validation family.
        #[arg(long, default_value_t = 30)]
        n_max: u64,
        /// Combined heights H; default G·10^{k/2}, k = 0..6.
        #[arg(long, value_delimiter = ',')]
        grid: Vec<f64>,
        #[arg(long, default_value_t = 1000)]
        height_cap: u64,
        #[arg(long)]
        unbalanced: bool,
        /// Also write the rows as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Usage(format!("config line {}: expected `key = value`", i + 1))
        })?;
        let k = k.trim();
        if k.is_empty() || k.contains(char::is_whitespace) {
            return Err(Error::Usage(format!(
                "config line {}: bad key {k:?}",
                i + 1
            )));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

const SUBCOMMANDS: [&str; 9] = [
    "certificate",
    "epsilon-curve",
    "corollary-curve",
    "schedule",
    "witness",
    "shidlovskii",
    "pade",
    "fit",
    "verify",
];

fn flag_key(tok: &str) -> Option<String> {
    if let Some(rest) = tok.strip_prefix("--") {
        return Some(rest.split('=').next().unwrap_or(rest).to_string());
    }
    if tok.starts_with("-o") {
        return Some("output".into());
    }
    None
}

/// Inserts config entries after the subcommand, skipping keys given on the command line.
fn merge_config(argv: Vec<String>) -> Result<Vec<String>> {
    let mut path = None;
    for (i, t) in argv.iter().enumerate() {
        if t == "--config" {
            path = argv.get(i + 1).cloned();
        } else if let Some(p) = t.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::Usage(format!("cannot read config {path}: {e}")))?;
    let given: Vec<String> = argv.iter().filter_map(|t| flag_key(t)).collect();
    let mut extra = Vec::new();
    for (k, v) in parse_config(&text)? {
        if given.contains(&k) {
            continue;
        }
        match v.as_str() {
            "true" => extra.push(format!("--{k}")),
            "false" => {}
            _ => extra.push(format!(
                "--{k}={}",
                v.split_whitespace().collect::<String>()
            )),
        }
    }
    let Some(pos) = argv.iter().position(|t| SUBCOMMANDS.contains(&t.as_str())) else {
        return Ok(argv);
    };
    let mut out = argv[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[pos + 1..]);
    Ok(out)
}

fn precision(global: &GlobalArgs) -> Result<Precision> {
    match std::env::var(PRECISION_ENV) {
        Ok(v) if !v.trim().is_empty() => v.parse(),
        _ => Ok(global.precision.unwrap_or_default()),
    }
}

fn growth_case(v: u8) -> Result<GrowthCase> {
    match v {
        1 => Ok(GrowthCase::Constant),
        2 => Ok(GrowthCase::Log),
        3 => Ok(GrowthCase::Linear),
        _ => Err(Error::Usage(format!("case must be 1, 2 or 3, got {v}"))),
    }
}

fn load_params_file(path: &Path) -> Result<AxiomParams> {
    let text = fs::read_to_string(path)?;
    let v: serde_json::Value = serde_json::from_str(&text)?;
    let v = v.get("params").cloned().unwrap_or(v);
    Ok(serde_json::from_value(v)?)
}

impl ParamArgs {
    /// Parameters from `--params` and/or the individual flags; flags win.
    pub fn resolve(&self) -> Result<AxiomParams> {
        let mut p = match &self.params {
            Some(path) => load_params_file(path)?,
            None => {
                let case = self
                    .case
                    .ok_or_else(|| Error::Usage("missing --case (or --params)".into()))?;
                let m = self
                    .m
                    .ok_or_else(|| Error::Usage("missing --m (or --params)".into()))?;
                if self.a.is_none() || self.c.is_none() {
                    return Err(Error::Usage("missing --a or --c (or --params)".into()));
                }
                AxiomParams::base(growth_case(case)?, m)
            }
        };
        if let Some(c) = self.case {
            p.case = growth_case(c)?;
        }
        if let Some(m) = self.m {
            p.m = m;
        }
        let slots: [(&Option<f64>, &mut f64); 12] = [
            (&self.a, &mut p.a),
            (&self.b, &mut p.b),
            (&self.c, &mut p.c),
            (&self.d, &mut p.d),
            (&self.b0, &mut p.b0),
            (&self.b1, &mut p.b1),
            (&self.b2, &mut p.b2),
            (&self.b3, &mut p.b3),
            (&self.e0, &mut p.e0),
            (&self.e1, &mut p.e1),
            (&self.e2, &mut p.e2),
            (&self.e3, &mut p.e3),
        ];
        for (src, dst) in slots {
            if let Some(v) = src {
                *dst = *v;
            }
        }
        if let Some(n) = self.n_min {
            p.n_min = n;
        }
        p.validate()?;
        Ok(p)
    }

    fn given(&self) -> bool {
        self.params.is_some() || self.a.is_some() || self.c.is_some()
    }
}

/// Parses `x`, `x+yi`, `x-yi` or `yi` into decimal strings `(re, im)`.
pub fn parse_complex(s: &str) -> Result<(String, String)> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let err = || Error::Parse(format!("not a complex number: {s:?}"));
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        parse_decimal(&t)?;
        return Ok((t, "0".into()));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1".to_string(),
        "-" => "-1".to_string(),
        v => v.strip_prefix('+').unwrap_or(v).to_string(),
    };
    parse_decimal(re).map_err(|_| err())?;
    parse_decimal(&im).map_err(|_| err())?;
    Ok((re.to_string(), im))
}

fn parse_thetas(v: &[String]) -> Result<Vec<(String, String)>> {
    v.iter().map(|s| parse_complex(s)).collect()
}

fn to_complex(p: &[(String, String)]) -> Result<Vec<Complex64>> {
    p.iter()
        .map(|(re, im)| {
            Ok(Complex64::new(
                ratio_to_f64(&parse_decimal(re)?),
                ratio_to_f64(&parse_decimal(im)?),
            ))
        })
        .collect()
}

fn field(d: u64) -> Result<FieldSpec> {
    FieldSpec::new(d)
}

impl SystemArgs {
    fn build(&self, m: usize) -> Result<SeriesSystem> {
        let spec = field(self.field)?;
        let coords: Vec<_> = self
            .z0
            .iter()
            .map(|s| parse_decimal(s))
            .collect::<Result<_>>()?;
        let z0 = match coords.as_slice() {
            [x] => QuadRational::rational(x.clone()),
            [x, y] => QuadRational::new(x.clone(), y.clone()),
            _ => return Err(Error::Usage("--z0 takes one or two coordinates".into())),
        };
        SeriesSystem::new(self.system, m, z0, spec)
    }
}

/// Index family used for fitting: `(n)` for `m = 1`, else `(n,…,n)` and `(n,1,…,1)`.
pub fn fit_family(m: usize, n_max: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    for n in 1..=n_max {
        if m == 1 {
            out.push(vec![n]);
            continue;
        }
        if n * m as u64 <= n_max {
            out.push(vec![n; m]);
        }
        if n > 1 && n + m as u64 - 1 <= n_max {
            let mut v = vec![1; m];
            v[0] = n;
            out.push(v);
        }
    }
    out
}

/// Generates the family in parallel.
pub fn generate_tables(
    sys: &SeriesSystem,
    family: &[Vec<u64>],
    max_n: u64,
) -> Result<Vec<FormTable>> {
    use rayon::prelude::*;
    family
        .par_iter()
        .map(|n| hermite_pade(sys, n, max_n))
        .collect()
}

fn fmt_f(v: f64) -> String {
    format!("{v:e}")
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points <= 1 || hi <= lo {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

fn curve_range(cert: &BoundCertificate, curve: &CurveArgs, floor_log: f64) -> Result<Vec<f64>> {
    let lo = curve.h_min.unwrap_or_else(|| floor_log.exp());
    if !(lo > 0.0) || lo.ln() < floor_log * (1.0 - 1e-15) {
        return Err(Error::Domain(format!(
            "h-min = {lo} lies below the admissible range H >= {} (log G = {})",
            floor_log.exp(),
            cert.log_g
        )));
    }
    let hi = curve.h_max.unwrap_or(lo * 1e6);
    if hi < lo {
        return Err(Error::Usage(format!("h-max = {hi} is below h-min = {lo}")));
    }
    Ok(log_grid(lo, hi, curve.points))
}

/// One row of an epsilon curve, recomputable from `H` alone.
pub fn curve_row(cert: &BoundCertificate, h: f64) -> Result<(f64, f64)> {
    let eps = epsilon_log(cert, h.ln())?;
    let bound = log_lower_bound_at(cert, h.ln())?.exp();
    Ok((eps, bound))
}

fn csv_string(header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn certificate_text(cert: &BoundCertificate, prec: Precision) -> Result<String> {
    let p = &cert.params;
    let l = p.case.index();
    let mut s = format!("case = {l}\nm = {}\n", p.m);
    s += &format!(
        "S_root = {}\n",
        cert.s_root.map_or("none".to_string(), |v| v.to_string())
    );
    let rename = |name: &str| match name {
        "G" => format!("G_{l}"),
        "F" => format!("F_{l}"),
        "x" => format!("x_{l}"),
        "log_G" => format!("log_G_{l}"),
        "log_F" => format!("log_F_{l}"),
        other => other.to_string(),
    };
    match prec {
        Precision::F64 => {
            let v = crate::bound::CertificateValues {
                f: cert.f,
                exponent: cert.exponent,
                x: cert.x,
                log_g: cert.log_g,
                leading: cert.leading,
                log_leading: cert.log_leading,
                constants: cert.constants,
            };
            for (k, x) in v.named() {
                s += &format!("{} = {x}\n", rename(k));
            }
        }
        Precision::Extended => {
            for (k, x) in certificate_extended(p)?.named() {
                s += &format!("{} = {}\n", rename(k), x.to_sig_string(30));
            }
        }
    }
    Ok(s)
}

#[derive(Serialize)]
struct CertificateJson<'a> {
    #[serde(flatten)]
    cert: &'a BoundCertificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    extended: Option<Vec<(String, String)>>,
}

#[derive(Serialize)]
struct ScheduleJson {
    #[serde(flatten)]
    schedule: Schedule,
    index: Vec<u64>,
    half: HalfCheck,
}

fn emit(global: &GlobalArgs, text: &str, out: &mut dyn Write) -> Result<()> {
    match &global.output {
        Some(path) => fs::write(path, text)?,
        None => {
            out.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                out.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn verify_csv(rep: &ConsistencyReport) -> Result<String> {
    let rows = rep
        .rows
        .iter()
        .map(|r| {
            let opt = |v: Option<f64>| v.map(fmt_f).unwrap_or_default();
            vec![
                fmt_f(r.target_h),
                r.heights
                    .iter()
                    .map(|h| h.to_string())
                    .collect::<Vec<_>>()
                    .join(";"),
                fmt_f(r.log_h),
                format!("{:?}", r.status).to_lowercase(),
                opt(r.bound),
                opt(r.oracle),
                opt(r.margin),
                r.schedule
                    .as_ref()
                    .map(|s| fmt_f(s.s_total))
                    .unwrap_or_default(),
                r.schedule
                    .as_ref()
                    .map(|s| s.n_used.to_string())
                    .unwrap_or_default(),
                r.schedule
                    .as_ref()
                    .map(|s| fmt_f(s.half_sum))
                    .unwrap_or_default(),
                r.note.clone().unwrap_or_default(),
            ]
        })
        .collect();
    csv_string(
        &[
            "H", "heights", "log_H", "status", "bound", "oracle", "margin", "S", "N", "half_sum",
            "note",
        ],
        rows,
    )
}

/// Runs one invocation; `argv[0]` is the program name.
pub fn run(argv: Vec<String>, out: &mut dyn Write) -> Result<()> {
    let argv = merge_config(argv)?;
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            write!(out, "{e}")?;
            return Ok(());
        }
        Err(e) => {
            let msg = e.to_string();
            return Err(Error::Usage(
                msg.trim_start_matches("error: ").trim_end().to_string(),
            ));
        }
    };
    let g = &cli.global;
    let prec = precision(g)?;
    let cap = g.cap.unwrap_or(DEFAULT_CAP);
    match &cli.command {
        Command::Certificate { params, format } => {
            let cert = certificate(&params.resolve()?)?;
            let text = match format {
                OutputFormat::Text => certificate_text(&cert, prec)?,
                OutputFormat::Json => {
                    let extended = match prec {
                        Precision::F64 => None,
                        Precision::Extended => Some(
                            certificate_extended(&cert.params)?
                                .named()
                                .into_iter()
                                .map(|(k, v)| (k.to_string(), v.to_sig_string(30)))
                                .collect(),
                        ),
                    };
                    serde_json::to_string_pretty(&CertificateJson {
                        cert: &cert,
                        extended,
                    })?
                }
            };
            emit(g, &text, out)
        }
        Command::EpsilonCurve { params, curve } => {
            let cert = certificate(&params.resolve()?)?;
            let mut rows = Vec::new();
            for h in curve_range(&cert, curve, cert.log_g)? {
                let (eps, bound) = curve_row(&cert, h)?;
                rows.push(vec![fmt_f(h), fmt_f(eps), fmt_f(bound)]);
            }
            emit(g, &csv_string(&["H", "epsilon", "bound"], rows)?, out)
        }
        Command::CorollaryCurve { params, curve, x0 } => {
            let p = params.resolve()?;
            if p.case != GrowthCase::Log {
                return Err(Error::Domain("the corollary curve needs case 2".into()));
            }
            let cert = certificate(&p)?;
            let x0 = x0.unwrap_or_else(|| corollary_x0(&cert));
            let floor = cert.log_g.max(x0 / cert.f);
            let mut rows = Vec::new();
            for h in curve_range(&cert, curve, floor)? {
                let (eps, bound) = curve_row(&cert, h)?;
                let cor = log_corollary_bound_at(&cert, h.ln(), x0)?.exp();
                rows.push(vec![fmt_f(h), fmt_f(eps), fmt_f(bound), fmt_f(cor)]);
            }
            emit(
                g,
                &csv_string(&["H", "epsilon", "bound", "corollary"], rows)?,
                out,
            )
        }
        Command::Schedule { params, heights } => {
            let p = params.resolve()?;
            let s = schedule(&p, heights)?;
            let half = check_half(&p, heights, &s);
            let index = s.sigma.iter().map(|v| v + 1).collect();
            emit(
                g,
                &serde_json::to_string_pretty(&ScheduleJson {
                    schedule: s,
                    index,
                    half,
                })?,
                out,
            )
        }
        Command::Witness {
            field: d,
            theta,
            heights,
        } => {
            let th = parse_thetas(theta)?;
            let hs = if heights.len() == 1 {
                vec![heights[0]; th.len()]
            } else {
                heights.clone()
            };
            let sb = SearchBox::from_decimals(&th, hs, field(*d)?)?;
            let w = find_witness(&sb, cap, prec)?;
            emit(g, &serde_json::to_string_pretty(&w)?, out)
        }
        Command::Shidlovskii { theta, height } => {
            let th = to_complex(&parse_thetas(theta)?)?;
            let w = shidlovskii_witness(&th, *height, cap)?;
            if w.value > shidlovskii_bound(&th, *height) {
                return Err(Error::VerificationFailed(format!(
                    "value {} exceeds the guaranteed bound {}",
                    w.value,
                    shidlovskii_bound(&th, *height)
                )));
            }
            emit(g, &serde_json::to_string_pretty(&w)?, out)
        }
        Command::Pade {
            system,
            m,
            n,
            max_n,
        } => {
            let sys = system.build(*m)?;
            let t = hermite_pade(&sys, n, *max_n)?;
            emit(g, &t.to_json()?, out)
        }
        Command::Fit {
            tables,
            system,
            m,
            n_max,
            case,
            max_rms,
        } => {
            let tabs = if tables.is_empty() {
                let sys = system.build(*m)?;
                generate_tables(&sys, &fit_family(*m, *n_max), (*n_max).max(DEFAULT_MAX_N))?
            } else {
                tables
                    .iter()
                    .map(|p| FormTable::from_json(&fs::read_to_string(p)?))
                    .collect::<Result<Vec<_>>>()?
            };
            let mut opts = FitOptions::new(growth_case(*case)?);
            if let Some(r) = max_rms {
                opts.max_rms = *r;
            }
            let rep = fit_axioms(&samples_from_tables(&tabs), &opts)?;
            emit(g, &serde_json::to_string_pretty(&rep)?, out)
        }
        Command::Verify {
            params,
            system,
            n_max,
            grid,
            height_cap,
            unbalanced,
            csv,
        } => {
            let m = params.m.unwrap_or(1) as usize;
            let sys = system.build(m)?;
            let tables =
                generate_tables(&sys, &fit_family(m, *n_max), (*n_max).max(DEFAULT_MAX_N))?;
            let p = if params.given() {
                params.resolve()?
            } else {
                let case = growth_case(params.case.unwrap_or(1))?;
                fit_axioms(&samples_from_tables(&tables), &FitOptions::new(case))?.params
            };
            let cert = certificate(&p)?;
            let grid = if grid.is_empty() {
                default_grid(&cert)
            } else {
                grid.clone()
            };
            let theta = (1..=m as u64).map(|j| sys.theta(j)).collect();
            let input = VerifyInput {
                params: p,
                spec: sys.spec,
                theta,
                tables: &tables,
                system: Some(&sys),
                grid,
                height_cap: *height_cap,
                unbalanced: *unbalanced,
                enum_cap: cap,
                precision: prec,
                max_n: DEFAULT_MAX_N,
            };
            let rep = verify_consistency(&input)?;
            if let Some(path) = csv {
                fs::write(path, verify_csv(&rep)?)?;
            }
            emit(g, &serde_json::to_string_pretty(&rep)?, out)?;
            if !rep.ok() {
                return Err(Error::VerificationFailed(format!(
                    "{} row(s) with the bound above the oracle minimum",
                    rep.failed
                )));
            }
            Ok(())
        }
    }
}
