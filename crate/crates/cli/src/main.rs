mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use littlewood_core::asymptotics::OscillationSpec;
use littlewood_core::enumsearch::{min_roots_dual, DEFAULT_BUDGET};
use littlewood_core::*;
use num_complex::Complex64;
use output::{atomic_write, checksum, to_csv, Format, RunManifest};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::fmt::{Debug, Display};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(
    name = "littlewood",
    version,
    about = "Unimodular roots of reciprocal Littlewood polynomials"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Serialize)]
struct Global {
    /// Results directory.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Numerical tolerance where one applies.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Conv {
    Mult,
    Distinct,
}

impl From<Conv> for Convention {
    fn from(c: Conv) -> Self {
        match c {
            Conv::Mult => Convention::WithMultiplicity,
            Conv::Distinct => Convention::Distinct,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Family {
    G,
    H,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Unimodular root census of a sign string.
    Count {
        #[arg(allow_hyphen_values = true)]
        signs: String,
    },
    /// Exhaustive minimum root count for one degree or a range.
    Search {
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        to: Option<usize>,
        #[arg(long, value_enum, default_value_t = Conv::Mult)]
        convention: Conv,
    },
    /// Average root count with multiplicity, exact or sampled.
    Avg {
        #[arg(long)]
        degree: usize,
        /// Sample size; exhaustive when absent.
        #[arg(long)]
        sample: Option<usize>,
    },
    /// Persisted Z_L table for N = 1..to.
    Table {
        #[arg(long)]
        to: usize,
        #[arg(long, value_enum, default_value_t = Conv::Mult)]
        convention: Conv,
    },
    /// Periodic block structure of Q built from a sign string.
    #[command(group(clap::ArgGroup::new("mode").required(true).args(["period", "scan"])))]
    Structure {
        #[arg(allow_hyphen_values = true)]
        signs: String,
        #[arg(long)]
        period: Option<usize>,
        #[arg(long)]
        scan: Option<usize>,
        #[arg(long)]
        aligned: bool,
    },
    /// Spectral factor of a nonnegative trigonometric polynomial.
    Factor {
        #[arg(long)]
        coeffs: PathBuf,
    },
    /// Oscillation count of f_N between ±cN.
    Oscillate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long = "N")]
        n: u64,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        window: f64,
    },
    /// Empirical and predicted moments of H(θ + m).
    Weyl {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long)]
        n: u64,
    },
    /// Odd-degree identity and κ-gap tools.
    Oddcase {
        #[command(subcommand)]
        action: OddAction,
    },
    /// Brute-force κ over short sine polynomials.
    ProbeKappa {
        #[arg(long)]
        k: usize,
        #[arg(long = "M")]
        m: u32,
        #[arg(long, default_value_t = 4096)]
        res: usize,
    },
    /// The explicit families g_N and h_m.
    Families {
        #[arg(value_enum)]
        family: Family,
        #[arg(long)]
        index: usize,
        #[arg(long)]
        count_roots: bool,
        /// Also report grid sign changes at this resolution.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Reduced invariant suite.
    Selftest,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum OddAction {
    /// Both sides of the second-derivative identity, per group.
    Identity {
        #[arg(long = "D")]
        d: usize,
        #[arg(long, allow_hyphen_values = true)]
        eps: String,
        /// Comma-separated `m:p` pairs.
        #[arg(long)]
        terms: String,
    },
    /// κ-gap search from a JSON spec.
    Kappa {
        #[arg(long)]
        spec: PathBuf,
    },
}

#[derive(Debug)]
enum CliError {
    Domain { kind: String, message: String },
    Io(String),
}

fn domain<E: Debug + Display>(e: E) -> CliError {
    let dbg = format!("{e:?}");
    let kind = dbg
        .split(|c: char| !c.is_alphanumeric() && c != '_')
        .next()
        .unwrap_or("Error")
        .to_string();
    CliError::Domain {
        kind,
        message: e.to_string(),
    }
}

fn io_err<E: Display>(e: E) -> CliError {
    CliError::Io(e.to_string())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| io_err(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Domain {
        kind: "ParseError".into(),
        message: e.to_string(),
    })
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, CliError>
where
    T::Err: Display,
{
    s.split(',')
        .map(|x| {
            x.trim().parse::<T>().map_err(|e| CliError::Domain {
                kind: "ParseError".into(),
                message: format!("{x}: {e}"),
            })
        })
        .collect()
}

fn parse_terms(s: &str) -> Result<Vec<(i64, i64)>, CliError> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| {
            let (m, p) = x.split_once(':').ok_or_else(|| CliError::Domain {
                kind: "ParseError".into(),
                message: format!("term `{x}` is not of the form m:p"),
            })?;
            let m = m.trim().parse().map_err(domain)?;
            let p = p.trim().parse().map_err(domain)?;
            Ok((m, p))
        })
        .collect()
}

/// `[c_0, …, c_N]` real, or `[[re, im], …]` for the full vector `c_{−N}..c_N`.
#[derive(Deserialize)]
#[serde(untagged)]
enum CoeffFile {
    Real(Vec<f64>),
    Full(Vec<(f64, f64)>),
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase")]
enum RegionSpec {
    Full,
    Around { c: f64 },
}

#[derive(Deserialize)]
struct KappaSpec {
    eps: Vec<i64>,
    #[serde(default)]
    s1: Vec<(i64, i64)>,
    #[serde(default)]
    s2: Vec<(i64, i64)>,
    #[serde(default = "default_region")]
    region: RegionSpec,
    #[serde(default = "default_resolution")]
    resolution: usize,
}

fn default_region() -> RegionSpec {
    RegionSpec::Full
}

fn default_resolution() -> usize {
    1 << 14
}

/// Result payload plus any files the subcommand wrote itself.
struct Outcome {
    stem: String,
    value: Value,
    extra_files: Vec<PathBuf>,
    failed: bool,
}

impl Outcome {
    fn new(stem: &str, value: Value) -> Self {
        Self {
            stem: stem.into(),
            value,
            extra_files: Vec::new(),
            failed: false,
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable result")
}

fn run(cmd: &Command, g: &Global) -> Result<Outcome, CliError> {
    let jobs = g.jobs.max(1);
    Ok(match cmd {
        Command::Count { signs } => {
            let p = parse_signs(signs).map_err(domain)?;
            if !p.is_reciprocal() {
                return Err(domain(RootError::NotReciprocal));
            }
            Outcome::new(
                "count",
                to_value(&CensusRecord::new(&p, &count_littlewood(&p))),
            )
        }
        Command::Search {
            degree,
            to,
            convention,
        } => {
            let hi = to.unwrap_or(*degree);
            let mut rows = Vec::new();
            for n in *degree..=hi {
                let r = min_roots_dual(n, jobs, DEFAULT_BUDGET).map_err(domain)?;
                let mut v = to_value(r.get((*convention).into()));
                v["enumerated"] = json!(v["enumerated"].to_string());
                // Timing lives in the manifest so that outputs stay reproducible.
                v.as_object_mut().expect("object").remove("wall_time");
                rows.push(v);
            }
            Outcome::new("search", Value::Array(rows))
        }
        Command::Avg { degree, sample } => {
            let mode = match sample {
                Some(k) => AverageMode::Sample {
                    k: *k,
                    seed: g.seed,
                },
                None => AverageMode::Exhaustive,
            };
            let a = average_roots(*degree, mode, jobs).map_err(domain)?;
            let v = match a {
                Average::Exact { numer, denom } => json!({
                    "degree": degree, "mode": "exact", "numer": numer.to_string(), "denom": denom.to_string(),
                    "value": a.as_f64(), "at_least_quarter": numer * 4 >= denom * *degree as u64,
                }),
                Average::Sampled {
                    mean,
                    std_err,
                    k,
                    seed,
                } => json!({
                    "degree": degree, "mode": "sampled", "mean": mean, "std_err": std_err, "k": k, "seed": seed.to_string(),
                }),
            };
            Outcome::new("avg", v)
        }
        Command::Table { to, convention } => {
            let conv: Convention = (*convention).into();
            let t = table_zl(*to, conv, jobs, &g.out).map_err(domain)?;
            let stem = format!("zl_{}", conv.label());
            let mut o = Outcome::new(&format!("table_{}", conv.label()), to_value(&t.rows));
            o.extra_files = vec![
                g.out.join(format!("{stem}.csv")),
                g.out.join(format!("{stem}.json")),
            ];
            o
        }
        Command::Structure {
            signs,
            period,
            scan,
            aligned,
        } => {
            let p = parse_signs(signs).map_err(domain)?;
            let q = build_q(&p).map_err(domain)?;
            let qc: Vec<i64> = q.coeffs().iter().map(|&c| c as i64).collect();
            if let Some(dmax) = scan {
                let prof = period_profile(&qc, *dmax).map_err(domain)?;
                let rows: Vec<Value> = prof.iter().map(|&(d, l)| json!({"D": d, "L": l})).collect();
                Outcome::new("structure_scan", Value::Array(rows))
            } else {
                let d = period.expect("clap enforces one mode");
                let dec = decompose(&qc, d, *aligned).map_err(domain)?;
                let geometric = if *aligned {
                    let gf = to_geometric(&dec, &qc).map_err(domain)?;
                    let exact = gf.verify(&qc);
                    json!({"form": gf, "exact": exact})
                } else {
                    Value::Null
                };
                let eps = structure::majority_pattern(&qc, d);
                let cf = to_corollary_form(&qc, d, &eps).map_err(domain)?;
                let cexact = cf.verify(&qc);
                Outcome::new(
                    "structure",
                    json!({
                        "q": qc, "decomposition": dec, "blocks": dec.len(),
                        "geometric": geometric, "corollary": {"form": cf, "exact": cexact},
                    }),
                )
            }
        }
        Command::Factor { coeffs } => {
            let w = match read_json::<CoeffFile>(coeffs)? {
                CoeffFile::Real(c) => TrigPoly::from_real(&c),
                CoeffFile::Full(c) => TrigPoly::from_full(
                    &c.iter()
                        .map(|&(re, im)| Complex64::new(re, im))
                        .collect::<Vec<_>>(),
                ),
            }
            .map_err(domain)?;
            let f = fejer_riesz_factor(&w, g.tol).map_err(domain)?;
            let err = spectral::max_coeff_error(&autocorrelation(&f.d), &w);
            Outcome::new(
                "factor",
                json!({"d": f.d, "residual": f.residual, "round_trip_error": err}),
            )
        }
        Command::Oscillate { spec, n, c, window } => {
            let s: OscillationSpec = read_json(spec)?;
            let r = prop1_oscillation(&s, *n, *c, *window).map_err(domain)?;
            Outcome::new("oscillate", to_value(&r))
        }
        Command::Weyl { spec, theta, n } => {
            let h: GeneralizedTrigSum = read_json(spec)?;
            let r = weyl_moments(&h, *theta, *n).map_err(domain)?;
            Outcome::new("weyl", to_value(&r))
        }
        Command::Oddcase {
            action: OddAction::Identity { d, eps, terms },
        } => {
            let eps: Vec<i64> = parse_list(eps)?;
            if eps.len() != *d {
                return Err(domain(OddError::InvalidPattern(format!(
                    "expected {d} entries, got {}",
                    eps.len()
                ))));
            }
            let pattern = OddPattern::new(eps).map_err(domain)?;
            let s =
                DifferenceSinePoly::from_pattern(&pattern, &parse_terms(terms)?).map_err(domain)?;
            let dec = group_and_decompose(&s, s.p_max(), 8);
            let mut groups = Vec::new();
            for gr in &dec.groups {
                let id = derivative_parseval(&pattern, gr).map_err(domain)?;
                groups.push(json!({
                    "anchor": gr.anchor.to_string(), "terms": gr.terms,
                    "lhs": id.lhs.to_string(), "rhs": id.rhs.to_string(), "equal": id.lhs == id.rhs,
                }));
            }
            let all = groups.iter().all(|v| v["equal"] == json!(true));
            let mut o = Outcome::new(
                "oddcase_identity",
                json!({"D": d, "p": dec.p, "reconstruction_error": dec.reconstruction_error, "groups": groups, "all_equal": all}),
            );
            o.failed = !all;
            o
        }
        Command::Oddcase {
            action: OddAction::Kappa { spec },
        } => {
            let k: KappaSpec = read_json(spec)?;
            let pattern = OddPattern::new(k.eps).map_err(domain)?;
            let a = build_a(&pattern);
            let s1 = DifferenceSinePoly::from_pattern(&pattern, &k.s1).map_err(domain)?;
            let s2 = DifferenceSinePoly::from_pattern(&pattern, &k.s2).map_err(domain)?;
            let region = match k.region {
                RegionSpec::Full => GapRegion::FullPeriod,
                RegionSpec::Around { c } => GapRegion::AroundGammaR { c },
            };
            let r = kappa_gap_search(&a, &s1, &s2, region, k.resolution).map_err(domain)?;
            Outcome::new("oddcase_kappa", to_value(&r))
        }
        Command::ProbeKappa { k, m, res } => {
            let r = problem2_probe(*k, *m, *res, jobs).map_err(domain)?;
            Outcome::new("probe_kappa", to_value(&r))
        }
        Command::Families {
            family,
            index,
            count_roots,
            grid,
        } => {
            let (f, name) = match family {
                Family::G => (polycore::family_g(*index), "g"),
                Family::H => (polycore::family_h(*index), "h"),
            };
            let mut v =
                json!({"family": name, "index": index, "degree": f.degree(), "coeffs": f.coeffs()});
            if *count_roots {
                let z = count_cosine_roots(&f).map_err(domain)?;
                v["roots"] = json!(z.distinct);
                v["census"] = to_value(&z);
            }
            if let Some(res) = grid {
                v["grid_sign_changes"] = json!(grid_sign_change_oracle(&f, *res));
            }
            Outcome::new(&format!("families_{name}"), v)
        }
        Command::Selftest => {
            let r = selftest(g.seed);
            for c in &r.checks {
                eprintln!(
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            let mut o = Outcome::new("selftest", to_value(&r));
            o.failed = !r.all_passed();
            o
        }
    })
}

fn subcommand_name(cmd: &Command) -> String {
    match to_value(cmd) {
        Value::String(s) => s,
        Value::Object(m) => m.keys().next().cloned().unwrap_or_default(),
        _ => String::new(),
    }
}

fn persist(o: &Outcome, cli: &Cli, start: Instant) -> Result<String, CliError> {
    let g = &cli.global;
    let (body, ext) = match g.format {
        Format::Json => (
            serde_json::to_string_pretty(&o.value).map_err(io_err)? + "\n",
            "json",
        ),
        Format::Csv => (to_csv(&o.value).map_err(io_err)?, "csv"),
    };
    let path = g.out.join(format!("{}.{ext}", o.stem));
    atomic_write(&path, body.as_bytes()).map_err(io_err)?;
    let mut outputs = vec![checksum(&path).map_err(io_err)?];
    for p in &o.extra_files {
        outputs.push(checksum(p).map_err(io_err)?);
    }
    let manifest = RunManifest {
        subcommand: subcommand_name(&cli.command),
        parameters: json!({"command": to_value(&cli.command), "global": to_value(g)}),
        seed: g.seed,
        code_version: env!("CARGO_PKG_VERSION").into(),
        wall_time_secs: start.elapsed().as_secs_f64(),
        outputs,
    };
    let mpath = g.out.join(format!("{}.manifest.json", o.stem));
    atomic_write(
        &mpath,
        (serde_json::to_string_pretty(&manifest).map_err(io_err)? + "\n").as_bytes(),
    )
    .map_err(io_err)?;
    Ok(body)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    if cli.global.jobs > 1 {
        // Ignored when a pool already exists; only one pool is ever built here.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.global.jobs)
            .build_global();
    }
    let result = run(&cli.command, &cli.global)
        .and_then(|o| persist(&o, &cli, start).map(|body| (o.failed, body)));
    match result {
        Ok((failed, body)) => {
            print!("{body}");
            if failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            let v = match e {
                CliError::Domain { kind, message } => json!({"error": kind, "message": message}),
                CliError::Io(message) => json!({"error": "Io", "message": message}),
            };
            println!("{v}");
            ExitCode::from(1)
        }
    }
}
