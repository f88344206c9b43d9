use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use permspec_core::arith::{format_decimal, Angle, DEFAULT_PRECISION_BITS};
use permspec_core::converge::{cmd_converge, ConvergeConfig};
use permspec_core::ewens::{cycle_type_pmf, sample_cycle_type, CycleType, EwensParams, Theta};
use permspec_core::gap::{
    gap_mc, gap_series_eval, gap_series_with, pair_correlation_phi, GapMcConfig, SeriesOptions,
    DEFAULT_ENUMERATION_LIMIT,
};
use permspec_core::limit::{
    simulate_limit_replicates, AlphaKind, LimitConfig, TruncationReport, Truncation, DEFAULT_EPSILON,
    DEFAULT_PRIME_CUTOFF, DEFAULT_R_MAX,
};
use permspec_core::manifest::RunManifest;
use permspec_core::mc::{domain, threads_from_env, with_threads, StreamFactory};
use permspec_core::spectrum::{orbit_spectrum, parse_rational, star_discrepancy_1d, window_points};
use permspec_core::{Error, Result};
use serde_json::json;

/// Eigenvalue point processes of permutation representations under the
/// Ewens measure.
#[derive(Parser)]
#[command(name = "permspec", version)]
struct Cli {
    /// Worker threads; overrides PERMSPEC_THREADS. Never changes the output.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Bits of precision for irrational angles.
    #[arg(long, global = true, default_value_t = DEFAULT_PRECISION_BITS)]
    precision: u32,
    /// Write the run manifest to this file instead of stderr.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct TruncArgs {
    /// Fixed number of sticks (default: adaptive).
    #[arg(long)]
    r: Option<usize>,
    /// Adaptive truncation: stop once the residual stick mass is below this.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Adaptive truncation: hard cap on the number of sticks.
    #[arg(long, default_value_t = DEFAULT_R_MAX)]
    r_max: usize,
    /// Number of primes in the exponent array.
    #[arg(long, default_value_t = DEFAULT_PRIME_CUTOFF)]
    prime_cutoff: usize,
}

impl TruncArgs {
    fn truncation(&self) -> Truncation {
        match self.r {
            Some(r) => Truncation::Fixed(r),
            None => Truncation::Adaptive { epsilon: self.epsilon, r_max: self.r_max },
        }
    }

    fn record(&self, m: RunManifest) -> RunManifest {
        m.param("truncation", self.truncation()).param("prime_cutoff", self.prime_cutoff)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Ewens probability of one cycle type, or of every cycle type of n.
    Pmf {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value = "1")]
        theta: String,
        /// Cycle lengths, e.g. 3,1,1.
        #[arg(long, value_delimiter = ',')]
        cycles: Option<Vec<u64>>,
    },
    /// Draw Ewens cycle types.
    Sample {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value = "1")]
        theta: String,
        #[arg(long, default_value_t = 1)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Rescaled finite-n eigenangles in the window (−T, T) around alpha.
    Spectrum {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value = "1")]
        theta: String,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        alpha: String,
        #[arg(long = "T")]
        t: String,
        #[arg(long, default_value_t = 1)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "csv")]
        out: Format,
        /// Emit points too close to the window edge (flag=boundary) instead
        /// of failing.
        #[arg(long)]
        keep_boundary: bool,
    },
    /// Points of the limiting process in [W1, W2].
    Limit {
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value = "1")]
        theta: String,
        /// irr, rat:T or zero.
        #[arg(long, default_value = "irr")]
        kind: String,
        #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["W1", "W2"])]
        window: Vec<f64>,
        #[command(flatten)]
        trunc: TruncArgs,
        #[arg(long, default_value_t = 1)]
        reps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fail when the truncation bound exceeds this.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value = "csv")]
        out: Format,
    },
    /// Monte Carlo gap probability of the limiting process.
    GapMc {
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value = "1")]
        theta: String,
        #[arg(long, allow_negative_numbers = true)]
        y1: f64,
        #[arg(long, allow_negative_numbers = true)]
        y2: f64,
        #[command(flatten)]
        trunc: TruncArgs,
        #[arg(long, default_value_t = 10_000)]
        reps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fail when the truncation bias bound exceeds this.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Power series of the θ = 1 gap probability.
    GapSeries {
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 6)]
        order: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Evaluate the series at this gap length instead of listing it.
        #[arg(long)]
        eval: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_LIMIT)]
        enumeration_limit: u128,
        #[arg(long, value_enum, default_value = "json")]
        out: Format,
    },
    /// Two-point correlation function of the k = 1 limit.
    Phi {
        #[arg(long, default_value = "1")]
        theta: String,
        #[arg(long, num_args = 1.., allow_negative_numbers = true, required = true)]
        x: Vec<f64>,
    },
    /// Star discrepancy of frac(j·alpha), j = 1..count, or of values on stdin.
    Discrepancy {
        #[arg(long, requires = "count")]
        alpha: Option<String>,
        #[arg(long)]
        count: Option<u64>,
    },
    /// Window-count distributions at several n against the limit.
    Converge {
        #[arg(long = "n", value_delimiter = ',', required = true)]
        n_list: Vec<u64>,
        #[arg(long, default_value = "1")]
        theta: String,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        alpha: String,
        #[arg(long = "T", default_value = "1")]
        t: String,
        #[command(flatten)]
        trunc: TruncArgs,
        #[arg(long, default_value_t = 10_000)]
        reps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn theta_json(theta: &Theta) -> serde_json::Value {
    match theta.exact() {
        Some(r) => json!(r.to_string()),
        None => json!(theta.value()),
    }
}

fn float(x: f64) -> String {
    format!("{x:?}")
}

fn pmf(n: u64, theta: &str, cycles: Option<Vec<u64>>) -> Result<(String, RunManifest)> {
    let theta = Theta::parse(theta)?;
    let params = EwensParams::new(n, theta.clone())?;
    let types = match &cycles {
        Some(c) => vec![CycleType::from_lengths(c.iter().copied())?],
        None if n <= 40 => CycleType::all(n),
        None => return Err(Error::ResourceLimit(format!("listing every cycle type needs n <= 40, got {n}"))),
    };
    let entries: Vec<_> = types
        .iter()
        .map(|ct| {
            let p = cycle_type_pmf(&params, ct);
            let (value, err) = match &p.exact {
                Some(r) => (r.to_string(), "0".to_string()),
                // log-gamma evaluation: a few ulps per factor
                None => (float(p.value), format!("{:e}", 16.0 * (n as f64 + 2.0) * f64::EPSILON * p.value)),
            };
            json!({"cycle_type": ct, "value": value, "err": err})
        })
        .collect();
    let out = json!({"n": n, "theta": theta_json(&theta), "entries": entries});
    let m = RunManifest::new("pmf").param("n", n).param("theta", theta_json(&theta)).param("cycles", cycles);
    Ok((out.to_string(), m))
}

fn sample(n: u64, theta: &str, samples: u64, seed: u64) -> Result<(String, RunManifest)> {
    let theta = Theta::parse(theta)?;
    let params = EwensParams::new(n, theta.clone())?;
    let draws = StreamFactory::new(seed).replicates(domain::EWENS, samples, |_, rng| sample_cycle_type(&params, rng));
    let out = json!({"n": n, "theta": theta_json(&theta), "samples": draws});
    let mut m = RunManifest::new("sample").param("n", n).param("theta", theta_json(&theta)).param("samples", samples);
    m.seed = Some(seed);
    Ok((out.to_string(), m))
}

#[allow(clippy::too_many_arguments)]
fn spectrum(
    n: u64,
    theta: &str,
    k: usize,
    alpha: &str,
    t: &str,
    samples: u64,
    seed: u64,
    out: Format,
    keep_boundary: bool,
    bits: u32,
) -> Result<(String, RunManifest)> {
    let theta = Theta::parse(theta)?;
    let params = EwensParams::new(n, theta.clone())?;
    let angle = Angle::parse(alpha, bits)?;
    let half = parse_rational(t)?;
    let windows = StreamFactory::new(seed)
        .replicates(domain::EWENS, samples, |_, rng| {
            let ct = sample_cycle_type(&params, rng);
            let w = window_points(&orbit_spectrum(&ct, k)?, &angle, &half)?;
            if !keep_boundary {
                w.require_certified()?;
            }
            Ok((ct, w))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (rep, (ct, w)) in windows.iter().enumerate() {
        let mut pts: Vec<_> = w
            .points
            .iter()
            .map(|p| (p, if p.position.is_exact() { "exact" } else { "certified" }))
            .chain(w.flags.iter().map(|p| (p, "boundary")))
            .collect();
        pts.sort_by(|a, b| a.0.position.lo.cmp(&b.0.position.lo));
        let pts: Vec<_> = pts
            .into_iter()
            .map(|(p, flag)| {
                (format_decimal(&p.position.midpoint(), 30), p.multiplicity, flag, format!("{:e}", p.position.radius_f64()))
            })
            .collect();
        rows.push((rep, ct, pts));
    }
    let text = match out {
        Format::Csv => {
            let mut s = String::from("replicate,position,multiplicity,flag,err\n");
            for (rep, _, pts) in &rows {
                for (pos, mult, flag, err) in pts {
                    s.push_str(&format!("{rep},{pos},{mult},{flag},{err}\n"));
                }
            }
            s
        }
        Format::Json => {
            let reps: Vec<_> = rows
                .iter()
                .map(|(rep, ct, pts)| {
                    let points: Vec<_> = pts
                        .iter()
                        .map(|(pos, mult, flag, err)| json!({"position": pos, "multiplicity": mult.to_string(), "flag": flag, "err": err}))
                        .collect();
                    json!({"replicate": rep, "cycle_type": ct, "points": points})
                })
                .collect();
            json!({"n": n, "k": k, "alpha": alpha, "T": half.to_string(), "replicates": reps}).to_string()
        }
    };
    let mut m = RunManifest::new("spectrum")
        .param("n", n)
        .param("theta", theta_json(&theta))
        .param("k", k)
        .param("alpha", alpha)
        .param("T", half.to_string())
        .param("samples", samples)
        .param("keep_boundary", keep_boundary);
    m.seed = Some(seed);
    m.precision_bits = angle.precision_bits();
    Ok((text, m))
}

fn truncation_json(r: &TruncationReport) -> serde_json::Value {
    serde_json::to_value(r).unwrap_or_default()
}

#[allow(clippy::too_many_arguments)]
fn limit(
    k: usize,
    theta: &str,
    kind: &str,
    window: &[f64],
    trunc: &TruncArgs,
    reps: u64,
    seed: u64,
    tol: Option<f64>,
    out: Format,
) -> Result<(String, RunManifest)> {
    let theta = Theta::parse(theta)?;
    let kind = AlphaKind::parse(kind)?;
    let mut cfg = LimitConfig::new(k, theta.value(), kind, (window[0], window[1]));
    cfg.truncation = trunc.truncation();
    cfg.prime_cutoff = trunc.prime_cutoff;
    cfg.tolerance = tol;
    let samples = simulate_limit_replicates(&cfg, reps, seed)?;
    let text = match out {
        Format::Csv => {
            let mut s = String::from("replicate,position,multiplicity,flag\n");
            for (rep, w) in samples.iter().enumerate() {
                let mut atom = w.atom_at_zero;
                for p in &w.points {
                    if atom && p.position > 0.0 {
                        s.push_str(&format!("{rep},0,inf,atom\n"));
                        atom = false;
                    }
                    s.push_str(&format!("{rep},{},{},\n", float(p.position), p.multiplicity));
                }
                if atom {
                    s.push_str(&format!("{rep},0,inf,atom\n"));
                }
            }
            s
        }
        Format::Json => {
            let reps: Vec<_> = samples
                .iter()
                .enumerate()
                .map(|(rep, w)| {
                    let points: Vec<_> = w
                        .points
                        .iter()
                        .map(|p| json!({"position": float(p.position), "multiplicity": p.multiplicity.to_string()}))
                        .collect();
                    json!({"replicate": rep, "atom_at_zero": w.atom_at_zero, "points": points})
                })
                .collect();
            json!({"k": k, "kind": kind.to_string(), "window": window, "replicates": reps}).to_string()
        }
    };
    let mut m = trunc.record(
        RunManifest::new("limit")
            .param("k", k)
            .param("theta", theta_json(&theta))
            .param("kind", kind.to_string())
            .param("window", window)
            .param("reps", reps)
            .param("tol", tol),
    );
    m.seed = Some(seed);
    m.truncation = TruncationReport::worst(samples.iter().map(|s| &s.truncation)).map(|r| truncation_json(&r));
    Ok((text, m))
}

#[allow(clippy::too_many_arguments)]
fn gap_mc_cmd(
    k: usize,
    theta: &str,
    y1: f64,
    y2: f64,
    trunc: &TruncArgs,
    reps: u64,
    seed: u64,
    tol: Option<f64>,
) -> Result<(String, RunManifest)> {
    let theta = Theta::parse(theta)?;
    let mut cfg = GapMcConfig::new(k, theta.value(), y1, y2, reps, seed);
    cfg.truncation = trunc.truncation();
    cfg.prime_cutoff = trunc.prime_cutoff;
    cfg.tolerance = tol;
    let r = gap_mc(&cfg)?;
    let out = json!({
        "k": k,
        "theta": theta_json(&theta),
        "y1": y1,
        "y2": y2,
        "reps": reps,
        "estimate": float(r.estimate),
        "std_error": float(r.std_error),
        "err": format!("{:e}", r.bias_bound),
    });
    let mut m = trunc.record(
        RunManifest::new("gap-mc")
            .param("k", k)
            .param("theta", theta_json(&theta))
            .param("y1", y1)
            .param("y2", y2)
            .param("reps", reps)
            .param("tol", tol),
    );
    m.seed = Some(seed);
    m.truncation = r.truncation.as_ref().map(truncation_json);
    Ok((out.to_string(), m))
}

fn gap_series_cmd(k: usize, order: usize, tol: f64, eval: Option<f64>, limit: u128) -> Result<(String, RunManifest)> {
    let series = gap_series_with(k, order, tol, SeriesOptions { enumeration_limit: limit })?;
    let text = match eval {
        None => series.to_json(),
        Some(x) => {
            let (value, err) = gap_series_eval(&series, x)?;
            json!({
                "k": k,
                "order": order,
                "x": x,
                "value": float(value),
                "err": format!("{err:e}"),
                "last_term": format!("{:e}", series.last_term(x)),
            })
            .to_string()
        }
    };
    let m = RunManifest::new("gap-series")
        .param("k", k)
        .param("order", order)
        .param("tol", tol)
        .param("eval", eval)
        .param("enumeration_limit", limit.to_string());
    Ok((text, m))
}

fn phi(theta: &str, xs: &[f64]) -> Result<(String, RunManifest)> {
    let theta = Theta::parse(theta)?;
    let rows = xs
        .iter()
        .map(|&x| {
            let v = pair_correlation_phi(theta.value(), x)?;
            // one rounding per summand
            let err = 4.0 * (x.abs().floor() + 4.0) * f64::EPSILON * v;
            Ok(json!({"x": x, "value": float(v), "err": format!("{err:e}")}))
        })
        .collect::<Result<Vec<_>>>()?;
    let m = RunManifest::new("phi").param("theta", theta_json(&theta)).param("x", xs);
    Ok((json!({"theta": theta_json(&theta), "values": rows}).to_string(), m))
}

fn discrepancy(alpha: Option<&str>, count: Option<u64>, bits: u32) -> Result<(String, RunManifest)> {
    let (values, m) = match (alpha, count) {
        (Some(a), Some(n)) => {
            let angle = Angle::parse(a, bits)?;
            let x = angle.to_f64();
            let values: Vec<f64> = (1..=n).map(|j| (j as f64 * x).rem_euclid(1.0)).collect();
            let mut m = RunManifest::new("discrepancy").param("alpha", a).param("count", n);
            m.precision_bits = angle.precision_bits();
            (values, m)
        }
        _ => {
            let mut input = String::new();
            std::io::stdin()
                .read_to_string(&mut input)
                .map_err(|e| Error::Parse(format!("reading stdin: {e}")))?;
            let values = input
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad value '{t}'"))))
                .collect::<Result<Vec<f64>>>()?;
            let m = RunManifest::new("discrepancy").param("count", values.len()).param("source", "stdin");
            (values, m)
        }
    };
    let d = star_discrepancy_1d(&values)?;
    Ok((json!({"count": values.len(), "discrepancy": float(d)}).to_string(), m))
}

#[allow(clippy::too_many_arguments)]
fn converge(
    n_list: &[u64],
    theta: &str,
    k: usize,
    alpha: &str,
    t: &str,
    trunc: &TruncArgs,
    reps: u64,
    seed: u64,
    bits: u32,
) -> Result<(String, RunManifest)> {
    let theta = Theta::parse(theta)?;
    let angle = Angle::parse(alpha, bits)?;
    let half = parse_rational(t)?;
    let mut cfg = ConvergeConfig::new(n_list.to_vec(), theta.clone(), k, angle.clone(), half.clone(), reps, seed);
    cfg.truncation = trunc.truncation();
    cfg.prime_cutoff = trunc.prime_cutoff;
    let report = cmd_converge(&cfg)?;
    let mut m = trunc.record(
        RunManifest::new("converge")
            .param("n", n_list)
            .param("theta", theta_json(&theta))
            .param("k", k)
            .param("alpha", alpha)
            .param("T", half.to_string())
            .param("reps", reps),
    );
    m.seed = Some(seed);
    m.precision_bits = angle.precision_bits();
    let text = serde_json::to_string(&report).map_err(|e| Error::Parse(e.to_string()))?;
    Ok((text, m))
}

fn run(cli: &Cli) -> Result<(String, RunManifest)> {
    let bits = cli.precision;
    match &cli.command {
        Command::Pmf { n, theta, cycles } => pmf(*n, theta, cycles.clone()),
        Command::Sample { n, theta, samples, seed } => sample(*n, theta, *samples, *seed),
        Command::Spectrum { n, theta, k, alpha, t, samples, seed, out, keep_boundary } => {
            spectrum(*n, theta, *k, alpha, t, *samples, *seed, *out, *keep_boundary, bits)
        }
        Command::Limit { k, theta, kind, window, trunc, reps, seed, tol, out } => {
            limit(*k, theta, kind, window, trunc, *reps, *seed, *tol, *out)
        }
        Command::GapMc { k, theta, y1, y2, trunc, reps, seed, tol } => gap_mc_cmd(*k, theta, *y1, *y2, trunc, *reps, *seed, *tol),
        Command::GapSeries { k, order, tol, eval, enumeration_limit, out } => {
            if let Format::Csv = out {
                return Err(Error::InvalidParameter("gap-series writes JSON only".into()));
            }
            gap_series_cmd(*k, *order, *tol, *eval, *enumeration_limit)
        }
        Command::Phi { theta, x } => phi(theta, x),
        Command::Discrepancy { alpha, count } => discrepancy(alpha.as_deref(), *count, bits),
        Command::Converge { n_list, theta, k, alpha, t, trunc, reps, seed } => {
            converge(n_list, theta, *k, alpha, t, trunc, *reps, *seed, bits)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical_failure() || matches!(e, Error::ResourceLimit(_)) {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(threads_from_env);
    let start = Instant::now();
    match with_threads(threads, || run(&cli)) {
        Ok((mut text, mut manifest)) => {
            if !text.ends_with('\n') {
                text.push('\n');
            }
            print!("{text}");
            manifest.wall_time_seconds = start.elapsed().as_secs_f64();
            let record = manifest.to_json();
            match &cli.manifest {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, record + "\n") {
                        eprintln!("permspec: cannot write manifest {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => eprintln!("{record}"),
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("permspec: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
