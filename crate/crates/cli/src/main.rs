use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use smalltime::control::{gramian, hormander_rank, hormander_rank_svd, malliavin_mc, ControlProblem, MalliavinConfig};
use smalltime::numerics::sde::em_terminal_batch;
use smalltime::numerics::{dist_limit_check, euler_maruyama, scale_map, DistLimitConfig, PiecewiseLinearControl};
use smalltime::poly::NumField;
use smalltime::propagation::{dist_scalings, lil_scalings, remainder, scalings, Mode, PropagationResult, Verdict};
use smalltime::regular::{check_regular, DomainSpec, RegularConfig, RegularVerdict};
use smalltime::saturation::{noise_controls, saturate};
use smalltime::system::SdeSystem;

const EXIT_PARSE: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser)]
#[command(name = "smalltime", version, about = "Small-time scalings and controllability of polynomial SDEs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Also write the full report as JSON to this path.
    #[arg(long, global = true, value_name = "OUT")]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LimitArg {
    /// The drift as given.
    None,
    Lil,
    Dist,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Lil,
    Dist,
}

#[derive(Subcommand)]
enum Cmd {
    /// Layers, scalings and limiting drifts under both procedures.
    Classify { spec: PathBuf },
    /// Remainder of the rescaled drift and its decay in eps.
    Rescale {
        spec: PathBuf,
        #[arg(long, value_enum, default_value = "dist")]
        mode: ModeArg,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1e-2, 1e-3, 1e-4])]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Coupled simulation trials; 0 skips the simulation.
        #[arg(long, default_value_t = 0)]
        trials: usize,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Euler-Maruyama paths from a start point; terminal moments, optionally rescaled.
    Simulate {
        spec: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Run to time `eps * t` and report `x / eps^b` with power scalings `b`.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        x0: Option<Vec<f64>>,
        /// Write one sample path as CSV.
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Rank of the bracket-generated list at a point.
    Brackets {
        spec: PathBuf,
        /// Bracket nesting depth; n + 1 when absent.
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        at: Option<Vec<f64>>,
        /// Use a floating SVD rank with this relative tolerance instead of exact arithmetic.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Saturate the family generated by a drift and the noisy directions.
    Saturate {
        spec: PathBuf,
        #[arg(long, value_enum, default_value = "none")]
        limit: LimitArg,
        /// Saturation rounds; 2n when absent.
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Controllability Gramian of the zero control, and optionally the Malliavin frequency.
    Gramian {
        spec: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, value_enum, default_value = "none")]
        limit: LimitArg,
        /// Malliavin trials; 0 skips the Monte Carlo.
        #[arg(long, default_value_t = 0)]
        trials: usize,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Is the boundary point of a domain regular?
    Regular {
        spec: PathBuf,
        domain: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

enum Outcome {
    Done,
    Inconclusive,
}

#[derive(Debug)]
struct ParseFailure(String);

impl std::fmt::Display for ParseFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ParseFailure {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Inconclusive) => ExitCode::from(EXIT_INCONCLUSIVE),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<smalltime::Error>() {
            return match err {
                smalltime::Error::Numerical(_) => EXIT_NUMERICAL,
                _ => EXIT_PARSE,
            };
        }
    }
    EXIT_PARSE
}

fn need_seed(seed: Option<u64>) -> anyhow::Result<u64> {
    seed.ok_or_else(|| anyhow!(ParseFailure("this command is stochastic: pass --seed".into())))
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_system(path: &Path) -> anyhow::Result<(SdeSystem, Option<String>)> {
    let text = read(path)?;
    let spec: smalltime::system::SystemSpec = serde_json::from_str(&text)
        .map_err(smalltime::Error::from)
        .with_context(|| format!("parsing system {}", path.display()))?;
    let name = spec.name.clone();
    let sys = SdeSystem::from_spec(spec).with_context(|| format!("validating system {}", path.display()))?;
    Ok((sys, name))
}

fn load_domain(path: &Path) -> anyhow::Result<DomainSpec> {
    DomainSpec::from_json(&read(path)?).with_context(|| format!("parsing domain {}", path.display()))
}

/// Write through a temporary file in the target directory, then rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn emit<T: Serialize>(out: &Option<PathBuf>, report: &T) -> anyhow::Result<()> {
    if let Some(p) = out {
        let mut s = serde_json::to_string_pretty(report)?;
        s.push('\n');
        write_atomic(p, s.as_bytes())?;
    }
    Ok(())
}

fn limit_drift(sys: &SdeSystem, limit: LimitArg) -> anyhow::Result<(smalltime::poly::PolyVectorField, Option<PropagationResult>)> {
    let res = match limit {
        LimitArg::None => return Ok((sys.drift.clone(), None)),
        LimitArg::Lil => lil_scalings(sys),
        LimitArg::Dist => dist_scalings(sys),
    };
    if !res.is_propagating() {
        return Err(smalltime::Error::NoiseDefective(res.layers.len())).context("no limit drift");
    }
    Ok((res.limit_drift.clone(), Some(res)))
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    match &cli.cmd {
        Cmd::Classify { spec } => classify(spec, &cli.json),
        Cmd::Rescale { spec, mode, eps, radius, trials, t, seed } => {
            let (sys, _) = load_system(spec)?;
            let mode = match mode {
                ModeArg::Lil => Mode::Lil,
                ModeArg::Dist => Mode::Dist,
            };
            let res = scalings(&sys, mode);
            let rem = remainder(&sys, &res).context("remainder")?;
            let table = rem.sup_table(eps, *radius)?;
            println!("remainder {} (sup over the ball of radius {radius})", if rem.is_zero() { "is zero" } else { "terms" });
            for (j, terms) in rem.comps.iter().enumerate() {
                for term in terms {
                    println!("  R{}: {} x^{:?} * eps^{}", j + 1, term.coeff, term.exps, term.eps_exponent);
                }
            }
            for (e, s) in &table {
                println!("  eps = {e:e}: sup |R_eps| = {s:.6e}");
            }
            let mut report = json!({ "mode": mode, "scalings": res.scalings, "remainder": rem, "sup_table": table });
            if *trials > 0 {
                let seed = need_seed(*seed)?;
                let cfg = DistLimitConfig { t: *t, trials: *trials, seed, ..Default::default() };
                let dl = dist_limit_check(&sys, &res, eps, &cfg)?;
                for r in &dl.rows {
                    println!(
                        "  coupled eps = {:e}: median sup |z - y| = {:.4e}, energy p = {:.3}",
                        r.eps, r.sup_median, r.p_value
                    );
                }
                println!("median nonincreasing: {}", dl.median_nonincreasing);
                report["coupled"] = serde_json::to_value(&dl)?;
            }
            emit(&cli.json, &report)?;
            Ok(Outcome::Done)
        }
        Cmd::Simulate { spec, t, steps, trials, eps, x0, csv, seed } => {
            let (sys, _) = load_system(spec)?;
            let seed = need_seed(*seed)?;
            simulate(&sys, *t, *steps, *trials, *eps, x0.clone(), csv.as_deref(), seed, &cli.json)
        }
        Cmd::Brackets { spec, depth, at, tol } => {
            let (sys, _) = load_system(spec)?;
            let x = at.clone().unwrap_or_else(|| vec![0.0; sys.dim()]);
            let depth = depth.unwrap_or(sys.dim() + 1);
            let r = match tol {
                Some(tol) => hormander_rank_svd(&sys.drift, &sys.sigma, &x, depth, *tol)?,
                None => hormander_rank(&sys.drift, &sys.sigma, &x, depth)?,
            };
            println!(
                "rank {} of {} at {:?} ({}, depth {}, {} fields)",
                r.rank,
                sys.dim(),
                x,
                if r.exact { "exact" } else { "svd" },
                r.depth_reached,
                r.fields
            );
            println!("spanning: {}", r.spanning);
            for w in &r.witnesses {
                println!("  {w}");
            }
            emit(&cli.json, &json!({ "point": x, "depth": depth, "report": r }))?;
            Ok(Outcome::Done)
        }
        Cmd::Saturate { spec, limit, depth } => {
            let (sys, _) = load_system(spec)?;
            let (v0, _) = limit_drift(&sys, *limit)?;
            let steps = depth.unwrap_or(2 * sys.dim());
            let r = saturate(&v0, &noise_controls(&sys.sigma)?, steps)?;
            println!("drift: {v0}");
            println!("steps {} fixed point {}", r.steps, r.fixed_point);
            for s in &r.directions.span {
                println!("  span ({})", s.join(", "));
            }
            for c in &r.directions.cone {
                println!("  cone ({})", c.join(", "));
            }
            println!("exact_controllable = {}", r.exact_controllable);
            if let (Some(b), Some(d)) = (&r.basis, &r.basis_det) {
                println!("basis certificate: rays {b:?}, determinant {d}, valid {}", r.certificate_valid());
            }
            for i in &r.inferences {
                println!("  {i}");
            }
            emit(&cli.json, &r)?;
            Ok(Outcome::Done)
        }
        Cmd::Gramian { spec, t, limit, trials, lambda, tol, seed } => {
            let (sys, _) = load_system(spec)?;
            let (q, _) = limit_drift(&sys, *limit)?;
            let prob = ControlProblem::new(q, sys.sigma.clone(), vec![0.0; sys.dim()])?;
            let zero = PiecewiseLinearControl::zero(sys.dim(), *t);
            let g = gramian(&prob, &zero, *t)?;
            println!("G_t at t = {t}:");
            for row in &g.gramian {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:>12.8}")).collect();
                println!("  [{}]", cells.join(", "));
            }
            println!("det = {:.10e}  min_eig = {:.6e}  invertible = {}", g.det, g.min_eig, g.invertible);
            let mut report = json!({ "gramian": g });
            if *trials > 0 {
                let seed = need_seed(*seed)?;
                let cfg = MalliavinConfig { lambda: *lambda, t: *t, trials: *trials, seed, tol: *tol, ..Default::default() };
                let m = malliavin_mc(&prob, &cfg)?;
                println!(
                    "malliavin: invertible_freq = {:.4} over {} trials (Gramian cross-check {}/{})",
                    m.invertible_freq, trials, m.gramian_agree, m.gramian_checked
                );
                report["malliavin"] = serde_json::to_value(&m)?;
            }
            emit(&cli.json, &report)?;
            Ok(Outcome::Done)
        }
        Cmd::Regular { spec, domain, t, trials, depth, seed } => {
            let (sys, _) = load_system(spec)?;
            let d = load_domain(domain)?;
            let seed = need_seed(*seed)?;
            let cfg = RegularConfig { seed, t: *t, probe_trials: *trials, max_steps: *depth, ..Default::default() };
            let r = check_regular(&sys, &d, &cfg)?;
            match &r.verdict {
                RegularVerdict::Regular => println!("Regular"),
                RegularVerdict::Inconclusive { stage } => println!("Inconclusive ({})", serde_json::to_value(stage)?.as_str().unwrap_or("?")),
            }
            println!("shifted drift: {}", r.shifted_drift);
            println!("power scalings: {}", fmt_scalings(&r.propagation.scalings));
            if let Some(l) = &r.domain_limit {
                println!("domain limit: {}", serde_json::to_value(l.verdict)?.as_str().unwrap_or("?"));
                for p in &l.persisting {
                    println!("  persists: {p}");
                }
                for p in &l.dropped {
                    println!("  drops: {p}");
                }
            }
            if let Some(re) = &r.reachability {
                println!("reachability via {}", re.method);
            }
            for rule in &r.rules {
                println!("  {rule}");
            }
            emit(&cli.json, &r)?;
            Ok(if r.is_regular() { Outcome::Done } else { Outcome::Inconclusive })
        }
    }
}

fn fmt_scalings(s: &[smalltime::scaling::Scaling]) -> String {
    s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn verdict_line(v: &Verdict) -> String {
    match v {
        Verdict::NoisePropagating { dim } => format!("noise propagating, dim = {dim}"),
        Verdict::NoiseDefective { stuck_layer } => format!("noise defective, stuck at layer {stuck_layer}"),
    }
}

fn classify(spec: &Path, out: &Option<PathBuf>) -> anyhow::Result<Outcome> {
    let (sys, name) = load_system(spec)?;
    let lil = lil_scalings(&sys);
    let dist = dist_scalings(&sys);
    let n = sys.dim();
    if let Some(name) = &name {
        println!("{name}: n = {n}");
    }
    println!("{}", verdict_line(&lil.verdict));
    let layer_of = lil.layer_of();
    println!("{:>4} {:>6} {:>14} {:>14}  {:<36} P_D", "j", "layer", "a", "b", "P_L");
    for j in 0..n {
        let pl = lil.limit_drift.comps()[j].to_string();
        let pd = dist.limit_drift.comps()[j].to_string();
        let mark = if pl != pd { "  *" } else { "" };
        println!(
            "{:>4} {:>6} {:>14} {:>14}  {:<36} {}{}",
            j + 1,
            layer_of[j].map(|l| l.to_string()).unwrap_or_else(|| "-".into()),
            lil.scalings[j].to_string(),
            dist.scalings[j].to_string(),
            pl,
            pd,
            mark
        );
    }
    if !lil.ties.is_empty() {
        let t: Vec<usize> = lil.ties.iter().map(|j| j + 1).collect();
        println!("ties in the iterated-log component at coordinates {t:?}");
    }
    let report: Value = json!({
        "name": name,
        "n": n,
        "sigma": sys.sigma,
        "verdict": lil.verdict,
        "dim": match lil.verdict { Verdict::NoisePropagating { dim } => Some(dim), _ => None },
        "lil": lil,
        "dist": dist,
        "remainder_lil": remainder(&sys, &lil).ok(),
        "remainder_dist": remainder(&sys, &dist).ok(),
    });
    emit(out, &report)?;
    Ok(Outcome::Done)
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    sys: &SdeSystem,
    t: f64,
    steps: usize,
    trials: usize,
    eps: Option<f64>,
    x0: Option<Vec<f64>>,
    csv: Option<&Path>,
    seed: u64,
    out: &Option<PathBuf>,
) -> anyhow::Result<Outcome> {
    let n = sys.dim();
    let x0 = x0.unwrap_or_else(|| vec![0.0; n]);
    if x0.len() != n {
        bail!(smalltime::Error::DimensionMismatch { expected: n, got: x0.len() });
    }
    if trials == 0 || steps == 0 {
        bail!(ParseFailure("trials and steps must be positive".into()));
    }
    let horizon = eps.map_or(t, |e| e * t);
    let res = dist_scalings(sys);
    if eps.is_some() && !res.is_propagating() {
        return Err(smalltime::Error::NoiseDefective(res.layers.len())).context("rescaling needs power scalings");
    }
    let q = NumField::from_field(&sys.drift);
    let ends = em_terminal_batch(&q, &sys.sigma, &x0, horizon, steps, trials, seed);
    let mut alive = Vec::with_capacity(trials);
    for x in ends.into_iter().flatten() {
        let y = match eps {
            Some(e) => {
                let d: Vec<f64> = x.iter().zip(&x0).map(|(a, b)| a - b).collect();
                scale_map(&d, &res.scalings, e)?
            }
            None => x,
        };
        alive.push(y);
    }
    if alive.is_empty() {
        bail!(smalltime::Error::Numerical("every path exploded".into()));
    }
    let m = alive.len() as f64;
    let mean: Vec<f64> = (0..n).map(|i| alive.iter().map(|x| x[i]).sum::<f64>() / m).collect();
    let cov: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|k| alive.iter().map(|x| (x[i] - mean[i]) * (x[k] - mean[k])).sum::<f64>() / (m - 1.0).max(1.0))
                .collect()
        })
        .collect();
    println!(
        "{} of {trials} paths survived to t = {horizon}{}",
        alive.len(),
        if eps.is_some() { " (rescaled)" } else { "" }
    );
    println!("mean {mean:?}");
    println!("covariance:");
    for row in &cov {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>10.5}")).collect();
        println!("  [{}]", cells.join(", "));
    }
    if let Some(p) = csv {
        let path = euler_maruyama(sys, &x0, horizon, horizon / steps as f64, seed)?;
        let mut buf = Vec::new();
        path.write_csv(&mut buf)?;
        write_atomic(p, &buf)?;
    }
    emit(
        out,
        &json!({
            "seed": seed, "t": t, "eps": eps, "steps": steps, "trials": trials, "x0": x0,
            "scalings": eps.map(|_| res.scalings.clone()),
            "survived": alive.len(), "mean": mean, "covariance": cov,
        }),
    )?;
    Ok(Outcome::Done)
}
