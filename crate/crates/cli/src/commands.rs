//! Subcommand implementations. Each returns the `results` object of the
//! report; every numeric record carries the depth it was computed at.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::fmt::Write as _;
use std::path::Path;

use clap::{Args, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use subaffine::fixtures;
use subaffine::geometry::{
    attractor_sample, box_count, hyperplane_check, inclusion_check, BoxCountOptions, GridAnchor,
    PointCloud,
};
use subaffine::linalg::{check_cone_condition, probe_quasimultiplicativity};
use subaffine::measures::{
    check_consistency, empirical_equilibrium, energy_finite, entropy_finite, equilibrium_gap,
    gibbs_ratios, lyapunov, GibbsReport, Measure,
};
use subaffine::pressure::{
    detect_kink, pressure_curve, pressure_lower, pressure_upper, singularity_dimension, Assumption,
    DepthPressure, QuasiMultiplicativity, DEFAULT_STEP,
};

use crate::config::Loaded;
use crate::error::{CliError, CliResult, Context};

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Depth-n pressure upper bound, optionally with a lower bound.
    Pressure(PressureArgs),
    /// Depth-n pressure on a uniform grid of t.
    Curve(CurveArgs),
    /// Bracket for the zero of the pressure.
    Dimension(DimensionArgs),
    /// Jumps in the derivative of the depth-n pressure.
    Kink(KinkArgs),
    /// Depth-n entropy of the configured measure.
    Entropy(DepthArgs),
    /// Depth-n t-energy of the configured measure.
    Energy(TDepthArgs),
    /// Depth-n Lyapunov exponents of the configured measure.
    Lyapunov(DepthArgs),
    /// Gap in the variational inequality for the configured measure.
    Gap(TDepthArgs),
    /// Extremes of the Gibbs ratios of the configured measure.
    Gibbs(GibbsArgs),
    /// Cylinder marginals of the empirical equilibrium construction.
    EmpiricalEquilibrium(EquilibriumArgs),
    /// Points of the attractor: all of K_n, or random words with --random.
    Sample(SampleArgs),
    /// Box-counting dimension estimate.
    Boxcount(BoxcountArgs),
    /// Planar cone condition for the matrices and their transposes.
    ConeCheck(ConeArgs),
    /// Finite probe of the quasi-multiplicativity constant D.
    ProbeD(ProbeArgs),
    /// Diagnostic suite of a named fixture.
    Example(ExampleArgs),
}

impl Command {
    pub fn needs_system(&self) -> bool {
        !matches!(self, Command::Example(_))
    }
}

#[derive(Debug, Args)]
pub struct QuasiArgs {
    /// Block length m of a quasi-multiplicative lower bound.
    #[arg(long)]
    quasi_block: Option<usize>,
    /// Constant D; probed at --probe-depth when absent.
    #[arg(long, requires = "quasi_block")]
    quasi_constant: Option<f64>,
    #[arg(long, default_value_t = 4)]
    probe_depth: usize,
}

impl QuasiArgs {
    fn resolve(&self) -> Option<QuasiMultiplicativity> {
        self.quasi_block.map(|block| QuasiMultiplicativity {
            block,
            constant: self.quasi_constant,
            probe_depth: self.probe_depth,
        })
    }
}

#[derive(Debug, Args)]
pub struct PressureArgs {
    #[arg(long)]
    t: f64,
    /// Depths; the smallest resulting bound is reported.
    #[arg(long, value_delimiter = ',', default_value = "12")]
    n: Vec<usize>,
    #[command(flatten)]
    quasi: QuasiArgs,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long, default_value_t = 12)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    start: f64,
    /// Defaults to the dimension of the system.
    #[arg(long)]
    end: Option<f64>,
    #[arg(long, default_value_t = 20)]
    steps: usize,
}

#[derive(Debug, Args)]
pub struct DimensionArgs {
    #[arg(long, default_value_t = 12)]
    n: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[command(flatten)]
    quasi: QuasiArgs,
}

#[derive(Debug, Args)]
pub struct KinkArgs {
    #[arg(long, default_value_t = 12)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    start: f64,
    #[arg(long, default_value_t = 1.0)]
    end: f64,
    #[arg(long, default_value_t = 32)]
    grid: usize,
    #[arg(long, default_value_t = 0.1)]
    threshold: f64,
    #[arg(long, default_value_t = DEFAULT_STEP)]
    h: f64,
}

#[derive(Debug, Args)]
pub struct DepthArgs {
    #[arg(long, default_value_t = 12)]
    n: usize,
}

#[derive(Debug, Args)]
pub struct TDepthArgs {
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 12)]
    n: usize,
}

#[derive(Debug, Args)]
pub struct GibbsArgs {
    #[arg(long)]
    t: f64,
    /// Largest word length checked.
    #[arg(long, default_value_t = 12)]
    n: usize,
    /// Pressure value P in the ratio; defaults to the depth-n pressure at t.
    #[arg(long)]
    pressure: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EquilibriumArgs {
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 12)]
    n: usize,
    /// Cylinder length of the reported marginal.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Use only the unshifted window instead of the shift average.
    #[arg(long)]
    single: bool,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Draw this many random words of length n (seeded) instead of all of K_n.
    #[arg(long)]
    random: Option<usize>,
    /// Write the points here instead of embedding them in the report.
    #[arg(long)]
    csv: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoxcountArgs {
    #[arg(long, default_value_t = 14)]
    n: usize,
    /// Average log N over this many shifted grids instead of the origin grid.
    #[arg(long)]
    shifted: Option<usize>,
    /// Write (epsilon, N) pairs here.
    #[arg(long)]
    csv: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConeArgs {
    /// Cone axis.
    #[arg(long, value_delimiter = ',', default_values_t = [FRAC_1_SQRT_2, FRAC_1_SQRT_2])]
    theta: Vec<f64>,
    /// Full aperture in radians, in (0, π/2).
    #[arg(long, default_value_t = FRAC_PI_2 - 0.01)]
    beta: f64,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 6)]
    depth: usize,
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    /// One of not-unique, no-semiconformal, nondifferentiable, tractable.
    name: String,
}

impl ExampleArgs {
    pub fn name(&self) -> &str {
        &self.name
    }
}

fn num(field: &str, x: f64) -> CliResult<Value> {
    if x.is_finite() {
        Ok(json!(x))
    } else {
        Err(CliError::NonFinite(field.to_string()))
    }
}

fn assumption(a: &Assumption) -> Value {
    match a {
        Assumption::None => json!("none"),
        Assumption::QuasiMultiplicative {
            constant,
            block,
            probe_depth,
        } => json!({
            "quasi_multiplicative": {
                "constant": constant,
                "block": block,
                "probe_depth": probe_depth,
            }
        }),
    }
}

/// Formats with 17 significant digits.
fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Headerless, one record per line.
fn write_csv(path: &Path, rows: impl Iterator<Item = String>) -> CliResult<()> {
    let mut out = String::new();
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|source| CliError::Io {
        context: format!("writing {}", path.display()),
        source,
    })
}

pub fn run(command: &Command, loaded: Option<&Loaded>) -> CliResult<Value> {
    if let Command::Example(args) = command {
        return example(&args.name);
    }
    let loaded = loaded.ok_or_else(|| {
        CliError::Usage("a system is required: pass --config, --fixture or --inline".into())
    })?;
    let sys = loaded.system();
    match command {
        Command::Pressure(a) => {
            let up = pressure_upper(a.t, &a.n, sys).context("pressure upper bound")?;
            let (lower, assume) = match a.quasi.resolve() {
                None => (Value::Null, assumption(&Assumption::None)),
                Some(q) => {
                    let low = pressure_lower(a.t, &q, sys).context("pressure lower bound")?;
                    (
                        num("lower", low.lower.expect("lower bound is set"))?,
                        assumption(&low.assumption),
                    )
                }
            };
            Ok(json!({
                "t": a.t,
                "upper": num("upper", up.upper)?,
                "lower": lower,
                "assumption": assume,
                "n": up.n_used,
            }))
        }
        Command::Curve(a) => {
            let p = DepthPressure::new(sys, a.n).context("depth pressure")?;
            let end = a.end.unwrap_or(sys.dim() as f64);
            let points = pressure_curve(&p, a.start, end, a.steps)
                .into_iter()
                .map(|(t, v)| {
                    Ok(json!({"t": t, "upper": num("upper", v)?, "lower": null, "assumption": "none", "n": a.n}))
                })
                .collect::<CliResult<Vec<_>>>()?;
            Ok(json!({ "n": a.n, "points": points }))
        }
        Command::Dimension(a) => {
            let q = a.quasi.resolve();
            let b = singularity_dimension(a.n, a.tol, sys, q.as_ref())
                .context("singularity dimension")?;
            Ok(json!({
                "upper": num("upper", b.s_upper)?,
                "lower": b.s_lower,
                "assumption": assumption(&b.assumption),
                "n": b.n_used,
                "tolerance": b.tolerance,
            }))
        }
        Command::Kink(a) => kink(sys, a.n, a.start, a.end, a.grid, a.threshold, a.h),
        Command::Entropy(a) => {
            let h = entropy_finite(loaded.measure()?, a.n, sys).context("entropy")?;
            Ok(json!({ "n": h.n, "value": num("value", h.value)? }))
        }
        Command::Energy(a) => {
            let e = energy_finite(loaded.measure()?, a.t, a.n, sys).context("energy")?;
            Ok(json!({ "t": a.t, "n": e.n, "value": num("value", e.value)? }))
        }
        Command::Lyapunov(a) => {
            let ly = lyapunov(loaded.measure()?, a.n, sys).context("Lyapunov exponents")?;
            let exps = ly
                .iter()
                .map(|&x| num("exponents", x))
                .collect::<CliResult<Vec<_>>>()?;
            Ok(json!({ "n": a.n, "exponents": exps }))
        }
        Command::Gap(a) => {
            let g = equilibrium_gap(loaded.measure()?, a.t, a.n, sys).context("equilibrium gap")?;
            Ok(json!({ "t": a.t, "n": g.n, "value": num("value", g.value)? }))
        }
        Command::Gibbs(a) => {
            let pressure = match a.pressure {
                Some(p) => p,
                None => DepthPressure::new(sys, a.n)
                    .context("depth pressure")?
                    .pressure(a.t),
            };
            let r =
                gibbs_ratios(loaded.measure()?, a.t, pressure, a.n, sys).context("Gibbs ratios")?;
            gibbs_json(&r)
        }
        Command::EmpiricalEquilibrium(a) => {
            let cd = empirical_equilibrium(a.t, a.n, a.k, !a.single, sys)
                .context("empirical equilibrium")?;
            let c = check_consistency(&cd).context("consistency check")?;
            let cylinders: Vec<Value> = cd
                .weights()
                .iter()
                .map(|(w, m)| json!({ "word": w.to_string(), "mass": m }))
                .collect();
            Ok(json!({
                "t": a.t,
                "n": a.n,
                "k": a.k,
                "averaged": !a.single,
                "cylinders": cylinders,
                "consistent": c.consistent,
                "max_defect": c.max_defect,
            }))
        }
        Command::Sample(a) => sample(loaded, a),
        Command::Boxcount(a) => {
            let cloud = attractor_sample(a.n, &loaded.ifs).context("attractor sample")?;
            let options = BoxCountOptions {
                anchor: a.shifted.map_or(GridAnchor::Origin, GridAnchor::Shifted),
                ..Default::default()
            };
            let r = box_count(&cloud, &options).context("box counting")?;
            if let Some(path) = &a.csv {
                write_csv(
                    path,
                    r.scales
                        .iter()
                        .zip(&r.counts)
                        .map(|(e, c)| format!("{},{}", sig17(*e), sig17(*c))),
                )?;
            }
            Ok(json!({
                "n": a.n,
                "points": cloud.len(),
                "resolution": cloud.resolution(),
                "anchor": a.shifted.map_or(json!("origin"), |k| json!({ "shifted": k })),
                "scales": r.scales,
                "counts": r.counts,
                "window": [r.window.0, r.window.1],
                "slope": num("slope", r.slope)?,
                "intercept": r.intercept,
                "r_squared": r.r_squared,
                "csv": a.csv.as_ref().map(|p| p.display().to_string()),
            }))
        }
        Command::ConeCheck(a) => {
            if a.theta.len() != 2 {
                return Err(CliError::Usage(format!(
                    "--theta needs 2 components, got {}",
                    a.theta.len()
                )));
            }
            let r = check_cone_condition(sys.matrices(), [a.theta[0], a.theta[1]], a.beta)
                .context("cone check")?;
            Ok(json!({ "holds": r.holds, "margin": r.margin, "theta": a.theta, "beta": a.beta }))
        }
        Command::ProbeD(a) => {
            let p = probe_quasimultiplicativity(a.t, a.depth, sys.automaton(), sys.matrices())
                .context("quasi-multiplicativity probe")?;
            Ok(json!({
                "t": p.t,
                "depth": p.depth,
                "constant": num("constant", p.constant())?,
                "log_constant": p.log_constant,
                "pairs": p.pairs,
            }))
        }
        Command::Example(_) => unreachable!("handled above"),
    }
}

fn kink(
    sys: &subaffine::MatrixSystem,
    n: usize,
    start: f64,
    end: f64,
    grid: usize,
    threshold: f64,
    h: f64,
) -> CliResult<Value> {
    let p = DepthPressure::new(sys, n).context("depth pressure")?;
    let kinks =
        detect_kink(|t| p.pressure(t), start, end, grid, threshold, h).context("kink detection")?;
    let list: Vec<Value> = kinks
        .iter()
        .map(|k| json!({ "t": k.t, "jump": k.jump }))
        .collect();
    Ok(json!({ "n": n, "range": [start, end], "threshold": threshold, "kinks": list }))
}

fn gibbs_json(r: &GibbsReport) -> CliResult<Value> {
    let per_depth: Vec<Value> = r
        .per_depth
        .iter()
        .map(|d| json!({ "n": d.n, "min_ratio": d.min_ratio, "max_ratio": d.max_ratio }))
        .collect();
    Ok(json!({
        "t": r.t,
        "pressure": r.pressure,
        "max_depth": r.max_depth,
        "min_ratio": num("min_ratio", r.min_ratio)?,
        "max_ratio": num("max_ratio", r.max_ratio)?,
        "per_depth": per_depth,
    }))
}

/// Random words of length `n` built letter by letter, each step uniform over
/// the allowed successors.
fn random_cloud(loaded: &Loaded, n: usize, count: usize) -> CliResult<PointCloud> {
    if n == 0 || count == 0 {
        return Err(CliError::Usage("--n and --random must be positive".into()));
    }
    let automaton = loaded.system().automaton();
    let mut rng = ChaCha8Rng::seed_from_u64(loaded.config.seed);
    let mut coords = Vec::with_capacity(count * loaded.ifs.dim());
    let mut word = Vec::with_capacity(n);
    for _ in 0..count {
        word.clear();
        let mut node = automaton.root();
        for _ in 0..n {
            let next = automaton.successors(node);
            let (letter, to) = next[rng.gen_range(0..next.len())];
            word.push(letter);
            node = to;
        }
        coords.extend(loaded.ifs.project(&word).context("projection")?);
    }
    PointCloud::new(loaded.ifs.dim(), coords, loaded.ifs.resolution(n)).context("point cloud")
}

fn sample(loaded: &Loaded, a: &SampleArgs) -> CliResult<Value> {
    let cloud = match a.random {
        Some(count) => random_cloud(loaded, a.n, count)?,
        None => attractor_sample(a.n, &loaded.ifs).context("attractor sample")?,
    };
    let rows = cloud.points().map(|p| {
        let mut line = String::new();
        for (k, x) in p.iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            let _ = write!(line, "{}", sig17(*x));
        }
        line
    });
    let mut results = Map::new();
    results.insert("n".into(), json!(a.n));
    results.insert("points".into(), json!(cloud.len()));
    results.insert("random".into(), json!(a.random.is_some()));
    results.insert("resolution".into(), json!(cloud.resolution()));
    results.insert("diameter".into(), json!(cloud.diameter()));
    match &a.csv {
        Some(path) => {
            write_csv(path, rows)?;
            results.insert("csv".into(), json!(path.display().to_string()));
        }
        None => {
            let coords: Vec<&[f64]> = cloud.points().collect();
            results.insert("coords".into(), json!(coords));
        }
    }
    Ok(Value::Object(results))
}

fn example(name: &str) -> CliResult<Value> {
    let ifs = fixtures::by_name(name).context("fixture")?;
    let sys = ifs.system();
    let dimension = |n: usize| -> CliResult<Value> {
        let b = singularity_dimension(n, 1e-10, sys, None).context("singularity dimension")?;
        Ok(
            json!({ "upper": num("upper", b.s_upper)?, "lower": null, "assumption": "none", "n": n }),
        )
    };
    match name {
        "not-unique" => {
            let s = fixtures::not_unique_dimension();
            let (mu, nu) = fixtures::not_unique_measures().context("equilibrium measures")?;
            let eta = Measure::mixture(vec![(0.5, mu.clone()), (0.5, nu)]).context("mixture")?;
            let gibbs_mu = gibbs_ratios(&mu, s, 0.0, 16, sys).context("Gibbs ratios")?;
            let gibbs_eta = gibbs_ratios(&eta, s, 0.0, 12, sys).context("Gibbs ratios")?;
            let gap = equilibrium_gap(&mu, s, 16, sys).context("equilibrium gap")?;
            let entropy = mu.entropy_closed().context("entropy")?;
            let energy = energy_finite(&mu, s, 10_000, sys).context("energy")?;
            Ok(json!({
                "fixture": name,
                "closed_form_dimension": s,
                "dimension": dimension(20)?,
                "gibbs_mu": gibbs_json(&gibbs_mu)?,
                "gibbs_mixture": gibbs_json(&gibbs_eta)?,
                "gap_mu": { "t": s, "n": gap.n, "value": gap.value },
                "entropy_plus_energy_mu": { "t": s, "n": energy.n, "value": entropy + energy.value },
            }))
        }
        "no-semiconformal" => {
            let s = 0.5;
            let uniform = Measure::bernoulli(vec![0.5, 0.5]).context("uniform measure")?;
            let g = gibbs_ratios(&uniform, s, 0.0, 16, sys).context("Gibbs ratios")?;
            let scaled: Vec<Value> = g
                .per_depth
                .iter()
                .filter(|d| d.n % 4 == 0)
                .map(|d| json!({ "n": d.n, "min_ratio_times_n_pow_s": d.min_ratio * (d.n as f64).powf(s) }))
                .collect();
            Ok(json!({
                "fixture": name,
                "closed_form_dimension": s,
                "dimension": dimension(16)?,
                "gibbs_uniform": gibbs_json(&g)?,
                "scaled_min_ratio": scaled,
            }))
        }
        "nondifferentiable" => Ok(json!({
            "fixture": name,
            "closed_form_kink": fixtures::nondifferentiable_kink(),
            "kink": kink(sys, 4096, 0.5, 1.0, 32, 0.1, DEFAULT_STEP)?,
            "dimension": dimension(64)?,
        })),
        "tractable" => {
            let cloud = attractor_sample(16, &ifs).context("attractor sample")?;
            let plane = hyperplane_check(&cloud).context("hyperplane check")?;
            let boxes = box_count(&cloud, &BoxCountOptions::default()).context("box counting")?;
            let inclusion = inclusion_check(
                &attractor_sample(10, &ifs).context("attractor sample")?,
                &ifs,
            )
            .context("inclusion check")?;
            let cone = check_cone_condition(
                sys.matrices(),
                [FRAC_1_SQRT_2, FRAC_1_SQRT_2],
                FRAC_PI_2 - 0.01,
            )
            .context("cone check")?;
            Ok(json!({
                "fixture": name,
                "dimension": dimension(14)?,
                "affine_rank": plane.affine_rank,
                "in_hyperplane": plane.contained,
                "box_count": { "n": 16, "slope": num("slope", boxes.slope)?, "r_squared": boxes.r_squared },
                "inclusion": { "n": 10, "max_defect": inclusion.max_defect, "sampling_bound": inclusion.sampling_bound },
                "cone": { "holds": cone.holds, "margin": cone.margin },
            }))
        }
        other => Err(CliError::Usage(format!(
            "unknown example {other:?}; choose one of {}",
            fixtures::NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig17_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 12345.678901234567] {
            let s = sig17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
        }
    }

    #[test]
    fn non_finite_values_are_rejected() {
        assert!(num("x", 1.5).is_ok());
        assert!(matches!(num("x", f64::NAN), Err(CliError::NonFinite(f)) if f == "x"));
    }

    #[test]
    fn unknown_example() {
        assert_eq!(example("cantor").unwrap_err().exit_code(), 2);
        assert_eq!(example("nope").unwrap_err().exit_code(), 2);
    }
}
