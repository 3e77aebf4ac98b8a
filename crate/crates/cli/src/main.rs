//! `subsharp`: greedy runs, sharpness analysis and budget sweeps from the
//! command line.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 a realized greedy run
//! missed a fitted guarantee, 4 resource limit exceeded.

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use subsharp::families::{validate_monotone_submodular, Modular};
use subsharp::harness::{
    analyze, run_experiment, sample_instance, write_report, AnalysisOptions, AnalysisReport, ExperimentConfig,
    Family, FeatureSource, Format, InstanceSpec, RatingsSource, ValidateMode, DEFAULT_DIM, DEFAULT_USERS,
};
use subsharp::optimize::{greedy, lazy_greedy, optima_from_table};
use subsharp::sharpness::{
    construct_sharp_linear, fit_monotonic, guarantee_static, holds_monotonic_over, Admissible, FitOptions, Grid,
    Membership, Notion, SharpParams,
};
use subsharp::{Error, Subset, Table};

const EXIT_USAGE: u8 = 2;
const EXIT_UNSOUND: u8 = 3;
const EXIT_RESOURCE: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "subsharp", version, about = "Greedy submodular maximization with sharpness guarantees")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    #[command(flatten)]
    global: Global,
}

#[derive(Args, Debug)]
struct Global {
    /// JSON instance spec; inline flags override its fields.
    #[arg(long, global = true)]
    spec: Option<PathBuf>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format: json or csv.
    #[arg(long, global = true)]
    format: Option<Format>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true)]
    c_max: Option<f64>,

    #[arg(long, global = true)]
    c_step: Option<f64>,

    /// Relaxation used by the approximate notion.
    #[arg(long, global = true)]
    delta: Option<f64>,

    /// Rows per budget in `experiment`.
    #[arg(long, global = true, default_value_t = 1)]
    repeats: usize,

    /// Comma-separated subset of monotonic, dynamic-monotonic, submodular,
    /// dynamic-submodular, approximate, curvature, or `all`.
    #[arg(long, global = true, value_delimiter = ',')]
    notions: Option<Vec<String>>,

    /// Use lazy greedy.
    #[arg(long, global = true)]
    lazy: bool,

    /// Stop the c sweep at the first point that does not improve the bound.
    #[arg(long, global = true)]
    paper_heuristic: bool,

    /// Validate submodularity: auto (n <= 12), always or never.
    #[arg(long, global = true, default_value = "auto", value_parser = parse_validate)]
    validate: ValidateMode,

    /// More log output on stderr; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(flatten)]
    family: FamilyFlags,
}

/// Inline instance flags, mirroring the JSON spec.
#[derive(Args, Debug, Default)]
struct FamilyFlags {
    /// modular, concave_modular, truncation, nwf_coverage,
    /// facility_location, concave_ratings, information_gain, exemplar.
    #[arg(long, global = true)]
    family: Option<String>,

    #[arg(short = 'n', long, global = true)]
    n: Option<usize>,

    #[arg(short = 'k', long, global = true)]
    k: Option<usize>,

    #[arg(long, global = true, value_delimiter = ',')]
    weights: Option<Vec<f64>>,

    #[arg(long, global = true)]
    alpha: Option<f64>,

    /// Ratings CSV, one row per user.
    #[arg(long, global = true)]
    ratings: Option<PathBuf>,

    /// Feature CSV, one row per point.
    #[arg(long, global = true)]
    features: Option<PathBuf>,

    /// The CSV input has a header row.
    #[arg(long, global = true)]
    header: bool,

    /// Keep only the first users of a ratings file, or the number of
    /// synthetic users.
    #[arg(long, global = true)]
    users: Option<usize>,

    /// Synthetic item or point pool size.
    #[arg(long, global = true)]
    items: Option<usize>,

    #[arg(long, global = true)]
    dim: Option<usize>,

    /// Leave feature vectors as read.
    #[arg(long, global = true)]
    raw_features: bool,

    #[arg(long, global = true)]
    h: Option<f64>,

    #[arg(long, global = true)]
    sigma: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run greedy on one instance and print its trajectory.
    Greedy,
    /// Full analysis of one instance.
    Analyze,
    /// Sweep budgets with n = 2k and emit one row per instance.
    Experiment {
        #[arg(long, default_value_t = 5)]
        k_min: usize,
        #[arg(long, default_value_t = 10)]
        k_max: usize,
    },
    /// Build `k` linear weights with prescribed (c, theta) sharpness.
    ConstructLinear {
        #[arg(long)]
        c: f64,
        #[arg(long)]
        theta: f64,
    },
    /// Exhaustively check monotonicity and submodularity.
    Validate,
}

fn parse_validate(s: &str) -> Result<ValidateMode, String> {
    match s {
        "auto" => Ok(ValidateMode::Auto),
        "always" => Ok(ValidateMode::Always),
        "never" => Ok(ValidateMode::Never),
        _ => Err(format!("expected auto, always or never, got '{s}'")),
    }
}

/// A failure with its exit code.
struct Fail(u8, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Resource(_) => EXIT_RESOURCE,
            _ => EXIT_USAGE,
        };
        Fail(code, e.to_string())
    }
}

impl From<io::Error> for Fail {
    fn from(e: io::Error) -> Self {
        Fail(EXIT_USAGE, e.to_string())
    }
}

fn fail(msg: impl Into<String>) -> Fail {
    Fail(EXIT_USAGE, msg.into())
}

type CmdResult = Result<(), Fail>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    let result = match &cli.cmd {
        Cmd::Greedy => cmd_greedy(&cli.global),
        Cmd::Analyze => cmd_analyze(&cli.global),
        Cmd::Experiment { k_min, k_max } => cmd_experiment(&cli.global, *k_min, *k_max),
        Cmd::ConstructLinear { c, theta } => cmd_construct_linear(&cli.global, *c, *theta),
        Cmd::Validate => cmd_validate(&cli.global),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn output(g: &Global) -> io::Result<Box<dyn Write>> {
    Ok(match &g.out {
        Some(path) => Box::new(io::BufWriter::new(std::fs::File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json_line(g: &Global, values: &[serde_json::Value]) -> CmdResult {
    let mut w = output(g)?;
    for v in values {
        writeln!(w, "{v}")?;
    }
    w.flush()?;
    Ok(())
}

fn grid(g: &Global, base: Grid) -> Result<Grid, Fail> {
    Ok(Grid::new(g.c_max.unwrap_or(base.c_max), g.c_step.unwrap_or(base.c_step))?)
}

fn ratings_source(f: &FamilyFlags, base: Option<RatingsSource>) -> RatingsSource {
    match (&f.ratings, base) {
        (Some(path), _) => RatingsSource::Csv {
            path: path.clone(),
            header: f.header,
            users: f.users,
        },
        (None, Some(base)) if f.users.is_none() && f.items.is_none() => base,
        _ => RatingsSource::Synthetic {
            users: f.users.unwrap_or(DEFAULT_USERS),
            items: f.items,
            seed: None,
        },
    }
}

fn feature_source(f: &FamilyFlags, base: Option<FeatureSource>) -> FeatureSource {
    match (&f.features, base) {
        (Some(path), _) => FeatureSource::Csv {
            path: path.clone(),
            header: f.header,
            normalize: !f.raw_features,
        },
        (None, Some(base)) if f.items.is_none() && f.dim.is_none() => base,
        _ => FeatureSource::Synthetic {
            points: f.items,
            dim: f.dim.unwrap_or(DEFAULT_DIM),
            seed: None,
        },
    }
}

/// Family from `--family`, merged over the spec file's family when they
/// name the same one.
fn family(f: &FamilyFlags, base: Option<&Family>) -> Result<Family, Fail> {
    let name = match (&f.family, base) {
        (Some(name), _) => name.replace('-', "_"),
        (None, Some(b)) => b.name().to_string(),
        (None, None) => return Err(fail("no instance given; pass --spec or --family")),
    };
    let base = base.filter(|b| b.name() == name);
    let fam = match name.as_str() {
        "modular" => Family::Modular {
            weights: f.weights.clone().or_else(|| match base {
                Some(Family::Modular { weights }) => weights.clone(),
                _ => None,
            }),
        },
        "concave_modular" => {
            let (bw, ba) = match base {
                Some(Family::ConcaveModular { weights, alpha }) => (weights.clone(), Some(*alpha)),
                _ => (None, None),
            };
            Family::ConcaveModular {
                weights: f.weights.clone().or(bw),
                alpha: f
                    .alpha
                    .or(ba)
                    .ok_or_else(|| fail("concave_modular needs --alpha"))?,
            }
        }
        "truncation" => Family::Truncation,
        "nwf_coverage" => Family::NwfCoverage,
        "facility_location" => Family::FacilityLocation {
            ratings: ratings_source(
                f,
                match base {
                    Some(Family::FacilityLocation { ratings }) => Some(ratings.clone()),
                    _ => None,
                },
            ),
        },
        "concave_ratings" => {
            let (br, ba) = match base {
                Some(Family::ConcaveRatings { ratings, alpha }) => (Some(ratings.clone()), Some(*alpha)),
                _ => (None, None),
            };
            Family::ConcaveRatings {
                ratings: ratings_source(f, br),
                alpha: f.alpha.or(ba).unwrap_or(0.8),
            }
        }
        "information_gain" => {
            let (bf, bh, bs) = match base {
                Some(Family::InformationGain { features, h, sigma }) => {
                    (Some(features.clone()), Some(*h), Some(*sigma))
                }
                _ => (None, None, None),
            };
            Family::InformationGain {
                features: feature_source(f, bf),
                h: f.h.or(bh).unwrap_or(0.75),
                sigma: f.sigma.or(bs).unwrap_or(1.0),
            }
        }
        "exemplar" => Family::Exemplar {
            features: feature_source(
                f,
                match base {
                    Some(Family::Exemplar { features }) => Some(features.clone()),
                    _ => None,
                },
            ),
        },
        other => return Err(fail(format!("unknown family '{other}'"))),
    };
    Ok(fam)
}

fn default_n(fam: &Family, k: usize) -> usize {
    match fam {
        Family::Modular { weights: Some(w) } | Family::ConcaveModular { weights: Some(w), .. } => w.len(),
        _ => fam.paper_n(k),
    }
}

fn base_spec(g: &Global) -> Result<Option<InstanceSpec>, Fail> {
    match &g.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| fail(format!("cannot read spec {}: {e}", path.display())))?;
            Ok(Some(InstanceSpec::from_json(&text)?))
        }
        None => Ok(None),
    }
}

/// The instance described by `--spec` and the inline flags.
fn instance_spec(g: &Global) -> Result<InstanceSpec, Fail> {
    let base = base_spec(g)?;
    let f = &g.family;
    let fam = family(f, base.as_ref().map(|b| &b.family))?;
    let k = f
        .k
        .or(base.as_ref().map(|b| b.k))
        .ok_or_else(|| fail("no budget given; pass -k or a spec with k"))?;
    let n = f
        .n
        .or(base.as_ref().filter(|b| f.k.is_none() || b.k == k).map(|b| b.n))
        .unwrap_or_else(|| default_n(&fam, k));
    let base_grid = base.as_ref().map_or_else(Grid::default, |b| b.grid);
    Ok(InstanceSpec {
        family: fam,
        n,
        k,
        seed: g.seed.or(base.as_ref().map(|b| b.seed)).unwrap_or(0),
        grid: grid(g, base_grid)?,
        delta: g.delta.or(base.as_ref().and_then(|b| b.delta)),
    })
}

fn analysis_options(g: &Global) -> Result<AnalysisOptions, Fail> {
    let mut opts = AnalysisOptions {
        fit: FitOptions {
            paper_heuristic: g.paper_heuristic,
            ..Default::default()
        },
        lazy: g.lazy,
        validate: g.validate,
        ..Default::default()
    };
    if let Some(list) = &g.notions {
        opts.notions.clear();
        opts.curvature = false;
        for item in list {
            match item.trim() {
                "all" => {
                    opts.notions = Notion::ALL.to_vec();
                    opts.curvature = true;
                }
                "curvature" => opts.curvature = true,
                other => {
                    let n: Notion = other.parse()?;
                    if !opts.notions.contains(&n) {
                        opts.notions.push(n);
                    }
                }
            }
        }
    }
    Ok(opts)
}

fn emit(g: &Global, reports: &[AnalysisReport], default: Format) -> CmdResult {
    let format = g.format.unwrap_or(default);
    write_report(reports, format, output(g)?)?;
    let unsound: Vec<String> = reports
        .iter()
        .flat_map(|r| {
            r.violations.iter().map(move |v| {
                format!(
                    "k = {} seed = {}: {} ratio {} below {} bound {}",
                    r.k(),
                    r.instance.seed,
                    v.run,
                    v.ratio,
                    v.source,
                    v.bound
                )
            })
        })
        .collect();
    if unsound.is_empty() {
        Ok(())
    } else {
        Err(Fail(EXIT_UNSOUND, format!("soundness check failed:\n  {}", unsound.join("\n  "))))
    }
}

fn cmd_greedy(g: &Global) -> CmdResult {
    let spec = instance_spec(g)?;
    let inst = sample_instance(&spec)?;
    let run = if g.lazy {
        lazy_greedy(&inst.oracle, spec.k)?
    } else {
        greedy(&inst.oracle, spec.k)?
    };
    let labels: Vec<&str> = run.picks.iter().map(|&e| inst.labels[e].as_str()).collect();
    write_json_line(
        g,
        &[json!({
            "picks": run.picks,
            "labels": labels,
            "values": run.values,
            "queries": run.queries,
        })],
    )
}

fn cmd_analyze(g: &Global) -> CmdResult {
    let spec = instance_spec(g)?;
    let opts = analysis_options(g)?;
    let report = analyze(&spec, &opts)?;
    emit(g, &[report], Format::Json)
}

fn cmd_experiment(g: &Global, k_min: usize, k_max: usize) -> CmdResult {
    let base = base_spec(g)?;
    let fam = family(&g.family, base.as_ref().map(|b| &b.family))?;
    let mut cfg = ExperimentConfig::new(fam, k_min, k_max, g.seed.or(base.as_ref().map(|b| b.seed)).unwrap_or(0));
    cfg.n = g.family.n;
    cfg.repeats = g.repeats;
    cfg.grid = grid(g, base.as_ref().map_or_else(Grid::default, |b| b.grid))?;
    cfg.delta = g.delta.or(base.as_ref().and_then(|b| b.delta));
    let mut opts = analysis_options(g)?;
    if g.notions.is_none() {
        opts.notions = cfg.analysis.notions.clone();
    }
    cfg.analysis = opts;
    let reports = run_experiment(&cfg)?;
    emit(g, &reports, Format::Csv)
}

fn cmd_construct_linear(g: &Global, c: f64, theta: f64) -> CmdResult {
    let k = g.family.k.ok_or_else(|| fail("construct-linear needs -k"))?;
    let weights = construct_sharp_linear(c, theta, k)?;
    let p = SharpParams::new(c, theta)?;
    let f = Modular::new(weights.clone());
    let table = Table::build(&f)?;
    let optima = optima_from_table(&table, k)?;
    // The ground set is S* itself, so only smaller sets say anything.
    let verdict = holds_monotonic_over(&f, Subset::full(k), k, p, Admissible::UpToK)?;
    let fitted = fit_monotonic(
        &table,
        &optima,
        &FitOptions {
            grid: grid(g, Grid::default())?,
            admissible: Admissible::UpToK,
            ..Default::default()
        },
    )?;
    let verified = verdict.holds();
    let mut line = json!({
        "verified": verified,
        "c": c,
        "theta": theta,
        "guarantee": guarantee_static(p),
        "fitted_bound": fitted.bound,
    });
    if let Membership::Violated { set, lhs, rhs } = &verdict {
        line["violator"] = json!({ "set": set, "lhs": lhs, "rhs": rhs });
    }
    write_json_line(g, &[json!({ "weights": weights.as_slice() }), line])?;
    if verified {
        Ok(())
    } else {
        Err(Fail(EXIT_UNSOUND, format!("constructed weights fail the ({c}, {theta}) inequality")))
    }
}

fn cmd_validate(g: &Global) -> CmdResult {
    let spec = instance_spec(g)?;
    let inst = sample_instance(&spec)?;
    let report = validate_monotone_submodular(&inst.oracle)?;
    write_json_line(g, &[serde_json::to_value(&report).map_err(|e| fail(e.to_string()))?])?;
    if report.passed {
        Ok(())
    } else {
        Err(fail(format!("{} instance is not monotone submodular", spec.family)))
    }
}
