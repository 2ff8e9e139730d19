//! The `relext` command line.
//!
//! Exit status: 0 on success, 1 when a check fails or an input is rejected (any report
//! is still written), 2 on usage errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::dynamics::PartialRelation;
use crate::error::{Error, Result};
use crate::io::{self, Loader, SpaceFile, SubsetFile};
use crate::metric::{
    components_at_gap, sample_circle, sample_interval, sample_interval_and_point, sample_torus, validate_metric,
    FiniteMetricSpace,
};
use crate::obstruction::{
    brute_force_extension_exists_with, torus_non_self_tietze_demo, DiscreteCircleMap, SearchMode, TorusDemoParams,
};
use crate::relation::{check_usc_modulus, compose, equal_on, same_space, usc_certificate, SetValuedMap};
use crate::tietze::{
    clopen_separation_witness, extend_and_verify, extend_via_retraction, nearest_point_retraction_with,
    separation_witness, ArgminTolerance,
};
use crate::{par, random};

pub const THREADS_ENV: &str = "RELEXT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "relext", version, about = "Extend set-valued maps on finite metric spaces")]
pub struct Cli {
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct ExtendArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    subset: PathBuf,
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Absolute argmin tolerance; automatic when omitted.
    #[arg(long)]
    tau: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SampleKind {
    Interval,
    Circle,
    Torus,
    /// `[0, 1]` sampled at `resolution` points plus the isolated point 2.
    IntervalPoint,
    /// Random integer-grid or Euclidean points.
    Random,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a space file against the metric axioms, and optionally a subset and map.
    Validate {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        subset: Option<PathBuf>,
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extend a map from a closed subset through the nearest-point relation.
    Extend(ExtendArgs),
    /// Extend a map through the lowest-index nearest-point retraction.
    ExtendRetract(ExtendArgs),
    /// Compose two maps: the first `--map` is applied first.
    Compose {
        #[arg(long, num_args = 1, required = true)]
        map: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Check the (δ, ε) modulus condition on a grid of values.
    CheckUsc {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, required = true)]
        delta: Vec<f64>,
        #[arg(long, required = true)]
        eps: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Separate two disjoint subsets; with `--gap`, through a clopen set.
    Separate {
        #[arg(long)]
        space: PathBuf,
        /// `A`, `B`, and optionally the clopen set `E`.
        #[arg(long, required = true)]
        subset: Vec<PathBuf>,
        #[arg(long)]
        gap: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reachable sets and infinite-trajectory witnesses of a self-map.
    Reach {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        start: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Winding number of a residue loop.
    Winding {
        /// JSON array of residues.
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        resolution: usize,
        #[arg(long, default_value_t = 1)]
        step_bound: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustively search for a discretely continuous extension over a disk.
    BruteExt {
        #[arg(long)]
        disk: PathBuf,
        /// JSON array of boundary residues.
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        resolution: usize,
        #[arg(long, default_value_t = 1)]
        step_bound: usize,
        #[arg(long)]
        parallel: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Circle-valued obstruction versus set-valued extension on a sampled torus.
    TorusDemo {
        /// Torus side and circle resolution.
        #[arg(long, default_value_t = 8)]
        resolution: usize,
        #[arg(long, default_value_t = 4)]
        patch: usize,
        #[arg(long, default_value_t = 1)]
        step_bound: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a sampled space, optionally with a random subset and map on it.
    Sample {
        #[arg(long, value_enum)]
        kind: SampleKind,
        #[arg(long)]
        resolution: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        subset_out: Option<PathBuf>,
        #[arg(long)]
        map_out: Option<PathBuf>,
    },
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Ok(threads) = std::env::var(THREADS_ENV) {
        match threads.trim().parse::<usize>() {
            Ok(t) => par::configure_threads(t),
            Err(_) => {
                eprintln!("error: {THREADS_ENV} must be a non-negative integer, got {threads:?}");
                return 2;
            }
        }
    }
    match execute(cli) {
        Ok(Outcome::Pass) => 0,
        Ok(Outcome::Fail) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    fn from_ok(ok: bool) -> Self {
        if ok { Outcome::Pass } else { Outcome::Fail }
    }
}

fn emit<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    match out {
        Some(path) => io::write_json(path, value),
        None => {
            print!("{}", io::to_json_string(value));
            Ok(())
        }
    }
}

fn tolerance(tau: Option<f64>) -> ArgminTolerance {
    tau.map_or(ArgminTolerance::Auto, ArgminTolerance::Absolute)
}

/// A reference to `target` usable from a file written at `out`.
fn reference_from(out: &Path, target: &Path) -> String {
    let target = fs::canonicalize(target).unwrap_or_else(|_| target.to_path_buf());
    let out_dir = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => fs::canonicalize(p).ok(),
        _ => std::env::current_dir().ok(),
    };
    match (out_dir, target.parent()) {
        (Some(dir), Some(parent)) if dir == parent => target.file_name().expect("file").to_string_lossy().into_owned(),
        _ => target.to_string_lossy().into_owned(),
    }
}

fn relation_refs(loaded_from: &Path) -> Result<(PathBuf, PathBuf)> {
    let file: io::RelationFile = io::read_json(loaded_from)?;
    Ok((io::resolve(loaded_from, &file.domain), io::resolve(loaded_from, &file.codomain)))
}

fn write_relation(out: &Path, map: &SetValuedMap, domain: &Path, codomain: &Path) -> Result<()> {
    let file = io::relation_file(map, &reference_from(out, domain), &reference_from(out, codomain));
    io::write_json(out, &file)
}

fn read_residues(path: &Path) -> Result<Vec<usize>> {
    io::read_json(path)
}

fn load_space_and_subset(
    loader: &mut Loader,
    space_path: &Path,
    subset_path: &Path,
) -> Result<(Arc<FiniteMetricSpace>, crate::metric::ClosedSubset)> {
    let space = loader.space(space_path)?;
    let (subset_space, subset) = loader.subset(subset_path)?;
    if !same_space(&space, &subset_space) {
        return Err(Error::SpaceMismatch("subset refers to a different space than --space"));
    }
    Ok((space, subset))
}

fn execute(cli: Cli) -> Result<Outcome> {
    let seed = cli.seed;
    let mut loader = Loader::new();
    match cli.command {
        Command::Validate { space, subset, map, out } => {
            let file: SpaceFile = io::read_json(&space)?;
            let report = validate_metric(&file.dist)?;
            let mut errors: Vec<String> = Vec::new();
            if file.labels.len() != file.dist.len() {
                errors.push(Error::LabelCount { got: file.labels.len(), expected: file.dist.len() }.to_string());
            }
            if report.is_valid() && errors.is_empty() {
                let mut support = None;
                if let Some(path) = &subset {
                    match loader.subset(path) {
                        Ok((_, a)) => support = Some(a),
                        Err(e) => errors.push(e.to_string()),
                    }
                }
                if let Some(path) = &map {
                    if let Err(e) = loader.relation(path, support.as_ref()) {
                        errors.push(e.to_string());
                    }
                }
            }
            let ok = report.is_valid() && errors.is_empty();
            let messages: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
            emit(
                out.as_deref(),
                &json!({ "valid": ok, "violations": report.violations, "messages": messages, "errors": errors }),
            )?;
            Ok(Outcome::from_ok(ok))
        }
        Command::Extend(args) => {
            let (space, a) = load_space_and_subset(&mut loader, &args.space, &args.subset)?;
            let f = loader.relation(&args.map, Some(&a))?;
            let (big, agrees) = extend_and_verify(&space, &a, &f, tolerance(args.tau))?;
            finish_extension(&args, &big, agrees, json!({}))
        }
        Command::ExtendRetract(args) => {
            let (space, a) = load_space_and_subset(&mut loader, &args.space, &args.subset)?;
            let f = loader.relation(&args.map, Some(&a))?;
            let r = nearest_point_retraction_with(&space, &a, tolerance(args.tau))?;
            let big = extend_via_retraction(&f, &r)?;
            let agrees = equal_on(&big, &f, &a)?;
            finish_extension(&args, &big, agrees, json!({ "retraction": r.assignments() }))
        }
        Command::Compose { map, out, dot } => {
            let [inner, outer] = map.as_slice() else {
                return Err(Error::InvalidArgument("compose takes exactly two --map files".into()));
            };
            let g = loader.relation(inner, None)?;
            let f = loader.relation(outer, None)?;
            let composed = compose(&g, &f)?;
            let (domain, _) = relation_refs(inner)?;
            let (_, codomain) = relation_refs(outer)?;
            write_relation(&out, &composed, &domain, &codomain)?;
            if let Some(dot) = dot {
                io::write_text(&dot, &composed.to_dot())?;
            }
            emit(None, &json!({ "command": "compose", "pairs": composed.pairs().len() }))?;
            Ok(Outcome::Pass)
        }
        Command::CheckUsc { map, delta, eps, out } => {
            let f = loader.relation(&map, None)?;
            let cert = usc_certificate(&f, &delta, &eps)?;
            let mut witnesses = Vec::new();
            for row in cert.rows.iter().filter(|r| !r.holds) {
                let check = check_usc_modulus(&f, row.delta, row.eps)?;
                witnesses.push(json!({ "delta": row.delta, "eps": row.eps, "witness": check.witness }));
            }
            let ok = witnesses.is_empty();
            emit(out.as_deref(), &json!({ "holds": ok, "rows": cert.rows, "failures": witnesses }))?;
            Ok(Outcome::from_ok(ok))
        }
        Command::Separate { space, subset, gap, out } => {
            let space_arc = loader.space(&space)?;
            let mut sets = Vec::new();
            for path in &subset {
                let (_, s) = load_space_and_subset(&mut loader, &space, path)?;
                sets.push(s);
            }
            let trace: Value = match (sets.as_slice(), gap) {
                ([a, b], None) => serde_json::to_value(separation_witness(&space_arc, a, b)?).expect("serializable"),
                ([a, b, rest @ ..], Some(gap)) if rest.len() <= 1 => {
                    let clopen = match rest.first() {
                        Some(e) => e.members().clone(),
                        None => components_at_gap(&space_arc, gap)
                            .into_iter()
                            .find(|c| c.contains(a.lowest()))
                            .expect("components cover the space"),
                    };
                    let mut v = serde_json::to_value(clopen_separation_witness(&space_arc, a, b, &clopen, gap)?)
                        .expect("serializable");
                    v["gap"] = json!(gap);
                    v
                }
                _ => {
                    return Err(Error::InvalidArgument(
                        "separate takes --subset A --subset B, plus an optional clopen --subset E with --gap".into(),
                    ))
                }
            };
            emit(out.as_deref(), &trace)?;
            Ok(Outcome::Pass)
        }
        Command::Reach { map, start, out, dot } => {
            let f = loader.relation(&map, None)?;
            let dynamics = PartialRelation::from_map(&f)?;
            let starts: Vec<usize> = match start {
                Some(x) => {
                    f.domain().check_index(x)?;
                    vec![x]
                }
                None => (0..dynamics.len()).collect(),
            };
            let reachable = dynamics.all_reachable_sets();
            let infinite = dynamics.infinite_trajectory_points();
            let mut points = Vec::new();
            for &x in &starts {
                points.push(json!({
                    "x": x,
                    "reachable": reachable[x],
                    "infinite": infinite.contains(x),
                    "witness": dynamics.infinite_trajectory_witness(x)?,
                }));
            }
            if let Some(dot) = dot {
                let highlight = start.map(|x| reachable[x].clone());
                io::write_text(&dot, &f.to_dot_highlighted(highlight.as_ref()))?;
            }
            emit(out.as_deref(), &json!({ "points": points, "dead_ends": dynamics.dead_ends() }))?;
            Ok(Outcome::Pass)
        }
        Command::Winding { map, resolution, step_bound, out } => {
            let m = DiscreteCircleMap::new(resolution, read_residues(&map)?, step_bound)?;
            let winding = m.winding_number()?;
            emit(out.as_deref(), &json!({ "winding": winding, "obstruction_sound": m.obstruction_sound() }))?;
            Ok(Outcome::Pass)
        }
        Command::BruteExt { disk, map, resolution, step_bound, parallel, out } => {
            let disk = io::load_disk(&disk)?;
            let m = DiscreteCircleMap::new(resolution, read_residues(&map)?, step_bound)?;
            let mode = if parallel { SearchMode::BranchParallel } else { SearchMode::Sequential };
            let search = brute_force_extension_exists_with(&disk, &m, mode)?;
            let winding = m.winding_number().ok();
            emit(out.as_deref(), &json!({ "search": search, "boundary_winding": winding }))?;
            Ok(Outcome::Pass)
        }
        Command::TorusDemo { resolution, patch, step_bound, out } => {
            let params = TorusDemoParams {
                torus_rows: resolution,
                torus_cols: resolution,
                patch,
                circle: resolution,
                step_bound,
            };
            let report = torus_non_self_tietze_demo(&params)?;
            emit(out.as_deref(), &report)?;
            Ok(Outcome::Pass)
        }
        Command::Sample { kind, resolution, out, subset_out, map_out } => {
            let mut rng = random::rng(seed);
            let space = match kind {
                SampleKind::Interval => sample_interval(0.0, 1.0, resolution)?,
                SampleKind::Circle => sample_circle(resolution)?,
                SampleKind::Torus => sample_torus(resolution, resolution)?,
                SampleKind::IntervalPoint => sample_interval_and_point(0.0, 1.0, resolution, 2.0)?,
                SampleKind::Random if resolution == 0 => {
                    return Err(Error::InvalidArgument("random space needs at least 1 point".into()))
                }
                SampleKind::Random => random::space(&mut rng, resolution),
            };
            io::write_json(&out, &SpaceFile::from(&space))?;
            let space = Arc::new(space);
            let subset = random::subset(&mut rng, &space, 0.3);
            if let Some(path) = &subset_out {
                io::write_json(path, &SubsetFile { space: reference_from(path, &out), members: subset.iter().collect() })?;
            }
            if let Some(path) = &map_out {
                let f = random::map_on(&mut rng, &space, &subset, &space, 3);
                write_relation(path, &f, &out, &out)?;
            }
            Ok(Outcome::Pass)
        }
    }
}

fn finish_extension(args: &ExtendArgs, big: &SetValuedMap, agrees: bool, extra: Value) -> Result<Outcome> {
    write_relation(&args.out, big, &args.space, &args.space)?;
    if let Some(dot) = &args.dot {
        io::write_text(dot, &big.to_dot())?;
    }
    let mut summary = json!({
        "equal_on": if agrees { "ok" } else { "mismatch" },
        "total": big.is_total(),
        "pairs": big.pairs().len(),
    });
    if let (Value::Object(s), Value::Object(e)) = (&mut summary, extra) {
        s.extend(e);
    }
    emit(None, &summary)?;
    Ok(Outcome::from_ok(agrees))
}
