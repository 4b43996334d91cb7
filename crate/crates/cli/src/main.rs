//! `ineqmine`: equality and facet mining over explicit point sets, plus the TSP tooling.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ineqmine::facetminer::oracle::{brute_force_facets, ORACLE_LIMIT};
use ineqmine::facetminer::{
    classify_face, display_form, mine, redundancy_check, tight_indicator, FacetError,
    FacetSearchConfig, Redundancy, Termination,
};
use ineqmine::optimizer::Mode;
use ineqmine::polytope::random::random_embedded_01_polytope;
use ineqmine::polytope::{
    eca, format_lin, format_vtx, parse_lin, parse_lin_line, parse_vtx, polytope_dimension,
    ParseError, PolytopeError,
};
use ineqmine::ratlinalg::{format_rational, parse_rational, Rational};
use ineqmine::tsplab::{
    build_sd, build_tsp_h, check_beta, build_tsp_h_star, format_bound_line, format_bounds_table, lp_bound,
    parse_tsplib_atsp, tour_vertex_set, tsp_h_equalities, validate_set3, BoundRow, ModelKind,
    TspError, TspLayout, ValidateOptions,
};
use ineqmine::{ConstraintSystem, LinearConstraint, Relation, VertexSet};

#[derive(Parser)]
#[command(name = "ineqmine", version, about = "Equality and facet mining for 0/1 point sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the equalities satisfied by every point that the known system misses.
    Eca {
        vertices: PathBuf,
        #[arg(long)]
        known: Option<PathBuf>,
    },
    /// Run the facet-mining loop.
    Mine(MineArgs),
    /// Classify one inequality against the point set.
    Check {
        vertices: PathBuf,
        known: PathBuf,
        /// Inequality in `.lin` syntax, e.g. "GE 1 0 0 0 1".
        ineq: String,
    },
    /// TSP formulations, tours and bounds.
    Tsp {
        #[command(subcommand)]
        command: TspCommand,
    },
    /// Write a seeded random embedded 0/1 polytope as `.vtx`.
    RandomPolytope {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long)]
        ambient: Option<usize>,
        #[arg(long, default_value_t = 8)]
        max_points: usize,
    },
}

#[derive(Args)]
struct MineArgs {
    vertices: PathBuf,
    #[arg(long)]
    known: Option<PathBuf>,
    #[arg(long, value_parser = rational)]
    epsilon: Option<Rational>,
    #[arg(long, value_parser = rational)]
    big_m: Option<Rational>,
    #[arg(long, value_parser = rational)]
    pi_bound: Option<Rational>,
    #[arg(long)]
    face_threshold: Option<usize>,
    /// 1-based coordinates whose coefficient is fixed at zero.
    #[arg(long, value_delimiter = ',')]
    mask: Option<Vec<usize>>,
    #[arg(long)]
    node_budget: Option<usize>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,
    /// Complete the equality system with `eca` before mining.
    #[arg(long)]
    auto_eca: bool,
    /// Compare the mined facets with exhaustive subset search.
    #[arg(long)]
    oracle: bool,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// epsilon 1/10 and the symmetry mask of the tour layout.
    Tsp,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Sd,
    TspH,
    TspHStar,
    All,
}

#[derive(Subcommand)]
enum TspCommand {
    /// LP relaxation bounds for an explicit ATSP instance.
    Bounds {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = ModelArg::All)]
        model: ModelArg,
        #[arg(long, value_parser = rational, default_values = ["0.999", "0.9999"])]
        beta: Vec<Rational>,
    },
    /// Check the mined inequality families for validity and facet status.
    ValidateSet3 {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = rational, default_value = "0.999")]
        beta: Rational,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        no_facets: bool,
    },
    /// Write all tour points as `.vtx`.
    Tours {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = rational)]
        beta: Rational,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write the equalities every tour point satisfies, as `.lin`.
    Equalities {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = rational)]
        beta: Rational,
    },
    /// Print the 1-based symmetry mask for `mine --mask`.
    Mask {
        #[arg(long)]
        n: usize,
    },
}

/// Writes to stdout; a closed pipe ends the process quietly.
fn emit(text: &str) {
    let mut stdout = io::stdout().lock();
    if let Err(e) = stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()) {
        if e.kind() == io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: writing output: {e}");
        std::process::exit(1);
    }
}

macro_rules! out {
    ($($arg:tt)*) => { emit(&format!($($arg)*)) };
}

macro_rules! outln {
    ($($arg:tt)*) => { emit(&format!("{}\n", format_args!($($arg)*))) };
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_vertices(path: &Path) -> Result<VertexSet> {
    parse_vtx(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_known(path: Option<&Path>, set: &VertexSet) -> Result<ConstraintSystem> {
    let rows = match path {
        Some(p) => parse_lin(&read(p)?, Some(set.ambient_dim()))
            .with_context(|| format!("parsing {}", p.display()))?,
        None => Vec::new(),
    };
    Ok(ConstraintSystem::from_constraints(set.ambient_dim(), rows)?)
}

fn equality_part(known: &ConstraintSystem) -> ConstraintSystem {
    let mut eqs = ConstraintSystem::new(known.dim());
    eqs.equalities = known.equalities.clone();
    eqs
}

fn inequality_part(known: &ConstraintSystem) -> ConstraintSystem {
    let mut ineqs = ConstraintSystem::new(known.dim());
    ineqs.inequalities = known.inequalities.clone();
    ineqs
}

/// Adds whatever equalities `eca` finds beyond those already in `eqs`.
fn complete_equalities(set: &VertexSet, eqs: &mut ConstraintSystem) -> Result<()> {
    let found = eca(set, &eqs.equalities)?;
    eqs.equalities.extend(found.equalities);
    Ok(())
}

fn cmd_eca(vertices: &Path, known: Option<&Path>) -> Result<ExitCode> {
    let set = load_vertices(vertices)?;
    let known = load_known(known, &set)?;
    let result = eca(&set, &known.equalities)?;
    outln!("d={}", result.unidentified);
    out!("{}", format_lin(&result.equalities));
    Ok(ExitCode::SUCCESS)
}

fn tsp_n_for(ambient: usize) -> Option<usize> {
    (3..=64).find(|&n| TspLayout { n }.len() == ambient)
}

fn cmd_mine(args: &MineArgs) -> Result<ExitCode> {
    let set = load_vertices(&args.vertices)?;
    let known = load_known(args.known.as_deref(), &set)?;
    let mut eqs = equality_part(&known);
    if args.auto_eca {
        complete_equalities(&set, &mut eqs)?;
    }
    let mut cfg = FacetSearchConfig::default();
    if let Some(Preset::Tsp) = args.preset {
        let n = tsp_n_for(set.ambient_dim())
            .with_context(|| format!("{} coordinates match no tour layout", set.ambient_dim()))?;
        cfg.epsilon = Rational::new(1.into(), 10.into());
        cfg.mask = Some(TspLayout { n }.symmetry_mask());
    }
    if let Some(v) = &args.epsilon {
        cfg.epsilon = v.clone();
    }
    if let Some(v) = &args.big_m {
        cfg.big_m = v.clone();
    }
    if let Some(v) = &args.pi_bound {
        cfg.pi_bound = v.clone();
    }
    if let Some(mask) = &args.mask {
        if mask.contains(&0) {
            bail!(FacetError::InvalidConfig("mask coordinates are 1-based".into()));
        }
        cfg.mask = Some(mask.iter().map(|k| k - 1).collect());
    }
    cfg.face_threshold = args.face_threshold;
    if let Some(v) = args.node_budget {
        cfg.node_budget = v;
    }
    cfg.max_iterations = args.max_iterations;
    cfg.mode = match args.mode {
        ModeArg::Exact => Mode::Exact,
        ModeArg::Float => Mode::Float,
    };
    if !cfg.big_m_sufficient(&set) {
        eprintln!("warning: big M {} may cut off valid inequalities", format_rational(&cfg.big_m));
    }

    let report = mine(&set, &eqs, &inequality_part(&known), &cfg)?;
    outln!("{report}");
    if args.oracle {
        if set.len() > ORACLE_LIMIT {
            bail!("oracle needs at most {ORACLE_LIMIT} points, got {}", set.len());
        }
        let expected = brute_force_facets(&set);
        let full_dim = polytope_dimension(&set);
        let mut found: Vec<Vec<usize>> = report.new_facets().map(|it| it.support.clone()).collect();
        for c in &known.inequalities {
            let tight = tight_indicator(c, &set);
            let support: Vec<usize> = (0..set.len()).filter(|&i| tight[i]).map(|i| i + 1).collect();
            if !support.is_empty() && support.len() < set.len() {
                let idx: Vec<usize> = support.iter().map(|l| l - 1).collect();
                if polytope_dimension(&set.subset(&idx)?) + 1 == full_dim {
                    found.push(support);
                }
            }
        }
        found.sort();
        found.dedup();
        let verdict = if found == expected { "MATCH" } else { "MISMATCH" };
        outln!("ORACLE facets={} mined={} {verdict}", expected.len(), found.len());
        if found != expected {
            return Ok(ExitCode::FAILURE);
        }
    }
    Ok(match report.termination {
        Termination::NodeBudget => ExitCode::from(4),
        Termination::MipInfeasible | Termination::UserLimit => ExitCode::SUCCESS,
    })
}

fn cmd_check(vertices: &Path, known: &Path, ineq: &str) -> Result<ExitCode> {
    let set = load_vertices(vertices)?;
    let known = load_known(Some(known), &set)?;
    let c = parse_lin_line(ineq).context("parsing inequality")?;
    if c.width() != set.ambient_dim() {
        return Err(ParseError::Set(PolytopeError::ConstraintWidth {
            expected: set.ambient_dim(),
            found: c.width(),
        })
        .into());
    }
    if c.relation == Relation::Eq {
        bail!(ParseError::Syntax { line: 1, message: "expected an LE or GE inequality".into() });
    }
    let violated: Vec<String> = set
        .points()
        .iter()
        .enumerate()
        .filter(|(_, s)| !c.is_satisfied_by(s))
        .map(|(i, _)| (i + 1).to_string())
        .collect();
    if !violated.is_empty() {
        outln!("INVALID violated={{{}}}", violated.join(","));
        return Ok(ExitCode::SUCCESS);
    }
    let mut eqs = equality_part(&known);
    complete_equalities(&set, &mut eqs)?;
    let tight: Vec<usize> = (0..set.len()).filter(|&i| c.is_tight_at(set.point(i))).collect();
    let novelty = match redundancy_check::<Rational>(&c, &eqs, &inequality_part(&known))? {
        Redundancy::New => "NEW",
        Redundancy::Redundant => "REDUNDANT",
    };
    if tight.is_empty() {
        outln!("VALID face_dim=empty NOT_FACE {novelty}");
        return Ok(ExitCode::SUCCESS);
    }
    let (dim, is_facet) = classify_face(&set.subset(&tight)?, eqs.equality_rank(), set.ambient_dim());
    let kind = if tight.len() == set.len() {
        "IMPLICIT_EQUALITY"
    } else if is_facet {
        "FACET"
    } else {
        "FACE"
    };
    outln!("VALID face_dim={dim} {kind} {novelty} ineq=\"{}\"", display_form(&c));
    Ok(ExitCode::SUCCESS)
}

fn cmd_bounds(instance: &Path, model: ModelArg, betas: &[Rational]) -> Result<ExitCode> {
    let inst = parse_tsplib_atsp(&read(instance)?)?;
    let mut rows = Vec::new();
    let mut push = |model: ModelKind, beta: Option<Rational>, value: f64| {
        let row = BoundRow { instance: inst.name.clone(), model, beta, value };
        outln!("{}", format_bound_line(&row));
        rows.push(row);
    };
    if matches!(model, ModelArg::Sd | ModelArg::All) {
        push(ModelKind::Sd, None, lp_bound(&build_sd(&inst)?)?);
    }
    for beta in betas {
        if matches!(model, ModelArg::TspH | ModelArg::All) {
            push(ModelKind::TspH, Some(beta.clone()), lp_bound(&build_tsp_h(&inst, beta)?)?);
        }
        if matches!(model, ModelArg::TspHStar | ModelArg::All) {
            push(ModelKind::TspHStar, Some(beta.clone()), lp_bound(&build_tsp_h_star(&inst, beta)?)?);
        }
    }
    emit("\n");
    out!("{}", format_bounds_table(&rows));
    Ok(ExitCode::SUCCESS)
}

fn write_or_print(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            out!("{text}");
            Ok(())
        }
    }
}

fn cmd_tsp(command: &TspCommand) -> Result<ExitCode> {
    match command {
        TspCommand::Bounds { instance, model, beta } => cmd_bounds(instance, *model, beta),
        TspCommand::ValidateSet3 { n, beta, jobs, no_facets } => {
            let report = validate_set3(*n, beta, ValidateOptions { jobs: *jobs, facets: !no_facets })?;
            outln!("{report}");
            Ok(if report.all_valid() && (*no_facets || report.all_facets()) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        TspCommand::Tours { n, beta, output } => {
            let set = tour_vertex_set(*n, beta)?;
            write_or_print(output.as_deref(), &format_vtx(&set))?;
            Ok(ExitCode::SUCCESS)
        }
        TspCommand::Equalities { n, beta } => {
            check_beta(beta)?;
            if *n < 3 {
                bail!(TspError::NTooSmall { n: *n, minimum: 3 });
            }
            let rows: Vec<LinearConstraint> = tsp_h_equalities(*n, beta);
            out!("{}", format_lin(&rows));
            Ok(ExitCode::SUCCESS)
        }
        TspCommand::Mask { n } => {
            let mask: Vec<String> = TspLayout { n: *n }.symmetry_mask().iter().map(|k| (k + 1).to_string()).collect();
            outln!("{}", mask.join(","));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn cmd_random(seed: u64, dim: usize, ambient: Option<usize>, max_points: usize) -> Result<ExitCode> {
    let ambient = ambient.unwrap_or(dim);
    if dim == 0 || dim > 16 || dim > ambient {
        bail!("need 1 <= dim <= min(16, ambient)");
    }
    out!("{}", format_vtx(&random_embedded_01_polytope(seed, dim, ambient, max_points)));
    Ok(ExitCode::SUCCESS)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let inconsistent = |e: &PolytopeError| matches!(e, PolytopeError::InconsistentInput { .. });
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<ParseError>() {
            return match e {
                ParseError::Set(p) if inconsistent(p) => 3,
                _ => 2,
            };
        }
        if let Some(e) = cause.downcast_ref::<PolytopeError>() {
            return if inconsistent(e) { 3 } else { 2 };
        }
        if let Some(e) = cause.downcast_ref::<FacetError>() {
            return match e {
                FacetError::Polytope(p) if inconsistent(p) => 3,
                FacetError::IncompleteEqualities { .. } => 3,
                FacetError::Polytope(_) => 2,
                _ => 1,
            };
        }
        if let Some(e) = cause.downcast_ref::<TspError>() {
            return match e {
                TspError::UnsupportedFormat(_) | TspError::DimensionMismatch { .. } => 2,
                _ => 1,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 2;
        }
    }
    1
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Eca { vertices, known } => cmd_eca(&vertices, known.as_deref()),
        Command::Mine(args) => cmd_mine(&args),
        Command::Check { vertices, known, ineq } => cmd_check(&vertices, &known, &ineq),
        Command::Tsp { command } => cmd_tsp(&command),
        Command::RandomPolytope { seed, dim, ambient, max_points } => {
            cmd_random(seed, dim, ambient, max_points)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
