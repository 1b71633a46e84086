use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use vod_core::analysis::{self, VodCatalog};
use vod_core::catalog::{self, CatalogModel, Family};
use vod_core::design::{self, Design};
use vod_core::io;
use vod_core::linalg::{format_rational, parse_rational, Rational};
use vod_core::polytope::oracle::oracle_enumerate;
use vod_core::polytope::{DdOptions, OptimalPolytope};
use vod_core::secondary::{self, Objective, OptimizeConfig, Parametrization, SecondaryProblem};
use vod_core::Error;

#[derive(Parser)]
#[command(
    name = "vod",
    version,
    about = "Exact enumeration and analysis of vertex optimal designs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the maximal design with the equivalence theorem
    Verify(Common),
    /// Enumerate all vertex optimal designs
    Enumerate(Common),
    /// Split the vertices into symmetry orbits
    Classify(Common),
    /// Full JSON report
    Report(Common),
    /// Optimize a secondary criterion over the optimal designs
    Optimize(OptimizeArgs),
    /// Project the vertices onto one to three coordinates
    Project(ProjectArgs),
    /// Round vertices or a design to an exact design of size N
    Round(RoundArgs),
    /// Exact design sizes reachable from the vertices
    Sizes(Common),
    /// Compare double description against brute-force enumeration
    OracleCheck(Common),
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// Built-in model family (sbw, cbw, mem, int, qwoi)
    #[arg(
        long,
        conflicts_with = "problem_file",
        required_unless_present = "problem_file"
    )]
    family: Option<Family>,
    /// Number of factors
    #[arg(long, requires = "family")]
    k: Option<usize>,
    /// Criterion exponent (0 = D, -1 = A)
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    p: i64,
    /// Problem file instead of a built-in model
    #[arg(long)]
    problem_file: Option<PathBuf>,
    /// Output directory; results go to stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Largest number of column subsets the brute-force oracle may try
    #[arg(long, default_value_t = 1_000_000)]
    oracle_cap: u64,
    /// Largest number of intermediate rays in double description
    #[arg(long, default_value_t = 1_000_000)]
    ray_cap: usize,
    /// Worker threads (default: available parallelism)
    #[arg(long)]
    threads: Option<usize>,
    /// Largest design size for `sizes` and `report`
    #[arg(long, default_value_t = 100)]
    nmax: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveKind {
    /// det(sum r_i w_i f_i f_i')^(1/m), needs --r-file
    HetD,
    Entropy,
    SquaredNorm,
    /// needs --cost-file
    Linear,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    objective: ObjectiveKind,
    /// Whitespace or comma separated coefficients r_i
    #[arg(long)]
    r_file: Option<PathBuf>,
    /// Whitespace or comma separated costs c_i
    #[arg(long)]
    cost_file: Option<PathBuf>,
    /// vertex, reduced or ambient (default: vertex when at most 10^4 vertices)
    #[arg(long)]
    parametrization: Option<Parametrization>,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
}

#[derive(Args)]
struct ProjectArgs {
    #[command(flatten)]
    common: Common,
    /// One to three 1-based candidate indices, e.g. `3,17` or `w3,w17`
    #[arg(long)]
    axes: String,
}

#[derive(Args)]
struct RoundArgs {
    #[command(flatten)]
    common: Common,
    /// Target size
    #[arg(long)]
    n: u64,
    /// Round only this vertex (1-based); all vertices otherwise
    #[arg(long, conflicts_with = "design_file")]
    vertex: Option<usize>,
    /// Round a design given as CSV instead of the vertices
    #[arg(long)]
    design_file: Option<PathBuf>,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::VerificationFailed(_) | Error::NotInPolytope) => 2,
        Some(Error::ResourceLimit(_)) => 3,
        Some(Error::Parse { .. }) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(4)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let common = match &cli.command {
        Command::Verify(c)
        | Command::Enumerate(c)
        | Command::Classify(c)
        | Command::Report(c)
        | Command::Sizes(c)
        | Command::OracleCheck(c) => c,
        Command::Optimize(a) => &a.common,
        Command::Project(a) => &a.common,
        Command::Round(a) => &a.common,
    };
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()?;
    }
    match &cli.command {
        Command::Verify(c) => verify(c),
        Command::Enumerate(c) => enumerate(c),
        Command::Classify(c) => classify(c),
        Command::Report(c) => report(c),
        Command::Sizes(c) => sizes(c),
        Command::OracleCheck(c) => oracle_check(c),
        Command::Optimize(a) => optimize(a),
        Command::Project(a) => project(a),
        Command::Round(a) => round(a),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn model(c: &Common) -> Result<CatalogModel> {
    match (&c.problem_file, c.family) {
        (Some(path), _) => Ok(io::parse_problem_file(&read(path)?)?.into_model()?),
        (None, Some(family)) => {
            let k =
                c.k.ok_or_else(|| anyhow!("--k is required with --family"))?;
            Ok(catalog::build(family, k, c.p)?)
        }
        (None, None) => bail!("either --family or --problem-file is required"),
    }
}

fn emit(c: &Common, name: &str, contents: &str) -> Result<()> {
    match &c.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let path = dir.join(name);
            fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json") + "\n"
}

fn polytope(model: &CatalogModel) -> Result<OptimalPolytope> {
    Ok(OptimalPolytope::build(
        &model.problem,
        &model.maximal_design,
    )?)
}

fn catalog_of(c: &Common, model: &CatalogModel) -> Result<VodCatalog> {
    let poly = polytope(model)?;
    let list = poly.enumerate_vertices(&DdOptions {
        ray_cap: c.ray_cap,
        ..Default::default()
    })?;
    Ok(VodCatalog::new(poly, list)?.with_orbits(&model.generators)?)
}

fn verify(c: &Common) -> Result<u8> {
    let model = match model(c) {
        Err(e)
            if matches!(
                e.downcast_ref::<Error>(),
                Some(Error::VerificationFailed(_))
            ) =>
        {
            // rebuild without the check so that the verdict can be reported
            if let Some(path) = &c.problem_file {
                let spec = io::parse_problem_file(&read(path)?)?;
                return report_failed_verdict(c, spec, e);
            }
            return Err(e);
        }
        other => other?,
    };
    let poly = polytope(&model)?;
    let v = &model.verdict;
    let doc = json!({
        "problem": model.label(),
        "passed": v.passed(),
        "threshold": format_rational(&v.threshold),
        "equality": v.equality,
        "strict": v.strict,
        "violations": v.violations,
        "d": poly.d(),
        "t": poly.t(),
    });
    emit(c, &format!("{}.verify.json", model.label()), &pretty(&doc))?;
    Ok(if v.passed() { 0 } else { 2 })
}

fn report_failed_verdict(c: &Common, spec: io::ProblemSpec, err: anyhow::Error) -> Result<u8> {
    let family = match &spec.regressors {
        io::Regressors::Formula(f) => Some(*f),
        io::Regressors::Rows(_) => None,
    };
    let regressors = match (&spec.regressors, family) {
        (io::Regressors::Rows(r), _) => r.clone(),
        (_, Some(f)) => spec
            .points
            .iter()
            .map(|x| f.regressor(x))
            .collect::<Result<Vec<_>, _>>()?,
        _ => unreachable!("regressors are rows or a formula"),
    };
    let problem = design::DesignProblem::new(spec.points, regressors, spec.p)?;
    let verdict = match Design::new(spec.maximal_weights) {
        Ok(d) => design::verify_maximal_optimal(&problem, &d).ok(),
        Err(_) => None,
    };
    let doc = match verdict {
        Some(v) => json!({
            "passed": false,
            "threshold": format_rational(&v.threshold),
            "equality": v.equality,
            "strict": v.strict,
            "violations": v.violations,
        }),
        None => json!({ "passed": false, "reason": err.to_string() }),
    };
    emit(c, "custom.verify.json", &pretty(&doc))?;
    eprintln!("error: {err:#}");
    Ok(2)
}

fn enumerate(c: &Common) -> Result<u8> {
    let model = model(c)?;
    let cat = catalog_of(c, &model)?;
    let label = model.label();
    match c.format {
        Format::Csv => emit(
            c,
            &format!("{label}.vertices.csv"),
            &io::write_vertex_csv(cat.vertices()),
        )?,
        Format::Json => {
            let doc = io::vertex_list_json(&cat.polytope().dimensions(), cat.vertices());
            emit(
                c,
                &format!("{label}.vertices.json"),
                &(serde_json::to_string_pretty(&doc)? + "\n"),
            )?
        }
    }
    if c.out.is_some() {
        let dims = cat.polytope().dimensions();
        println!(
            "{label}: d={} m={} q={} s={} t={} ell={}",
            dims.d,
            dims.m,
            dims.q,
            dims.s,
            dims.t,
            cat.len()
        );
    }
    Ok(0)
}

fn classify(c: &Common) -> Result<u8> {
    let model = model(c)?;
    let cat = catalog_of(c, &model)?;
    let part = cat.orbits().expect("orbits attached");
    let label = model.label();
    match c.format {
        Format::Csv => {
            let mut text = String::from("orbit,representative,size,support_size,N\n");
            for (i, o) in part.orbits.iter().enumerate() {
                let info = &cat.info()[o.representative];
                text += &format!(
                    "{},{},{},{},{}\n",
                    i + 1,
                    o.representative + 1,
                    o.size(),
                    info.support.len(),
                    info.size
                );
            }
            emit(c, &format!("{label}.orbits.csv"), &text)?;
        }
        Format::Json => {
            let orbits: Vec<Value> = part
                .orbits
                .iter()
                .map(|o| {
                    json!({
                        "representative": o.representative,
                        "size": o.size(),
                        "weights": cat.vertex(o.representative).iter().map(format_rational).collect::<Vec<_>>(),
                    })
                })
                .collect();
            emit(
                c,
                &format!("{label}.orbits.json"),
                &pretty(&json!({ "problem": label, "ell": cat.len(), "orbits": orbits })),
            )?;
        }
    }
    Ok(0)
}

fn report(c: &Common) -> Result<u8> {
    let model = model(c)?;
    let cat = catalog_of(c, &model)?;
    let sizes = analysis::exact_design_sizes(&cat, c.nmax);
    let doc = io::report_json(&model.label(), &cat, Some(&sizes));
    emit(c, &format!("{}.report.json", model.label()), &pretty(&doc))?;
    Ok(0)
}

fn sizes(c: &Common) -> Result<u8> {
    let model = model(c)?;
    let cat = catalog_of(c, &model)?;
    let s = analysis::exact_design_sizes(&cat, c.nmax);
    let label = model.label();
    match c.format {
        Format::Csv => {
            let mut text = String::from("N,realization\n");
            for (n, r) in &s.realizations {
                let parts: Vec<String> = r
                    .parts
                    .iter()
                    .map(|(j, k)| format!("{k}x{}", j + 1))
                    .collect();
                text += &format!("{n},{}\n", parts.join(" + "));
            }
            emit(c, &format!("{label}.sizes.csv"), &text)?;
        }
        Format::Json => {
            let doc = json!({
                "problem": label,
                "gcd": s.gcd,
                "n_max": s.n_max,
                "vertex_sizes": s.generators.keys().collect::<Vec<_>>(),
                "sizes": s.sizes,
            });
            emit(c, &format!("{label}.sizes.json"), &pretty(&doc))?;
        }
    }
    Ok(0)
}

fn oracle_check(c: &Common) -> Result<u8> {
    let model = model(c)?;
    let poly = polytope(&model)?;
    let dd = poly.enumerate_vertices(&DdOptions {
        ray_cap: c.ray_cap,
        ..Default::default()
    })?;
    let oracle = oracle_enumerate(&poly, c.oracle_cap)?;
    let agree = dd.vertices == oracle.vertices;
    let doc = json!({
        "problem": model.label(),
        "dd": dd.len(),
        "oracle": oracle.len(),
        "agree": agree,
    });
    emit(c, &format!("{}.oracle.json", model.label()), &pretty(&doc))?;
    Ok(if agree { 0 } else { 2 })
}

fn read_floats(path: &Path) -> Result<Vec<f64>> {
    read(path)?
        .split(|ch: char| ch.is_whitespace() || ch == ',')
        .filter(|t| !t.is_empty())
        .enumerate()
        .map(|(i, t)| match parse_rational(t) {
            Ok(q) => Ok(vod_core::linalg::to_f64(&q)),
            Err(_) => t.parse::<f64>().map_err(|_| {
                Error::Parse {
                    line: 0,
                    msg: format!("entry {} is not a number: {t:?}", i + 1),
                }
                .into()
            }),
        })
        .collect()
}

fn optimize(a: &OptimizeArgs) -> Result<u8> {
    let c = &a.common;
    let model = model(c)?;
    let poly = polytope(&model)?;
    let objective = match a.objective {
        ObjectiveKind::HetD => {
            let path = a
                .r_file
                .as_ref()
                .ok_or_else(|| anyhow!("--r-file is required for het-d"))?;
            Objective::heteroskedastic_d(&model.problem, read_floats(path)?)?
        }
        ObjectiveKind::Entropy => Objective::Entropy,
        ObjectiveKind::SquaredNorm => Objective::SquaredNorm,
        ObjectiveKind::Linear => {
            let path = a
                .cost_file
                .as_ref()
                .ok_or_else(|| anyhow!("--cost-file is required for linear"))?;
            Objective::Linear(read_floats(path)?)
        }
    };
    let needs_catalog =
        a.parametrization.is_none() || a.parametrization == Some(Parametrization::Vertex);
    let cat = if needs_catalog {
        let list = poly.enumerate_vertices(&DdOptions {
            ray_cap: c.ray_cap,
            ..Default::default()
        })?;
        Some(VodCatalog::new(poly.clone(), list)?)
    } else {
        None
    };
    let parametrization = a
        .parametrization
        .unwrap_or_else(|| Parametrization::default_for(cat.as_ref().map(VodCatalog::len)));
    let problem = SecondaryProblem {
        polytope: &poly,
        catalog: cat.as_ref(),
        objective,
        parametrization,
    };
    let config = OptimizeConfig {
        max_iter: a.max_iter,
        tol: a.tol,
        start: None,
    };
    let res = secondary::optimize(&problem, &config)?;
    let doc = json!({
        "problem": model.label(),
        "objective": problem.objective.name(),
        "weights": res.weights,
        "value": res.value,
        "gap": res.gap,
        "iterations": res.iterations,
        "converged": res.converged,
        "parametrization": parametrization.name(),
    });
    emit(
        c,
        &format!("{}.optimize.json", model.label()),
        &pretty(&doc),
    )?;
    Ok(0)
}

fn parse_axes(text: &str, d: usize) -> Result<Vec<usize>> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            let digits = t.trim_start_matches(['w', 'i', 'y']);
            match digits.parse::<usize>() {
                Ok(i) if (1..=d).contains(&i) => Ok(i - 1),
                _ => Err(Error::Parse {
                    line: 0,
                    msg: format!("axis {t:?} is not in 1..={d}"),
                }
                .into()),
            }
        })
        .collect()
}

fn project(a: &ProjectArgs) -> Result<u8> {
    let c = &a.common;
    let model = model(c)?;
    let cat = catalog_of(c, &model)?;
    let axes = parse_axes(&a.axes, cat.d())?;
    let proj = analysis::project(&cat, &axes)?;
    let name = axes
        .iter()
        .map(|i| (i + 1).to_string())
        .collect::<Vec<_>>()
        .join("-");
    emit(
        c,
        &format!("{}.project-{name}.csv", model.label()),
        &io::projection_csv(&proj),
    )?;
    Ok(0)
}

fn round(a: &RoundArgs) -> Result<u8> {
    let c = &a.common;
    let model = model(c)?;
    let designs: Vec<Vec<Rational>> = match (&a.design_file, a.vertex) {
        (Some(path), _) => {
            let (points, weights) = io::parse_design_csv(&read(path)?)?;
            if points != model.problem.points() {
                bail!("design points do not match the problem's support");
            }
            vec![weights]
        }
        (None, vertex) => {
            let cat = catalog_of(c, &model)?;
            match vertex {
                Some(j) if (1..=cat.len()).contains(&j) => vec![cat.vertex(j - 1).to_vec()],
                Some(j) => bail!("vertex {j} is not in 1..={}", cat.len()),
                None => cat.vertices().to_vec(),
            }
        }
    };
    let mut text = String::new();
    for w in &designs {
        let counts = analysis::efficient_round(w, a.n)?;
        text += &counts
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(",");
        text.push('\n');
    }
    emit(c, &format!("{}.round-{}.csv", model.label(), a.n), &text)?;
    Ok(0)
}
