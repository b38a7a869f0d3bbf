//! Command-line driver: generate instances, build and export formulations,
//! solve, verify and benchmark.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use cdcform::branching::{Scheme, SchemeKind};
use cdcform::cdc::{
    annulus_instance, grid_triangulation_fixture, sos2_family, CdcFamily, HPolyhedron, HRepDisjunction, Instance,
    VertexMap,
};
use cdcform::encodings::{exotic_code, gray_code_d, moment_code, zigzag_code_d, Encoding, EncodingKind};
use cdcform::formulation::{
    build_2d, build_annulus, build_bigm_moment, build_general, build_moment_curve, build_sos2_exotic, compute_bigm,
    export, ExportFormat, LinearFormulation,
};
use cdcform::lp::{convex_hull, Sense};
use cdcform::numerics::{parse_rational, serde_rational, RatVector, Rational};
use cdcform::oracle::{
    brute_force_hrep, brute_force_optimum, classify_rows, verify_formulation, RowClass, VerificationReport,
};
use cdcform::solver::{lambda_objective, solve, Relaxation, SolveOptions, SolveReport};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug, Clone)]
#[command(name = "cdcform", version, about = "Ideal formulations for combinatorial disjunctive constraints")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Write an instance document.
    Gen(GenArgs),
    /// Build a formulation and export it.
    Build(BuildArgs),
    /// Run branch-and-bound and write a report.
    Solve(SolveArgs),
    /// Check validity, idealness and slices of formulations.
    Verify(VerifyArgs),
    /// Sweep sizes and encodings, writing a CSV.
    Bench(BenchArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Sos2,
    Annulus,
    Grid,
    /// Random bounded polygons given by inequalities.
    Hrep,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum EncodingArg {
    Gray,
    Zigzag,
    Moment,
    Exotic,
}

impl From<EncodingArg> for EncodingKind {
    fn from(e: EncodingArg) -> Self {
        match e {
            EncodingArg::Gray => EncodingKind::Gray,
            EncodingArg::Zigzag => EncodingKind::Zigzag,
            EncodingArg::Moment => EncodingKind::Moment,
            EncodingArg::Exotic => EncodingKind::Exotic,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuilderArg {
    General,
    #[value(name = "2d")]
    TwoD,
    Moment,
    #[value(name = "sos2-exotic")]
    Sos2Exotic,
    Annulus,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeArg {
    Variable,
    Moment,
    Exotic,
}

impl From<SchemeArg> for SchemeKind {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Variable => SchemeKind::Variable,
            SchemeArg::Moment => SchemeKind::Moment,
            SchemeArg::Exotic => SchemeKind::Exotic,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SenseArg {
    Max,
    Min,
}

impl From<SenseArg> for Sense {
    fn from(s: SenseArg) -> Self {
        match s {
            SenseArg::Max => Sense::Max,
            SenseArg::Min => Sense::Min,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormatArg {
    Json,
    Text,
}

/// Where the instance comes from: a file, or a named family.
#[derive(Args, Debug, Clone)]
pub struct InstanceArgs {
    /// Instance JSON written by `gen`.
    #[arg(long, conflicts_with = "family")]
    pub instance: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// Number of alternatives.
    #[arg(long)]
    pub d: Option<usize>,
    /// Inner annulus radius.
    #[arg(long, default_value = "2")]
    pub inner: String,
    /// Outer annulus radius.
    #[arg(long, default_value = "3")]
    pub outer: String,
    /// Seed for random instances and objectives.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct EncodingArgs {
    #[arg(long, value_enum)]
    pub encoding: Option<EncodingArg>,
    /// Custom codes as a JSON encoding document.
    #[arg(long, conflicts_with = "encoding")]
    pub codes: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "general")]
    pub builder: BuilderArg,
}

#[derive(Args, Debug, Clone)]
pub struct GenArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct BuildArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub encoding: EncodingArgs,
    #[arg(long, value_enum, default_value = "json")]
    pub format: FormatArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SolveArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub encoding: EncodingArgs,
    /// Defaults to the scheme paired with the encoding.
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Objective JSON: `{"lambda": [...]}` or `{"x": [...]}`.
    #[arg(long)]
    pub objective: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "max")]
    pub sense: SenseArg,
    #[arg(long, default_value_t = 1_000_000)]
    pub node_cap: usize,
    /// Check every split against the branching conditions.
    #[arg(long)]
    pub check_soundness: bool,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Record wall time in the report.
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub encoding: EncodingArgs,
    /// Every applicable builder and encoding.
    #[arg(long)]
    pub all: bool,
    /// Also classify rows as facets or not.
    #[arg(long)]
    pub classify: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "sos2")]
    pub family: Family,
    /// Comma-separated numbers of alternatives.
    #[arg(long, value_delimiter = ',', default_value = "4,8,16")]
    pub sizes: Vec<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "gray,zigzag,moment,exotic")]
    pub encodings: Vec<EncodingArg>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

enum Problem {
    Family { tag: String, fam: CdcFamily, vm: Option<VertexMap> },
    HRep(HRepDisjunction),
}

fn write_out(out: &Option<PathBuf>, body: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, body).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            if !body.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// `d` random bounded polygons with small integer vertices.
pub fn random_hrep(d: usize, seed: u64) -> Result<HRepDisjunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pieces = Vec::with_capacity(d);
    while pieces.len() < d {
        let (ox, oy) = (rng.gen_range(-6..=6), rng.gen_range(-6..=6));
        let k = rng.gen_range(3..=5);
        let pts: Vec<RatVector> =
            (0..k).map(|_| RatVector::from_ints(&[ox + rng.gen_range(0..=4), oy + rng.gen_range(0..=4)])).collect();
        let hull = convex_hull(&pts);
        if hull.equations.is_empty() {
            let (a, b) = hull.facets.into_iter().unzip();
            pieces.push(HPolyhedron::new(a, b)?);
        }
    }
    Ok(HRepDisjunction::new(pieces)?)
}

fn family_problem(family: Family, d: Option<usize>, args: &InstanceArgs) -> Result<Problem> {
    let need_d = || d.ok_or_else(|| anyhow!("--d is required for the {family:?} family"));
    Ok(match family {
        Family::Sos2 => Problem::Family { tag: "sos2".into(), fam: sos2_family(need_d()?)?, vm: None },
        Family::Annulus => {
            let s = parse_rational(&args.inner)?;
            let big = parse_rational(&args.outer)?;
            let (fam, vm) = annulus_instance(&s, &big, need_d()?)?;
            Problem::Family { tag: "annulus".into(), fam, vm: Some(vm) }
        }
        Family::Grid => {
            if d.is_some_and(|d| d != 8) {
                bail!("the grid fixture has exactly 8 alternatives");
            }
            let (fam, vm) = grid_triangulation_fixture();
            Problem::Family { tag: "grid".into(), fam, vm: Some(vm) }
        }
        Family::Hrep => Problem::HRep(random_hrep(need_d()?, args.seed)?),
    })
}

fn load(args: &InstanceArgs) -> Result<Problem> {
    if let Some(path) = &args.instance {
        let doc: Instance = read_json(path)?;
        if let Some(p) = doc.hrep()? {
            return Ok(Problem::HRep(p));
        }
        let fam = doc.family()?;
        let vm = doc.vertex_map()?;
        return Ok(Problem::Family { tag: doc.family.unwrap_or_else(|| "custom".into()), fam, vm });
    }
    let family = args.family.ok_or_else(|| anyhow!("give --instance or --family"))?;
    family_problem(family, args.d, args)
}

fn encoding_for(args: &EncodingArgs, d: usize) -> Result<Encoding> {
    if let Some(path) = &args.codes {
        let h: Encoding = read_json(path)?;
        if h.d() != d {
            bail!("{} codes given for {d} alternatives", h.d());
        }
        return Ok(h);
    }
    let kind = args.encoding.ok_or_else(|| anyhow!("give --encoding or --codes"))?;
    Ok(make_encoding(kind, d)?)
}

fn make_encoding(kind: EncodingArg, d: usize) -> cdcform::Result<Encoding> {
    match kind {
        EncodingArg::Gray => gray_code_d(d),
        EncodingArg::Zigzag => zigzag_code_d(d),
        EncodingArg::Moment => moment_code(d),
        EncodingArg::Exotic => exotic_code(d),
    }
}

fn build_with(builder: BuilderArg, tag: &str, fam: &CdcFamily, h: &Encoding) -> Result<LinearFormulation> {
    let f = match builder {
        BuilderArg::General => build_general(fam, h)?,
        BuilderArg::TwoD => build_2d(fam, h)?,
        BuilderArg::Moment => {
            if h.kind() != EncodingKind::Moment {
                bail!("the moment builder needs --encoding moment");
            }
            build_moment_curve(fam)?
        }
        BuilderArg::Sos2Exotic => {
            if tag != "sos2" || h.kind() != EncodingKind::Exotic {
                bail!("the sos2-exotic builder needs an sos2 instance and --encoding exotic");
            }
            build_sos2_exotic(fam.d())?
        }
        BuilderArg::Annulus => {
            if tag != "annulus" {
                bail!("the annulus builder needs an annulus instance");
            }
            build_annulus(fam.d(), h.kind())?
        }
    };
    Ok(f)
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn gen(args: &GenArgs) -> Result<i32> {
    let doc = match load(&args.instance)? {
        Problem::Family { tag, fam, vm } => Instance::from_family(&tag, &fam, vm.as_ref()),
        Problem::HRep(p) => Instance { family: Some("hrep".into()), hrep: Some(p.pieces), ..Instance::default() },
    };
    write_out(&args.out, &to_json(&doc)?)?;
    Ok(0)
}

fn build(args: &BuildArgs) -> Result<i32> {
    match load(&args.instance)? {
        Problem::Family { tag, fam, .. } => {
            let h = encoding_for(&args.encoding, fam.d())?;
            let f = build_with(args.encoding.builder, &tag, &fam, &h)?;
            eprintln!("rows {} general-inequalities {}", f.rows.len(), f.general_inequality_count());
            let format = match args.format {
                FormatArg::Json => ExportFormat::Json,
                FormatArg::Text => ExportFormat::Text,
            };
            write_out(&args.out, &export(&f, format))?;
        }
        Problem::HRep(p) => {
            if args.encoding.encoding.is_some_and(|e| e != EncodingArg::Moment) {
                bail!("inequality-described instances use the big-M formulation with moment codes");
            }
            let sys = build_bigm_moment(&compute_bigm(&p)?)?;
            eprintln!("general-inequalities {}", sys.general_inequality_count());
            write_out(&args.out, &to_json(&sys)?)?;
        }
    }
    Ok(0)
}

#[derive(Deserialize)]
struct ObjectiveDoc {
    #[serde(default)]
    lambda: Option<RatVector>,
    #[serde(default)]
    x: Option<RatVector>,
}

/// Seeded small integer coefficients.
pub fn random_objective(seed: u64, n: usize) -> RatVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Rational::from_integer(rng.gen_range(-10i64..=10).into())).collect()
}

#[derive(Serialize)]
struct SolveArtifact {
    instance: String,
    encoding: String,
    builder: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    sense: SenseArg,
    /// Coefficients over λ, or over x for inequality-described instances.
    objective: RatVector,
    #[serde(skip_serializing_if = "Option::is_none")]
    x: Option<RatVector>,
    #[serde(with = "serde_rational::option", skip_serializing_if = "Option::is_none")]
    oracle_value: Option<Rational>,
    matches_oracle: bool,
    report: SolveReport,
}

fn solve_cmd(args: &SolveArgs) -> Result<i32> {
    let sense: Sense = args.sense.into();
    let opts = SolveOptions {
        node_cap: args.node_cap,
        check_soundness: args.check_soundness,
        threads: args.threads,
        timing: args.timing,
    };
    let doc: Option<ObjectiveDoc> = args.objective.as_deref().map(read_json).transpose()?;
    let seed = doc.is_none().then_some(args.instance.seed);
    let artifact = match load(&args.instance)? {
        Problem::Family { tag, fam, vm } => {
            let h = encoding_for(&args.encoding, fam.d())?;
            let scheme = match args.scheme {
                Some(s) => Scheme::new(s.into(), &h)?,
                None => Scheme::default_for(&h)?,
            };
            let f = build_with(args.encoding.builder, &tag, &fam, &h)?;
            let c = match &doc {
                None => random_objective(args.instance.seed, fam.n()),
                Some(ObjectiveDoc { lambda: Some(l), .. }) => l.clone(),
                Some(ObjectiveDoc { x: Some(x), .. }) => {
                    let vm = vm.as_ref().ok_or_else(|| anyhow!("an x objective needs instance vertices"))?;
                    vm.pull_back(x)
                }
                Some(_) => bail!("objective file needs a \"lambda\" or \"x\" array"),
            };
            if c.len() != fam.n() {
                bail!("objective has {} coefficients for {} components", c.len(), fam.n());
            }
            let rel = Relaxation::from(&f);
            let report = solve(&rel, &h, &scheme, &lambda_objective(&c, rel.dim()), sense, &opts)?;
            let mut full = c.clone();
            full.extend((0..h.r()).map(|_| Rational::from_integer(0.into())));
            let oracle = brute_force_optimum(&fam, &h, &full, sense)?;
            let x = match (&vm, &report.point) {
                (Some(vm), Some(p)) => Some(vm.apply(&RatVector(p[..fam.n()].to_vec()))),
                _ => None,
            };
            SolveArtifact {
                instance: tag,
                encoding: h.kind().to_string(),
                builder: f.builder.clone(),
                seed,
                sense: args.sense,
                objective: c,
                x,
                matches_oracle: report.value.as_ref() == Some(&oracle),
                oracle_value: Some(oracle),
                report,
            }
        }
        Problem::HRep(p) => {
            if args.encoding.encoding.is_some_and(|e| e != EncodingArg::Moment)
                || args.scheme.is_some_and(|s| s != SchemeArg::Moment)
            {
                bail!("inequality-described instances use moment codes with the moment scheme");
            }
            let sys = build_bigm_moment(&compute_bigm(&p)?)?;
            let h = moment_code(p.d())?;
            let scheme = Scheme::new(SchemeKind::Moment, &h)?;
            let c = match &doc {
                None => random_objective(args.instance.seed, p.dim()),
                Some(ObjectiveDoc { x: Some(x), .. }) => x.clone(),
                Some(_) => bail!("objective file needs an \"x\" array for this instance"),
            };
            if c.len() != p.dim() {
                bail!("objective has {} coefficients for dimension {}", c.len(), p.dim());
            }
            let rel = Relaxation::from(&sys);
            let report = solve(&rel, &h, &scheme, &lambda_objective(&c, rel.dim()), sense, &opts)?;
            let oracle = brute_force_hrep(&p, &c, sense)?;
            SolveArtifact {
                instance: "hrep".into(),
                encoding: "moment".into(),
                builder: "big-m".into(),
                seed,
                sense: args.sense,
                x: report.point.as_ref().map(|pt| RatVector(pt[..p.dim()].to_vec())),
                objective: c,
                matches_oracle: report.value == oracle,
                oracle_value: oracle,
                report,
            }
        }
    };
    write_out(&args.out, &to_json(&artifact)?)?;
    Ok(if artifact.matches_oracle { 0 } else { 1 })
}

#[derive(Serialize)]
struct ClassCounts {
    facet: usize,
    tight_nonfacet: usize,
    never_tight: usize,
}

#[derive(Serialize)]
struct VerifyEntry {
    builder: String,
    encoding: String,
    rows: usize,
    general_inequalities: usize,
    reports: Vec<VerificationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    classes: Option<ClassCounts>,
}

#[derive(Serialize)]
struct VerifyArtifact {
    instance: String,
    passed: bool,
    results: Vec<VerifyEntry>,
}

/// Every builder that applies to the instance, paired with its encoding.
fn all_builds(tag: &str, fam: &CdcFamily) -> Vec<(BuilderArg, Encoding)> {
    let d = fam.d();
    let mut out = Vec::new();
    for kind in [EncodingArg::Gray, EncodingArg::Zigzag, EncodingArg::Moment, EncodingArg::Exotic] {
        let Ok(h) = make_encoding(kind, d) else { continue };
        out.push((BuilderArg::General, h.clone()));
        if h.r() == 2 && h.is_convex_position() {
            out.push((BuilderArg::TwoD, h.clone()));
        }
        match kind {
            EncodingArg::Moment => out.push((BuilderArg::Moment, h)),
            EncodingArg::Exotic if tag == "sos2" => out.push((BuilderArg::Sos2Exotic, h)),
            _ => {}
        }
    }
    if tag == "annulus" && d.is_power_of_two() {
        for kind in [EncodingArg::Gray, EncodingArg::Zigzag] {
            out.push((BuilderArg::Annulus, make_encoding(kind, d).expect("power of two")));
        }
    }
    if tag == "annulus" && d.is_multiple_of(4) {
        out.push((BuilderArg::Annulus, exotic_code(d).expect("multiple of four")));
    }
    out
}

fn verify(args: &VerifyArgs) -> Result<i32> {
    let Problem::Family { tag, fam, .. } = load(&args.instance)? else {
        bail!("verify needs a family instance, not an inequality description");
    };
    let builds = if args.all {
        all_builds(&tag, &fam)
    } else {
        vec![(args.encoding.builder, encoding_for(&args.encoding, fam.d())?)]
    };
    let results = builds
        .into_par_iter()
        .map(|(builder, h)| -> Result<VerifyEntry> {
            let f = build_with(builder, &tag, &fam, &h)?;
            let classes = if args.classify {
                let rows = classify_rows(&f)?;
                let count = |c: RowClass| rows.iter().filter(|r| r.class == c).count();
                Some(ClassCounts {
                    facet: count(RowClass::Facet),
                    tight_nonfacet: count(RowClass::TightNonfacet),
                    never_tight: count(RowClass::NeverTight),
                })
            } else {
                None
            };
            Ok(VerifyEntry {
                builder: f.builder.clone(),
                encoding: h.kind().to_string(),
                rows: f.rows.len(),
                general_inequalities: f.general_inequality_count(),
                reports: verify_formulation(&f, &fam, &h),
                classes,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = results.iter().all(|e| e.reports.iter().all(|r| r.passed));
    for e in &results {
        for r in e.reports.iter().filter(|r| !r.passed) {
            eprintln!("{} / {}: {r}", e.builder, e.encoding);
        }
    }
    write_out(&args.out, &to_json(&VerifyArtifact { instance: tag, passed, results })?)?;
    Ok(if passed { 0 } else { 1 })
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub family: String,
    pub d: usize,
    pub n: usize,
    pub encoding: String,
    pub scheme: String,
    pub rows: usize,
    pub nodes: usize,
    pub value: String,
    pub micros: u128,
}

fn bench_one(family: Family, d: usize, kind: EncodingArg, seed: u64) -> Result<Option<BenchRow>> {
    let args = InstanceArgs {
        instance: None,
        family: Some(family),
        d: Some(d),
        inner: "2".into(),
        outer: "3".into(),
        seed,
    };
    let Problem::Family { tag, fam, .. } = family_problem(family, Some(d), &args)? else {
        bail!("bench runs on family instances");
    };
    let Ok(h) = make_encoding(kind, fam.d()) else {
        log::warn!("skipping {kind:?} codes for d = {d}");
        return Ok(None);
    };
    let scheme = Scheme::default_for(&h)?;
    let f = build_general(&fam, &h)?;
    let rel = Relaxation::from(&f);
    let c = lambda_objective(&random_objective(seed, fam.n()), rel.dim());
    let start = Instant::now();
    let rep = solve(&rel, &h, &scheme, &c, Sense::Max, &SolveOptions { check_soundness: false, ..Default::default() })?;
    let micros = start.elapsed().as_micros();
    Ok(Some(BenchRow {
        family: tag,
        d: fam.d(),
        n: fam.n(),
        encoding: h.kind().to_string(),
        scheme: scheme.kind().to_string(),
        rows: f.general_inequality_count(),
        nodes: rep.nodes,
        value: rep.value.map_or_else(|| "none".into(), |v| cdcform::numerics::format_rational(&v)),
        micros,
    }))
}

fn bench(args: &BenchArgs) -> Result<i32> {
    if args.family == Family::Hrep {
        bail!("bench runs on sos2, annulus or grid families");
    }
    let jobs: Vec<(usize, EncodingArg)> =
        args.sizes.iter().flat_map(|&d| args.encodings.iter().map(move |&e| (d, e))).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.threads.max(1)).build()?;
    let rows: Vec<Option<BenchRow>> = pool.install(|| {
        jobs.par_iter().map(|&(d, e)| bench_one(args.family, d, e, args.seed)).collect::<Result<Vec<_>>>()
    })?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows.into_iter().flatten() {
        w.serialize(row)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| anyhow!(e.to_string()))?)?;
    let body = if body.is_empty() { "family,d,n,encoding,scheme,rows,nodes,value,micros\n".to_string() } else { body };
    write_out(&args.out, &body)?;
    Ok(0)
}

/// Runs one command and returns the process exit code.
pub fn run(config: &RunConfig) -> Result<i32> {
    match &config.command {
        Command::Gen(a) => gen(a),
        Command::Build(a) => build(a),
        Command::Solve(a) => solve_cmd(a),
        Command::Verify(a) => verify(a),
        Command::Bench(a) => bench(a),
    }
}
