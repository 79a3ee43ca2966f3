use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use multiweight::dyadic::{DyadicGrid, GridFunction, GridShape};
use multiweight::exponents::{derived_scales, extrapolation_path, offdiag_targets, Exponent, ExponentVector, VectorKind};
use multiweight::harness::{
    monitor_envelopes, run_experiment, validate, ExperimentConfig, HarnessError, Suite, VerifyOptions,
};
use multiweight::operators::{sparse_generate, sparse_stopping};
use multiweight::rubio::{
    case2_dual_witness, construct_case1, construct_case2, construct_case3, maximal_norm_bound, rdf_iterate, BoundMode,
    CaseExponents, CaseSetup, RdfOperator, Regime, DEFAULT_K,
};
use multiweight::weights::{
    a_infinity_report, ap_constant, apr_constant, generate_weight, log_uniform, BaseMeasure, CubeFamily, FamilyMode,
    WeightGen,
};

#[derive(Parser)]
#[command(name = "multiweight", version, about = "Weighted inequality experiments on finite dyadic grids")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    /// Defaults to 0; overrides the config seed in `experiments run`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Grid as `d,L`.
    #[arg(long, global = true, value_parser = parse_grid)]
    grid: Option<GridShape>,
    /// Output path (JSON), or a report stem for `experiments run`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Weight-class constants of a generated weight.
    Constants(ConstantsArgs),
    /// One Rubio de Francia iteration or one off-diagonal construction.
    Rdf(RdfArgs),
    /// Derived scales, off-diagonal targets or an extrapolation path.
    ExtrapolateExponents(ExtrapolateArgs),
    /// Builds sparse families and checks their defining properties.
    SparseCheck(SparseArgs),
    /// Seeded ratio experiments.
    Experiments {
        #[command(subcommand)]
        action: ExperimentsAction,
    },
    /// Runs an invariant battery suite.
    Verify(VerifyArgs),
}

#[derive(Subcommand)]
enum ExperimentsAction {
    /// Runs the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Only check the config.
        #[arg(long)]
        dry_run: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Dyadic,
    AllDiscrete,
    AllDiscretePeriodic,
}

impl From<Family> for FamilyMode {
    fn from(f: Family) -> Self {
        match f {
            Family::Dyadic => FamilyMode::Dyadic,
            Family::AllDiscrete => FamilyMode::AllDiscrete,
            Family::AllDiscretePeriodic => FamilyMode::AllDiscretePeriodic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Gen {
    LogUniform,
    Power,
    RandomA1,
}

#[derive(Args)]
struct ConstantsArgs {
    #[arg(long, default_value = "2")]
    p: String,
    #[arg(long)]
    r: Option<String>,
    #[arg(long, value_enum, default_value_t = Gen::LogUniform)]
    weight_gen: Gen,
    /// Spread, power `a` or `δ`, depending on the generator.
    #[arg(long, default_value_t = 1.0)]
    param: f64,
    #[arg(long, value_enum)]
    family: Option<Family>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BMode {
    Buckley,
    Empirical,
}

#[derive(Args)]
struct RdfArgs {
    /// Run the construction of this case instead of a bare iteration.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    case: Option<u8>,
    #[arg(long = "K", default_value_t = DEFAULT_K)]
    k: usize,
    #[arg(long = "B-mode", value_enum, default_value_t = BMode::Buckley)]
    b_mode: BMode,
    /// `p,r,p0,r0,q0` for `--case`; defaults to a set in the case's regime.
    #[arg(long)]
    exponents: Option<String>,
    /// Exponent of the iterated maximal operator.
    #[arg(long, default_value = "2")]
    t: String,
    #[arg(long)]
    conjugated: bool,
}

#[derive(Args)]
struct ExtrapolateArgs {
    /// `p⃗`, comma separated.
    #[arg(long)]
    p: Option<String>,
    /// `r⃗`, comma separated, `m+1` entries.
    #[arg(long)]
    r: Option<String>,
    /// Target `q⃗` for a path.
    #[arg(long)]
    q: Option<String>,
    /// Off-diagonal mode: `p0,r0,q0,p`.
    #[arg(long)]
    offdiag: Option<String>,
}

#[derive(Args)]
struct SparseArgs {
    #[arg(long, default_value_t = 0.5)]
    zeta: f64,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
}

#[derive(Args)]
struct VerifyArgs {
    suite: Suite,
    #[arg(long = "K", default_value_t = DEFAULT_K)]
    k: usize,
    /// Multiplies instance counts.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Plants a coefficient-table violation in the `sparse` suite.
    #[arg(long)]
    inject_violation: bool,
    /// Also print the resolution-growth envelopes (never gates).
    #[arg(long)]
    monitor: bool,
}

impl Global {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

fn parse_grid(s: &str) -> Result<GridShape, String> {
    let (d, l) = s.split_once(',').ok_or_else(|| format!("expected d,L, got {s:?}"))?;
    let d = d.trim().parse().map_err(|e| format!("d: {e}"))?;
    let l = l.trim().parse().map_err(|e| format!("L: {e}"))?;
    GridShape::new(d, l).map_err(|e| e.to_string())
}

/// Failure kinds mapped to exit codes.
enum Failure {
    Assert(Value),
    Config(String),
    Io(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Io(e.to_string())
        }
    }
}

fn config<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Config(e.to_string())
}

fn emit(out: Option<&Path>, v: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).expect("json values serialize");
    match out {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| Failure::Io(e.to_string())),
        None => {
            // a closed pipe is not an error worth reporting
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            Ok(())
        }
    }
}

fn grid_of(g: &Global, default: (usize, u32)) -> GridShape {
    g.grid.unwrap_or_else(|| GridShape::new(default.0, default.1).expect("default shape"))
}

fn scalar(s: &str) -> Result<Exponent, Failure> {
    s.trim().parse().map_err(config)
}

fn vector(s: &str, kind: VectorKind) -> Result<ExponentVector, Failure> {
    let items: Vec<&str> = s.split(',').map(str::trim).collect();
    ExponentVector::parse(kind, &items).map_err(config)
}

fn constants(g: &Global, a: &ConstantsArgs) -> Result<(), Failure> {
    let p = scalar(&a.p)?;
    let r = a.r.as_deref().map(scalar).transpose()?;
    let shape = grid_of(g, (1, 4));
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed());
    let grid = DyadicGrid::random(shape, &mut rng);
    let gen = match a.weight_gen {
        Gen::LogUniform => WeightGen::LogUniform { spread: a.param, seed: g.seed() },
        Gen::Power => WeightGen::Power { a: a.param },
        Gen::RandomA1 => WeightGen::RandomA1 { delta: a.param, seed: g.seed() },
    };
    let w = generate_weight(&gen, &grid).map_err(config)?;
    let fam = match a.family {
        Some(f) => CubeFamily::with_mode(f.into(), &grid),
        None => CubeFamily::default_for(&grid),
    };
    let leb = BaseMeasure::lebesgue(shape);
    let mut v = json!({
        "grid": { "d": shape.d, "L": shape.depth }, "omega": grid.omega, "family": fam.mode().name(),
        "weight_gen": gen, "a1_bound": w.a1_bound, "p": p,
    });
    if !p.is_infinite() {
        v["A_p"] = json!(ap_constant(&w.weight, &p, &leb, &fam).map_err(config)?);
    }
    if let Some(r) = r {
        v["r"] = json!(r);
        v["A_pr"] = json!(apr_constant(&w.weight, &p, &r, &leb, &fam).map_err(config)?);
    }
    let (a_inf, at) = a_infinity_report(&w.weight, &leb, &fam).map_err(config)?;
    v["A_inf"] = json!({ "constant": a_inf, "attained_at_p": at });
    emit(g.out.as_deref(), &v)
}

const CASE_DEFAULTS: [&str; 3] = ["2,4,3,12,3", "4,4,2,2,2", "4,4,2,2,4"];

fn rdf(g: &Global, a: &RdfArgs) -> Result<(), Failure> {
    let shape = grid_of(g, (1, 4));
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed());
    let grid = DyadicGrid::random(shape, &mut rng);
    let (fam, mode) = match a.b_mode {
        BMode::Buckley => (CubeFamily::dyadic(&grid), BoundMode::Buckley),
        BMode::Empirical => (CubeFamily::default_for(&grid), BoundMode::empirical(g.seed())),
    };
    let w = log_uniform(shape, 1.0, &mut rng);
    let h = log_uniform(shape, 2.0, &mut rng).into_function();

    if let Some(case) = a.case {
        let raw = a.exponents.as_deref().unwrap_or(CASE_DEFAULTS[case as usize - 1]);
        let e: Vec<Exponent> = raw.split(',').map(scalar).collect::<Result<_, _>>()?;
        if e.len() != 5 {
            return Err(Failure::Config(format!("--exponents needs p,r,p0,r0,q0, got {raw:?}")));
        }
        let ex = CaseExponents::new(&e[0], &e[1], &e[2], &e[3], &e[4]).map_err(config)?;
        let want = [Regime::Case1, Regime::Case2, Regime::Case3][case as usize - 1];
        if ex.regime != want {
            return Err(Failure::Config(format!("exponents {raw} are in {:?}, not case {case}", ex.regime)));
        }
        let mut setup = CaseSetup::new(fam, mode);
        setup.k = a.k;
        let rep = match want {
            Regime::Case1 => construct_case1(&w, &h, &ex, &setup),
            Regime::Case2 => construct_case2(&w, &case2_dual_witness(&h, &ex), &ex, &setup),
            Regime::Case3 => {
                let x0 = rng.gen_range(0..shape.cells());
                construct_case3(&w, x0, 0.25, Some(&h), &ex, &setup)
            }
        }
        .map_err(|e| Failure::Assert(json!({ "error": e.to_string(), "seed": g.seed() })))?;
        let v = json!({ "seed": g.seed(), "omega": grid.omega, "report": rep, "passed": rep.all_hold() });
        emit(g.out.as_deref(), &v)?;
        if !rep.all_hold() {
            return Err(Failure::Assert(json!({ "seed": g.seed(), "case": case, "failures": rep.failures() })));
        }
        return Ok(());
    }

    let t = scalar(&a.t)?;
    let op = if a.conjugated {
        RdfOperator::conjugated(fam, t.clone(), w)
    } else {
        RdfOperator::plain(fam, t.clone(), w)
    }
    .map_err(config)?;
    let b = maximal_norm_bound(&op, mode).map_err(|e| Failure::Assert(json!({ "error": e.to_string() })))?;
    let res = rdf_iterate(&h, &op, b.b, a.k).map_err(|e| Failure::Assert(json!({ "error": e.to_string() })))?;
    let sigma_total = op.effective_weight().integral();
    let tol = res.tail_bound * sigma_total.powf(1.0 / t.to_f64()) / op.norm(&h);
    let mut ok = res.certs.domination && res.certs.a1_pointwise_ratio <= 1.0 + 1e-12;
    if b.certified {
        ok &= res.norm_within(tol);
    }
    let v = json!({
        "seed": g.seed(), "grid": { "d": shape.d, "L": shape.depth }, "omega": grid.omega, "t": t, "K": a.k,
        "bound": b, "tail_bound": res.tail_bound, "norm_tolerance": tol, "tail_limited": tol > 1e-6,
        "certs": res.certs, "passed": ok,
    });
    emit(g.out.as_deref(), &v)?;
    if ok {
        Ok(())
    } else {
        Err(Failure::Assert(v))
    }
}

fn extrapolate(g: &Global, a: &ExtrapolateArgs) -> Result<(), Failure> {
    if let Some(raw) = &a.offdiag {
        let e: Vec<Exponent> = raw.split(',').map(scalar).collect::<Result<_, _>>()?;
        if e.len() != 4 {
            return Err(Failure::Config(format!("--offdiag needs p0,r0,q0,p, got {raw:?}")));
        }
        let t = offdiag_targets(&e[0], &e[1], &e[2], &e[3]).map_err(config)?;
        return emit(g.out.as_deref(), &json!({ "p0": e[0], "r0": e[1], "q0": e[2], "p": e[3], "targets": t }));
    }
    let (Some(p), Some(r)) = (&a.p, &a.r) else {
        return Err(Failure::Config("give --p and --r, or --offdiag".into()));
    };
    let p = vector(p, VectorKind::P)?;
    let r = vector(r, VectorKind::R)?;
    let ds = derived_scales(&p, &r).map_err(config)?;
    let mut v = json!({ "p": p, "r": r, "scales": ds });
    if let Some(q) = &a.q {
        let q = vector(q, VectorKind::P)?;
        let path = extrapolation_path(&p, &q, &r).map_err(config)?;
        v["path"] = json!(path.vectors().map(|x| x.to_string()).collect::<Vec<_>>());
    }
    emit(g.out.as_deref(), &v)
}

fn sparse_check(g: &Global, a: &SparseArgs) -> Result<(), Failure> {
    if !(a.zeta > 0.0 && a.zeta < 1.0) {
        return Err(Failure::Config(format!("--zeta = {} must lie in (0, 1)", a.zeta)));
    }
    if !(a.density > 0.0 && a.density <= 1.0) {
        return Err(Failure::Config(format!("--density = {} must lie in (0, 1]", a.density)));
    }
    let shape = grid_of(g, (1, 5));
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed());
    let grid = DyadicGrid::random(shape, &mut rng);
    let fs: Vec<GridFunction> = (0..3).map(|_| GridFunction::from_fn(shape, |_| rng.gen_range(-1.0..1.0))).collect();
    let generated = sparse_generate(&grid, a.zeta, a.density, g.seed()).map_err(config)?;
    let stopping = sparse_stopping(&grid, &fs).map_err(config)?;
    let describe = |name: &str, f: &multiweight::operators::SparseFamily| {
        let verdict = f.verify();
        json!({ "family": name, "zeta": f.zeta, "cubes": f.members.len(), "passed": verdict.is_ok(),
                "violation": verdict.err().map(|e| e.to_string()) })
    };
    let checks = vec![describe("generated", &generated), describe("stopping", &stopping)];
    let ok = checks.iter().all(|c| c["passed"] == json!(true));
    let v = json!({ "seed": g.seed(), "grid": { "d": shape.d, "L": shape.depth }, "omega": grid.omega, "checks": checks });
    emit(g.out.as_deref(), &v)?;
    if ok {
        Ok(())
    } else {
        Err(Failure::Assert(v))
    }
}

fn experiments_run(g: &Global, path: &Path, dry_run: bool) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if let Some(s) = g.grid {
        cfg.grid.d = s.d;
        cfg.grid.l = s.depth;
    }
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    validate(&cfg)?;
    if dry_run {
        println!("config ok: {}", cfg.experiment.name());
        return Ok(());
    }
    let rep = run_experiment(&cfg)?;
    let stem = g.out.clone().or_else(|| cfg.output.as_ref().map(PathBuf::from));
    match stem {
        Some(stem) => {
            let (c, j) = rep.write(&stem)?;
            eprintln!("wrote {} and {}", c.display(), j.display());
        }
        None => {
            print!("{}", rep.csv()?);
            println!("{}", rep.json()?);
        }
    }
    Ok(())
}

fn verify(g: &Global, a: &VerifyArgs) -> Result<(), Failure> {
    if !(a.scale > 0.0 && a.scale.is_finite()) {
        return Err(Failure::Config(format!("--scale = {} must be positive", a.scale)));
    }
    let opts = VerifyOptions { seed: g.seed(), grid: g.grid, k: a.k, inject_violation: a.inject_violation, scale: a.scale };
    let rep = multiweight::harness::verify_suite(a.suite, &opts);
    for b in &rep.batteries {
        eprintln!("{}", b.line());
        for n in &b.notes {
            eprintln!("    {n}");
        }
    }
    if a.monitor {
        let m = monitor_envelopes(g.seed(), (20.0 * a.scale).ceil() as usize)?;
        for p in &m.points {
            eprintln!("monitor {} L={} max {:.4} median {:.4}", p.experiment, p.l, p.max_ratio, p.median_ratio);
        }
        for w in &m.warnings {
            eprintln!("warning: {w}");
        }
    }
    if let Some(out) = &g.out {
        emit(Some(out), &serde_json::to_value(&rep).expect("report serializes"))?;
    }
    if rep.passed() {
        Ok(())
    } else {
        for f in rep.failures() {
            println!("{}", serde_json::to_string(f).expect("json"));
        }
        Err(Failure::Assert(Value::Null))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let g = &cli.global;
    let res = match &cli.command {
        Command::Constants(a) => constants(g, a),
        Command::Rdf(a) => rdf(g, a),
        Command::ExtrapolateExponents(a) => extrapolate(g, a),
        Command::SparseCheck(a) => sparse_check(g, a),
        Command::Experiments { action: ExperimentsAction::Run { config, dry_run } } => experiments_run(g, config, *dry_run),
        Command::Verify(a) => verify(g, a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Assert(v)) => {
            if !v.is_null() {
                eprintln!("{}", serde_json::to_string(&v).expect("json"));
            }
            ExitCode::from(1)
        }
        Err(Failure::Config(m)) => {
            eprintln!("{m}");
            ExitCode::from(2)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
