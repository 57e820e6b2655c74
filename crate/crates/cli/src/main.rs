use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{debug, info};

use skolem_core::aig::aiger::{write_aag, AagFile};
use skolem_core::aig::dot::write_dot;
use skolem_core::bench::{instances_in, run_sweep, scatter, write_csv, BenchOptions, VerifyMode};
use skolem_core::frontend::{apply_order, load_spec, parse_dimacs, InputFormat, VarOrder};
use skolem_core::gen::{random_instance, GenParams};
use skolem_core::sat::{Backend, SatOracle, SatResult};
use skolem_core::skolem::{synthesize, Budget, CegarConfig, Engine, GeneralizeStrategy, Phase, SkolemVector, SynthError};
use skolem_core::verify::{certify_exhaustive, certify_sat_with, VerifyError};
use skolem_core::{FactoredSpec, NodeRef, VarId};

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser)]
#[command(name = "skolem", version, about = "Skolem function synthesis for factored specifications")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a Skolem vector and write it as AIGER.
    Synth(SynthArgs),
    /// Check an AIGER vector against a specification.
    Verify(VerifyArgs),
    /// Run engines over every instance in a directory and write CSV.
    Bench(BenchArgs),
    /// Write a seeded suite of random factored instances.
    Gen(GenArgs),
    /// Decide a DIMACS CNF file, answering in SAT-competition format.
    Sat(SatArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Mono,
    Cegar,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Engine {
        match e {
            EngineArg::Mono => Engine::Mono,
            EngineArg::Cegar => Engine::Cegar,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GeneralizeArg {
    Cube,
    Whole,
    Element,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Given,
    Occurrence,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyArg {
    None,
    Sat,
    Exhaustive,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitArg {
    Aiger,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Qdimacs,
    Fctr,
}

impl From<FormatArg> for InputFormat {
    fn from(f: FormatArg) -> InputFormat {
        match f {
            FormatArg::Qdimacs => InputFormat::Qdimacs,
            FormatArg::Fctr => InputFormat::Factored,
        }
    }
}

#[derive(Args, Clone)]
struct EngineOpts {
    /// Generalization used when refining.
    #[arg(long, value_enum, default_value = "element")]
    generalize: GeneralizeArg,
    /// Elimination order of the existential variables.
    #[arg(long, value_enum, default_value = "occurrence")]
    order: OrderArg,
    /// External SAT solver command; the DIMACS path is appended.
    #[arg(long, value_name = "CMD")]
    solver: Option<String>,
    /// Maximum number of refinements.
    #[arg(long, value_name = "N")]
    budget_iterations: Option<u64>,
    /// Maximum number of AIG nodes.
    #[arg(long, value_name = "N")]
    budget_nodes: Option<usize>,
    /// Wall-clock limit in seconds; 0 disables it.
    #[arg(long, value_name = "SECS", default_value_t = 60.0)]
    budget_time: f64,
}

impl EngineOpts {
    fn config(&self) -> CegarConfig {
        let mut budget = Budget::default();
        if let Some(n) = self.budget_iterations {
            budget.max_iterations = n;
        }
        if let Some(n) = self.budget_nodes {
            budget.max_nodes = n;
        }
        budget.time_limit = (self.budget_time > 0.0).then(|| Duration::from_secs_f64(self.budget_time));
        CegarConfig {
            generalize: match self.generalize {
                GeneralizeArg::Cube => GeneralizeStrategy::Cube,
                GeneralizeArg::Whole => GeneralizeStrategy::Whole,
                GeneralizeArg::Element => GeneralizeStrategy::Element,
            },
            budget,
            backend: backend(&self.solver),
        }
    }

    fn order(&self) -> VarOrder {
        match self.order {
            OrderArg::Given => VarOrder::Given,
            OrderArg::Occurrence => VarOrder::Occurrence,
        }
    }
}

fn backend(solver: &Option<String>) -> Backend {
    solver.as_deref().map_or(Backend::Internal, Backend::external)
}

#[derive(Args)]
struct SynthArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value = "cegar")]
    engine: EngineArg,
    #[arg(long, value_enum, default_value = "none")]
    verify: VerifyArg,
    #[arg(long, value_enum, default_value = "aiger")]
    emit: EmitArg,
    /// Input format; guessed from the extension when omitted.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Output file instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    opts: EngineOpts,
}

#[derive(Args)]
struct VerifyArgs {
    spec: PathBuf,
    vector: PathBuf,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long, value_name = "CMD")]
    solver: Option<String>,
}

#[derive(Args)]
struct BenchArgs {
    dir: PathBuf,
    /// Engines to run, in column order.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "mono,cegar")]
    engines: Vec<EngineArg>,
    #[arg(long, value_enum, default_value = "none")]
    verify: VerifyArg,
    #[arg(short, long, default_value_t = 1)]
    jobs: usize,
    /// Per-run CSV; stdout when omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Per-instance CSV pairing both engines.
    #[arg(long)]
    scatter: Option<PathBuf>,
    #[command(flatten)]
    opts: EngineOpts,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 2015)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    count: u64,
    #[arg(long, value_enum, default_value = "fctr")]
    format: FormatArg,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    max_n: Option<usize>,
    #[arg(long)]
    max_m: Option<usize>,
    #[arg(long)]
    max_r: Option<usize>,
}

#[derive(Args)]
struct SatArgs {
    input: PathBuf,
}

/// Failure carrying its exit code and a machine-readable reason.
struct Failure {
    code: u8,
    reason: String,
    message: String,
}

impl Failure {
    fn new(code: u8, reason: &str, message: impl ToString) -> Failure {
        Failure { code, reason: reason.into(), message: message.to_string() }
    }

    fn io(path: &Path, e: io::Error) -> Failure {
        Failure::new(EXIT_USAGE, "io-error", format!("{}: {}", path.display(), e))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    let res = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Verify(a) => verify(a),
        Command::Bench(a) => bench(a),
        Command::Gen(a) => gen(a),
        Command::Sat(a) => sat(a),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("status=error reason={} message={:?}", f.reason, f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(path: &Path, format: Option<FormatArg>) -> Result<FactoredSpec, Failure> {
    load_spec(path, format.map(InputFormat::from)).map_err(|e| Failure::new(EXIT_PARSE, "parse-error", e))
}

fn synth_failure(e: SynthError) -> Failure {
    let code = match e {
        SynthError::Budget { .. } => EXIT_BUDGET,
        SynthError::Oracle(skolem_core::sat::OracleError::Timeout) => EXIT_BUDGET,
        _ => EXIT_USAGE,
    };
    Failure::new(code, &e.reason(), e)
}

fn inputs_of(spec: &FactoredSpec) -> Vec<(String, VarId)> {
    spec.y_vars.iter().map(|&y| (spec.var_name(y), y)).collect()
}

fn outputs_of(spec: &FactoredSpec, v: &SkolemVector) -> Vec<(String, NodeRef)> {
    spec.x_order.iter().zip(&v.psi).map(|(&x, &p)| (spec.var_name(x), p)).collect()
}

fn write_output(path: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::io(p, e)),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::io(Path::new("<stdout>"), e)),
    }
}

fn synth(a: SynthArgs) -> Result<u8, Failure> {
    let start = Instant::now();
    let engine = Engine::from(a.engine);
    let cfg = a.opts.config();
    let mut spec = apply_order(load(&a.input, a.format)?, a.opts.order());
    info!("{}: n={} m={} r={}", a.input.display(), spec.n(), spec.m(), spec.r());
    let (vector, stats) = synthesize(&mut spec, engine, &cfg).map_err(synth_failure)?;
    let verified = match a.verify {
        VerifyArg::None => None,
        VerifyArg::Sat => Some(certify_sat_with(&mut spec, &vector, &mut SatOracle::with_backend(cfg.backend.clone()))),
        VerifyArg::Exhaustive => Some(certify_exhaustive(&spec, &vector)),
    };
    let text = match a.emit {
        EmitArg::Aiger => write_aag(&spec.manager, &inputs_of(&spec), &outputs_of(&spec, &vector))
            .map_err(|e| Failure::new(EXIT_USAGE, "internal-error", e))?,
        EmitArg::Dot => write_dot(&spec.manager, &outputs_of(&spec, &vector)),
    };
    write_output(&a.output, &text)?;
    let (status, code, verdict) = match verified {
        None => ("ok", EXIT_OK, "none"),
        Some(Ok(true)) => ("ok", EXIT_OK, "pass"),
        Some(Ok(false)) => ("verify-failed", EXIT_VERIFY, "fail"),
        Some(Err(e)) => return Err(Failure::new(EXIT_USAGE, "verify-error", e)),
    };
    eprintln!(
        "status={} engine={} n={} m={} r={} refinements={} sat_calls={} avg_size={:.2} max_size={} verified={} time_ms={:.1}",
        status,
        engine,
        spec.n(),
        spec.m(),
        spec.r(),
        stats.refinements,
        stats.sat_calls,
        stats.avg_size,
        stats.max_size,
        verdict,
        start.elapsed().as_secs_f64() * 1e3
    );
    Ok(code)
}

fn verify(a: VerifyArgs) -> Result<u8, Failure> {
    let mut spec = load(&a.spec, a.format)?;
    let text = fs::read_to_string(&a.vector).map_err(|e| Failure::new(EXIT_PARSE, "parse-error", format!("{}: {}", a.vector.display(), e)))?;
    let aag = AagFile::parse(&text).map_err(|e| Failure::new(EXIT_PARSE, "parse-error", format!("{}: {}", a.vector.display(), e)))?;
    let leaves: Vec<(String, NodeRef)> = inputs_of(&spec)
        .into_iter()
        .map(|(name, y)| (name, spec.manager.mk_var(y)))
        .collect();
    let outputs = aag
        .build(&mut spec.manager, |name| leaves.iter().find(|(n, _)| n == name).map(|&(_, r)| r))
        .map_err(|e| Failure::new(EXIT_USAGE, "name-mismatch", e))?;
    let psi = match_outputs(&spec, outputs)?;
    let vector = SkolemVector::new(psi, Phase::Final);
    let mut oracle = SatOracle::with_backend(backend(&a.solver));
    let by_sat = certify_sat_with(&mut spec, &vector, &mut oracle).map_err(|e| Failure::new(EXIT_USAGE, "verify-error", e))?;
    let by_table = match certify_exhaustive(&spec, &vector) {
        Ok(b) => Some(b),
        Err(VerifyError::Bound { .. }) => None,
        Err(e) => return Err(Failure::new(EXIT_USAGE, "verify-error", e)),
    };
    debug!("sat={} exhaustive={:?}", by_sat, by_table);
    if let Some(t) = by_table {
        if t != by_sat {
            return Err(Failure::new(EXIT_USAGE, "internal-error", "certifiers disagree"));
        }
    }
    let pass = by_sat && by_table.unwrap_or(true);
    println!("{}", if pass { "PASS" } else { "FAIL" });
    Ok(if pass { EXIT_OK } else { EXIT_VERIFY })
}

/// Orders AIGER outputs by the existential they are named after.
fn match_outputs(spec: &FactoredSpec, outputs: Vec<(String, NodeRef)>) -> Result<Vec<NodeRef>, Failure> {
    let mismatch = |m: String| Failure::new(EXIT_USAGE, "name-mismatch", m);
    let mut psi: Vec<Option<NodeRef>> = vec![None; spec.n()];
    for (name, r) in outputs {
        let i = spec
            .x_order
            .iter()
            .position(|&x| spec.var_name(x) == name)
            .ok_or_else(|| mismatch(format!("output `{}` is not an existential variable", name)))?;
        if psi[i].replace(r).is_some() {
            return Err(mismatch(format!("output `{}` appears twice", name)));
        }
    }
    psi.into_iter()
        .zip(&spec.x_order)
        .map(|(p, &x)| p.ok_or_else(|| mismatch(format!("no output named `{}`", spec.var_name(x)))))
        .collect()
}

fn bench(a: BenchArgs) -> Result<u8, Failure> {
    let paths = instances_in(&a.dir).map_err(|e| Failure::io(&a.dir, e))?;
    let opts = BenchOptions {
        engines: a.engines.iter().map(|&e| Engine::from(e)).collect(),
        config: a.opts.config(),
        order: a.opts.order(),
        verify: match a.verify {
            VerifyArg::None => VerifyMode::None,
            VerifyArg::Sat => VerifyMode::Sat,
            VerifyArg::Exhaustive => VerifyMode::Exhaustive,
        },
        jobs: a.jobs,
    };
    info!("{} instances, {} engines", paths.len(), opts.engines.len());
    let rows = run_sweep(&paths, &opts);
    let csv_err = |e: csv::Error| Failure::new(EXIT_USAGE, "io-error", e);
    match &a.csv {
        Some(p) => write_csv(&rows, fs::File::create(p).map_err(|e| Failure::io(p, e))?).map_err(csv_err)?,
        None => write_csv(&rows, io::stdout().lock()).map_err(csv_err)?,
    }
    if let Some(p) = &a.scatter {
        write_csv(&scatter(&rows), fs::File::create(p).map_err(|e| Failure::io(p, e))?).map_err(csv_err)?;
    }
    let ok = rows.iter().filter(|r| r.status == "ok").count();
    eprintln!("status=ok instances={} rows={} ok_rows={}", paths.len(), rows.len(), ok);
    Ok(EXIT_OK)
}

fn gen(a: GenArgs) -> Result<u8, Failure> {
    let mut params = GenParams::default();
    params.max_n = a.max_n.unwrap_or(params.max_n);
    params.max_m = a.max_m.unwrap_or(params.max_m);
    params.max_r = a.max_r.unwrap_or(params.max_r);
    fs::create_dir_all(&a.out_dir).map_err(|e| Failure::io(&a.out_dir, e))?;
    let width = a.count.max(1).to_string().len();
    for i in 0..a.count {
        let inst = random_instance(a.seed, i, &params);
        let (text, ext) = match a.format {
            FormatArg::Fctr => (inst.to_fctr(), "fctr"),
            FormatArg::Qdimacs => (inst.to_qdimacs(), "qdimacs"),
        };
        let path = a.out_dir.join(format!("rand_{:0w$}.{}", i, ext, w = width));
        fs::write(&path, text).map_err(|e| Failure::io(&path, e))?;
    }
    eprintln!("status=ok seed={} count={}", a.seed, a.count);
    Ok(EXIT_OK)
}

fn sat(a: SatArgs) -> Result<u8, Failure> {
    let text = fs::read_to_string(&a.input)
        .map_err(|e| Failure::new(EXIT_PARSE, "parse-error", format!("{}: {}", a.input.display(), e)))?;
    let cnf = parse_dimacs(&text)
        .map_err(|e| Failure::new(EXIT_PARSE, "parse-error", format!("{}: {}", a.input.display(), e)))?;
    let res = SatOracle::new().solve(&cnf).map_err(|e| Failure::new(EXIT_USAGE, "oracle-error", e))?;
    let mut out = String::new();
    match res {
        SatResult::Sat(model) => {
            out.push_str("s SATISFIABLE\nv");
            for (v, &b) in model.iter().enumerate().skip(1) {
                out.push_str(&format!(" {}{}", if b { "" } else { "-" }, v));
            }
            out.push_str(" 0\n");
        }
        SatResult::Unsat => out.push_str("s UNSATISFIABLE\n"),
    }
    io::stdout().write_all(out.as_bytes()).map_err(|e| Failure::io(Path::new("<stdout>"), e))?;
    Ok(EXIT_OK)
}
