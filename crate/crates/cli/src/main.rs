//! `sumset`: generate instances, check sumset bounds, and recover Bohr structure.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sumset_core::conv;
use sumset_core::critical::{approximate_by_translates, shrink_to_small, ShrinkOptions};
use sumset_core::group::SetJson;
use sumset_core::harness::{self, ExperimentConfig, GeneratorSpec, InstanceRecord, RunRecord, Task, Verdict};
use sumset_core::inverse::{self, recover_bohr_pair, RecoveryConfig};
use sumset_core::rational::{self, Rational};
use sumset_core::{Error, GridGroup, GroupSet};

const EXIT_VIOLATION: u8 = 2;
const EXIT_CONFIG: u8 = 3;

#[derive(Parser)]
#[command(name = "sumset", version, about = "Exact sumset inequalities and Bohr-set recovery on finite grids")]
struct Cli {
    /// Base seed for every stochastic step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory receiving output files.
    #[arg(long, global = true, env = "SUMSET_OUT")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a pair of sets.
    Gen(GenArgs),
    /// Convolution profile of two sets.
    Conv {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Also report the partial sumset at this threshold.
        #[arg(long, value_parser = parse_rational)]
        threshold: Option<Rational>,
    },
    /// Check a law on a pair from files, or on generated instances.
    Check(CheckArgs),
    /// Shrink B to a small set that stays critical with A.
    Shrink {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, value_parser = parse_rational)]
        delta_target: Rational,
        #[arg(long, value_parser = parse_rational, default_value = "1/20")]
        tolerance: Rational,
        /// Partial-sumset threshold used for criticality.
        #[arg(long, value_parser = parse_rational)]
        delta: Rational,
        #[arg(long, default_value_t = 10)]
        cap_factor: i128,
        #[arg(long, default_value_t = 64)]
        max_steps: usize,
    },
    /// Approximate A +_δ B by A + X for m² sampled elements X of B.
    Translates {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, value_parser = parse_rational)]
        delta: Rational,
        #[arg(long)]
        m: usize,
    },
    /// Recover parallel Bohr sets from a critical pair.
    Recover(RecoverArgs),
    /// Run an experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenKind {
    BohrNoise,
    Random,
    Interval,
    AdversarialSubgroup,
}

#[derive(Args)]
struct GenArgs {
    /// Group moduli, e.g. `6000` or `4,6`.
    #[arg(long, value_delimiter = ',')]
    dims: Vec<usize>,
    #[arg(long, value_enum, default_value_t = GenKind::Random)]
    generator: GenKind,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    freq: Vec<i64>,
    #[arg(long, default_value_t = 0.15)]
    measure_min: f64,
    #[arg(long, default_value_t = 0.3)]
    measure_max: f64,
    #[arg(long, default_value_t = 0.0)]
    rho: f64,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
}

impl GenArgs {
    fn spec(&self) -> GeneratorSpec {
        match self.generator {
            GenKind::BohrNoise => GeneratorSpec::BohrNoise {
                freq: if self.freq.is_empty() { vec![1; self.dims.len()] } else { self.freq.clone() },
                measure_min: self.measure_min,
                measure_max: self.measure_max,
                rho: self.rho,
            },
            GenKind::Random => GeneratorSpec::Random { density: self.density },
            GenKind::Interval => GeneratorSpec::Interval,
            GenKind::AdversarialSubgroup => GeneratorSpec::AdversarialSubgroup,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Law {
    Kneser,
    Ruzsa,
    Partial,
    Submod,
    Classify,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, value_enum)]
    law: Law,
    #[arg(long, requires = "b")]
    a: Option<PathBuf>,
    #[arg(long, requires = "a")]
    b: Option<PathBuf>,
    /// Third set for `submod` on files.
    #[arg(long)]
    c: Option<PathBuf>,
    /// Fixed ε for `partial`; drawn per instance when absent.
    #[arg(long, value_parser = parse_rational)]
    eps: Option<Rational>,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[command(flatten)]
    gen: GenArgs,
}

#[derive(Args)]
struct RecoverArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long, value_parser = parse_rational)]
    delta: Rational,
    #[arg(long, value_parser = parse_rational, default_value = "1/20")]
    eps: Rational,
    #[arg(long, value_parser = parse_rational, default_value = "1/20")]
    tolerance: Rational,
    /// Smoothing window; defaults to ceil(L/256).
    #[arg(long)]
    window: Option<usize>,
    #[arg(long, default_value_t = 16)]
    mmax: usize,
    /// Largest k in the C_k growth check.
    #[arg(long, default_value_t = 8)]
    kcheck: usize,
    /// Write the spectrum of A as CSV.
    #[arg(long)]
    spectrum_csv: Option<PathBuf>,
    /// Write the pushforward density of A under the recovered character as CSV.
    #[arg(long)]
    density_csv: Option<PathBuf>,
}

fn parse_rational(text: &str) -> Result<Rational, String> {
    rational::parse(text).ok_or_else(|| format!("`{text}` is not a rational (use p/q or a decimal)"))
}

/// Failure modes mapped onto exit codes.
enum Failure {
    Config(String),
    Violation,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation) => ExitCode::from(EXIT_VIOLATION),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    if let Some(dir) = &cli.out {
        fs::create_dir_all(dir)?;
    }
    match &cli.command {
        Command::Gen(args) => cmd_gen(cli, args),
        Command::Conv { a, b, threshold } => cmd_conv(cli, a, b, threshold.as_ref()),
        Command::Check(args) => cmd_check(cli, args),
        Command::Shrink { a, b, delta_target, tolerance, delta, cap_factor, max_steps } => {
            let opts = ShrinkOptions { delta: *delta, cap_factor: *cap_factor, max_steps: *max_steps };
            cmd_shrink(cli, a, b, delta_target, tolerance, &opts)
        }
        Command::Translates { a, b, delta, m } => cmd_translates(cli, a, b, delta, *m),
        Command::Recover(args) => cmd_recover(cli, args),
        Command::Run { config } => cmd_run(cli, config),
    }
}

fn read_set(path: &Path) -> Result<GroupSet, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    SetJson::parse(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn write_out(cli: &Cli, name: &str, contents: &[u8]) -> Outcome {
    if let Some(dir) = &cli.out {
        fs::write(dir.join(name), contents)?;
    }
    Ok(())
}

fn print_json(value: &Value) -> Outcome {
    let mut line = serde_json::to_vec(value).map_err(|e| Failure::Config(e.to_string()))?;
    line.push(b'\n');
    print_bytes(&line)
}

fn print_bytes(bytes: &[u8]) -> Outcome {
    match io::stdout().lock().write_all(bytes) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value, Failure> {
    serde_json::to_value(v).map_err(|e| Failure::Config(e.to_string()))
}

fn cmd_gen(cli: &Cli, args: &GenArgs) -> Outcome {
    if args.dims.is_empty() {
        return Err(Failure::Config("--dims is required".into()));
    }
    let group = GridGroup::new(&args.dims)?;
    let (a, b) = harness::generate(&group, &args.spec(), cli.seed)?;
    write_out(cli, "a.json", SetJson::render(&a).as_bytes())?;
    write_out(cli, "b.json", SetJson::render(&b).as_bytes())?;
    match cli.format {
        Format::Json => print_json(&json!({
            "schema": "sumset.pair/1",
            "seed": cli.seed,
            "a": SetJson::from_set(&a),
            "b": SetJson::from_set(&b),
        })),
        Format::Csv => {
            let mut text = String::from("set,element\n");
            for (name, s) in [("a", &a), ("b", &b)] {
                for x in s.iter() {
                    text.push_str(&format!("{name},{x}\n"));
                }
            }
            print_bytes(text.as_bytes())
        }
    }
}

fn cmd_conv(cli: &Cli, a: &Path, b: &Path, threshold: Option<&Rational>) -> Outcome {
    let (a, b) = (read_set(a)?, read_set(b)?);
    let profile = conv::convolve(&a, &b)?;
    let mut csv = Vec::new();
    profile.write_csv(&mut csv)?;
    write_out(cli, "profile.csv", &csv)?;
    match cli.format {
        Format::Json => {
            let mut v = json!({
                "schema": "sumset.conv/1",
                "summary": profile.summary(),
                "sumset_size": profile.level_set(1).len(),
            });
            if let Some(t) = threshold {
                let partial = conv::partial_sumset(&a, &b, t)?;
                v["threshold"] = Value::String(rational::format(t));
                v["partial_size"] = json!(partial.len());
                v["partial_measure"] = Value::String(rational::format(&partial.measure()));
            }
            print_json(&v)
        }
        Format::Csv => print_bytes(&csv),
    }
}

fn task_for(args: &CheckArgs) -> Task {
    match args.law {
        Law::Kneser => Task::Kneser,
        Law::Ruzsa => Task::Ruzsa,
        Law::Partial => Task::Partial { eps: args.eps },
        Law::Submod => Task::Submod,
        Law::Classify => Task::Classify,
    }
}

/// Instance lines, plus the run summary line for generated batches.
fn emit_instances(cli: &Cli, record: &RunRecord, with_summary: bool) -> Outcome {
    let mut out = Vec::new();
    match cli.format {
        Format::Json if with_summary => record.write_jsonl(&mut out)?,
        Format::Json => {
            for inst in &record.instances {
                serde_json::to_writer(&mut out, inst).map_err(|e| Failure::Config(e.to_string()))?;
                out.push(b'\n');
            }
        }
        Format::Csv => record.write_csv(&mut out)?,
    }
    print_bytes(&out)
}

fn verdict_outcome(instances: &[InstanceRecord]) -> Outcome {
    if instances.iter().all(|r| matches!(r.verdict, Verdict::Holds | Verdict::Success)) {
        Ok(())
    } else {
        Err(Failure::Violation)
    }
}

fn cmd_check(cli: &Cli, args: &CheckArgs) -> Outcome {
    let task = task_for(args);
    let gen = &args.gen;
    let from_files = args.a.is_some() && args.b.is_some();
    let record = match (&args.a, &args.b) {
        (Some(a), Some(b)) => {
            let (a, b) = (read_set(a)?, read_set(b)?);
            let third = args.c.as_deref().map(read_set).transpose()?;
            let inst = harness::evaluate(&task, &a, &b, third.as_ref(), cli.seed)?;
            let dims = a.group().dims().to_vec();
            single_record(dims, task, cli.seed, inst)
        }
        _ if !gen.dims.is_empty() => {
            let config = ExperimentConfig {
                dims: gen.dims.clone(),
                generator: gen.spec(),
                task,
                seed: cli.seed,
                trials: args.trials,
                output: cli.out.clone(),
            };
            harness::run_experiment(&config)?
        }
        _ => return Err(Failure::Config("give --a/--b files or --dims for generated instances".into())),
    };
    emit_instances(cli, &record, !from_files)?;
    verdict_outcome(&record.instances)
}

/// A run record wrapping one instance evaluated on explicit sets; its config is never emitted.
fn single_record(dims: Vec<usize>, task: Task, seed: u64, inst: InstanceRecord) -> RunRecord {
    let instances = vec![inst];
    let ok = matches!(instances[0].verdict, Verdict::Holds | Verdict::Success);
    RunRecord {
        schema: harness::RUN_SCHEMA.into(),
        config: ExperimentConfig { dims, generator: GeneratorSpec::Interval, task, seed, trials: 1, output: None },
        aggregate: harness::Aggregate {
            trials: 1,
            holds: usize::from(instances[0].verdict == Verdict::Holds),
            violations: usize::from(!ok),
            successes: usize::from(instances[0].verdict == Verdict::Success),
            failures: 0,
            errors: 0,
            residual_quantiles: None,
        },
        instances,
        wall_clock_ms: 0,
    }
}

fn cmd_shrink(cli: &Cli, a: &Path, b: &Path, target: &Rational, tolerance: &Rational, opts: &ShrinkOptions) -> Outcome {
    let (a, b) = (read_set(a)?, read_set(b)?);
    let outcome = shrink_to_small(&a, &b, target, tolerance, opts)?;
    let mut csv = Vec::new();
    outcome.write_log_csv(&mut csv)?;
    write_out(cli, "shrink_log.csv", &csv)?;
    write_out(cli, "c.json", SetJson::render(&outcome.set).as_bytes())?;
    match cli.format {
        Format::Json => {
            let mut v = to_value(&outcome)?;
            v["schema"] = json!("sumset.shrink/1");
            v["set"] = to_value(&SetJson::from_set(&outcome.set))?;
            print_json(&v)
        }
        Format::Csv => print_bytes(&csv),
    }
}

fn cmd_translates(cli: &Cli, a: &Path, b: &Path, delta: &Rational, m: usize) -> Outcome {
    let (a, b) = (read_set(a)?, read_set(b)?);
    let approx = approximate_by_translates(&a, &b, delta, m, cli.seed)?;
    match cli.format {
        Format::Json => {
            let mut v = to_value(&approx)?;
            v["schema"] = json!("sumset.translates/1");
            print_json(&v)
        }
        Format::Csv => {
            let mut text = String::from("translate\n");
            for x in &approx.translates {
                text.push_str(&format!("{x}\n"));
            }
            print_bytes(text.as_bytes())
        }
    }
}

fn cmd_recover(cli: &Cli, args: &RecoverArgs) -> Outcome {
    let (a, b) = (read_set(&args.a)?, read_set(&args.b)?);
    let config = RecoveryConfig {
        tolerance: args.tolerance,
        eps: args.eps,
        window: args.window,
        m_max: args.mmax,
        k_steps: args.kcheck,
        seed: cli.seed,
        ..RecoveryConfig::default()
    };
    let result = recover_bohr_pair(&a, &b, &args.delta, &config)?;
    if let Some(path) = &args.spectrum_csv {
        inverse::spectrum(&a).write_csv(fs::File::create(path)?)?;
    }
    if let Some(path) = &args.density_csv {
        let w = args.window.unwrap_or_else(|| inverse::default_window(result.character.order()));
        inverse::pushforward(&a, &result.character, w)?.write_csv(fs::File::create(path)?)?;
    }
    let mut v = to_value(&result)?;
    v["schema"] = json!("sumset.recovery/1");
    write_out(cli, "recovery.json", v.to_string().as_bytes())?;
    match cli.format {
        Format::Json => print_json(&v)?,
        Format::Csv => {
            let freq: Vec<String> = result.character.freq().iter().map(|f| f.to_string()).collect();
            let text = format!(
                "freq,order,m,tau,arc_i_start,arc_i_length,arc_j_start,arc_j_length,residual_a,residual_b,success\n\
                 {},{},{},{},{},{},{},{},{},{},{}\n",
                freq.join(":"),
                result.character.order(),
                result.m,
                result.tau,
                result.arc_i.start,
                result.arc_i.length,
                result.arc_j.start,
                result.arc_j.length,
                rational::format(&result.residual_a),
                rational::format(&result.residual_b),
                result.success
            );
            print_bytes(text.as_bytes())?;
        }
    }
    if result.success {
        Ok(())
    } else {
        Err(Failure::Violation)
    }
}

fn cmd_run(cli: &Cli, path: &Path) -> Outcome {
    let mut config = harness::load_config(path)?;
    if config.output.is_none() {
        config.output = cli.out.clone();
    }
    let record = harness::run_experiment(&config)?;
    match cli.format {
        Format::Json => print_json(&json!({
            "schema": record.schema,
            "aggregate": record.aggregate,
            "wall_clock_ms": record.wall_clock_ms,
        }))?,
        Format::Csv => {
            let mut csv = Vec::new();
            record.write_csv(&mut csv)?;
            print_bytes(&csv)?;
        }
    }
    if record.all_ok() {
        Ok(())
    } else {
        Err(Failure::Violation)
    }
}
