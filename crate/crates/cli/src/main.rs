use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use cagasp_bench::{run_bench, BenchConfig, BenchRecord, EngineSpec, ExternalEngine, Mode, Rewrite};
use cagasp_core::cag::{cag_rewrite_report, CagOptions, DEFAULT_UNFOLD_DEPTH};
use cagasp_core::ground::{ground_timed, grounding_stats, herbrand_instantiate, GroundOptions, GroundingStats};
use cagasp_core::hcp::{batch_facts, gen_instance, render_facts, verify_solution, InstanceSpec};
use cagasp_core::incremental::{
    incremental_solve_traced, Engine, FactBatch, InternalEngine, IterationTrace, VerifyFinal,
};
use cagasp_core::lang::{parse_atoms, parse_program, render_program, Atom, Program};
use cagasp_core::solve::{check_stable, enumerate_brute_force, solve, solve_all, AnswerSet};
use cagasp_core::Error;

const EXIT_SAT: u8 = 10;
const EXIT_UNSAT: u8 = 20;

#[derive(Parser)]
#[command(
    name = "cagasp",
    version,
    about = "Grounding, solving and constraint-aware guessing for ASP programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum StatsFormat {
    Csv,
    Human,
}

#[derive(Subcommand)]
enum Command {
    /// Ground a program and print the ground rules.
    Ground {
        file: PathBuf,
        /// Use the unsimplified Herbrand instantiation.
        #[arg(long)]
        oracle: bool,
        /// Print grounding statistics: CSV on stdout after the program, or
        /// human-readable on stderr.
        #[arg(long, value_enum)]
        stats: Option<StatsFormat>,
        /// Keep ground rules whose bodies differ only in literal order.
        #[arg(long)]
        keep_symmetric: bool,
    },
    /// Compute answer sets. Exits 10 when one exists, 20 otherwise.
    Solve {
        file: PathBuf,
        /// Number of models to print; 0 prints all.
        #[arg(long, default_value_t = 1)]
        models: usize,
        /// Enumerate by testing every candidate subset.
        #[arg(long)]
        brute_force: bool,
        /// Check whether the atoms in this file form an answer set instead.
        #[arg(long, value_name = "MODEL_FILE")]
        check: Option<PathBuf>,
    },
    /// Add filter literals to guess rules.
    Rewrite {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_UNFOLD_DEPTH)]
        unfold_depth: usize,
        /// Only rewrite rules with these head predicates.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
        /// Describe every filter condition on stderr.
        #[arg(long)]
        report: bool,
    },
    /// Solve an instance in batches, feeding each answer set forward.
    Inc {
        encoding: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        /// Persons per iteration.
        #[arg(long, default_value_t = 5)]
        ppi: usize,
        /// `internal` or `external:<command>`.
        #[arg(long, default_value = "internal")]
        engine: String,
        /// Rewrite the encoding before the loop.
        #[arg(long)]
        cag: bool,
        /// Per-iteration trace on stderr.
        #[arg(long, value_enum)]
        trace: Option<StatsFormat>,
        /// Check the final answer set against the whole program.
        #[arg(long, value_enum, default_value = "auto")]
        verify: VerifyArg,
        #[arg(long, value_parser = humantime::parse_duration)]
        timeout: Option<Duration>,
    },
    /// Generate an HCP instance.
    Gen {
        #[arg(long)]
        persons: usize,
        /// Persons per batch file; requires --emit-batches.
        #[arg(long, requires = "emit_batches")]
        ppi: Option<usize>,
        /// Write one fact file per batch into this directory.
        #[arg(long, value_name = "DIR", requires = "ppi")]
        emit_batches: Option<PathBuf>,
    },
    /// Check an HCP configuration. Exits 0 when valid, 1 otherwise.
    Verify { instance: PathBuf, model: PathBuf },
    /// Run HCP instances of growing size and write CSV.
    Bench {
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value = "incremental")]
        mode: Mode,
        #[arg(long, default_value = "plain")]
        rewrite: Rewrite,
        #[arg(long, default_value_t = 5)]
        ppi: usize,
        #[arg(long, default_value = "60s", value_parser = humantime::parse_duration)]
        timeout: Duration,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "internal")]
        engine: String,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyArg {
    On,
    Off,
    Auto,
}

impl From<VerifyArg> for VerifyFinal {
    fn from(v: VerifyArg) -> VerifyFinal {
        match v {
            VerifyArg::On => VerifyFinal::On,
            VerifyArg::Off => VerifyFinal::Off,
            VerifyArg::Auto => VerifyFinal::Auto,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse().command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Ground {
            file,
            oracle,
            stats,
            keep_symmetric,
        } => ground_cmd(&file, oracle, stats, keep_symmetric),
        Command::Solve {
            file,
            models,
            brute_force,
            check,
        } => solve_cmd(&file, models, brute_force, check.as_deref()),
        Command::Rewrite {
            file,
            unfold_depth,
            only,
            report,
        } => rewrite_cmd(&file, unfold_depth, only, report),
        Command::Inc {
            encoding,
            instance,
            ppi,
            engine,
            cag,
            trace,
            verify,
            timeout,
        } => inc_cmd(&encoding, &instance, ppi, &engine, cag, trace, verify.into(), timeout),
        Command::Gen {
            persons,
            ppi,
            emit_batches,
        } => gen_cmd(persons, ppi, emit_batches.as_deref()),
        Command::Verify { instance, model } => verify_cmd(&instance, &model),
        Command::Bench {
            sizes,
            mode,
            rewrite,
            ppi,
            timeout,
            out,
            engine,
            parallel,
        } => {
            let cfg = BenchConfig {
                sizes,
                ppi,
                mode,
                rewrite,
                engine: engine.parse()?,
                timeout,
                output: out,
                parallel,
            };
            bench_cmd(&cfg)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_program(path: &Path) -> Result<Program> {
    parse_program(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_atoms(path: &Path) -> Result<Vec<Atom>> {
    parse_atoms(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn print_stats(format: StatsFormat, s: &GroundingStats) {
    match format {
        StatsFormat::Csv => {
            println!("rule_count,constraint_count,atom_occurrences,bytes,seconds");
            println!(
                "{},{},{},{},{:.6}",
                s.rule_count,
                s.constraint_count,
                s.atom_occurrences,
                s.bytes,
                s.elapsed.as_secs_f64()
            );
        }
        StatsFormat::Human => eprintln!(
            "rules: {}\nconstraints: {}\natom occurrences: {}\nbytes: {}\ntime: {:.2?}",
            s.rule_count, s.constraint_count, s.atom_occurrences, s.bytes, s.elapsed
        ),
    }
}

fn ground_cmd(file: &Path, oracle: bool, stats: Option<StatsFormat>, keep_symmetric: bool) -> Result<u8> {
    let p = load_program(file)?;
    let (g, s) = if oracle {
        let start = std::time::Instant::now();
        let g = herbrand_instantiate(&p)?;
        let s = grounding_stats(&g, start.elapsed());
        (g, s)
    } else {
        let opts = GroundOptions {
            keep_symmetric,
            ..GroundOptions::default()
        };
        ground_timed(&p, &opts)?
    };
    print!("{}", g.render());
    if let Some(f) = stats {
        print_stats(f, &s);
    }
    Ok(0)
}

fn solve_cmd(file: &Path, models: usize, brute_force: bool, check: Option<&Path>) -> Result<u8> {
    let g = cagasp_core::ground::ground(&load_program(file)?)?;
    if let Some(model_file) = check {
        let candidate = AnswerSet::new(load_atoms(model_file)?);
        let stable = check_stable(&g, &candidate.to_interpretation());
        println!("{}", if stable { "stable" } else { "not stable" });
        return Ok(if stable { 0 } else { 1 });
    }
    let found = if brute_force {
        let mut all = enumerate_brute_force(&g)?;
        if models > 0 {
            all.truncate(models);
        }
        all
    } else if models == 0 {
        solve_all(&g)?
    } else {
        solve(&g, models)?
    };
    let mut out = io::stdout().lock();
    for m in &found {
        writeln!(out, "{m}")?;
    }
    if found.is_empty() {
        writeln!(out, "UNSATISFIABLE")?;
        return Ok(EXIT_UNSAT);
    }
    Ok(EXIT_SAT)
}

fn rewrite_cmd(file: &Path, unfold_depth: usize, only: Option<Vec<String>>, report: bool) -> Result<u8> {
    let p = load_program(file)?;
    let opts = CagOptions {
        unfold_depth,
        targets: only.map(|v| v.into_iter().collect::<BTreeSet<_>>()),
    };
    let (out, rep) = cag_rewrite_report(&p, &opts);
    print!("{}", render_program(&out));
    if report {
        eprint!("{rep}");
    }
    Ok(0)
}

fn print_trace(format: StatsFormat, traces: &[IterationTrace]) {
    let rules = |t: &IterationTrace| t.stats.as_ref().map(|s| s.rule_count.to_string()).unwrap_or_default();
    let bytes = |t: &IterationTrace| t.stats.as_ref().map(|s| s.bytes.to_string()).unwrap_or_default();
    match format {
        StatsFormat::Csv => {
            eprintln!("index,input_fact_count,ground_rules,ground_bytes,ground_time,solve_time,answer_set_size,status");
            for t in traces {
                eprintln!(
                    "{},{},{},{},{:.6},{:.6},{},{}",
                    t.index,
                    t.input_fact_count,
                    rules(t),
                    bytes(t),
                    t.ground_time.as_secs_f64(),
                    t.solve_time.as_secs_f64(),
                    t.answer_set_size,
                    t.status
                );
            }
        }
        StatsFormat::Human => {
            for t in traces {
                eprintln!(
                    "iteration {}: {} input facts, {} ground rules, ground {:.2?}, solve {:.2?}, {} atoms, {}",
                    t.index,
                    t.input_fact_count,
                    rules(t),
                    t.ground_time,
                    t.solve_time,
                    t.answer_set_size,
                    t.status
                );
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn inc_cmd(
    encoding: &Path,
    instance: &Path,
    ppi: usize,
    engine: &str,
    cag: bool,
    trace: Option<StatsFormat>,
    verify: VerifyFinal,
    timeout: Option<Duration>,
) -> Result<u8> {
    if ppi == 0 {
        bail!("--ppi must be positive");
    }
    let mut enc = load_program(encoding)?;
    if cag {
        enc = cag_rewrite_report(&enc, &CagOptions::default()).0;
    }
    let inst = load_program(instance)?;
    if !inst.rules.is_empty() {
        bail!("{} contains rules; expected facts only", instance.display());
    }
    let batches = batch_facts(&inst.facts, ppi);
    let deadline = timeout.and_then(|t| std::time::Instant::now().checked_add(t));
    let engine: Box<dyn Engine> = match engine.parse()? {
        EngineSpec::Internal => Box::new(InternalEngine::with_deadline(deadline)),
        EngineSpec::External(cmd) => Box::new(ExternalEngine { cmd, deadline }),
    };
    let (traces, outcome) = incremental_solve_traced(&enc, &batches, engine.as_ref(), verify);
    if let Some(f) = trace {
        print_trace(f, &traces);
    }
    match outcome {
        Ok((model, verified)) => {
            println!("{model}");
            if verified == Some(false) {
                bail!("final answer set is not stable for the whole program");
            }
            Ok(EXIT_SAT)
        }
        Err(e @ Error::IterationUnsat { .. }) => {
            println!("UNSATISFIABLE");
            eprintln!("{e}");
            Ok(EXIT_UNSAT)
        }
        Err(e) => Err(e.into()),
    }
}

fn gen_cmd(persons: usize, ppi: Option<usize>, dir: Option<&Path>) -> Result<u8> {
    let facts = gen_instance(&InstanceSpec::new(persons));
    let (Some(ppi), Some(dir)) = (ppi, dir) else {
        print!("{}", render_facts(&facts));
        return Ok(0);
    };
    if ppi == 0 {
        bail!("--ppi must be positive");
    }
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let batches: Vec<FactBatch> = batch_facts(&facts, ppi);
    for b in &batches {
        let path = dir.join(format!("batch_{:03}.lp", b.index));
        fs::write(&path, render_facts(&b.facts)).with_context(|| format!("writing {}", path.display()))?;
    }
    eprintln!("wrote {} batch files to {}", batches.len(), dir.display());
    Ok(0)
}

fn verify_cmd(instance: &Path, model: &Path) -> Result<u8> {
    let inst = load_program(instance)?.facts;
    let candidate = AnswerSet::new(load_atoms(model)?);
    let violations = verify_solution(&inst, &candidate);
    if violations.is_empty() {
        println!("valid");
        return Ok(0);
    }
    for v in &violations {
        println!("{v}");
    }
    Ok(1)
}

fn bench_cmd(cfg: &BenchConfig) -> Result<u8> {
    let records = run_bench(cfg)?;
    if cfg.output.is_none() {
        let mut w = csv::Writer::from_writer(io::stdout().lock());
        for r in &records {
            w.serialize::<&BenchRecord>(r)?;
        }
        w.flush()?;
    }
    Ok(0)
}
