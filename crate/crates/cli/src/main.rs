//! `catkap`: run, verify and attack key agreement sessions; check model laws.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use catkap::laws::LawConfig;
use catkap::netsim::{self, AttackOutcome, Broker, DeliveryPolicy, EavesdropperView};
use catkap::protocols::{
    verify_transcript, EckapOptions, FamilyMode, InstanceSpec, ProtocolKind, SessionConfig,
    Transcript, VerifyReport,
};
use catkap::registry::{default_params, Instance};
use catkap::{with_model, Error};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::RngCore;
use serde_json::{json, Value};

/// Exit statuses.
mod exit {
    pub const OK: u8 = 0;
    /// Disagreement, law violation, inconsistent transcript, no preimage.
    pub const FAILURE: u8 = 1;
    /// Bad command line (reported by the argument parser).
    #[allow(dead_code)]
    pub const USAGE: u8 = 2;
    /// Unreadable or invalid parameter and transcript files.
    pub const INPUT: u8 = 3;
    /// A model or protocol error during a session.
    pub const PROTOCOL: u8 = 4;
    pub const EXHAUSTED: u8 = 5;
    pub const TOO_LARGE: u8 = 6;
}

#[derive(Parser)]
#[command(name = "catkap", version, about = "Categorical key agreement sessions at desk scale")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one session and write its transcript.
    Run(RunArgs),
    /// Re-validate a transcript file.
    Verify(VerifyArgs),
    /// Recover the key of a two-party transcript by exhaustive search.
    Attack(AttackArgs),
    /// Check the algebraic laws of an instantiation.
    Laws(LawsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Protocol {
    Ckap,
    Eckap,
    Multi,
}

impl From<Protocol> for ProtocolKind {
    fn from(p: Protocol) -> Self {
        match p {
            Protocol::Ckap => ProtocolKind::Ckap,
            Protocol::Eckap => ProtocolKind::Eckap,
            Protocol::Multi => ProtocolKind::Multi,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Families {
    Reduction,
    Polynomial,
}

#[derive(Args)]
struct InstanceArgs {
    /// Instantiation: dh, kolee, mpf, t-dh or t-kolee.
    #[arg(long)]
    inst: String,
    /// JSON parameter file; built-in desk parameters when absent.
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    protocol: Protocol,
    #[command(flatten)]
    instance: InstanceArgs,
    /// Comma-separated party seeds; a single seed `s` expands to `s, s+1, ...`.
    #[arg(long, value_delimiter = ',', required_unless_present = "entropy")]
    seeds: Vec<u64>,
    /// Draw party seeds from the operating system instead of `--seeds`.
    #[arg(long, conflicts_with = "seeds")]
    entropy: bool,
    /// Party count for `multi`.
    #[arg(long, default_value_t = 2)]
    parties: usize,
    /// Transcript path; `-` writes it to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the eavesdropper's view here.
    #[arg(long)]
    view_out: Option<PathBuf>,
    #[arg(long)]
    disclose_keys: bool,
    #[arg(long)]
    disclose_seeds: bool,
    /// Seed for sampled public elements.
    #[arg(long, default_value_t = 0)]
    setup_seed: u64,
    /// Commuting families for `eckap`.
    #[arg(long, value_enum)]
    families: Option<Families>,
    /// Public matrix dimension for polynomial families.
    #[arg(long)]
    dim: Option<usize>,
    /// Polynomial degree for polynomial families.
    #[arg(long)]
    degree: Option<usize>,
    /// Deliver in a seeded random order.
    #[arg(long)]
    shuffle: Option<u64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    transcript: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct AttackArgs {
    transcript: PathBuf,
    /// Largest number of candidate secrets to try (at most 2^24).
    #[arg(long)]
    bound: Option<u64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct LawsArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Sampled associativity triples; other laws use a tenth as many checks.
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest matrix dimension for the matrix laws.
    #[arg(long, default_value_t = 4)]
    max_dim: usize,
    #[arg(long)]
    json: bool,
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidParams(_) | Error::Decode(_) | Error::UnknownObject(_) => exit::INPUT,
            Error::ParamsTooLarge(_) => exit::TOO_LARGE,
            Error::NotFound(_) => exit::FAILURE,
            _ => exit::PROTOCOL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_error(path: &Path, what: impl std::fmt::Display) -> Failure {
    Failure {
        code: exit::INPUT,
        message: format!("{}: {what}", path.display()),
    }
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| input_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| input_error(path, e))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure {
        code: exit::FAILURE,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn read_transcript(path: &Path) -> Result<Transcript, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| input_error(path, e))?;
    Transcript::from_json_str(&text).map_err(|e| input_error(path, e))
}

fn instance_spec(args: &InstanceArgs) -> Result<InstanceSpec, Failure> {
    let params = match &args.params {
        Some(path) => read_json(path)?,
        None => default_params(&args.inst).ok_or_else(|| Failure {
            code: exit::INPUT,
            message: format!("unknown instantiation `{}`", args.inst),
        })?,
    };
    Ok(InstanceSpec {
        name: args.inst.clone(),
        params,
    })
}

fn eckap_options(args: &RunArgs, spec: &InstanceSpec) -> Result<Option<EckapOptions>, Failure> {
    if args.families.is_none() && args.dim.is_none() && args.degree.is_none() {
        return Ok(None);
    }
    let default = Instance::build(spec, args.protocol.into(), args.parties)?.default_eckap();
    let mut opts = match args.families {
        Some(Families::Reduction) => EckapOptions::reduction(),
        Some(Families::Polynomial) => EckapOptions::polynomial(2, 2, 1),
        None => default,
    };
    if opts.families == FamilyMode::Polynomial {
        if let Some(d) = args.dim {
            opts.rows = d;
            opts.cols = d;
        }
        if let Some(d) = args.degree {
            opts.degree = d;
        }
    }
    Ok(Some(opts))
}

fn cmd_run(args: RunArgs) -> Result<u8, Failure> {
    let spec = instance_spec(&args.instance)?;
    let protocol: ProtocolKind = args.protocol.into();
    let parties = match protocol {
        ProtocolKind::Multi => args.parties,
        _ => 2,
    };
    let seeds = if args.entropy {
        let mut os = rand::rngs::OsRng;
        (0..parties).map(|_| os.next_u64()).collect()
    } else {
        args.seeds.clone()
    };
    let mut config = SessionConfig::new(protocol, spec.clone(), seeds)
        .with_setup_seed(args.setup_seed)
        .disclosing(args.disclose_keys, args.disclose_seeds);
    config.parties = parties;
    config.eckap = eckap_options(&args, &spec)?;

    let policy = match args.shuffle {
        Some(seed) => DeliveryPolicy::Shuffle { seed },
        None => DeliveryPolicy::InOrder,
    };
    let run = netsim::run_session(&config, &mut Broker::new(policy))?;
    let to_stdout = args.out.as_deref() == Some(Path::new("-"));
    match &args.out {
        Some(_) if to_stdout => print!("{}", run.transcript.to_json_string()),
        Some(path) => write_file(path, &run.transcript.to_json_string())?,
        None => {}
    }
    if let Some(path) = &args.view_out {
        write_file(path, &run.view.to_transcript().to_json_string())?;
    }
    for d in &run.diagnostics {
        eprintln!("warning: {d:?}");
    }

    let report = if args.json {
        serde_json::to_string_pretty(&json!({
            "session": run.transcript.header.session,
            "model": run.transcript.header.model,
            "messages": run.transcript.messages.len(),
            "agreement": run.outcome.agreement,
            "keys": args.disclose_keys.then_some(&run.outcome.keys),
        }))
        .expect("report serializes")
    } else {
        let mut lines = vec![
            format!("session {}", run.transcript.header.session),
            format!("model {}", run.transcript.header.model),
            format!("messages {}", run.transcript.messages.len()),
            format!("agreement {}", run.outcome.agreement),
        ];
        if args.disclose_keys {
            for (who, key) in &run.outcome.keys {
                lines.push(format!("key {who} {key}"));
            }
        }
        lines.join("\n")
    };
    if to_stdout {
        eprintln!("{report}");
    } else {
        println!("{report}");
    }
    Ok(if run.outcome.agreement { exit::OK } else { exit::FAILURE })
}

fn cmd_verify(args: VerifyArgs) -> Result<u8, Failure> {
    let t = read_transcript(&args.transcript)?;
    let h = &t.header;
    let instance = Instance::build(&h.instance, h.protocol, h.parties.len())?;
    let report: VerifyReport = with_model!(&instance, m => verify_transcript(m, &t));
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "consistent": report.consistent(),
                "report": report,
            }))
            .expect("report serializes")
        );
    } else {
        for p in &report.problems {
            println!("problem: {p}");
        }
        let messages = if report.messages_valid { "messages valid" } else { "messages invalid" };
        match report.agreement {
            Some(true) => println!("agreement verified, {messages}"),
            Some(false) => println!("agreement FAILED, {messages}"),
            None => println!("agreement unverifiable, {messages}"),
        }
        if report.replayed {
            println!("replayed from disclosed seeds");
        }
        println!("{}", if report.consistent() { "consistent" } else { "inconsistent" });
    }
    Ok(if report.consistent() { exit::OK } else { exit::FAILURE })
}

fn cmd_attack(args: AttackArgs) -> Result<u8, Failure> {
    let t = read_transcript(&args.transcript)?;
    let view = EavesdropperView::from_transcript(&t);
    let h = &t.header;
    let started = Instant::now();
    let outcome = if h.instance.name == "dh" {
        let params = serde_json::from_value(h.instance.params.clone())
            .map_err(|e| input_error(&args.transcript, e))?;
        netsim::brute_force_dh(&view, &params, args.bound)?
    } else {
        let instance = Instance::build(&h.instance, h.protocol, h.parties.len())?;
        with_model!(&instance, m => netsim::brute_force_generic(&view, m, args.bound))?
    };
    let elapsed = started.elapsed();
    let disclosed = t
        .outcome
        .as_ref()
        .and_then(|o| o.keys.as_ref())
        .and_then(|k| k.values().next().cloned());
    let matches = match (&outcome, &disclosed) {
        (AttackOutcome::Recovered { key, .. }, Some(d)) => Some(key == d),
        _ => None,
    };
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "outcome": outcome,
                "seconds": elapsed.as_secs_f64(),
                "matches_disclosed_key": matches,
            }))
            .expect("report serializes")
        );
    } else {
        match &outcome {
            AttackOutcome::Recovered { index, key } => {
                println!("recovered exponent {index}");
                println!("recovered key {key}");
            }
            AttackOutcome::Exhausted { searched } => println!("exhausted after {searched} candidates"),
        }
        println!("wall time {:.6} s", elapsed.as_secs_f64());
        match matches {
            Some(true) => println!("matches disclosed key"),
            Some(false) => println!("DIFFERS from disclosed key"),
            None => {}
        }
    }
    Ok(match (outcome, matches) {
        (AttackOutcome::Exhausted { .. }, _) => exit::EXHAUSTED,
        (_, Some(false)) => exit::FAILURE,
        _ => exit::OK,
    })
}

fn cmd_laws(args: LawsArgs) -> Result<u8, Failure> {
    let spec = instance_spec(&args.instance)?;
    let instance = Instance::build(&spec, ProtocolKind::Ckap, 2)?;
    let cfg = LawConfig {
        triples: args.trials,
        checks: (args.trials / 10).max(1),
        max_dim: args.max_dim,
        seed: args.seed,
        ..LawConfig::default()
    };
    let report = instance.check_laws(&cfg)?;
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        );
    } else {
        println!("model {}", report.model);
        for o in &report.outcomes {
            let how = if o.exhaustive { "exhaustive" } else { "sampled" };
            let status = if o.passed() { "ok  " } else { "FAIL" };
            println!("{status} {} ({} checks, {how})", o.law, o.checked);
        }
        if let Some(o) = report.first_violation() {
            let w = o.violation.as_ref().expect("violation present");
            println!("witness for {}:", o.law);
            for (i, x) in w.inputs.iter().enumerate() {
                println!("  input {i}: {x}");
            }
            println!("  lhs: {}", w.lhs);
            println!("  rhs: {}", w.rhs);
        }
    }
    Ok(if report.is_clean() { exit::OK } else { exit::FAILURE })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Attack(a) => cmd_attack(a),
        Command::Laws(a) => cmd_laws(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
