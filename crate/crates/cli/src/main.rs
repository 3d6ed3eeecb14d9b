use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use pcl_core::analysis::{self, EnvelopeSample};
use pcl_core::audit::{self, AuditReport, SampleConfig};
use pcl_core::combinatorics::RngStream;
use pcl_core::model::{all_demand_vectors, enumerate_demand_matrices, DemandMatrix, SystemParams, DEFAULT_DEMAND_CAP};
use pcl_core::schemes::{Scheme, SchemeInstance, SchemeKind, SchemeSpec};
use pcl_core::simulate::simulate_demand;
use pcl_core::{Error, Rational};

mod exit {
    pub const DECODE_FAILURE: u8 = 1;
    pub const INPUT: u8 = 2;
    pub const GUARD_RAIL: u8 = 3;
    pub const AUDIT_FAIL: u8 = 4;
}

#[derive(Parser)]
#[command(name = "pcl", version, about = "Demand-private coded caching: simulate, audit, and tabulate tradeoffs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Place, deliver and decode, checking every reconstruction bit for bit.
    Simulate(SimulateArgs),
    /// Check that one user's view does not depend on the other users' demands.
    Audit(AuditArgs),
    /// Emit closed-form memory-load curves as CSV.
    Tradeoff(TradeoffArgs),
}

#[derive(Args, Clone)]
struct SystemArgs {
    /// Number of users.
    #[arg(short = 'K', long = "users")]
    users: usize,
    /// Number of files.
    #[arg(short = 'N', long = "files")]
    files: usize,
    /// Files requested by each user.
    #[arg(short = 'L', long = "demands-per-user", default_value_t = 1)]
    demands_per_user: usize,
}

#[derive(Args, Clone)]
struct SchemeArgs {
    #[arg(long, value_parser = parse_kind)]
    scheme: SchemeKind,
    #[command(flatten)]
    system: SystemArgs,
    /// Cache parameter of the chosen scheme.
    #[arg(short = 't')]
    t: Option<usize>,
    /// Cache parameter of the classical scheme.
    #[arg(long = "t-prime")]
    t_prime: Option<usize>,
    /// Memory per user in files, as an integer, decimal or fraction.
    #[arg(short = 'M', long = "memory", value_parser = parse_memory)]
    memory: Option<Rational>,
    /// Assign classical-scheme labels to MDS-coded pieces by a secret permutation.
    #[arg(long)]
    precoding: bool,
    /// Virtual-user scheme: keep effective users in a fixed order inside messages.
    #[arg(long)]
    no_member_shuffle: bool,
    /// Virtual-user scheme: keep messages in lexicographic order.
    #[arg(long)]
    no_message_shuffle: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// `all`, `random`, inline JSON, or a path to a JSON file.
    #[arg(long, default_value = "random")]
    demands: String,
    /// Random demand matrices drawn with `--demands random`.
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    /// Symbols per coded piece.
    #[arg(long, default_value_t = 4)]
    piece_len: usize,
    /// Write a JSON report to this path.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    #[value(alias = "sampled")]
    Sample,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[arg(long, value_enum, default_value = "exact")]
    mode: Mode,
    /// Audited user.
    #[arg(long, default_value_t = 1)]
    user: usize,
    /// Demand vector of the audited user as JSON; every vector when omitted.
    #[arg(long)]
    demand: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Pass threshold for sampled audits.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest number of elementary events an exact audit may enumerate.
    #[arg(long, default_value_t = audit::DEFAULT_EVENT_CAP)]
    event_cap: u128,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct TradeoffArgs {
    /// Comma-separated scheme names.
    #[arg(long, value_delimiter = ',', value_parser = parse_kind, required = true)]
    schemes: Vec<SchemeKind>,
    #[command(flatten)]
    system: SystemArgs,
    /// Evaluate each envelope at this memory instead of emitting CSV.
    #[arg(long = "at-M", value_parser = parse_memory)]
    at_memory: Option<Rational>,
    /// Memory lattice size.
    #[arg(long, default_value_t = 50)]
    points: usize,
    /// Leave out the `converse` rows.
    #[arg(long)]
    no_converse: bool,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_kind(s: &str) -> Result<SchemeKind, String> {
    s.parse::<SchemeKind>().map_err(|e| e.to_string())
}

/// Accepts `3`, `24/7` or `4.75`, all kept exact.
fn parse_memory(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    let bad = || format!("cannot read {s:?} as a memory size");
    if let Some((n, d)) = s.split_once('/') {
        let n: i128 = n.trim().parse().map_err(|_| bad())?;
        let d: i128 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 30 {
            return Err(bad());
        }
        let scale = 10i128.pow(frac.len() as u32);
        let whole: i128 = if whole.is_empty() { 0 } else { whole.parse().map_err(|_| bad())? };
        let frac: i128 = frac.parse().map_err(|_| bad())?;
        return Ok(Rational::new(whole * scale + frac, scale));
    }
    s.parse::<i128>().map(Rational::from_integer).map_err(|_| bad())
}

enum Failure {
    Core(Error),
    Input(String),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    fn report(&self) -> u8 {
        match self {
            Failure::Core(e) => {
                eprintln!("error: {e}");
                if e.is_guard_rail() {
                    exit::GUARD_RAIL
                } else if matches!(e, Error::DecodeFailure { .. } | Error::Unrecoverable { .. } | Error::Singular) {
                    exit::DECODE_FAILURE
                } else {
                    exit::INPUT
                }
            }
            Failure::Input(msg) => {
                eprintln!("error: {msg}");
                exit::INPUT
            }
            Failure::Io(e) => {
                eprintln!("error: {e}");
                exit::INPUT
            }
        }
    }
}

type Outcome = Result<u8, Failure>;

impl SystemArgs {
    fn params(&self) -> Result<SystemParams, Failure> {
        Ok(SystemParams::new(self.users, self.files, self.demands_per_user)?)
    }
}

impl SchemeArgs {
    /// Resolves the operating point from `-t`, `--t-prime` or `-M`.
    fn spec(&self, params: &SystemParams) -> Result<SchemeSpec, Failure> {
        let kind = self.scheme;
        let t = self.t.or(if kind == SchemeKind::Man { self.t_prime } else { None });
        let spec_at = |t: usize| match kind {
            SchemeKind::Man => SchemeSpec::Man {
                t_prime: t,
                precoding: self.precoding,
            },
            SchemeKind::VirtualUser => SchemeSpec::VirtualUser {
                t,
                shuffle_members: !self.no_member_shuffle,
                shuffle_messages: !self.no_message_shuffle,
            },
            _ => SchemeSpec::Mds { t },
        };
        match kind {
            SchemeKind::Baseline => {
                let memory = self
                    .memory
                    .ok_or_else(|| Failure::Input("the baseline scheme needs -M".into()))?;
                Ok(SchemeSpec::Baseline { memory })
            }
            SchemeKind::MdsCorner => Ok(SchemeSpec::MdsCorner),
            _ => {
                if let Some(t) = t {
                    return Ok(spec_at(t));
                }
                let memory = self
                    .memory
                    .ok_or_else(|| Failure::Input(format!("{kind} needs -t or -M")))?;
                let max_t = match kind {
                    SchemeKind::VirtualUser => analysis::effective_users(params) as usize,
                    _ => params.users,
                };
                (0..=max_t)
                    .find(|&t| {
                        let m = match kind {
                            SchemeKind::Man => analysis::man_corner(params, t).0,
                            SchemeKind::VirtualUser => analysis::virtual_user_corner(params, t as u128).0,
                            _ => analysis::mds_corner(params, t).0,
                        };
                        m == memory
                    })
                    .map(spec_at)
                    .ok_or_else(|| Failure::Input(format!("no {kind} corner has memory {memory}")))
            }
        }
    }

    fn build(&self) -> Result<(SystemParams, SchemeSpec, Arc<dyn Scheme>), Failure> {
        let params = self.system.params()?;
        let spec = self.spec(&params)?;
        let scheme = spec.build(&params)?;
        Ok((params, spec, scheme))
    }
}

fn describe(spec: &SchemeSpec) -> String {
    match spec {
        SchemeSpec::Baseline { memory } => format!("baseline M={memory}"),
        SchemeSpec::Man { t_prime, precoding } => format!("man t'={t_prime} precoding={precoding}"),
        SchemeSpec::VirtualUser {
            t,
            shuffle_members,
            shuffle_messages,
        } => format!("virtual-user t={t} member-shuffle={shuffle_members} message-shuffle={shuffle_messages}"),
        SchemeSpec::Mds { t } => format!("mds t={t}"),
        SchemeSpec::MdsCorner => "mds-corner".into(),
    }
}

fn write_json<T: Serialize>(path: &PathBuf, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Input(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn load_demands(params: &SystemParams, source: &str, trials: usize, seed: u64) -> Result<Vec<DemandMatrix>, Failure> {
    match source {
        "all" => Ok(enumerate_demand_matrices(params, DEFAULT_DEMAND_CAP)?),
        "random" => {
            let mut rng = RngStream::new(seed, 2).rng();
            Ok((0..trials.max(1)).map(|_| DemandMatrix::random(params, &mut rng)).collect())
        }
        text if text.trim_start().starts_with(['[', '{']) => Ok(vec![DemandMatrix::from_json(params, text)?]),
        path => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{path}: {e}")))?;
            Ok(vec![DemandMatrix::from_json(params, &text)?])
        }
    }
}

#[derive(Serialize)]
struct SimulateReport {
    scheme: String,
    users: usize,
    files: usize,
    demands_per_user: usize,
    seed: u64,
    memory: String,
    load: String,
    raw_load: String,
    subpacketization: usize,
    field_bits: u32,
    metadata_symbols: usize,
    payload_symbols: usize,
    matrices: usize,
    decoded_per_user: Vec<usize>,
    failures: Vec<String>,
}

fn simulate(args: &SimulateArgs) -> Outcome {
    let (params, spec, scheme) = args.scheme.build()?;
    let instance = SchemeInstance::new(scheme, args.piece_len)?;
    let demands = load_demands(&params, &args.demands, args.trials, args.seed)?;
    let library = instance.library(args.seed);
    let stream = RngStream::new(args.seed, 1);
    let placement = instance.place_random(&library, &mut stream.rng())?;
    let header = instance.header();

    let mut decoded = vec![0usize; params.users];
    let mut matrices_ok = 0;
    let mut failures = Vec::new();
    let mut load = None;
    let mut raw_rows = 0;
    let mut metadata_symbols = 0;
    let mut payload_symbols = 0;
    for (j, d) in demands.iter().enumerate() {
        let randomness = instance.sample_randomness(&mut stream.child(j as u64).rng());
        let sim = simulate_demand(&instance, &library, &placement, d, &randomness)?;
        if load.is_some_and(|l| l != sim.load) {
            failures.push(format!("D={d}: load {} differs from earlier matrices", sim.load));
        }
        load = Some(sim.load);
        raw_rows = sim.packet.payload_rows();
        metadata_symbols = metadata_symbols.max(sim.packet.metadata_symbols());
        payload_symbols = payload_symbols.max(sim.packet.payload_symbols());
        matrices_ok += usize::from(sim.all_ok());
        for outcome in &sim.users {
            if outcome.decoded && outcome.bit_exact {
                decoded[outcome.user - 1] += 1;
            } else {
                failures.push(format!("D={d}: user {} failed", outcome.user));
            }
        }
    }
    let load = load.unwrap_or_else(Rational::zero);
    let raw_load = format!("{raw_rows}/{}", header.code_k);

    let mut out = io::stdout().lock();
    writeln!(out, "scheme {} {params}", describe(&spec))?;
    writeln!(out, "memory {}", instance.memory())?;
    writeln!(out, "load {load} (raw {raw_load})")?;
    writeln!(out, "subpacketization {}", instance.subpacketization())?;
    writeln!(out, "field GF(2^{})", header.field_bits)?;
    writeln!(
        out,
        "metadata {metadata_symbols} symbols, payload {payload_symbols} symbols{}",
        if metadata_symbols > payload_symbols { " (metadata exceeds payload)" } else { "" }
    )?;
    for (k, ok) in decoded.iter().enumerate() {
        writeln!(out, "user {}: {ok}/{} decoded", k + 1, demands.len())?;
    }
    writeln!(out, "decodes {matrices_ok}/{} ok", demands.len())?;
    for f in &failures {
        writeln!(out, "failure {f}")?;
    }

    if let Some(path) = &args.json {
        write_json(
            path,
            &SimulateReport {
                scheme: describe(&spec),
                users: params.users,
                files: params.files,
                demands_per_user: params.demands_per_user,
                seed: args.seed,
                memory: instance.memory().to_string(),
                load: load.to_string(),
                raw_load,
                subpacketization: instance.subpacketization(),
                field_bits: header.field_bits,
                metadata_symbols,
                payload_symbols,
                matrices: demands.len(),
                decoded_per_user: decoded,
                failures: failures.clone(),
            },
        )?;
    }
    Ok(if failures.is_empty() { 0 } else { exit::DECODE_FAILURE })
}

fn run_audit(args: &AuditArgs) -> Outcome {
    let (params, spec, scheme) = args.scheme.build()?;
    let vectors = match &args.demand {
        Some(text) => vec![serde_json::from_str::<Vec<usize>>(text)
            .map_err(|e| Failure::Input(format!("demand {text:?}: {e}")))?],
        None => all_demand_vectors(&params),
    };
    let mut reports: Vec<AuditReport> = Vec::new();
    for d in &vectors {
        let report = match args.mode {
            Mode::Exact => audit::audit_exact(scheme.as_ref(), args.user, d, args.event_cap)?,
            Mode::Sample => {
                let mut config = SampleConfig::new(args.samples, args.seed);
                config.epsilon = args.epsilon;
                audit::audit_sampled(scheme.as_ref(), args.user, d, &config)?
            }
        };
        reports.push(report);
    }

    let mut out = io::stdout().lock();
    let mode = match args.mode {
        Mode::Exact => "exact",
        Mode::Sample => "sampled",
    };
    writeln!(out, "audit {mode} {} {params} user={}", describe(&spec), args.user)?;
    for r in &reports {
        let disjoint = r.pairs.iter().filter(|p| p.disjoint_support).count();
        writeln!(
            out,
            "d_k={:?} max_tv={} support={} events_per_matrix={} disjoint_pairs={}/{} threshold={} {}",
            r.d_k,
            r.max_tv_exact,
            r.support,
            r.events_per_matrix,
            disjoint,
            r.pairs.len(),
            r.threshold,
            if r.pass { "pass" } else { "fail" }
        )?;
    }
    let worst = reports
        .iter()
        .max_by(|a, b| a.max_tv_rational().cmp(&b.max_tv_rational()))
        .expect("at least one demand vector");
    let pass = reports.iter().all(|r| r.pass);
    writeln!(out, "max_tv {}", worst.max_tv_exact)?;
    writeln!(out, "result {}", if pass { "pass" } else { "fail" })?;
    if let Some(path) = &args.json {
        write_json(path, &reports)?;
    }
    Ok(if pass { 0 } else { exit::AUDIT_FAIL })
}

fn tradeoff(args: &TradeoffArgs) -> Outcome {
    let params = args.system.params()?;
    let curves: Vec<_> = args.schemes.iter().map(|&k| analysis::corner_points(k, &params)).collect();
    let mut out: Box<dyn Write> = match &args.output {
        Some(path) => Box::new(io::BufWriter::new(fs::File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    };

    if let Some(m) = args.at_memory {
        for c in &curves {
            let value = c.eval(m)?;
            writeln!(out, "{} {value} ({:.6})", c.scheme, value.to_f64().unwrap_or(f64::NAN))?;
        }
        if !args.no_converse {
            let value = analysis::converse_cut(&params, m)?;
            writeln!(out, "converse {value} ({:.6})", value.to_f64().unwrap_or(f64::NAN))?;
        }
        out.flush()?;
        return Ok(0);
    }

    if args.points < 2 {
        return Err(Failure::Input("--points must be at least 2".into()));
    }
    let lattice = analysis::memory_lattice(params.files, args.points);
    let mut rows: Vec<EnvelopeSample> = Vec::new();
    for c in &curves {
        rows.extend(analysis::sample_curve(c, &lattice)?);
    }
    if !args.no_converse {
        rows.extend(analysis::sample_converse(&params, &lattice)?);
    }
    let mut writer = csv::Writer::from_writer(out);
    writer
        .write_record(EnvelopeSample::CSV_HEADER)
        .map_err(|e| Failure::Input(e.to_string()))?;
    for row in &rows {
        writer
            .write_record(row.csv_record())
            .map_err(|e| Failure::Input(e.to_string()))?;
    }
    writer.flush()?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Audit(args) => run_audit(args),
        Command::Tradeoff(args) => tradeoff(args),
    };
    ExitCode::from(outcome.unwrap_or_else(|f| f.report()))
}
