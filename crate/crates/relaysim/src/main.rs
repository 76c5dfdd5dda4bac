//! Command-line front end for the `relaycode` library: compute rates and
//! code dimensions, verify recovery under adversarial erasures, measure
//! loss ratios under random erasures, and replay small scenarios as
//! per-node tables.
//!
//! # Subcommands
//!
//! * `capacity` — print per-link capacities, the chain rate upper bound,
//!   the header-overhead rate, concrete code dimensions, and baseline
//!   rates for a network.
//! * `verify` — replay every erasure pattern within the per-link budgets
//!   (or sampled sliding-window-admissible patterns with `--sliding`)
//!   and check every frame is recovered by its deadline. Exit code 0 on
//!   PASS, 1 on FAIL (with a counterexample trace), 2 on usage errors.
//! * `simulate` — Monte Carlo loss measurement over independent random
//!   erasures, one CSV row per (scheme, erasure rate).
//! * `trace` — replay one explicit erasure scenario and print each
//!   node's emissions as a table of headers and symbol placements.
//!
//! Every subcommand accepts its settings as flags or as a plain
//! `key=value` file via `--config` (a flag wins over the file), and all
//! randomness flows from a defaulted `--seed`, so published results are
//! reproducible.

use std::collections::HashMap;
use std::fmt::Display;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use relaycode::analysis::{
    achievable_rate_with_header, capacity_p2p, capacity_upper, code_dimensions, if_rate, mdf_rate,
    NetworkConfig,
};
use relaycode::channel::ErasurePattern;
use relaycode::field::FieldParams;
use relaycode::sim::{
    run_monte_carlo, run_trace, verify_exhaustive, verify_sliding, Scheme, SchemeConfig,
    TraceOutput, VerifyReport, CSV_HEADER,
};
use relaycode::stream::Packet;
use relaycode::Error;

// ============================================================
// Command-line surface
// ============================================================

#[derive(Parser)]
#[command(
    name = "relaysim",
    version,
    about = "Streaming erasure codes over multi-hop relay chains: rates, verification, and loss simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print capacities, code dimensions, and baseline rates for a network.
    Capacity(CapacityArgs),
    /// Check that every admissible erasure pattern leaves all frames
    /// recoverable by their deadline.
    Verify(VerifyArgs),
    /// Measure frame-loss ratios under random erasures; emits CSV.
    Simulate(SimulateArgs),
    /// Replay one erasure scenario and print per-node symbol tables.
    Trace(TraceArgs),
}

/// Settings shared by every subcommand: the network shape and the field.
#[derive(Args)]
struct NetArgs {
    /// Number of relays (defaults to one less than the budget count).
    #[arg(short = 'L', long)]
    relays: Option<usize>,

    /// End-to-end decoding delay, in packet slots.
    #[arg(short = 'T', long)]
    delay: Option<usize>,

    /// Per-link erasure budgets, comma-separated (one per link).
    #[arg(short = 'N', long, value_delimiter = ',', value_name = "N1,N2,...")]
    budgets: Option<Vec<usize>>,

    /// Symbol width: field is GF(2^bits).
    #[arg(long, value_name = "BITS")]
    field_bits: Option<u32>,

    /// Plain key=value file supplying any setting; explicit flags win.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct CapacityArgs {
    #[command(flatten)]
    net: NetArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    net: NetArgs,

    /// Scheme to verify: sdf, mdf, or if.
    #[arg(long)]
    scheme: Option<String>,

    /// Sample sliding-window-admissible patterns instead of enumerating
    /// every within-budget pattern.
    #[arg(long)]
    sliding: bool,

    /// Patterns to sample in --sliding mode.
    #[arg(long)]
    samples: Option<u64>,

    /// Sliding-window length in slots (default: delay + 1).
    #[arg(long)]
    window: Option<usize>,

    /// RNG seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    net: NetArgs,

    /// Schemes to run, comma-separated subset of sdf,mdf,if.
    #[arg(long, value_name = "S1,S2,...")]
    scheme: Option<String>,

    /// Per-link erasure rates to sweep, comma-separated.
    #[arg(long, value_delimiter = ',', value_name = "A1,A2,...")]
    alpha: Option<Vec<f64>>,

    /// Scored frames per (scheme, rate) point.
    #[arg(long)]
    frames: Option<u64>,

    /// How baseline codes are sized (the symbol-wise scheme is the same
    /// under both): rate-matched for loss comparisons at equal
    /// throughput, verify-grade for full-budget tolerance.
    #[arg(long, value_enum)]
    calibration: Option<Calibration>,

    /// Emit only the analytical loss bound (no simulation).
    #[arg(long)]
    bound_only: bool,

    /// Write CSV here instead of stdout.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,

    /// RNG seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    net: NetArgs,

    /// Scheme to trace: sdf, mdf, or if.
    #[arg(long)]
    scheme: Option<String>,

    /// Erase link LINK (1-based) at slot SLOT; SLOT may be absolute
    /// ("7") or anchor-relative ("i", "i+2", "i-1"). Repeatable.
    #[arg(long, value_name = "LINK:SLOT")]
    erase: Vec<String>,

    /// Value of the anchor slot `i` (default: delay + 2).
    #[arg(long)]
    anchor: Option<usize>,

    /// Slots to replay (default: anchor + 2 * (delay + 1)).
    #[arg(long)]
    horizon: Option<usize>,

    /// RNG seed for the frame contents.
    #[arg(long)]
    seed: Option<u64>,
}

/// How baseline codes are sized relative to the network budgets.
#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum Calibration {
    /// Weakest codes whose rate reaches the symbol-wise scheme's rate.
    RateMatched,
    /// Strongest codes: tolerate the full per-link budgets.
    VerifyGrade,
}

// ============================================================
// Failure plumbing
// ============================================================

/// How a subcommand ends, mapped onto the process exit code: usage and
/// configuration mistakes exit 2, a failed verification exits 1.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Check,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CliResult = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Capacity(args) => cmd_capacity(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Trace(args) => cmd_trace(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

// ============================================================
// Configuration files and flag resolution
// ============================================================

/// Settings loaded from a `key=value` file. Lines may be empty or `#`
/// comments; keys are case-insensitive and may use either the flag name
/// or its single-letter alias.
struct FileConfig(HashMap<String, String>);

impl FileConfig {
    fn load(path: Option<&PathBuf>) -> Result<Self, Failure> {
        let mut map = HashMap::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            for (number, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    usage(format!(
                        "{}:{}: expected key=value, got {line:?}",
                        path.display(),
                        number + 1
                    ))
                })?;
                map.insert(key.trim().to_ascii_lowercase(), value.trim().to_string());
            }
        }
        Ok(FileConfig(map))
    }

    fn raw(&self, keys: &[&str]) -> Option<&str> {
        keys.iter().find_map(|k| self.0.get(*k)).map(String::as_str)
    }

    fn value<T: FromStr>(&self, keys: &[&str]) -> Result<Option<T>, Failure>
    where
        T::Err: Display,
    {
        match self.raw(keys) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| usage(format!("config key `{}`: {e}", keys[0]))),
        }
    }

    fn list<T: FromStr>(&self, keys: &[&str]) -> Result<Option<Vec<T>>, Failure>
    where
        T::Err: Display,
    {
        match self.raw(keys) {
            None => Ok(None),
            Some(raw) => raw
                .split(',')
                .map(|item| item.trim().parse())
                .collect::<Result<Vec<T>, _>>()
                .map(Some)
                .map_err(|e| usage(format!("config key `{}`: {e}", keys[0]))),
        }
    }

    fn flag(&self, keys: &[&str]) -> Result<Option<bool>, Failure> {
        match self.raw(keys) {
            None => Ok(None),
            Some("1") | Some("true") | Some("yes") => Ok(Some(true)),
            Some("0") | Some("false") | Some("no") => Ok(Some(false)),
            Some(other) => Err(usage(format!(
                "config key `{}`: expected a boolean, got {other:?}",
                keys[0]
            ))),
        }
    }
}

/// The resolved network settings every subcommand starts from.
struct Resolved {
    net: NetworkConfig,
    field: FieldParams,
    file: FileConfig,
}

impl NetArgs {
    fn resolve(&self) -> Result<Resolved, Failure> {
        let file = FileConfig::load(self.config.as_ref())?;
        let budgets = match &self.budgets {
            Some(b) => b.clone(),
            None => file
                .list(&["n", "budgets"])?
                .ok_or_else(|| usage("missing link budgets: pass -N or set n= in --config"))?,
        };
        let delay = self
            .delay
            .map(Ok)
            .or_else(|| file.value(&["t", "delay"]).transpose())
            .transpose()?
            .ok_or_else(|| usage("missing delay: pass -T or set t= in --config"))?;
        if let Some(relays) = self
            .relays
            .map(Ok)
            .or_else(|| file.value(&["l", "relays"]).transpose())
            .transpose()?
        {
            if budgets.len() != relays + 1 {
                return Err(usage(format!(
                    "{} relays need {} link budgets, got {}",
                    relays,
                    relays + 1,
                    budgets.len()
                )));
            }
        }
        let bits = self
            .field_bits
            .map(Ok)
            .or_else(|| file.value(&["field_bits"]).transpose())
            .transpose()?
            .unwrap_or(8);
        let field = FieldParams::with_exponent(bits)?;
        let net = NetworkConfig::new(delay, budgets)?;
        Ok(Resolved { net, field, file })
    }
}

/// Flag value, else config-file value, else default.
fn setting<T: FromStr + Clone>(
    flag: Option<T>,
    file: &FileConfig,
    keys: &[&str],
    default: T,
) -> Result<T, Failure>
where
    T::Err: Display,
{
    Ok(flag
        .map(Ok)
        .or_else(|| file.value(keys).transpose())
        .transpose()?
        .unwrap_or(default))
}

fn parse_schemes(spec: &str) -> Result<Vec<Scheme>, Failure> {
    let schemes: Vec<Scheme> = spec
        .split(',')
        .map(|s| s.trim().to_ascii_lowercase().parse())
        .collect::<Result<_, Error>>()?;
    if schemes.is_empty() {
        return Err(usage("empty scheme list"));
    }
    Ok(schemes)
}

/// Parses one `--erase LINK:SLOT` occurrence into 0-based (link, slot).
/// `LINK` is 1-based; `SLOT` is absolute or anchor-relative (`i`,
/// `i+2`, `i-1`).
fn parse_erase(spec: &str, anchor: usize) -> Result<(usize, usize), Failure> {
    let bad = || {
        usage(format!(
            "bad --erase {spec:?}: expected LINK:SLOT, e.g. 1:i or 2:i+2"
        ))
    };
    let (link, slot) = spec.split_once(':').ok_or_else(bad)?;
    let link: usize = link.trim().parse().map_err(|_| bad())?;
    if link == 0 {
        return Err(usage(format!(
            "bad --erase {spec:?}: links are numbered from 1"
        )));
    }
    let slot = slot.trim();
    let slot = if let Some(rest) = slot.strip_prefix('i') {
        let anchor = anchor as i64;
        let slot = if rest.is_empty() {
            anchor
        } else if let Some(offset) = rest.strip_prefix('+') {
            anchor + offset.parse::<i64>().map_err(|_| bad())?
        } else if let Some(offset) = rest.strip_prefix('-') {
            anchor - offset.parse::<i64>().map_err(|_| bad())?
        } else {
            return Err(bad());
        };
        usize::try_from(slot).map_err(|_| {
            usage(format!(
                "bad --erase {spec:?}: slot {slot} is before slot 0"
            ))
        })?
    } else {
        slot.parse().map_err(|_| bad())?
    };
    Ok((link - 1, slot))
}

// ============================================================
// capacity
// ============================================================

fn cmd_capacity(args: &CapacityArgs) -> CliResult {
    let Resolved { net, field, .. } = args.net.resolve()?;
    let delay = net.delay();
    let budgets = net.budgets();

    println!(
        "network: relays={}, delay T={delay}, link budgets {budgets:?}",
        net.relays()
    );
    let per_link = budgets
        .iter()
        .enumerate()
        .map(|(j, &n)| format!("link {}: {}", j + 1, capacity_p2p(delay, n)))
        .collect::<Vec<_>>()
        .join(", ");
    println!("link capacity C(T, N_j): {per_link}");
    println!("chain rate upper bound: {}", capacity_upper(delay, budgets));

    match code_dimensions(delay, budgets) {
        Ok(dims) => {
            let blocks = dims
                .block_lengths
                .iter()
                .zip(budgets)
                .map(|(&n, &b)| format!("({}, {}, {})", n, dims.k, dims.k + b - 1))
                .collect::<Vec<_>>()
                .join(", ");
            println!(
                "chain code: k={}, widest block {}, per-link (n, k, delay): {blocks}",
                dims.k, dims.n_max
            );
            let with_header = achievable_rate_with_header(delay, budgets, field.bits())?;
            println!(
                "rate with {}-bit headers over GF(2^{}): {with_header}",
                relaycode::analysis::ceil_log2(dims.n_max),
                field.bits()
            );
            let (mdf, split) = mdf_rate(delay, budgets)?;
            println!("mdf rate: {mdf}, per-hop delay split {split:?}");
        }
        Err(Error::RateZero { .. }) => {
            println!("chain code: none (zero rate at this delay)");
            println!("mdf rate: 0");
        }
        Err(e) => return Err(e.into()),
    }
    println!(
        "if rate: {}, end-to-end budget {}",
        if_rate(delay, budgets),
        net.sum_budgets()
    );
    Ok(())
}

// ============================================================
// verify
// ============================================================

fn cmd_verify(args: &VerifyArgs) -> CliResult {
    let Resolved { net, field, file } = args.net.resolve()?;
    let scheme_spec = setting(args.scheme.clone(), &file, &["scheme"], "sdf".to_string())?;
    let schemes = parse_schemes(&scheme_spec)?;
    let sliding = args.sliding || file.flag(&["sliding"])?.unwrap_or(false);
    let samples = setting(args.samples, &file, &["samples"], 10_000)?;
    let window = setting(args.window, &file, &["window"], net.delay() + 1)?;
    let seed = setting(args.seed, &file, &["seed"], 17)?;

    let mut failed = false;
    for scheme in schemes {
        let cfg = SchemeConfig::verify_grade(scheme, net.clone(), field.clone())?;
        let report = if sliding {
            verify_sliding(&cfg, window, samples, seed)
        } else {
            verify_exhaustive(&cfg, seed)
        };
        let report = report.map_err(|e| match e {
            Error::GuardExceeded { .. } => usage(format!(
                "{e}; the pattern space grows with delay and budgets — \
                 verify a smaller network or use --sliding sampling"
            )),
            other => other.into(),
        })?;
        print_verify_report(&cfg, &report, sliding, window, seed);
        if !report.passed() {
            failed = true;
        }
    }
    if failed {
        return Err(Failure::Check);
    }
    Ok(())
}

fn print_verify_report(
    cfg: &SchemeConfig,
    report: &VerifyReport,
    sliding: bool,
    window: usize,
    seed: u64,
) {
    let mode = if sliding {
        format!("sliding window {window}")
    } else {
        "exhaustive".to_string()
    };
    println!(
        "verify scheme={} relays={} T={} N={:?} mode={mode}",
        report.scheme,
        cfg.net().relays(),
        cfg.net().delay(),
        cfg.net().budgets()
    );
    println!(
        "patterns: {}, frames per pattern: {}{}",
        report.combinations,
        report.scored_per_run,
        if sliding {
            format!(", sampler redraws: {}", report.rejections)
        } else {
            String::new()
        }
    );
    if report.passed() {
        println!("PASS (0 failures)");
    } else {
        println!(
            "FAIL ({} of {} frames lost)",
            report.failures,
            report.combinations * u128::from(report.scored_per_run)
        );
        for example in &report.examples {
            println!("counterexample: {example}");
        }
        if let Some(pattern) = report.counterexamples.first() {
            match run_trace(cfg, pattern, pattern.horizon(), seed) {
                Ok(trace) => print!("{}", render_trace(cfg, pattern, &trace)),
                Err(e) => println!("(cannot replay counterexample: {e})"),
            }
        }
    }
}

// ============================================================
// simulate
// ============================================================

fn cmd_simulate(args: &SimulateArgs) -> CliResult {
    let Resolved { net, field, file } = args.net.resolve()?;
    let scheme_spec = setting(args.scheme.clone(), &file, &["scheme"], "sdf".to_string())?;
    let schemes = parse_schemes(&scheme_spec)?;
    let alphas = match &args.alpha {
        Some(a) => a.clone(),
        None => file.list(&["alpha", "alphas"])?.ok_or_else(|| {
            usage("missing erasure rates: pass --alpha or set alpha= in --config")
        })?,
    };
    let frames = setting(args.frames, &file, &["frames"], 100_000)?;
    let seed = setting(args.seed, &file, &["seed"], 17)?;
    let bound_only = args.bound_only || file.flag(&["bound_only"])?.unwrap_or(false);
    let calibration = match args.calibration {
        Some(c) => c,
        None => match file.raw(&["calibration"]) {
            None => Calibration::RateMatched,
            Some("rate-matched") => Calibration::RateMatched,
            Some("verify-grade") => Calibration::VerifyGrade,
            Some(other) => {
                return Err(usage(format!(
                    "config key `calibration`: expected rate-matched or verify-grade, got {other:?}"
                )))
            }
        },
    };
    let output = args
        .output
        .clone()
        .or_else(|| file.raw(&["output"]).map(PathBuf::from));

    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for &scheme in &schemes {
        let cfg = match calibration {
            Calibration::RateMatched => {
                SchemeConfig::rate_matched(scheme, net.clone(), field.clone())?
            }
            Calibration::VerifyGrade => {
                SchemeConfig::verify_grade(scheme, net.clone(), field.clone())?
            }
        };
        for &alpha in &alphas {
            if bound_only {
                csv.push_str(&bound_only_row(&cfg, alpha, seed)?);
            } else {
                let report = run_monte_carlo(&cfg, alpha, frames, seed)?;
                csv.push_str(&report.csv_row());
            }
            csv.push('\n');
        }
    }
    match output {
        Some(path) => fs::write(&path, csv)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{csv}"),
    }
    Ok(())
}

/// A CSV row carrying only the analytical bound: no frames were run, so
/// the measured columns stay empty.
fn bound_only_row(cfg: &SchemeConfig, alpha: f64, seed: u64) -> Result<String, Failure> {
    let params = cfg.sdf_params().ok_or_else(|| {
        usage(format!(
            "--bound-only: no analytical loss bound exists for scheme {}",
            cfg.scheme()
        ))
    })?;
    let bound = relaycode::analysis::loss_upper_bound(
        params.dims().k,
        cfg.net().budgets(),
        &vec![alpha; cfg.net().links()],
    )?;
    let budgets = cfg
        .net()
        .budgets()
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("|");
    Ok(format!(
        "{},{},{},{},{},0,0,,,{},{}",
        cfg.scheme(),
        cfg.net().relays(),
        cfg.net().delay(),
        budgets,
        alpha,
        bound,
        seed
    ))
}

// ============================================================
// trace
// ============================================================

fn cmd_trace(args: &TraceArgs) -> CliResult {
    let Resolved { net, field, file } = args.net.resolve()?;
    let scheme_spec = setting(args.scheme.clone(), &file, &["scheme"], "sdf".to_string())?;
    let schemes = parse_schemes(&scheme_spec)?;
    if schemes.len() != 1 {
        return Err(usage("trace runs one scheme at a time"));
    }
    let anchor = setting(args.anchor, &file, &["anchor"], net.delay() + 2)?;
    let horizon = setting(
        args.horizon,
        &file,
        &["horizon"],
        anchor + 2 * (net.delay() + 1),
    )?;
    let seed = setting(args.seed, &file, &["seed"], 17)?;
    let mut erasures = args.erase.clone();
    if erasures.is_empty() {
        if let Some(listed) = file.raw(&["erase"]) {
            erasures = listed.split(',').map(str::to_string).collect();
        }
    }
    let slots = erasures
        .iter()
        .map(|spec| parse_erase(spec, anchor))
        .collect::<Result<Vec<_>, _>>()?;
    let pattern = ErasurePattern::from_slots(net.links(), horizon, &slots)?;

    let cfg = SchemeConfig::verify_grade(schemes[0], net, field)?;
    let trace = run_trace(&cfg, &pattern, horizon, seed)?;
    println!("{} (anchor i={anchor})", cfg.describe());
    print!("{}", render_trace(&cfg, &pattern, &trace));
    Ok(())
}

// ============================================================
// Trace rendering
// ============================================================

/// How to map one node's emissions back to frame coordinates: its output
/// stream lags the source's diagonals by `shift` slots, and (for
/// hop-by-hop schemes) carries frames `frame_offset` slots behind the
/// source's numbering.
struct NodeView {
    shift: i64,
    frame_offset: i64,
}

fn node_views(cfg: &SchemeConfig) -> Vec<NodeView> {
    let nodes = cfg.net().links();
    match cfg.scheme() {
        Scheme::Sdf => {
            let params = cfg.sdf_params().expect("sdf config");
            (0..nodes)
                .map(|j| NodeView {
                    shift: params.budget_prefix(j) as i64,
                    frame_offset: 0,
                })
                .collect()
        }
        Scheme::Mdf => {
            let params = cfg.mdf_params().expect("mdf config");
            let mut behind = 0i64;
            (0..nodes)
                .map(|j| {
                    if j > 0 {
                        behind += params.hop_delays[j - 1] as i64;
                    }
                    NodeView {
                        shift: 0,
                        frame_offset: behind,
                    }
                })
                .collect()
        }
        Scheme::If => (0..nodes)
            .map(|_| NodeView {
                shift: 0,
                frame_offset: 0,
            })
            .collect(),
    }
}

/// A packet's header string: column ids in emission order, concatenated
/// as digits while they stay single-digit ("123"), dotted otherwise.
fn header_string(packet: &Packet, widest: usize) -> String {
    let ids: Vec<String> = packet
        .symbols()
        .iter()
        .map(|s| s.header().to_string())
        .collect();
    ids.join(if widest > 9 { "." } else { "" })
}

/// What one emitted symbol carries, in frame coordinates: `s3[1]` is
/// component 1 of frame 3, `p3@b5` is parity column 3 of the diagonal
/// starting at frame 5, `z` pads pre-history, `-` is a void.
fn symbol_label(packet: &Packet, d: usize, t: i64, view: &NodeView, k: usize) -> String {
    let sym = packet.symbol(d);
    if sym.is_void() {
        return "-".to_string();
    }
    let diagonal = t - view.shift - d as i64 - view.frame_offset;
    let h = i64::from(sym.header());
    if h <= k as i64 {
        let frame = diagonal + h - 1;
        if frame < 0 {
            "z".to_string()
        } else {
            format!("s{frame}[{}]", h - 1)
        }
    } else if diagonal < 0 {
        "z".to_string()
    } else {
        format!("p{h}@b{diagonal}")
    }
}

fn render_table(title: &str, columns: &[String], rows: &[(String, Vec<String>)]) -> String {
    let mut widths: Vec<usize> = columns.iter().map(String::len).collect();
    let mut label_width = "time".len();
    for (label, cells) in rows {
        label_width = label_width.max(label.len());
        for (i, cell) in cells.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    out.push_str(title);
    out.push('\n');
    let mut line = format!("{:label_width$}", "time");
    for (i, column) in columns.iter().enumerate() {
        line.push_str(" | ");
        line.push_str(&format!("{:>width$}", column, width = widths[i]));
    }
    out.push_str(line.trim_end());
    out.push('\n');
    for (label, cells) in rows {
        let mut line = format!("{label:label_width$}");
        for (i, cell) in cells.iter().enumerate() {
            line.push_str(" | ");
            line.push_str(&format!("{:>width$}", cell, width = widths[i]));
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn render_trace(cfg: &SchemeConfig, pattern: &ErasurePattern, trace: &TraceOutput) -> String {
    let k = cfg.message_len();
    let widest = match cfg.scheme() {
        Scheme::Sdf => cfg.sdf_params().expect("sdf config").dims().n_max,
        Scheme::Mdf => cfg
            .mdf_params()
            .expect("mdf config")
            .block_lengths
            .iter()
            .copied()
            .max()
            .unwrap_or(0),
        Scheme::If => cfg.if_params().expect("if config").n,
    };
    let views = node_views(cfg);
    let columns: Vec<String> = (0..trace.horizon).map(|t| t.to_string()).collect();
    let mut out = String::new();
    for (j, (outputs, view)) in trace.node_outputs.iter().zip(&views).enumerate() {
        let title = if j == 0 {
            format!("source r_0 (emits on link 1{})", erased_note(pattern, 0))
        } else {
            format!(
                "relay r_{j} (emits on link {}{})",
                j + 1,
                erased_note(pattern, j)
            )
        };
        let mut rows: Vec<(String, Vec<String>)> = Vec::new();
        rows.push((
            "lost".to_string(),
            (0..trace.horizon)
                .map(|t| if pattern.erased(j, t) { "x" } else { "" }.to_string())
                .collect(),
        ));
        rows.push((
            "header".to_string(),
            outputs.iter().map(|p| header_string(p, widest)).collect(),
        ));
        let positions = outputs.first().map_or(0, Packet::len);
        for d in 0..positions {
            rows.push((
                format!("pos {}", d + 1),
                outputs
                    .iter()
                    .enumerate()
                    .map(|(t, p)| symbol_label(p, d, t as i64, view, k))
                    .collect(),
            ));
        }
        out.push_str(&render_table(&title, &columns, &rows));
        out.push('\n');
    }

    let mut recovered: Vec<Vec<String>> = vec![Vec::new(); trace.horizon as usize];
    let mut missed = Vec::new();
    for &(frame, done) in &trace.completions {
        match done {
            Some(slot) => {
                if (0..trace.horizon).contains(&slot) {
                    recovered[slot as usize].push(format!("s{frame}"));
                }
            }
            None => missed.push(frame),
        }
    }
    let rows = vec![(
        "done".to_string(),
        recovered
            .iter()
            .map(|frames| {
                if frames.is_empty() {
                    "-".to_string()
                } else {
                    frames.join("+")
                }
            })
            .collect(),
    )];
    out.push_str(&render_table("destination", &columns, &rows));
    if missed.is_empty() {
        out.push_str("all frames recovered by their deadline\n");
    } else {
        for frame in missed {
            out.push_str(&format!(
                "frame s{frame} NOT recovered by its deadline (slot {})\n",
                frame + cfg.net().delay() as i64
            ));
        }
    }
    out
}

fn erased_note(pattern: &ErasurePattern, link: usize) -> String {
    let slots = pattern.link_slots(link);
    if slots.is_empty() {
        String::new()
    } else {
        format!(", erased at {slots:?}")
    }
}

// ============================================================
// Tests
// ============================================================

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erase_specs_resolve_against_the_anchor() {
        assert_eq!(parse_erase("1:i", 5).unwrap(), (0, 5));
        assert_eq!(parse_erase("2:i+2", 5).unwrap(), (1, 7));
        assert_eq!(parse_erase("3:i-1", 5).unwrap(), (2, 4));
        assert_eq!(parse_erase("1:9", 5).unwrap(), (0, 9));
        assert!(parse_erase("0:i", 5).is_err());
        assert!(parse_erase("1", 5).is_err());
        assert!(parse_erase("1:i*2", 5).is_err());
        assert!(parse_erase("1:i-9", 5).is_err());
    }

    #[test]
    fn scheme_lists_parse() {
        assert_eq!(
            parse_schemes("sdf,mdf,if").unwrap(),
            vec![Scheme::Sdf, Scheme::Mdf, Scheme::If]
        );
        assert_eq!(parse_schemes("SDF").unwrap(), vec![Scheme::Sdf]);
        assert!(parse_schemes("sdf,bogus").is_err());
    }

    #[test]
    fn config_files_parse_and_flags_win() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        fs::write(&path, "# sweep\nt = 3\nn = 1,1\nseed=99\nsliding = true\n").unwrap();
        let file = FileConfig::load(Some(&path)).unwrap();
        assert_eq!(file.value::<usize>(&["t"]).unwrap(), Some(3));
        assert_eq!(file.list::<usize>(&["n"]).unwrap(), Some(vec![1, 1]));
        assert_eq!(file.flag(&["sliding"]).unwrap(), Some(true));
        assert_eq!(file.value::<u64>(&["frames"]).unwrap(), None);
        // Explicit flag beats the file value.
        assert_eq!(setting(Some(7u64), &file, &["seed"], 17).unwrap(), 7);
        assert_eq!(setting(None, &file, &["seed"], 17).unwrap(), 99);
        assert_eq!(setting::<u64>(None, &file, &["frames"], 17).unwrap(), 17);
    }

    #[test]
    fn malformed_config_lines_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.conf");
        fs::write(&path, "t: 3\n").unwrap();
        assert!(FileConfig::load(Some(&path)).is_err());
        fs::write(&path, "sliding=maybe\n").unwrap();
        let file = FileConfig::load(Some(&path)).unwrap();
        assert!(file.flag(&["sliding"]).is_err());
    }

    #[test]
    fn table_rendering_aligns_columns() {
        let table = render_table(
            "node",
            &["0".to_string(), "1".to_string()],
            &[
                ("header".to_string(), vec!["123".into(), "23".into()]),
                ("pos 1".to_string(), vec!["s0[0]".into(), "-".into()]),
            ],
        );
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines[0], "node");
        // Column widths cover the longest cell in each column.
        assert_eq!(lines[1], format!("{:6} | {:>5} | {:>2}", "time", "0", "1"));
        assert_eq!(
            lines[2],
            format!("{:6} | {:>5} | {:>2}", "header", "123", "23")
        );
        assert_eq!(
            lines[3],
            format!("{:6} | {:>5} | {:>2}", "pos 1", "s0[0]", "-")
        );
    }
}
