//! `gram`: generation, compilation, compression, querying, verification, and
//! probe benchmarks over grammar-compressed strings.
//!
//! Subcommands read from files or stdin (`-`) and write to stdout so
//! instances pipe between tools. All indices are zero-based. Exit codes:
//! 0 success, 1 validation failure, 2 usage error, 3 I/O error.

use std::fmt;
use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;

use gram_core::bitstring::BitString;
use gram_core::butterfly::{ButterflyGraph, EdgeId, RectangleReachability};
use gram_core::bwt::{
    build_bwt_hard, bwt, check_bwt_hard, ibwt, rle_decode, rle_encode, runs, runs_bits,
    BwtError, BwtText, RunLengthCode,
};
use gram_core::grid::{check_answer_compiler, compile_answer_grammar_detailed, PointSet};
use gram_core::hard::{
    build_blsd_grammar, build_sd_grammar, check_blsd_encoding, check_sd_encoding,
    BlockedInstance, SetInstance,
};
use gram_core::lz::lz_report;
use gram_core::probe::{bench_sweep, BenchFamily, BenchRecord, WordPolicy};
use gram_core::rng::DetRng;
use gram_core::slp::{Slp, DEFAULT_EXPAND_CAP};

#[derive(Parser)]
#[command(
    name = "gram",
    version,
    about = "Grammar-compressed strings: hard instances, answer-string compilation, \
             BWT/LZ codecs, and cell-probe benchmarks",
    after_help = "Grammars travel in the SLPv1 text format; bitstrings as ASCII 0/1 \
                  (newlines ignored); transforms as 0/1/$ text. Character indices are \
                  zero-based. Commands that read an instance accept a file path or `-` \
                  for stdin."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SdArgs {
    /// Universe size m (elements 1..=m).
    #[arg(long = "m")]
    m: usize,
    /// Preprocessed set Y, comma-separated 1-based elements (e.g. 1,3).
    /// Omitted: sampled from --seed.
    #[arg(long = "Y")]
    y: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BlockedArgs {
    /// Block size B.
    #[arg(long = "B")]
    b: usize,
    /// Block count N (universe 1..=B*N).
    #[arg(long = "N")]
    n: usize,
    /// Preprocessed set Y, comma-separated 1-based elements (e.g. 1,3,5,9).
    /// Omitted: sampled from --seed.
    #[arg(long = "Y")]
    y: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the set-disjointness grammar for Y over {1..m} (SLPv1).
    GenSd(SdArgs),
    /// Emit the blocked-disjointness grammar for Y over {1..B*N} (SLPv1).
    GenBlsd(BlockedArgs),
    /// Compile the answer string of a points file into a grammar (SLPv1).
    CompileRc {
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        /// CSV of `x,y` lines, 1-based; header line optional.
        #[arg(long)]
        points: String,
        /// Fail instead of padding when the width is not a power of two.
        #[arg(long)]
        no_pad: bool,
    },
    /// Emit the BWT-compressible hard string for Y over {1..B*N}.
    GenBwtHard {
        #[command(flatten)]
        blocked: BlockedArgs,
        #[arg(long, default_value_t = DEFAULT_EXPAND_CAP)]
        cap: u64,
    },
    /// Print one character of a grammar's derived string (zero-based index).
    Access {
        #[arg(long)]
        index: String,
        /// SLPv1 input path, `-` for stdin.
        #[arg(default_value = "-")]
        input: String,
    },
    /// Materialize a grammar's derived string.
    Expand {
        #[arg(long, default_value_t = DEFAULT_EXPAND_CAP)]
        cap: u64,
        #[arg(default_value = "-")]
        input: String,
    },
    /// Burrows-Wheeler transform of a bitstring.
    Bwt {
        #[arg(default_value = "-")]
        input: String,
    },
    /// Invert a transform back to the bitstring.
    Ibwt {
        #[arg(default_value = "-")]
        input: String,
    },
    /// Count runs (maximal equal-bit blocks, sentinel ignored).
    Runs {
        #[arg(default_value = "-")]
        input: String,
    },
    /// Run-length code of a transform, as JSON.
    RleEncode {
        #[arg(default_value = "-")]
        input: String,
    },
    /// Decode a run-length JSON back to the transform text.
    RleDecode {
        #[arg(default_value = "-")]
        input: String,
    },
    /// Grammar size versus LZ77/LZ78 sizes of the derived string (JSON).
    LzReport {
        #[arg(long, default_value_t = DEFAULT_EXPAND_CAP)]
        cap: u64,
        #[arg(default_value = "-")]
        input: String,
    },
    /// Check the rectangle-counting reduction against BFS reachability on
    /// random edge-deletion patterns.
    ButterflyCheck {
        #[arg(long = "H", default_value_t = 1)]
        copies: usize,
        #[arg(long = "B", default_value_t = 2)]
        degree: usize,
        #[arg(long = "D", default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Probe-count sweep over an instance family (CSV, or JSON with --json).
    ProbeBench {
        /// One of: sd, blsd, rc, bwt-hard.
        #[arg(long)]
        family: String,
        /// Inclusive parameter range LO..HI (sd: m = k; blsd/bwt-hard:
        /// B = N = k; rc: W = H = P = 2^k).
        #[arg(long = "param-range", default_value = "2..6")]
        param_range: String,
        /// Cell width in bits, or `auto` for ceil(log2 L) per instance.
        #[arg(long = "w", default_value = "auto")]
        word_size: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<String>,
    },
    /// Run a family's oracle-equivalence suite on one instance.
    Verify {
        /// One of: sd, blsd, rc, bwt-hard.
        #[arg(long)]
        family: String,
        #[arg(long = "m")]
        m: Option<usize>,
        #[arg(long = "B")]
        b: Option<usize>,
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long = "Y")]
        y: Option<String>,
        #[arg(long)]
        width: Option<usize>,
        #[arg(long)]
        height: Option<usize>,
        #[arg(long)]
        points: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum CliError {
    Validation(String),
    Usage(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "error: {m}"),
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

fn validation<E: fmt::Display>(e: E) -> CliError {
    CliError::Validation(e.to_string())
}

fn read_input(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| CliError::Io(format!("reading stdin: {e}")))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("reading {path}: {e}")))
    }
}

fn write_output(path: Option<&str>, contents: &str) -> Result<(), CliError> {
    match path {
        None | Some("-") => {
            print!("{contents}");
            Ok(())
        }
        Some(p) => {
            std::fs::write(p, contents).map_err(|e| CliError::Io(format!("writing {p}: {e}")))
        }
    }
}

/// Comma-separated 1-based elements; omitted sets fall back to a seeded
/// random subset of the universe.
fn parse_set(y: &Option<String>, universe: usize, seed: u64) -> Result<Vec<usize>, CliError> {
    match y {
        Some(text) => text
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("set element {t:?} is not a number")))
            })
            .collect(),
        None => Ok(DetRng::new(seed).subset(universe)),
    }
}

fn parse_points_csv(text: &str) -> Result<Vec<(usize, usize)>, CliError> {
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',').map(str::trim);
        let (x, y) = (fields.next(), fields.next());
        match (
            x.and_then(|t| t.parse::<usize>().ok()),
            y.and_then(|t| t.parse::<usize>().ok()),
        ) {
            (Some(x), Some(y)) => points.push((x, y)),
            _ if lineno == 0 => continue, // optional header
            _ => {
                return Err(CliError::Validation(format!(
                    "points file line {}: expected `x,y`",
                    lineno + 1
                )))
            }
        }
    }
    Ok(points)
}

fn parse_biguint(text: &str) -> Result<BigUint, CliError> {
    text.parse::<BigUint>()
        .map_err(|_| CliError::Usage(format!("index {text:?} is not a decimal integer")))
}

fn parse_range(text: &str) -> Result<(usize, usize), CliError> {
    let parts: Vec<&str> = text.split("..").collect();
    if parts.len() == 2 {
        if let (Ok(lo), Ok(hi)) = (parts[0].parse(), parts[1].parse()) {
            return Ok((lo, hi));
        }
    }
    Err(CliError::Usage(format!("range {text:?} must look like LO..HI")))
}

fn grammar_from(path: &str) -> Result<Slp, CliError> {
    Slp::from_slpv1(&read_input(path)?).map_err(validation)
}

const BENCH_CSV_HEADER: &str = "family,params,n,L,w,structure,worst_probes,mean_probes";

fn bench_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(BENCH_CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{:.3}\n",
            r.family, r.params, r.rule_count, r.string_len, r.word_size, r.structure,
            r.worst_probes, r.mean_probes
        ));
    }
    out
}

fn bench_json(records: &[BenchRecord]) -> String {
    let mut out = serde_json::to_string_pretty(records).expect("records serialize");
    out.push('\n');
    out
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::GenSd(args) => {
            let y = parse_set(&args.y, args.m, args.seed)?;
            let inst = SetInstance::new(args.m, y).map_err(validation)?;
            print!("{}", build_sd_grammar(&inst).to_slpv1());
            Ok(())
        }
        Command::GenBlsd(args) => {
            let y = parse_set(&args.y, args.b * args.n, args.seed)?;
            let inst = BlockedInstance::new(args.b, args.n, y).map_err(validation)?;
            print!("{}", build_blsd_grammar(&inst).to_slpv1());
            Ok(())
        }
        Command::CompileRc { width, height, points, no_pad } => {
            let pts = parse_points_csv(&read_input(&points)?)?;
            let ps = PointSet::new(width, height, pts).map_err(validation)?;
            let compiled = compile_answer_grammar_detailed(&ps, !no_pad).map_err(validation)?;
            eprintln!(
                "compile-rc: width {} padded to {}, {} rules",
                compiled.original_width,
                compiled.padded_width,
                compiled.slp.rule_count()
            );
            print!("{}", compiled.slp.to_slpv1());
            Ok(())
        }
        Command::GenBwtHard { blocked, cap } => {
            let y = parse_set(&blocked.y, blocked.b * blocked.n, blocked.seed)?;
            let inst = BlockedInstance::new(blocked.b, blocked.n, y).map_err(validation)?;
            let s = build_bwt_hard(&inst, cap).map_err(validation)?;
            println!("{s}");
            Ok(())
        }
        Command::Access { index, input } => {
            let slp = grammar_from(&input)?;
            let i = parse_biguint(&index)?;
            let bit = slp.access(&i).map_err(validation)?;
            println!("{bit}");
            Ok(())
        }
        Command::Expand { cap, input } => {
            let slp = grammar_from(&input)?;
            println!("{}", slp.expand(cap).map_err(validation)?);
            Ok(())
        }
        Command::Bwt { input } => {
            let s: BitString = read_input(&input)?.parse().map_err(validation)?;
            println!("{}", bwt(&s));
            Ok(())
        }
        Command::Ibwt { input } => {
            let t: BwtText = read_input(&input)?.parse().map_err(validation)?;
            println!("{}", ibwt(&t).map_err(validation)?);
            Ok(())
        }
        Command::Runs { input } => {
            let text = read_input(&input)?;
            let count = match text.parse::<BwtText>() {
                Ok(t) => runs(&t),
                Err(BwtError::SentinelCount(0)) => {
                    runs_bits(&text.parse::<BitString>().map_err(validation)?)
                }
                Err(e) => return Err(validation(e)),
            };
            println!("{count}");
            Ok(())
        }
        Command::RleEncode { input } => {
            let t: BwtText = read_input(&input)?.parse().map_err(validation)?;
            println!("{}", rle_encode(&t).to_json());
            Ok(())
        }
        Command::RleDecode { input } => {
            let code = RunLengthCode::from_json(&read_input(&input)?).map_err(validation)?;
            println!("{}", rle_decode(&code).map_err(validation)?);
            Ok(())
        }
        Command::LzReport { cap, input } => {
            let slp = grammar_from(&input)?;
            let report = lz_report(&slp, cap).map_err(validation)?;
            println!("{}", serde_json::to_string(&report).expect("report serializes"));
            Ok(())
        }
        Command::ButterflyCheck { copies, degree, depth, trials, seed } => {
            let full = ButterflyGraph::build(copies, degree, depth, &[]).map_err(validation)?;
            let all_edges: Vec<EdgeId> = full.present_edges().cloned().collect();
            let mut rng = DetRng::new(seed);
            let mut pairs_checked = 0usize;
            for trial in 0..trials {
                let deleted: Vec<EdgeId> =
                    all_edges.iter().filter(|_| rng.next_bool()).cloned().collect();
                let g = ButterflyGraph::build(copies, degree, depth, &deleted)
                    .map_err(validation)?;
                let counting = RectangleReachability::from_graph(&g);
                for u in g.layer0_labels() {
                    for v in g.last_layer_labels() {
                        let bfs = g.reach_oracle(&u, &v).map_err(validation)?;
                        let counted = counting.reachable(&u, &v).map_err(validation)?;
                        if bfs != counted {
                            return Err(CliError::Validation(format!(
                                "trial {trial}: counting says {counted}, BFS says {bfs} \
                                 for u={:?} v=({}, {:?})",
                                u.digits, v.copy, v.digits
                            )));
                        }
                        pairs_checked += 1;
                    }
                }
            }
            println!(
                "butterfly-check: H={copies} B={degree} D={depth} trials={trials} \
                 pairs={pairs_checked} all agree"
            );
            Ok(())
        }
        Command::ProbeBench { family, param_range, word_size, seed, json, out } => {
            let family: BenchFamily = family.parse().map_err(validation)?;
            let (lo, hi) = parse_range(&param_range)?;
            let policy = match word_size.as_str() {
                "auto" => WordPolicy::Auto,
                w => WordPolicy::Fixed(w.parse().map_err(|_| {
                    CliError::Usage(format!("word size {w:?} must be `auto` or a number"))
                })?),
            };
            let records = bench_sweep(family, lo, hi, policy, seed).map_err(validation)?;
            let rendered = if json { bench_json(&records) } else { bench_csv(&records) };
            write_output(out.as_deref(), &rendered)
        }
        Command::Verify { family, m, b, n, y, width, height, points, seed } => {
            let need = |opt: Option<usize>, flag: &str| {
                opt.ok_or_else(|| {
                    CliError::Usage(format!("verify --family {family} needs --{flag}"))
                })
            };
            match family.as_str() {
                "sd" => {
                    let m = need(m, "m")?;
                    let inst =
                        SetInstance::new(m, parse_set(&y, m, seed)?).map_err(validation)?;
                    let checked = check_sd_encoding(&inst).map_err(validation)?;
                    println!("verify sd: m={m} Y={:?}: {checked} subset indices agree", inst.y());
                }
                "blsd" => {
                    let (b, n) = (need(b, "B")?, need(n, "N")?);
                    let inst = BlockedInstance::new(b, n, parse_set(&y, b * n, seed)?)
                        .map_err(validation)?;
                    let checked = check_blsd_encoding(&inst).map_err(validation)?;
                    println!(
                        "verify blsd: B={b} N={n} Y={:?}: {checked} blocked sets agree",
                        inst.y()
                    );
                }
                "bwt-hard" => {
                    let (b, n) = (need(b, "B")?, need(n, "N")?);
                    let inst = BlockedInstance::new(b, n, parse_set(&y, b * n, seed)?)
                        .map_err(validation)?;
                    let check = check_bwt_hard(&inst, DEFAULT_EXPAND_CAP).map_err(validation)?;
                    println!(
                        "verify bwt-hard: B={b} N={n} Y={:?}: length {} ok, {} blocked sets \
                         agree, {} runs <= {}",
                        inst.y(),
                        check.length,
                        check.sets_checked,
                        check.runs,
                        check.runs_bound
                    );
                }
                "rc" => {
                    let (w, h) = (need(width, "width")?, need(height, "height")?);
                    let file = points.ok_or_else(|| {
                        CliError::Usage("verify --family rc needs --points".into())
                    })?;
                    let pts = parse_points_csv(&read_input(&file)?)?;
                    let ps = PointSet::new(w, h, pts).map_err(validation)?;
                    let check = check_answer_compiler(&ps).map_err(validation)?;
                    println!(
                        "verify rc: {}x{} padded to {}x{}: {} bits agree, {} rules <= {}",
                        check.original_width,
                        h,
                        check.padded_width,
                        h,
                        check.bits_checked,
                        check.rule_count,
                        check.rule_bound
                    );
                }
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown family {other:?} (expected sd, blsd, rc, or bwt-hard)"
                    )))
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
