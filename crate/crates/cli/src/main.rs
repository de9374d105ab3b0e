//! `prop-pd2`: JSON front end to the `pd2` library.
//!
//! Exit status 0 on success, 1 on a conclusive negative answer, 2 on errors
//! and inconclusive outcomes.

use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pd2::decomp::{self, DecompositionGraph, Surface};
use pd2::init::{SeedBasis, SeedJson};
use pd2::normalizer::{cap_off, verify_certificate, BasisChangeCertificate, CapOutcome, Normalizer};
use pd2::standard::{check_demushkin, standard_r1, OrientationCharacter, PairJson, PairPresentation, StandardWordSpec};
use pd2::word::WordJson;
use pd2::{BigCollector, Error, FreeWord, HallBasis, TruncationParams};
use serde::Serialize;
use serde_json::json;

#[derive(Parser)]
#[command(name = "prop-pd2", version, about = "Pro-p PD² pairs: collection, standard words, normalization, decomposition graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Input {
    /// Read JSON from this file instead of standard input.
    #[arg(long, short)]
    input: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Collect a word into Mal'cev coordinates.
    Collect {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        class: usize,
        /// Override the modulus exponent M.
        #[arg(long = "mod")]
        modulus: Option<u32>,
        #[command(flatten)]
        input: Input,
    },
    /// Print the standard word r₁(n, b, χ).
    R1 {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        b: usize,
        /// trivial, up:M, minus-times:F or minus-power:F
        #[arg(long)]
        chi: String,
        #[arg(long)]
        p: u64,
    },
    /// Test whether a one-relator word presents a Demushkin group.
    CheckDemushkin {
        #[arg(long)]
        p: u64,
        #[command(flatten)]
        input: Input,
    },
    /// Bring a pair to standard form modulo G_{J+1} and print a certificate.
    Normalize {
        #[arg(long)]
        p: u64,
        /// Checked against the character when given.
        #[arg(long)]
        q: Option<u64>,
        /// Checked against the pair when given.
        #[arg(long)]
        n: Option<usize>,
        /// Checked against the pair when given.
        #[arg(long)]
        b: Option<usize>,
        #[arg(long)]
        chi: String,
        #[arg(long, default_value_t = 5)]
        depth: usize,
        #[arg(long)]
        seed_basis: Option<PathBuf>,
        /// Write every step's δ matrix as JSON lines to this file.
        #[arg(long)]
        dump_delta: Option<PathBuf>,
        #[command(flatten)]
        input: Input,
    },
    /// Recheck a certificate against a pair (pair JSON on input).
    Verify {
        #[arg(long)]
        certificate: PathBuf,
        #[command(flatten)]
        input: Input,
    },
    /// Kill one designated peripheral generator.
    Cap {
        #[arg(long)]
        index: usize,
        #[command(flatten)]
        input: Input,
    },
    /// Enumerate decomposition graphs up to isomorphism.
    Graphs {
        #[arg(long)]
        genus: u32,
        #[arg(long)]
        boundary: u32,
        #[arg(long)]
        max_edges: usize,
        /// Only pants decompositions.
        #[arg(long)]
        pants: bool,
        /// Also write all graphs in DOT format to this file.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// All collapses of a decomposition graph (graph JSON on input).
    Downset {
        #[command(flatten)]
        input: Input,
    },
    /// List the Hall basis.
    Hall {
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        class: usize,
    },
}

enum Failure {
    /// Conclusive negative; the payload is still printed.
    Negative(serde_json::Value),
    Error(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match &e {
            Error::Init(f) if f.is_conclusive() => Failure::Negative(json!({ "error": e.to_string(), "conclusive": true })),
            Error::NoSolutionAt { step } => {
                Failure::Negative(json!({ "error": e.to_string(), "conclusive": true, "step": step }))
            }
            _ => Failure::Error(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Error(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Error(format!("malformed JSON: {e}"))
    }
}

type Outcome = Result<serde_json::Value, Failure>;

fn read_source(input: &Input) -> io::Result<String> {
    match &input.input {
        Some(path) => fs::read_to_string(path),
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Error(format!("{}: {e}", path.display())))
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("output serialises")
}

fn read_pair(input: &Input) -> Result<PairPresentation, Failure> {
    let raw: PairJson = serde_json::from_str(&read_source(input)?)?;
    Ok(PairPresentation::from_json(&raw)?)
}

fn read_word(input: &Input) -> Result<FreeWord, Failure> {
    let raw: WordJson = serde_json::from_str(&read_source(input)?)?;
    Ok(FreeWord::from_json(&raw)?)
}

fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Collect { p, q, class, modulus, input } => {
            let word = read_word(&input)?;
            let mut params = TruncationParams::new(p, q, class)?;
            if let Some(m) = modulus {
                params = params.with_modulus(m)?;
            }
            let col = BigCollector::new(word.gens().rank(), params)?;
            let el = col.collect(&word)?;
            Ok(to_value(&col.to_json(&el)))
        }
        Command::R1 { n, b, chi, p } => {
            let chi = OrientationCharacter::parse(p, &chi)?;
            let spec = StandardWordSpec::new(n, b, chi)?;
            Ok(to_value(&standard_r1(&spec)?.to_json()))
        }
        Command::CheckDemushkin { p, input } => {
            let report = check_demushkin(&read_word(&input)?, p)?;
            let value = to_value(&report);
            if report.demushkin {
                Ok(value)
            } else {
                Err(Failure::Negative(value))
            }
        }
        Command::Normalize { p, q, n, b, chi, depth, seed_basis, dump_delta, input } => {
            let pair = read_pair(&input)?;
            let chi = OrientationCharacter::parse(p, &chi)?;
            if q.is_some_and(|q| q != chi.q()) {
                return Err(Failure::Error(format!("--q {} does not match the character (q = {})", q.unwrap(), chi.q())));
            }
            if n.is_some_and(|n| n != pair.gens.n) || b.is_some_and(|b| b != pair.gens.b) {
                return Err(Failure::Error("--n/--b do not match the pair".into()));
            }
            let seed = match seed_basis {
                Some(path) => {
                    let raw: SeedJson = serde_json::from_str(&read_file(&path)?)?;
                    Some(SeedBasis::from_json(pair.gens, &raw)?)
                }
                None => None,
            };
            let normalizer = Normalizer::new(&pair, chi, depth)?;
            let init = pd2::init::initialize_for_class(&pair, chi, seed.as_ref(), pd2::init::SEARCH_BOUND, depth + 1)?;
            let mut dumps = Vec::new();
            let cert = normalizer.run_observed(&init, |d| dumps.push(serde_json::to_string(d).expect("δ serialises")))?;
            if let Some(path) = dump_delta {
                let mut text = dumps.join("\n");
                text.push('\n');
                fs::write(path, text)?;
            }
            Ok(to_value(&cert))
        }
        Command::Verify { certificate, input } => {
            let cert: BasisChangeCertificate = serde_json::from_str(&read_file(&certificate)?)?;
            let pair = read_pair(&input)?;
            let ok = verify_certificate(&cert, &pair)?;
            let value = json!({ "valid": ok });
            if ok {
                Ok(value)
            } else {
                Err(Failure::Negative(value))
            }
        }
        Command::Cap { index, input } => {
            let pair = read_pair(&input)?;
            Ok(match cap_off(&pair, index)? {
                CapOutcome::Pair(p) => json!({ "outcome": "pair", "pair": to_value(&p.to_json()) }),
                CapOutcome::Demushkin(w) => json!({ "outcome": "demushkin", "word": to_value(&w.to_json()) }),
                CapOutcome::TwoPeripherals(p) => {
                    json!({ "outcome": "two-peripherals", "pair": to_value(&p.to_json()) })
                }
            })
        }
        Command::Graphs { genus, boundary, max_edges, pants, dot } => {
            let surface = Surface::new(genus, boundary)?;
            let graphs = decomp::enumerate(surface, max_edges, pants)?;
            if let Some(path) = dot {
                fs::write(path, graphs.iter().map(DecompositionGraph::to_dot).collect::<String>())?;
            }
            Ok(to_value(&graphs))
        }
        Command::Downset { input } => {
            let graph = DecompositionGraph::from_json(&read_source(&input)?)?;
            Ok(to_value(&decomp::downset(&graph)?))
        }
        Command::Hall { rank, class } => {
            let hall = HallBasis::new(rank, class)?;
            let names: Vec<String> =
                (0..hall.len()).map(|k| hall.display(k, &|g| format!("x{g}"))).collect();
            Ok(json!({ "hall": to_value(&hall.describe()), "names": names }))
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("PROP_PD2_THREADS") else { return Ok(()) };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("PROP_PD2_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("prop-pd2: {e}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(Failure::Negative(v)) => {
            println!("{v}");
            ExitCode::from(1)
        }
        Err(Failure::Error(msg)) => {
            eprintln!("prop-pd2: {msg}");
            ExitCode::from(2)
        }
    }
}
