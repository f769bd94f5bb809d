use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sattrust_core::chains::{self, ChainError, Condition};
use sattrust_core::engine::{saturate, ProofTree, SaturationResult, TrustStore};
use sattrust_core::ingest::{load_signature_table, load_store, AcceptAll, SignatureVerifier, SIGNATURE_TABLE};
use sattrust_core::lang::Form;
use sattrust_core::semantics::{check_axioms, random_model, AxiomBounds, KripkeModel, ModelSizes};

const OK: u8 = 0;
const BAD_INPUT: u8 = 1;
const SIGNATURE: u8 = 2;
const NOT_DERIVABLE: u8 = 3;
const COUNTEREXAMPLES: u8 = 4;

/// Derive trust in labeled self-authenticating addresses.
#[derive(Debug, Parser)]
#[command(name = "sattrust", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print everything derivable from a store.
    Saturate {
        #[command(flatten)]
        store: StoreArgs,
        /// Print sattestor statements as well.
        #[arg(long)]
        all: bool,
        /// Write a proof for every derived statement to this file, one JSON record per line.
        #[arg(long, value_name = "PATH")]
        proofs: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print a proof of one statement.
    Query {
        statement: String,
        #[command(flatten)]
        store: StoreArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Say why a trust statement holds, or print its delegation chain.
    Explain {
        statement: String,
        #[command(flatten)]
        store: StoreArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Search a finite model for false axiom instances.
    CheckModel {
        #[arg(long, value_name = "PATH", conflicts_with = "random", required_unless_present = "random")]
        model: Option<PathBuf>,
        #[arg(long)]
        random: bool,
        /// Seed range, as `a..b` or a single seed.
        #[arg(long, default_value = "0..1", value_parser = parse_range)]
        seeds: Range<u64>,
        #[arg(long, default_value_t = 3)]
        worlds: usize,
        #[arg(long, default_value_t = 3)]
        names: usize,
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// Parse statements and print them in canonical form.
    Parse {
        /// Statements to parse; read one per line from stdin when absent.
        statements: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Debug, Args)]
struct StoreArgs {
    /// Initial trust statements, one per line.
    #[arg(long, value_name = "PATH")]
    itrust: Option<PathBuf>,
    /// Local axiom schema instances, one per line.
    #[arg(long, value_name = "PATH")]
    las: Option<PathBuf>,
    /// Directory of sattestation headers.
    #[arg(long, value_name = "DIR")]
    headers: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

fn parse_range(s: &str) -> Result<Range<u64>, String> {
    match s.split_once("..") {
        Some((a, b)) => {
            let a: u64 = a.parse().map_err(|_| format!("bad range start in `{s}`"))?;
            let b: u64 = b.parse().map_err(|_| format!("bad range end in `{s}`"))?;
            if a >= b {
                return Err(format!("empty range `{s}`"));
            }
            Ok(a..b)
        }
        None => {
            let a: u64 = s.parse().map_err(|_| format!("bad seed `{s}`"))?;
            Ok(a..a + 1)
        }
    }
}

/// Failure with an exit code and a message for stderr.
struct Failure(u8, String);

impl Failure {
    fn input(msg: impl ToString) -> Self {
        Failure(BAD_INPUT, msg.to_string())
    }
}

fn verifier(headers: Option<&Path>) -> Result<Box<dyn SignatureVerifier>, Failure> {
    let choice = std::env::var("SATTRUST_VERIFIER").unwrap_or_else(|_| "accept-all".into());
    match choice.as_str() {
        "accept-all" => Ok(Box::new(AcceptAll)),
        "fixture-table" => {
            let dir = headers.ok_or_else(|| Failure::input("the fixture-table verifier needs --headers"))?;
            let table = load_signature_table(&dir.join(SIGNATURE_TABLE)).map_err(Failure::input)?;
            Ok(Box::new(table))
        }
        other => Err(Failure::input(format!(
            "SATTRUST_VERIFIER must be accept-all or fixture-table, not `{other}`"
        ))),
    }
}

fn store(args: &StoreArgs) -> Result<TrustStore, Failure> {
    let v = verifier(args.headers.as_deref())?;
    load_store(args.itrust.as_deref(), args.las.as_deref(), args.headers.as_deref(), v.as_ref()).map_err(|e| {
        let code = if e.is_signature_rejection() { SIGNATURE } else { BAD_INPUT };
        Failure(code, e.to_string())
    })
}

fn target(text: &str) -> Result<Form, Failure> {
    let f = Form::parse(text).map_err(|e| Failure::input(format!("cannot parse `{text}`: {e}")))?;
    if !f.is_atomic_statement() {
        return Err(Failure::input(format!("`{text}` is not a trust or says statement")));
    }
    Ok(f)
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("output serializes")
}

fn render_tree(t: &ProofTree, depth: usize, out: &mut String) {
    let _ = write!(out, "{:indent$}{}  [{}]", "", t.conclusion, t.rule, indent = depth * 2);
    if !t.side_conditions.is_empty() {
        let sc: Vec<String> = t.side_conditions.iter().map(|c| c.to_form().to_string()).collect();
        let _ = write!(out, "  where {}", sc.join(", "));
    }
    out.push('\n');
    for p in &t.premises {
        render_tree(p, depth + 1, out);
    }
}

fn proof_of(result: &SaturationResult, f: &Form) -> Result<ProofTree, Failure> {
    result
        .proof(f)
        .ok_or_else(|| Failure(NOT_DERIVABLE, format!("not derivable: {f}")))
}

fn run(cli: Cli, out: &mut String) -> Result<u8, Failure> {
    match cli.command {
        Command::Saturate {
            store: args,
            all,
            proofs,
            format,
        } => {
            let result = saturate(&store(&args)?);
            let set = if all { result.resulta() } else { result.resultb() };
            for line in SaturationResult::sorted(set) {
                match format {
                    Format::Text => out.push_str(&line),
                    Format::Json => out.push_str(&json(&line)),
                }
                out.push('\n');
            }
            if let Some(path) = proofs {
                let mut text = String::new();
                for f in result.resulta() {
                    text.push_str(&json(&proof_of(&result, f)?));
                    text.push('\n');
                }
                fs::write(&path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            }
            Ok(OK)
        }
        Command::Query {
            statement,
            store: args,
            format,
        } => {
            let f = target(&statement)?;
            let result = saturate(&store(&args)?);
            let tree = proof_of(&result, &f)?;
            match format {
                Format::Json => {
                    out.push_str(&json(&tree));
                    out.push('\n');
                }
                Format::Text => render_tree(&tree, 0, out),
            }
            Ok(OK)
        }
        Command::Explain {
            statement,
            store: args,
            format,
        } => {
            let f = target(&statement)?;
            let result = saturate(&store(&args)?);
            let e = chains::explain(&result, &f).map_err(|e| match e {
                ChainError::NotDerived(_) => Failure(NOT_DERIVABLE, format!("not derivable: {f}")),
                other => Failure::input(other),
            })?;
            match (format, &e.condition) {
                (Format::Json, Condition::Delegation(chain)) => out.push_str(&json(chain)),
                (Format::Json, _) => out.push_str(&json(&e)),
                (Format::Text, Condition::Delegation(chain)) => {
                    let links: Vec<String> = chain
                        .links
                        .iter()
                        .map(|l| format!("({}, {}, {})", l.id.domain, l.id.onion, l.label))
                        .collect();
                    let _ = write!(out, "{}\nroot: {}", links.join(" -> "), chain.root);
                }
                (Format::Text, c) => {
                    let (p, k) = c.case();
                    let _ = write!(out, "{}\ncase {p}.{k}: {c:?}", e.target);
                }
            }
            out.push('\n');
            Ok(OK)
        }
        Command::CheckModel {
            model,
            random,
            seeds,
            worlds,
            names,
            depth,
        } => {
            let models: Vec<(Option<u64>, KripkeModel)> = if random {
                if worlds == 0 || names == 0 || depth == 0 {
                    return Err(Failure::input("model sizes must be at least 1"));
                }
                let sizes = ModelSizes {
                    worlds,
                    names,
                    label_depth: depth,
                };
                seeds.map(|s| (Some(s), random_model(s, sizes))).collect()
            } else {
                let path = model.expect("clap requires --model without --random");
                let text = fs::read_to_string(&path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
                let m = KripkeModel::from_json(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
                vec![(None, m)]
            };
            let mut bad = 0;
            for (seed, m) in &models {
                for c in check_axioms(m, AxiomBounds::default()) {
                    bad += 1;
                    let mut v = serde_json::to_value(&c).expect("serializes");
                    if let Some(s) = seed {
                        v["seed"] = (*s).into();
                    }
                    out.push_str(&v.to_string());
                    out.push('\n');
                }
            }
            Ok(if bad == 0 { OK } else { COUNTEREXAMPLES })
        }
        Command::Parse { statements, format } => {
            let lines: Vec<String> = if statements.is_empty() {
                io::stdin().lines().collect::<Result<_, _>>().map_err(Failure::input)?
            } else {
                statements
            };
            for (n, line) in lines.iter().enumerate() {
                let text = line.trim();
                if text.is_empty() || text.starts_with('#') {
                    continue;
                }
                let f = Form::parse(text).map_err(|e| Failure::input(format!("statement {}: {e}", n + 1)))?;
                match format {
                    Format::Text => out.push_str(&f.to_string()),
                    Format::Json => out.push_str(&json(&f.to_string())),
                }
                out.push('\n');
            }
            Ok(OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { BAD_INPUT } else { OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut out = String::new();
    let code = match run(cli, &mut out) {
        Ok(code) => code,
        Err(Failure(NOT_DERIVABLE, msg)) => {
            out.push_str(&msg);
            out.push('\n');
            NOT_DERIVABLE
        }
        Err(Failure(code, msg)) => {
            eprintln!("sattrust: {msg}");
            code
        }
    };
    let _ = io::stdout().write_all(out.as_bytes());
    ExitCode::from(code)
}
