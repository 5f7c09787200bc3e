//! Single entry point for the toolkit: every library operation as a
//! subcommand, with plain or line-delimited JSON output, explicit resource
//! caps, and checkpoint files for the long-running streams.
//!
//! Exit codes: 0 success, 2 usage error, 3 budget exhausted, 4 resource cap
//! exceeded, 5 malformed input file or expression.

mod checkpoint;

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde_json::json;

use enbound::{
    chi_lower_bound, count_equivalence, decode_system, decode_tuple, encode_system, encode_tuple,
    f_certify, g_value, minimal_solving_code, pad_system, phi, system_from_text, system_to_text,
    xi_run, ChiMode, Error as CoreError, FStream, GMode, GStream, MinimalCodeOutcome, Polynomial,
    SearchEvent, SearchLimits, Tuple, XiConfig,
};

use checkpoint::{fnv1a, Checkpoint};

const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_CAP: u8 = 4;
const EXIT_BAD_FILE: u8 = 5;

#[derive(Parser)]
#[command(
    name = "enbound",
    version,
    about = "Bounded-witness searches and integer codings over E_n equation systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum ModeArg {
    Naive,
    Optimized,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum ChiModeArg {
    Signature,
    Subsets,
}

#[derive(Subcommand)]
enum Command {
    /// Compute g(n, m): the smallest b such that every tuple in
    /// {0,...,m-1}^n has a duplicate in {0,...,b}^n.
    G {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: u64,
        #[arg(long, value_enum, default_value = "optimized")]
        mode: ModeArg,
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long, default_value_t = 1)]
        parallelism: usize,
        #[arg(long)]
        json: bool,
    },
    /// Stream g(n, m) for m = 1, 2, 3, ... (one value per line, flushed as
    /// produced).
    GStream {
        #[arg(long)]
        n: u32,
        /// Stop after iteration m = MAX_M; omit to run until killed.
        #[arg(long)]
        max_m: Option<u64>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long, default_value_t = 1)]
        parallelism: usize,
        #[arg(long)]
        json: bool,
    },
    /// Stream the increasing approximations of f(n): emit g(n, m) whenever
    /// it equals m - 1.
    FStream {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        max_m: u64,
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Certify f(n) over the box {0,...,box-1}^n (exact for n = 1, a
    /// box-limited lower bound otherwise).
    FCertify {
        #[arg(long)]
        n: u32,
        #[arg(long = "box")]
        box_m: u64,
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long, default_value_t = 1)]
        parallelism: usize,
        #[arg(long)]
        json: bool,
    },
    /// Compute phi(n, l) = g(n + 1, l + 1).
    Phi {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        l: u64,
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Decode a system code: exponent blocks of 210 * (n + 1).
    DecodeSystem {
        #[arg(long, value_parser = parse_biguint)]
        n: BigUint,
        #[arg(long)]
        json: bool,
    },
    /// Encode a system file as the smallest integer decoding to it.
    EncodeSystem {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Decode a tuple code: exponents-minus-one of the primes dividing m.
    DecodeTuple {
        #[arg(long, value_parser = parse_biguint)]
        m: BigUint,
        #[arg(long)]
        json: bool,
    },
    /// Encode a tuple as the smallest integer decoding to it.
    EncodeTuple {
        /// Tuple entries, e.g. `encode-tuple 0 1 0`.
        #[arg(required = true)]
        values: Vec<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Witness search for a system code: emits 0 immediately, then the
    /// witness bound if a solving tuple code is found within the budget.
    Xi {
        #[arg(long, value_parser = parse_biguint)]
        n: BigUint,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        budget: u64,
        #[arg(long)]
        normalized: bool,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        parallelism: usize,
        /// Report progress every PROGRESS tested codes.
        #[arg(long)]
        progress: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Box-limited lower-bound estimate of the unique-solution bound.
    ChiLb {
        #[arg(long)]
        n: u32,
        #[arg(long = "box")]
        box_bound: u64,
        #[arg(long, value_enum, default_value = "signature")]
        mode: ChiModeArg,
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Compile an integer polynomial into a solution-count-preserving
    /// system.
    CompilePoly {
        #[arg(long)]
        expr: String,
        /// Write the compiled system (text format) to this path.
        #[arg(long)]
        emit_system: Option<PathBuf>,
        /// Verify count equivalence over {0,...,B-1}^p.
        #[arg(long)]
        check_box: Option<u64>,
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Search for the smallest tuple code solving a system file, by direct
    /// construction.
    MinCode {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, default_value_t = 8)]
        value_bound: u64,
        #[arg(long, default_value_t = 1_000_000)]
        assignment_cap: u64,
        #[arg(long)]
        json: bool,
    },
    /// Pad a system file out to n variables so every solution has x_1 = n.
    PadSystem {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        json: bool,
    },
}

fn parse_biguint(s: &str) -> Result<BigUint, String> {
    s.parse()
        .map_err(|_| format!("`{s}` is not a non-negative integer"))
}

enum AppError {
    Core(CoreError),
    File(PathBuf, io::Error),
    Checkpoint(String),
}

impl From<CoreError> for AppError {
    fn from(e: CoreError) -> Self {
        AppError::Core(e)
    }
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Core(CoreError::InvalidInput(_)) => EXIT_USAGE,
            AppError::Core(CoreError::ResourceCap { .. }) => EXIT_CAP,
            AppError::Core(CoreError::Parse(_)) => EXIT_BAD_FILE,
            AppError::File(..) => EXIT_BAD_FILE,
            AppError::Checkpoint(_) => EXIT_USAGE,
        }
    }

    fn message(&self) -> String {
        match self {
            AppError::Core(e) => e.to_string(),
            AppError::File(path, e) => format!("{}: {e}", path.display()),
            AppError::Checkpoint(msg) => format!("checkpoint: {msg}"),
        }
    }
}

struct Out {
    json: bool,
}

impl Out {
    fn new(json: bool) -> Out {
        Out { json }
    }

    /// One output record, flushed immediately.
    fn line(&self, plain: &str, record: serde_json::Value) {
        let mut stdout = io::stdout().lock();
        if self.json {
            let _ = writeln!(stdout, "{record}");
        } else {
            let _ = writeln!(stdout, "{plain}");
        }
        let _ = stdout.flush();
    }
}

fn limits_from(cap: Option<u64>, parallelism: usize) -> SearchLimits {
    let mut limits = match cap {
        Some(cap) => SearchLimits::with_cap(cap),
        None => SearchLimits::default(),
    };
    limits.parallelism = parallelism.max(1);
    limits
}

fn read_system(path: &Path) -> Result<enbound::EnSystem, AppError> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::File(path.to_path_buf(), e))?;
    Ok(system_from_text(&text)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(command: Command) -> Result<ExitCode, AppError> {
    match command {
        Command::G {
            n,
            m,
            mode,
            cap,
            parallelism,
            json,
        } => {
            let limits = limits_from(cap, parallelism);
            let mode = match mode {
                ModeArg::Naive => GMode::Naive,
                ModeArg::Optimized => GMode::Optimized,
            };
            let value = g_value(n, m, mode, &limits)?;
            Out::new(json).line(
                &value.to_string(),
                json!({"op": "g", "n": n, "m": m, "value": value}),
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::GStream {
            n,
            max_m,
            checkpoint,
            cap,
            parallelism,
            json,
        } => run_g_stream(n, max_m, checkpoint, limits_from(cap, parallelism), json),

        Command::FStream {
            n,
            max_m,
            cap,
            json,
        } => {
            let out = Out::new(json);
            let mut stream = FStream::new(n, limits_from(cap, 1));
            while stream.next_m() <= max_m {
                let step = stream.step()?;
                if step.emitted {
                    out.line(
                        &step.g.to_string(),
                        json!({"op": "f-emit", "n": n, "m": step.m, "value": step.g}),
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::FCertify {
            n,
            box_m,
            cap,
            parallelism,
            json,
        } => {
            let cert = f_certify(n, box_m, &limits_from(cap, parallelism))?;
            Out::new(json).line(
                &cert.f_value.to_string(),
                json!({
                    "op": "f-certify",
                    "n": cert.n,
                    "box": cert.verified_box,
                    "f_value": cert.f_value,
                    "exact": cert.exact,
                }),
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::Phi { n, l, cap, json } => {
            let value = phi(n, l, &limits_from(cap, 1))?;
            Out::new(json).line(
                &value.to_string(),
                json!({"op": "phi", "n": n, "l": l, "value": value}),
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::DecodeSystem { n, json } => {
            let system = decode_system(&n)?;
            let out = Out::new(json);
            if json {
                let eqs: Vec<String> = system.equations().map(|e| e.to_string()).collect();
                out.line(
                    "",
                    json!({
                        "op": "decode-system",
                        "n": n.to_string(),
                        "variables": system.n(),
                        "system": eqs,
                    }),
                );
            } else {
                print!("{}", system_to_text(&system));
                let _ = io::stdout().flush();
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::EncodeSystem { file, json } => {
            let system = read_system(&file)?;
            let code = encode_system(&system)?;
            Out::new(json).line(
                &code.to_string(),
                json!({"op": "encode-system", "n": code.to_string()}),
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::DecodeTuple { m, json } => {
            let tuple = decode_tuple(&m)?;
            Out::new(json).line(
                &tuple.to_string(),
                json!({
                    "op": "decode-tuple",
                    "m": m.to_string(),
                    "tuple": tuple.values().iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                }),
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::EncodeTuple { values, json } => {
            if let Some(v) = values.iter().find(|&&v| v > 1_000_000) {
                return Err(AppError::Core(CoreError::InvalidInput(format!(
                    "entry {v} would need a code of more than 2^{v} bits"
                ))));
            }
            let tuple = Tuple::from_u64s(&values);
            let code = encode_tuple(&tuple);
            Out::new(json).line(
                &code.to_string(),
                json!({"op": "encode-tuple", "m": code.to_string()}),
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::Xi {
            n,
            budget,
            normalized,
            checkpoint,
            parallelism,
            progress,
            json,
        } => run_xi(
            n,
            budget,
            normalized,
            checkpoint,
            parallelism,
            progress,
            json,
        ),

        Command::ChiLb {
            n,
            box_bound,
            mode,
            cap,
            json,
        } => {
            let mode = match mode {
                ChiModeArg::Signature => ChiMode::Signature,
                ChiModeArg::Subsets => ChiMode::ExhaustiveSubsets,
            };
            let estimate = chi_lower_bound(n, box_bound, mode, &limits_from(cap, 1))?;
            let candidates: Vec<serde_json::Value> = estimate
                .candidates
                .iter()
                .map(|c| {
                    json!({
                        "solution": c.solution.values().iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                        "witness_bound": c.witness_bound,
                    })
                })
                .collect();
            Out::new(json).line(
                &estimate.value.to_string(),
                json!({
                    "op": "chi-lb",
                    "n": estimate.n,
                    "box": estimate.box_bound,
                    "value": estimate.value,
                    "candidates": candidates,
                }),
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::CompilePoly {
            expr,
            emit_system,
            check_box,
            cap,
            json,
        } => run_compile_poly(&expr, emit_system, check_box, limits_from(cap, 1), json),

        Command::MinCode {
            file,
            value_bound,
            assignment_cap,
            json,
        } => {
            let system = read_system(&file)?;
            let outcome = minimal_solving_code(&system, value_bound, assignment_cap)?;
            let out = Out::new(json);
            match outcome {
                MinimalCodeOutcome::Found {
                    code,
                    witness,
                    certified_minimal,
                } => {
                    out.line(
                        &code.to_string(),
                        json!({
                            "op": "min-code",
                            "code": code.to_string(),
                            "witness": witness.values().iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                            "certified_minimal": certified_minimal,
                        }),
                    );
                    Ok(ExitCode::SUCCESS)
                }
                MinimalCodeOutcome::NoSolutionWithin { value_bound } => {
                    eprintln!("no witness with entries <= {value_bound}");
                    Ok(ExitCode::from(EXIT_BUDGET))
                }
                MinimalCodeOutcome::Exhausted { tested } => {
                    eprintln!("assignment budget exhausted after {tested} candidates");
                    Ok(ExitCode::from(EXIT_BUDGET))
                }
            }
        }

        Command::PadSystem { file, n, json } => {
            let phi_system = read_system(&file)?;
            let padded = pad_system(&phi_system, n)?;
            let out = Out::new(json);
            if json {
                let eqs: Vec<String> = padded.equations().map(|e| e.to_string()).collect();
                out.line(
                    "",
                    json!({"op": "pad-system", "variables": padded.n(), "system": eqs}),
                );
            } else {
                print!("{}", system_to_text(&padded));
                let _ = io::stdout().flush();
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run_g_stream(
    n: u32,
    max_m: Option<u64>,
    checkpoint_path: Option<PathBuf>,
    limits: SearchLimits,
    json: bool,
) -> Result<ExitCode, AppError> {
    let out = Out::new(json);
    let (mut stream, mut digest) = match &checkpoint_path {
        Some(path) => match Checkpoint::load(path).map_err(|e| AppError::File(path.clone(), e))? {
            Some(Checkpoint::GStream {
                n: cp_n,
                next_m,
                digest,
            }) => {
                if cp_n != n {
                    return Err(AppError::Checkpoint(format!(
                        "file is for n = {cp_n}, requested n = {n}"
                    )));
                }
                (GStream::resume(n, next_m, limits)?, digest)
            }
            Some(_) => {
                return Err(AppError::Checkpoint(
                    "file belongs to a different subcommand".into(),
                ))
            }
            None => (GStream::new(n, limits), 0),
        },
        None => (GStream::new(n, limits), 0),
    };

    loop {
        if let Some(max) = max_m {
            if stream.next_m() > max {
                return Ok(ExitCode::SUCCESS);
            }
        }
        let approx = stream.next().expect("stream is unbounded")?;
        let plain = approx.value.to_string();
        out.line(
            &plain,
            json!({"op": "g", "n": approx.n, "m": approx.m, "value": approx.value}),
        );
        digest = fnv1a(digest, &plain);
        if let Some(path) = &checkpoint_path {
            Checkpoint::GStream {
                n,
                next_m: stream.next_m(),
                digest,
            }
            .save(path)
            .map_err(|e| AppError::File(path.clone(), e))?;
        }
    }
}

fn run_xi(
    n: BigUint,
    budget: u64,
    normalized: bool,
    checkpoint_path: Option<PathBuf>,
    parallelism: usize,
    progress: Option<u64>,
    json: bool,
) -> Result<ExitCode, AppError> {
    let out = Out::new(json);

    let mut config = XiConfig::new(budget)
        .normalized(normalized)
        .parallelism(parallelism);
    // Checkpoints need periodic wake-ups even when the user asked for no
    // progress output.
    config.progress_every = match (progress, &checkpoint_path) {
        (Some(k), _) => Some(k.max(1)),
        (None, Some(_)) => Some(1_000),
        (None, None) => None,
    };

    let mut digest = 0u64;
    if let Some(path) = &checkpoint_path {
        if let Some(cp) = Checkpoint::load(path).map_err(|e| AppError::File(path.clone(), e))? {
            match cp {
                Checkpoint::Xi {
                    n: cp_n,
                    normalized: cp_norm,
                    zero_emitted,
                    next_m,
                    digest: cp_digest,
                } => {
                    if cp_n != n || cp_norm != normalized {
                        return Err(AppError::Checkpoint("file records different inputs".into()));
                    }
                    config.start_m = next_m;
                    config.emit_initial_zero = !zero_emitted;
                    digest = cp_digest;
                }
                _ => {
                    return Err(AppError::Checkpoint(
                        "file belongs to a different subcommand".into(),
                    ))
                }
            }
        }
    }

    let save = |next_m: u64, digest: u64| -> Result<(), AppError> {
        if let Some(path) = &checkpoint_path {
            Checkpoint::Xi {
                n: n.clone(),
                normalized,
                zero_emitted: true,
                next_m,
                digest,
            }
            .save(path)
            .map_err(|e| AppError::File(path.clone(), e))?;
        }
        Ok(())
    };

    for event in xi_run(&n, config) {
        match event? {
            SearchEvent::InitialZero => {
                out.line("0", json!({"event": "initial_zero"}));
                digest = fnv1a(digest, "0");
                save(2, digest)?;
            }
            SearchEvent::Tested {
                m,
                iterations_so_far,
            } => {
                if progress.is_some() {
                    if json {
                        out.line(
                            "",
                            json!({"event": "tested", "m": m, "iterations_so_far": iterations_so_far}),
                        );
                    } else {
                        eprintln!("tested through m = {m} ({iterations_so_far} iterations)");
                    }
                }
                save(m + 1, digest)?;
            }
            SearchEvent::Found {
                value,
                solving_m,
                iterations,
            } => {
                let plain = value.to_string();
                out.line(
                    &plain,
                    json!({
                        "event": "found",
                        "value": value,
                        "solving_m": solving_m,
                        "iterations": iterations,
                    }),
                );
                if let Some(path) = &checkpoint_path {
                    let _ = std::fs::remove_file(path); // run is complete
                }
                return Ok(ExitCode::SUCCESS);
            }
            SearchEvent::BudgetExhausted { last_m } => {
                if json {
                    out.line("", json!({"event": "budget_exhausted", "last_m": last_m}));
                } else {
                    eprintln!("budget exhausted after testing through m = {last_m}");
                }
                save(last_m + 1, digest)?;
                return Ok(ExitCode::from(EXIT_BUDGET));
            }
        }
    }
    unreachable!("the search always ends with a terminal event");
}

fn run_compile_poly(
    expr: &str,
    emit_system: Option<PathBuf>,
    check_box: Option<u64>,
    limits: SearchLimits,
    json: bool,
) -> Result<ExitCode, AppError> {
    let poly = Polynomial::parse(expr)?;
    let compiled = enbound::compile(&poly)?;

    if let Some(path) = &emit_system {
        std::fs::write(path, system_to_text(&compiled.system))
            .map_err(|e| AppError::File(path.clone(), e))?;
    }

    let mut record = json!({
        "op": "compile-poly",
        "p": compiled.p,
        "n": compiled.n,
        "equations": compiled.system.len(),
        "witness_steps": compiled.witness_program.len(),
    });
    let mut plain = format!(
        "p = {}\nn = {}\nequations = {}\nwitness steps = {}",
        compiled.p,
        compiled.n,
        compiled.system.len(),
        compiled.witness_program.len()
    );

    if let Some(box_bound) = check_box {
        let equivalent = count_equivalence(&poly, box_bound, &limits)?;
        let roots = count_roots(&poly, box_bound)?;
        record["check_box"] = json!(box_bound);
        record["equivalent"] = json!(equivalent);
        record["solutions"] = json!(roots);
        plain.push_str(&format!(
            "\ncheck-box {box_bound}: {} ({roots} solutions)",
            if equivalent { "equivalent" } else { "MISMATCH" }
        ));
        Out::new(json).line(&plain, record);
        return Ok(if equivalent {
            ExitCode::SUCCESS
        } else {
            ExitCode::FAILURE
        });
    }

    Out::new(json).line(&plain, record);
    Ok(ExitCode::SUCCESS)
}

fn count_roots(poly: &Polynomial, box_bound: u64) -> Result<u64, AppError> {
    let zero = num_bigint::BigInt::from(0u32);
    let p = poly.var_count() as usize;
    let mut point = vec![0u64; p];
    let mut roots = 0u64;
    'outer: loop {
        let coords: Vec<BigUint> = point.iter().map(|&v| BigUint::from(v)).collect();
        if poly.eval_nat(&coords)? == zero {
            roots += 1;
        }
        for i in (0..p).rev() {
            point[i] += 1;
            if point[i] < box_bound {
                continue 'outer;
            }
            point[i] = 0;
        }
        break;
    }
    Ok(roots)
}
