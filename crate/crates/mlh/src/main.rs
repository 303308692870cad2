//! `mlh`: command-line front end for manifest runs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use metallic_lightlike::harness::exec;
use metallic_lightlike::harness::{
    check_expectation, fixtures, generate_random_instance, run, Manifest, Mode, RunOptions,
    RunReport, Selection,
};
use metallic_lightlike::scalar::DEFAULT_TOL;
use metallic_lightlike::MlhError;

#[derive(Parser)]
#[command(name = "mlh", version, about = "Lightlike hypersurfaces of metallic semi-Riemannian manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(clap::Args)]
struct RunArgs {
    manifest: PathBuf,
    /// Comma-separated identity ids, `all` or `none`.
    #[arg(long)]
    identities: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Add wall-clock time to the report (breaks byte-identical output).
    #[arg(long)]
    timing: bool,
    /// Add B, C and τ at the first sample.
    #[arg(long)]
    dump: bool,
    /// Write the report to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Structure checks only.
    Check(RunArgs),
    /// Frame and classification, no identities.
    Classify(RunArgs),
    /// Full identity verification.
    Verify(RunArgs),
    /// List the fixtures, or run them against their expected outcomes.
    Fixtures {
        #[arg(long)]
        run: bool,
        /// Directory for one report per fixture.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Random lightlike hyperplane manifest.
    Random {
        #[arg(long)]
        p: i64,
        #[arg(long)]
        q: i64,
        #[arg(long)]
        dim: usize,
        /// Comma-separated signs, e.g. `-1,1,-1,1`.
        #[arg(long, allow_hyphen_values = true)]
        signature: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Verify the generated manifest instead of printing it.
        #[arg(long)]
        run: bool,
    },
}

fn default_tolerance() -> Result<f64, MlhError> {
    match std::env::var("MLH_TOL") {
        Ok(s) => s
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|t| *t >= 0.0)
            .ok_or_else(|| MlhError::Schema(format!("MLH_TOL={s:?} is not a tolerance"))),
        Err(_) => Ok(DEFAULT_TOL),
    }
}

fn error_json(e: &MlhError) -> String {
    serde_json::json!({
        "error": {"kind": e.kind(), "message": e.to_string(), "exit_code": e.exit_code()},
        "exit_code": e.exit_code(),
    })
    .to_string()
}

fn fail(e: MlhError) -> ExitCode {
    println!("{}", error_json(&e));
    ExitCode::from(e.exit_code() as u8)
}

/// Writes via a temporary file in the same directory, then renames.
fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("report")
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.write_all(b"\n")?;
        f.sync_all()?;
    }
    fs::rename(tmp, path)
}

fn render(report: &RunReport, format: Format) -> String {
    match format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    }
}

fn selection(s: &str) -> Selection {
    match s.trim() {
        "all" | "none" => Selection::Keyword(s.trim().to_string()),
        list => Selection::List(
            list.split(',')
                .map(|t| t.trim().to_string())
                .filter(|t| !t.is_empty())
                .collect(),
        ),
    }
}

fn run_manifest(mode: Mode, args: RunArgs) -> ExitCode {
    let default_tolerance = match default_tolerance() {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let src = match fs::read_to_string(&args.manifest) {
        Ok(s) => s,
        Err(e) => {
            return fail(MlhError::Schema(format!(
                "cannot read {}: {e}",
                args.manifest.display()
            )))
        }
    };
    let manifest = match Manifest::from_json(&src) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    let opts = RunOptions {
        mode,
        identities: args.identities.as_deref().map(selection),
        samples: args.samples,
        tolerance: args.tol,
        default_tolerance,
        seed: args.seed,
        timing: args.timing,
        dump: args.dump,
        sequential: false,
    };
    let report = run(&manifest, &opts);
    let text = render(&report, args.format);
    match &args.out {
        Some(path) => {
            if let Err(e) = write_atomic(path, &text) {
                eprintln!("cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => println!("{text}"),
    }
    ExitCode::from(report.exit_code as u8)
}

fn run_fixtures(execute: bool, out_dir: Option<PathBuf>, format: Format) -> ExitCode {
    let all = fixtures();
    if !execute {
        match format {
            Format::Json => {
                let list: Vec<serde_json::Value> = all
                    .iter()
                    .map(|m| serde_json::to_value(m).expect("manifest serializes"))
                    .collect();
                println!("{}", serde_json::to_string_pretty(&list).expect("json"));
            }
            Format::Text => {
                for m in &all {
                    println!(
                        "{:<24} {}",
                        m.name.as_deref().unwrap_or(""),
                        m.description.as_deref().unwrap_or("")
                    );
                }
            }
        }
        return ExitCode::SUCCESS;
    }
    let default_tolerance = match default_tolerance() {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let opts = RunOptions {
        default_tolerance,
        ..RunOptions::default()
    };
    let reports = exec::map_indexed(all.len(), |i| {
        let m = &all[i];
        let mode = if m.hypersurface.is_none() {
            Mode::Check
        } else {
            Mode::Verify
        };
        run(m, &RunOptions { mode, ..opts.clone() })
    });
    if let Some(dir) = &out_dir {
        if let Err(e) = fs::create_dir_all(dir) {
            eprintln!("cannot create {}: {e}", dir.display());
            return ExitCode::from(1);
        }
    }
    let mut mismatches = 0;
    let mut summary = Vec::new();
    for (m, report) in all.iter().zip(&reports) {
        let name = m.name.clone().unwrap_or_default();
        let verdict = check_expectation(m, report);
        if verdict.is_err() {
            mismatches += 1;
        }
        if let Some(dir) = &out_dir {
            let path = dir.join(format!("{name}.json"));
            if let Err(e) = write_atomic(&path, &report.to_json()) {
                eprintln!("cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        match format {
            Format::Text => println!(
                "{:<24} {:<24} exit {}  {}",
                name,
                format!("{:?}", report.outcome),
                report.exit_code,
                match &verdict {
                    Ok(()) => "as expected".to_string(),
                    Err(why) => format!("UNEXPECTED: {why}"),
                }
            ),
            Format::Json => summary.push(serde_json::json!({
                "name": name,
                "outcome": report.outcome,
                "exit_code": report.exit_code,
                "as_expected": verdict.is_ok(),
                "mismatch": verdict.err(),
            })),
        }
    }
    if matches!(format, Format::Json) {
        println!("{}", serde_json::to_string_pretty(&summary).expect("json"));
    }
    if mismatches == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn parse_signature(s: &str) -> Result<Vec<i8>, MlhError> {
    s.split(',')
        .map(|t| match t.trim() {
            "-1" | "-" => Ok(-1),
            "1" | "+1" | "+" => Ok(1),
            other => Err(MlhError::Schema(format!("signature entry {other:?}"))),
        })
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Check(a) => run_manifest(Mode::Check, a),
        Command::Classify(a) => run_manifest(Mode::Classify, a),
        Command::Verify(a) => run_manifest(Mode::Verify, a),
        Command::Fixtures {
            run,
            out_dir,
            format,
        } => run_fixtures(run, out_dir, format),
        Command::Random {
            p,
            q,
            dim,
            signature,
            seed,
            run: execute,
        } => {
            let sig = match parse_signature(&signature) {
                Ok(s) => s,
                Err(e) => return fail(e),
            };
            let m = match generate_random_instance(p, q, dim, &sig, seed) {
                Ok(m) => m,
                Err(e) => return fail(e),
            };
            if execute {
                let default_tolerance = match default_tolerance() {
                    Ok(t) => t,
                    Err(e) => return fail(e),
                };
                let report = run(
                    &m,
                    &RunOptions {
                        default_tolerance,
                        ..RunOptions::default()
                    },
                );
                println!("{}", report.to_json());
                ExitCode::from(report.exit_code as u8)
            } else {
                println!("{}", m.to_json());
                ExitCode::SUCCESS
            }
        }
    }
}
