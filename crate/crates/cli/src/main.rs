//! `fpforest` command-line front end.
//!
//! Exit codes: 0 success, 1 a check failed, 2 bad configuration or input,
//! 3 a size or step budget was exceeded.

mod args;
mod run;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use fpforest::Error;
use serde_json::json;

use args::{Cli, Command, Format, SEED_ENV};
use run::{Failure, Output};

const EXIT_CHECK: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_BUDGET: u8 = 3;

fn resolve_seed(flag: Option<u64>, fallback: (u64, &'static str)) -> Result<(u64, &'static str), Failure> {
    if let Some(s) = flag {
        return Ok((s, "flag"));
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(|s| (s, "env"))
            .map_err(|_| Failure::Usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(fallback),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Forest(_) => "forest",
        Command::Paths(_) => "paths",
        Command::Mc(_) => "mc",
        Command::Limit(_) => "limit",
        Command::Compare(_) => "compare",
        Command::Tv(_) => "tv",
        Command::Verify(_) => "verify",
    }
}

fn execute(cli: &Cli) -> Result<Output, Failure> {
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(Failure::Usage("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    // `verify` reproduces the published run unless told otherwise.
    let fallback = match cli.command {
        Command::Verify(_) => (fpforest::verify::DEFAULT_SEED, "default"),
        _ => (rand::random::<u64>(), "generated"),
    };
    let (seed, source) = resolve_seed(cli.seed, fallback)?;
    eprintln!("seed: {seed} ({source})");
    let f = cli.format;
    match &cli.command {
        Command::Forest(a) => run::forest_cmd(a, f),
        Command::Paths(a) => run::paths_cmd(a, f),
        Command::Mc(a) => run::mc_cmd(a, seed, f),
        Command::Limit(a) => run::limit_cmd(a, seed, f),
        Command::Compare(a) => run::compare_cmd(a, seed, f),
        Command::Tv(a) => run::tv_cmd(a, f),
        Command::Verify(a) => run::verify_cmd(a, seed, f),
    }
    .map(|mut out| {
        if let serde_json::Value::Object(m) = &mut out.config {
            m.insert("seed".into(), json!(seed));
            m.insert("format".into(), json!(f));
        }
        out
    })
}

fn emit(cli: &Cli, out: &Output) -> std::io::Result<()> {
    let body = match (&out.text, cli.format) {
        (Some(text), Format::Csv | Format::Dot) => text.clone(),
        _ => {
            let envelope = json!({
                "command": command_name(&cli.command),
                "version": fpforest::VERSION,
                "seed": out.config.get("seed"),
                "config": out.config,
                "result": out.result,
                "pass": out.pass,
            });
            let mut s = serde_json::to_string_pretty(&envelope).expect("JSON values always serialize");
            s.push('\n');
            s
        }
    };
    match &cli.out {
        Some(path) => std::fs::write(path, body),
        None => std::io::stdout().lock().write_all(body.as_bytes()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(out) => {
            if let Err(e) = emit(&cli, &out) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(EXIT_CONFIG);
            }
            if out.pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("checks failed");
                ExitCode::from(EXIT_CHECK)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::BudgetExceeded { .. } | Error::SizeLimit { .. } => ExitCode::from(EXIT_BUDGET),
                _ => ExitCode::from(EXIT_CONFIG),
            }
        }
    }
}
