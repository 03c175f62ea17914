//! `qbc` — security analysis of two-party bit-commitment protocols.
//!
//! Subcommands produce machine-readable JSON reports that are byte-identical
//! for identical (config, seed) pairs. Every flag can also be set through an
//! environment variable with the `QBC_` prefix.
//!
//! Exit codes: 0 success, 2 invalid configuration or definition file,
//! 3 optimizer not converged, 4 security bound violated.

use clap::{Args, Parser, Subcommand};
use qbc_core::drivers::{
    run_lemmas, run_monster, run_nogo, run_nogo_parts, run_shredder, LemmasConfig, MonsterConfig,
    NogoConfig, NogoReport, ShredderConfig,
};
use qbc_core::numerics::Seed;
use qbc_core::protocol::ProtocolDef;
use qbc_core::report::F17;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_CONFIG: u8 = 2;
const EXIT_NON_CONVERGED: u8 = 3;
const EXIT_BOUND_VIOLATED: u8 = 4;

#[derive(Parser)]
#[command(name = "qbc", version, about = "Bit-commitment protocol security analyzer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Concealment bounds, cheat synthesis and cheat evaluation.
    Nogo(NogoArgs),
    /// The notarized shredder commitment: channel-independent cheat odds.
    Shredder(ShredderArgs),
    /// The decoherence-monster commitment: Choi bound, passive and general
    /// attacks, soundness, optional plain-norm separation.
    Monster(MonsterArgs),
    /// Distance-measure and truncation inequality batteries.
    Lemmas(LemmasArgs),
}

#[derive(Args)]
struct NogoArgs {
    /// Built-in instance: "bell" or "anon".
    #[arg(long, env = "QBC_INSTANCE")]
    instance: Option<String>,
    /// Protocol definition file (overrides --instance).
    #[arg(long, env = "QBC_DEF")]
    def: Option<PathBuf>,
    #[arg(long, env = "QBC_D", default_value_t = 2)]
    d: usize,
    #[arg(long, env = "QBC_LEAK", default_value_t = 0.0)]
    leak: f64,
    /// Mandatory for stochastic instances.
    #[arg(long, env = "QBC_SEED")]
    seed: Option<u64>,
    #[arg(long, env = "QBC_OUT")]
    out: Option<PathBuf>,
    /// Slack for the exit-code check δ̂ ≤ 2√(eps_upper) + tol.
    #[arg(long = "tol-bound", env = "QBC_TOL_BOUND", default_value_t = 1e-3)]
    tol_bound: f64,
}

#[derive(Args)]
struct ShredderArgs {
    #[arg(long, env = "QBC_D", default_value_t = 2)]
    d: usize,
    /// Number of random cheat channels.
    #[arg(long, env = "QBC_TRIALS", default_value_t = 20)]
    trials: usize,
    #[arg(long, env = "QBC_SEED")]
    seed: Option<u64>,
    #[arg(long, env = "QBC_OUT")]
    out: Option<PathBuf>,
    /// Tolerance on |success − 1/d|.
    #[arg(long = "tol-success", env = "QBC_TOL_SUCCESS", default_value_t = 1e-9)]
    tol_success: f64,
}

#[derive(Args)]
struct MonsterArgs {
    #[arg(long, env = "QBC_D", default_value_t = 8)]
    d: usize,
    #[arg(long, env = "QBC_MU", default_value_t = 2)]
    mu: usize,
    #[arg(long, env = "QBC_SEED")]
    seed: Option<u64>,
    /// Random general attacks to evaluate.
    #[arg(long = "attack-trials", env = "QBC_ATTACK_TRIALS", default_value_t = 20)]
    attack_trials: usize,
    /// Plain-norm estimation trials (0 skips the separation estimate).
    #[arg(long, env = "QBC_TRIALS", default_value_t = 0)]
    trials: usize,
    #[arg(long, env = "QBC_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LemmasArgs {
    #[arg(long, env = "QBC_TRIALS", default_value_t = 1000)]
    trials: usize,
    #[arg(long, env = "QBC_SEED")]
    seed: Option<u64>,
    #[arg(long, env = "QBC_OUT")]
    out: Option<PathBuf>,
}

fn emit(out: &Option<PathBuf>, json: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, json).map_err(|e| format!("writing {:?}: {}", path, e)),
        None => {
            println!("{}", json);
            Ok(())
        }
    }
}

fn require_seed(seed: Option<u64>, needed: bool, what: &str) -> Result<Seed, String> {
    match (seed, needed) {
        (Some(s), _) => Ok(Seed::new(s, 0)),
        (None, false) => Ok(Seed::new(0, 0)),
        (None, true) => Err(format!("--seed is mandatory for {}", what)),
    }
}

fn nogo_exit(report: &NogoReport) -> u8 {
    if !report.converged {
        return EXIT_NON_CONVERGED;
    }
    if !report.bound_check.passed {
        return EXIT_BOUND_VIOLATED;
    }
    EXIT_OK
}

fn cmd_nogo(args: NogoArgs) -> Result<u8, String> {
    let report = if let Some(path) = &args.def {
        let seed = require_seed(args.seed, false, "definition files")?;
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("reading definition file {:?}: {}", path, e))?;
        let def = ProtocolDef::from_json(&text)
            .map_err(|e| format!("parsing definition file {:?}: {}", path, e))?;
        let (tree, a0, a1, bobs, rho0, verifier) = def
            .to_parts()
            .map_err(|e| format!("definition file {:?}: {}", path, e))?;
        let config = NogoConfig {
            instance: format!("def:{}", def.name),
            d: args.d,
            leak: F17(args.leak),
            seed,
            tol_bound: F17(args.tol_bound),
        };
        run_nogo_parts(config, &tree, &a0, &a1, &bobs, &rho0, &verifier)
            .map_err(|e| e.to_string())?
    } else {
        let instance = args
            .instance
            .clone()
            .ok_or_else(|| "either --instance or --def is required".to_string())?;
        let seed = require_seed(args.seed, instance == "anon", "the anon instance")?;
        let config = NogoConfig {
            instance,
            d: args.d,
            leak: F17(args.leak),
            seed,
            tol_bound: F17(args.tol_bound),
        };
        run_nogo(config).map_err(|e| e.to_string())?
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    emit(&args.out, &json)?;
    Ok(nogo_exit(&report))
}

fn cmd_shredder(args: ShredderArgs) -> Result<u8, String> {
    let seed = require_seed(args.seed, true, "shredder trials")?;
    let report = run_shredder(ShredderConfig {
        d: args.d,
        trials: args.trials,
        seed,
        tol: F17(args.tol_success),
    })
    .map_err(|e| e.to_string())?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    emit(&args.out, &json)?;
    if !report.independence_check.passed || !report.marginal_check.passed {
        return Ok(EXIT_BOUND_VIOLATED);
    }
    Ok(EXIT_OK)
}

fn cmd_monster(args: MonsterArgs) -> Result<u8, String> {
    let seed = require_seed(args.seed, true, "monster instances")?;
    let report = run_monster(MonsterConfig {
        d: args.d,
        mu: args.mu,
        seed,
        attack_trials: args.attack_trials,
        norm_trials: args.trials,
    })
    .map_err(|e| e.to_string())?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    emit(&args.out, &json)?;
    let ok = report.choi_check.passed
        && report.passive.bound_holds
        && report.soundness_check.passed
        && report.attacks_check.passed;
    if !ok {
        return Ok(EXIT_BOUND_VIOLATED);
    }
    Ok(EXIT_OK)
}

fn cmd_lemmas(args: LemmasArgs) -> Result<u8, String> {
    let seed = require_seed(args.seed, true, "lemma batteries")?;
    let report =
        run_lemmas(LemmasConfig { trials: args.trials, seed }).map_err(|e| e.to_string())?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    emit(&args.out, &json)?;
    if report.batteries.iter().any(|b| b.violations > 0) {
        return Ok(EXIT_BOUND_VIOLATED);
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Nogo(args) => cmd_nogo(args),
        Command::Shredder(args) => cmd_shredder(args),
        Command::Monster(args) => cmd_monster(args),
        Command::Lemmas(args) => cmd_lemmas(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {}", msg);
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
