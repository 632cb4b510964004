//! `risqn`: success probabilities, fidelities, single solves and the
//! experiment families, written as CSV.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use risqn::network::Framework;
use risqn::scenario::{self, CandidateConfig, Command, ExperimentName, ExperimentOutput, ScenarioConfig};
use risqn::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(name = "risqn", version, about = "RIS-assisted FSO entanglement distribution: channel, noise and placement/rate optimization")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Per-user success probability for a fixed RIS position.
    Psucc(CandidateArgs),
    /// Per-user delivered fidelity for a fixed RIS position and rates.
    Fidelity(CandidateArgs),
    /// Full evaluation (rates, fidelity, fairness, constraints) of a candidate.
    Evaluate(CandidateArgs),
    /// Optimize RIS placement and rates with simulated annealing.
    Optimize(Common),
    /// Run an experiment family.
    Experiment {
        /// ris-placement | rate-comparison | fidelity-comparison |
        /// distance-fidelity-heatmap | scalability | psucc-sweep
        name: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Monte-Carlo repetitions.
    #[arg(long)]
    reps: Option<usize>,
    /// proposed | rate-max | log-rate-max | fa | ffa
    #[arg(long)]
    framework: Option<String>,
}

#[derive(Args)]
struct CandidateArgs {
    #[command(flatten)]
    common: Common,
    /// RIS position as x,y,h in meters.
    #[arg(long, value_delimiter = ',')]
    ris: Option<Vec<f64>>,
    /// Initial rates (pairs/s), one per user.
    #[arg(long, value_delimiter = ',')]
    rates: Option<Vec<f64>>,
}

fn load(common: &Common) -> Result<ScenarioConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = Some(seed);
    }
    if let Some(reps) = common.reps {
        cfg.reps = Some(reps);
    }
    if let Some(fw) = &common.framework {
        cfg.framework = fw.parse::<Framework>()?;
    }
    if let Some(out) = &common.out {
        cfg.output = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn with_candidate(args: &CandidateArgs) -> Result<ScenarioConfig, Error> {
    let mut cfg = load(&args.common)?;
    if args.ris.is_some() || args.rates.is_some() {
        let mut cand = cfg.candidate.take().unwrap_or(CandidateConfig {
            ris: [f64::NAN; 3],
            rates: Vec::new(),
        });
        if let Some(r) = &args.ris {
            let [x, y, h] = r[..] else {
                return Err(Error::Config("--ris takes exactly three values: x,y,h".into()));
            };
            cand.ris = [x, y, h];
        }
        if let Some(rates) = &args.rates {
            cand.rates = rates.clone();
        }
        if cand.ris.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("--rates needs an RIS position (--ris or [candidate])".into()));
        }
        cfg.candidate = Some(cand);
    }
    Ok(cfg)
}

fn execute(cmd: Cmd) -> Result<(ExperimentOutput, ScenarioConfig), Error> {
    let (cfg, kind) = match &cmd {
        Cmd::Psucc(a) => (with_candidate(a)?, Err(Command::Psucc)),
        Cmd::Fidelity(a) => (with_candidate(a)?, Err(Command::Fidelity)),
        Cmd::Evaluate(a) => (with_candidate(a)?, Err(Command::Evaluate)),
        Cmd::Optimize(c) => (load(c)?, Err(Command::Optimize)),
        Cmd::Experiment { name, common } => (load(common)?, Ok(name.parse::<ExperimentName>()?)),
    };
    let out = match kind {
        Ok(name) => scenario::run_experiment(name, &cfg)?,
        Err(command) => scenario::run_command(command, &cfg)?,
    };
    Ok((out, cfg))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::QuadratureNonConvergence { .. } => EXIT_NUMERIC,
        Error::Infeasible(_) => EXIT_INFEASIBLE,
        _ => EXIT_USAGE,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let (out, cfg) = match execute(cli.command) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let written = match &cfg.output {
        Some(path) => scenario::emit_csv(&out.table, path),
        None => out.table.write(std::io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    for g in &out.summary {
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.6e}"));
        eprintln!(
            "{:<28} param={:<6} framework={:<12} feasible={}/{} sum_rate={} wfi={} p_succ={} fidelity_violations={}",
            g.variant,
            g.param.map_or("-".into(), |p| p.to_string()),
            if g.framework.is_empty() { "-" } else { &g.framework },
            g.feasible_reps,
            g.reps,
            fmt(g.mean_sum_rate),
            fmt(g.mean_wfi),
            fmt(g.mean_p_succ),
            g.fidelity_violation_reps,
        );
    }
    if out.table.all_infeasible() {
        eprintln!("error: every repetition was infeasible");
        return ExitCode::from(EXIT_INFEASIBLE);
    }
    ExitCode::SUCCESS
}
