use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use quotient_metric::runner::{run, RunConfig, EXIT_CONFIG};

#[derive(Parser)]
#[command(name = "quotient-metric", version, about = "Induced Hausdorff metrics and Finsler norms on quotients of group actions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one operation on a scenario and emit a table.
    Run(RunArgs),
    /// List the scenario identifiers.
    Scenarios,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario identifier (or --scenario).
    scenario_pos: Option<String>,
    /// distance, finsler-norm, finsler-sweep, intrinsic, length, or checks (or --op).
    op_pos: Option<String>,

    /// Flat key=value file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    op: Option<String>,
    /// Number of directions in a sweep.
    #[arg(long)]
    steps: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    /// Torus grid side or number of sphere-cap rings.
    #[arg(long = "grid-n")]
    grid_n: Option<String>,
    #[arg(long = "cap-radius")]
    cap_radius: Option<String>,
    #[arg(long = "ladder-t0")]
    ladder_t0: Option<String>,
    #[arg(long = "ladder-ratio")]
    ladder_ratio: Option<String>,
    #[arg(long = "ladder-depth")]
    ladder_depth: Option<String>,
    /// Group parameters, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    from: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    to: Option<String>,
    /// Lie algebra direction, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    v: Option<String>,
    #[arg(long = "t-start", allow_hyphen_values = true)]
    t_start: Option<String>,
    #[arg(long = "t-end", allow_hyphen_values = true)]
    t_end: Option<String>,
    #[arg(long)]
    refinements: Option<String>,
    #[arg(long)]
    knots: Option<String>,
    #[arg(long = "max-evals")]
    max_evals: Option<String>,
    /// Random samples per property in `checks`.
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Output file; the table goes to stdout when absent.
    #[arg(long)]
    out: Option<String>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
}

impl RunArgs {
    fn settings(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("scenario", &self.scenario_pos),
            ("op", &self.op_pos),
            ("scenario", &self.scenario),
            ("op", &self.op),
            ("steps", &self.steps),
            ("a", &self.a),
            ("b", &self.b),
            ("grid-n", &self.grid_n),
            ("cap-radius", &self.cap_radius),
            ("ladder-t0", &self.ladder_t0),
            ("ladder-ratio", &self.ladder_ratio),
            ("ladder-depth", &self.ladder_depth),
            ("from", &self.from),
            ("to", &self.to),
            ("v", &self.v),
            ("t-start", &self.t_start),
            ("t-end", &self.t_end),
            ("refinements", &self.refinements),
            ("knots", &self.knots),
            ("max-evals", &self.max_evals),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("out", &self.out),
            ("format", &self.format),
        ]
    }

    fn config(&self) -> quotient_metric::Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        for (key, value) in self.settings() {
            if let Some(v) = value {
                cfg.apply_kv(key, v)?;
            }
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = match cli.command {
        Command::Scenarios => {
            for name in quotient_metric::catalog::SCENARIO_NAMES {
                println!("{name}");
            }
            return ExitCode::SUCCESS;
        }
        Command::Run(args) => args,
    };
    let cfg = match args.config() {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    match run(&cfg) {
        Ok(outcome) => {
            if cfg.out.is_none() {
                match outcome.table.render(cfg.format) {
                    Ok(text) => print!("{text}"),
                    Err(e) => {
                        eprintln!("{e}");
                        return ExitCode::from(1);
                    }
                }
            }
            if !outcome.passed {
                eprintln!("one or more tolerances were not met");
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
