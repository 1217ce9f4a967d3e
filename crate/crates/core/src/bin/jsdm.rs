use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use jsdm::channel::ArrayGeometry;
use jsdm::eval::{compare_modes, default_algorithms, run_sweep, Algorithm, EvalResult, Mode, Scenario};
use jsdm::io;

/// Joint spatial division and multiplexing simulator.
#[derive(Parser)]
#[command(name = "jsdm", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Override the master random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the number of Monte Carlo trials.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Override the retained-measure threshold of Greedy Algorithm 2.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Suppress informational output.
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file and print what it describes.
    Validate { scenario: PathBuf },
    /// Run user selection and print the chosen users and retained sets.
    Select {
        scenario: PathBuf,
        /// all, greedy1, greedy2, exhaustive-q1 or exhaustive-q2.
        #[arg(long)]
        algorithm: Option<String>,
    },
    /// Simulate the scenario's mode and algorithm over its grid.
    Sweep {
        scenario: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        algorithm: Option<String>,
    },
    /// Simulate every mode and algorithm on shared channel draws.
    Compare {
        scenario: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Comma-separated modes (default: all).
        #[arg(long)]
        modes: Option<String>,
        /// Comma-separated algorithms (default: greedy and, if small enough, exhaustive).
        #[arg(long)]
        algorithms: Option<String>,
    },
    /// Convert a multipath CSV into scenario `[[profiles]]` tables.
    ImportMpc {
        csv: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Array size used to validate the paths.
        #[arg(long, default_value_t = 64)]
        antennas: usize,
        /// Antenna spacing in wavelengths.
        #[arg(long, default_value_t = 0.5)]
        spacing: f64,
        /// Transmit power (dBm) the received powers were simulated with; sets each user's gain.
        #[arg(long)]
        reference_tx_dbm: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &PathBuf, g: &Global) -> jsdm::Result<(Scenario, Vec<String>)> {
    let (mut s, defaults) = io::load_scenario_verbose(path)?;
    if let Some(seed) = g.seed {
        s.config.seed = seed;
    }
    if let Some(t) = g.trials {
        s.config.trials = t;
    }
    if let Some(e) = g.epsilon {
        s.config.epsilon = e;
    }
    s.config.validate()?;
    Ok((s, defaults))
}

fn run(cli: Cli) -> jsdm::Result<()> {
    let g = &cli.global;
    let say = |msg: String| {
        if !g.quiet {
            println!("{msg}");
        }
    };
    match &cli.command {
        Command::Validate { scenario } => {
            let (s, defaults) = load(scenario, g)?;
            say(format!(
                "{}: M = {}, D = {}, {} profiles, {} users",
                s.name,
                s.geometry.antennas(),
                s.geometry.spacing(),
                s.profiles.len(),
                s.profiles.iter().map(|p| p.users).sum::<usize>()
            ));
            let c = &s.config;
            say(format!(
                "mode {}, algorithm {}, epsilon {}, {} grid points, {} trials, seed {}",
                c.mode,
                c.algorithm,
                c.epsilon,
                c.grid.values().len(),
                c.trials,
                c.seed
            ));
            for d in defaults {
                say(format!("default: {d}"));
            }
        }
        Command::Select {
            scenario,
            algorithm,
        } => {
            let (mut s, _) = load(scenario, g)?;
            if let Some(a) = algorithm {
                s.config.algorithm = a.parse()?;
            }
            let r = s.select()?;
            let ids: Vec<&str> = r.selected().iter().map(|&k| s.profiles[k].id.as_str()).collect();
            println!("selected: {}", ids.join(" "));
            for k in r.selected() {
                if let Some(j) = &r.retained[k] {
                    say(format!("  {}: retained {j} (measure {:.6})", s.profiles[k].id, j.measure()));
                }
            }
            say(format!("objective: {:.6}", r.objective));
        }
        Command::Sweep {
            scenario,
            output,
            mode,
            algorithm,
        } => {
            let (mut s, _) = load(scenario, g)?;
            if let Some(m) = mode {
                s.config.mode = m.parse()?;
            }
            if let Some(a) = algorithm {
                s.config.algorithm = a.parse()?;
            }
            let r = run_sweep(&s)?;
            io::export_results(std::slice::from_ref(&r), output)?;
            report(&[r], g.quiet);
        }
        Command::Compare {
            scenario,
            output,
            modes,
            algorithms,
        } => {
            let (s, _) = load(scenario, g)?;
            let modes: Vec<Mode> = match modes {
                Some(m) => io::parse_modes(m)?,
                None => Mode::ALL.to_vec(),
            };
            let algs: Vec<Algorithm> = match algorithms {
                Some(a) => io::parse_algorithms(a)?,
                None => default_algorithms(s.profiles.len()),
            };
            let rs = compare_modes(&s, &modes, &algs)?;
            io::export_results(&rs, output)?;
            report(&rs, g.quiet);
        }
        Command::ImportMpc {
            csv,
            output,
            antennas,
            spacing,
            reference_tx_dbm,
        } => {
            let geometry = ArrayGeometry::new(*antennas, *spacing)?;
            let profiles = io::import_mpc_csv_with_reference(csv, &geometry, *reference_tx_dbm)?;
            let text = io::profiles_to_toml(&profiles)?;
            std::fs::write(output, text).map_err(|source| jsdm::Error::Io {
                path: output.display().to_string(),
                source,
            })?;
            say(format!("imported {} users", profiles.len()));
        }
    }
    Ok(())
}

fn report(results: &[EvalResult], quiet: bool) {
    if quiet {
        return;
    }
    for r in results {
        let last = r.points.last();
        println!(
            "{:<18} {:<14} served {:>7.2}  rate at {} dB: {:.3} +/- {:.3}",
            r.mode.name(),
            r.algorithm.name(),
            last.map_or(0.0, |p| p.users_served_mean),
            last.map_or(0.0, |p| p.grid_db),
            last.map_or(0.0, |p| p.mean),
            last.map_or(0.0, |p| p.stderr),
        );
        if let Some(n) = &r.note {
            println!("  note: {n}");
        }
    }
}
