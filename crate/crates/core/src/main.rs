use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use bosent::blocks::BLOCK_TOL;
use bosent::entanglement::{analyze, schmidt};
use bosent::error::{Error, Result};
use bosent::fock::{BasisTable, Bipartition, DEFAULT_DIM_CAP};
use bosent::geometry::{bipartition_sweep, border_probe, default_eps_grid, werner_grid, werner_scan};
use bosent::io::{parse_state, parse_unitary, state_to_json, State};
use bosent::modes::{balanced_beamsplitter, transform_pure, transform_state, ModeUnitary};
use bosent::robustness::{self, rg_bounds, robustness_superselection, Kind, Options};
use bosent::selfcheck;
use bosent::states::{
    anticoherent_mixture, maximally_entangled, phase_state, superselection_mixture, totally_mixed, werner_like,
};

const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "bosent", version, about = "Bipartite entanglement of N bosons in M modes")]
struct Cli {
    /// Largest Hilbert-space dimension to enumerate.
    #[arg(long, global = true, default_value_t = DEFAULT_DIM_CAP)]
    cap: usize,
    /// Output format; tables default to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct BasisArgs {
    /// Particle number N.
    #[arg(long)]
    n: usize,
    /// Mode count M.
    #[arg(long, default_value_t = 2)]
    modes: usize,
    /// Modes in the first partition, m.
    #[arg(long, default_value_t = 1)]
    bipartition: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    TotallyMixed,
    Phase,
    Anticoherent,
    MaxEnt,
    Werner,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the Fock basis of a bipartition.
    Basis(BasisArgs),
    /// Write a named state as a state file.
    State {
        preset: Preset,
        #[command(flatten)]
        basis: BasisArgs,
        /// Mixing parameter of the werner preset.
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Comma-separated phases φ_0..φ_N of the phase preset (default all zero).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        phases: Option<Vec<f64>>,
    },
    /// Negativity, separability verdict, reduced state and block structure.
    Analyze {
        file: PathBuf,
        /// Block-diagonality threshold.
        #[arg(long, default_value_t = BLOCK_TOL)]
        tol: f64,
    },
    /// Robustness of entanglement.
    Robustness {
        file: PathBuf,
        #[arg(long)]
        generalized: bool,
        /// Report the upper bounds on the generalized robustness.
        #[arg(long)]
        bounds: bool,
        #[arg(long)]
        emit_witness: bool,
        /// Block-diagonality threshold.
        #[arg(long, default_value_t = BLOCK_TOL)]
        tol: f64,
    },
    /// Apply a passive mode transformation.
    Transform {
        file: PathBuf,
        #[arg(long, conflicts_with = "unitary", required_unless_present = "unitary")]
        beamsplitter: bool,
        #[arg(long)]
        unitary: Option<PathBuf>,
    },
    /// Parameter scans.
    Scan {
        #[command(subcommand)]
        scan: Scan,
    },
    /// Perturbation probes.
    Probe {
        #[command(subcommand)]
        probe: Probe,
    },
    /// Separability under sampled mode unitaries.
    Sweep {
        file: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = BLOCK_TOL)]
        tol: f64,
    },
    /// Run the golden-value suite.
    Selfcheck,
}

#[derive(Subcommand)]
enum Scan {
    /// Two-mode Werner-like family p|ψ⟩⟨ψ| + (1-p) I/D.
    Werner {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 13)]
        steps: usize,
        #[arg(long, default_value_t = BLOCK_TOL)]
        tol: f64,
    },
}

#[derive(Subcommand)]
enum Probe {
    /// (ρ_sep + ε ρ_ent) / (1 + ε) over a grid of ε.
    Border {
        sep: PathBuf,
        ent: PathBuf,
        /// Comma-separated ε values (default 1e-1..1e-8).
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        #[arg(long, default_value_t = BLOCK_TOL)]
        tol: f64,
    },
}

enum Output {
    Json(Value),
    Text(String),
    /// Printed, then exit with 1 if `false`.
    Check(String, bool),
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn name<T: Serialize>(v: &T) -> String {
    match to_json(v) {
        Value::String(s) => s,
        other => other.to_string(),
    }
}

fn csv<T, F>(header: &str, rows: &[T], line: F) -> String
where
    F: Fn(&T) -> String,
{
    let mut out = String::new();
    writeln!(out, "{header}").unwrap();
    for r in rows {
        writeln!(out, "{}", line(r)).unwrap();
    }
    out
}

fn basis(args: &BasisArgs, cap: usize) -> Result<Arc<BasisTable>> {
    Ok(Arc::new(BasisTable::enumerate_capped(Bipartition::new(args.n, args.modes, args.bipartition)?, cap)?))
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

fn no_csv(format: Option<Format>) -> std::result::Result<(), Failure> {
    if format == Some(Format::Csv) {
        return Err(Failure::Usage("csv output is only available for basis, scan, probe, sweep".into()));
    }
    Ok(())
}

fn run(cli: Cli) -> std::result::Result<Output, Failure> {
    let cap = cli.cap;
    let format = cli.format;
    match cli.command {
        Command::Basis(args) => {
            let b = basis(&args, cap)?;
            if format == Some(Format::Csv) {
                let rows: Vec<usize> = (0..b.dim()).collect();
                return Ok(Output::Text(csv("index,k,sigma,sigma_prime,occupation", &rows, |&i| {
                    let l = b.label(i).expect("in range");
                    let occ: Vec<String> = b.occupation(i).iter().map(u32::to_string).collect();
                    format!("{i},{},{},{},{}", l.k, l.sigma, l.sigma_prime, occ.join(" "))
                })));
            }
            Ok(Output::Json(b.to_json()))
        }
        Command::State { preset, basis: args, p, phases } => {
            no_csv(format)?;
            let b = basis(&args, cap)?;
            let state = match preset {
                Preset::TotallyMixed => State::Density(totally_mixed(b)),
                Preset::Phase => {
                    let phases = phases.unwrap_or_else(|| vec![0.0; args.n + 1]);
                    State::Pure(phase_state(b, &phases)?)
                }
                Preset::Anticoherent => State::Density(anticoherent_mixture(b)?),
                Preset::MaxEnt => State::Pure(maximally_entangled(b)),
                Preset::Werner => State::Density(werner_like(p, &maximally_entangled(b))?),
            };
            Ok(Output::Json(state_to_json(&state)))
        }
        Command::Analyze { file, tol } => {
            no_csv(format)?;
            let analyze_one = |rho: &bosent::states::DensityMatrix| analyze(rho, tol).map(|r| to_json(&r));
            match parse_state(&file, cap)? {
                State::Sectored(mix) => {
                    let mut parts = Vec::new();
                    for (w, rho) in mix.components() {
                        parts.push(json!({"weight": w, "N": rho.basis().particles(), "report": analyze_one(rho)?}));
                    }
                    Ok(Output::Json(json!({ "components": parts })))
                }
                State::Pure(psi) => {
                    let mut report = analyze_one(&psi.to_density())?;
                    report["schmidt"] = to_json(&schmidt(&psi).blocks);
                    Ok(Output::Json(report))
                }
                State::Density(rho) => Ok(Output::Json(analyze_one(&rho)?)),
            }
        }
        Command::Robustness { file, generalized, bounds, emit_witness, tol } => {
            no_csv(format)?;
            let kind = if generalized { Kind::Generalized } else { Kind::Standard };
            let opts = Options { block_tol: tol, emit_witness, ..Options::default() };
            let report = match parse_state(&file, cap)? {
                State::Sectored(mix) => robustness_superselection(&mix, kind, &opts)?,
                st => {
                    let rho = st.density()?;
                    let mut r = robustness::robustness(&rho, kind, &opts)?;
                    r.bounds = if bounds { Some(rg_bounds(&rho, opts.settings)?) } else { None };
                    r
                }
            };
            Ok(Output::Json(to_json(&report)))
        }
        Command::Transform { file, beamsplitter, unitary } => {
            no_csv(format)?;
            let u: ModeUnitary = match unitary {
                Some(path) => parse_unitary(path)?,
                None => {
                    debug_assert!(beamsplitter);
                    balanced_beamsplitter()
                }
            };
            let out = match parse_state(&file, cap)? {
                State::Pure(psi) => State::Pure(transform_pure(&psi, &u)?),
                State::Density(rho) => State::Density(transform_state(&rho, &u)?),
                State::Sectored(mix) => {
                    let parts = mix
                        .components()
                        .iter()
                        .map(|(w, rho)| transform_state(rho, &u).map(|r| (*w, r)))
                        .collect::<Result<Vec<_>>>()?;
                    State::Sectored(superselection_mixture(parts)?)
                }
            };
            Ok(Output::Json(state_to_json(&out)))
        }
        Command::Scan { scan: Scan::Werner { n, steps, tol } } => {
            let rows = werner_scan(n, &werner_grid(steps), tol)?;
            if format == Some(Format::Json) {
                return Ok(Output::Json(to_json(&rows)));
            }
            Ok(Output::Text(csv("p,negativity,trace_norm,status", &rows, |r| {
                format!("{},{},{},{}", r.p, r.negativity, r.trace_norm, name(&r.status))
            })))
        }
        Command::Probe { probe: Probe::Border { sep, ent, eps, tol } } => {
            let sep = parse_state(&sep, cap)?.density()?;
            let ent = parse_state(&ent, cap)?.density()?;
            let rows = border_probe(&sep, &ent, &eps.unwrap_or_else(default_eps_grid), tol)?;
            if format == Some(Format::Json) {
                return Ok(Output::Json(to_json(&rows)));
            }
            Ok(Output::Text(csv("eps,status,negativity,nb_linf", &rows, |r| {
                format!("{},{},{},{}", r.eps, name(&r.status), r.negativity, r.nb_linf)
            })))
        }
        Command::Sweep { file, samples, seed, tol } => {
            let rho = parse_state(&file, cap)?.density()?;
            let report = bipartition_sweep(&rho, samples, seed, tol)?;
            if format == Some(Format::Json) {
                return Ok(Output::Json(to_json(&report)));
            }
            Ok(Output::Text(csv("sample,unitary,negativity,status", &report.rows, |r| {
                format!("{},{},{},{}", r.sample, r.unitary, r.negativity, name(&r.status))
            })))
        }
        Command::Selfcheck => {
            let items = selfcheck::run();
            let ok = items.iter().all(|i| i.passed);
            if format == Some(Format::Json) {
                return Ok(Output::Check(serde_json::to_string_pretty(&items).expect("serializes"), ok));
            }
            let mut text = String::new();
            for i in &items {
                writeln!(text, "{} {}: {}", if i.passed { "PASS" } else { "FAIL" }, i.name, i.detail).unwrap();
            }
            Ok(Output::Check(text.trim_end().to_string(), ok))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    // A closed pipe on stdout is not an error worth reporting.
    let emit = |text: &str| {
        let _ = std::io::stdout().lock().write_all(text.as_bytes());
    };
    match run(cli) {
        Ok(Output::Json(v)) => {
            emit(&format!("{}\n", serde_json::to_string_pretty(&v).expect("serializes")));
            ExitCode::SUCCESS
        }
        Ok(Output::Text(t)) => {
            emit(&t);
            ExitCode::SUCCESS
        }
        Ok(Output::Check(t, ok)) => {
            emit(&format!("{t}\n"));
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
