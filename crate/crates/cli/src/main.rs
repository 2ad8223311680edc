//! `cayley`: sort, trace, encode, and census pattern-avoiding stack machines
//! on Cayley permutations.
//!
//! Exit status: 0 on success or PASS (a sorting verdict is output, not an
//! error), 1 when a `verify` check fails, 2 on usage or input errors.

use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand, ValueEnum};

use cayley_machines::cayley::BOUND_ENV;
use cayley_machines::census::{self, CheckReport, ClassVerdict, Machine};
use cayley_machines::dyck::encode;
use cayley_machines::pattern::minimal_non_members;
use cayley_machines::stack::{fertility, is_sigma_sortable, run_popstack, run_stack, s_sigma, Popstack, StackConfig};
use cayley_machines::CayleyPerm;

#[derive(Parser)]
#[command(
    name = "cayley",
    version,
    about = "Pattern-avoiding stack machines on Cayley permutations",
    after_help = "Permutations are written as space-separated letters (\"4 2 1 3 2\") or, \
                  when every letter is a single digit, compactly (\"42132\").\n\
                  Exhaustive sweeps are bounded by the CAYLEY_MAX_N environment variable (default 8)."
)]
struct Cli {
    /// Worker threads for exhaustive sweeps (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the sigma-stack output and the sigma-machine verdict
    /// (or a pop-stack run with --machine).
    Sort {
        input: CayleyPerm,
        #[arg(long, required_unless_present = "machine")]
        sigma: Option<CayleyPerm>,
        /// `sigma-machine <perm>`, `popstack hare`, or `popstack tortoise`.
        #[arg(long, conflicts_with = "sigma")]
        machine: Option<Machine>,
    },
    /// Print the push/pop event log of the sigma-stack.
    Trace {
        input: CayleyPerm,
        #[arg(long)]
        sigma: CayleyPerm,
        #[arg(long, value_enum, default_value_t = DataFormat::Text)]
        format: DataFormat,
    },
    /// Print the labeled Dyck path of the sigma-stack run.
    Dyck {
        input: CayleyPerm,
        #[arg(long)]
        sigma: CayleyPerm,
        #[arg(long, value_enum, default_value_t = DataFormat::Text)]
        format: DataFormat,
    },
    /// Count sortable permutations of each length 1..=n-max.
    Enumerate {
        #[arg(long)]
        machine: Machine,
        #[arg(long)]
        n_max: usize,
        #[arg(long, value_enum, default_value_t = TableFormat::Text)]
        format: TableFormat,
    },
    /// Run an exhaustive check and print PASS or FAIL.
    Verify {
        #[arg(value_enum)]
        target: Target,
        /// Pattern to check; `class`, `bijectivity`, `involution`, and `dyck`
        /// sweep every pattern of length 2 to 4 when omitted.
        #[arg(long)]
        sigma: Option<CayleyPerm>,
        /// Longest input length to check.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Print a pair showing the sortable set is not a class.
    Witness {
        #[arg(long)]
        sigma: CayleyPerm,
    },
    /// Count the preimages of a permutation under the sigma-stack.
    Fertility {
        target: CayleyPerm,
        #[arg(long)]
        sigma: CayleyPerm,
    },
    /// List the minimal non-sortable permutations up to length n.
    Basis {
        #[arg(long)]
        machine: Machine,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DataFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableFormat {
    Text,
    Csv,
    Bfile,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    Class,
    Mesh21,
    Bijectivity,
    Involution,
    Dyck,
    PopstackHare,
    PopstackTortoise,
    TortoiseCount,
    TortoiseRefined,
    Sort11Equinum,
    Fubini,
}

fn verdict(sortable: bool) -> &'static str {
    if sortable {
        "SORTABLE"
    } else {
        "UNSORTABLE"
    }
}

fn print_class(v: &ClassVerdict) -> bool {
    let basis = |b: &Vec<CayleyPerm>| b.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ");
    match (&v.predicted_basis, &v.witness) {
        (Some(b), _) if v.equality_holds => {
            println!(
                "PASS class sigma={} basis {{{}}} (n <= {})",
                v.sigma,
                basis(b),
                v.checked_to_length
            )
        }
        (Some(_), _) => println!(
            "FAIL class sigma={}: counterexample {}",
            v.sigma,
            v.counterexample
                .as_ref()
                .map_or_else(|| "?".to_string(), |p| p.to_string())
        ),
        (None, Some(w)) => println!("PASS non-class sigma={} alpha {} beta {}", v.sigma, w.alpha, w.beta),
        (None, None) => println!("FAIL non-class sigma={}: no witness", v.sigma),
    }
    v.equality_holds
}

fn report(r: &CheckReport) -> bool {
    println!("{r}");
    r.passed
}

fn sigmas(sigma: Option<CayleyPerm>) -> Vec<CayleyPerm> {
    sigma.map_or_else(census::sigma_panel, |s| vec![s])
}

fn verify(target: Target, sigma: Option<CayleyPerm>, n: Option<usize>, threads: usize) -> Result<bool> {
    let n = n.unwrap_or(match target {
        Target::Mesh21 | Target::PopstackHare | Target::PopstackTortoise => 7,
        Target::TortoiseCount | Target::TortoiseRefined | Target::Fubini => 8,
        _ => 6,
    });
    let mut ok = true;
    match target {
        Target::Class => {
            for s in sigmas(sigma) {
                ok &= print_class(&census::verify_class(&s, n)?);
            }
        }
        Target::Bijectivity => {
            for s in sigmas(sigma) {
                ok &= report(&census::verify_bijectivity(&s, n)?);
            }
        }
        Target::Involution => {
            let panel = sigma.map_or_else(
                || {
                    census::sigma_panel()
                        .into_iter()
                        .filter(|s| s.letters()[0] == s.letters()[1])
                        .collect()
                },
                |s| vec![s],
            );
            for s in panel {
                ok &= report(&census::verify_involution(&s, n)?);
            }
        }
        Target::Dyck => {
            for s in sigmas(sigma) {
                ok &= report(&census::verify_dyck_laws(&s, n)?);
            }
        }
        Target::Mesh21 => ok = report(&census::verify_21_machine_mesh(n)?),
        Target::PopstackHare => ok = report(&census::verify_popstack(Popstack::Hare, n)?),
        Target::PopstackTortoise => ok = report(&census::verify_popstack(Popstack::Tortoise, n)?),
        Target::TortoiseCount => ok = report(&census::verify_tortoise_count(n, threads)?),
        Target::TortoiseRefined => ok = report(&census::verify_tortoise_refined(n)?),
        Target::Sort11Equinum => ok = report(&census::sort11_equinumerosity(n)?),
        Target::Fubini => ok = report(&census::verify_fubini(n)?),
    }
    Ok(ok)
}

fn run(cli: Cli) -> Result<bool> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .ok();
    }
    match cli.command {
        Command::Sort { input, sigma, machine } => match (sigma, machine) {
            (Some(sigma), None) | (None, Some(Machine::Sigma(sigma))) => {
                println!("{}", s_sigma(&input, &sigma)?);
                println!("{}", verdict(is_sigma_sortable(&input, &sigma)?));
            }
            (None, Some(Machine::Popstack(kind))) => {
                let out = run_popstack(&input, kind).output;
                println!("{out}");
                println!("{}", verdict(out.letters().windows(2).all(|w| w[0] <= w[1])));
            }
            _ => bail!("give exactly one of --sigma or --machine"),
        },
        Command::Trace { input, sigma, format } => {
            let trace = run_stack(&input, &StackConfig::sigma(&sigma)?);
            match format {
                DataFormat::Text => print!("{}", trace.to_text()),
                DataFormat::Json => println!("{}", serde_json::to_string_pretty(&trace)?),
            }
        }
        Command::Dyck { input, sigma, format } => {
            let path = encode(&input, &sigma)?;
            match format {
                DataFormat::Text => print!("{}", path.to_text()),
                DataFormat::Json => println!("{}", serde_json::to_string_pretty(&path)?),
            }
        }
        Command::Enumerate { machine, n_max, format } => {
            let r = census::count_sortable(&machine, n_max, cli.threads)?;
            print!(
                "{}",
                match format {
                    TableFormat::Text => r.to_text(),
                    TableFormat::Csv => r.to_csv(),
                    TableFormat::Bfile => r.to_bfile(),
                }
            );
        }
        Command::Verify { target, sigma, n } => return verify(target, sigma, n, cli.threads),
        Command::Witness { sigma } => {
            let w = census::witness_non_class(&sigma)?;
            println!("alpha: {}", w.alpha);
            println!("beta: {}", w.beta);
        }
        Command::Fertility { target, sigma } => println!("{}", fertility(&sigma, &target)?),
        Command::Basis { machine, n } => {
            for p in minimal_non_members(|p: &CayleyPerm| machine.sorts(p), n)? {
                println!("{p}");
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if let Some(cayley_machines::Error::ResourceBound { bound, .. }) = e.downcast_ref() {
                eprintln!("raise the bound with {BOUND_ENV} (currently {bound})");
            }
            ExitCode::from(2)
        }
    }
}
