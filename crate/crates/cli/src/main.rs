mod args;
mod commands;
mod report;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::InputError;

const EXIT_VALIDATION: u8 = 3;
const EXIT_RESOURCE: u8 = 4;
const EXIT_OTHER: u8 = 1;

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<cribcap_core::Error>() {
            return match e {
                cribcap_core::Error::ResourceLimit(_) => EXIT_RESOURCE,
                _ => EXIT_VALIDATION,
            };
        }
        if cause.is::<InputError>() {
            return EXIT_VALIDATION;
        }
    }
    EXIT_OTHER
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let g = &cli.global;
    if let Some(w) = g.workers {
        if w == 0 {
            return Err(InputError("--workers must be ≥ 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()?;
    }
    let report = match &cli.command {
        Command::Bounds(a) => commands::bounds(a, g)?,
        Command::Rates(a) => commands::rates(a, g)?,
        Command::Capacity(a) => commands::capacity(a, g)?,
        Command::Simulate(a) => commands::simulate(a, g)?,
        Command::Example(a) => commands::example_cmd(a, g)?,
    };
    report::emit(&report.render(g.format)?, g.output.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
