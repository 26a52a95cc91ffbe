mod args;
mod cmds;
mod report;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(1)
                }
            };
        }
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: could not configure {threads} worker threads: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::Precompute(a) => cmds::precompute(a),
        Command::Impute(a) => cmds::impute(a),
        Command::Homophily(a) => cmds::homophily_cmd(a),
        Command::Wl(a) => cmds::wl_cmd(a),
        Command::Spectral(a) => cmds::spectral_cmd(a),
        Command::Synth(a) => cmds::synth_cmd(a),
        Command::Train(a) => cmds::train_cmd(a),
        Command::Experiment(a) => cmds::experiment_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cmds::exit_code_for(&e))
        }
    }
}
