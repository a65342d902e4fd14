mod args;
mod report;
mod run;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use ecd_core::Error;

use args::Cli;
use run::Output;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Infeasible(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let text = match run::run(&cli) {
        Ok(Output::Document(doc)) => doc.render(cli.format),
        Ok(Output::File(text)) => text,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: writing output: {e}");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
