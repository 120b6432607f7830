mod args;
mod commands;
mod report;

use std::process::ExitCode;

use clap::Parser;

use args::{merge_config, Cli};

/// Stable error code for the `error[code]:` prefix.
fn code(e: &anyhow::Error) -> &'static str {
    e.chain()
        .find_map(|c| c.downcast_ref::<edgeboost::Error>())
        .map(edgeboost::Error::code)
        .or_else(|| e.chain().find_map(|c| c.downcast_ref::<std::io::Error>()).map(|_| "io"))
        .unwrap_or("internal")
}

fn main() -> ExitCode {
    let argv = match merge_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error[{}]: {e:#}", code(&e));
            return ExitCode::FAILURE;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error[usage]: {first}");
            eprint!("{}", rendered.split_once('\n').map_or("", |(_, rest)| rest));
            return ExitCode::from(2);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e:#}", code(&e));
            ExitCode::FAILURE
        }
    }
}
