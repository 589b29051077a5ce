use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = kopl_cli::Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match kopl_cli::run(cli, &mut out, &mut std::io::stderr()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

// `kopl ... | head` closes stdout early; that is not a failure.
fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain()
        .filter_map(|c| c.downcast_ref::<std::io::Error>())
        .any(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
}
