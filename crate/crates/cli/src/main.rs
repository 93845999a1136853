use std::process::ExitCode;

use clap::Parser;
use metaforge_cli::{run, Cli, Command, EXIT_TROUBLE};
use tracing_subscriber::EnvFilter;

#[tokio::main]
async fn main() -> ExitCode {
    let cli = Cli::parse();
    let default_level = if matches!(cli.command, Command::Serve { .. }) { "info" } else { "warn" };
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new(default_level)))
        .init();
    let mut stdout = std::io::stdout().lock();
    match run(cli, &mut stdout).await {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            if matches!(e, metaforge_cli::CliError::Read { .. }) {
                eprintln!("usage: metaforge <COMMAND> --help");
            }
            ExitCode::from(EXIT_TROUBLE)
        }
    }
}
