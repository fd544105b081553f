mod commands;
mod source;

use std::process::ExitCode;

use clap::Parser;
use heatlab::ErrorClass;

#[derive(Debug, Parser)]
#[command(name = "heatlab", version, about = "Heat semigroup experiments on weighted graphs")]
struct Cli {
    #[command(subcommand)]
    command: commands::Command,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<heatlab::Error>()).map(|e| e.class()) {
        Some(ErrorClass::Numeric) => 3,
        Some(ErrorClass::Precondition) => 4,
        _ => 2,
    }
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("HEATLAB_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| heatlab::Error::InvalidArgument(format!("HEATLAB_THREADS = `{v}` is not a count")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|_| commands::run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
