//! `ppw` command-line front end.
//!
//! Exit codes: 0 all checks satisfied, 1 at least one violation, 2 numerical
//! failure, 3 invalid configuration.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use clap::Parser;

pub use commands::{run, RunOutput};
pub use config::{Command, RunConfig};
pub use error::{CliError, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, EXIT_VIOLATION};

use ppw_core::verify::any_violation;

/// Exit code of a finished run.
pub fn exit_code(result: &Result<RunOutput, CliError>) -> i32 {
    match result {
        Ok(out) if any_violation(&out.reports) => EXIT_VIOLATION,
        Ok(_) => EXIT_OK,
        Err(e) => e.exit_code(),
    }
}

pub fn main_with_args(args: Vec<String>) -> i32 {
    main_with_runner(args, run)
}

/// Parses `args`, executes `runner` and emits artifacts. The runner is a
/// parameter so the exit-code contract can be exercised with stubs.
pub fn main_with_runner<F>(args: Vec<String>, runner: F) -> i32
where
    F: Fn(&Command) -> Result<RunOutput, CliError> + Send + Sync,
{
    let args = match config::expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let threads = match config::thread_cap() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let result = match builder.build() {
        Ok(pool) => pool.install(|| runner(&config.command)),
        Err(e) => Err(CliError::config(format!("cannot start worker pool: {e}"))),
    };
    let mut code = exit_code(&result);
    match &result {
        Ok(out) => {
            if out.spectrum.is_some() {
                println!("{}", serde_json::to_string_pretty(&out.payload).unwrap_or_default());
            } else if !config.command.output().quiet {
                let _ = output::print_table(&out.reports, std::io::stdout().lock());
            }
            if let Err(e) = output::write_artifacts(&config, out, code) {
                eprintln!("error: {e}");
                code = e.exit_code();
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    code
}
