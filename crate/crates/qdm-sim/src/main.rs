use std::process::ExitCode;

fn main() -> ExitCode {
    qdm_sim::cli::run()
}
