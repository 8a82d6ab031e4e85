use std::process::ExitCode;

fn main() -> ExitCode {
    mmphase::cli::run()
}
