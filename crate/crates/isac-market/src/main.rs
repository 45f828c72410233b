use std::process::ExitCode;

fn main() -> ExitCode {
    isac_market::cli::main()
}
