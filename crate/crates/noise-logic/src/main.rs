use std::process::ExitCode;

fn main() -> ExitCode {
    noise_logic::cli::main()
}
