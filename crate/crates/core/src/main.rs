use std::process::ExitCode;

fn main() -> ExitCode {
    match mtpipe::cli::run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mtpipe: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
