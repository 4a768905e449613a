use std::process::ExitCode;

fn main() -> ExitCode {
    let cfg = match genlab::cli::parse_args(std::env::args_os()) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match genlab::cli::run(&cfg) {
        Ok(out) => {
            println!("{}", out.summary);
            if out.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("genlab: {e}");
            ExitCode::from(2)
        }
    }
}
