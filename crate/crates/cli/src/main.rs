use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use clx::args::Cli;
use clx::run::run;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CLX_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(output) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(output.json.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let report = e.report();
            eprintln!("{}", serde_json::to_string(&report).expect("error report serializes"));
            ExitCode::from(report.exit_code as u8)
        }
    }
}
