use std::process::ExitCode;

use clap::Parser;
use teachkit_cli::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let json = cli.json;
    match run(cli) {
        Ok(out) => {
            if json {
                println!("{}", serde_json::to_string_pretty(&out).expect("outcome serializes"));
            } else {
                println!("{}", out.message);
                for f in &out.files {
                    println!("  wrote {}", f.display());
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            if json {
                let v = serde_json::json!({"error": {"stage": e.stage, "message": e.message, "hint": e.hint}});
                println!("{v}");
            }
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
