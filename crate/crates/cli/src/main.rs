mod config;
mod run;

use clap::Parser;

fn main() {
    let cli = match config::Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match config::parse_config(cli) {
        Ok(cfg) => run::run(&cfg),
        Err(e) => {
            eprintln!("hslab: {e}");
            run::exit_code(&e)
        }
    };
    std::process::exit(code);
}
