use clap::Parser;

use robust_ssalt::cli::{run, Cli, EXIT_PARSE};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { EXIT_PARSE } else { 0 });
        }
    };
    env_logger::Builder::new().parse_filters(&cli.log_level).init();
    let out = run(&cli);
    print!("{}", out.text);
    if let Some(m) = out.message {
        eprintln!("error: {m}");
    }
    std::process::exit(out.code);
}
