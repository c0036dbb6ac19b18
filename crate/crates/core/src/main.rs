use clap::Parser;
use meanfreq::cli::{error_exit_code, output_opts, run, Cli, Format};
use std::time::Instant;

fn main() {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli.command) {
        Ok((report, pass)) => {
            let opts = output_opts(&cli.command);
            let text = match opts.format {
                Format::Json => report.to_json(),
                Format::Csv => report.to_csv(),
            };
            if let Some(path) = &opts.out {
                if let Err(e) = std::fs::write(path, &text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    std::process::exit(3);
                }
            } else {
                print!("{text}");
            }
            eprintln!("wall time: {:.1} ms", start.elapsed().as_secs_f64() * 1e3);
            std::process::exit(if pass { 0 } else { 1 });
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(error_exit_code(&e));
        }
    }
}
