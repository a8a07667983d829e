use clap::Parser;
use qillum::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(Some(summary)) => {
            println!("{}", summary.csv_path.display());
            println!("{}", summary.manifest_path.display());
        }
        Ok(None) => {}
        Err(e) => {
            eprintln!("qillum: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
