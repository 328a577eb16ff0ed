use clap::Parser;

use panseq::cli::{run, Cli};
use panseq::Error;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli.command) {
        // One machine-readable line: error<TAB>category<TAB>message.
        eprintln!("error\t{}\t{e}", category(&e));
        std::process::exit(1);
    }
}

fn category(e: &Error) -> &'static str {
    match e {
        Error::Parse { .. } => "parse",
        Error::NoOrf | Error::NoStop | Error::InvalidBase(_) => "translate",
        Error::InvalidLibrary(_) | Error::InconsistentCounts(_) => "library",
        Error::Config(_) => "config",
        Error::Encoding(_) => "encoding",
        Error::DegenerateData(_) => "data",
        Error::Evaluation(_) => "evaluation",
        Error::Domain(_) => "domain",
        Error::Io(_) => "io",
        Error::Csv(_) => "csv",
    }
}
