use clap::Parser;

use symdex::cli::{run, Args};

fn main() {
    let args = Args::parse();
    let summary = run(&args);
    if summary.code == 0 {
        println!("{}", summary.message);
    } else {
        eprintln!("symdex: {}", summary.message);
    }
    std::process::exit(summary.code);
}
