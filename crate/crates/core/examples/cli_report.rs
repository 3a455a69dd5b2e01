//! Runs an experiment through the library entry of the CLI and prints the
//! JSON report and CSV series.

use multibump::cli::{parse_config, resolve, run, Args, Command};
use clap::Parser;

fn main() {
    let cfg = parse_config(r#"{"dim": 7, "geometry": {"k": [8, 16, 32, 64]}}"#).expect("valid config");
    let args = Args::parse_from(["multibump", "balance", "--no-timestamp"]);
    let cfg = resolve(Command::Balance, cfg, &args).expect("resolvable");
    let report = run(Command::Balance, &cfg);
    print!("{}", report.to_json(false));
    if let Some(s) = &report.series {
        print!("{}", s.to_csv().expect("csv"));
    }
    println!("exit status would be {}", report.exit_code());
}
