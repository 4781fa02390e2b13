use clap::Parser;

use toda_atlas_cli::{run, CliError, Output, RunConfig};

fn print(output: &Output) {
    for line in &output.lines {
        println!("{line}");
    }
    for path in &output.files {
        println!("wrote {}", path.display());
    }
}

fn main() {
    let config = RunConfig::parse();
    match run(&config) {
        Ok(output) => print(&output),
        Err(e) => {
            match &e {
                CliError::Input(_) => eprintln!("error: {e}"),
                CliError::Checks { output, .. } => {
                    print(output);
                    eprintln!("verification failed: {e}");
                }
            }
            std::process::exit(e.exit_code());
        }
    }
}
