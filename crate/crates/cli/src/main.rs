use clap::Parser;
use mpdt_cli::{exit_code, run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            if let Some(mpdt_core::Error::Inseparable(groups)) = e.downcast_ref::<mpdt_core::Error>() {
                eprintln!("error: {} groups of identical rows carry different labels", groups.len());
                for g in groups.iter().take(20) {
                    eprintln!("  rows {g:?}");
                }
                eprintln!("hint: rerun with --resolve-conflicts majority");
            } else {
                eprintln!("error: {e:#}");
            }
            exit_code(&e)
        }
    };
    std::process::exit(code);
}
