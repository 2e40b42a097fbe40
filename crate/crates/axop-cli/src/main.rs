use clap::Parser;

fn main() {
    // clap's default usage exit is 2; this tool reserves 2 for data errors.
    let cli = match axop_cli::Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    std::process::exit(axop_cli::run(cli));
}
