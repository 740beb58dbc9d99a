use std::io::Write;

fn main() {
    let outcome = pl4_cli::run(std::env::args_os(), std::env::var_os(pl4_cli::CONFIG_ENV));
    // output is buffered and emitted once
    std::io::stdout().write_all(outcome.stdout.as_bytes()).ok();
    std::io::stderr().write_all(outcome.stderr.as_bytes()).ok();
    std::process::exit(outcome.code);
}
