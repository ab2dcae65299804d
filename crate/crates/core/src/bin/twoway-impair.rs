use std::io;

use twoway_impair::cli::{run, THREADS_ENV};

fn main() {
    let threads = std::env::var(THREADS_ENV).ok();
    let code = run(
        std::env::args_os(),
        threads.as_deref(),
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    );
    std::process::exit(code);
}
