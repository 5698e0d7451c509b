use std::io::{self, Write};
use std::process;

fn main() {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let code = match ksr::cli::run(std::env::args_os(), &mut out) {
        Ok(code) => code as i32,
        Err(e) => {
            let _ = out.flush();
            eprintln!("ksr: {e}");
            e.code as i32
        }
    };
    let _ = out.flush();
    process::exit(code);
}
