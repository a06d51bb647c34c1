use std::io::{self, BufRead, IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use lfdelta::parser::has_complete_command;
use lfdelta::repl::{Outcome, Session};

/// Proof checker for a logical framework with strong intersection and
/// union types. With script arguments, loads each one and exits;
/// otherwise reads commands from standard input.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// Script files to load, in order.
    scripts: Vec<PathBuf>,
    /// Never color error reports.
    #[arg(long)]
    no_color: bool,
    /// Do not confirm successful declarations.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let mut session = Session {
        quiet: args.quiet,
        color: !args.no_color && io::stderr().is_terminal(),
        ..Session::default()
    };
    let mut stdout = io::stdout().lock();
    if !args.scripts.is_empty() {
        for path in &args.scripts {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("Error: cannot read \"{}\": {}.", path.display(), e.kind());
                    return ExitCode::from(1);
                }
            };
            match session.run_text(&text, Some(path), &mut stdout) {
                Ok(Outcome::Quit) => break,
                Ok(Outcome::Continue) => {}
                Err(f) => {
                    eprintln!("{f}");
                    return ExitCode::from(1);
                }
            }
        }
        return ExitCode::SUCCESS;
    }
    interactive(&mut session, &mut stdout)
}

/// Read lines until they hold a complete command, then run them. A failure
/// is reported and the loop goes on; it still makes the exit status 1.
fn interactive(session: &mut Session, out: &mut dyn Write) -> ExitCode {
    let tty = io::stdin().is_terminal();
    let mut failed = false;
    let mut buffer = String::new();
    let mut lines = io::stdin().lock().lines();
    loop {
        if tty {
            print!("{}", if buffer.is_empty() { "> " } else { "  " });
            let _ = io::stdout().flush();
        }
        let Some(Ok(line)) = lines.next() else { break };
        buffer.push_str(&line);
        buffer.push('\n');
        if !has_complete_command(&buffer) {
            continue;
        }
        let text = std::mem::take(&mut buffer);
        match session.run_text(&text, None, out) {
            Ok(Outcome::Quit) => break,
            Ok(Outcome::Continue) => {}
            Err(f) => {
                failed = true;
                eprintln!("{f}");
            }
        }
    }
    if !buffer.trim().is_empty() {
        if let Err(f) = session.run_text(&buffer, None, out) {
            failed = true;
            eprintln!("{f}");
        }
    }
    if failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
