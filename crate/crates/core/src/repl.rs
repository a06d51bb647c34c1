//! Command execution. A source command expands to a list of atomic
//! commands that succeed or fail together; a loaded file keeps the
//! commands that succeeded before its first failure.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::env::{GlobalEntry, GlobalEnv};
use crate::eval::{strongly_normalize, EvalError};
use crate::parser::{fix_index, parse_script, print_term, Command, ParseError};
use crate::refine::{elaborate, elaborate_type, RefineError};
use crate::syntax::{Loc, Term};

pub const HELP: &str = "\
Help.                               show this list of commands
Load \"file\".                        for loading a script file
Axiom term : type.                  define a constant or an axiom
Definition name [: type] := term.   define a term
Print name.                         print the definition of name
Printall.                           print all the signature
                                    (axioms and definitions)
Compute name.                       normalize name and print the result
Quit.                               quit
";

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Refine(#[from] RefineError),
    #[error("the name \"{name}\" is already declared.")]
    Duplicate { name: String, loc: Loc },
    #[error("the name \"{name}\" is not declared.")]
    Unknown { name: String, loc: Loc },
    #[error("cannot read \"{path}\": {message}.")]
    Io {
        path: String,
        message: String,
        loc: Loc,
    },
    #[error("{source}")]
    Eval { source: EvalError, loc: Loc },
    /// A failure inside a loaded file, already reported against that file.
    #[error("{0}")]
    Loaded(Box<Failure>),
}

impl CommandError {
    fn loc(&self) -> Option<Loc> {
        match self {
            CommandError::Parse(e) => Some(e.loc),
            CommandError::Refine(e) => Some(e.loc()),
            CommandError::Duplicate { loc, .. }
            | CommandError::Unknown { loc, .. }
            | CommandError::Io { loc, .. }
            | CommandError::Eval { loc, .. } => Some(*loc),
            CommandError::Loaded(_) => None,
        }
    }
}

/// An error together with the source text needed to show it.
#[derive(Debug)]
pub struct Failure {
    pub file: Option<PathBuf>,
    pub loc: Loc,
    /// The source line holding the start of `loc`.
    pub line: String,
    pub message: String,
    pub color: bool,
}

impl Failure {
    fn new(err: CommandError, text: &str, file: Option<&Path>, color: bool) -> Failure {
        if let CommandError::Loaded(inner) = err {
            return *inner;
        }
        let loc = err.loc().unwrap_or_default();
        let line = text
            .lines()
            .nth(loc.start.line.saturating_sub(1) as usize)
            .unwrap_or("")
            .to_string();
        Failure {
            file: file.map(Path::to_path_buf),
            loc,
            line,
            message: err.to_string(),
            color,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (red, reset) = if self.color {
            ("\x1b[31m", "\x1b[0m")
        } else {
            ("", "")
        };
        if let Some(file) = &self.file {
            writeln!(
                f,
                "File \"{}\", line {}:",
                file.display(),
                self.loc.start.line
            )?;
        }
        if !self.loc.is_dummy() {
            let start = self.loc.start.column as usize;
            let width = self.line.chars().count();
            let end = if self.loc.end.line == self.loc.start.line {
                self.loc.end.column as usize
            } else {
                width
            };
            let carets = end.max(start + 1).min(width.max(start + 1)) - start;
            writeln!(f, "{}", self.line)?;
            writeln!(f, "{}{red}{}{reset}", " ".repeat(start), "^".repeat(carets))?;
        }
        write!(f, "{red}Error:{reset} {}", self.message)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Continue,
    Quit,
}

#[derive(Clone, Debug, Default)]
pub struct Session {
    pub sigma: GlobalEnv,
    /// Suppress the confirmations of successful declarations.
    pub quiet: bool,
    /// Highlight error reports with ANSI colors.
    pub color: bool,
}

impl Session {
    pub fn new() -> Self {
        Session::default()
    }

    /// Run every command of `text`, stopping at the first failure.
    /// Commands that succeeded before the failure are kept.
    pub fn run_text(
        &mut self,
        text: &str,
        file: Option<&Path>,
        out: &mut dyn Write,
    ) -> Result<Outcome, Failure> {
        let color = self.color;
        let fail = |e: CommandError| Failure::new(e, text, file, color);
        let script = parse_script(text).map_err(|e| fail(e.into()))?;
        for cmd in script {
            let cmd = cmd.map_err(|e| fail(e.into()))?;
            match self.run_command_list(&cmd.commands, out) {
                Ok(Outcome::Quit) => return Ok(Outcome::Quit),
                Ok(Outcome::Continue) => {}
                Err(e) => return Err(fail(e)),
            }
        }
        Ok(Outcome::Continue)
    }

    /// Run atomic commands in order; on failure the signature is restored.
    pub fn run_command_list(
        &mut self,
        cmds: &[Command],
        out: &mut dyn Write,
    ) -> Result<Outcome, CommandError> {
        let snapshot = self.sigma.clone();
        for cmd in cmds {
            match self.exec(cmd, out) {
                Ok(Outcome::Quit) => return Ok(Outcome::Quit),
                Ok(Outcome::Continue) => {}
                Err(e) => {
                    // a loaded file keeps what it declared before failing
                    if !matches!(cmd, Command::Load(_)) {
                        self.sigma = snapshot;
                    }
                    return Err(e);
                }
            }
        }
        Ok(Outcome::Continue)
    }

    pub fn exec(&mut self, cmd: &Command, out: &mut dyn Write) -> Result<Outcome, CommandError> {
        match cmd {
            Command::Help => emit(out, HELP.trim_end()),
            Command::Quit => return Ok(Outcome::Quit),
            Command::Printall => {
                for (name, entry) in self.sigma.iter() {
                    emit(out, &show_entry(name, entry));
                }
            }
            Command::Load(path) => return self.load(Path::new(path), out),
            Command::Axiom { name, loc, ty } => {
                self.fresh_name(name, *loc)?;
                let (ty, ty_essence) = elaborate_type(&self.sigma, &fix_index(ty, &[]))?;
                self.declare(name, *loc, GlobalEntry::Axiom { ty_essence, ty })?;
                if !self.quiet {
                    emit(out, &format!("{name} is declared."));
                }
            }
            Command::Definition {
                name,
                loc,
                ty,
                body,
            } => {
                self.fresh_name(name, *loc)?;
                let ty = ty.as_ref().map(|t| fix_index(t, &[]));
                let e = elaborate(&self.sigma, &fix_index(body, &[]), ty.as_ref())?;
                let entry = GlobalEntry::Definition {
                    essence: e.essence,
                    body: e.term,
                    ty_essence: e.ty_essence,
                    ty: e.ty,
                };
                self.declare(name, *loc, entry)?;
                if !self.quiet {
                    emit(out, &format!("{name} is defined."));
                }
            }
            Command::Print { name, loc } => {
                let entry = self.lookup(name, *loc)?;
                emit(out, &show_entry(name, entry));
            }
            Command::Compute { name, loc } => {
                let t = self.compute(name, *loc)?;
                emit(out, &print_term(&t, &[]));
            }
        }
        Ok(Outcome::Continue)
    }

    /// The normal form of a stored constant.
    pub fn compute(&self, name: &str, loc: Loc) -> Result<Term, CommandError> {
        let entry = self.lookup(name, loc)?;
        let t = match entry {
            GlobalEntry::Definition { body, .. } => body.clone(),
            GlobalEntry::Axiom { .. } => Term::Const(loc, name.to_string()),
        };
        strongly_normalize(false, &self.sigma, &crate::env::Opaque(0), &t)
            .map_err(|source| CommandError::Eval { source, loc })
    }

    /// Every entry, one per line, in declaration order.
    pub fn printall(&self) -> String {
        let mut s = String::new();
        for (name, entry) in self.sigma.iter() {
            s.push_str(&show_entry(name, entry));
            s.push('\n');
        }
        s
    }

    fn load(&mut self, path: &Path, out: &mut dyn Write) -> Result<Outcome, CommandError> {
        let text = std::fs::read_to_string(path).map_err(|e| CommandError::Io {
            path: path.display().to_string(),
            message: e.kind().to_string(),
            loc: Loc::dummy(),
        })?;
        self.run_text(&text, Some(path), out)
            .map_err(|f| CommandError::Loaded(Box::new(f)))
    }

    fn lookup(&self, name: &str, loc: Loc) -> Result<&GlobalEntry, CommandError> {
        self.sigma.get(name).ok_or_else(|| CommandError::Unknown {
            name: name.to_string(),
            loc,
        })
    }

    fn fresh_name(&self, name: &str, loc: Loc) -> Result<(), CommandError> {
        if self.sigma.contains(name) {
            return Err(CommandError::Duplicate {
                name: name.to_string(),
                loc,
            });
        }
        Ok(())
    }

    fn declare(&mut self, name: &str, loc: Loc, entry: GlobalEntry) -> Result<(), CommandError> {
        self.sigma
            .insert(name, entry)
            .map_err(|_| CommandError::Duplicate {
                name: name.to_string(),
                loc,
            })
    }
}

fn emit(out: &mut dyn Write, s: &str) {
    // output failures (a closed pipe) are not command failures
    let _ = writeln!(out, "{s}");
}

fn show_entry(name: &str, entry: &GlobalEntry) -> String {
    match entry {
        GlobalEntry::Axiom { ty, .. } => format!("Axiom {name} : {}.", print_term(ty, &[])),
        GlobalEntry::Definition { body, ty, .. } => format!(
            "Definition {name} : {} := {}.",
            print_term(ty, &[]),
            print_term(body, &[])
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(s: &mut Session, text: &str) -> (String, Result<Outcome, Failure>) {
        let mut out = Vec::new();
        let r = s.run_text(text, None, &mut out);
        (String::from_utf8(out).unwrap(), r)
    }

    #[test]
    fn axiom_list_declares_each_name() {
        let mut s = Session::new();
        let (out, r) = run(&mut s, "Axiom (a b : Type) (f : a -> b).");
        assert_eq!(r.unwrap(), Outcome::Continue);
        assert_eq!(out, "a is declared.\nb is declared.\nf is declared.\n");
        assert_eq!(s.sigma.len(), 3);
    }

    #[test]
    fn failing_list_leaves_the_signature_unchanged() {
        let mut s = Session::new();
        run(&mut s, "Axiom c : Type.").1.unwrap();
        let before = s.printall();
        let (_, r) = run(&mut s, "Axiom (a : Type) (a : Type).");
        let f = r.unwrap_err();
        assert_eq!(f.message, "the name \"a\" is already declared.");
        assert_eq!(s.printall(), before);
    }

    #[test]
    fn quit_stops_the_script() {
        let mut s = Session::new();
        let (_, r) = run(&mut s, "Quit. Axiom a : Type.");
        assert_eq!(r.unwrap(), Outcome::Quit);
        assert!(s.sigma.is_empty());
    }

    #[test]
    fn print_and_compute() {
        let mut s = Session::new();
        let src = "Axiom nat : Type. Axiom y : nat. Definition k := (fun (x y : nat) => x) y.";
        run(&mut s, src).1.unwrap();
        let (out, _) = run(&mut s, "Print k. Compute k.");
        assert_eq!(
            out,
            "Definition k : nat -> nat := (fun x : nat => fun y : nat => x) y.\nfun y0 : nat => y\n"
        );
    }

    #[test]
    fn help_lists_the_commands() {
        let mut s = Session::new();
        let (out, _) = run(&mut s, "Help.");
        assert_eq!(out, HELP);
    }

    #[test]
    fn error_report_points_at_the_span() {
        let mut s = Session::new();
        let f = run(&mut s, "Axiom a : b.").1.unwrap_err();
        assert_eq!(
            f.to_string(),
            "Axiom a : b.\n          ^\nError: the name \"b\" is not declared."
        );
    }

    #[test]
    fn unknown_names_in_print() {
        let mut s = Session::new();
        let f = run(&mut s, "Print nope.").1.unwrap_err();
        assert_eq!(f.message, "the name \"nope\" is not declared.");
    }
}
