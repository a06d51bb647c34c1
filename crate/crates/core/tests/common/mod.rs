#![allow(dead_code)]

pub mod gen;
pub mod xi;

use std::path::PathBuf;

use lfdelta::repl::Session;

pub const CORPUS: [&str; 5] = ["basics", "pierce", "hhf", "normal_forms", "lf_shallow"];

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("corpus")
        .join(format!("{name}.bull"))
}

/// A quiet session with `name` loaded; panics with the report on failure.
pub fn load(name: &str) -> Session {
    let mut s = Session {
        quiet: true,
        ..Session::default()
    };
    load_into(&mut s, name);
    s
}

pub fn load_into(s: &mut Session, name: &str) {
    let path = corpus_path(name);
    let text = std::fs::read_to_string(&path).unwrap();
    if let Err(f) = s.run_text(&text, Some(&path), &mut std::io::sink()) {
        panic!("{f}");
    }
}

/// Run `text` in a fresh quiet session.
pub fn session(text: &str) -> Session {
    let mut s = Session {
        quiet: true,
        ..Session::default()
    };
    if let Err(f) = s.run_text(text, None, &mut std::io::sink()) {
        panic!("{f}");
    }
    s
}
