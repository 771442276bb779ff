//! Golden transcripts: `golden/NAME.args` holds one argument per line (a
//! leading `@` names a file under `signatures/`), `golden/NAME.out` the
//! recorded exit code and output.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn signature_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../signatures")
}

pub fn signature_path(name: &str) -> PathBuf {
    signature_dir().join(name)
}

pub struct Transcript {
    pub name: String,
    pub args: Vec<String>,
    pub recorded: Option<String>,
}

pub fn transcripts() -> Vec<Transcript> {
    let dir = golden_dir();
    let mut names: Vec<String> = fs::read_dir(&dir)
        .expect("golden directory")
        .filter_map(|e| {
            let p = e.ok()?.path();
            (p.extension()? == "args").then(|| p.file_stem()?.to_str().map(str::to_owned))?
        })
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|name| {
            let args = fs::read_to_string(dir.join(format!("{name}.args")))
                .expect("args file")
                .lines()
                .filter(|l| !l.is_empty())
                .map(str::to_owned)
                .collect();
            let recorded = fs::read_to_string(dir.join(format!("{name}.out"))).ok();
            Transcript { name, args, recorded }
        })
        .collect()
}

/// Runs the CLI in-process; signature paths are printed relative to the repo.
pub fn render(args: &[String]) -> String {
    let sig_dir = signature_dir();
    let full: Vec<String> = std::iter::once("weyl".to_owned())
        .chain(args.iter().map(|a| match a.strip_prefix('@') {
            Some(file) => sig_dir.join(file).to_string_lossy().into_owned(),
            None => a.clone(),
        }))
        .collect();
    let (code, text) = weyl_cli::run(full);
    let prefix = format!("{}/", sig_dir.to_string_lossy());
    format!("exit: {code}\n{}", text.replace(&prefix, "signatures/"))
}

pub fn bless(t: &Transcript, output: &str) {
    fs::write(golden_dir().join(format!("{}.out", t.name)), output).expect("write golden");
}
