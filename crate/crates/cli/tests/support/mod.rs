//! Seeded synthetic corpora shared by the CLI tests and the acceptance suite.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const NOUNS: &[&str] = &[
    "dog", "cat", "river", "house", "child", "teacher", "window", "city", "story", "morning", "friend",
];
pub const VERBS: &[&str] = &["walked", "saw", "found", "opened"];
pub const ADJS: &[&str] = &["old", "big", "small", "happy", "quiet", "bright"];
pub const ADVS: &[&str] = &["quickly", "slowly", "often", "really"];
pub const PRONS: &[&str] = &["it", "they", "she", "he", "we"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn pick<'a>(rng: &mut ChaCha8Rng, xs: &[&'a str]) -> &'a str {
    xs.choose(rng).unwrap()
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// One sentence as words, the final period attached to the last word.
pub fn sentence(rng: &mut ChaCha8Rng) -> Vec<String> {
    let n = |r: &mut ChaCha8Rng| pick(r, NOUNS).to_string();
    let v = |r: &mut ChaCha8Rng| pick(r, VERBS).to_string();
    let a = |r: &mut ChaCha8Rng| pick(r, ADJS).to_string();
    let d = |r: &mut ChaCha8Rng| pick(r, ADVS).to_string();
    let p = |r: &mut ChaCha8Rng| pick(r, PRONS).to_string();
    let words: Vec<String> = match rng.gen_range(0..5) {
        0 => vec!["the".into(), a(rng), n(rng), v(rng), "the".into(), n(rng)],
        1 => vec![p(rng), v(rng), "a".into(), a(rng), n(rng), d(rng), "and".into(), "the".into(), n(rng), "was".into(), a(rng)],
        2 => vec!["when".into(), "the".into(), n(rng), v(rng), "the".into(), n(rng), p(rng), "was".into(), a(rng), "but".into(), d(rng), a(rng)],
        3 => vec!["the".into(), n(rng), "in".into(), "the".into(), n(rng), v(rng), "a".into(), n(rng), "because".into(), "it".into(), "was".into(), a(rng)],
        _ => vec![p(rng), v(rng), "the".into(), n(rng), "near".into(), "the".into(), n(rng), "while".into(), "the".into(), a(rng), n(rng), v(rng), d(rng)],
    };
    let mut words = words;
    words[0] = capitalize(&words[0]);
    let last = words.last_mut().unwrap();
    last.push('.');
    words
}

/// Sentences until at least `min_words` words.
pub fn sentences(rng: &mut ChaCha8Rng, min_words: usize) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut count = 0;
    while count < min_words {
        let s = sentence(rng);
        count += s.len();
        out.push(s);
    }
    out
}

pub fn join(sents: &[Vec<String>]) -> String {
    sents.iter().map(|s| s.join(" ")).collect::<Vec<_>>().join(" ")
}

pub fn text(rng: &mut ChaCha8Rng, min_words: usize) -> String {
    join(&sentences(rng, min_words))
}

/// Four-syllable consonant-vowel nonce word, not ending in "e".
pub fn nonce_word(rng: &mut ChaCha8Rng) -> String {
    const C: &[u8] = b"bdfgklmnprstvz";
    const V: &[u8] = b"aiou";
    (0..4)
        .flat_map(|_| [*C.choose(rng).unwrap() as char, *V.choose(rng).unwrap() as char])
        .collect()
}

pub fn pair_line(id: &str, prompt: &str, continuation: &str, model: &str) -> String {
    serde_json::json!({"id": id, "prompt": prompt, "continuation": continuation, "model": model}).to_string()
}

/// Writes one JSONL file per model; every model shares the same prompts.
/// Prompts run 35+ words and continuations 160+ words, inside the default filters.
pub fn write_corpus(dir: &Path, n: usize, models: &[&str], seed: u64) -> Vec<PathBuf> {
    let mut r = rng(seed);
    let prompts: Vec<String> = (0..n).map(|_| text(&mut r, 35)).collect();
    models
        .iter()
        .map(|m| {
            let lines: Vec<String> = prompts
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let min = 160 + r.gen_range(0..60);
                    pair_line(&format!("doc{i:03}"), p, &text(&mut r, min), m)
                })
                .collect();
            let path = dir.join(format!("{m}.jsonl"));
            fs::write(&path, lines.join("\n") + "\n").unwrap();
            path
        })
        .collect()
}

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_uctg"))
}

pub fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Every file under `dir`, relative path and bytes, sorted.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(base: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(base, &p, out);
            } else {
                let rel = p.strip_prefix(base).unwrap().display().to_string();
                out.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out);
    out.sort();
    out
}
