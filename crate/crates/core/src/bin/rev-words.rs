//! Deterministic mock translator for exercising the backtranslation loop:
//! reads newline-delimited UTF-8 sentences on stdin and writes each one back
//! with its words reversed. Extra arguments (direction, decode params) are
//! accepted and ignored.

use std::io::{self, BufRead, BufWriter, Write};

fn main() -> io::Result<()> {
    let stdin = io::stdin();
    let mut out = BufWriter::new(io::stdout());
    for line in stdin.lock().lines() {
        let line = line?;
        let mut words: Vec<&str> = line.split_whitespace().collect();
        words.reverse();
        writeln!(out, "{}", words.join(" "))?;
    }
    out.flush()
}
