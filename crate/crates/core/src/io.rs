//! Plain-text instance files.
//!
//! Hypergraph file:
//! ```text
//! hg 1
//! n <n> k <k>
//! e v1 v2 ... vk
//! ```
//! with 0-based, strictly ascending vertex ids, one edge per line.
//!
//! Colouring file:
//! ```text
//! col 1 q <q>
//! <vertex> <colour>
//! ```
//! with one line per vertex, colours in 1..=q. In both formats lines
//! starting with `#` and blank lines are ignored. Reading back a written
//! file reproduces the original object exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::hypergraph::{Colouring, Hypergraph};

pub fn write_hypergraph(h: &Hypergraph, w: &mut impl Write) -> Result<()> {
    writeln!(w, "hg 1")?;
    writeln!(w, "n {} k {}", h.n(), h.k())?;
    for e in h.edges() {
        write!(w, "e")?;
        for v in e {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_hypergraph_file(h: &Hypergraph, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_hypergraph(h, &mut w)
}

pub fn write_colouring(x: &Colouring, w: &mut impl Write) -> Result<()> {
    writeln!(w, "col 1 q {}", x.q())?;
    for v in 0..x.len() {
        writeln!(w, "{v} {}", x.colour(v))?;
    }
    Ok(())
}

pub fn write_colouring_file(x: &Colouring, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_colouring(x, &mut w)
}

/// Non-comment lines paired with their 1-based line numbers.
fn content_lines(r: impl BufRead) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        out.push((i + 1, trimmed.to_string()));
    }
    Ok(out)
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

pub fn read_hypergraph(r: impl BufRead) -> Result<Hypergraph> {
    let lines = content_lines(r)?;
    let mut it = lines.into_iter();

    let (ln, header) = it.next().ok_or_else(|| parse_err(0, "empty file"))?;
    if header != "hg 1" {
        return Err(parse_err(
            ln,
            format!("expected header 'hg 1', got '{header}'"),
        ));
    }

    let (ln, dims) = it
        .next()
        .ok_or_else(|| parse_err(ln, "missing 'n <n> k <k>' line"))?;
    let tokens: Vec<&str> = dims.split_whitespace().collect();
    let (n, k) = match tokens.as_slice() {
        ["n", n, "k", k] => {
            let n = n
                .parse::<usize>()
                .map_err(|e| parse_err(ln, format!("bad n: {e}")))?;
            let k = k
                .parse::<usize>()
                .map_err(|e| parse_err(ln, format!("bad k: {e}")))?;
            (n, k)
        }
        _ => {
            return Err(parse_err(
                ln,
                format!("expected 'n <n> k <k>', got '{dims}'"),
            ))
        }
    };

    let mut edges = Vec::new();
    for (ln, line) in it {
        let mut tokens = line.split_whitespace();
        if tokens.next() != Some("e") {
            return Err(parse_err(
                ln,
                format!("expected an edge line 'e ...', got '{line}'"),
            ));
        }
        let mut edge = Vec::with_capacity(k);
        for tok in tokens {
            let v = tok
                .parse::<usize>()
                .map_err(|e| parse_err(ln, format!("bad vertex id '{tok}': {e}")))?;
            edge.push(v);
        }
        if edge.len() != k {
            return Err(parse_err(
                ln,
                format!("edge has {} vertices, expected {k}", edge.len()),
            ));
        }
        if edge.windows(2).any(|w| w[0] >= w[1]) {
            return Err(parse_err(ln, "edge vertices must be strictly ascending"));
        }
        if let Some(&v) = edge.iter().find(|&&v| v >= n) {
            return Err(Error::Range(format!(
                "line {ln}: vertex {v} outside [0, {n})"
            )));
        }
        edges.push(edge);
    }
    Hypergraph::new(n, k, edges)
}

pub fn read_hypergraph_file(path: impl AsRef<Path>) -> Result<Hypergraph> {
    read_hypergraph(BufReader::new(File::open(path)?))
}

pub fn read_colouring(r: impl BufRead) -> Result<Colouring> {
    let lines = content_lines(r)?;
    let mut it = lines.into_iter();

    let (ln, header) = it.next().ok_or_else(|| parse_err(0, "empty file"))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    let q = match tokens.as_slice() {
        ["col", "1", "q", q] => q
            .parse::<u32>()
            .map_err(|e| parse_err(ln, format!("bad q: {e}")))?,
        _ => {
            return Err(parse_err(
                ln,
                format!("expected header 'col 1 q <q>', got '{header}'"),
            ))
        }
    };

    let mut entries = Vec::new();
    for (ln, line) in it {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let [v, c] = tokens.as_slice() else {
            return Err(parse_err(
                ln,
                format!("expected '<vertex> <colour>', got '{line}'"),
            ));
        };
        let v = v
            .parse::<usize>()
            .map_err(|e| parse_err(ln, format!("bad vertex id: {e}")))?;
        let c = c
            .parse::<u32>()
            .map_err(|e| parse_err(ln, format!("bad colour: {e}")))?;
        if c < 1 || c > q {
            return Err(Error::Range(format!(
                "line {ln}: colour {c} outside [1, {q}]"
            )));
        }
        entries.push((ln, v, c));
    }

    let n = entries.len();
    let mut colours = vec![0u32; n];
    let mut seen = vec![false; n];
    for (ln, v, c) in entries {
        if v >= n {
            return Err(Error::Range(format!(
                "line {ln}: vertex {v} outside [0, {n}) (file has {n} entries)"
            )));
        }
        if seen[v] {
            return Err(parse_err(ln, format!("vertex {v} assigned twice")));
        }
        seen[v] = true;
        colours[v] = c;
    }
    Colouring::new(colours, q)
}

pub fn read_colouring_file(path: impl AsRef<Path>) -> Result<Colouring> {
    read_colouring(BufReader::new(File::open(path)?))
}
