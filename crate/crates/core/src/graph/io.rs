//! Line-oriented text format for matrix-weighted graphs.
//!
//! ```text
//! n d
//! L i  w11 w12 ... wdd      # one line per self-loop
//! E i j  w11 w12 ... wdd    # one line per edge
//! ```
//!
//! Blocks are row-major. Vertices without an `L` line get a zero self-loop.
//! Blank lines and lines starting with `#` are ignored. Values are written in
//! shortest round-trip form, so a dump reads back bit-identically.

use std::io::{BufRead, Write};

use super::{Edge, MatrixWeightedGraph};
use crate::blockmat::SymBlock;
use crate::error::{Error, Result};

pub fn write_graph<W: Write>(g: &MatrixWeightedGraph, mut out: W) -> Result<()> {
    writeln!(out, "{} {}", g.n(), g.dim())?;
    for (v, w) in g.self_loops().iter().enumerate() {
        write!(out, "L {v}")?;
        write_block(&mut out, w)?;
    }
    for e in g.edges() {
        write!(out, "E {} {}", e.i, e.j)?;
        write_block(&mut out, &e.weight)?;
    }
    Ok(())
}

fn write_block<W: Write>(out: &mut W, w: &SymBlock) -> Result<()> {
    for x in w.as_block().as_slice() {
        write!(out, " {x:?}")?;
    }
    writeln!(out)?;
    Ok(())
}

pub fn read_graph<R: BufRead>(input: R) -> Result<MatrixWeightedGraph> {
    let mut header: Option<(usize, usize)> = None;
    let mut loops: Vec<SymBlock> = Vec::new();
    let mut edges = Vec::new();

    for (k, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = k + 1;
        let parse_err = |message: String| Error::Parse { line: lineno, message };
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let Some((n, d)) = header else {
            if tokens.len() != 2 {
                return Err(parse_err("expected header `n d`".into()));
            }
            let n = parse_index(tokens[0]).map_err(&parse_err)?;
            let d = parse_index(tokens[1]).map_err(&parse_err)?;
            if d == 0 {
                return Err(parse_err("block dimension must be positive".into()));
            }
            header = Some((n, d));
            loops = vec![SymBlock::zeros(d); n];
            continue;
        };
        let (ids, kind) = match tokens[0] {
            "L" => (1, 'L'),
            "E" => (2, 'E'),
            other => return Err(parse_err(format!("unknown record `{other}`"))),
        };
        if tokens.len() != 1 + ids + d * d {
            return Err(parse_err(format!(
                "expected {} fields, found {}",
                1 + ids + d * d,
                tokens.len()
            )));
        }
        let mut index = Vec::with_capacity(ids);
        for tok in &tokens[1..=ids] {
            let v = parse_index(tok).map_err(&parse_err)?;
            if v >= n {
                return Err(parse_err(format!("vertex {v} out of range 0..{n}")));
            }
            index.push(v);
        }
        let values = tokens[1 + ids..]
            .iter()
            .map(|t| t.parse::<f64>().map_err(|e| parse_err(format!("bad number `{t}`: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        let block = SymBlock::from_row_major(d, &values).map_err(|e| parse_err(e.to_string()))?;
        match kind {
            'L' => loops[index[0]] = block,
            _ => edges.push(Edge::new(index[0], index[1], block)),
        }
    }

    let Some((_, d)) = header else {
        return Err(Error::Parse { line: 0, message: "missing header".into() });
    };
    MatrixWeightedGraph::new(d, loops, edges)
}

fn parse_index(tok: &str) -> std::result::Result<usize, String> {
    tok.parse::<usize>().map_err(|e| format!("bad integer `{tok}`: {e}"))
}
