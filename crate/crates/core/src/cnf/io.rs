//! Classic DIMACS CNF and `p wcnf <vars> <clauses> <top>` formats.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{Clause, Lit, WcnfFormula};
use crate::Error;

/// Plain CNF as read from a DIMACS file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Cnf {
    pub n_vars: u32,
    pub clauses: Vec<Clause>,
}

fn write_clause<W: Write>(w: &mut W, clause: &[Lit]) -> std::io::Result<()> {
    for l in clause {
        write!(w, " {l}")?;
    }
    writeln!(w, " 0")
}

pub fn write_wcnf<W: Write>(f: &WcnfFormula, w: &mut W) -> std::io::Result<()> {
    let top = f.top();
    writeln!(w, "p wcnf {} {} {}", f.n_vars, f.hard.len() + f.soft.len(), top)?;
    for c in &f.hard {
        write!(w, "{top}")?;
        write_clause(w, c)?;
    }
    for (c, weight) in &f.soft {
        write!(w, "{weight}")?;
        write_clause(w, c)?;
    }
    Ok(())
}

pub fn write_wcnf_file(f: &WcnfFormula, path: impl AsRef<Path>) -> Result<(), Error> {
    let mut w = BufWriter::new(File::create(path)?);
    write_wcnf(f, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_dimacs<W: Write>(cnf: &Cnf, w: &mut W) -> std::io::Result<()> {
    writeln!(w, "p cnf {} {}", cnf.n_vars, cnf.clauses.len())?;
    for c in &cnf.clauses {
        let mut first = true;
        for l in c {
            if !first {
                write!(w, " ")?;
            }
            write!(w, "{l}")?;
            first = false;
        }
        if first {
            writeln!(w, "0")?;
        } else {
            writeln!(w, " 0")?;
        }
    }
    Ok(())
}

struct Header {
    n_vars: u32,
    n_clauses: usize,
    top: Option<u64>,
}

fn parse_header(line: &str, lineno: usize, kind: &str) -> Result<Header, Error> {
    let bad = |msg: &str| Error::Parse { line: lineno, msg: msg.to_string() };
    let toks: Vec<&str> = line.split_whitespace().collect();
    let expected = if kind == "wcnf" { 5 } else { 4 };
    if toks.len() != expected || toks[0] != "p" || toks[1] != kind {
        return Err(bad(&format!("malformed header, expected `p {kind} ...`")));
    }
    let n_vars = toks[2].parse().map_err(|_| bad("bad variable count"))?;
    let n_clauses = toks[3].parse().map_err(|_| bad("bad clause count"))?;
    let top = if kind == "wcnf" {
        Some(toks[4].parse().map_err(|_| bad("bad top weight"))?)
    } else {
        None
    };
    Ok(Header { n_vars, n_clauses, top })
}

fn parse_lits(
    toks: &mut dyn Iterator<Item = &str>,
    n_vars: u32,
    lineno: usize,
) -> Result<Clause, Error> {
    let bad = |msg: String| Error::Parse { line: lineno, msg };
    let mut clause = Vec::new();
    for tok in toks {
        let v: i32 = tok.parse().map_err(|_| bad(format!("bad literal `{tok}`")))?;
        if v == 0 {
            return Ok(clause);
        }
        if v.unsigned_abs() > n_vars {
            return Err(bad(format!("literal {v} out of range (n_vars = {n_vars})")));
        }
        clause.push(Lit::from_dimacs(v));
    }
    Err(bad("clause not terminated by 0".to_string()))
}

fn body_lines<R: BufRead>(r: R) -> impl Iterator<Item = (usize, std::io::Result<String>)> {
    r.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| match l {
        Ok(s) => {
            let t = s.trim();
            !t.is_empty() && !t.starts_with('c')
        }
        Err(_) => true,
    })
}

pub fn read_wcnf<R: BufRead>(r: R) -> Result<WcnfFormula, Error> {
    let mut lines = body_lines(r);
    let (lineno, first) = lines.next().ok_or(Error::Parse { line: 0, msg: "missing header".into() })?;
    let header = parse_header(&first?, lineno, "wcnf")?;
    let top = header.top.expect("wcnf header has top");
    let mut f = WcnfFormula { n_vars: header.n_vars, ..Default::default() };
    for (lineno, line) in lines {
        let line = line?;
        let mut toks = line.split_whitespace();
        let wtok = toks.next().expect("non-empty line");
        let weight: u64 = wtok.parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad weight `{wtok}`"),
        })?;
        let clause = parse_lits(&mut toks, header.n_vars, lineno)?;
        if weight == top {
            f.hard.push(clause);
        } else if weight > top {
            return Err(Error::Parse { line: lineno, msg: format!("weight {weight} exceeds top {top}") });
        } else if weight == 0 {
            return Err(Error::Parse { line: lineno, msg: "zero soft weight".into() });
        } else {
            f.soft.push((clause, weight));
        }
    }
    if f.hard.len() + f.soft.len() != header.n_clauses {
        return Err(Error::Parse {
            line: 0,
            msg: format!("header announces {} clauses, found {}", header.n_clauses, f.hard.len() + f.soft.len()),
        });
    }
    Ok(f)
}

pub fn read_wcnf_file(path: impl AsRef<Path>) -> Result<WcnfFormula, Error> {
    read_wcnf(BufReader::new(File::open(path)?))
}

pub fn read_dimacs<R: BufRead>(r: R) -> Result<Cnf, Error> {
    let mut lines = body_lines(r);
    let (lineno, first) = lines.next().ok_or(Error::Parse { line: 0, msg: "missing header".into() })?;
    let header = parse_header(&first?, lineno, "cnf")?;
    // Clauses may span lines, so parse the body as one token stream.
    let mut body = String::new();
    for (_, line) in lines {
        body.push_str(&line?);
        body.push(' ');
    }
    let mut toks = body.split_whitespace().peekable();
    let mut cnf = Cnf { n_vars: header.n_vars, clauses: Vec::new() };
    while toks.peek().is_some() {
        cnf.clauses.push(parse_lits(&mut toks, header.n_vars, lineno)?);
    }
    if cnf.clauses.len() != header.n_clauses {
        return Err(Error::Parse {
            line: lineno,
            msg: format!("header announces {} clauses, found {}", header.n_clauses, cnf.clauses.len()),
        });
    }
    Ok(cnf)
}

pub fn read_dimacs_file(path: impl AsRef<Path>) -> Result<Cnf, Error> {
    read_dimacs(BufReader::new(File::open(path)?))
}
