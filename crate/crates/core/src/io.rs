//! CSV formats.
//!
//! - path: header `t,x1,...,xd`, one row per sample
//! - signature: no header, rows `level,word,value` in graded-lex order
//! - polynomial: header `m1,...,mn,alpha`
//! - correlators: header `request_id,value,std_error,n_paths`
//!
//! Floats are written with Rust's shortest round-trip formatting.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::algebra::{WeightedWord, Word};
use crate::approx::MultiIndexPolynomial;
use crate::correlator::CorrelatorEstimate;
use crate::error::{Error, Result};
use crate::pricing::{ConvergenceRow, PriceReport};
use crate::signature::{SampledPath, TruncatedSignature};

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn parse_f64(field: &str, line: u64, column: usize) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}, field {column}: `{field}` is not a number")))
}

pub fn write_path_csv<W: Write>(path: &SampledPath, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend((1..=path.dim()).map(|i| format!("x{i}")));
    w.write_record(&header)?;
    for k in 0..path.len() {
        let mut row = vec![path.time(k).to_string()];
        row.extend(path.point(k).iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_path_csv<R: Read>(input: R) -> Result<SampledPath> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let header = r.headers()?.clone();
    if header.len() < 2 || &header[0] != "t" {
        return Err(Error::Parse("line 1: path header must be `t,x1,...,xd`".into()));
    }
    let dim = header.len() - 1;
    let (mut times, mut values) = (Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        for (j, field) in rec.iter().enumerate() {
            let x = parse_f64(field, line, j + 1)?;
            if j == 0 {
                times.push(x);
            } else {
                values.push(x);
            }
        }
    }
    SampledPath::new(times, values, dim)
}

pub fn write_signature_csv<W: Write>(sig: &TruncatedSignature, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for (level, word, value) in sig.entries() {
        w.write_record([level.to_string(), word.to_text(sig.dim()), value.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Signature rows keyed by word.
pub fn read_signature_csv<R: Read>(input: R, alphabet: usize) -> Result<BTreeMap<Word, f64>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(input);
    let mut out = BTreeMap::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 3 {
            return Err(Error::Parse(format!("line {line}: expected `level,word,value`")));
        }
        let word = Word::parse(&rec[1], alphabet).map_err(|e| Error::Parse(format!("line {line}, field 2: {e}")))?;
        let level: usize =
            rec[0].parse().map_err(|_| Error::Parse(format!("line {line}, field 1: bad level `{}`", &rec[0])))?;
        if level != word.len() {
            return Err(Error::Parse(format!("line {line}: level {level} does not match word length {}", word.len())));
        }
        out.insert(word, parse_f64(&rec[2], line, 3)?);
    }
    Ok(out)
}

/// `<pi, table>`; words missing from the table are an error.
pub fn pair_table(table: &BTreeMap<Word, f64>, pi: &WeightedWord) -> Result<f64> {
    pi.terms()
        .map(|(w, c)| {
            table
                .get(w)
                .map(|v| c * v)
                .ok_or_else(|| Error::InvalidArgument(format!("word {} is not in the table", w.to_text(pi.alphabet()))))
        })
        .sum()
}

pub fn write_polynomial_csv<W: Write>(poly: &MultiIndexPolynomial, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=poly.n_vars()).map(|i| format!("m{i}")).collect();
    header.push("alpha".into());
    w.write_record(&header)?;
    for (m, a) in poly.terms() {
        let mut row: Vec<String> = m.iter().map(u32::to_string).collect();
        row.push(a.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_correlators_csv<W: Write>(rows: &[(String, CorrelatorEstimate)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["request_id", "value", "std_error", "n_paths"])?;
    for (id, e) in rows {
        w.write_record([id.clone(), e.value.to_string(), e.std_error.to_string(), e.n_paths.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_price_csv<W: Write>(reports: &[PriceReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "price", "std_error", "n_paths", "terms", "truncation", "tail_bound", "warnings"])?;
    for r in reports {
        let trunc: Vec<String> = r.truncation.iter().map(u32::to_string).collect();
        w.write_record([
            r.method.to_string(),
            r.price.to_string(),
            r.std_error.to_string(),
            r.n_paths.to_string(),
            r.terms.to_string(),
            trunc.join(" "),
            opt(r.tail_bound),
            r.warnings.join("; "),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_convergence_csv<W: Write>(rows: &[ConvergenceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "order",
        "expansion",
        "expansion_se",
        "direct",
        "direct_se",
        "abs_gap",
        "tail_bound",
        "theory_bound",
    ])?;
    for r in rows {
        w.write_record([
            r.order.to_string(),
            r.expansion.to_string(),
            r.expansion_se.to_string(),
            r.direct.to_string(),
            r.direct_se.to_string(),
            r.abs_gap.to_string(),
            opt(r.tail_bound),
            opt(r.theory_bound),
        ])?;
    }
    w.flush()?;
    Ok(())
}
