//! Plain-text tuple files.
//!
//! ```text
//! # comment lines and blank lines are ignored
//! m N q_re q_im lambda_re lambda_im
//! <m rows of B_inf, each m pairs "re im">
//! <m rows of B_1> ... <m rows of B_N>
//! <N pairs "re im": the poles b_1 ... b_N>
//! ```
//!
//! Numbers are written with the shortest representation that parses back to
//! the same `f64`, so writing and re-reading is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{QError, Result};
use crate::qmc::{CMatrix, MatrixTuple};
use crate::C64;

/// A tuple together with the `q` and `λ` it is meant to be convolved with.
#[derive(Debug, Clone, PartialEq)]
pub struct TupleFile {
    pub q: C64,
    pub lambda: C64,
    pub tuple: MatrixTuple,
}

fn perr(line: usize, msg: impl Into<String>) -> QError {
    QError::Parse { line, msg: msg.into() }
}

/// Numbers on one significant line, with its 1-based line number.
fn numbers(line_no: usize, text: &str) -> Result<Vec<f64>> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| perr(line_no, format!("not a number: {tok:?}")))
        })
        .collect()
}

fn pairs(line_no: usize, vals: &[f64], want: usize) -> Result<Vec<C64>> {
    if vals.len() != 2 * want {
        return Err(perr(
            line_no,
            format!(
                "expected {want} complex entries ({} numbers), found {}",
                2 * want,
                vals.len()
            ),
        ));
    }
    Ok(vals.chunks(2).map(|c| C64::new(c[0], c[1])).collect())
}

pub fn parse_tuple(text: &str) -> Result<TupleFile> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hl, header) = lines.next().ok_or_else(|| perr(0, "empty tuple file"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 6 {
        return Err(perr(hl, "header must be: m N q_re q_im lambda_re lambda_im"));
    }
    let m: usize = toks[0]
        .parse()
        .map_err(|_| perr(hl, format!("bad matrix size {:?}", toks[0])))?;
    let n: usize = toks[1]
        .parse()
        .map_err(|_| perr(hl, format!("bad pole count {:?}", toks[1])))?;
    if m == 0 || n == 0 {
        return Err(perr(hl, "m and N must be positive"));
    }
    let rest = numbers(hl, &toks[2..].join(" "))?;
    let q = C64::new(rest[0], rest[1]);
    let lambda = C64::new(rest[2], rest[3]);

    let mut read_matrix = |name: &str| -> Result<CMatrix> {
        let mut rows = Vec::with_capacity(m);
        for r in 0..m {
            let (ln, l) = lines
                .next()
                .ok_or_else(|| perr(0, format!("missing row {} of {name}", r + 1)))?;
            rows.push(pairs(ln, &numbers(ln, l)?, m)?);
        }
        Ok(CMatrix::from_fn(m, m, |r, c| rows[r][c]))
    };
    let b_inf = read_matrix("B_inf")?;
    let mut blocks = Vec::with_capacity(n);
    for i in 0..n {
        blocks.push(read_matrix(&format!("B_{}", i + 1))?);
    }
    let (pl, ptext) = lines.next().ok_or_else(|| perr(0, "missing pole line"))?;
    let poles = pairs(pl, &numbers(pl, ptext)?, n)?;
    if let Some((extra, _)) = lines.next() {
        return Err(perr(extra, "unexpected content after the pole line"));
    }
    let tuple = MatrixTuple::new(b_inf, blocks, poles).map_err(|e| perr(pl, e.to_string()))?;
    Ok(TupleFile { q, lambda, tuple })
}

pub fn format_tuple(tf: &TupleFile) -> String {
    let t = &tf.tuple;
    let mut out = String::new();
    let _ = writeln!(out, "# m N q_re q_im lambda_re lambda_im");
    let _ = writeln!(
        out,
        "{} {} {} {} {} {}",
        t.m,
        t.n_poles(),
        tf.q.re,
        tf.q.im,
        tf.lambda.re,
        tf.lambda.im
    );
    for (k, mat) in t.matrices().enumerate() {
        if k == 0 {
            let _ = writeln!(out, "# B_inf");
        } else {
            let _ = writeln!(out, "# B_{k}");
        }
        for r in 0..t.m {
            let row: Vec<String> = (0..t.m)
                .map(|c| format!("{} {}", mat[(r, c)].re, mat[(r, c)].im))
                .collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
    }
    let _ = writeln!(out, "# poles");
    let poles: Vec<String> = t.poles.iter().map(|b| format!("{} {}", b.re, b.im)).collect();
    let _ = writeln!(out, "{}", poles.join(" "));
    out
}

pub fn read_tuple(path: &Path) -> Result<TupleFile> {
    let text = std::fs::read_to_string(path).map_err(|e| perr(0, format!("{}: {e}", path.display())))?;
    parse_tuple(&text)
}

pub fn write_tuple(path: &Path, tf: &TupleFile) -> Result<()> {
    std::fs::write(path, format_tuple(tf)).map_err(|e| perr(0, format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jackson::QParams;
    use proptest::prelude::*;

    fn degree2_file() -> TupleFile {
        let p = QParams::real(0.5, 0.3, 0.7, 1.9, 2.3, 3.1).unwrap();
        TupleFile {
            q: p.q,
            lambda: p.lambda,
            tuple: MatrixTuple::degree2(&p),
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let tf = degree2_file();
        let text = format_tuple(&tf);
        let back = parse_tuple(&text).unwrap();
        assert_eq!(back, tf);
        assert_eq!(format_tuple(&back), text);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.txt");
        let tf = degree2_file();
        write_tuple(&path, &tf).unwrap();
        assert_eq!(read_tuple(&path).unwrap(), tf);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "1 1 0.5 0 0.3 0\n1 0\n0.5 0 x\n";
        match parse_tuple(bad) {
            Err(QError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_tuple(""), Err(QError::Parse { .. })));
        assert!(matches!(parse_tuple("1 1 0.5 0\n"), Err(QError::Parse { line: 1, .. })));
        // missing pole line
        assert!(matches!(
            parse_tuple("1 1 0.5 0 0.3 0\n1 0\n2 0\n"),
            Err(QError::Parse { .. })
        ));
        // zero pole is rejected by tuple validation
        assert!(matches!(
            parse_tuple("1 1 0.5 0 0.3 0\n1 0\n2 0\n0 0\n"),
            Err(QError::Parse { line: 4, .. })
        ));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# header\n\n1 1 0.5 0 0.3 0\n# B_inf\n1 0\n\n2 0\n# poles\n3 0.5\n";
        let tf = parse_tuple(text).unwrap();
        assert_eq!(tf.tuple.poles, vec![C64::new(3.0, 0.5)]);
    }

    proptest! {
        #[test]
        fn random_tuples_round_trip(vals in proptest::collection::vec(-1e6f64..1e6, 2 * 4 * 3 + 4 + 4)) {
            let c = |k: usize| C64::new(vals[2 * k], vals[2 * k + 1]);
            let mat = |off: usize| CMatrix::from_fn(2, 2, |r, col| c(off + 2 * r + col));
            let poles = vec![c(12) + 1e7, c(13) - 1e7];
            let tuple = MatrixTuple::new(mat(0), vec![mat(4), mat(8)], poles).unwrap();
            let tf = TupleFile { q: C64::new(0.3, 0.1), lambda: c(14), tuple };
            prop_assert_eq!(parse_tuple(&format_tuple(&tf)).unwrap(), tf);
        }
    }
}
