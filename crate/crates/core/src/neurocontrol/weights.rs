//! Plain-text weight file.
//!
//! ```text
//! neuropilot-mlp 1
//! layers <n_in> <n_hidden> <n_out>
//! activation tanh linear
//! [input_mean]
//! <n_in values>
//! [input_std]
//! <n_in values>
//! [output_mean]
//! <n_out values>
//! [output_std]
//! <n_out values>
//! [w1]
//! <n_hidden rows of n_in values>
//! [b1]
//! <n_hidden values>
//! [w2]
//! <n_out rows of n_hidden values>
//! [b2]
//! <n_out values>
//! ```
//!
//! Values are space-separated decimals printed with the shortest
//! representation that round-trips exactly. Lines starting with `#` and blank
//! lines are ignored.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::mlp::{MlpController, Normalization};

pub const MAGIC: &str = "neuropilot-mlp";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum WeightFileError {
    #[error("weight file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("weight file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("weight file describes an inconsistent network: {0}")]
    Inconsistent(String),
}

fn join(values: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{v:?}").unwrap();
    }
    s
}

pub fn to_text(net: &MlpController) -> String {
    let mut out = String::new();
    writeln!(out, "{MAGIC} {VERSION}").unwrap();
    writeln!(out, "layers {} {} {}", net.n_in, net.n_hidden, net.n_out).unwrap();
    writeln!(out, "activation tanh linear").unwrap();
    let sections: [(&str, &[f64], usize); 8] = [
        ("input_mean", &net.input_stats.mean, net.n_in),
        ("input_std", &net.input_stats.std, net.n_in),
        ("output_mean", &net.output_stats.mean, net.n_out),
        ("output_std", &net.output_stats.std, net.n_out),
        ("w1", &net.w1, net.n_in),
        ("b1", &net.b1, net.n_hidden),
        ("w2", &net.w2, net.n_hidden),
        ("b2", &net.b2, net.n_out),
    ];
    for (name, values, row_len) in sections {
        writeln!(out, "[{name}]").unwrap();
        for row in values.chunks(row_len.max(1)) {
            writeln!(out, "{}", join(row)).unwrap();
        }
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, l) in self.inner.by_ref() {
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            self.last = i + 1;
            return Some((i + 1, t));
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str), WeightFileError> {
        self.next().ok_or_else(|| WeightFileError::Parse {
            line: self.last + 1,
            msg: format!("unexpected end of file, expected {what}"),
        })
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> WeightFileError {
    WeightFileError::Parse { line, msg: msg.into() }
}

fn numbers(line: usize, text: &str) -> Result<Vec<f64>, WeightFileError> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(line, format!("`{tok}` is not a finite number")))
        })
        .collect()
}

fn section(lines: &mut Lines<'_>, name: &str, rows: usize, cols: usize) -> Result<Vec<f64>, WeightFileError> {
    let (n, header) = lines.expect(&format!("[{name}]"))?;
    if header != format!("[{name}]") {
        return Err(parse_err(n, format!("expected section [{name}], found `{header}`")));
    }
    let mut out = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let (n, text) = lines.expect(&format!("a row of [{name}]"))?;
        let row = numbers(n, text)?;
        if row.len() != cols {
            return Err(parse_err(n, format!("[{name}] row has {} values, expected {cols}", row.len())));
        }
        out.extend(row);
    }
    Ok(out)
}

pub fn from_text(text: &str) -> Result<MlpController, WeightFileError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let (n, magic) = lines.expect("header")?;
    let mut it = magic.split_whitespace();
    if it.next() != Some(MAGIC) {
        return Err(parse_err(n, format!("not a {MAGIC} file")));
    }
    match it.next().map(str::parse::<u32>) {
        Some(Ok(VERSION)) => {}
        other => return Err(parse_err(n, format!("unsupported format version {other:?}"))),
    }

    let (n, layers) = lines.expect("layers")?;
    let sizes: Vec<usize> = layers
        .strip_prefix("layers")
        .ok_or_else(|| parse_err(n, "expected `layers <in> <hidden> <out>`"))?
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| parse_err(n, format!("bad layer size `{t}`"))))
        .collect::<Result<_, _>>()?;
    let [n_in, n_hidden, n_out] = sizes[..] else {
        return Err(parse_err(n, "expected exactly three layer sizes"));
    };
    if n_in == 0 || n_hidden == 0 || n_out == 0 {
        return Err(parse_err(n, "layer sizes must be positive"));
    }

    let (n, act) = lines.expect("activation")?;
    if act.split_whitespace().collect::<Vec<_>>() != ["activation", "tanh", "linear"] {
        return Err(parse_err(n, format!("unsupported activation line `{act}`")));
    }

    let input_mean = section(&mut lines, "input_mean", 1, n_in)?;
    let input_std = section(&mut lines, "input_std", 1, n_in)?;
    let output_mean = section(&mut lines, "output_mean", 1, n_out)?;
    let output_std = section(&mut lines, "output_std", 1, n_out)?;
    let w1 = section(&mut lines, "w1", n_hidden, n_in)?;
    let b1 = section(&mut lines, "b1", 1, n_hidden)?;
    let w2 = section(&mut lines, "w2", n_out, n_hidden)?;
    let b2 = section(&mut lines, "b2", 1, n_out)?;
    if let Some((n, extra)) = lines.next() {
        return Err(parse_err(n, format!("unexpected trailing content `{extra}`")));
    }

    let net = MlpController {
        n_in,
        n_hidden,
        n_out,
        w1,
        b1,
        w2,
        b2,
        input_stats: Normalization {
            mean: input_mean,
            std: input_std,
        },
        output_stats: Normalization {
            mean: output_mean,
            std: output_std,
        },
    };
    if !net.is_consistent() {
        return Err(WeightFileError::Inconsistent(
            "normalization standard deviations must be strictly positive".into(),
        ));
    }
    Ok(net)
}

pub fn save(net: &MlpController, path: &Path) -> Result<(), WeightFileError> {
    crate::harness::write_atomic(path, to_text(net).as_bytes()).map_err(|source| WeightFileError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load(path: &Path) -> Result<MlpController, WeightFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| WeightFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    from_text(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn text_round_trip_is_exact(seed in any::<u64>(), n_in in 1usize..6, n_hidden in 1usize..8, n_out in 1usize..4) {
            let mut net = MlpController::random(n_in, n_hidden, n_out, seed);
            net.input_stats.mean.iter_mut().enumerate().for_each(|(i, m)| *m = i as f64 * 0.1 - 1e-7);
            net.output_stats.std.iter_mut().for_each(|s| *s = 3.3e-3);
            let back = from_text(&to_text(&net)).unwrap();
            prop_assert_eq!(back, net);
        }
    }

    #[test]
    fn header_is_documented_shape() {
        let text = to_text(&MlpController::zeros(7, 10, 3));
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("neuropilot-mlp 1"));
        assert_eq!(lines.next(), Some("layers 7 10 3"));
        assert_eq!(lines.next(), Some("activation tanh linear"));
        assert_eq!(text.lines().filter(|l| l.starts_with('[')).count(), 8);
    }

    #[test]
    fn rejects_wrong_magic_and_version() {
        assert!(from_text("something-else 1\n").is_err());
        let text = to_text(&MlpController::zeros(1, 1, 1)).replace("neuropilot-mlp 1", "neuropilot-mlp 2");
        assert!(from_text(&text).is_err());
    }

    #[test]
    fn rejects_short_row_with_line_number() {
        let text = to_text(&MlpController::zeros(2, 2, 1));
        let broken = text.replacen("0.0 0.0\n", "0.0\n", 3);
        match from_text(&broken) {
            Err(WeightFileError::Parse { line, .. }) => assert!(line > 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_non_positive_std() {
        let text = to_text(&MlpController::zeros(1, 1, 1));
        let broken = text.replace("[input_std]\n1.0", "[input_std]\n0.0");
        assert!(matches!(from_text(&broken), Err(WeightFileError::Inconsistent(_))));
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let net = MlpController::random(2, 3, 1, 4);
        let text = format!("# trained weights\n\n{}", to_text(&net));
        assert_eq!(from_text(&text).unwrap(), net);
    }
}
