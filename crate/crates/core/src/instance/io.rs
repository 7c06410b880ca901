//! Plain-text instance formats.
//!
//! ```text
//! OTIMG <res>
//! <res*res values: image A, row-major>
//! <res*res values: image B, row-major>
//! metric L1|L2|LINF
//!
//! OTLP <m> <n>
//! <m values: a>
//! <n values: b>
//! <m*n values: cost matrix, row-major>
//! ```
//!
//! Tokens are whitespace separated; lines starting with `#` are comments.

use std::fmt::Write as _;
use std::path::Path;

use super::{check_balance, CostSpec, GridMetric, Metric, OtInstance};
use crate::error::{OtError, Result};

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let mut items = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim_start().starts_with('#') {
                continue;
            }
            items.extend(line.split_whitespace().map(|t| (idx + 1, t)));
        }
        let last_line = text.lines().count().max(1);
        Tokens { items, pos: 0, last_line }
    }

    fn line(&self) -> usize {
        self.items
            .get(self.pos)
            .map(|(l, _)| *l)
            .unwrap_or(self.last_line)
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.items.get(self.pos) {
            Some(&tok) => {
                self.pos += 1;
                Ok(tok)
            }
            None => Err(OtError::Parse {
                line: self.last_line,
                msg: format!("unexpected end of file, expected {what}"),
            }),
        }
    }

    fn usize(&mut self, what: &str) -> Result<usize> {
        let (line, tok) = self.next(what)?;
        tok.parse::<usize>().map_err(|_| OtError::Parse {
            line,
            msg: format!("expected {what}, found {tok:?}"),
        })
    }

    fn values(&mut self, count: usize, what: &str, nonnegative: bool) -> Result<(Vec<f64>, usize)> {
        let mut out = Vec::with_capacity(count);
        let mut line = self.line();
        for _ in 0..count {
            let (l, tok) = self.next(what)?;
            line = l;
            let v: f64 = tok.parse().map_err(|_| OtError::Parse {
                line: l,
                msg: format!("expected {what}, found {tok:?}"),
            })?;
            if !v.is_finite() {
                return Err(OtError::Parse { line: l, msg: format!("non-finite {what}") });
            }
            if nonnegative && v < 0.0 {
                return Err(OtError::Parse { line: l, msg: format!("negative {what} {v}") });
            }
            out.push(v);
        }
        Ok((out, line))
    }

    fn finish(&self) -> Result<()> {
        match self.items.get(self.pos) {
            None => Ok(()),
            Some((line, tok)) => Err(OtError::Parse {
                line: *line,
                msg: format!("trailing token {tok:?}"),
            }),
        }
    }
}

/// Column-major vector from a row-major `rows × cols` block.
fn row_major_to_vec(block: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            out[r + c * rows] = block[r * cols + c];
        }
    }
    out
}

pub fn parse_instance(text: &str) -> Result<OtInstance> {
    let mut toks = Tokens::new(text);
    let (line, magic) = toks.next("header")?;
    let build = |a: Vec<f64>, b: Vec<f64>, cost: CostSpec, line: usize| {
        check_balance(&a, &b).map_err(|msg| OtError::Parse { line, msg })?;
        OtInstance::new(a, b, cost).map_err(|e| OtError::Parse { line, msg: e.to_string() })
    };
    match magic {
        "OTIMG" => {
            let res = toks.usize("resolution")?;
            if res == 0 {
                return Err(OtError::Parse { line, msg: "resolution must be positive".into() });
            }
            let (img_a, _) = toks.values(res * res, "mass", true)?;
            let (img_b, b_line) = toks.values(res * res, "mass", true)?;
            let (mline, kw) = toks.next("metric line")?;
            if kw != "metric" {
                return Err(OtError::Parse { line: mline, msg: format!("expected 'metric', found {kw:?}") });
            }
            let (mline, name) = toks.next("metric name")?;
            let metric = Metric::parse(name).ok_or_else(|| OtError::Parse {
                line: mline,
                msg: format!("unknown metric {name:?}"),
            })?;
            toks.finish()?;
            let a = row_major_to_vec(&img_a, res, res);
            let b = row_major_to_vec(&img_b, res, res);
            build(a, b, CostSpec::Grid(GridMetric::square(res, metric)), b_line)
        }
        "OTLP" => {
            let m = toks.usize("m")?;
            let n = toks.usize("n")?;
            if m == 0 || n == 0 {
                return Err(OtError::Parse { line, msg: "m and n must be positive".into() });
            }
            let (a, _) = toks.values(m, "mass", true)?;
            let (b, b_line) = toks.values(n, "mass", true)?;
            let (costs, _) = toks.values(m * n, "cost", true)?;
            toks.finish()?;
            build(a, b, CostSpec::Explicit(row_major_to_vec(&costs, m, n)), b_line)
        }
        other => Err(OtError::Parse {
            line,
            msg: format!("malformed header: expected OTIMG or OTLP, found {other:?}"),
        }),
    }
}

fn push_row(out: &mut String, values: impl Iterator<Item = f64>) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(' ');
        }
        first = false;
        let _ = write!(out, "{v}");
    }
    out.push('\n');
}

/// Square grid instances are written as OTIMG, everything else as OTLP.
pub fn format_instance(inst: &OtInstance) -> String {
    let mut out = String::new();
    match inst.cost_spec() {
        CostSpec::Grid(g) if g.rows == g.cols => {
            let res = g.rows;
            let _ = writeln!(out, "OTIMG {res}");
            for img in [inst.a(), inst.b()] {
                for r in 0..res {
                    push_row(&mut out, (0..res).map(|c| img[r + c * res]));
                }
            }
            let _ = writeln!(out, "metric {}", g.metric.name());
        }
        _ => {
            let (m, n) = (inst.m(), inst.n());
            let view = inst.cost_view();
            let _ = writeln!(out, "OTLP {m} {n}");
            push_row(&mut out, inst.a().iter().cloned());
            push_row(&mut out, inst.b().iter().cloned());
            for i in 0..m {
                push_row(&mut out, (0..n).map(|k| view.cost(i + k * m)));
            }
        }
    }
    out
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<OtInstance> {
    let text = std::fs::read_to_string(path)?;
    parse_instance(&text)
}

pub fn write_instance(inst: &OtInstance, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_instance(inst))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{random_explicit_instance, synthetic_instance, SyntheticKind};
    use proptest::prelude::*;

    #[test]
    fn parses_small_otlp() {
        let text = "# tiny\nOTLP 2 2\n0.5 0.5\n0.5 0.5\n0 1\n1 0\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!((inst.m(), inst.n()), (2, 2));
        assert_eq!(inst.a(), &[0.5, 0.5]);
        assert_eq!(inst.cost_spec(), &CostSpec::Explicit(vec![0.0, 1.0, 1.0, 0.0]));
    }

    #[test]
    fn otlp_cost_is_row_major() {
        let inst = parse_instance("OTLP 2 3\n1 2\n1 1 1\n1 2 3\n4 5 6\n").unwrap();
        let view = inst.cost_view();
        // C[1][0] = 4 lives at j = 1 + 0*2, C[0][2] = 3 at j = 0 + 2*2
        assert_eq!(view.cost(1), 4.0);
        assert_eq!(view.cost(4), 3.0);
    }

    #[test]
    fn unbalanced_is_a_parse_error() {
        let err = parse_instance("OTLP 2 2\n0.5 0.5\n0.5 0.6\n0 1 1 0\n").unwrap_err();
        match err {
            OtError::Parse { line, msg } => {
                assert_eq!(line, 3);
                assert!(msg.contains("unbalanced marginals"), "{msg}");
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn negative_mass_reports_its_line() {
        match parse_instance("OTLP 2 2\n\n0.5 0.5\n-0.5 1.5\n0 1 1 0\n") {
            Err(OtError::Parse { line: 4, msg }) => assert!(msg.contains("negative")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_headers() {
        assert!(matches!(parse_instance("OTXX 2"), Err(OtError::Parse { line: 1, .. })));
        assert!(matches!(parse_instance("OTLP two 2"), Err(OtError::Parse { .. })));
        assert!(matches!(parse_instance(""), Err(OtError::Parse { .. })));
        assert!(matches!(
            parse_instance("OTIMG 1\n1\n1\nmetric L7\n"),
            Err(OtError::Parse { line: 4, .. })
        ));
        assert!(matches!(
            parse_instance("OTLP 1 1\n1\n1\n0\n9\n"),
            Err(OtError::Parse { line: 5, .. })
        ));
    }

    #[test]
    fn otimg_is_row_major_image() {
        let inst = parse_instance("OTIMG 2\n1 2\n3 4\n4 3\n2 1\nmetric LINF\n").unwrap();
        // image A = [[1,2],[3,4]] vectorized column-major: [1,3,2,4]
        assert_eq!(inst.a(), &[1.0, 3.0, 2.0, 4.0]);
        assert_eq!(inst.metric(), Some(Metric::Linf));
        assert_eq!(parse_instance(&format_instance(&inst)).unwrap(), inst);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn write_read_round_trip(seed in any::<u64>(), res in 2usize..6, kind in 0usize..5,
                                 m in 1usize..6, n in 1usize..6) {
            let grid = synthetic_instance(res, SyntheticKind::ALL[kind], Metric::L2, seed).unwrap();
            prop_assert_eq!(parse_instance(&format_instance(&grid)).unwrap(), grid);
            let dense = random_explicit_instance(m, n, seed).unwrap();
            prop_assert_eq!(parse_instance(&format_instance(&dense)).unwrap(), dense);
        }
    }
}
