//! Matrix documents: whitespace text (one row per line, `a+bi` complex
//! tokens), bracketed inline literals such as `[0 -1; 1 0]` or `[[0,-1],[1,0]]`,
//! and JSON `{"field": ..., "rows": ...}` with complex entries as `[re, im]`.

use std::fmt::Write as _;
use std::path::Path;

use linflow::{Field, Mat, Scalar};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Serialized form of a matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixDocument {
    pub field: Field,
    pub rows: Vec<Vec<Value>>,
}

impl MatrixDocument {
    pub fn from_mat(m: &Mat) -> MatrixDocument {
        let rows = (0..m.rows())
            .map(|i| {
                (0..m.cols())
                    .map(|j| {
                        let z = m.data()[i * m.cols() + j];
                        match m.field() {
                            Field::Real => Value::from(z.re),
                            Field::Complex => Value::from(vec![z.re, z.im]),
                        }
                    })
                    .collect()
            })
            .collect();
        MatrixDocument { field: m.field(), rows }
    }
}

fn input_error(source: &str, msg: impl Into<String>) -> CliError {
    CliError::Input(format!("{source}: {}", msg.into()))
}

/// Reads `input` as a file when one exists at that path, otherwise as an
/// inline literal starting with `[` or `{`.
pub fn load(input: &str, field: Option<Field>) -> Result<Mat, CliError> {
    let path = Path::new(input);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| input_error(input, e.to_string()))?;
        return parse(&text, field).map_err(|e| e.context(input));
    }
    let trimmed = input.trim_start();
    if trimmed.starts_with('[') || trimmed.starts_with('{') {
        return parse(input, field).map_err(|e| e.context("inline matrix"));
    }
    Err(input_error(input, "no such file, and not an inline matrix literal"))
}

/// Parses JSON when the text starts with `{`, the text format otherwise.
pub fn parse(text: &str, field: Option<Field>) -> Result<Mat, CliError> {
    if text.trim_start().starts_with('{') {
        parse_json(text, field)
    } else {
        parse_text(text, field)
    }
}

fn parse_json(text: &str, field: Option<Field>) -> Result<Mat, CliError> {
    let doc: MatrixDocument = serde_json::from_str(text)
        .map_err(|e| CliError::Input(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    let mut rows: Vec<Vec<Scalar>> = Vec::with_capacity(doc.rows.len());
    for (i, row) in doc.rows.iter().enumerate() {
        let mut out = Vec::with_capacity(row.len());
        for (j, v) in row.iter().enumerate() {
            let bad = || CliError::Input(format!("row {}, entry {}: expected a number or [re, im], got {v}", i + 1, j + 1));
            let z = match v {
                Value::Number(n) => Scalar::new(n.as_f64().ok_or_else(bad)?, 0.0),
                Value::Array(p) if p.len() == 2 => {
                    Scalar::new(p[0].as_f64().ok_or_else(bad)?, p[1].as_f64().ok_or_else(bad)?)
                }
                _ => return Err(bad()),
            };
            if doc.field == Field::Real && z.im != 0.0 {
                return Err(CliError::Input(format!(
                    "row {}, entry {}: non-real entry in a matrix declared real",
                    i + 1,
                    j + 1
                )));
            }
            out.push(z);
        }
        rows.push(out);
    }
    build(rows, field.map_or(doc.field, |f| f.join(doc.field)), field)
}

fn parse_text(text: &str, field: Option<Field>) -> Result<Mat, CliError> {
    let cleaned = strip_brackets(text);
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    let mut any_complex = false;
    for (line_no, line) in cleaned.lines().enumerate() {
        if line.trim_start().starts_with('#') {
            continue;
        }
        let mut col0 = 0;
        for segment in line.split(';') {
            let mut row = Vec::new();
            let mut offset = 0;
            for token in segment.split_whitespace() {
                let start = segment[offset..].find(token).map_or(offset, |p| offset + p);
                offset = start + token.len();
                let column = line[..col0 + start].chars().count() + 1;
                let (z, complex) = parse_token(token).ok_or_else(|| {
                    CliError::Input(format!("line {}, column {column}: cannot parse entry '{token}'", line_no + 1))
                })?;
                any_complex |= complex;
                row.push(z);
            }
            col0 += segment.len() + 1;
            if row.is_empty() {
                continue;
            }
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(CliError::Input(format!(
                        "line {}: row has {} entries, expected {}",
                        line_no + 1,
                        row.len(),
                        first.len()
                    )));
                }
            }
            rows.push(row);
        }
    }
    let inferred = if any_complex { Field::Complex } else { Field::Real };
    build(rows, field.map_or(inferred, |f| f.join(inferred)), field)
}

/// Blanks out brackets and commas keeping every column in place; a row
/// break `],[` becomes `;`.
fn strip_brackets(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = chars.clone();
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            ']' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j] == ',' || chars[j] == ' ' || chars[j] == '\t') {
                    j += 1;
                }
                if j < chars.len() && chars[j] == '[' {
                    out[i] = ';';
                    for c in out.iter_mut().take(j + 1).skip(i + 1) {
                        *c = ' ';
                    }
                    i = j + 1;
                    continue;
                }
                out[i] = ' ';
            }
            '[' | ',' => out[i] = ' ',
            _ => {}
        }
        i += 1;
    }
    out.into_iter().collect()
}

fn parse_real(s: &str) -> Option<f64> {
    let x: f64 = s.parse().ok()?;
    x.is_finite().then_some(x)
}

/// `x`, `a+bi`, `a-bi`, `bi`, `i`, `-i`; returns the value and whether the
/// token was written as complex.
fn parse_token(t: &str) -> Option<(Scalar, bool)> {
    let Some(body) = t.strip_suffix('i') else {
        return parse_real(t).map(|x| (Scalar::new(x, 0.0), false));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&k| {
        (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E')
    });
    let imag = |s: &str| match s {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => parse_real(s),
    };
    let z = match split {
        Some(k) => Scalar::new(parse_real(&body[..k])?, imag(&body[k..])?),
        None => Scalar::new(0.0, imag(body)?),
    };
    Some((z, true))
}

fn build(rows: Vec<Vec<Scalar>>, target: Field, requested: Option<Field>) -> Result<Mat, CliError> {
    if rows.is_empty() {
        return Err(CliError::Input("no matrix rows found".into()));
    }
    if requested == Some(Field::Real) && target == Field::Complex {
        return Err(CliError::Input("--field real given but the matrix has non-real entries".into()));
    }
    let (r, c) = (rows.len(), rows[0].len());
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != c) {
        return Err(CliError::Input(format!("row {} has {} entries, expected {c}", i + 1, row.len())));
    }
    let data = rows.into_iter().flatten().collect();
    Mat::new(r, c, target, data).map_err(|e| CliError::Input(e.to_string()))
}

fn fmt_real(x: f64) -> String {
    // normalize negative zero so emitted text is canonical
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x}")
}

pub fn fmt_scalar(z: Scalar, field: Field) -> String {
    match field {
        Field::Real => fmt_real(z.re),
        Field::Complex => {
            let im = if z.im == 0.0 { 0.0 } else { z.im };
            if im.is_sign_negative() {
                format!("{}-{}i", fmt_real(z.re), fmt_real(-im))
            } else {
                format!("{}+{}i", fmt_real(z.re), fmt_real(im))
            }
        }
    }
}

/// Canonical text form: one row per line, single spaces.
pub fn emit(m: &Mat) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| fmt_scalar(m.data()[i * m.cols() + j], m.field())).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

/// SHA-256 of the field tag and canonical text form.
pub fn digest(m: &Mat) -> String {
    let mut h = Sha256::new();
    h.update(m.field().to_string().as_bytes());
    h.update(b"\n");
    h.update(emit(m).as_bytes());
    hex::encode(h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn z(re: f64, im: f64) -> Scalar {
        Scalar::new(re, im)
    }

    #[test]
    fn tokens() {
        assert_eq!(parse_token("1.5"), Some((z(1.5, 0.0), false)));
        assert_eq!(parse_token("i"), Some((z(0.0, 1.0), true)));
        assert_eq!(parse_token("-i"), Some((z(0.0, -1.0), true)));
        assert_eq!(parse_token("2-3i"), Some((z(2.0, -3.0), true)));
        assert_eq!(parse_token("1e-3+2.5e2i"), Some((z(1e-3, 250.0), true)));
        assert_eq!(parse_token("-1e+2-i"), Some((z(-100.0, -1.0), true)));
        assert_eq!(parse_token("4i"), Some((z(0.0, 4.0), true)));
        assert_eq!(parse_token("nan"), None);
        assert_eq!(parse_token("inf"), None);
        assert_eq!(parse_token("1+"), None);
        assert_eq!(parse_token("x"), None);
    }

    #[test]
    fn text_and_inline_forms_agree() {
        let want = Mat::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        for text in ["0 -1\n1 0\n", "[0 -1; 1 0]", "[[0,-1],[1,0]]", "[[0, -1], [1, 0]]", "# rotation\n0 -1\n\n1 0"] {
            assert_eq!(parse(text, None).unwrap(), want, "{text}");
        }
        let c = parse("[i]", None).unwrap();
        assert_eq!(c.field(), Field::Complex);
        assert_eq!(c.data()[0], z(0.0, 1.0));
        assert_eq!(parse("[1]", Some(Field::Complex)).unwrap().field(), Field::Complex);
        assert!(parse("[i]", Some(Field::Real)).is_err());
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("1 2\n3 x\n", None).unwrap_err().to_string();
        assert!(e.contains("line 2, column 3"), "{e}");
        let e = parse("1 2\n3\n", None).unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        let e = parse("{\"field\": \"real\", \"rows\": [[1, 2],\n [3, }", None).unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        assert!(parse("", None).is_err());
    }

    #[test]
    fn json_documents() {
        let m = parse(r#"{"field": "complex", "rows": [[[0, 1], 2], [3, [4, -5]]]}"#, None).unwrap();
        assert_eq!(m.field(), Field::Complex);
        assert_eq!(m.data()[3], z(4.0, -5.0));
        assert!(parse(r#"{"field": "real", "rows": [[[0, 1]]]}"#, None).is_err());
        let doc = MatrixDocument::from_mat(&m);
        let back = parse(&serde_json::to_string(&doc).unwrap(), None).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn canonical_text_round_trips() {
        let m = Mat::from_complex_rows(&[&[z(0.1, -0.0), z(-2.5, 1e-300)], &[z(1.0 / 3.0, -7.0), z(0.0, 0.0)]]);
        let text = emit(&m);
        let back = parse(&text, None).unwrap();
        assert_eq!(emit(&back), text);
        assert_eq!(digest(&back), digest(&m));
        let r = Mat::from_real_rows(&[&[-0.0, 1e-10], &[123456789.125, -3.0]]);
        assert_eq!(emit(&parse(&emit(&r), None).unwrap()), emit(&r));
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![any::<f64>().prop_filter("finite", |x| x.is_finite()), (-3i32..4).prop_map(f64::from)]
    }

    proptest! {
        #[test]
        fn emit_parse_identity(
            (r, c, vals) in (1usize..5, 1usize..5).prop_flat_map(|(r, c)| (Just(r), Just(c), prop::collection::vec((finite(), finite()), r * c))),
            complex in any::<bool>(),
        ) {
            let field = if complex { Field::Complex } else { Field::Real };
            let data = vals.iter().map(|&(a, b)| z(a, if complex { b } else { 0.0 })).collect();
            let m = Mat::new(r, c, field, data).unwrap();
            let text = emit(&m);
            let back = parse(&text, Some(field)).unwrap();
            prop_assert_eq!(emit(&back), text);
            let doc = serde_json::to_string(&MatrixDocument::from_mat(&m)).unwrap();
            prop_assert_eq!(emit(&parse(&doc, None).unwrap()), emit(&m));
        }
    }
}
