//! JSON and CSV writers. Reals are always printed with 17 significant digits
//! so that every double round-trips.

use std::fmt::Write as _;

use nalgebra::DMatrix;

#[derive(Clone, Debug)]
pub enum Doc {
    Null,
    Bool(bool),
    Int(String),
    Real(f64),
    Str(String),
    Array(Vec<Doc>),
    Object(Vec<(String, Doc)>),
}

pub fn real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".into()
    }
}

impl Doc {
    pub fn object() -> ObjectBuilder {
        ObjectBuilder(Vec::new())
    }

    pub fn reals(values: &[f64]) -> Doc {
        Doc::Array(values.iter().map(|&v| Doc::Real(v)).collect())
    }

    pub fn matrix(m: &DMatrix<f64>) -> Doc {
        Doc::Array(
            m.row_iter()
                .map(|row| Doc::Array(row.iter().map(|&v| Doc::Real(v)).collect()))
                .collect(),
        )
    }

    pub fn str(s: impl Into<String>) -> Doc {
        Doc::Str(s.into())
    }

    pub fn int(v: impl ToString) -> Doc {
        Doc::Int(v.to_string())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Doc::Null => out.push_str("null"),
            Doc::Bool(b) => write!(out, "{b}").unwrap(),
            Doc::Int(s) => out.push_str(s),
            Doc::Real(v) => out.push_str(&real(*v)),
            Doc::Str(s) => out.push_str(&serde_json::to_string(s).expect("strings serialize")),
            Doc::Array(items) if items.iter().all(Doc::is_scalar) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    item.write(out, indent);
                }
                out.push(']');
            }
            Doc::Array(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    out.push_str(if i > 0 { ",\n" } else { "\n" });
                    pad(out, indent + 1);
                    item.write(out, indent + 1);
                }
                out.push('\n');
                pad(out, indent);
                out.push(']');
            }
            Doc::Object(fields) if fields.is_empty() => out.push_str("{}"),
            Doc::Object(fields) => {
                out.push('{');
                for (i, (key, value)) in fields.iter().enumerate() {
                    out.push_str(if i > 0 { ",\n" } else { "\n" });
                    pad(out, indent + 1);
                    out.push_str(&serde_json::to_string(key).expect("strings serialize"));
                    out.push_str(": ");
                    value.write(out, indent + 1);
                }
                out.push('\n');
                pad(out, indent);
                out.push('}');
            }
        }
    }

    fn is_scalar(&self) -> bool {
        !matches!(self, Doc::Array(_) | Doc::Object(_))
    }
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

pub struct ObjectBuilder(Vec<(String, Doc)>);

impl ObjectBuilder {
    pub fn field(mut self, key: &str, value: Doc) -> Self {
        self.0.push((key.to_string(), value));
        self
    }

    pub fn build(self) -> Doc {
        Doc::Object(self.0)
    }
}

/// One CSV record; fields containing separators or quotes are quoted.
pub fn csv_line(fields: &[String]) -> String {
    let mut line = fields
        .iter()
        .map(|f| {
            if f.contains([',', '"', '\n']) {
                format!("\"{}\"", f.replace('"', "\"\""))
            } else {
                f.clone()
            }
        })
        .collect::<Vec<_>>()
        .join(",");
    line.push('\n');
    line
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_keep_seventeen_digits() {
        assert_eq!(real(0.1), "1.0000000000000001e-1");
        assert_eq!(real(-2.0), "-2.0000000000000000e0");
        assert_eq!(real(f64::NAN), "null");
        let v: f64 = real(std::f64::consts::PI).parse().unwrap();
        assert_eq!(v, std::f64::consts::PI);
    }

    #[test]
    fn documents_are_valid_json() {
        let doc = Doc::object()
            .field("a", Doc::reals(&[1.0, -0.5]))
            .field("b", Doc::Array(vec![Doc::object().field("c", Doc::str("x\"y")).build()]))
            .field("d", Doc::int(3))
            .field("e", Doc::Null)
            .build();
        let parsed: serde_json::Value = serde_json::from_str(&doc.render()).unwrap();
        assert_eq!(parsed["a"][1], -0.5);
        assert_eq!(parsed["b"][0]["c"], "x\"y");
        assert_eq!(parsed["d"], 3);
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_line(&["a".into(), "b,c".into()]), "a,\"b,c\"\n");
    }
}
