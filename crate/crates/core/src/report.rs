//! Deterministic CSV and JSON emission.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

/// Version tag carried by every JSON report.
pub const SCHEMA_VERSION: &str = "1.0";

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// A CSV document with a single header row.
pub fn csv_table<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.as_ref().iter().map(|v| fmt_f64(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// JSON formatter printing every float with 17 significant digits, and
/// non-finite floats as `null`.
#[derive(Debug, Default, Clone, Copy)]
pub struct SeventeenDigits;

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes `value` as compact JSON with 17-digit floats.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, SeventeenDigits);
    value.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// Pretty-printed variant of [`to_json`].
pub fn to_json_pretty<T: Serialize + ?Sized>(value: &T) -> String {
    let compact = to_json(value);
    let parsed: serde_json::Value = serde_json::from_str(&compact).expect("round trip");
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, PrettySeventeen::default());
    parsed.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

#[derive(Default)]
struct PrettySeventeen<'a> {
    inner: serde_json::ser::PrettyFormatter<'a>,
}

macro_rules! delegate {
    ($($name:ident $(, $arg:ident : $ty:ty)*;)*) => {
        $(fn $name<W: ?Sized + io::Write>(&mut self, writer: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.inner.$name(writer $(, $arg)*)
        })*
    };
}

impl Formatter for PrettySeventeen<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        SeventeenDigits.write_f64(writer, value)
    }

    delegate! {
        begin_array;
        end_array;
        begin_array_value, first: bool;
        end_array_value;
        begin_object;
        end_object;
        begin_object_key, first: bool;
        begin_object_value;
        end_object_value;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        let s = to_json(&serde_json::json!({"x": 0.1, "n": 3, "bad": f64::NAN}));
        assert_eq!(s, r#"{"bad":null,"n":3,"x":1.0000000000000001e-1}"#);
        let v: f64 = "1.0000000000000001e-1".parse().unwrap();
        assert_eq!(v, 0.1);
    }

    #[test]
    fn pretty_keeps_formatting() {
        let s = to_json_pretty(&vec![1.5f64, 2.0]);
        assert!(s.contains("1.5000000000000000e0"));
        assert!(s.contains('\n'));
    }

    #[test]
    fn csv_has_one_header() {
        let s = csv_table(&["a", "b"], vec![[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(s.lines().count(), 3);
        assert!(s.starts_with("a,b\n"));
    }
}
