//! Fixed numeric formatting for machine-readable output.

use std::io;

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, Serializer};

/// Compact JSON writer that prints every float with 17 significant digits,
/// so that output is byte-stable and round-trips exactly.
struct SignificantDigits;

impl Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            CompactFormatter.write_null(writer)
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, SignificantDigits);
    value
        .serialize(&mut ser)
        .expect("report types serialize without error");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Six-decimal rendering used in text reports.
pub fn fixed(v: f64) -> String {
    format!("{v:.6}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Sample {
        a: f64,
        b: Vec<f64>,
        c: Option<f64>,
        n: u64,
    }

    #[test]
    fn floats_carry_seventeen_digits() {
        let s = to_json(&Sample {
            a: 0.1,
            b: vec![-2.5, 1e-300],
            c: None,
            n: 7,
        });
        assert_eq!(
            s,
            "{\"a\":1.0000000000000001e-1,\"b\":[-2.5000000000000000e0,1.0000000000000000e-300],\"c\":null,\"n\":7}\n"
        );
    }

    #[test]
    fn output_parses_back_to_the_same_bits() {
        let values = [
            0.918_430_246_731_188_4,
            -0.021_711_947_463_642_682,
            154.505_3,
            5e-324,
        ];
        let parsed: Vec<f64> = serde_json::from_str(&to_json(&values)).unwrap();
        assert_eq!(parsed, values);
    }

    #[test]
    fn non_finite_becomes_null() {
        assert_eq!(to_json(&[f64::INFINITY]), "[null]\n");
    }
}
