//! Plain-text number formatting shared by the record formats.

use alloc::format;
use alloc::string::String;

use crate::error::{Error, Result};

/// Seventeen significant digits; enough to round-trip every `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x == f64::INFINITY {
        return String::from("inf");
    }
    if x == f64::NEG_INFINITY {
        return String::from("-inf");
    }
    format!("{:.16e}", x)
}

pub fn parse_f64(s: &str, line: usize) -> Result<f64> {
    match s.trim() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        t => t.parse::<f64>().map_err(|e| Error::Parse {
            line,
            msg: format!("bad number `{t}`: {e}"),
        }),
    }
}

pub fn parse_usize(s: &str, line: usize) -> Result<usize> {
    s.trim().parse::<usize>().map_err(|e| Error::Parse {
        line,
        msg: format!("bad integer `{}`: {e}", s.trim()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_awkward_values() {
        for &x in &[0.1, 1.0 / 3.0, 2.0f64.sqrt(), 5e-324, 1.7976931348623157e308, -0.0] {
            let back = parse_f64(&fmt_f64(x), 0).unwrap();
            assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
