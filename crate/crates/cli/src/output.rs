//! CSV and JSON writers. Numbers go out with 6 significant digits and '.'.

use std::io::Write;
use std::path::Path;

/// Plain decimal with `sig` significant digits; never scientific notation.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    // the exponent after rounding, so 0.99999996 counts as 1.00000
    let sci = format!("{:.*e}", sig.saturating_sub(1), x);
    let exp: i64 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    let decimals = (sig as i64 - 1 - exp).max(0) as usize;
    format!("{:.*}", decimals, x)
}

pub fn num(x: f64) -> String {
    fmt_sig(x, 6)
}

/// Rows of already formatted cells as CSV bytes.
pub fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> std::io::Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))
}

pub fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut f = std::fs::File::create(dir.join(name))?;
    f.write_all(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(num(0.727012345), "0.727012");
        assert_eq!(num(0.0001234567), "0.000123457");
        assert_eq!(num(1.0), "1.00000");
        assert_eq!(num(123456.7), "123457");
        assert_eq!(num(-0.2887), "-0.288700");
        assert_eq!(num(0.0), "0");
        assert_eq!(num(-1e-30), "-0.00000000000000000000000000000100000");
    }

    #[test]
    fn rounding_carry() {
        assert_eq!(num(9.9999996), "10.0000");
        assert_eq!(num(0.99999996), "1.00000");
    }

    #[test]
    fn csv_layout() {
        let b = csv_bytes(&["a".into(), "b".into()], &[vec!["1".into(), "2".into()]]).unwrap();
        assert_eq!(String::from_utf8(b).unwrap(), "a,b\n1,2\n");
    }
}
