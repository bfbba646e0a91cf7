//! Deterministic text output shared by the CSV writers.

use std::io::Write;

use crate::error::Result;
use crate::scalar::Scalar;

/// Formats a real with 17 significant digits and a `.` decimal separator,
/// independent of locale. Round-trips every `f64`.
pub fn format_real<T: Scalar>(x: T) -> String {
    format!("{:.16e}", x.to_f64_lossy())
}

/// Writes a header row followed by numeric rows.
pub fn write_csv<T: Scalar, W: Write>(out: W, header: &[String], rows: impl IntoIterator<Item = Vec<T>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.into_iter().map(format_real))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits_round_trip() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0] {
            let s = format_real(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            assert!(!s.contains(','));
        }
        assert_eq!(format_real(1.0f64), "1.0000000000000000e0");
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &["t".into(), "x".into()], vec![vec![0.0, 1.5], vec![0.5, -2.0]]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "t,x\n0.0000000000000000e0,1.5000000000000000e0\n5.0000000000000000e-1,-2.0000000000000000e0\n"
        );
    }
}
