//! Curve file input/output.
//!
//! Curves are stored as CSV with header `sigma,x,y`, one node per line,
//! UTF-8, LF line endings. Floats are written in Rust's shortest
//! round-trip representation, so read(write(c)) reproduces c bit-exactly.

use std::fs;
use std::path::Path;

use crate::curve::SampledCurve;
use crate::error::Error;
use crate::vec2::Vec2;
use crate::Result;

pub fn write_curve_csv(path: &Path, curve: &SampledCurve) -> Result<()> {
    let mut out = String::with_capacity(curve.points().len() * 48 + 16);
    out.push_str("sigma,x,y\n");
    for (s, p) in curve.sigma().iter().zip(curve.points()) {
        out.push_str(&format!("{},{},{}\n", s, p.x, p.y));
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_curve_csv(path: &Path) -> Result<SampledCurve> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == "sigma,x,y" => {}
        other => {
            return Err(Error::ParseFailure(format!(
                "expected header 'sigma,x,y', got {:?}",
                other
            )))
        }
    }
    let mut sigma = Vec::new();
    let mut points = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let mut field = |name: &str| -> Result<f64> {
            cols.next()
                .ok_or_else(|| {
                    Error::ParseFailure(format!("line {}: missing {name}", lineno + 2))
                })?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::ParseFailure(format!("line {}: {e}", lineno + 2)))
        };
        sigma.push(field("sigma")?);
        points.push(Vec2::new(field("x")?, field("y")?));
    }
    SampledCurve::new(sigma, points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn roundtrip_is_bit_exact() {
        let dir = std::env::temp_dir().join("curveflow_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("semi.csv");
        let c = fixtures::semicircle(64);
        write_curve_csv(&path, &c).unwrap();
        let back = read_curve_csv(&path).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn rejects_bad_header() {
        let dir = std::env::temp_dir().join("curveflow_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.csv");
        std::fs::write(&path, "x,y\n0,0\n").unwrap();
        assert!(matches!(
            read_curve_csv(&path),
            Err(Error::ParseFailure(_))
        ));
    }
}
