//! Plain-text point files: one point per line, `d` numbers separated by
//! commas and/or whitespace, optionally followed by one function value.
//! Blank lines and lines starting with `#` are skipped.

use std::io::Write;
use std::path::Path;

use super::PointCloud;
use crate::error::{Error, Result};

/// Sites read from a point file, with the optional value column.
#[derive(Debug, Clone)]
pub struct PointData {
    pub cloud: PointCloud,
    pub values: Option<Vec<f64>>,
}

pub fn read_point_file(path: impl AsRef<Path>, dim: usize) -> Result<PointData> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    parse_points(&text, dim, &path.display().to_string())
}

/// Parses point-file text. `source` names the input in error messages.
pub fn parse_points(text: &str, dim: usize, source: &str) -> Result<PointData> {
    let perr = |line: usize, msg: String| Error::Parse { path: source.to_string(), line, msg };
    let mut coords = Vec::new();
    let mut values = Vec::new();
    let mut width: Option<usize> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .map(|f| {
                f.parse::<f64>().map_err(|_| perr(lineno, format!("cannot parse number {f:?}"))).and_then(|v| {
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(perr(lineno, format!("non-finite number {f:?}")))
                    }
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if fields.len() != dim && fields.len() != dim + 1 {
            return Err(perr(lineno, format!("expected {dim} or {} fields, found {}", dim + 1, fields.len())));
        }
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(perr(lineno, format!("expected {w} fields like earlier lines, found {}", fields.len())))
            }
            _ => {}
        }
        coords.extend_from_slice(&fields[..dim]);
        if fields.len() > dim {
            values.push(fields[dim]);
        }
    }
    if coords.is_empty() {
        return Err(perr(0, "no points found".into()));
    }
    let cloud = PointCloud::from_flat(dim, coords)?;
    let values = (width == Some(dim + 1)).then_some(values);
    Ok(PointData { cloud, values })
}

/// Writes a cloud (and optional values) in the point-file format with 17
/// significant digits.
pub fn write_points<W: Write>(out: &mut W, cloud: &PointCloud, values: Option<&[f64]>) -> std::io::Result<()> {
    for (i, p) in cloud.iter().enumerate() {
        let mut fields: Vec<String> = p.iter().map(|v| format!("{v:.16e}")).collect();
        if let Some(vals) = values {
            fields.push(format!("{:.16e}", vals[i]));
        }
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_mixed_separators_and_comments() {
        let text = "# header\n0.0, 1.0\n\n2.5 -3\n  4,\t5  \n";
        let data = parse_points(text, 2, "mem").unwrap();
        assert_eq!(data.cloud.len(), 3);
        assert_eq!(data.cloud.point(1), &[2.5, -3.0]);
        assert!(data.values.is_none());
    }

    #[test]
    fn parses_value_column() {
        let data = parse_points("0 0 1.5\n1 0 -2\n", 2, "mem").unwrap();
        assert_eq!(data.values.unwrap(), vec![1.5, -2.0]);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = parse_points("0 0\n1 x\n", 2, "f.txt").unwrap_err();
        assert!(err.to_string().starts_with("f.txt:2:"), "{err}");
        assert!(parse_points("0 0 1\n1 1\n", 2, "f").is_err());
        assert!(parse_points("0 0 1 2\n", 2, "f").is_err());
        assert!(parse_points("# nothing\n", 2, "f").is_err());
        assert!(parse_points("nan 0\n", 2, "f").is_err());
    }

    #[test]
    fn write_then_parse_is_lossless() {
        let cloud = PointCloud::from_points(&[[0.1, -1.0 / 3.0], [1e-300, 2.0f64.sqrt()]]).unwrap();
        let vals = [std::f64::consts::PI, -0.0];
        let mut buf = Vec::new();
        write_points(&mut buf, &cloud, Some(&vals)).unwrap();
        let back = parse_points(std::str::from_utf8(&buf).unwrap(), 2, "mem").unwrap();
        assert_eq!(back.cloud.coords(), cloud.coords());
        assert_eq!(back.values.unwrap(), vals.to_vec());
    }
}
