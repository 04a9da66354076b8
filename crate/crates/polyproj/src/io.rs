//! Point-cloud file parsing.
//!
//! Two formats are accepted:
//!
//! * plain text: a header line `d ℓ` followed by `ℓ` lines of `d`
//!   whitespace-separated decimal coordinates;
//! * CSV: a header row `x1,...,xd` followed by one row per point.
//!
//! Non-finite values are rejected in both formats.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::scalar::Scalar;

/// Parses a point cloud from a string in either supported format.
pub fn parse_cloud<T: Scalar>(content: &str) -> Result<PointCloud<T>> {
    let mut lines = content
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (first_no, first) = lines.next().ok_or(Error::Parse {
        line: 0,
        message: "empty input".into(),
    })?;

    if first.contains(',') {
        parse_csv(first_no, first, lines)
    } else {
        parse_plain(first_no, first, lines)
    }
}

/// Reads and parses a point-cloud file.
pub fn read_cloud<T: Scalar>(path: impl AsRef<Path>) -> Result<PointCloud<T>> {
    let content = fs::read_to_string(path)?;
    parse_cloud(&content)
}

/// Parses a single point: `d` whitespace- or comma-separated coordinates.
pub fn parse_point<T: Scalar>(text: &str) -> Result<Vec<T>> {
    let fields: Vec<&str> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|f| !f.is_empty())
        .collect();
    if fields.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "empty point".into(),
        });
    }
    fields
        .iter()
        .map(|f| parse_coordinate(1, f))
        .collect::<Result<Vec<T>>>()
}

fn parse_plain<'a, T: Scalar>(
    header_no: usize,
    header: &str,
    lines: impl Iterator<Item = (usize, &'a str)>,
) -> Result<PointCloud<T>> {
    let mut parts = header.split_whitespace();
    let dim: usize = parse_usize(header_no, parts.next(), "dimension")?;
    let count: usize = parse_usize(header_no, parts.next(), "point count")?;
    if parts.next().is_some() {
        return Err(Error::Parse {
            line: header_no,
            message: "header must be exactly 'd ℓ'".into(),
        });
    }

    let mut data: Vec<T> = Vec::with_capacity(dim * count);
    let mut rows = 0usize;
    for (no, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != dim {
            return Err(Error::Parse {
                line: no,
                message: format!("expected {} coordinates, found {}", dim, fields.len()),
            });
        }
        for f in fields {
            data.push(parse_coordinate(no, f)?);
        }
        rows += 1;
    }
    if rows != count {
        return Err(Error::Parse {
            line: header_no,
            message: format!("header announces {count} points but {rows} rows follow"),
        });
    }
    PointCloud::new(dim, data).map_err(|e| Error::Parse {
        line: header_no,
        message: e.to_string(),
    })
}

fn parse_csv<'a, T: Scalar>(
    header_no: usize,
    header: &str,
    lines: impl Iterator<Item = (usize, &'a str)>,
) -> Result<PointCloud<T>> {
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let dim = columns.len();
    for (k, col) in columns.iter().enumerate() {
        let expected = format!("x{}", k + 1);
        if !col.eq_ignore_ascii_case(&expected) {
            return Err(Error::Parse {
                line: header_no,
                message: format!("expected CSV header column '{expected}', found '{col}'"),
            });
        }
    }

    let mut data: Vec<T> = Vec::new();
    for (no, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != dim {
            return Err(Error::Parse {
                line: no,
                message: format!("expected {} fields, found {}", dim, fields.len()),
            });
        }
        for f in fields {
            data.push(parse_coordinate(no, f)?);
        }
    }
    PointCloud::new(dim, data).map_err(|e| Error::Parse {
        line: header_no,
        message: e.to_string(),
    })
}

fn parse_usize(line: usize, field: Option<&str>, what: &str) -> Result<usize> {
    field
        .ok_or_else(|| Error::Parse {
            line,
            message: format!("missing {what}"),
        })?
        .parse()
        .map_err(|e| Error::Parse {
            line,
            message: format!("invalid {what}: {e}"),
        })
}

fn parse_coordinate<T: Scalar>(line: usize, field: &str) -> Result<T> {
    let v: f64 = field.parse().map_err(|e| Error::Parse {
        line,
        message: format!("invalid coordinate '{field}': {e}"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("non-finite coordinate '{field}'"),
        });
    }
    T::from_f64(v).ok_or_else(|| Error::Parse {
        line,
        message: format!("coordinate '{field}' not representable"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_format_round_trip() {
        let cloud: PointCloud<f64> = parse_cloud("2 3\n0.0 4.0\n0.5 -1.25\n2 2\n").unwrap();
        assert_eq!(cloud.dim(), 2);
        assert_eq!(cloud.len(), 3);
        assert_eq!(cloud.point(1), &[0.5, -1.25]);
    }

    #[test]
    fn csv_format() {
        let cloud: PointCloud<f64> = parse_cloud("x1,x2,x3\n1,2,3\n4,5,6\n").unwrap();
        assert_eq!(cloud.dim(), 3);
        assert_eq!(cloud.len(), 2);
        assert_eq!(cloud.point(0), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn rejects_non_finite_values() {
        assert!(parse_cloud::<f64>("1 1\ninf\n").is_err());
        assert!(parse_cloud::<f64>("x1\nnan\n").is_err());
    }

    #[test]
    fn rejects_wrong_counts() {
        assert!(parse_cloud::<f64>("2 2\n1 2\n").is_err());
        assert!(parse_cloud::<f64>("2 1\n1 2 3\n").is_err());
        assert!(parse_cloud::<f64>("x1,x2\n1\n").is_err());
    }

    #[test]
    fn rejects_bad_csv_header() {
        assert!(parse_cloud::<f64>("a,b\n1,2\n").is_err());
    }

    #[test]
    fn parse_point_formats() {
        assert_eq!(parse_point::<f64>("1 2 3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_point::<f64>("1,2").unwrap(), vec![1.0, 2.0]);
        assert!(parse_point::<f64>("").is_err());
    }
}
