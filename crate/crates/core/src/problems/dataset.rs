//! Plain-text dataset exchange: one point per blank-line-separated block,
//! row-major, 17 significant digits, after a two-line header naming the
//! manifold and point count. Round-trips exactly in f64.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::manifold::{Manifold, ManifoldKind, Point};

/// Renders points to the text format.
pub fn render(manifold: &Manifold, points: &[Point]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "manifold {} {}", manifold.name(), manifold.size());
    let _ = writeln!(out, "points {}", points.len());
    let (rows, cols) = block_shape(manifold);
    for p in points {
        let _ = writeln!(out);
        let coords = p.coords();
        for r in 0..rows {
            let row: Vec<String> = (0..cols)
                .map(|c| format!("{:.16e}", coords[index_of(manifold, r, c)]))
                .collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
    }
    out
}

/// Parses the text format back into points on their manifold.
pub fn parse(text: &str) -> Result<(Manifold, Vec<Point>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Config("dataset: missing manifold header".into()))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("manifold") {
        return Err(Error::Config("dataset: first line must start with 'manifold'".into()));
    }
    let name = parts
        .next()
        .ok_or_else(|| Error::Config("dataset: missing manifold name".into()))?;
    let size: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Config("dataset: bad manifold size".into()))?;
    let manifold = match name {
        "euclidean" => Manifold::euclidean(size),
        "sphere" => Manifold::sphere(size),
        "spd" => Manifold::spd(size),
        "hyperboloid" => Manifold::hyperboloid(size),
        other => return Err(Error::Config(format!("dataset: unknown manifold '{other}'"))),
    };

    let count_line = lines
        .next()
        .ok_or_else(|| Error::Config("dataset: missing points header".into()))?;
    let mut parts = count_line.split_whitespace();
    if parts.next() != Some("points") {
        return Err(Error::Config("dataset: second line must start with 'points'".into()));
    }
    let count: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Config("dataset: bad point count".into()))?;

    let (rows, cols) = block_shape(&manifold);
    let mut points = Vec::with_capacity(count);
    for i in 0..count {
        let mut coords = DVector::zeros(manifold.ambient_len());
        for r in 0..rows {
            let line = lines.next().ok_or_else(|| {
                Error::Config(format!("dataset: point {i} is missing row {r}"))
            })?;
            let values: Vec<f64> = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| {
                        Error::Config(format!("dataset: bad number '{tok}' in point {i}"))
                    })
                })
                .collect::<Result<_>>()?;
            if values.len() != cols {
                return Err(Error::Config(format!(
                    "dataset: point {i} row {r} has {} values, expected {cols}",
                    values.len()
                )));
            }
            for (c, v) in values.into_iter().enumerate() {
                coords[index_of(&manifold, r, c)] = v;
            }
        }
        points.push(manifold.point(coords)?);
    }
    if lines.next().is_some() {
        return Err(Error::Config("dataset: trailing content after the last point".into()));
    }
    Ok((manifold, points))
}

pub fn write_file(path: &Path, manifold: &Manifold, points: &[Point]) -> Result<()> {
    std::fs::write(path, render(manifold, points))
        .map_err(|e| Error::Config(format!("dataset: cannot write {}: {e}", path.display())))
}

pub fn read_file(path: &Path) -> Result<(Manifold, Vec<Point>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("dataset: cannot read {}: {e}", path.display())))?;
    parse(&text)
}

fn block_shape(manifold: &Manifold) -> (usize, usize) {
    match manifold.kind() {
        ManifoldKind::Spd => (manifold.size(), manifold.size()),
        _ => (1, manifold.ambient_len()),
    }
}

/// Storage index of block entry `(r, c)`; SPD coordinates are column-major.
fn index_of(manifold: &Manifold, r: usize, c: usize) -> usize {
    match manifold.kind() {
        ManifoldKind::Spd => r + c * manifold.size(),
        _ => c,
    }
}
