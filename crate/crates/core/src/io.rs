//! Point-set files: a header line `d r R W`, then one point per line.

use std::io::{BufRead, Write};

use serde_json::json;

use crate::error::{Error, Result};
use crate::generators::{PointSetWindow, Provenance};
use crate::geometry::Point;

pub fn write_points<W: Write>(window: &PointSetWindow, mut out: W) -> Result<()> {
    writeln!(out, "{} {} {} {}", window.dimension, window.r, window.big_r, window.window_radius)?;
    for p in &window.points {
        let line: Vec<String> = p.coords.iter().map(|c| c.to_string()).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

fn num(tok: &str, line: usize) -> Result<f64> {
    tok.parse().map_err(|_| Error::Parse(format!("line {line}: bad number '{tok}'")))
}

/// Reads a point-set file. Blank lines are skipped; ids follow line order.
pub fn read_points<R: BufRead>(input: R) -> Result<PointSetWindow> {
    let mut lines = input.lines().enumerate().filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
    let (_, header) = lines.next().ok_or_else(|| Error::Parse("empty point file".into()))?;
    let header = header?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 4 {
        return Err(Error::Parse(format!("header must be 'd r R W', got '{header}'")));
    }
    let d: usize = h[0].parse().map_err(|_| Error::Parse(format!("bad dimension '{}'", h[0])))?;
    let (r, big_r, w) = (num(h[1], 1)?, num(h[2], 1)?, num(h[3], 1)?);
    let mut points = vec![];
    for (i, line) in lines {
        let line = line?;
        let coords = line.split_whitespace().map(|t| num(t, i + 1)).collect::<Result<Vec<f64>>>()?;
        if coords.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: coords.len() });
        }
        points.push(Point::new(points.len(), coords)?);
    }
    Ok(PointSetWindow {
        dimension: d,
        points,
        r,
        big_r,
        window_radius: w,
        generator: Provenance { name: "file".into(), params: json!({}), seed: None, jitter: None },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::poisson_delone_window;

    #[test]
    fn round_trip_is_bit_exact() {
        let win = poisson_delone_window(0.4, 1.5, 8.0, 2, 2).unwrap();
        let mut buf = vec![];
        write_points(&win, &mut buf).unwrap();
        let back = read_points(buf.as_slice()).unwrap();
        assert_eq!(back.points, win.points);
        assert_eq!((back.r, back.big_r, back.window_radius), (win.r, win.big_r, win.window_radius));
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(read_points("2 0.5 1 3\n1 2 3\n".as_bytes()).is_err());
        assert!(read_points("2 0.5 1\n".as_bytes()).is_err());
        assert!(read_points("2 0.5 1 3\n1 x\n".as_bytes()).is_err());
        assert!(read_points("".as_bytes()).is_err());
    }
}
