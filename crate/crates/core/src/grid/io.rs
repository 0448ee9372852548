//! CSV form of grid functions: a `n,L,s` header line, its values, then one cell value per line.
//! Lines starting with `#` are skipped on input.

use super::{ComplexFunction, Grid, RealFunction};
use crate::error::{invalid, Result};
use crate::numeric::sci;
use std::fmt::Write as _;
use std::io::BufRead;

fn header(grid: Grid) -> String {
    format!("n,L,s\n{},{},{}\n", grid.dim(), grid.box_exponent(), grid.resolution())
}

pub fn real_to_csv(f: &RealFunction) -> String {
    let mut out = header(f.grid());
    out.push_str("value\n");
    for v in f.values() {
        let _ = writeln!(out, "{}", sci(*v));
    }
    out
}

pub fn complex_to_csv(f: &ComplexFunction) -> String {
    let mut out = header(f.grid());
    out.push_str("re,im\n");
    for v in f.values() {
        let _ = writeln!(out, "{},{}", sci(v.re), sci(v.im));
    }
    out
}

pub fn real_from_csv(reader: impl BufRead) -> Result<RealFunction> {
    let mut lines = reader.lines();
    let mut next = || -> Result<String> {
        loop {
            let line = lines.next().ok_or_else(|| invalid("truncated grid csv"))??;
            if !line.starts_with('#') {
                return Ok(line);
            }
        }
    };
    if next()?.trim() != "n,L,s" {
        return Err(invalid("grid csv must start with `n,L,s`"));
    }
    let dims: Vec<i32> = next()?
        .split(',')
        .map(|t| t.trim().parse::<i32>().map_err(|e| invalid(format!("bad grid header: {e}"))))
        .collect::<Result<_>>()?;
    if dims.len() != 3 || dims[0] < 1 {
        return Err(invalid("grid header needs n, L, s"));
    }
    let grid = Grid::new(dims[0] as usize, dims[1], dims[2])?;
    let _column = next()?;
    let mut values = Vec::with_capacity(grid.len());
    loop {
        match next() {
            Ok(line) if line.trim().is_empty() => continue,
            Ok(line) => values.push(line.trim().parse::<f64>().map_err(|e| invalid(format!("bad value: {e}")))?),
            Err(_) => break,
        }
    }
    RealFunction::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let g = Grid::new(1, 1, 2).unwrap();
        let f = RealFunction::from_fn(g, |x| (3.0 * x[0]).sin() / 7.0).unwrap();
        let text = real_to_csv(&f);
        assert!(text.starts_with("n,L,s\n1,1,2\nvalue\n"));
        let back = real_from_csv(text.as_bytes()).unwrap();
        assert_eq!(back, f);
        let commented = format!("# note\n{text}");
        assert_eq!(real_from_csv(commented.as_bytes()).unwrap(), f);
    }

    #[test]
    fn bad_header_rejected() {
        assert!(real_from_csv("x\n".as_bytes()).is_err());
        assert!(real_from_csv("n,L,s\n1,1,2\nvalue\n1.0\n".as_bytes()).is_err());
    }
}
