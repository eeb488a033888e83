//! Deterministic CSV and PGM output, written atomically.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use gwp_core::ComplexField;
use num_complex::Complex64;

/// Shortest decimal that round-trips to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// CSV text: one `#` comment line, a header, then rows.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(comment: &str, header: &[&str]) -> Self {
        let mut text = String::new();
        let _ = writeln!(text, "# {comment}");
        let _ = writeln!(text, "{}", header.join(","));
        Self { text }
    }

    pub fn row(&mut self, cells: &[String]) {
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// Writes `bytes` to `path` via a temporary file in the same directory and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// `x,y,re,im,abs` rows of a 2D field in storage order (x outer, y inner).
pub fn field_csv(field: &ComplexField, comment: &str) -> String {
    let mut csv = Csv::new(comment, &["x", "y", "re", "im", "abs"]);
    let mut c = [0.0; 2];
    for (i, v) in field.values.iter().enumerate() {
        field.grid.coords_into(i, &mut c);
        csv.row(&[
            fmt_f64(c[0]),
            fmt_f64(c[1]),
            fmt_f64(v.re),
            fmt_f64(v.im),
            fmt_f64(v.norm()),
        ]);
    }
    csv.into_string()
}

/// Binary 8-bit graymap of `|values|` normalized to the peak. Rows run from
/// the largest `y` down so the image is not flipped.
pub fn field_pgm(values: &[Complex64], nx: usize, ny: usize) -> Vec<u8> {
    let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
    for iy in (0..ny).rev() {
        for ix in 0..nx {
            let a = values[ix * ny + iy].norm();
            let level = if peak > 0.0 {
                (255.0 * a / peak).round()
            } else {
                0.0
            };
            out.push(level.clamp(0.0, 255.0) as u8);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use gwp_core::{Domain, GridSpec};

    #[test]
    fn shortest_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 6.02e23, -2.5, 0.0] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(0.5), "0.5");
        assert_eq!(fmt_f64(1e-300), "1e-300");
    }

    #[test]
    fn csv_layout() {
        let mut csv = Csv::new("a=1", &["x", "y"]);
        csv.row(&["1.0".into(), "2.0".into()]);
        assert_eq!(csv.into_string(), "# a=1\nx,y\n1.0,2.0\n");
    }

    #[test]
    fn pgm_orientation_and_scale() {
        let grid = GridSpec::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![2, 3]).unwrap();
        let f = ComplexField::from_fn(grid, Domain::Position, |x| {
            Complex64::new(x[0] + 2.0 * x[1], 0.0)
        });
        let pgm = field_pgm(&f.values, 2, 3);
        let header = b"P5\n2 3\n255\n";
        assert_eq!(&pgm[..header.len()], header);
        // Top row is y = 2: values 4 and 5 of peak 5.
        assert_eq!(&pgm[header.len()..header.len() + 2], &[204, 255]);
        assert_eq!(pgm.len(), header.len() + 6);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("f.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
