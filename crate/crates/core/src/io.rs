//! JSON and CSV output for reports, fields and coefficients.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::meyer::{eps_bits, WaveletCoefficients};
use crate::spectral::SpectralField;

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// Writes `header` followed by `rows`.
pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Full-precision decimal form that round-trips through `f64::from_str`.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

/// Non-zero Fourier coefficients as `m_1, .., m_n, re, im`.
pub fn write_field_csv(path: &Path, f: &SpectralField) -> Result<()> {
    let lat = f.lattice();
    let n = lat.dim();
    let mut header: Vec<String> = (1..=n).map(|a| format!("m{a}")).collect();
    header.extend(["re".into(), "im".into()]);
    let rows = f.values().iter().enumerate().filter(|(_, v)| v.re != 0.0 || v.im != 0.0).map(|(i, v)| {
        let m = lat.freq(i);
        let mut row: Vec<String> = m[..n].iter().map(|x| x.to_string()).collect();
        row.push(num(v.re));
        row.push(num(v.im));
        row
    });
    write_csv(path, &header.iter().map(String::as_str).collect::<Vec<_>>(), rows)
}

/// Coefficients as `eps, j, k_1, .., k_n, re, im`; `eps` is written as its bit string.
pub fn write_coefficients_csv(path: &Path, c: &WaveletCoefficients) -> Result<()> {
    let n = c.dim();
    let mut header: Vec<String> = vec!["eps".into(), "j".into()];
    header.extend((1..=n).map(|a| format!("k{a}")));
    header.extend(["re".into(), "im".into()]);
    let rows = c.entries().map(|(eps, j, flat, v)| {
        let bits: String = eps_bits(eps, n).iter().map(|b| b.to_string()).collect();
        let mut row = vec![bits, j.to_string()];
        row.extend(c.unflatten_k(j, flat).iter().map(|k| k.to_string()));
        row.push(num(v.re));
        row.push(num(v.im));
        row
    });
    write_csv(path, &header.iter().map(String::as_str).collect::<Vec<_>>(), rows)
}
