//! CSV import and export. Numbers are written as `{:.16e}`, which keeps 17
//! significant digits and round-trips `f64` exactly.

use num_complex::Complex64;

use crate::ensemble::EnsembleStats;
use crate::entanglement::EntanglementReport;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::unit_root;
use crate::spectral::SpatialSpectrum;

/// Largest accepted distance between an imported grid point and `exp(2πik/K)`.
pub const GRID_POINT_TOL: f64 = 1e-12;

pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("writing to memory cannot fail");
    String::from_utf8(bytes).expect("CSV output is ASCII")
}

fn put<I, S>(w: &mut csv::Writer<Vec<u8>>, record: I)
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    w.write_record(record).expect("writing to memory cannot fail");
}

pub fn spectrum_header(dim: usize) -> Vec<String> {
    let mut h = vec!["k".to_string(), "Re(z)".into(), "Im(z)".into()];
    for r in 0..dim {
        for c in 0..dim {
            h.push(format!("S[{r}][{c}].re"));
            h.push(format!("S[{r}][{c}].im"));
        }
    }
    h.push("residual".into());
    h
}

/// One row per grid point, matrix entries in row-major order. Spectra
/// without residuals get an empty residual column.
pub fn spectrum_to_csv(sp: &SpatialSpectrum<f64>) -> String {
    let dim = sp.dim();
    let mut w = writer();
    put(&mut w, spectrum_header(dim));
    for (k, (z, s)) in sp.points.iter().zip(&sp.s).enumerate() {
        let mut row = vec![k.to_string(), fmt_num(z.re), fmt_num(z.im)];
        for r in 0..dim {
            for c in 0..dim {
                row.push(fmt_num(s[(r, c)].re));
                row.push(fmt_num(s[(r, c)].im));
            }
        }
        row.push(sp.residuals.get(k).map_or_else(String::new, |&x| fmt_num(x)));
        put(&mut w, row);
    }
    finish(w)
}

fn parse_f64(field: &str, line: usize) -> Result<f64> {
    let x: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: {field:?} is not a number")))?;
    if !x.is_finite() {
        return Err(Error::NonFiniteEntry("spectrum CSV"));
    }
    Ok(x)
}

/// Inverse of [`spectrum_to_csv`]. Rows must list `k = 0…K−1` in order on
/// the grid `exp(2πik/K)`.
pub fn spectrum_from_csv(text: &str) -> Result<SpatialSpectrum<f64>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    let cols = header.len();
    let entries = cols.saturating_sub(4);
    let dim = (entries as f64 / 2.0).sqrt().round() as usize;
    if cols < 4 || 2 * dim * dim != entries {
        return Err(Error::Parse(format!(
            "{cols} columns do not describe a square spectrum"
        )));
    }
    let expected = spectrum_header(dim);
    if header.iter().zip(&expected).any(|(a, b)| a.trim() != b) {
        return Err(Error::Parse("unexpected spectrum CSV header".into()));
    }

    let mut points = Vec::new();
    let mut s = Vec::new();
    let mut residuals = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        if rec.len() != cols {
            return Err(Error::Parse(format!(
                "line {line}: expected {cols} fields, found {}",
                rec.len()
            )));
        }
        let k: usize = rec[0]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("line {line}: bad index {:?}", &rec[0])))?;
        if k != i {
            return Err(Error::Parse(format!("line {line}: index {k} out of order")));
        }
        points.push(Complex64::new(parse_f64(&rec[1], line)?, parse_f64(&rec[2], line)?));
        let mut m = CMatrix::zeros(dim, dim);
        for r in 0..dim {
            for c in 0..dim {
                let at = 3 + 2 * (r * dim + c);
                m[(r, c)] = Complex64::new(parse_f64(&rec[at], line)?, parse_f64(&rec[at + 1], line)?);
            }
        }
        s.push(m);
        let res = rec[cols - 1].trim();
        if !res.is_empty() {
            residuals.push(parse_f64(res, line)?);
        }
    }
    if s.is_empty() {
        return Err(Error::Parse("spectrum CSV has no rows".into()));
    }
    let k = s.len();
    for (j, z) in points.iter().enumerate() {
        let gap = (z - unit_root::<f64>(k, j as i64)).norm();
        if gap > GRID_POINT_TOL {
            return Err(Error::Parse(format!(
                "row {j}: z is {gap:e} away from the uniform grid of size {k}"
            )));
        }
    }
    if !residuals.is_empty() && residuals.len() != k {
        return Err(Error::Parse("residual column is partially filled".into()));
    }
    let mut out = SpatialSpectrum::from_samples(s);
    out.residuals = residuals;
    Ok(out)
}

pub const STATS_HEADER: [&str; 8] = [
    "a",
    "det_mean",
    "det_min",
    "det_max",
    "logneg_mean",
    "logneg_min",
    "logneg_max",
    "frac_entangled",
];

pub fn stats_to_csv(stats: &EnsembleStats) -> String {
    let mut w = writer();
    put(&mut w, STATS_HEADER);
    for l in &stats.lags {
        put(
            &mut w,
            [
                l.lag.to_string(),
                fmt_num(l.det_mean),
                fmt_num(l.det_min),
                fmt_num(l.det_max),
                fmt_num(l.logneg_mean),
                fmt_num(l.logneg_min),
                fmt_num(l.logneg_max),
                fmt_num(l.frac_entangled),
            ],
        );
    }
    finish(w)
}

pub const ENTANGLE_HEADER: [&str; 5] = ["a", "detLambda", "logNeg", "separable", "source"];

pub fn reports_to_csv(reports: &[EntanglementReport<f64>]) -> String {
    let mut w = writer();
    put(&mut w, ENTANGLE_HEADER);
    for r in reports {
        put(
            &mut w,
            [
                r.lag.to_string(),
                fmt_num(r.det_lambda),
                fmt_num(r.log_negativity),
                r.separable.to_string(),
                r.source.as_str().to_string(),
            ],
        );
    }
    finish(w)
}
