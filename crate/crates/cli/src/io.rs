//! CSV files of paths and numeric tables.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path as FsPath;

use rjdrift_core::Path;

use crate::error::CliError;

/// Relative tolerance on the time step when checking uniform spacing.
pub const SPACING_TOL: f64 = 1e-6;

/// 17 significant digits, enough for an exact round trip.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn data_err(path: &FsPath, message: impl Into<String>) -> CliError {
    CliError::Data { path: path.display().to_string(), message: message.into() }
}

/// Reads a `t,x` CSV file (lines starting with `#` are ignored) into a path on a
/// uniform time grid.
pub fn read_path_csv(file: &FsPath) -> Result<Path, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(file)
        .map_err(|e| data_err(file, format!("cannot open: {e}")))?;
    let headers = reader.headers().map_err(|e| data_err(file, e.to_string()))?.clone();
    if headers.is_empty() {
        return Err(data_err(file, "empty file: no header and no data rows"));
    }
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(ti), Some(xi)) = (col("t"), col("x")) else {
        return Err(data_err(file, format!("expected columns `t,x`, found `{}`", headers.iter().collect::<Vec<_>>().join(","))));
    };
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (n, rec) in reader.records().enumerate() {
        let row = n + 1;
        let rec = rec.map_err(|e| data_err(file, format!("row {row}: {e}")))?;
        let parse = |i: usize, name: &str| -> Result<f64, CliError> {
            let field = rec.get(i).ok_or_else(|| data_err(file, format!("row {row}: missing `{name}`")))?;
            field.parse::<f64>().map_err(|_| data_err(file, format!("row {row}: `{field}` is not a number")))
        };
        let (t, x) = (parse(ti, "t")?, parse(xi, "x")?);
        if !t.is_finite() || !x.is_finite() {
            return Err(data_err(file, format!("row {row}: NaN or infinite value (t = {t}, x = {x})")));
        }
        times.push(t);
        values.push(x);
    }
    match times.len() {
        0 => return Err(data_err(file, "empty file: no data rows")),
        1 => return Err(data_err(file, "need at least two observations, found one")),
        _ => {}
    }
    let n = times.len();
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    if !(dt > 0.0) {
        return Err(data_err(file, "times must be increasing"));
    }
    for (i, w) in times.windows(2).enumerate() {
        let step = w[1] - w[0];
        if (step - dt).abs() > SPACING_TOL * dt {
            return Err(data_err(
                file,
                format!("non-uniform time spacing: step {step} between rows {} and {} (expected {dt})", i + 1, i + 2),
            ));
        }
    }
    Ok(Path::new(times[0], dt, values)?)
}

/// Creates `file` for writing, with a leading `# key=value …` comment line.
pub fn create_with_comment(file: &FsPath, comment: &str) -> Result<BufWriter<File>, CliError> {
    let f = File::create(file).map_err(|e| CliError::io(format!("cannot create {}", file.display()), e))?;
    let mut w = BufWriter::new(f);
    writeln!(w, "# {comment}").map_err(|e| CliError::io(file.display().to_string(), e))?;
    Ok(w)
}

/// Writes a table of numeric columns.
pub fn write_table(file: &FsPath, comment: &str, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<(), CliError> {
    let io_err = |e| CliError::io(file.display().to_string(), e);
    let mut w = create_with_comment(file, comment)?;
    writeln!(w, "{}", header.join(",")).map_err(io_err)?;
    for row in rows {
        writeln!(w, "{}", row.join(",")).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_path_csv(file: &FsPath, comment: &str, path: &Path) -> Result<(), CliError> {
    let rows = path.values().iter().enumerate().map(|(i, &x)| vec![fmt_f64(path.time(i)), fmt_f64(x)]);
    write_table(file, comment, &["t", "x"], rows)
}
