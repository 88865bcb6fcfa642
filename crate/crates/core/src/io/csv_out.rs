use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::dynamics::Trajectory;

use super::IoError;

pub const TRAJECTORY_HEADER: [&str; 9] =
    ["t", "fidelity", "p_e00", "p_g10", "p_g01", "p_g00", "trace_err", "min_eig", "purity"];

/// 12 significant digits.
fn fmt(x: f64) -> String {
    format!("{x:.11e}")
}

fn csv_err(e: csv::Error) -> IoError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => IoError::File { path: "<csv>".into(), source },
        kind => IoError::Csv { line, message: format!("{kind:?}") },
    }
}

/// Writes a numeric table with the given header, one row per entry.
pub fn write_table_csv<W, I>(out: W, header: &[&str], rows: I) -> Result<(), IoError>
where
    W: Write,
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(IoError::Csv { line: 0, message: format!("row has {} fields, header {}", row.len(), header.len()) });
        }
        w.write_record(row.iter().map(|&x| fmt(x))).map_err(csv_err)?;
    }
    w.flush().map_err(IoError::file("<csv>"))
}

pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, out: W) -> Result<(), IoError> {
    let rows = (0..traj.len()).map(|i| {
        let p = traj.populations[i];
        vec![
            traj.times[i],
            traj.fidelity[i],
            p[0],
            p[1],
            p[2],
            p[3],
            traj.trace_error[i],
            traj.min_eigenvalue[i],
            traj.purity[i],
        ]
    });
    write_table_csv(out, &TRAJECTORY_HEADER, rows)
}

/// Reads a trajectory written by [`write_trajectory_csv`]. Hermiticity error
/// and step statistics are not stored and come back empty.
pub fn read_trajectory_csv<R: Read>(input: R) -> Result<Trajectory, IoError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers().map_err(csv_err)?;
    if header.iter().ne(TRAJECTORY_HEADER) {
        return Err(IoError::Csv { line: 1, message: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()) });
    }
    let mut traj = Trajectory::default();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let mut v = [0.0; 9];
        for (slot, field) in v.iter_mut().zip(rec.iter()) {
            *slot = field
                .trim()
                .parse()
                .map_err(|_| IoError::Csv { line, message: format!("'{field}' is not a number") })?;
        }
        if rec.len() != 9 {
            return Err(IoError::Csv { line, message: format!("expected 9 fields, got {}", rec.len()) });
        }
        traj.times.push(v[0]);
        traj.fidelity.push(v[1]);
        traj.populations.push([v[2], v[3], v[4], v[5]]);
        traj.trace_error.push(v[6]);
        traj.min_eigenvalue.push(v[7]);
        traj.purity.push(v[8]);
    }
    Ok(traj)
}

pub fn parse_trajectory_csv(text: &str) -> Result<Trajectory, IoError> {
    read_trajectory_csv(text.as_bytes())
}

pub(crate) fn create(path: &Path) -> Result<File, IoError> {
    File::create(path).map_err(IoError::file(path))
}
