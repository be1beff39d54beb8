//! CSV output. Floats are written with 17 significant digits and rows end
//! with a bare LF.

use std::io::Write;

use csv::{Terminator, WriterBuilder};

use crate::analysis::experiment::SlopeFit;
use crate::analysis::mc::ErrorTable;
use crate::brownian::PiecewisePath;
use crate::error::Result;
use crate::mesh::Trajectory;

/// `v` with 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    WriterBuilder::new().terminator(Terminator::Any(b'\n')).from_writer(w)
}

/// Header `N,h,j,err,spread,K,p`, one row per `(N, j)`.
pub fn write_error_table<W: Write>(table: &ErrorTable, w: W) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["N", "h", "j", "err", "spread", "K", "p"])?;
    for r in table.rows() {
        out.write_record([
            r.steps.to_string(),
            format_float(r.h),
            r.interval.to_string(),
            format_float(r.err),
            format_float(r.spread),
            r.samples.to_string(),
            r.p.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Header `kind,from_N,to_N,slope`; pairwise rows, then `ols,,,slope` and
/// `r2,,,value`. A degenerate fit writes a single `degenerate,,,` row.
pub fn write_slopes<W: Write>(fit: &SlopeFit, w: W) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["kind", "from_N", "to_N", "slope"])?;
    match fit {
        SlopeFit::Fitted(report) => {
            for s in &report.pairwise {
                out.write_record([
                    "pairwise".to_string(),
                    s.from_steps.to_string(),
                    s.to_steps.to_string(),
                    format_float(s.slope),
                ])?;
            }
            out.write_record(["ols", "", "", &format_float(report.ols_slope)])?;
            out.write_record(["r2", "", "", &format_float(report.r_squared)])?;
        }
        SlopeFit::Degenerate(_) => out.write_record(["degenerate", "", "", ""])?,
    }
    out.flush()?;
    Ok(())
}

/// Header `j,k,t,component_0,...`.
pub fn write_trajectory<W: Write>(traj: &Trajectory, w: W) -> Result<()> {
    let mut out = writer(w);
    let mut header = vec!["j".to_string(), "k".to_string(), "t".to_string()];
    header.extend((0..traj.dim()).map(|i| format!("component_{i}")));
    out.write_record(&header)?;
    let mesh = traj.mesh();
    for j in 0..mesh.intervals() {
        for k in 0..=mesh.steps() {
            let mut rec = vec![j.to_string(), k.to_string(), format_float(mesh.time(j, k))];
            rec.extend(traj.get(j, k).iter().map(|&v| format_float(v)));
            out.write_record(&rec)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Header `i,t,Z`.
pub fn write_path<W: Write>(path: &PiecewisePath, w: W) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["i", "t", "Z"])?;
    for (i, z) in path.values().iter().enumerate() {
        out.write_record([i.to_string(), format_float(path.time(i)), format_float(*z)])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::mc::ErrorRow;
    use crate::analysis::slopes::fit_series;
    use crate::mesh::Mesh;

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(0.0), "0.0000000000000000e0");
        for v in [std::f64::consts::PI, 1e-300, 123456.789] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn error_table_schema() {
        let table = ErrorTable::new(vec![ErrorRow {
            steps: 8,
            h: 0.125,
            interval: 1,
            err: 0.5,
            spread: 0.25,
            samples: 10,
            p: 2.0,
        }]);
        let mut buf = Vec::new();
        write_error_table(&table, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "N,h,j,err,spread,K,p\n8,1.2500000000000000e-1,1,5.0000000000000000e-1,2.5000000000000000e-1,10,2\n"
        );
    }

    #[test]
    fn slopes_schema() {
        let report = fit_series(&[(10, 0.1, 0.1), (100, 0.01, 0.01)]).unwrap();
        let mut buf = Vec::new();
        write_slopes(&SlopeFit::Fitted(report), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "kind,from_N,to_N,slope");
        assert!(lines[1].starts_with("pairwise,10,100,"));
        assert!(lines[2].starts_with("ols,,,"));
        assert!(lines[3].starts_with("r2,,,"));
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn trajectory_schema() {
        let mesh = Mesh::new(1.0, 1, 1).unwrap();
        let traj = Trajectory::from_values(mesh, vec![0.0, 1.0], vec![0.0, 1.0, 2.0, 3.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let mut buf = Vec::new();
        write_trajectory(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "j,k,t,component_0,component_1");
        assert_eq!(lines.len(), 5);
        assert!(lines[3].starts_with("1,0,1.0000000000000000e0,"));
    }

    #[test]
    fn path_schema() {
        let p = PiecewisePath::from_values(0.5, vec![0.0, 1.0]).unwrap();
        let mut buf = Vec::new();
        write_path(&p, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "i,t,Z\n0,0.0000000000000000e0,0.0000000000000000e0\n1,5.0000000000000000e-1,1.0000000000000000e0\n"
        );
    }
}
