//! CSV time series.

use std::path::Path;

use crate::simulation::SeriesRow;

/// Leading columns before the per-probe pairs.
pub const SERIES_COLUMNS: [&str; 8] = [
    "t",
    "step",
    "max_theta",
    "argmax_x",
    "argmax_y",
    "velocity_l2",
    "theta_l2",
    "joule_power",
];

pub fn series_header(probes: usize) -> Vec<String> {
    let mut h: Vec<String> = SERIES_COLUMNS.iter().map(|s| s.to_string()).collect();
    for i in 0..probes {
        h.push(format!("theta_probe{i}"));
        h.push(format!("phi_probe{i}"));
    }
    h
}

pub fn write_series<W: std::io::Write>(rows: &[SeriesRow], probes: usize, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(series_header(probes))?;
    for r in rows {
        let mut rec = vec![
            format!("{:e}", r.t),
            r.step.to_string(),
            format!("{:e}", r.max_theta),
            format!("{:e}", r.argmax[0]),
            format!("{:e}", r.argmax[1]),
            format!("{:e}", r.velocity_l2),
            format!("{:e}", r.theta_l2),
            format!("{:e}", r.joule_power),
        ];
        for p in &r.probes {
            rec.push(format!("{:e}", p[0]));
            rec.push(format!("{:e}", p[1]));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_series_csv(rows: &[SeriesRow], probes: usize, path: impl AsRef<Path>) -> Result<(), csv::Error> {
    write_series(rows, probes, std::fs::File::create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_and_values() {
        let row = SeriesRow {
            t: 0.25,
            step: 3,
            max_theta: 37.5,
            argmax: [0.75, 0.0],
            velocity_l2: 1.0,
            theta_l2: 2.0,
            joule_power: 0.125,
            probes: vec![[37.1, 0.5], [37.0, 0.25]],
        };
        let mut buf = Vec::new();
        write_series(&[row.clone(), row], 2, &mut buf).unwrap();
        let mut r = csv::Reader::from_reader(buf.as_slice());
        assert_eq!(r.headers().unwrap().len(), 5 + 2 * 2 + 3);
        let recs: Vec<csv::StringRecord> = r.records().map(|r| r.unwrap()).collect();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0][2].parse::<f64>().unwrap(), 37.5);
        assert_eq!(recs[0][10].parse::<f64>().unwrap(), 37.0);
    }
}
