//! Time series (CSV) and snapshot files.
//!
//! Snapshot format, version 1, plain text:
//!
//! ```text
//! mpm-sdem-snapshot 1
//! time <t>
//! step <n>
//! points <N>
//! x y vx vy mass volume sxx sxy syx syy szz exx exy eyx eyy bxx bxy byx byy material   (N lines)
//! bodies <M>
//! cx cy angle vx vy omega                                                          (M lines)
//! ```
//!
//! Reals use the shortest representation that parses back to the same
//! `f64`, so a save/load cycle is bit-exact.

use std::io::{BufRead, Write};
use std::path::Path;

use thiserror::Error;

use crate::constitutive::StressState;
use crate::mpm::MaterialPoint;
use crate::sdem::Spheropolygon;
use crate::{Mat2, Vec2};

#[derive(Debug, Error)]
pub enum OutputError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("snapshot line {line}: {message}")]
    Snapshot { line: usize, message: String },
    #[error("time series: {0}")]
    Series(String),
}

/// Named channels recorded at output steps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimeSeries {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn new(names: Vec<String>) -> Self {
        Self { names, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.names.len());
        self.rows.push(row);
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn last(&self, name: &str) -> Option<f64> {
        let i = self.index(name)?;
        self.rows.last().map(|r| r[i])
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), OutputError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.names)?;
        for row in &self.rows {
            out.write_record(row.iter().map(|v| format!("{v:.16e}")))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<(), OutputError> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self, OutputError> {
        let mut rdr = csv::Reader::from_reader(r);
        let names: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut ts = Self::new(names);
        for (k, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|s| s.trim().parse::<f64>().map_err(|e| OutputError::Series(format!("record {}: '{s}': {e}", k + 1))))
                .collect::<Result<Vec<_>, _>>()?;
            ts.rows.push(row);
        }
        Ok(ts)
    }

    pub fn load_csv(path: &Path) -> Result<Self, OutputError> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyState {
    pub center: Vec2,
    pub angle: f64,
    pub velocity: Vec2,
    pub omega: f64,
}

impl From<&Spheropolygon> for BodyState {
    fn from(b: &Spheropolygon) -> Self {
        Self {
            center: b.center,
            angle: b.angle,
            velocity: b.velocity,
            omega: b.omega,
        }
    }
}

impl BodyState {
    pub fn apply(&self, b: &mut Spheropolygon) {
        b.set_pose(self.center, self.angle);
        b.velocity = self.velocity;
        b.omega = self.omega;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub step: u64,
    pub points: Vec<MaterialPoint>,
    pub bodies: Vec<BodyState>,
}

const MAGIC: &str = "mpm-sdem-snapshot";
const VERSION: u32 = 1;

impl Snapshot {
    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{MAGIC} {VERSION}")?;
        writeln!(w, "time {}", self.time)?;
        writeln!(w, "step {}", self.step)?;
        writeln!(w, "points {}", self.points.len())?;
        for p in &self.points {
            let s = &p.stress;
            let vals = [
                p.position.x,
                p.position.y,
                p.velocity.x,
                p.velocity.y,
                p.mass,
                p.volume,
                s.sigma[(0, 0)],
                s.sigma[(0, 1)],
                s.sigma[(1, 0)],
                s.sigma[(1, 1)],
                s.sigma_zz,
                s.strain[(0, 0)],
                s.strain[(0, 1)],
                s.strain[(1, 0)],
                s.strain[(1, 1)],
                p.affine[(0, 0)],
                p.affine[(0, 1)],
                p.affine[(1, 0)],
                p.affine[(1, 1)],
            ];
            for v in vals {
                write!(w, "{v} ")?;
            }
            writeln!(w, "{}", p.material)?;
        }
        writeln!(w, "bodies {}", self.bodies.len())?;
        for b in &self.bodies {
            writeln!(w, "{} {} {} {} {} {}", b.center.x, b.center.y, b.angle, b.velocity.x, b.velocity.y, b.omega)?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), OutputError> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self, OutputError> {
        let mut lines = r.lines().enumerate();
        let mut next = |what: &str| -> Result<(usize, String), OutputError> {
            match lines.next() {
                Some((i, Ok(l))) => Ok((i + 1, l)),
                Some((_, Err(e))) => Err(e.into()),
                None => Err(OutputError::Snapshot {
                    line: 0,
                    message: format!("unexpected end of file, expected {what}"),
                }),
            }
        };
        let bad = |line: usize, message: String| OutputError::Snapshot { line, message };

        let (ln, header) = next("header")?;
        if header.trim() != format!("{MAGIC} {VERSION}") {
            return Err(bad(ln, format!("unsupported header '{header}'")));
        }
        let keyed = |line: usize, text: &str, key: &str| -> Result<String, OutputError> {
            let mut it = text.split_whitespace();
            match (it.next(), it.next(), it.next()) {
                (Some(k), Some(v), None) if k == key => Ok(v.to_string()),
                _ => Err(bad(line, format!("expected '{key} <value>', got '{text}'"))),
            }
        };
        let num = |line: usize, s: &str| -> Result<f64, OutputError> { s.parse::<f64>().map_err(|e| bad(line, format!("'{s}': {e}"))) };
        let int = |line: usize, s: &str| -> Result<u64, OutputError> { s.parse::<u64>().map_err(|e| bad(line, format!("'{s}': {e}"))) };

        let (ln, l) = next("time")?;
        let time = num(ln, &keyed(ln, &l, "time")?)?;
        let (ln, l) = next("step")?;
        let step = int(ln, &keyed(ln, &l, "step")?)?;
        let (ln, l) = next("points")?;
        let n = int(ln, &keyed(ln, &l, "points")?)? as usize;
        let mut points = Vec::with_capacity(n);
        for _ in 0..n {
            let (ln, l) = next("point record")?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 20 {
                return Err(bad(ln, format!("expected 20 fields, got {}", f.len())));
            }
            let v = f[..19].iter().map(|s| num(ln, s)).collect::<Result<Vec<_>, _>>()?;
            let mut p = MaterialPoint::new(Vec2::new(v[0], v[1]), Vec2::new(v[2], v[3]), v[4], v[5], int(ln, f[19])? as usize);
            p.stress = StressState {
                sigma: Mat2::new(v[6], v[7], v[8], v[9]),
                sigma_zz: v[10],
                strain: Mat2::new(v[11], v[12], v[13], v[14]),
            };
            p.affine = Mat2::new(v[15], v[16], v[17], v[18]);
            points.push(p);
        }
        let (ln, l) = next("bodies")?;
        let m = int(ln, &keyed(ln, &l, "bodies")?)? as usize;
        let mut bodies = Vec::with_capacity(m);
        for _ in 0..m {
            let (ln, l) = next("body record")?;
            let v = l.split_whitespace().map(|s| num(ln, s)).collect::<Result<Vec<_>, _>>()?;
            if v.len() != 6 {
                return Err(bad(ln, format!("expected 6 fields, got {}", v.len())));
            }
            bodies.push(BodyState {
                center: Vec2::new(v[0], v[1]),
                angle: v[2],
                velocity: Vec2::new(v[3], v[4]),
                omega: v[5],
            });
        }
        Ok(Self { time, step, points, bodies })
    }

    pub fn load(path: &Path) -> Result<Self, OutputError> {
        Self::read(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_keeps_full_precision() {
        let mut ts = TimeSeries::new(vec!["t".into(), "a".into()]);
        ts.push(vec![0.1, 1.0 / 3.0]);
        ts.push(vec![0.2, -2.5e-17]);
        let mut buf = Vec::new();
        ts.write_csv(&mut buf).unwrap();
        let back = TimeSeries::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, ts);
        assert!(String::from_utf8(buf).unwrap().starts_with("t,a\n"));
    }

    #[test]
    fn snapshot_rejects_bad_header() {
        let err = Snapshot::read("nope 1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, OutputError::Snapshot { line: 1, .. }));
    }
}
