use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::PhysicalGraph;

/// Uniformly sampled multivariate series: `values[step][station]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalTable {
    pub timestamps: Vec<i64>,
    pub values: Vec<Vec<f64>>,
}

impl SignalTable {
    pub fn new(timestamps: Vec<i64>, values: Vec<Vec<f64>>) -> Result<Self> {
        let t = SignalTable { timestamps, values };
        t.validate()?;
        Ok(t)
    }

    pub fn steps(&self) -> usize {
        self.timestamps.len()
    }

    pub fn stations(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    /// Seconds between consecutive rows; 0 for a single row.
    pub fn interval(&self) -> i64 {
        if self.timestamps.len() < 2 {
            0
        } else {
            self.timestamps[1] - self.timestamps[0]
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.timestamps.len() != self.values.len() {
            return Err(Error::invalid(format!(
                "{} timestamps for {} rows",
                self.timestamps.len(),
                self.values.len()
            )));
        }
        let n = self.stations();
        if n == 0 {
            return Err(Error::invalid("signal table has no stations"));
        }
        let dt = self.interval();
        for (i, row) in self.values.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid(format!(
                    "row {i} has {} values, expected {n}",
                    row.len()
                )));
            }
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("row {i} column {c} is not finite")));
            }
            if i > 0 && (dt <= 0 || self.timestamps[i] - self.timestamps[i - 1] != dt) {
                return Err(Error::invalid(format!(
                    "timestamps must increase by a uniform interval (row {i})"
                )));
            }
        }
        Ok(())
    }

    /// Reads `timestamp,s0,s1,...`. Empty or non-numeric cells are errors naming the line and column.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let io_err = |e: std::io::Error| Error::Io {
            path: path.to_path_buf(),
            source: e,
        };
        let file = std::fs::File::open(path).map_err(io_err)?;
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
        let parse = |line: u64, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let headers = rdr.headers().map_err(|e| parse(1, e.to_string()))?.clone();
        if headers.len() < 2 || headers.get(0).map(str::trim) != Some("timestamp") {
            return Err(parse(1, "header must be `timestamp,s0,s1,...`".into()));
        }
        let mut timestamps = Vec::new();
        let mut values = Vec::new();
        let mut prev: Option<i64> = None;
        let mut dt: Option<i64> = None;
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                parse(line, e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            let ts: i64 = rec[0]
                .trim()
                .parse()
                .map_err(|_| parse(line, format!("column timestamp: bad value {:?}", &rec[0])))?;
            if let Some(p) = prev {
                let step = ts - p;
                if step <= 0 {
                    return Err(parse(line, format!("timestamp {ts} does not increase")));
                }
                match dt {
                    Some(d) if d != step => return Err(parse(line, format!("interval {step} differs from {d}"))),
                    _ => dt = Some(step),
                }
            }
            prev = Some(ts);
            let mut row = Vec::with_capacity(rec.len() - 1);
            for (c, cell) in rec.iter().enumerate().skip(1) {
                let name = headers.get(c).unwrap_or("?");
                let v: f64 = cell
                    .trim()
                    .parse()
                    .map_err(|_| parse(line, format!("column {name}: bad value {cell:?}")))?;
                if !v.is_finite() {
                    return Err(parse(line, format!("column {name}: missing value {cell:?}")));
                }
                row.push(v);
            }
            timestamps.push(ts);
            values.push(row);
        }
        if values.is_empty() {
            return Err(parse(1, "no data rows".into()));
        }
        Ok(SignalTable { timestamps, values })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
        let mut header = vec!["timestamp".to_string()];
        header.extend((0..self.stations()).map(|s| format!("s{s}")));
        w.write_record(&header).map_err(|e| csv_err(path, e))?;
        for (ts, row) in self.timestamps.iter().zip(&self.values) {
            let mut rec = vec![ts.to_string()];
            rec.extend(row.iter().map(f64::to_string));
            w.write_record(&rec).map_err(|e| csv_err(path, e))?;
        }
        w.flush().map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }
}

pub(crate) fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{other:?}"),
        },
    }
}

/// Reads `from,to,cost` rows into a physical graph over `stations` stations.
pub fn read_edges(path: &Path, stations: usize) -> Result<PhysicalGraph> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let parse = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let headers = rdr.headers().map_err(|e| parse(1, e.to_string()))?.clone();
    let names: Vec<&str> = headers.iter().map(str::trim).collect();
    if names != ["from", "to", "cost"] {
        return Err(parse(1, "header must be `from,to,cost`".into()));
    }
    let mut edges = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| parse(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let id = |c: usize| -> Result<usize> {
            let v: usize = rec[c]
                .trim()
                .parse()
                .map_err(|_| parse(line, format!("column {}: bad station id {:?}", names[c], &rec[c])))?;
            if v >= stations {
                return Err(parse(line, format!("unknown station id {v} (have {stations})")));
            }
            Ok(v)
        };
        let (a, b) = (id(0)?, id(1)?);
        let cost: f64 = rec[2]
            .trim()
            .parse()
            .map_err(|_| parse(line, format!("column cost: bad value {:?}", &rec[2])))?;
        if a == b {
            continue;
        }
        edges.push((a, b, cost));
    }
    dedup_edges(&mut edges);
    PhysicalGraph::new(stations, edges).map_err(|e| parse(0, e.to_string()))
}

/// Keeps the cheapest copy of each undirected pair.
fn dedup_edges(edges: &mut Vec<(usize, usize, f64)>) {
    for e in edges.iter_mut() {
        if e.0 > e.1 {
            *e = (e.1, e.0, e.2);
        }
    }
    edges.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));
    edges.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
}

pub fn write_edges(path: &Path, pg: &PhysicalGraph) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["from", "to", "cost"]).map_err(|e| csv_err(path, e))?;
    for &(a, b, c) in pg.edges() {
        w.write_record([a.to_string(), b.to_string(), c.to_string()])
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        let t = SignalTable::new(
            vec![0, 300, 600],
            vec![
                vec![0.1, 1e-300],
                vec![-3.0, 12345.678901234567],
                vec![f64::MIN_POSITIVE, 2.0 / 3.0],
            ],
        )
        .unwrap();
        t.write_csv(&p).unwrap();
        let back = SignalTable::read_csv(&p).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn bad_cell_names_line_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        std::fs::write(&p, "timestamp,s0,s1\n0,1,2\n300,abc,3\n").unwrap();
        let msg = SignalTable::read_csv(&p).unwrap_err().to_string();
        assert!(msg.contains(":3") && msg.contains("s0"), "{msg}");
        std::fs::write(&p, "timestamp,s0\n0,1\n300,\n").unwrap();
        assert!(SignalTable::read_csv(&p).is_err());
        std::fs::write(&p, "timestamp,s0\n0,1\n300,2\n900,2\n").unwrap();
        assert!(SignalTable::read_csv(&p).is_err());
        std::fs::write(&p, "timestamp,s0\n0,1\n300,2,4\n").unwrap();
        assert!(SignalTable::read_csv(&p).is_err());
    }

    #[test]
    fn edges_roundtrip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.csv");
        std::fs::write(&p, "from,to,cost\n0,1,2.5\n1,0,1.5\n1,2,1\n").unwrap();
        let pg = read_edges(&p, 3).unwrap();
        assert_eq!(pg.edges(), &[(0, 1, 1.5), (1, 2, 1.0)]);
        write_edges(&p, &pg).unwrap();
        assert_eq!(read_edges(&p, 3).unwrap(), pg);
        std::fs::write(&p, "from,to,cost\n0,7,1\n").unwrap();
        let msg = read_edges(&p, 3).unwrap_err().to_string();
        assert!(msg.contains("unknown station id 7"), "{msg}");
    }
}
