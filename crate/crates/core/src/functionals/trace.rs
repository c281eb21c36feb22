use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::solver::{ModelParams, RunStats, State, Stepper};

use super::record::{compute_record, FunctionalRecord};

/// Run metadata carried alongside the records.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceMeta {
    pub params: ModelParams,
    pub grid: Grid,
    /// Step cap the run was configured with.
    pub dt: f64,
}

/// Stored `(u, v)` at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub u: Field,
    pub v: Field,
}

/// Time series of functional records, optionally with field snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub meta: TraceMeta,
    records: Vec<FunctionalRecord>,
    snapshots: Vec<Snapshot>,
}

impl Trace {
    pub fn new(meta: TraceMeta) -> Self {
        Trace {
            meta,
            records: Vec::new(),
            snapshots: Vec::new(),
        }
    }

    pub fn records(&self) -> &[FunctionalRecord] {
        &self.records
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn first(&self) -> Option<&FunctionalRecord> {
        self.records.first()
    }

    pub fn last(&self) -> Option<&FunctionalRecord> {
        self.records.last()
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn push(&mut self, r: FunctionalRecord) -> Result<()> {
        if let Some(last) = self.records.last() {
            if !(r.t > last.t) {
                return Err(Error::InvalidArgument(format!(
                    "record time {} does not follow {}",
                    r.t, last.t
                )));
            }
        }
        self.records.push(r);
        Ok(())
    }

    pub fn push_snapshot(&mut self, s: &State) -> Result<()> {
        if s.u.grid() != &self.meta.grid {
            return Err(Error::InvalidArgument("snapshot grid differs from trace grid".into()));
        }
        if let Some(last) = self.snapshots.last() {
            if !(s.t > last.t) {
                return Err(Error::InvalidArgument("snapshot times must increase".into()));
            }
        }
        self.snapshots.push(Snapshot {
            t: s.t,
            u: s.u.clone(),
            v: s.v.clone(),
        });
        Ok(())
    }

    /// Column `f` of the records.
    pub fn column(&self, f: impl Fn(&FunctionalRecord) -> f64) -> Vec<f64> {
        self.records.iter().map(f).collect()
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv_to(file)
    }

    pub fn write_csv_to<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        if self.records.is_empty() {
            wr.write_record(FunctionalRecord::COLUMNS)?;
        }
        for r in &self.records {
            wr.serialize(r)?;
        }
        wr.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// Load records from CSV. The header must match
    /// [`FunctionalRecord::COLUMNS`] exactly.
    pub fn read_csv(path: impl AsRef<Path>, meta: TraceMeta) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv_from(file, meta)
    }

    pub fn read_csv_from<R: std::io::Read>(r: R, meta: TraceMeta) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
        if header != FunctionalRecord::COLUMNS {
            return Err(Error::MissingData(format!("unexpected trace header {header:?}")));
        }
        let mut tr = Trace::new(meta);
        for rec in rd.deserialize() {
            let rec: FunctionalRecord = rec?;
            tr.push(rec)?;
        }
        Ok(tr)
    }
}

/// Outcome of [`trace_run`]. A blow-up ends the run early but keeps the
/// partial trace.
#[derive(Debug)]
pub struct TracedRun {
    pub trace: Trace,
    pub final_state: Option<State>,
    pub stats: Option<RunStats>,
    pub escaped: Option<Error>,
}

impl TracedRun {
    pub fn into_result(self) -> Result<(Trace, State, RunStats)> {
        match (self.escaped, self.final_state, self.stats) {
            (None, Some(s), Some(st)) => Ok((self.trace, s, st)),
            (Some(e), _, _) => Err(e),
            _ => Err(Error::InvalidArgument("incomplete run".into())),
        }
    }
}

/// Run `stepper` from `s0`, recording every `cadence` time units and keeping
/// a snapshot every `snapshot_every`-th record (`0` keeps none).
pub fn trace_run(stepper: &Stepper, s0: State, t_end: f64, cadence: f64, snapshot_every: usize) -> Result<TracedRun> {
    let meta = TraceMeta {
        params: s0.params,
        grid: *s0.u.grid(),
        dt: stepper.config().dt,
    };
    let mut trace = Trace::new(meta);
    let mut count = 0usize;
    let res = stepper.run(s0, t_end, Some(cadence), |s| {
        trace.push(compute_record(s))?;
        if snapshot_every > 0 && count % snapshot_every == 0 {
            trace.push_snapshot(s)?;
        }
        count += 1;
        Ok(())
    });
    match res {
        Ok((s, stats)) => {
            // a final state off the cadence grid is still recorded
            if trace.last().map_or(true, |r| s.t > r.t + 1e-12 * s.t.abs().max(1.0)) {
                trace.push(compute_record(&s))?;
                if snapshot_every > 0 {
                    trace.push_snapshot(&s)?;
                }
            }
            Ok(TracedRun {
                trace,
                final_state: Some(s),
                stats: Some(stats),
                escaped: None,
            })
        }
        Err(e) if e.is_blowup() => Ok(TracedRun {
            trace,
            final_state: None,
            stats: None,
            escaped: Some(e),
        }),
        Err(e) => Err(e),
    }
}
