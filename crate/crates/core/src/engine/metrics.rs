//! Per-round lifetime/energy records and their CSV form.

use std::fmt::Write as _;
use std::io::{self, Write};

pub const CSV_HEADER: &str = "round,alive,residual_j,dissipated_j,harvested_j,frames";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    pub round: u32,
    /// Ordinary (sensing) nodes alive at the end of the round.
    pub alive: u32,
    /// Joules stored across all nodes.
    pub residual: f64,
    /// Cumulative joules spent on radio and sensing.
    pub dissipated: f64,
    /// Cumulative joules stored from the panels.
    pub harvested: f64,
    /// Frames delivered to the base station this round.
    pub frames: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    pub ordinary_nodes: u32,
    pub first_death_round: Option<u32>,
    pub half_death_round: Option<u32>,
    pub last_death_round: Option<u32>,
    pub total_frames: u64,
    pub initial_energy: f64,
    /// Part of the dissipated total that went into sensing.
    pub sensing_energy: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metrics {
    pub records: Vec<RoundRecord>,
    pub summary: Summary,
}

impl Metrics {
    pub fn new(ordinary_nodes: u32, initial_energy: f64) -> Self {
        Self {
            records: Vec::new(),
            summary: Summary { ordinary_nodes, initial_energy, ..Summary::default() },
        }
    }

    pub fn push(&mut self, record: RoundRecord) {
        let s = &mut self.summary;
        let dead = s.ordinary_nodes - record.alive;
        if dead > 0 && s.first_death_round.is_none() {
            s.first_death_round = Some(record.round);
        }
        if 2 * dead >= s.ordinary_nodes && s.half_death_round.is_none() {
            s.half_death_round = Some(record.round);
        }
        if record.alive == 0 && s.last_death_round.is_none() {
            s.last_death_round = Some(record.round);
        }
        s.total_frames += record.frames;
        self.records.push(record);
    }

    pub fn last(&self) -> Option<&RoundRecord> {
        self.records.last()
    }

    /// Cumulative dissipation at the end of `round`, or at the last recorded
    /// round if the run stopped earlier.
    pub fn dissipated_at(&self, round: u32) -> f64 {
        self.records
            .iter()
            .take_while(|r| r.round <= round)
            .last()
            .map_or(0.0, |r| r.dissipated)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(48 * (self.records.len() + 8));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{:.6},{:.6},{:.6},{}",
                r.round, r.alive, r.residual, r.dissipated, r.harvested, r.frames
            );
        }
        let s = &self.summary;
        let opt = |v: Option<u32>| v.map_or_else(|| "NA".to_string(), |r| r.to_string());
        let _ = writeln!(out, "# ordinary_nodes={}", s.ordinary_nodes);
        let _ = writeln!(out, "# first_death_round={}", opt(s.first_death_round));
        let _ = writeln!(out, "# half_death_round={}", opt(s.half_death_round));
        let _ = writeln!(out, "# last_death_round={}", opt(s.last_death_round));
        let _ = writeln!(out, "# total_frames={}", s.total_frames);
        let _ = writeln!(out, "# initial_energy_j={:.6}", s.initial_energy);
        let _ = writeln!(out, "# sensing_energy_j={:.6}", s.sensing_energy);
        out
    }
}

pub fn write_metrics_csv<W: Write>(metrics: &Metrics, mut destination: W) -> io::Result<()> {
    destination.write_all(metrics.to_csv().as_bytes())?;
    destination.flush()
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("metrics csv line {line}: {message}")]
pub struct CsvError {
    pub line: usize,
    pub message: String,
}

/// Parses the output of [`write_metrics_csv`].
pub fn read_metrics_csv(text: &str) -> Result<Metrics, CsvError> {
    let err = |line: usize, message: &str| CsvError { line, message: message.to_string() };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => return Err(err(1, "missing header")),
    }
    let mut records = Vec::new();
    let mut summary = Summary::default();
    for (i, line) in lines {
        let n = i + 1;
        if let Some(rest) = line.strip_prefix("# ") {
            let (key, value) = rest.split_once('=').ok_or_else(|| err(n, "summary line lacks '='"))?;
            let round = || -> Result<Option<u32>, CsvError> {
                if value == "NA" { Ok(None) } else { value.parse().map(Some).map_err(|_| err(n, "bad round")) }
            };
            let num = || value.parse::<f64>().map_err(|_| err(n, "bad number"));
            match key {
                "ordinary_nodes" => summary.ordinary_nodes = value.parse().map_err(|_| err(n, "bad count"))?,
                "first_death_round" => summary.first_death_round = round()?,
                "half_death_round" => summary.half_death_round = round()?,
                "last_death_round" => summary.last_death_round = round()?,
                "total_frames" => summary.total_frames = value.parse().map_err(|_| err(n, "bad count"))?,
                "initial_energy_j" => summary.initial_energy = num()?,
                "sensing_energy_j" => summary.sensing_energy = num()?,
                _ => return Err(err(n, "unknown summary key")),
            }
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(err(n, "expected 6 columns"));
        }
        let float = |s: &str| s.parse::<f64>().map_err(|_| err(n, "bad number"));
        records.push(RoundRecord {
            round: f[0].parse().map_err(|_| err(n, "bad round"))?,
            alive: f[1].parse().map_err(|_| err(n, "bad alive count"))?,
            residual: float(f[2])?,
            dissipated: float(f[3])?,
            harvested: float(f[4])?,
            frames: f[5].parse().map_err(|_| err(n, "bad frame count"))?,
        });
    }
    Ok(Metrics { records, summary })
}
