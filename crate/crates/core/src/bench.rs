//! Load / filter / DFG benchmark over EDF1 files.
//!
//! Timings are monotonic wall-clock medians; memory is the deterministic
//! [`Dataframe::memory_footprint`] estimate rather than process RSS.

use std::collections::HashSet;
use std::fs::{self, File};
use std::path::Path;
use std::time::Instant;

use crate::dataframe::Dataframe;
use crate::dfg::{dfg_shift_count, filter_events, most_frequent_activity};
use crate::edf::EdfReader;
use crate::error::{Error, Result};

pub const MIN_REPEATS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnsMode {
    All,
    /// Only the case and activity columns.
    Two,
}

impl ColumnsMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "all" => Some(ColumnsMode::All),
            "two" => Some(ColumnsMode::Two),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ColumnsMode::All => "all",
            ColumnsMode::Two => "two",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub log_label: String,
    pub disk_bytes: u64,
    pub load_seconds: f64,
    pub ram_bytes: u64,
    pub filter_seconds: f64,
    pub dfg_seconds: f64,
    pub columns_loaded: usize,
}

impl BenchReport {
    pub const CSV_HEADER: &'static str = "label,disk_bytes,load_s,ram_bytes,filter_s,dfg_s,columns_loaded";

    pub fn csv_row(&self) -> String {
        let mut buf = Vec::new();
        {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut buf);
            w.write_record([
                self.log_label.clone(),
                self.disk_bytes.to_string(),
                format!("{:.3}", self.load_seconds),
                self.ram_bytes.to_string(),
                format!("{:.3}", self.filter_seconds),
                format!("{:.3}", self.dfg_seconds),
                self.columns_loaded.to_string(),
            ])
            .expect("writing to a Vec cannot fail");
        }
        String::from_utf8(buf).expect("UTF-8").trim_end().to_string()
    }

    pub fn human(&self) -> String {
        format!(
            "{label}\n  size on disk   {disk:.2} MB\n  load           {load:.3} s ({cols} columns)\n  \
             memory         {ram:.2} MB\n  filter         {filter:.3} s\n  dfg            {dfg:.3} s\n",
            label = self.log_label,
            disk = self.disk_bytes as f64 / 1e6,
            load = self.load_seconds,
            cols = self.columns_loaded,
            ram = self.ram_bytes as f64 / 1e6,
            filter = self.filter_seconds,
            dfg = self.dfg_seconds,
        )
    }
}

pub fn median(samples: &mut [f64]) -> f64 {
    assert!(!samples.is_empty(), "median of no samples");
    samples.sort_by(f64::total_cmp);
    let mid = samples.len() / 2;
    if samples.len() % 2 == 1 {
        samples[mid]
    } else {
        (samples[mid - 1] + samples[mid]) / 2.0
    }
}

/// Runs `f` `repeats` times; returns the median wall time in seconds and the last result.
pub fn time_median<T>(repeats: usize, mut f: impl FnMut() -> Result<T>) -> Result<(f64, T)> {
    let mut samples = Vec::with_capacity(repeats.max(1));
    let mut last = None;
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        let out = f()?;
        samples.push(start.elapsed().as_secs_f64());
        last = Some(out);
    }
    Ok((median(&mut samples), last.expect("at least one run")))
}

/// Least-squares slope of `ln(time)` against `ln(size)`.
pub fn fit_exponent(sizes: &[f64], times: &[f64]) -> f64 {
    assert_eq!(sizes.len(), times.len());
    let xs: Vec<f64> = sizes.iter().map(|s| s.ln()).collect();
    let ys: Vec<f64> = times.iter().map(|t| t.max(1e-9).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

fn open(path: &Path) -> Result<EdfReader<File>> {
    let file = File::open(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    EdfReader::open(file)
}

/// Loads an EDF1 file with the chosen columns.
pub fn load(path: &Path, mode: ColumnsMode) -> Result<Dataframe> {
    let mut reader = open(path)?;
    match mode {
        ColumnsMode::All => reader.read(None),
        ColumnsMode::Two => reader.read(Some(&[])),
    }
}

/// Measures, in order: size on disk, load time, memory footprint, the time
/// to keep only the most frequent activity, and the shifting-and-counting
/// DFG time on the unsorted frame. Each timing is a median of at least
/// three runs.
pub fn bench(path: &Path, mode: ColumnsMode, repeats: usize) -> Result<BenchReport> {
    let repeats = repeats.max(MIN_REPEATS);
    let disk_bytes = fs::metadata(path)
        .map_err(|source| Error::File {
            path: path.to_path_buf(),
            source,
        })?
        .len();
    let (load_seconds, df) = time_median(repeats, || load(path, mode))?;
    let ram_bytes = df.memory_footprint() as u64;

    let keep: HashSet<_> = most_frequent_activity(&df).into_iter().collect();
    let (filter_seconds, _) = time_median(repeats, || filter_events(&df, df.activity_column(), &keep))?;
    let (dfg_seconds, _) = time_median(repeats, || dfg_shift_count(&df, false))?;

    let stem = path.file_stem().map_or_else(|| "log".into(), |s| s.to_string_lossy().into_owned());
    Ok(BenchReport {
        log_label: format!("{stem}-{}", mode.name()),
        disk_bytes,
        load_seconds,
        ram_bytes,
        filter_seconds,
        dfg_seconds,
        columns_loaded: df.column_count(),
    })
}
