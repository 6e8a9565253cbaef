//! Loading recordings and annotations, writing trajectories and detection reports.
//!
//! Recordings are CSV with a `time_s` column followed by one column per channel.
//! The sample rate is inferred from the time column, never configured separately.
//! Reports are a JSON document plus a companion CSV of the per-segment trace.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{FeatureTrajectory, TrajectoryPoint};
use crate::trend::DetectionResult;

/// Relative tolerance on the spacing of the time column.
pub const TIME_STEP_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub label: String,
    pub samples: Vec<f64>,
}

impl Channel {
    pub fn new(label: impl Into<String>, samples: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            samples,
        }
    }
}

/// A uniformly sampled multichannel recording.
///
/// All channels share one length, the sample rate is positive and every
/// sample is finite; [`SignalRecording::new`] refuses anything else.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalRecording {
    sample_rate_hz: f64,
    channels: Vec<Channel>,
}

impl SignalRecording {
    pub fn new(sample_rate_hz: f64, channels: Vec<Channel>) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidRecording(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        let Some(first) = channels.first() else {
            return Err(Error::InvalidRecording("no channels".into()));
        };
        let len = first.samples.len();
        if len < 2 {
            return Err(Error::InvalidRecording(format!("need at least 2 samples, got {len}")));
        }
        for (i, ch) in channels.iter().enumerate() {
            if ch.label.is_empty() {
                return Err(Error::InvalidRecording(format!("channel {i} has no label")));
            }
            if channels[..i].iter().any(|other| other.label == ch.label) {
                return Err(Error::InvalidRecording(format!(
                    "duplicate channel label `{}`",
                    ch.label
                )));
            }
            if ch.samples.len() != len {
                return Err(Error::InvalidRecording(format!(
                    "channel `{}` has {} samples, expected {len}",
                    ch.label,
                    ch.samples.len()
                )));
            }
            if let Some(row) = ch.samples.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite {
                    row,
                    column: ch.label.clone(),
                });
            }
        }
        Ok(Self {
            sample_rate_hz,
            channels,
        })
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn channel(&self, label: &str) -> Result<&Channel> {
        self.channels
            .iter()
            .find(|c| c.label == label)
            .ok_or_else(|| Error::UnknownChannel(label.to_string()))
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.channels[0].samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.sample_rate_hz
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RecordingFormat {
    #[default]
    Csv,
}

pub fn load_recording(path: impl AsRef<Path>, format: RecordingFormat) -> Result<SignalRecording> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    match format {
        RecordingFormat::Csv => read_recording_csv(file),
    }
}

/// Parse a recording from CSV text. Row numbers in errors are file line numbers.
pub fn read_recording_csv<R: Read>(reader: R) -> Result<SignalRecording> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.get(0) != Some("time_s") {
        return Err(Error::MalformedHeader(format!(
            "first column must be `time_s`, found `{}`",
            headers.get(0).unwrap_or("")
        )));
    }
    if headers.len() < 2 {
        return Err(Error::MalformedHeader("no channel columns".into()));
    }
    let labels: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();

    let mut times = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); labels.len()];
    for (i, record) in rdr.records().enumerate() {
        let row = i + 2;
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::Parse {
                row,
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        for (j, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                row,
                message: format!("`{field}` is not a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    row,
                    column: headers[j].to_string(),
                });
            }
            if j == 0 {
                times.push(value);
            } else {
                columns[j - 1].push(value);
            }
        }
    }

    if times.len() < 2 {
        return Err(Error::InvalidRecording(format!(
            "need at least 2 rows, found {}",
            times.len()
        )));
    }
    let step = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if step <= 0.0 {
        return Err(Error::NonUniformSampling { row: 3 });
    }
    for (i, pair) in times.windows(2).enumerate() {
        let d = pair[1] - pair[0];
        if ((d - step) / step).abs() > TIME_STEP_RTOL {
            return Err(Error::NonUniformSampling { row: i + 3 });
        }
    }

    let channels = labels
        .into_iter()
        .zip(columns)
        .map(|(label, samples)| Channel { label, samples })
        .collect();
    // Timestamps carry rounding; a rate within tolerance of a whole number is taken as exact.
    let fs = (times.len() - 1) as f64 / (times[times.len() - 1] - times[0]);
    let whole = fs.round();
    let fs = if (fs - whole).abs() <= TIME_STEP_RTOL * fs {
        whole
    } else {
        fs
    };
    SignalRecording::new(fs, channels)
}

/// Write a recording as `time_s,<labels...>` with `time_s = i / sample_rate`.
///
/// Values are written in shortest round-trip form, so reloading recovers
/// the samples bit for bit.
pub fn write_recording(recording: &SignalRecording, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_recording_csv(recording, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_recording_csv<W: Write>(recording: &SignalRecording, w: &mut W) -> std::io::Result<()> {
    write!(w, "time_s")?;
    for ch in recording.channels() {
        write!(w, ",{}", ch.label)?;
    }
    writeln!(w)?;
    let fs = recording.sample_rate_hz();
    for i in 0..recording.len() {
        write!(w, "{}", i as f64 / fs)?;
        for ch in recording.channels() {
            write!(w, ",{}", ch.samples[i])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnotationEvent {
    pub time_s: f64,
    pub score: u8,
}

/// Externally supplied stiffness scores (0 none, 1 moderate, 2 hard).
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct AnnotationTrack {
    events: Vec<AnnotationEvent>,
}

impl AnnotationTrack {
    pub fn new(events: Vec<AnnotationEvent>) -> Result<Self> {
        for (i, ev) in events.iter().enumerate() {
            if !ev.time_s.is_finite() {
                return Err(Error::InvalidParameter(format!("annotation {i}: non-finite time")));
            }
            if ev.score > 2 {
                return Err(Error::InvalidParameter(format!(
                    "annotation {i}: score {} not in {{0, 1, 2}}",
                    ev.score
                )));
            }
            if i > 0 && ev.time_s <= events[i - 1].time_s {
                return Err(Error::InvalidParameter(format!(
                    "annotation {i}: times must be strictly increasing"
                )));
            }
        }
        Ok(Self { events })
    }

    pub fn events(&self) -> &[AnnotationEvent] {
        &self.events
    }
}

/// Load a `time_s,score` annotation CSV.
pub fn load_annotations(path: impl AsRef<Path>) -> Result<AnnotationTrack> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["time_s", "score"] {
        return Err(Error::MalformedHeader(
            "annotation header must be `time_s,score`".into(),
        ));
    }
    let mut events = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 2;
        let record = record?;
        let time_s: f64 = parse_field(&record, 0, row)?;
        let score: u8 = parse_field(&record, 1, row)?;
        events.push(AnnotationEvent { time_s, score });
    }
    AnnotationTrack::new(events)
}

fn parse_field<T: std::str::FromStr>(record: &csv::StringRecord, idx: usize, row: usize) -> Result<T> {
    let field = record.get(idx).ok_or_else(|| Error::Parse {
        row,
        message: format!("missing field {idx}"),
    })?;
    field.parse().map_err(|_| Error::Parse {
        row,
        message: format!("cannot parse `{field}`"),
    })
}

/// Read a `T_s,F_hz` trajectory CSV. The channel label is taken from the file stem.
pub fn load_trajectory(path: impl AsRef<Path>) -> Result<FeatureTrajectory> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_trajectory_csv(file, label)
}

pub fn read_trajectory_csv<R: Read>(reader: R, channel: impl Into<String>) -> Result<FeatureTrajectory> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.get(0) != Some("T_s") || headers.get(1) != Some("F_hz") {
        return Err(Error::MalformedHeader(
            "trajectory header must start with `T_s,F_hz`".into(),
        ));
    }
    let mut points = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 2;
        let record = record?;
        let t_s: f64 = parse_field(&record, 0, row)?;
        let f_hz: f64 = parse_field(&record, 1, row)?;
        if !(t_s.is_finite() && f_hz.is_finite()) {
            return Err(Error::NonFinite {
                row,
                column: if t_s.is_finite() { "F_hz" } else { "T_s" }.into(),
            });
        }
        points.push(TrajectoryPoint { t_s, f_hz });
    }
    FeatureTrajectory::new(channel, None, points)
}

pub fn write_trajectory(trajectory: &FeatureTrajectory, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_trajectory_csv(trajectory, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_trajectory_csv<W: Write>(trajectory: &FeatureTrajectory, w: &mut W) -> std::io::Result<()> {
    writeln!(w, "T_s,F_hz")?;
    for p in trajectory.points() {
        writeln!(w, "{},{}", p.t_s, p.f_hz)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SegmentRow {
    #[serde(rename = "T_s")]
    t_s: f64,
    #[serde(rename = "F_hz")]
    f_hz: f64,
    wm: Option<f64>,
    cond_freq: bool,
    cond_wm: Option<bool>,
}

#[derive(Serialize)]
struct Report<'a> {
    detector: &'a str,
    detected: bool,
    time_s: Option<f64>,
    f_int_hz: f64,
    channel: &'a str,
    band_index: Option<usize>,
    params: &'a crate::trend::DetectorParams,
    segments: Vec<SegmentRow>,
}

/// Path of the per-segment CSV written alongside a JSON report.
pub fn companion_csv_path(report_path: &Path) -> PathBuf {
    let candidate = report_path.with_extension("csv");
    if candidate == report_path {
        report_path.with_extension("segments.csv")
    } else {
        candidate
    }
}

/// Render the JSON report for a detection run.
pub fn render_report(result: &DetectionResult, trajectory: &FeatureTrajectory) -> Result<String> {
    if trajectory.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if result.trace.len() != trajectory.len() {
        return Err(Error::InvalidParameter(format!(
            "result covers {} segments but trajectory has {}",
            result.trace.len(),
            trajectory.len()
        )));
    }
    let segments = trajectory
        .points()
        .iter()
        .zip(&result.trace)
        .map(|(p, s)| SegmentRow {
            t_s: p.t_s,
            f_hz: p.f_hz,
            wm: s.wm,
            cond_freq: s.cond_freq,
            cond_wm: s.cond_wm,
        })
        .collect();
    let report = Report {
        detector: result.detector.name(),
        detected: result.detected,
        time_s: result.time_s,
        f_int_hz: result.f_int_hz,
        channel: trajectory.channel(),
        band_index: trajectory.band_index(),
        params: &result.params,
        segments,
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    Ok(text)
}

/// Write the JSON report to `path` and the per-segment CSV next to it.
pub fn write_report(result: &DetectionResult, trajectory: &FeatureTrajectory, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let json = render_report(result, trajectory)?;
    std::fs::write(path, json).map_err(|e| Error::io(path, e))?;

    let csv_path = companion_csv_path(path);
    let file = File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    let mut w = BufWriter::new(file);
    let write_rows = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(w, "T_s,F_hz,wm,cond_freq,cond_wm")?;
        for (p, s) in trajectory.points().iter().zip(&result.trace) {
            let wm = s.wm.map(|v| v.to_string()).unwrap_or_default();
            let cond_wm = s.cond_wm.map(|v| v.to_string()).unwrap_or_default();
            writeln!(w, "{},{},{},{},{}", p.t_s, p.f_hz, wm, s.cond_freq, cond_wm)?;
        }
        w.flush()
    };
    write_rows(&mut w).map_err(|e| Error::io(&csv_path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_rate_from_time_column() {
        let csv = format!("time_s,ch1\n0,0.1\n{},0.2\n{},0.3\n", 1.0 / 2148.0, 2.0 / 2148.0);
        let rec = read_recording_csv(csv.as_bytes()).unwrap();
        assert!((rec.sample_rate_hz() - 2148.0).abs() / 2148.0 < 1e-9);
        assert_eq!(rec.len(), 3);
    }

    #[test]
    fn all_zero_single_channel() {
        let csv = "time_s,ch1\n0,0\n0.5,0\n1.0,0\n1.5,0\n";
        let rec = read_recording_csv(csv.as_bytes()).unwrap();
        assert_eq!(rec.channels().len(), 1);
        assert!(rec.channels()[0].samples.iter().all(|&x| x == 0.0));
        assert_eq!(rec.sample_rate_hz(), 2.0);
    }

    #[test]
    fn non_uniform_sampling_rejected() {
        let csv = "time_s,ch1\n0,1\n0.001,2\n0.003,3\n";
        let err = read_recording_csv(csv.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::NonUniformSampling { .. }), "{err}");
        assert!(err.to_string().contains("non-uniform sampling"));
    }

    #[test]
    fn non_finite_names_row() {
        let csv = "time_s,ch1,ch2\n0,1,2\n1,NaN,2\n2,1,2\n";
        let err = read_recording_csv(csv.as_bytes()).unwrap_err();
        match err {
            Error::NonFinite { row, column } => {
                assert_eq!(row, 3);
                assert_eq!(column, "ch1");
            }
            other => panic!("unexpected {other}"),
        }
        let csv = "time_s,ch1\n0,inf\n1,2\n";
        assert!(matches!(
            read_recording_csv(csv.as_bytes()),
            Err(Error::NonFinite { row: 2, .. })
        ));
    }

    #[test]
    fn malformed_headers() {
        for text in ["t,ch1\n0,1\n1,1\n", "time_s\n0\n1\n", "time_s,ch1,ch1\n0,1,1\n1,1,1\n"] {
            assert!(read_recording_csv(text.as_bytes()).is_err(), "{text}");
        }
        assert!(matches!(
            read_recording_csv("x,ch1\n0,1\n1,1\n".as_bytes()),
            Err(Error::MalformedHeader(_))
        ));
    }

    #[test]
    fn mismatched_channel_lengths_rejected() {
        let err = SignalRecording::new(
            10.0,
            vec![Channel::new("a", vec![0.0; 4]), Channel::new("b", vec![0.0; 3])],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidRecording(_)));
    }

    #[test]
    fn annotation_validation() {
        let ok = AnnotationTrack::new(vec![
            AnnotationEvent { time_s: 0.0, score: 0 },
            AnnotationEvent {
                time_s: 180.0,
                score: 2,
            },
            AnnotationEvent {
                time_s: 360.0,
                score: 1,
            },
        ]);
        assert!(ok.is_ok());
        let bad_order = AnnotationTrack::new(vec![
            AnnotationEvent { time_s: 10.0, score: 0 },
            AnnotationEvent { time_s: 10.0, score: 1 },
        ]);
        assert!(bad_order.is_err());
        assert!(AnnotationTrack::new(vec![AnnotationEvent { time_s: 0.0, score: 3 }]).is_err());
    }

    #[test]
    fn trajectory_csv_roundtrip() {
        let traj = FeatureTrajectory::new(
            "x",
            None,
            vec![
                TrajectoryPoint {
                    t_s: 30.0,
                    f_hz: 40.125,
                },
                TrajectoryPoint { t_s: 60.0, f_hz: 39.9 },
            ],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "T_s,F_hz\n30,40.125\n60,39.9\n"
        );
        let back = read_trajectory_csv(buf.as_slice(), "x").unwrap();
        assert_eq!(back.points(), traj.points());
    }
}
