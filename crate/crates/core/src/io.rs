//! Sequence file formats.
//!
//! Raw detector sequences arrive as JSONL (one frame object per line) or CSV
//! (one frame row). Both carry pixel coordinates plus range per joint.
//! Intermediate pipeline artifacts — world-coordinate sequences and feature
//! tables — are self-describing (format/version fields, named columns) so
//! any stage can be re-run from the previous stage's output.
//!
//! JSONL frame schema:
//!
//! ```json
//! {"frame": 0, "subject": "s01", "walk": "toward",
//!  "joints": {"Head": [61.8, 14.2, 8.41], "LAnkle": null, ...}}
//! ```
//!
//! CSV columns: `frame, subject, walk`, then `<Joint>_x, <Joint>_y,
//! <Joint>_range` for each of the 14 canonical joints; empty cells mean the
//! joint is missing in that frame.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::skeleton::{
    Axis, JointId, JointMeasurement, JointTrack, RawSequence, RawSkeletonFrame,
    WorldSkeletonSequence, JOINT_COUNT,
};

/// On-disk encoding of a raw sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceFormat {
    Jsonl,
    Csv,
}

impl SequenceFormat {
    /// Infer the format from a file extension (`.jsonl`/`.json` or `.csv`).
    pub fn from_path(path: &Path) -> Result<SequenceFormat> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") => Ok(SequenceFormat::Jsonl),
            Some("csv") => Ok(SequenceFormat::Csv),
            other => Err(Error::Validation(format!(
                "cannot infer sequence format of {} (extension {:?}); expected .jsonl or .csv",
                path.display(),
                other.unwrap_or("")
            ))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonlFrame {
    frame: u64,
    subject: String,
    walk: String,
    joints: BTreeMap<String, Option<[f64; 3]>>,
}

fn path_str(path: &Path) -> String {
    path.display().to_string()
}

fn sequence_id_from(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("sequence")
        .to_string()
}

/// Load one raw sequence, inferring the format from the extension.
pub fn load_sequence(path: &Path) -> Result<RawSequence> {
    load_sequence_as(path, SequenceFormat::from_path(path)?)
}

/// Load one raw sequence in an explicit format.
///
/// Frames are sorted by frame index; a duplicate index is an error. Joint
/// names outside the canonical set are skipped with a warning recorded on the
/// returned sequence. A joint whose three values are all exactly zero is
/// treated as missing (the zero-sentinel convention some detectors emit
/// instead of null).
pub fn load_sequence_as(path: &Path, format: SequenceFormat) -> Result<RawSequence> {
    let mut seq = match format {
        SequenceFormat::Jsonl => load_jsonl(path),
        SequenceFormat::Csv => load_csv(path),
    }?;
    seq.frames.sort_by_key(|f| f.frame_index);
    for pair in seq.frames.windows(2) {
        if pair[0].frame_index == pair[1].frame_index {
            return Err(Error::DuplicateFrame {
                path: path_str(path),
                frame: pair[0].frame_index,
            });
        }
    }
    Ok(seq)
}

fn check_joint_values(path: &Path, line: usize, name: &str, values: [f64; 3]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::parse(
            path_str(path),
            line,
            format!("non-finite value for joint {name}"),
        ));
    }
    if values[2] <= 0.0 {
        return Err(Error::parse(
            path_str(path),
            line,
            format!("joint {name} has non-positive range {}", values[2]),
        ));
    }
    Ok(())
}

fn load_jsonl(path: &Path) -> Result<RawSequence> {
    let reader = BufReader::new(File::open(path)?);
    let mut frames = Vec::new();
    let mut warnings = Vec::new();
    let mut labels: Option<(String, String)> = None;
    let mut unknown_warned = std::collections::BTreeSet::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: JsonlFrame = serde_json::from_str(&line)
            .map_err(|e| Error::parse(path_str(path), line_no, e.to_string()))?;
        match &labels {
            None => labels = Some((record.subject.clone(), record.walk.clone())),
            Some((subject, walk)) => {
                if *subject != record.subject || *walk != record.walk {
                    return Err(Error::parse(
                        path_str(path),
                        line_no,
                        format!(
                            "labels changed mid-sequence: {}/{} became {}/{}",
                            subject, walk, record.subject, record.walk
                        ),
                    ));
                }
            }
        }
        let mut frame = RawSkeletonFrame::empty(record.frame);
        for (name, values) in &record.joints {
            let Some(joint) = JointId::from_name(name) else {
                if unknown_warned.insert(name.clone()) {
                    warnings.push(format!("ignoring unknown joint {name:?}"));
                }
                continue;
            };
            let Some(values) = values else { continue };
            if values.iter().all(|&v| v == 0.0) {
                continue; // zero-filled slot: detector's missing marker
            }
            check_joint_values(path, line_no, name, *values)?;
            frame.joints[joint as usize] = Some(JointMeasurement {
                x_px: values[0],
                y_px: values[1],
                range_m: values[2],
            });
        }
        frames.push(frame);
    }

    let (subject_label, walk_type) = labels.ok_or_else(|| {
        Error::Validation(format!("{}: sequence file has no frames", path.display()))
    })?;
    Ok(RawSequence {
        subject_label,
        walk_type,
        sequence_id: sequence_id_from(path),
        frames,
        warnings,
    })
}

/// Canonical CSV header, in column order.
pub fn csv_header() -> Vec<String> {
    let mut cols = vec!["frame".to_string(), "subject".to_string(), "walk".to_string()];
    for joint in JointId::ALL {
        cols.push(format!("{}_x", joint.name()));
        cols.push(format!("{}_y", joint.name()));
        cols.push(format!("{}_range", joint.name()));
    }
    cols
}

fn load_csv(path: &Path) -> Result<RawSequence> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
    let expected = csv_header();
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(path_str(path), 1, e.to_string()))?;
    let actual: Vec<String> = headers.iter().map(str::to_string).collect();
    if actual != expected {
        return Err(Error::parse(
            path_str(path),
            1,
            format!(
                "unexpected CSV header; expected {} columns starting {:?}",
                expected.len(),
                &expected[..4.min(expected.len())]
            ),
        ));
    }

    let mut frames = Vec::new();
    let mut labels: Option<(String, String)> = None;
    for (idx, record) in reader.records().enumerate() {
        let line_no = idx + 2; // 1-based, after the header row
        let record = record.map_err(|e| Error::parse(path_str(path), line_no, e.to_string()))?;
        if record.len() != expected.len() {
            return Err(Error::parse(
                path_str(path),
                line_no,
                format!("expected {} fields, got {}", expected.len(), record.len()),
            ));
        }
        let frame_index: u64 = record[0]
            .trim()
            .parse()
            .map_err(|_| Error::parse(path_str(path), line_no, "bad frame index"))?;
        let (subject, walk) = (record[1].to_string(), record[2].to_string());
        match &labels {
            None => labels = Some((subject, walk)),
            Some((s, w)) => {
                if *s != subject || *w != walk {
                    return Err(Error::parse(
                        path_str(path),
                        line_no,
                        format!("labels changed mid-sequence: {s}/{w} became {subject}/{walk}"),
                    ));
                }
            }
        }
        let mut frame = RawSkeletonFrame::empty(frame_index);
        for (j, joint) in JointId::ALL.iter().enumerate() {
            let cells = [&record[3 + j * 3], &record[4 + j * 3], &record[5 + j * 3]];
            if cells.iter().any(|c| c.trim().is_empty()) {
                continue;
            }
            let mut values = [0.0f64; 3];
            for (v, cell) in values.iter_mut().zip(cells) {
                *v = cell.trim().parse().map_err(|_| {
                    Error::parse(
                        path_str(path),
                        line_no,
                        format!("bad number {cell:?} for joint {}", joint.name()),
                    )
                })?;
            }
            if values.iter().all(|&v| v == 0.0) {
                continue;
            }
            check_joint_values(path, line_no, joint.name(), values)?;
            frame.joints[j as usize] = Some(JointMeasurement {
                x_px: values[0],
                y_px: values[1],
                range_m: values[2],
            });
        }
        frames.push(frame);
    }

    let (subject_label, walk_type) = labels.ok_or_else(|| {
        Error::Validation(format!("{}: sequence file has no frames", path.display()))
    })?;
    Ok(RawSequence {
        subject_label,
        walk_type,
        sequence_id: sequence_id_from(path),
        frames,
        warnings: Vec::new(),
    })
}

/// Write a raw sequence as canonical JSONL: frames in ascending order, all
/// 14 joints listed per frame (null where missing), keys alphabetical.
/// Loading a canonical file and saving it again reproduces it byte for byte.
pub fn save_sequence_jsonl(seq: &RawSequence, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let mut frames: Vec<&RawSkeletonFrame> = seq.frames.iter().collect();
    frames.sort_by_key(|f| f.frame_index);
    for frame in frames {
        let mut joints = BTreeMap::new();
        for joint in JointId::ALL {
            let value = frame
                .joint(joint)
                .map(|m| [m.x_px, m.y_px, m.range_m]);
            joints.insert(joint.name().to_string(), value);
        }
        let record = JsonlFrame {
            frame: frame.frame_index,
            subject: seq.subject_label.clone(),
            walk: seq.walk_type.clone(),
            joints,
        };
        serde_json::to_writer(&mut out, &record)
            .map_err(|e| Error::Validation(format!("serializing {}: {e}", path.display())))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Write a raw sequence as canonical CSV (header from [`csv_header`]).
pub fn save_sequence_csv(seq: &RawSequence, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
    writer
        .write_record(csv_header())
        .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
    let mut frames: Vec<&RawSkeletonFrame> = seq.frames.iter().collect();
    frames.sort_by_key(|f| f.frame_index);
    for frame in frames {
        let mut row = vec![
            frame.frame_index.to_string(),
            seq.subject_label.clone(),
            seq.walk_type.clone(),
        ];
        for joint in JointId::ALL {
            match frame.joint(joint) {
                Some(m) => {
                    row.push(format_float(m.x_px));
                    row.push(format_float(m.y_px));
                    row.push(format_float(m.range_m));
                }
                None => row.extend([String::new(), String::new(), String::new()]),
            }
        }
        writer
            .write_record(&row)
            .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
    }
    writer
        .flush()
        .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// Shortest decimal that round-trips the value (same encoder JSON uses).
fn format_float(v: f64) -> String {
    let mut buf = ryu_format(v);
    // Trim the ".0" suffix ryu emits for integral values, matching JSON output.
    if buf.ends_with(".0") {
        buf.truncate(buf.len() - 2);
    }
    buf
}

fn ryu_format(v: f64) -> String {
    // serde_json renders f64 with the shortest round-trip representation;
    // reuse it so CSV and JSONL artifacts agree digit for digit.
    serde_json::to_string(&v).expect("finite f64 serializes")
}

/// Load every `.jsonl`/`.csv` sequence under `dir`, sorted by file name.
pub fn load_sequence_dir(dir: &Path) -> Result<Vec<RawSequence>> {
    if !dir.is_dir() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("input directory {} does not exist", dir.display()),
        )));
    }
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| SequenceFormat::from_path(p).is_ok())
        .collect();
    paths.sort();
    paths.iter().map(|p| load_sequence(p)).collect()
}

// ── world-coordinate sequence artifact ──────────────────────────────────────

/// Format tag for world-sequence artifacts.
pub const WORLD_SEQUENCE_FORMAT: &str = "world-skeleton-sequence";
/// Current world-sequence artifact version.
pub const WORLD_SEQUENCE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct WorldSequenceFile {
    format: String,
    version: u32,
    subject: String,
    walk: String,
    sequence_id: String,
    frames: usize,
    /// Joint name → `[x, y, z]` tracks, each `frames` long.
    tracks: BTreeMap<String, [Vec<f64>; 3]>,
}

/// Write a world sequence as a self-describing JSON artifact.
pub fn save_world_sequence(seq: &WorldSkeletonSequence, path: &Path) -> Result<()> {
    let mut tracks = BTreeMap::new();
    for joint in JointId::ALL {
        tracks.insert(
            joint.name().to_string(),
            [
                seq.track(joint, Axis::X).values.clone(),
                seq.track(joint, Axis::Y).values.clone(),
                seq.track(joint, Axis::Z).values.clone(),
            ],
        );
    }
    let file = WorldSequenceFile {
        format: WORLD_SEQUENCE_FORMAT.to_string(),
        version: WORLD_SEQUENCE_VERSION,
        subject: seq.subject_label.clone(),
        walk: seq.walk_type.clone(),
        sequence_id: seq.sequence_id.clone(),
        frames: seq.len(),
        tracks,
    };
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut out, &file)
        .map_err(|e| Error::Validation(format!("serializing {}: {e}", path.display())))?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Read a world-sequence artifact written by [`save_world_sequence`].
pub fn load_world_sequence(path: &Path) -> Result<WorldSkeletonSequence> {
    let reader = BufReader::new(File::open(path)?);
    let file: WorldSequenceFile = serde_json::from_reader(reader)
        .map_err(|e| Error::parse(path_str(path), e.line().max(1), e.to_string()))?;
    if file.format != WORLD_SEQUENCE_FORMAT {
        return Err(Error::Validation(format!(
            "{}: format {:?} is not a world-sequence artifact",
            path.display(),
            file.format
        )));
    }
    if file.version != WORLD_SEQUENCE_VERSION {
        return Err(Error::Validation(format!(
            "{}: unsupported world-sequence version {}",
            path.display(),
            file.version
        )));
    }
    let mut tracks = Vec::with_capacity(JOINT_COUNT * 3);
    for joint in JointId::ALL {
        let per_axis = file.tracks.get(joint.name()).ok_or_else(|| {
            Error::Validation(format!("{}: missing joint {}", path.display(), joint.name()))
        })?;
        for (axis, values) in Axis::ALL.iter().zip(per_axis) {
            if values.len() != file.frames {
                return Err(Error::Validation(format!(
                    "{}: track {}.{} has {} frames, header says {}",
                    path.display(),
                    joint.name(),
                    axis.name(),
                    values.len(),
                    file.frames
                )));
            }
            tracks.push(JointTrack {
                joint,
                axis: *axis,
                values: values.clone(),
            });
        }
    }
    WorldSkeletonSequence::new(file.subject, file.walk, file.sequence_id, tracks)
}

/// All world-sequence artifacts under `dir`, sorted by file name.
pub fn load_world_sequence_dir(dir: &Path) -> Result<Vec<WorldSkeletonSequence>> {
    if !dir.is_dir() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("input directory {} does not exist", dir.display()),
        )));
    }
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| load_world_sequence(p)).collect()
}

// ── per-frame feature table artifact ────────────────────────────────────────

/// A per-frame feature table for one sequence, as stored in stage CSVs.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub sequence_id: String,
    pub subject_label: String,
    pub walk_type: String,
    /// One row per frame, all rows the same width.
    pub rows: Vec<Vec<f64>>,
    /// Feature column names (width matches `rows`).
    pub columns: Vec<String>,
}

/// Write a feature table: `sequence_id, subject, walk, frame`, then one
/// column per feature component.
pub fn save_feature_table(table: &FeatureTable, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
    let mut header = vec![
        "sequence_id".to_string(),
        "subject".to_string(),
        "walk".to_string(),
        "frame".to_string(),
    ];
    header.extend(table.columns.iter().cloned());
    writer
        .write_record(&header)
        .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
    for (frame, row) in table.rows.iter().enumerate() {
        let mut record = vec![
            table.sequence_id.clone(),
            table.subject_label.clone(),
            table.walk_type.clone(),
            frame.to_string(),
        ];
        record.extend(row.iter().map(|&v| format_float(v)));
        writer
            .write_record(&record)
            .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
    }
    writer
        .flush()
        .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// Read a feature table written by [`save_feature_table`].
pub fn load_feature_table(path: &Path) -> Result<FeatureTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::parse(path_str(path), 1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.len() < 5 || headers[..4] != ["sequence_id", "subject", "walk", "frame"] {
        return Err(Error::parse(
            path_str(path),
            1,
            "not a feature table (expected sequence_id,subject,walk,frame,… header)",
        ));
    }
    let columns = headers[4..].to_vec();
    let mut table: Option<FeatureTable> = None;
    for (idx, record) in reader.records().enumerate() {
        let line_no = idx + 2;
        let record = record.map_err(|e| Error::parse(path_str(path), line_no, e.to_string()))?;
        if record.len() != headers.len() {
            return Err(Error::parse(
                path_str(path),
                line_no,
                format!("expected {} fields, got {}", headers.len(), record.len()),
            ));
        }
        let frame: usize = record[3]
            .parse()
            .map_err(|_| Error::parse(path_str(path), line_no, "bad frame index"))?;
        let row: Vec<f64> = record
            .iter()
            .skip(4)
            .map(|cell| {
                cell.parse::<f64>()
                    .map_err(|_| Error::parse(path_str(path), line_no, format!("bad number {cell:?}")))
            })
            .collect::<Result<_>>()?;
        let table = table.get_or_insert_with(|| FeatureTable {
            sequence_id: record[0].to_string(),
            subject_label: record[1].to_string(),
            walk_type: record[2].to_string(),
            rows: Vec::new(),
            columns: columns.clone(),
        });
        if frame != table.rows.len() {
            return Err(Error::parse(
                path_str(path),
                line_no,
                format!("frame {frame} out of order (expected {})", table.rows.len()),
            ));
        }
        table.rows.push(row);
    }
    table.ok_or_else(|| Error::Validation(format!("{}: feature table has no rows", path.display())))
}

/// All feature tables under `dir`, sorted by file name.
pub fn load_feature_table_dir(dir: &Path) -> Result<Vec<FeatureTable>> {
    if !dir.is_dir() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("input directory {} does not exist", dir.display()),
        )));
    }
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("csv"))
        .collect();
    paths.sort();
    paths.iter().map(|p| load_feature_table(p)).collect()
}
