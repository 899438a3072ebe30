//! Skeleton data model: the canonical 14-joint set, per-frame detections in
//! pixel/range form, and per-axis world-coordinate tracks.
//!
//! A joint the detector failed to localize is *missing*. Missing samples are
//! carried as `0.0` in world-coordinate tracks ([`MISSING`]); every value a
//! repaired track contains is nonzero, so downstream stages may treat zero as
//! the absence marker. A legitimate coordinate of exactly `0.0` is
//! indistinguishable from a dropout under this convention — callers whose
//! geometry places joints on a world axis plane should offset the scene.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sentinel for a missing sample in a world-coordinate track.
pub const MISSING: f64 = 0.0;

/// Number of joints in the canonical skeleton.
pub const JOINT_COUNT: usize = 14;

/// Canonical upper/lower-body joint set emitted by the pose detector.
///
/// `Head` is carried through ingestion and repair but takes no part in the
/// feature pairs (its localization is too unstable on low-resolution range
/// images to help identification).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum JointId {
    Head,
    Neck,
    RShoulder,
    LShoulder,
    RElbow,
    LElbow,
    RWrist,
    LWrist,
    RHip,
    LHip,
    RKnee,
    LKnee,
    RAnkle,
    LAnkle,
}

impl JointId {
    /// All joints in canonical order; indexes agree with `as usize`.
    pub const ALL: [JointId; JOINT_COUNT] = [
        JointId::Head,
        JointId::Neck,
        JointId::RShoulder,
        JointId::LShoulder,
        JointId::RElbow,
        JointId::LElbow,
        JointId::RWrist,
        JointId::LWrist,
        JointId::RHip,
        JointId::LHip,
        JointId::RKnee,
        JointId::LKnee,
        JointId::RAnkle,
        JointId::LAnkle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            JointId::Head => "Head",
            JointId::Neck => "Neck",
            JointId::RShoulder => "RShoulder",
            JointId::LShoulder => "LShoulder",
            JointId::RElbow => "RElbow",
            JointId::LElbow => "LElbow",
            JointId::RWrist => "RWrist",
            JointId::LWrist => "LWrist",
            JointId::RHip => "RHip",
            JointId::LHip => "LHip",
            JointId::RKnee => "RKnee",
            JointId::LKnee => "LKnee",
            JointId::RAnkle => "RAnkle",
            JointId::LAnkle => "LAnkle",
        }
    }

    /// Parse a canonical joint name; `None` for anything else.
    pub fn from_name(name: &str) -> Option<JointId> {
        JointId::ALL.iter().copied().find(|j| j.name() == name)
    }
}

/// One world-coordinate axis. `X`/`Y` come from the image axes (x right,
/// y down, matching pixel coordinates); `Z` is the range axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

/// A single joint detection: sub-pixel image position plus range in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointMeasurement {
    pub x_px: f64,
    pub y_px: f64,
    pub range_m: f64,
}

/// One detector frame: 14 joint slots, `None` where detection failed.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSkeletonFrame {
    pub frame_index: u64,
    pub joints: [Option<JointMeasurement>; JOINT_COUNT],
}

impl RawSkeletonFrame {
    pub fn empty(frame_index: u64) -> Self {
        RawSkeletonFrame {
            frame_index,
            joints: [None; JOINT_COUNT],
        }
    }

    pub fn joint(&self, id: JointId) -> Option<JointMeasurement> {
        self.joints[id as usize]
    }
}

/// A loaded sequence before projection: ordered frames plus labels.
#[derive(Debug, Clone)]
pub struct RawSequence {
    pub subject_label: String,
    pub walk_type: String,
    /// Stable identifier (file stem on load, assigned name for generated data).
    pub sequence_id: String,
    /// Frames in ascending `frame_index` order.
    pub frames: Vec<RawSkeletonFrame>,
    /// Non-fatal ingestion notes (unknown joints skipped, etc.).
    pub warnings: Vec<String>,
}

/// Where pixel index 0 sits relative to the optical axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PixelOrigin {
    /// Pixels are offsets from the image corner; the optical axis passes
    /// through `n_pixels / 2`. Pixel values are centered before scaling, so
    /// world coordinates are signed. The default.
    #[default]
    Center,
    /// Pixel values are used as-is, yielding nonnegative world coordinates.
    Corner,
}

/// Sensor intrinsics needed to scale pixels to world lengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraParams {
    pub n_pixels_x: u32,
    pub n_pixels_y: u32,
    /// Horizontal angle of view, degrees.
    pub aov_x_deg: f64,
    /// Vertical angle of view, degrees.
    pub aov_y_deg: f64,
    #[serde(default)]
    pub pixel_origin: PixelOrigin,
}

impl Default for CameraParams {
    fn default() -> Self {
        CameraParams {
            n_pixels_x: 128,
            n_pixels_y: 128,
            aov_x_deg: 45.0,
            aov_y_deg: 45.0,
            pixel_origin: PixelOrigin::Center,
        }
    }
}

/// World-coordinate time series of one joint along one axis, in meters.
/// Missing samples are [`MISSING`] (`0.0`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointTrack {
    pub joint: JointId,
    pub axis: Axis,
    pub values: Vec<f64>,
}

impl JointTrack {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Per-frame world points for one frame: `None` where the joint is missing.
pub type FramePoints = [Option<[f64; 3]>; JOINT_COUNT];

/// Split per-frame world points into 42 per-axis tracks (joint-major order:
/// `Head.x, Head.y, Head.z, Neck.x, …`). Missing joints become [`MISSING`]
/// in all three axis tracks for that frame.
pub fn tracks_from_frames(points: &[FramePoints]) -> Vec<JointTrack> {
    let mut tracks: Vec<JointTrack> = JointId::ALL
        .iter()
        .flat_map(|&joint| {
            Axis::ALL.iter().map(move |&axis| JointTrack {
                joint,
                axis,
                values: Vec::with_capacity(points.len()),
            })
        })
        .collect();
    for frame in points {
        for (j, point) in frame.iter().enumerate() {
            let [x, y, z] = point.unwrap_or([MISSING; 3]);
            tracks[j * 3].values.push(x);
            tracks[j * 3 + 1].values.push(y);
            tracks[j * 3 + 2].values.push(z);
        }
    }
    tracks
}

/// A full sequence in world coordinates: 42 equal-length tracks plus labels.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldSkeletonSequence {
    pub subject_label: String,
    pub walk_type: String,
    pub sequence_id: String,
    tracks: Vec<JointTrack>,
}

impl WorldSkeletonSequence {
    /// Build from 42 tracks in joint-major order. Fails unless exactly
    /// 14 × 3 tracks are given, in canonical order, all the same nonzero
    /// length.
    pub fn new(
        subject_label: String,
        walk_type: String,
        sequence_id: String,
        tracks: Vec<JointTrack>,
    ) -> Result<Self> {
        if tracks.len() != JOINT_COUNT * 3 {
            return Err(Error::Validation(format!(
                "expected {} tracks, got {}",
                JOINT_COUNT * 3,
                tracks.len()
            )));
        }
        let len = tracks[0].len();
        if len == 0 {
            return Err(Error::Validation(format!(
                "sequence {sequence_id} has no frames"
            )));
        }
        for (i, track) in tracks.iter().enumerate() {
            let (joint, axis) = (JointId::ALL[i / 3], Axis::ALL[i % 3]);
            if track.joint != joint || track.axis != axis {
                return Err(Error::Validation(format!(
                    "track {i} is {}.{}, expected {}.{}",
                    track.joint.name(),
                    track.axis.name(),
                    joint.name(),
                    axis.name()
                )));
            }
            if track.len() != len {
                return Err(Error::Validation(format!(
                    "track {}.{} has {} frames, expected {}",
                    track.joint.name(),
                    track.axis.name(),
                    track.len(),
                    len
                )));
            }
        }
        Ok(WorldSkeletonSequence {
            subject_label,
            walk_type,
            sequence_id,
            tracks,
        })
    }

    /// Number of frames (equal across all tracks).
    pub fn len(&self) -> usize {
        self.tracks[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn tracks(&self) -> &[JointTrack] {
        &self.tracks
    }

    pub fn track(&self, joint: JointId, axis: Axis) -> &JointTrack {
        &self.tracks[joint as usize * 3 + axis as usize]
    }

    /// Map every track through `f`, preserving labels. Fails if `f` changes
    /// track lengths unevenly.
    pub fn map_tracks(&self, mut f: impl FnMut(&JointTrack) -> Vec<f64>) -> Result<Self> {
        let tracks = self
            .tracks
            .iter()
            .map(|t| JointTrack {
                joint: t.joint,
                axis: t.axis,
                values: f(t),
            })
            .collect();
        WorldSkeletonSequence::new(
            self.subject_label.clone(),
            self.walk_type.clone(),
            self.sequence_id.clone(),
            tracks,
        )
    }

    /// World point of `joint` at `frame`; `None` if any axis holds the
    /// missing sentinel.
    pub fn point(&self, joint: JointId, frame: usize) -> Option<[f64; 3]> {
        let p = self.point_raw(joint, frame);
        if p.iter().any(|&v| v == MISSING) {
            None
        } else {
            Some(p)
        }
    }

    /// World point of `joint` at `frame` with missing axes left as `0.0`.
    pub fn point_raw(&self, joint: JointId, frame: usize) -> [f64; 3] {
        let base = joint as usize * 3;
        [
            self.tracks[base].values[frame],
            self.tracks[base + 1].values[frame],
            self.tracks[base + 2].values[frame],
        ]
    }
}
