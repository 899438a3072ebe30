//! Inter-joint displacement features.
//!
//! A frame is described by the displacement vectors of 12 directed joint
//! pairs — neck to shoulders and hips, then down each limb — giving a
//! 36-component vector `(Δx, Δy, Δz)` per pair, source minus target. The
//! encoding depends only on joint positions relative to each other, so it is
//! invariant to where the subject stands (global translation) but keeps limb
//! lengths and pose angles.
//!
//! Two reduced encodings support baseline comparisons: the pair distances
//! (the 12 vector norms) and displacement vectors measured from the neck to
//! each of the other 12 feature joints.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::skeleton::{JointId, WorldSkeletonSequence};

/// The directed joint pairs, in feature order: torso fan-out first, then
/// upper limb segments, then lower limb segments.
pub const FEATURE_PAIRS: [(JointId, JointId); 12] = [
    (JointId::Neck, JointId::RShoulder),
    (JointId::Neck, JointId::LShoulder),
    (JointId::Neck, JointId::RHip),
    (JointId::Neck, JointId::LHip),
    (JointId::RShoulder, JointId::RElbow),
    (JointId::LShoulder, JointId::LElbow),
    (JointId::RHip, JointId::RKnee),
    (JointId::LHip, JointId::LKnee),
    (JointId::RElbow, JointId::RWrist),
    (JointId::LElbow, JointId::LWrist),
    (JointId::RKnee, JointId::RAnkle),
    (JointId::LKnee, JointId::LAnkle),
];

/// Joints that participate in [`FEATURE_PAIRS`] (all but `Head`).
pub const FEATURE_JOINT_COUNT: usize = 13;

/// Number of components in the full per-frame feature vector.
pub const FRAME_FEATURE_DIM: usize = FEATURE_PAIRS.len() * 3;

/// Per-frame feature encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FeatureScheme {
    /// 36 components: `(Δx, Δy, Δz)` per directed pair. The default.
    #[default]
    PairVectors,
    /// 12 components: Euclidean norm per pair (drops direction).
    PairDistances,
    /// 36 components: displacement from the neck to each other feature joint.
    NeckRelative,
}

impl FeatureScheme {
    pub fn dimension(self) -> usize {
        match self {
            FeatureScheme::PairVectors | FeatureScheme::NeckRelative => 36,
            FeatureScheme::PairDistances => 12,
        }
    }

    /// Column names for feature-table CSVs, in component order.
    pub fn column_names(self) -> Vec<String> {
        match self {
            FeatureScheme::PairVectors => FEATURE_PAIRS
                .iter()
                .flat_map(|(a, b)| {
                    ["dx", "dy", "dz"].into_iter().map(move |axis| {
                        format!("{}_{}_{axis}", snake(a.name()), snake(b.name()))
                    })
                })
                .collect(),
            FeatureScheme::PairDistances => FEATURE_PAIRS
                .iter()
                .map(|(a, b)| format!("{}_{}_dist", snake(a.name()), snake(b.name())))
                .collect(),
            FeatureScheme::NeckRelative => neck_relative_targets()
                .iter()
                .flat_map(|j| {
                    ["dx", "dy", "dz"]
                        .into_iter()
                        .map(move |axis| format!("neck_{}_{axis}", snake(j.name())))
                })
                .collect(),
        }
    }
}

/// Canonical names of the 12 feature segments (`"neck_r_shoulder"`, …), in
/// [`FEATURE_PAIRS`] order. Used as limb keys by the synthetic generator.
pub fn segment_names() -> [String; 12] {
    FEATURE_PAIRS.map(|(a, b)| format!("{}_{}", snake(a.name()), snake(b.name())))
}

fn snake(name: &str) -> String {
    let mut out = String::with_capacity(name.len() + 2);
    for (i, c) in name.chars().enumerate() {
        if c.is_ascii_uppercase() {
            if i > 0 {
                out.push('_');
            }
            out.push(c.to_ascii_lowercase());
        } else {
            out.push(c);
        }
    }
    out
}

/// Feature joints other than the neck, in [`FEATURE_PAIRS`] appearance order.
fn neck_relative_targets() -> [JointId; 12] {
    [
        JointId::RShoulder,
        JointId::LShoulder,
        JointId::RHip,
        JointId::LHip,
        JointId::RElbow,
        JointId::LElbow,
        JointId::RKnee,
        JointId::LKnee,
        JointId::RWrist,
        JointId::LWrist,
        JointId::RAnkle,
        JointId::LAnkle,
    ]
}

/// Full displacement feature for one frame: 12 × (Δx, Δy, Δz), source minus
/// target, in [`FEATURE_PAIRS`] order. `points` is indexed by `JointId`.
pub fn frame_feature(points: &[[f64; 3]; crate::skeleton::JOINT_COUNT]) -> [f64; FRAME_FEATURE_DIM] {
    let mut out = [0.0; FRAME_FEATURE_DIM];
    for (k, (a, b)) in FEATURE_PAIRS.iter().enumerate() {
        let (pa, pb) = (points[*a as usize], points[*b as usize]);
        out[k * 3] = pa[0] - pb[0];
        out[k * 3 + 1] = pa[1] - pb[1];
        out[k * 3 + 2] = pa[2] - pb[2];
    }
    out
}

/// What to do when a feature joint still holds the missing sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingPolicy {
    /// Reject the sequence: features demand a repaired input. The default.
    #[default]
    Reject,
    /// Keep the raw `0.0` coordinates. Displacements against an absent joint
    /// are garbage, which is exactly the point: this is the uncorrected
    /// baseline a repair-free pipeline measures itself against.
    KeepZeros,
}

/// Per-frame feature rows for a whole (repaired) sequence under `scheme`.
///
/// The sequence must be repaired first: a missing sample would contribute the
/// raw `0.0` sentinel to displacement components, which is meaningless, so
/// any remaining sentinel in a feature joint is rejected.
pub fn sequence_features(
    seq: &WorldSkeletonSequence,
    scheme: FeatureScheme,
) -> Result<Vec<Vec<f64>>> {
    sequence_features_with(seq, scheme, MissingPolicy::Reject)
}

/// [`sequence_features`] with an explicit policy for missing joints.
pub fn sequence_features_with(
    seq: &WorldSkeletonSequence,
    scheme: FeatureScheme,
    missing: MissingPolicy,
) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::with_capacity(seq.len());
    for frame in 0..seq.len() {
        let mut points = [[0.0f64; 3]; crate::skeleton::JOINT_COUNT];
        for joint in JointId::ALL {
            if joint == JointId::Head {
                continue; // not part of any pair; may legitimately be missing
            }
            points[joint as usize] = match (seq.point(joint, frame), missing) {
                (Some(p), _) => p,
                (None, MissingPolicy::KeepZeros) => seq.point_raw(joint, frame),
                (None, MissingPolicy::Reject) => {
                    return Err(Error::Validation(format!(
                        "sequence {}: joint {} is missing at frame {frame}; repair before extracting features",
                        seq.sequence_id,
                        joint.name()
                    )))
                }
            };
        }
        let full = frame_feature(&points);
        rows.push(match scheme {
            FeatureScheme::PairVectors => full.to_vec(),
            FeatureScheme::PairDistances => full
                .chunks_exact(3)
                .map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt())
                .collect(),
            FeatureScheme::NeckRelative => {
                let neck = points[JointId::Neck as usize];
                neck_relative_targets()
                    .iter()
                    .flat_map(|j| {
                        let p = points[*j as usize];
                        [neck[0] - p[0], neck[1] - p[1], neck[2] - p[2]]
                    })
                    .collect()
            }
        });
    }
    Ok(rows)
}
