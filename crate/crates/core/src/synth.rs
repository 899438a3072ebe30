//! Parametric synthetic walking skeletons and a lidar-style corruption model.
//!
//! The walker is a kinematic chain driven by sinusoidal joint angles: legs
//! swing sagittally in antiphase, arms counter-swing, and the body follows a
//! configurable floor path. Every one of the 12 feature segments keeps its
//! configured length *exactly* at every frame, and the two legs mirror each
//! other exactly, which makes the ankle-to-ankle distance periodic with
//! period `cadence/2` by construction. Geometry is placed so that all world
//! coordinates stay well away from zero: `0.0` is the missing-value sentinel,
//! and realistic magnitudes (meters from the optical axis, ≥ 10 m range) also
//! keep the repair filter's relative-change test well-conditioned.
//!
//! Corruption mimics a pose estimator on noisy lidar: bursts of missing
//! joints (a two-state Markov chain with exact per-frame marginal rate and
//! configurable mean burst length) and sporadic position jumps. Everything is
//! seeded and reproducible; a ground-truth mask records each corrupted
//! (joint, axis, frame).

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::stable_hash;
use crate::error::{Error, Result};
use crate::features::segment_names;
use crate::skeleton::{
    tracks_from_frames, CameraParams, FramePoints, JointId, JointMeasurement, RawSequence,
    RawSkeletonFrame, WorldSkeletonSequence, JOINT_COUNT,
};

/// Height of the camera above the floor, meters. World y points down, so the
/// floor sits at `y = +CAMERA_HEIGHT_M` and joints live well above zero.
pub const CAMERA_HEIGHT_M: f64 = 4.2;

/// Lateral offset of every walk path, meters. Keeps x coordinates away from
/// the zero sentinel and inside the sensor's field of view at path ranges.
const PATH_X_M: f64 = 3.0;

/// Straight-path start range and diamond-circuit center range, meters.
const TOWARD_Z_START_M: f64 = 15.2;
const DIAMOND_Z_CENTER_M: f64 = 13.2;
const DIAMOND_HALF_X_M: f64 = 0.5;
const DIAMOND_HALF_Z_M: f64 = 1.2;

/// Closest range the straight path may reach. Keeps every joint's pixel
/// inside a default 128-px / 45° sensor: the lowest joint sits ~4.15 m below
/// the optical axis, which needs z ≥ 4.15 / (64 · (2/128)·tan 22.5°) ≈ 10.0.
const MIN_RANGE_M: f64 = 10.2;

/// Shoulder line droop and torso-to-hip splay angles, radians.
const SHOULDER_DROP_RAD: f64 = 0.4;
const HIP_SPLAY_RAD: f64 = 0.18;

/// Standing ankle clearance above the floor, meters.
const ANKLE_CLEARANCE_M: f64 = 0.06;

/// Neck-to-head offset, meters (x, y, z); the head is not a feature joint.
const HEAD_OFFSET_M: [f64; 3] = [0.0, -0.21, 0.05];

/// Arm amplitude factor while a hand holds a walking stick.
const STICK_ARM_FACTOR: f64 = 0.15;

/// The walk paths the generator knows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WalkType {
    /// Straight toward the camera at constant speed.
    #[default]
    Toward,
    /// Laps of a diamond-shaped floor circuit.
    Diamond,
    /// The diamond circuit with the right arm damped by a walking stick.
    DiamondStick,
}

impl WalkType {
    pub const ALL: [WalkType; 3] = [WalkType::Toward, WalkType::Diamond, WalkType::DiamondStick];

    pub fn name(self) -> &'static str {
        match self {
            WalkType::Toward => "toward",
            WalkType::Diamond => "diamond",
            WalkType::DiamondStick => "diamond_stick",
        }
    }
}

/// One synthetic subject: limb geometry plus gait dynamics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectProfile {
    pub label: String,
    /// Meters per feature segment, keyed by the canonical segment names
    /// (`"neck_r_shoulder"`, … — see [`segment_names`]). All 12 required.
    pub limb_lengths: BTreeMap<String, f64>,
    /// Frames per full gait cycle.
    pub cadence_frames: usize,
    /// Path distance covered per gait cycle, meters.
    pub stride_m: f64,
    /// Swing amplitudes, radians.
    pub hip_swing_rad: f64,
    pub knee_swing_rad: f64,
    pub shoulder_swing_rad: f64,
    pub elbow_swing_rad: f64,
    /// Phase offsets, radians (left limbs run half a cycle behind right).
    pub leg_phase_rad: f64,
    pub arm_phase_rad: f64,
    /// Vertical body oscillation amplitude, meters (two per cycle).
    pub bounce_m: f64,
}

/// Limb lengths unpacked for the kinematic chain.
struct Limbs {
    neck_shoulder: [f64; 2], // [right, left]
    neck_hip: [f64; 2],
    upper_arm: [f64; 2],
    forearm: [f64; 2],
    thigh: [f64; 2],
    shank: [f64; 2],
}

impl SubjectProfile {
    pub fn validate(&self) -> Result<()> {
        if self.label.is_empty() {
            return Err(Error::Validation("profile needs a nonempty label".into()));
        }
        let required = segment_names();
        for name in &required {
            match self.limb_lengths.get(name) {
                Some(&len) if len > 0.0 && len.is_finite() => {}
                Some(&len) => {
                    return Err(Error::Validation(format!(
                        "profile {}: segment {name} must be a positive length, got {len}",
                        self.label
                    )));
                }
                None => {
                    return Err(Error::Validation(format!(
                        "profile {}: segment {name} is missing",
                        self.label
                    )));
                }
            }
        }
        for key in self.limb_lengths.keys() {
            if !required.contains(key) {
                return Err(Error::Validation(format!(
                    "profile {}: unknown segment {key}",
                    self.label
                )));
            }
        }
        if self.cadence_frames < 4 {
            return Err(Error::Validation(format!(
                "profile {}: cadence_frames must be at least 4, got {}",
                self.label, self.cadence_frames
            )));
        }
        for (name, value) in [
            ("stride_m", self.stride_m),
            ("bounce_m", self.bounce_m),
            ("hip_swing_rad", self.hip_swing_rad),
            ("knee_swing_rad", self.knee_swing_rad),
            ("shoulder_swing_rad", self.shoulder_swing_rad),
            ("elbow_swing_rad", self.elbow_swing_rad),
        ] {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(Error::Validation(format!(
                    "profile {}: {name} must be nonnegative, got {value}",
                    self.label
                )));
            }
        }
        if self.hip_swing_rad + self.knee_swing_rad >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::Validation(format!(
                "profile {}: leg swing exceeds a quarter turn",
                self.label
            )));
        }
        Ok(())
    }

    fn limbs(&self) -> Limbs {
        let get = |name: &str| self.limb_lengths[name];
        Limbs {
            neck_shoulder: [get("neck_r_shoulder"), get("neck_l_shoulder")],
            neck_hip: [get("neck_r_hip"), get("neck_l_hip")],
            upper_arm: [get("r_shoulder_r_elbow"), get("l_shoulder_l_elbow")],
            forearm: [get("r_elbow_r_wrist"), get("l_elbow_l_wrist")],
            thigh: [get("r_hip_r_knee"), get("l_hip_l_knee")],
            shank: [get("r_knee_r_ankle"), get("l_knee_l_ankle")],
        }
    }

    /// Standing neck height above the floor.
    fn neck_height(&self, limbs: &Limbs) -> f64 {
        let torso = limbs.neck_hip[0].max(limbs.neck_hip[1]) * HIP_SPLAY_RAD.cos();
        let leg = (limbs.thigh[0] + limbs.shank[0]).max(limbs.thigh[1] + limbs.shank[1]);
        torso + leg + ANKLE_CLEARANCE_M
    }
}

/// Floor-path position (x, z) after walking `arc` meters.
fn path_point(walk: WalkType, arc: f64) -> (f64, f64) {
    match walk {
        WalkType::Toward => (PATH_X_M, TOWARD_Z_START_M - arc),
        WalkType::Diamond | WalkType::DiamondStick => {
            let vertices = [
                (PATH_X_M, DIAMOND_Z_CENTER_M - DIAMOND_HALF_Z_M),
                (PATH_X_M + DIAMOND_HALF_X_M, DIAMOND_Z_CENTER_M),
                (PATH_X_M, DIAMOND_Z_CENTER_M + DIAMOND_HALF_Z_M),
                (PATH_X_M - DIAMOND_HALF_X_M, DIAMOND_Z_CENTER_M),
            ];
            let edge = (DIAMOND_HALF_X_M.powi(2) + DIAMOND_HALF_Z_M.powi(2)).sqrt();
            let along = arc.rem_euclid(4.0 * edge);
            let leg = (along / edge) as usize % 4;
            let frac = (along - leg as f64 * edge) / edge;
            let (x0, z0) = vertices[leg];
            let (x1, z1) = vertices[(leg + 1) % 4];
            (x0 + (x1 - x0) * frac, z0 + (z1 - z0) * frac)
        }
    }
}

/// A sagittal-plane unit direction: mostly down, tilted `angle` toward +z.
fn swing_dir(angle: f64) -> [f64; 3] {
    [0.0, angle.cos(), angle.sin()]
}

fn add(p: [f64; 3], dir: [f64; 3], len: f64) -> [f64; 3] {
    [p[0] + dir[0] * len, p[1] + dir[1] * len, p[2] + dir[2] * len]
}

/// All 14 joint positions at frame `t`.
fn pose(profile: &SubjectProfile, limbs: &Limbs, walk: WalkType, t: usize) -> [[f64; 3]; JOINT_COUNT] {
    let tau = std::f64::consts::TAU;
    let phi = tau * t as f64 / profile.cadence_frames as f64 + profile.leg_phase_rad;
    let speed = profile.stride_m / profile.cadence_frames as f64;
    let (xc, zc) = path_point(walk, speed * t as f64);

    let bounce = profile.bounce_m * 0.5 * (1.0 - (2.0 * phi).cos());
    let neck = [xc, CAMERA_HEIGHT_M - profile.neck_height(limbs) + bounce, zc];

    let mut points = [[0.0f64; 3]; JOINT_COUNT];
    points[JointId::Neck as usize] = neck;
    points[JointId::Head as usize] = [
        neck[0] + HEAD_OFFSET_M[0],
        neck[1] + HEAD_OFFSET_M[1],
        neck[2] + HEAD_OFFSET_M[2],
    ];

    // side = 0 is the right side (+x); phases are half a cycle apart.
    for side in 0..2 {
        let sign = if side == 0 { 1.0 } else { -1.0 };
        let leg_phi = phi + side as f64 * std::f64::consts::PI;
        let arm_phi = leg_phi + std::f64::consts::PI + profile.arm_phase_rad;
        let arm_factor = if walk == WalkType::DiamondStick && side == 0 {
            STICK_ARM_FACTOR
        } else {
            1.0
        };

        let shoulder = add(
            neck,
            [sign * SHOULDER_DROP_RAD.cos(), SHOULDER_DROP_RAD.sin(), 0.0],
            limbs.neck_shoulder[side],
        );
        let arm_angle = profile.shoulder_swing_rad * arm_factor * arm_phi.sin();
        let elbow = add(shoulder, swing_dir(arm_angle), limbs.upper_arm[side]);
        let forearm_angle =
            arm_angle + profile.elbow_swing_rad * arm_factor * (arm_phi + 0.9).sin();
        let wrist = add(elbow, swing_dir(forearm_angle), limbs.forearm[side]);

        let hip = add(
            neck,
            [sign * HIP_SPLAY_RAD.sin(), HIP_SPLAY_RAD.cos(), 0.0],
            limbs.neck_hip[side],
        );
        let hip_angle = profile.hip_swing_rad * leg_phi.sin();
        let knee = add(hip, swing_dir(hip_angle), limbs.thigh[side]);
        let shank_angle = hip_angle + profile.knee_swing_rad * leg_phi.cos();
        let ankle = add(knee, swing_dir(shank_angle), limbs.shank[side]);

        let (sh_id, el_id, wr_id, hip_id, kn_id, an_id) = if side == 0 {
            (
                JointId::RShoulder,
                JointId::RElbow,
                JointId::RWrist,
                JointId::RHip,
                JointId::RKnee,
                JointId::RAnkle,
            )
        } else {
            (
                JointId::LShoulder,
                JointId::LElbow,
                JointId::LWrist,
                JointId::LHip,
                JointId::LKnee,
                JointId::LAnkle,
            )
        };
        points[sh_id as usize] = shoulder;
        points[el_id as usize] = elbow;
        points[wr_id as usize] = wrist;
        points[hip_id as usize] = hip;
        points[kn_id as usize] = knee;
        points[an_id as usize] = ankle;
    }
    points
}

/// Generate a clean world-coordinate walking sequence.
///
/// Pure and deterministic: the same inputs always produce the same sequence.
/// Every feature segment keeps its configured length exactly; the legs mirror
/// each other, so the ankle-to-ankle distance is periodic with period
/// `cadence_frames / 2`.
pub fn generate_sequence(
    profile: &SubjectProfile,
    n_frames: usize,
    walk: WalkType,
    sequence_id: &str,
) -> Result<WorldSkeletonSequence> {
    profile.validate()?;
    if n_frames < profile.cadence_frames {
        return Err(Error::Validation(format!(
            "need at least one gait cycle: {n_frames} frames < cadence {}",
            profile.cadence_frames
        )));
    }
    let speed = profile.stride_m / profile.cadence_frames as f64;
    if walk == WalkType::Toward && TOWARD_Z_START_M - speed * ((n_frames - 1) as f64) < MIN_RANGE_M {
        return Err(Error::Validation(format!(
            "straight path would close within {MIN_RANGE_M} m of the camera; \
             shorten the sequence or the stride"
        )));
    }
    let limbs = profile.limbs();
    let frames: Vec<FramePoints> = (0..n_frames)
        .map(|t| pose(profile, &limbs, walk, t).map(Some))
        .collect();
    WorldSkeletonSequence::new(
        profile.label.clone(),
        walk.name().to_owned(),
        sequence_id.to_owned(),
        tracks_from_frames(&frames),
    )
}

/// Lidar-style corruption parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorruptionConfig {
    /// Per-joint per-frame probability of being dropped (exact marginal).
    pub dropout_rate: f64,
    /// Mean length of a dropout burst, frames (1 = independent frames).
    pub burst_length: f64,
    /// Per-joint per-frame probability of a position jump.
    pub jump_rate: f64,
    /// Typical jump displacement, meters (actual magnitude 0.5–1.5 times).
    pub jump_scale: f64,
    pub rng_seed: u64,
}

impl Default for CorruptionConfig {
    fn default() -> Self {
        CorruptionConfig {
            dropout_rate: 0.2,
            burst_length: 2.0,
            jump_rate: 0.05,
            jump_scale: 0.35,
            rng_seed: 0,
        }
    }
}

impl CorruptionConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, rate) in [("dropout_rate", self.dropout_rate), ("jump_rate", self.jump_rate)] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::Validation(format!(
                    "{name} must lie in [0, 1], got {rate}"
                )));
            }
        }
        if !(self.burst_length >= 1.0) {
            return Err(Error::Validation(format!(
                "burst_length must be at least 1 frame, got {}",
                self.burst_length
            )));
        }
        if !(self.jump_scale >= 0.0) {
            return Err(Error::Validation(format!(
                "jump_scale must be nonnegative, got {}",
                self.jump_scale
            )));
        }
        // The burst chain needs entry probability p/(L(1-p)) ≤ 1.
        if self.dropout_rate < 1.0
            && self.dropout_rate / (self.burst_length * (1.0 - self.dropout_rate)) > 1.0
        {
            return Err(Error::Validation(format!(
                "dropout_rate {} is unreachable with burst_length {}",
                self.dropout_rate, self.burst_length
            )));
        }
        Ok(())
    }
}

/// The kind of injected corruption.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionKind {
    Dropout,
    Jump,
}

/// One corrupted coordinate sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskEntry {
    pub frame: usize,
    pub joint: JointId,
    pub axis: crate::skeleton::Axis,
    pub kind: CorruptionKind,
}

/// Ground truth of every corrupted (joint, axis, frame).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorruptionMask {
    pub entries: Vec<MaskEntry>,
}

impl CorruptionMask {
    /// Frames on which `joint` was dropped.
    pub fn dropout_frames(&self, joint: JointId) -> Vec<usize> {
        self.entries
            .iter()
            .filter(|e| {
                e.joint == joint
                    && e.kind == CorruptionKind::Dropout
                    && e.axis == crate::skeleton::Axis::X
            })
            .map(|e| e.frame)
            .collect()
    }
}

/// A uniformly random unit vector.
fn unit_vector(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
        ];
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm > 1e-3 && norm <= 1.0 {
            return [v[0] / norm, v[1] / norm, v[2] / norm];
        }
    }
}

/// Inject missing bursts and jumps into a clean sequence, reproducibly.
///
/// Dropout follows a two-state Markov chain per joint whose stationary
/// distribution hits `dropout_rate` exactly at every frame, with mean burst
/// length `burst_length`. Jumps displace a surviving joint by a random
/// direction scaled by `jump_scale × U(0.5, 1.5)`. The RNG stream is derived
/// from `(rng_seed, sequence_id)`, so different sequences corrupt differently
/// and repeated runs are byte-identical.
pub fn corrupt_sequence(
    seq: &WorldSkeletonSequence,
    cfg: &CorruptionConfig,
) -> Result<(WorldSkeletonSequence, CorruptionMask)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(stable_hash(&[
        &cfg.rng_seed.to_le_bytes(),
        seq.sequence_id.as_bytes(),
    ]));
    let n = seq.len();
    let mut frames: Vec<FramePoints> = (0..n)
        .map(|t| {
            let mut frame: FramePoints = [None; JOINT_COUNT];
            for joint in JointId::ALL {
                frame[joint as usize] = seq.point(joint, t);
            }
            frame
        })
        .collect();
    let mut mask = CorruptionMask::default();

    let p = cfg.dropout_rate;
    let (stay_bad, enter_bad) = if p >= 1.0 {
        (1.0, 1.0)
    } else {
        (1.0 - 1.0 / cfg.burst_length, p / (cfg.burst_length * (1.0 - p)))
    };

    for joint in JointId::ALL {
        // Dropout chain, started from its stationary distribution.
        let mut bad = rng.random_bool(p);
        for (t, frame) in frames.iter_mut().enumerate() {
            if t > 0 {
                let flip = if bad { stay_bad } else { enter_bad };
                bad = rng.random_bool(flip);
            }
            if bad && frame[joint as usize].is_some() {
                frame[joint as usize] = None;
                for axis in crate::skeleton::Axis::ALL {
                    mask.entries.push(MaskEntry {
                        frame: t,
                        joint,
                        axis,
                        kind: CorruptionKind::Dropout,
                    });
                }
            }
        }
        // Independent jumps on surviving frames.
        for t in 0..n {
            if !rng.random_bool(cfg.jump_rate) {
                continue;
            }
            if let Some(point) = frames[t][joint as usize] {
                let dir = unit_vector(&mut rng);
                let magnitude = cfg.jump_scale * rng.random_range(0.5..=1.5);
                frames[t][joint as usize] = Some([
                    point[0] + dir[0] * magnitude,
                    point[1] + dir[1] * magnitude,
                    point[2] + dir[2] * magnitude,
                ]);
                for axis in crate::skeleton::Axis::ALL {
                    mask.entries.push(MaskEntry {
                        frame: t,
                        joint,
                        axis,
                        kind: CorruptionKind::Jump,
                    });
                }
            }
        }
    }

    let corrupted = WorldSkeletonSequence::new(
        seq.subject_label.clone(),
        seq.walk_type.clone(),
        seq.sequence_id.clone(),
        tracks_from_frames(&frames),
    )?;
    Ok((corrupted, mask))
}

/// Convert a world sequence back into raw sensor measurements (pixel
/// coordinates plus range) under `camera` — the generator's output format for
/// pipeline input files. Missing joints stay missing.
pub fn to_raw_sequence(seq: &WorldSkeletonSequence, camera: &CameraParams) -> Result<RawSequence> {
    crate::projection::validate_camera(camera)?;
    let mut frames = Vec::with_capacity(seq.len());
    for t in 0..seq.len() {
        let mut frame = RawSkeletonFrame::empty(t as u64);
        for joint in JointId::ALL {
            if let Some([x, y, z]) = seq.point(joint, t) {
                if z <= 0.0 {
                    return Err(Error::Validation(format!(
                        "sequence {}: joint {} has nonpositive range at frame {t}",
                        seq.sequence_id,
                        joint.name()
                    )));
                }
                frame.joints[joint as usize] = Some(JointMeasurement {
                    x_px: crate::projection::unproject_joint(
                        x,
                        camera.n_pixels_x,
                        camera.aov_x_deg,
                        z,
                        camera.pixel_origin,
                    ),
                    y_px: crate::projection::unproject_joint(
                        y,
                        camera.n_pixels_y,
                        camera.aov_y_deg,
                        z,
                        camera.pixel_origin,
                    ),
                    range_m: z,
                });
            }
        }
        frames.push(frame);
    }
    Ok(RawSequence {
        subject_label: seq.subject_label.clone(),
        walk_type: seq.walk_type.clone(),
        sequence_id: seq.sequence_id.clone(),
        frames,
        warnings: Vec::new(),
    })
}

/// A deterministic roster of demo subjects.
///
/// Subjects come in pairs sharing identical limb lengths and swing amplitudes
/// but different cadences — so single-frame poses barely separate a pair
/// while cycle-length windows do, which is the contrast the evaluation
/// demonstrates. `seed` jitters the pair geometries.
pub fn demo_profiles(count: usize, seed: u64) -> Vec<SubjectProfile> {
    let base: [(&str, f64); 12] = [
        ("neck_r_shoulder", 0.19),
        ("neck_l_shoulder", 0.19),
        ("neck_r_hip", 0.52),
        ("neck_l_hip", 0.52),
        ("r_shoulder_r_elbow", 0.28),
        ("l_shoulder_l_elbow", 0.28),
        ("r_hip_r_knee", 0.42),
        ("l_hip_l_knee", 0.42),
        ("r_elbow_r_wrist", 0.26),
        ("l_elbow_l_wrist", 0.26),
        ("r_knee_r_ankle", 0.40),
        ("l_knee_l_ankle", 0.40),
    ];
    let mut profiles = Vec::with_capacity(count);
    // Twins sit half the roster apart (1 with 4, 2 with 5, …) so the two
    // cadences inside a pair differ by a wide margin: a cycle-length feature
    // window then separates the pair clearly even though single frames can't.
    let half = count.div_ceil(2);
    for i in 0..count {
        let pair = i % half;
        let mut rng = ChaCha8Rng::seed_from_u64(stable_hash(&[
            &seed.to_le_bytes(),
            &(pair as u64).to_le_bytes(),
        ]));
        // Pair-level geometry: both twins draw from the same stream.
        let scale = 0.88 + 0.06 * (pair % 5) as f64 + rng.random_range(-0.02..0.02);
        let limb_lengths: BTreeMap<String, f64> = base
            .iter()
            .map(|(name, len)| ((*name).to_owned(), len * scale))
            .collect();
        let hip_swing = 0.5 + rng.random_range(-0.05..0.05);
        let knee_swing = 0.55 + rng.random_range(-0.05..0.05);
        let shoulder_swing = 0.35 + rng.random_range(-0.05..0.05);
        let elbow_swing = 0.45 + rng.random_range(-0.05..0.05);
        let bounce = 0.03 + rng.random_range(-0.005..0.005);
        // Twin-level dynamics: only the cadence separates a pair, and every
        // subject's cadence is unique so nobody else shares their tempo.
        let cadence = 16 + 4 * i;
        profiles.push(SubjectProfile {
            label: format!("s{:02}", i + 1),
            limb_lengths,
            cadence_frames: cadence,
            stride_m: 0.03 * cadence as f64,
            hip_swing_rad: hip_swing,
            knee_swing_rad: knee_swing,
            shoulder_swing_rad: shoulder_swing,
            elbow_swing_rad: elbow_swing,
            leg_phase_rad: 0.0,
            arm_phase_rad: 0.0,
            bounce_m: bounce,
        });
    }
    profiles
}

/// A complete clean demo dataset: the [`demo_profiles`] roster recorded
/// `per_subject` times each, cycling through the three walk types.
///
/// Every sequence starts at its own random gait phase, as independent
/// recordings of a walker would — without this, same-cadence sequences would
/// sample the identical discrete pose grid and single frames would match
/// across sequences exactly. Sequence ids are `"{label}_{walk}_{index:02}"`.
pub fn demo_dataset(
    subjects: usize,
    per_subject: usize,
    n_frames: usize,
    seed: u64,
) -> Result<Vec<WorldSkeletonSequence>> {
    roster_dataset(&demo_profiles(subjects, seed), per_subject, n_frames, seed)
}

/// Generate `per_subject` sequences for each profile in a custom roster,
/// cycling the walk types and drawing a fresh leg phase per sequence (seeded
/// from `seed` and the sequence id, so the build is reproducible).
pub fn roster_dataset(
    profiles: &[SubjectProfile],
    per_subject: usize,
    n_frames: usize,
    seed: u64,
) -> Result<Vec<WorldSkeletonSequence>> {
    let mut sequences = Vec::with_capacity(profiles.len() * per_subject);
    for profile in profiles {
        for j in 0..per_subject {
            let walk = WalkType::ALL[j % WalkType::ALL.len()];
            let sequence_id = format!("{}_{}_{j:02}", profile.label, walk.name());
            let mut rng = ChaCha8Rng::seed_from_u64(stable_hash(&[
                &seed.to_le_bytes(),
                sequence_id.as_bytes(),
            ]));
            let mut profile = profile.clone();
            profile.leg_phase_rad = rng.random_range(0.0..std::f64::consts::TAU);
            sequences.push(generate_sequence(&profile, n_frames, walk, &sequence_id)?);
        }
    }
    Ok(sequences)
}
