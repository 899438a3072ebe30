//! Pixel/range to world-coordinate conversion.
//!
//! A joint seen at pixel offset `lp` on an axis with `n_pixels` pixels and
//! angle of view `aov` projects to a world length
//!
//! ```text
//! L = (2 / n_pixels) · tan(aov / 2) · lp' · range
//! ```
//!
//! where `lp'` is the pixel offset from the optical axis. With
//! [`PixelOrigin::Center`] (the default) `lp' = lp − n_pixels / 2`, so world
//! coordinates are signed and the optical axis maps to zero; with
//! [`PixelOrigin::Corner`] the raw pixel value is used and coordinates stay
//! nonnegative. The range axis passes through unchanged: `z = range`.
//!
//! World axes follow the image: x right, y down, z away from the sensor.

use crate::error::{Error, Result};
use crate::skeleton::{
    tracks_from_frames, CameraParams, FramePoints, PixelOrigin, RawSequence, RawSkeletonFrame,
    WorldSkeletonSequence,
};

/// Check camera parameters once at configuration time.
pub fn validate_camera(cam: &CameraParams) -> Result<()> {
    if cam.n_pixels_x < 1 || cam.n_pixels_y < 1 {
        return Err(Error::Validation(format!(
            "camera needs at least one pixel per axis (got {}×{})",
            cam.n_pixels_x, cam.n_pixels_y
        )));
    }
    for (axis, aov) in [("x", cam.aov_x_deg), ("y", cam.aov_y_deg)] {
        if !(aov > 0.0 && aov < 180.0) {
            return Err(Error::Validation(format!(
                "angle of view on {axis} must lie in (0, 180) degrees, got {aov}"
            )));
        }
    }
    Ok(())
}

/// Meters per (pixel · meter of range) for one image axis.
fn axis_scale(n_pixels: u32, aov_deg: f64) -> f64 {
    (2.0 / n_pixels as f64) * (aov_deg.to_radians() / 2.0).tan()
}

/// Project one pixel coordinate to a world length in meters.
///
/// `n_pixels ≥ 1`, `aov_deg ∈ (0, 180)`, and `range_m > 0` are contract
/// preconditions (validated at configuration time by [`validate_camera`]).
pub fn project_joint(
    lp: f64,
    n_pixels: u32,
    aov_deg: f64,
    range_m: f64,
    origin: PixelOrigin,
) -> f64 {
    debug_assert!(n_pixels >= 1 && aov_deg > 0.0 && aov_deg < 180.0 && range_m > 0.0);
    let centered = match origin {
        PixelOrigin::Center => lp - n_pixels as f64 / 2.0,
        PixelOrigin::Corner => lp,
    };
    axis_scale(n_pixels, aov_deg) * centered * range_m
}

/// Inverse of [`project_joint`]: world length back to a pixel coordinate.
pub fn unproject_joint(
    world: f64,
    n_pixels: u32,
    aov_deg: f64,
    range_m: f64,
    origin: PixelOrigin,
) -> f64 {
    debug_assert!(range_m > 0.0);
    let centered = world / (axis_scale(n_pixels, aov_deg) * range_m);
    match origin {
        PixelOrigin::Center => centered + n_pixels as f64 / 2.0,
        PixelOrigin::Corner => centered,
    }
}

/// Project every joint of a frame; missing joints stay missing.
pub fn project_frame(frame: &RawSkeletonFrame, cam: &CameraParams) -> FramePoints {
    let mut points: FramePoints = Default::default();
    for (slot, joint) in points.iter_mut().zip(&frame.joints) {
        *slot = joint.map(|m| {
            [
                project_joint(m.x_px, cam.n_pixels_x, cam.aov_x_deg, m.range_m, cam.pixel_origin),
                project_joint(m.y_px, cam.n_pixels_y, cam.aov_y_deg, m.range_m, cam.pixel_origin),
                m.range_m,
            ]
        });
    }
    points
}

/// Project a whole raw sequence into 42 world-coordinate tracks.
pub fn project_sequence(seq: &RawSequence, cam: &CameraParams) -> Result<WorldSkeletonSequence> {
    validate_camera(cam)?;
    let points: Vec<FramePoints> = seq.frames.iter().map(|f| project_frame(f, cam)).collect();
    WorldSkeletonSequence::new(
        seq.subject_label.clone(),
        seq.walk_type.clone(),
        seq.sequence_id.clone(),
        tracks_from_frames(&points),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton::{JointId, JointMeasurement};
    use proptest::prelude::*;

    #[test]
    fn worked_example_64_offset_pixels_at_10m() {
        // (2/128) · tan(45°) · 64 · 10 = 10 m, both origin conventions.
        let corner = project_joint(64.0, 128, 90.0, 10.0, PixelOrigin::Corner);
        assert!((corner - 10.0).abs() < 1e-12, "corner: {corner}");
        let center = project_joint(128.0, 128, 90.0, 10.0, PixelOrigin::Center);
        assert!((center - 10.0).abs() < 1e-12, "center: {center}");
    }

    #[test]
    fn optical_axis_maps_to_zero() {
        assert_eq!(project_joint(64.0, 128, 90.0, 5.0, PixelOrigin::Center), 0.0);
    }

    #[test]
    fn mirrored_pixels_negate() {
        let left = project_joint(32.0, 128, 90.0, 5.0, PixelOrigin::Center);
        let right = project_joint(96.0, 128, 90.0, 5.0, PixelOrigin::Center);
        assert_eq!(left, -right);
        assert!(left < 0.0);
    }

    #[test]
    fn frame_projection_keeps_missing_joints_missing() {
        let frame = RawSkeletonFrame::empty(0);
        let cam = CameraParams::default();
        assert!(project_frame(&frame, &cam).iter().all(|p| p.is_none()));
    }

    #[test]
    fn center_pixel_with_range_5_lands_on_axis() {
        let mut frame = RawSkeletonFrame::empty(0);
        frame.joints[JointId::Neck as usize] = Some(JointMeasurement {
            x_px: 64.0,
            y_px: 64.0,
            range_m: 5.0,
        });
        let cam = CameraParams {
            aov_x_deg: 90.0,
            aov_y_deg: 90.0,
            ..CameraParams::default()
        };
        let points = project_frame(&frame, &cam);
        assert_eq!(points[JointId::Neck as usize], Some([0.0, 0.0, 5.0]));
    }

    #[test]
    fn unproject_inverts_project() {
        for &(lp, n, aov, r) in &[
            (3.25f64, 128u32, 45.0f64, 7.5f64),
            (90.0, 64, 60.0, 2.0),
            (0.5, 256, 100.0, 12.0),
        ] {
            for origin in [PixelOrigin::Center, PixelOrigin::Corner] {
                let world = project_joint(lp, n, aov, r, origin);
                let back = unproject_joint(world, n, aov, r, origin);
                assert!((back - lp).abs() < 1e-9, "{back} vs {lp}");
            }
        }
    }

    #[test]
    fn rejects_degenerate_camera() {
        let cam = CameraParams {
            aov_x_deg: 180.0,
            ..CameraParams::default()
        };
        assert!(validate_camera(&cam).is_err());
        let cam = CameraParams {
            n_pixels_y: 0,
            ..CameraParams::default()
        };
        assert!(validate_camera(&cam).is_err());
    }

    proptest! {
        // Output is linear in the centered pixel offset.
        #[test]
        fn linear_in_pixel_offset(
            lp in -200.0f64..200.0,
            a in -8.0f64..8.0,
            n in 16u32..512,
            aov in 10.0f64..170.0,
            r in 0.5f64..20.0,
        ) {
            let one = project_joint(lp, n, aov, r, PixelOrigin::Corner);
            let scaled = project_joint(a * lp, n, aov, r, PixelOrigin::Corner);
            let expect = a * one;
            prop_assert!((scaled - expect).abs() <= 1e-12 * expect.abs().max(1.0));
        }

        // |world| grows strictly with range for off-axis pixels.
        #[test]
        fn monotone_in_range(
            lp in 1.0f64..200.0,
            n in 16u32..512,
            aov in 10.0f64..170.0,
            r in 0.5f64..20.0,
            bump in 0.01f64..5.0,
        ) {
            let near = project_joint(lp, n, aov, r, PixelOrigin::Corner).abs();
            let far = project_joint(lp, n, aov, r + bump, PixelOrigin::Corner).abs();
            prop_assert!(far > near);
        }
    }
}
