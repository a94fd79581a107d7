//! Recovers the per-frame interferometric phase from the calibration slots
//! and compares the estimate with the simulated drift for several pilot
//! amplitudes.

use cvqkd::angle::{circular_std, wrap, wrapped_differences};
use cvqkd::receiver::remap_frames;
use cvqkd::{ChannelModel, FrameSimulator, ProtocolParams};

fn main() -> cvqkd::Result<()> {
    let n = 10_000;
    for alpha_cal in [2.0, 10.0, 100.0] {
        let p = ProtocolParams {
            alpha_cal,
            ..ProtocolParams::default()
        };
        let sim = FrameSimulator::new(p, ChannelModel::back_to_back(), 41)?;
        let truth = sim.frame_phases(n);
        let frames = remap_frames(&sim.frames(n)?, &p)?;
        let est: Vec<f64> = frames.iter().map(|f| f.phi_hat).collect();
        // the estimate is the apparent rotation, opposite to the drift
        let err: Vec<f64> = est.iter().zip(&truth).map(|(e, t)| wrap(e + t)).collect();
        println!(
            "alpha_cal {alpha_cal:>5}: drift {:.2} deg/frame, estimator error {:.3} deg",
            circular_std(&wrapped_differences(&est)).to_degrees(),
            circular_std(&err).to_degrees()
        );
    }
    Ok(())
}
