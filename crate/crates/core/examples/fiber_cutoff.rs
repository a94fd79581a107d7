//! Sweeps the signal amplitude over 2 km of fiber and reports the largest
//! amplitude at which the witness still fires, for a few excess-noise levels.

use cvqkd::io::{ChannelOverrides, Preset, RunConfig};
use cvqkd::pipeline::run_witness;
use cvqkd::ProtocolParams;

fn main() -> cvqkd::Result<()> {
    let grid = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
    for excess in [0.0, 0.06, 0.12] {
        let mut cutoff = None;
        for &alpha in &grid {
            let cfg = RunConfig {
                preset: Preset::Fiber2km,
                params: ProtocolParams::with_alpha(alpha),
                channel: ChannelOverrides {
                    excess_noise: Some(excess),
                    ..ChannelOverrides::default()
                },
                n_frames: 30_000,
                snl_pulses: 200_000,
                ..RunConfig::default()
            };
            if run_witness(&cfg)?.verdict.entangled {
                cutoff = Some(alpha);
            }
        }
        match cutoff {
            Some(a) => println!("excess {excess:.2}: entangled up to alpha {a:.1}"),
            None => println!("excess {excess:.2}: no certified amplitude"),
        }
    }
    Ok(())
}
