//! Additive white Gaussian noise.

use num_complex::Complex32;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::IqRecording;
use crate::error::{Error, Result};

/// SNR sentinel meaning "leave the recording untouched".
pub const NO_NOISE: f64 = f64::INFINITY;

/// Mean power of the samples that carry signal. Synthetic silence is exactly
/// zero, so these are the burst regions; idle gaps do not dilute the reference.
pub fn burst_region_power(rec: &IqRecording) -> Option<f64> {
    let (sum, count) = rec
        .samples()
        .iter()
        .map(|s| s.norm_sqr() as f64)
        .filter(|&p| p > 0.0)
        .fold((0.0, 0usize), |(sum, n), p| (sum + p, n + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Adds circular complex Gaussian noise so that burst-region power over noise
/// power equals `snr_db`. `snr_db = +inf` returns an identical copy.
pub fn add_awgn(rec: &IqRecording, snr_db: f64, seed: u64) -> Result<IqRecording> {
    if rec.is_empty() {
        return Err(Error::Empty("recording"));
    }
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::InvalidInput(format!(
            "SNR must be a real number, got {snr_db}"
        )));
    }
    if snr_db == NO_NOISE {
        return Ok(rec.clone());
    }
    let signal_power = burst_region_power(rec).ok_or(Error::NoSignalPower)?;
    let noise_power = signal_power / 10f64.powf(snr_db / 10.0);
    let sigma = (noise_power / 2.0).sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<Complex32> = rec
        .samples()
        .iter()
        .map(|s| {
            let i: f64 = StandardNormal.sample(&mut rng);
            let q: f64 = StandardNormal.sample(&mut rng);
            Complex32::new(
                (s.re as f64 + sigma * i) as f32,
                (s.im as f64 + sigma * q) as f32,
            )
        })
        .collect();

    let mut meta = rec.meta().clone();
    meta.insert("snr_db".into(), snr_db.to_string());
    meta.insert("noise_seed".into(), seed.to_string());
    Ok(IqRecording::from_parts(samples, rec.sample_rate_hz(), meta))
}
