//! Synthetic corpus generator.
//!
//! Each subject gets smooth latent arousal/valence trajectories; every
//! feature modality is a fixed random linear map of the latents plus a
//! subject-specific constant offset and Gaussian noise; labels are the
//! latents themselves. A raw 1000 Hz ECG trace is rendered whose
//! instantaneous heart rate is an affine function of the arousal latent,
//! with beats drawn as stereotyped QRS-like pulses, so the R-peak detector
//! and HRV pipeline can be validated against known ground truth.
//!
//! Generation is a pure function of `(spec, seed)`: all randomness flows
//! from one [`SplitMix64`] root that is split per modality map and per
//! subject in a fixed order.

use super::{AlignedSample, Dimension, FeatureSequence, LabelSequence, Role, SeqError};
use crate::ecg::RawSignal;
use crate::mat::Mat;
use crate::math;
use crate::rng::SplitMix64;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;

#[derive(Debug, Clone, PartialEq)]
pub struct ModalitySpec {
    pub name: String,
    pub dim: usize,
}

impl ModalitySpec {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        ModalitySpec {
            name: name.into(),
            dim,
        }
    }
}

/// Parameters of the synthetic corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub train_subjects: usize,
    pub dev_subjects: usize,
    pub test_subjects: usize,
    pub duration_secs: u32,
    pub modalities: Vec<ModalitySpec>,
    /// Std of the Gaussian noise added to features and, scaled, to signals.
    pub noise: f64,
    /// Magnitude of the per-subject constant feature offset.
    pub subject_offset: f64,
    /// Heart rate in bpm at arousal 0.
    pub heart_rate_base: f64,
    /// Heart-rate swing in bpm per unit of arousal.
    pub heart_rate_gain: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            train_subjects: 8,
            dev_subjects: 3,
            test_subjects: 3,
            duration_secs: 300,
            modalities: alloc::vec![
                ModalitySpec::new("audio", 8),
                ModalitySpec::new("video", 6),
            ],
            noise: 0.1,
            subject_offset: 0.0,
            heart_rate_base: 75.0,
            heart_rate_gain: 20.0,
        }
    }
}

impl SynthSpec {
    pub fn steps(&self) -> usize {
        self.duration_secs as usize * 2
    }

    fn validate(&self) -> Result<(), SeqError> {
        let invalid = |detail: &str| SeqError::InvalidSpec {
            detail: detail.into(),
        };
        if self.train_subjects + self.dev_subjects + self.test_subjects == 0 {
            return Err(invalid("no subjects"));
        }
        if self.duration_secs < 2 {
            return Err(invalid("duration must be at least 2 s"));
        }
        if self.modalities.is_empty() {
            return Err(invalid("no modalities"));
        }
        if self.modalities.iter().any(|m| m.dim == 0) {
            return Err(invalid("modality with zero width"));
        }
        let non_negative = |x: f64| x.is_finite() && x >= 0.0;
        if !non_negative(self.noise) || !non_negative(self.subject_offset) {
            return Err(invalid("noise and subject offset must be non-negative"));
        }
        if self.heart_rate_base - math::abs(self.heart_rate_gain) < 30.0 {
            return Err(invalid("heart rate can drop below 30 bpm"));
        }
        Ok(())
    }
}

/// One generated subject: the fusion-ready sample plus the raw signals and
/// the true beat positions (ground truth for detector tests).
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSubject {
    pub sample: AlignedSample,
    pub ecg_raw: RawSignal,
    pub ecg_2hz: RawSignal,
    pub resp: RawSignal,
    pub bpm: RawSignal,
    pub beat_times_ms: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub subjects: Vec<SynthSubject>,
}

impl SynthCorpus {
    pub fn samples_with_role(&self, role: Role) -> Vec<&AlignedSample> {
        self.subjects
            .iter()
            .map(|s| &s.sample)
            .filter(|s| s.role() == role)
            .collect()
    }

    pub fn subjects_with_role(&self, role: Role) -> Vec<&SynthSubject> {
        self.subjects
            .iter()
            .filter(|s| s.sample.role() == role)
            .collect()
    }
}

/// Renders a 1000 Hz ECG trace from a 2 Hz instantaneous-heart-rate series.
///
/// Beat times come from integrating the (linearly interpolated) heart rate;
/// each beat contributes a stereotyped QRS-like pulse. Returns the signal
/// and the true R positions in milliseconds.
pub fn render_ecg(
    hr_bpm_2hz: &[f64],
    noise_sigma: f64,
    rng: &mut SplitMix64,
) -> (RawSignal, Vec<i64>) {
    let n_ms = hr_bpm_2hz.len() * 500;
    let hr_at = |t_ms: usize| -> f64 {
        let pos = t_ms as f64 / 500.0;
        let i = pos as usize;
        if i + 1 >= hr_bpm_2hz.len() {
            hr_bpm_2hz[hr_bpm_2hz.len() - 1]
        } else {
            let frac = pos - i as f64;
            hr_bpm_2hz[i] * (1.0 - frac) + hr_bpm_2hz[i + 1] * frac
        }
    };

    let mut beats = Vec::new();
    let mut phase = 0.0_f64;
    for t in 0..n_ms {
        phase += hr_at(t) / 60_000.0;
        if phase >= 1.0 {
            phase -= 1.0;
            beats.push(t);
        }
    }

    let mut samples = alloc::vec![0.0; n_ms];
    for &b in &beats {
        for dt in -60_i64..=60 {
            let idx = b as i64 + dt;
            if idx < 0 || idx >= n_ms as i64 {
                continue;
            }
            samples[idx as usize] += qrs_kernel(dt as f64);
        }
    }
    if noise_sigma > 0.0 {
        for s in samples.iter_mut() {
            *s += noise_sigma * rng.normal();
        }
    }
    let signal = RawSignal::new(samples, 1000.0, 0).expect("rendered signal is valid");
    (signal, beats.iter().map(|&b| b as i64).collect())
}

/// R spike with small Q and S lobes; `dt` in milliseconds from the R peak.
fn qrs_kernel(dt: f64) -> f64 {
    let g = |center: f64, width: f64| {
        let z = (dt - center) / width;
        math::exp(-z * z)
    };
    g(0.0, 10.0) - 0.15 * g(-30.0, 7.0) - 0.2 * g(30.0, 7.0)
}

/// Smooth trajectory in [-1, 1]: three random-phase sinusoids with periods
/// between 20 and 120 s plus an Ornstein–Uhlenbeck-style noise term.
fn smooth_latent(steps: usize, rng: &mut SplitMix64) -> Vec<f64> {
    const OU_THETA: f64 = 0.15;
    const OU_SIGMA: f64 = 0.12;
    const DT: f64 = 0.5;

    let comps: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.uniform(0.25, 0.5),
                rng.uniform(20.0, 120.0),
                rng.uniform(0.0, TAU),
            )
        })
        .collect();
    let mut ou = 0.0;
    (0..steps)
        .map(|t| {
            let secs = t as f64 * DT;
            let wave: f64 = comps
                .iter()
                .map(|(amp, period, phase)| amp * math::sin(TAU * secs / period + phase))
                .sum();
            let v = (wave + ou).clamp(-1.0, 1.0);
            ou = ou * (1.0 - OU_THETA * DT) + OU_SIGMA * math::sqrt(DT) * rng.normal();
            v
        })
        .collect()
}

/// Generates the full corpus. Deterministic given `(spec, seed)`.
pub fn generate_synthetic_corpus(spec: &SynthSpec, seed: u64) -> Result<SynthCorpus, SeqError> {
    spec.validate()?;
    let steps = spec.steps();
    let grid: Vec<i64> = (0..steps as i64).map(|i| i * super::GRID_STEP_MS).collect();
    let mut root = SplitMix64::new(seed);

    // Fixed random linear maps (latents -> features), shared across subjects.
    let mut map_rng = root.split();
    let maps: Vec<Mat> = spec
        .modalities
        .iter()
        .map(|m| {
            let mut map = Mat::zeros(m.dim, 2);
            for r in 0..m.dim {
                for c in 0..2 {
                    map.set(r, c, map_rng.normal() / math::sqrt(2.0));
                }
            }
            map
        })
        .collect();

    let roles = [
        (Role::Train, spec.train_subjects),
        (Role::Dev, spec.dev_subjects),
        (Role::Test, spec.test_subjects),
    ];
    let mut subjects = Vec::new();
    for (role, count) in roles {
        for k in 0..count {
            let subject_id = format!("{}_{:02}", role, k + 1);
            let mut rng = root.split();

            let arousal = smooth_latent(steps, &mut rng);
            let valence = smooth_latent(steps, &mut rng);

            let mut modalities = Vec::with_capacity(spec.modalities.len());
            for (m, map) in spec.modalities.iter().zip(&maps) {
                let offset: Vec<f64> = (0..m.dim)
                    .map(|_| spec.subject_offset * rng.normal())
                    .collect();
                let mut values = Mat::zeros(steps, m.dim);
                for t in 0..steps {
                    let row = values.row_mut(t);
                    for (d, o) in offset.iter().enumerate() {
                        let lin = map.get(d, 0) * arousal[t] + map.get(d, 1) * valence[t];
                        row[d] = lin + o + spec.noise * rng.normal();
                    }
                }
                modalities.push(
                    FeatureSequence::new(&subject_id, m.name.clone(), grid.clone(), values)
                        .expect("generated features are valid"),
                );
            }

            let hr: Vec<f64> = arousal
                .iter()
                .map(|a| spec.heart_rate_base + spec.heart_rate_gain * a)
                .collect();
            let (ecg_raw, beat_times_ms) = render_ecg(&hr, spec.noise, &mut rng);

            let ecg_2hz = RawSignal::new(
                (0..steps).map(|i| ecg_raw.samples()[i * 500]).collect(),
                2.0,
                0,
            )
            .expect("2 Hz ECG is valid");
            let resp_freq = rng.uniform(0.2, 0.35);
            let resp_phase = rng.uniform(0.0, TAU);
            let resp = RawSignal::new(
                (0..steps)
                    .map(|i| {
                        0.5 * math::sin(TAU * resp_freq * (i as f64 * 0.5) + resp_phase)
                            + 0.05 * spec.noise * rng.normal()
                    })
                    .collect(),
                2.0,
                0,
            )
            .expect("resp is valid");
            let bpm = RawSignal::new(hr.clone(), 2.0, 0).expect("bpm is valid");

            let labels = alloc::vec![
                LabelSequence::new(&subject_id, Dimension::Arousal, grid.clone(), arousal)
                    .expect("labels are valid"),
                LabelSequence::new(&subject_id, Dimension::Valence, grid.clone(), valence)
                    .expect("labels are valid"),
            ];
            let sample = AlignedSample::new(modalities, labels, role)
                .expect("generated sample is aligned");
            subjects.push(SynthSubject {
                sample,
                ecg_raw,
                ecg_2hz,
                resp,
                bpm,
                beat_times_ms,
            });
        }
    }
    Ok(SynthCorpus { subjects })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec() -> SynthSpec {
        SynthSpec {
            train_subjects: 2,
            dev_subjects: 1,
            test_subjects: 1,
            duration_secs: 30,
            ..SynthSpec::default()
        }
    }

    #[test]
    fn deterministic_given_spec_and_seed() {
        let spec = tiny_spec();
        let a = generate_synthetic_corpus(&spec, 7).unwrap();
        let b = generate_synthetic_corpus(&spec, 7).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic_corpus(&spec, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn shapes_and_roles() {
        let spec = tiny_spec();
        let corpus = generate_synthetic_corpus(&spec, 1).unwrap();
        assert_eq!(corpus.subjects.len(), 4);
        assert_eq!(corpus.samples_with_role(Role::Train).len(), 2);
        assert_eq!(corpus.samples_with_role(Role::Dev).len(), 1);
        assert_eq!(corpus.samples_with_role(Role::Test).len(), 1);
        let s = &corpus.subjects[0];
        assert_eq!(s.sample.len(), 60);
        assert_eq!(s.sample.total_dim(), 14);
        assert_eq!(s.ecg_raw.len(), 30_000);
        assert_eq!(s.ecg_2hz.len(), 60);
        assert!(s.sample.label(Dimension::Arousal).is_some());
        assert!(s.sample.label(Dimension::Valence).is_some());
    }

    #[test]
    fn labels_stay_in_unit_range() {
        let corpus = generate_synthetic_corpus(&tiny_spec(), 3).unwrap();
        for s in &corpus.subjects {
            for d in Dimension::ALL {
                for v in s.sample.label(d).unwrap().values() {
                    assert!((-1.0..=1.0).contains(v));
                }
            }
        }
    }

    #[test]
    fn high_arousal_means_shorter_rr_intervals() {
        let mut rng = SplitMix64::new(5);
        let (_, beats_high) = render_ecg(&alloc::vec![75.0 + 16.0; 60], 0.0, &mut rng);
        let (_, beats_low) = render_ecg(&alloc::vec![75.0 - 16.0; 60], 0.0, &mut rng);
        let mean_rr = |beats: &[i64]| {
            beats
                .windows(2)
                .map(|w| (w[1] - w[0]) as f64)
                .sum::<f64>()
                / (beats.len() - 1) as f64
        };
        assert!(mean_rr(&beats_high) < mean_rr(&beats_low));
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = tiny_spec();
        spec.modalities.clear();
        assert!(matches!(
            generate_synthetic_corpus(&spec, 0),
            Err(SeqError::InvalidSpec { .. })
        ));
        let spec = SynthSpec {
            duration_secs: 1,
            ..tiny_spec()
        };
        assert!(matches!(
            generate_synthetic_corpus(&spec, 0),
            Err(SeqError::InvalidSpec { .. })
        ));
    }
}
