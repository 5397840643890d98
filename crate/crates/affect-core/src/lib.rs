//! Core pipeline for continuous valence/arousal regression from multimodal
//! feature sequences.
//!
//! The crate is organised along the stages of the pipeline:
//!
//! ```text
//! raw ECG ──► ecg::extract_phys_sequence ──► 21-d physiological features ┐
//! per-modality feature CSVs ──► seqdata::align_and_label ──► AlignedSample
//!   │                                                            │
//!   └─ seqdata::fit_norm_stats / apply_norm (train-set z-score)  │
//!                                                                ▼
//!                nn::Model (linear fusion → GRU stack → regression head)
//!                trained with objective::ccc_loss (1 − CCC), Adam
//!                                                                │
//!        training::pretrain ► training::personalise (10-seed sweep)
//!                                                                ▼
//!                ensemble::ensemble_mean ► ensemble::evaluate_corpus
//! ```
//!
//! Everything is deterministic: model initialisation, batch shuffling, and
//! the synthetic corpus generator all draw from [`rng::SplitMix64`] streams,
//! so equal seeds reproduce results bit-for-bit.
//!
//! The crate is `no_std`-compatible (requires `alloc`); the default `std`
//! feature only switches float intrinsics and enables wall-clock timing in
//! training reports.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod ecg;
pub mod ensemble;
pub mod mat;
mod math;
pub mod nn;
pub mod objective;
pub mod rng;
pub mod seqdata;
pub mod training;

pub use seqdata::{AlignedSample, Dimension, FeatureSequence, LabelSequence, NormStats, Role};
