//! Shared fixtures for the benchmarks.

use journex_core::synth::{generate, SynthConfig, SynthCorpus};
use journex_core::Spectrum;

pub fn corpus(articles: usize) -> SynthCorpus {
    generate(&SynthConfig {
        articles,
        ..SynthConfig::default()
    })
}

/// Roughly Zipfian spectrum with `distinct` observed counts.
pub fn zipf_spectrum(distinct: u64) -> Spectrum {
    let pairs = (1..=distinct).map(|r| (r * r, (100_000 / (r * r)).max(1)));
    Spectrum::from_pairs(pairs, 10_000_000)
}
