mod common;

use common::{close, partitions, sgt_oracle, Spec};
use journex_core::ngram::{Position, SmoothingConfig};
use journex_core::{smooth_table, Bigram, FreqTable};
use proptest::prelude::*;

const STRICT: SmoothingConfig = SmoothingConfig {
    fallback_epsilon: None,
};

/// A table realising `spec`: `N_r` distinct bigrams with count `r` each.
fn table_for(spec: &Spec, v: u64) -> (FreqTable, Vec<(Bigram, u64)>) {
    let mut t = FreqTable::new(Position::Left, v);
    let mut rows = Vec::new();
    let mut k = 0u32;
    for (&r, &n) in spec {
        for _ in 0..n {
            let a = char::from_u32(0x4E00 + k / 64).unwrap();
            let b = char::from_u32(0x4E00 + k % 64).unwrap();
            let bg = Bigram::new(a, b);
            t.add(bg, r);
            rows.push((bg, r));
            k += 1;
        }
    }
    (t, rows)
}

fn check(spec: &Spec, v: u64) -> Result<(), String> {
    let (table, rows) = table_for(spec, v);
    let n0 = (v * v).saturating_sub(rows.len() as u64).max(1);
    let got = smooth_table(&table, &STRICT);
    let Some(want) = sgt_oracle(spec, n0) else {
        return match got {
            Err(_) => Ok(()),
            Ok(_) => Err(format!("{spec:?}: expected an error without singletons")),
        };
    };
    let got = got.map_err(|e| format!("{spec:?}: {e}"))?;
    let mut mass = 0.0;
    for (bg, r) in &rows {
        let p = got.prob(bg);
        if !close(p, want.prob(*r), 1e-9) {
            return Err(format!("{spec:?} n0={n0} r={r}: {p} vs {}", want.prob(*r)));
        }
        mass += p;
    }
    let unseen = got.prob_unseen();
    if !close(unseen, want.prob(0), 1e-9) {
        return Err(format!(
            "{spec:?} n0={n0}: unseen {unseen} vs {}",
            want.prob(0)
        ));
    }
    mass += unseen * n0 as f64;
    if (mass - 1.0).abs() > 1e-9 {
        return Err(format!("{spec:?} n0={n0}: mass {mass}"));
    }
    Ok(())
}

#[test]
fn partition_count() {
    let total: usize = (1..=12).map(|n| partitions(n).len()).sum();
    assert_eq!(total, 271);
}

#[test]
fn exhaustive_small_spectra() {
    for n in 1..=12 {
        for spec in partitions(n) {
            for v in [4, 5, 17, 300] {
                check(&spec, v).unwrap();
            }
        }
    }
}

#[test]
fn reference_spectrum() {
    // A long singleton tail followed by a thin head.
    let spec: Spec = [(1, 1000), (2, 10), (3, 5), (4, 3)].into_iter().collect();
    let gt = sgt_oracle(&spec, 5000).unwrap();
    assert!((gt.by_count[&1] - 0.02).abs() < 1e-12);
    check(&spec, 100).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_spectra_match(
        pairs in proptest::collection::btree_map(1u64..60, 1u64..400, 1..14),
        v in 40u64..2000,
    ) {
        prop_assert!(check(&pairs, v).is_ok(), "{:?}", check(&pairs, v));
    }

    /// On gap-free spectra, every count before the switch point keeps its
    /// plain Turing estimate.
    #[test]
    fn turing_before_switch(ns in proptest::collection::vec(1u64..500, 2..10)) {
        let spec: Spec = ns.iter().enumerate().map(|(i, &n)| (i as u64 + 1, n)).collect();
        let gt = journex_core::sgt_smooth(&journex_core::Spectrum::from_pairs(spec.clone(), 1000)).unwrap();
        for (&r, &c) in &gt.estimates {
            if !matches!(gt.switched_at, Some(s) if r >= s) {
                let x = (r + 1) as f64 * spec.get(&(r + 1)).copied().unwrap_or(0) as f64 / spec[&r] as f64;
                prop_assert!((c - x).abs() < 1e-12);
            }
        }
    }
}
