#![allow(dead_code)]

use jsdm::angular::{AngularInterval, AngularSet};
use rand::Rng;

/// Random union of up to `max_pieces` intervals, some of them wrapping.
pub fn random_set<R: Rng>(rng: &mut R, max_pieces: usize) -> AngularSet {
    let n = rng.random_range(0..=max_pieces);
    AngularSet::from_intervals((0..n).filter_map(|_| {
        let lo = rng.random_range(-0.5..0.5);
        let w = rng.random_range(0.001..0.4);
        AngularInterval::new(lo, lo + w).ok()
    }))
}

/// Measure of the symmetric difference, zero when the sets agree.
pub fn distance(a: &AngularSet, b: &AngularSet) -> f64 {
    a.difference(b).measure() + b.difference(a).measure()
}
