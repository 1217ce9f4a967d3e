//! Interval-set algebra on the spatial-frequency circle `[-1/2, 1/2)`.
//!
//! Every set is a finite union of half-open intervals. Internally a set is a
//! sorted list of non-wrapping pieces `[lo, hi)` with `-1/2 <= lo < hi <= 1/2`;
//! an interval that wraps through `+1/2 == -1/2` is held as two pieces, one
//! touching each end of the line. That representation is canonical: pieces
//! never overlap or abut (within [`MERGE_TOL`]) and slivers shorter than the
//! tolerance are dropped, so structurally equal sets have equal membership.

use std::fmt;

use crate::error::{Error, Result};

/// Endpoints closer than this are merged; pieces shorter than this vanish.
pub const MERGE_TOL: f64 = 1e-12;

const LEFT: f64 = -0.5;
const RIGHT: f64 = 0.5;

/// Reduce `x` modulo 1 into `[-1/2, 1/2)`.
pub fn wrap(x: f64) -> f64 {
    let y = x - (x + 0.5).floor();
    if y >= RIGHT {
        y - 1.0
    } else {
        y
    }
}

/// A single interval `[lo, hi)` on the circle. It wraps through `1/2` when
/// `hi < lo`; the full circle is `[-1/2, 1/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularInterval {
    lo: f64,
    hi: f64,
}

impl AngularInterval {
    /// Build `[lo, hi)` from arbitrary real endpoints, reducing both modulo 1.
    /// An interval of length one or more (in the unwrapped sense) is the full
    /// circle.
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::EmptyInterval { lo, hi });
        }
        if hi - lo >= 1.0 {
            return Ok(Self::full());
        }
        let l = wrap(lo);
        let mut h = wrap(hi);
        if (h - l).abs() < MERGE_TOL {
            return Err(Error::EmptyInterval { lo, hi });
        }
        if h == LEFT {
            h = RIGHT;
        }
        Ok(Self { lo: l, hi: h })
    }

    pub fn full() -> Self {
        Self { lo: LEFT, hi: RIGHT }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn wraps(&self) -> bool {
        self.hi < self.lo
    }

    pub fn measure(&self) -> f64 {
        if self.wraps() {
            (RIGHT - self.lo) + (self.hi - LEFT)
        } else {
            self.hi - self.lo
        }
    }

    pub fn contains(&self, f: f64) -> bool {
        let f = wrap(f);
        if self.wraps() {
            f >= self.lo || f < self.hi
        } else {
            f >= self.lo && f < self.hi
        }
    }

    fn pieces(&self) -> impl Iterator<Item = (f64, f64)> {
        let (a, b) = if self.wraps() {
            ((self.lo, RIGHT), Some((LEFT, self.hi)))
        } else {
            ((self.lo, self.hi), None)
        };
        std::iter::once(a).chain(b).filter(|(l, h)| h - l >= MERGE_TOL)
    }
}

/// Angular bin `i` of `bins`: width `1/bins`, centred at `i/bins - 1/2`.
pub fn bin(index: usize, bins: usize) -> Result<AngularInterval> {
    if index >= bins {
        return Err(Error::BinOutOfRange { index, bins });
    }
    let m = bins as f64;
    let centre = index as f64 / m - 0.5;
    AngularInterval::new(centre - 0.5 / m, centre + 0.5 / m)
}

/// Centre frequency of bin `index`, in `[-1/2, 1/2)`.
pub fn bin_centre(index: usize, bins: usize) -> f64 {
    index as f64 / bins as f64 - 0.5
}

/// Index of the bin containing spatial frequency `f`.
pub fn bin_index(f: f64, bins: usize) -> usize {
    let m = bins as f64;
    let i = ((wrap(f) + 0.5) * m + 0.5).floor() as i64;
    i.rem_euclid(bins as i64) as usize
}

/// Finite union of disjoint intervals in canonical form.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AngularSet {
    pieces: Vec<(f64, f64)>,
}

impl AngularSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full() -> Self {
        Self {
            pieces: vec![(LEFT, RIGHT)],
        }
    }

    pub fn from_interval(interval: AngularInterval) -> Self {
        Self::from_pieces(interval.pieces().collect())
    }

    pub fn from_intervals<I: IntoIterator<Item = AngularInterval>>(intervals: I) -> Self {
        Self::from_pieces(intervals.into_iter().flat_map(|i| i.pieces()).collect())
    }

    /// Convenience constructor from `(lo, hi)` pairs, each read as an
    /// [`AngularInterval`].
    pub fn from_bounds(bounds: &[(f64, f64)]) -> Result<Self> {
        let intervals = bounds
            .iter()
            .map(|&(lo, hi)| AngularInterval::new(lo, hi))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_intervals(intervals))
    }

    fn from_pieces(mut raw: Vec<(f64, f64)>) -> Self {
        raw.retain(|(l, h)| h - l >= MERGE_TOL);
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut pieces: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (l, h) in raw {
            let (l, h) = (l.clamp(LEFT, RIGHT), h.clamp(LEFT, RIGHT));
            match pieces.last_mut() {
                Some(last) if l <= last.1 + MERGE_TOL => last.1 = last.1.max(h),
                _ => pieces.push((l, h)),
            }
        }
        if let Some(first) = pieces.first_mut() {
            if first.0 - LEFT < MERGE_TOL {
                first.0 = LEFT;
            }
        }
        if let Some(last) = pieces.last_mut() {
            if RIGHT - last.1 < MERGE_TOL {
                last.1 = RIGHT;
            }
        }
        Self { pieces }
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Non-wrapping pieces, sorted.
    pub fn pieces(&self) -> &[(f64, f64)] {
        &self.pieces
    }

    /// The set as circle intervals, merging the two end pieces into one
    /// wrapped interval when they touch `-1/2` and `1/2` respectively.
    pub fn intervals(&self) -> Vec<AngularInterval> {
        let n = self.pieces.len();
        if n == 0 {
            return Vec::new();
        }
        let first = self.pieces[0];
        let last = self.pieces[n - 1];
        if n >= 2 && first.0 == LEFT && last.1 == RIGHT {
            let mut out = vec![AngularInterval {
                lo: last.0,
                hi: first.1,
            }];
            out.extend(
                self.pieces[1..n - 1]
                    .iter()
                    .map(|&(lo, hi)| AngularInterval { lo, hi }),
            );
            out
        } else {
            self.pieces
                .iter()
                .map(|&(lo, hi)| AngularInterval { lo, hi })
                .collect()
        }
    }

    pub fn measure(&self) -> f64 {
        self.pieces.iter().map(|(l, h)| h - l).sum::<f64>().min(1.0)
    }

    pub fn contains(&self, f: f64) -> bool {
        let f = wrap(f);
        // pieces are sorted by lo; find the last piece starting at or before f
        let idx = self.pieces.partition_point(|p| p.0 <= f);
        idx > 0 && f < self.pieces[idx - 1].1
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut raw = self.pieces.clone();
        raw.extend_from_slice(&other.pieces);
        Self::from_pieces(raw)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let (a, b) = (&self.pieces, &other.pieces);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            let lo = a[i].0.max(b[j].0);
            let hi = a[i].1.min(b[j].1);
            if hi > lo {
                out.push((lo, hi));
            }
            if a[i].1 < b[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::from_pieces(out)
    }

    pub fn complement(&self) -> Self {
        let mut out = Vec::with_capacity(self.pieces.len() + 1);
        let mut cursor = LEFT;
        for &(l, h) in &self.pieces {
            if l > cursor {
                out.push((cursor, l));
            }
            cursor = h;
        }
        if cursor < RIGHT {
            out.push((cursor, RIGHT));
        }
        Self::from_pieces(out)
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.intersect(&other.complement())
    }

    /// True iff `measure(self) < eps`. With `eps == 0` this is never true;
    /// use [`AngularSet::is_empty`] for structural emptiness.
    pub fn is_effectively_empty(&self, eps: f64) -> bool {
        self.measure() < eps
    }

    /// Rotate the whole set by `delta` around the circle.
    pub fn translate(&self, delta: f64) -> Self {
        let raw = self
            .pieces
            .iter()
            .flat_map(|&(l, h)| {
                let len = h - l;
                let lo = wrap(l + delta);
                let hi = lo + len;
                if hi > RIGHT {
                    vec![(lo, RIGHT), (LEFT, hi - 1.0)]
                } else {
                    vec![(lo, hi)]
                }
            })
            .collect();
        Self::from_pieces(raw)
    }
}

impl fmt::Display for AngularSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "{{}}");
        }
        let parts: Vec<String> = self
            .intervals()
            .iter()
            .map(|i| format!("[{:.6}, {:.6})", i.lo, i.hi))
            .collect();
        write!(f, "{}", parts.join(" u "))
    }
}
