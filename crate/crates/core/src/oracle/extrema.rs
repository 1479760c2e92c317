//! Local extrema of sampled slices with parabolic sub-grid refinement.

use serde::{Deserialize, Serialize};

use super::solver::FieldSlice;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtremumKind {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub x: f64,
    pub q: f64,
    pub kind: ExtremumKind,
}

/// Extrema in increasing `x`, alternating in kind.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExtremaList {
    pub entries: Vec<Extremum>,
}

impl ExtremaList {
    pub fn maxima(&self) -> impl Iterator<Item = &Extremum> {
        self.entries.iter().filter(|e| e.kind == ExtremumKind::Max)
    }

    pub fn minima(&self) -> impl Iterator<Item = &Extremum> {
        self.entries.iter().filter(|e| e.kind == ExtremumKind::Min)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn refine(x: f64, dx: f64, left: f64, mid: f64, right: f64) -> (f64, f64) {
    let curv = left - 2.0 * mid + right;
    if curv == 0.0 {
        return (x, mid);
    }
    let offset = (0.5 * (left - right) / curv).clamp(-0.5, 0.5);
    (x + offset * dx, mid - 0.25 * (left - right) * offset)
}

fn more_extreme(a: &Extremum, b: &Extremum) -> bool {
    match a.kind {
        ExtremumKind::Max => a.q >= b.q,
        ExtremumKind::Min => a.q <= b.q,
    }
}

/// Interior extrema of `slice` with `x` in `window`. Oscillations smaller
/// than `noise_floor` are dropped and the result is made alternating by
/// keeping the more extreme of any two neighbours of the same kind.
pub fn extract_extrema(slice: &FieldSlice, window: (f64, f64), noise_floor: f64) -> Result<ExtremaList> {
    slice.validate()?;
    let (lo, hi) = window;
    if !(hi > lo) {
        return Err(Error::domain(format!("empty window ({lo}, {hi})")));
    }
    let first = slice.x.partition_point(|&x| x < lo);
    let last = slice.x.partition_point(|&x| x <= hi);
    if last < first + 3 {
        return Err(Error::domain(format!("window ({lo}, {hi}) holds fewer than 3 samples")));
    }
    let dx = slice.dx();
    let q = &slice.q;
    let mut raw: Vec<Extremum> = Vec::new();
    for i in (first + 1)..(last - 1) {
        let (l, m, r) = (q[i - 1], q[i], q[i + 1]);
        let kind = if m > l && m >= r {
            ExtremumKind::Max
        } else if m < l && m <= r {
            ExtremumKind::Min
        } else {
            continue;
        };
        let (x, v) = refine(slice.x[i], dx, l, m, r);
        raw.push(Extremum { x, q: v, kind });
    }

    // Drop adjacent pairs whose swing is below the floor, then merge runs of
    // equal kind.
    let mut out: Vec<Extremum> = Vec::with_capacity(raw.len());
    for e in raw {
        if let Some(prev) = out.last() {
            if prev.kind == e.kind {
                if more_extreme(&e, prev) {
                    out.pop();
                    out.push(e);
                }
                continue;
            }
            if (prev.q - e.q).abs() < noise_floor {
                out.pop();
                continue;
            }
        }
        out.push(e);
    }
    Ok(ExtremaList { entries: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn slice_of(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> FieldSlice {
        let dx = (hi - lo) / (n - 1) as f64;
        let x: Vec<f64> = (0..n).map(|i| lo + dx * i as f64).collect();
        let q = x.iter().map(|&v| f(v)).collect();
        FieldSlice { t: 1.0, x, q }
    }

    #[test]
    fn cosine_extrema_at_analytic_positions() {
        let s = slice_of(|x| (2.0 * x + 0.3).cos(), -10.0, 10.0, 2001);
        let dx = s.dx();
        let list = extract_extrema(&s, (-9.0, 9.0), 1e-6).unwrap();
        assert!(list.len() > 8);
        for e in &list.entries {
            let phase = 2.0 * e.x + 0.3;
            let turns = phase / PI;
            assert!((turns - turns.round()).abs() * PI / 2.0 <= dx * dx, "x={}", e.x);
            let expected = if turns.round() as i64 % 2 == 0 { ExtremumKind::Max } else { ExtremumKind::Min };
            assert_eq!(e.kind, expected);
            assert!((e.q.abs() - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn monotone_slice_is_empty() {
        let s = slice_of(|x| x.tanh(), -5.0, 5.0, 101);
        assert!(extract_extrema(&s, (-5.0, 5.0), 1e-6).unwrap().is_empty());
    }

    #[test]
    fn tiny_window_rejected() {
        let s = slice_of(|x| x.sin(), 0.0, 1.0, 11);
        assert!(extract_extrema(&s, (0.0, 0.15), 1e-6).is_err());
        assert!(extract_extrema(&s, (0.5, 0.2), 1e-6).is_err());
    }

    #[test]
    fn noise_below_floor_removed() {
        let s = slice_of(|x| 1e-8 * (40.0 * x).sin() + (x - 2.0).powi(2), 0.0, 4.0, 4001);
        let list = extract_extrema(&s, (0.0, 4.0), 1e-6).unwrap();
        assert_eq!(list.len(), 1);
        assert_eq!(list.entries[0].kind, ExtremumKind::Min);
        assert!((list.entries[0].x - 2.0).abs() < 1e-3);
    }

    proptest::proptest! {
        #[test]
        fn always_alternating(values in proptest::collection::vec(-1.0f64..1.0, 3..200)) {
            let n = values.len();
            let s = FieldSlice { t: 0.0, x: (0..n).map(|i| i as f64).collect(), q: values };
            let list = extract_extrema(&s, (0.0, n as f64), 1e-6).unwrap();
            for w in list.entries.windows(2) {
                proptest::prop_assert!(w[0].kind != w[1].kind);
                proptest::prop_assert!(w[0].x < w[1].x);
            }
        }
    }
}
