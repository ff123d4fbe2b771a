//! Occupied-cell counts of graphs at b-adic resolution.
//!
//! The graph of a continuous function is a connected curve, so the occupied
//! cells are counted along a sampled polyline: every cell containing a
//! sample plus every cell the straight segment between consecutive samples
//! passes through (a d-dimensional grid supercover walk). For one vertical
//! dimension the bridge is exact by the intermediate value theorem; in
//! higher dimension it tracks the cell chain of the curve and converges as
//! the sampling density grows. Point-hit counting without bridging misses a
//! stable fraction of thin-visit cells at every level and cannot meet the
//! oversample-stability contract.
//!
//! The x-sequence is a deterministic stratified golden-ratio pattern, so
//! counts are reproducible bit for bit.

use rayon::prelude::*;
use weier_core::{Evaluator, KernelFunction, Params, TruncationBudget};

use crate::BoxdimError;

/// Fractional part of the golden ratio; the standard Weyl increment.
const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Hard cap on samples for a single level.
const MAX_SAMPLES: u64 = 150_000_000;
/// Hard cap on the estimated number of occupied cells.
const MAX_CELLS: u64 = 100_000_000;
/// Packed-key budget in bits.
const MAX_KEY_BITS: u32 = 62;

/// Number of x-samples used at level `n`: `oversample * b^n * ceil(b^(n theta))`
/// with the per-column exponent `theta = d (1 + log_b lambda)` clipped to
/// `[0, d]` — one stratum per occupied cell per column at `oversample = 1`.
pub fn sample_count(p: &Params, d: usize, n: u32, oversample: u32) -> u64 {
    let theta = (d as f64 * (1.0 + p.log_b_lambda())).clamp(0.0, d as f64);
    let per_col = p.b_f().powf(n as f64 * theta).ceil().max(1.0);
    let cols = p.b_f().powi(n as i32);
    (oversample as f64 * cols * per_col) as u64
}

/// Crossings closer than this along the segment parameter are treated as one
/// corner event; a genuine transit cell shorter than this fraction of a
/// segment is immaterial at counting accuracy.
const CORNER_EPS: f64 = 1e-9;

/// Append the cells crossed by the straight segment from `start` to `end`
/// (coordinates already scaled to cell units, unshifted), including the
/// start cell.
fn bridge_cells(
    start: &[f64],
    end: &[f64],
    scratch: &mut Vec<(f64, usize, i64)>,
    mut emit: impl FnMut(&[i64]),
) {
    let dims = start.len();
    let mut cur: Vec<i64> = start.iter().map(|v| v.floor() as i64).collect();
    emit(&cur);
    scratch.clear();
    for c in 0..dims {
        let i0 = cur[c];
        let i1 = end[c].floor() as i64;
        let delta = end[c] - start[c];
        if i1 > i0 {
            for boundary in (i0 + 1)..=i1 {
                scratch.push(((boundary as f64 - start[c]) / delta, c, 1));
            }
        } else if i1 < i0 {
            for boundary in (i1 + 1)..=i0 {
                scratch.push(((boundary as f64 - start[c]) / delta, c, -1));
            }
        }
    }
    scratch.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite crossing"));
    let mut i = 0;
    while i < scratch.len() {
        let t = scratch[i].0;
        // Near-simultaneous crossings (corners) step diagonally at once.
        while i < scratch.len() && scratch[i].0 - t <= CORNER_EPS {
            cur[scratch[i].1] += scratch[i].2;
            i += 1;
        }
        emit(&cur);
    }
}

/// Count distinct level-`n` cells of `R^(1+ydim)` visited by the polyline
/// through `(x_s, f(x_s))` with `total_samples` stratified x-draws from
/// `[0, 1)`. `ybound` must dominate `sup |f|` per coordinate.
pub fn count_boxes_fn<F>(
    base: u32,
    n: u32,
    total_samples: u64,
    ydim: usize,
    ybound: f64,
    f: F,
) -> Result<u64, BoxdimError>
where
    F: Fn(f64) -> Vec<f64> + Sync,
{
    if n == 0 {
        return Err(BoxdimError::BadArg("level n must be >= 1".into()));
    }
    if total_samples < 2 {
        return Err(BoxdimError::BadArg("need at least two samples".into()));
    }
    let scale = (base as f64).powi(n as i32);
    if scale >= 9.0e15 {
        return Err(BoxdimError::ResourceGuard(format!(
            "level {n} exceeds exact cell indexing for base {base}"
        )));
    }
    let y_cells = ((2.0 * ybound.ceil() + 2.0) * scale) as u64;
    let x_bits = 64 - (scale as u64).leading_zeros().min(63);
    let y_bits = 64 - y_cells.leading_zeros().min(63);
    let total_bits = x_bits + y_bits * ydim as u32;
    if total_bits > MAX_KEY_BITS {
        return Err(BoxdimError::ResourceGuard(format!(
            "level {n} needs {total_bits} key bits (> {MAX_KEY_BITS}); lower the level or dimension"
        )));
    }
    if total_samples > MAX_SAMPLES {
        return Err(BoxdimError::ResourceGuard(format!(
            "level {n} would draw {total_samples} samples (> {MAX_SAMPLES})"
        )));
    }
    let capacity = (scale as u64).saturating_mul(y_cells.saturating_pow(ydim as u32));
    if total_samples.min(capacity) > MAX_CELLS {
        return Err(BoxdimError::ResourceGuard(format!(
            "level {n} could occupy more than {MAX_CELLS} cells"
        )));
    }

    // Nonnegativity shift applied as an integer at packing time, so the
    // crossing arithmetic sees the raw scaled coordinates (exact corners
    // stay exact).
    let y_offset_cells = ((ybound.ceil() + 1.0) * scale) as i64;
    let m = total_samples as usize;
    let dims = 1 + ydim;
    let point = |s: usize| -> Vec<f64> {
        let jitter = (0.5 + (s as f64 + 1.0) * GOLDEN).fract();
        let x = (s as f64 + jitter) / m as f64;
        let y = f(x);
        debug_assert_eq!(y.len(), ydim);
        let mut scaled = Vec::with_capacity(dims);
        scaled.push(x * scale);
        for &yc in &y {
            scaled.push(yc * scale);
        }
        scaled
    };
    let pack = |idx: &[i64]| -> u64 {
        let mut key = idx[0] as u64;
        for &i in &idx[1..] {
            let shifted = i + y_offset_cells;
            debug_assert!(shifted >= 0);
            key = (key << y_bits) | shifted as u64;
        }
        key
    };

    // Chunked segment walk: each chunk re-evaluates its boundary sample so
    // no segment is skipped at chunk joins.
    let chunk = 1usize << 14;
    let ranges: Vec<(usize, usize)> = (0..m - 1)
        .step_by(chunk)
        .map(|lo| (lo, (lo + chunk).min(m - 1)))
        .collect();
    let mut keys: Vec<u64> = ranges
        .into_par_iter()
        .flat_map_iter(|(lo, hi)| {
            let mut out: Vec<u64> = Vec::with_capacity((hi - lo) * 2);
            let mut scratch: Vec<(f64, usize, i64)> = Vec::new();
            let mut prev = point(lo);
            for s in lo + 1..=hi {
                let next = point(s);
                bridge_cells(&prev, &next, &mut scratch, |idx| out.push(pack(idx)));
                prev = next;
            }
            out
        })
        .collect();
    keys.par_sort_unstable();
    keys.dedup();
    Ok(keys.len() as u64)
}

/// Occupied level-`n` cells of the graph of `W` in `R^(1+d)`.
pub fn box_count(
    p: &Params,
    k: &KernelFunction,
    n: u32,
    oversample: u32,
    tb: &TruncationBudget,
) -> Result<u64, BoxdimError> {
    if oversample < 4 {
        return Err(BoxdimError::BadArg("oversample must be >= 4".into()));
    }
    let samples = sample_count(p, k.d(), n, oversample);
    let ybound = k.l1_bound() / (1.0 - p.lambda()) + 1.0;
    let ev = Evaluator::new(p, k, tb);
    count_boxes_fn(p.b(), n, samples, k.d(), ybound, |x| ev.w(x))
}

/// Occupied cells of the flattened graph `(x, W(x) - W^{pi_V phi}(x))`,
/// still embedded in `R^(1+d)`.
pub fn box_count_flattened(
    p: &Params,
    k: &KernelFunction,
    v_basis: &[Vec<f64>],
    n: u32,
    oversample: u32,
    tb: &TruncationBudget,
) -> Result<u64, BoxdimError> {
    if oversample < 4 {
        return Err(BoxdimError::BadArg("oversample must be >= 4".into()));
    }
    let projected = k.project(v_basis)?;
    let samples = sample_count(p, k.d(), n, oversample);
    let ybound = 2.0 * k.l1_bound() / (1.0 - p.lambda()) + 1.0;
    let ev = Evaluator::new(p, k, tb);
    let ev_proj = Evaluator::new(p, &projected, tb);
    count_boxes_fn(p.b(), n, samples, k.d(), ybound, |x| {
        let w = ev.w(x);
        let wp = ev_proj.w(x);
        w.iter().zip(wp).map(|(a, b)| a - b).collect()
    })
}
