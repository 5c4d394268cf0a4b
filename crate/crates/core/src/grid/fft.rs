//! Unitary multidimensional FFT over point-major spinor arrays.
//!
//! Arrays have shape `(n, …, n, s)` in row-major order: the spinor component
//! is the fastest index. Each spatial axis is transformed by gathering its
//! lines into a contiguous buffer, running 1D FFTs, and scattering back. Every
//! line is transformed independently, so the result does not depend on how
//! rayon schedules the work.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::C64;

type Plan = Arc<dyn Fft<f64>>;

fn plan(n: usize, inverse: bool) -> Plan {
    static PLANS: OnceLock<Mutex<HashMap<(usize, bool), Plan>>> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

/// Lines gathered into one contiguous buffer per task.
const LINES_PER_GROUP: usize = 16;

/// Raw pointer shared across tasks that touch disjoint indices.
#[derive(Clone, Copy)]
struct SharedMut(*mut C64);
unsafe impl Send for SharedMut {}
unsafe impl Sync for SharedMut {}

/// In-place unitary transform of all `dim` spatial axes.
pub(crate) fn transform(data: &mut [C64], dim: usize, n: usize, s: usize, inverse: bool) {
    let len = data.len();
    assert_eq!(len, n.pow(dim as u32) * s, "array shape does not match grid");
    let fft = plan(n, inverse);
    let scratch_len = fft.get_inplace_scratch_len();
    let scale = 1.0 / (n.pow(dim as u32) as f64).sqrt();
    let num_lines = len / n;
    let groups = num_lines.div_ceil(LINES_PER_GROUP);
    let ptr = SharedMut(data.as_mut_ptr());

    for axis in 0..dim {
        // line `li` starts at `(li / stride)·n·stride + li % stride` and steps by `stride`
        let stride = n.pow((dim - 1 - axis) as u32) * s;
        let block = n * stride;
        let last = axis + 1 == dim;
        (0..groups).into_par_iter().for_each_init(
            || (vec![C64::new(0.0, 0.0); LINES_PER_GROUP * n], vec![C64::new(0.0, 0.0); scratch_len]),
            |(buf, scratch), group| {
                let ptr = ptr;
                let lo = group * LINES_PER_GROUP;
                let hi = (lo + LINES_PER_GROUP).min(num_lines);
                let count = hi - lo;
                let base = |li: usize| (li / stride) * block + li % stride;
                // SAFETY: every line belongs to exactly one group, so tasks read
                // and write disjoint index sets, all inside `data`.
                unsafe {
                    for k in 0..n {
                        for l in 0..count {
                            buf[l * n + k] = *ptr.0.add(base(lo + l) + k * stride);
                        }
                    }
                }
                fft.process_with_scratch(&mut buf[..count * n], scratch);
                unsafe {
                    for k in 0..n {
                        for l in 0..count {
                            let v = buf[l * n + k];
                            *ptr.0.add(base(lo + l) + k * stride) = if last { v * scale } else { v };
                        }
                    }
                }
            },
        );
    }
}
