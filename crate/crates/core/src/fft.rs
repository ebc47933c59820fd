//! Shared FFT plans and frequency bookkeeping.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

type Plan = Arc<dyn Fft<f64>>;

static PLANS: OnceLock<Mutex<HashMap<usize, (Plan, Plan)>>> = OnceLock::new();

fn plans(n: usize) -> (Plan, Plan) {
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut cache = cache.lock().expect("fft plan cache poisoned");
    cache
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

/// Unnormalized forward transform, in place.
pub(crate) fn forward(buf: &mut [Complex64]) {
    plans(buf.len()).0.process(buf);
}

/// Inverse transform including the 1/n factor, in place.
pub(crate) fn inverse(buf: &mut [Complex64]) {
    plans(buf.len()).1.process(buf);
    let scale = 1.0 / buf.len() as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
}

/// Signed bin index of FFT output `k` (wrap-around order).
#[inline]
pub(crate) fn signed_index(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}
