//! Threaded dataset generation that reproduces the sequential output
//! exactly.
//!
//! The logical attempt sequence is defined per attempt index (see
//! `monotone_core::datagen::attempt`), so workers can classify disjoint
//! chunks of the index space in parallel while a sequential fold walks
//! the results in attempt order and applies the same quota logic as the
//! single-threaded generator.

use monotone_core::datagen::{
    DatagenError, Dataset, DatasetMeta, LabeledSample, DEFAULT_NEG_TOL, GENERATOR_VERSION,
};
use monotone_core::SquareMatrix;

/// Attempts classified per fold round; bounds peak memory.
const BLOCK: u64 = 8192;

/// Same contract and output as `datagen::generate_balanced`, with the
/// classification work spread over `workers` threads.
pub fn generate_balanced_parallel(
    n: usize,
    per_class: usize,
    seed: u64,
    workers: usize,
    attempt_cap: u64,
) -> Result<Dataset, DatagenError> {
    if per_class == 0 {
        return Err(DatagenError::EmptyRequest);
    }
    if workers == 0 {
        return Err(DatagenError::NoWorkers);
    }
    if n < 2 {
        return Err(DatagenError::DimensionTooSmall);
    }
    if workers == 1 {
        return monotone_core::datagen::generate_balanced(n, per_class, seed, 1, attempt_cap);
    }
    let cap = attempt_cap.min(u64::from(u32::MAX));
    let neg_tol = DEFAULT_NEG_TOL;

    let mut samples: Vec<LabeledSample> = Vec::with_capacity(2 * per_class);
    let mut mono = 0usize;
    let mut non = 0usize;
    let mut attempts = 0u64;

    let mut start = 0u64;
    while start < cap {
        let end = (start + BLOCK).min(cap);
        let len = (end - start) as usize;
        // Chunk the block across workers; slot order preserves the
        // attempt order for the fold below.
        let mut block: Vec<Option<(SquareMatrix, bool)>> = vec![None; len];
        let per_worker = len.div_ceil(workers);
        std::thread::scope(|scope| {
            for (w, slots) in block.chunks_mut(per_worker).enumerate() {
                let base = start + (w * per_worker) as u64;
                scope.spawn(move || {
                    for (k, slot) in slots.iter_mut().enumerate() {
                        *slot = Some(monotone_core::datagen::attempt(
                            n,
                            seed,
                            base + k as u64,
                            neg_tol,
                        ));
                    }
                });
            }
        });
        for (k, slot) in block.into_iter().enumerate() {
            let (matrix, monotone) = slot.expect("filled by worker");
            let i = start + k as u64;
            attempts = i + 1;
            let want = if monotone {
                mono < per_class
            } else {
                non < per_class
            };
            if want {
                if monotone {
                    mono += 1;
                } else {
                    non += 1;
                }
                samples.push(LabeledSample {
                    matrix,
                    monotone,
                    sample_id: i,
                });
            }
            if mono == per_class && non == per_class {
                return Ok(Dataset {
                    n,
                    samples,
                    meta: DatasetMeta {
                        seed,
                        attempts,
                        neg_tol,
                        monotone_count: mono,
                        non_monotone_count: non,
                        generator_version: GENERATOR_VERSION,
                    },
                });
            }
        }
        start = end;
    }
    Err(DatagenError::AttemptCapExceeded {
        cap,
        attempts,
        monotone_found: mono,
        non_monotone_found: non,
    })
}
