//! Deterministic data parallelism over fixed-size chunks.
//!
//! Work items are split into chunks of a fixed size before any threads are
//! spawned, and per-chunk results are combined in chunk order. The thread
//! count therefore changes scheduling only, never the arithmetic, which is
//! what makes `--threads 1` and `--threads 4` bit-identical.

/// Chunk size used for all parallel reductions. Fixed so results do not
/// depend on the thread count.
pub const CHUNK: usize = 32;

/// Maps `f` over index chunks `[start, end)` of `0..n` and returns the
/// per-chunk results in chunk order. Chunks are assigned to threads
/// round-robin.
pub fn map_chunks<R, F>(n: usize, threads: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(std::ops::Range<usize>) -> R + Sync,
{
    if n == 0 {
        return Vec::new();
    }
    let n_chunks = n.div_ceil(CHUNK);
    let chunk_range = |c: usize| c * CHUNK..((c + 1) * CHUNK).min(n);
    let threads = threads.max(1).min(n_chunks);
    if threads == 1 {
        return (0..n_chunks).map(|c| f(chunk_range(c))).collect();
    }

    let per_thread: Vec<Vec<(usize, R)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let f = &f;
                scope.spawn(move || {
                    (t..n_chunks)
                        .step_by(threads)
                        .map(|c| (c, f(chunk_range(c))))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });

    let mut slots: Vec<Option<R>> = (0..n_chunks).map(|_| None).collect();
    for results in per_thread {
        for (c, r) in results {
            slots[c] = Some(r);
        }
    }
    slots.into_iter().map(|s| s.unwrap()).collect()
}
