//! Index-parallel map with a thread count capped by the `UMLS_THREADS`
//! environment variable (0 or 1 means serial; unset uses the available
//! hardware). Results are assembled in index order, so the output is
//! identical whatever the thread count.

pub fn thread_cap() -> usize {
    match std::env::var("UMLS_THREADS") {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(0) => 1,
            Ok(k) => k,
            Err(_) => 1,
        },
        Err(_) => std::thread::available_parallelism()
            .map(|p| p.get())
            .unwrap_or(1),
    }
}

pub fn parallel_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = thread_cap().min(n.max(1));
    if threads <= 1 || n <= 1 {
        return (0..n).map(f).collect();
    }
    let chunk = n.div_ceil(threads);
    let mut out = Vec::with_capacity(n);
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for t in 0..threads {
            let lo = t * chunk;
            let hi = ((t + 1) * chunk).min(n);
            if lo >= hi {
                break;
            }
            let f = &f;
            handles.push(scope.spawn(move || (lo..hi).map(f).collect::<Vec<T>>()));
        }
        for h in handles {
            out.extend(h.join().expect("parallel_map worker panicked"));
        }
    });
    out
}
