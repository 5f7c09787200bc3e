//! The box-truncated bound `g(n, m)` and everything built on it: streams of
//! approximations, box-limited certificates for the limit value `f(n)`, and
//! the shifted form `phi(n, l) = g(n+1, l+1)`.
//!
//! `g(n, m)` is the smallest `b` such that every tuple in `{0,...,m-1}^n`
//! has a duplicate in `{0,...,b}^n`. Two independent search routes are
//! provided: a naive mode that replays the pairwise elimination loop
//! directly, and an optimized mode that groups tuples by relation signature
//! (equal signatures have identical duplicate sets). Both must return
//! identical values.

use std::collections::BTreeMap;

use crate::equation::RelationSignature;
use crate::error::{Error, Result};

/// Resource limits for duplicate searches.
///
/// `pair_check_cap` bounds the number of elementary check units a single
/// call may spend (tuple visits plus pairwise comparisons); exceeding it is
/// an error, never a wrong answer. `parallelism` is the number of worker
/// threads optimized searches may use; results are independent of it.
#[derive(Clone, Debug)]
pub struct SearchLimits {
    pub pair_check_cap: u64,
    pub parallelism: usize,
}

pub const DEFAULT_PAIR_CHECK_CAP: u64 = 10_000_000;

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            pair_check_cap: DEFAULT_PAIR_CHECK_CAP,
            parallelism: 1,
        }
    }
}

impl SearchLimits {
    pub fn with_cap(cap: u64) -> Self {
        SearchLimits {
            pair_check_cap: cap,
            ..Default::default()
        }
    }

    pub fn with_parallelism(mut self, parallelism: usize) -> Self {
        self.parallelism = parallelism.max(1);
        self
    }
}

/// Search strategy for [`g_value`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GMode {
    /// Pairwise elimination over all tuples of the box: drop a tuple if some
    /// tuple with strictly smaller maximum duplicates it; the answer is the
    /// largest entry among survivors.
    Naive,
    /// Deduplicate tuples by relation signature and resolve the minimal-max
    /// duplicate per signature class.
    Optimized,
}

/// One approximation step: `value = g(n, m)`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct GApprox {
    pub n: u32,
    pub m: u64,
    pub value: u64,
}

/// `g(n, m)`: the smallest `b` such that every `x` in `{0,...,m-1}^n` has a
/// duplicate in `{0,...,b}^n`.
pub fn g_value(n: u32, m: u64, mode: GMode, limits: &SearchLimits) -> Result<u64> {
    if n == 0 {
        return Err(Error::invalid("g needs n >= 1"));
    }
    if m == 0 {
        return Err(Error::invalid("g needs m >= 1"));
    }
    match mode {
        GMode::Naive => naive_g(n, m, limits),
        GMode::Optimized => optimized_g(n, m, limits),
    }
}

fn box_tuple_count(n: u32, m: u64, cap: u64) -> Result<u128> {
    let count = (m as u128).checked_pow(n).ok_or(Error::ResourceCap {
        needed: u64::MAX,
        cap,
    })?;
    if count > cap as u128 {
        return Err(Error::ResourceCap {
            needed: count.min(u64::MAX as u128) as u64,
            cap,
        });
    }
    Ok(count)
}

fn for_each_box_tuple(n: u32, m: u64, mut f: impl FnMut(&[u64])) {
    let n = n as usize;
    let mut values = vec![0u64; n];
    'outer: loop {
        f(&values);
        for i in (0..n).rev() {
            values[i] += 1;
            if values[i] < m {
                continue 'outer;
            }
            values[i] = 0;
        }
        return;
    }
}

fn max_of(values: &[u64]) -> u64 {
    values.iter().copied().max().unwrap_or(0)
}

/// Whether `y` is a duplicate of `x`, checked relation by relation the way
/// the elimination loop does.
fn pair_duplicates(x: &[u64], y: &[u64]) -> bool {
    let n = x.len();
    for i in 0..n {
        if x[i] == 1 && y[i] != 1 {
            return false;
        }
        for j in i..n {
            let sx = x[i] as u128 + x[j] as u128;
            let sy = y[i] as u128 + y[j] as u128;
            let px = x[i] as u128 * x[j] as u128;
            let py = y[i] as u128 * y[j] as u128;
            for k in 0..n {
                if sx == x[k] as u128 && sy != y[k] as u128 {
                    return false;
                }
                if px == x[k] as u128 && py != y[k] as u128 {
                    return false;
                }
            }
        }
    }
    true
}

fn naive_g(n: u32, m: u64, limits: &SearchLimits) -> Result<u64> {
    let cap = limits.pair_check_cap;
    let count = box_tuple_count(n, m, cap)?;
    let pairs = count * count;
    if pairs > cap as u128 {
        return Err(Error::ResourceCap {
            needed: pairs.min(u64::MAX as u128) as u64,
            cap,
        });
    }

    let mut tuples: Vec<Vec<u64>> = Vec::with_capacity(count as usize);
    for_each_box_tuple(n, m, |v| tuples.push(v.to_vec()));

    let mut g = 0u64;
    for x in &tuples {
        let mx = max_of(x);
        if mx <= g {
            continue; // cannot raise the answer whether or not it survives
        }
        let eliminated = tuples
            .iter()
            .any(|y| max_of(y) < mx && pair_duplicates(x, y));
        if !eliminated {
            g = mx;
        }
    }
    Ok(g)
}

fn optimized_g(n: u32, m: u64, limits: &SearchLimits) -> Result<u64> {
    let cap = limits.pair_check_cap;
    let count = box_tuple_count(n, m, cap)?;

    // Minimal max-entry per distinct signature.
    let mut classes: BTreeMap<RelationSignature, u64> = BTreeMap::new();
    for_each_box_tuple(n, m, |values| {
        let sig = RelationSignature::of_u64(values);
        let mx = max_of(values);
        classes
            .entry(sig)
            .and_modify(|e| *e = (*e).min(mx))
            .or_insert(mx);
    });

    let class_list: Vec<(&RelationSignature, u64)> =
        classes.iter().map(|(sig, &mm)| (sig, mm)).collect();
    let work = count + (class_list.len() as u128).pow(2);
    if work > cap as u128 {
        return Err(Error::ResourceCap {
            needed: work.min(u64::MAX as u128) as u64,
            cap,
        });
    }

    let workers = limits.parallelism.max(1);
    if workers == 1 || class_list.len() < 2 * workers {
        return Ok(class_list
            .iter()
            .map(|(sig, mm)| resolve_class(&class_list, sig, *mm))
            .max()
            .unwrap_or(0));
    }

    let chunk_size = class_list.len().div_ceil(workers);
    let mut g = 0u64;
    std::thread::scope(|scope| {
        let all = &class_list;
        let handles: Vec<_> = class_list
            .chunks(chunk_size)
            .map(|chunk| {
                scope.spawn(move || {
                    chunk
                        .iter()
                        .map(|(sig, mm)| resolve_class(all, sig, *mm))
                        .max()
                        .unwrap_or(0)
                })
            })
            .collect();
        for handle in handles {
            g = g.max(handle.join().expect("duplicate-search worker panicked"));
        }
    });
    Ok(g)
}

/// Smallest max-entry of a duplicate of anything in this signature class:
/// the minimum over all classes whose signature contains it.
fn resolve_class(all: &[(&RelationSignature, u64)], sig: &RelationSignature, own: u64) -> u64 {
    let mut best = own;
    for (tau, mm) in all {
        if *mm < best && tau.contains(sig) {
            best = *mm;
        }
        if best == 0 {
            break;
        }
    }
    best
}

/// Stream of `g(n, m)` for `m = 1, 2, 3, ...`, resumable from any `m`.
#[derive(Clone, Debug)]
pub struct GStream {
    n: u32,
    next_m: u64,
    limits: SearchLimits,
    failed: bool,
}

impl GStream {
    pub fn new(n: u32, limits: SearchLimits) -> GStream {
        GStream {
            n,
            next_m: 1,
            limits,
            failed: false,
        }
    }

    /// Resume a stream whose next iteration is `next_m`. Emits the same
    /// values an uninterrupted stream would from that point on.
    pub fn resume(n: u32, next_m: u64, limits: SearchLimits) -> Result<GStream> {
        if next_m == 0 {
            return Err(Error::invalid("stream iterations start at m = 1"));
        }
        Ok(GStream {
            n,
            next_m,
            limits,
            failed: false,
        })
    }

    pub fn next_m(&self) -> u64 {
        self.next_m
    }
}

impl Iterator for GStream {
    type Item = Result<GApprox>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let m = self.next_m;
        match g_value(self.n, m, GMode::Optimized, &self.limits) {
            Ok(value) => {
                debug_assert!(value < m);
                self.next_m += 1;
                Some(Ok(GApprox {
                    n: self.n,
                    m,
                    value,
                }))
            }
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

/// One iteration of the filtered stream that converges to `f(n)`: the value
/// `g(n, m)` is emitted exactly when it equals `m - 1`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct FStep {
    pub m: u64,
    pub g: u64,
    pub emitted: bool,
}

/// Stream that emits `g(n, m)` only on iterations where `g(n, m) = m - 1`.
/// The emitted sequence is increasing and its last element is `f(n)`.
#[derive(Clone, Debug)]
pub struct FStream {
    n: u32,
    next_m: u64,
    limits: SearchLimits,
}

impl FStream {
    pub fn new(n: u32, limits: SearchLimits) -> FStream {
        FStream {
            n,
            next_m: 1,
            limits,
        }
    }

    pub fn next_m(&self) -> u64 {
        self.next_m
    }

    /// Advance one iteration, reporting the value and whether it is emitted.
    pub fn step(&mut self) -> Result<FStep> {
        let m = self.next_m;
        let g = g_value(self.n, m, GMode::Optimized, &self.limits)?;
        self.next_m += 1;
        Ok(FStep {
            m,
            g,
            emitted: g == m - 1,
        })
    }
}

/// A box-limited certificate for `f(n)`.
///
/// `f_value` is the smallest `b` such that every tuple in
/// `{0,...,verified_box - 1}^n` has a duplicate in `{0,...,b}^n`. For
/// `n >= 2` this is a lower-bound certificate only (`f` is a limit over an
/// infinite domain); `exact` is true only for `n = 1`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct FCertificate {
    pub n: u32,
    pub f_value: u64,
    pub verified_box: u64,
    pub exact: bool,
}

/// Smallest admissible box for [`f_certify`]: the box must contain the
/// forced chain solution so that `f_value >= 2^(2^(n-2))` holds.
pub fn min_certificate_box(n: u32) -> Result<u64> {
    match n {
        0 => Err(Error::invalid("certificates need n >= 1")),
        1 => Ok(2),
        2..=7 => {
            let e = 1u32 << (n - 2);
            Ok((1u64 << e) + 1)
        }
        _ => Err(Error::invalid(
            "certificate boxes for n >= 8 exceed desk scale",
        )),
    }
}

/// Certify `f(n)` over the box `{0,...,box_m - 1}^n`.
pub fn f_certify(n: u32, box_m: u64, limits: &SearchLimits) -> Result<FCertificate> {
    let required = min_certificate_box(n)?;
    if box_m < required {
        return Err(Error::invalid(format!(
            "box {box_m} cannot witness the forced chain value for n = {n}; need at least {required}"
        )));
    }
    let f_value = g_value(n, box_m, GMode::Optimized, limits)?;
    debug_assert!(f_value >= required - 1);
    Ok(FCertificate {
        n,
        f_value,
        verified_box: box_m,
        exact: n == 1,
    })
}

/// `phi(n, l) = g(n + 1, l + 1)`.
pub fn phi(n: u32, l: u64, limits: &SearchLimits) -> Result<u64> {
    let next_n = n
        .checked_add(1)
        .ok_or_else(|| Error::invalid("n too large"))?;
    let next_l = l
        .checked_add(1)
        .ok_or_else(|| Error::invalid("l too large"))?;
    g_value(next_n, next_l, GMode::Optimized, limits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn limits() -> SearchLimits {
        SearchLimits::default()
    }

    #[test]
    fn g_at_m_one_is_zero() {
        for n in 1..=3 {
            assert_eq!(g_value(n, 1, GMode::Naive, &limits()).unwrap(), 0);
            assert_eq!(g_value(n, 1, GMode::Optimized, &limits()).unwrap(), 0);
        }
    }

    #[test]
    fn g_at_m_two_is_one() {
        for n in 1..=3 {
            assert_eq!(g_value(n, 2, GMode::Naive, &limits()).unwrap(), 1);
            assert_eq!(g_value(n, 2, GMode::Optimized, &limits()).unwrap(), 1);
        }
    }

    #[test]
    fn g_2_3_is_two() {
        // (1, 2) duplicates only itself, so the bound is forced to 2.
        assert_eq!(g_value(2, 3, GMode::Naive, &limits()).unwrap(), 2);
        assert_eq!(g_value(2, 3, GMode::Optimized, &limits()).unwrap(), 2);
    }

    #[test]
    fn g_one_variable_stabilizes_at_one() {
        for m in 2..=10 {
            assert_eq!(g_value(1, m, GMode::Naive, &limits()).unwrap(), 1);
        }
    }

    #[test]
    fn g_rejects_zero_arguments() {
        assert!(g_value(0, 1, GMode::Naive, &limits()).is_err());
        assert!(g_value(1, 0, GMode::Naive, &limits()).is_err());
    }

    #[test]
    fn naive_cap_is_enforced() {
        let tight = SearchLimits::with_cap(1_000);
        let err = g_value(3, 50, GMode::Naive, &tight).unwrap_err();
        assert!(matches!(err, Error::ResourceCap { .. }));
    }

    #[test]
    fn g_stream_matches_g_value() {
        let stream = GStream::new(2, limits());
        let values: Vec<u64> = stream.take(6).map(|r| r.unwrap().value).collect();
        assert_eq!(values, [0, 1, 2, 2, 2, 2]);

        let stream = GStream::new(1, limits());
        let values: Vec<u64> = stream.take(4).map(|r| r.unwrap().value).collect();
        assert_eq!(values, [0, 1, 1, 1]);
    }

    #[test]
    fn g_stream_resume_is_seamless() {
        let full: Vec<u64> = GStream::new(2, limits())
            .take(6)
            .map(|r| r.unwrap().value)
            .collect();
        let mut head = GStream::new(2, limits());
        let mut combined: Vec<u64> = (&mut head).take(3).map(|r| r.unwrap().value).collect();
        let tail = GStream::resume(2, head.next_m(), limits()).unwrap();
        combined.extend(tail.take(3).map(|r| r.unwrap().value));
        assert_eq!(combined, full);
    }

    #[test]
    fn f_stream_emits_exactly_on_diagonal() {
        let mut stream = FStream::new(1, limits());
        let mut emitted = Vec::new();
        for _ in 0..10 {
            let step = stream.step().unwrap();
            if step.emitted {
                emitted.push(step.g);
            }
        }
        assert_eq!(emitted, [0, 1]);

        let mut stream = FStream::new(2, limits());
        let mut emitted = Vec::new();
        for _ in 0..8 {
            let step = stream.step().unwrap();
            if step.emitted {
                emitted.push(step.g);
                assert_eq!(step.g, step.m - 1);
            }
        }
        assert_eq!(emitted, [0, 1, 2]);
    }

    #[test]
    fn f_certify_one_variable_is_exact() {
        let cert = f_certify(1, 10, &limits()).unwrap();
        assert_eq!(cert.f_value, 1);
        assert!(cert.exact);
    }

    #[test]
    fn f_certify_two_variables() {
        let cert = f_certify(2, 32, &limits()).unwrap();
        assert_eq!(cert.f_value, 2);
        assert!(!cert.exact);
        assert_eq!(cert.verified_box, 32);
    }

    #[test]
    fn f_certify_three_variables() {
        let cert = f_certify(3, 16, &limits()).unwrap();
        assert_eq!(cert.f_value, 4);
        assert!(!cert.exact);
    }

    #[test]
    fn f_certify_rejects_undersized_boxes() {
        assert!(f_certify(2, 2, &limits()).is_err());
        assert!(f_certify(3, 4, &limits()).is_err());
        assert!(f_certify(1, 1, &limits()).is_err());
    }

    #[test]
    fn phi_matches_shifted_g() {
        for n in 0..=2 {
            assert_eq!(phi(n, 0, &limits()).unwrap(), 0);
            assert_eq!(phi(n, 1, &limits()).unwrap(), 1);
        }
        assert_eq!(phi(1, 2, &limits()).unwrap(), 2);
        assert_eq!(
            phi(1, 2, &limits()).unwrap(),
            g_value(2, 3, GMode::Optimized, &limits()).unwrap()
        );
    }

    #[test]
    fn parallel_resolution_matches_serial() {
        let serial = limits();
        let parallel = SearchLimits::default().with_parallelism(4);
        for m in 1..=5 {
            for n in 1..=3 {
                assert_eq!(
                    g_value(n, m, GMode::Optimized, &serial).unwrap(),
                    g_value(n, m, GMode::Optimized, &parallel).unwrap()
                );
            }
        }
    }
}
