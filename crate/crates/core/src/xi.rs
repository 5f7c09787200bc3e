//! The two-phase witness search: emit 0 immediately, decode the system for
//! the input code, then scan tuple codes `m = 2, 3, ...` until the decoded
//! candidate satisfies every equation of the system, and emit the witness
//! bound. Also the direct minimal-code construction and a box-limited
//! estimator for the unique-solution bound.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::bounds::SearchLimits;
use crate::equation::{EnSystem, RelationSignature, Tuple};
use crate::error::{Error, Result};
use crate::godel::{decode_system, decode_tuple_u64, first_primes, normalize};
use crate::solver;

/// Events of a witness search, in emission order.
///
/// `InitialZero` always comes first, before the system is even decoded.
/// `Tested` events are progress reports (only emitted when requested).
/// Exactly one of `Found` / `BudgetExhausted` terminates the stream.
/// Testing code `m` counts as iteration `m - 1`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SearchEvent {
    InitialZero,
    Tested {
        m: u64,
        iterations_so_far: u64,
    },
    Found {
        value: u64,
        solving_m: u64,
        iterations: u64,
    },
    BudgetExhausted {
        last_m: u64,
    },
}

/// Configuration for [`xi_run`].
#[derive(Clone, Debug)]
pub struct XiConfig {
    /// Number of tuple codes to test before giving up.
    pub budget: u64,
    /// Apply the variable-normalization rule to the decoded system.
    pub normalized: bool,
    /// Worker threads for the block search. Results are independent of it:
    /// the minimal solving code is reported regardless of which worker finds
    /// a witness first.
    pub parallelism: usize,
    /// Emit a `Tested` event every this many iterations.
    pub progress_every: Option<u64>,
    /// First tuple code to test; 2 for a fresh run, higher after a resume.
    pub start_m: u64,
    /// Emit `InitialZero`; false when resuming a run that already did.
    pub emit_initial_zero: bool,
}

impl XiConfig {
    pub fn new(budget: u64) -> XiConfig {
        XiConfig {
            budget,
            normalized: false,
            parallelism: 1,
            progress_every: None,
            start_m: 2,
            emit_initial_zero: true,
        }
    }

    pub fn normalized(mut self, normalized: bool) -> Self {
        self.normalized = normalized;
        self
    }

    pub fn parallelism(mut self, parallelism: usize) -> Self {
        self.parallelism = parallelism.max(1);
        self
    }
}

/// Start a witness search for system code `n`.
pub fn xi_run(n: &BigUint, config: XiConfig) -> XiRun {
    XiRun {
        n: n.clone(),
        config,
        state: XiState::Fresh,
    }
}

enum XiState {
    Fresh,
    ZeroEmitted,
    Searching { system: EnSystem, next_m: u64 },
    Done,
}

/// Lazy event stream for one witness search. No decoding or search work
/// happens before the `InitialZero` event has been handed out.
pub struct XiRun {
    n: BigUint,
    config: XiConfig,
    state: XiState,
}

impl XiRun {
    /// Codes `start_m ..= end` are tested; `end` is derived from the budget
    /// counted from the canonical start at 2.
    fn end_m(&self) -> u64 {
        1 + self.config.budget
    }

    /// The next code to be tested, for checkpointing. `None` once finished.
    pub fn next_m(&self) -> Option<u64> {
        match &self.state {
            XiState::Searching { next_m, .. } => Some(*next_m),
            _ => None,
        }
    }

    fn begin_search(&mut self) -> Result<EnSystem> {
        let system = decode_system(&self.n)?;
        if self.config.normalized {
            normalize(&system)
        } else {
            Ok(system)
        }
    }
}

impl Iterator for XiRun {
    type Item = Result<SearchEvent>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            match std::mem::replace(&mut self.state, XiState::Done) {
                XiState::Fresh => {
                    self.state = XiState::ZeroEmitted;
                    if self.config.emit_initial_zero {
                        return Some(Ok(SearchEvent::InitialZero));
                    }
                }
                XiState::ZeroEmitted => match self.begin_search() {
                    Ok(system) => {
                        self.state = XiState::Searching {
                            system,
                            next_m: self.config.start_m.max(2),
                        };
                    }
                    Err(e) => {
                        return Some(Err(e));
                    }
                },
                XiState::Searching { system, next_m } => {
                    let end = self.end_m();
                    if next_m > end {
                        return Some(Ok(SearchEvent::BudgetExhausted { last_m: end }));
                    }
                    let block_end = match self.config.progress_every {
                        Some(k) => end.min(next_m.saturating_add(k.max(1)) - 1),
                        None => end,
                    };
                    match search_block(&system, next_m, block_end, self.config.parallelism) {
                        Some(m) => {
                            let value = decode_tuple_u64(m).into_iter().max().unwrap_or(0);
                            return Some(Ok(SearchEvent::Found {
                                value,
                                solving_m: m,
                                iterations: m - 1,
                            }));
                        }
                        None => {
                            self.state = XiState::Searching {
                                system,
                                next_m: block_end + 1,
                            };
                            if self.config.progress_every.is_some() {
                                return Some(Ok(SearchEvent::Tested {
                                    m: block_end,
                                    iterations_so_far: block_end - 1,
                                }));
                            }
                        }
                    }
                }
                XiState::Done => return None,
            }
        }
    }
}

/// Whether the tuple decoded from `m` satisfies every equation of the
/// system. Equations referencing an index beyond the tuple length fail the
/// test; they never error.
fn code_satisfies(m: u64, system: &EnSystem) -> bool {
    let w = decode_tuple_u64(m);
    system.is_satisfied_by_u64(&w)
}

/// First solving code in `lo ..= hi`, or `None`. With more than one worker
/// the range is split into contiguous sub-ranges scanned concurrently; the
/// minimum over per-range results keeps the answer identical to a serial
/// scan.
fn search_block(system: &EnSystem, lo: u64, hi: u64, parallelism: usize) -> Option<u64> {
    if lo > hi {
        return None;
    }
    let workers = parallelism.max(1) as u64;
    let len = hi - lo + 1;
    if workers == 1 || len < 4 * workers {
        return (lo..=hi).find(|&m| code_satisfies(m, system));
    }

    let chunk = len.div_ceil(workers);
    let mut found: Option<u64> = None;
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for w in 0..workers {
            let sub_lo = lo + w * chunk;
            if sub_lo > hi {
                break;
            }
            let sub_hi = hi.min(sub_lo + chunk - 1);
            handles
                .push(scope.spawn(move || (sub_lo..=sub_hi).find(|&m| code_satisfies(m, system))));
        }
        for handle in handles {
            let sub = handle.join().expect("witness-search worker panicked");
            found = match (found, sub) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
        }
    });
    found
}

/// Outcome of the direct minimal-code search.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum MinimalCodeOutcome {
    /// Smallest code whose decoded tuple satisfies the system, among
    /// witnesses with entries up to the value bound. `certified_minimal`
    /// marks results provably minimal over *all* witnesses (any tuple with a
    /// larger entry would already have a larger code).
    Found {
        code: BigUint,
        witness: Tuple,
        certified_minimal: bool,
    },
    /// The whole value box was scanned and nothing satisfied the system:
    /// evidence (not proof) of unsatisfiability.
    NoSolutionWithin { value_bound: u64 },
    /// The assignment budget ran out before the box was fully scanned.
    Exhausted { tested: u64 },
}

/// Compute the smallest tuple code solving `system` by direct construction
/// instead of scanning codes one by one.
///
/// Witness entries are searched over `{0, ..., value_bound}` at the indices
/// occurring in the system (absent indices are optimal at 0), and candidate
/// codes are compared exactly.
pub fn minimal_solving_code(
    system: &EnSystem,
    value_bound: u64,
    assignment_cap: u64,
) -> Result<MinimalCodeOutcome> {
    if system.is_empty() {
        return Err(Error::invalid(
            "minimal code search needs a non-empty system",
        ));
    }
    let occurring: Vec<u32> = system.occurring_indices().into_iter().collect();
    let width = *occurring.last().expect("non-empty") as usize;
    let primes = first_primes(width);

    let mut values = vec![0u64; width];
    let mut assignment = vec![0u64; occurring.len()];
    let mut tested = 0u64;
    let mut best: Option<(BigUint, Vec<u64>)> = None;

    'outer: loop {
        tested += 1;
        if tested > assignment_cap {
            return Ok(MinimalCodeOutcome::Exhausted { tested: tested - 1 });
        }
        for (slot, &idx) in occurring.iter().enumerate() {
            values[idx as usize - 1] = assignment[slot];
        }
        if system.is_satisfied_by_u64(&values) {
            let code = tuple_code(&primes, &values);
            if best.as_ref().is_none_or(|(b, _)| code < *b) {
                best = Some((code, values.clone()));
            }
        }
        for slot in (0..assignment.len()).rev() {
            assignment[slot] += 1;
            if assignment[slot] <= value_bound {
                continue 'outer;
            }
            assignment[slot] = 0;
        }
        break;
    }

    match best {
        Some((code, witness)) => {
            // Any solving tuple with an entry above the bound has code at
            // least primorial(width) * 2^(bound+1).
            let mut escape = BigUint::one();
            for &p in &primes {
                escape *= p;
            }
            escape <<= value_bound as usize + 1;
            let certified_minimal = code < escape;
            Ok(MinimalCodeOutcome::Found {
                code,
                witness: Tuple::from_u64s(&witness),
                certified_minimal,
            })
        }
        None => Ok(MinimalCodeOutcome::NoSolutionWithin { value_bound }),
    }
}

fn tuple_code(primes: &[u64], values: &[u64]) -> BigUint {
    let mut code = BigUint::one();
    for (&p, &v) in primes.iter().zip(values) {
        code *= BigUint::from(p).pow(v as u32 + 1);
    }
    code
}

/// A uniquely-solvable candidate found by the estimator: within the
/// verification box, `solution` is the only solution of `system`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ChiCandidate {
    pub system: EnSystem,
    pub solution: Tuple,
    pub box_bound: u64,
    pub witness_bound: u64,
}

/// Strategy for [`chi_lower_bound`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ChiMode {
    /// A tuple admits a uniquely-solvable system exactly when its only
    /// duplicate is itself (take the tuple's own signature as the system),
    /// so scan tuples and count duplicates. Works for any `n`.
    Signature,
    /// Enumerate every subset of `E_n` and count its box solutions
    /// directly. Only feasible for `n <= 2`; serves as an independent
    /// cross-check of the signature route.
    ExhaustiveSubsets,
}

/// Box-limited estimate of the unique-solution bound.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ChiEstimate {
    pub n: u32,
    pub box_bound: u64,
    pub value: u64,
    pub candidates: Vec<ChiCandidate>,
}

/// Largest max-entry over tuples in `{0,...,box_bound}^n` whose only
/// duplicate inside the box is themselves, together with the candidates.
/// This is a box-limited lower-bound estimate: uniqueness is verified inside
/// the box only.
pub fn chi_lower_bound(
    n: u32,
    box_bound: u64,
    mode: ChiMode,
    limits: &SearchLimits,
) -> Result<ChiEstimate> {
    if n == 0 {
        return Err(Error::invalid("chi estimation needs n >= 1"));
    }
    match mode {
        ChiMode::Signature => chi_by_signatures(n, box_bound, limits),
        ChiMode::ExhaustiveSubsets => chi_by_subsets(n, box_bound, limits),
    }
}

fn chi_by_signatures(n: u32, box_bound: u64, limits: &SearchLimits) -> Result<ChiEstimate> {
    let cap = limits.pair_check_cap;
    let side = box_bound as u128 + 1;
    let count = side
        .checked_pow(n)
        .and_then(|c| c.checked_mul(c).map(|pairs| (c, pairs)))
        .filter(|&(_, pairs)| pairs <= cap as u128)
        .map(|(c, _)| c)
        .ok_or(Error::ResourceCap {
            needed: u64::MAX,
            cap,
        })?;

    let mut tuples: Vec<Vec<u64>> = Vec::with_capacity(count as usize);
    let mut sigs: Vec<RelationSignature> = Vec::with_capacity(count as usize);
    let mut values = vec![0u64; n as usize];
    'outer: loop {
        tuples.push(values.clone());
        sigs.push(RelationSignature::of_u64(&values));
        for i in (0..values.len()).rev() {
            values[i] += 1;
            if values[i] <= box_bound {
                continue 'outer;
            }
            values[i] = 0;
        }
        break;
    }

    let mut candidates = Vec::new();
    let mut value = 0u64;
    for (idx, sig) in sigs.iter().enumerate() {
        let mut duplicates = 0usize;
        for other in &sigs {
            if other.contains(sig) {
                duplicates += 1;
                if duplicates > 1 {
                    break;
                }
            }
        }
        if duplicates == 1 {
            let solution = Tuple::from_u64s(&tuples[idx]);
            let witness_bound = tuples[idx].iter().copied().max().unwrap_or(0);
            value = value.max(witness_bound);
            candidates.push(ChiCandidate {
                system: sig.to_system(n)?,
                solution,
                box_bound,
                witness_bound,
            });
        }
    }
    Ok(ChiEstimate {
        n,
        box_bound,
        value,
        candidates,
    })
}

fn chi_by_subsets(n: u32, box_bound: u64, limits: &SearchLimits) -> Result<ChiEstimate> {
    if n > 2 {
        return Err(Error::invalid(
            "exhaustive subset enumeration is limited to n <= 2",
        ));
    }
    let equations = crate::all_equations(n)?;
    let masks: u64 = 1u64 << equations.len();
    let side = box_bound as u128 + 1;
    let work = side.checked_pow(n).and_then(|c| c.checked_mul(masks as u128));
    if !work.is_some_and(|w| w <= limits.pair_check_cap as u128) {
        return Err(Error::ResourceCap {
            needed: work.map_or(u64::MAX, |w| w.min(u64::MAX as u128) as u64),
            cap: limits.pair_check_cap,
        });
    }

    let mut by_solution: BTreeMap<Tuple, ChiCandidate> = BTreeMap::new();
    let mut value = 0u64;
    for mask in 0..masks {
        let subset: Vec<_> = equations
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, eq)| *eq)
            .collect();
        let system = EnSystem::new(n, subset)?;
        let solutions = solver::solutions_in_box(&system, box_bound, limits.pair_check_cap)?;
        if solutions.len() == 1 {
            let solution = solutions.into_iter().next().expect("length checked");
            let witness_bound = solution
                .values()
                .iter()
                .map(|v| v.to_u64().expect("box values fit u64"))
                .max()
                .unwrap_or(0);
            value = value.max(witness_bound);
            by_solution.entry(solution.clone()).or_insert(ChiCandidate {
                system,
                solution,
                box_bound,
                witness_bound,
            });
        }
    }
    Ok(ChiEstimate {
        n,
        box_bound,
        value,
        candidates: by_solution.into_values().collect(),
    })
}
