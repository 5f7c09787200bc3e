//! Bounded-witness search and integer coding for `E_n` equation systems.
//!
//! `E_n` is the set of equations `x_k = 1`, `x_i + x_j = x_k` and
//! `x_i * x_j = x_k` over variables `x_1, ..., x_n`. Around this tiny
//! language the crate provides:
//!
//! * [`equation`] — systems, tuples, relation signatures and the duplicate
//!   relation (signature containment);
//! * [`systems`] — named constructors: the squaring chain, the strict-bound
//!   core, and the padding that pins `x_1 = n`;
//! * [`bounds`] — the box-truncated bound `g(n, m)` (two independent search
//!   routes), approximation streams, box-limited certificates for the limit
//!   value `f(n)`, and `phi(n, l) = g(n+1, l+1)`;
//! * [`godel`] — prime-factorization codecs between integers and systems or
//!   candidate tuples, plus the variable-normalization rule;
//! * [`xi`] — the two-phase witness search (emit 0, decode, scan tuple
//!   codes), the direct minimal-code construction, and a box-limited
//!   estimator for the unique-solution bound;
//! * [`poly`] — compilation of integer polynomials into systems with the
//!   same number of solutions, with a deterministic witness program;
//! * [`solver`] — bounded brute-force solution enumeration, used as the
//!   independent oracle throughout;
//! * [`textfmt`] — the plain-text system format used by the CLI.
//!
//! Searches take explicit resource limits and fail loudly when exceeded;
//! they never silently truncate. All types are immutable after construction
//! and all operations are pure, so everything is safe to call concurrently.

pub mod bounds;
pub mod equation;
mod error;
pub mod godel;
pub mod poly;
pub mod solver;
pub mod systems;
pub mod textfmt;
pub mod xi;

pub use bounds::{
    f_certify, g_value, phi, FCertificate, FStep, FStream, GApprox, GMode, GStream, SearchLimits,
    DEFAULT_PAIR_CHECK_CAP,
};
pub use equation::{
    all_equations, is_duplicate, relations_of, EnSystem, Equation, EquationKind, RelationSignature,
    Tuple, VarIndex,
};
pub use error::{Error, Result};
pub use godel::{
    decode_system, decode_tuple, encode_system, encode_tuple, normalize, ExponentBlocks,
};
pub use poly::{
    compile, count_equivalence, evaluate_witness, CompilationResult, Polynomial, WitnessStep,
};
pub use systems::{chain_solution, chain_system, pad_system, strict_bound_system};
pub use textfmt::{system_from_text, system_to_text};
pub use xi::{
    chi_lower_bound, minimal_solving_code, xi_run, ChiCandidate, ChiEstimate, ChiMode,
    MinimalCodeOutcome, SearchEvent, XiConfig, XiRun,
};
