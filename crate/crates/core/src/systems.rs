//! Named system constructors: the squaring chain with its doubly-exponential
//! forced solution, the 12-variable core whose solutions all overshoot the
//! chain bound, and the padding construction that pins `x_1 = n` inside an
//! `n`-variable system.

use num_bigint::BigUint;

use crate::equation::{EnSystem, Equation, Tuple, VarIndex};
use crate::error::{Error, Result};

/// The chain system over `n >= 1` variables:
/// `{x_1 = 1}`, then `x_1 + x_1 = x_2`, then `x_{k-1} * x_{k-1} = x_k` for
/// `3 <= k <= n`. Its unique solution is `(1, 2, 4, 16, ..., 2^(2^(n-2)))`.
pub fn chain_system(n: VarIndex) -> Result<EnSystem> {
    if n == 0 {
        return Err(Error::invalid("chain system needs n >= 1"));
    }
    let mut eqs = vec![Equation::unit(1)?];
    if n >= 2 {
        eqs.push(Equation::sum(1, 1, 2)?);
    }
    for k in 3..=n {
        eqs.push(Equation::prod(k - 1, k - 1, k)?);
    }
    EnSystem::new(n, eqs)
}

/// The unique solution of [`chain_system`]: `x_1 = 1` and
/// `x_k = 2^(2^(k-2))` for `k >= 2`.
///
/// Entries are doubly exponential, so this is limited to `n <= 20` (the last
/// entry already has 2^18 bits there).
pub fn chain_solution(n: VarIndex) -> Result<Tuple> {
    if n == 0 {
        return Err(Error::invalid("chain solution needs n >= 1"));
    }
    if n > 20 {
        return Err(Error::invalid(
            "chain solution entries exceed desk scale for n > 20",
        ));
    }
    let mut values = vec![BigUint::from(1u32)];
    for k in 2..=n {
        values.push(BigUint::from(1u32) << (1usize << (k - 2)));
    }
    Tuple::new(values)
}

/// The system over `n >= 12` variables whose eleven-equation core forces
/// every solution's maximum above the chain bound, extended by the squaring
/// chain `x_{k-1} * x_{k-1} = x_k` for `13 <= k <= n`.
///
/// Only the constructor is provided; the minimal solutions involve
/// Pell-equation witnesses far beyond exhaustive search.
pub fn strict_bound_system(n: VarIndex) -> Result<EnSystem> {
    if n < 12 {
        return Err(Error::invalid("strict bound system needs n >= 12"));
    }
    let mut eqs = vec![
        Equation::unit(1)?,
        Equation::sum(1, 1, 2)?,
        Equation::sum(2, 2, 3)?,
        Equation::sum(1, 3, 4)?,
        Equation::prod(4, 4, 5)?,
        Equation::prod(5, 5, 6)?,
        Equation::prod(6, 7, 8)?,
        Equation::prod(8, 8, 9)?,
        Equation::prod(10, 10, 11)?,
        Equation::sum(11, 1, 12)?,
        Equation::prod(4, 9, 12)?,
    ];
    for k in 13..=n {
        eqs.push(Equation::prod(k - 1, k - 1, k)?);
    }
    EnSystem::new(n, eqs)
}

/// Pads a system `phi` over `s >= 3` variables out to `n >= 6 + 2s`
/// variables so that every solution of the result has `x_1 = n` and
/// `u = x_2 + 1`.
///
/// Variable layout, in index order:
///
/// * `1..=s` — the variables of `phi` (its equations are copied verbatim);
/// * `s+1..=s+z` — padding variables `z_i` with `z_i = 1`, where
///   `z = n - floor(n/2) - 3 - s`;
/// * next `floor(n/2)` indices — the counter chain `t_1 = 1`,
///   `t_1 + t_1 = t_2`, `t_{i-1} + t_1 = t_i`, forcing `t_i = i`;
/// * then `w` with `t_half + t_half = w` (so `w = 2 * floor(n/2)`);
/// * then `y` with `y + y = y` if `n` is even (forcing 0) or `y = 1` if `n`
///   is odd, together with `w + y = x_1` (forcing `x_1 = n`);
/// * finally `u = n` with `x_2 + t_1 = u` (forcing `u = x_2 + 1`).
pub fn pad_system(phi: &EnSystem, n: VarIndex) -> Result<EnSystem> {
    let s = phi.n();
    if s < 3 {
        return Err(Error::invalid(
            "padding needs a system over s >= 3 variables",
        ));
    }
    if n < 6 + 2 * s {
        return Err(Error::invalid(format!(
            "padding needs n >= 6 + 2s = {}, got {n}",
            6 + 2 * s
        )));
    }
    let half = n / 2;
    let z_count = n - half - 3 - s;

    let mut eqs: Vec<Equation> = phi.equations().copied().collect();
    for z in 1..=z_count {
        eqs.push(Equation::unit(s + z)?);
    }
    let t = |i: VarIndex| s + z_count + i;
    eqs.push(Equation::unit(t(1))?);
    eqs.push(Equation::sum(t(1), t(1), t(2))?);
    for i in 3..=half {
        eqs.push(Equation::sum(t(i - 1), t(1), t(i))?);
    }
    let w = t(half) + 1;
    let y = w + 1;
    let u = y + 1;
    debug_assert_eq!(u, n);
    eqs.push(Equation::sum(t(half), t(half), w)?);
    if n.is_multiple_of(2) {
        eqs.push(Equation::sum(y, y, y)?);
    } else {
        eqs.push(Equation::unit(y)?);
    }
    eqs.push(Equation::sum(w, y, 1)?);
    eqs.push(Equation::sum(2, t(1), u)?);

    // phi, the z units, the t chain (half equations), then w, y, the x_1
    // link and u.
    let expected = phi.len() + z_count as usize + half as usize + 4;
    let system = EnSystem::new(n, eqs)?;
    debug_assert_eq!(system.len(), expected, "padding equations must not collide");
    Ok(system)
}
