//! Prime-factorization coding between integers and equation systems or
//! candidate tuples.
//!
//! A system code `n` is read off the factorization of `210 * (n + 1)`
//! (exponents of the distinct primes in increasing order, consumed four at a
//! time: index slots plus a form marker). A tuple code `m >= 2` decodes to
//! the exponents-minus-one of the distinct primes dividing `m`. The encoders
//! are canonical right inverses: they return the *smallest* integer decoding
//! to the given object.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::equation::{EnSystem, Equation, EquationKind, Tuple};
use crate::error::{Error, Result};

/// Largest trial divisor before factorization gives up. Codes built from
/// small primes (everything this crate produces) factor long before this.
const TRIAL_DIVISOR_LIMIT: u64 = 10_000_000;

/// Factor a positive machine integer; factors in increasing order.
pub fn factorize_u64(mut v: u64) -> Vec<(u64, u32)> {
    assert!(v >= 1, "factorization needs a positive integer");
    let mut out = Vec::new();
    let mut d = 2u64;
    while d as u128 * d as u128 <= v as u128 {
        if v.is_multiple_of(d) {
            let mut e = 0u32;
            while v.is_multiple_of(d) {
                v /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d = next_divisor(d);
    }
    if v > 1 {
        out.push((v, 1));
    }
    out
}

fn next_divisor(d: u64) -> u64 {
    match d {
        2 => 3,
        3 => 5,
        d if d % 6 == 5 => d + 2,
        d => d + 4,
    }
}

/// Factor a positive integer by trial division; factors in increasing order.
/// Fails with a resource error if a cofactor resists every divisor up to
/// 10^7.
pub fn factorize(value: &BigUint) -> Result<Vec<(BigUint, u32)>> {
    if value.is_zero() {
        return Err(Error::invalid("factorization needs a positive integer"));
    }
    if let Some(v) = value.to_u64() {
        return Ok(factorize_u64(v)
            .into_iter()
            .map(|(p, e)| (BigUint::from(p), e))
            .collect());
    }

    let mut v = value.clone();
    let mut out: Vec<(BigUint, u32)> = Vec::new();
    let mut d = 2u64;
    loop {
        if let Some(small) = v.to_u64() {
            // All remaining factors exceed every divisor tried so far.
            out.extend(
                factorize_u64(small)
                    .into_iter()
                    .map(|(p, e)| (BigUint::from(p), e)),
            );
            return Ok(out);
        }
        if d > TRIAL_DIVISOR_LIMIT {
            return Err(Error::ResourceCap {
                needed: d,
                cap: TRIAL_DIVISOR_LIMIT,
            });
        }
        if (&v % d).is_zero() {
            let mut e = 0u32;
            while (&v % d).is_zero() {
                v /= d;
                e += 1;
            }
            out.push((BigUint::from(d), e));
        }
        d = next_divisor(d);
    }
}

/// The exponent sequence `t(1), ..., t(s)` of the distinct primes dividing a
/// positive integer, in increasing prime order. Blocks are consumed four at
/// a time; a trailing remainder of fewer than four is ignored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExponentBlocks {
    exponents: Vec<u32>,
}

impl ExponentBlocks {
    pub fn of(value: &BigUint) -> Result<ExponentBlocks> {
        let exponents = factorize(value)?.into_iter().map(|(_, e)| e).collect();
        Ok(ExponentBlocks { exponents })
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn blocks(&self) -> impl Iterator<Item = [u32; 4]> + '_ {
        self.exponents
            .chunks_exact(4)
            .map(|c| [c[0], c[1], c[2], c[3]])
    }
}

/// Decode a system code: factor `210 * (n + 1)` and turn each block of four
/// exponents `(a, b, c, marker)` into `x_a = 1` (marker 1),
/// `x_a + x_b = x_c` (marker 2) or `x_a * x_b = x_c` (marker greater than 2).
/// Every `n` decodes to a non-empty system; the variable count is the
/// largest index used.
pub fn decode_system(n: &BigUint) -> Result<EnSystem> {
    let code = BigUint::from(210u32) * (n + 1u32);
    let blocks = ExponentBlocks::of(&code)?;
    let mut equations = Vec::new();
    for [a, b, c, marker] in blocks.blocks() {
        let eq = match marker {
            1 => Equation::unit(a),
            2 => Equation::sum(a, b, c),
            _ => Equation::prod(a, b, c),
        }?;
        equations.push(eq);
    }
    EnSystem::from_equations(equations)
}

/// Block sizes beyond this make exact minimal encoding (which tries every
/// equation ordering) unreasonable.
const MAX_ENCODABLE_EQUATIONS: usize = 8;

/// Encode a non-empty system as the smallest `n` with
/// `decode_system(n) == *system` (comparing canonical sets).
///
/// Every ordering of the equations is tried; within a block the larger of
/// the two commutative indices goes on the smaller prime, unit blocks fill
/// their ignored slots with exponent 1, and products use marker 3.
pub fn encode_system(system: &EnSystem) -> Result<BigUint> {
    if system.is_empty() {
        return Err(Error::invalid("the empty system has no code"));
    }
    if system.len() > MAX_ENCODABLE_EQUATIONS {
        return Err(Error::invalid(format!(
            "exact minimal encoding supports at most {MAX_ENCODABLE_EQUATIONS} equations, got {}",
            system.len()
        )));
    }

    let blocks: Vec<[u32; 4]> = system
        .equations()
        .map(|eq| match eq.kind() {
            EquationKind::Unit { k } => [k, 1, 1, 1],
            EquationKind::Sum { i, j, k } => [j, i, k, 2],
            EquationKind::Prod { i, j, k } => [j, i, k, 3],
        })
        .collect();
    let primes = first_primes(4 * blocks.len());

    let mut best: Option<BigUint> = None;
    let mut order: Vec<usize> = (0..blocks.len()).collect();
    permute(&mut order, 0, &mut |perm| {
        let mut code = BigUint::one();
        for (slot, &block_idx) in perm.iter().enumerate() {
            for (offset, &exp) in blocks[block_idx].iter().enumerate() {
                code *= BigUint::from(primes[4 * slot + offset]).pow(exp);
            }
        }
        if best.as_ref().is_none_or(|b| code < *b) {
            best = Some(code);
        }
    });

    let code = best.expect("at least one ordering exists");
    debug_assert!((&code % 210u32).is_zero());
    Ok(code / 210u32 - 1u32)
}

fn permute(items: &mut Vec<usize>, start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == items.len() {
        visit(items);
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permute(items, start + 1, visit);
        items.swap(start, i);
    }
}

/// Decode a tuple code `m >= 2`: the exponents-minus-one of the distinct
/// primes dividing `m`, in increasing prime order.
pub fn decode_tuple(m: &BigUint) -> Result<Tuple> {
    if m < &BigUint::from(2u32) {
        return Err(Error::invalid("tuple codes start at 2"));
    }
    let values: Vec<BigUint> = factorize(m)?
        .into_iter()
        .map(|(_, e)| BigUint::from(e - 1))
        .collect();
    Tuple::new(values)
}

/// Tuple-code decoding over machine integers, for search loops.
pub(crate) fn decode_tuple_u64(m: u64) -> Vec<u64> {
    debug_assert!(m >= 2);
    factorize_u64(m)
        .into_iter()
        .map(|(_, e)| (e - 1) as u64)
        .collect()
}

/// Encode a tuple as the smallest integer decoding to it:
/// the product of `p_i ^ (w_i + 1)` over the first `len(w)` primes.
pub fn encode_tuple(w: &Tuple) -> BigUint {
    let primes = first_primes(w.len());
    let mut code = BigUint::one();
    for (&p, v) in primes.iter().zip(w.values()) {
        let e = (v + 1u32)
            .to_u32()
            .expect("tuple entries beyond desk scale");
        code *= BigUint::from(p).pow(e);
    }
    code
}

/// The variable-normalization rule applied before searching: if the largest
/// variable index occurring in the system exceeds the number of distinct
/// occurring variables, continue as for `{x_1 = 1}`.
pub fn normalize(system: &EnSystem) -> Result<EnSystem> {
    if system.is_empty() {
        return Err(Error::invalid("normalization needs a non-empty system"));
    }
    let occurring = system.occurring_indices();
    let max = *occurring.iter().next_back().expect("non-empty");
    if max as usize > occurring.len() {
        EnSystem::new(1, [Equation::unit(1)?])
    } else {
        Ok(system.clone())
    }
}

/// The first `count` primes.
pub fn first_primes(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut candidate = 2u64;
    while primes.len() < count {
        if is_prime_u64(candidate) {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes
}

fn is_prime_u64(v: u64) -> bool {
    if v < 2 {
        return false;
    }
    let mut d = 2u64;
    while d as u128 * d as u128 <= v as u128 {
        if v.is_multiple_of(d) {
            return false;
        }
        d = next_divisor(d);
    }
    true
}
