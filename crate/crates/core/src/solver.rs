//! Bounded brute-force enumeration of system solutions.
//!
//! The search assigns variables in index order and checks each equation as
//! soon as its last variable is assigned, so forced chains collapse instead
//! of exploding the search tree. Values range over `{0, ..., max_value}`;
//! arithmetic is exact (`u128` intermediates).

use crate::equation::{EnSystem, Equation, Tuple};
use crate::error::{Error, Result};

/// All solutions of `system` with every entry in `{0, ..., max_value}`.
/// `node_cap` bounds the number of assignments tried.
pub fn solutions_in_box(system: &EnSystem, max_value: u64, node_cap: u64) -> Result<Vec<Tuple>> {
    solutions_extending(system, &[], max_value, node_cap)
}

/// All solutions of `system` whose first entries equal `prefix` and whose
/// remaining entries lie in `{0, ..., max_value}`. Prefix entries are not
/// required to respect the bound.
pub fn solutions_extending(
    system: &EnSystem,
    prefix: &[u64],
    max_value: u64,
    node_cap: u64,
) -> Result<Vec<Tuple>> {
    let mut out = Vec::new();
    visit_solutions(system, prefix, max_value, node_cap, &mut |values| {
        out.push(Tuple::from_u64s(values));
    })?;
    Ok(out)
}

/// Number of solutions, as [`solutions_extending`] but without materializing
/// the tuples.
pub fn count_solutions_extending(
    system: &EnSystem,
    prefix: &[u64],
    max_value: u64,
    node_cap: u64,
) -> Result<u64> {
    let mut count = 0u64;
    visit_solutions(system, prefix, max_value, node_cap, &mut |_| count += 1)?;
    Ok(count)
}

fn visit_solutions(
    system: &EnSystem,
    prefix: &[u64],
    max_value: u64,
    node_cap: u64,
    emit: &mut dyn FnMut(&[u64]),
) -> Result<()> {
    let n = system.n() as usize;
    if prefix.len() > n {
        return Err(Error::invalid(format!(
            "prefix length {} exceeds variable count {n}",
            prefix.len()
        )));
    }

    // Bucket equations by the position at which they become checkable.
    let mut by_last: Vec<Vec<&Equation>> = vec![Vec::new(); n + 1];
    for eq in system.equations() {
        by_last[eq.max_index() as usize].push(eq);
    }

    let mut values: Vec<u64> = prefix.to_vec();
    // Equations fully covered by the prefix are checked once up front.
    for bucket in by_last.iter().take(prefix.len() + 1) {
        for eq in bucket {
            if !eq.holds_u64(&values) {
                return Ok(());
            }
        }
    }

    let mut nodes = 0u64;
    search(
        &by_last,
        n,
        max_value,
        node_cap,
        &mut nodes,
        &mut values,
        emit,
    )
}

fn search(
    by_last: &[Vec<&Equation>],
    n: usize,
    max_value: u64,
    node_cap: u64,
    nodes: &mut u64,
    values: &mut Vec<u64>,
    emit: &mut dyn FnMut(&[u64]),
) -> Result<()> {
    if values.len() == n {
        emit(values);
        return Ok(());
    }
    let pos = values.len() + 1;
    for v in 0..=max_value {
        *nodes += 1;
        if *nodes > node_cap {
            return Err(Error::ResourceCap {
                needed: *nodes,
                cap: node_cap,
            });
        }
        values.push(v);
        if by_last[pos].iter().all(|eq| eq.holds_u64(values)) {
            search(by_last, n, max_value, node_cap, nodes, values, emit)?;
        }
        values.pop();
    }
    Ok(())
}

/// Default assignment budget, generous for desk-scale boxes.
pub const DEFAULT_NODE_CAP: u64 = 50_000_000;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{chain_solution, chain_system};

    #[test]
    fn chain_has_unique_solution_in_its_box() {
        for n in 1..=4u32 {
            let system = chain_system(n).unwrap();
            let bound = match n {
                1 => 1,
                n => 1u64 << (1 << (n - 2)),
            };
            let sols = solutions_in_box(&system, bound, DEFAULT_NODE_CAP).unwrap();
            assert_eq!(sols.len(), 1, "n = {n}");
            assert_eq!(sols[0], chain_solution(n).unwrap());
        }
    }

    #[test]
    fn forced_equations_prune_immediately() {
        // x_1 = 1, x_1 + x_1 = x_2: only (1, 2) in any box.
        let system = chain_system(2).unwrap();
        let sols = solutions_in_box(&system, 50, 1_000_000).unwrap();
        assert_eq!(sols, vec![Tuple::from_u64s(&[1, 2])]);
    }

    #[test]
    fn prefix_restricts_search() {
        let system = chain_system(2).unwrap();
        assert_eq!(
            count_solutions_extending(&system, &[1], 10, 10_000).unwrap(),
            1
        );
        assert_eq!(
            count_solutions_extending(&system, &[2], 10, 10_000).unwrap(),
            0
        );
    }

    #[test]
    fn node_cap_is_enforced() {
        let system = EnSystem::new(4, []).unwrap();
        let err = solutions_in_box(&system, 9, 100).unwrap_err();
        assert!(matches!(err, Error::ResourceCap { .. }));
    }

    #[test]
    fn empty_system_enumerates_whole_box() {
        let system = EnSystem::new(2, []).unwrap();
        let sols = solutions_in_box(&system, 2, 10_000).unwrap();
        assert_eq!(sols.len(), 9);
    }
}
