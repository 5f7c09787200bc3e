//! Equations of the three `E_n` forms, finite systems of them, tuples of
//! non-negative integers, and the duplicate relation.
//!
//! `E_n` is the set of all equations `x_k = 1`, `x_i + x_j = x_k` and
//! `x_i * x_j = x_k` with indices in `{1, ..., n}`. A tuple `y` is a
//! *duplicate* of a tuple `x` of the same length when every `E_n` relation
//! that holds of `x` also holds of `y`; the [`RelationSignature`] of a tuple
//! collects exactly the relations it satisfies, so duplication is signature
//! containment.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};

/// 1-based variable index.
pub type VarIndex = u32;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
enum Repr {
    Unit(VarIndex),
    Sum(VarIndex, VarIndex, VarIndex),
    Prod(VarIndex, VarIndex, VarIndex),
}

/// One relation of the three `E_n` forms.
///
/// Sum and product relations are commutative in `(i, j)`: constructors store
/// the canonical orientation `i <= j`, and equality, ordering and set
/// membership all compare canonical forms.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Equation {
    repr: Repr,
}

/// Canonical view of an [`Equation`] for pattern matching.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EquationKind {
    /// `x_k = 1`
    Unit { k: VarIndex },
    /// `x_i + x_j = x_k` with `i <= j`
    Sum {
        i: VarIndex,
        j: VarIndex,
        k: VarIndex,
    },
    /// `x_i * x_j = x_k` with `i <= j`
    Prod {
        i: VarIndex,
        j: VarIndex,
        k: VarIndex,
    },
}

impl Equation {
    /// The equation `x_k = 1`.
    pub fn unit(k: VarIndex) -> Result<Equation> {
        check_index(k)?;
        Ok(Equation {
            repr: Repr::Unit(k),
        })
    }

    /// The equation `x_i + x_j = x_k`, stored with `i <= j`.
    pub fn sum(i: VarIndex, j: VarIndex, k: VarIndex) -> Result<Equation> {
        check_index(i)?;
        check_index(j)?;
        check_index(k)?;
        Ok(Equation {
            repr: Repr::Sum(i.min(j), i.max(j), k),
        })
    }

    /// The equation `x_i * x_j = x_k`, stored with `i <= j`.
    pub fn prod(i: VarIndex, j: VarIndex, k: VarIndex) -> Result<Equation> {
        check_index(i)?;
        check_index(j)?;
        check_index(k)?;
        Ok(Equation {
            repr: Repr::Prod(i.min(j), i.max(j), k),
        })
    }

    pub fn kind(&self) -> EquationKind {
        match self.repr {
            Repr::Unit(k) => EquationKind::Unit { k },
            Repr::Sum(i, j, k) => EquationKind::Sum { i, j, k },
            Repr::Prod(i, j, k) => EquationKind::Prod { i, j, k },
        }
    }

    /// Largest variable index referenced by the equation.
    pub fn max_index(&self) -> VarIndex {
        match self.repr {
            Repr::Unit(k) => k,
            Repr::Sum(i, j, k) | Repr::Prod(i, j, k) => i.max(j).max(k),
        }
    }

    /// All variable indices referenced by the equation.
    pub fn indices(&self) -> Vec<VarIndex> {
        match self.repr {
            Repr::Unit(k) => vec![k],
            Repr::Sum(i, j, k) | Repr::Prod(i, j, k) => vec![i, j, k],
        }
    }

    /// Whether the equation holds under the given values (`values[0]` is
    /// `x_1`). An index beyond the end of the slice makes the equation fail,
    /// never panic.
    pub fn holds(&self, values: &[BigUint]) -> bool {
        let at = |i: VarIndex| values.get(i as usize - 1);
        match self.repr {
            Repr::Unit(k) => matches!(at(k), Some(v) if v.is_one()),
            Repr::Sum(i, j, k) => match (at(i), at(j), at(k)) {
                (Some(a), Some(b), Some(c)) => (a + b) == *c,
                _ => false,
            },
            Repr::Prod(i, j, k) => match (at(i), at(j), at(k)) {
                (Some(a), Some(b), Some(c)) => (a * b) == *c,
                _ => false,
            },
        }
    }

    /// `holds` over machine integers. Sums and products are evaluated in
    /// `u128`, so no `u64` input can overflow.
    pub(crate) fn holds_u64(&self, values: &[u64]) -> bool {
        let at = |i: VarIndex| values.get(i as usize - 1).copied();
        match self.repr {
            Repr::Unit(k) => at(k) == Some(1),
            Repr::Sum(i, j, k) => match (at(i), at(j), at(k)) {
                (Some(a), Some(b), Some(c)) => a as u128 + b as u128 == c as u128,
                _ => false,
            },
            Repr::Prod(i, j, k) => match (at(i), at(j), at(k)) {
                (Some(a), Some(b), Some(c)) => a as u128 * b as u128 == c as u128,
                _ => false,
            },
        }
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.repr {
            Repr::Unit(k) => write!(f, "x{k} = 1"),
            Repr::Sum(i, j, k) => write!(f, "x{i} + x{j} = x{k}"),
            Repr::Prod(i, j, k) => write!(f, "x{i} * x{j} = x{k}"),
        }
    }
}

fn check_index(i: VarIndex) -> Result<()> {
    if i == 0 {
        return Err(Error::invalid("variable indices are 1-based"));
    }
    Ok(())
}

/// A finite subset of `E_n` together with its variable count `n`.
///
/// The equation set may be empty; the empty system is satisfied by every
/// tuple of the right length. Systems are sets: multiplicity and insertion
/// order carry no meaning.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct EnSystem {
    n: VarIndex,
    equations: BTreeSet<Equation>,
}

impl EnSystem {
    /// A system over `n >= 1` variables. Every index occurring in the
    /// equations must be `<= n`.
    pub fn new(n: VarIndex, equations: impl IntoIterator<Item = Equation>) -> Result<EnSystem> {
        if n == 0 {
            return Err(Error::invalid("variable count must be positive"));
        }
        let equations: BTreeSet<Equation> = equations.into_iter().collect();
        if let Some(eq) = equations.iter().find(|eq| eq.max_index() > n) {
            return Err(Error::invalid(format!(
                "equation `{eq}` references an index above the variable count {n}"
            )));
        }
        Ok(EnSystem { n, equations })
    }

    /// A system whose variable count is the largest index used. Rejects the
    /// empty set, for which no count can be inferred.
    pub fn from_equations(equations: impl IntoIterator<Item = Equation>) -> Result<EnSystem> {
        let equations: BTreeSet<Equation> = equations.into_iter().collect();
        let n = equations.iter().map(|eq| eq.max_index()).max();
        match n {
            Some(n) => Ok(EnSystem { n, equations }),
            None => Err(Error::invalid(
                "cannot infer a variable count for an empty system",
            )),
        }
    }

    pub fn n(&self) -> VarIndex {
        self.n
    }

    pub fn equations(&self) -> impl Iterator<Item = &Equation> {
        self.equations.iter()
    }

    pub fn equation_set(&self) -> &BTreeSet<Equation> {
        &self.equations
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    /// Largest index occurring in the equations; 0 for the empty system.
    pub fn max_index(&self) -> VarIndex {
        self.equations
            .iter()
            .map(|eq| eq.max_index())
            .max()
            .unwrap_or(0)
    }

    /// Set of variable indices that occur in some equation.
    pub fn occurring_indices(&self) -> BTreeSet<VarIndex> {
        self.equations.iter().flat_map(|eq| eq.indices()).collect()
    }

    /// Whether every equation of the system holds under `x`.
    ///
    /// The tuple length must equal the system's variable count; a mismatch is
    /// a usage error.
    pub fn is_satisfied_by(&self, x: &Tuple) -> Result<bool> {
        if x.len() != self.n as usize {
            return Err(Error::invalid(format!(
                "tuple length {} does not match variable count {}",
                x.len(),
                self.n
            )));
        }
        Ok(self.equations.iter().all(|eq| eq.holds(x.values())))
    }

    pub(crate) fn is_satisfied_by_u64(&self, values: &[u64]) -> bool {
        self.equations.iter().all(|eq| eq.holds_u64(values))
    }
}

impl fmt::Display for EnSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        write!(f, "{{")?;
        for eq in &self.equations {
            if !first {
                write!(f, ", ")?;
            }
            write!(f, "{eq}")?;
            first = false;
        }
        write!(f, "}}")
    }
}

/// An assignment of arbitrary-precision non-negative integers to variables
/// `x_1, ..., x_n`. Always non-empty.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Tuple {
    values: Vec<BigUint>,
}

impl Tuple {
    pub fn new(values: Vec<BigUint>) -> Result<Tuple> {
        if values.is_empty() {
            return Err(Error::invalid("tuples must be non-empty"));
        }
        Ok(Tuple { values })
    }

    /// Convenience constructor from machine integers.
    ///
    /// Panics on an empty slice; use [`Tuple::new`] for fallible
    /// construction.
    pub fn from_u64s(values: &[u64]) -> Tuple {
        assert!(!values.is_empty(), "tuples must be non-empty");
        Tuple {
            values: values.iter().map(|&v| BigUint::from(v)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        // Construction rejects empty value lists.
        false
    }

    pub fn values(&self) -> &[BigUint] {
        &self.values
    }

    /// Largest entry.
    pub fn max_entry(&self) -> &BigUint {
        self.values.iter().max().expect("tuples are non-empty")
    }
}

impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.values {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        Ok(())
    }
}

/// The full set of `E_n` relations a tuple satisfies: the maximal system the
/// tuple solves. Sum and product triples are stored canonically (`i <= j`).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct RelationSignature {
    units: BTreeSet<VarIndex>,
    sums: BTreeSet<(VarIndex, VarIndex, VarIndex)>,
    prods: BTreeSet<(VarIndex, VarIndex, VarIndex)>,
}

impl RelationSignature {
    /// Signature of a tuple: all `k` with `x_k = 1`, all canonical triples
    /// `(i, j, k)` with `x_i + x_j = x_k`, and likewise for products.
    pub fn of(x: &Tuple) -> RelationSignature {
        let v = x.values();
        let n = v.len();
        let mut sig = RelationSignature::default();
        for (k, value) in v.iter().enumerate() {
            if value.is_one() {
                sig.units.insert(k as VarIndex + 1);
            }
        }
        for i in 0..n {
            for j in i..n {
                let sum = &v[i] + &v[j];
                let prod = &v[i] * &v[j];
                for (k, value) in v.iter().enumerate() {
                    if sum == *value {
                        sig.sums
                            .insert((i as VarIndex + 1, j as VarIndex + 1, k as VarIndex + 1));
                    }
                    if prod == *value {
                        sig.prods
                            .insert((i as VarIndex + 1, j as VarIndex + 1, k as VarIndex + 1));
                    }
                }
            }
        }
        sig
    }

    pub(crate) fn of_u64(values: &[u64]) -> RelationSignature {
        let n = values.len();
        let mut sig = RelationSignature::default();
        for (k, &value) in values.iter().enumerate() {
            if value == 1 {
                sig.units.insert(k as VarIndex + 1);
            }
        }
        for i in 0..n {
            for j in i..n {
                let sum = values[i] as u128 + values[j] as u128;
                let prod = values[i] as u128 * values[j] as u128;
                for (k, &value) in values.iter().enumerate() {
                    if sum == value as u128 {
                        sig.sums
                            .insert((i as VarIndex + 1, j as VarIndex + 1, k as VarIndex + 1));
                    }
                    if prod == value as u128 {
                        sig.prods
                            .insert((i as VarIndex + 1, j as VarIndex + 1, k as VarIndex + 1));
                    }
                }
            }
        }
        sig
    }

    pub fn units(&self) -> &BTreeSet<VarIndex> {
        &self.units
    }

    pub fn sums(&self) -> &BTreeSet<(VarIndex, VarIndex, VarIndex)> {
        &self.sums
    }

    pub fn prods(&self) -> &BTreeSet<(VarIndex, VarIndex, VarIndex)> {
        &self.prods
    }

    /// Componentwise containment: `other` is a subset of `self`.
    pub fn contains(&self, other: &RelationSignature) -> bool {
        other.units.is_subset(&self.units)
            && other.sums.is_subset(&self.sums)
            && other.prods.is_subset(&self.prods)
    }

    /// Whether every equation of `system` appears in the signature.
    pub fn contains_system(&self, system: &EnSystem) -> bool {
        system.equations().all(|eq| match eq.kind() {
            EquationKind::Unit { k } => self.units.contains(&k),
            EquationKind::Sum { i, j, k } => self.sums.contains(&(i, j, k)),
            EquationKind::Prod { i, j, k } => self.prods.contains(&(i, j, k)),
        })
    }

    /// The signature as a system over `n` variables: the maximal system the
    /// signed tuple solves.
    pub fn to_system(&self, n: VarIndex) -> Result<EnSystem> {
        let mut eqs = Vec::new();
        for &k in &self.units {
            eqs.push(Equation::unit(k)?);
        }
        for &(i, j, k) in &self.sums {
            eqs.push(Equation::sum(i, j, k)?);
        }
        for &(i, j, k) in &self.prods {
            eqs.push(Equation::prod(i, j, k)?);
        }
        EnSystem::new(n, eqs)
    }
}

/// Signature of `x`: exactly the units, sums and products true of `x`.
pub fn relations_of(x: &Tuple) -> RelationSignature {
    RelationSignature::of(x)
}

/// Every equation of `E_n` in canonical form: `n` units plus
/// `n^2 (n + 1) / 2` sums and as many products.
pub fn all_equations(n: VarIndex) -> Result<Vec<Equation>> {
    if n == 0 {
        return Err(Error::invalid("E_n needs n >= 1"));
    }
    let mut eqs = Vec::new();
    for k in 1..=n {
        eqs.push(Equation::unit(k)?);
    }
    for i in 1..=n {
        for j in i..=n {
            for k in 1..=n {
                eqs.push(Equation::sum(i, j, k)?);
                eqs.push(Equation::prod(i, j, k)?);
            }
        }
    }
    Ok(eqs)
}

/// Whether `y` is a duplicate of `x`: every relation of `x` holds of `y`.
/// Requires tuples of equal length.
pub fn is_duplicate(x: &Tuple, y: &Tuple) -> Result<bool> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "duplicate check requires equal lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(RelationSignature::of(y).contains(&RelationSignature::of(x)))
}
