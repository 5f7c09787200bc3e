//! Compilation of multivariate integer polynomials into equation systems
//! with the same number of solutions.
//!
//! A polynomial `D` is split as `P - Q` with `P`, `Q` having non-negative
//! coefficients. A straight-line program over the `E_n` forms computes each
//! monomial by repeated products and each coefficient by a double-and-add
//! chain from a designated one-variable; both side totals are routed into
//! the same final variable, whose two defining equations coincide exactly
//! when `D` vanishes. Every auxiliary variable is the output of exactly one
//! witness step, so the extension of a root is unique by construction.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::bounds::SearchLimits;
use crate::equation::{EnSystem, Equation, Tuple, VarIndex};
use crate::error::{Error, Result};
use crate::solver;

/// A sparse integer polynomial in variables `x_1, ..., x_p`.
///
/// Every variable up to `p` must actually occur (degree at least 1); no zero
/// coefficients are stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Polynomial {
    p: u32,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl Polynomial {
    /// Build a polynomial from exponent-vector/coefficient pairs. Duplicate
    /// monomials are combined; zero coefficients are dropped. Every exponent
    /// vector must have length `p`, and every variable must occur in some
    /// surviving term.
    pub fn new(p: u32, terms: impl IntoIterator<Item = (Vec<u32>, BigInt)>) -> Result<Polynomial> {
        let mut combined: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
        for (exps, coeff) in terms {
            if exps.len() != p as usize {
                return Err(Error::invalid(format!(
                    "exponent vector length {} does not match variable count {p}",
                    exps.len()
                )));
            }
            let entry = combined.entry(exps).or_insert_with(BigInt::zero);
            *entry += coeff;
        }
        combined.retain(|_, c| !c.is_zero());

        for i in 0..p as usize {
            if !combined.keys().any(|exps| exps[i] >= 1) {
                return Err(Error::invalid(format!(
                    "variable x{} has degree 0; every variable up to x{p} must occur",
                    i + 1
                )));
            }
        }
        Ok(Polynomial { p, terms: combined })
    }

    /// Parse expressions like `x1 - x2*x2`, `3*x1^2 + x2 - 5`. Grammar:
    /// integer coefficients, `+ - *`, `x<K>` variables, `^` for powers of a
    /// variable.
    pub fn parse(expr: &str) -> Result<Polynomial> {
        let tokens = tokenize(expr)?;
        let raw_terms = parse_terms(&tokens)?;

        // Fold duplicates before fixing the variable count, so cancelled
        // variables do not inflate `p`.
        let width = raw_terms
            .iter()
            .map(|(exps, _)| exps.len())
            .max()
            .unwrap_or(0);
        let mut combined: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
        for (mut exps, coeff) in raw_terms {
            exps.resize(width, 0);
            *combined.entry(exps).or_insert_with(BigInt::zero) += coeff;
        }
        combined.retain(|_, c| !c.is_zero());

        let p = combined
            .keys()
            .flat_map(|exps| {
                exps.iter()
                    .enumerate()
                    .filter(|(_, &e)| e >= 1)
                    .map(|(i, _)| i as u32 + 1)
            })
            .max()
            .unwrap_or(0);
        let terms = combined
            .into_iter()
            .map(|(mut exps, coeff)| {
                exps.truncate(p as usize);
                (exps, coeff)
            })
            .collect::<Vec<_>>();
        Polynomial::new(p, terms)
    }

    pub fn var_count(&self) -> u32 {
        self.p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigInt)> {
        self.terms.iter()
    }

    pub fn degree_in(&self, var: VarIndex) -> u32 {
        self.terms
            .keys()
            .map(|exps| exps.get(var as usize - 1).copied().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    /// Evaluate at a point with non-negative coordinates.
    pub fn eval_nat(&self, point: &[BigUint]) -> Result<BigInt> {
        if point.len() != self.p as usize {
            return Err(Error::invalid(format!(
                "evaluation point has {} coordinates, expected {}",
                point.len(),
                self.p
            )));
        }
        let mut total = BigInt::zero();
        for (exps, coeff) in &self.terms {
            let mut value = coeff.clone();
            for (x, &e) in point.iter().zip(exps) {
                if e > 0 {
                    value *= BigInt::from(x.pow(e));
                }
            }
            total += value;
        }
        Ok(total)
    }
}

fn tokenize(expr: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut chars = expr.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            ' ' | '\t' | '\n' => {
                chars.next();
            }
            '+' => {
                chars.next();
                tokens.push(Token::Plus);
            }
            '-' => {
                chars.next();
                tokens.push(Token::Minus);
            }
            '*' => {
                chars.next();
                tokens.push(Token::Star);
            }
            '^' => {
                chars.next();
                tokens.push(Token::Caret);
            }
            '0'..='9' => {
                let mut digits = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() {
                        digits.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                let value: BigUint = digits.parse().expect("digits only");
                tokens.push(Token::Int(value));
            }
            'x' => {
                chars.next();
                let mut digits = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() {
                        digits.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                let idx: u32 = digits
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad variable `x{digits}`")))?;
                if idx == 0 {
                    return Err(Error::Parse("variables start at x1".into()));
                }
                tokens.push(Token::Var(idx));
            }
            other => {
                return Err(Error::Parse(format!("unexpected character `{other}`")));
            }
        }
    }
    Ok(tokens)
}

#[derive(Clone, PartialEq, Eq, Debug)]
enum Token {
    Int(BigUint),
    Var(u32),
    Plus,
    Minus,
    Star,
    Caret,
}

/// `expr := [sign] term (sign term)*`, `term := factor ('*' factor)*`,
/// `factor := INT | VAR ['^' INT]`.
fn parse_terms(tokens: &[Token]) -> Result<Vec<(Vec<u32>, BigInt)>> {
    let mut terms = Vec::new();
    let mut pos = 0usize;
    let mut sign = BigInt::one();
    if tokens.is_empty() {
        return Err(Error::Parse("empty polynomial expression".into()));
    }
    loop {
        // optional sign run before a term
        while pos < tokens.len() {
            match tokens[pos] {
                Token::Plus => pos += 1,
                Token::Minus => {
                    sign = -sign;
                    pos += 1;
                }
                _ => break,
            }
        }
        if pos >= tokens.len() {
            return Err(Error::Parse("expected a term".into()));
        }
        let (term, next) = parse_term(tokens, pos)?;
        let (exps, coeff) = term;
        terms.push((exps, coeff * &sign));
        sign = BigInt::one();
        pos = next;
        if pos == tokens.len() {
            return Ok(terms);
        }
        match tokens[pos] {
            Token::Plus | Token::Minus => {}
            _ => {
                return Err(Error::Parse("expected `+` or `-` between terms".into()));
            }
        }
    }
}

fn parse_term(tokens: &[Token], mut pos: usize) -> Result<((Vec<u32>, BigInt), usize)> {
    let mut coeff = BigInt::one();
    let mut exps: Vec<u32> = Vec::new();
    loop {
        match tokens.get(pos) {
            Some(Token::Int(v)) => {
                coeff *= BigInt::from(v.clone());
                pos += 1;
            }
            Some(Token::Var(idx)) => {
                let idx = *idx as usize;
                pos += 1;
                let mut power = 1u32;
                if let Some(Token::Caret) = tokens.get(pos) {
                    pos += 1;
                    match tokens.get(pos) {
                        Some(Token::Int(e)) => {
                            power = e
                                .to_u32()
                                .ok_or_else(|| Error::Parse("exponent too large".into()))?;
                            pos += 1;
                        }
                        _ => return Err(Error::Parse("expected an exponent after `^`".into())),
                    }
                }
                if exps.len() < idx {
                    exps.resize(idx, 0);
                }
                exps[idx - 1] += power;
            }
            _ => return Err(Error::Parse("expected a factor".into())),
        }
        match tokens.get(pos) {
            Some(Token::Star) => pos += 1,
            _ => return Ok(((exps, coeff), pos)),
        }
    }
}

/// One assignment of the deterministic witness program.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum WitnessStep {
    /// `target := 1` (constrained by `x_target = 1`)
    One { target: VarIndex },
    /// `target := 0` (constrained by `x_target + x_target = x_target`)
    Zero { target: VarIndex },
    /// `target := a + b`
    Add {
        target: VarIndex,
        a: VarIndex,
        b: VarIndex,
    },
    /// `target := a * b`
    Mul {
        target: VarIndex,
        a: VarIndex,
        b: VarIndex,
    },
}

impl WitnessStep {
    pub fn target(&self) -> VarIndex {
        match *self {
            WitnessStep::One { target }
            | WitnessStep::Zero { target }
            | WitnessStep::Add { target, .. }
            | WitnessStep::Mul { target, .. } => target,
        }
    }
}

/// A compiled polynomial: the system over `n > p` variables and the witness
/// program extending any assignment of `x_1, ..., x_p`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CompilationResult {
    pub p: u32,
    pub n: u32,
    pub system: EnSystem,
    pub witness_program: Vec<WitnessStep>,
}

struct Builder {
    next: VarIndex,
    steps: Vec<WitnessStep>,
    equations: Vec<Equation>,
    sums: HashMap<(VarIndex, VarIndex), VarIndex>,
    prods: HashMap<(VarIndex, VarIndex), VarIndex>,
    one: Option<VarIndex>,
    zero: Option<VarIndex>,
}

impl Builder {
    fn new(p: u32) -> Builder {
        Builder {
            next: p + 1,
            steps: Vec::new(),
            equations: Vec::new(),
            sums: HashMap::new(),
            prods: HashMap::new(),
            one: None,
            zero: None,
        }
    }

    fn fresh(&mut self) -> VarIndex {
        let v = self.next;
        self.next += 1;
        v
    }

    fn one(&mut self) -> Result<VarIndex> {
        if let Some(v) = self.one {
            return Ok(v);
        }
        let v = self.fresh();
        self.equations.push(Equation::unit(v)?);
        self.steps.push(WitnessStep::One { target: v });
        self.one = Some(v);
        Ok(v)
    }

    fn zero(&mut self) -> Result<VarIndex> {
        if let Some(v) = self.zero {
            return Ok(v);
        }
        let v = self.fresh();
        // z + z = z forces z = 0 over the naturals and any ring extension.
        self.equations.push(Equation::sum(v, v, v)?);
        self.steps.push(WitnessStep::Zero { target: v });
        self.zero = Some(v);
        Ok(v)
    }

    fn add(&mut self, a: VarIndex, b: VarIndex) -> Result<VarIndex> {
        let key = (a.min(b), a.max(b));
        if let Some(&v) = self.sums.get(&key) {
            return Ok(v);
        }
        let v = self.fresh();
        self.equations.push(Equation::sum(a, b, v)?);
        self.steps.push(WitnessStep::Add { target: v, a, b });
        self.sums.insert(key, v);
        Ok(v)
    }

    fn mul(&mut self, a: VarIndex, b: VarIndex) -> Result<VarIndex> {
        let key = (a.min(b), a.max(b));
        if let Some(&v) = self.prods.get(&key) {
            return Ok(v);
        }
        let v = self.fresh();
        self.equations.push(Equation::prod(a, b, v)?);
        self.steps.push(WitnessStep::Mul { target: v, a, b });
        self.prods.insert(key, v);
        Ok(v)
    }

    fn power(&mut self, base: VarIndex, e: u32) -> Result<VarIndex> {
        debug_assert!(e >= 1);
        if e == 1 {
            Ok(base)
        } else if e.is_multiple_of(2) {
            let half = self.power(base, e / 2)?;
            self.mul(half, half)
        } else {
            let almost = self.power(base, e - 1)?;
            self.mul(almost, base)
        }
    }

    /// Variable carrying the monomial value, or `None` for the constant
    /// monomial.
    fn monomial(&mut self, exps: &[u32]) -> Result<Option<VarIndex>> {
        let mut acc: Option<VarIndex> = None;
        for (i, &e) in exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let pw = self.power(i as VarIndex + 1, e)?;
            acc = Some(match acc {
                None => pw,
                Some(a) => self.mul(a, pw)?,
            });
        }
        Ok(acc)
    }

    /// Double-and-add chain multiplying `base` by a positive constant.
    fn scale(&mut self, coeff: &BigUint, base: VarIndex) -> Result<VarIndex> {
        debug_assert!(!coeff.is_zero());
        if coeff.is_one() {
            return Ok(base);
        }
        let bits = coeff.bits();
        let mut acc = base;
        for i in (0..bits - 1).rev() {
            acc = self.add(acc, acc)?;
            if coeff.bit(i) {
                acc = self.add(acc, base)?;
            }
        }
        Ok(acc)
    }

    fn term(&mut self, exps: &[u32], magnitude: &BigUint) -> Result<VarIndex> {
        let base = match self.monomial(exps)? {
            Some(v) => v,
            None => self.one()?,
        };
        self.scale(magnitude, base)
    }

    /// The pair summed by a side's final equation: the side total written as
    /// `a + b`. Sides with fewer than two terms are padded with the zero
    /// variable.
    fn side_args(&mut self, terms: &[VarIndex]) -> Result<(VarIndex, VarIndex)> {
        match terms {
            [] => {
                let z = self.zero()?;
                Ok((z, z))
            }
            [only] => {
                let z = self.zero()?;
                Ok((*only, z))
            }
            _ => {
                let mut acc = terms[0];
                for &t in &terms[1..terms.len() - 1] {
                    acc = self.add(acc, t)?;
                }
                Ok((acc, terms[terms.len() - 1]))
            }
        }
    }
}

/// Compile `D` into a system with the same number of solutions over the
/// non-negative integers (and over any ring extending the integers: the
/// construction uses only `+`, `*` and `1`).
pub fn compile(d: &Polynomial) -> Result<CompilationResult> {
    if d.p == 0 {
        return Err(Error::invalid(
            "constant polynomials violate the degree hypothesis (no variables)",
        ));
    }

    let mut builder = Builder::new(d.p);
    let mut pos_terms = Vec::new();
    let mut neg_terms = Vec::new();
    for (exps, coeff) in &d.terms {
        let var = builder.term(exps, coeff.magnitude())?;
        if coeff.is_positive() {
            pos_terms.push(var);
        } else {
            neg_terms.push(var);
        }
    }

    let (pa, pb) = builder.side_args(&pos_terms)?;
    let (qa, qb) = builder.side_args(&neg_terms)?;
    let k = builder.fresh();
    // The positive side defines k's witness value; the negative side's copy
    // of the equation is the equality check.
    builder.equations.push(Equation::sum(pa, pb, k)?);
    builder.steps.push(WitnessStep::Add {
        target: k,
        a: pa,
        b: pb,
    });
    builder.equations.push(Equation::sum(qa, qb, k)?);

    let n = builder.next - 1;
    let equation_count = builder.equations.len();
    let system = EnSystem::new(n, builder.equations)?;
    debug_assert_eq!(system.len(), equation_count, "gadgets must not collide");
    Ok(CompilationResult {
        p: d.p,
        n,
        system,
        witness_program: builder.steps,
    })
}

/// Run the witness program on an assignment of the first `p` variables.
/// The result solves the compiled system exactly when `D` vanishes at the
/// point; the auxiliary values exist either way, only the final equality can
/// fail.
pub fn evaluate_witness(result: &CompilationResult, x: &Tuple) -> Result<Tuple> {
    if x.len() != result.p as usize {
        return Err(Error::invalid(format!(
            "witness evaluation needs {} coordinates, got {}",
            result.p,
            x.len()
        )));
    }
    let mut values: Vec<BigUint> = x.values().to_vec();
    values.resize(result.n as usize, BigUint::zero());
    for step in &result.witness_program {
        let value = match *step {
            WitnessStep::One { .. } => BigUint::one(),
            WitnessStep::Zero { .. } => BigUint::zero(),
            WitnessStep::Add { a, b, .. } => &values[a as usize - 1] + &values[b as usize - 1],
            WitnessStep::Mul { a, b, .. } => &values[a as usize - 1] * &values[b as usize - 1],
        };
        values[step.target() as usize - 1] = value;
    }
    Tuple::new(values)
}

/// Check that `D = 0` and the compiled system have the same number of
/// solutions over `{0, ..., box_bound - 1}^p`.
///
/// Three counts must agree: direct evaluation of `D`, witness tuples that
/// solve the system, and an independent bounded search counting every
/// extension of every point (which also verifies that no point has more
/// than one extension).
pub fn count_equivalence(d: &Polynomial, box_bound: u64, limits: &SearchLimits) -> Result<bool> {
    if box_bound == 0 {
        return Err(Error::invalid("count equivalence needs a positive box"));
    }
    let compiled = compile(d)?;
    let points = (box_bound as u128)
        .checked_pow(d.p)
        .filter(|&c| c <= limits.pair_check_cap as u128)
        .ok_or(Error::ResourceCap {
            needed: u64::MAX,
            cap: limits.pair_check_cap,
        })?;
    let _ = points;

    let mut direct = 0u64;
    let mut via_witness = 0u64;
    let mut via_search = 0u64;

    let mut point = vec![0u64; d.p as usize];
    'outer: loop {
        let coords: Vec<BigUint> = point.iter().map(|&v| BigUint::from(v)).collect();
        let dx = d.eval_nat(&coords)?;
        if dx.is_zero() {
            direct += 1;
        }

        let witness = evaluate_witness(&compiled, &Tuple::new(coords)?)?;
        let solves = compiled.system.is_satisfied_by(&witness)?;
        if solves {
            via_witness += 1;
        }

        let mut reach = 0u64;
        for v in witness.values() {
            let v = v
                .to_u64()
                .ok_or_else(|| Error::invalid("witness values exceed the bounded search range"))?;
            reach = reach.max(v);
        }
        let extensions = solver::count_solutions_extending(
            &compiled.system,
            &point,
            reach,
            limits.pair_check_cap,
        )?;
        if extensions > 1 {
            return Ok(false); // a root with two extensions: uniqueness broken
        }
        if (extensions == 1) != solves {
            return Ok(false); // witness route and search route disagree
        }
        via_search += extensions;

        for i in (0..point.len()).rev() {
            point[i] += 1;
            if point[i] < box_bound {
                continue 'outer;
            }
            point[i] = 0;
        }
        break;
    }

    Ok(direct == via_witness && via_witness == via_search)
}
