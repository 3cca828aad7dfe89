//! Weighted CNF instances.
//!
//! All clauses are soft: an assignment scores the summed weight of the
//! clauses it satisfies. Files use DIMACS WCNF without a `top` value:
//!
//! ```text
//! c opt 9
//! c name tiny
//! p wcnf 2 3
//! 3 1 -2 0
//! 4 -1 0
//! 2 2 0
//! ```
//!
//! `c opt <int>` carries the known optimum and `c name <label>` the instance
//! label; every other comment is ignored.

use std::fmt;
use std::fmt::Write as _;

use rand::seq::index;
use rand::Rng;
use thiserror::Error;

use crate::rng::run_rng;

/// Largest instance [`brute_force_optimum`] will enumerate.
pub const BRUTE_FORCE_MAX_VARS: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WcnfError {
    #[error("{message}, line {line}")]
    Parse { line: usize, message: String },
    #[error("assignment has {found} variables, instance has {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("instance has {num_vars} variables; exhaustive search supports at most {max}")]
    TooLarge { num_vars: usize, max: usize },
}

fn parse_err(line: usize, message: impl Into<String>) -> WcnfError {
    WcnfError::Parse {
        line,
        message: message.into(),
    }
}

/// A weighted disjunction of literals.
///
/// Literal `k > 0` is variable `k`, `-k` its negation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    literals: Vec<i32>,
    weight: u64,
}

impl Clause {
    pub fn new(literals: Vec<i32>, weight: u64) -> Result<Self, WcnfError> {
        if literals.is_empty() {
            return Err(WcnfError::Argument("empty clause".into()));
        }
        if literals.contains(&0) {
            return Err(WcnfError::Argument("literal 0 inside a clause".into()));
        }
        if weight == 0 {
            return Err(WcnfError::Argument("clause weight must be at least 1".into()));
        }
        Ok(Self { literals, weight })
    }

    pub fn literals(&self) -> &[i32] {
        &self.literals
    }

    pub fn weight(&self) -> u64 {
        self.weight
    }

    /// Largest variable index mentioned by the clause.
    pub fn max_var(&self) -> usize {
        self.literals
            .iter()
            .map(|l| l.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    #[inline]
    pub fn is_satisfied(&self, bits: &[bool]) -> bool {
        self.literals.iter().any(|&lit| {
            let value = bits[lit.unsigned_abs() as usize - 1];
            if lit > 0 {
                value
            } else {
                !value
            }
        })
    }
}

/// Truth values for variables `1..=n`; index `i` holds variable `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn all(value: bool, num_vars: usize) -> Self {
        Self(vec![value; num_vars])
    }

    /// Decodes `code` with variable 1 as the most significant of `num_vars` bits.
    pub fn from_big_endian(code: u64, num_vars: usize) -> Self {
        Self(
            (0..num_vars)
                .map(|i| (code >> (num_vars - 1 - i)) & 1 == 1)
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn bits_mut(&mut self) -> &mut [bool] {
        &mut self.0
    }

    pub fn flip(&mut self, index: usize) {
        self.0[index] = !self.0[index];
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.0
    }
}

impl From<Vec<bool>> for Assignment {
    fn from(bits: Vec<bool>) -> Self {
        Self(bits)
    }
}

impl fmt::Display for Assignment {
    /// Renders as a DIMACS-style model line body: `1 -2 3 ...`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &b) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_char(' ')?;
            }
            let var = i as i64 + 1;
            write!(f, "{}", if b { var } else { -var })?;
        }
        Ok(())
    }
}

/// A weighted Max-Sat instance. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WcnfInstance {
    num_vars: usize,
    clauses: Vec<Clause>,
    known_optimum: Option<u64>,
    name: String,
}

impl WcnfInstance {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Self, WcnfError> {
        if num_vars == 0 {
            return Err(WcnfError::Argument("instance needs at least one variable".into()));
        }
        if clauses.is_empty() {
            return Err(WcnfError::Argument("instance needs at least one clause".into()));
        }
        if let Some(c) = clauses.iter().find(|c| c.max_var() > num_vars) {
            return Err(WcnfError::Argument(format!(
                "literal {} out of range for {num_vars} variables",
                c.max_var()
            )));
        }
        Ok(Self {
            num_vars,
            clauses,
            known_optimum: None,
            name: String::new(),
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Attaches a known optimum; it may not exceed the total clause weight.
    pub fn with_known_optimum(mut self, optimum: u64) -> Result<Self, WcnfError> {
        if optimum > self.total_weight() {
            return Err(WcnfError::Argument(format!(
                "known optimum {optimum} exceeds total weight {}",
                self.total_weight()
            )));
        }
        self.known_optimum = Some(optimum);
        Ok(self)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn known_optimum(&self) -> Option<u64> {
        self.known_optimum
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn total_weight(&self) -> u64 {
        self.clauses.iter().map(Clause::weight).sum()
    }

    /// Total weight of the clauses satisfied by `assignment`.
    pub fn evaluate(&self, assignment: &Assignment) -> Result<u64, WcnfError> {
        if assignment.len() != self.num_vars {
            return Err(WcnfError::Dimension {
                expected: self.num_vars,
                found: assignment.len(),
            });
        }
        Ok(self.satisfied_weight(assignment.bits()))
    }

    /// Unchecked variant of [`evaluate`](Self::evaluate); `bits` must have
    /// length `num_vars`.
    #[inline]
    pub fn satisfied_weight(&self, bits: &[bool]) -> u64 {
        self.clauses
            .iter()
            .filter(|c| c.is_satisfied(bits))
            .map(Clause::weight)
            .sum()
    }
}

/// Parses DIMACS WCNF text. Errors carry 1-based line numbers.
pub fn parse_wcnf(text: &str) -> Result<WcnfInstance, WcnfError> {
    let mut header: Option<(usize, usize, usize)> = None; // (vars, clauses, line)
    let mut clauses = Vec::new();
    let mut optimum = None;
    let mut name = String::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('c') {
            if !(comment.is_empty() || comment.starts_with(char::is_whitespace)) {
                return Err(parse_err(line_no, format!("unexpected token {line:?}")));
            }
            let comment = comment.trim();
            if let Some(v) = comment.strip_prefix("opt ") {
                let v = v.trim();
                optimum = Some(
                    v.parse::<u64>()
                        .map_err(|_| parse_err(line_no, format!("malformed optimum {v:?}")))?,
                );
            } else if let Some(v) = comment.strip_prefix("name ") {
                name = v.trim().to_string();
            }
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(parse_err(line_no, "duplicate problem line"));
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != 4 || tokens[0] != "p" || tokens[1] != "wcnf" {
                return Err(parse_err(
                    line_no,
                    "malformed header, expected \"p wcnf <vars> <clauses>\"",
                ));
            }
            let vars = tokens[2]
                .parse::<usize>()
                .map_err(|_| parse_err(line_no, format!("malformed variable count {:?}", tokens[2])))?;
            let count = tokens[3]
                .parse::<usize>()
                .map_err(|_| parse_err(line_no, format!("malformed clause count {:?}", tokens[3])))?;
            if vars == 0 {
                return Err(parse_err(line_no, "variable count must be at least 1"));
            }
            if count == 0 {
                return Err(parse_err(line_no, "clause count must be at least 1"));
            }
            header = Some((vars, count, line_no));
            clauses.reserve(count);
            continue;
        }

        let Some((vars, count, _)) = header else {
            return Err(parse_err(line_no, "clause before problem line"));
        };
        if clauses.len() == count {
            return Err(parse_err(
                line_no,
                format!("more clauses than the {count} declared"),
            ));
        }
        let mut tokens = line.split_whitespace();
        let weight_tok = tokens.next().unwrap_or_default();
        let weight = weight_tok
            .parse::<i64>()
            .map_err(|_| parse_err(line_no, format!("malformed weight {weight_tok:?}")))?;
        if weight < 1 {
            return Err(parse_err(line_no, format!("weight {weight} below 1")));
        }
        let mut literals = Vec::new();
        let mut terminated = false;
        for tok in tokens {
            if terminated {
                return Err(parse_err(line_no, "tokens after clause terminator 0"));
            }
            let lit = tok
                .parse::<i32>()
                .map_err(|_| parse_err(line_no, format!("malformed literal {tok:?}")))?;
            if lit == 0 {
                terminated = true;
                continue;
            }
            if lit.unsigned_abs() as usize > vars {
                return Err(parse_err(line_no, format!("literal {} out of range", lit.unsigned_abs())));
            }
            literals.push(lit);
        }
        if !terminated {
            return Err(parse_err(line_no, "clause missing terminator 0"));
        }
        if literals.is_empty() {
            return Err(parse_err(line_no, "zero-length clause"));
        }
        clauses.push(Clause {
            literals,
            weight: weight as u64,
        });
    }

    let Some((vars, count, header_line)) = header else {
        return Err(parse_err(last_line.max(1), "missing problem line"));
    };
    if clauses.len() != count {
        return Err(parse_err(
            header_line,
            format!("header declares {count} clauses, found {}", clauses.len()),
        ));
    }
    let instance = WcnfInstance::new(vars, clauses)?.with_name(name);
    match optimum {
        Some(opt) => instance
            .with_known_optimum(opt)
            .map_err(|e| parse_err(header_line, e.to_string())),
        None => Ok(instance),
    }
}

/// Canonical WCNF text: optional `c opt`, optional `c name`, header, one
/// clause per line.
pub fn serialize_wcnf(instance: &WcnfInstance) -> String {
    let mut out = String::new();
    if let Some(opt) = instance.known_optimum {
        let _ = writeln!(out, "c opt {opt}");
    }
    if !instance.name.is_empty() {
        let _ = writeln!(out, "c name {}", instance.name);
    }
    let _ = writeln!(out, "p wcnf {} {}", instance.num_vars, instance.clauses.len());
    for clause in &instance.clauses {
        let _ = write!(out, "{}", clause.weight);
        for lit in &clause.literals {
            let _ = write!(out, " {lit}");
        }
        out.push_str(" 0\n");
    }
    out
}

/// Parameters of [`generate_random`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorParams {
    pub num_vars: usize,
    pub num_clauses: usize,
    pub clause_len: usize,
    pub weight_lo: u64,
    pub weight_hi: u64,
    pub seed: u64,
}

impl GeneratorParams {
    /// Default label of a generated instance.
    pub fn label(&self) -> String {
        format!(
            "rand-n{}-m{}-k{}-s{}",
            self.num_vars, self.num_clauses, self.clause_len, self.seed
        )
    }
}

/// Uniform random weighted k-CNF.
///
/// Each clause draws `clause_len` distinct variables without replacement
/// (written in ascending order), negates each with probability 1/2 and
/// takes a weight uniform in `[weight_lo, weight_hi]`.
pub fn generate_random(params: &GeneratorParams) -> Result<WcnfInstance, WcnfError> {
    let GeneratorParams {
        num_vars,
        num_clauses,
        clause_len,
        weight_lo,
        weight_hi,
        seed,
    } = *params;
    if clause_len == 0 || clause_len > num_vars {
        return Err(WcnfError::Argument(format!(
            "clause length {clause_len} must lie in 1..={num_vars}"
        )));
    }
    if num_clauses == 0 {
        return Err(WcnfError::Argument("clause count must be at least 1".into()));
    }
    if weight_lo == 0 || weight_lo > weight_hi {
        return Err(WcnfError::Argument(format!(
            "weight range [{weight_lo}, {weight_hi}] must satisfy 1 <= lo <= hi"
        )));
    }
    if num_vars > i32::MAX as usize {
        return Err(WcnfError::Argument("too many variables".into()));
    }

    let mut rng = run_rng(seed);
    let clauses = (0..num_clauses)
        .map(|_| {
            let mut vars = index::sample(&mut rng, num_vars, clause_len).into_vec();
            vars.sort_unstable();
            let literals = vars
                .into_iter()
                .map(|v| {
                    let lit = v as i32 + 1;
                    if rng.gen_bool(0.5) {
                        -lit
                    } else {
                        lit
                    }
                })
                .collect();
            Clause {
                literals,
                weight: rng.gen_range(weight_lo..=weight_hi),
            }
        })
        .collect();
    Ok(WcnfInstance::new(num_vars, clauses)?.with_name(params.label()))
}

/// Exhaustive optimum for instances with at most [`BRUTE_FORCE_MAX_VARS`]
/// variables.
///
/// Assignments are enumerated as big-endian integers (variable 1 most
/// significant) in ascending order; the first maximum wins ties.
pub fn brute_force_optimum(instance: &WcnfInstance) -> Result<(u64, Assignment), WcnfError> {
    let n = instance.num_vars;
    if n > BRUTE_FORCE_MAX_VARS {
        return Err(WcnfError::TooLarge {
            num_vars: n,
            max: BRUTE_FORCE_MAX_VARS,
        });
    }
    // Bit masks in code space: variable v sits at bit n - v.
    let masks: Vec<(u32, u32, u64)> = instance
        .clauses
        .iter()
        .map(|c| {
            let (mut pos, mut neg) = (0u32, 0u32);
            for &lit in &c.literals {
                let bit = 1u32 << (n - lit.unsigned_abs() as usize);
                if lit > 0 {
                    pos |= bit;
                } else {
                    neg |= bit;
                }
            }
            (pos, neg, c.weight)
        })
        .collect();

    let mut best = (0u64, 0u32);
    let mut first = true;
    for code in 0..(1u32 << n) {
        let inv = !code;
        let score: u64 = masks
            .iter()
            .filter(|(pos, neg, _)| code & pos != 0 || inv & neg != 0)
            .map(|m| m.2)
            .sum();
        if first || score > best.0 {
            best = (score, code);
            first = false;
        }
    }
    Ok((best.0, Assignment::from_big_endian(u64::from(best.1), n)))
}
