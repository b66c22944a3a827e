//! Random 3-SAT instances, a counting DPLL solver and a brute-force oracle.

mod dimacs;
mod dpll;

use std::collections::HashSet;
use std::fmt;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

pub use dimacs::{emit_dimacs, parse_dimacs};
pub use dpll::dpll_solve;

/// Largest variable count accepted by [`brute_force`].
pub const BRUTE_FORCE_MAX_VARS: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub variable: u32,
    pub negated: bool,
}

impl Literal {
    pub fn new(variable: u32, negated: bool) -> Self {
        Literal { variable, negated }
    }

    pub fn pos(variable: u32) -> Self {
        Literal::new(variable, false)
    }

    pub fn neg(variable: u32) -> Self {
        Literal::new(variable, true)
    }

    /// Value of the literal under `value` of its variable.
    #[inline]
    pub fn eval(self, value: bool) -> bool {
        value != self.negated
    }

    /// 1-based signed DIMACS encoding.
    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.variable) + 1;
        if self.negated {
            -v
        } else {
            v
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "¬x{}", self.variable + 1)
        } else {
            write!(f, "x{}", self.variable + 1)
        }
    }
}

pub type Clause = [Literal; 3];

/// A 3-CNF formula over `num_vars` variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Clause>,
    /// Set when the clause list contains a repeated clause (up to literal
    /// order). Generated formulas never do; parsed files may.
    has_duplicates: bool,
}

fn clause_key(clause: &Clause) -> [(u32, bool); 3] {
    let mut key = clause.map(|l| (l.variable, l.negated));
    key.sort_unstable();
    key
}

impl CnfFormula {
    /// Build a formula, checking that every clause mentions three distinct
    /// variables below `num_vars`.
    pub fn new(num_vars: u32, clauses: Vec<Clause>) -> Result<Self> {
        if num_vars == 0 {
            return Err(Error::InvalidParameter("formula needs at least one variable".into()));
        }
        let mut seen = HashSet::with_capacity(clauses.len());
        let mut has_duplicates = false;
        for (i, clause) in clauses.iter().enumerate() {
            for lit in clause {
                if lit.variable >= num_vars {
                    return Err(Error::InvalidInput(format!(
                        "clause {i} uses variable {} but formula has {num_vars}",
                        lit.variable + 1
                    )));
                }
            }
            let key = clause_key(clause);
            if key[0].0 == key[1].0 || key[1].0 == key[2].0 {
                return Err(Error::InvalidInput(format!(
                    "clause {i} repeats a variable"
                )));
            }
            if !seen.insert(key) {
                has_duplicates = true;
            }
        }
        Ok(CnfFormula {
            num_vars,
            clauses,
            has_duplicates,
        })
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn has_duplicates(&self) -> bool {
        self.has_duplicates
    }

    /// Clause-to-variable ratio `m / n`.
    pub fn ratio(&self) -> f64 {
        self.clauses.len() as f64 / f64::from(self.num_vars)
    }

    /// Number of clauses containing each variable.
    pub fn occurrences(&self) -> Vec<u32> {
        let mut d = vec![0; self.num_vars as usize];
        for clause in &self.clauses {
            for lit in clause {
                d[lit.variable as usize] += 1;
            }
        }
        d
    }

    /// Per-clause `(mask, violating)` bit patterns: assignment `z` (bit `i`
    /// is variable `i`) violates the clause iff `z & mask == violating`.
    pub fn violation_masks(&self) -> Vec<(u64, u64)> {
        self.clauses
            .iter()
            .map(|clause| {
                clause.iter().fold((0u64, 0u64), |(mask, bad), lit| {
                    let bit = 1u64 << lit.variable;
                    (mask | bit, if lit.negated { bad | bit } else { bad })
                })
            })
            .collect()
    }

    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|clause| {
            clause
                .iter()
                .any(|lit| lit.eval(assignment[lit.variable as usize]))
        })
    }
}

/// Count of distinct 3-clauses over `n` variables, `8 * C(n, 3)`.
pub fn distinct_clause_count(n: u32) -> u64 {
    let n = u64::from(n);
    if n < 3 {
        return 0;
    }
    8 * (n * (n - 1) * (n - 2) / 6)
}

/// Draw a random 3-SAT formula with `m` distinct clauses over `n` variables.
///
/// Each clause picks three distinct variables uniformly and negates each
/// with probability 1/2; a clause equal (up to order) to an earlier one is
/// redrawn.
pub fn generate_instance(n: u32, m: usize, seed: u64) -> Result<CnfFormula> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("need n >= 3 variables, got {n}")));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("need at least one clause".into()));
    }
    let bound = distinct_clause_count(n);
    if m as u64 > bound {
        return Err(Error::InvalidParameter(format!(
            "{m} clauses exceed the {bound} distinct clauses over {n} variables"
        )));
    }
    let mut rng = seed::rng(seed);
    let mut seen = HashSet::with_capacity(m);
    let mut clauses = Vec::with_capacity(m);
    while clauses.len() < m {
        let vars = index::sample(&mut rng, n as usize, 3);
        let mut clause = [Literal::pos(0); 3];
        for (slot, v) in clause.iter_mut().zip(vars.iter()) {
            *slot = Literal::new(v as u32, rng.random_bool(0.5));
        }
        clause.sort_unstable();
        if seen.insert(clause_key(&clause)) {
            clauses.push(clause);
        }
    }
    Ok(CnfFormula {
        num_vars: n,
        clauses,
        has_duplicates: false,
    })
}

/// Outcome of exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BruteForce {
    pub satisfiable: bool,
    pub num_satisfying: u64,
}

/// Enumerate all `2^n` assignments.
pub fn brute_force(formula: &CnfFormula) -> Result<BruteForce> {
    let n = formula.num_vars();
    if n > BRUTE_FORCE_MAX_VARS {
        return Err(Error::ResourceBound(format!(
            "brute force limited to {BRUTE_FORCE_MAX_VARS} variables, got {n}"
        )));
    }
    let masks = formula.violation_masks();
    let num_satisfying = (0..1u64 << n)
        .filter(|&z| masks.iter().all(|&(mask, bad)| z & mask != bad))
        .count() as u64;
    Ok(BruteForce {
        satisfiable: num_satisfying > 0,
        num_satisfying,
    })
}

/// Result of [`dpll_solve`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SatResult {
    pub satisfiable: bool,
    /// Search-tree nodes visited, the root included.
    pub dpll_decisions: u64,
    /// Literals forced by unit propagation.
    pub dpll_propagations: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<Vec<bool>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_clause() -> CnfFormula {
        CnfFormula::new(3, vec![[Literal::pos(0), Literal::pos(1), Literal::pos(2)]]).unwrap()
    }

    #[test]
    fn full_pattern_set_on_three_vars() {
        let f = generate_instance(3, 8, 99).unwrap();
        let mut patterns: Vec<_> = f
            .clauses()
            .iter()
            .map(|c| (c[0].negated, c[1].negated, c[2].negated))
            .collect();
        patterns.sort_unstable();
        patterns.dedup();
        assert_eq!(patterns.len(), 8);
        assert_eq!(brute_force(&f).unwrap(), BruteForce { satisfiable: false, num_satisfying: 0 });
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(generate_instance(8, 16, 5).unwrap(), generate_instance(8, 16, 5).unwrap());
        assert_ne!(generate_instance(8, 16, 5).unwrap(), generate_instance(8, 16, 6).unwrap());
        for seed in 0..20 {
            let f = generate_instance(8, 16, seed).unwrap();
            assert_eq!(dpll_solve(&f).satisfiable, brute_force(&f).unwrap().satisfiable);
        }
    }

    #[test]
    fn sat_fraction_decreases_with_clauses() {
        let fractions: Vec<f64> = (20..=70)
            .step_by(5)
            .map(|m| {
                let sat = (0..200).filter(|&s| brute_force(&generate_instance(10, m, s).unwrap()).unwrap().satisfiable);
                sat.count() as f64 / 200.0
            })
            .collect();
        let rises: Vec<f64> = fractions.windows(2).map(|w| w[1] - w[0]).filter(|&d| d > 0.0).collect();
        assert!(rises.len() <= 1 && rises.iter().all(|&d| d <= 0.05), "{fractions:?}");
        assert!(fractions[0] > 0.9 && *fractions.last().unwrap() < 0.1, "{fractions:?}");
    }

    #[test]
    fn generation_rejects_bad_parameters() {
        assert!(matches!(generate_instance(2, 1, 0), Err(Error::InvalidParameter(_))));
        assert!(matches!(generate_instance(3, 9, 0), Err(Error::InvalidParameter(_))));
        assert!(matches!(generate_instance(5, 0, 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn brute_force_small_cases() {
        let empty = CnfFormula::new(5, vec![]).unwrap();
        assert_eq!(brute_force(&empty).unwrap(), BruteForce { satisfiable: true, num_satisfying: 32 });
        assert_eq!(brute_force(&single_clause()).unwrap().num_satisfying, 7);
        let big = CnfFormula::new(25, vec![]).unwrap();
        assert!(matches!(brute_force(&big), Err(Error::ResourceBound(_))));
    }

    #[test]
    fn each_clause_is_violated_by_an_eighth_of_assignments() {
        let f = generate_instance(8, 20, 3).unwrap();
        for (mask, bad) in f.violation_masks() {
            let violated = (0..256u64).filter(|&z| z & mask == bad).count();
            assert_eq!(violated, 1 << (8 - 3));
        }
    }

    #[test]
    fn duplicate_clauses_are_flagged_not_rejected() {
        let c = [Literal::pos(0), Literal::neg(1), Literal::pos(2)];
        let swapped = [Literal::neg(1), Literal::pos(2), Literal::pos(0)];
        let f = CnfFormula::new(3, vec![c, swapped]).unwrap();
        assert!(f.has_duplicates());
        assert!(CnfFormula::new(3, vec![[Literal::pos(0), Literal::neg(0), Literal::pos(1)]]).is_err());
    }
}
