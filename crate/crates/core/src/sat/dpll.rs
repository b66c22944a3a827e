//! Counting DPLL: unit propagation and pure-literal elimination at every
//! node, then branch on the lowest-index open variable, true first.

use super::{CnfFormula, Literal, SatResult};

enum Propagation {
    Conflict,
    Done,
}

struct Search<'a> {
    formula: &'a CnfFormula,
    values: Vec<Option<bool>>,
    trail: Vec<u32>,
    nodes: u64,
    propagations: u64,
}

impl<'a> Search<'a> {
    fn new(formula: &'a CnfFormula) -> Self {
        Search {
            formula,
            values: vec![None; formula.num_vars() as usize],
            trail: Vec::new(),
            nodes: 0,
            propagations: 0,
        }
    }

    fn assign(&mut self, lit: Literal) {
        self.values[lit.variable as usize] = Some(!lit.negated);
        self.trail.push(lit.variable);
    }

    fn undo(&mut self, mark: usize) {
        for v in self.trail.drain(mark..) {
            self.values[v as usize] = None;
        }
    }

    fn lit_value(&self, lit: Literal) -> Option<bool> {
        self.values[lit.variable as usize].map(|v| lit.eval(v))
    }

    fn clause_satisfied(&self, clause: &[Literal; 3]) -> bool {
        clause.iter().any(|&l| self.lit_value(l) == Some(true))
    }

    fn propagate(&mut self) -> Propagation {
        loop {
            let mut forced = None;
            for clause in self.formula.clauses() {
                if self.clause_satisfied(clause) {
                    continue;
                }
                let mut open = clause.iter().filter(|&&l| self.lit_value(l).is_none());
                match (open.next(), open.next()) {
                    (None, _) => return Propagation::Conflict,
                    (Some(&l), None) => {
                        forced = Some(l);
                        break;
                    }
                    _ => {}
                }
            }
            match forced {
                Some(l) => {
                    self.assign(l);
                    self.propagations += 1;
                }
                None => return Propagation::Done,
            }
        }
    }

    /// Assign every pure literal among the open clauses. Returns whether
    /// anything was assigned.
    fn eliminate_pure(&mut self) -> bool {
        // bit 0: seen positive, bit 1: seen negative
        let mut polarity = vec![0u8; self.values.len()];
        for clause in self.formula.clauses() {
            if self.clause_satisfied(clause) {
                continue;
            }
            for &l in clause {
                if self.lit_value(l).is_none() {
                    polarity[l.variable as usize] |= if l.negated { 2 } else { 1 };
                }
            }
        }
        let mut any = false;
        for (v, &p) in polarity.iter().enumerate() {
            if p == 1 || p == 2 {
                self.assign(Literal::new(v as u32, p == 2));
                any = true;
            }
        }
        any
    }

    /// Lowest-index unassigned variable occurring in an open clause.
    fn branch_variable(&self) -> Option<u32> {
        self.formula
            .clauses()
            .iter()
            .filter(|c| !self.clause_satisfied(c))
            .flat_map(|c| c.iter())
            .filter(|&&l| self.lit_value(l).is_none())
            .map(|l| l.variable)
            .min()
    }

    fn solve(&mut self) -> bool {
        self.nodes += 1;
        let mark = self.trail.len();
        loop {
            if let Propagation::Conflict = self.propagate() {
                self.undo(mark);
                return false;
            }
            if !self.eliminate_pure() {
                break;
            }
        }
        let Some(var) = self.branch_variable() else {
            // no open clause left
            return true;
        };
        for value in [true, false] {
            let branch_mark = self.trail.len();
            self.assign(Literal::new(var, !value));
            if self.solve() {
                return true;
            }
            self.undo(branch_mark);
        }
        self.undo(mark);
        false
    }
}

/// Decide satisfiability, counting search-tree nodes and propagations.
pub fn dpll_solve(formula: &CnfFormula) -> SatResult {
    let mut search = Search::new(formula);
    let satisfiable = search.solve();
    let model = satisfiable.then(|| {
        search
            .values
            .iter()
            .map(|v| v.unwrap_or(false))
            .collect::<Vec<_>>()
    });
    debug_assert!(model.as_ref().is_none_or(|m| formula.is_satisfied_by(m)));
    SatResult {
        satisfiable,
        dpll_decisions: search.nodes,
        dpll_propagations: search.propagations,
        model,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sat::{brute_force, generate_instance};

    #[test]
    fn single_clause_takes_one_node() {
        let f = CnfFormula::new(3, vec![[Literal::pos(0), Literal::pos(1), Literal::pos(2)]]).unwrap();
        let r = dpll_solve(&f);
        assert!(r.satisfiable);
        assert_eq!(r.dpll_decisions, 1);
        assert!(f.is_satisfied_by(r.model.as_ref().unwrap()));
    }

    #[test]
    fn complete_pattern_set_is_unsat() {
        let f = generate_instance(3, 8, 1).unwrap();
        let r = dpll_solve(&f);
        assert!(!r.satisfiable);
        assert!(r.model.is_none());
        assert!(r.dpll_decisions > 1);
    }

    #[test]
    fn empty_formula_is_sat() {
        let f = CnfFormula::new(4, vec![]).unwrap();
        let r = dpll_solve(&f);
        assert!(r.satisfiable);
        assert_eq!(r.dpll_decisions, 1);
    }

    #[test]
    fn agrees_with_brute_force_on_500_instances() {
        let ratios = [0.5, 1.0, 2.0, 4.25, 6.0];
        for i in 0..500u64 {
            let n = 3 + (i % 10) as u32;
            let f = ratios[(i % 5) as usize];
            let m = ((f * f64::from(n)).round() as usize)
                .clamp(1, super::super::distinct_clause_count(n) as usize);
            let formula = generate_instance(n, m, 1000 + i).unwrap();
            let r = dpll_solve(&formula);
            assert_eq!(r.satisfiable, brute_force(&formula).unwrap().satisfiable, "instance {i}");
            if let Some(model) = &r.model {
                assert!(formula.is_satisfied_by(model));
            }
        }
    }

    #[test]
    fn cost_peaks_near_the_transition() {
        let median = |m: usize| {
            let mut cost: Vec<u64> = (0..200).map(|s| dpll_solve(&generate_instance(12, m, s).unwrap()).dpll_decisions).collect();
            cost.sort_unstable();
            (cost[99] + cost[100]) as f64 / 2.0
        };
        let (easy, hard) = (median(12), median(51));
        assert!(hard > easy, "f=1: {easy}, f=4.25: {hard}");
    }
}
