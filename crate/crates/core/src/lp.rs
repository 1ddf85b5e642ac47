//! Dense two-phase simplex over exact rationals, with Bland's rule.
//!
//! Solves `min c.x  s.t.  A x = b, x >= 0`. Intended for the small programs
//! that arise in fractional Pareto checks.

use num_traits::{Signed, Zero};

use crate::rational::Rat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rat>, value: Rat },
    Infeasible,
    Unbounded,
}

/// A linear program in equality standard form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StandardLp {
    pub a: Vec<Vec<Rat>>,
    pub b: Vec<Rat>,
    pub c: Vec<Rat>,
}

struct Tableau {
    t: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> &Rat {
        &self.t[r][self.cols]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let pv = self.t[row][col].clone();
        for v in self.t[row].iter_mut() {
            *v /= &pv;
        }
        let prow = self.t[row].clone();
        for (r, line) in self.t.iter_mut().enumerate() {
            if r == row || line[col].is_zero() {
                continue;
            }
            let f = line[col].clone();
            for (v, p) in line.iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Minimises `cost` over the current feasible basis, using only columns
    /// with `allowed[j]`. Returns false if unbounded.
    fn optimise(&mut self, cost: &[Rat], allowed: &[bool]) -> bool {
        loop {
            // Reduced costs: cost_j - sum_r cost_{basis r} * t[r][j].
            let entering = (0..self.cols).find(|&j| {
                if !allowed[j] || self.basis.contains(&j) {
                    return false;
                }
                let mut rc = cost[j].clone();
                for (r, &bj) in self.basis.iter().enumerate() {
                    if !cost[bj].is_zero() && !self.t[r][j].is_zero() {
                        rc -= &cost[bj] * &self.t[r][j];
                    }
                }
                rc.is_negative()
            });
            let Some(j) = entering else {
                return true;
            };
            let mut leave: Option<(usize, Rat)> = None;
            for r in 0..self.t.len() {
                let a = &self.t[r][j];
                if a.is_positive() {
                    let ratio = self.rhs(r) / a;
                    let better = match &leave {
                        None => true,
                        Some((lr, best)) => ratio < *best || (ratio == *best && self.basis[r] < self.basis[*lr]),
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            match leave {
                None => return false,
                Some((r, _)) => self.pivot(r, j),
            }
        }
    }
}

pub fn solve(lp: &StandardLp) -> LpOutcome {
    let rows = lp.a.len();
    let n = lp.c.len();
    debug_assert!(lp.a.iter().all(|r| r.len() == n));
    debug_assert_eq!(lp.b.len(), rows);
    // Columns: originals 0..n, artificials n..n+rows, then the right-hand side.
    let cols = n + rows;
    let mut t = Vec::with_capacity(rows);
    for (r, (row, b)) in lp.a.iter().zip(&lp.b).enumerate() {
        let flip = b.is_negative();
        let mut line: Vec<Rat> = row.iter().map(|v| if flip { -v } else { v.clone() }).collect();
        line.extend((0..rows).map(|k| {
            if k == r {
                Rat::from_integer(1.into())
            } else {
                Rat::zero()
            }
        }));
        line.push(if flip { -b } else { b.clone() });
        t.push(line);
    }
    let mut tab = Tableau {
        t,
        basis: (n..cols).collect(),
        cols,
    };

    let phase1: Vec<Rat> = (0..cols)
        .map(|j| {
            if j >= n {
                Rat::from_integer(1.into())
            } else {
                Rat::zero()
            }
        })
        .collect();
    let all = vec![true; cols];
    tab.optimise(&phase1, &all);
    let infeasibility: Rat = (0..rows)
        .filter(|&r| tab.basis[r] >= n)
        .map(|r| tab.rhs(r).clone())
        .sum();
    if infeasibility.is_positive() {
        return LpOutcome::Infeasible;
    }
    // Drive zero-level artificials out of the basis; rows where that is
    // impossible are redundant and dropped.
    let mut r = 0;
    while r < tab.t.len() {
        if tab.basis[r] >= n {
            match (0..n).find(|&j| !tab.t[r][j].is_zero()) {
                Some(j) => tab.pivot(r, j),
                None => {
                    tab.t.remove(r);
                    tab.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    let mut cost = lp.c.clone();
    cost.extend((0..rows).map(|_| Rat::zero()));
    let originals: Vec<bool> = (0..cols).map(|j| j < n).collect();
    if !tab.optimise(&cost, &originals) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Rat::zero(); n];
    for (r, &bj) in tab.basis.iter().enumerate() {
        if bj < n {
            x[bj] = tab.rhs(r).clone();
        }
    }
    let value = x.iter().zip(&lp.c).map(|(a, b)| a * b).sum();
    LpOutcome::Optimal { x, value }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn ints(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&k| int(k)).collect()
    }

    #[test]
    fn small_optimum() {
        // min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
        let lp = StandardLp {
            a: vec![ints(&[1, 2, 1, 0]), ints(&[3, 1, 0, 1])],
            b: ints(&[4, 6]),
            c: ints(&[-1, -1, 0, 0]),
        };
        match solve(&lp) {
            LpOutcome::Optimal { x, value } => {
                // Vertex (8/5, 6/5).
                assert_eq!(x[0], rat(8, 5));
                assert_eq!(x[1], rat(6, 5));
                assert_eq!(value, rat(-14, 5));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let lp = StandardLp {
            a: vec![ints(&[1, 1]), ints(&[1, 1])],
            b: ints(&[1, 2]),
            c: ints(&[0, 0]),
        };
        assert_eq!(solve(&lp), LpOutcome::Infeasible);
        let lp = StandardLp {
            a: vec![ints(&[1, -1])],
            b: ints(&[0]),
            c: ints(&[-1, 0]),
        };
        assert_eq!(solve(&lp), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_rows_and_negative_rhs() {
        let lp = StandardLp {
            a: vec![ints(&[1, 1, 0]), ints(&[2, 2, 0]), ints(&[-1, 0, -1])],
            b: ints(&[3, 6, -1]),
            c: ints(&[1, 2, 3]),
        };
        match solve(&lp) {
            // y = 3 - x, z = 1 - x, cost 9 - 4x at x = 1.
            LpOutcome::Optimal { value, .. } => assert_eq!(value, int(5)),
            other => panic!("{other:?}"),
        }
    }
}
