//! Dense two-phase simplex over exact rationals.
//!
//! Bland's rule is used for both entering and leaving variables, which
//! guarantees termination without any tolerance handling. Problems built by
//! this crate are small (a few dozen rows), so a dense tableau is adequate.

use num_traits::{One, Signed, Zero};

use crate::vectors::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: Scalar, point: Vec<Scalar> },
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<(usize, Scalar)>,
    cmp: Cmp,
    rhs: Scalar,
}

/// A linear program over variables that are either free or non-negative.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    free: Vec<bool>,
    rows: Vec<Row>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, free: bool) -> usize {
        self.free.push(free);
        self.free.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.free.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, Scalar)>, cmp: Cmp, rhs: Scalar) {
        debug_assert!(coeffs.iter().all(|(j, _)| *j < self.free.len()));
        self.rows.push(Row { coeffs, cmp, rhs });
    }

    /// Any feasible point, or `None` when the system is infeasible.
    pub fn feasible_point(&self) -> Option<Vec<Scalar>> {
        match self.maximize(&[]) {
            LpOutcome::Optimal { point, .. } => Some(point),
            _ => None,
        }
    }

    pub fn maximize(&self, objective: &[(usize, Scalar)]) -> LpOutcome {
        // Column layout: one column per non-negative variable, two per free one.
        let mut col_of = Vec::with_capacity(self.free.len());
        let mut ncols = 0usize;
        for &free in &self.free {
            col_of.push(ncols);
            ncols += if free { 2 } else { 1 };
        }
        let structural = ncols;

        let m = self.rows.len();
        let mut slack_cols = vec![None; m];
        let mut art_cols = vec![None; m];
        let mut dense_rows: Vec<(Vec<Scalar>, Cmp, Scalar)> = Vec::with_capacity(m);
        for row in &self.rows {
            let mut dense = vec![Scalar::zero(); structural];
            for (j, c) in &row.coeffs {
                let col = col_of[*j];
                dense[col] += c;
                if self.free[*j] {
                    dense[col + 1] -= c;
                }
            }
            let (mut cmp, mut rhs) = (row.cmp, row.rhs.clone());
            if rhs.is_negative() {
                for x in dense.iter_mut() {
                    *x = -x.clone();
                }
                rhs = -rhs;
                cmp = match cmp {
                    Cmp::Le => Cmp::Ge,
                    Cmp::Ge => Cmp::Le,
                    Cmp::Eq => Cmp::Eq,
                };
            }
            dense_rows.push((dense, cmp, rhs));
        }
        for (i, (_, cmp, _)) in dense_rows.iter().enumerate() {
            if matches!(cmp, Cmp::Le | Cmp::Ge) {
                slack_cols[i] = Some(ncols);
                ncols += 1;
            }
        }
        let first_art = ncols;
        for (i, (_, cmp, _)) in dense_rows.iter().enumerate() {
            if matches!(cmp, Cmp::Ge | Cmp::Eq) {
                art_cols[i] = Some(ncols);
                ncols += 1;
            }
        }

        let mut tab = Tableau {
            rows: Vec::with_capacity(m),
            basis: Vec::with_capacity(m),
            obj: vec![Scalar::zero(); ncols + 1],
            width: ncols,
        };
        for (i, (dense, cmp, rhs)) in dense_rows.into_iter().enumerate() {
            let mut r = dense;
            r.resize(ncols + 1, Scalar::zero());
            if let Some(s) = slack_cols[i] {
                r[s] = if cmp == Cmp::Le { Scalar::one() } else { -Scalar::one() };
            }
            r[ncols] = rhs;
            let basic = match art_cols[i] {
                Some(a) => {
                    r[a] = Scalar::one();
                    a
                }
                None => slack_cols[i].expect("Le rows carry a slack"),
            };
            tab.rows.push(r);
            tab.basis.push(basic);
        }

        // Phase 1: maximize −Σ artificials.
        if ncols > first_art {
            for j in 0..=ncols {
                let mut acc = Scalar::zero();
                for (i, row) in tab.rows.iter().enumerate() {
                    if tab.basis[i] >= first_art {
                        acc -= &row[j];
                    }
                }
                if j >= first_art && j < ncols {
                    acc += Scalar::one();
                }
                tab.obj[j] = acc;
            }
            match tab.run(ncols) {
                Step::Optimal => {}
                Step::Unbounded => unreachable!("phase one is bounded above by zero"),
            }
            if tab.obj[ncols].is_negative() {
                return LpOutcome::Infeasible;
            }
            // Drive remaining (zero-valued) artificials out of the basis.
            let mut i = 0;
            while i < tab.rows.len() {
                if tab.basis[i] >= first_art {
                    match (0..first_art).find(|&j| !tab.rows[i][j].is_zero()) {
                        Some(j) => {
                            tab.pivot(i, j);
                            i += 1;
                        }
                        None => {
                            tab.rows.remove(i);
                            tab.basis.remove(i);
                        }
                    }
                } else {
                    i += 1;
                }
            }
        }

        // Phase 2 over structural and slack columns only.
        let mut cost = vec![Scalar::zero(); first_art];
        for (j, c) in objective {
            let col = col_of[*j];
            cost[col] += c;
            if self.free[*j] {
                cost[col + 1] -= c;
            }
        }
        for j in 0..=ncols {
            if j >= first_art && j < ncols {
                tab.obj[j] = Scalar::zero();
                continue;
            }
            let mut acc = Scalar::zero();
            for (i, row) in tab.rows.iter().enumerate() {
                let b = tab.basis[i];
                if b < first_art && !cost[b].is_zero() {
                    acc += &cost[b] * &row[j];
                }
            }
            if j < first_art {
                acc -= &cost[j];
            }
            tab.obj[j] = acc;
        }
        match tab.run(first_art) {
            Step::Unbounded => return LpOutcome::Unbounded,
            Step::Optimal => {}
        }

        let mut cols = vec![Scalar::zero(); first_art];
        for (i, &b) in tab.basis.iter().enumerate() {
            if b < first_art {
                cols[b] = tab.rows[i][ncols].clone();
            }
        }
        let point = self
            .free
            .iter()
            .enumerate()
            .map(|(j, &free)| {
                let c = col_of[j];
                if free {
                    &cols[c] - &cols[c + 1]
                } else {
                    cols[c].clone()
                }
            })
            .collect();
        LpOutcome::Optimal {
            value: tab.obj[ncols].clone(),
            point,
        }
    }
}

enum Step {
    Optimal,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Scalar>>,
    basis: Vec<usize>,
    /// Reduced costs `z_j − c_j`; the last entry holds the objective value.
    obj: Vec<Scalar>,
    width: usize,
}

impl Tableau {
    fn run(&mut self, allowed: usize) -> Step {
        loop {
            let Some(enter) = (0..allowed).find(|&j| self.obj[j].is_negative()) else {
                return Step::Optimal;
            };
            let mut best: Option<(usize, Scalar)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[enter].is_positive() {
                    continue;
                }
                let r = &row[self.width] / &row[enter];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => r < *br || (r == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, r));
                }
            }
            match best {
                None => return Step::Unbounded,
                Some((i, _)) => self.pivot(i, enter),
            }
        }
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let inv = Scalar::one() / &self.rows[pr][pc];
        for x in self.rows[pr].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        let pivot_row = self.rows[pr].clone();
        let nz: Vec<usize> = (0..pivot_row.len()).filter(|&j| !pivot_row[j].is_zero()).collect();
        let eliminate = |row: &mut Vec<Scalar>| {
            let factor = row[pc].clone();
            if factor.is_zero() {
                return;
            }
            for &j in &nz {
                let delta = &factor * &pivot_row[j];
                row[j] -= delta;
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != pr {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.basis[pr] = pc;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectors::{int, ratio};

    #[test]
    fn small_maximization() {
        // max x + y  s.t. x + 2y ≤ 4, 3x + y ≤ 6, x, y ≥ 0  → (8/5, 6/5), value 14/5
        let mut lp = LinearProgram::new();
        let x = lp.add_var(false);
        let y = lp.add_var(false);
        lp.add_row(vec![(x, int(1)), (y, int(2))], Cmp::Le, int(4));
        lp.add_row(vec![(x, int(3)), (y, int(1))], Cmp::Le, int(6));
        match lp.maximize(&[(x, int(1)), (y, int(1))]) {
            LpOutcome::Optimal { value, point } => {
                assert_eq!(value, ratio(14, 5));
                assert_eq!(point, vec![ratio(8, 5), ratio(6, 5)]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn free_variables_and_equalities() {
        // max −x  s.t. x = y − 3, y ≥ 1, y ≤ 2, x free
        let mut lp = LinearProgram::new();
        let x = lp.add_var(true);
        let y = lp.add_var(false);
        lp.add_row(vec![(x, int(1)), (y, int(-1))], Cmp::Eq, int(-3));
        lp.add_row(vec![(y, int(1))], Cmp::Ge, int(1));
        lp.add_row(vec![(y, int(1))], Cmp::Le, int(2));
        match lp.maximize(&[(x, int(-1))]) {
            LpOutcome::Optimal { value, point } => {
                assert_eq!(value, int(2));
                assert_eq!(point[x], int(-2));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(false);
        lp.add_row(vec![(x, int(1))], Cmp::Ge, int(2));
        lp.add_row(vec![(x, int(1))], Cmp::Le, int(1));
        assert_eq!(lp.maximize(&[(x, int(1))]), LpOutcome::Infeasible);

        let mut lp = LinearProgram::new();
        let x = lp.add_var(true);
        lp.add_row(vec![(x, int(1))], Cmp::Ge, int(0));
        assert_eq!(lp.maximize(&[(x, int(1))]), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(false);
        let y = lp.add_var(false);
        lp.add_row(vec![(x, int(1)), (y, int(1))], Cmp::Eq, int(1));
        lp.add_row(vec![(x, int(2)), (y, int(2))], Cmp::Eq, int(2));
        match lp.maximize(&[(x, int(1))]) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, int(1)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
