//! Dense two-phase simplex solver for small linear programs.
//!
//! Problems are stated as `minimize c.x subject to A x <= b, x >= 0`, with
//! optional per-variable upper bounds. The constraint builders feed problems
//! in exactly this shape, so the solver stays deliberately simple: a dense
//! tableau, Bland's least-index pivoting for anti-cycling, and a phase-1
//! artificial objective for rows whose bound is negative at the origin.

/// Standard-form linear program.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    /// Objective coefficients; the solver minimizes `objective . x`.
    pub objective: Vec<f64>,
    /// Inequality rows `rows[i] . x <= bounds[i]`.
    pub rows: Vec<Vec<f64>>,
    pub bounds: Vec<f64>,
    /// Optional upper bound per variable; lower bounds are always zero.
    pub upper_bounds: Vec<Option<f64>>,
}

impl LpProblem {
    pub fn new(n_vars: usize) -> Self {
        LpProblem {
            objective: vec![0.0; n_vars],
            rows: Vec::new(),
            bounds: Vec::new(),
            upper_bounds: vec![None; n_vars],
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn push_row(&mut self, coeffs: Vec<f64>, bound: f64) {
        assert_eq!(coeffs.len(), self.n_vars(), "row length");
        self.rows.push(coeffs);
        self.bounds.push(bound);
    }

    fn assert_well_formed(&self) {
        assert_eq!(self.rows.len(), self.bounds.len(), "row/bound count");
        assert_eq!(self.upper_bounds.len(), self.n_vars(), "upper bound count");
        for row in &self.rows {
            assert_eq!(row.len(), self.n_vars(), "row length");
            assert!(row.iter().all(|v| v.is_finite()), "non-finite row entry");
        }
        assert!(self.bounds.iter().all(|v| v.is_finite()), "non-finite bound");
        assert!(self.objective.iter().all(|v| v.is_finite()), "non-finite objective");
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(&self) -> Option<(&[f64], f64)> {
        match self {
            LpOutcome::Optimal { x, objective } => Some((x, *objective)),
            _ => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, LpOutcome::Optimal { .. })
    }
}

const EPS: f64 = 1e-10;

struct Tableau {
    /// `rows x cols` coefficients, last column is the RHS.
    t: Vec<Vec<f64>>,
    /// Basic variable per row.
    basis: Vec<usize>,
    n_structural: usize,
    n_total: usize,
    /// First artificial column; artificials never enter in phase 2.
    artificial_start: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.t[r][self.n_total]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let scale = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= scale;
        }
        for i in 0..self.t.len() {
            if i != r {
                let factor = self.t[i][c];
                if factor != 0.0 {
                    for j in 0..=self.n_total {
                        let delta = factor * self.t[r][j];
                        self.t[i][j] -= delta;
                    }
                }
            }
        }
        self.basis[r] = c;
    }

    /// Minimize `cost . vars` from the current basis. Returns false on
    /// unboundedness. Bland's rule: the entering column is the lowest-index
    /// one with negative reduced cost; the leaving row breaks ratio ties
    /// toward the lowest basic-variable index.
    fn simplex(&mut self, cost: &[f64], allow: impl Fn(usize) -> bool) -> bool {
        let m = self.t.len();
        // Reduced costs: the cost vector with the basic columns eliminated.
        let mut reduced = vec![0.0; self.n_total + 1];
        reduced[..self.n_total].copy_from_slice(&cost[..self.n_total]);
        for r in 0..m {
            let factor = reduced[self.basis[r]];
            if factor != 0.0 {
                for (value, coeff) in reduced.iter_mut().zip(&self.t[r]) {
                    *value -= factor * coeff;
                }
            }
        }

        loop {
            let entering = (0..self.n_total).find(|&j| allow(j) && reduced[j] < -EPS);
            let Some(c) = entering else { return true };
            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..m {
                if self.t[r][c] > EPS {
                    let ratio = self.rhs(r) / self.t[r][c];
                    let better = match leaving {
                        None => true,
                        Some((prev, best)) => {
                            ratio < best - EPS
                                || (ratio < best + EPS && self.basis[r] < self.basis[prev])
                        }
                    };
                    if better {
                        leaving = Some((r, ratio));
                    }
                }
            }
            let Some((r, _)) = leaving else { return false };
            let factor = reduced[c];
            self.pivot(r, c);
            for (value, coeff) in reduced.iter_mut().zip(&self.t[r]) {
                *value -= factor * coeff;
            }
        }
    }
}

/// Solve a standard-form LP. The optimum is a basic solution whose objective
/// is exact up to pivot arithmetic.
pub fn solve_lp(problem: &LpProblem) -> LpOutcome {
    problem.assert_well_formed();
    let n = problem.n_vars();

    // Fold the variable upper bounds in as plain rows.
    let mut rows: Vec<(Vec<f64>, f64)> = problem
        .rows
        .iter()
        .zip(&problem.bounds)
        .map(|(r, &b)| (r.clone(), b))
        .collect();
    for (j, ub) in problem.upper_bounds.iter().enumerate() {
        if let Some(u) = ub {
            let mut row = vec![0.0; n];
            row[j] = 1.0;
            rows.push((row, *u));
        }
    }

    let m = rows.len();
    if m == 0 {
        if problem.objective.iter().any(|&c| c < -EPS) {
            return LpOutcome::Unbounded;
        }
        return LpOutcome::Optimal { x: vec![0.0; n], objective: 0.0 };
    }

    let n_artificial = rows.iter().filter(|(_, b)| *b < 0.0).count();
    let n_total = n + m + n_artificial;
    let artificial_start = n + m;

    let mut t = vec![vec![0.0; n_total + 1]; m];
    let mut basis = vec![0usize; m];
    let mut artificial = 0usize;
    for (i, (row, b)) in rows.iter().enumerate() {
        let flip = if *b < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = flip * row[j];
        }
        t[i][n + i] = flip; // slack
        t[i][n_total] = flip * *b;
        if *b < 0.0 {
            let a = artificial_start + artificial;
            t[i][a] = 1.0;
            basis[i] = a;
            artificial += 1;
        } else {
            basis[i] = n + i;
        }
    }

    let mut tableau = Tableau { t, basis, n_structural: n, n_total, artificial_start };

    if n_artificial > 0 {
        let mut phase1 = vec![0.0; n_total];
        for c in phase1[artificial_start..].iter_mut() {
            *c = 1.0;
        }
        // The phase-1 objective is bounded below by zero, so the search
        // cannot be unbounded for well-formed input.
        let bounded = tableau.simplex(&phase1, |_| true);
        debug_assert!(bounded);
        let infeasibility: f64 = (0..m)
            .filter(|&r| tableau.basis[r] >= artificial_start)
            .map(|r| tableau.rhs(r))
            .sum();
        if infeasibility > 1e-7 {
            return LpOutcome::Infeasible;
        }
        // Drive residual zero-level artificials out of the basis. A row with
        // no eligible pivot is redundant; its artificial stays basic at zero
        // and never re-enters.
        for r in 0..m {
            if tableau.basis[r] >= artificial_start {
                if let Some(c) = (0..artificial_start).find(|&j| tableau.t[r][j].abs() > EPS) {
                    tableau.pivot(r, c);
                }
            }
        }
    }

    let mut phase2 = vec![0.0; n_total];
    phase2[..n].copy_from_slice(&problem.objective);
    let limit = tableau.artificial_start;
    if !tableau.simplex(&phase2, |j| j < limit) {
        return LpOutcome::Unbounded;
    }

    let mut x = vec![0.0; n];
    for r in 0..m {
        if tableau.basis[r] < tableau.n_structural {
            x[tableau.basis[r]] = tableau.rhs(r).max(0.0);
        }
    }
    let objective = problem.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    LpOutcome::Optimal { x, objective }
}
