//! Dense two-phase simplex for `max c·x` subject to `Ax = b`, `l ≤ x ≤ u`.
//!
//! Variables are mapped to nonnegative ones before pivoting: boxed variables
//! to `y ∈ [0, 1]` (with an explicit `y + s = 1` row), half-bounded ones by a
//! shift, free ones by splitting. Rows and unbounded columns are equilibrated.
//! Entering and leaving variables follow Bland's rule, so the pivot sequence
//! is a pure function of the input.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Relative feasibility tolerance for reported optima.
pub const FEAS_TOL: f64 = 1e-9;
/// Relative threshold below which a directional speed `λ` counts as zero.
pub const LAMBDA_TOL: f64 = 1e-9;

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-11;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("variable {index}: lower bound {lower} exceeds upper bound {upper}")]
    CrossedBounds { index: usize, lower: f64, upper: f64 },
    #[error("non-finite coefficient in {0}")]
    NonFinite(&'static str),
    #[error("zero direction")]
    ZeroDirection,
}

#[derive(Clone, Debug)]
pub struct LpProblem {
    objective: DVector<f64>,
    eq_matrix: DMatrix<f64>,
    eq_rhs: DVector<f64>,
    lower: DVector<f64>,
    upper: DVector<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { value: f64, argument: DVector<f64> },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }
}

impl LpProblem {
    /// Bounds may be infinite (`lower = −∞`, `upper = +∞`).
    pub fn new(
        objective: DVector<f64>,
        eq_matrix: DMatrix<f64>,
        eq_rhs: DVector<f64>,
        lower: DVector<f64>,
        upper: DVector<f64>,
    ) -> Result<Self, LpError> {
        let v = objective.len();
        let (q, cols) = eq_matrix.shape();
        if cols != v && !(q == 0) {
            return Err(LpError::Dimension(format!(
                "constraint matrix has {cols} columns, objective has {v} entries"
            )));
        }
        if eq_rhs.len() != q {
            return Err(LpError::Dimension(format!(
                "rhs has {} entries, constraint matrix has {q} rows",
                eq_rhs.len()
            )));
        }
        if lower.len() != v || upper.len() != v {
            return Err(LpError::Dimension(format!(
                "bounds have {}/{} entries for {v} variables",
                lower.len(),
                upper.len()
            )));
        }
        if objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::NonFinite("objective"));
        }
        if eq_matrix.iter().any(|c| !c.is_finite()) {
            return Err(LpError::NonFinite("constraint matrix"));
        }
        if eq_rhs.iter().any(|c| !c.is_finite()) {
            return Err(LpError::NonFinite("rhs"));
        }
        for j in 0..v {
            let (l, u) = (lower[j], upper[j]);
            if l.is_nan() || u.is_nan() || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(LpError::NonFinite("bounds"));
            }
            if l > u {
                return Err(LpError::CrossedBounds {
                    index: j,
                    lower: l,
                    upper: u,
                });
            }
        }
        let eq_matrix = if q == 0 {
            DMatrix::zeros(0, v)
        } else {
            eq_matrix
        };
        Ok(LpProblem {
            objective,
            eq_matrix,
            eq_rhs,
            lower,
            upper,
        })
    }

    pub fn variables(&self) -> usize {
        self.objective.len()
    }

    pub fn constraints(&self) -> usize {
        self.eq_matrix.nrows()
    }

    pub fn solve(&self) -> LpOutcome {
        solve(self)
    }
}

/// How an original variable is expressed through nonnegative tableau columns.
#[derive(Clone, Copy, Debug)]
enum VarMap {
    /// `x = l + w·y`, `0 ≤ y ≤ 1`; `bound_row` indexes the `y + s = 1` row.
    Boxed { col: usize, l: f64, w: f64 },
    /// `x = l + y·s`, `y ≥ 0`.
    Lower { col: usize, l: f64 },
    /// `x = u − y·s`, `y ≥ 0`.
    Upper { col: usize, u: f64 },
    /// `x = (y⁺ − y⁻)·s`.
    Free { pos: usize, neg: usize },
    /// `l = u`: not a decision variable.
    Fixed(f64),
}

struct Tableau {
    rows: usize,
    cols: usize,
    a: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.cols + j]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let cols = self.cols;
        let p = self.a[r * cols + c];
        for j in 0..cols {
            self.a[r * cols + j] /= p;
        }
        self.rhs[r] /= p;
        self.a[r * cols + c] = 1.0;
        let (pivot_row, rhs_r) = (self.a[r * cols..(r + 1) * cols].to_vec(), self.rhs[r]);
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.a[i * cols + c];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.a[i * cols..(i + 1) * cols];
            for (x, &pv) in row.iter_mut().zip(&pivot_row) {
                *x -= f * pv;
            }
            row[c] = 0.0;
            self.rhs[i] -= f * rhs_r;
        }
        self.basis[r] = c;
    }

    fn remove_row(&mut self, r: usize) {
        let cols = self.cols;
        self.a.drain(r * cols..(r + 1) * cols);
        self.rhs.remove(r);
        self.basis.remove(r);
        self.rows -= 1;
    }

    /// Maximizes `cost·z` over the current tableau with Bland's rule.
    /// Returns `false` when the objective is unbounded.
    fn run(&mut self, cost: &[f64], allowed: &[bool], pivots: &mut usize) -> bool {
        let mut in_basis = vec![false; self.cols];
        loop {
            in_basis.iter_mut().for_each(|b| *b = false);
            for &b in &self.basis {
                in_basis[b] = true;
            }
            let mut entering = None;
            for j in 0..self.cols {
                if !allowed[j] || in_basis[j] {
                    continue;
                }
                let mut rc = cost[j];
                for i in 0..self.rows {
                    let t = self.at(i, j);
                    if t != 0.0 {
                        rc -= cost[self.basis[i]] * t;
                    }
                }
                if rc > COST_TOL {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let t = self.at(i, c);
                if t > PIVOT_TOL {
                    let ratio = self.rhs[i].max(0.0) / t;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((r, best)) => {
                            if ratio < best - 1e-14 * best.abs().max(1.0)
                                || (ratio <= best + 1e-14 * best.abs().max(1.0)
                                    && self.basis[i] < self.basis[r])
                            {
                                Some((i, ratio))
                            } else {
                                Some((r, best))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return false;
            };
            *pivots += 1;
            assert!(*pivots < MAX_PIVOTS, "simplex pivot limit exceeded");
            self.pivot(r, c);
        }
    }
}

fn inf_norm(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solves `p` with the two-phase simplex method.
pub fn solve(p: &LpProblem) -> LpOutcome {
    let v = p.variables();
    let q = p.constraints();

    // Variable maps and column scales for unbounded columns.
    let mut maps = Vec::with_capacity(v);
    let mut n_struct = 0usize;
    let mut n_boxed = 0usize;
    for j in 0..v {
        let (l, u) = (p.lower[j], p.upper[j]);
        let m = if l == u {
            VarMap::Fixed(l)
        } else if l.is_finite() && u.is_finite() {
            n_boxed += 1;
            VarMap::Boxed {
                col: n_struct,
                l,
                w: u - l,
            }
        } else if l.is_finite() {
            VarMap::Lower { col: n_struct, l }
        } else if u.is_finite() {
            VarMap::Upper { col: n_struct, u }
        } else {
            n_struct += 1;
            VarMap::Free {
                pos: n_struct - 1,
                neg: n_struct,
            }
        };
        if !matches!(m, VarMap::Fixed(_)) {
            n_struct += 1;
        }
        maps.push(m);
    }

    // Structural coefficients and rhs after substitution (q × n_struct).
    let mut coef = vec![0.0; q * n_struct];
    let mut rhs: Vec<f64> = p.eq_rhs.iter().copied().collect();
    let mut cost = vec![0.0; n_struct];
    let mut col_scale = vec![1.0; n_struct];
    for (j, m) in maps.iter().enumerate() {
        let cj = p.objective[j];
        match *m {
            VarMap::Fixed(x) => {
                for (i, r) in rhs.iter_mut().enumerate() {
                    *r -= p.eq_matrix[(i, j)] * x;
                }
            }
            VarMap::Boxed { col, l, w } => {
                for i in 0..q {
                    rhs[i] -= p.eq_matrix[(i, j)] * l;
                    coef[i * n_struct + col] = p.eq_matrix[(i, j)] * w;
                }
                cost[col] = cj * w;
            }
            VarMap::Lower { col, l } => {
                for i in 0..q {
                    rhs[i] -= p.eq_matrix[(i, j)] * l;
                    coef[i * n_struct + col] = p.eq_matrix[(i, j)];
                }
                cost[col] = cj;
            }
            VarMap::Upper { col, u } => {
                for i in 0..q {
                    rhs[i] -= p.eq_matrix[(i, j)] * u;
                    coef[i * n_struct + col] = -p.eq_matrix[(i, j)];
                }
                cost[col] = -cj;
            }
            VarMap::Free { pos, neg } => {
                for i in 0..q {
                    coef[i * n_struct + pos] = p.eq_matrix[(i, j)];
                    coef[i * n_struct + neg] = -p.eq_matrix[(i, j)];
                }
                cost[pos] = cj;
                cost[neg] = -cj;
            }
        }
    }

    // Equilibrate: rows, then unbounded columns, then rows again.
    let boxed_col: Vec<bool> = {
        let mut b = vec![false; n_struct];
        for m in &maps {
            if let VarMap::Boxed { col, .. } = *m {
                b[col] = true;
            }
        }
        b
    };
    let scale_rows = |coef: &mut [f64], rhs: &mut [f64]| {
        for i in 0..q {
            let row = &mut coef[i * n_struct..(i + 1) * n_struct];
            let s = inf_norm(row.iter().copied());
            if s > 0.0 {
                row.iter_mut().for_each(|x| *x /= s);
                rhs[i] /= s;
            }
        }
    };
    scale_rows(&mut coef, &mut rhs);
    for c in 0..n_struct {
        if boxed_col[c] {
            continue;
        }
        let s = inf_norm((0..q).map(|i| coef[i * n_struct + c]));
        if s > 0.0 {
            for i in 0..q {
                coef[i * n_struct + c] /= s;
            }
            col_scale[c] = 1.0 / s;
            cost[c] /= s;
        }
    }
    scale_rows(&mut coef, &mut rhs);

    // A row with no structural coefficients is either redundant or contradictory.
    let rhs_scale = 1.0 + inf_norm(rhs.iter().copied());
    let mut live_rows = Vec::with_capacity(q);
    for i in 0..q {
        let empty = coef[i * n_struct..(i + 1) * n_struct].iter().all(|&x| x == 0.0);
        if empty {
            if rhs[i].abs() > FEAS_TOL * rhs_scale {
                return LpOutcome::Infeasible;
            }
        } else {
            live_rows.push(i);
        }
    }
    let q_live = live_rows.len();

    // Tableau columns: structural | bound slacks | artificials.
    let slack0 = n_struct;
    let art0 = n_struct + n_boxed;
    let cols = art0 + q_live;
    let rows = q_live + n_boxed;
    let mut tab = Tableau {
        rows,
        cols,
        a: vec![0.0; rows * cols],
        rhs: vec![0.0; rows],
        basis: vec![0; rows],
    };
    for (r, &i) in live_rows.iter().enumerate() {
        let sign = if rhs[i] < 0.0 { -1.0 } else { 1.0 };
        for c in 0..n_struct {
            tab.a[r * cols + c] = sign * coef[i * n_struct + c];
        }
        tab.a[r * cols + art0 + r] = 1.0;
        tab.rhs[r] = sign * rhs[i];
        tab.basis[r] = art0 + r;
    }
    let boxed = (0..n_struct).filter(|&c| boxed_col[c]);
    for (k, c) in boxed.enumerate() {
        let r = q_live + k;
        tab.a[r * cols + c] = 1.0;
        tab.a[r * cols + slack0 + k] = 1.0;
        tab.rhs[r] = 1.0;
        tab.basis[r] = slack0 + k;
    }

    let mut pivots = 0;
    let is_art = |c: usize| c >= art0;

    // Phase 1.
    if q_live > 0 {
        let mut c1 = vec![0.0; cols];
        c1[art0..].fill(-1.0);
        let allowed = vec![true; cols];
        let bounded = tab.run(&c1, &allowed, &mut pivots);
        debug_assert!(bounded);
        let infeas: f64 = (0..tab.rows)
            .filter(|&i| is_art(tab.basis[i]))
            .map(|i| tab.rhs[i].max(0.0))
            .sum();
        let tol = FEAS_TOL * (1.0 + inf_norm(tab.rhs.iter().copied().take(q_live)));
        if infeas > tol {
            return LpOutcome::Infeasible;
        }
        // Drive remaining artificials out of the basis.
        let mut r = 0;
        while r < tab.rows {
            if !is_art(tab.basis[r]) {
                r += 1;
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for c in 0..art0 {
                let t = tab.at(r, c).abs();
                if t > PIVOT_TOL && best.is_none_or(|(_, bt)| t > bt * (1.0 + 1e-12)) {
                    best = Some((c, t));
                }
            }
            match best {
                Some((c, _)) => {
                    tab.pivot(r, c);
                    r += 1;
                }
                None => tab.remove_row(r),
            }
        }
    }

    // Phase 2.
    let mut c2 = vec![0.0; cols];
    c2[..n_struct].copy_from_slice(&cost);
    let cmax = inf_norm(cost.iter().copied());
    if cmax > 0.0 {
        c2.iter_mut().for_each(|c| *c /= cmax);
    }
    let allowed: Vec<bool> = (0..cols).map(|c| !is_art(c)).collect();
    if !tab.run(&c2, &allowed, &mut pivots) {
        return LpOutcome::Unbounded;
    }

    let z = refine(&tab, &live_rows, &coef, &rhs, n_struct, n_boxed, &boxed_col, q_live);

    // Map back to the original variables.
    let mut x = DVector::zeros(v);
    for (j, m) in maps.iter().enumerate() {
        x[j] = match *m {
            VarMap::Fixed(val) => val,
            VarMap::Boxed { col, l, w } => (l + w * z[col].clamp(0.0, 1.0)).clamp(l, l + w),
            VarMap::Lower { col, l } => l + col_scale[col] * z[col].max(0.0),
            VarMap::Upper { col, u } => u - col_scale[col] * z[col].max(0.0),
            VarMap::Free { pos, neg } => col_scale[pos] * z[pos] - col_scale[neg] * z[neg],
        };
    }
    let value = p.objective.dot(&x);
    LpOutcome::Optimal { value, argument: x }
}

/// Recomputes basic values from the unpivoted (scaled) system with an LU solve.
#[allow(clippy::too_many_arguments)]
fn refine(
    tab: &Tableau,
    live_rows: &[usize],
    coef: &[f64],
    rhs: &[f64],
    n_struct: usize,
    n_boxed: usize,
    boxed_col: &[bool],
    q_live: usize,
) -> Vec<f64> {
    let rows = q_live + n_boxed;
    let slack0 = n_struct;
    let mut full = DMatrix::zeros(rows, n_struct + n_boxed);
    let mut b = DVector::zeros(rows);
    for (r, &i) in live_rows.iter().enumerate() {
        for c in 0..n_struct {
            full[(r, c)] = coef[i * n_struct + c];
        }
        b[r] = rhs[i];
    }
    let mut k = 0;
    for c in 0..n_struct {
        if boxed_col[c] {
            full[(q_live + k, c)] = 1.0;
            full[(q_live + k, slack0 + k)] = 1.0;
            b[q_live + k] = 1.0;
            k += 1;
        }
    }

    let mut z = vec![0.0; n_struct + n_boxed];
    for (i, &bc) in tab.basis.iter().enumerate() {
        if bc < z.len() {
            z[bc] = tab.rhs[i].max(0.0);
        }
    }

    // Redundant rows may have been dropped; only refine a square, nonsingular basis.
    if tab.basis.len() == rows && tab.basis.iter().all(|&c| c < n_struct + n_boxed) {
        let basis_mat = full.select_columns(tab.basis.iter());
        if let Some(sol) = basis_mat.lu().solve(&b) {
            if sol.iter().all(|x| x.is_finite() && *x >= -1e-9) {
                for (i, &bc) in tab.basis.iter().enumerate() {
                    z[bc] = sol[i].max(0.0);
                }
            }
        }
    }
    z
}

/// Result of `max{λ ≥ 0 : Mx + offset = λd, x ∈ box}`.
#[derive(Clone, Debug, PartialEq)]
pub enum DirectionalLambda {
    /// `argument` is the optimal `x`. Values below the speed threshold are reported as 0.
    Finite { lambda: f64, argument: DVector<f64> },
    Unbounded,
    /// No `x` in the box puts `Mx + offset` on the ray `ℝ⁺d`.
    NegativeCertificate,
}

impl DirectionalLambda {
    pub fn lambda(&self) -> Option<f64> {
        match self {
            DirectionalLambda::Finite { lambda, .. } => Some(*lambda),
            _ => None,
        }
    }
}

/// `max{λ ≥ 0 : Mx = λd, lower ≤ x ≤ upper}`.
pub fn max_scaled_direction(
    m: &DMatrix<f64>,
    lower: &DVector<f64>,
    upper: &DVector<f64>,
    d: &DVector<f64>,
) -> Result<DirectionalLambda, LpError> {
    max_scaled_direction_offset(m, lower, upper, &DVector::zeros(m.nrows()), d)
}

/// `max{λ ≥ 0 : Mx + offset = λd, lower ≤ x ≤ upper}`.
///
/// A finite optimum with `λ·‖d‖∞ ≤ LAMBDA_TOL·S` is snapped to 0, where `S`
/// bounds `‖Mx + offset‖∞` over the box. The threshold is invariant under a
/// common rescaling of the rows.
pub fn max_scaled_direction_offset(
    m: &DMatrix<f64>,
    lower: &DVector<f64>,
    upper: &DVector<f64>,
    offset: &DVector<f64>,
    d: &DVector<f64>,
) -> Result<DirectionalLambda, LpError> {
    let (n, v) = m.shape();
    if d.len() != n || offset.len() != n {
        return Err(LpError::Dimension(format!(
            "direction/offset of length {}/{} for {n} rows",
            d.len(),
            offset.len()
        )));
    }
    let dnorm = inf_norm(d.iter().copied());
    if dnorm == 0.0 {
        return Err(LpError::ZeroDirection);
    }

    let mut a = DMatrix::zeros(n, v + 1);
    a.view_mut((0, 0), (n, v)).copy_from(m);
    a.set_column(v, &(-d));
    let mut c = DVector::zeros(v + 1);
    c[v] = 1.0;
    let mut lo = DVector::zeros(v + 1);
    let mut hi = DVector::from_element(v + 1, f64::INFINITY);
    lo.rows_mut(0, v).copy_from(lower);
    hi.rows_mut(0, v).copy_from(upper);
    let prob = LpProblem::new(c, a, -offset, lo, hi)?;

    Ok(match prob.solve() {
        LpOutcome::Infeasible => DirectionalLambda::NegativeCertificate,
        LpOutcome::Unbounded => DirectionalLambda::Unbounded,
        LpOutcome::Optimal { value, argument } => {
            let s = speed_scale(m, lower, upper, offset);
            let lambda = if value * dnorm > LAMBDA_TOL * s {
                value
            } else {
                0.0
            };
            DirectionalLambda::Finite {
                lambda,
                argument: argument.rows(0, v).into_owned(),
            }
        }
    })
}

/// `max_i (Σ_j |M_ij|·max(|l_j|, |u_j|) + |offset_i|)`, or 1 if that is 0.
pub fn speed_scale(
    m: &DMatrix<f64>,
    lower: &DVector<f64>,
    upper: &DVector<f64>,
    offset: &DVector<f64>,
) -> f64 {
    let mut s: f64 = 0.0;
    for i in 0..m.nrows() {
        let mut row = offset[i].abs();
        for j in 0..m.ncols() {
            row += m[(i, j)].abs() * lower[j].abs().max(upper[j].abs());
        }
        s = s.max(row);
    }
    if s > 0.0 {
        s
    } else {
        1.0
    }
}
