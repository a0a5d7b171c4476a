//! Two-phase primal simplex over exact rationals.
//!
//! Pivoting follows Bland's rule (lowest eligible column enters, lowest basic
//! column leaves on ratio ties), so the solver terminates on degenerate
//! problems and is fully deterministic. Every outcome carries a certificate
//! that [`LpSolution::verify`] checks exactly against the input program:
//! a primal/dual pair with equal objective, a Farkas ray, or an improving
//! primal ray.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{dot, Q};

/// `maximize objective · x` subject to
/// `eq_rows · x = eq_rhs`, `ub_rows · x ≤ ub_rhs`, `lower ≤ x ≤ upper`.
///
/// A `None` lower bound means the variable is free; a `None` upper bound
/// means it is unbounded above. Variables default to `0 ≤ x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<Q>,
    pub eq_rows: Vec<Vec<Q>>,
    pub eq_rhs: Vec<Q>,
    pub ub_rows: Vec<Vec<Q>>,
    pub ub_rhs: Vec<Q>,
    pub lower: Vec<Option<Q>>,
    pub upper: Vec<Option<Q>>,
}

impl LinearProgram {
    pub fn new(objective: Vec<Q>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            eq_rows: Vec::new(),
            eq_rhs: Vec::new(),
            ub_rows: Vec::new(),
            ub_rhs: Vec::new(),
            lower: vec![Some(Q::zero()); n],
            upper: vec![None; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_eq(&mut self, row: Vec<Q>, rhs: Q) -> &mut Self {
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
        self
    }

    pub fn add_le(&mut self, row: Vec<Q>, rhs: Q) -> &mut Self {
        self.ub_rows.push(row);
        self.ub_rhs.push(rhs);
        self
    }

    pub fn add_ge(&mut self, row: Vec<Q>, rhs: Q) -> &mut Self {
        self.add_le(row.into_iter().map(|a| -a).collect(), -rhs)
    }

    pub fn set_bounds(&mut self, var: usize, lower: Option<Q>, upper: Option<Q>) -> &mut Self {
        self.lower[var] = lower;
        self.upper[var] = upper;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        let dim = |what: &str| Error::Dimension(format!("linear program: {what}"));
        if self.lower.len() != n || self.upper.len() != n {
            return Err(dim("bound vectors"));
        }
        if self.eq_rows.len() != self.eq_rhs.len() || self.ub_rows.len() != self.ub_rhs.len() {
            return Err(dim("rhs length"));
        }
        if self.eq_rows.iter().chain(&self.ub_rows).any(|r| r.len() != n) {
            return Err(dim("constraint row width"));
        }
        for (l, u) in self.lower.iter().zip(&self.upper) {
            if let (Some(l), Some(u)) = (l, u) {
                if l > u {
                    return Err(Error::Internal(format!("bound lower {l} > upper {u}")));
                }
            }
        }
        Ok(())
    }

    pub fn is_feasible(&self, x: &[Q]) -> bool {
        x.len() == self.num_vars()
            && self
                .eq_rows
                .iter()
                .zip(&self.eq_rhs)
                .all(|(r, b)| &dot(r, x) == b)
            && self
                .ub_rows
                .iter()
                .zip(&self.ub_rhs)
                .all(|(r, b)| &dot(r, x) <= b)
            && x.iter().zip(&self.lower).all(|(v, l)| l.as_ref().is_none_or(|l| v >= l))
            && x.iter().zip(&self.upper).all(|(v, u)| u.as_ref().is_none_or(|u| v <= u))
    }

    /// `Aᵀ y` over all constraint blocks, including the per-variable upper
    /// bound multipliers.
    fn transpose_apply(&self, eq: &[Q], ub: &[Q], upper: &[Q]) -> Vec<Q> {
        let mut g = upper.to_vec();
        for (row, y) in self.eq_rows.iter().zip(eq).chain(self.ub_rows.iter().zip(ub)) {
            if y.is_zero() {
                continue;
            }
            for (gj, a) in g.iter_mut().zip(row) {
                *gj += y * a;
            }
        }
        g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Optimal primal point plus a dual solution proving optimality.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub value: Q,
    pub primal: Vec<Q>,
    /// Multipliers of the equality rows (free sign).
    pub dual_eq: Vec<Q>,
    /// Multipliers of the `≤` rows (nonnegative).
    pub dual_ub: Vec<Q>,
    /// Multipliers of the variable upper bounds (nonnegative, zero if absent).
    pub dual_upper: Vec<Q>,
}

/// `y` with `yᵀA ≥ 0` on every column (`= 0` on free columns) and
/// `yᵀb < 0` after shifting by the lower bounds: no feasible point exists.
#[derive(Debug, Clone, PartialEq)]
pub struct FarkasCertificate {
    pub eq: Vec<Q>,
    pub ub: Vec<Q>,
    pub upper: Vec<Q>,
}

/// A feasible point and a direction along which the objective grows
/// without bound.
#[derive(Debug, Clone, PartialEq)]
pub struct UnboundedRay {
    pub point: Vec<Q>,
    pub direction: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpSolution {
    Optimal(Optimum),
    Infeasible(FarkasCertificate),
    Unbounded(UnboundedRay),
}

impl LpSolution {
    pub fn status(&self) -> LpStatus {
        match self {
            LpSolution::Optimal(_) => LpStatus::Optimal,
            LpSolution::Infeasible(_) => LpStatus::Infeasible,
            LpSolution::Unbounded(_) => LpStatus::Unbounded,
        }
    }

    pub fn optimum(&self) -> Option<&Optimum> {
        match self {
            LpSolution::Optimal(o) => Some(o),
            _ => None,
        }
    }

    pub fn into_optimum(self) -> Option<Optimum> {
        match self {
            LpSolution::Optimal(o) => Some(o),
            _ => None,
        }
    }

    pub fn value(&self) -> Option<&Q> {
        self.optimum().map(|o| &o.value)
    }

    /// Check the attached certificate against `lp` in exact arithmetic.
    pub fn verify(&self, lp: &LinearProgram) -> Result<()> {
        let fail = |m: String| Err(Error::Internal(format!("LP certificate rejected: {m}")));
        match self {
            LpSolution::Optimal(o) => {
                if !lp.is_feasible(&o.primal) {
                    return fail("primal point infeasible".into());
                }
                if dot(&lp.objective, &o.primal) != o.value {
                    return fail("value differs from objective at primal point".into());
                }
                if o.dual_ub.iter().chain(&o.dual_upper).any(Signed::is_negative) {
                    return fail("negative inequality multiplier".into());
                }
                for (j, (w, u)) in o.dual_upper.iter().zip(&lp.upper).enumerate() {
                    if u.is_none() && !w.is_zero() {
                        return fail(format!("multiplier on absent upper bound of x{j}"));
                    }
                }
                let g = lp.transpose_apply(&o.dual_eq, &o.dual_ub, &o.dual_upper);
                let mut dual_value = dot(&lp.eq_rhs, &o.dual_eq) + dot(&lp.ub_rhs, &o.dual_ub);
                for j in 0..lp.num_vars() {
                    if let Some(u) = &lp.upper[j] {
                        dual_value += u * &o.dual_upper[j];
                    }
                    let reduced = &lp.objective[j] - &g[j];
                    match &lp.lower[j] {
                        Some(l) => {
                            if reduced.is_positive() {
                                return fail(format!("dual infeasible at x{j}"));
                            }
                            dual_value += l * &reduced;
                        }
                        None => {
                            if !reduced.is_zero() {
                                return fail(format!("dual infeasible at free x{j}"));
                            }
                        }
                    }
                }
                if dual_value != o.value {
                    return fail(format!("duality gap: primal {} dual {}", o.value, dual_value));
                }
                Ok(())
            }
            LpSolution::Infeasible(f) => {
                if f.ub.iter().chain(&f.upper).any(Signed::is_negative) {
                    return fail("negative Farkas multiplier".into());
                }
                let g = lp.transpose_apply(&f.eq, &f.ub, &f.upper);
                let mut rhs = dot(&lp.eq_rhs, &f.eq) + dot(&lp.ub_rhs, &f.ub);
                for j in 0..lp.num_vars() {
                    if let Some(u) = &lp.upper[j] {
                        rhs += u * &f.upper[j];
                    }
                    match &lp.lower[j] {
                        Some(l) => {
                            if g[j].is_negative() {
                                return fail(format!("Farkas column x{j} negative"));
                            }
                            rhs -= l * &g[j];
                        }
                        None => {
                            if !g[j].is_zero() {
                                return fail(format!("Farkas free column x{j} nonzero"));
                            }
                        }
                    }
                }
                if !rhs.is_negative() {
                    return fail("Farkas rhs not negative".into());
                }
                Ok(())
            }
            LpSolution::Unbounded(r) => {
                if !lp.is_feasible(&r.point) {
                    return fail("ray base point infeasible".into());
                }
                let d = &r.direction;
                if lp.eq_rows.iter().any(|row| !dot(row, d).is_zero()) {
                    return fail("ray leaves equality rows".into());
                }
                if lp.ub_rows.iter().any(|row| dot(row, d).is_positive()) {
                    return fail("ray violates inequality rows".into());
                }
                for j in 0..lp.num_vars() {
                    if lp.lower[j].is_some() && d[j].is_negative() {
                        return fail(format!("ray decreases bounded-below x{j}"));
                    }
                    if lp.upper[j].is_some() && d[j].is_positive() {
                        return fail(format!("ray increases bounded-above x{j}"));
                    }
                }
                if !dot(&lp.objective, d).is_positive() {
                    return fail("ray does not improve objective".into());
                }
                Ok(())
            }
        }
    }
}

/// Solve `lp` exactly. The returned certificate has already been verified.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let solution = StandardForm::build(lp).solve(lp);
    solution.verify(lp)?;
    Ok(solution)
}

/// Column role in the standard form `A z = b, z ≥ 0`.
#[derive(Debug, Clone, Copy)]
enum Column {
    /// `x_j = l_j + z` (or the positive part of a free `x_j`).
    Plus(usize),
    /// Negative part of a free `x_j`.
    Minus(usize),
    Slack,
    Artificial,
}

struct StandardForm {
    /// Rows `[A | rhs]`, each row already sign-normalized so rhs ≥ 0.
    tableau: Vec<Vec<Q>>,
    /// `±1` applied to each original row during normalization.
    row_sign: Vec<bool>,
    columns: Vec<Column>,
    first_artificial: usize,
    basis: Vec<usize>,
    /// Original maximize objective on standard columns.
    cost: Vec<Q>,
    /// Objective contribution of the lower-bound shift.
    offset: Q,
    num_eq: usize,
    num_ub: usize,
}

impl StandardForm {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let mut columns = Vec::new();
        let mut cost = Vec::new();
        // map original var -> (plus column, optional minus column)
        let mut var_cols = Vec::with_capacity(n);
        for j in 0..n {
            let plus = columns.len();
            columns.push(Column::Plus(j));
            cost.push(lp.objective[j].clone());
            let minus = if lp.lower[j].is_none() {
                columns.push(Column::Minus(j));
                cost.push(-lp.objective[j].clone());
                Some(columns.len() - 1)
            } else {
                None
            };
            var_cols.push((plus, minus));
        }
        let shift: Vec<Q> = lp.lower.iter().map(|l| l.clone().unwrap_or_else(Q::zero)).collect();
        let offset = dot(&lp.objective, &shift);

        // Original rows: equalities, then `≤` rows, then upper bounds.
        let mut rows: Vec<(Vec<Q>, Q, bool)> = Vec::new();
        for (r, b) in lp.eq_rows.iter().zip(&lp.eq_rhs) {
            rows.push((r.clone(), b.clone(), false));
        }
        for (r, b) in lp.ub_rows.iter().zip(&lp.ub_rhs) {
            rows.push((r.clone(), b.clone(), true));
        }
        for j in 0..n {
            if let Some(u) = &lp.upper[j] {
                let mut r = vec![Q::zero(); n];
                r[j] = Q::one();
                rows.push((r, u.clone(), true));
            }
        }
        let m = rows.len();
        let num_slack = rows.iter().filter(|r| r.2).count();
        let structural = columns.len();
        for _ in 0..num_slack {
            columns.push(Column::Slack);
            cost.push(Q::zero());
        }
        let first_artificial = columns.len();
        for _ in 0..m {
            columns.push(Column::Artificial);
            cost.push(Q::zero());
        }
        let width = columns.len() + 1;

        let mut tableau = Vec::with_capacity(m);
        let mut row_sign = Vec::with_capacity(m);
        let mut slack = structural;
        for (i, (coeffs, rhs, has_slack)) in rows.into_iter().enumerate() {
            let mut t = vec![Q::zero(); width];
            for (j, a) in coeffs.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let (plus, minus) = var_cols[j];
                t[plus] = a.clone();
                if let Some(mc) = minus {
                    t[mc] = -a.clone();
                }
            }
            if has_slack {
                t[slack] = Q::one();
                slack += 1;
            }
            t[width - 1] = rhs - dot(&coeffs, &shift);
            let negate = t[width - 1].is_negative();
            if negate {
                for v in t.iter_mut() {
                    *v = -v.clone();
                }
            }
            t[first_artificial + i] = Q::one();
            tableau.push(t);
            row_sign.push(negate);
        }
        StandardForm {
            tableau,
            row_sign,
            columns,
            first_artificial,
            basis: (first_artificial..first_artificial + m).collect(),
            cost,
            offset,
            num_eq: lp.eq_rows.len(),
            num_ub: lp.ub_rows.len(),
        }
    }

    fn width(&self) -> usize {
        self.columns.len() + 1
    }

    /// Reduced-cost row `c − c_B B⁻¹ [A | b]` for the given column costs.
    fn reduced_costs(&self, cost: &[Q]) -> Vec<Q> {
        let mut z: Vec<Q> = cost.to_vec();
        z.push(Q::zero());
        for (row, &b) in self.tableau.iter().zip(&self.basis) {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (zk, a) in z.iter_mut().zip(row) {
                if !a.is_zero() {
                    *zk -= cb * a;
                }
            }
        }
        z
    }

    fn pivot(&mut self, z: &mut [Q], r: usize, c: usize) {
        let inv = Q::one() / &self.tableau[r][c];
        for v in self.tableau[r].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let pivot_row = self.tableau[r].clone();
        let support: Vec<usize> = (0..pivot_row.len()).filter(|&k| !pivot_row[k].is_zero()).collect();
        let eliminate = |row: &mut [Q]| {
            let f = row[c].clone();
            if f.is_zero() {
                return;
            }
            for &k in &support {
                row[k] -= &f * &pivot_row[k];
            }
        };
        for (i, row) in self.tableau.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(z);
        self.basis[r] = c;
    }

    /// Bland iterations until optimal (`Ok`) or unbounded (`Err(column)`).
    fn iterate(&mut self, z: &mut [Q], allow_artificial: bool) -> std::result::Result<(), usize> {
        let rhs = self.width() - 1;
        loop {
            let limit = if allow_artificial { rhs } else { self.first_artificial };
            let Some(c) = (0..limit).find(|&j| z[j].is_positive()) else {
                return Ok(());
            };
            let mut best: Option<(usize, Q)> = None;
            for (i, row) in self.tableau.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[c];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(z, r, c),
                None => return Err(c),
            }
        }
    }

    /// Row multipliers in terms of the original (un-normalized) rows, read
    /// off the reduced costs of the artificial columns.
    fn row_duals(&self, z: &[Q], artificial_cost: &Q) -> Vec<Q> {
        (0..self.tableau.len())
            .map(|i| {
                // z_art = c_art − y_i
                let y = artificial_cost - &z[self.first_artificial + i];
                if self.row_sign[i] {
                    -y
                } else {
                    y
                }
            })
            .collect()
    }

    fn split_duals(&self, lp: &LinearProgram, y: Vec<Q>) -> (Vec<Q>, Vec<Q>, Vec<Q>) {
        let mut it = y.into_iter();
        let eq: Vec<Q> = it.by_ref().take(self.num_eq).collect();
        let ub: Vec<Q> = it.by_ref().take(self.num_ub).collect();
        let upper = lp
            .upper
            .iter()
            .map(|u| if u.is_some() { it.next().expect("upper-bound row") } else { Q::zero() })
            .collect();
        (eq, ub, upper)
    }

    fn point(&self, lp: &LinearProgram) -> Vec<Q> {
        let rhs = self.width() - 1;
        let mut z = vec![Q::zero(); self.columns.len()];
        for (row, &b) in self.tableau.iter().zip(&self.basis) {
            z[b] = row[rhs].clone();
        }
        self.to_original(lp, &z, true)
    }

    fn to_original(&self, lp: &LinearProgram, z: &[Q], shifted: bool) -> Vec<Q> {
        let mut x: Vec<Q> = if shifted {
            lp.lower.iter().map(|l| l.clone().unwrap_or_else(Q::zero)).collect()
        } else {
            vec![Q::zero(); lp.num_vars()]
        };
        for (k, col) in self.columns.iter().enumerate() {
            match col {
                Column::Plus(j) => x[*j] += &z[k],
                Column::Minus(j) => x[*j] -= &z[k],
                _ => {}
            }
        }
        x
    }

    fn solve(mut self, lp: &LinearProgram) -> LpSolution {
        let rhs = self.width() - 1;
        // Phase 1: maximize −Σ artificials.
        let phase1_cost: Vec<Q> = self
            .columns
            .iter()
            .map(|c| if matches!(c, Column::Artificial) { -Q::one() } else { Q::zero() })
            .collect();
        let mut z = self.reduced_costs(&phase1_cost);
        self.iterate(&mut z, false)
            .expect("phase 1 is bounded by construction");
        // z_rhs = −(phase-1 objective)
        if z[rhs].is_positive() {
            let y = self.row_duals(&z, &-Q::one());
            let (eq, ub, upper) = self.split_duals(lp, y);
            return LpSolution::Infeasible(FarkasCertificate { eq, ub, upper });
        }
        // Drive zero-level artificials out of the basis where possible;
        // rows where that is impossible are redundant and stay inert.
        for r in 0..self.tableau.len() {
            if self.basis[r] < self.first_artificial {
                continue;
            }
            if let Some(c) = (0..self.first_artificial).find(|&j| !self.tableau[r][j].is_zero()) {
                let mut scratch = vec![Q::zero(); self.width()];
                self.pivot(&mut scratch, r, c);
            }
        }

        let cost = self.cost.clone();
        let mut z = self.reduced_costs(&cost);
        match self.iterate(&mut z, false) {
            Ok(()) => {
                let primal = self.point(lp);
                let value = dot(&lp.objective, &primal);
                debug_assert_eq!(value, &self.offset - &z[rhs]);
                let y = self.row_duals(&z, &Q::zero());
                let (dual_eq, dual_ub, dual_upper) = self.split_duals(lp, y);
                LpSolution::Optimal(Optimum {
                    value,
                    primal,
                    dual_eq,
                    dual_ub,
                    dual_upper,
                })
            }
            Err(c) => {
                let mut d = vec![Q::zero(); self.columns.len()];
                d[c] = Q::one();
                for (row, &b) in self.tableau.iter().zip(&self.basis) {
                    d[b] = -row[c].clone();
                }
                LpSolution::Unbounded(UnboundedRay {
                    point: self.point(lp),
                    direction: self.to_original(lp, &d, false),
                })
            }
        }
    }
}
