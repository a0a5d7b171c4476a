//! Conic decomposition of IC mechanisms under independence.
//!
//! For `x` IC under `π_ℓπ_r`, `f = π_ℓπ_r·x` has total mass `q = E[x]` and
//! `f/q` lies in the transportation polytope `Π(π_ℓ, π_r)`. Repeatedly
//! cancelling support cycles of the remainder yields an extreme point inside
//! its support; peeling the largest feasible multiple of that point zeroes at
//! least one more cell, so the loop ends after at most `|Θ_ℓ|·|Θ_r|` steps
//! with `x = Σ_j γ_j·π^j/(π_ℓπ_r)`.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ic::check_ic;
use crate::model::{JointDist, Mechanism};
use crate::rational::{ser, Q};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionTerm {
    /// Extreme point `π^j` of `Π(π_ℓ, π_r)`.
    #[serde(serialize_with = "ser::mat")]
    pub extreme: Vec<Vec<Q>>,
    /// Weight in the convex combination for `f/q`.
    #[serde(serialize_with = "ser::rat")]
    pub lambda: Q,
    /// `γ_j = q·λ_j`.
    #[serde(serialize_with = "ser::rat")]
    pub gamma: Q,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionAudit {
    pub reconstructs: bool,
    pub gammas_nonnegative: bool,
    pub extreme_points: bool,
}

impl DecompositionAudit {
    pub fn passed(&self) -> bool {
        self.reconstructs && self.gammas_nonnegative && self.extreme_points
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    /// `f = π_ℓπ_r·x`.
    #[serde(serialize_with = "ser::mat")]
    pub f: Vec<Vec<Q>>,
    #[serde(serialize_with = "ser::rat")]
    pub q: Q,
    pub terms: Vec<DecompositionTerm>,
    pub audit: DecompositionAudit,
}

impl Decomposition {
    /// `Σ_j γ_j·π^j/(π_ℓπ_r)`.
    pub fn reconstruct(&self, pl: &[Q], pr: &[Q]) -> Vec<Vec<Q>> {
        let mut out = vec![vec![Q::zero(); pr.len()]; pl.len()];
        for term in &self.terms {
            for (a, row) in out.iter_mut().enumerate() {
                for (b, cell) in row.iter_mut().enumerate() {
                    *cell += &term.gamma * &term.extreme[a][b] / (&pl[a] * &pr[b]);
                }
            }
        }
        out
    }
}

/// Decompose `x` with respect to the product of the marginals of `dist`.
pub fn decompose(x: &Mechanism, dist: &JointDist) -> Result<Decomposition> {
    let sp = dist.space();
    sp.require_two_agents("decomposition")?;
    x.check_dims(sp)?;
    let indep = dist.independent_counterpart();
    let report = check_ic(x, &indep)?;
    if let Some(v) = report.violations.first() {
        return Err(Error::precondition(
            "IC under independent types",
            format!(
                "agent {} of type {} gains {} by reporting {}",
                sp.agents()[v.agent],
                sp.labels(v.agent)[v.true_type],
                v.gain,
                sp.labels(v.agent)[v.report]
            ),
        ));
    }
    let (pl, pr) = (dist.marginal(0).to_vec(), dist.marginal(1).to_vec());
    let cols = pr.len();
    let f: Vec<Vec<Q>> = x
        .matrix(cols)
        .iter()
        .enumerate()
        .map(|(a, row)| row.iter().enumerate().map(|(b, v)| v * &pl[a] * &pr[b]).collect())
        .collect();
    let q: Q = f.iter().flatten().fold(Q::zero(), |acc, v| acc + v);
    let mut terms = Vec::new();
    if q.is_positive() {
        let mut rest: Vec<Vec<Q>> = f.iter().map(|row| row.iter().map(|v| v / &q).collect()).collect();
        let mut mass = Q::from_integer(1.into());
        while mass.is_positive() {
            let scaled: Vec<Vec<Q>> = rest.iter().map(|row| row.iter().map(|v| v / &mass).collect()).collect();
            let extreme = cancel_cycles(scaled);
            let lambda = extreme
                .iter()
                .flatten()
                .zip(rest.iter().flatten())
                .filter(|(e, _)| e.is_positive())
                .map(|(e, r)| r / e)
                .min()
                .ok_or_else(|| Error::Internal("empty extreme point".into()))?;
            for (rrow, erow) in rest.iter_mut().zip(&extreme) {
                for (r, e) in rrow.iter_mut().zip(erow) {
                    *r -= &lambda * e;
                }
            }
            mass -= &lambda;
            terms.push(DecompositionTerm {
                extreme,
                gamma: &q * &lambda,
                lambda,
            });
        }
    }
    let mut out = Decomposition {
        f,
        q,
        terms,
        audit: DecompositionAudit {
            reconstructs: false,
            gammas_nonnegative: false,
            extreme_points: false,
        },
    };
    out.audit = DecompositionAudit {
        reconstructs: out.reconstruct(&pl, &pr) == x.matrix(cols),
        gammas_nonnegative: out.terms.iter().all(|t| !t.gamma.is_negative()),
        extreme_points: out
            .terms
            .iter()
            .all(|t| is_acyclic_support(&t.extreme) && has_marginals(&t.extreme, &pl, &pr)),
    };
    if !out.audit.passed() {
        return Err(Error::Internal("decomposition failed its audit".into()));
    }
    Ok(out)
}

fn has_marginals(m: &[Vec<Q>], pl: &[Q], pr: &[Q]) -> bool {
    let rows_ok = m.iter().zip(pl).all(|(row, p)| &row.iter().fold(Q::zero(), |a, v| a + v) == p);
    let cols_ok = pr
        .iter()
        .enumerate()
        .all(|(b, p)| &m.iter().fold(Q::zero(), |a, row| a + &row[b]) == p);
    rows_ok && cols_ok && m.iter().flatten().all(|v| !v.is_negative())
}

/// The bipartite row/column graph of the positive cells is a forest.
pub fn is_acyclic_support(m: &[Vec<Q>]) -> bool {
    find_cycle(m).is_none()
}

/// Move mass around support cycles until none remain; marginals are kept.
/// Each cycle is oriented so that its lexicographically smallest cell
/// decreases, and the step zeroes the smallest decreasing cell.
fn cancel_cycles(mut m: Vec<Vec<Q>>) -> Vec<Vec<Q>> {
    while let Some(cycle) = find_cycle(&m) {
        let start = (0..cycle.len()).min_by_key(|&i| cycle[i]).expect("nonempty cycle");
        let decreasing = |i: usize| (i + cycle.len() - start).is_multiple_of(2);
        let step = (0..cycle.len())
            .filter(|&i| decreasing(i))
            .map(|i| m[cycle[i].0][cycle[i].1].clone())
            .min()
            .expect("nonempty cycle");
        for (i, &(r, c)) in cycle.iter().enumerate() {
            if decreasing(i) {
                m[r][c] -= &step;
            } else {
                m[r][c] += &step;
            }
        }
    }
    m
}

/// A cycle of positive cells `(r0,c0), (r0,c1), (r1,c1), …` alternating
/// between shared rows and shared columns, or `None`.
fn find_cycle(m: &[Vec<Q>]) -> Option<Vec<(usize, usize)>> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    // nodes: rows 0..rows, columns rows..rows+cols
    let n = rows + cols;
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|u| {
            if u < rows {
                (0..cols).filter(|&c| m[u][c].is_positive()).map(|c| rows + c).collect()
            } else {
                (0..rows).filter(|&r| m[r][u - rows].is_positive()).collect()
            }
        })
        .collect();
    let mut parent = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut stack = vec![(root, 0usize)];
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            if *next >= adj[u].len() {
                stack.pop();
                continue;
            }
            let w = adj[u][*next];
            *next += 1;
            if w == parent[u] {
                continue;
            }
            if seen[w] {
                // back edge u–w closes a cycle along the DFS stack
                let pos = stack.iter().position(|&(s, _)| s == w)?;
                let path: Vec<usize> = stack[pos..].iter().map(|&(s, _)| s).collect();
                return Some(cells_of(&path, rows));
            }
            seen[w] = true;
            parent[w] = u;
            stack.push((w, 0));
        }
    }
    None
}

/// Consecutive node pairs of a closed bipartite path, as matrix cells.
fn cells_of(path: &[usize], rows: usize) -> Vec<(usize, usize)> {
    (0..path.len())
        .map(|i| {
            let (a, b) = (path[i], path[(i + 1) % path.len()]);
            if a < rows {
                (a, b - rows)
            } else {
                (b, a - rows)
            }
        })
        .collect()
}
