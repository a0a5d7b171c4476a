//! Dense exact Gaussian elimination.
//!
//! Matrices are `&[Vec<Q>]` in row-major order. Nothing here uses a
//! tolerance: a pivot is nonzero or it is not.

use num_traits::{One, Zero};

use crate::rational::{dot, Q};

/// Reduced row echelon form and the pivot column of each nonzero row.
pub fn rref(rows: &[Vec<Q>]) -> (Vec<Vec<Q>>, Vec<usize>) {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Q::one() / &m[r][c];
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = m[r].clone();
        let support: Vec<usize> = (0..ncols).filter(|&k| !pivot_row[k].is_zero()).collect();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for &k in &support {
                row[k] -= &f * &pivot_row[k];
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank(rows: &[Vec<Q>]) -> usize {
    rref(rows).1.len()
}

/// Some solution of `a · x = b`, with free variables set to zero, or `None`
/// when the system is inconsistent.
pub fn solve_linear_system(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    assert_eq!(a.len(), b.len(), "row count of a and b differ");
    let n = a.first().map_or(0, Vec::len);
    let augmented: Vec<Vec<Q>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    if augmented.is_empty() {
        return Some(vec![Q::zero(); n]);
    }
    let (red, pivots) = rref(&augmented);
    if pivots.last() == Some(&n) {
        return None;
    }
    let mut x = vec![Q::zero(); n];
    for (row, &c) in red.iter().zip(&pivots) {
        x[c] = row[n].clone();
    }
    Some(x)
}

/// Coefficients `α` with `Σ_k α_k · generators[k] = target`, if any exist.
pub fn span_coefficients(target: &[Q], generators: &[Vec<Q>]) -> Option<Vec<Q>> {
    let dim = target.len();
    if generators.is_empty() {
        return target.iter().all(Zero::is_zero).then(Vec::new);
    }
    // columns are generators
    let a: Vec<Vec<Q>> = (0..dim)
        .map(|d| generators.iter().map(|g| g[d].clone()).collect())
        .collect();
    solve_linear_system(&a, target)
}

pub fn in_span(target: &[Q], generators: &[Vec<Q>]) -> bool {
    let mut aug = generators.to_vec();
    let before = rank(&aug);
    aug.push(target.to_vec());
    rank(&aug) == before
}

/// Orthogonal decomposition `target = projection + residual` under the
/// standard inner product, with `projection` in the span of the generators.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub projection: Vec<Q>,
    pub residual: Vec<Q>,
    /// Some `λ` with `projection = Σ_k λ_k · generators[k]`.
    pub coefficients: Vec<Q>,
}

/// Project via the normal equations `(G Gᵀ) λ = G t`, solved by elimination.
/// Rank-deficient generator sets are fine: the system is always consistent
/// and any solution yields the same projection.
pub fn orthogonal_projection(target: &[Q], generators: &[Vec<Q>]) -> Projection {
    let dim = target.len();
    for g in generators {
        assert_eq!(g.len(), dim, "generator dimension differs from target");
    }
    let k = generators.len();
    let gram: Vec<Vec<Q>> = (0..k)
        .map(|i| (0..k).map(|j| dot(&generators[i], &generators[j])).collect())
        .collect();
    let rhs: Vec<Q> = generators.iter().map(|g| dot(g, target)).collect();
    let coefficients = solve_linear_system(&gram, &rhs)
        .expect("normal equations are always consistent");
    let mut projection = vec![Q::zero(); dim];
    for (g, l) in generators.iter().zip(&coefficients) {
        if l.is_zero() {
            continue;
        }
        for (p, gi) in projection.iter_mut().zip(g) {
            *p += l * gi;
        }
    }
    let residual = target.iter().zip(&projection).map(|(t, p)| t - p).collect();
    Projection {
        projection,
        residual,
        coefficients,
    }
}

pub fn transpose(m: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols).map(|c| m.iter().map(|r| r[c].clone()).collect()).collect()
}

pub fn mat_vec(m: &[Vec<Q>], v: &[Q]) -> Vec<Q> {
    m.iter().map(|r| dot(r, v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn v(xs: &[i64]) -> Vec<Q> {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn rank_of_dependent_rows() {
        let m = vec![v(&[1, 2, 3]), v(&[2, 4, 6]), v(&[0, 1, 1])];
        assert_eq!(rank(&m), 2);
        assert_eq!(rank(&[]), 0);
        assert_eq!(rank(&[v(&[0, 0])]), 0);
    }

    #[test]
    fn solves_consistent_and_flags_inconsistent() {
        let a = vec![v(&[1, 1]), v(&[1, -1])];
        let x = solve_linear_system(&a, &v(&[3, 1])).unwrap();
        assert_eq!(x, v(&[2, 1]));
        let a = vec![v(&[1, 1]), v(&[2, 2])];
        assert!(solve_linear_system(&a, &v(&[1, 3])).is_none());
    }

    #[test]
    fn span_membership() {
        let gens = vec![v(&[1, 0]), v(&[0, 1])];
        assert!(in_span(&v(&[1, 1]), &gens));
        assert!(!in_span(&v(&[1, 1]), &[v(&[1, 0])]));
        assert!(in_span(&v(&[0, 0]), &[]));
        let alpha = span_coefficients(&v(&[3, -2]), &gens).unwrap();
        assert_eq!(alpha, v(&[3, -2]));
    }

    #[test]
    fn projection_of_member_has_zero_residual() {
        let gens = vec![v(&[1, 1, 0]), v(&[0, 1, 1]), v(&[1, 2, 1])];
        let p = orthogonal_projection(&v(&[2, 3, 1]), &gens);
        assert!(p.residual.iter().all(Zero::is_zero));
        assert_eq!(p.projection, v(&[2, 3, 1]));
    }

    #[test]
    fn projection_of_orthogonal_target_is_zero() {
        let gens = vec![v(&[1, 1, 0])];
        let p = orthogonal_projection(&v(&[1, -1, 5]), &gens);
        assert!(p.projection.iter().all(Zero::is_zero));
        assert_eq!(p.residual, v(&[1, -1, 5]));
    }

    #[test]
    fn projection_onto_line() {
        let p = orthogonal_projection(&v(&[1, 0]), &[v(&[1, 1])]);
        assert_eq!(p.projection, vec![ratio(1, 2), ratio(1, 2)]);
        assert_eq!(p.residual, vec![ratio(1, 2), ratio(-1, 2)]);
    }
}
