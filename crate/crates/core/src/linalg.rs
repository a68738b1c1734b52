//! Exact Gaussian elimination over ℚ.

use num_traits::{One, Zero};

use crate::expr::Rational;

/// Row-reduces `m` in place; returns the pivot columns.
fn eliminate(m: &mut [Vec<Rational>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(piv) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, piv);
        let inv = Rational::one() / &m[r][c];
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let factor = m[i][c].clone();
                for j in c..cols {
                    let t = &m[r][j] * &factor;
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut m = rows.to_vec();
    eliminate(&mut m).len()
}

pub fn determinant(rows: &[Vec<Rational>]) -> Rational {
    let n = rows.len();
    let mut m = rows.to_vec();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(piv) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return Rational::zero();
        };
        if piv != c {
            m.swap(c, piv);
            det = -det;
        }
        let p = m[c][c].clone();
        det *= &p;
        for i in c + 1..n {
            if m[i][c].is_zero() {
                continue;
            }
            let factor = &m[i][c] / &p;
            for j in c..n {
                let t = &m[c][j] * &factor;
                m[i][j] -= t;
            }
        }
    }
    det
}

/// Coefficients `λ` with `Σ λ_i generators[i] = target`, if any.
pub fn express(generators: &[Vec<Rational>], target: &[Rational]) -> Option<Vec<Rational>> {
    let n = generators.len();
    let dim = target.len();
    // augmented system: columns are generators, last column the target
    let mut m: Vec<Vec<Rational>> = (0..dim)
        .map(|i| {
            let mut row: Vec<Rational> = generators.iter().map(|g| g[i].clone()).collect();
            row.push(target[i].clone());
            row
        })
        .collect();
    let pivots = eliminate(&mut m);
    if pivots.contains(&n) {
        return None;
    }
    let mut out = vec![Rational::zero(); n];
    for (r, &c) in pivots.iter().enumerate() {
        out[c] = m[r][n].clone();
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn mat(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect()
    }

    #[test]
    fn rank_and_det() {
        let m = mat(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]]);
        assert_eq!(rank(&m), 2);
        assert_eq!(determinant(&m), q(0));
        let m = mat(&[&[0, 1], &[1, 0]]);
        assert_eq!(determinant(&m), q(-1));
        let m = mat(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        assert_eq!(determinant(&m), q(18));
    }

    #[test]
    fn express_in_span() {
        let g = mat(&[&[1, 0, 1], &[0, 1, 1]]);
        let t = vec![q(2), q(3), q(5)];
        assert_eq!(express(&g, &t), Some(vec![q(2), q(3)]));
        assert_eq!(express(&g, &[q(1), q(1), q(3)]), None);
    }
}
