//! Exact symbolic matrices with generic rank certificates.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::sym::{Evaluator, Expr, Monomial, Rational, SymError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("matrix shape mismatch: {0}")]
    Shape(String),
    #[error("selected submatrix is singular")]
    SingularSubmatrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymMatrix {
    pub rows: usize,
    pub cols: usize,
    entries: Vec<Expr>,
}

impl SymMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Expr>) -> Result<Self, LinalgError> {
        if entries.len() != rows * cols {
            return Err(LinalgError::Shape(format!(
                "{} entries for {rows}x{cols}",
                entries.len()
            )));
        }
        Ok(SymMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        SymMatrix {
            rows,
            cols,
            entries: vec![Expr::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SymMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Expr::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Expr) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        SymMatrix {
            rows,
            cols,
            entries,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, e: Expr) {
        self.entries[i * self.cols + j] = e;
    }

    pub fn entries(&self) -> &[Expr] {
        &self.entries
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> SymMatrix {
        SymMatrix::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    pub fn transpose(&self) -> SymMatrix {
        SymMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, o: &SymMatrix) -> Result<SymMatrix, LinalgError> {
        if self.cols != o.rows {
            return Err(LinalgError::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        Ok(SymMatrix::from_fn(self.rows, o.cols, |i, j| {
            (0..self.cols).map(|k| self.get(i, k) * o.get(k, j)).sum()
        }))
    }

    pub fn mul_vec(&self, v: &[Expr]) -> Vec<Expr> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|k| self.get(i, k) * &v[k]).sum())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Expr::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let e = self.get(i, j);
                    if i == j {
                        *e == Expr::one()
                    } else {
                        e.is_zero()
                    }
                })
            })
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Result<Expr, SymError>) -> Result<SymMatrix, SymError> {
        Ok(SymMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect::<Result<_, _>>()?,
        })
    }

    /// Rows as nested vectors of display strings.
    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).to_string()).collect())
            .collect()
    }

    pub fn eval(&self, ev: &Evaluator) -> Result<Vec<Vec<Rational>>, SymError> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| ev.eval(self.get(i, j))).collect())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankCertificate {
    pub rank: usize,
    /// 0-based original row indices, in pivot order.
    pub pivot_rows: Vec<usize>,
    pub pivot_cols: Vec<usize>,
    #[serde(serialize_with = "ser_exprs")]
    pub side_conditions: Vec<Expr>,
}

fn ser_exprs<S: serde::Serializer>(v: &[Expr], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|e| e.to_string()))
}

/// The nonvanishing requirement carried by `e`, made monic. A lone exp
/// factor is oriented so its exponent has positive leading coefficient.
pub fn condition_form(e: &Expr) -> Expr {
    let mut n = e.numerator();
    if let Some((m, _)) = n.num_poly().as_single_term() {
        let x = m.exp_part();
        if !x.is_zero() && x.leading_coeff() < Rational::zero() {
            let flip = Monomial::exp_of(x.neg()).pow(2);
            n = Expr::from_poly(n.num_poly().mul_monomial(&flip));
        }
    }
    let lc = n.num_poly().leading_coeff();
    if lc.is_zero() {
        return n;
    }
    n.scale(&lc.recip())
}

fn pivot_key(e: &Expr) -> (u8, usize) {
    (if e.is_nonzero_literal() { 0 } else { 1 }, e.size())
}

/// Generic rank by fraction-free elimination with full pivoting.
pub fn generic_rank(m: &SymMatrix) -> RankCertificate {
    let mut a = m.clone();
    let mut row_ids: Vec<usize> = (0..m.rows).collect();
    let mut col_ids: Vec<usize> = (0..m.cols).collect();
    let mut prev = Expr::one();
    let mut side = Vec::new();
    let mut k = 0;
    while k < m.rows.min(m.cols) {
        let mut best: Option<((u8, usize, usize, usize), usize, usize)> = None;
        for i in k..m.rows {
            for j in k..m.cols {
                let e = a.get(i, j);
                if e.is_zero() {
                    continue;
                }
                let (lit, size) = pivot_key(e);
                let key = (lit, size, row_ids[i], col_ids[j]);
                if best.as_ref().map(|b| key < b.0).unwrap_or(true) {
                    best = Some((key, i, j));
                }
            }
        }
        let Some((_, pi, pj)) = best else { break };
        swap_rows(&mut a, k, pi);
        row_ids.swap(k, pi);
        swap_cols(&mut a, k, pj);
        col_ids.swap(k, pj);
        let piv = a.get(k, k).clone();
        if !piv.is_nonzero_literal() {
            let c = condition_form(&piv);
            if !c.is_nonzero_literal() && !side.contains(&c) {
                side.push(c);
            }
        }
        for i in (k + 1)..m.rows {
            for j in (k + 1)..m.cols {
                let v = (&piv * a.get(i, j) - a.get(i, k) * a.get(k, j))
                    .div(&prev)
                    .expect("previous pivot is nonzero");
                a.set(i, j, v);
            }
            a.set(i, k, Expr::zero());
        }
        prev = piv;
        k += 1;
    }
    RankCertificate {
        rank: k,
        pivot_rows: row_ids[..k].to_vec(),
        pivot_cols: col_ids[..k].to_vec(),
        side_conditions: side,
    }
}

fn swap_rows(a: &mut SymMatrix, i: usize, j: usize) {
    if i == j {
        return;
    }
    for c in 0..a.cols {
        let t = a.get(i, c).clone();
        let u = a.get(j, c).clone();
        a.set(i, c, u);
        a.set(j, c, t);
    }
}

fn swap_cols(a: &mut SymMatrix, i: usize, j: usize) {
    if i == j {
        return;
    }
    for r in 0..a.rows {
        let t = a.get(r, i).clone();
        let u = a.get(r, j).clone();
        a.set(r, i, u);
        a.set(r, j, t);
    }
}

/// Inverse of the square submatrix selected by `rows` and `cols`.
pub fn invert_submatrix(
    m: &SymMatrix,
    rows: &[usize],
    cols: &[usize],
) -> Result<SymMatrix, LinalgError> {
    if rows.len() != cols.len() {
        return Err(LinalgError::Shape("submatrix is not square".into()));
    }
    invert(&m.submatrix(rows, cols))
}

pub fn invert(b: &SymMatrix) -> Result<SymMatrix, LinalgError> {
    if b.rows != b.cols {
        return Err(LinalgError::Shape("matrix is not square".into()));
    }
    let n = b.rows;
    let mut a = b.clone();
    let mut inv = SymMatrix::identity(n);
    for k in 0..n {
        let mut best: Option<((u8, usize), usize)> = None;
        for i in k..n {
            let e = a.get(i, k);
            if e.is_zero() {
                continue;
            }
            let key = pivot_key(e);
            if best.as_ref().map(|b| key < b.0).unwrap_or(true) {
                best = Some((key, i));
            }
        }
        let Some((_, pi)) = best else {
            return Err(LinalgError::SingularSubmatrix);
        };
        swap_rows(&mut a, k, pi);
        swap_rows(&mut inv, k, pi);
        let piv = a.get(k, k).clone();
        let r = piv.recip().expect("pivot is nonzero");
        for j in 0..n {
            a.set(k, j, a.get(k, j) * &r);
            inv.set(k, j, inv.get(k, j) * &r);
        }
        for i in 0..n {
            if i == k {
                continue;
            }
            let f = a.get(i, k).clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..n {
                a.set(i, j, a.get(i, j) - &f * a.get(k, j));
                inv.set(i, j, inv.get(i, j) - &f * inv.get(k, j));
            }
        }
    }
    Ok(inv)
}

/// One null vector per non-pivot column: unit on that column, zero on the
/// other non-pivot columns, completed on the pivot columns.
pub fn null_space_basis(m: &SymMatrix, cert: &RankCertificate) -> Vec<Vec<Expr>> {
    let binv = if cert.rank > 0 {
        invert_submatrix(m, &cert.pivot_rows, &cert.pivot_cols)
            .expect("pivot block of a rank certificate is nonsingular")
    } else {
        SymMatrix::zeros(0, 0)
    };
    let mut out = Vec::new();
    for mu in 0..m.cols {
        if cert.pivot_cols.contains(&mu) {
            continue;
        }
        let mut b = vec![Expr::zero(); m.cols];
        b[mu] = Expr::one();
        for (t, &pc) in cert.pivot_cols.iter().enumerate() {
            let s: Expr = cert
                .pivot_rows
                .iter()
                .enumerate()
                .map(|(si, &pr)| binv.get(t, si) * m.get(pr, mu))
                .sum();
            b[pc] = -s;
        }
        out.push(b);
    }
    out
}

/// Rank of a rational matrix.
pub fn rational_rank(rows: &[Vec<Rational>]) -> usize {
    let mut a: Vec<Vec<Rational>> = rows.to_vec();
    let ncols = a.first().map(|r| r.len()).unwrap_or(0);
    let mut rank = 0;
    for c in 0..ncols {
        let Some(p) = (rank..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        for i in 0..a.len() {
            if i != rank && !a[i][c].is_zero() {
                let f = &a[i][c] / &a[rank][c];
                for j in c..ncols {
                    let d = &f * &a[rank][j];
                    a[i][j] -= d;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Rank of `m` at a point.
pub fn numeric_rank(m: &SymMatrix, values: &BTreeMap<String, Rational>) -> Result<usize, SymError> {
    Ok(rational_rank(&m.eval(&Evaluator::new(values.clone()))?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_q2() -> Expr {
        Expr::exp(&Expr::sym("q2")).unwrap()
    }

    fn diag(v: Vec<Expr>) -> SymMatrix {
        let n = v.len();
        SymMatrix::from_fn(n, n, |i, j| if i == j { v[i].clone() } else { Expr::zero() })
    }

    #[test]
    fn rank_of_diagonal_and_zero() {
        let c = generic_rank(&diag(vec![Expr::one(), Expr::zero(), Expr::zero()]));
        assert_eq!((c.rank, c.pivot_cols.clone()), (1, vec![0]));
        assert!(c.side_conditions.is_empty());
        assert_eq!(generic_rank(&SymMatrix::zeros(2, 2)).rank, 0);
    }

    #[test]
    fn exp_pivot_is_recorded() {
        let m = diag(vec![exp_q2(), Expr::zero()]);
        let c = generic_rank(&m);
        assert_eq!(c.rank, 1);
        assert_eq!(c.side_conditions, vec![exp_q2()]);
        assert_eq!(null_space_basis(&m, &c), vec![vec![Expr::zero(), Expr::one()]]);
    }

    #[test]
    fn inverse_of_exp_entry() {
        let m = diag(vec![exp_q2()]);
        let inv = invert(&m).unwrap();
        assert_eq!(*inv.get(0, 0), Expr::exp(&-Expr::sym("q2")).unwrap());
        assert!(invert(&SymMatrix::zeros(1, 1)).is_err());
    }

    #[test]
    fn null_vectors_annihilate() {
        let x = Expr::sym("x");
        let m = SymMatrix::new(
            2,
            3,
            vec![x.clone(), Expr::one(), Expr::int(2), &x * &x, x.clone(), &x * Expr::int(2)],
        )
        .unwrap();
        let c = generic_rank(&m);
        assert_eq!(c.rank, 1);
        for b in null_space_basis(&m, &c) {
            assert!(m.mul_vec(&b).iter().all(Expr::is_zero));
        }
    }
}
