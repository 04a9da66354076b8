//! Small dense linear algebra: column-pivoted Householder QR and
//! minimum-norm least squares.
//!
//! All systems solved in this crate are tiny (at most a few more rows and
//! columns than the space dimension), so a self-contained dense kernel is
//! used instead of an external linear-algebra crate. Rank deficiency is
//! handled explicitly: `min_norm_least_squares` returns the minimizer of
//! `‖x‖` among all least-squares solutions (pseudo-inverse semantics).

use crate::scalar::Scalar;

/// Dense column-major matrix.
#[derive(Clone, Debug)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> T {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[c * self.rows + r]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[c * self.rows + r] = v;
    }

    #[inline]
    fn col(&self, c: usize) -> &[T] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    #[inline]
    fn col_mut(&mut self, c: usize) -> &mut [T] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(a * self.rows + r, b * self.rows + r);
        }
    }
}

/// Relative rank threshold: diagonal entries of `R` smaller than
/// `RANK_TOL * |R[0,0]|` are treated as zero.
const RANK_TOL: f64 = 1e-12;

/// Minimum-norm least-squares solution of `A x ≈ b`.
///
/// Works for any shape (square, over- or underdetermined) and any rank.
/// For full-rank overdetermined systems this is the ordinary least-squares
/// solution; for rank-deficient or underdetermined systems it is the unique
/// minimizer of `‖x‖` among all residual minimizers.
pub fn min_norm_least_squares<T: Scalar>(mut a: Mat<T>, mut b: Vec<T>) -> Vec<T> {
    let m = a.rows();
    let n = a.cols();
    assert_eq!(b.len(), m, "rhs length must match row count");
    let kmax = m.min(n);
    let mut perm: Vec<usize> = (0..n).collect();

    // Column-pivoted Householder QR, transforming b alongside.
    let mut rank = 0;
    let mut first_pivot = T::zero();
    for k in 0..kmax {
        // Pivot on the largest remaining column norm.
        let mut best = k;
        let mut best_norm = col_tail_norm(&a, k, k);
        for c in k + 1..n {
            let nrm = col_tail_norm(&a, c, k);
            if nrm > best_norm {
                best = c;
                best_norm = nrm;
            }
        }
        if k == 0 {
            first_pivot = best_norm;
        }
        let threshold = crate::scalar::cast::<T>(RANK_TOL) * first_pivot;
        if best_norm <= threshold || best_norm == T::zero() {
            break;
        }
        a.swap_cols(k, best);
        perm.swap(k, best);

        // Householder reflector for column k below row k.
        let (v, beta, r_kk) = householder(a.col(k), k);
        a.set(k, k, r_kk);
        for r in k + 1..m {
            a.set(r, k, T::zero());
        }
        for c in k + 1..n {
            apply_householder(&v, beta, k, a.col_mut(c));
        }
        apply_householder(&v, beta, k, &mut b);
        rank = k + 1;
    }

    let r = rank;
    if r == 0 {
        return vec![T::zero(); n];
    }

    // u = R11^{-1} c1, W = R11^{-1} R12 column by column.
    let u = back_substitute(&a, r, &b[..r]);
    let free = n - r;
    let mut w_cols: Vec<Vec<T>> = Vec::with_capacity(free);
    for c in r..n {
        let col: Vec<T> = (0..r).map(|i| a.at(i, c)).collect();
        w_cols.push(back_substitute(&a, r, &col));
    }

    // Minimize ‖(u - W y2, y2)‖ over y2: (I + WᵀW) y2 = Wᵀ u.
    let mut y = vec![T::zero(); n];
    if free == 0 {
        y[..r].copy_from_slice(&u);
    } else {
        let mut gram = Mat::zeros(free, free);
        let mut rhs = vec![T::zero(); free];
        for i in 0..free {
            for j in i..free {
                let mut s = if i == j { T::one() } else { T::zero() };
                for (&wi, &wj) in w_cols[i].iter().zip(w_cols[j].iter()) {
                    s += wi * wj;
                }
                gram.set(i, j, s);
                gram.set(j, i, s);
            }
            rhs[i] = w_cols[i].iter().zip(u.iter()).map(|(&w, &uu)| w * uu).sum();
        }
        let y2 = cholesky_solve(&gram, &rhs);
        for i in 0..r {
            let mut s = u[i];
            for (j, wj) in w_cols.iter().enumerate() {
                s -= wj[i] * y2[j];
            }
            y[i] = s;
        }
        y[r..].copy_from_slice(&y2);
    }

    // Undo the column permutation.
    let mut x = vec![T::zero(); n];
    for (pos, &orig) in perm.iter().enumerate() {
        x[orig] = y[pos];
    }
    x
}

fn col_tail_norm<T: Scalar>(a: &Mat<T>, c: usize, from_row: usize) -> T {
    let col = a.col(c);
    let mut s = T::zero();
    for &v in &col[from_row..] {
        s += v * v;
    }
    s.sqrt()
}

/// Householder vector for `col[from..]`; returns `(v, beta, r_kk)` with the
/// reflector `H = I - beta v vᵀ` acting on components `from..`.
fn householder<T: Scalar>(col: &[T], from: usize) -> (Vec<T>, T, T) {
    let tail = &col[from..];
    let mut norm = T::zero();
    for &v in tail {
        norm += v * v;
    }
    norm = norm.sqrt();
    if norm == T::zero() {
        return (vec![T::zero(); tail.len()], T::zero(), T::zero());
    }
    let alpha = if tail[0] >= T::zero() { -norm } else { norm };
    let mut v: Vec<T> = tail.to_vec();
    v[0] -= alpha;
    let mut vtv = T::zero();
    for &x in &v {
        vtv += x * x;
    }
    let beta = if vtv == T::zero() {
        T::zero()
    } else {
        (T::one() + T::one()) / vtv
    };
    (v, beta, alpha)
}

/// Applies `H = I - beta v vᵀ` to `target[from..]`.
fn apply_householder<T: Scalar>(v: &[T], beta: T, from: usize, target: &mut [T]) {
    if beta == T::zero() {
        return;
    }
    let tail = &mut target[from..];
    let mut dot = T::zero();
    for (t, &vi) in tail.iter().zip(v.iter()) {
        dot += *t * vi;
    }
    let scale = beta * dot;
    for (t, &vi) in tail.iter_mut().zip(v.iter()) {
        *t -= scale * vi;
    }
}

/// Back-substitution with the leading `r x r` upper triangle of `a`.
fn back_substitute<T: Scalar>(a: &Mat<T>, r: usize, rhs: &[T]) -> Vec<T> {
    let mut x = rhs.to_vec();
    for i in (0..r).rev() {
        let mut s = x[i];
        for (j, &xj) in x.iter().enumerate().take(r).skip(i + 1) {
            s -= a.at(i, j) * xj;
        }
        x[i] = s / a.at(i, i);
    }
    x
}

/// Solves an SPD system via Cholesky; used only for the tiny
/// minimum-norm completion system, which is at least as well-conditioned
/// as the identity.
fn cholesky_solve<T: Scalar>(a: &Mat<T>, rhs: &[T]) -> Vec<T> {
    let n = a.rows();
    let mut l = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.at(i, j);
            for k in 0..j {
                s -= l.at(i, k) * l.at(j, k);
            }
            if i == j {
                l.set(i, j, s.max(T::zero()).sqrt());
            } else {
                let d = l.at(j, j);
                l.set(i, j, if d == T::zero() { T::zero() } else { s / d });
            }
        }
    }
    let mut y = rhs.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for (k, &yk) in y.iter().enumerate().take(i) {
            s -= l.at(i, k) * yk;
        }
        let d = l.at(i, i);
        y[i] = if d == T::zero() { T::zero() } else { s / d };
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for (k, &yk) in y.iter().enumerate().skip(i + 1) {
            s -= l.at(k, i) * yk;
        }
        let d = l.at(i, i);
        y[i] = if d == T::zero() { T::zero() } else { s / d };
    }
    y
}
