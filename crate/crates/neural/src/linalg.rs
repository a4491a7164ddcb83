//! Dense kernels over row-major slices. A "block" is the column range
//! `off..off + x.len()` of a `rows x ld` matrix.

use crate::scalar::Scalar;

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [T::zero(); 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut s = ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]));
    for (x, y) in ra.iter().zip(rb) {
        s += *x * *y;
    }
    s
}

/// `y += a * x`.
#[inline]
pub fn axpy<T: Scalar>(a: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * *xi;
    }
}

/// `out[r] += W[r, off..off+len] . x` for every row.
pub fn gemv_block<T: Scalar>(w: &[T], rows: usize, ld: usize, off: usize, x: &[T], out: &mut [T]) {
    debug_assert_eq!(out.len(), rows);
    debug_assert!(off + x.len() <= ld);
    for (r, o) in out.iter_mut().enumerate() {
        let row = &w[r * ld + off..r * ld + off + x.len()];
        *o += dot(row, x);
    }
}

/// `out += W x` for a full `rows x cols` matrix.
pub fn gemv<T: Scalar>(w: &[T], rows: usize, cols: usize, x: &[T], out: &mut [T]) {
    gemv_block(w, rows, cols, 0, x, out)
}

/// `out += W[:, off..off+len]^T g`.
pub fn gemv_t_block<T: Scalar>(
    w: &[T],
    rows: usize,
    ld: usize,
    off: usize,
    g: &[T],
    out: &mut [T],
) {
    debug_assert_eq!(g.len(), rows);
    let len = out.len();
    for (r, &gr) in g.iter().enumerate() {
        if gr != T::zero() {
            axpy(gr, &w[r * ld + off..r * ld + off + len], out);
        }
    }
}

pub fn gemv_t<T: Scalar>(w: &[T], rows: usize, cols: usize, g: &[T], out: &mut [T]) {
    gemv_t_block(w, rows, cols, 0, g, out)
}

/// `G[:, off..off+len] += g x^T`.
pub fn ger_block<T: Scalar>(gw: &mut [T], rows: usize, ld: usize, off: usize, g: &[T], x: &[T]) {
    debug_assert_eq!(g.len(), rows);
    for (r, &gr) in g.iter().enumerate() {
        if gr != T::zero() {
            axpy(gr, x, &mut gw[r * ld + off..r * ld + off + x.len()]);
        }
    }
}

pub fn ger<T: Scalar>(gw: &mut [T], rows: usize, cols: usize, g: &[T], x: &[T]) {
    ger_block(gw, rows, cols, 0, g, x)
}

pub fn relu<T: Scalar>(z: &[T]) -> Vec<T> {
    z.iter()
        .map(|&v| if v > T::zero() { v } else { T::zero() })
        .collect()
}

/// `g *= relu'(z)`.
pub fn relu_back<T: Scalar>(z: &[T], g: &mut [T]) {
    for (gi, &zi) in g.iter_mut().zip(z) {
        if zi <= T::zero() {
            *gi = T::zero();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernels() {
        let w: Vec<f64> = (0..6).map(f64::from).collect(); // 2 x 3
        let mut out = vec![0.0; 2];
        gemv(&w, 2, 3, &[1.0, 1.0, 1.0], &mut out);
        assert_eq!(out, vec![3.0, 12.0]);
        let mut out = vec![0.0; 2];
        gemv_block(&w, 2, 3, 1, &[1.0, 2.0], &mut out);
        assert_eq!(out, vec![5.0, 14.0]);
        let mut t = vec![0.0; 3];
        gemv_t(&w, 2, 3, &[1.0, 2.0], &mut t);
        assert_eq!(t, vec![6.0, 9.0, 12.0]);
        let mut g = vec![0.0; 6];
        ger_block(&mut g, 2, 3, 1, &[1.0, 2.0], &[3.0, 4.0]);
        assert_eq!(g, vec![0.0, 3.0, 4.0, 0.0, 6.0, 8.0]);
        let long: Vec<f64> = (0..19).map(f64::from).collect();
        assert_eq!(
            dot(&long, &long),
            (0..19).map(|i| (i * i) as f64).sum::<f64>()
        );
    }
}
