//! Dense vector helpers on slices. Points and directions in this crate are
//! plain `Vec<T>` because the ambient dimension is a runtime quantity.

use crate::scalar::Scalar;

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
pub fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
        .sqrt()
}

#[inline]
pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

#[inline]
pub fn scale<T: Scalar>(a: &[T], k: T) -> Vec<T> {
    a.iter().map(|&x| x * k).collect()
}

/// `y += k * x`
#[inline]
pub fn axpy<T: Scalar>(k: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + k * xi;
    }
}

/// Modified Gram–Schmidt on the rows of `basis`, in place. Returns `false`
/// if a row collapses (norm below `eps` after projection).
pub fn modified_gram_schmidt<T: Scalar>(basis: &mut [Vec<T>], eps: T) -> bool {
    for i in 0..basis.len() {
        let (done, rest) = basis.split_at_mut(i);
        let v = &mut rest[0];
        for q in done.iter() {
            let c = dot(v, q);
            axpy(-c, q, v);
        }
        let n = norm(v);
        if !(n > eps) {
            return false;
        }
        for x in v.iter_mut() {
            *x = *x / n;
        }
    }
    true
}

/// Max absolute entry of `Gram(rows) - I`.
pub fn gram_deviation<T: Scalar>(rows: &[Vec<T>]) -> T {
    let mut worst = T::zero();
    for (i, a) in rows.iter().enumerate() {
        for (j, b) in rows.iter().enumerate() {
            let target = if i == j { T::one() } else { T::zero() };
            worst = worst.max((dot(a, b) - target).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_schmidt_orthonormalizes() {
        let mut b = vec![vec![1.0, 1.0, 0.0], vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]];
        assert!(modified_gram_schmidt(&mut b, 1e-12));
        assert!(gram_deviation(&b) < 1e-14);
    }

    #[test]
    fn gram_schmidt_detects_dependence() {
        let mut b = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(!modified_gram_schmidt(&mut b, 1e-12));
    }
}
