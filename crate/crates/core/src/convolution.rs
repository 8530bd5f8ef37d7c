//! Discrete nabla and delta convolutions.
//!
//! Inner sums always run over ascending indices with plain sequential
//! accumulation, so reindexed identities between the two convolutions hold
//! bit for bit.

use crate::error::{Error, Result};
use crate::grid::{backward_difference, GridFunction};
use crate::kernels::Kernel;
use crate::scalar::Real;

/// `(p ∗ q)^∇(x0 + k) = Σ_{j=1..k} p(k − j + 1) q(j)` for `k = 0..=N`.
///
/// Same base as `q`; offset 0 is the empty sum and `q(0)` is never read.
pub fn nabla_convolution<T: Real>(p: &Kernel<T>, q: &GridFunction<T>) -> Result<GridFunction<T>> {
    let n = q.length();
    let table = p.table(n)?;
    let qv = q.values();
    let mut out = Vec::with_capacity(n + 1);
    out.push(T::zero());
    for k in 1..=n {
        let mut acc = T::zero();
        for j in 1..=k {
            acc = acc + table[k - j + 1] * qv[j];
        }
        out.push(acc);
    }
    Ok(GridFunction::from_parts_unchecked(q.base(), out))
}

/// `(p ∗ q)^Δ(x0 + k) = Σ_{j=0..k−1} p(k − 1 − j) q(j)` for `k = 0..=N+1`.
///
/// Same base as `q`; offset 0 is the empty sum. The result is one point
/// longer than `q`, since the value at `x0 + N + 1` only needs `q` up to `x0 + N`.
/// Kernel offsets are counted from the convolution base, starting at 0.
pub fn delta_convolution<T: Real>(p: &Kernel<T>, q: &GridFunction<T>) -> Result<GridFunction<T>> {
    let n = q.length();
    let table = p.table(n)?;
    let qv = q.values();
    let mut out = Vec::with_capacity(n + 2);
    out.push(T::zero());
    for k in 1..=n + 1 {
        let mut acc = T::zero();
        for j in 0..k {
            acc = acc + table[k - 1 - j] * qv[j];
        }
        out.push(acc);
    }
    Ok(GridFunction::from_parts_unchecked(q.base(), out))
}

/// `∇(p ∗ q)^∇` on `x0 + 1 ..= x0 + N`, taken as the literal difference of
/// consecutive convolution values. The result has base `x0 + 1`.
pub fn nabla_of_convolution<T: Real>(
    p: &Kernel<T>,
    q: &GridFunction<T>,
) -> Result<GridFunction<T>> {
    if q.length() == 0 {
        return Err(Error::EmptyGrid);
    }
    backward_difference(&nabla_convolution(p, q)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{Kernel, MlParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ones(n: usize) -> GridFunction<f64> {
        GridFunction::constant(0.0, n, 1.0).unwrap()
    }

    fn random_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect()
    }

    #[test]
    fn nabla_examples() {
        let c = Kernel::constant();
        assert_eq!(nabla_convolution(&c, &ones(4)).unwrap().at(4), 4.0);

        let q = Kernel::<f64>::rl_diff(0.5).unwrap().sample(0.0, 5).unwrap();
        let r = nabla_convolution(&Kernel::rl_sum(0.5).unwrap(), &q).unwrap();
        assert!((r.at(2) - 1.0).abs() < 1e-15);

        let q = Kernel::exponential(0.5).unwrap().sample(0.0, 3).unwrap();
        assert_eq!(nabla_convolution(&c, &q).unwrap().at(2), 0.75);
    }

    #[test]
    fn offset_zero_is_the_empty_sum() {
        let y = GridFunction::new(1.5, vec![42.0, 1.0, 2.0]).unwrap();
        let r = nabla_convolution(&Kernel::constant(), &y).unwrap();
        assert_eq!(r.at(0), 0.0);
        assert_eq!(r.base(), 1.5);
        let r = delta_convolution(&Kernel::constant(), &y).unwrap();
        assert_eq!(r.at(0), 0.0);
        assert_eq!(r.length(), 3);
    }

    #[test]
    fn delta_examples() {
        assert_eq!(
            delta_convolution(&Kernel::constant(), &ones(3))
                .unwrap()
                .at(3),
            3.0
        );
        // kernel offset 0 enters the delta sum
        let p = Kernel::tabulated("p", vec![10.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        let q = GridFunction::new(0.0, vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(
            delta_convolution(&p, &q).unwrap().values(),
            &[0.0, 10.0, 21.0, 32.0]
        );
    }

    #[test]
    fn nabla_of_convolution_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y = GridFunction::new(0.0, random_values(&mut rng, 12)).unwrap();
        let d = nabla_of_convolution(&Kernel::constant(), &y).unwrap();
        assert_eq!(d.base(), 1.0);
        for k in 1..=11 {
            assert!((d.at(k - 1) - y.at(k)).abs() < 1e-15);
        }

        let d = nabla_of_convolution(&Kernel::rl_diff(0.5).unwrap(), &ones(2)).unwrap();
        assert!((d.at(0) - 1.0).abs() < 1e-15 && (d.at(1) - 0.5).abs() < 1e-15);

        let d = nabla_of_convolution(&Kernel::exponential(0.5).unwrap(), &ones(2)).unwrap();
        assert_eq!(d.at(1), 0.25);

        assert_eq!(
            nabla_of_convolution(&Kernel::constant(), &ones(0)),
            Err(Error::EmptyGrid)
        );
    }

    #[test]
    fn nabla_convolution_commutes() {
        let ml = Kernel::mittag_leffler(MlParams::new(0.3, 1.0, -3.0 / 7.0).unwrap());
        let kernels = [
            Kernel::<f64>::rl_sum(0.3).unwrap(),
            Kernel::rl_diff(0.7).unwrap(),
            Kernel::exponential(0.4).unwrap(),
            ml,
            Kernel::constant(),
        ];
        let n = 120;
        for p in &kernels {
            for q in &kernels {
                let pq = nabla_convolution(p, &q.sample(0.0, n).unwrap()).unwrap();
                let qp = nabla_convolution(q, &p.sample(0.0, n).unwrap()).unwrap();
                for k in 0..=n {
                    let scale = pq.at(k).abs().max(1.0);
                    assert!(
                        (pq.at(k) - qp.at(k)).abs() <= 1e-12 * scale,
                        "{p} * {q} at {k}"
                    );
                }
            }
        }
    }

    #[test]
    fn delta_at_shifted_base_is_bitwise_the_nabla_convolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let n = 50;
            let p = Kernel::tabulated("p", random_values(&mut rng, n + 2)).unwrap();
            let q = GridFunction::new(-3.0, random_values(&mut rng, n + 1)).unwrap();
            let nabla = nabla_convolution(&p, &q).unwrap();
            let delta = delta_convolution(&p.advanced(1), &q.rebased(1).unwrap()).unwrap();
            assert_eq!(delta.base(), -2.0);
            for k in 1..=n {
                assert_eq!(delta.at(k).to_bits(), nabla.at(k).to_bits());
            }
        }
    }

    #[test]
    fn boundary_expansion_of_the_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let kernels = [
            Kernel::<f64>::rl_diff(0.5).unwrap(),
            Kernel::exponential(0.4).unwrap(),
            Kernel::mittag_leffler(MlParams::new(0.3, 1.0, -3.0 / 7.0).unwrap()),
        ];
        for q in &kernels {
            let n = 60;
            let y = GridFunction::new(0.0, random_values(&mut rng, n + 1)).unwrap();
            let lhs = nabla_of_convolution(q, &y).unwrap();
            let dy = backward_difference(&y).unwrap().extended_back(0.0);
            let conv = nabla_convolution(q, &dy).unwrap();
            let tol = 1e-10 * y.max_abs();
            for k in 1..=n {
                let rhs = y.at(0) * q.value(k).unwrap() + conv.at(k);
                assert!((lhs.at(k - 1) - rhs).abs() <= tol, "{q} at {k}");
            }
        }
    }
}
