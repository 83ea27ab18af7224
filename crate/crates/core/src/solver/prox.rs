use ndarray::Array1;

use crate::dictionary::GroupPartition;

/// `sign(v) max(|v| - step lambda, 0)` componentwise.
pub fn prox_l1(v: &Array1<f64>, thresholds: &Array1<f64>, step: f64) -> Array1<f64> {
    v.iter()
        .zip(thresholds)
        .map(|(&x, &l)| soft_threshold(x, step * l))
        .collect()
}

#[inline]
pub fn soft_threshold(x: f64, t: f64) -> f64 {
    let m = x.abs() - t;
    if m > 0.0 {
        m.copysign(x)
    } else {
        0.0
    }
}

/// Block soft-thresholding: a block with norm at most `step lambda_k` is
/// zeroed, otherwise it is scaled by `1 - step lambda_k / ||v_G||`.
///
/// Singleton blocks go through [`soft_threshold`] so that a partition of
/// singletons reproduces [`prox_l1`] bit for bit.
pub fn prox_group(
    v: &Array1<f64>,
    groups: &GroupPartition,
    thresholds: &[f64],
    step: f64,
) -> Array1<f64> {
    let mut out = Array1::zeros(v.len());
    for (g, &lambda) in groups.iter().zip(thresholds) {
        let t = step * lambda;
        if let [j] = g.as_slice() {
            out[*j] = soft_threshold(v[*j], t);
            continue;
        }
        let norm = block_norm(v, g);
        if norm > t {
            let shrink = 1.0 - t / norm;
            for &j in g {
                out[j] = v[j] * shrink;
            }
        }
    }
    out
}

/// `||v_G||_2`, computed as `|v_j|` for a singleton.
#[inline]
pub fn block_norm(v: &Array1<f64>, g: &[usize]) -> f64 {
    match g {
        [j] => v[*j].abs(),
        _ => g.iter().map(|&j| v[j] * v[j]).sum::<f64>().sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(0.4, 0.5), 0.0);
        assert_eq!(soft_threshold(-0.5, 0.5), 0.0);
        assert_eq!(soft_threshold(-2.5, 0.5), -2.0);
        let out = prox_l1(&array![3.0, -2.5, 0.1], &array![1.0, 0.25, 1.0], 2.0);
        assert_eq!(out, array![1.0, -2.0, 0.0]);
    }

    #[test]
    fn block_shrinkage() {
        let groups = GroupPartition::new(vec![vec![0, 1], vec![2]], 3).unwrap();
        let out = prox_group(&array![3.0, 4.0, 1.0], &groups, &[2.0, 5.0], 1.0);
        assert_eq!(out, array![3.0 * 0.6, 4.0 * 0.6, 0.0]);
        let killed = prox_group(&array![3.0, 4.0, 1.0], &groups, &[5.0, 0.5], 1.0);
        assert_eq!(killed, array![0.0, 0.0, 0.5]);
    }

    #[test]
    fn singletons_match_l1() {
        let v = array![1.5, -0.2, -3.0, 0.7];
        let lambda = array![0.3, 0.1, 2.0, 0.7];
        let groups = GroupPartition::singletons(4);
        assert_eq!(
            prox_group(&v, &groups, lambda.as_slice().unwrap(), 0.9),
            prox_l1(&v, &lambda, 0.9)
        );
    }
}
