//! The Donsker–Varadhan objective and its exact gradient.

use super::network::{TideModel, Workspace};
use super::sample::SampleSet;
use super::{EstimatorError, Result};
use crate::divergence::DiscreteJoint;

/// Core DV formula from precomputed g-values:
/// mean(joint) - log mean(exp(product)), with a max-shift for the
/// log-mean-exp.
pub fn dv_from_values(joint_vals: &[f64], product_vals: &[f64]) -> Result<f64> {
    if joint_vals.is_empty() || product_vals.is_empty() {
        return Err(EstimatorError::EmptyBatch);
    }
    let joint_mean = joint_vals.iter().sum::<f64>() / joint_vals.len() as f64;
    let max = product_vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum_exp: f64 = product_vals.iter().map(|&g| (g - max).exp()).sum();
    let log_mean_exp = max + (sum_exp / product_vals.len() as f64).ln();
    Ok(joint_mean - log_mean_exp)
}

/// DV objective of a model over index pair batches into a sample set.
/// `joint` holds (row, row) pairs from the joint; `product` holds
/// (s_row, x_row) pairs with the s side independently permuted. `prefix`
/// selects the feature prefix the model is evaluated on.
pub fn dv_objective(
    model: &TideModel,
    data: &SampleSet,
    joint: &[(usize, usize)],
    product: &[(usize, usize)],
    prefix: usize,
) -> Result<f64> {
    if joint.is_empty() || product.is_empty() {
        return Err(EstimatorError::EmptyBatch);
    }
    let mut ws = model.workspace();
    let eval = |ws: &mut Workspace, si: usize, xi: usize| -> Result<f64> {
        model.raw_prefix(data.s.row(si), data.x.row(xi), prefix, ws)
    };
    let mut joint_vals = Vec::with_capacity(joint.len());
    for &(si, xi) in joint {
        joint_vals.push(eval(&mut ws, si, xi)?);
    }
    let mut product_vals = Vec::with_capacity(product.len());
    for &(si, xi) in product {
        product_vals.push(eval(&mut ws, si, xi)?);
    }
    dv_from_values(&joint_vals, &product_vals)
}

/// Exact, fully-weighted DV objective of an arbitrary function g over a
/// finite joint: sum_{s,x} P(s,x) g(s,x) - log sum_{s,x} P_S(s) P_X(x) e^{g(s,x)}.
/// At g = the exact information density this equals the joint's mutual
/// information, and no other g does better.
pub fn dv_weighted<G: Fn(usize, usize) -> f64>(g: G, joint: &DiscreteJoint) -> f64 {
    let ms = joint.marginal_s();
    let mx = joint.marginal_x();
    let mut first = 0.0;
    let mut second = 0.0;
    for (s, &p_s) in ms.iter().enumerate() {
        for (x, &p_x) in mx.iter().enumerate() {
            let v = g(s, x);
            let p = joint.mass(s, x);
            if p > 0.0 {
                first += p * v;
            }
            second += p_s * p_x * v.exp();
        }
    }
    first - second.ln()
}

/// Analytic gradient of [`dv_objective`] with respect to the model weights,
/// by reverse accumulation. Returns (objective, gradient). Joint samples
/// receive upstream 1/|J|; product samples receive minus their softmax
/// weight, the derivative of the log-mean-exp term.
pub fn dv_gradient(
    model: &TideModel,
    data: &SampleSet,
    joint: &[(usize, usize)],
    product: &[(usize, usize)],
    prefix: usize,
) -> Result<(f64, Vec<f64>)> {
    if joint.is_empty() || product.is_empty() {
        return Err(EstimatorError::EmptyBatch);
    }
    let mut ws = model.workspace();
    let mut grad = vec![0.0; model.param_count()];

    let mut joint_sum = 0.0;
    let j_weight = 1.0 / joint.len() as f64;
    for &(si, xi) in joint {
        let v = model.raw_prefix(data.s.row(si), data.x.row(xi), prefix, &mut ws)?;
        joint_sum += v;
        if prefix > 0 {
            model.backward(j_weight, &mut ws, &mut grad);
        }
    }

    // product side in one pass: raw outputs are bounded by M, so the
    // unnormalized weights e^{g_k} cannot overflow; accumulate
    // sum_k e^{g_k} grad g_k and divide by the partition sum at the end
    let mut prod_grad = vec![0.0; model.param_count()];
    let mut sum_exp = 0.0;
    for &(si, xi) in product {
        let v = model.raw_prefix(data.s.row(si), data.x.row(xi), prefix, &mut ws)?;
        let w = v.exp();
        sum_exp += w;
        if prefix > 0 {
            model.backward(w, &mut ws, &mut prod_grad);
        }
    }
    let inv_z = 1.0 / sum_exp;
    for (g, p) in grad.iter_mut().zip(&prod_grad) {
        *g -= p * inv_z;
    }

    let objective = joint_sum * j_weight - (sum_exp / product.len() as f64).ln();
    Ok((objective, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::info_density_discrete;
    use crate::estimators::network::{Activation, FeatureLayout};
    use crate::estimators::Matrix;
    use crate::rng::SeedStream;

    #[test]
    fn constant_g_gives_zero() {
        // g == 0 and any constant g: c - log(e^c) = 0
        assert_eq!(dv_from_values(&[0.0; 5], &[0.0; 7]).unwrap(), 0.0);
        let v = dv_from_values(&[1.37; 4], &[1.37; 9]).unwrap();
        assert!(v.abs() < 1e-15, "{v}");
    }

    #[test]
    fn empty_batch_is_error() {
        assert!(matches!(
            dv_from_values(&[], &[0.0]),
            Err(EstimatorError::EmptyBatch)
        ));
        assert!(dv_from_values(&[0.0], &[]).is_err());
    }

    #[test]
    fn weighted_dv_at_exact_density_equals_mi() {
        let joint =
            DiscreteJoint::new(vec![vec![0.35, 0.15], vec![0.05, 0.45]]).unwrap();
        let mi = joint.mutual_information();
        let dv = dv_weighted(
            |s, x| info_density_discrete(&joint, s, x).unwrap(),
            &joint,
        );
        assert!((dv - mi).abs() < 1e-12, "dv {dv} vs mi {mi}");
    }

    // No perturbation of the exact density improves the weighted objective.
    #[test]
    fn dv_optimality_witness() {
        let joint =
            DiscreteJoint::new(vec![vec![0.3, 0.2], vec![0.1, 0.4]]).unwrap();
        let at_optimum = dv_weighted(
            |s, x| info_density_discrete(&joint, s, x).unwrap(),
            &joint,
        );
        let mut stream = SeedStream::new(77);
        for _ in 0..100 {
            let noise: Vec<f64> = (0..4).map(|_| stream.uniform_in(-0.1, 0.1)).collect();
            let perturbed = dv_weighted(
                |s, x| info_density_discrete(&joint, s, x).unwrap() + noise[s * 2 + x],
                &joint,
            );
            assert!(
                perturbed <= at_optimum + 1e-12,
                "perturbation beat the optimum: {perturbed} > {at_optimum}"
            );
        }
    }

    fn toy_setup(stream: &mut SeedStream) -> (TideModel, SampleSet) {
        let n = 6;
        let s = Matrix::new((0..n).map(|i| i as f64 * 0.3 - 1.0).collect(), n, 1).unwrap();
        let x = Matrix::new(
            (0..2 * n).map(|i| (i as f64 * 0.17).sin()).collect(),
            n,
            2,
        )
        .unwrap();
        let data = SampleSet::new(s, x, (0..n).collect(), vec![]).unwrap();
        let model = TideModel::new(
            1,
            FeatureLayout::flat(2),
            &[8, 4],
            5.0,
            Activation::Tanh,
            stream,
        )
        .unwrap();
        (model, data)
    }

    #[test]
    fn duplicated_batch_same_gradient() {
        let mut stream = SeedStream::new(8);
        let (model, data) = toy_setup(&mut stream);
        let single = [(0usize, 0usize)];
        let repeated = [(0usize, 0usize); 5];
        let prod_single = [(1usize, 0usize)];
        let prod_repeated = [(1usize, 0usize); 5];
        let (o1, g1) = dv_gradient(&model, &data, &single, &prod_single, 1).unwrap();
        let (o2, g2) = dv_gradient(&model, &data, &repeated, &prod_repeated, 1).unwrap();
        assert!((o1 - o2).abs() < 1e-14);
        for (a, b) in g1.iter().zip(&g2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    fn finite_difference_gradient(
        model: &TideModel,
        data: &SampleSet,
        joint: &[(usize, usize)],
        product: &[(usize, usize)],
        prefix: usize,
        step: f64,
    ) -> Vec<f64> {
        let mut fd = vec![0.0; model.param_count()];
        let mut m = model.clone();
        for (k, slot) in fd.iter_mut().enumerate() {
            let orig = m.weights()[k];
            m.weights_mut()[k] = orig + step;
            let up = dv_objective(&m, data, joint, product, prefix).unwrap();
            m.weights_mut()[k] = orig - step;
            let down = dv_objective(&m, data, joint, product, prefix).unwrap();
            m.weights_mut()[k] = orig;
            *slot = (up - down) / (2.0 * step);
        }
        fd
    }

    fn max_rel_error(analytic: &[f64], fd: &[f64]) -> f64 {
        analytic
            .iter()
            .zip(fd)
            .map(|(a, n)| {
                let scale = a.abs().max(n.abs()).max(1e-6);
                (a - n).abs() / scale
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut stream = SeedStream::new(9);
        for trial in 0..20 {
            let (model, data) = toy_setup(&mut stream);
            let joint: Vec<(usize, usize)> =
                (0..4).map(|_| { let i = stream.below(6); (i, i) }).collect();
            let product: Vec<(usize, usize)> = (0..4)
                .map(|_| (stream.below(6), stream.below(6)))
                .collect();
            let (_, grad) = dv_gradient(&model, &data, &joint, &product, 1).unwrap();
            let fd = finite_difference_gradient(&model, &data, &joint, &product, 1, 1e-5);
            let err = max_rel_error(&grad, &fd);
            assert!(err < 1e-4, "trial {trial}: max relative error {err}");
        }
    }

    #[test]
    fn gradient_matches_fd_for_all_activations_and_prefixes() {
        let mut stream = SeedStream::new(10);
        for activation in [Activation::Tanh, Activation::Relu, Activation::Elu] {
            let n = 5;
            let s = Matrix::new((0..n).map(|i| i as f64 - 2.0).collect(), n, 1).unwrap();
            let x = Matrix::new(
                (0..3 * n).map(|i| ((i * 7) % 5) as f64 * 0.4 - 1.0).collect(),
                n,
                3,
            )
            .unwrap();
            let data = SampleSet::new(s, x, (0..n).collect(), vec![]).unwrap();
            let model = TideModel::new(
                1,
                FeatureLayout::prefixed(3, 1),
                &[7, 5],
                4.0,
                activation,
                &mut stream,
            )
            .unwrap();
            for prefix in 1..=3 {
                let joint: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
                let product: Vec<(usize, usize)> =
                    (0..n).map(|i| ((i + 2) % n, i)).collect();
                let (_, grad) = dv_gradient(&model, &data, &joint, &product, prefix).unwrap();
                let fd =
                    finite_difference_gradient(&model, &data, &joint, &product, prefix, 1e-5);
                let err = max_rel_error(&grad, &fd);
                assert!(
                    err < 1e-4,
                    "{activation:?} prefix {prefix}: max relative error {err}"
                );
            }
        }
    }
}
