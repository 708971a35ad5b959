//! Central finite-difference checks of the analytic gradients.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::Rng;
use serde::Serialize;

use super::{loss_and_gradients, Target};
use crate::error::Result;
use crate::model::{ModelParams, PreparedQuestion, TensorId};

pub const FD_STEP: f64 = 1e-5;
/// Denominator floor of the relative error, so that coordinates with a
/// (near) zero gradient are judged by their absolute error.
pub const RELATIVE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TensorCheck {
    pub tensor: &'static str,
    pub coordinates: usize,
    pub max_relative_error: f64,
    pub max_abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientCheck {
    pub tensors: Vec<TensorCheck>,
}

impl GradientCheck {
    pub fn max_relative_error(&self) -> f64 {
        self.tensors.iter().map(|t| t.max_relative_error).fold(0.0, f64::max)
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_FLOOR)
}

fn loss_at(
    params: &ModelParams,
    prepared: &[PreparedQuestion],
    targets: &[Target],
    masks: Option<&[Vec<bool>]>,
) -> Result<f64> {
    loss_and_gradients(params, prepared, targets, masks).map(|(l, _)| l)
}

/// Compares analytic and central-difference derivatives on up to
/// `per_tensor` random coordinates of every tensor (all coordinates for
/// smaller tensors). Embedding coordinates are drawn from the rows of
/// forecasters visible in the batch.
pub fn check_gradients<R: Rng + ?Sized>(
    params: &ModelParams,
    prepared: &[PreparedQuestion],
    targets: &[Target],
    masks: Option<&[Vec<bool>]>,
    per_tensor: usize,
    rng: &mut R,
) -> Result<GradientCheck> {
    let (_, grads) = loss_and_gradients(params, prepared, targets, masks)?;
    let rows: BTreeSet<usize> = targets
        .iter()
        .flat_map(|t| {
            let p = &prepared[t.question];
            p.inputs[..p.visible[t.day]].iter().map(|i| i.features.forecaster_row)
        })
        .collect();
    let rows: Vec<usize> = rows.into_iter().collect();
    let d_e = params.embeddings.dim();

    let mut work = params.clone();
    let mut tensors = Vec::new();
    for &id in &TensorId::ALL {
        let coords: Vec<usize> = if id == TensorId::ForecasterEmbeddings {
            let pool: Vec<usize> = rows.iter().flat_map(|&r| (r * d_e)..((r + 1) * d_e)).collect();
            pick(&pool, per_tensor, rng)
        } else {
            let all: Vec<usize> = (0..params.tensor(id).len()).collect();
            pick(&all, per_tensor, rng)
        };
        let (mut max_rel, mut max_abs) = (0.0f64, 0.0f64);
        for &c in &coords {
            let orig = params.tensor(id)[c];
            work.tensor_mut(id)[c] = orig + FD_STEP;
            let up = loss_at(&work, prepared, targets, masks)?;
            work.tensor_mut(id)[c] = orig - FD_STEP;
            let down = loss_at(&work, prepared, targets, masks)?;
            work.tensor_mut(id)[c] = orig;
            let numeric = (up - down) / (2.0 * FD_STEP);
            let analytic = grads.get(id)[c];
            max_rel = max_rel.max(relative_error(analytic, numeric));
            max_abs = max_abs.max((analytic - numeric).abs());
        }
        tensors.push(TensorCheck {
            tensor: id.name(),
            coordinates: coords.len(),
            max_relative_error: max_rel,
            max_abs_error: max_abs,
        });
    }
    Ok(GradientCheck { tensors })
}

fn pick<R: Rng + ?Sized>(pool: &[usize], k: usize, rng: &mut R) -> Vec<usize> {
    if pool.len() <= k {
        return pool.to_vec();
    }
    sample(rng, pool.len(), k).into_iter().map(|i| pool[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::WordVectorTable;
    use crate::model::tests::{toy_model, toy_tournament};
    use crate::training::{dropout_masks, targets};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn analytic_gradients_match_finite_differences() {
        let t = toy_tournament();
        let words = WordVectorTable::builtin();
        for seed in 0..3 {
            let mut model = toy_model(&t, seed);
            // Nonzero bias and larger output weights exercise every path.
            model.params.b_o = vec![0.2, -0.1, 0.05, 0.3, -0.4];
            model.params.w_o.data.iter_mut().for_each(|w| *w *= 3.0);
            let prep: Vec<_> = t
                .questions()
                .iter()
                .map(|q| model.prepare(&t, q, &words, true).unwrap())
                .collect();
            let all = targets(&prep);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let plain = check_gradients(&model.params, &prep, &all, None, 50, &mut rng).unwrap();
            assert!(plain.max_relative_error() < 1e-4, "{plain:#?}");
            let masks = dropout_masks(&prep, &all, 0.3, &mut rng);
            let dropped = check_gradients(&model.params, &prep, &all, Some(&masks), 50, &mut rng).unwrap();
            assert!(dropped.max_relative_error() < 1e-4, "{dropped:#?}");
            assert!(plain.tensors.iter().all(|c| c.coordinates > 0));
        }
    }

    #[test]
    fn relative_error_floor() {
        assert_eq!(relative_error(0.0, 0.0), 0.0);
        assert_eq!(relative_error(2.0, 1.0), 0.5);
        assert!((relative_error(1e-9, 2e-9) - 1e-3).abs() < 1e-15);
    }
}
