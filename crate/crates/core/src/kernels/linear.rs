use super::{argmax, check_dim, Evidence, KernelError, Prediction, ScoreVector};
use crate::model::{LinearKind, LinearModel};
use crate::softfloat::Backend;

/// `sum_j w[j] * x[j]` from zero, left to right.
pub(crate) fn dot(w: &[f32], x: &[f32], be: &mut Backend) -> f32 {
    let mut acc = 0.0f32;
    for (&wj, &xj) in w.iter().zip(x) {
        be.other(1);
        let p = be.mul(wj, xj);
        acc = be.add(acc, p);
    }
    acc
}

/// `W x + b` for a row-major `rows x d` matrix.
pub fn gemv_bias(w: &[f32], x: &[f32], b: &[f32], be: &mut Backend) -> Result<ScoreVector, KernelError> {
    let rows = b.len();
    let d = x.len();
    check_dim(rows * d, w.len())?;
    if d == 0 {
        return Ok(ScoreVector(b.to_vec()));
    }
    let scores = w
        .chunks_exact(d)
        .zip(b)
        .map(|(row, &bias)| {
            let s = dot(row, x, be);
            be.add(s, bias)
        })
        .collect();
    Ok(ScoreVector(scores))
}

/// Logistic function `1 / (1 + exp(-s))`.
pub fn sigmoid(s: f32, be: &mut Backend) -> f32 {
    let e = be.exp(-s);
    let den = be.add(1.0, e);
    be.div(1.0, den)
}

/// Numerically shifted softmax: `exp(v_i - max) / sum_j exp(v_j - max)`.
pub fn softmax(v: &ScoreVector, be: &mut Backend) -> ScoreVector {
    let v = v.as_slice();
    if v.is_empty() {
        return ScoreVector::default();
    }
    let mut max = v[0];
    for &s in &v[1..] {
        be.other(1);
        if be.lt(max, s) {
            max = s;
        }
    }
    let mut sum = 0.0f32;
    let exps: Vec<f32> = v
        .iter()
        .map(|&s| {
            let shifted = be.sub(s, max);
            let e = be.exp(shifted);
            sum = be.add(sum, e);
            e
        })
        .collect();
    ScoreVector(exps.into_iter().map(|e| be.div(e, sum)).collect())
}

/// Final activation and decision shared by the sequential and parallel paths.
///
/// Multi-row LR decides on the softmax output and SVM on the raw scores.
/// A single-row model is binary: class 1 when the score is positive (for LR,
/// when the sigmoid exceeds one half).
pub(crate) fn decide_linear(kind: LinearKind, raw: ScoreVector, be: &mut Backend) -> Prediction {
    match (kind, raw.len()) {
        (LinearKind::Lr, 1) => {
            let p = sigmoid(raw.0[0], be);
            let class = usize::from(be.lt(0.5, p));
            Prediction { class, evidence: Evidence::Scores { raw, probs: Some(ScoreVector(vec![p])) } }
        }
        (LinearKind::Svm, 1) => {
            let class = usize::from(be.lt(0.0, raw.0[0]));
            Prediction { class, evidence: Evidence::Scores { raw, probs: None } }
        }
        (LinearKind::Lr, _) => {
            let probs = softmax(&raw, be);
            let class = argmax(probs.as_slice(), be);
            Prediction { class, evidence: Evidence::Scores { raw, probs: Some(probs) } }
        }
        (LinearKind::Svm, _) => {
            let class = argmax(raw.as_slice(), be);
            Prediction { class, evidence: Evidence::Scores { raw, probs: None } }
        }
    }
}

/// Sequential inference for either linear kind.
pub fn linear_infer(m: &LinearModel, x: &[f32], be: &mut Backend) -> Result<Prediction, KernelError> {
    check_dim(m.d(), x.len())?;
    let raw = gemv_bias(m.weights(), x, m.bias(), be)?;
    Ok(decide_linear(m.kind(), raw, be))
}

/// Logistic regression: argmax of the softmax of `W x + b`.
pub fn lr_infer(m: &LinearModel, x: &[f32], be: &mut Backend) -> Result<Prediction, KernelError> {
    debug_assert_eq!(m.kind(), LinearKind::Lr);
    linear_infer(m, x, be)
}

/// One-vs-all linear SVM: argmax of `W x + b`.
pub fn svm_infer(m: &LinearModel, x: &[f32], be: &mut Backend) -> Result<Prediction, KernelError> {
    debug_assert_eq!(m.kind(), LinearKind::Svm);
    linear_infer(m, x, be)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ulps(a: f32, b: f32) -> u32 {
        (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs() as u32
    }

    #[test]
    fn gemv_hand_example() {
        let mut be = Backend::emulated();
        let s = gemv_bias(&[1.0, 2.0, 3.0, 4.0], &[1.0, 1.0], &[0.5, -0.5], &mut be).unwrap();
        assert_eq!(s.0, vec![3.5, 6.5]);
        let zero = gemv_bias(&[1.0, 2.0, 3.0, 4.0], &[0.0, 0.0], &[0.5, -0.5], &mut be).unwrap();
        assert_eq!(zero.0, vec![0.5, -0.5]);
        let ident = gemv_bias(&[1.0, 0.0, 0.0, 1.0], &[7.0, -2.5], &[0.0, 0.0], &mut be).unwrap();
        assert_eq!(ident.0, vec![7.0, -2.5]);
        assert!(matches!(
            gemv_bias(&[1.0, 2.0, 3.0], &[1.0, 1.0], &[0.0, 0.0], &mut be),
            Err(KernelError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sigmoid_values() {
        let mut be = Backend::emulated();
        assert_eq!(sigmoid(0.0, &mut be), 0.5);
        assert_eq!(sigmoid(100.0, &mut be), 1.0);
        assert_eq!(sigmoid(-200.0, &mut be), 0.0);
        // 1 / (1 + e^-1) = 0.7310585786300049
        assert!(ulps(sigmoid(1.0, &mut be), 0.731_058_6) <= 4);
    }

    #[test]
    fn softmax_values() {
        let mut be = Backend::emulated();
        assert_eq!(softmax(&ScoreVector(vec![0.0, 0.0]), &mut be).0, vec![0.5, 0.5]);
        for c in [-1e30f32, -3.0, 0.0, 12.5, 1e30] {
            let out = softmax(&ScoreVector(vec![c, c, c]), &mut be);
            assert!(out.0.iter().all(|&p| p == out.0[0]));
            assert!(ulps(out.0[0], 1.0 / 3.0) <= 1);
        }
        // Oracle from f64: exp(i - 3) / sum.
        let want = [0.090_030_57f32, 0.244_728_47, 0.665_240_96];
        let got = softmax(&ScoreVector(vec![1.0, 2.0, 3.0]), &mut be);
        for (g, w) in got.0.iter().zip(want) {
            assert!(ulps(*g, w) <= 4, "{g} vs {w}");
        }
    }

    #[test]
    fn two_class_hand_decision() {
        let m = LinearModel::new(LinearKind::Svm, 2, 2, vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0]).unwrap();
        let p = svm_infer(&m, &[2.0, 1.0], &mut Backend::emulated()).unwrap();
        assert_eq!(p.class, 0);
    }

    #[test]
    fn single_row_models_decide_on_sign() {
        let svm = LinearModel::new(LinearKind::Svm, 1, 1, vec![1.0], vec![0.0]).unwrap();
        let lr = LinearModel::new(LinearKind::Lr, 1, 1, vec![1.0], vec![0.0]).unwrap();
        let mut be = Backend::native();
        for (x, class) in [(2.0, 1), (-2.0, 0), (0.0, 0)] {
            assert_eq!(svm_infer(&svm, &[x], &mut be).unwrap().class, class);
            assert_eq!(lr_infer(&lr, &[x], &mut be).unwrap().class, class);
        }
    }

    fn score_vec() -> impl Strategy<Value = Vec<f32>> {
        prop::collection::vec(-80.0f32..80.0, 1..12)
    }

    proptest! {
        #[test]
        fn softmax_is_a_distribution(v in score_vec()) {
            let mut be = Backend::emulated();
            let out = softmax(&ScoreVector(v), &mut be);
            prop_assert!(out.0.iter().all(|&p| (0.0..=1.0).contains(&p)));
            let sum: f64 = out.0.iter().map(|&p| f64::from(p)).sum();
            // 8 ulp of 1.0 (ulp just below 1 is 2^-24; above, 2^-23).
            prop_assert!((sum - 1.0).abs() <= 8.0 * f64::from(f32::EPSILON), "sum {}", sum);
        }

        #[test]
        fn softmax_preserves_argmax(v in score_vec()) {
            let mut be = Backend::emulated();
            let s = ScoreVector(v);
            let probs = softmax(&s, &mut be);
            // Monotone up to rounding: the winner's probability is maximal.
            let raw_best = argmax(s.as_slice(), &mut be);
            let prob_best = argmax(probs.as_slice(), &mut be);
            prop_assert!(probs.0[raw_best] == probs.0[prob_best]);
            if s.margin() > 1e-3 {
                prop_assert_eq!(raw_best, prob_best);
            }
        }
    }
}
