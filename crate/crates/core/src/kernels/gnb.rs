use super::{argmax, check_dim, Evidence, KernelError, Prediction, ScoreVector};
use crate::model::GnbModel;
use crate::softfloat::Backend;

/// Partial log-likelihood of class `class` over features `lo..hi`:
/// `sum_k log_norm[k] - (x_k - mu_k)^2 / sigma2_k * 0.5`, from zero.
pub(crate) fn gnb_partial(m: &GnbModel, class: usize, x: &[f32], lo: usize, hi: usize, be: &mut Backend) -> f32 {
    let base = class * m.d();
    let mu = &m.mu()[base + lo..base + hi];
    let var = &m.sigma2()[base + lo..base + hi];
    let norm = &m.log_norm()[base + lo..base + hi];
    let mut acc = 0.0f32;
    for k in 0..hi - lo {
        be.other(1);
        let diff = be.sub(x[lo + k], mu[k]);
        let sq = be.mul(diff, diff);
        let q = be.div(sq, var[k]);
        let half = be.mul(q, 0.5);
        let term = be.sub(norm[k], half);
        acc = be.add(acc, term);
    }
    acc
}

/// Per-class joint log-likelihood `log P(c) + sum_k log N(x_k; mu, sigma2)`.
pub fn gnb_scores(m: &GnbModel, x: &[f32], be: &mut Backend) -> Result<ScoreVector, KernelError> {
    check_dim(m.d(), x.len())?;
    let scores = (0..m.n_class())
        .map(|c| {
            let ll = gnb_partial(m, c, x, 0, m.d(), be);
            be.add(ll, m.log_prior()[c])
        })
        .collect();
    Ok(ScoreVector(scores))
}

/// Product-domain joint probability `P(c) * prod_k N(x_k; mu, sigma2)`,
/// with each factor obtained through `exp`. Underflows to zero once the
/// product leaves the binary32 range, which the log-domain scores avoid.
pub fn gnb_product_scores(m: &GnbModel, x: &[f32], be: &mut Backend) -> Result<ScoreVector, KernelError> {
    check_dim(m.d(), x.len())?;
    let d = m.d();
    let scores = (0..m.n_class())
        .map(|c| {
            let mut prod = be.exp(m.log_prior()[c]);
            for k in 0..d {
                be.other(1);
                let i = c * d + k;
                let diff = be.sub(x[k], m.mu()[i]);
                let sq = be.mul(diff, diff);
                let q = be.div(sq, m.sigma2()[i]);
                let half = be.mul(q, 0.5);
                let log_pdf = be.sub(m.log_norm()[i], half);
                let pdf = be.exp(log_pdf);
                prod = be.mul(prod, pdf);
            }
            prod
        })
        .collect();
    Ok(ScoreVector(scores))
}

pub fn gnb_infer(m: &GnbModel, x: &[f32], be: &mut Backend) -> Result<Prediction, KernelError> {
    let raw = gnb_scores(m, x, be)?;
    let class = argmax(raw.as_slice(), be);
    Ok(Prediction { class, evidence: Evidence::Scores { raw, probs: None } })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct product of Gaussian densities in f64.
    fn product_oracle(mu: &[f64], var: &[f64], prior: f64, x: &[f64]) -> f64 {
        mu.iter().zip(var).zip(x).fold(prior, |acc, ((&m, &v), &xi)| {
            acc * (-(xi - m).powi(2) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt()
        })
    }

    #[test]
    fn standard_normal_at_mean() {
        let m = GnbModel::from_moments(1, 1, vec![0.25], vec![1.0], &[1.0]).unwrap();
        let s = gnb_scores(&m, &[0.25], &mut Backend::emulated()).unwrap();
        // -0.5 * ln(2 pi) = -0.9189385332046727
        assert_eq!(s.0[0], -0.918_938_5);
    }

    #[test]
    fn identical_classes_tie_to_zero() {
        let m = GnbModel::from_moments(2, 2, vec![1.0, 2.0, 1.0, 2.0], vec![0.5, 3.0, 0.5, 3.0], &[0.5, 0.5]).unwrap();
        let p = gnb_infer(&m, &[0.3, -1.0], &mut Backend::emulated()).unwrap();
        let raw = match &p.evidence {
            Evidence::Scores { raw, .. } => raw.clone(),
            _ => unreachable!(),
        };
        assert_eq!(raw.0[0].to_bits(), raw.0[1].to_bits());
        assert_eq!(p.class, 0);
    }

    #[test]
    fn two_class_one_feature_hand_case() {
        // Class 0 ~ N(0, 1), class 1 ~ N(4, 1), equal priors; the boundary is x = 2.
        let m = GnbModel::from_moments(2, 1, vec![0.0, 4.0], vec![1.0, 1.0], &[0.5, 0.5]).unwrap();
        let mut be = Backend::emulated();
        assert_eq!(gnb_infer(&m, &[1.9], &mut be).unwrap().class, 0);
        assert_eq!(gnb_infer(&m, &[2.1], &mut be).unwrap().class, 1);
        assert_eq!(gnb_infer(&m, &[2.0], &mut be).unwrap().class, 0);
    }

    #[test]
    fn log_domain_matches_product_oracle_d2() {
        let mu = [0.5f32, -1.0, 2.0, 0.0];
        let var = [0.8f32, 1.5, 0.3, 2.0];
        let priors = [0.3, 0.7];
        let m = GnbModel::from_moments(2, 2, mu.to_vec(), var.to_vec(), &priors).unwrap();
        let x = [0.9f32, -0.2];
        let s = gnb_scores(&m, &x, &mut Backend::emulated()).unwrap();
        let prod = gnb_product_scores(&m, &x, &mut Backend::emulated()).unwrap();
        for c in 0..2 {
            let f = |v: &[f32]| v[c * 2..c * 2 + 2].iter().map(|&a| f64::from(a)).collect::<Vec<_>>();
            let want = product_oracle(&f(&mu), &f(&var), priors[c], &[0.9f32.into(), (-0.2f32).into()]);
            let got = f64::from(s.0[c]).exp();
            assert!(((got - want) / want).abs() < 1e-5, "class {c}: {got} vs {want}");
            let direct = f64::from(prod.0[c]);
            assert!(((direct - want) / want).abs() < 1e-5, "class {c}: {direct} vs {want}");
        }
    }

    #[test]
    fn dimension_checked() {
        let m = GnbModel::from_moments(1, 2, vec![0.0; 2], vec![1.0; 2], &[1.0]).unwrap();
        assert!(matches!(gnb_scores(&m, &[1.0], &mut Backend::native()), Err(KernelError::DimensionMismatch { .. })));
    }
}
