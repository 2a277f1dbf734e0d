use super::Tensor;
use crate::error::{Error, Result};
use crate::Scalar;

/// Loss weights: `L = L_cate + lambda * L_mask`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig<T> {
    pub lambda: T,
    pub alpha: T,
    pub gamma: T,
    pub dice_eps: T,
    /// Probabilities are clamped to `[clamp, 1 - clamp]` inside the focal loss.
    pub clamp: T,
}

impl<T: Scalar> Default for LossConfig<T> {
    fn default() -> Self {
        Self {
            lambda: T::lit(3.0),
            alpha: T::lit(0.25),
            gamma: T::lit(2.0),
            dice_eps: T::lit(1e-6),
            clamp: T::lit(1e-7),
        }
    }
}

impl<T: Scalar> LossConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = self.lambda > T::zero()
            && self.gamma >= T::zero()
            && self.alpha > T::zero()
            && self.alpha <= T::one()
            && self.dice_eps >= T::zero()
            && self.clamp > T::zero()
            && self.clamp < T::lit(0.5);
        if ok {
            Ok(())
        } else {
            Err(Error::Shape(format!("invalid loss configuration {self:?}")))
        }
    }
}

fn same_shape<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    if a.is_empty() {
        return Err(Error::Shape("empty tensor".into()));
    }
    Ok(())
}

/// `(p_t, alpha_t, dp_t/dp, clamped)` for one element.
fn focal_terms<T: Scalar>(p: T, y: T, cfg: &LossConfig<T>) -> (T, T, T, bool) {
    let lo = cfg.clamp;
    let hi = T::one() - cfg.clamp;
    let clamped = p < lo || p > hi;
    let p = p.max(lo).min(hi);
    if y > T::lit(0.5) {
        (p, cfg.alpha, T::one(), clamped)
    } else {
        (T::one() - p, T::one() - cfg.alpha, -T::one(), clamped)
    }
}

/// Mean over all elements of `-alpha_t (1 - p_t)^gamma ln p_t`, where `p_t = p` and
/// `alpha_t = alpha` on positives, `p_t = 1 - p` and `alpha_t = 1 - alpha` on negatives.
pub fn focal_loss<T: Scalar>(probs: &Tensor<T>, targets: &Tensor<T>, cfg: &LossConfig<T>) -> Result<T> {
    same_shape(probs, targets)?;
    let sum = probs
        .data()
        .iter()
        .zip(targets.data())
        .map(|(&p, &y)| {
            let (pt, at, _, _) = focal_terms(p, y, cfg);
            -at * (T::one() - pt).powf(cfg.gamma) * pt.ln()
        })
        .sum::<T>();
    Ok(sum / T::from_usize_lossy(probs.len()))
}

/// Gradient of [`focal_loss`] with respect to `probs`; zero where the clamp is active.
pub fn focal_loss_grad<T: Scalar>(probs: &Tensor<T>, targets: &Tensor<T>, cfg: &LossConfig<T>) -> Result<Tensor<T>> {
    same_shape(probs, targets)?;
    let n = T::from_usize_lossy(probs.len());
    let data = probs
        .data()
        .iter()
        .zip(targets.data())
        .map(|(&p, &y)| {
            let (pt, at, sign, clamped) = focal_terms(p, y, cfg);
            if clamped {
                return T::zero();
            }
            let q = T::one() - pt;
            let pull =
                if cfg.gamma == T::zero() { T::zero() } else { cfg.gamma * q.powf(cfg.gamma - T::one()) * pt.ln() };
            sign * at * (pull - q.powf(cfg.gamma) / pt) / n
        })
        .collect();
    Tensor::new(probs.shape().to_vec(), data)
}

fn dice_parts<T: Scalar>(pred: &Tensor<T>, gt: &Tensor<T>, eps: T) -> (T, T) {
    let mut inter = T::zero();
    let mut denom = eps;
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        inter += p * g;
        denom += p * p + g * g;
    }
    (inter, denom)
}

/// `1 - 2 sum(p g) / (sum p^2 + sum g^2 + eps)`.
pub fn dice_loss<T: Scalar>(pred: &Tensor<T>, gt: &Tensor<T>, cfg: &LossConfig<T>) -> Result<T> {
    same_shape(pred, gt)?;
    let (inter, denom) = dice_parts(pred, gt, cfg.dice_eps);
    if denom == T::zero() {
        return Ok(T::zero());
    }
    Ok(T::one() - T::lit(2.0) * inter / denom)
}

/// Gradient of [`dice_loss`] with respect to `pred`.
pub fn dice_loss_grad<T: Scalar>(pred: &Tensor<T>, gt: &Tensor<T>, cfg: &LossConfig<T>) -> Result<Tensor<T>> {
    same_shape(pred, gt)?;
    let (inter, denom) = dice_parts(pred, gt, cfg.dice_eps);
    if denom == T::zero() {
        return Ok(Tensor::zeros(pred.shape().to_vec()));
    }
    let d2 = denom * denom;
    let data = pred
        .data()
        .iter()
        .zip(gt.data())
        .map(|(&p, &g)| (T::lit(4.0) * inter * p - T::lit(2.0) * g * denom) / d2)
        .collect();
    Tensor::new(pred.shape().to_vec(), data)
}

/// `cate + lambda * mask`.
pub fn total_loss<T: Scalar>(cate: T, mask: T, cfg: &LossConfig<T>) -> T {
    cate + cfg.lambda * mask
}
