//! Seeded numerical checks of the dynamic-head mechanics, each compared against a
//! direct oracle.

use std::fmt;

use linelayout::raster::{Bitmap, Rect};
use linelayout::solohead::{
    assign_targets, dice_loss, dice_loss_grad, dynamic_convolve, focal_loss, focal_loss_grad, fuse_pyramid, grid_index,
    matrix_nms, total_loss, GridSpec, LossConfig, TargetInstance, Tensor,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CONV_TOLERANCE: f64 = 1e-6;
pub const NMS_TOLERANCE: f64 = 1e-9;
pub const GRAD_TOLERANCE: f64 = 1e-4;
pub const LOSS_PAIRS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

fn check(name: impl Into<String>, passed: bool, detail: String) -> Check {
    Check { name: name.into(), passed, detail }
}

fn random_tensor(rng: &mut ChaCha8Rng, shape: Vec<usize>, lo: f64, hi: f64) -> Tensor<f64> {
    let n = shape.iter().product();
    Tensor::new(shape, (0..n).map(|_| rng.random_range(lo..hi)).collect()).expect("finite")
}

fn naive_convolve(f: &Tensor<f64>, g: &Tensor<f64>) -> Tensor<f64> {
    let (h, w, e) = (f.shape()[0], f.shape()[1], f.shape()[2]);
    let k = g.shape()[0];
    let mut out = Tensor::zeros(vec![h, w, k]);
    for y in 0..h {
        for x in 0..w {
            for kk in 0..k {
                let mut acc = 0.0;
                for c in 0..e {
                    acc += g.get(&[kk, c]) * f.get(&[y, x, c]);
                }
                out.set(&[y, x, kk], acc);
            }
        }
    }
    out
}

/// Largest relative deviation between an analytic gradient and central differences.
pub fn gradient_error(f: impl Fn(&Tensor<f64>) -> f64, grad: &Tensor<f64>, x: &Tensor<f64>, step: f64) -> f64 {
    (0..x.len())
        .map(|i| {
            let mut hi = x.clone();
            hi.data_mut()[i] += step;
            let mut lo = x.clone();
            lo.data_mut()[i] -= step;
            let fd = (f(&hi) - f(&lo)) / (2.0 * step);
            let a = grad.data()[i];
            (a - fd).abs() / a.abs().max(fd.abs()).max(1e-8)
        })
        .fold(0.0, f64::max)
}

fn bijection_checks(grid: &GridSpec) -> Vec<Check> {
    grid.levels
        .iter()
        .map(|&s| {
            let mut seen = vec![false; s * s];
            let mut ok = true;
            for i in 0..s {
                for j in 0..s {
                    match grid_index(i, j, s) {
                        Ok(k) if k < s * s && !seen[k] => seen[k] = true,
                        _ => ok = false,
                    }
                }
            }
            let ok = ok && seen.iter().all(|&v| v) && grid_index(s, 0, s).is_err();
            check(format!("grid bijection S={s}"), ok, format!("{} cells onto 0..{}", s * s, s * s))
        })
        .collect()
}

fn convolution_checks(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut worst = 0.0f64;
    let mut linear = 0.0f64;
    for _ in 0..20 {
        let (h, w, e, k) =
            (rng.random_range(1..8), rng.random_range(1..8), rng.random_range(1..6), rng.random_range(1..10));
        let f = random_tensor(rng, vec![h, w, e], -1.0, 1.0);
        let g1 = random_tensor(rng, vec![k, e], -1.0, 1.0);
        let g2 = random_tensor(rng, vec![k, e], -1.0, 1.0);
        let out = dynamic_convolve(&f, &g1).expect("shapes agree");
        worst = worst.max(out.max_abs_diff(&naive_convolve(&f, &g1)).expect("same shape"));

        let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let mix = Tensor::new(vec![k, e], g1.data().iter().zip(g2.data()).map(|(x, y)| a * x + b * y).collect())
            .expect("finite");
        let lhs = dynamic_convolve(&f, &mix).expect("shapes agree");
        let o2 = dynamic_convolve(&f, &g2).expect("shapes agree");
        let rhs =
            Tensor::new(lhs.shape().to_vec(), out.data().iter().zip(o2.data()).map(|(x, y)| a * x + b * y).collect())
                .expect("finite");
        linear = linear.max(lhs.max_abs_diff(&rhs).expect("same shape"));
    }
    vec![
        check("dynamic convolution vs naive loop", worst <= CONV_TOLERANCE, format!("max abs diff {worst:.3e}")),
        check("dynamic convolution linearity", linear <= CONV_TOLERANCE, format!("max abs diff {linear:.3e}")),
    ]
}

fn nms_checks(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let sigma = 2.0;
    let mut m = Bitmap::new(24, 24).expect("positive");
    m.fill_rect(Rect::new(3, 4, 10, 8));
    let out = matrix_nms(&[m.clone(), m.clone()], &[0.9, 0.8], &[0, 0], sigma).expect("consistent lengths");
    let decay = out[1] / 0.8;
    let err = (decay - (-1.0f64 / sigma).exp()).abs();

    let disjoint: Vec<Bitmap> = (0..4)
        .map(|i| {
            let mut b = Bitmap::new(24, 24).expect("positive");
            b.fill_rect(Rect::new(6 * i, 6 * i, 5, 5));
            b
        })
        .collect();
    let scores = [0.3, 0.9, 0.5, 0.7];
    let same = matrix_nms(&disjoint, &scores, &[0; 4], sigma).expect("consistent lengths") == scores;

    let mut never_up = true;
    for _ in 0..50 {
        let n = rng.random_range(1..8);
        let masks: Vec<Bitmap> = (0..n)
            .map(|_| {
                let mut b = Bitmap::new(24, 24).expect("positive");
                let (x, y) = (rng.random_range(0..16), rng.random_range(0..16));
                b.fill_rect(Rect::new(x, y, rng.random_range(1..9), rng.random_range(1..9)));
                b
            })
            .collect();
        let s: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let cats: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let d = matrix_nms(&masks, &s, &cats, sigma).expect("consistent lengths");
        never_up &= d.iter().zip(&s).all(|(a, b)| a <= b && *a >= 0.0);
    }
    vec![
        check(
            "matrix NMS identical-mask decay",
            err <= NMS_TOLERANCE,
            format!("decay {decay:.12} vs exp(-1/{sigma}), error {err:.3e}"),
        ),
        check("matrix NMS disjoint identity", same, "4 disjoint masks unchanged".into()),
        check("matrix NMS never raises scores", never_up, "50 random scenes".into()),
    ]
}

fn gradient_checks(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let cfg = LossConfig::<f64>::default();
    let mut focal = 0.0f64;
    let mut dice = 0.0f64;
    for _ in 0..10 {
        let p = random_tensor(rng, vec![6, 6], 0.02, 0.98);
        let y = Tensor::new(vec![6, 6], (0..36).map(|_| if rng.random_bool(0.3) { 1.0 } else { 0.0 }).collect())
            .expect("finite");
        let g = focal_loss_grad(&p, &y, &cfg).expect("same shape");
        focal = focal.max(gradient_error(|x| focal_loss(x, &y, &cfg).expect("same shape"), &g, &p, 1e-6));
        let g = dice_loss_grad(&p, &y, &cfg).expect("same shape");
        dice = dice.max(gradient_error(|x| dice_loss(x, &y, &cfg).expect("same shape"), &g, &p, 1e-6));
    }
    vec![
        check(
            "focal loss gradient",
            focal <= GRAD_TOLERANCE,
            format!("max relative error {focal:.3e} (tolerance {GRAD_TOLERANCE:e})"),
        ),
        check(
            "dice loss gradient",
            dice <= GRAD_TOLERANCE,
            format!("max relative error {dice:.3e} (tolerance {GRAD_TOLERANCE:e})"),
        ),
    ]
}

fn total_loss_check(rng: &mut ChaCha8Rng) -> Check {
    let cfg = LossConfig::<f64>::default();
    let worst = (0..LOSS_PAIRS)
        .map(|_| {
            let (c, m) = (rng.random_range(0.0..5.0), rng.random_range(0.0..5.0));
            (total_loss(c, m, &cfg) - (c + 3.0 * m)).abs()
        })
        .fold(0.0, f64::max);
    check("total loss with lambda = 3", worst <= 1e-12, format!("{LOSS_PAIRS} pairs, max error {worst:.3e}"))
}

fn shape_checks(rng: &mut ChaCha8Rng, grid: &GridSpec) -> Vec<Check> {
    // C2..C5 of a 256 x 80 input
    let dims = [(20usize, 64usize, 4usize), (10, 32, 6), (5, 16, 8), (3, 8, 10)];
    let inputs: Vec<Tensor<f64>> = dims.iter().map(|&(h, w, c)| random_tensor(rng, vec![h, w, c], -1.0, 1.0)).collect();
    let weights = random_tensor(rng, vec![5, 28], -0.5, 0.5);
    let fused = fuse_pyramid(&inputs, &weights, grid).expect("valid pyramid");
    let f_ok = fused.feature.shape() == [80 / 4, 256 / 4, 5];
    let k_ok = fused.kernel_inputs.iter().zip(&grid.levels).all(|(t, &s)| t.shape() == [s, s, 5])
        && fused.kernel_inputs.len() == grid.levels.len();

    let (iw, ih) = (96usize, 64usize);
    let instances: Vec<TargetInstance> = (0..4)
        .map(|c| {
            let mut b = Bitmap::new(iw, ih).expect("positive");
            b.fill_rect(Rect::new(
                rng.random_range(0..70),
                rng.random_range(0..40),
                rng.random_range(4..26),
                rng.random_range(4..24),
            ));
            TargetInstance { mask: b, class: c % grid.classes }
        })
        .collect();
    let targets = assign_targets(&instances, grid, (iw, ih)).expect("valid instances");
    let consistent = targets.iter().all(|l| {
        let cells: Vec<usize> =
            l.positive_cells().into_iter().map(|(i, j)| grid_index(i, j, l.s).expect("in range")).collect();
        cells == l.masks.keys().copied().collect::<Vec<_>>() && !cells.is_empty()
    });
    vec![
        check("mask feature at 1/4 input scale", f_ok, format!("F is {:?}", fused.feature.shape())),
        check(
            "kernel inputs sized by grid",
            k_ok,
            format!("{:?}", fused.kernel_inputs.iter().map(|t| t.shape()[0]).collect::<Vec<_>>()),
        ),
        check("target channels match category cells", consistent, format!("{} levels", targets.len())),
    ]
}

/// Runs every check; the default grid is used throughout.
pub fn run_head_checks(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = GridSpec::default();
    let mut out = bijection_checks(&grid);
    out.extend(convolution_checks(&mut rng));
    out.extend(nms_checks(&mut rng));
    out.extend(gradient_checks(&mut rng));
    out.push(total_loss_check(&mut rng));
    out.extend(shape_checks(&mut rng, &grid));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_seed_passes() {
        let checks = run_head_checks(0);
        for c in &checks {
            assert!(c.passed, "{c}");
        }
        let names: Vec<_> = checks.iter().map(|c| c.name.as_str()).collect();
        for s in [12, 16, 24, 36, 40] {
            assert!(names.contains(&format!("grid bijection S={s}").as_str()));
        }
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(run_head_checks(5), run_head_checks(5));
    }
}
