//! Reference checks for the single-sample path: an independently written dense
//! forward pass and a central finite-difference gradient oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use synergy_nn::{Mlp, OutputActivation};

/// Plain f64 forward pass with `W` stored as `(fan_in, fan_out)`.
/// Also returns the ReLU on/off pattern so kink crossings can be detected.
fn reference_forward(sizes: &[usize], params: &[f64], tanh_out: bool, x: &[f64]) -> (Vec<f64>, Vec<bool>) {
    let mut a = x.to_vec();
    let mut pattern = Vec::new();
    let mut off = 0;
    let layers = sizes.len() - 1;
    for l in 0..layers {
        let (n_in, n_out) = (sizes[l], sizes[l + 1]);
        let w = &params[off..off + n_in * n_out];
        let b = &params[off + n_in * n_out..off + n_in * n_out + n_out];
        off += n_in * n_out + n_out;
        let mut z = vec![0.0; n_out];
        for o in 0..n_out {
            let mut s = b[o];
            for i in 0..n_in {
                s += a[i] * w[i * n_out + o];
            }
            z[o] = s;
        }
        a = if l + 1 == layers {
            if tanh_out {
                z.iter().map(|v| v.tanh()).collect()
            } else {
                z
            }
        } else {
            pattern.extend(z.iter().map(|&v| v > 0.0));
            z.iter().map(|&v| v.max(0.0)).collect()
        };
    }
    (a, pattern)
}

#[test]
fn forward_matches_hand_rolled_matmul() {
    let net = Mlp::init(&[4, 8, 3], OutputActivation::Identity, 42).unwrap();
    let params: Vec<f64> = net.params().iter().map(|&p| p as f64).collect();
    let x = [0.7f32, -1.2, 0.05, 2.5];
    let xd: Vec<f64> = x.iter().map(|&v| v as f64).collect();
    let (expected, _) = reference_forward(&[4, 8, 3], &params, false, &xd);
    let got = net.forward(&x).unwrap();
    for (g, e) in got.iter().zip(&expected) {
        assert!((*g as f64 - e).abs() < 1e-6, "{g} vs {e}");
    }
}

/// Relative error with an absolute floor of 1e-6 on the denominator.
fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

fn finite_difference_check(sizes: &[usize], tanh_out: bool, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out = if tanh_out { OutputActivation::Tanh } else { OutputActivation::Identity };
    let net = Mlp::init(sizes, out, seed).unwrap();
    let params: Vec<f64> = net.params().iter().map(|&p| p as f64).collect();
    let dout = *sizes.last().unwrap();
    let c: Vec<f64> = (0..dout).map(|_| rng.random_range(-1.0..1.0)).collect();
    let cf: Vec<f32> = c.iter().map(|&v| v as f32).collect();

    // Draw inputs until no single-parameter perturbation crosses a ReLU kink.
    'draw: for _ in 0..50 {
        let x: Vec<f32> = (0..sizes[0]).map(|_| rng.random_range(-1.0f32..1.0)).collect();
        let xd: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        let (_, base_pattern) = reference_forward(sizes, &params, tanh_out, &xd);
        let loss = |p: &[f64]| {
            let (y, pat) = reference_forward(sizes, p, tanh_out, &xd);
            (y.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>(), pat)
        };
        let mut numeric = Vec::with_capacity(params.len());
        let mut p = params.clone();
        for j in 0..params.len() {
            let h = 1e-3 * params[j].abs().max(1.0);
            p[j] = params[j] + h;
            let (fp, pp) = loss(&p);
            p[j] = params[j] - h;
            let (fm, pm) = loss(&p);
            p[j] = params[j];
            if pp != base_pattern || pm != base_pattern {
                continue 'draw;
            }
            numeric.push((fp - fm) / (2.0 * h));
        }
        let tape = net.forward_recorded(&x).unwrap();
        let analytic = net.backward(&tape, &cf).unwrap().params;
        for (j, (a, n)) in analytic.iter().zip(&numeric).enumerate() {
            assert!(rel_err(*a as f64, *n) < 1e-4, "param {j}: analytic {a} numeric {n}");
        }
        return params.len();
    }
    panic!("could not draw a kink-free input");
}

#[test]
fn backward_matches_central_differences() {
    assert!(finite_difference_check(&[6, 16, 16, 2], true, 1) > 0);
    for seed in 2..12 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let depth = rng.random_range(2..=3);
        let sizes: Vec<usize> = (0..=depth).map(|_| rng.random_range(1..=32)).collect();
        finite_difference_check(&sizes, seed % 2 == 0, seed);
    }
}
