//! Randomized search machinery shared by the region estimators.
//!
//! Every random draw comes from a ChaCha substream keyed by `(seed, index)`,
//! so work items can run on any number of threads and still reproduce the
//! same numbers bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

/// Independent deterministic generator for work item `stream`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One draw from the symmetric Dirichlet distribution on `n` outcomes.
pub fn dirichlet<R: Rng + ?Sized>(rng: &mut R, n: usize, concentration: f64) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let gamma = Gamma::new(concentration, 1.0).expect("positive concentration");
    let mut v: Vec<f64> = (0..n).map(|_| gamma.sample(rng)).collect();
    let s: f64 = v.iter().sum();
    if s > 0.0 && s.is_finite() {
        v.iter_mut().for_each(|x| *x /= s);
    } else {
        // Every gamma draw underflowed; fall back to a random vertex.
        let k = rng.random_range(0..n);
        v = vec![0.0; n];
        v[k] = 1.0;
    }
    v
}

/// Euclidean projection onto the probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    let mut out: Vec<f64> = v.iter().map(|&x| (x - theta).max(0.0)).collect();
    let s: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= s);
    out
}

/// `count` unit directions spanning the closed positive quadrant, starting
/// at `(1, 0)` and ending at `(0, 1)`.
pub fn direction_fan(count: usize) -> Vec<[f64; 2]> {
    match count {
        0 => Vec::new(),
        1 => vec![[std::f64::consts::FRAC_1_SQRT_2; 2]],
        n => (0..n)
            .map(|k| {
                if k == 0 {
                    [1.0, 0.0]
                } else if k == n - 1 {
                    [0.0, 1.0]
                } else {
                    let t = std::f64::consts::FRAC_PI_2 * k as f64 / (n - 1) as f64;
                    [t.cos(), t.sin()]
                }
            })
            .collect(),
    }
}

/// Derivative-free coordinate ascent over the probability simplex.
#[derive(Debug, Clone, Copy)]
pub struct AscentConfig {
    pub sweeps: usize,
    pub step: f64,
}

impl Default for AscentConfig {
    fn default() -> Self {
        AscentConfig {
            sweeps: 50,
            step: 0.05,
        }
    }
}

/// Maximizes `objective` starting from `start`. Each move nudges one entry
/// by `+-step` and projects back onto the simplex; a sweep without any
/// accepted move halves the step.
pub fn coordinate_ascent(
    start: &[f64],
    cfg: AscentConfig,
    mut objective: impl FnMut(&[f64]) -> f64,
) -> (Vec<f64>, f64) {
    let mut x = start.to_vec();
    let mut fx = objective(&x);
    let mut step = cfg.step;
    for _ in 0..cfg.sweeps {
        let mut improved = false;
        for i in 0..x.len() {
            for sign in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] += sign * step;
                let y = project_to_simplex(&y);
                let fy = objective(&y);
                if fy > fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, fx)
}

/// Maps `f` over `items`, on a private pool of `threads` workers when
/// `threads > 1`. Output order always matches input order.
pub fn par_map<T, R, F>(items: &[T], threads: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync + Send,
{
    if threads <= 1 {
        return items.iter().enumerate().map(|(i, t)| f(i, t)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool");
    pool.install(|| items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_projection() {
        let p = project_to_simplex(&[0.5, 0.6]);
        assert!((p[0] - 0.45).abs() < 1e-12 && (p[1] - 0.55).abs() < 1e-12);
        let p = project_to_simplex(&[-0.2, 1.0, 0.3]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&x| x >= 0.0));
        assert_eq!(project_to_simplex(&[0.25; 4]), vec![0.25; 4]);
    }

    #[test]
    fn fan_endpoints() {
        let f = direction_fan(64);
        assert_eq!(f[0], [1.0, 0.0]);
        assert_eq!(f[63], [0.0, 1.0]);
        assert!(f.iter().all(|d| (d[0].hypot(d[1]) - 1.0).abs() < 1e-12));
    }

    #[test]
    fn substreams_are_reproducible_and_distinct() {
        let a: Vec<f64> = dirichlet(&mut substream(7, 3), 5, 1.0);
        let b: Vec<f64> = dirichlet(&mut substream(7, 3), 5, 1.0);
        let c: Vec<f64> = dirichlet(&mut substream(7, 4), 5, 1.0);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ascent_finds_uniform_entropy_maximum() {
        let h = |p: &[f64]| -p.iter().filter(|&&x| x > 0.0).map(|x| x * x.log2()).sum::<f64>();
        let (x, fx) = coordinate_ascent(&[0.7, 0.2, 0.1, 0.0], AscentConfig::default(), h);
        assert!((fx - 2.0).abs() < 1e-3, "{x:?} {fx}");
    }

    #[test]
    fn par_map_is_order_preserving() {
        let items: Vec<u64> = (0..100).collect();
        let seq = par_map(&items, 1, |i, &x| dirichlet(&mut substream(x, i as u64), 3, 0.5));
        let par = par_map(&items, 4, |i, &x| dirichlet(&mut substream(x, i as u64), 3, 0.5));
        assert_eq!(seq, par);
    }
}
