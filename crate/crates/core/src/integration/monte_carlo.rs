use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{IntegralResult, Method};
use crate::error::{Error, Result};
use crate::functions::FunctionSpec;
use crate::geometry::Domain;
use crate::parallel::CHUNK;

#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Welford) -> Welford {
        if other.n == 0 {
            return self;
        }
        if self.n == 0 {
            return other;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Welford {
            n,
            mean: self.mean + delta * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + delta * delta * self.n as f64 * other.n as f64 / n as f64,
        }
    }
}

/// Monte Carlo estimate of `∫_Q g(x) dx` from uniform samples of the
/// parameter cube pushed through the domain map.
///
/// Sample `i` draws its coordinates from the ChaCha8 stream of `seed` at word
/// offset `2·i·param_dim`, so the estimate does not depend on how the
/// samples are split across threads.
pub fn monte_carlo_function<G>(g: G, dom: &Domain, samples: usize, seed: u64) -> Result<IntegralResult>
where
    G: Fn(&[f64]) -> Result<f64> + Sync,
{
    if samples == 0 {
        return Err(Error::Unsupported("Monte Carlo needs at least one sample".into()));
    }
    let k = dom.param_dim();
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<Result<Welford>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * CHUNK;
            let end = (start + CHUNK).min(samples);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_word_pos((start as u128) * 2 * k as u128);
            let mut y = vec![0.0; k];
            let mut acc = Welford::default();
            for _ in start..end {
                y.iter_mut().for_each(|v| *v = rng.random::<f64>());
                acc.push(g(&dom.map_from_cube(&y))?);
            }
            Ok(acc)
        })
        .collect();
    let mut total = Welford::default();
    for p in partial {
        total = total.merge(p?);
    }
    let vol = dom.volume();
    let se = if total.n > 1 {
        vol * (total.m2.max(0.0) / (total.n - 1) as f64 / total.n as f64).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(IntegralResult::estimated(vol * total.mean, Method::MonteCarlo, se))
}

/// Monte Carlo estimate of `∫_Q f(x) dx` for a function family member.
pub fn monte_carlo_integrate(
    f: &FunctionSpec,
    dom: &Domain,
    samples: usize,
    seed: u64,
) -> Result<IntegralResult> {
    if f.dim() != dom.dim() {
        return Err(Error::DimensionMismatch {
            expected: dom.dim(),
            got: f.dim(),
        });
    }
    monte_carlo_function(|x| f.evaluate(x), dom, samples, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoxDomain;
    use crate::parallel::with_threads;

    fn unit_square() -> Domain {
        BoxDomain::new(vec![1.0, 1.0], 1.0).unwrap().into()
    }

    #[test]
    fn constant_is_exact() {
        let r = monte_carlo_function(|_| Ok(1.0), &unit_square(), 10_000, 7).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.error_estimate, Some(0.0));
    }

    #[test]
    fn square_of_sum_within_three_sigma() {
        let f = FunctionSpec::power(vec![1.0, 1.0], 2.0).unwrap();
        let zero_based: Domain = crate::geometry::ZonotopeDomain::new(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![0.0, 0.0],
        )
        .unwrap()
        .into();
        let r = monte_carlo_integrate(&f, &zero_based, 1_000_000, 42).unwrap();
        let se = r.error_estimate.unwrap();
        assert!((r.value - 7.0 / 6.0).abs() <= 3.0 * se, "{} ± {se}", r.value);
    }

    #[test]
    fn independent_of_thread_count() {
        let f = FunctionSpec::exp(vec![1.0, 0.5]).unwrap();
        let dom = unit_square();
        let a = with_threads(1, || monte_carlo_integrate(&f, &dom, 50_000, 3).unwrap());
        let b = with_threads(5, || monte_carlo_integrate(&f, &dom, 50_000, 3).unwrap());
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        let c = monte_carlo_integrate(&f, &dom, 50_000, 4).unwrap();
        assert_ne!(a.value, c.value);
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(monte_carlo_function(|_| Ok(1.0), &unit_square(), 0, 1).is_err());
    }
}
