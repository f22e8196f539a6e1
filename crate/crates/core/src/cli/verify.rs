//! Built-in identity suite run by `pgap verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::envelope::{concave_envelope, integrate_envelope};
use crate::error::Error;
use crate::functions::FunctionSpec;
use crate::geometry::{BoxDomain, Domain};
use crate::integration::{
    exp_cube_product, exp_cube_triangulation, integrate_power_multinomial,
    integrate_power_triangulation, power_lower_bound, shifted_power_multinomial,
    shifted_power_triangulation,
};
use crate::relaxation::{vol_naive, vol_perspective, MuKind};

/// Outcome of one identity over all its random cases.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IdentityCheck {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    /// Largest observed violation, in the identity's own error measure.
    pub max_error: f64,
    pub tolerance: f64,
}

struct Tally {
    name: &'static str,
    tolerance: f64,
    cases: usize,
    max_error: f64,
    failed: bool,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            tolerance,
            cases: 0,
            max_error: 0.0,
            failed: false,
        }
    }

    fn record(&mut self, err: f64) {
        self.cases += 1;
        if err.is_nan() || err > self.tolerance {
            self.failed = true;
        }
        if err.is_nan() {
            self.max_error = f64::NAN;
        } else if !self.max_error.is_nan() {
            self.max_error = self.max_error.max(err);
        }
    }

    fn fail(&mut self) {
        self.cases += 1;
        self.failed = true;
    }

    fn finish(self) -> IdentityCheck {
        IdentityCheck {
            name: self.name,
            passed: !self.failed && self.cases > 0,
            cases: self.cases,
            max_error: self.max_error,
            tolerance: self.tolerance,
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn coeffs(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.5..2.0)).collect()
}

fn random_box(rng: &mut ChaCha8Rng, d: usize) -> BoxDomain {
    let v0 = (0..d).map(|_| rng.random_range(0.1..1.5)).collect();
    BoxDomain::new(v0, rng.random_range(0.3..2.5)).expect("positive box")
}

fn appendix_identity(rng: &mut ChaCha8Rng) -> IdentityCheck {
    let mut t = Tally::new("appendix_triangulation_vs_product", 1e-9);
    for n in 2..=6 {
        for _ in 0..20 {
            let c = coeffs(rng, n);
            match exp_cube_triangulation(&c) {
                Ok(lhs) => t.record(rel(lhs, exp_cube_product(&c))),
                Err(_) => t.fail(),
            }
        }
    }
    t.finish()
}

fn multinomial_vs_triangulation(rng: &mut ChaCha8Rng) -> IdentityCheck {
    let mut t = Tally::new("multinomial_vs_triangulation", 1e-9);
    for q in 2..=5 {
        for n in 1..=5 {
            for _ in 0..5 {
                let c = coeffs(rng, n);
                let q = q as f64;
                match (integrate_power_multinomial(&c, q), integrate_power_triangulation(&c, q)) {
                    (Ok(a), Ok(b)) => t.record(rel(b, a)),
                    _ => t.fail(),
                }
            }
        }
    }
    t.finish()
}

fn genericity_rejection() -> IdentityCheck {
    let mut t = Tally::new("genericity_rejects_cancellation", 0.0);
    match integrate_power_triangulation(&[1.0, -1.0], 2.0) {
        Err(Error::NotGeneric { subset, .. }) if subset == [0, 1] => t.record(0.0),
        _ => t.fail(),
    }
    match exp_cube_triangulation(&[2.0, 1.0, -3.0]) {
        Err(Error::NotGeneric { .. }) => t.record(0.0),
        _ => t.fail(),
    }
    t.finish()
}

fn random_family(rng: &mut ChaCha8Rng, d: usize, exp: bool) -> FunctionSpec {
    let c = coeffs(rng, d);
    if exp {
        FunctionSpec::exp(c).expect("positive c")
    } else {
        let q = [1.5, 2.0, 3.0][rng.random_range(0..3)];
        FunctionSpec::power(c, q).expect("positive c")
    }
}

fn delta_mu_independence(rng: &mut ChaCha8Rng) -> IdentityCheck {
    let mut t = Tally::new("delta_mu_independence", 1e-9);
    for k in 0..50 {
        let d = 1 + k % 3;
        let f = random_family(rng, d, k % 2 == 0);
        let dom: Domain = random_box(rng, d).into();
        let gap = |mu| -> crate::error::Result<f64> {
            Ok(vol_naive(&f, mu, &dom)? - vol_perspective(&f, mu, &dom)?)
        };
        match (gap(MuKind::Constant), gap(MuKind::ConcaveEnvelope)) {
            (Ok(a), Ok(b)) => t.record((a - b).abs() / a.abs().max(1.0)),
            _ => t.fail(),
        }
    }
    t.finish()
}

fn envelope_certification(rng: &mut ChaCha8Rng) -> (IdentityCheck, IdentityCheck) {
    let mut tight = Tally::new("envelope_tightness_and_concavity", 1e-9);
    let mut cells = Tally::new("envelope_subset_sum_vs_cells", 1e-10);
    for k in 0..12 {
        let d = 1 + k % 4;
        let f = random_family(rng, d, k % 2 == 1);
        let b = random_box(rng, d);
        let Ok(env) = concave_envelope(&f, &b) else {
            tight.fail();
            continue;
        };
        let mut worst = 0.0f64;
        for m in 0..1u64 << d {
            let x = b.vertex(m);
            let (e, v) = (env.evaluate(&x), f.evaluate(&x));
            match (e, v) {
                (Ok(e), Ok(v)) => worst = worst.max((e - v).abs() / v.abs().max(1.0)),
                _ => worst = f64::NAN,
            }
        }
        let point = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            b.v0().iter().map(|v| v + b.u() * rng.random::<f64>()).collect()
        };
        for _ in 0..1000 {
            let (x, y) = (point(rng), point(rng));
            let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
            let (Ok(ex), Ok(ey), Ok(em), Ok(fx)) =
                (env.evaluate(&x), env.evaluate(&y), env.evaluate(&mid), f.evaluate(&x))
            else {
                worst = f64::NAN;
                break;
            };
            // domination and midpoint concavity, as normalised violations
            worst = worst.max((fx - ex) / (1.0 + fx.abs()));
            worst = worst.max((0.5 * (ex + ey) - em) / (1.0 + em.abs()));
        }
        tight.record(worst);
        match integrate_envelope(&f, &b) {
            Ok(a) => cells.record(rel(env.integrate_by_cells(), a)),
            Err(_) => cells.fail(),
        }
    }
    (tight.finish(), cells.finish())
}

fn lower_bound_grid(rng: &mut ChaCha8Rng) -> IdentityCheck {
    let mut t = Tally::new("power_lower_bound", 1e-9);
    for d in 1..=4 {
        for q in [1.0f64, 1.5, 2.0, 3.0] {
            for u in [0.5, 1.0, 10.0] {
                let c = coeffs(rng, d);
                let v0: Vec<f64> = (0..d).map(|_| rng.random_range(0.1..2.0)).collect();
                let shift: f64 = c.iter().zip(&v0).map(|(c, v)| c * v).sum::<f64>() / u;
                let exact = if q.fract() == 0.0 {
                    shifted_power_multinomial(&c, &shift, q as u32)
                } else {
                    shifted_power_triangulation(&c, shift, q)
                };
                match (power_lower_bound(&c, q, &v0, u), exact) {
                    // violation measured relative to the integral
                    (Ok(lb), Ok(v)) => t.record(((lb - v) / v.abs().max(1.0)).max(0.0)),
                    _ => t.fail(),
                }
            }
        }
    }
    t.finish()
}

/// Runs every identity with random instances drawn from `seed`.
pub fn run_identity_suite(seed: u64) -> Vec<IdentityCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![
        appendix_identity(&mut rng),
        multinomial_vs_triangulation(&mut rng),
        genericity_rejection(),
        delta_mu_independence(&mut rng),
    ];
    let (tight, cells) = envelope_certification(&mut rng);
    out.push(tight);
    out.push(lower_bound_grid(&mut rng));
    out.push(cells);
    out
}
