//! Independent re-implementations used as oracles, plus instance builders.
//!
//! Everything here works on raw lattice units and per-bundle flat prices and
//! shares no code with the library beyond building a `Config`.
#![allow(dead_code)]

pub mod props;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slice_admission::config::{CatalogEntryConfig, Config};
use slice_admission::Model;

/// A tiny instance: flat price per bundle, listed for `periods`.
#[derive(Debug, Clone)]
pub struct Inst {
    pub res: u32,
    pub pool: Vec<u32>,
    /// `(bundle units, price)`, distinct non-null bundles.
    pub bundles: Vec<(Vec<u32>, f64)>,
    pub periods: Vec<u32>,
    /// One weight per `(bundle, period)`, bundle-major.
    pub weights: Vec<f64>,
    pub null_w: f64,
    pub beta: f64,
    pub rates: Vec<f64>,
    pub expiring: bool,
    pub t_max: u32,
}

#[derive(Debug, Clone, Copy)]
pub enum Fixed {
    Always,
    Never,
    Threshold(f64),
}

impl Inst {
    pub fn dim(&self) -> usize {
        self.pool.len()
    }

    pub fn config(&self) -> Config {
        let frac = |u: &[u32]| u.iter().map(|&x| f64::from(x) / f64::from(self.res)).collect::<Vec<_>>();
        let mut catalog = Vec::new();
        for (b, price) in &self.bundles {
            for &t in &self.periods {
                catalog.push(CatalogEntryConfig {
                    bundle: frac(b),
                    period: t,
                    payment: *price,
                });
            }
        }
        let mut json = serde_json::json!({
            "dimension": self.dim(),
            "resolution": self.res,
            "initial_pool": frac(&self.pool),
            "catalog": catalog,
            "request_weights": self.weights,
            "null_weight": self.null_w,
            "beta": self.beta,
            "own_revenue_rates": self.rates,
            "mode": if self.expiring { "expiring" } else { "non-expiring" },
            "t_max": self.t_max,
            "seed": 11
        });
        json["learner"] = serde_json::json!({"n_samples": 2000});
        Config::from_json(&json.to_string()).unwrap()
    }

    pub fn model(&self) -> Model {
        self.config().build_model().unwrap()
    }

    /// Marginal arrival probability of bundle `i`.
    pub fn g(&self, i: usize) -> f64 {
        let k = self.periods.len();
        self.weights[i * k..(i + 1) * k].iter().sum()
    }

    pub fn q(&self, units: &[u32]) -> f64 {
        units
            .iter()
            .zip(&self.rates)
            .map(|(&u, c)| c * f64::from(u) / f64::from(self.res))
            .sum()
    }

    /// Arrivals at `t`: `(prob, Some((bundle index, period)))`, null as `None`.
    pub fn arrivals(&self, t: u32) -> Vec<(f64, Option<(usize, u32)>)> {
        let mut out = vec![(self.null_w, None)];
        let k = self.periods.len();
        for i in 0..self.bundles.len() {
            for (j, &p) in self.periods.iter().enumerate() {
                let period = if self.expiring { p } else { self.t_max - t };
                out.push((self.weights[i * k + j], Some((i, period))));
            }
        }
        out
    }
}

pub fn fits(b: &[u32], pool: &[u32]) -> bool {
    b.iter().zip(pool).all(|(x, y)| x <= y)
}

pub fn minus(pool: &[u32], b: &[u32]) -> Option<Vec<u32>> {
    pool.iter().zip(b).map(|(p, x)| p.checked_sub(*x)).collect()
}

fn plus(pool: &[u32], b: &[u32]) -> Vec<u32> {
    pool.iter().zip(b).map(|(p, x)| p + x).collect()
}

fn geo(beta: f64, n: u32) -> f64 {
    (0..n).map(|k| beta.powi(k as i32)).sum()
}

/// Market state as `(time, idle, [(end, bundle, price)])`.
#[derive(Debug, Clone)]
pub struct St {
    pub t: u32,
    pub idle: Vec<u32>,
    pub contracts: Vec<(u32, Vec<u32>, f64)>,
}

impl St {
    pub fn initial(inst: &Inst) -> Self {
        St { t: 0, idle: inst.pool.clone(), contracts: vec![] }
    }

    fn release(&mut self) {
        let t = self.t;
        let mut idle = self.idle.clone();
        self.contracts.retain(|(end, b, _)| {
            if *end <= t {
                idle = plus(&idle, b);
                false
            } else {
                true
            }
        });
        self.idle = idle;
    }
}

fn admissible(inst: &Inst, s: &St, b: usize, period: u32) -> bool {
    fits(&inst.bundles[b].0, &s.idle) && s.t + period <= inst.t_max
}

fn accepts(inst: &Inst, f: Fixed, s: &St, b: usize, period: u32) -> bool {
    admissible(inst, s, b, period)
        && match f {
            Fixed::Always => true,
            Fixed::Never => false,
            Fixed::Threshold(x) => inst.bundles[b].1 >= x,
        }
}

/// Applies the arrival at `s.t`, advances and releases.
fn next(inst: &Inst, f: Fixed, s: &St, arrival: Option<(usize, u32)>) -> St {
    let mut n = s.clone();
    if let Some((b, period)) = arrival {
        if accepts(inst, f, s, b, period) {
            let bundle = inst.bundles[b].0.clone();
            n.idle = minus(&n.idle, &bundle).unwrap();
            n.contracts.push((s.t + period, bundle, inst.bundles[b].1));
        }
    }
    n.t += 1;
    n.release();
    n
}

/// Opportunity cost of bundle `b` for `period` periods at state `s` under
/// the fixed strategy `f`, by expanding every request sequence. Prices are
/// flat, so the payment length of blocked requests does not matter.
pub fn oc(inst: &Inst, f: Fixed, s: &St, b: usize, period: u32) -> f64 {
    let t0 = s.t;
    let held = if inst.expiring { period } else { inst.t_max - t0 };
    let omega = inst.bundles[b].0.clone();
    let own = inst.q(&omega) * geo(inst.beta, held);
    let block = |tau: u32, pool: &[u32]| -> f64 {
        if inst.expiring && tau >= t0 + held {
            return 0.0;
        }
        let cf = minus(pool, &omega);
        let mut sum = 0.0;
        for (i, (w, price)) in inst.bundles.iter().enumerate() {
            let f_fact = if fits(w, pool) { inst.g(i) } else { 0.0 };
            let f_cf = match &cf {
                Some(c) if fits(w, c) => inst.g(i),
                _ => 0.0,
            };
            sum += (f_fact - f_cf) * price;
        }
        inst.beta.powi((tau - t0 + 1) as i32) * sum
    };
    fn walk(inst: &Inst, f: Fixed, s: &St, block: &dyn Fn(u32, &[u32]) -> f64) -> f64 {
        if s.t >= inst.t_max {
            return 0.0;
        }
        let here = block(s.t, &s.idle);
        let mut future = 0.0;
        for (p, a) in inst.arrivals(s.t) {
            if p > 0.0 {
                future += p * walk(inst, f, &next(inst, f, s, a), block);
            }
        }
        here + future
    }
    let declined = next(inst, Fixed::Never, s, None);
    own + block(t0, &s.idle) + walk(inst, f, &declined, &block)
}

/// `(1+β) p(ω₀) - C₁` with `C₁ = (1+β) q(ω₀) + β Σ [f(ω,Ω₀) - f(ω,G(ψ₀-ω₀))] p(ω)`.
pub fn two_step(inst: &Inst, b: usize) -> (f64, f64) {
    let omega = &inst.bundles[b].0;
    let rest = minus(&inst.pool, omega).unwrap();
    let mut blocked = 0.0;
    for (i, (w, price)) in inst.bundles.iter().enumerate() {
        let after = if fits(w, &rest) { inst.g(i) } else { 0.0 };
        blocked += (inst.g(i) - after) * price;
    }
    let c = (1.0 + inst.beta) * inst.q(omega) + inst.beta * blocked;
    (c, (1.0 + inst.beta) * inst.bundles[b].1 - c)
}

/// Optimal expected discounted profit by per-period backward recursion.
pub fn dp(inst: &Inst, s: &St) -> f64 {
    if s.t >= inst.t_max {
        return 0.0;
    }
    let income = |st: &St| -> f64 {
        st.contracts.iter().filter(|c| c.0 > st.t).map(|c| c.2).sum::<f64>() + inst.q(&st.idle)
    };
    let mut v = 0.0;
    for (p, a) in inst.arrivals(s.t) {
        if p == 0.0 {
            continue;
        }
        let decline = income(s) + inst.beta * dp(inst, &next(inst, Fixed::Never, s, None));
        let best = match a {
            Some((b, period)) if admissible(inst, s, b, period) => {
                let mut taken = s.clone();
                taken.idle = minus(&s.idle, &inst.bundles[b].0).unwrap();
                taken.contracts.push((s.t + period, inst.bundles[b].0.clone(), inst.bundles[b].1));
                let accept = income(&taken) + inst.beta * dp(inst, &next(inst, Fixed::Always, s, a));
                accept.max(decline)
            }
            _ => decline,
        };
        v += p * best;
    }
    v
}

/// Random tiny instance: N ≤ 2, up to `max_bundles` bundles, resolution 10.
pub fn random_inst(rng: &mut ChaCha8Rng, max_bundles: usize, t_max: u32, expiring: bool) -> Inst {
    let dim = rng.random_range(1..=2);
    let res = 10;
    let pool: Vec<u32> = (0..dim).map(|_| rng.random_range(5..=10)).collect();
    let n = rng.random_range(1..=max_bundles);
    let mut bundles: Vec<(Vec<u32>, f64)> = Vec::new();
    while bundles.len() < n {
        let b: Vec<u32> = (0..dim).map(|_| rng.random_range(0..=6)).collect();
        if b.iter().all(|&x| x == 0) || bundles.iter().any(|(c, _)| *c == b) {
            continue;
        }
        let price = f64::from(rng.random_range(1..=20u32)) * 0.25;
        bundles.push((b, price));
    }
    let periods: Vec<u32> = if expiring { vec![1, 2] } else { vec![1] };
    let raw: Vec<f64> = (0..n * periods.len() + 1).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw[1..].iter().map(|w| w / total).collect();
    Inst {
        res,
        pool,
        bundles,
        periods,
        null_w: raw[0] / total,
        weights,
        beta: rng.random_range(0.5..0.95),
        rates: (0..dim).map(|_| f64::from(rng.random_range(0..=8u32)) * 0.5).collect(),
        expiring,
        t_max,
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The worked example: pool 1.0, A = 0.4 at 2, B = 0.6 at 3, g = (0.5, 0.3, 0.2).
pub fn toy1(t_max: u32, rate: f64) -> Inst {
    Inst {
        res: 100,
        pool: vec![100],
        bundles: vec![(vec![40], 2.0), (vec![60], 3.0)],
        periods: vec![1],
        weights: vec![0.3, 0.2],
        null_w: 0.5,
        beta: 0.9,
        rates: vec![rate],
        expiring: false,
        t_max,
    }
}
