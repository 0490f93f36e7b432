//! Random instance generation for property tests, acceptance runs and
//! benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::AuctionInstance;
use crate::scalar::Scalar;

/// How values are drawn.
#[derive(Debug, Clone)]
pub enum ValueLaw {
    /// `k * step` with `k` uniform in `0..=max_steps`.
    Grid { step: Scalar, max_steps: u32 },
    /// `p / q` with `q` uniform in `1..=max_denominator` and the value at
    /// most `max_value`.
    Rational { max_denominator: u32, max_value: u32 },
}

impl ValueLaw {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Scalar {
        match self {
            ValueLaw::Grid { step, max_steps } => Scalar::from_integer(rng.gen_range(0..=*max_steps) as i64) * step,
            ValueLaw::Rational {
                max_denominator,
                max_value,
            } => {
                let q = rng.gen_range(1..=*max_denominator) as i64;
                let p = rng.gen_range(0..=q * *max_value as i64);
                Scalar::new(p, q)
            }
        }
    }
}

/// Draws a valid instance with `1..=max_advertisers` advertisers and
/// `1..=max_ads` distinct ads (fewer when there are not enough distinct
/// member sets).
pub fn random_instance<R: Rng + ?Sized>(
    rng: &mut R,
    max_advertisers: usize,
    max_ads: usize,
    law: &ValueLaw,
) -> AuctionInstance {
    assert!(max_advertisers >= 1 && max_ads >= 1);
    loop {
        let n = rng.gen_range(1..=max_advertisers);
        let distinct = (1usize << n.min(20)) - 1;
        let m = rng.gen_range(1..=max_ads).min(distinct);
        let mut ads: Vec<Vec<usize>> = Vec::with_capacity(m);
        while ads.len() < m {
            let mut members: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.45)).collect();
            if members.is_empty() {
                members.push(rng.gen_range(0..n));
            }
            if !ads.contains(&members) {
                ads.push(members);
            }
        }
        // Put uncovered advertisers into random ads.
        for i in 0..n {
            if !ads.iter().any(|ad| ad.contains(&i)) {
                let ad = ads.choose_mut(rng).expect("m >= 1");
                ad.push(i);
                ad.sort_unstable();
            }
        }
        let advertisers = (0..n).map(|i| (advertiser_name(i), law.draw(rng))).collect();
        if let Ok(instance) = AuctionInstance::new(advertisers, ads) {
            return instance;
        }
    }
}

fn advertiser_name(i: usize) -> String {
    let letters = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    if i < letters.len() {
        (letters[i] as char).to_string()
    } else {
        format!("X{i}")
    }
}
