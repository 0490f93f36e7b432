//! Brute-force checks that share no solving code with the exact algorithms.
//!
//! The grid search rescales every value and the resolution to a common
//! integer unit, then walks all grid points for the winning ad's members
//! (losers stay at their values). A grid point counts as an equilibrium when
//! it is IR and CEF and no member with a positive bid could drop one grid
//! step without breaking CEF, i.e. each such member has a competing ad
//! without it whose slack is below one step.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::mechanisms::{efficient_winner, VcgResult};
use crate::model::{AdId, AdvertiserId, AuctionInstance, BidProfile};
use crate::scalar::Scalar;

pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSpec {
    pub resolution: Scalar,
    pub budget: u64,
}

impl GridSpec {
    pub fn new(resolution: Scalar) -> Self {
        GridSpec {
            resolution,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }
}

/// The winner's grid in integer units of `1 / scale`.
struct Grid {
    winner: AdId,
    members: Vec<AdvertiserId>,
    scale: BigInt,
    step: i128,
    values: Vec<i128>,
    /// Highest grid multiple not above each member's value.
    caps: Vec<i128>,
    /// Per competing ad: positions (into `members`) of winner members it
    /// lacks, and the value it holds outside the winner.
    rivals: Vec<(Vec<usize>, i128)>,
}

fn to_units(x: &Scalar, scale: &BigInt) -> Result<i128> {
    let scaled = x.numer() * (scale / x.denom());
    scaled.to_i128().ok_or(Error::Overflow)
}

impl Grid {
    fn new(instance: &AuctionInstance, spec: &GridSpec) -> Result<Self> {
        if !spec.resolution.is_positive() {
            return Err(Error::InvalidResolution);
        }
        let winner = efficient_winner(instance);
        let t = &instance.ads()[winner.0];
        let scale = instance
            .values()
            .iter()
            .fold(spec.resolution.denom().clone(), |acc, v| acc.lcm(v.denom()));
        let step = to_units(&spec.resolution, &scale)?;
        let members = t.members().to_vec();
        let values = members
            .iter()
            .map(|&i| to_units(instance.value(i), &scale))
            .collect::<Result<Vec<_>>>()?;
        let caps: Vec<i128> = values.iter().map(|v| v / step * step).collect();

        let mut required = BigInt::one();
        for cap in &caps {
            required *= BigInt::from(cap / step + 1);
        }
        if required > BigInt::from(spec.budget) {
            return Err(Error::BudgetExceeded {
                required: required.to_string(),
                allowed: spec.budget,
            });
        }

        let mut rivals = Vec::new();
        for ad in instance.ads() {
            if ad.id() == winner {
                continue;
            }
            let lacking: Vec<usize> = members
                .iter()
                .enumerate()
                .filter(|(_, &i)| !ad.members().contains(&i))
                .map(|(k, _)| k)
                .collect();
            let mut outside = 0i128;
            for &i in ad.members() {
                if !t.members().contains(&i) {
                    outside = outside
                        .checked_add(to_units(instance.value(i), &scale)?)
                        .ok_or(Error::Overflow)?;
                }
            }
            rivals.push((lacking, outside));
        }
        Ok(Grid {
            winner,
            members,
            scale,
            step,
            values,
            caps,
            rivals,
        })
    }

    fn is_grid_equilibrium(&self, point: &[i128], slack: &mut [i128]) -> bool {
        for (s, (lacking, outside)) in slack.iter_mut().zip(&self.rivals) {
            *s = lacking.iter().map(|&k| point[k]).sum::<i128>() - outside;
            if *s < 0 {
                return false;
            }
        }
        point.iter().enumerate().all(|(k, &b)| {
            b == 0
                || self
                    .rivals
                    .iter()
                    .zip(slack.iter())
                    .any(|((lacking, _), &s)| s < self.step && lacking.contains(&k))
        })
    }

    /// Visits grid equilibria in ascending lexicographic order of member bids.
    fn for_each_equilibrium(&self, mut visit: impl FnMut(&[i128])) {
        let d = self.members.len();
        let mut point = vec![0i128; d];
        let mut slack = vec![0i128; self.rivals.len()];
        loop {
            if self.is_grid_equilibrium(&point, &mut slack) {
                visit(&point);
            }
            // Odometer: last coordinate moves fastest.
            let mut k = d;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                if point[k] < self.caps[k] {
                    point[k] += self.step;
                    break;
                }
                point[k] = 0;
            }
        }
    }

    fn profile(&self, instance: &AuctionInstance, point: &[i128]) -> BidProfile {
        let mut bids = BidProfile::truthful(instance);
        for (&i, &units) in self.members.iter().zip(point) {
            bids.set(i, Scalar::from_big(BigInt::from(units), self.scale.clone()));
        }
        bids
    }
}

/// All grid equilibria, sorted lexicographically by the winner members' bids.
pub fn enumerate_equilibria_grid(instance: &AuctionInstance, grid: &GridSpec) -> Result<Vec<BidProfile>> {
    let g = Grid::new(instance, grid)?;
    let mut out = Vec::new();
    g.for_each_equilibrium(|p| out.push(g.profile(instance, p)));
    Ok(out)
}

/// The grid equilibrium whose increasing-sorted surplus vector is
/// lexicographically largest; ties go to the lexicographically smallest bids.
pub fn lexmax_surplus_grid(instance: &AuctionInstance, grid: &GridSpec) -> Result<BidProfile> {
    let g = Grid::new(instance, grid)?;
    let mut best: Option<(Vec<i128>, Vec<i128>)> = None;
    g.for_each_equilibrium(|p| {
        let mut surplus: Vec<i128> = g.values.iter().zip(p).map(|(v, b)| v - b).collect();
        surplus.sort_unstable();
        if best.as_ref().map_or(true, |(s, _)| surplus > *s) {
            best = Some((surplus, p.to_vec()));
        }
    });
    let (_, point) = best.ok_or(Error::NoGridEquilibrium)?;
    debug_assert_eq!(g.winner, efficient_winner(instance));
    Ok(g.profile(instance, &point))
}

/// Lexicographic comparison of increasing-sorted vectors where entries
/// within `tolerance` of each other count as equal.
pub fn lex_greater_with_tolerance(a: &[Scalar], b: &[Scalar], tolerance: &Scalar) -> bool {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort();
    b.sort();
    for (x, y) in a.iter().zip(&b) {
        if (x - y).abs() > *tolerance {
            return x > y;
        }
    }
    false
}

/// VCG payments re-derived from the verbal rule: each member pays the least
/// value it could have reported with its ad still chosen.
///
/// The winner's standing only changes where its total crosses another ad's
/// total, so the candidate reports are zero, the true value, and those
/// crossing points; binary search over the sorted candidates finds the least
/// one at which the ad still wins (ties included, matching the infimum).
pub fn vcg_bruteforce(instance: &AuctionInstance) -> VcgResult {
    let winner = efficient_winner(instance);
    let t = &instance.ads()[winner.0];
    let totals_with = |who: AdvertiserId, report: &Scalar| -> Vec<Scalar> {
        instance
            .ads()
            .iter()
            .map(|ad| {
                ad.members()
                    .iter()
                    .map(|&k| if k == who { report.clone() } else { instance.value(k).clone() })
                    .sum()
            })
            .collect()
    };
    let still_wins = |who: AdvertiserId, report: &Scalar| -> bool {
        let totals = totals_with(who, report);
        totals.iter().all(|x| *x <= totals[winner.0])
    };

    let payments = instance
        .advertisers()
        .map(|i| {
            if !t.contains(i) {
                return Scalar::zero();
            }
            let v = instance.value(i).clone();
            let zero_totals = totals_with(i, &Scalar::zero());
            let mut candidates = vec![Scalar::zero(), v.clone()];
            for (j, ad) in instance.ads().iter().enumerate() {
                if !ad.contains(i) {
                    let crossing = &zero_totals[j] - &zero_totals[winner.0];
                    if !crossing.is_negative() && crossing <= v {
                        candidates.push(crossing);
                    }
                }
            }
            candidates.sort();
            candidates.dedup();
            let (mut lo, mut hi) = (0usize, candidates.len() - 1);
            debug_assert!(still_wins(i, &candidates[hi]));
            while lo < hi {
                let mid = (lo + hi) / 2;
                if still_wins(i, &candidates[mid]) {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            candidates[lo].clone()
        })
        .collect::<Vec<_>>();
    let revenue = payments.iter().sum();
    VcgResult {
        winner,
        payments,
        revenue,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_shorthand;
    use crate::scalar::s;

    fn member_bids(p: &BidProfile, n: usize) -> Vec<Scalar> {
        p.as_slice()[..n].to_vec()
    }

    fn v(xs: &[&str]) -> Vec<Scalar> {
        xs.iter().map(|x| s(x)).collect()
    }

    #[test]
    fn unit_grid_pair() {
        let inst = parse_shorthand("{(A:2,B:2),(E:3)}").unwrap();
        let eq = enumerate_equilibria_grid(&inst, &GridSpec::new(s("1"))).unwrap();
        let pts: Vec<Vec<Scalar>> = eq.iter().map(|p| member_bids(p, 2)).collect();
        assert_eq!(pts, vec![v(&["1", "2"]), v(&["2", "1"])]);
        assert!(eq.iter().all(|p| p.bid(AdvertiserId(2)) == &s("3")));
    }

    #[test]
    fn single_ad_only_zero() {
        let inst = parse_shorthand("{(A:3)}").unwrap();
        let eq = enumerate_equilibria_grid(&inst, &GridSpec::new(s("1/2"))).unwrap();
        assert_eq!(eq, vec![BidProfile::new(v(&["0"]))]);
        assert_eq!(lexmax_surplus_grid(&inst, &GridSpec::new(s("1/2"))).unwrap(), eq[0]);
    }

    #[test]
    fn triangle_unit_grid() {
        let inst = parse_shorthand("{(A:1,B:1,C:1),(A:1,D:1),(B:1,E:1)}").unwrap();
        let eq = enumerate_equilibria_grid(&inst, &GridSpec::new(s("1"))).unwrap();
        let pts: Vec<Vec<Scalar>> = eq.iter().map(|p| member_bids(p, 3)).collect();
        assert_eq!(pts, vec![v(&["0", "0", "1"]), v(&["1", "1", "0"])]);
    }

    #[test]
    fn lexmax_examples() {
        let inst = parse_shorthand("{(A:100,B:100),(C:99)}").unwrap();
        let best = lexmax_surplus_grid(&inst, &GridSpec::new(s("1/2"))).unwrap();
        assert_eq!(member_bids(&best, 2), v(&["49.5", "49.5"]));

        let inst = parse_shorthand("{(A:1,B:1,C:1),(A:1,D:1),(B:1,E:1)}").unwrap();
        let best = lexmax_surplus_grid(&inst, &GridSpec::new(s("1/2"))).unwrap();
        assert_eq!(member_bids(&best, 3), v(&["0.5", "0.5", "0.5"]));
    }

    #[test]
    fn budget_guard() {
        let inst = parse_shorthand("{(A:100,B:100),(C:99)}").unwrap();
        let err = enumerate_equilibria_grid(&inst, &GridSpec::new(s("1/8")).with_budget(1000)).unwrap_err();
        assert_eq!(
            err,
            Error::BudgetExceeded {
                required: "641601".into(),
                allowed: 1000
            }
        );
        assert_eq!(
            enumerate_equilibria_grid(&inst, &GridSpec::new(s("0"))),
            Err(Error::InvalidResolution)
        );
    }

    #[test]
    fn tolerant_lex_compare() {
        let eps = s("1/8");
        assert!(lex_greater_with_tolerance(&v(&["50.5", "50.5"]), &v(&["100", "1"]), &eps));
        assert!(lex_greater_with_tolerance(&v(&["0.5", "3"]), &v(&["0.45", "1"]), &s("0.1")));
        assert!(!lex_greater_with_tolerance(&v(&["1", "2"]), &v(&["1.1", "2"]), &eps));
    }

    #[test]
    fn bruteforce_vcg_examples() {
        let r = vcg_bruteforce(&parse_shorthand("{(A:2,B:2),(E:3)}").unwrap());
        assert_eq!(r.payments, v(&["1", "1", "0"]));
        let r = vcg_bruteforce(&parse_shorthand("{(A:1,B:1,C:1,D:1),(E:2.9)}").unwrap());
        assert!(r.payments.iter().all(Scalar::is_zero));
        let r = vcg_bruteforce(&parse_shorthand("{(A:4)}").unwrap());
        assert_eq!(r.payments, v(&["0"]));
    }
}
