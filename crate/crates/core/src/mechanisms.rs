//! Winner determination, coopetitive VCG, first-price clearing and the
//! revenue benchmark of non-winning coalitions.
//!
//! Ties between ads always break to the lowest ad id.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{AdId, AuctionInstance, BidProfile, Outcome};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VcgResult {
    pub winner: AdId,
    pub payments: Vec<Scalar>,
    pub revenue: Scalar,
}

impl VcgResult {
    pub fn outcome(&self, instance: &AuctionInstance) -> Outcome {
        Outcome::from_payments(instance, self.winner, self.payments.clone())
    }
}

/// Index of the first maximum.
fn argmax_first(totals: impl Iterator<Item = Scalar>) -> AdId {
    let mut best: Option<(usize, Scalar)> = None;
    for (j, total) in totals.enumerate() {
        match &best {
            Some((_, b)) if total <= *b => {}
            _ => best = Some((j, total)),
        }
    }
    AdId(best.expect("instances have at least one ad").0)
}

/// The welfare-maximizing ad.
pub fn efficient_winner(instance: &AuctionInstance) -> AdId {
    argmax_first(
        instance
            .ads()
            .iter()
            .map(|ad| ad.members().iter().map(|&i| instance.value(i)).sum()),
    )
}

/// All ads attaining the maximum total value. More than one entry means the
/// efficient winner was chosen by tie-break.
pub fn efficient_ties(instance: &AuctionInstance) -> Vec<AdId> {
    let totals: Vec<Scalar> = instance
        .ads()
        .iter()
        .map(|ad| instance.total_value(ad.id()).expect("own ad"))
        .collect();
    let best = totals.iter().max().expect("non-empty").clone();
    totals
        .iter()
        .enumerate()
        .filter(|(_, t)| **t == best)
        .map(|(j, _)| AdId(j))
        .collect()
}

/// Coopetitive VCG: the efficient ad is shown and each member pays
/// `max(0, W_{-i} - (W - v_i))`, the least value that keeps its ad on top.
pub fn vcg(instance: &AuctionInstance) -> VcgResult {
    let winner = efficient_winner(instance);
    let ad = &instance.ads()[winner.0];
    let welfare = instance.total_value(winner).expect("own ad");
    let payments: Vec<Scalar> = instance
        .advertisers()
        .map(|i| {
            if !ad.contains(i) {
                return Scalar::zero();
            }
            let best_without = instance
                .ads()
                .iter()
                .map(|other| {
                    other
                        .members()
                        .iter()
                        .filter(|&&k| k != i)
                        .map(|&k| instance.value(k))
                        .sum::<Scalar>()
                })
                .max()
                .expect("non-empty");
            let others_in_winner = &welfare - instance.value(i);
            (best_without - others_in_winner).max(Scalar::zero())
        })
        .collect();
    let revenue = payments.iter().sum();
    VcgResult {
        winner,
        payments,
        revenue,
    }
}

/// First-price clearing: the ad with the largest total bid wins and its
/// members pay their bids.
pub fn first_price_clear(instance: &AuctionInstance, bids: &BidProfile) -> Result<Outcome> {
    instance.check_dimension(bids)?;
    let winner = argmax_first(
        instance
            .ads()
            .iter()
            .map(|ad| ad.members().iter().map(|&i| bids.bid(i)).sum()),
    );
    settle_first_price(instance, bids, winner)
}

/// First-price settlement with `winner` shown: its members pay their bids.
///
/// Equilibrium profiles have competing ads tied with the efficient ad by
/// construction; those outcomes are settled here with the efficient ad as
/// the winner rather than through the lowest-id tie-break.
pub fn settle_first_price(instance: &AuctionInstance, bids: &BidProfile, winner: AdId) -> Result<Outcome> {
    instance.check_dimension(bids)?;
    let ad = instance.ad(winner)?;
    let payments = instance
        .advertisers()
        .map(|i| if ad.contains(i) { bids.bid(i).clone() } else { Scalar::zero() })
        .collect();
    Ok(Outcome::from_payments(instance, winner, payments))
}

/// Largest total value held by advertisers outside the efficient ad within a
/// single competing ad. Zero when there is no competing ad.
pub fn revenue_lower_bound(instance: &AuctionInstance) -> Scalar {
    let winner = efficient_winner(instance);
    let t = &instance.ads()[winner.0];
    instance
        .ads()
        .iter()
        .filter(|ad| ad.id() != winner)
        .map(|ad| {
            ad.members()
                .iter()
                .filter(|&&i| !t.contains(i))
                .map(|&i| instance.value(i))
                .sum::<Scalar>()
        })
        .max()
        .unwrap_or_else(Scalar::zero)
}
