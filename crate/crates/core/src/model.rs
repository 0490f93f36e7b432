//! The single-slot coopetitive auction model: advertisers with per-click
//! values, ads as sets of advertisers, bid profiles and cleared outcomes.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AdvertiserId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AdId(pub usize);

impl fmt::Display for AdvertiserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl fmt::Display for AdId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ad {}", self.0)
    }
}

/// An ad together with the advertisers who value a click on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ad {
    id: AdId,
    /// Sorted, duplicate-free.
    members: Vec<AdvertiserId>,
}

impl Ad {
    pub fn id(&self) -> AdId {
        self.id
    }

    pub fn members(&self) -> &[AdvertiserId] {
        &self.members
    }

    pub fn contains(&self, who: AdvertiserId) -> bool {
        self.members.binary_search(&who).is_ok()
    }
}

/// A validated auction. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuctionInstance {
    names: Vec<String>,
    values: Vec<Scalar>,
    ads: Vec<Ad>,
}

impl AuctionInstance {
    /// Builds and validates an instance from named advertisers and ads given
    /// as lists of advertiser indices (document order).
    pub fn new(advertisers: Vec<(String, Scalar)>, ads: Vec<Vec<usize>>) -> Result<Self> {
        let n = advertisers.len();
        let mut names = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        for (i, (name, value)) in advertisers.into_iter().enumerate() {
            if names.contains(&name) {
                return Err(Error::parse(
                    format!("advertisers[{i}].name"),
                    format!("duplicate advertiser {name:?}"),
                ));
            }
            if value.is_negative() {
                return Err(Error::parse(
                    format!("advertisers[{i}].value"),
                    format!("negative value {value} for {name:?}"),
                ));
            }
            names.push(name);
            values.push(value);
        }
        if ads.is_empty() {
            return Err(Error::parse("ads", "at least one ad is required"));
        }
        let mut built: Vec<Ad> = Vec::with_capacity(ads.len());
        let mut covered = vec![false; n];
        for (j, members) in ads.into_iter().enumerate() {
            if members.is_empty() {
                return Err(Error::parse(format!("ads[{j}]"), "empty ad"));
            }
            let mut sorted = Vec::with_capacity(members.len());
            for (pos, &i) in members.iter().enumerate() {
                if i >= n {
                    return Err(Error::parse(
                        format!("ads[{j}][{pos}]"),
                        format!("advertiser index {i} out of range"),
                    ));
                }
                if sorted.contains(&AdvertiserId(i)) {
                    return Err(Error::parse(
                        format!("ads[{j}][{pos}]"),
                        format!("advertiser {:?} listed twice", names[i]),
                    ));
                }
                sorted.push(AdvertiserId(i));
                covered[i] = true;
            }
            sorted.sort();
            if let Some(prev) = built.iter().find(|ad| ad.members == sorted) {
                return Err(Error::parse(
                    format!("ads[{j}]"),
                    format!("same members as ads[{}]", prev.id.0),
                ));
            }
            built.push(Ad {
                id: AdId(j),
                members: sorted,
            });
        }
        if let Some(i) = covered.iter().position(|c| !c) {
            return Err(Error::parse(
                format!("advertisers[{i}]"),
                format!("advertiser {:?} appears in no ad", names[i]),
            ));
        }
        Ok(AuctionInstance {
            names,
            values,
            ads: built,
        })
    }

    pub fn num_advertisers(&self) -> usize {
        self.values.len()
    }

    pub fn num_ads(&self) -> usize {
        self.ads.len()
    }

    pub fn values(&self) -> &[Scalar] {
        &self.values
    }

    pub fn value(&self, who: AdvertiserId) -> &Scalar {
        &self.values[who.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, who: AdvertiserId) -> &str {
        &self.names[who.0]
    }

    pub fn advertiser_by_name(&self, name: &str) -> Option<AdvertiserId> {
        self.names.iter().position(|n| n == name).map(AdvertiserId)
    }

    pub fn ads(&self) -> &[Ad] {
        &self.ads
    }

    pub fn ad(&self, id: AdId) -> Result<&Ad> {
        self.ads.get(id.0).ok_or(Error::InvalidAd(id))
    }

    pub fn advertisers(&self) -> impl Iterator<Item = AdvertiserId> {
        (0..self.values.len()).map(AdvertiserId)
    }

    /// Sum of member values of `ad`.
    pub fn total_value(&self, ad: AdId) -> Result<Scalar> {
        Ok(self.ad(ad)?.members.iter().map(|&i| self.value(i)).sum())
    }

    /// Sum of member bids of `ad` under `bids`.
    pub fn total_bid(&self, bids: &BidProfile, ad: AdId) -> Result<Scalar> {
        self.check_dimension(bids)?;
        Ok(self.ad(ad)?.members.iter().map(|&i| bids.bid(i)).sum())
    }

    pub(crate) fn check_dimension(&self, bids: &BidProfile) -> Result<()> {
        if bids.len() != self.num_advertisers() {
            return Err(Error::DimensionMismatch {
                expected: self.num_advertisers(),
                found: bids.len(),
            });
        }
        Ok(())
    }

    /// Renders the instance in the compact `{(A:2, B:1), (C:3)}` notation.
    pub fn to_shorthand(&self) -> String {
        let ads: Vec<String> = self
            .ads
            .iter()
            .map(|ad| {
                let members: Vec<String> = ad
                    .members
                    .iter()
                    .map(|&i| format!("{}:{}", self.name(i), self.value(i)))
                    .collect();
                format!("({})", members.join(", "))
            })
            .collect();
        format!("{{{}}}", ads.join(", "))
    }
}

/// One bid per advertiser, indexed in document order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BidProfile(Vec<Scalar>);

impl BidProfile {
    pub fn new(bids: Vec<Scalar>) -> Self {
        BidProfile(bids)
    }

    /// Everyone bids their value.
    pub fn truthful(instance: &AuctionInstance) -> Self {
        BidProfile(instance.values.clone())
    }

    pub fn zeros(n: usize) -> Self {
        BidProfile(vec![Scalar::zero(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bid(&self, who: AdvertiserId) -> &Scalar {
        &self.0[who.0]
    }

    pub fn set(&mut self, who: AdvertiserId, bid: Scalar) {
        self.0[who.0] = bid;
    }

    pub fn as_slice(&self) -> &[Scalar] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Scalar> {
        self.0
    }
}

impl From<Vec<Scalar>> for BidProfile {
    fn from(v: Vec<Scalar>) -> Self {
        BidProfile(v)
    }
}

/// A cleared single-slot auction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub winner: AdId,
    pub payments: Vec<Scalar>,
    pub revenue: Scalar,
    /// `v_i - p_i` for members of the winning ad, zero for everyone else.
    pub surpluses: Vec<Scalar>,
}

impl Outcome {
    /// Builds an outcome from per-advertiser payments; non-members of the
    /// winner must pay zero.
    pub(crate) fn from_payments(instance: &AuctionInstance, winner: AdId, payments: Vec<Scalar>) -> Self {
        let ad = &instance.ads[winner.0];
        let surpluses = instance
            .advertisers()
            .map(|i| {
                if ad.contains(i) {
                    instance.value(i) - &payments[i.0]
                } else {
                    debug_assert!(payments[i.0].is_zero());
                    Scalar::zero()
                }
            })
            .collect();
        let revenue = payments.iter().sum();
        Outcome {
            winner,
            payments,
            revenue,
            surpluses,
        }
    }
}
