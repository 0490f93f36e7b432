//! External contracts over a multi-slot VCG position auction.
//!
//! Each ad is owned by one of its members and only the owner bids. Another
//! member can back the ad with a contract: it declares a flat per-click
//! subsidy that is added to the owner's bid, and at settlement pays the
//! owner `min(fraction * price, cap)` per click.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::InstanceDocument;
use crate::model::{AdId, AdvertiserId, AuctionInstance};
use crate::oracle::GridSpec;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OwnedAuction {
    instance: AuctionInstance,
    owners: Vec<AdvertiserId>,
    slots: Vec<Scalar>,
}

impl OwnedAuction {
    pub fn new(instance: AuctionInstance, owners: Vec<AdvertiserId>, slots: Vec<Scalar>) -> Result<Self> {
        if owners.len() != instance.num_ads() {
            return Err(Error::parse(
                "owners",
                format!("expected {} owners, got {}", instance.num_ads(), owners.len()),
            ));
        }
        for (j, (&owner, ad)) in owners.iter().zip(instance.ads()).enumerate() {
            if !ad.contains(owner) {
                return Err(Error::parse(
                    format!("owners[{j}]"),
                    format!("{:?} is not a member of ad {j}", instance.name(owner)),
                ));
            }
        }
        if slots.is_empty() {
            return Err(Error::parse("slots", "at least one slot is required"));
        }
        for (k, c) in slots.iter().enumerate() {
            if !c.is_positive() || *c > 1 {
                return Err(Error::parse(format!("slots[{k}]"), "click-through rate must lie in (0, 1]"));
            }
            if k > 0 && *c >= slots[k - 1] {
                return Err(Error::parse(format!("slots[{k}]"), "rates must be strictly decreasing"));
            }
        }
        Ok(OwnedAuction {
            instance,
            owners,
            slots,
        })
    }

    /// Reads an instance document that carries `owners` and `slots`.
    pub fn from_document(doc: &InstanceDocument) -> Result<Self> {
        let instance = doc.to_instance()?;
        let owner_names = doc
            .owners
            .as_ref()
            .ok_or_else(|| Error::parse("owners", "missing"))?;
        let owners = owner_names
            .iter()
            .enumerate()
            .map(|(j, name)| {
                instance
                    .advertiser_by_name(name)
                    .ok_or_else(|| Error::parse(format!("owners[{j}]"), format!("unknown advertiser {name:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let slots = doc
            .slots
            .as_ref()
            .ok_or_else(|| Error::parse("slots", "missing"))?
            .iter()
            .enumerate()
            .map(|(k, text)| {
                text.parse::<Scalar>()
                    .map_err(|e| Error::parse(format!("slots[{k}]"), e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        OwnedAuction::new(instance, owners, slots)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_document(&InstanceDocument::from_json(text)?)
    }

    pub fn instance(&self) -> &AuctionInstance {
        &self.instance
    }

    pub fn owner(&self, ad: AdId) -> AdvertiserId {
        self.owners[ad.0]
    }

    pub fn slots(&self) -> &[Scalar] {
        &self.slots
    }

    /// Ads that `who` belongs to without owning.
    pub fn supported_ads(&self, who: AdvertiserId) -> Vec<AdId> {
        self.instance
            .ads()
            .iter()
            .filter(|ad| ad.contains(who) && self.owner(ad.id()) != who)
            .map(|ad| ad.id())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contract {
    pub supporter: AdvertiserId,
    pub ad: AdId,
    /// Share of the owner's per-click price the supporter covers, in [0, 1].
    pub fraction: Scalar,
    /// Per-click ceiling on the supporter's payment.
    pub cap: Scalar,
    /// Declared per-click amount added to the owner's bid.
    pub subsidy: Scalar,
}

impl Contract {
    /// Full-share contract whose cap equals the declared subsidy.
    pub fn flat(supporter: AdvertiserId, ad: AdId, subsidy: Scalar) -> Self {
        Contract {
            supporter,
            ad,
            fraction: Scalar::one(),
            cap: subsidy.clone(),
            subsidy,
        }
    }

    pub fn transfer(&self, price: &Scalar) -> Scalar {
        (&self.fraction * price).min(self.cap.clone())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractProfile {
    pub contracts: Vec<Contract>,
}

impl ContractProfile {
    pub fn empty() -> Self {
        ContractProfile::default()
    }

    pub fn is_empty(&self) -> bool {
        self.contracts.is_empty()
    }

    pub fn on_ad(&self, ad: AdId) -> impl Iterator<Item = &Contract> {
        self.contracts.iter().filter(move |c| c.ad == ad)
    }

    pub fn without(&self, supporter: AdvertiserId) -> ContractProfile {
        ContractProfile {
            contracts: self
                .contracts
                .iter()
                .filter(|c| c.supporter != supporter)
                .cloned()
                .collect(),
        }
    }

    fn validate(&self, owned: &OwnedAuction) -> Result<()> {
        for c in &self.contracts {
            let ad = owned
                .instance
                .ad(c.ad)
                .map_err(|_| Error::InvalidContract(format!("unknown ad {}", c.ad.0)))?;
            if c.supporter.0 >= owned.instance.num_advertisers() || !ad.contains(c.supporter) {
                return Err(Error::InvalidContract(format!(
                    "supporter {} is not a member of ad {}",
                    c.supporter.0, c.ad.0
                )));
            }
            if owned.owner(c.ad) == c.supporter {
                return Err(Error::InvalidContract(format!("owner of ad {} cannot back its own ad", c.ad.0)));
            }
            if c.fraction.is_negative() || c.fraction > 1 || c.cap.is_negative() || c.subsidy.is_negative() {
                return Err(Error::InvalidContract(format!(
                    "terms out of range on ad {} (fraction in [0,1], cap and subsidy >= 0)",
                    c.ad.0
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub ad: AdId,
    /// Zero-based slot index.
    pub slot: usize,
    pub price: Scalar,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionOutcome {
    /// In slot order.
    pub placements: Vec<Placement>,
    /// Expected utility per advertiser.
    pub utilities: Vec<Scalar>,
    /// Expected auctioneer revenue per impression.
    pub revenue: Scalar,
}

impl PositionOutcome {
    pub fn slot_of(&self, ad: AdId) -> Option<usize> {
        self.placements.iter().find(|p| p.ad == ad).map(|p| p.slot)
    }
}

/// Clears the position auction on per-ad bids.
///
/// Ads are ranked by bid (ties to the lower ad id) and the ad in slot `k`
/// pays per click
///
/// ```text
/// p_k = sum_{l=k+1}^{min(s, #ads)+1} b_(l) (c_{l-1} - c_l) / c_k
/// ```
///
/// with `c_{s+1} = 0` and missing bids counted as zero. Utilities here are
/// the contract-free ones: members gain `c * v_i`, the owner pays `c * p`.
pub fn position_vcg(owned: &OwnedAuction, effective_bids: &[Scalar]) -> Result<PositionOutcome> {
    let inst = &owned.instance;
    if effective_bids.len() != inst.num_ads() {
        return Err(Error::DimensionMismatch {
            expected: inst.num_ads(),
            found: effective_bids.len(),
        });
    }
    if effective_bids.iter().any(Scalar::is_negative) {
        return Err(Error::InvalidContract("negative effective bid".into()));
    }
    let mut order: Vec<usize> = (0..inst.num_ads()).collect();
    order.sort_by(|&a, &b| effective_bids[b].cmp(&effective_bids[a]).then(a.cmp(&b)));

    let s = owned.slots.len();
    let ctr = |l: usize| -> Scalar {
        // 1-based slot index; zero past the last slot.
        if l <= s {
            owned.slots[l - 1].clone()
        } else {
            Scalar::zero()
        }
    };
    let bid_at = |l: usize| -> Scalar {
        order
            .get(l - 1)
            .map(|&j| effective_bids[j].clone())
            .unwrap_or_else(Scalar::zero)
    };
    let filled = s.min(order.len());
    let mut placements = Vec::with_capacity(filled);
    let mut utilities = vec![Scalar::zero(); inst.num_advertisers()];
    let mut revenue = Scalar::zero();
    for k in 1..=filled {
        let externality: Scalar = (k + 1..=filled + 1)
            .map(|l| bid_at(l) * (ctr(l - 1) - ctr(l)))
            .sum();
        let c = ctr(k);
        let price = externality / &c;
        let ad = AdId(order[k - 1]);
        for &i in inst.ads()[ad.0].members() {
            utilities[i.0] += &c * inst.value(i);
        }
        utilities[owned.owner(ad).0] -= &c * &price;
        revenue += &c * &price;
        placements.push(Placement {
            ad,
            slot: k - 1,
            price,
        });
    }
    Ok(PositionOutcome {
        placements,
        utilities,
        revenue,
    })
}

/// Owner bids are their values plus declared subsidies; after clearing,
/// each contract moves `min(fraction * price, cap)` per click from the
/// supporter to the owner.
pub fn evaluate_contracts(owned: &OwnedAuction, contracts: &ContractProfile) -> Result<PositionOutcome> {
    contracts.validate(owned)?;
    let inst = &owned.instance;
    let bids: Vec<Scalar> = inst
        .ads()
        .iter()
        .map(|ad| {
            inst.value(owned.owner(ad.id())) + contracts.on_ad(ad.id()).map(|c| &c.subsidy).sum::<Scalar>()
        })
        .collect();
    let mut outcome = position_vcg(owned, &bids)?;
    for placement in &outcome.placements {
        let c = &owned.slots[placement.slot];
        let owner = owned.owner(placement.ad);
        for contract in contracts.on_ad(placement.ad) {
            let paid = c * contract.transfer(&placement.price);
            outcome.utilities[contract.supporter.0] -= &paid;
            outcome.utilities[owner.0] += &paid;
        }
    }
    Ok(outcome)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestResponse {
    /// `others` plus the responder's chosen flat contracts (zero subsidies
    /// are omitted).
    pub contracts: ContractProfile,
    /// Chosen subsidy per supported ad.
    pub subsidies: Vec<(AdId, Scalar)>,
    pub utility: Scalar,
    /// Responder's utility with no contracts of its own.
    pub baseline_utility: Scalar,
    pub outcome: PositionOutcome,
}

impl BestResponse {
    pub fn zero_is_best(&self) -> bool {
        self.subsidies.iter().all(|(_, s)| s.is_zero())
    }
}

/// Grid search over the responder's flat subsidies on every ad it backs,
/// holding the other contracts fixed. Subsidies range over multiples of the
/// grid resolution in `[0, max_subsidy]`; ties go to the lexicographically
/// smallest subsidy vector.
pub fn best_response_contract(
    owned: &OwnedAuction,
    responder: AdvertiserId,
    others: &ContractProfile,
    grid: &GridSpec,
    max_subsidy: &Scalar,
) -> Result<BestResponse> {
    if !grid.resolution.is_positive() {
        return Err(Error::InvalidResolution);
    }
    if responder.0 >= owned.instance.num_advertisers() {
        return Err(Error::InvalidContract(format!("unknown responder {}", responder.0)));
    }
    let others = others.without(responder);
    let ads = owned.supported_ads(responder);
    let levels: Vec<Scalar> = {
        let count = (max_subsidy / &grid.resolution).floor();
        let count: u64 = num_traits::ToPrimitive::to_u64(&count).unwrap_or(u64::MAX);
        if count >= grid.budget {
            return Err(Error::BudgetExceeded {
                required: count.saturating_add(1).to_string(),
                allowed: grid.budget,
            });
        }
        (0..=count)
            .map(|k| Scalar::from_integer(k as i64) * &grid.resolution)
            .collect()
    };
    let required = num_bigint::BigInt::from(levels.len()).pow(ads.len() as u32);
    if required > num_bigint::BigInt::from(grid.budget) {
        return Err(Error::BudgetExceeded {
            required: required.to_string(),
            allowed: grid.budget,
        });
    }

    let profile_for = |choice: &[usize]| -> ContractProfile {
        let mut profile = others.clone();
        for (&ad, &level) in ads.iter().zip(choice) {
            if level > 0 {
                profile
                    .contracts
                    .push(Contract::flat(responder, ad, levels[level].clone()));
            }
        }
        profile
    };

    let baseline = evaluate_contracts(owned, &others)?;
    let baseline_utility = baseline.utilities[responder.0].clone();
    let mut best: (Vec<usize>, Scalar, PositionOutcome) = (vec![0; ads.len()], baseline_utility.clone(), baseline);
    let mut choice = vec![0usize; ads.len()];
    loop {
        // Odometer over subsidy levels; last ad moves fastest.
        let mut k = ads.len();
        loop {
            if k == 0 {
                let (choice, utility, outcome) = best;
                return Ok(BestResponse {
                    contracts: profile_for(&choice),
                    subsidies: ads.iter().zip(&choice).map(|(&a, &l)| (a, levels[l].clone())).collect(),
                    utility,
                    baseline_utility,
                    outcome,
                });
            }
            k -= 1;
            if choice[k] + 1 < levels.len() {
                choice[k] += 1;
                break;
            }
            choice[k] = 0;
        }
        let outcome = evaluate_contracts(owned, &profile_for(&choice))?;
        if outcome.utilities[responder.0] > best.1 {
            best = (choice.clone(), outcome.utilities[responder.0].clone(), outcome);
        }
    }
}
