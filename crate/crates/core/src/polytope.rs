//! The cooperative envy-free (CEF) bid polytope of the efficient ad, and the
//! first-price equilibrium conditions on it.
//!
//! For the winning ad `T` and every competing ad `S_j` the polytope requires
//!
//! ```text
//! sum_{i in T \ S_j} b_i >= sum_{i in S_j \ T} v_i
//! ```
//!
//! together with `0 <= b_i <= v_i` for `i in T`. Advertisers outside `T` are
//! held at their values (the canonical losing bid), so a competing ad's total
//! bid equals the total bid of `T` exactly when its constraint is tight.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpSolution, Relation};
use crate::mechanisms::efficient_winner;
use crate::model::{AdId, AdvertiserId, AuctionInstance, BidProfile};
use crate::scalar::Scalar;

/// One CEF inequality: the bids of `bidders` (= `T \ S_ad`) must cover `rhs`
/// (= total value of `S_ad \ T`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CefConstraint {
    pub ad: AdId,
    pub bidders: Vec<AdvertiserId>,
    pub rhs: Scalar,
}

impl CefConstraint {
    /// Left side minus right side under `bids`.
    pub fn slack(&self, bids: &BidProfile) -> Scalar {
        self.bidders.iter().map(|&i| bids.bid(i)).sum::<Scalar>() - &self.rhs
    }
}

#[derive(Debug, Clone)]
pub struct CefPolytope<'a> {
    instance: &'a AuctionInstance,
    winner: AdId,
    members: Vec<AdvertiserId>,
    constraints: Vec<CefConstraint>,
}

/// Builds the CEF + IR system for the efficient ad. Constraints whose left
/// side is empty (the winner is contained in the competing ad) are vacuous
/// and dropped.
pub fn build_polytope(instance: &AuctionInstance) -> CefPolytope<'_> {
    let winner = efficient_winner(instance);
    let t = &instance.ads()[winner.0];
    let constraints = instance
        .ads()
        .iter()
        .filter(|ad| ad.id() != winner)
        .filter_map(|ad| {
            let bidders: Vec<AdvertiserId> =
                t.members().iter().copied().filter(|&i| !ad.contains(i)).collect();
            let rhs: Scalar = ad
                .members()
                .iter()
                .filter(|&&i| !t.contains(i))
                .map(|&i| instance.value(i))
                .sum();
            if bidders.is_empty() {
                debug_assert!(rhs.is_zero(), "efficient winner dominates supersets");
                None
            } else {
                Some(CefConstraint {
                    ad: ad.id(),
                    bidders,
                    rhs,
                })
            }
        })
        .collect();
    CefPolytope {
        instance,
        winner,
        members: t.members().to_vec(),
        constraints,
    }
}

impl<'a> CefPolytope<'a> {
    pub fn instance(&self) -> &'a AuctionInstance {
        self.instance
    }

    pub fn winner(&self) -> AdId {
        self.winner
    }

    /// Members of the winning ad, in advertiser order.
    pub fn members(&self) -> &[AdvertiserId] {
        &self.members
    }

    pub fn constraints(&self) -> &[CefConstraint] {
        &self.constraints
    }

    /// Full profile with the given winner-member bids (in `members()` order)
    /// and everyone else at their value.
    pub fn profile_from_member_bids(&self, member_bids: &[Scalar]) -> Result<BidProfile> {
        if member_bids.len() != self.members.len() {
            return Err(Error::DimensionMismatch {
                expected: self.members.len(),
                found: member_bids.len(),
            });
        }
        let mut bids = BidProfile::truthful(self.instance);
        for (&i, b) in self.members.iter().zip(member_bids) {
            bids.set(i, b.clone());
        }
        Ok(bids)
    }

    /// `bids` with every non-member of the winner reset to its value.
    pub fn canonical(&self, bids: &BidProfile) -> Result<BidProfile> {
        self.instance.check_dimension(bids)?;
        let mut out = BidProfile::truthful(self.instance);
        for &i in &self.members {
            out.set(i, bids.bid(i).clone());
        }
        Ok(out)
    }

    /// First competing ad whose CEF inequality fails.
    pub fn cef_violation(&self, bids: &BidProfile) -> Result<Option<AdId>> {
        self.instance.check_dimension(bids)?;
        Ok(self
            .constraints
            .iter()
            .find(|c| c.slack(bids).is_negative())
            .map(|c| c.ad))
    }

    pub fn is_cef(&self, bids: &BidProfile) -> Result<bool> {
        Ok(self.cef_violation(bids)?.is_none())
    }

    /// Linear program over the member bids: the CEF rows plus `b_i <= v_i`
    /// (non-negativity is implicit).
    fn base_program(&self, objective: Vec<Scalar>) -> LinearProgram {
        let d = self.members.len();
        let mut lp = LinearProgram::minimize(objective);
        for c in &self.constraints {
            lp.constrain(self.indicator(&c.bidders), Relation::Ge, c.rhs.clone());
        }
        for (k, &i) in self.members.iter().enumerate() {
            let mut row = vec![Scalar::zero(); d];
            row[k] = Scalar::one();
            lp.constrain(row, Relation::Le, self.instance.value(i).clone());
        }
        lp
    }

    fn indicator(&self, bidders: &[AdvertiserId]) -> Vec<Scalar> {
        self.members
            .iter()
            .map(|i| if bidders.contains(i) { Scalar::one() } else { Scalar::zero() })
            .collect()
    }
}

pub fn is_cef(polytope: &CefPolytope<'_>, bids: &BidProfile) -> Result<bool> {
    polytope.is_cef(bids)
}

/// First advertiser whose bid lies outside `[0, v_i]`.
pub fn ir_violation(instance: &AuctionInstance, bids: &BidProfile) -> Result<Option<AdvertiserId>> {
    instance.check_dimension(bids)?;
    Ok(instance
        .advertisers()
        .find(|&i| bids.bid(i).is_negative() || bids.bid(i) > instance.value(i)))
}

pub fn is_ir(instance: &AuctionInstance, bids: &BidProfile) -> Result<bool> {
    Ok(ir_violation(instance, bids)?.is_none())
}

/// Why a winning-ad member cannot profitably lower its bid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Witness {
    ZeroBid,
    /// A competing ad not containing the member whose total bid equals the
    /// winner's.
    TightAd(AdId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquilibriumCertificate {
    pub entries: Vec<(AdvertiserId, Witness)>,
}

impl EquilibriumCertificate {
    pub fn witness(&self, who: AdvertiserId) -> Option<Witness> {
        self.entries.iter().find(|(i, _)| *i == who).map(|(_, w)| *w)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Equilibrium(EquilibriumCertificate),
    NotIndividuallyRational(AdvertiserId),
    NotEnvyFree(AdId),
    /// This member bids above zero and no competing ad without it is tight,
    /// so it could lower its bid and still win.
    Unpinned(AdvertiserId),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Equilibrium(_))
    }

    pub fn certificate(&self) -> Option<&EquilibriumCertificate> {
        match self {
            Verdict::Equilibrium(c) => Some(c),
            _ => None,
        }
    }
}

/// Checks the first-price equilibrium conditions on the winner's bids, with
/// losing advertisers at their values.
///
/// The profile must be IR and CEF; then every member with a positive bid
/// needs a competing ad it does not belong to whose total bid equals the
/// winner's.
pub fn is_equilibrium(polytope: &CefPolytope<'_>, bids: &BidProfile) -> Result<Verdict> {
    let bids = polytope.canonical(bids)?;
    let instance = polytope.instance;
    if let Some(i) = ir_violation(instance, &bids)? {
        return Ok(Verdict::NotIndividuallyRational(i));
    }
    if let Some(ad) = polytope.cef_violation(&bids)? {
        return Ok(Verdict::NotEnvyFree(ad));
    }
    let winner_total = instance.total_bid(&bids, polytope.winner)?;
    let mut entries = Vec::with_capacity(polytope.members.len());
    for &k in &polytope.members {
        if bids.bid(k).is_zero() {
            entries.push((k, Witness::ZeroBid));
            continue;
        }
        let witness = instance
            .ads()
            .iter()
            .filter(|ad| !ad.contains(k))
            .find(|ad| instance.total_bid(&bids, ad.id()).expect("checked") == winner_total);
        match witness {
            Some(ad) => entries.push((k, Witness::TightAd(ad.id()))),
            None => return Ok(Verdict::Unpinned(k)),
        }
    }
    Ok(Verdict::Equilibrium(EquilibriumCertificate { entries }))
}

/// Minimizes `sum w_i b_i` over the polytope. With strictly positive weights
/// the optimum is Pareto-minimal, which makes it an equilibrium.
pub fn sample_pareto_equilibrium(polytope: &CefPolytope<'_>, weights: &[Scalar]) -> Result<BidProfile> {
    if weights.len() != polytope.members.len() || weights.iter().any(|w| !w.is_positive()) {
        return Err(Error::InvalidWeights);
    }
    let x = match polytope.base_program(weights.to_vec()).solve() {
        LpSolution::Optimal { x, .. } => x,
        LpSolution::Infeasible => return Err(Error::Infeasible),
        LpSolution::Unbounded => unreachable!("bids are bounded below by zero"),
    };
    let bids = polytope.profile_from_member_bids(&x)?;
    let verdict = is_equilibrium(polytope, &bids)?;
    assert!(verdict.holds(), "LP optimum is not an equilibrium: {verdict:?}");
    Ok(bids)
}

/// Smallest and largest winner revenue over all equilibria.
///
/// The minimum is the unit-weight Pareto sample. For the maximum, every
/// equilibrium lies on the face fixed by its set `J` of tight competing
/// ads, with members not covered by any `T \ S_j` (j in J) at zero; each
/// such face is a polytope whose points are all equilibria, so the maximum
/// is the best of one LP per subset `J`.
pub fn revenue_range(polytope: &CefPolytope<'_>) -> Result<(Scalar, Scalar)> {
    let d = polytope.members.len();
    let min_bids = sample_pareto_equilibrium(polytope, &vec![Scalar::one(); d])?;
    let min: Scalar = polytope.members.iter().map(|&i| min_bids.bid(i)).sum();

    let c = polytope.constraints.len();
    assert!(c < 31, "too many competing ads for face enumeration");
    let mut max = min.clone();
    for mask in 0u32..(1 << c) {
        let tight: Vec<&CefConstraint> = (0..c)
            .filter(|b| mask & (1 << b) != 0)
            .map(|b| &polytope.constraints[b])
            .collect();
        let mut lp = polytope.base_program(vec![-Scalar::one(); d]);
        for t in &tight {
            lp.constrain(polytope.indicator(&t.bidders), Relation::Eq, t.rhs.clone());
        }
        for (k, i) in polytope.members.iter().enumerate() {
            if !tight.iter().any(|t| t.bidders.contains(i)) {
                let mut row = vec![Scalar::zero(); d];
                row[k] = Scalar::one();
                lp.constrain(row, Relation::Eq, Scalar::zero());
            }
        }
        if let LpSolution::Optimal { value, .. } = lp.solve() {
            let revenue = -value;
            if revenue > max {
                max = revenue;
            }
        }
    }
    Ok((min, max))
}
