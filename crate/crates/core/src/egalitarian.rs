//! Egalitarian first-price equilibrium by uniform bid lowering.
//!
//! Everyone starts at their value. Unfixed members of the efficient ad `T`
//! lower their bids at the same rate until one reaches zero or some
//! competing ad `S_j` would overtake `T`; then that bidder, or all of
//! `T \ S_j`, is fixed. The continuous process is simulated exactly: each
//! round jumps straight to the next event.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mechanisms::{efficient_winner, settle_first_price};
use crate::oracle::{lex_greater_with_tolerance, lexmax_surplus_grid, GridSpec};
use crate::polytope::{build_polytope, is_equilibrium};
use crate::model::{AdId, AdvertiserId, AuctionInstance, BidProfile, Outcome};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LoweringEvent {
    ReachedZero(AdvertiserId),
    /// The competing ad's total bid now equals the winner's.
    TightAd(AdId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoweringRound {
    /// Amount every unfixed bid dropped by in this round.
    pub decrement: Scalar,
    pub events: Vec<LoweringEvent>,
    pub fixed: Vec<AdvertiserId>,
    /// Full bid profile at the end of the round.
    pub bids_after: Vec<Scalar>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoweringTrace {
    pub winner: AdId,
    pub rounds: Vec<LoweringRound>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EgalitarianSolution {
    pub bids: BidProfile,
    pub outcome: Outcome,
    pub trace: LoweringTrace,
}

/// Runs the uniform-lowering procedure on the efficient ad.
pub fn egalitarian_solve(instance: &AuctionInstance) -> EgalitarianSolution {
    let winner = efficient_winner(instance);
    let t = &instance.ads()[winner.0];
    let mut bids = BidProfile::truthful(instance);
    let mut unfixed: Vec<AdvertiserId> = t.members().to_vec();

    // For each competing ad: the members of T it lacks, and the value of its
    // members outside T (held fixed at their bids = values).
    let rivals: Vec<(AdId, Vec<AdvertiserId>, Scalar)> = instance
        .ads()
        .iter()
        .filter(|ad| ad.id() != winner)
        .map(|ad| {
            let lacking = t.members().iter().copied().filter(|&i| !ad.contains(i)).collect();
            let outside: Scalar = ad
                .members()
                .iter()
                .filter(|&&i| !t.contains(i))
                .map(|&i| instance.value(i))
                .sum();
            (ad.id(), lacking, outside)
        })
        .collect();

    let mut rounds = Vec::new();
    while !unfixed.is_empty() {
        // Slack and shrink rate of every rival that is still closing in.
        let closing: Vec<(AdId, &[AdvertiserId], Scalar, usize)> = rivals
            .iter()
            .filter_map(|(ad, lacking, outside)| {
                let rate = lacking.iter().filter(|i| unfixed.contains(i)).count();
                if rate == 0 {
                    return None;
                }
                let slack = lacking.iter().map(|&i| bids.bid(i)).sum::<Scalar>() - outside;
                debug_assert!(!slack.is_negative());
                Some((*ad, lacking.as_slice(), slack, rate))
            })
            .collect();

        let decrement = unfixed
            .iter()
            .map(|&i| bids.bid(i).clone())
            .chain(
                closing
                    .iter()
                    .map(|(_, _, slack, rate)| slack / Scalar::from_integer(*rate as i64)),
            )
            .min()
            .expect("unfixed is non-empty");

        for &i in &unfixed {
            let lowered = bids.bid(i) - &decrement;
            bids.set(i, lowered);
        }

        let mut events = Vec::new();
        let mut fixed: Vec<AdvertiserId> = Vec::new();
        for &i in &unfixed {
            if bids.bid(i).is_zero() {
                events.push(LoweringEvent::ReachedZero(i));
                fixed.push(i);
            }
        }
        for (ad, lacking, slack, rate) in &closing {
            if *slack == &decrement * Scalar::from_integer(*rate as i64) {
                events.push(LoweringEvent::TightAd(*ad));
                fixed.extend(lacking.iter().filter(|i| unfixed.contains(i)));
            }
        }
        fixed.sort();
        fixed.dedup();
        assert!(!fixed.is_empty(), "every round fixes a bidder");
        unfixed.retain(|i| !fixed.contains(i));

        let winner_total = instance.total_bid(&bids, winner).expect("own dimension");
        for ad in instance.ads() {
            assert!(
                instance.total_bid(&bids, ad.id()).expect("own dimension") <= winner_total,
                "winner overtaken by {}",
                ad.id()
            );
        }

        rounds.push(LoweringRound {
            decrement,
            events,
            fixed,
            bids_after: bids.as_slice().to_vec(),
        });
    }
    assert!(rounds.len() <= t.members().len(), "more rounds than winning bidders");

    let outcome = settle_first_price(instance, &bids, winner).expect("own dimension");
    EgalitarianSolution {
        bids,
        outcome,
        trace: LoweringTrace { winner, rounds },
    }
}

/// Checks `bids` against the grid oracle: true when no grid equilibrium at
/// resolution `grid.resolution` has a lexicographically larger sorted
/// surplus vector, treating surpluses within the resolution as equal.
pub fn verify_egalitarian(instance: &AuctionInstance, bids: &BidProfile, grid: &GridSpec) -> Result<bool> {
    let polytope = build_polytope(instance);
    if !is_equilibrium(&polytope, bids)?.holds() {
        return Ok(false);
    }
    let best = lexmax_surplus_grid(instance, grid)?;
    let surplus = |b: &BidProfile| -> Vec<Scalar> {
        polytope
            .members()
            .iter()
            .map(|&i| instance.value(i) - b.bid(i))
            .collect()
    };
    Ok(!lex_greater_with_tolerance(&surplus(&best), &surplus(bids), &grid.resolution))
}

/// Round-by-round log with advertiser names, for the CLI `--trace` flag.
pub struct TraceLog<'a> {
    pub instance: &'a AuctionInstance,
    pub trace: &'a LoweringTrace,
}

impl fmt::Display for TraceLog<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inst = self.instance;
        let t = &inst.ads()[self.trace.winner.0];
        writeln!(f, "winner: ad {} ({} members)", self.trace.winner.0, t.members().len())?;
        let mut level = Scalar::zero();
        for (r, round) in self.trace.rounds.iter().enumerate() {
            level += &round.decrement;
            let events: Vec<String> = round
                .events
                .iter()
                .map(|e| match e {
                    LoweringEvent::ReachedZero(i) => format!("{} reached 0", inst.name(*i)),
                    LoweringEvent::TightAd(ad) => format!("ad {} tight", ad.0),
                })
                .collect();
            let fixed: Vec<&str> = round.fixed.iter().map(|&i| inst.name(i)).collect();
            let bids: Vec<String> = t
                .members()
                .iter()
                .map(|&i| format!("{}={}", inst.name(i), round.bids_after[i.0]))
                .collect();
            writeln!(
                f,
                "round {}: lower by {} (total {}); {}; fix {}; bids {}",
                r + 1,
                round.decrement,
                level,
                events.join(", "),
                fixed.join(" "),
                bids.join(" ")
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_shorthand;
    use crate::scalar::s;

    fn solve(text: &str) -> EgalitarianSolution {
        egalitarian_solve(&parse_shorthand(text).unwrap())
    }

    fn v(xs: &[&str]) -> Vec<Scalar> {
        xs.iter().map(|x| s(x)).collect()
    }

    #[test]
    fn equal_split_against_single_rival() {
        let sol = solve("{(A:100,B:100),(C:99)}");
        assert_eq!(sol.bids.as_slice(), &v(&["49.5", "49.5", "99"])[..]);
        assert_eq!(sol.outcome.surpluses, v(&["50.5", "50.5", "0"]));
        assert_eq!(sol.outcome.revenue, 99);
        assert_eq!(sol.trace.rounds.len(), 1);
        assert_eq!(sol.trace.rounds[0].decrement, s("50.5"));
        assert_eq!(sol.trace.rounds[0].events, vec![LoweringEvent::TightAd(AdId(1))]);
    }

    #[test]
    fn triangle_simultaneous_events() {
        let sol = solve("{(A:1,B:1,C:1),(A:1,D:1),(B:1,E:1)}");
        assert_eq!(sol.bids.as_slice(), &v(&["0.5", "0.5", "0.5", "1", "1"])[..]);
        assert_eq!(sol.outcome.revenue, s("1.5"));
        assert_eq!(sol.outcome.surpluses[..3], v(&["0.5", "0.5", "0.5"])[..]);
        let round = &sol.trace.rounds[0];
        assert_eq!(sol.trace.rounds.len(), 1);
        assert_eq!(
            round.events,
            vec![LoweringEvent::TightAd(AdId(1)), LoweringEvent::TightAd(AdId(2))]
        );
        assert_eq!(round.fixed, vec![AdvertiserId(0), AdvertiserId(1), AdvertiserId(2)]);
    }

    #[test]
    fn lone_ad_lowers_to_zero() {
        let sol = solve("{(A:5)}");
        assert_eq!(sol.bids.as_slice(), &v(&["0"])[..]);
        assert_eq!(sol.outcome.surpluses, v(&["5"]));
        assert_eq!(
            sol.trace.rounds[0].events,
            vec![LoweringEvent::ReachedZero(AdvertiserId(0))]
        );
    }

    #[test]
    fn zero_decrement_when_tied_at_start() {
        let sol = solve("{(A:1),(B:1)}");
        assert_eq!(sol.trace.rounds[0].decrement, s("0"));
        assert_eq!(sol.bids.as_slice(), &v(&["1", "1"])[..]);
    }

    #[test]
    fn mixed_zero_and_tight_rounds() {
        // B runs out at 1; A then continues alone until C's ad ties at 4.
        let sol = solve("{(A:6,B:1),(C:4)}");
        assert_eq!(sol.trace.rounds.len(), 2);
        assert_eq!(sol.trace.rounds[0].events, vec![LoweringEvent::ReachedZero(AdvertiserId(1))]);
        assert_eq!(sol.trace.rounds[1].decrement, s("1"));
        assert_eq!(sol.bids.as_slice(), &v(&["4", "0", "4"])[..]);
    }

    #[test]
    fn verify_against_grid() {
        let inst = parse_shorthand("{(A:100,B:100),(C:99)}").unwrap();
        let grid = GridSpec::new(s("1/2"));
        let egal = BidProfile::new(v(&["49.5", "49.5", "99"]));
        assert!(verify_egalitarian(&inst, &egal, &grid).unwrap());
        let lopsided = BidProfile::new(v(&["0", "99", "99"]));
        assert!(verify_egalitarian(&inst, &lopsided, &grid).unwrap() == false);

        let lone = parse_shorthand("{(A:5)}").unwrap();
        assert!(verify_egalitarian(&lone, &BidProfile::new(v(&["0"])), &grid).unwrap());
    }

    #[test]
    fn trace_log_mentions_events() {
        let inst = parse_shorthand("{(A:100,B:100),(C:99)}").unwrap();
        let sol = egalitarian_solve(&inst);
        let log = TraceLog {
            instance: &inst,
            trace: &sol.trace,
        }
        .to_string();
        assert!(log.contains("round 1: lower by 50.5"), "{log}");
        assert!(log.contains("ad 1 tight"), "{log}");
        assert!(log.contains("A=49.5 B=49.5"), "{log}");
    }
}
