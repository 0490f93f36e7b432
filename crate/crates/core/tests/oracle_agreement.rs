use rand::rngs::StdRng;
use rand::SeedableRng;

use coopetitive::random::{random_instance, ValueLaw};
use coopetitive::scalar::s;
use coopetitive::{
    build_polytope, egalitarian_solve, enumerate_equilibria_grid, is_cef, is_ir, lexmax_surplus_grid,
    parse_shorthand, revenue_lower_bound, vcg, vcg_bruteforce, verify_egalitarian, GridSpec, Scalar,
};

fn small_instances(seed: u64, count: usize) -> Vec<coopetitive::AuctionInstance> {
    let mut rng = StdRng::seed_from_u64(seed);
    let law = ValueLaw::Grid {
        step: s("1/4"),
        max_steps: 8,
    };
    (0..count).map(|_| random_instance(&mut rng, 5, 4, &law)).collect()
}

/// Event times are multiples of the resolution whenever every cumulative
/// lowering level is.
fn events_on_grid(sol: &coopetitive::EgalitarianSolution, eps: &Scalar) -> bool {
    let mut level = Scalar::zero();
    sol.trace.rounds.iter().all(|r| {
        level += &r.decrement;
        (&level / eps).is_integer()
    })
}

#[test]
fn egalitarian_lands_on_grid_when_events_do() {
    let eps = s("1/8");
    let grid = GridSpec::new(eps.clone());
    let mut checked = 0;
    for inst in small_instances(91, 150) {
        let sol = egalitarian_solve(&inst);
        if !events_on_grid(&sol, &eps) {
            continue;
        }
        checked += 1;
        let all = enumerate_equilibria_grid(&inst, &grid).unwrap();
        assert!(all.contains(&sol.bids), "{}", inst.to_shorthand());
        assert_eq!(lexmax_surplus_grid(&inst, &grid).unwrap(), sol.bids, "{}", inst.to_shorthand());
    }
    assert!(checked > 50, "only {checked} instances had on-grid events");
}

#[test]
fn grid_equilibria_respect_revenue_bound() {
    let eps = s("1/4");
    let grid = GridSpec::new(eps.clone());
    for inst in small_instances(17, 80) {
        let p = build_polytope(&inst);
        let slack = Scalar::from_integer(p.members().len() as i64) * &eps;
        let bound = revenue_lower_bound(&inst) - slack;
        let points = enumerate_equilibria_grid(&inst, &grid).unwrap();
        let mut sorted = points.clone();
        sorted.sort_by(|a, b| a.as_slice().cmp(b.as_slice()));
        assert_eq!(sorted, points, "output must be sorted");
        for b in points {
            assert!(is_ir(&inst, &b).unwrap());
            assert!(is_cef(&p, &b).unwrap());
            let revenue: Scalar = p.members().iter().map(|&k| b.bid(k)).sum();
            assert!(revenue >= bound, "{}", inst.to_shorthand());
        }
    }
}

#[test]
fn egalitarian_verified_by_grid_search() {
    let grid = GridSpec::new(s("1/8"));
    for inst in small_instances(5, 100) {
        let sol = egalitarian_solve(&inst);
        assert!(verify_egalitarian(&inst, &sol.bids, &grid).unwrap(), "{}", inst.to_shorthand());
    }
}

#[test]
fn vcg_routes_agree() {
    let mut rng = StdRng::seed_from_u64(3);
    let law = ValueLaw::Rational {
        max_denominator: 7,
        max_value: 10,
    };
    for _ in 0..500 {
        let inst = random_instance(&mut rng, 8, 8, &law);
        assert_eq!(vcg(&inst), vcg_bruteforce(&inst), "{}", inst.to_shorthand());
    }
}

#[test]
fn lopsided_split_is_not_egalitarian() {
    let inst = parse_shorthand("{(A:100,B:100),(C:99)}").unwrap();
    let grid = GridSpec::new(s("1/2"));
    let bids = coopetitive::BidProfile::new(vec![s("0"), s("99"), s("99")]);
    assert!(!verify_egalitarian(&inst, &bids, &grid).unwrap());
}
