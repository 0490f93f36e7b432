use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use coopetitive::egalitarian::TraceLog;
use coopetitive::polytope::ir_violation;
use coopetitive::{
    best_response_contract, build_polytope, efficient_ties, egalitarian_solve, enumerate_equilibria_grid,
    evaluate_contracts, is_equilibrium, lexmax_surplus_grid, parse_bids, parse_instance, revenue_lower_bound,
    revenue_range, sample_pareto_equilibrium, vcg, vcg_bruteforce, verify_egalitarian, AdId, AdvertiserId,
    AuctionInstance, BidProfile, ContractProfile, EgalitarianSolution, GridSpec, OwnedAuction, Outcome,
    PositionOutcome, Scalar, Verdict, Witness,
};

mod report;

use report::{Cell, Format, Report, Section};

#[derive(Parser)]
#[command(name = "coopetitive", version, about = "Coopetitive single-slot ad auction laboratory")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "table")]
    format: Format,

    /// Include the egalitarian lowering log.
    #[arg(long, global = true)]
    trace: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one mechanism on an instance.
    Solve {
        /// Instance file, or `-` for stdin.
        path: PathBuf,
        #[arg(long, value_enum, default_value = "egalitarian")]
        mechanism: Mechanism,
    },
    /// Check a bid profile for individual rationality, envy-freeness and
    /// equilibrium.
    Verify { path: PathBuf, bids: PathBuf },
    /// VCG against first-price equilibria, side by side.
    Compare { path: PathBuf },
    /// Constraints of the envy-free polytope and a weighted frontier sample.
    Polytope {
        path: PathBuf,
        /// Comma-separated positive weights, one per winning-ad member in
        /// instance order. Defaults to all ones.
        #[arg(long)]
        weights: Option<String>,
    },
    /// Cross-check the exact solvers against grid enumeration.
    Oracle {
        path: PathBuf,
        /// Grid resolution, e.g. `0.25` or `1/8`.
        #[arg(long)]
        epsilon: String,
        /// Maximum number of grid points to visit.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Best-response subsidies under external contracts in a position
    /// auction. The instance needs `owners` and `slots`.
    Contracts {
        path: PathBuf,
        /// Subsidy grid step.
        #[arg(long)]
        subsidy_grid: String,
        /// Largest subsidy tried. Defaults to the largest advertiser value.
        #[arg(long)]
        subsidy_max: Option<String>,
        /// Only this advertiser responds. Defaults to every advertiser that
        /// backs an ad it does not own.
        #[arg(long)]
        responder: Option<String>,
        #[arg(long)]
        budget: Option<u64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mechanism {
    Egalitarian,
    Vcg,
    Bounds,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            if let Err(e) = report.render(cli.format, &mut out).and_then(|_| Ok(out.flush()?)) {
                eprintln!("error: {e:#}");
                return ExitCode::FAILURE;
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Solve { path, mechanism } => {
            let inst = load_instance(path)?;
            Ok(cmd_solve(&inst, *mechanism, cli.trace)?)
        }
        Command::Verify { path, bids } => {
            if path.as_os_str() == "-" && bids.as_os_str() == "-" {
                bail!("only one input can come from stdin");
            }
            let inst = load_instance(path)?;
            let text = read_input(bids)?;
            let bids = parse_bids(&inst, &text).with_context(|| format!("parsing {}", bids.display()))?;
            cmd_verify(&inst, &bids)
        }
        Command::Compare { path } => cmd_compare(&load_instance(path)?, cli.trace),
        Command::Polytope { path, weights } => cmd_polytope(&load_instance(path)?, weights.as_deref()),
        Command::Oracle { path, epsilon, budget } => {
            let inst = load_instance(path)?;
            let mut grid = GridSpec::new(parse_scalar("--epsilon", epsilon)?);
            if let Some(b) = budget {
                grid = grid.with_budget(*b);
            }
            cmd_oracle(&inst, &grid, cli.trace)
        }
        Command::Contracts {
            path,
            subsidy_grid,
            subsidy_max,
            responder,
            budget,
        } => {
            let text = read_input(path)?;
            let owned = OwnedAuction::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
            let mut grid = GridSpec::new(parse_scalar("--subsidy-grid", subsidy_grid)?);
            if let Some(b) = budget {
                grid = grid.with_budget(*b);
            }
            let max = match subsidy_max {
                Some(m) => parse_scalar("--subsidy-max", m)?,
                None => owned.instance().values().iter().max().cloned().unwrap_or_else(Scalar::zero),
            };
            cmd_contracts(&owned, &grid, &max, responder.as_deref())
        }
    }
}

fn read_input(path: &PathBuf) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut text = String::new();
        io::stdin().read_to_string(&mut text).context("reading stdin")?;
        Ok(text)
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn load_instance(path: &PathBuf) -> Result<AuctionInstance> {
    let text = read_input(path)?;
    parse_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

fn parse_scalar(flag: &str, text: &str) -> Result<Scalar> {
    text.trim()
        .parse()
        .map_err(|e| anyhow::anyhow!("{flag}: {e}"))
}

fn ad_label(inst: &AuctionInstance, ad: AdId) -> String {
    let names: Vec<&str> = inst.ads()[ad.0].members().iter().map(|&i| inst.name(i)).collect();
    format!("ad {} ({})", ad.0, names.join(", "))
}

fn summary(rows: Vec<(&str, Cell)>) -> Section {
    let mut s = Section::new("summary", &["measure", "value"]);
    for (k, v) in rows {
        s.row(vec![k.into(), v]);
    }
    s
}

fn outcome_section(inst: &AuctionInstance, outcome: &Outcome, bids: Option<&BidProfile>) -> Section {
    let mut cols = vec!["advertiser", "value"];
    if bids.is_some() {
        cols.push("bid");
    }
    cols.extend(["payment", "surplus"]);
    let mut s = Section::new("advertisers", &cols);
    for i in inst.advertisers() {
        let mut row: Vec<Cell> = vec![inst.name(i).into(), inst.value(i).into()];
        if let Some(b) = bids {
            row.push(b.bid(i).into());
        }
        row.push((&outcome.payments[i.0]).into());
        row.push((&outcome.surpluses[i.0]).into());
        s.row(row);
    }
    s
}

fn trace_section(inst: &AuctionInstance, sol: &EgalitarianSolution) -> Section {
    let log = TraceLog {
        instance: inst,
        trace: &sol.trace,
    }
    .to_string();
    let mut s = Section::new("lowering trace", &["line"]);
    for line in log.lines() {
        s.row(vec![line.into()]);
    }
    s
}

fn note_ties(report: &mut Report, inst: &AuctionInstance) {
    let ties = efficient_ties(inst);
    if ties.len() > 1 {
        let labels: Vec<String> = ties.iter().map(|&a| ad_label(inst, a)).collect();
        report.note(format!(
            "efficient ads tie ({}); the lowest id wins",
            labels.join("; ")
        ));
    }
}

fn cmd_solve(inst: &AuctionInstance, mechanism: Mechanism, trace: bool) -> Result<Report> {
    let mut report = Report::new("solve");
    match mechanism {
        Mechanism::Vcg => {
            let r = vcg(inst);
            let outcome = r.outcome(inst);
            report.push(summary(vec![
                ("mechanism", "vcg".into()),
                ("winner", ad_label(inst, r.winner).into()),
                ("revenue", (&r.revenue).into()),
            ]));
            report.push(outcome_section(inst, &outcome, None));
            note_ties(&mut report, inst);
        }
        Mechanism::Egalitarian => {
            let sol = egalitarian_solve(inst);
            report.push(summary(vec![
                ("mechanism", "egalitarian first-price".into()),
                ("winner", ad_label(inst, sol.outcome.winner).into()),
                ("revenue", (&sol.outcome.revenue).into()),
                ("rounds", sol.trace.rounds.len().into()),
            ]));
            report.push(outcome_section(inst, &sol.outcome, Some(&sol.bids)));
            if trace {
                report.push(trace_section(inst, &sol));
            }
            note_ties(&mut report, inst);
        }
        Mechanism::Bounds => {
            let p = build_polytope(inst);
            let (lo, hi) = revenue_range(&p)?;
            report.push(summary(vec![
                ("winner", ad_label(inst, p.winner()).into()),
                ("revenue lower bound", revenue_lower_bound(inst).into()),
                ("equilibrium revenue min", lo.into()),
                ("equilibrium revenue max", hi.into()),
            ]));
            note_ties(&mut report, inst);
        }
    }
    Ok(report)
}

fn cmd_verify(inst: &AuctionInstance, bids: &BidProfile) -> Result<Report> {
    let p = build_polytope(inst);
    let mut checks = Section::new("checks", &["check", "holds", "detail"]);

    let ir = ir_violation(inst, bids)?;
    checks.row(vec![
        "individually rational".into(),
        ir.is_none().into(),
        ir.map(|i| format!("{} bids {} above value {}", inst.name(i), bids.bid(i), inst.value(i)))
            .unwrap_or_default()
            .into(),
    ]);

    let cef = p.cef_violation(bids)?;
    checks.row(vec![
        "cooperative envy-free".into(),
        cef.is_none().into(),
        cef.map(|ad| {
            let c = p.constraints().iter().find(|c| c.ad == ad).expect("violated row");
            format!("{} would gain: slack {}", ad_label(inst, ad), c.slack(bids))
        })
        .unwrap_or_default()
        .into(),
    ]);

    let verdict = is_equilibrium(&p, bids)?;
    let detail = match &verdict {
        Verdict::Equilibrium(_) => String::new(),
        Verdict::NotIndividuallyRational(i) => format!("{} bids above value", inst.name(*i)),
        Verdict::NotEnvyFree(ad) => format!("{} would gain", ad_label(inst, *ad)),
        Verdict::Unpinned(i) => format!("{} can lower its bid and still win", inst.name(*i)),
    };
    checks.row(vec!["equilibrium".into(), verdict.holds().into(), detail.into()]);

    let mut report = Report::new("verify");
    report.push(summary(vec![("winner", ad_label(inst, p.winner()).into())]));
    report.push(checks);
    if let Some(cert) = verdict.certificate() {
        let mut s = Section::new("certificate", &["advertiser", "bid", "witness"]);
        for (i, w) in &cert.entries {
            let witness = match w {
                Witness::ZeroBid => "bids zero".to_string(),
                Witness::TightAd(ad) => format!("{} tied", ad_label(inst, *ad)),
            };
            s.row(vec![inst.name(*i).into(), bids.bid(*i).into(), witness.into()]);
        }
        report.push(s);
    }
    let t = &inst.ads()[p.winner().0];
    let moved: Vec<&str> = inst
        .advertisers()
        .filter(|&i| !t.contains(i) && bids.bid(i) != inst.value(i))
        .map(|i| inst.name(i))
        .collect();
    if !moved.is_empty() {
        report.note(format!(
            "equilibrium is judged with losing advertisers at their values ({} bid otherwise)",
            moved.join(", ")
        ));
    }
    note_ties(&mut report, inst);
    Ok(report)
}

fn relation(a: &Scalar, b: &Scalar) -> &'static str {
    match a.cmp(b) {
        std::cmp::Ordering::Less => "<",
        std::cmp::Ordering::Equal => "=",
        std::cmp::Ordering::Greater => ">",
    }
}

fn cmd_compare(inst: &AuctionInstance, trace: bool) -> Result<Report> {
    let v = vcg(inst);
    let sol = egalitarian_solve(inst);
    let bound = revenue_lower_bound(inst);
    let p = build_polytope(inst);
    let (lo, hi) = revenue_range(&p)?;

    let mut report = Report::new("compare");
    report.push(summary(vec![
        ("winner", ad_label(inst, v.winner).into()),
        ("vcg revenue", (&v.revenue).into()),
        ("egalitarian revenue", (&sol.outcome.revenue).into()),
        ("revenue lower bound", (&bound).into()),
        ("equilibrium revenue min", (&lo).into()),
        ("equilibrium revenue max", (&hi).into()),
    ]));

    let mut rel = Section::new("relations", &["left", "relation", "right"]);
    for (l, a, r, b) in [
        ("vcg revenue", &v.revenue, "revenue lower bound", &bound),
        ("vcg revenue", &v.revenue, "equilibrium revenue min", &lo),
        ("revenue lower bound", &bound, "equilibrium revenue min", &lo),
        ("equilibrium revenue min", &lo, "egalitarian revenue", &sol.outcome.revenue),
        ("egalitarian revenue", &sol.outcome.revenue, "equilibrium revenue max", &hi),
    ] {
        rel.row(vec![l.into(), relation(a, b).into(), r.into()]);
    }
    report.push(rel);

    let mut per = Section::new(
        "advertisers",
        &["advertiser", "value", "vcg payment", "egalitarian bid", "egalitarian payment"],
    );
    for i in inst.advertisers() {
        per.row(vec![
            inst.name(i).into(),
            inst.value(i).into(),
            (&v.payments[i.0]).into(),
            sol.bids.bid(i).into(),
            (&sol.outcome.payments[i.0]).into(),
        ]);
    }
    report.push(per);
    if trace {
        report.push(trace_section(inst, &sol));
    }

    if v.revenue < lo {
        report.note("every first-price equilibrium earns more than VCG");
    } else if v.revenue == lo {
        report.note("VCG matches the least first-price equilibrium revenue");
    }
    let vcg_dominated = inst
        .advertisers()
        .all(|i| v.payments[i.0] <= sol.outcome.payments[i.0]);
    if vcg_dominated {
        report.note("each advertiser pays at least its VCG price in the egalitarian equilibrium");
    }
    note_ties(&mut report, inst);
    Ok(report)
}

fn parse_weights(p: &coopetitive::CefPolytope<'_>, text: Option<&str>) -> Result<Vec<Scalar>> {
    let d = p.members().len();
    let Some(text) = text else {
        return Ok(vec![Scalar::one(); d]);
    };
    let weights = text
        .split(',')
        .map(|w| parse_scalar("--weights", w))
        .collect::<Result<Vec<_>>>()?;
    if weights.len() != d {
        bail!("--weights: expected {d} weights, one per winning-ad member, found {}", weights.len());
    }
    Ok(weights)
}

fn cmd_polytope(inst: &AuctionInstance, weights: Option<&str>) -> Result<Report> {
    let p = build_polytope(inst);
    let weights = parse_weights(&p, weights)?;
    let sample = sample_pareto_equilibrium(&p, &weights)?;
    let (lo, hi) = revenue_range(&p)?;

    let mut report = Report::new("polytope");
    report.push(summary(vec![
        ("winner", ad_label(inst, p.winner()).into()),
        ("equilibrium revenue min", lo.into()),
        ("equilibrium revenue max", hi.into()),
    ]));
    let mut cons = Section::new("constraints", &["competing ad", "bidders", "at least"]);
    for c in p.constraints() {
        let names: Vec<&str> = c.bidders.iter().map(|&i| inst.name(i)).collect();
        cons.row(vec![ad_label(inst, c.ad).into(), names.join(" + ").into(), (&c.rhs).into()]);
    }
    report.push(cons);
    let mut s = Section::new("weighted sample", &["advertiser", "value", "weight", "bid"]);
    for (&i, w) in p.members().iter().zip(&weights) {
        s.row(vec![inst.name(i).into(), inst.value(i).into(), w.into(), sample.bid(i).into()]);
    }
    report.push(s);
    let revenue: Scalar = p.members().iter().map(|&i| sample.bid(i)).sum();
    report.note(format!("sample revenue {}", revenue));
    Ok(report)
}

fn bid_list(inst: &AuctionInstance, members: &[AdvertiserId], bids: &BidProfile) -> String {
    members
        .iter()
        .map(|&i| format!("{}={}", inst.name(i), bids.bid(i)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_oracle(inst: &AuctionInstance, grid: &GridSpec, trace: bool) -> Result<Report> {
    let p = build_polytope(inst);
    let members = p.members().to_vec();
    let sol = egalitarian_solve(inst);
    let points = enumerate_equilibria_grid(inst, grid)?;
    let lexmax = lexmax_surplus_grid(inst, grid)?;
    let verified = verify_egalitarian(inst, &sol.bids, grid)?;
    let vcg_agrees = vcg(inst) == vcg_bruteforce(inst);

    let mut report = Report::new("oracle");
    report.push(summary(vec![
        ("resolution", (&grid.resolution).into()),
        ("grid equilibria", points.len().into()),
        ("egalitarian bids", bid_list(inst, &members, &sol.bids).into()),
        ("grid lexmax bids", bid_list(inst, &members, &lexmax).into()),
        ("egalitarian on grid", points.contains(&sol.bids).into()),
        ("egalitarian verified", verified.into()),
        ("vcg agrees with brute force", vcg_agrees.into()),
    ]));
    let mut cols: Vec<&str> = members.iter().map(|&i| inst.name(i)).collect();
    cols.push("revenue");
    let mut s = Section::new("grid equilibria", &cols);
    for b in &points {
        let mut row: Vec<Cell> = members.iter().map(|&i| b.bid(i).into()).collect();
        row.push(members.iter().map(|&i| b.bid(i)).sum::<Scalar>().into());
        s.row(row);
    }
    report.push(s);
    if trace {
        report.push(trace_section(inst, &sol));
    }
    if !verified {
        report.note("grid search found a lexicographically better surplus vector");
    }
    Ok(report)
}

fn placement_section(title: &str, owned: &OwnedAuction, out: &PositionOutcome) -> Section {
    let inst = owned.instance();
    let mut s = Section::new(title, &["slot", "ad", "owner", "ctr", "price"]);
    for pl in &out.placements {
        s.row(vec![
            (pl.slot + 1).into(),
            ad_label(inst, pl.ad).into(),
            inst.name(owned.owner(pl.ad)).into(),
            (&owned.slots()[pl.slot]).into(),
            (&pl.price).into(),
        ]);
    }
    s
}

fn cmd_contracts(owned: &OwnedAuction, grid: &GridSpec, max: &Scalar, responder: Option<&str>) -> Result<Report> {
    let inst = owned.instance();
    let responders: Vec<AdvertiserId> = match responder {
        Some(name) => vec![inst
            .advertiser_by_name(name)
            .with_context(|| format!("--responder: unknown advertiser {name:?}"))?],
        None => inst
            .advertisers()
            .filter(|&i| !owned.supported_ads(i).is_empty())
            .collect(),
    };
    let baseline = evaluate_contracts(owned, &ContractProfile::empty())?;

    let mut report = Report::new("contracts");
    report.push(placement_section("without contracts", owned, &baseline));
    let mut s = Section::new(
        "best responses",
        &["advertiser", "subsidies", "utility", "utility without contracts", "zero is best"],
    );
    let mut first: Option<(AdvertiserId, PositionOutcome)> = None;
    for &r in &responders {
        let br = best_response_contract(owned, r, &ContractProfile::empty(), grid, max)?;
        let subsidies: Vec<String> = br
            .subsidies
            .iter()
            .map(|(ad, x)| format!("ad {}: {}", ad.0, x))
            .collect();
        s.row(vec![
            inst.name(r).into(),
            subsidies.join("; ").into(),
            (&br.utility).into(),
            (&br.baseline_utility).into(),
            br.zero_is_best().into(),
        ]);
        if first.is_none() && !br.zero_is_best() {
            first = Some((r, br.outcome));
        }
    }
    report.push(s);
    if let Some((r, outcome)) = first {
        report.push(placement_section(
            &format!("with {}'s best response", inst.name(r)),
            owned,
            &outcome,
        ));
    }
    if responders.is_empty() {
        report.note("no advertiser backs an ad it does not own");
    }
    Ok(report)
}
