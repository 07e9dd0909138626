//! Problem files, the intermediated trade example, and the report builders
//! behind the `varnet` command line tool.
//!
//! A problem file is JSON:
//!
//! ```json
//! {
//!   "players": 3,
//!   "game": [ { "links": [[0, 1]], "value": 1.0 } ],
//!   "distribution": { "independent": [ { "link": [0, 1], "probability": 0.5 } ] }
//! }
//! ```
//!
//! `distribution` is one of `explicit` (a list of `{links, probability}`),
//! `independent` (per-link probabilities, unlisted links never form) or
//! `conditioned` (`{base, condition}` with a nested distribution).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::axioms::{self, Axiom, AxiomReport, Rule};
use crate::error::{Error, Result};
use crate::netcore::{Network, PlayerSet};
use crate::netgame::NetworkGame;
use crate::netprob::{NetFormDist, Normalization};
use crate::values::{self, Allocation, VariableGame};

/// Seller, buyer and intermediary in the trade example.
pub const SELLER: usize = 0;
pub const BUYER: usize = 1;
pub const INTERMEDIARY: usize = 2;
pub const SB: (usize, usize) = (SELLER, BUYER);
pub const SI: (usize, usize) = (SELLER, INTERMEDIARY);
pub const BI: (usize, usize) = (BUYER, INTERMEDIARY);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub players: usize,
    #[serde(default)]
    pub game: Vec<GameEntry>,
    pub distribution: DistributionSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameEntry {
    pub links: Vec<[usize; 2]>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkProb {
    pub links: Vec<[usize; 2]>,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkProb {
    pub link: [usize; 2],
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionSpec {
    Explicit(Vec<NetworkProb>),
    Independent(Vec<LinkProb>),
    Conditioned {
        base: Box<DistributionSpec>,
        condition: Condition,
    },
}

/// Events a distribution can be conditioned on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// The player has at least one link.
    PlayerConnected(usize),
    LinkPresent([usize; 2]),
    LinkAbsent([usize; 2]),
}

impl Condition {
    fn predicate(&self, players: PlayerSet) -> Result<Box<dyn Fn(Network) -> bool>> {
        Ok(match *self {
            Condition::PlayerConnected(i) => {
                players.check_player(i)?;
                Box::new(move |g: Network| g.degree(i) > 0)
            }
            Condition::LinkPresent([i, j]) => {
                let link = players.link(i, j)?;
                Box::new(move |g: Network| g.contains(link))
            }
            Condition::LinkAbsent([i, j]) => {
                let link = players.link(i, j)?;
                Box::new(move |g: Network| !g.contains(link))
            }
        })
    }
}

fn to_pairs(links: &[[usize; 2]]) -> Vec<(usize, usize)> {
    links.iter().map(|&[i, j]| (i, j)).collect()
}

fn from_network(g: Network) -> Vec<[usize; 2]> {
    g.links().map(|l| [l.i(), l.j()]).collect()
}

impl DistributionSpec {
    pub fn build(&self, players: PlayerSet) -> Result<NetFormDist> {
        match self {
            DistributionSpec::Explicit(entries) => {
                let parsed = entries
                    .iter()
                    .map(|e| Ok((players.network(&to_pairs(&e.links))?, e.probability)))
                    .collect::<Result<Vec<_>>>()?;
                NetFormDist::from_entries(players, parsed, Normalization::Reject)
            }
            DistributionSpec::Independent(entries) => {
                let parsed = entries
                    .iter()
                    .map(|e| Ok((players.link(e.link[0], e.link[1])?, e.probability)))
                    .collect::<Result<Vec<_>>>()?;
                NetFormDist::from_independent_links(players, parsed)
            }
            DistributionSpec::Conditioned { base, condition } => base
                .build(players)?
                .condition_on(condition.predicate(players)?),
        }
    }
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files always serialize")
    }

    pub fn build(&self) -> Result<VariableGame> {
        let players = PlayerSet::new(self.players)?;
        let entries = self
            .game
            .iter()
            .map(|e| Ok((players.network(&to_pairs(&e.links))?, e.value)))
            .collect::<Result<Vec<_>>>()?;
        let game = NetworkGame::from_entries(players, entries)?;
        let dist = self.distribution.build(players)?;
        VariableGame::new(game, dist)
    }

    /// Problem file listing every nonzero game value and every formable
    /// network explicitly, links in canonical order.
    pub fn explicit(problem: &VariableGame) -> Self {
        Self {
            players: problem.players().len(),
            game: problem
                .game
                .nonzero_entries()
                .into_iter()
                .map(|(g, value)| GameEntry {
                    links: from_network(g),
                    value,
                })
                .collect(),
            distribution: DistributionSpec::Explicit(
                problem
                    .dist
                    .entries()
                    .into_iter()
                    .map(|(g, probability)| NetworkProb {
                        links: from_network(g),
                        probability,
                    })
                    .collect(),
            ),
        }
    }
}

/// Parses and validates a problem document.
pub fn parse_problem(text: &str) -> Result<VariableGame> {
    ProblemFile::from_json(text)?.build()
}

// ---------------------------------------------------------------------------
// Intermediated trade

/// Trade is worth 1 when seller and buyer are linked directly or both are
/// linked to the intermediary.
pub fn trade_game() -> NetworkGame {
    let players = PlayerSet::new(3).expect("three players");
    let sb = players.link(SB.0, SB.1).expect("valid link");
    let via = players.network(&[SI, BI]).expect("valid links");
    NetworkGame::from_fn(players, |g| {
        if g.contains(sb) || via.is_subnetwork_of(g) {
            1.0
        } else {
            0.0
        }
    })
    .expect("three players are enumerable")
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::InvalidProbability { value: x })
    }
}

/// Independent formation with `P(SB) = p` and `P(SI) = P(BI) = q`;
/// `institutional` conditions on the intermediary being linked.
pub fn trade_distribution(p: f64, q: f64, institutional: bool) -> Result<NetFormDist> {
    check_unit(p)?;
    check_unit(q)?;
    let players = PlayerSet::new(3)?;
    let independent = NetFormDist::from_independent_links(
        players,
        [
            (players.link(SB.0, SB.1)?, p),
            (players.link(SI.0, SI.1)?, q),
            (players.link(BI.0, BI.1)?, q),
        ],
    )?;
    if institutional {
        independent.condition_on(|g| g.degree(INTERMEDIARY) > 0)
    } else {
        Ok(independent)
    }
}

pub fn generate_trade_example(p: f64, q: f64, institutional: bool) -> Result<VariableGame> {
    VariableGame::new(trade_game(), trade_distribution(p, q, institutional)?)
}

/// The trade example as a problem file.
pub fn trade_problem_file(p: f64, q: f64, institutional: bool) -> Result<ProblemFile> {
    check_unit(p)?;
    check_unit(q)?;
    let game = trade_game()
        .nonzero_entries()
        .into_iter()
        .map(|(g, value)| GameEntry {
            links: from_network(g),
            value,
        })
        .collect();
    let independent = DistributionSpec::Independent(vec![
        LinkProb {
            link: [SB.0, SB.1],
            probability: p,
        },
        LinkProb {
            link: [SI.0, SI.1],
            probability: q,
        },
        LinkProb {
            link: [BI.0, BI.1],
            probability: q,
        },
    ]);
    let distribution = if institutional {
        DistributionSpec::Conditioned {
            base: Box::new(independent),
            condition: Condition::PlayerConnected(INTERMEDIARY),
        }
    } else {
        independent
    };
    Ok(ProblemFile {
        players: 3,
        game,
        distribution,
    })
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BreakdownRow {
    pub network: Vec<[usize; 2]>,
    pub value: f64,
    pub probability: f64,
    pub myerson: Allocation,
    pub position: Allocation,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RuleReports {
    pub rule: Rule,
    pub reports: Vec<AxiomReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultReport {
    pub players: usize,
    pub expected_wealth: f64,
    pub expected_myerson: Allocation,
    pub expected_position: Allocation,
    pub breakdown: Vec<BreakdownRow>,
    pub axioms: Vec<RuleReports>,
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ComputeOptions {
    pub tol: f64,
    pub with_axioms: bool,
}

impl Default for ComputeOptions {
    fn default() -> Self {
        Self {
            tol: axioms::AXIOM_TOL,
            with_axioms: true,
        }
    }
}

pub fn run_compute(problem: &VariableGame, options: &ComputeOptions) -> Result<ResultReport> {
    let (v, dist) = (&problem.game, &problem.dist);
    let breakdown = dist
        .entries()
        .into_iter()
        .map(|(g, probability)| {
            Ok(BreakdownRow {
                network: from_network(g),
                value: v.value(g),
                probability,
                myerson: values::myerson(v, g)?,
                position: values::position(v, g)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let axioms = if options.with_axioms {
        Rule::ALL
            .iter()
            .map(|&rule| {
                Ok(RuleReports {
                    rule,
                    reports: rule.check(v, dist, options.tol)?,
                })
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    Ok(ResultReport {
        players: problem.players().len(),
        expected_wealth: values::expected_wealth(v, dist)?,
        expected_myerson: values::expected_myerson(v, dist)?,
        expected_position: values::expected_position(v, dist)?,
        breakdown,
        axioms,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyEntry {
    pub rule: Rule,
    pub expected_to_pass: bool,
    pub report: AxiomReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub entries: Vec<VerifyEntry>,
    /// Set when the game is not component additive, in which case component
    /// balance is not checked.
    pub component_balance_skipped: bool,
}

impl VerifyReport {
    /// False iff some axiom a rule is known to satisfy failed.
    pub fn all_expected_pass(&self) -> bool {
        self.entries
            .iter()
            .all(|e| !e.expected_to_pass || e.report.passed)
    }

    pub fn find(&self, rule: Rule, axiom: Axiom) -> Option<&AxiomReport> {
        self.entries
            .iter()
            .find(|e| e.rule == rule && e.report.axiom == axiom)
            .map(|e| &e.report)
    }
}

pub fn run_verify(problem: &VariableGame, tol: f64) -> Result<VerifyReport> {
    let additive = problem.game.is_component_additive(crate::DEFAULT_TOL)?;
    let mut entries = Vec::new();
    for rule in Rule::ALL {
        for report in rule.check(&problem.game, &problem.dist, tol)? {
            entries.push(VerifyEntry {
                rule,
                expected_to_pass: rule.satisfies(report.axiom),
                report,
            });
        }
    }
    Ok(VerifyReport {
        entries,
        component_balance_skipped: !additive,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareRow {
    pub p: f64,
    pub q: f64,
    pub myerson_independent: Allocation,
    pub myerson_institutional: Allocation,
    pub position_independent: Allocation,
    pub position_institutional: Allocation,
    /// Every player weakly gains Expected Myerson payoff under the
    /// institutional distribution.
    pub myerson_dominance: bool,
    /// Seller's Expected Position payoff, independent minus institutional.
    pub position_gap: f64,
    pub position_gap_sign: i8,
    /// Sign of `(4p - 3)(q - 1)^2 q`.
    pub closed_form_sign: i8,
    pub signs_agree: bool,
}

/// Values within this of zero count as zero when comparing signs.
pub const SIGN_TOL: f64 = 1e-12;

pub fn sign(x: f64) -> i8 {
    if x > SIGN_TOL {
        1
    } else if x < -SIGN_TOL {
        -1
    } else {
        0
    }
}

/// Compares both expected values under independent and institutional
/// formation at every grid point.
pub fn run_compare(p_grid: &[f64], q_grid: &[f64]) -> Result<Vec<CompareRow>> {
    let w = trade_game();
    let mut rows = Vec::with_capacity(p_grid.len() * q_grid.len());
    for &p in p_grid {
        for &q in q_grid {
            let rho1 = trade_distribution(p, q, false)?;
            let rho2 = trade_distribution(p, q, true)?;
            let m1 = values::expected_myerson(&w, &rho1)?;
            let m2 = values::expected_myerson(&w, &rho2)?;
            let y1 = values::expected_position(&w, &rho1)?;
            let y2 = values::expected_position(&w, &rho2)?;
            let myerson_dominance = (0..3).all(|i| m1[i] <= m2[i] + SIGN_TOL);
            let position_gap = y1[SELLER] - y2[SELLER];
            let closed_form_sign = sign((4.0 * p - 3.0) * (q - 1.0).powi(2) * q);
            let position_gap_sign = sign(position_gap);
            rows.push(CompareRow {
                p,
                q,
                myerson_independent: m1,
                myerson_institutional: m2,
                position_independent: y1,
                position_institutional: y2,
                myerson_dominance,
                position_gap,
                position_gap_sign,
                closed_form_sign,
                signs_agree: position_gap_sign == closed_form_sign,
            });
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Text rendering

/// `x` rounded to 12 significant digits, printed in shortest form.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if rounded.abs() < 1e-4 || rounded.abs() >= 1e15 {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

pub fn fmt_alloc(a: &Allocation) -> String {
    let parts: Vec<String> = a.payoffs().iter().map(|&x| fmt_num(x)).collect();
    format!("({})", parts.join(", "))
}

fn fmt_links(links: &[[usize; 2]]) -> String {
    if links.is_empty() {
        return "{}".to_string();
    }
    let parts: Vec<String> = links.iter().map(|[i, j]| format!("{i}-{j}")).collect();
    format!("{{{}}}", parts.join(","))
}

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", padded.join(" | ").trim_end());
    };
    line(&mut out, header.to_vec());
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    let _ = writeln!(out, "{}", rule.join("-+-"));
    for row in rows {
        line(&mut out, row.iter().map(String::as_str).collect());
    }
    out
}

pub fn render_compute_table(report: &ResultReport) -> String {
    let rows: Vec<Vec<String>> = report
        .breakdown
        .iter()
        .map(|r| {
            vec![
                fmt_links(&r.network),
                fmt_num(r.value),
                fmt_num(r.probability),
                fmt_alloc(&r.myerson),
                fmt_alloc(&r.position),
            ]
        })
        .collect();
    let mut out = table(&["network", "v(g)", "P(g)", "Myerson", "Position"], &rows);
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "expected wealth          {}",
        fmt_num(report.expected_wealth)
    );
    let _ = writeln!(
        out,
        "Expected Myerson Value   {}",
        fmt_alloc(&report.expected_myerson)
    );
    let _ = writeln!(
        out,
        "Expected Position Value  {}",
        fmt_alloc(&report.expected_position)
    );
    for group in &report.axioms {
        let _ = writeln!(out);
        let _ = writeln!(out, "{}:", group.rule);
        for r in &group.reports {
            let _ = writeln!(out, "  {}", render_report(r));
        }
    }
    out
}

pub fn render_report(r: &AxiomReport) -> String {
    match &r.witness {
        None => format!("{:<28} pass", r.axiom.name()),
        Some(w) => format!(
            "{:<28} FAIL at {} (lhs {}, rhs {}, gap {})",
            r.axiom.name(),
            w.instance,
            fmt_num(w.lhs),
            fmt_num(w.rhs),
            fmt_num(w.gap)
        ),
    }
}

pub fn render_verify_table(report: &VerifyReport) -> String {
    let rows: Vec<Vec<String>> = report
        .entries
        .iter()
        .map(|e| {
            let outcome = match (&e.report.witness, e.expected_to_pass) {
                (None, _) => "pass".to_string(),
                (Some(w), true) => format!(
                    "FAIL (unexpected) at {}, gap {}",
                    w.instance,
                    fmt_num(w.gap)
                ),
                (Some(w), false) => format!("fail at {}, gap {}", w.instance, fmt_num(w.gap)),
            };
            vec![
                e.rule.name().to_string(),
                e.report.axiom.name().to_string(),
                if e.expected_to_pass { "yes" } else { "no" }.to_string(),
                outcome,
            ]
        })
        .collect();
    let mut out = table(&["rule", "axiom", "expected", "outcome"], &rows);
    if report.component_balance_skipped {
        let _ = writeln!(
            out,
            "component balance skipped: game is not component additive"
        );
    }
    out
}

pub fn render_compare_table(rows: &[CompareRow]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                fmt_num(r.p),
                fmt_num(r.q),
                fmt_alloc(&r.myerson_independent),
                fmt_alloc(&r.myerson_institutional),
                fmt_alloc(&r.position_independent),
                fmt_alloc(&r.position_institutional),
                if r.myerson_dominance { "yes" } else { "no" }.to_string(),
                format!("{:+}", r.position_gap_sign),
                format!("{:+}", r.closed_form_sign),
            ]
        })
        .collect();
    table(
        &[
            "p",
            "q",
            "Myerson indep.",
            "Myerson inst.",
            "Position indep.",
            "Position inst.",
            "M dom.",
            "P sign",
            "(4p-3)(q-1)^2q",
        ],
        &body,
    )
}
