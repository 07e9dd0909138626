//! Executable axiom checks for allocation rules, plus seeded random instance
//! generators for running them over a corpus.
//!
//! Each checker compares a left- and right-hand side for every instance the
//! axiom quantifies over (links, player pairs, components), in canonical
//! order, and reports the first pair whose gap exceeds the tolerance.

use std::fmt;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::error::Result;
use crate::netcore::{Link, Network, PlayerSet};
use crate::netgame::{CoopGame, NetworkGame};
use crate::netprob::{NetFormDist, Normalization};
use crate::par;
use crate::values::{self, shapley, standard_extension, Allocation, VariableGame};

/// Default tolerance for axiom checks.
pub const AXIOM_TOL: f64 = 1e-8;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Balance,
    ComponentBalance,
    EqualBargainingPower,
    BalancedContributions,
    BalancedLinkContributions,
    Efficiency,
    NullPlayer,
    Symmetry,
    Linearity,
}

impl Axiom {
    pub const VARIABLE: [Axiom; 5] = [
        Axiom::Balance,
        Axiom::ComponentBalance,
        Axiom::EqualBargainingPower,
        Axiom::BalancedContributions,
        Axiom::BalancedLinkContributions,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::Balance => "balance",
            Axiom::ComponentBalance => "component balance",
            Axiom::EqualBargainingPower => "equal bargaining power",
            Axiom::BalancedContributions => "balanced contributions",
            Axiom::BalancedLinkContributions => "balanced link contributions",
            Axiom::Efficiency => "efficiency",
            Axiom::NullPlayer => "null player",
            Axiom::Symmetry => "symmetry",
            Axiom::Linearity => "linearity",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub instance: String,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub passed: bool,
    pub witness: Option<Witness>,
    pub tolerance: f64,
}

impl AxiomReport {
    /// Report over `(instance, lhs, rhs)` comparisons; the first one off by
    /// more than `tol` becomes the witness.
    pub fn from_comparisons<I>(axiom: Axiom, tol: f64, comparisons: I) -> Self
    where
        I: IntoIterator<Item = (String, f64, f64)>,
    {
        let witness = comparisons.into_iter().find_map(|(instance, lhs, rhs)| {
            let gap = (lhs - rhs).abs();
            // NaN gaps count as violations.
            (gap.is_nan() || gap > tol).then_some(Witness {
                instance,
                lhs,
                rhs,
                gap,
            })
        });
        Self {
            axiom,
            passed: witness.is_none(),
            witness,
            tolerance: tol,
        }
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.witness {
            None => write!(f, "{}: pass (tol {:e})", self.axiom, self.tolerance),
            Some(w) => write!(
                f,
                "{}: FAIL at {} (lhs {}, rhs {}, gap {:e} > {:e})",
                self.axiom, w.instance, w.lhs, w.rhs, w.gap, self.tolerance
            ),
        }
    }
}

/// `Σ_i Ψ_i(v,ρ) = E(v,ρ)`.
pub fn check_balance<R>(
    rule: R,
    v: &NetworkGame,
    dist: &NetFormDist,
    tol: f64,
) -> Result<AxiomReport>
where
    R: Fn(&NetworkGame, &NetFormDist) -> Result<Allocation>,
{
    let psi = rule(v, dist)?;
    let wealth = values::expected_wealth(v, dist)?;
    Ok(AxiomReport::from_comparisons(
        Axiom::Balance,
        tol,
        [("total payoff".to_string(), psi.total(), wealth)],
    ))
}

/// For every component `h` of the extent,
/// `Σ_{i ∈ N(h)} Ψ_i(v,ρ) = Σ_g ρ(g) v(g ∩ h)`. Requires a component
/// additive game.
pub fn check_component_balance<R>(
    rule: R,
    v: &NetworkGame,
    dist: &NetFormDist,
    tol: f64,
) -> Result<AxiomReport>
where
    R: Fn(&NetworkGame, &NetFormDist) -> Result<Allocation>,
{
    v.require_component_additive(crate::DEFAULT_TOL)?;
    let psi = rule(v, dist)?;
    let entries = dist.entries();
    let comparisons = dist.extent().components().into_iter().map(|h| {
        let lhs = psi.total_over(h.covered_players());
        let terms: Vec<f64> = entries
            .iter()
            .map(|&(g, p)| p * v.value(g.intersection(h)))
            .collect();
        (format!("component {h}"), lhs, par::pairwise_sum(&terms))
    });
    Ok(AxiomReport::from_comparisons(
        Axiom::ComponentBalance,
        tol,
        comparisons.collect::<Vec<_>>(),
    ))
}

fn without_each_link<R>(
    rule: &R,
    v: &NetworkGame,
    dist: &NetFormDist,
    links: &[Link],
) -> Result<Vec<Allocation>>
where
    R: Fn(&NetworkGame, &NetFormDist) -> Result<Allocation> + Sync + Send,
{
    par::map_collect(links, |&l| rule(v, &dist.remove_link(l)))
        .into_iter()
        .collect()
}

/// For every link `ij` of the extent,
/// `Ψ_i(v,ρ) - Ψ_i(v,ρ^{-ij}) = Ψ_j(v,ρ) - Ψ_j(v,ρ^{-ij})`.
pub fn check_equal_bargaining_power<R>(
    rule: R,
    v: &NetworkGame,
    dist: &NetFormDist,
    tol: f64,
) -> Result<AxiomReport>
where
    R: Fn(&NetworkGame, &NetFormDist) -> Result<Allocation> + Sync + Send,
{
    let psi = rule(v, dist)?;
    let links: Vec<Link> = dist.extent().links().collect();
    let reduced = without_each_link(&rule, v, dist, &links)?;
    let comparisons = links.iter().zip(&reduced).map(|(&l, r)| {
        let (i, j) = l.endpoints();
        (format!("link {l}"), psi[i] - r[i], psi[j] - r[j])
    });
    Ok(AxiomReport::from_comparisons(
        Axiom::EqualBargainingPower,
        tol,
        comparisons.collect::<Vec<_>>(),
    ))
}

/// For all players `i < j`,
/// `Ψ_i(v,ρ) - Ψ_i(v,ρ^{-j}) = Ψ_j(v,ρ) - Ψ_j(v,ρ^{-i})`.
pub fn check_balanced_contributions<R>(
    rule: R,
    v: &NetworkGame,
    dist: &NetFormDist,
    tol: f64,
) -> Result<AxiomReport>
where
    R: Fn(&NetworkGame, &NetFormDist) -> Result<Allocation> + Sync + Send,
{
    let psi = rule(v, dist)?;
    let n = v.players().len();
    let without: Vec<Allocation> = par::map_range(n, |k| rule(v, &dist.remove_player(k)))
        .into_iter()
        .collect::<Result<_>>()?;
    let comparisons = pairs(n).map(|(i, j)| {
        (
            format!("players ({i}, {j})"),
            psi[i] - without[j][i],
            psi[j] - without[i][j],
        )
    });
    Ok(AxiomReport::from_comparisons(
        Axiom::BalancedContributions,
        tol,
        comparisons.collect::<Vec<_>>(),
    ))
}

/// For all players `i < j`,
/// `Σ_{jk ∈ L_j(g(ρ))} [Ψ_i(v,ρ) - Ψ_i(v,ρ^{-jk})]
///   = Σ_{ik ∈ L_i(g(ρ))} [Ψ_j(v,ρ) - Ψ_j(v,ρ^{-ik})]`.
pub fn check_balanced_link_contributions<R>(
    rule: R,
    v: &NetworkGame,
    dist: &NetFormDist,
    tol: f64,
) -> Result<AxiomReport>
where
    R: Fn(&NetworkGame, &NetFormDist) -> Result<Allocation> + Sync + Send,
{
    let psi = rule(v, dist)?;
    let extent = dist.extent();
    let links: Vec<Link> = extent.links().collect();
    let reduced = without_each_link(&rule, v, dist, &links)?;
    let effect_on = |player: usize, owner: usize| -> f64 {
        links
            .iter()
            .zip(&reduced)
            .filter(|(l, _)| l.touches(owner))
            .map(|(_, r)| psi[player] - r[player])
            .sum()
    };
    let comparisons = pairs(v.players().len()).map(|(i, j)| {
        (
            format!("players ({i}, {j})"),
            effect_on(i, j),
            effect_on(j, i),
        )
    });
    Ok(AxiomReport::from_comparisons(
        Axiom::BalancedLinkContributions,
        tol,
        comparisons.collect::<Vec<_>>(),
    ))
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

/// Runs all five variable-game checks. Component balance is only defined
/// for component additive games and is left out otherwise.
pub fn check_variable_axioms<R>(
    rule: R,
    v: &NetworkGame,
    dist: &NetFormDist,
    tol: f64,
) -> Result<Vec<AxiomReport>>
where
    R: Fn(&NetworkGame, &NetFormDist) -> Result<Allocation> + Sync + Send,
{
    let mut reports = vec![check_balance(&rule, v, dist, tol)?];
    if v.is_component_additive(crate::DEFAULT_TOL)? {
        reports.push(check_component_balance(&rule, v, dist, tol)?);
    }
    reports.push(check_equal_bargaining_power(&rule, v, dist, tol)?);
    reports.push(check_balanced_contributions(&rule, v, dist, tol)?);
    reports.push(check_balanced_link_contributions(&rule, v, dist, tol)?);
    Ok(reports)
}

/// Fixed-network versions of the axioms for a rule `Y`, checked at `(v, g)`.
///
/// These coincide with the variable-game checks of the extended rule at the
/// point mass on `g`: removing a link or a player from a point mass yields
/// the point mass on the edited network.
pub fn check_deterministic_axioms<Y>(
    rule: Y,
    v: &NetworkGame,
    g: Network,
    tol: f64,
) -> Result<Vec<AxiomReport>>
where
    Y: Fn(&NetworkGame, Network) -> Result<Allocation> + Sync + Send,
{
    let lifted = |v: &NetworkGame, dist: &NetFormDist| standard_extension(&rule, v, dist);
    check_variable_axioms(lifted, v, &NetFormDist::point_mass(g), tol)
}

/// The two rules this crate characterizes.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    ExpectedMyerson,
    ExpectedPosition,
}

impl Rule {
    pub const ALL: [Rule; 2] = [Rule::ExpectedMyerson, Rule::ExpectedPosition];

    pub fn apply(self, v: &NetworkGame, dist: &NetFormDist) -> Result<Allocation> {
        match self {
            Rule::ExpectedMyerson => values::expected_myerson(v, dist),
            Rule::ExpectedPosition => values::expected_position(v, dist),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Rule::ExpectedMyerson => "Expected Myerson Value",
            Rule::ExpectedPosition => "Expected Position Value",
        }
    }

    /// Whether the rule satisfies `axiom` on every component additive game.
    pub fn satisfies(self, axiom: Axiom) -> bool {
        use Axiom::*;
        match self {
            Rule::ExpectedMyerson => matches!(
                axiom,
                Balance | ComponentBalance | EqualBargainingPower | BalancedContributions
            ),
            Rule::ExpectedPosition => {
                matches!(
                    axiom,
                    Balance | ComponentBalance | BalancedLinkContributions
                )
            }
        }
    }

    pub fn check(self, v: &NetworkGame, dist: &NetFormDist, tol: f64) -> Result<Vec<AxiomReport>> {
        check_variable_axioms(
            |v: &NetworkGame, d: &NetFormDist| self.apply(v, d),
            v,
            dist,
            tol,
        )
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

// ---------------------------------------------------------------------------
// Random instances

/// Deterministic generator for instance `index` of the corpus seeded by
/// `seed`; each index gets its own ChaCha stream.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Random cooperative game with worths uniform in `[-1, 1]`.
pub fn random_coop_game<G: Rng>(rng: &mut G, players: PlayerSet) -> CoopGame {
    let table = (0..1usize << players.len())
        .map(|bits| {
            if bits == 0 {
                0.0
            } else {
                rng.random_range(-1.0..=1.0)
            }
        })
        .collect();
    CoopGame::from_table(players, table).expect("table sized for player set")
}

/// Random component additive game: each connected network gets an
/// independent value (zero about half the time) and every network is worth
/// the sum over its components.
pub fn random_component_additive_game<G: Rng>(
    rng: &mut G,
    players: PlayerSet,
) -> Result<NetworkGame> {
    let mut unit = std::collections::HashMap::new();
    for g in players.networks().filter(|g| g.is_connected()) {
        let value = if rng.random_bool(0.5) {
            rng.random_range(-1.0..=2.0)
        } else {
            0.0
        };
        unit.insert(g.mask(), value);
    }
    NetworkGame::from_fn(players, |g| {
        g.components().iter().map(|h| unit[&h.mask()]).sum()
    })
}

/// Random sparse distribution with between 1 and `max_support` formable
/// networks and exponential (flat Dirichlet) weights. Half of the draws keep
/// every network inside a random two-block split of the players so the
/// extent has several components.
pub fn random_distribution<G: Rng>(
    rng: &mut G,
    players: PlayerSet,
    max_support: usize,
) -> Result<NetFormDist> {
    let n = players.len();
    let allowed = if n >= 4 && rng.random_bool(0.5) {
        let block: u32 = loop {
            let bits = rng.random_range(1..(1u32 << n) - 1);
            if bits.count_ones() >= 2 && (n as u32 - bits.count_ones()) >= 2 {
                break bits;
            }
        };
        let left = players.coalition_from_bits(block)?;
        players
            .complete_network()
            .restrict_to(left)
            .union(players.complete_network().restrict_to(left.complement()))
    } else {
        players.complete_network()
    };
    let candidates: Vec<Network> = allowed.subnetworks().collect();
    let k = rng.random_range(1..=max_support.min(candidates.len()).max(1));
    let chosen = sample(rng, candidates.len(), k);
    let weights: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1) + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    NetFormDist::from_entries(
        players,
        chosen
            .iter()
            .zip(&weights)
            .map(|(c, w)| (candidates[c], w / total)),
        Normalization::Renormalize,
    )
}

/// One corpus instance: `2..=max_players` players, a component additive
/// game and a sparse distribution.
pub fn random_instance(
    seed: u64,
    index: u64,
    max_players: usize,
    max_support: usize,
) -> Result<VariableGame> {
    let mut rng = instance_rng(seed, index);
    let n = rng.random_range(2..=max_players.max(2));
    let players = PlayerSet::new(n)?;
    let game = random_component_additive_game(&mut rng, players)?;
    let dist = random_distribution(&mut rng, players, max_support)?;
    VariableGame::new(game, dist)
}

pub fn generate_corpus(
    seed: u64,
    count: usize,
    max_players: usize,
    max_support: usize,
) -> Result<Vec<VariableGame>> {
    par::map_range(count, |k| {
        random_instance(seed, k as u64, max_players, max_support)
    })
    .into_iter()
    .collect()
}

/// Outcome of one (rule, axiom) pair over a corpus.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteLine {
    pub rule: Rule,
    pub axiom: Axiom,
    pub expected_to_pass: bool,
    pub checked: usize,
    pub failures: usize,
    /// First failing instance index with its witness.
    pub first_failure: Option<(usize, Witness)>,
}

impl SuiteLine {
    /// True when the observed outcome agrees with the theory: no failures
    /// for axioms the rule satisfies. Axioms the rule is not expected to
    /// satisfy are informational.
    pub fn as_expected(&self) -> bool {
        !self.expected_to_pass || self.failures == 0
    }
}

/// Checks both rules against all five axioms on every instance.
pub fn run_suite(corpus: &[VariableGame], tol: f64) -> Result<Vec<SuiteLine>> {
    let per_instance: Vec<Vec<(Rule, Vec<AxiomReport>)>> = par::map_collect(corpus, |inst| {
        Rule::ALL
            .iter()
            .map(|&rule| Ok((rule, rule.check(&inst.game, &inst.dist, tol)?)))
            .collect::<Result<Vec<_>>>()
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let mut lines = Vec::new();
    for rule in Rule::ALL {
        for axiom in Axiom::VARIABLE {
            let mut line = SuiteLine {
                rule,
                axiom,
                expected_to_pass: rule.satisfies(axiom),
                checked: 0,
                failures: 0,
                first_failure: None,
            };
            for (idx, results) in per_instance.iter().enumerate() {
                let reports = &results
                    .iter()
                    .find(|(r, _)| *r == rule)
                    .expect("rule present")
                    .1;
                if let Some(report) = reports.iter().find(|r| r.axiom == axiom) {
                    line.checked += 1;
                    if !report.passed {
                        line.failures += 1;
                        if line.first_failure.is_none() {
                            line.first_failure = Some((
                                idx,
                                report.witness.clone().expect("failed report has witness"),
                            ));
                        }
                    }
                }
            }
            lines.push(line);
        }
    }
    Ok(lines)
}

// ---------------------------------------------------------------------------
// Shapley value properties

fn linear_combination(a: &CoopGame, alpha: f64, b: &CoopGame, beta: f64) -> CoopGame {
    let table = a
        .table()
        .iter()
        .zip(b.table())
        .map(|(x, y)| alpha * x + beta * y)
        .collect();
    CoopGame::from_table(a.players(), table).expect("same player set")
}

/// Randomized check of efficiency, null player, symmetry and linearity of
/// the Shapley value on `games` random games with up to six players.
pub fn check_shapley_axioms(tol: f64, seed: u64, games: usize) -> Vec<AxiomReport> {
    let mut efficiency = Vec::new();
    let mut null = Vec::new();
    let mut symmetry = Vec::new();
    let mut linearity = Vec::new();

    for k in 0..games {
        let mut rng = instance_rng(seed, k as u64);
        let n = rng.random_range(1..=6);
        let players = PlayerSet::new(n).expect("n <= 6");
        let omega = random_coop_game(&mut rng, players);
        let phi = shapley(&omega);
        let grand = players.grand_coalition();
        efficiency.push((
            format!("game {k} ({n} players)"),
            phi.total(),
            omega.worth(grand),
        ));

        // Player `dummy` never changes any worth.
        let dummy = rng.random_range(0..n);
        let with_null = CoopGame::from_fn(players, |s| omega.worth(s.without(dummy)));
        null.push((
            format!("game {k}, player {dummy}"),
            shapley(&with_null)[dummy],
            0.0,
        ));

        if n >= 2 {
            let a = rng.random_range(0..n);
            let b = (a + rng.random_range(1..n)) % n;
            let swap = |bits: u32| {
                let (ha, hb) = (bits >> a & 1, bits >> b & 1);
                (bits & !(1 << a) & !(1 << b)) | (hb << a) | (ha << b)
            };
            let symmetric = CoopGame::from_fn(players, |s| {
                0.5 * (omega.worth(s) + omega.worth_bits(swap(s.bits())))
            });
            let phi_sym = shapley(&symmetric);
            symmetry.push((
                format!("game {k}, players ({a}, {b})"),
                phi_sym[a],
                phi_sym[b],
            ));
        }

        let other = random_coop_game(&mut rng, players);
        let (alpha, beta) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let combined = shapley(&linear_combination(&omega, alpha, &other, beta));
        let phi_other = shapley(&other);
        for i in 0..n {
            linearity.push((
                format!("game {k}, player {i}, alpha {alpha:.3}, beta {beta:.3}"),
                combined[i],
                alpha * phi[i] + beta * phi_other[i],
            ));
        }
        let doubled = shapley(&linear_combination(&omega, 2.0, &omega, 0.0));
        for i in 0..n {
            linearity.push((
                format!("game {k}, player {i}, doubled"),
                doubled[i],
                2.0 * phi[i],
            ));
        }
    }

    vec![
        AxiomReport::from_comparisons(Axiom::Efficiency, tol, efficiency),
        AxiomReport::from_comparisons(Axiom::NullPlayer, tol, null),
        AxiomReport::from_comparisons(Axiom::Symmetry, tol, symmetry),
        AxiomReport::from_comparisons(Axiom::Linearity, tol, linearity),
    ]
}
