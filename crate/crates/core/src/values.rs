//! Allocation rules: the Shapley value, the Myerson and Position values on
//! fixed networks, and their expectations under a formation distribution.

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netcore::{Coalition, Link, Network, PlayerSet};
use crate::netgame::{check_players, CoopGame, NetworkGame, ENUMERATION_MAX_LINKS};
use crate::netprob::NetFormDist;
use crate::par;

/// Payoffs below this magnitude on isolated players are treated as rounding.
pub const ISOLATED_PAYOFF_TOL: f64 = 1e-12;

/// `k!` for `k <= 22`; all exact in `f64`.
const FACTORIALS: [f64; ENUMERATION_MAX_LINKS + 1] = {
    let mut table = [1.0; ENUMERATION_MAX_LINKS + 1];
    let mut k = 1;
    while k <= ENUMERATION_MAX_LINKS {
        table[k] = table[k - 1] * k as f64;
        k += 1;
    }
    table
};

/// Shapley weight `s! (total - s - 1)! / total!` of a coalition of size `s`
/// joined by one more member out of `total`.
#[inline]
pub fn shapley_weight(s: usize, total: usize) -> f64 {
    debug_assert!(s < total && total <= ENUMERATION_MAX_LINKS);
    FACTORIALS[s] * FACTORIALS[total - s - 1] / FACTORIALS[total]
}

/// Payoff vector indexed by player.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation(Vec<f64>);

impl Allocation {
    pub fn zero(players: PlayerSet) -> Self {
        Self(vec![0.0; players.len()])
    }

    pub fn from_vec(payoffs: Vec<f64>) -> Self {
        Self(payoffs)
    }

    pub fn payoffs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Sum of payoffs over the members of a coalition.
    pub fn total_over(&self, coalition: Coalition) -> f64 {
        coalition.members().map(|i| self.0[i]).sum()
    }

    /// Largest coordinate-wise absolute difference.
    pub fn max_abs_diff(&self, other: &Allocation) -> f64 {
        assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for Allocation {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, x) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")
    }
}

/// A network game together with a formation distribution on the same players.
#[derive(Clone, Debug, PartialEq)]
pub struct VariableGame {
    pub game: NetworkGame,
    pub dist: NetFormDist,
}

impl VariableGame {
    pub fn new(game: NetworkGame, dist: NetFormDist) -> Result<Self> {
        check_players(game.players(), dist.players())?;
        Ok(Self { game, dist })
    }

    pub fn players(&self) -> PlayerSet {
        self.game.players()
    }
}

/// The Shapley value:
/// `φ_i(ω) = Σ_{S ⊆ N-i} #S!(n-#S-1)!/n! · (ω(S+i) - ω(S))`.
pub fn shapley(game: &CoopGame) -> Allocation {
    let players = game.players();
    let n = players.len();
    let all = players.grand_coalition();
    Allocation(par::map_range(n, |i| {
        let mut phi = 0.0;
        for s in all.without(i).subsets() {
            let marginal = game.worth_bits(s.bits() | (1 << i)) - game.worth(s);
            phi += shapley_weight(s.len(), n) * marginal;
        }
        phi
    }))
}

/// The Myerson value on a fixed network, computed over restrictions `g|S`.
pub fn myerson(v: &NetworkGame, g: Network) -> Result<Allocation> {
    check_players(v.players(), g.players())?;
    let players = v.players();
    let n = players.len();
    let all = players.grand_coalition();
    let isolated = g.isolated_players();
    Ok(Allocation(par::map_range(n, |i| {
        if isolated.contains(i) {
            return 0.0;
        }
        let mut payoff = 0.0;
        for s in all.without(i).subsets() {
            let marginal = v.value(g.restrict_to(s.with(i))) - v.value(g.restrict_to(s));
            payoff += shapley_weight(s.len(), n) * marginal;
        }
        payoff
    })))
}

/// The Position value on a fixed network: each link's Shapley value in the
/// game played by the links of `g`, split equally between its endpoints.
pub fn position(v: &NetworkGame, g: Network) -> Result<Allocation> {
    check_players(v.players(), g.players())?;
    let size = g.len();
    if size > ENUMERATION_MAX_LINKS {
        return Err(Error::TooLarge {
            what: "network",
            size,
            cap: ENUMERATION_MAX_LINKS,
        });
    }
    let links: Vec<Link> = g.links().collect();
    let link_values = par::map_collect(&links, |&link| {
        let mut phi = 0.0;
        for h in g.without_link(link).subnetworks() {
            let marginal = v.value(h.with_link(link)) - v.value(h);
            phi += shapley_weight(h.len(), size) * marginal;
        }
        phi
    });
    let mut payoffs = vec![0.0; v.players().len()];
    for (link, phi) in links.iter().zip(link_values) {
        payoffs[link.i()] += 0.5 * phi;
        payoffs[link.j()] += 0.5 * phi;
    }
    Ok(Allocation(payoffs))
}

/// Expected wealth `Σ_g ρ(g) v(g)`.
pub fn expected_wealth(v: &NetworkGame, dist: &NetFormDist) -> Result<f64> {
    check_players(v.players(), dist.players())?;
    let terms: Vec<f64> = dist
        .entries()
        .iter()
        .map(|&(g, p)| p * v.value(g))
        .collect();
    Ok(par::pairwise_sum(&terms))
}

/// Expected wealth split over the components of the extent. For each
/// component `h`, sums `ρ_h(h') v(h')` over the restriction of `ρ` to `h`.
pub fn expected_wealth_by_components(
    v: &NetworkGame,
    dist: &NetFormDist,
) -> Result<Vec<(Network, f64)>> {
    check_players(v.players(), dist.players())?;
    v.require_component_additive(crate::DEFAULT_TOL)?;
    Ok(dist
        .extent()
        .components()
        .into_iter()
        .map(|h| {
            let restricted = dist.restrict(h);
            let terms: Vec<f64> = restricted
                .entries()
                .iter()
                .map(|&(g, p)| p * v.value(g))
                .collect();
            (h, par::pairwise_sum(&terms))
        })
        .collect())
}

/// Expected marginal contribution of a link, `Σ_{g ∌ ij} ρ(g+ij) Δ_ij(v,g)`.
/// Removing the link from `ρ` lowers expected wealth by exactly this amount.
pub fn expected_marginal_link(v: &NetworkGame, dist: &NetFormDist, link: Link) -> Result<f64> {
    check_players(v.players(), dist.players())?;
    v.players().link_index(link)?;
    let terms: Vec<f64> = dist
        .entries()
        .iter()
        .filter(|(g, _)| g.contains(link))
        .map(|&(g, p)| p * (v.value(g) - v.value(g.without_link(link))))
        .collect();
    Ok(par::pairwise_sum(&terms))
}

/// Expected marginal contribution of a player, `Σ_{g: i ∈ N(g)} ρ(g) Δ_i(v,g)`.
pub fn expected_marginal_player(v: &NetworkGame, dist: &NetFormDist, i: usize) -> Result<f64> {
    check_players(v.players(), dist.players())?;
    v.players().check_player(i)?;
    let terms: Vec<f64> = dist
        .entries()
        .iter()
        .filter(|(g, _)| g.degree(i) > 0)
        .map(|&(g, p)| p * (v.value(g) - v.value(g.remove_links(g.link_neighborhood(i)))))
        .collect();
    Ok(par::pairwise_sum(&terms))
}

/// Extends a fixed-network rule to variable games: `Σ_g ρ(g) Y(v,g)` over
/// the support of `ρ`.
///
/// The rule must pay isolated players nothing. A payoff above
/// [`ISOLATED_PAYOFF_TOL`] on a player isolated in some formable network is
/// an error; smaller residue is cleared.
pub fn standard_extension<R>(rule: R, v: &NetworkGame, dist: &NetFormDist) -> Result<Allocation>
where
    R: Fn(&NetworkGame, Network) -> Result<Allocation> + Sync + Send,
{
    check_players(v.players(), dist.players())?;
    let n = v.players().len();
    let entries = dist.entries();
    let per_network = par::map_collect(&entries, |&(g, _)| -> Result<Allocation> {
        let mut y = rule(v, g)?;
        if y.len() != n {
            return Err(Error::Precondition(format!(
                "rule returned {} payoffs for {n} players",
                y.len()
            )));
        }
        for i in g.isolated_players().members() {
            if y.0[i].abs() > ISOLATED_PAYOFF_TOL {
                return Err(Error::IsolatedPayoff {
                    player: i,
                    network: g,
                    payoff: y.0[i],
                });
            }
            y.0[i] = 0.0;
        }
        Ok(y)
    });
    let per_network = per_network.into_iter().collect::<Result<Vec<_>>>()?;
    let payoffs = (0..n)
        .map(|i| {
            let terms: Vec<f64> = entries
                .iter()
                .zip(&per_network)
                .map(|(&(_, p), y)| p * y.0[i])
                .collect();
            par::pairwise_sum(&terms)
        })
        .collect();
    Ok(Allocation(payoffs))
}

/// The Expected Myerson Value.
pub fn expected_myerson(v: &NetworkGame, dist: &NetFormDist) -> Result<Allocation> {
    standard_extension(myerson, v, dist)
}

/// The Expected Position Value.
pub fn expected_position(v: &NetworkGame, dist: &NetFormDist) -> Result<Allocation> {
    standard_extension(position, v, dist)
}

/// The cooperative game `ω(S) = Σ_g ρ(g) v(g|S)`. Its Shapley value is the
/// Expected Myerson Value.
pub fn omega_of(v: &NetworkGame, dist: &NetFormDist) -> Result<CoopGame> {
    check_players(v.players(), dist.players())?;
    let players = v.players();
    let entries = dist.entries();
    let table = par::map_range(1 << players.len(), |bits| {
        let s = players
            .coalition_from_bits(bits as u32)
            .expect("bits within player set");
        let terms: Vec<f64> = entries
            .iter()
            .map(|&(g, p)| p * v.value(g.restrict_to(s)))
            .collect();
        par::pairwise_sum(&terms)
    });
    CoopGame::from_table(players, table)
}

/// The coalition game `S ↦ v(g|S)` on a fixed network.
pub fn restriction_game(v: &NetworkGame, g: Network) -> CoopGame {
    CoopGame::from_fn(v.players(), |s| v.value(g.restrict_to(s)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{trade_distribution, trade_game};

    const TOL: f64 = 1e-12;

    fn close(a: &Allocation, b: &[f64]) -> bool {
        a.max_abs_diff(&Allocation::from_vec(b.to_vec())) < TOL
    }

    fn net(links: &[(usize, usize)]) -> Network {
        PlayerSet::new(3).unwrap().network(links).unwrap()
    }

    #[test]
    fn weights_sum_to_one_per_size() {
        // Σ_s C(total-1, s) · weight(s) = 1
        for total in 1..=ENUMERATION_MAX_LINKS {
            let mut sum = 0.0;
            let mut binom = 1.0;
            for s in 0..total {
                sum += binom * shapley_weight(s, total);
                binom = binom * (total - 1 - s) as f64 / (s + 1) as f64;
            }
            assert!((sum - 1.0).abs() < 1e-12, "total {total}: {sum}");
        }
        assert_eq!(FACTORIALS[22], 1_124_000_727_777_607_680_000.0);
    }

    #[test]
    fn shapley_unanimity_two_players() {
        let n = PlayerSet::new(2).unwrap();
        let game = CoopGame::from_fn(n, |s| if s.len() == 2 { 1.0 } else { 0.0 });
        assert!(close(&shapley(&game), &[0.5, 0.5]));
    }

    #[test]
    fn shapley_of_trade_restriction_game() {
        let w = trade_game();
        let game = restriction_game(&w, net(&[(0, 2), (1, 2)]));
        let third = 1.0 / 3.0;
        assert!(close(&shapley(&game), &[third, third, third]));
    }

    #[test]
    fn myerson_examples() {
        let w = trade_game();
        assert!(close(
            &myerson(&w, net(&[(0, 1)])).unwrap(),
            &[0.5, 0.5, 0.0]
        ));
        assert!(close(
            &myerson(&w, net(&[(0, 1), (0, 2), (1, 2)])).unwrap(),
            &[0.5, 0.5, 0.0]
        ));
        assert_eq!(
            myerson(&w, net(&[])).unwrap(),
            Allocation::from_vec(vec![0.0; 3])
        );
    }

    #[test]
    fn position_examples() {
        let w = trade_game();
        assert!(close(
            &position(&w, net(&[(0, 2), (1, 2)])).unwrap(),
            &[0.25, 0.25, 0.5]
        ));
        let full = position(&w, net(&[(0, 1), (0, 2), (1, 2)])).unwrap();
        assert!(close(&full, &[5.0 / 12.0, 5.0 / 12.0, 1.0 / 6.0]));
        assert_eq!(
            position(&w, net(&[])).unwrap(),
            Allocation::from_vec(vec![0.0; 3])
        );
    }

    #[test]
    fn position_size_cap() {
        let players = PlayerSet::new(8).unwrap();
        let v = NetworkGame::zero(players);
        assert!(matches!(
            position(&v, players.complete_network()),
            Err(Error::TooLarge { size: 28, .. })
        ));
    }

    #[test]
    fn expected_wealth_examples() {
        let w = trade_game();
        for &(p, q) in &[(0.3, 0.6), (0.9, 0.1)] {
            let rho1 = trade_distribution(p, q, false).unwrap();
            let rho2 = trade_distribution(p, q, true).unwrap();
            assert!((expected_wealth(&w, &rho1).unwrap() - (p + (1.0 - p) * q * q)).abs() < TOL);
            let e2 = (q + 2.0 * p * (1.0 - q)) / (2.0 - q);
            assert!((expected_wealth(&w, &rho2).unwrap() - e2).abs() < TOL);
        }
        let rho0 = NetFormDist::empty(w.players());
        assert_eq!(expected_wealth(&w, &rho0).unwrap(), 0.0);
    }

    #[test]
    fn wealth_by_components() {
        let (p, q) = (0.3, 0.6);
        let w = trade_game();
        let rho1 = trade_distribution(p, q, false).unwrap();
        let split = expected_wealth_by_components(&w, &rho1).unwrap();
        assert_eq!(split.len(), 1);
        assert_eq!(split[0].0, w.players().complete_network());
        assert!((split[0].1 - (p + (1.0 - p) * q * q)).abs() < TOL);

        let four = PlayerSet::new(4).unwrap();
        let a = four.network(&[(0, 1)]).unwrap();
        let b = four.network(&[(2, 3)]).unwrap();
        let v = NetworkGame::from_entries(four, [(a, 2.0), (b, 3.0), (a.union(b), 5.0)]).unwrap();
        let split =
            expected_wealth_by_components(&v, &NetFormDist::point_mass(a.union(b))).unwrap();
        assert_eq!(split, vec![(a, 2.0), (b, 3.0)]);

        let zero = NetworkGame::zero(four);
        let split =
            expected_wealth_by_components(&zero, &NetFormDist::point_mass(a.union(b))).unwrap();
        assert!(split.iter().all(|&(_, x)| x == 0.0));

        let bad = NetworkGame::from_entries(four, [(a, 1.0), (b, 1.0), (a.union(b), 5.0)]).unwrap();
        assert!(matches!(
            expected_wealth_by_components(&bad, &NetFormDist::point_mass(a)),
            Err(Error::NotComponentAdditive { .. })
        ));
    }

    #[test]
    fn expected_marginals_match_removal() {
        let w = trade_game();
        let rho1 = trade_distribution(0.3, 0.6, false).unwrap();
        let e = expected_wealth(&w, &rho1).unwrap();
        let sb = w.players().link(0, 1).unwrap();
        let lhs = expected_marginal_link(&w, &rho1, sb).unwrap();
        let rhs = e - expected_wealth(&w, &rho1.remove_link(sb)).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
        let lhs = expected_marginal_player(&w, &rho1, 2).unwrap();
        let rhs = e - expected_wealth(&w, &rho1.remove_player(2)).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn null_link_and_player_contribute_nothing() {
        // Player 3 and its links never change the trade value.
        let four = PlayerSet::new(4).unwrap();
        let w3 = trade_game();
        let v = NetworkGame::from_fn(four, |g| {
            let inner = g.restrict_to(four.coalition(&[0, 1, 2]).unwrap());
            let links: Vec<(usize, usize)> = inner.links().map(|l| l.endpoints()).collect();
            w3.value(w3.players().network(&links).unwrap())
        })
        .unwrap();
        let dist =
            NetFormDist::from_independent_links(four, four.links().map(|l| (l, 0.5))).unwrap();
        assert_eq!(expected_marginal_player(&v, &dist, 3).unwrap(), 0.0);
        assert_eq!(
            expected_marginal_link(&v, &dist, four.link(2, 3).unwrap()).unwrap(),
            0.0
        );
    }

    #[test]
    fn extension_of_point_mass_is_the_rule() {
        let w = trade_game();
        let g = net(&[(0, 1), (1, 2)]);
        let point = NetFormDist::point_mass(g);
        assert_eq!(
            expected_position(&w, &point).unwrap(),
            position(&w, g).unwrap()
        );
        assert_eq!(
            expected_myerson(&w, &point).unwrap(),
            myerson(&w, g).unwrap()
        );
    }

    #[test]
    fn extension_rejects_payoffs_to_isolated_players() {
        let w = trade_game();
        let rho1 = trade_distribution(0.3, 0.6, false).unwrap();
        let everyone_gets_one =
            |v: &NetworkGame, _g: Network| Ok(Allocation::from_vec(vec![1.0; v.players().len()]));
        assert!(matches!(
            standard_extension(everyone_gets_one, &w, &rho1),
            Err(Error::IsolatedPayoff { .. })
        ));
    }

    #[test]
    fn expected_values_of_trade_example() {
        let w = trade_game();
        let (p, q) = (0.3, 0.6);
        let rho1 = trade_distribution(p, q, false).unwrap();
        let m = expected_myerson(&w, &rho1).unwrap();
        let shared = (1.0 - p) * q * q / 3.0;
        assert!(close(&m, &[0.5 * p + shared, 0.5 * p + shared, shared]));
        let pos = expected_position(&w, &rho1).unwrap();
        let sb = 0.5 * p + 0.25 * q * q - p * q * q / 3.0;
        assert!(close(&pos, &[sb, sb, (0.5 - p / 3.0) * q * q]));
        let rho0 = NetFormDist::empty(w.players());
        assert_eq!(expected_myerson(&w, &rho0).unwrap().total(), 0.0);
        assert_eq!(expected_position(&w, &rho0).unwrap().total(), 0.0);
    }

    #[test]
    fn omega_examples() {
        let w = trade_game();
        let (p, q) = (0.3, 0.6);
        let rho1 = trade_distribution(p, q, false).unwrap();
        let omega = omega_of(&w, &rho1).unwrap();
        let players = w.players();
        assert_eq!(omega.worth(players.empty_coalition()), 0.0);
        assert!((omega.worth(players.coalition(&[0, 1]).unwrap()) - p).abs() < TOL);
        assert!((omega.worth(players.grand_coalition()) - (p + (1.0 - p) * q * q)).abs() < TOL);

        let g = net(&[(0, 2), (1, 2)]);
        assert_eq!(
            omega_of(&w, &NetFormDist::point_mass(g)).unwrap(),
            restriction_game(&w, g)
        );
    }
}
