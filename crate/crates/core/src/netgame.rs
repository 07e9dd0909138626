//! Network games `v: G^N -> R` and cooperative games `w: 2^N -> R`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::netcore::{Coalition, Link, Network, PlayerSet};
use crate::par;

/// Games over at most this many players are stored densely (`2^10` entries).
pub const DENSE_MAX_PLAYERS: usize = 5;
/// Largest link count for which every network of a player set is enumerated.
pub const ENUMERATION_MAX_LINKS: usize = 22;

#[derive(Clone, Debug, PartialEq)]
enum Values {
    Dense(Vec<f64>),
    Sparse(BTreeMap<u64, f64>),
}

/// A network game: a value for every network, zero on the empty network.
///
/// Networks without an explicit entry are worth 0.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkGame {
    players: PlayerSet,
    values: Values,
}

impl NetworkGame {
    pub fn zero(players: PlayerSet) -> Self {
        let values = if players.len() <= DENSE_MAX_PLAYERS {
            Values::Dense(vec![0.0; 1 << players.link_count()])
        } else {
            Values::Sparse(BTreeMap::new())
        };
        Self { players, values }
    }

    /// Builds a game from explicit `(network, value)` entries. Duplicates
    /// and a nonzero value on the empty network are rejected.
    pub fn from_entries<I>(players: PlayerSet, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Network, f64)>,
    {
        let mut game = Self::zero(players);
        let mut seen = std::collections::BTreeSet::new();
        for (g, value) in entries {
            check_players(players, g.players())?;
            if !value.is_finite() {
                return Err(Error::Parse(format!("non-finite value {value} for {g}")));
            }
            if !seen.insert(g.mask()) {
                return Err(Error::DuplicateNetwork(g));
            }
            if g.is_empty() {
                if value != 0.0 {
                    return Err(Error::NonzeroEmptyValue(value));
                }
                continue;
            }
            game.store(g.mask(), value);
        }
        Ok(game)
    }

    /// Tabulates `f` over every network. Only for small player sets.
    pub fn from_fn<F>(players: PlayerSet, f: F) -> Result<Self>
    where
        F: Fn(Network) -> f64,
    {
        check_enumerable(players)?;
        let mut game = Self::zero(players);
        for g in players.networks().skip(1) {
            game.store(g.mask(), f(g));
        }
        Ok(game)
    }

    fn store(&mut self, mask: u64, value: f64) {
        match &mut self.values {
            Values::Dense(table) => table[mask as usize] = value,
            Values::Sparse(map) => {
                if value == 0.0 {
                    map.remove(&mask);
                } else {
                    map.insert(mask, value);
                }
            }
        }
    }

    pub fn players(&self) -> PlayerSet {
        self.players
    }

    /// `v(g)` without the player-set check.
    #[inline]
    pub fn value(&self, g: Network) -> f64 {
        match &self.values {
            Values::Dense(table) => table[g.mask() as usize],
            Values::Sparse(map) => map.get(&g.mask()).copied().unwrap_or(0.0),
        }
    }

    pub fn evaluate(&self, g: Network) -> Result<f64> {
        check_players(self.players, g.players())?;
        Ok(self.value(g))
    }

    /// Networks with a nonzero value, in mask order.
    pub fn nonzero_entries(&self) -> Vec<(Network, f64)> {
        let to_network = |mask: u64| {
            self.players
                .network_from_mask(mask)
                .expect("stored masks are valid")
        };
        match &self.values {
            Values::Dense(table) => table
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(mask, v)| (to_network(mask as u64), *v))
                .collect(),
            Values::Sparse(map) => map.iter().map(|(&m, &v)| (to_network(m), v)).collect(),
        }
    }

    /// First network (in mask order) with `|v(g) - Σ_{h ∈ C(g)} v(h)| > tol`.
    pub fn component_additivity_witness(&self, tol: f64) -> Result<Option<Network>> {
        check_enumerable(self.players)?;
        let networks: Vec<Network> = self.players.networks().collect();
        Ok(par::find_first(&networks, |&g| {
            let split: f64 = g.components().into_iter().map(|h| self.value(h)).sum();
            ((self.value(g) - split).abs() > tol).then_some(g)
        }))
    }

    pub fn is_component_additive(&self, tol: f64) -> Result<bool> {
        Ok(self.component_additivity_witness(tol)?.is_none())
    }

    /// Errors with the witness unless the game is component additive.
    pub fn require_component_additive(&self, tol: f64) -> Result<()> {
        match self.component_additivity_witness(tol)? {
            None => Ok(()),
            Some(witness) => Err(Error::NotComponentAdditive { witness }),
        }
    }

    /// Marginal contribution of a new link, `v(g + ij) - v(g)`.
    pub fn delta_link(&self, g: Network, link: Link) -> Result<f64> {
        check_players(self.players, g.players())?;
        self.players.link_index(link)?;
        if g.contains(link) {
            return Err(Error::Precondition(format!("link {link} already in {g}")));
        }
        Ok(self.value(g.with_link(link)) - self.value(g))
    }

    /// Marginal contribution of a player, `v(g) - v(g - L_i(g))`.
    pub fn delta_player(&self, g: Network, i: usize) -> Result<f64> {
        check_players(self.players, g.players())?;
        self.players.check_player(i)?;
        let own = g.link_neighborhood(i);
        if own.is_empty() {
            return Err(Error::Precondition(format!(
                "player {i} is isolated in {g}"
            )));
        }
        Ok(self.value(g) - self.value(g.remove_links(own)))
    }
}

pub(crate) fn check_players(left: PlayerSet, right: PlayerSet) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::PlayerSetMismatch {
            left: left.len(),
            right: right.len(),
        })
    }
}

pub(crate) fn check_enumerable(players: PlayerSet) -> Result<()> {
    if players.link_count() > ENUMERATION_MAX_LINKS {
        return Err(Error::TooLarge {
            what: "complete network",
            size: players.link_count(),
            cap: ENUMERATION_MAX_LINKS,
        });
    }
    Ok(())
}

/// A transferable-utility cooperative game, stored densely by coalition bits.
#[derive(Clone, Debug, PartialEq)]
pub struct CoopGame {
    players: PlayerSet,
    worth: Vec<f64>,
}

impl CoopGame {
    /// Tabulates `f`; the empty coalition is always worth 0.
    pub fn from_fn<F>(players: PlayerSet, f: F) -> Self
    where
        F: Fn(Coalition) -> f64,
    {
        let mut worth = vec![0.0; 1 << players.len()];
        for s in players.grand_coalition().subsets().skip(1) {
            worth[s.bits() as usize] = f(s);
        }
        Self { players, worth }
    }

    /// Worth table indexed by coalition bits; `worth[0]` must be 0.
    pub fn from_table(players: PlayerSet, worth: Vec<f64>) -> Result<Self> {
        if worth.len() != 1 << players.len() {
            return Err(Error::Precondition(format!(
                "worth table has {} entries, expected {}",
                worth.len(),
                1usize << players.len()
            )));
        }
        if worth[0] != 0.0 {
            return Err(Error::Precondition(format!(
                "empty coalition worth {}",
                worth[0]
            )));
        }
        Ok(Self { players, worth })
    }

    pub fn players(&self) -> PlayerSet {
        self.players
    }

    #[inline]
    pub fn worth(&self, s: Coalition) -> f64 {
        self.worth[s.bits() as usize]
    }

    #[inline]
    pub(crate) fn worth_bits(&self, bits: u32) -> f64 {
        self.worth[bits as usize]
    }

    pub fn table(&self) -> &[f64] {
        &self.worth
    }
}
