//! Network formation probability distributions and their restrictions.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::netcore::{Coalition, Link, Network, PlayerSet};
use crate::netgame::{check_players, ENUMERATION_MAX_LINKS};

/// Stored probabilities below this are dropped after arithmetic.
pub const PRUNE_BELOW: f64 = 1e-15;
/// Allowed deviation of the total mass from 1.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// What to do with input mass that does not sum to 1.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
pub enum Normalization {
    #[default]
    Reject,
    Renormalize,
}

/// A probability distribution over the networks of a player set, stored
/// sparsely by link mask.
#[derive(Clone, Debug, PartialEq)]
pub struct NetFormDist {
    players: PlayerSet,
    probs: BTreeMap<u64, f64>,
}

impl NetFormDist {
    /// Point mass on `g`.
    pub fn point_mass(g: Network) -> Self {
        Self {
            players: g.players(),
            probs: BTreeMap::from([(g.mask(), 1.0)]),
        }
    }

    /// Point mass on the empty network.
    pub fn empty(players: PlayerSet) -> Self {
        Self::point_mass(players.empty_network())
    }

    pub fn from_entries<I>(players: PlayerSet, entries: I, mode: Normalization) -> Result<Self>
    where
        I: IntoIterator<Item = (Network, f64)>,
    {
        let mut probs = BTreeMap::new();
        for (g, p) in entries {
            check_players(players, g.players())?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidProbability { value: p });
            }
            if probs.insert(g.mask(), p).is_some() {
                return Err(Error::DuplicateNetwork(g));
            }
        }
        let sum: f64 = probs.values().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            match mode {
                Normalization::Reject => return Err(Error::NotNormalized { sum }),
                Normalization::Renormalize if sum > 0.0 => {
                    probs.values_mut().for_each(|p| *p /= sum);
                }
                Normalization::Renormalize => return Err(Error::NotNormalized { sum }),
            }
        }
        Ok(Self::from_raw(players, probs))
    }

    fn from_raw(players: PlayerSet, mut probs: BTreeMap<u64, f64>) -> Self {
        probs.retain(|_, p| *p >= PRUNE_BELOW);
        Self { players, probs }
    }

    /// Independent link formation: `P(g) = Π_{ij∈g} p_ij · Π_{ij∉g} (1 - p_ij)`.
    /// Links absent from `link_probs` never form.
    pub fn from_independent_links<I>(players: PlayerSet, link_probs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Link, f64)>,
    {
        let mut per_slot = vec![0.0; players.link_count()];
        let mut given = vec![false; players.link_count()];
        for (link, p) in link_probs {
            let slot = players.link_index(link)?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidProbability { value: p });
            }
            if std::mem::replace(&mut given[slot], true) {
                return Err(Error::Precondition(format!(
                    "probability for link {link} given twice"
                )));
            }
            per_slot[slot] = p;
        }
        // Links with p = 1 are always present, p = 0 never; only the rest vary.
        let certain: u64 = per_slot
            .iter()
            .enumerate()
            .filter(|(_, &p)| p == 1.0)
            .fold(0, |m, (s, _)| m | (1 << s));
        let uncertain: u64 = per_slot
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0 && p < 1.0)
            .fold(0, |m, (s, _)| m | (1 << s));
        let free = uncertain.count_ones() as usize;
        if free > ENUMERATION_MAX_LINKS {
            return Err(Error::TooLarge {
                what: "uncertain link set",
                size: free,
                cap: ENUMERATION_MAX_LINKS,
            });
        }
        let uncertain_net = players.network_from_mask(uncertain)?;
        let mut probs = BTreeMap::new();
        for present in uncertain_net.subnetworks() {
            let mut p = 1.0;
            for link in uncertain_net.links() {
                let q = per_slot[players.link_index(link)?];
                p *= if present.contains(link) { q } else { 1.0 - q };
            }
            probs.insert(present.mask() | certain, p);
        }
        Ok(Self::from_raw(players, probs))
    }

    pub fn players(&self) -> PlayerSet {
        self.players
    }

    fn network(&self, mask: u64) -> Network {
        self.players
            .network_from_mask(mask)
            .expect("stored masks are valid")
    }

    /// `ρ(g)`; zero off the support.
    pub fn prob(&self, g: Network) -> f64 {
        self.probs.get(&g.mask()).copied().unwrap_or(0.0)
    }

    /// Support entries in mask order.
    pub fn entries(&self) -> Vec<(Network, f64)> {
        self.probs
            .iter()
            .map(|(&m, &p)| (self.network(m), p))
            .collect()
    }

    /// Formable networks: those with strictly positive stored probability.
    pub fn support(&self) -> Vec<Network> {
        self.probs.keys().map(|&m| self.network(m)).collect()
    }

    pub fn support_len(&self) -> usize {
        self.probs.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Union of all formable networks.
    pub fn extent(&self) -> Network {
        self.network(self.probs.keys().fold(0, |acc, m| acc | m))
    }

    /// Players incident to no link of the extent.
    pub fn isolated_players(&self) -> Coalition {
        self.extent().isolated_players()
    }

    /// Restriction to `g`: every network moves its mass to its intersection
    /// with `g`. Equivalent to summing `ρ(h ∪ h')` over `h' ⊆ g_N \ g`.
    pub fn restrict(&self, g: Network) -> Self {
        assert_eq!(
            self.players,
            g.players(),
            "distribution and network over different player sets"
        );
        let mut probs = BTreeMap::new();
        for (&mask, &p) in &self.probs {
            *probs.entry(mask & g.mask()).or_insert(0.0) += p;
        }
        Self::from_raw(self.players, probs)
    }

    /// `ρ^{-ij}(g) = ρ(g) + ρ(g + ij)` for `ij ∉ g`, and 0 otherwise.
    pub fn remove_link(&self, link: Link) -> Self {
        let bit = self
            .players
            .network(&[link.endpoints()])
            .expect("link within player set")
            .mask();
        let mut probs = BTreeMap::new();
        for &mask in self.probs.keys() {
            let base = mask & !bit;
            if probs.contains_key(&base) {
                continue;
            }
            let p = self.prob_mask(base) + self.prob_mask(base | bit);
            probs.insert(base, p);
        }
        Self::from_raw(self.players, probs)
    }

    /// `ρ^{-i}(g) = ρ(g) + Σ_{∅ ≠ h ⊆ L_i(g(ρ))} ρ(g ∪ h)` for `g` avoiding
    /// player `i`, and 0 otherwise.
    pub fn remove_player(&self, i: usize) -> Self {
        let own = self.extent().link_neighborhood(i);
        let mut probs = BTreeMap::new();
        for &mask in self.probs.keys() {
            let base = mask & !own.mask();
            if probs.contains_key(&base) {
                continue;
            }
            let p: f64 = own
                .subnetworks()
                .map(|h| self.prob_mask(base | h.mask()))
                .sum();
            probs.insert(base, p);
        }
        Self::from_raw(self.players, probs)
    }

    #[inline]
    fn prob_mask(&self, mask: u64) -> f64 {
        self.probs.get(&mask).copied().unwrap_or(0.0)
    }

    /// Conditions on the event `pred`: `ρ(g)/Z` where `pred(g)` holds.
    pub fn condition_on<F>(&self, pred: F) -> Result<Self>
    where
        F: Fn(Network) -> bool,
    {
        let kept: BTreeMap<u64, f64> = self
            .probs
            .iter()
            .filter(|(&m, _)| pred(self.network(m)))
            .map(|(&m, &p)| (m, p))
            .collect();
        if kept.len() == self.probs.len() {
            return Ok(self.clone());
        }
        let z: f64 = kept.values().sum();
        if z <= 0.0 {
            return Err(Error::ZeroProbabilityCondition);
        }
        let probs = kept.into_iter().map(|(m, p)| (m, p / z)).collect();
        Ok(Self::from_raw(self.players, probs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{trade_distribution, SB, SI};

    const TOL: f64 = 1e-12;

    fn three() -> PlayerSet {
        PlayerSet::new(3).unwrap()
    }

    fn net(links: &[(usize, usize)]) -> Network {
        three().network(links).unwrap()
    }

    #[test]
    fn support_examples() {
        let n = three();
        assert_eq!(NetFormDist::empty(n).support(), vec![n.empty_network()]);
        let rho1 = trade_distribution(0.3, 0.6, false).unwrap();
        assert_eq!(rho1.support_len(), 8);
        let rho2 = trade_distribution(0.3, 0.6, true).unwrap();
        let support = rho2.support();
        assert_eq!(support.len(), 6);
        assert!(support.iter().all(|g| !g.neighborhood(2).is_empty()));
    }

    #[test]
    fn extent_examples() {
        let n = three();
        assert_eq!(
            trade_distribution(0.3, 0.6, false).unwrap().extent(),
            n.complete_network()
        );
        assert_eq!(NetFormDist::empty(n).extent(), n.empty_network());
        let sb = net(&[(0, 1)]);
        assert_eq!(NetFormDist::point_mass(sb).extent(), sb);
        assert_eq!(
            NetFormDist::point_mass(sb).isolated_players(),
            n.coalition(&[2]).unwrap()
        );
    }

    #[test]
    fn restrict_examples() {
        let n = three();
        let rho1 = trade_distribution(0.5, 0.5, false).unwrap();
        assert_eq!(rho1.restrict(n.complete_network()), rho1);
        assert_eq!(rho1.restrict(n.empty_network()), NetFormDist::empty(n));
        let g = net(&[(0, 2), (1, 2)]);
        let r = rho1.restrict(g);
        assert!((r.prob(g) - 0.25).abs() < TOL);
        assert_eq!(r.extent(), rho1.extent().intersection(g));
    }

    #[test]
    fn remove_link_examples() {
        let (p, q) = (0.3, 0.6);
        let rho1 = trade_distribution(p, q, false).unwrap();
        let sb = three().link(SB.0, SB.1).unwrap();
        let r = rho1.remove_link(sb);
        assert!((r.prob(net(&[SI])) - (1.0 - q) * q).abs() < TOL);
        assert!(r.support().iter().all(|g| !g.contains(sb)));
        assert_eq!(r.extent(), rho1.extent().without_link(sb));
        let rho0 = NetFormDist::empty(three());
        assert_eq!(rho0.remove_link(sb), rho0);
    }

    #[test]
    fn remove_player_examples() {
        let (p, q) = (0.3, 0.6);
        let rho1 = trade_distribution(p, q, false).unwrap();
        let r = rho1.remove_player(2);
        assert!((r.prob(net(&[SB])) - p).abs() < TOL);
        assert!(r.support().iter().all(|g| g.degree(2) == 0));
        let rho0 = NetFormDist::empty(three());
        assert_eq!(rho0.remove_player(1), rho0);
    }

    #[test]
    fn independent_links_extremes() {
        let n = three();
        let all = |p: f64| n.links().map(move |l| (l, p));
        assert_eq!(
            NetFormDist::from_independent_links(n, all(1.0)).unwrap(),
            NetFormDist::point_mass(n.complete_network())
        );
        assert_eq!(
            NetFormDist::from_independent_links(n, all(0.0)).unwrap(),
            NetFormDist::empty(n)
        );
        assert!(matches!(
            NetFormDist::from_independent_links(n, all(1.5)),
            Err(Error::InvalidProbability { .. })
        ));
    }

    #[test]
    fn independent_links_product_form() {
        let (p, q) = (0.3, 0.6);
        let rho1 = trade_distribution(p, q, false).unwrap();
        assert!((rho1.prob(net(&[(0, 2), (1, 2)])) - (1.0 - p) * q * q).abs() < TOL);
        assert!((rho1.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conditioning_examples() {
        let (p, q) = (0.3, 0.6);
        let rho1 = trade_distribution(p, q, false).unwrap();
        let rho2 = rho1.condition_on(|g| g.degree(2) > 0).unwrap();
        assert!((rho2.prob(net(&[(0, 2), (1, 2)])) - (1.0 - p) * q / (2.0 - q)).abs() < TOL);
        assert_eq!(rho1.condition_on(|_| true).unwrap(), rho1);
        let rho0 = NetFormDist::empty(three());
        assert!(matches!(
            rho0.condition_on(|g| !g.is_empty()),
            Err(Error::ZeroProbabilityCondition)
        ));
    }

    #[test]
    fn entry_validation() {
        let n = three();
        let a = net(&[(0, 1)]);
        let b = net(&[(0, 2)]);
        assert!(matches!(
            NetFormDist::from_entries(n, [(a, 0.5), (b, 0.4)], Normalization::Reject),
            Err(Error::NotNormalized { .. })
        ));
        let renorm =
            NetFormDist::from_entries(n, [(a, 0.5), (b, 0.3)], Normalization::Renormalize).unwrap();
        assert!((renorm.prob(a) - 0.625).abs() < TOL);
        assert!(matches!(
            NetFormDist::from_entries(n, [(a, -0.1), (b, 1.1)], Normalization::Reject),
            Err(Error::InvalidProbability { .. })
        ));
        assert!(matches!(
            NetFormDist::from_entries(n, [(a, 0.5), (a, 0.5)], Normalization::Reject),
            Err(Error::DuplicateNetwork(_))
        ));
    }
}
