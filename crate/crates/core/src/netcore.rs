//! Players, links, networks and coalitions.
//!
//! A network over `n` players is a bit mask over the canonical link slots of
//! the complete network, ordered lexicographically: `(0,1), (0,2), ...,
//! (0,n-1), (1,2), ...`. Coalitions are bit masks over player indices.

use std::fmt;

use crate::error::{Error, Result};

/// Default cap on the number of players.
pub const DEFAULT_MAX_PLAYERS: usize = 10;
/// Largest player count whose complete network fits in a 64-bit link mask.
pub const MASK_MAX_PLAYERS: usize = 11;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlayerSet {
    n: u8,
}

impl PlayerSet {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_cap(n, DEFAULT_MAX_PLAYERS)
    }

    /// Player set with a raised (or lowered) cap. The cap itself may not
    /// exceed [`MASK_MAX_PLAYERS`].
    pub fn with_cap(n: usize, cap: usize) -> Result<Self> {
        let max = cap.min(MASK_MAX_PLAYERS);
        if n == 0 || n > max {
            return Err(Error::PlayerCount { n, max });
        }
        Ok(Self { n: n as u8 })
    }

    #[inline]
    pub fn len(self) -> usize {
        self.n as usize
    }

    /// Always false; a player set has at least one player.
    pub fn is_empty(self) -> bool {
        false
    }

    /// Number of link slots in the complete network, `n(n-1)/2`.
    #[inline]
    pub fn link_count(self) -> usize {
        let n = self.len();
        n * (n - 1) / 2
    }

    #[inline]
    fn full_link_mask(self) -> u64 {
        low_bits(self.link_count())
    }

    pub fn players(self) -> impl Iterator<Item = usize> {
        0..self.len()
    }

    pub fn check_player(self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::PlayerOutOfRange {
                player: i,
                n: self.len(),
            })
        }
    }

    /// Validated link between two players of this set.
    pub fn link(self, i: usize, j: usize) -> Result<Link> {
        let link = Link::new(i, j).map_err(|_| self.invalid_link(i, j))?;
        if link.j() >= self.len() {
            return Err(self.invalid_link(i, j));
        }
        Ok(link)
    }

    fn invalid_link(self, i: usize, j: usize) -> Error {
        Error::InvalidLink {
            i,
            j,
            n: self.len(),
        }
    }

    /// Canonical slot of a link: lexicographic rank of `(i, j)` with `i < j`.
    pub fn link_index(self, link: Link) -> Result<usize> {
        if link.j() >= self.len() {
            return Err(self.invalid_link(link.i(), link.j()));
        }
        Ok(self.slot(link.i(), link.j()))
    }

    #[inline]
    fn slot(self, i: usize, j: usize) -> usize {
        let n = self.len();
        i * (2 * n - i - 1) / 2 + (j - i - 1)
    }

    /// Inverse of [`link_index`](Self::link_index).
    pub fn link_at(self, slot: usize) -> Option<Link> {
        let n = self.len();
        let mut rest = slot;
        for i in 0..n {
            let row = n - i - 1;
            if rest < row {
                let j = i + 1 + rest;
                return Some(Link {
                    i: i as u8,
                    j: j as u8,
                });
            }
            rest -= row;
        }
        None
    }

    /// All links of the complete network in canonical order.
    pub fn links(self) -> impl Iterator<Item = Link> {
        let n = self.len();
        (0..n).flat_map(move |i| {
            (i + 1..n).map(move |j| Link {
                i: i as u8,
                j: j as u8,
            })
        })
    }

    /// Mask of the link slots incident to player `i`.
    pub(crate) fn incident_mask(self, i: usize) -> u64 {
        let mut mask = 0u64;
        for j in 0..self.len() {
            if j < i {
                mask |= 1 << self.slot(j, i);
            } else if j > i {
                mask |= 1 << self.slot(i, j);
            }
        }
        mask
    }

    /// Mask of the link slots with both endpoints in `members`.
    pub(crate) fn internal_mask(self, members: u32) -> u64 {
        let n = self.len();
        let mut mask = 0u64;
        for i in 0..n {
            if members & (1 << i) == 0 {
                continue;
            }
            for j in i + 1..n {
                if members & (1 << j) != 0 {
                    mask |= 1 << self.slot(i, j);
                }
            }
        }
        mask
    }

    pub fn empty_network(self) -> Network {
        Network {
            players: self,
            mask: 0,
        }
    }

    pub fn complete_network(self) -> Network {
        Network {
            players: self,
            mask: self.full_link_mask(),
        }
    }

    /// Network from a raw slot mask; bits above the slot count are rejected.
    pub fn network_from_mask(self, mask: u64) -> Result<Network> {
        if mask & !self.full_link_mask() != 0 {
            return Err(Error::Precondition(format!(
                "mask {mask:#x} uses slots beyond the {} links of {} players",
                self.link_count(),
                self.len()
            )));
        }
        Ok(Network {
            players: self,
            mask,
        })
    }

    /// Network from `(i, j)` pairs in any order. Repeated links are merged.
    pub fn network(self, links: &[(usize, usize)]) -> Result<Network> {
        let mut mask = 0u64;
        for &(i, j) in links {
            let link = self.link(i, j)?;
            mask |= 1 << self.slot(link.i(), link.j());
        }
        Ok(Network {
            players: self,
            mask,
        })
    }

    /// Every network on this player set, in mask order. Callers are expected
    /// to cap the link count first.
    pub fn networks(self) -> impl Iterator<Item = Network> {
        let players = self;
        SubsetIter::new(self.full_link_mask()).map(move |mask| Network { players, mask })
    }

    pub fn empty_coalition(self) -> Coalition {
        Coalition {
            players: self,
            members: 0,
        }
    }

    pub fn grand_coalition(self) -> Coalition {
        Coalition {
            players: self,
            members: low_bits(self.len()) as u32,
        }
    }

    pub fn coalition(self, members: &[usize]) -> Result<Coalition> {
        let mut bits = 0u32;
        for &i in members {
            self.check_player(i)?;
            bits |= 1 << i;
        }
        Ok(Coalition {
            players: self,
            members: bits,
        })
    }

    pub fn coalition_from_bits(self, members: u32) -> Result<Coalition> {
        if u64::from(members) & !low_bits(self.len()) != 0 {
            return Err(Error::Precondition(format!(
                "coalition bits {members:#x} exceed {} players",
                self.len()
            )));
        }
        Ok(Coalition {
            players: self,
            members,
        })
    }
}

#[inline]
fn low_bits(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

/// Undirected link stored with `i < j`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Link {
    i: u8,
    j: u8,
}

impl Link {
    /// Canonicalizes the endpoint order. Self-loops are rejected; the range
    /// check happens when the link meets a [`PlayerSet`].
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a == b || a >= MASK_MAX_PLAYERS || b >= MASK_MAX_PLAYERS {
            return Err(Error::InvalidLink {
                i: a,
                j: b,
                n: MASK_MAX_PLAYERS,
            });
        }
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        Ok(Self {
            i: i as u8,
            j: j as u8,
        })
    }

    #[inline]
    pub fn i(self) -> usize {
        self.i as usize
    }

    #[inline]
    pub fn j(self) -> usize {
        self.j as usize
    }

    pub fn endpoints(self) -> (usize, usize) {
        (self.i(), self.j())
    }

    pub fn touches(self, player: usize) -> bool {
        self.i() == player || self.j() == player
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.i, self.j)
    }
}

/// A set of links over a fixed player set.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Network {
    players: PlayerSet,
    mask: u64,
}

impl Network {
    #[inline]
    pub fn players(self) -> PlayerSet {
        self.players
    }

    #[inline]
    pub fn mask(self) -> u64 {
        self.mask
    }

    /// Number of links, `#g`.
    #[inline]
    pub fn len(self) -> usize {
        self.mask.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.mask == 0
    }

    #[inline]
    fn same_players(self, other: Network) {
        assert_eq!(
            self.players, other.players,
            "networks over different player sets"
        );
    }

    #[inline]
    fn bit(self, link: Link) -> u64 {
        debug_assert!(link.j() < self.players.len());
        1 << self.players.slot(link.i(), link.j())
    }

    pub fn contains(self, link: Link) -> bool {
        link.j() < self.players.len() && self.mask & self.bit(link) != 0
    }

    /// Links in canonical order.
    pub fn links(self) -> impl Iterator<Item = Link> {
        let players = self.players;
        BitIter(self.mask).map(move |slot| players.link_at(slot).expect("slot in range"))
    }

    pub fn is_subnetwork_of(self, other: Network) -> bool {
        self.same_players(other);
        self.mask & !other.mask == 0
    }

    /// `g + ij`; a no-op if the link is present.
    pub fn with_link(self, link: Link) -> Network {
        Network {
            mask: self.mask | self.bit(link),
            ..self
        }
    }

    /// `g - ij`; a no-op if the link is absent.
    pub fn without_link(self, link: Link) -> Network {
        Network {
            mask: self.mask & !self.bit(link),
            ..self
        }
    }

    /// `g - h`.
    pub fn remove_links(self, h: Network) -> Network {
        self.same_players(h);
        Network {
            mask: self.mask & !h.mask,
            ..self
        }
    }

    /// `g + h`, requiring `h` to be disjoint from `g`.
    pub fn add_links(self, h: Network) -> Result<Network> {
        self.same_players(h);
        if self.mask & h.mask != 0 {
            let overlap = Network {
                mask: self.mask & h.mask,
                ..self
            };
            return Err(Error::Precondition(format!(
                "links {overlap} are already in {self}"
            )));
        }
        Ok(self.union(h))
    }

    pub fn union(self, h: Network) -> Network {
        self.same_players(h);
        Network {
            mask: self.mask | h.mask,
            ..self
        }
    }

    pub fn intersection(self, h: Network) -> Network {
        self.same_players(h);
        Network {
            mask: self.mask & h.mask,
            ..self
        }
    }

    /// `N_i(g)`.
    pub fn neighborhood(self, i: usize) -> Coalition {
        let n = self.players.len();
        let mut members = 0u32;
        for j in 0..n {
            if j != i && self.mask & (1 << self.players.slot(i.min(j), i.max(j))) != 0 {
                members |= 1 << j;
            }
        }
        Coalition {
            players: self.players,
            members,
        }
    }

    /// `L_i(g)`, the links of `g` incident to `i`.
    pub fn link_neighborhood(self, i: usize) -> Network {
        Network {
            mask: self.mask & self.players.incident_mask(i),
            ..self
        }
    }

    /// `n_i(g)`.
    pub fn degree(self, i: usize) -> usize {
        self.link_neighborhood(i).len()
    }

    /// `N(g)`, players incident to at least one link.
    pub fn covered_players(self) -> Coalition {
        let mut members = 0u32;
        for link in self.links() {
            members |= (1 << link.i()) | (1 << link.j());
        }
        Coalition {
            players: self.players,
            members,
        }
    }

    /// `N_0(g) = N \ N(g)`.
    pub fn isolated_players(self) -> Coalition {
        self.covered_players().complement()
    }

    /// `n(g) = #N(g)`, with `n(g_0) = 1` by convention.
    pub fn covered_count(self) -> usize {
        self.covered_players().len().max(1)
    }

    /// `g|S`: links of `g` with both endpoints in `S`.
    pub fn restrict_to(self, coalition: Coalition) -> Network {
        assert_eq!(
            self.players, coalition.players,
            "network and coalition over different player sets"
        );
        Network {
            mask: self.mask & self.players.internal_mask(coalition.members),
            ..self
        }
    }

    /// Components `C(g)`, ordered by their smallest player. The empty network
    /// has no components.
    pub fn components(self) -> Vec<Network> {
        let n = self.players.len();
        let adjacency: Vec<u32> = (0..n).map(|i| self.neighborhood(i).members).collect();
        let mut seen = 0u32;
        let mut out = Vec::new();
        for start in 0..n {
            if seen & (1 << start) != 0 || adjacency[start] == 0 {
                continue;
            }
            let mut reached = 1u32 << start;
            let mut frontier = reached;
            while frontier != 0 {
                let mut next = 0u32;
                for v in BitIter(u64::from(frontier)) {
                    next |= adjacency[v];
                }
                frontier = next & !reached;
                reached |= next;
            }
            seen |= reached;
            out.push(Network {
                mask: self.mask & self.players.internal_mask(reached),
                ..self
            });
        }
        out
    }

    /// True for nonempty networks with a single component.
    pub fn is_connected(self) -> bool {
        !self.is_empty() && self.components().len() == 1
    }

    /// All `h ⊆ g`, starting with the empty network.
    pub fn subnetworks(self) -> impl Iterator<Item = Network> {
        let players = self.players;
        SubsetIter::new(self.mask).map(move |mask| Network { players, mask })
    }
}

impl fmt::Display for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, link) in self.links().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{link}")?;
        }
        f.write_str("}")
    }
}

/// A set of players.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coalition {
    players: PlayerSet,
    members: u32,
}

impl Coalition {
    pub fn players(self) -> PlayerSet {
        self.players
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.members
    }

    #[inline]
    pub fn len(self) -> usize {
        self.members.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.members == 0
    }

    #[inline]
    pub fn contains(self, i: usize) -> bool {
        i < 32 && self.members & (1 << i) != 0
    }

    /// `S + i`.
    pub fn with(self, i: usize) -> Coalition {
        debug_assert!(i < self.players.len());
        Coalition {
            members: self.members | (1 << i),
            ..self
        }
    }

    /// `S - i`.
    pub fn without(self, i: usize) -> Coalition {
        Coalition {
            members: self.members & !(1 << i),
            ..self
        }
    }

    pub fn complement(self) -> Coalition {
        Coalition {
            members: !self.members & low_bits(self.players.len()) as u32,
            ..self
        }
    }

    pub fn members(self) -> impl Iterator<Item = usize> {
        BitIter(u64::from(self.members))
    }

    pub fn subsets(self) -> impl Iterator<Item = Coalition> {
        let players = self.players;
        SubsetIter::new(u64::from(self.members)).map(move |m| Coalition {
            players,
            members: m as u32,
        })
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.members().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}

/// Indices of set bits, lowest first.
struct BitIter(u64);

impl Iterator for BitIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let idx = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(idx)
    }
}

/// All submasks of `set` in increasing order (carry-rippler).
struct SubsetIter {
    set: u64,
    next: Option<u64>,
}

impl SubsetIter {
    fn new(set: u64) -> Self {
        Self { set, next: Some(0) }
    }
}

impl Iterator for SubsetIter {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let current = self.next?;
        let succ = current.wrapping_sub(self.set) & self.set;
        self.next = (succ != 0).then_some(succ);
        Some(current)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three() -> PlayerSet {
        PlayerSet::new(3).unwrap()
    }

    // Trade scenario labels: S = 0, B = 1, I = 2.
    const S: usize = 0;
    const B: usize = 1;
    const I: usize = 2;

    #[test]
    fn link_index_examples() {
        let n = three();
        assert_eq!(n.link_index(n.link(0, 1).unwrap()).unwrap(), 0);
        assert_eq!(n.link_index(n.link(1, 2).unwrap()).unwrap(), 2);
        assert!(matches!(n.link(1, 1), Err(Error::InvalidLink { .. })));
        assert!(matches!(n.link(0, 3), Err(Error::InvalidLink { .. })));
        assert_eq!(n.link(2, 0).unwrap(), n.link(0, 2).unwrap());
    }

    #[test]
    fn link_index_round_trips_for_every_size() {
        for size in 2..=MASK_MAX_PLAYERS {
            let players = PlayerSet::with_cap(size, MASK_MAX_PLAYERS).unwrap();
            let slots: Vec<usize> = players
                .links()
                .map(|l| players.link_index(l).unwrap())
                .collect();
            assert_eq!(slots, (0..players.link_count()).collect::<Vec<_>>());
            for slot in 0..players.link_count() {
                let link = players.link_at(slot).unwrap();
                assert_eq!(players.link_index(link).unwrap(), slot);
            }
            assert_eq!(players.link_at(players.link_count()), None);
        }
    }

    #[test]
    fn player_cap() {
        assert!(PlayerSet::new(10).is_ok());
        assert!(matches!(
            PlayerSet::new(11),
            Err(Error::PlayerCount { n: 11, max: 10 })
        ));
        assert!(PlayerSet::with_cap(11, 11).is_ok());
        assert!(matches!(
            PlayerSet::with_cap(12, 64),
            Err(Error::PlayerCount { n: 12, max: 11 })
        ));
        assert!(PlayerSet::new(0).is_err());
    }

    #[test]
    fn neighborhoods() {
        let n = three();
        let sb = n.network(&[(S, B)]).unwrap();
        assert_eq!(sb.neighborhood(S), n.coalition(&[B]).unwrap());
        assert_eq!(
            n.complete_network().neighborhood(0),
            n.coalition(&[1, 2]).unwrap()
        );
        for i in 0..3 {
            assert!(n.empty_network().neighborhood(i).is_empty());
        }
        assert_eq!(n.complete_network().degree(I), 2);
        assert_eq!(
            n.complete_network().link_neighborhood(I),
            n.network(&[(S, I), (B, I)]).unwrap()
        );
    }

    #[test]
    fn components_examples() {
        let n = three();
        assert_eq!(
            n.complete_network().components(),
            vec![n.complete_network()]
        );
        assert!(n.empty_network().components().is_empty());
        let four = PlayerSet::new(4).unwrap();
        let g = four.network(&[(0, 1), (2, 3)]).unwrap();
        assert_eq!(
            g.components(),
            vec![
                four.network(&[(0, 1)]).unwrap(),
                four.network(&[(2, 3)]).unwrap()
            ]
        );
    }

    #[test]
    fn isolated_players_examples() {
        let n = three();
        let sb = n.network(&[(S, B)]).unwrap();
        assert_eq!(sb.isolated_players(), n.coalition(&[I]).unwrap());
        assert!(n.complete_network().isolated_players().is_empty());
        assert_eq!(n.empty_network().isolated_players(), n.grand_coalition());
        assert_eq!(n.empty_network().covered_count(), 1);
        assert_eq!(sb.covered_count(), 2);
    }

    #[test]
    fn restriction_examples() {
        let n = three();
        let sb = n.coalition(&[S, B]).unwrap();
        assert_eq!(
            n.complete_network().restrict_to(sb),
            n.network(&[(S, B)]).unwrap()
        );
        let g = n.network(&[(S, I), (B, I)]).unwrap();
        assert_eq!(g.restrict_to(n.grand_coalition()), g);
        assert_eq!(g.restrict_to(sb), n.empty_network());
    }

    #[test]
    fn link_edits() {
        let n = three();
        let full = n.complete_network();
        let sb = n.network(&[(S, B)]).unwrap();
        assert_eq!(full.remove_links(sb).add_links(sb).unwrap(), full);
        assert_eq!(full.remove_links(full), n.empty_network());
        let g = n.network(&[(S, I), (B, I)]).unwrap();
        assert_eq!(g.add_links(sb).unwrap(), full);
        assert!(matches!(full.add_links(sb), Err(Error::Precondition(_))));
    }

    #[test]
    fn subnetwork_enumeration() {
        let n = PlayerSet::new(4).unwrap();
        let g = n.network(&[(0, 1), (1, 3), (2, 3)]).unwrap();
        let subs: Vec<Network> = g.subnetworks().collect();
        assert_eq!(subs.len(), 8);
        assert_eq!(subs[0], n.empty_network());
        assert!(subs.iter().all(|h| h.is_subnetwork_of(g)));
        assert_eq!(n.networks().count(), 64);
        assert_eq!(n.grand_coalition().subsets().count(), 16);
    }

    #[test]
    fn display() {
        let n = three();
        assert_eq!(n.complete_network().to_string(), "{0-1,0-2,1-2}");
        assert_eq!(n.empty_network().to_string(), "{}");
        assert_eq!(n.coalition(&[0, 2]).unwrap().to_string(), "{0,2}");
    }

    #[test]
    fn mask_validation() {
        let n = three();
        assert!(n.network_from_mask(0b111).is_ok());
        assert!(n.network_from_mask(0b1000).is_err());
        assert!(n.coalition_from_bits(0b1000).is_err());
    }
}
