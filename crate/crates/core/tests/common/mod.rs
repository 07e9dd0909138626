//! Brute-force reference computations. These deliberately avoid the library's
//! subset sums and support-grouped operators.

#![allow(dead_code)]

use itertools::Itertools;
use varnet::{CoopGame, NetFormDist, Network, PlayerSet};

/// Shapley value as the average marginal contribution over all `n!` orders.
pub fn shapley_by_permutations(game: &CoopGame) -> Vec<f64> {
    let players = game.players();
    let n = players.len();
    let mut totals = vec![0.0; n];
    let mut orders = 0usize;
    for order in (0..n).permutations(n) {
        let mut bits = 0u32;
        for &i in &order {
            let before = game.worth(players.coalition_from_bits(bits).unwrap());
            bits |= 1 << i;
            let after = game.worth(players.coalition_from_bits(bits).unwrap());
            totals[i] += after - before;
        }
        orders += 1;
    }
    totals.iter().map(|t| t / orders as f64).collect()
}

/// Restriction of `dist` to `g` by full enumeration:
/// `ρ_g(h) = Σ_{h' ⊆ g_N \ g} ρ(h ∪ h')` for every `h ⊆ g`.
pub fn restrict_by_enumeration(dist: &NetFormDist, g: Network) -> Vec<(Network, f64)> {
    let players = dist.players();
    let outside = players.complete_network().remove_links(g);
    g.subnetworks()
        .map(|h| {
            let mass: f64 = outside
                .subnetworks()
                .map(|extra| dist.prob(h.union(extra)))
                .sum();
            (h, mass)
        })
        .collect()
}

/// `g_{N-i}`: the complete network on everyone but `i`.
pub fn complete_without(players: PlayerSet, i: usize) -> Network {
    players
        .complete_network()
        .restrict_to(players.grand_coalition().without(i))
}

/// Largest pointwise gap between a distribution and a dense reference.
pub fn max_gap(dist: &NetFormDist, reference: &[(Network, f64)]) -> f64 {
    let mut gap: f64 = 0.0;
    for &(h, p) in reference {
        gap = gap.max((dist.prob(h) - p).abs());
    }
    // Mass outside the reference's networks must be zero.
    for (h, p) in dist.entries() {
        if !reference.iter().any(|&(r, _)| r == h) {
            gap = gap.max(p);
        }
    }
    gap
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Independent formation probabilities of the trade example, keyed by link list with
/// S = 0, B = 1, I = 2.
pub fn independent_table(p: f64, q: f64) -> Vec<(Vec<(usize, usize)>, f64)> {
    vec![
        (vec![], (1.0 - p) * (1.0 - q).powi(2)),
        (vec![(0, 2)], (1.0 - p) * (1.0 - q) * q),
        (vec![(1, 2)], (1.0 - p) * (1.0 - q) * q),
        (vec![(0, 1)], p * (1.0 - q).powi(2)),
        (vec![(0, 2), (1, 2)], (1.0 - p) * q * q),
        (vec![(0, 2), (0, 1)], p * (1.0 - q) * q),
        (vec![(1, 2), (0, 1)], p * (1.0 - q) * q),
        (vec![(0, 1), (0, 2), (1, 2)], p * q * q),
    ]
}

/// Institutional probabilities (formation conditional on the intermediary being linked).
pub fn institutional_table(p: f64, q: f64) -> Vec<(Vec<(usize, usize)>, f64)> {
    let d = 2.0 - q;
    vec![
        (vec![], 0.0),
        (vec![(0, 2)], (1.0 - p) * (1.0 - q) / d),
        (vec![(1, 2)], (1.0 - p) * (1.0 - q) / d),
        (vec![(0, 1)], 0.0),
        (vec![(0, 2), (1, 2)], (1.0 - p) * q / d),
        (vec![(0, 2), (0, 1)], p * (1.0 - q) / d),
        (vec![(1, 2), (0, 1)], p * (1.0 - q) / d),
        (vec![(0, 1), (0, 2), (1, 2)], p * q / d),
    ]
}

/// Trade example row: (links, w(g), Myerson, Position).
pub type ValueRow = (Vec<(usize, usize)>, f64, [f64; 3], [f64; 3]);

pub fn trade_value_table() -> Vec<ValueRow> {
    let zero = [0.0; 3];
    let half = [0.5, 0.5, 0.0];
    let third = 1.0 / 3.0;
    vec![
        (vec![], 0.0, zero, zero),
        (vec![(0, 2)], 0.0, zero, zero),
        (vec![(1, 2)], 0.0, zero, zero),
        (vec![(0, 1)], 1.0, half, half),
        (
            vec![(0, 2), (1, 2)],
            1.0,
            [third, third, third],
            [0.25, 0.25, 0.5],
        ),
        (vec![(0, 2), (0, 1)], 1.0, half, half),
        (vec![(1, 2), (0, 1)], 1.0, half, half),
        (
            vec![(0, 1), (0, 2), (1, 2)],
            1.0,
            half,
            [5.0 / 12.0, 5.0 / 12.0, 1.0 / 6.0],
        ),
    ]
}

/// Closed-form expected values of the trade example:
/// (Myerson S/B, Myerson I, Position S/B, Position I).
pub fn independent_closed_forms(p: f64, q: f64) -> [f64; 4] {
    [
        0.5 * p + (1.0 - p) * q * q / 3.0,
        (1.0 - p) * q * q / 3.0,
        0.5 * p + 0.25 * q * q - p * q * q / 3.0,
        (0.5 - p / 3.0) * q * q,
    ]
}

pub fn institutional_closed_forms(p: f64, q: f64) -> [f64; 4] {
    let d = 2.0 - q;
    [
        0.5 * p + q * (1.0 - p) / (3.0 * d),
        q * (1.0 - p) / (3.0 * d),
        (3.0 - 10.0 * p) * q / (12.0 * d) + p / d,
        (3.0 - 2.0 * p) * q / (6.0 * d),
    ]
}

pub const GRID: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
