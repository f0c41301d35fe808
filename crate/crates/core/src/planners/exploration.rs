//! Waypoint selection for exploration.

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;

use crate::geometry::Cell;
use crate::mapping::{frontier_cells, AgentMaps, OccupancyMap, SemanticChannel};
use crate::nav::astar_on_map;
use crate::rng::SimRng;

/// Uniformly sampled frontier cell, skipping `exclude`. `None` means the map
/// has no frontier left: exploration is complete.
pub fn explore_frontier(map: &OccupancyMap, rng: &mut SimRng, exclude: &BTreeSet<Cell>) -> Option<Cell> {
    let cells: Vec<Cell> = frontier_cells(map).into_iter().filter(|c| !exclude.contains(c)).collect();
    cells.choose(rng).copied()
}

/// Path length in cells-weighted meters from `from` to `to`, if reachable.
pub fn path_cost(map: &OccupancyMap, from: Cell, to: Cell) -> Option<f64> {
    let path = astar_on_map(map, from, to)?;
    Some(
        path.windows(2)
            .map(|w| if w[0].x != w[1].x && w[0].y != w[1].y { std::f64::consts::SQRT_2 } else { 1.0 })
            .sum(),
    )
}

/// Nearest cell by path cost flagged in any of `channels`; falls back to a
/// frontier sample when nothing relevant is flagged or reachable.
pub fn explore_greedy_semantic(
    maps: &AgentMaps,
    channels: &[SemanticChannel],
    from: Cell,
    rng: &mut SimRng,
    exclude: &BTreeSet<Cell>,
) -> Option<Cell> {
    let mut best: Option<(f64, Cell)> = None;
    for ch in channels {
        for c in maps.semantic.flagged(*ch) {
            if exclude.contains(&c) {
                continue;
            }
            if let Some(cost) = path_cost(&maps.occupancy, from, c) {
                if best.is_none_or(|(b, bc)| cost < b || (cost == b && c < bc)) {
                    best = Some((cost, c));
                }
            }
        }
    }
    match best {
        Some((_, c)) => Some(c),
        None => explore_frontier(&maps.occupancy, rng, exclude),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::MapFrame;
    use crate::rng::seeded;

    fn map() -> OccupancyMap {
        OccupancyMap::new(MapFrame::new(16, Cell::new(0, 0)), 0.5)
    }

    #[test]
    fn single_frontier_is_certain() {
        let mut m = map();
        m.record(Cell::new(0, 0), false);
        let mut rng = seeded(1);
        for _ in 0..20 {
            assert_eq!(explore_frontier(&m, &mut rng, &BTreeSet::new()), Some(Cell::new(0, 0)));
        }
    }

    #[test]
    fn fully_explored_signals_completion() {
        let mut m = map();
        for c in m.world_cells().collect::<Vec<_>>() {
            m.record(c, false);
        }
        assert_eq!(explore_frontier(&m, &mut seeded(1), &BTreeSet::new()), None);
    }

    #[test]
    fn four_frontiers_are_uniform() {
        let mut m = map();
        // four isolated explored cells, each its own frontier
        let cells = [Cell::new(-4, -4), Cell::new(3, -4), Cell::new(-4, 3), Cell::new(3, 3)];
        for c in cells {
            m.record(c, false);
        }
        let mut rng = seeded(77);
        let mut counts = [0usize; 4];
        let n = 10_000;
        for _ in 0..n {
            let c = explore_frontier(&m, &mut rng, &BTreeSet::new()).unwrap();
            counts[cells.iter().position(|x| *x == c).unwrap()] += 1;
        }
        for k in counts {
            let f = k as f64 / n as f64;
            assert!((f - 0.25).abs() <= 0.02, "{counts:?}");
        }
    }

    #[test]
    fn greedy_prefers_nearest_flag_then_falls_back() {
        let frame = MapFrame::new(16, Cell::new(0, 0));
        let mut maps = AgentMaps::new(frame, 0.5, None);
        let mut rng = seeded(3);
        maps.occupancy.record(Cell::new(0, 0), false);
        assert_eq!(
            explore_greedy_semantic(&maps, &[SemanticChannel::Container], Cell::new(0, 0), &mut rng, &BTreeSet::new()),
            Some(Cell::new(0, 0))
        );
        maps.semantic.set(SemanticChannel::Container, Cell::new(5, 0), true);
        maps.semantic.set(SemanticChannel::Container, Cell::new(-3, 0), true);
        assert_eq!(
            explore_greedy_semantic(&maps, &[SemanticChannel::Container], Cell::new(0, 0), &mut rng, &BTreeSet::new()),
            Some(Cell::new(-3, 0))
        );
    }
}
