//! Vertex classification (corners and halls), hole detection, the hall tree,
//! cut vertices and shortest-path distances.
//!
//! Most of this module is an oracle layer: the simulator never consults it,
//! tests and the `--check` mode do.

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use crate::grid_env::{Bounds, Cell, GridError, Region};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("region is not simply connected")]
    NotSimplyConnected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexKind {
    Corner,
    Hall,
    Interior,
}

/// Classification of a cell. `diagonal` is set for two-neighbour corners and
/// for halls; dead-end corners (at most one neighbour) have none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VertexClass {
    pub kind: VertexKind,
    pub diagonal: Option<Cell>,
}

impl VertexClass {
    pub fn is_corner(&self) -> bool {
        self.kind == VertexKind::Corner
    }

    pub fn is_hall(&self) -> bool {
        self.kind == VertexKind::Hall
    }
}

/// Classify `v` against an arbitrary cell set given by `contains`. Used for
/// residual regions (the region minus settled robots) as well as plain ones.
pub fn classify_with(contains: impl Fn(Cell) -> bool, v: Cell) -> VertexClass {
    let nbrs: Vec<Cell> = v.lattice_neighbors().into_iter().filter(|c| contains(*c)).collect();
    match nbrs.as_slice() {
        [] | [_] => VertexClass { kind: VertexKind::Corner, diagonal: None },
        [u, w] => {
            if (*u - v) == -(*w - v) {
                return VertexClass { kind: VertexKind::Interior, diagonal: None };
            }
            let diag = *u + (*w - v);
            let kind = if contains(diag) { VertexKind::Corner } else { VertexKind::Hall };
            VertexClass { kind, diagonal: Some(diag) }
        }
        _ => VertexClass { kind: VertexKind::Interior, diagonal: None },
    }
}

pub fn classify(r: &Region, v: Cell) -> Result<VertexClass, GridError> {
    if !r.contains(v) {
        return Err(GridError::CellNotInRegion(v));
    }
    Ok(classify_with(|c| r.contains(c), v))
}

pub fn corners(r: &Region) -> Vec<Cell> {
    r.cells().iter().copied().filter(|c| classify_with(|x| r.contains(x), *c).is_corner()).collect()
}

pub fn halls(r: &Region) -> Vec<Cell> {
    r.cells().iter().copied().filter(|c| classify_with(|x| r.contains(x), *c).is_hall()).collect()
}

/// Hole test over an arbitrary cell set inside `bounds`: flood the complement
/// under 8-connectivity from a one-cell ring outside the box; the set is simply
/// connected iff every complement cell in the box is reached.
pub fn is_simply_connected_with(bounds: Bounds, contains: impl Fn(Cell) -> bool) -> bool {
    let outer = bounds.padded(1);
    let mut seen = vec![false; outer.area()];
    let start = Cell::new(outer.min_x, outer.min_y);
    seen[0] = true;
    let mut stack = vec![start];
    while let Some(c) = stack.pop() {
        for dx in -1..=1 {
            for dy in -1..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let n = Cell::new(c.x + dx, c.y + dy);
                if let Some(i) = outer.index(n) {
                    if !seen[i] && !contains(n) {
                        seen[i] = true;
                        stack.push(n);
                    }
                }
            }
        }
    }
    bounds.cells().all(|c| contains(c) || seen[outer.index(c).expect("inside")])
}

pub fn is_simply_connected(r: &Region) -> bool {
    is_simply_connected_with(r.bounds(), |c| r.contains(c))
}

/// Tree of hall-separated components.
///
/// Components are the connected pieces left after deleting every hall, each
/// extended with its adjacent halls. Two halls that are adjacent to each other
/// leave an edge with no surviving endpoint; such an edge becomes its own
/// two-cell component so that every hall joins exactly two components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HallTree {
    pub components: Vec<BTreeSet<Cell>>,
    /// `(i, j, hall)` with `i < j`.
    pub edges: Vec<(usize, usize, Cell)>,
    pub root: usize,
}

impl HallTree {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Connected with exactly `n - 1` edges.
    pub fn is_tree(&self) -> bool {
        let n = self.components.len();
        if n == 0 || self.edges.len() != n - 1 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![self.root];
        seen[self.root] = true;
        while let Some(i) = stack.pop() {
            for &(a, b, _) in &self.edges {
                let other = if a == i {
                    b
                } else if b == i {
                    a
                } else {
                    continue;
                };
                if !seen[other] {
                    seen[other] = true;
                    stack.push(other);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

pub fn hall_tree(r: &Region) -> Result<HallTree, TopologyError> {
    if !is_simply_connected(r) {
        return Err(TopologyError::NotSimplyConnected);
    }
    let hall_set: BTreeSet<Cell> = halls(r).into_iter().collect();
    let b = r.bounds();
    let mut label = vec![usize::MAX; b.area()];
    let mut components: Vec<BTreeSet<Cell>> = Vec::new();

    for &start in r.cells() {
        let si = b.index(start).expect("inside");
        if hall_set.contains(&start) || label[si] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut comp = BTreeSet::new();
        let mut queue = VecDeque::from([start]);
        label[si] = id;
        while let Some(c) = queue.pop_front() {
            comp.insert(c);
            for n in c.lattice_neighbors() {
                if !r.contains(n) || hall_set.contains(&n) {
                    continue;
                }
                let ni = b.index(n).expect("inside");
                if label[ni] == usize::MAX {
                    label[ni] = id;
                    queue.push_back(n);
                }
            }
        }
        components.push(comp);
    }

    // Edges between two halls become their own components.
    for &h in &hall_set {
        for n in h.lattice_neighbors() {
            if n > h && hall_set.contains(&n) {
                components.push(BTreeSet::from([h, n]));
            }
        }
    }
    let base_count = components.len();

    // Attach each hall to the components of its neighbours.
    let mut owners: Vec<(Cell, Vec<usize>)> = Vec::new();
    for &h in &hall_set {
        let mut ids = BTreeSet::new();
        for n in h.lattice_neighbors() {
            if !r.contains(n) {
                continue;
            }
            if hall_set.contains(&n) {
                let pair = BTreeSet::from([h.min(n), h.max(n)]);
                let idx = components[..base_count]
                    .iter()
                    .position(|c| *c == pair)
                    .expect("hall pair component");
                ids.insert(idx);
            } else {
                ids.insert(label[b.index(n).expect("inside")]);
            }
        }
        owners.push((h, ids.into_iter().collect()));
    }
    if components.is_empty() {
        // A lone hall cannot exist, but keep the tree well formed regardless.
        components.push(hall_set.iter().copied().collect());
    }
    let mut edges = Vec::new();
    for (h, ids) in owners {
        for &i in &ids {
            components[i].insert(h);
        }
        for (k, &i) in ids.iter().enumerate() {
            for &j in &ids[k + 1..] {
                edges.push((i.min(j), i.max(j), h));
            }
        }
    }
    let root = components
        .iter()
        .position(|c| c.contains(&r.door()))
        .expect("door belongs to some component");
    Ok(HallTree { components, edges, root })
}

/// Cells whose removal disconnects the region. Brute force: delete each cell
/// in turn and flood fill what is left.
pub fn articulation_points(r: &Region) -> BTreeSet<Cell> {
    let cells = r.cells();
    if cells.len() <= 2 {
        return BTreeSet::new();
    }
    cells
        .iter()
        .copied()
        .filter(|&cut| {
            let start = if cells[0] == cut { cells[1] } else { cells[0] };
            reachable_count(r.bounds(), |c| c != cut && r.contains(c), start) != cells.len() - 1
        })
        .collect()
}

fn reachable_count(b: Bounds, contains: impl Fn(Cell) -> bool, start: Cell) -> usize {
    let mut seen = vec![false; b.area()];
    seen[b.index(start).expect("inside")] = true;
    let mut stack = vec![start];
    let mut count = 0;
    while let Some(c) = stack.pop() {
        count += 1;
        for n in c.lattice_neighbors() {
            if let Some(i) = b.index(n) {
                if !seen[i] && contains(n) {
                    seen[i] = true;
                    stack.push(n);
                }
            }
        }
    }
    count
}

/// Shortest-path distances from one source, stored densely over the region's
/// bounding box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceField {
    bounds: Bounds,
    dist: Vec<u32>,
    source: Cell,
}

impl DistanceField {
    const UNREACHED: u32 = u32::MAX;

    pub fn source(&self) -> Cell {
        self.source
    }

    pub fn get(&self, c: Cell) -> Option<u32> {
        self.bounds.index(c).map(|i| self.dist[i]).filter(|d| *d != Self::UNREACHED)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Cell, u32)> + '_ {
        self.dist
            .iter()
            .enumerate()
            .filter(|(_, d)| **d != Self::UNREACHED)
            .map(|(i, d)| (self.bounds.cell_at(i), *d))
    }

    pub fn sum(&self) -> u64 {
        self.iter().map(|(_, d)| d as u64).sum()
    }

    pub fn max(&self) -> u32 {
        self.iter().map(|(_, d)| d).max().unwrap_or(0)
    }
}

/// BFS over the cells accepted by `contains`, within `bounds`.
pub fn bfs_distances_with(bounds: Bounds, contains: impl Fn(Cell) -> bool, src: Cell) -> DistanceField {
    let mut dist = vec![DistanceField::UNREACHED; bounds.area()];
    if let Some(i) = bounds.index(src).filter(|_| contains(src)) {
        dist[i] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(c) = queue.pop_front() {
            let d = dist[bounds.index(c).expect("inside")];
            for n in c.lattice_neighbors() {
                if let Some(ni) = bounds.index(n) {
                    if dist[ni] == DistanceField::UNREACHED && contains(n) {
                        dist[ni] = d + 1;
                        queue.push_back(n);
                    }
                }
            }
        }
    }
    DistanceField { bounds, dist, source: src }
}

pub fn bfs_distances(r: &Region, src: Cell) -> Result<DistanceField, GridError> {
    if !r.contains(src) {
        return Err(GridError::CellNotInRegion(src));
    }
    Ok(bfs_distances_with(r.bounds(), |c| r.contains(c), src))
}

/// Lower bound on total travel when `src` is the door.
pub fn sum_distances(r: &Region, src: Cell) -> Result<u64, GridError> {
    Ok(bfs_distances(r, src)?.sum())
}

/// All cells minimising the sum of distances to every other cell.
pub fn geometric_median(r: &Region) -> BTreeSet<Cell> {
    let sums: Vec<(Cell, u64)> = r
        .cells()
        .iter()
        .map(|&c| (c, bfs_distances_with(r.bounds(), |x| r.contains(x), c).sum()))
        .collect();
    let best = sums.iter().map(|(_, s)| *s).min().unwrap_or(0);
    sums.into_iter().filter(|(_, s)| *s == best).map(|(c, _)| c).collect()
}

/// Lazily filled all-pairs distance table, used by per-step invariant checks.
#[derive(Debug, Clone)]
pub struct DistanceCache {
    bounds: Bounds,
    mask: Vec<bool>,
    rows: Vec<Option<DistanceField>>,
}

impl DistanceCache {
    pub fn new(r: &Region) -> Self {
        let bounds = r.bounds();
        let mask = bounds.cells().map(|c| r.contains(c)).collect();
        DistanceCache { bounds, mask, rows: vec![None; bounds.area()] }
    }

    pub fn distance(&mut self, a: Cell, b: Cell) -> Option<u32> {
        let ia = self.bounds.index(a)?;
        if self.rows[ia].is_none() {
            let (bounds, mask) = (self.bounds, &self.mask);
            let field = bfs_distances_with(bounds, |c| bounds.index(c).is_some_and(|i| mask[i]), a);
            self.rows[ia] = Some(field);
        }
        self.rows[ia].as_ref().and_then(|f| f.get(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: i32, y: i32) -> Cell {
        Cell::new(x, y)
    }

    fn l_tromino() -> Region {
        Region::new([c(0, 0), c(1, 0), c(1, 1)], c(0, 0)).unwrap()
    }

    fn square(n: i32) -> Region {
        Region::new((0..n).flat_map(|x| (0..n).map(move |y| c(x, y))), c(0, 0)).unwrap()
    }

    fn ring3() -> Region {
        Region::from_ascii("...\n.#.\nS..").unwrap()
    }

    #[test]
    fn classify_examples() {
        let l = l_tromino();
        assert_eq!(
            classify(&l, c(1, 0)).unwrap(),
            VertexClass { kind: VertexKind::Hall, diagonal: Some(c(0, 1)) }
        );
        assert_eq!(
            classify(&square(2), c(0, 0)).unwrap(),
            VertexClass { kind: VertexKind::Corner, diagonal: Some(c(1, 1)) }
        );
        let row = Region::from_ascii("S..").unwrap();
        assert_eq!(classify(&row, c(0, 0)).unwrap(), VertexClass { kind: VertexKind::Corner, diagonal: None });
        assert_eq!(classify(&row, c(1, 0)).unwrap().kind, VertexKind::Interior);
        assert_eq!(classify(&square(3), c(1, 1)).unwrap().kind, VertexKind::Interior);
        assert!(classify(&row, c(9, 9)).is_err());
    }

    #[test]
    fn simple_connectivity() {
        assert!(is_simply_connected(&square(30)));
        assert!(!is_simply_connected(&ring3()));
        assert!(is_simply_connected(&l_tromino()));
        // Diagonal pinch: the wall at (1,1) touches the outside only through a corner.
        let pinch = Region::from_ascii("..#\n.#.\nS..").unwrap();
        assert!(is_simply_connected(&pinch));
        let enclosed_pinch = Region::from_ascii("...#\n.#..\n....\nS...").unwrap();
        assert!(!is_simply_connected(&enclosed_pinch));
    }

    #[test]
    fn hall_tree_examples() {
        let t = hall_tree(&square(2)).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t.edges.is_empty());

        let t = hall_tree(&l_tromino()).unwrap();
        assert_eq!(t.len(), 2);
        assert!(t.components.contains(&BTreeSet::from([c(0, 0), c(1, 0)])));
        assert!(t.components.contains(&BTreeSet::from([c(1, 1), c(1, 0)])));
        assert_eq!(t.edges.len(), 1);
        assert_eq!(t.edges[0].2, c(1, 0));
        assert!(t.components[t.root].contains(&c(0, 0)));
        assert!(t.is_tree());

        assert_eq!(hall_tree(&ring3()), Err(TopologyError::NotSimplyConnected));
    }

    #[test]
    fn hall_tree_with_adjacent_halls() {
        // Staircase: (0,0) (1,0) (1,1) (2,1) (2,2); the middle three are halls.
        let stairs = Region::new([c(0, 0), c(1, 0), c(1, 1), c(2, 1), c(2, 2)], c(0, 0)).unwrap();
        assert_eq!(halls(&stairs).len(), 3);
        let t = hall_tree(&stairs).unwrap();
        assert!(t.is_tree());
        assert_eq!(t.edges.len(), 3);
        assert_eq!(t.len(), 4);
    }

    #[test]
    fn articulation_examples() {
        assert_eq!(articulation_points(&Region::from_ascii("S..").unwrap()), BTreeSet::from([c(1, 0)]));
        assert!(articulation_points(&square(2)).is_empty());
        assert_eq!(articulation_points(&l_tromino()), BTreeSet::from([c(1, 0)]));
        assert!(articulation_points(&Region::from_ascii("S").unwrap()).is_empty());
    }

    #[test]
    fn distances() {
        let d = bfs_distances(&square(2), c(0, 0)).unwrap();
        let all: Vec<_> = d.iter().collect();
        assert_eq!(all.len(), 4);
        assert_eq!(d.get(c(0, 0)), Some(0));
        assert_eq!(d.get(c(1, 0)), Some(1));
        assert_eq!(d.get(c(0, 1)), Some(1));
        assert_eq!(d.get(c(1, 1)), Some(2));

        // Oracle: on a full square, BFS distance from the corner is x + y.
        let expected: u64 = (0..5u64).flat_map(|x| (0..5u64).map(move |y| x + y)).sum();
        assert_eq!(expected, 100);
        assert_eq!(sum_distances(&square(5), c(0, 0)).unwrap(), expected);

        assert_eq!(sum_distances(&Region::from_ascii("S....").unwrap(), c(0, 0)).unwrap(), 10);
        assert_eq!(sum_distances(&Region::from_ascii("S").unwrap(), c(0, 0)).unwrap(), 0);
        assert!(sum_distances(&square(2), c(7, 7)).is_err());
    }

    #[test]
    fn distances_on_table_grid() {
        // Oracle: in a full rectangle BFS distance equals Manhattan distance.
        let door = c(13, 13);
        let manhattan: u64 = (0..30).flat_map(|x| (0..30).map(move |y| c(x, y).manhattan(door) as u64)).sum();
        assert_eq!(manhattan, 13620);
        let d = bfs_distances(&square(30), door).unwrap();
        assert_eq!(d.sum(), 13620);
        assert_eq!(d.max(), 32);
    }

    #[test]
    fn medians() {
        assert_eq!(geometric_median(&Region::from_ascii("S..").unwrap()), BTreeSet::from([c(1, 0)]));
        assert_eq!(geometric_median(&square(3)), BTreeSet::from([c(1, 1)]));
        assert_eq!(
            geometric_median(&square(30)),
            BTreeSet::from([c(14, 14), c(14, 15), c(15, 14), c(15, 15)])
        );
    }

    #[test]
    fn distance_cache_matches_bfs() {
        let r = ring3();
        let mut cache = DistanceCache::new(&r);
        assert_eq!(cache.distance(c(0, 0), c(2, 2)), Some(4));
        assert_eq!(cache.distance(c(0, 0), c(1, 1)), None);
    }
}
