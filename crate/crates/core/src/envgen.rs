//! Environment generators: rectangles, random simply connected regions and
//! the looped comb `g_k`.

use std::collections::{BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grid_env::{Bounds, Cell, GridError, Region};
use crate::topology::is_simply_connected_with;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnvError {
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("door {0} is outside the rectangle")]
    DoorOutOfBounds(Cell),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Full `w` x `h` rectangle with its lower-left cell at the origin.
pub fn rect(w: i32, h: i32, door: Cell) -> Result<Region, EnvError> {
    if w < 1 || h < 1 {
        return Err(EnvError::BadParameters(format!("rectangle must be at least 1x1, got {w}x{h}")));
    }
    if !(0..w).contains(&door.x) || !(0..h).contains(&door.y) {
        return Err(EnvError::DoorOutOfBounds(door));
    }
    let cells = (0..w).flat_map(|x| (0..h).map(move |y| Cell::new(x, y)));
    Ok(Region::new(cells, door)?)
}

/// Whether adding `c` to `set` leaves it free of holes. Cheap when the walls
/// around `c` form a single 8-connected run; otherwise falls back to a full
/// flood of the complement.
fn stays_simply_connected(set: &HashSet<Cell>, bounds: Bounds, c: Cell) -> bool {
    let ring: Vec<Cell> = (-1..=1)
        .flat_map(|dx| (-1..=1).map(move |dy| (dx, dy)))
        .filter(|&(dx, dy)| (dx, dy) != (0, 0))
        .map(|(dx, dy)| Cell::new(c.x + dx, c.y + dy))
        .filter(|n| !set.contains(n))
        .collect();
    let mut label: Vec<usize> = (0..ring.len()).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut i = i;
        while label[i] != i {
            label[i] = label[label[i]];
            i = label[i];
        }
        i
    }
    for i in 0..ring.len() {
        for j in i + 1..ring.len() {
            if (ring[i].x - ring[j].x).abs() <= 1 && (ring[i].y - ring[j].y).abs() <= 1 {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                label[a] = b;
            }
        }
    }
    let roots: BTreeSet<usize> = (0..ring.len()).map(|i| find(&mut label, i)).collect();
    if roots.len() <= 1 {
        return true;
    }
    let grown = Bounds {
        min_x: bounds.min_x.min(c.x),
        min_y: bounds.min_y.min(c.y),
        max_x: bounds.max_x.max(c.x),
        max_y: bounds.max_y.max(c.y),
    };
    is_simply_connected_with(grown, |x| x == c || set.contains(&x))
}

/// Random simply connected region of exactly `v` cells.
///
/// Grows from a single cell by attaching uniformly chosen boundary cells,
/// rejecting any attachment that would enclose a hole. The door is the seed
/// cell; the result is translated so its bounding box starts at the origin.
pub fn random_simply_connected(v: usize, seed: u64) -> Result<Region, EnvError> {
    if v == 0 {
        return Err(EnvError::BadParameters("region needs at least one cell".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Cell::new(0, 0);
    let mut set: HashSet<Cell> = HashSet::from([start]);
    let mut order = vec![start];
    let mut bounds = Bounds { min_x: 0, min_y: 0, max_x: 0, max_y: 0 };
    let mut boundary: BTreeSet<Cell> = start.lattice_neighbors().into_iter().collect();
    while set.len() < v {
        let mut candidates: Vec<Cell> = boundary.iter().copied().collect();
        loop {
            let i = rng.gen_range(0..candidates.len());
            let c = candidates.swap_remove(i);
            if stays_simply_connected(&set, bounds, c) {
                set.insert(c);
                order.push(c);
                boundary.remove(&c);
                boundary.extend(c.lattice_neighbors().into_iter().filter(|n| !set.contains(n)));
                bounds = Bounds {
                    min_x: bounds.min_x.min(c.x),
                    min_y: bounds.min_y.min(c.y),
                    max_x: bounds.max_x.max(c.x),
                    max_y: bounds.max_y.max(c.y),
                };
                break;
            }
        }
    }
    Ok(Region::new(order, start)?.normalized())
}

/// The looped comb: `10r` unit-width columns spaced `2r` apart on a bottom
/// row of `20r^2` cells. Every column is `30r^2` cells tall except columns 1
/// and `k`, which are one cell taller and joined by a top row above them; a
/// row of walls separates the top row from the dead-end columns. The door is
/// at the bottom-left.
pub fn g_k(r: i32, k: i32) -> Result<Region, EnvError> {
    if r < 1 || !(2..=10 * r).contains(&k) {
        return Err(EnvError::BadParameters(format!("need r >= 1 and 2 <= k <= 10r, got r={r}, k={k}")));
    }
    let pitch = 2 * r;
    let width = 20 * r * r;
    let height = 30 * r * r;
    let col_x = |i: i32| (i - 1) * pitch;
    let mut cells: Vec<Cell> = (0..width).map(|x| Cell::new(x, 0)).collect();
    for i in 1..=10 * r {
        let x = col_x(i);
        let top = if i == 1 || i == k { height + 1 } else { height };
        cells.extend((1..=top).map(|y| Cell::new(x, y)));
    }
    cells.extend((col_x(1)..=col_x(k)).map(|x| Cell::new(x, height + 2)));
    Ok(Region::new(cells, Cell::new(0, 0))?)
}
