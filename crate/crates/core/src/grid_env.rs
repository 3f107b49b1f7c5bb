//! Grid environments: finite 4-connected sets of lattice cells with a door.
//!
//! The ASCII map format uses `#` for walls, `.` for free cells and `S` for the
//! door. Row 0 of a map is its topmost line, which carries the highest `y`
//! coordinate; `Up` is `+y` and `Right` is `+x`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("malformed map: {0}")]
    MalformedMap(String),
    #[error("map has no door cell 'S'")]
    NoDoor,
    #[error("map has {0} door cells, expected exactly one")]
    MultipleDoors(usize),
    #[error("region is not 4-connected: {reached} of {total} cells reachable from the door")]
    DisconnectedRegion { reached: usize, total: usize },
    #[error("region has no cells")]
    EmptyRegion,
    #[error("door {0} is not a cell of the region")]
    DoorNotInRegion(Cell),
    #[error("cell {0} is not in the region")]
    CellNotInRegion(Cell),
}

/// A lattice point `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Cell { x, y }
    }

    pub fn manhattan(self, other: Cell) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }

    pub fn is_adjacent(self, other: Cell) -> bool {
        self.manhattan(other) == 1
    }

    pub fn step(self, dir: Direction) -> Cell {
        self + dir.offset()
    }

    /// The four lattice neighbours in the fixed order Up, Right, Down, Left.
    pub fn lattice_neighbors(self) -> [Cell; 4] {
        Direction::ALL.map(|d| self.step(d))
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (self.x, self.y).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Cell {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (x, y) = <(i32, i32)>::deserialize(d)?;
        Ok(Cell::new(x, y))
    }
}

/// A displacement between two cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Offset {
    pub dx: i32,
    pub dy: i32,
}

impl Offset {
    pub const ZERO: Offset = Offset { dx: 0, dy: 0 };

    pub const fn new(dx: i32, dy: i32) -> Self {
        Offset { dx, dy }
    }

    pub fn norm1(self) -> u32 {
        self.dx.unsigned_abs() + self.dy.unsigned_abs()
    }
}

impl Add<Offset> for Cell {
    type Output = Cell;
    fn add(self, o: Offset) -> Cell {
        Cell::new(self.x + o.dx, self.y + o.dy)
    }
}

impl Sub<Cell> for Cell {
    type Output = Offset;
    fn sub(self, o: Cell) -> Offset {
        Offset::new(self.x - o.x, self.y - o.y)
    }
}

impl Add for Offset {
    type Output = Offset;
    fn add(self, o: Offset) -> Offset {
        Offset::new(self.dx + o.dx, self.dy + o.dy)
    }
}

impl Sub for Offset {
    type Output = Offset;
    fn sub(self, o: Offset) -> Offset {
        Offset::new(self.dx - o.dx, self.dy - o.dy)
    }
}

impl Neg for Offset {
    type Output = Offset;
    fn neg(self) -> Offset {
        Offset::new(-self.dx, -self.dy)
    }
}

/// Compass direction in the frame shared by all robots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Up,
    Right,
    Down,
    Left,
}

impl Direction {
    /// Clockwise order starting from `Up`.
    pub const ALL: [Direction; 4] = [Direction::Up, Direction::Right, Direction::Down, Direction::Left];

    pub fn index(self) -> u8 {
        match self {
            Direction::Up => 0,
            Direction::Right => 1,
            Direction::Down => 2,
            Direction::Left => 3,
        }
    }

    pub fn from_index(i: u8) -> Direction {
        Direction::ALL[(i % 4) as usize]
    }

    pub fn offset(self) -> Offset {
        match self {
            Direction::Up => Offset::new(0, 1),
            Direction::Right => Offset::new(1, 0),
            Direction::Down => Offset::new(0, -1),
            Direction::Left => Offset::new(-1, 0),
        }
    }

    pub fn from_offset(o: Offset) -> Option<Direction> {
        Direction::ALL.into_iter().find(|d| d.offset() == o)
    }

    /// Rotate clockwise by `quarter_turns` multiples of 90 degrees.
    pub fn rotate_cw(self, quarter_turns: u8) -> Direction {
        Direction::from_index(self.index() + quarter_turns % 4)
    }

    pub fn cw(self) -> Direction {
        self.rotate_cw(1)
    }

    pub fn ccw(self) -> Direction {
        self.rotate_cw(3)
    }

    pub fn opposite(self) -> Direction {
        self.rotate_cw(2)
    }

    pub fn letter(self) -> char {
        match self {
            Direction::Up => 'U',
            Direction::Right => 'R',
            Direction::Down => 'D',
            Direction::Left => 'L',
        }
    }

    pub fn arrow(self) -> char {
        match self {
            Direction::Up => '^',
            Direction::Right => '>',
            Direction::Down => 'v',
            Direction::Left => '<',
        }
    }
}

/// Inclusive bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bounds {
    pub min_x: i32,
    pub min_y: i32,
    pub max_x: i32,
    pub max_y: i32,
}

impl Bounds {
    pub fn width(&self) -> usize {
        (self.max_x - self.min_x + 1) as usize
    }

    pub fn height(&self) -> usize {
        (self.max_y - self.min_y + 1) as usize
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.x >= self.min_x && c.x <= self.max_x && c.y >= self.min_y && c.y <= self.max_y
    }

    /// Grow by `margin` cells on every side.
    pub fn padded(&self, margin: i32) -> Bounds {
        Bounds {
            min_x: self.min_x - margin,
            min_y: self.min_y - margin,
            max_x: self.max_x + margin,
            max_y: self.max_y + margin,
        }
    }

    pub fn index(&self, c: Cell) -> Option<usize> {
        self.contains(c)
            .then(|| (c.y - self.min_y) as usize * self.width() + (c.x - self.min_x) as usize)
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        let w = self.width();
        Cell::new(self.min_x + (index % w) as i32, self.min_y + (index / w) as i32)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.area()).map(move |i| self.cell_at(i))
    }

    fn around<'a>(cells: impl IntoIterator<Item = &'a Cell>) -> Option<Bounds> {
        let mut it = cells.into_iter();
        let first = it.next()?;
        let mut b = Bounds { min_x: first.x, min_y: first.y, max_x: first.x, max_y: first.y };
        for c in it {
            b.min_x = b.min_x.min(c.x);
            b.min_y = b.min_y.min(c.y);
            b.max_x = b.max_x.max(c.x);
            b.max_y = b.max_y.max(c.y);
        }
        Some(b)
    }
}

/// A connected grid environment with a designated door cell.
///
/// Immutable after construction. Everything outside `cells` is a wall.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    cells: Vec<Cell>,
    door: Cell,
    bounds: Bounds,
    mask: Vec<bool>,
}

impl Region {
    /// Build a region, validating that it is nonempty, contains the door and
    /// is 4-connected.
    pub fn new(cells: impl IntoIterator<Item = Cell>, door: Cell) -> Result<Region, GridError> {
        let set: BTreeSet<Cell> = cells.into_iter().collect();
        if set.is_empty() {
            return Err(GridError::EmptyRegion);
        }
        if !set.contains(&door) {
            return Err(GridError::DoorNotInRegion(door));
        }
        let bounds = Bounds::around(&set).expect("nonempty");
        let mut mask = vec![false; bounds.area()];
        for c in &set {
            mask[bounds.index(*c).expect("inside bounds")] = true;
        }
        let region = Region { cells: set.into_iter().collect(), door, bounds, mask };
        let reached = region.flood_from_door();
        if reached != region.cells.len() {
            return Err(GridError::DisconnectedRegion { reached, total: region.cells.len() });
        }
        Ok(region)
    }

    fn flood_from_door(&self) -> usize {
        let mut seen = vec![false; self.mask.len()];
        let mut queue = VecDeque::from([self.door]);
        seen[self.bounds.index(self.door).expect("door inside")] = true;
        let mut count = 0;
        while let Some(c) = queue.pop_front() {
            count += 1;
            for n in c.lattice_neighbors() {
                if let Some(i) = self.bounds.index(n) {
                    if self.mask[i] && !seen[i] {
                        seen[i] = true;
                        queue.push_back(n);
                    }
                }
            }
        }
        count
    }

    /// Cells sorted by `(x, y)`.
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn door(&self) -> Cell {
        self.door
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn contains(&self, c: Cell) -> bool {
        self.bounds.index(c).is_some_and(|i| self.mask[i])
    }

    pub fn is_wall(&self, c: Cell) -> bool {
        !self.contains(c)
    }

    /// Region cells at Manhattan distance 1 from `v`, ordered Up, Right, Down, Left.
    pub fn neighbors(&self, v: Cell) -> Result<Vec<Cell>, GridError> {
        if !self.contains(v) {
            return Err(GridError::CellNotInRegion(v));
        }
        Ok(v.lattice_neighbors().into_iter().filter(|n| self.contains(*n)).collect())
    }

    /// Same region with a different door.
    pub fn with_door(&self, door: Cell) -> Result<Region, GridError> {
        if !self.contains(door) {
            return Err(GridError::DoorNotInRegion(door));
        }
        Ok(Region { door, ..self.clone() })
    }

    /// Parse an ASCII map. Lines must all have the same length.
    pub fn from_ascii(text: &str) -> Result<Region, GridError> {
        let lines: Vec<&str> = text.strip_suffix('\n').unwrap_or(text).split('\n').collect();
        let lines: Vec<&str> = lines.into_iter().map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();
        if lines.is_empty() || lines[0].is_empty() {
            return Err(GridError::MalformedMap("empty map".into()));
        }
        let width = lines[0].chars().count();
        let height = lines.len() as i32;
        let mut cells = Vec::new();
        let mut doors = Vec::new();
        for (row, line) in lines.iter().enumerate() {
            if line.chars().count() != width {
                return Err(GridError::MalformedMap(format!(
                    "line {} has length {}, expected {}",
                    row + 1,
                    line.chars().count(),
                    width
                )));
            }
            let y = height - 1 - row as i32;
            for (x, ch) in line.chars().enumerate() {
                let c = Cell::new(x as i32, y);
                match ch {
                    '#' => {}
                    '.' => cells.push(c),
                    'S' => {
                        cells.push(c);
                        doors.push(c);
                    }
                    other => {
                        return Err(GridError::MalformedMap(format!(
                            "bad character {other:?} at line {}, column {}",
                            row + 1,
                            x + 1
                        )))
                    }
                }
            }
        }
        let door = match doors.as_slice() {
            [] => return Err(GridError::NoDoor),
            [d] => *d,
            many => return Err(GridError::MultipleDoors(many.len())),
        };
        Region::new(cells, door)
    }

    /// Serialize to the ASCII map format over the tight bounding box. The
    /// lower-left corner of the box maps to coordinates `(0, 0)` on reparse.
    pub fn to_ascii(&self) -> String {
        let b = self.bounds;
        let mut out = String::with_capacity((b.width() + 1) * b.height());
        for y in (b.min_y..=b.max_y).rev() {
            for x in b.min_x..=b.max_x {
                let c = Cell::new(x, y);
                out.push(if c == self.door {
                    'S'
                } else if self.contains(c) {
                    '.'
                } else {
                    '#'
                });
            }
            out.push('\n');
        }
        out
    }

    /// Translate so that the bounding box starts at `(0, 0)`.
    pub fn normalized(&self) -> Region {
        let shift = Offset::new(-self.bounds.min_x, -self.bounds.min_y);
        Region::new(self.cells.iter().map(|c| *c + shift), self.door + shift)
            .expect("translation preserves validity")
    }
}
