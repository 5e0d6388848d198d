//! Unit-disk graphs: geometry, random generation, and the handful of graph
//! primitives the heuristic needs (BFS spheres, induced subgraphs, diameter).

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};

/// Two vertices are adjacent iff their distance is at most this.
pub const UNIT_DISTANCE: f64 = 1.0;

/// Consecutive rejections tolerated while placing a single point.
pub const REJECTION_BUDGET: usize = 10_000;

pub type Point = [f64; 2];

/// Parameters a graph was sampled with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphMeta {
    pub density: f64,
    pub exclusion: f64,
    pub seed: u64,
}

/// Length-n 0/1 assignment over the vertices of a graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Bitstring {
    bits: Vec<bool>,
}

impl Bitstring {
    pub fn zeros(n: usize) -> Self {
        Bitstring {
            bits: vec![false; n],
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Bitstring { bits }
    }

    pub fn from_indices(n: usize, set: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::zeros(n);
        for i in set {
            s.bits[i] = true;
        }
        s
    }

    /// Unpack the low `n` bits of `word` (bit i is vertex i).
    pub fn from_packed(n: usize, word: u64) -> Self {
        assert!(n <= 64, "packed bitstrings hold at most 64 vertices");
        Bitstring {
            bits: (0..n).map(|i| word >> i & 1 == 1).collect(),
        }
    }

    pub fn to_packed(&self) -> Option<u64> {
        if self.bits.len() > 64 {
            return None;
        }
        Some(
            self.bits
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &b)| acc | (b as u64) << i),
        )
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits[i] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn hamming_weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Indices of the set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }
}

/// Hex rendering of a packed state, most significant nibble first.
pub fn packed_hex(word: u64) -> String {
    format!("{word:x}")
}

/// Result of [`UnitDiskGraph::diameter`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Diameter {
    Finite(usize),
    Disconnected,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitDiskGraph {
    points: Vec<Point>,
    adjacency: Vec<Vec<usize>>,
    meta: Option<GraphMeta>,
}

/// Uniform cell grid used for neighbour queries.
struct CellGrid {
    origin: Point,
    cell: f64,
    cols: usize,
    rows: usize,
    cells: Vec<Vec<usize>>,
}

impl CellGrid {
    fn new(origin: Point, extent: Point, cell: f64) -> Self {
        let cols = ((extent[0] / cell).floor() as usize + 1).max(1);
        let rows = ((extent[1] / cell).floor() as usize + 1).max(1);
        CellGrid {
            origin,
            cell,
            cols,
            rows,
            cells: vec![Vec::new(); cols * rows],
        }
    }

    fn coords(&self, p: Point) -> (usize, usize) {
        let cx = ((p[0] - self.origin[0]) / self.cell).floor().max(0.0) as usize;
        let cy = ((p[1] - self.origin[1]) / self.cell).floor().max(0.0) as usize;
        (cx.min(self.cols - 1), cy.min(self.rows - 1))
    }

    fn insert(&mut self, p: Point, id: usize) {
        let (cx, cy) = self.coords(p);
        self.cells[cy * self.cols + cx].push(id);
    }

    /// Ids stored in the 3x3 block of cells around `p`.
    fn around(&self, p: Point) -> impl Iterator<Item = usize> + '_ {
        let (cx, cy) = self.coords(p);
        let xs = cx.saturating_sub(1)..=(cx + 1).min(self.cols - 1);
        let ys = cy.saturating_sub(1)..=(cy + 1).min(self.rows - 1);
        ys.flat_map(move |y| xs.clone().map(move |x| y * self.cols + x))
            .flat_map(move |c| self.cells[c].iter().copied())
    }
}

fn dist2(a: Point, b: Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

impl UnitDiskGraph {
    /// Build the unit-disk graph on the given points.
    pub fn from_points(points: Vec<Point>) -> Self {
        Self::with_meta(points, None)
    }

    fn with_meta(points: Vec<Point>, meta: Option<GraphMeta>) -> Self {
        let n = points.len();
        let mut adjacency = vec![Vec::new(); n];
        if n > 0 {
            let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
            for p in &points {
                for k in 0..2 {
                    lo[k] = lo[k].min(p[k]);
                    hi[k] = hi[k].max(p[k]);
                }
            }
            let mut grid = CellGrid::new(lo, [hi[0] - lo[0], hi[1] - lo[1]], UNIT_DISTANCE);
            for (i, &p) in points.iter().enumerate() {
                grid.insert(p, i);
            }
            let limit = UNIT_DISTANCE * UNIT_DISTANCE;
            for (i, &p) in points.iter().enumerate() {
                for j in grid.around(p) {
                    if j != i && dist2(p, points[j]) <= limit {
                        adjacency[i].push(j);
                    }
                }
                adjacency[i].sort_unstable();
            }
        }
        UnitDiskGraph {
            points,
            adjacency,
            meta,
        }
    }

    /// Sample `n` points uniformly in `[0, sqrt(n/density)]^2`, rejecting any
    /// point that lands closer than `exclusion` to one already placed.
    pub fn generate(n: usize, density: f64, exclusion: f64, seed: u64) -> Result<Self> {
        if n == 0 {
            return usage("graph generation needs n >= 1");
        }
        if !(density > 0.0 && density.is_finite()) {
            return usage("density must be positive");
        }
        if !(0.0..1.0).contains(&exclusion) {
            return usage("exclusion radius must lie in [0, 1)");
        }
        let side = (n as f64 / density).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut grid = CellGrid::new([0.0, 0.0], [side, side], UNIT_DISTANCE);
        let mut points: Vec<Point> = Vec::with_capacity(n);
        let excl2 = exclusion * exclusion;
        while points.len() < n {
            let mut rejections = 0;
            loop {
                let p = [rng.gen_range(0.0..=side), rng.gen_range(0.0..=side)];
                let clash = exclusion > 0.0 && grid.around(p).any(|j| dist2(p, points[j]) < excl2);
                if !clash {
                    grid.insert(p, points.len());
                    points.push(p);
                    break;
                }
                rejections += 1;
                if rejections >= REJECTION_BUDGET {
                    return Err(Error::GenerationFailed {
                        n,
                        placed: points.len(),
                        rejections,
                    });
                }
            }
        }
        Ok(Self::with_meta(
            points,
            Some(GraphMeta {
                density,
                exclusion,
                seed,
            }),
        ))
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn meta(&self) -> Option<&GraphMeta> {
        self.meta.as_ref()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn n_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as `(i, j)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, ns)| ns.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        dist2(self.points[i], self.points[j]).sqrt()
    }

    /// Vertices within `d` hops of `u` in the subgraph induced by `active`,
    /// sorted ascending.
    pub fn bfs_sphere(&self, u: usize, d: usize, active: &[bool]) -> Result<Vec<usize>> {
        if active.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                got: active.len(),
            });
        }
        if u >= self.n() || !active[u] {
            return usage(format!("BFS root {u} is not an active vertex"));
        }
        let mut dist = vec![usize::MAX; self.n()];
        let mut out = Vec::new();
        self.bfs_into(u, d, active, &mut dist, &mut out);
        out.sort_unstable();
        Ok(out)
    }

    /// BFS core with caller-owned scratch; `dist` must be all `usize::MAX` on
    /// entry and is restored before returning. Visit order is appended to `out`.
    pub(crate) fn bfs_into(
        &self,
        u: usize,
        d: usize,
        active: &[bool],
        dist: &mut [usize],
        out: &mut Vec<usize>,
    ) {
        let start = out.len();
        dist[u] = 0;
        out.push(u);
        let mut head = start;
        while head < out.len() {
            let v = out[head];
            head += 1;
            if dist[v] == d {
                continue;
            }
            for &w in &self.adjacency[v] {
                if active[w] && dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    out.push(w);
                }
            }
        }
        for &v in &out[start..] {
            dist[v] = usize::MAX;
        }
    }

    /// Subgraph induced by `vertices`, plus the map from new ids to old ids.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> (UnitDiskGraph, Vec<usize>) {
        let mut index = vec![usize::MAX; self.n()];
        for (k, &v) in vertices.iter().enumerate() {
            index[v] = k;
        }
        let adjacency = vertices
            .iter()
            .map(|&v| {
                let mut ns: Vec<usize> = self.adjacency[v]
                    .iter()
                    .map(|&w| index[w])
                    .filter(|&i| i != usize::MAX)
                    .collect();
                ns.sort_unstable();
                ns
            })
            .collect();
        let sub = UnitDiskGraph {
            points: vertices.iter().map(|&v| self.points[v]).collect(),
            adjacency,
            meta: None,
        };
        (sub, vertices.to_vec())
    }

    fn hop_distances(&self, src: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n()];
        let mut queue = VecDeque::from([src]);
        dist[src] = 0;
        while let Some(v) = queue.pop_front() {
            for &w in &self.adjacency[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Longest shortest path. The empty graph has diameter 0.
    pub fn diameter(&self) -> Diameter {
        let mut best = 0;
        for v in 0..self.n() {
            let dist = self.hop_distances(v);
            for &x in &dist {
                if x == usize::MAX {
                    return Diameter::Disconnected;
                }
                best = best.max(x);
            }
        }
        Diameter::Finite(best)
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n()];
        let mut out = Vec::new();
        for s in 0..self.n() {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut head = 0;
            while head < comp.len() {
                let v = comp[head];
                head += 1;
                for &w in &self.adjacency[v] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Largest diameter over the connected components.
    pub fn max_component_diameter(&self) -> usize {
        self.components()
            .iter()
            .map(|c| match self.induced_subgraph(c).0.diameter() {
                Diameter::Finite(d) => d,
                Diameter::Disconnected => unreachable!("component is connected"),
            })
            .max()
            .unwrap_or(0)
    }

    /// Serialise in the line-oriented `udg v1` text format. Edges are implied.
    pub fn to_text(&self) -> String {
        let (density, exclusion, seed) = self
            .meta
            .map(|m| (m.density, m.exclusion, m.seed))
            .unwrap_or((0.0, 0.0, 0));
        let mut out = format!(
            "udg v1 {} {} {} {}\n",
            self.n(),
            fmt17(density),
            fmt17(exclusion),
            seed
        );
        for p in &self.points {
            let _ = writeln!(out, "{} {}", fmt17(p[0]), fmt17(p[1]));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::read(text.as_bytes())
    }

    pub fn read(reader: impl BufRead) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let perr = |line: usize, msg: &str| Error::Parse {
            line: line + 1,
            msg: msg.to_string(),
        };
        let (_, header) = lines.next().ok_or_else(|| perr(0, "empty graph file"))?;
        let header = header?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 6 || fields[0] != "udg" || fields[1] != "v1" {
            return Err(perr(0, "expected header `udg v1 <n> <nu> <r> <seed>`"));
        }
        let n: usize = fields[2].parse().map_err(|_| perr(0, "bad vertex count"))?;
        let density: f64 = fields[3].parse().map_err(|_| perr(0, "bad density"))?;
        let exclusion: f64 = fields[4]
            .parse()
            .map_err(|_| perr(0, "bad exclusion radius"))?;
        let seed: u64 = fields[5].parse().map_err(|_| perr(0, "bad seed"))?;
        let mut points = Vec::with_capacity(n);
        for (ln, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace().map(str::parse::<f64>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(x)), Some(Ok(y)), None) => points.push([x, y]),
                _ => return Err(perr(ln, "expected `<x> <y>`")),
            }
        }
        if points.len() != n {
            return Err(perr(
                0,
                &format!("header says {n} points, found {}", points.len()),
            ));
        }
        let meta = (density > 0.0).then_some(GraphMeta {
            density,
            exclusion,
            seed,
        });
        Ok(Self::with_meta(points, meta))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read(std::io::BufReader::new(file))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(self.to_text().as_bytes())?;
        Ok(())
    }
}

/// Decimal float with 17 significant digits.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}
