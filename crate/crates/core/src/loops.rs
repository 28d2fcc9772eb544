//! Loop decomposition of a realization.
//!
//! A trajectory runs vertically along a site line. At a cross it jumps to the
//! other endpoint of the edge and keeps its time direction; at a double bar it
//! jumps and reverses direction. Time is periodic. Loops are the orbits of this
//! motion.
//!
//! Tracing convention: sites are scanned in increasing order and, within a
//! site, the segment through time 0 comes first, then segments by increasing
//! time. Every still unvisited segment starts a new loop, traversed upward
//! (or downward with [`Orientation::Downward`]). Loop ids follow discovery
//! order. Exported pair classifications and lengths do not depend on the
//! convention.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::events::{EventList, Kind};
use crate::lattice::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub fn reversed(self) -> Direction {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
        }
    }
}

/// Direction in which newly discovered loops are traversed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Orientation {
    #[default]
    Upward,
    Downward,
}

/// A maximal vertical piece of a loop. For the piece crossing the time seam,
/// `end` exceeds `beta` (it is read modulo `beta`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub site: usize,
    pub start: f64,
    pub end: f64,
    pub direction: Direction,
}

impl Segment {
    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

/// Vertical length of one loop at one site, split by direction of motion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiteLength {
    pub site: usize,
    pub up: f64,
    pub down: f64,
}

impl SiteLength {
    pub fn total(&self) -> f64 {
        self.up + self.down
    }
}

/// Relation of the points `(x, 0)` and `(y, 0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairEvent {
    /// Same loop, same vertical direction.
    SameDirection,
    /// Same loop, opposite vertical directions.
    OppositeDirection,
    /// Different loops.
    Apart,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LoopDecomposition {
    beta: f64,
    n_sites: usize,
    segments: Vec<Segment>,
    segment_offsets: Vec<usize>,
    lengths: Vec<SiteLength>,
    length_offsets: Vec<usize>,
    origin: Vec<(usize, Direction)>,
}

impl LoopDecomposition {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_loops(&self) -> usize {
        self.segment_offsets.len().saturating_sub(1)
    }

    /// Segments of a loop in traversal order.
    pub fn segments(&self, id: usize) -> &[Segment] {
        &self.segments[self.segment_offsets[id]..self.segment_offsets[id + 1]]
    }

    /// Per-site lengths of a loop, sorted by site; sites the loop never
    /// visits are absent.
    pub fn site_lengths(&self, id: usize) -> &[SiteLength] {
        &self.lengths[self.length_offsets[id]..self.length_offsets[id + 1]]
    }

    /// `ell_x(gamma)`, zero when the loop avoids `site`.
    pub fn length_at(&self, id: usize, site: usize) -> f64 {
        self.site_lengths(id)
            .iter()
            .find(|l| l.site == site)
            .map_or(0.0, SiteLength::total)
    }

    pub fn loop_length(&self, id: usize) -> f64 {
        self.site_lengths(id).iter().map(SiteLength::total).sum()
    }

    pub fn total_length(&self) -> f64 {
        self.lengths.iter().map(SiteLength::total).sum()
    }

    /// Loop through `(site, 0)` and its direction there.
    pub fn origin(&self, site: usize) -> (usize, Direction) {
        self.origin[site]
    }

    /// Length of the loop through `(site, 0)`.
    pub fn length_through(&self, site: usize) -> f64 {
        self.loop_length(self.origin[site].0)
    }

    pub fn classify_pair(&self, x: usize, y: usize) -> Result<PairEvent> {
        if x == y {
            return Err(Error::SameSite(x));
        }
        for s in [x, y] {
            if s >= self.n_sites {
                return Err(invalid("site", format!("{s} out of range for {} sites", self.n_sites)));
            }
        }
        Ok(self.pair_event(x, y))
    }

    pub(crate) fn pair_event(&self, x: usize, y: usize) -> PairEvent {
        let (lx, dx) = self.origin[x];
        let (ly, dy) = self.origin[y];
        if lx != ly {
            PairEvent::Apart
        } else if dx == dy {
            PairEvent::SameDirection
        } else {
            PairEvent::OppositeDirection
        }
    }

    pub fn dump(&self) -> LoopDump {
        LoopDump {
            beta: self.beta,
            n_loops: self.n_loops(),
            loops: (0..self.n_loops())
                .map(|id| LoopRecord {
                    id,
                    segments: self.segments(id).to_vec(),
                    lengths: self.site_lengths(id).to_vec(),
                })
                .collect(),
            origin: self.origin.clone(),
        }
    }
}

/// JSON-friendly view of a decomposition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopDump {
    pub beta: f64,
    pub n_loops: usize,
    pub loops: Vec<LoopRecord>,
    pub origin: Vec<(usize, Direction)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopRecord {
    pub id: usize,
    pub segments: Vec<Segment>,
    pub lengths: Vec<SiteLength>,
}

/// Reusable buffers for loop tracing. One tracer per worker avoids
/// allocations in sampling loops.
///
/// Segment `j` of a site with `k` events runs from its `j`-th event to the
/// next one; segment `k - 1` wraps through time `beta`. A traversal state is
/// `2 * segment + d` with `d = 1` when moving down.
#[derive(Clone, Debug, Default)]
pub struct LoopTracer {
    slot_offsets: Vec<usize>,
    slots: Vec<usize>,
    fill: Vec<usize>,
    event_pos: Vec<[usize; 2]>,
    seg_offsets: Vec<usize>,
    seg_site: Vec<usize>,
    next: Vec<usize>,
    visited: Vec<bool>,
    up: Vec<f64>,
    down: Vec<f64>,
    touched: Vec<usize>,
}

fn state(segment: usize, dir: Direction) -> usize {
    2 * segment + usize::from(dir == Direction::Down)
}

impl LoopTracer {
    pub fn new() -> LoopTracer {
        LoopTracer::default()
    }

    /// Traces `omega` into `out`, reusing its storage. `omega` must be valid
    /// for `graph`.
    pub fn trace_into(
        &mut self,
        graph: &Graph,
        omega: &EventList,
        orientation: Orientation,
        out: &mut LoopDecomposition,
    ) {
        let n = graph.n_sites();
        self.prepare(graph, omega);
        self.up.clear();
        self.up.resize(n, 0.0);
        self.down.clear();
        self.down.resize(n, 0.0);
        self.touched.clear();

        out.beta = omega.beta();
        out.n_sites = n;
        out.segments.clear();
        out.segment_offsets.clear();
        out.segment_offsets.push(0);
        out.lengths.clear();
        out.length_offsets.clear();
        out.length_offsets.push(0);
        out.origin.clear();
        out.origin.resize(n, (usize::MAX, Direction::Up));

        let start_dir = match orientation {
            Orientation::Upward => Direction::Up,
            Orientation::Downward => Direction::Down,
        };
        for x in 0..n {
            let k = self.events_at(x);
            let seam = k.saturating_sub(1);
            for j in std::iter::once(seam).chain(0..seam) {
                let g = self.seg_offsets[x] + j;
                if !self.visited[g] {
                    self.trace_loop(omega, state(g, start_dir), out);
                }
            }
        }
        debug_assert!(self.visited.iter().all(|&v| v));
        debug_assert!(out.origin.iter().all(|o| o.0 != usize::MAX));
    }

    /// `|L(omega)|` without recording segments or lengths.
    pub fn count_loops(&mut self, graph: &Graph, omega: &EventList) -> usize {
        self.prepare(graph, omega);
        let mut count = 0;
        for g in 0..self.seg_site.len() {
            if self.visited[g] {
                continue;
            }
            count += 1;
            let s0 = 2 * g;
            let mut s = s0;
            loop {
                self.visited[s >> 1] = true;
                s = self.next[s];
                if s == s0 {
                    break;
                }
            }
        }
        count
    }

    /// `sum_x h_x l_x(gamma)` for every loop, or `sum_x h_x (l+_x - l-_x)`
    /// when `signed`, without building the decomposition. Loops come in no
    /// particular order and signed sums are fixed only up to a sign per loop.
    pub fn loop_phases(&mut self, graph: &Graph, omega: &EventList, h: &[f64], signed: bool, out: &mut Vec<f64>) {
        self.prepare(graph, omega);
        out.clear();
        let beta = omega.beta();
        for g0 in 0..self.seg_site.len() {
            if self.visited[g0] {
                continue;
            }
            let s0 = 2 * g0;
            let mut s = s0;
            let mut phi = 0.0;
            loop {
                let g = s >> 1;
                self.visited[g] = true;
                let x = self.seg_site[g];
                let j = g - self.seg_offsets[x];
                let k = self.events_at(x);
                let len = if k == 0 {
                    beta
                } else if j + 1 == k {
                    self.slot_time(omega, x, 0) + beta - self.slot_time(omega, x, j)
                } else {
                    self.slot_time(omega, x, j + 1) - self.slot_time(omega, x, j)
                };
                if signed && s & 1 == 1 {
                    phi -= h[x] * len;
                } else {
                    phi += h[x] * len;
                }
                s = self.next[s];
                if s == s0 {
                    break;
                }
            }
            out.push(phi);
        }
    }

    /// Per-site event slots in time order and the successor of every
    /// traversal state.
    fn prepare(&mut self, graph: &Graph, omega: &EventList) {
        let n = graph.n_sites();
        let events = omega.events();
        self.slot_offsets.clear();
        self.slot_offsets.resize(n + 1, 0);
        for e in events {
            let (a, b) = graph.edge(e.edge);
            self.slot_offsets[a + 1] += 1;
            self.slot_offsets[b + 1] += 1;
        }
        for x in 0..n {
            self.slot_offsets[x + 1] += self.slot_offsets[x];
        }
        self.slots.clear();
        self.slots.resize(2 * events.len(), 0);
        self.fill.clear();
        self.fill.extend_from_slice(&self.slot_offsets[..n]);
        self.event_pos.clear();
        for (i, e) in events.iter().enumerate() {
            let (a, b) = graph.edge(e.edge);
            let pa = self.fill[a] - self.slot_offsets[a];
            let pb = self.fill[b] - self.slot_offsets[b];
            self.slots[self.fill[a]] = i;
            self.slots[self.fill[b]] = i;
            self.fill[a] += 1;
            self.fill[b] += 1;
            self.event_pos.push([pa, pb]);
        }

        // a site without events still carries one full-circle segment
        self.seg_offsets.clear();
        self.seg_offsets.push(0);
        self.seg_site.clear();
        for x in 0..n {
            let k = self.events_at(x).max(1);
            self.seg_site.extend(std::iter::repeat_n(x, k));
            self.seg_offsets.push(self.seg_site.len());
        }
        let n_seg = self.seg_site.len();
        self.visited.clear();
        self.visited.resize(n_seg, false);
        self.next.clear();
        self.next.resize(2 * n_seg, 0);
        for x in 0..n {
            if self.events_at(x) == 0 {
                let g = self.seg_offsets[x];
                self.next[2 * g] = 2 * g;
                self.next[2 * g + 1] = 2 * g + 1;
            }
        }
        for (e, pos) in events.iter().zip(&self.event_pos) {
            let (a, b) = graph.edge(e.edge);
            let ends = [(a, pos[0]), (b, pos[1])];
            for (from, to) in [(ends[0], ends[1]), (ends[1], ends[0])] {
                let (x, p) = from;
                let (y, q) = to;
                let (kx, ky) = (self.events_at(x), self.events_at(y));
                let (gx, gy) = (self.seg_offsets[x], self.seg_offsets[y]);
                // arriving at the event while moving up or down
                let arrive_up = state(gx + if p == 0 { kx - 1 } else { p - 1 }, Direction::Up);
                let arrive_down = state(gx + p, Direction::Down);
                let leave_up = state(gy + q, Direction::Up);
                let leave_down = state(gy + if q == 0 { ky - 1 } else { q - 1 }, Direction::Down);
                let (after_up, after_down) = match e.kind {
                    Kind::Cross => (leave_up, leave_down),
                    Kind::Bar => (leave_down, leave_up),
                };
                self.next[arrive_up] = after_up;
                self.next[arrive_down] = after_down;
            }
        }
    }

    fn events_at(&self, site: usize) -> usize {
        self.slot_offsets[site + 1] - self.slot_offsets[site]
    }

    fn slot_time(&self, omega: &EventList, site: usize, slot: usize) -> f64 {
        omega.events()[self.slots[self.slot_offsets[site] + slot]].time
    }

    fn trace_loop(&mut self, omega: &EventList, s0: usize, out: &mut LoopDecomposition) {
        let id = out.n_loops();
        let beta = omega.beta();
        let mut s = s0;
        loop {
            let g = s >> 1;
            debug_assert!(!self.visited[g], "segment visited twice");
            self.visited[g] = true;
            let x = self.seg_site[g];
            let j = g - self.seg_offsets[x];
            let k = self.events_at(x);
            let dir = if s & 1 == 0 { Direction::Up } else { Direction::Down };

            let (start, end) = if k == 0 {
                (0.0, beta)
            } else if j + 1 == k {
                (self.slot_time(omega, x, j), self.slot_time(omega, x, 0) + beta)
            } else {
                (self.slot_time(omega, x, j), self.slot_time(omega, x, j + 1))
            };
            out.segments.push(Segment {
                site: x,
                start,
                end,
                direction: dir,
            });
            if self.up[x] == 0.0 && self.down[x] == 0.0 {
                self.touched.push(x);
            }
            match dir {
                Direction::Up => self.up[x] += end - start,
                Direction::Down => self.down[x] += end - start,
            }
            if j + 1 == k.max(1) {
                out.origin[x] = (id, dir);
            }
            s = self.next[s];
            if s == s0 {
                break;
            }
        }
        self.touched.sort_unstable();
        for &x in &self.touched {
            out.lengths.push(SiteLength {
                site: x,
                up: self.up[x],
                down: self.down[x],
            });
            self.up[x] = 0.0;
            self.down[x] = 0.0;
        }
        self.touched.clear();
        out.segment_offsets.push(out.segments.len());
        out.length_offsets.push(out.lengths.len());
    }
}

/// Loop decomposition of `omega` under the default (upward) convention.
pub fn build_loops(graph: &Graph, omega: &EventList) -> Result<LoopDecomposition> {
    build_loops_oriented(graph, omega, Orientation::Upward)
}

pub fn build_loops_oriented(
    graph: &Graph,
    omega: &EventList,
    orientation: Orientation,
) -> Result<LoopDecomposition> {
    omega.validate(graph)?;
    let mut out = LoopDecomposition::default();
    LoopTracer::new().trace_into(graph, omega, orientation, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::Event;

    fn list(beta: f64, items: &[(usize, f64, Kind)]) -> EventList {
        EventList::from_events(
            beta,
            0.5,
            items
                .iter()
                .map(|&(edge, time, kind)| Event { edge, time, kind })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn empty_realization_gives_one_loop_per_site() {
        let g = Graph::chain(4, false).unwrap();
        let dec = build_loops(&g, &list(1.5, &[])).unwrap();
        assert_eq!(dec.n_loops(), 4);
        for x in 0..4 {
            let (id, dir) = dec.origin(x);
            assert_eq!(dir, Direction::Up);
            assert_eq!(dec.site_lengths(id), &[SiteLength { site: x, up: 1.5, down: 0.0 }]);
        }
        assert_eq!(dec.classify_pair(0, 3).unwrap(), PairEvent::Apart);
    }

    #[test]
    fn single_cross_joins_with_same_direction() {
        let g = Graph::chain(2, false).unwrap();
        let dec = build_loops(&g, &list(1.0, &[(0, 0.4, Kind::Cross)])).unwrap();
        assert_eq!(dec.n_loops(), 1);
        assert!((dec.loop_length(0) - 2.0).abs() < 1e-12);
        assert_eq!(dec.classify_pair(0, 1).unwrap(), PairEvent::SameDirection);
        let l = dec.site_lengths(0);
        assert_eq!(l.len(), 2);
        assert!(l.iter().all(|s| s.down == 0.0 && (s.up - 1.0).abs() < 1e-12));
    }

    #[test]
    fn single_bar_joins_with_opposite_directions() {
        let g = Graph::chain(2, false).unwrap();
        let dec = build_loops(&g, &list(1.0, &[(0, 0.4, Kind::Bar)])).unwrap();
        assert_eq!(dec.n_loops(), 1);
        assert!((dec.loop_length(0) - 2.0).abs() < 1e-12);
        assert_eq!(dec.classify_pair(0, 1).unwrap(), PairEvent::OppositeDirection);
        assert_eq!(dec.classify_pair(1, 0).unwrap(), PairEvent::OppositeDirection);
    }

    #[test]
    fn three_bars_bound_three_loops() {
        let g = Graph::chain(2, false).unwrap();
        let omega = list(1.0, &[(0, 0.2, Kind::Bar), (0, 0.5, Kind::Bar), (0, 0.9, Kind::Bar)]);
        let dec = build_loops(&g, &omega).unwrap();
        assert_eq!(dec.n_loops(), 3);
        let mut lens: Vec<f64> = (0..3).map(|i| dec.loop_length(i)).collect();
        lens.sort_by(f64::total_cmp);
        for (l, want) in lens.iter().zip([0.6, 0.6, 0.8]) {
            assert!((l - want).abs() < 1e-12, "{lens:?}");
        }
    }

    #[test]
    fn two_site_loop_counts_match_hand_enumeration() {
        let g = Graph::chain(2, false).unwrap();
        for n in 0..=6usize {
            let times: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / (n as f64 + 1.0)).collect();
            let crosses: Vec<_> = times.iter().map(|&t| (0, t, Kind::Cross)).collect();
            let bars: Vec<_> = times.iter().map(|&t| (0, t, Kind::Bar)).collect();
            let c = build_loops(&g, &list(1.0, &crosses)).unwrap().n_loops();
            let b = build_loops(&g, &list(1.0, &bars)).unwrap().n_loops();
            assert_eq!(c, if n % 2 == 0 { 2 } else { 1 }, "crosses n={n}");
            assert_eq!(b, if n == 0 { 2 } else { n }, "bars n={n}");
        }
    }

    #[test]
    fn cross_then_bar_stays_a_single_loop() {
        // inserting a bar on a loop that already joins both points can leave
        // the loop count unchanged
        let g = Graph::chain(2, false).unwrap();
        let one = list(1.0, &[(0, 0.3, Kind::Cross)]);
        let two = list(1.0, &[(0, 0.3, Kind::Cross), (0, 0.6, Kind::Bar)]);
        assert_eq!(build_loops(&g, &one).unwrap().n_loops(), 1);
        let dec = build_loops(&g, &two).unwrap();
        assert_eq!(dec.n_loops(), 1);
        let l = dec.site_lengths(0);
        assert!(l.iter().all(|s| s.up > 0.0 && s.down > 0.0));
    }

    #[test]
    fn parallel_edges_are_distinct() {
        let g = Graph::chain(2, true).unwrap();
        assert_eq!(g.n_edges(), 2);
        let dec = build_loops(&g, &list(1.0, &[(0, 0.2, Kind::Cross), (1, 0.7, Kind::Cross)])).unwrap();
        assert_eq!(dec.n_loops(), 2);
    }

    #[test]
    fn reversed_orientation_flips_directions_only() {
        let g = Graph::chain(3, true).unwrap();
        let omega = list(
            2.0,
            &[(0, 0.1, Kind::Bar), (1, 0.5, Kind::Cross), (2, 0.9, Kind::Bar), (0, 1.4, Kind::Cross)],
        );
        let up = build_loops_oriented(&g, &omega, Orientation::Upward).unwrap();
        let down = build_loops_oriented(&g, &omega, Orientation::Downward).unwrap();
        assert_eq!(up.n_loops(), down.n_loops());
        for x in 0..3 {
            assert_eq!(up.origin(x).1, down.origin(x).1.reversed());
            for y in 0..3 {
                if x != y {
                    assert_eq!(up.classify_pair(x, y), down.classify_pair(x, y));
                }
            }
        }
    }

    #[test]
    fn classify_pair_errors() {
        let g = Graph::chain(2, false).unwrap();
        let dec = build_loops(&g, &list(1.0, &[])).unwrap();
        assert_eq!(dec.classify_pair(1, 1), Err(Error::SameSite(1)));
        assert!(dec.classify_pair(0, 2).is_err());
    }

    #[test]
    fn rejects_events_on_unknown_edges() {
        let g = Graph::chain(2, false).unwrap();
        assert!(build_loops(&g, &list(1.0, &[(1, 0.5, Kind::Cross)])).is_err());
    }

    #[test]
    fn dump_serializes() {
        let g = Graph::chain(2, false).unwrap();
        let dec = build_loops(&g, &list(1.0, &[(0, 0.5, Kind::Bar)])).unwrap();
        let json = serde_json::to_value(dec.dump()).unwrap();
        assert_eq!(json["n_loops"], 1);
        assert_eq!(json["loops"][0]["segments"].as_array().unwrap().len(), 2);
    }
}
