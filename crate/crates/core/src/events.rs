//! Realizations of the marked Poisson point process on `edges x [0, beta)`.
//!
//! Each edge carries a Poisson process of total intensity 1; every point is a
//! cross with probability `u` and a double bar otherwise. Time is a circle:
//! `beta` is identified with `0`, so stored times live in `[0, beta)`.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// Swaps the two site lines and keeps the time direction.
    Cross,
    /// Double bar: swaps the site lines and reverses the time direction.
    Bar,
}

impl Kind {
    pub fn flipped(self) -> Kind {
        match self {
            Kind::Cross => Kind::Bar,
            Kind::Bar => Kind::Cross,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub edge: usize,
    pub time: f64,
    pub kind: Kind,
}

/// A realization `omega`, sorted by strictly increasing time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventList {
    beta: f64,
    u: f64,
    items: Vec<Event>,
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(invalid("beta", format!("must be positive and finite, got {beta}")))
    }
}

pub(crate) fn check_u(u: f64) -> Result<()> {
    if (0.0..=1.0).contains(&u) {
        Ok(())
    } else {
        Err(invalid("u", format!("must lie in [0, 1], got {u}")))
    }
}

impl EventList {
    pub fn empty(beta: f64, u: f64) -> Result<EventList> {
        check_beta(beta)?;
        check_u(u)?;
        Ok(EventList {
            beta,
            u,
            items: Vec::new(),
        })
    }

    /// Builds a list from arbitrary events, sorting them by time. Fails on
    /// repeated times or times outside `[0, beta)`.
    pub fn from_events(beta: f64, u: f64, mut items: Vec<Event>) -> Result<EventList> {
        check_beta(beta)?;
        check_u(u)?;
        items.sort_by(|a, b| a.time.total_cmp(&b.time));
        let list = EventList { beta, u, items };
        list.check_times()?;
        Ok(list)
    }

    fn check_times(&self) -> Result<()> {
        for e in &self.items {
            if !(0.0..self.beta).contains(&e.time) {
                return Err(invalid(
                    "time",
                    format!("{} outside [0, {})", e.time, self.beta),
                ));
            }
        }
        if let Some(w) = self.items.windows(2).find(|w| w[0].time >= w[1].time) {
            return Err(Error::DuplicateTime(w[1].time));
        }
        Ok(())
    }

    /// Checks sort order, the time range and that every edge index exists.
    pub fn validate(&self, graph: &Graph) -> Result<()> {
        check_beta(self.beta)?;
        check_u(self.u)?;
        self.check_times()?;
        if let Some(e) = self.items.iter().find(|e| e.edge >= graph.n_edges()) {
            return Err(invalid(
                "edge",
                format!("{} out of range for {} edges", e.edge, graph.n_edges()),
            ));
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn events(&self) -> &[Event] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn n_crosses(&self) -> usize {
        self.items.iter().filter(|e| e.kind == Kind::Cross).count()
    }

    /// Position at which an event at `time` would be inserted.
    fn slot(&self, time: f64) -> Result<usize> {
        if !(0.0..self.beta).contains(&time) {
            return Err(invalid("time", format!("{time} outside [0, {})", self.beta)));
        }
        match self.items.binary_search_by(|e| e.time.total_cmp(&time)) {
            Ok(_) => Err(Error::DuplicateTime(time)),
            Err(pos) => Ok(pos),
        }
    }

    /// Inserts in place and returns the index of the new event.
    pub fn insert(&mut self, edge: usize, time: f64, kind: Kind) -> Result<usize> {
        let pos = self.slot(time)?;
        self.items.insert(pos, Event { edge, time, kind });
        Ok(pos)
    }

    pub fn remove(&mut self, index: usize) -> Result<Event> {
        if index >= self.items.len() {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.items.len(),
            });
        }
        Ok(self.items.remove(index))
    }

    pub fn with_inserted(&self, edge: usize, time: f64, kind: Kind) -> Result<EventList> {
        let mut next = self.clone();
        next.insert(edge, time, kind)?;
        Ok(next)
    }

    pub fn with_removed(&self, index: usize) -> Result<EventList> {
        let mut next = self.clone();
        next.remove(index)?;
        Ok(next)
    }

    pub(crate) fn set_kind(&mut self, index: usize, kind: Kind) {
        self.items[index].kind = kind;
    }

    /// Draws a fresh realization, reusing this list's allocation.
    pub fn resample<R: Rng + ?Sized>(&mut self, graph: &Graph, rng: &mut R) {
        self.items.clear();
        let mean = graph.n_edges() as f64 * self.beta;
        if mean <= 0.0 {
            return;
        }
        let n = match Poisson::new(mean) {
            Ok(p) => p.sample(rng) as usize,
            Err(_) => 0,
        };
        let n_edges = graph.n_edges();
        for _ in 0..n {
            let edge = rng.random_range(0..n_edges);
            let time = self.random_time(rng);
            let kind = if rng.random::<f64>() < self.u {
                Kind::Cross
            } else {
                Kind::Bar
            };
            self.items.push(Event { edge, time, kind });
        }
        self.items.sort_unstable_by(|a, b| a.time.total_cmp(&b.time));
        // exact ties have probability zero; redraw the later point
        while let Some(i) = (1..self.items.len()).find(|&i| self.items[i - 1].time == self.items[i].time) {
            self.items[i].time = self.random_time(rng);
            self.items.sort_unstable_by(|a, b| a.time.total_cmp(&b.time));
        }
    }

    fn random_time<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // `random::<f64>()` lies in [0, 1); guard against rounding up to beta
        let t = rng.random::<f64>() * self.beta;
        if t < self.beta {
            t
        } else {
            0.0
        }
    }
}

/// Samples a realization of the Poisson process on `graph x [0, beta)`.
pub fn sample_events<R: Rng + ?Sized>(graph: &Graph, beta: f64, u: f64, rng: &mut R) -> Result<EventList> {
    let mut list = EventList::empty(beta, u)?;
    list.resample(graph, rng);
    Ok(list)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn chain2() -> Graph {
        Graph::chain(2, false).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = chain2();
        let mut rng = stream(1, 0);
        assert!(sample_events(&g, 0.0, 0.5, &mut rng).is_err());
        assert!(sample_events(&g, -1.0, 0.5, &mut rng).is_err());
        assert!(sample_events(&g, 1.0, 1.5, &mut rng).is_err());
        assert!(sample_events(&g, 1.0, -0.1, &mut rng).is_err());
    }

    #[test]
    fn u_one_gives_only_crosses() {
        let g = Graph::torus(&[3, 3]).unwrap();
        let mut rng = stream(2, 0);
        let omega = sample_events(&g, 3.0, 1.0, &mut rng).unwrap();
        assert!(!omega.is_empty());
        assert!(omega.events().iter().all(|e| e.kind == Kind::Cross));
        let omega = sample_events(&g, 3.0, 0.0, &mut rng).unwrap();
        assert!(omega.events().iter().all(|e| e.kind == Kind::Bar));
    }

    #[test]
    fn tiny_beta_is_almost_always_empty() {
        let g = Graph::chain(4, true).unwrap();
        let mut rng = stream(3, 0);
        let nonempty = (0..1000)
            .filter(|_| !sample_events(&g, 1e-9, 0.5, &mut rng).unwrap().is_empty())
            .count();
        assert_eq!(nonempty, 0);
    }

    #[test]
    fn sampled_lists_are_valid_and_reproducible() {
        let g = Graph::torus(&[2, 2]).unwrap();
        let a = sample_events(&g, 2.0, 0.3, &mut stream(9, 1)).unwrap();
        let b = sample_events(&g, 2.0, 0.3, &mut stream(9, 1)).unwrap();
        assert_eq!(a, b);
        a.validate(&g).unwrap();
    }

    #[test]
    fn insert_and_remove() {
        let empty = EventList::empty(1.0, 0.5).unwrap();
        let one = empty.with_inserted(0, 0.25, Kind::Bar).unwrap();
        assert_eq!(one.len(), 1);
        assert!(empty.is_empty());
        assert!(one.with_removed(0).unwrap().is_empty());

        let base = EventList::from_events(
            1.0,
            0.5,
            vec![
                Event { edge: 0, time: 0.7, kind: Kind::Cross },
                Event { edge: 1, time: 0.1, kind: Kind::Bar },
            ],
        )
        .unwrap();
        let mut grown = base.clone();
        let idx = grown.insert(2, 0.4, Kind::Cross).unwrap();
        assert_eq!(idx, 1);
        assert_eq!(grown.with_removed(idx).unwrap(), base);

        assert_eq!(base.with_inserted(0, 0.7, Kind::Bar), Err(Error::DuplicateTime(0.7)));
        assert!(base.with_inserted(0, 1.0, Kind::Bar).is_err());
        assert!(matches!(base.with_removed(2), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let g = Graph::chain(3, true).unwrap();
        let omega = sample_events(&g, 1.7, 0.4, &mut stream(5, 0)).unwrap();
        let text = serde_json::to_string(&omega).unwrap();
        let back: EventList = serde_json::from_str(&text).unwrap();
        assert_eq!(back, omega);
        for (a, b) in omega.events().iter().zip(back.events()) {
            assert_eq!(a.time.to_bits(), b.time.to_bits());
        }
    }
}
