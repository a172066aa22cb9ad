//! Communication topologies deciding whose best positions an agent sees.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TopologyKind {
    FullyConnected,
    Ring,
    /// `k` distinct random peers, redrawn for every waypoint computation.
    Adaptive {
        k: usize,
    },
}

impl TopologyKind {
    pub const DEFAULT_ADAPTIVE_DEGREE: usize = 2;

    pub fn name(&self) -> &'static str {
        match self {
            TopologyKind::FullyConnected => "fc",
            TopologyKind::Ring => "ring",
            TopologyKind::Adaptive { .. } => "adaptive",
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TopologyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fc" | "fully_connected" => Ok(TopologyKind::FullyConnected),
            "ring" => Ok(TopologyKind::Ring),
            "adaptive" => Ok(TopologyKind::Adaptive {
                k: Self::DEFAULT_ADAPTIVE_DEGREE,
            }),
            other => Err(Error::invalid(
                "topology",
                format!("unknown topology `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyGraph {
    pub kind: TopologyKind,
    pub n: usize,
}

impl TopologyGraph {
    pub fn new(kind: TopologyKind, n: usize) -> Result<Self> {
        let g = Self { kind, n };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid("n", "swarm needs at least 2 agents"));
        }
        if let TopologyKind::Adaptive { k } = self.kind {
            if k < 1 || k > self.n - 1 {
                return Err(Error::invalid(
                    "topology_k",
                    format!("adaptive degree must be in 1..={}", self.n - 1),
                ));
            }
        }
        Ok(())
    }

    /// Whether [`neighbors`] consumes randomness for this graph.
    pub fn is_random(&self) -> bool {
        matches!(self.kind, TopologyKind::Adaptive { .. })
    }
}

/// Peers of `agent`, sorted ascending, never including `agent` itself.
pub fn neighbors<R: Rng + ?Sized>(
    g: &TopologyGraph,
    agent: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if agent >= g.n {
        return Err(Error::AgentIndex {
            index: agent,
            n: g.n,
        });
    }
    let n = g.n;
    let out = match g.kind {
        TopologyKind::FullyConnected => (0..n).filter(|&j| j != agent).collect(),
        TopologyKind::Ring => {
            let mut v = vec![(agent + n - 1) % n, (agent + 1) % n];
            v.sort_unstable();
            v.dedup();
            v
        }
        TopologyKind::Adaptive { k } => {
            let mut v: Vec<usize> = rand::seq::index::sample(rng, n - 1, k)
                .into_iter()
                .map(|j| if j >= agent { j + 1 } else { j })
                .collect();
            v.sort_unstable();
            v
        }
    };
    Ok(out)
}

/// Index of the best record among `agent` and its peers. Ties go to the
/// lowest index.
pub fn local_best_index<R: Rng + ?Sized>(
    g: &TopologyGraph,
    agent: usize,
    bests: &[(Vec2, f64)],
    rng: &mut R,
) -> Result<usize> {
    if bests.len() != g.n {
        return Err(Error::invalid(
            "bests",
            format!("expected {} entries, got {}", g.n, bests.len()),
        ));
    }
    let peers = neighbors(g, agent, rng)?;
    let mut best = agent;
    for j in peers {
        let (vj, vb) = (bests[j].1, bests[best].1);
        if vj > vb || (vj == vb && j < best) {
            best = j;
        }
    }
    Ok(best)
}

/// Best recorded position visible to `agent`.
pub fn local_best<R: Rng + ?Sized>(
    g: &TopologyGraph,
    agent: usize,
    bests: &[(Vec2, f64)],
    rng: &mut R,
) -> Result<Vec2> {
    local_best_index(g, agent, bests, rng).map(|i| bests[i].0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(42)
    }

    #[test]
    fn neighbor_examples() {
        let fc = TopologyGraph::new(TopologyKind::FullyConnected, 5).unwrap();
        assert_eq!(neighbors(&fc, 0, &mut rng()).unwrap(), vec![1, 2, 3, 4]);
        let ring = TopologyGraph::new(TopologyKind::Ring, 5).unwrap();
        assert_eq!(neighbors(&ring, 2, &mut rng()).unwrap(), vec![1, 3]);
        assert_eq!(neighbors(&ring, 0, &mut rng()).unwrap(), vec![1, 4]);
        let ring2 = TopologyGraph::new(TopologyKind::Ring, 2).unwrap();
        assert_eq!(neighbors(&ring2, 0, &mut rng()).unwrap(), vec![1]);
    }

    #[test]
    fn adaptive_replays_with_seed() {
        let g = TopologyGraph::new(TopologyKind::Adaptive { k: 2 }, 5).unwrap();
        let a = neighbors(&g, 0, &mut rng()).unwrap();
        let b = neighbors(&g, 0, &mut rng()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        assert!(a.iter().all(|&j| (1..5).contains(&j)));
        // successive calls redraw
        let mut r = rng();
        let draws: Vec<_> = (0..20).map(|_| neighbors(&g, 0, &mut r).unwrap()).collect();
        assert!(draws.iter().any(|d| d != &draws[0]));
    }

    #[test]
    fn out_of_range_agent() {
        let g = TopologyGraph::new(TopologyKind::Ring, 4).unwrap();
        assert!(matches!(
            neighbors(&g, 4, &mut rng()),
            Err(Error::AgentIndex { .. })
        ));
    }

    #[test]
    fn invalid_graphs() {
        assert!(TopologyGraph::new(TopologyKind::Ring, 1).is_err());
        assert!(TopologyGraph::new(TopologyKind::Adaptive { k: 0 }, 5).is_err());
        assert!(TopologyGraph::new(TopologyKind::Adaptive { k: 5 }, 5).is_err());
        assert!(TopologyGraph::new(TopologyKind::Adaptive { k: 4 }, 5).is_ok());
    }

    #[test]
    fn tie_break_prefers_lower_index() {
        let ring = TopologyGraph::new(TopologyKind::Ring, 5).unwrap();
        let bests: Vec<(Vec2, f64)> = [3.0, 9.0, 1.0, 9.0, 2.0]
            .iter()
            .enumerate()
            .map(|(i, &v)| (Vec2::new(i as f64, 0.0), v))
            .collect();
        assert_eq!(
            local_best(&ring, 2, &bests, &mut rng()).unwrap(),
            Vec2::new(1.0, 0.0)
        );
    }

    #[test]
    fn ring_of_three_is_fully_connected() {
        let ring = TopologyGraph::new(TopologyKind::Ring, 3).unwrap();
        let fc = TopologyGraph::new(TopologyKind::FullyConnected, 3).unwrap();
        for a in 0..3 {
            assert_eq!(
                neighbors(&ring, a, &mut rng()).unwrap(),
                neighbors(&fc, a, &mut rng()).unwrap()
            );
        }
    }

    #[test]
    fn fc_is_global_best() {
        let fc = TopologyGraph::new(TopologyKind::FullyConnected, 4).unwrap();
        let bests = vec![
            (Vec2::new(0.0, 0.0), 1.0),
            (Vec2::new(1.0, 0.0), 5.0),
            (Vec2::new(2.0, 0.0), 4.0),
            (Vec2::new(3.0, 0.0), 5.0),
        ];
        for a in 0..4 {
            assert_eq!(
                local_best(&fc, a, &bests, &mut rng()).unwrap(),
                Vec2::new(1.0, 0.0)
            );
        }
    }

    proptest! {
        #[test]
        fn local_best_dominates_own(values in proptest::collection::vec(-100.0f64..100.0, 2..12), seed in any::<u64>(), kind in 0u8..3) {
            let n = values.len();
            let kind = match kind {
                0 => TopologyKind::FullyConnected,
                1 => TopologyKind::Ring,
                _ => TopologyKind::Adaptive { k: 1 + (seed as usize) % (n - 1) },
            };
            let g = TopologyGraph::new(kind, n).unwrap();
            let bests: Vec<(Vec2, f64)> = values.iter().enumerate().map(|(i, &v)| (Vec2::new(i as f64, 0.0), v)).collect();
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            for a in 0..n {
                let i = local_best_index(&g, a, &bests, &mut r).unwrap();
                prop_assert!(bests[i].1 >= bests[a].1);
                let peers = neighbors(&g, a, &mut r).unwrap();
                prop_assert!(!peers.contains(&a));
            }
        }

        #[test]
        fn ring_is_symmetric(n in 2usize..40) {
            let g = TopologyGraph::new(TopologyKind::Ring, n).unwrap();
            let mut r = rng();
            for i in 0..n {
                for j in neighbors(&g, i, &mut r).unwrap() {
                    prop_assert!(neighbors(&g, j, &mut r).unwrap().contains(&i));
                }
            }
        }
    }
}
