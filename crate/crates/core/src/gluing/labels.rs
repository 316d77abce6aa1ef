//! Label dynamics `j ↦ Λ(j)`, the portrait, and the classification of gluing data.

use std::fmt;

use super::Gluing;

/// The self-map of labels induced by `Φ`, with local degrees.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelDynamics {
    /// `next[j]` is the label of the edge `Φ(j)` (0-based).
    pub next: Vec<usize>,
    /// Number of copies joined by `Φ(j)`.
    pub local_degree: Vec<usize>,
    pub periodic: Vec<bool>,
    /// Steps needed for every label to land on a cycle.
    pub preperiod: usize,
    /// Least common multiple of the cycle lengths.
    pub period: usize,
}

impl LabelDynamics {
    pub fn new(g: &Gluing) -> Self {
        let k = g.k();
        let next: Vec<usize> = (0..k).map(|j| g.edges()[g.phi(j)].label).collect();
        let local_degree = (0..k).map(|j| g.edges()[g.phi(j)].members.len()).collect();
        // After k steps every orbit is on its cycle.
        let landed: Vec<usize> = (0..k).map(|j| (0..k).fold(j, |x, _| next[x])).collect();
        let mut periodic = vec![false; k];
        for &j in &landed {
            let mut x = j;
            loop {
                periodic[x] = true;
                x = next[x];
                if x == j {
                    break;
                }
            }
        }
        let preperiod = (0..k)
            .map(|j| {
                let mut x = j;
                let mut steps = 0;
                while !periodic[x] {
                    x = next[x];
                    steps += 1;
                }
                steps
            })
            .max()
            .unwrap_or(0);
        let mut period = 1;
        for j in (0..k).filter(|&j| periodic[j]) {
            let mut len = 1;
            let mut x = next[j];
            while x != j {
                x = next[x];
                len += 1;
            }
            period = lcm(period, len);
        }
        LabelDynamics {
            next,
            local_degree,
            periodic,
            preperiod,
            period,
        }
    }

    pub fn k(&self) -> usize {
        self.next.len()
    }

    pub fn periodic_labels(&self) -> Vec<usize> {
        (0..self.k()).filter(|&j| self.periodic[j]).collect()
    }

    pub fn iterate(&self, j: usize, times: usize) -> usize {
        (0..times).fold(j, |x, _| self.next[x])
    }

    /// Some periodic label has `Φ(j)` joining two or more copies.
    pub fn critically_periodic(&self) -> bool {
        (0..self.k()).any(|j| self.periodic[j] && self.local_degree[j] >= 2)
    }

    pub fn portrait(&self) -> Portrait {
        Portrait {
            arcs: (0..self.k())
                .map(|j| PortraitArc {
                    from: j,
                    to: self.next[j],
                    degree: self.local_degree[j],
                })
                .collect(),
        }
    }
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PortraitArc {
    pub from: usize,
    pub to: usize,
    pub degree: usize,
}

impl PortraitArc {
    /// `"d:1"` when the arc is critical, nothing otherwise.
    pub fn annotation(&self) -> Option<String> {
        (self.degree >= 2).then(|| format!("{}:1", self.degree))
    }
}

/// The directed graph `j → Λ(j)` on labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Portrait {
    pub arcs: Vec<PortraitArc>,
}

impl Portrait {
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph portrait {\n");
        for a in &self.arcs {
            match a.annotation() {
                Some(label) => s += &format!("  {} -> {} [label=\"{label}\"];\n", a.from + 1, a.to + 1),
                None => s += &format!("  {} -> {};\n", a.from + 1, a.to + 1),
            }
        }
        s += "}\n";
        s
    }
}

impl fmt::Display for Portrait {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.arcs {
            write!(f, "{} -> {}", a.from + 1, a.to + 1)?;
            if let Some(label) = a.annotation() {
                write!(f, " ({label})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// The successive collision tables, ending with the first repeated one.
///
/// Round `n` records, for each pair of distinct labels, whether the two marks
/// can still share a vertex of a copy of `Ĝ_{n-1}` after `n` levels of simplified gluing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollisionTable {
    k: usize,
    pub rounds: Vec<Vec<bool>>,
    /// First round with every off-diagonal entry false.
    pub witness: Option<usize>,
}

impl CollisionTable {
    pub fn new(g: &Gluing) -> Self {
        let k = g.k();
        let dynamics = LabelDynamics::new(g);
        let copies: Vec<Vec<bool>> = (0..k)
            .map(|j| {
                let mut mask = vec![false; g.m()];
                for &w in &g.edges()[g.phi(j)].members {
                    mask[w] = true;
                }
                mask
            })
            .collect();
        let overlap = |a: usize, b: usize| (0..g.m()).any(|w| copies[a][w] && copies[b][w]);
        let mut rounds = vec![vec![true; k * k]];
        // Entries only ever switch from true to false, so this stops within k² + 1 rounds.
        loop {
            let prev = rounds.last().unwrap();
            let mut cur = vec![false; k * k];
            for a in 0..k {
                for b in 0..k {
                    cur[a * k + b] =
                        a == b || (overlap(a, b) && prev[dynamics.next[a] * k + dynamics.next[b]]);
                }
            }
            let done = cur == *prev;
            rounds.push(cur);
            if done {
                break;
            }
            assert!(rounds.len() <= k * k + 2, "collision table failed to stabilise");
        }
        let witness = rounds
            .iter()
            .position(|t| (0..k).all(|a| (0..k).all(|b| a == b || !t[a * k + b])));
        CollisionTable { k, rounds, witness }
    }

    /// Whether labels `a` and `b` collide at every level.
    pub fn collides(&self, a: usize, b: usize) -> bool {
        self.rounds.last().unwrap()[a * self.k + b]
    }

    pub fn collides_at(&self, round: usize, a: usize, b: usize) -> bool {
        let t = round.min(self.rounds.len() - 1);
        self.rounds[t][a * self.k + b]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub non_degenerate: bool,
    pub stable: bool,
    pub expanding: bool,
    pub expanding_witness: Option<usize>,
    pub period: usize,
    pub preperiod: usize,
    pub periodic_labels: Vec<usize>,
}

impl Gluing {
    pub fn label_dynamics(&self) -> LabelDynamics {
        LabelDynamics::new(self)
    }

    pub fn collision_table(&self) -> CollisionTable {
        CollisionTable::new(self)
    }

    pub fn classify(&self) -> Classification {
        let dynamics = self.label_dynamics();
        let non_degenerate = !dynamics.critically_periodic();
        let stable = non_degenerate
            && dynamics
                .periodic_labels()
                .iter()
                .all(|&j| self.data().connecting[&self.edges()[self.phi(j)].id].is_singleton());
        let witness = self.collision_table().witness;
        Classification {
            non_degenerate,
            stable,
            expanding: witness.is_some(),
            expanding_witness: witness,
            period: dynamics.period,
            preperiod: dynamics.preperiod,
            periodic_labels: dynamics.periodic_labels(),
        }
    }

    /// Smallest power `p ≤ 2k` putting the data in normal form, with the four conditions
    /// reported separately for that `p` (or for `p = 2k` when none qualifies).
    pub fn fm_normalization(&self) -> FmNormalization {
        let dynamics = self.label_dynamics();
        let class = self.classify();
        let check = |p: usize| {
            let fm1 = p >= dynamics.preperiod
                && dynamics
                    .periodic_labels()
                    .iter()
                    .all(|&j| dynamics.iterate(j, p) == j);
            // Along a periodic orbit the local degrees multiply; stability keeps all connectors trivial.
            let fm2 = !dynamics.critically_periodic();
            let fm3 = class.stable;
            let fm4 = class.expanding_witness.is_some_and(|w| p >= w);
            FmNormalization {
                p,
                fm1,
                fm2,
                fm3,
                fm4,
            }
        };
        (1..=2 * self.k())
            .map(check)
            .find(FmNormalization::holds)
            .unwrap_or_else(|| check(2 * self.k()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FmNormalization {
    pub p: usize,
    pub fm1: bool,
    pub fm2: bool,
    pub fm3: bool,
    pub fm4: bool,
}

impl FmNormalization {
    pub fn holds(&self) -> bool {
        self.fm1 && self.fm2 && self.fm3 && self.fm4
    }
}
