//! Place/transition nets, markings and the firing rule.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetError {
    #[error("duplicate node name `{0}`")]
    DuplicateName(String),
    #[error("arc endpoint `{0}` does not name a place or transition")]
    UnknownNode(String),
    #[error("arc must connect a place and a transition (`{0}` -> `{1}`)")]
    NotBipartite(String, String),
    #[error("arc `{0}` -> `{1}` has weight 0")]
    ZeroWeight(String, String),
    #[error("initial marking has {found} entries, net has {expected} places")]
    MarkingLength { expected: usize, found: usize },
    #[error("marking has {found} entries, net has {expected} places")]
    Conformance { expected: usize, found: usize },
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("transition `{transition}` is not enabled: place `{place}` holds {holds} tokens, needs {needs}")]
    NotEnabled {
        transition: String,
        place: String,
        holds: u64,
        needs: u64,
    },
}

/// Token vector, index-aligned with [`PetriNet::places`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Marking(Vec<u64>);

impl Marking {
    pub fn new(tokens: Vec<u64>) -> Self {
        Marking(tokens)
    }

    pub fn zeros(len: usize) -> Self {
        Marking(vec![0; len])
    }

    pub fn tokens(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, place: usize) -> u64 {
        self.0[place]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    /// Largest entry, 0 for the empty marking.
    pub fn max_tokens(&self) -> u64 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn within_cap(&self, kappa: u64) -> bool {
        self.0.iter().all(|&n| n <= kappa)
    }
}

impl fmt::Display for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<u64>> for Marking {
    fn from(v: Vec<u64>) -> Self {
        Marking(v)
    }
}

/// Arc key; at most one arc exists per ordered pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArcKey {
    /// place index -> transition index
    Input(usize, usize),
    /// transition index -> place index
    Output(usize, usize),
}

/// One firing of a transition together with the markings around it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiringStep {
    pub transition: String,
    pub before: Marking,
    pub after: Marking,
}

/// A place/transition net with its initial marking.
///
/// Values are immutable after construction; [`NetBuilder`] enforces the
/// structural invariants (unique, disjoint names, positive weights, bipartite
/// arcs, initial marking length).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PetriNet {
    places: Vec<String>,
    transitions: Vec<String>,
    arcs: BTreeMap<ArcKey, u64>,
    initial: Marking,
    // derived: per transition, (place, weight) sorted by place
    pre: Vec<Vec<(usize, u64)>>,
    post: Vec<Vec<(usize, u64)>>,
}

impl PetriNet {
    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn transitions(&self) -> &[String] {
        &self.transitions
    }

    pub fn initial_marking(&self) -> &Marking {
        &self.initial
    }

    pub fn arcs(&self) -> &BTreeMap<ArcKey, u64> {
        &self.arcs
    }

    pub fn place_index(&self, name: &str) -> Option<usize> {
        self.places.iter().position(|p| p == name)
    }

    pub fn transition_index(&self, name: &str) -> Option<usize> {
        self.transitions.iter().position(|t| t == name)
    }

    /// Pre-places of transition `t` with arc weights, sorted by place index.
    pub fn pre_set(&self, t: usize) -> &[(usize, u64)] {
        &self.pre[t]
    }

    /// Post-places of transition `t` with arc weights, sorted by place index.
    pub fn post_set(&self, t: usize) -> &[(usize, u64)] {
        &self.post[t]
    }

    /// W(p,t), 0 when there is no arc.
    pub fn input_weight(&self, p: usize, t: usize) -> u64 {
        self.arcs.get(&ArcKey::Input(p, t)).copied().unwrap_or(0)
    }

    /// W(t,p), 0 when there is no arc.
    pub fn output_weight(&self, t: usize, p: usize) -> u64 {
        self.arcs.get(&ArcKey::Output(t, p)).copied().unwrap_or(0)
    }

    /// Net token change W(t,p) - W(p,t) for every place.
    pub fn effect(&self, t: usize) -> Vec<i64> {
        (0..self.places.len())
            .map(|p| self.output_weight(t, p) as i64 - self.input_weight(p, t) as i64)
            .collect()
    }

    fn check_conforms(&self, m: &Marking) -> Result<(), NetError> {
        if m.len() != self.places.len() {
            return Err(NetError::Conformance {
                expected: self.places.len(),
                found: m.len(),
            });
        }
        Ok(())
    }

    pub fn is_enabled_idx(&self, m: &Marking, t: usize) -> bool {
        self.pre[t].iter().all(|&(p, w)| m.get(p) >= w)
    }

    /// Indices of the transitions enabled at `m`, in declaration order.
    pub fn enabled_indices(&self, m: &Marking) -> Result<Vec<usize>, NetError> {
        self.check_conforms(m)?;
        Ok((0..self.transitions.len())
            .filter(|&t| self.is_enabled_idx(m, t))
            .collect())
    }

    /// Names of the transitions enabled at `m`.
    pub fn enabled(&self, m: &Marking) -> Result<BTreeSet<String>, NetError> {
        Ok(self
            .enabled_indices(m)?
            .into_iter()
            .map(|t| self.transitions[t].clone())
            .collect())
    }

    pub fn fire_idx(&self, m: &Marking, t: usize) -> Result<Marking, NetError> {
        self.check_conforms(m)?;
        if let Some(&(p, w)) = self.pre[t].iter().find(|&&(p, w)| m.get(p) < w) {
            return Err(NetError::NotEnabled {
                transition: self.transitions[t].clone(),
                place: self.places[p].clone(),
                holds: m.get(p),
                needs: w,
            });
        }
        let mut tokens = m.tokens().to_vec();
        for &(p, w) in &self.pre[t] {
            tokens[p] -= w;
        }
        for &(p, w) in &self.post[t] {
            tokens[p] += w;
        }
        Ok(Marking(tokens))
    }

    /// Fires transition `t` (by name) at `m`.
    pub fn fire(&self, m: &Marking, t: &str) -> Result<Marking, NetError> {
        let idx = self
            .transition_index(t)
            .ok_or_else(|| NetError::UnknownTransition(t.to_string()))?;
        self.fire_idx(m, idx)
    }

    pub fn step(&self, m: &Marking, t: &str) -> Result<FiringStep, NetError> {
        let after = self.fire(m, t)?;
        Ok(FiringStep {
            transition: t.to_string(),
            before: m.clone(),
            after,
        })
    }
}

/// Name of an arc endpoint as written in an input file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Place,
    Transition,
}

/// Incremental constructor for [`PetriNet`]. Duplicate arcs between the same
/// ordered pair are summed.
#[derive(Debug, Default, Clone)]
pub struct NetBuilder {
    places: Vec<String>,
    initial: Vec<u64>,
    transitions: Vec<String>,
    names: HashSet<String>,
    arcs: BTreeMap<ArcKey, u64>,
}

impl NetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn place(&mut self, name: &str, tokens: u64) -> Result<&mut Self, NetError> {
        if !self.names.insert(name.to_string()) {
            return Err(NetError::DuplicateName(name.to_string()));
        }
        self.places.push(name.to_string());
        self.initial.push(tokens);
        Ok(self)
    }

    pub fn transition(&mut self, name: &str) -> Result<&mut Self, NetError> {
        if !self.names.insert(name.to_string()) {
            return Err(NetError::DuplicateName(name.to_string()));
        }
        self.transitions.push(name.to_string());
        Ok(self)
    }

    pub fn kind_of(&self, name: &str) -> Option<NodeKind> {
        if self.places.iter().any(|p| p == name) {
            Some(NodeKind::Place)
        } else if self.transitions.iter().any(|t| t == name) {
            Some(NodeKind::Transition)
        } else {
            None
        }
    }

    pub fn arc(&mut self, source: &str, target: &str, weight: u64) -> Result<&mut Self, NetError> {
        if weight == 0 {
            return Err(NetError::ZeroWeight(source.to_string(), target.to_string()));
        }
        let find_p = |n: &str| self.places.iter().position(|p| p == n);
        let find_t = |n: &str| self.transitions.iter().position(|t| t == n);
        let key = match (
            find_p(source),
            find_t(source),
            find_p(target),
            find_t(target),
        ) {
            (Some(p), _, _, Some(t)) => ArcKey::Input(p, t),
            (_, Some(t), Some(p), _) => ArcKey::Output(t, p),
            (None, None, _, _) => return Err(NetError::UnknownNode(source.to_string())),
            (_, _, None, None) => return Err(NetError::UnknownNode(target.to_string())),
            _ => {
                return Err(NetError::NotBipartite(
                    source.to_string(),
                    target.to_string(),
                ))
            }
        };
        *self.arcs.entry(key).or_insert(0) += weight;
        Ok(self)
    }

    pub fn build(&self) -> Result<PetriNet, NetError> {
        PetriNet::from_parts(
            self.places.clone(),
            self.transitions.clone(),
            self.arcs.clone(),
            Marking(self.initial.clone()),
        )
    }
}

impl PetriNet {
    /// Builds a net from raw parts, validating every structural invariant.
    pub fn from_parts(
        places: Vec<String>,
        transitions: Vec<String>,
        arcs: BTreeMap<ArcKey, u64>,
        initial: Marking,
    ) -> Result<Self, NetError> {
        let mut seen = HashSet::new();
        for n in places.iter().chain(transitions.iter()) {
            if !seen.insert(n.as_str()) {
                return Err(NetError::DuplicateName(n.clone()));
            }
        }
        if initial.len() != places.len() {
            return Err(NetError::MarkingLength {
                expected: places.len(),
                found: initial.len(),
            });
        }
        let mut pre = vec![Vec::new(); transitions.len()];
        let mut post = vec![Vec::new(); transitions.len()];
        for (&key, &w) in &arcs {
            let (p, t) = match key {
                ArcKey::Input(p, t) | ArcKey::Output(t, p) => (p, t),
            };
            if p >= places.len() {
                return Err(NetError::UnknownNode(format!("place #{p}")));
            }
            if t >= transitions.len() {
                return Err(NetError::UnknownNode(format!("transition #{t}")));
            }
            if w == 0 {
                let (s, d) = match key {
                    ArcKey::Input(..) => (&places[p], &transitions[t]),
                    ArcKey::Output(..) => (&transitions[t], &places[p]),
                };
                return Err(NetError::ZeroWeight(s.clone(), d.clone()));
            }
            match key {
                ArcKey::Input(..) => pre[t].push((p, w)),
                ArcKey::Output(..) => post[t].push((p, w)),
            }
        }
        for v in pre.iter_mut().chain(post.iter_mut()) {
            v.sort_unstable();
        }
        Ok(PetriNet {
            places,
            transitions,
            arcs,
            initial,
            pre,
            post,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    fn ups() -> PetriNet {
        models::ups()
    }

    #[test]
    fn ups_zero_marking_enables_only_spawn() {
        let net = ups();
        let got = net.enabled(&Marking::zeros(5)).unwrap();
        assert_eq!(got, BTreeSet::from(["t0".to_string()]));
    }

    #[test]
    fn empty_net_enables_nothing() {
        let net = NetBuilder::new().build().unwrap();
        assert!(net.enabled(&Marking::zeros(0)).unwrap().is_empty());
    }

    #[test]
    fn ups_enabled_with_running_process() {
        // brute force over the arc table: t is enabled iff every pre-place has enough tokens
        let net = ups();
        let m = Marking::new(vec![0, 0, 1, 0, 0]);
        let mut expected = BTreeSet::new();
        for (t, name) in net.transitions().iter().enumerate() {
            let ok = (0..5).all(|p| m.get(p) >= net.input_weight(p, t));
            if ok {
                expected.insert(name.clone());
            }
        }
        let names: BTreeSet<String> = ["t0", "t3", "t4", "t6"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(expected, names);
        assert_eq!(net.enabled(&m).unwrap(), names);
    }

    #[test]
    fn fire_spawn_and_load() {
        let net = ups();
        let m1 = net.fire(&Marking::zeros(5), "t0").unwrap();
        assert_eq!(m1, Marking::new(vec![1, 0, 0, 0, 0]));
        let m2 = net.fire(&m1, "t1").unwrap();
        assert_eq!(m2, Marking::new(vec![0, 1, 0, 0, 0]));
    }

    #[test]
    fn self_loop_is_identity() {
        let mut b = NetBuilder::new();
        b.place("p", 2).unwrap().transition("t").unwrap();
        b.arc("p", "t", 2).unwrap().arc("t", "p", 2).unwrap();
        let net = b.build().unwrap();
        let m = net.initial_marking().clone();
        assert_eq!(net.fire(&m, "t").unwrap(), m);
    }

    #[test]
    fn firing_disabled_names_deficient_place() {
        let net = ups();
        let err = net.fire(&Marking::zeros(5), "t1").unwrap_err();
        assert_eq!(
            err,
            NetError::NotEnabled {
                transition: "t1".into(),
                place: "p0".into(),
                holds: 0,
                needs: 1
            }
        );
    }

    #[test]
    fn marking_length_mismatch() {
        let net = ups();
        assert!(matches!(
            net.enabled(&Marking::zeros(3)),
            Err(NetError::Conformance {
                expected: 5,
                found: 3
            })
        ));
    }

    #[test]
    fn builder_rejects_bad_structure() {
        let mut b = NetBuilder::new();
        b.place("p", 0)
            .unwrap()
            .place("q", 0)
            .unwrap()
            .transition("t")
            .unwrap();
        assert!(matches!(
            b.arc("p", "q", 1),
            Err(NetError::NotBipartite(..))
        ));
        assert!(matches!(b.arc("p", "x", 1), Err(NetError::UnknownNode(_))));
        assert!(matches!(b.arc("p", "t", 0), Err(NetError::ZeroWeight(..))));
        assert!(matches!(b.place("t", 0), Err(NetError::DuplicateName(_))));
    }

    #[test]
    fn duplicate_arcs_are_summed() {
        let mut b = NetBuilder::new();
        b.place("p", 0).unwrap().transition("t").unwrap();
        b.arc("t", "p", 1).unwrap().arc("t", "p", 2).unwrap();
        let net = b.build().unwrap();
        assert_eq!(net.output_weight(0, 0), 3);
    }
}
