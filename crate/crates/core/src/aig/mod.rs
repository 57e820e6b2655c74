//! Hash-consed And-Inverter Graphs.
//!
//! Every propositional function handled by the engines lives in an
//! [`AigManager`] as a [`NodeRef`]: an index into the manager's node table plus
//! a complement bit. Node 0 is the constant FALSE, so `NodeRef::FALSE` and
//! `NodeRef::TRUE` are the two polarities of the same node.
//!
//! The manager applies only light simplification when building AND nodes
//! (constant rules, idempotence, contradiction, canonical child order). Two
//! functions being equivalent does not imply their refs are equal; semantic
//! questions go through truth tables or the SAT oracle.

pub mod aiger;
pub mod dot;
mod sim;

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::assignment::Assignment;

pub use sim::{block_pattern, Simulator};

/// External identifier of a propositional variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Edge into the node table: `index << 1 | complemented`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeRef(u32);

impl NodeRef {
    pub const FALSE: NodeRef = NodeRef(0);
    pub const TRUE: NodeRef = NodeRef(1);

    fn new(index: u32, complemented: bool) -> NodeRef {
        NodeRef(index << 1 | complemented as u32)
    }

    pub fn index(self) -> u32 {
        self.0 >> 1
    }

    pub fn is_complemented(self) -> bool {
        self.0 & 1 == 1
    }

    /// The uncomplemented ref to the same node.
    pub fn regular(self) -> NodeRef {
        NodeRef(self.0 & !1)
    }

    pub fn is_const(self) -> bool {
        self.index() == 0
    }

}

/// Complement is a bit flip; `!!r == r` holds structurally.
impl std::ops::Not for NodeRef {
    type Output = NodeRef;
    fn not(self) -> NodeRef {
        NodeRef(self.0 ^ 1)
    }
}

impl fmt::Debug for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            NodeRef::FALSE => write!(f, "FALSE"),
            NodeRef::TRUE => write!(f, "TRUE"),
            r => write!(f, "{}n{}", if r.is_complemented() { "!" } else { "" }, r.index()),
        }
    }
}

/// Entry of the node table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Node {
    False,
    Var(VarId),
    And(NodeRef, NodeRef),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AigError {
    #[error("variable {0} in the support is not assigned")]
    Unassigned(VarId),
}

/// Node store with structural hashing.
#[derive(Debug, Default)]
pub struct AigManager {
    nodes: Vec<Node>,
    strash: HashMap<(NodeRef, NodeRef), u32>,
    leaves: HashMap<VarId, u32>,
    names: BTreeMap<VarId, String>,
    next_fresh: u32,
    support_cache: RefCell<HashMap<u32, Arc<[VarId]>>>,
    cofactor_cache: HashMap<(NodeRef, VarId, bool), NodeRef>,
}

impl AigManager {
    pub fn new() -> AigManager {
        AigManager {
            nodes: vec![Node::False],
            next_fresh: 1,
            ..Default::default()
        }
    }

    /// Number of entries in the node table, constant and leaves included.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() <= 1
    }

    pub fn node(&self, r: NodeRef) -> Node {
        self.nodes[r.index() as usize]
    }

    pub(crate) fn node_at(&self, idx: u32) -> Node {
        self.nodes[idx as usize]
    }

    fn check(&self, r: NodeRef) {
        assert!(
            (r.index() as usize) < self.nodes.len(),
            "foreign NodeRef {:?}: manager has {} nodes",
            r,
            self.nodes.len()
        );
    }

    pub fn mk_var(&mut self, id: VarId) -> NodeRef {
        if let Some(&idx) = self.leaves.get(&id) {
            return NodeRef::new(idx, false);
        }
        let idx = self.nodes.len() as u32;
        self.nodes.push(Node::Var(id));
        self.leaves.insert(id, idx);
        self.next_fresh = self.next_fresh.max(id.0 + 1);
        NodeRef::new(idx, false)
    }

    /// Allocates a variable id not used by any leaf so far.
    pub fn fresh_var(&mut self, name: impl Into<String>) -> VarId {
        let id = VarId(self.next_fresh);
        self.next_fresh += 1;
        self.names.insert(id, name.into());
        id
    }

    /// Registers a display name; also reserves `id` against [`Self::fresh_var`].
    pub fn set_name(&mut self, id: VarId, name: impl Into<String>) {
        self.next_fresh = self.next_fresh.max(id.0 + 1);
        self.names.insert(id, name.into());
    }

    pub fn name(&self, id: VarId) -> Option<&str> {
        self.names.get(&id).map(String::as_str)
    }

    /// Name for display: the registered name or `v<id>`.
    pub fn display_name(&self, id: VarId) -> String {
        self.name(id).map(str::to_owned).unwrap_or_else(|| id.to_string())
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.names.iter().find(|(_, n)| n.as_str() == name).map(|(v, _)| *v)
    }

    /// Variable of a leaf ref, if `r` (in either polarity) is one.
    pub fn as_var(&self, r: NodeRef) -> Option<VarId> {
        match self.node(r) {
            Node::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn mk_not(&self, a: NodeRef) -> NodeRef {
        !a
    }

    pub fn mk_and(&mut self, a: NodeRef, b: NodeRef) -> NodeRef {
        self.check(a);
        self.check(b);
        if a == NodeRef::FALSE || b == NodeRef::FALSE || a == !b {
            return NodeRef::FALSE;
        }
        if a == NodeRef::TRUE || a == b {
            return b;
        }
        if b == NodeRef::TRUE {
            return a;
        }
        let key = if a < b { (a, b) } else { (b, a) };
        if let Some(&idx) = self.strash.get(&key) {
            return NodeRef::new(idx, false);
        }
        let idx = self.nodes.len() as u32;
        self.nodes.push(Node::And(key.0, key.1));
        self.strash.insert(key, idx);
        NodeRef::new(idx, false)
    }

    pub fn mk_or(&mut self, a: NodeRef, b: NodeRef) -> NodeRef {
        !self.mk_and(!a, !b)
    }

    /// `a ⇔ b` as `(a ∧ b) ∨ (¬a ∧ ¬b)`.
    pub fn mk_iff(&mut self, a: NodeRef, b: NodeRef) -> NodeRef {
        let both = self.mk_and(a, b);
        let neither = self.mk_and(!a, !b);
        self.mk_or(both, neither)
    }

    /// `a ⊕ b` expanded as `(a ∨ b) ∧ ¬(a ∧ b)`: three AND nodes in general.
    pub fn mk_xor(&mut self, a: NodeRef, b: NodeRef) -> NodeRef {
        let any = self.mk_or(a, b);
        let both = self.mk_and(a, b);
        self.mk_and(any, !both)
    }

    pub fn mk_implies(&mut self, a: NodeRef, b: NodeRef) -> NodeRef {
        self.mk_or(!a, b)
    }

    /// Left-deep conjunction; empty input gives TRUE.
    pub fn mk_big_and<I: IntoIterator<Item = NodeRef>>(&mut self, items: I) -> NodeRef {
        let mut acc = NodeRef::TRUE;
        for r in items {
            acc = self.mk_and(acc, r);
            if acc == NodeRef::FALSE {
                break;
            }
        }
        acc
    }

    /// Left-deep disjunction; empty input gives FALSE.
    pub fn mk_big_or<I: IntoIterator<Item = NodeRef>>(&mut self, items: I) -> NodeRef {
        let mut acc = NodeRef::FALSE;
        for r in items {
            acc = self.mk_or(acc, r);
            if acc == NodeRef::TRUE {
                break;
            }
        }
        acc
    }

    /// Node indices of the cone of `roots`, ascending (children before parents).
    pub fn cone(&self, roots: &[NodeRef]) -> Vec<u32> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<u32> = roots.iter().map(|r| r.index()).collect();
        let mut out = Vec::new();
        while let Some(idx) = stack.pop() {
            if std::mem::replace(&mut seen[idx as usize], true) {
                continue;
            }
            out.push(idx);
            if let Node::And(a, b) = self.nodes[idx as usize] {
                stack.push(a.index());
                stack.push(b.index());
            }
        }
        out.sort_unstable();
        out
    }

    /// Sorted support of `f`.
    pub fn support(&self, f: NodeRef) -> Arc<[VarId]> {
        self.check(f);
        self.support_of_index(f.index())
    }

    fn support_of_index(&self, root: u32) -> Arc<[VarId]> {
        if let Some(s) = self.support_cache.borrow().get(&root) {
            return s.clone();
        }
        let mut cache = self.support_cache.borrow_mut();
        let mut stack = vec![(root, false)];
        while let Some((idx, expanded)) = stack.pop() {
            if cache.contains_key(&idx) {
                continue;
            }
            match self.nodes[idx as usize] {
                Node::False => {
                    cache.insert(idx, Arc::from(Vec::new()));
                }
                Node::Var(v) => {
                    cache.insert(idx, Arc::from(vec![v]));
                }
                Node::And(a, b) => {
                    if expanded {
                        let merged = merge_sorted(&cache[&a.index()], &cache[&b.index()]);
                        cache.insert(idx, Arc::from(merged));
                    } else {
                        stack.push((idx, true));
                        stack.push((a.index(), false));
                        stack.push((b.index(), false));
                    }
                }
            }
        }
        cache[&root].clone()
    }

    pub fn depends_on(&self, f: NodeRef, v: VarId) -> bool {
        self.support(f).binary_search(&v).is_ok()
    }

    fn touches(&self, idx: u32, vars: &[VarId]) -> bool {
        let supp = self.support_of_index(idx);
        vars.iter().any(|v| supp.binary_search(v).is_ok())
    }

    /// Drops the support and cofactor memo tables.
    pub fn flush_caches(&mut self) {
        self.support_cache.get_mut().clear();
        self.cofactor_cache.clear();
    }

    /// `f[v ↦ bit]`.
    pub fn cofactor(&mut self, f: NodeRef, v: VarId, bit: bool) -> NodeRef {
        if let Some(&r) = self.cofactor_cache.get(&(f, v, bit)) {
            return r;
        }
        let value = if bit { NodeRef::TRUE } else { NodeRef::FALSE };
        let r = self.rebuild(f, &[v], |var| (var == v).then_some(value));
        self.cofactor_cache.insert((f, v, bit), r);
        r
    }

    /// `f[v ↦ g]`.
    pub fn compose(&mut self, f: NodeRef, v: VarId, g: NodeRef) -> NodeRef {
        self.check(g);
        self.rebuild(f, &[v], |var| (var == v).then_some(g))
    }

    /// Simultaneous substitution of every variable in `map`.
    pub fn substitute(&mut self, f: NodeRef, map: &HashMap<VarId, NodeRef>) -> NodeRef {
        let mut vars: Vec<VarId> = map.keys().copied().collect();
        vars.sort_unstable();
        self.rebuild(f, &vars, |var| map.get(&var).copied())
    }

    /// Rebuilds the cone of `f` with leaves in `vars` replaced by `leaf(v)`.
    /// Subgraphs whose support misses `vars` are shared, not copied.
    fn rebuild<F>(&mut self, f: NodeRef, vars: &[VarId], leaf: F) -> NodeRef
    where
        F: Fn(VarId) -> Option<NodeRef>,
    {
        self.check(f);
        let mut memo: HashMap<u32, NodeRef> = HashMap::new();
        let mut stack = vec![(f.index(), false)];
        while let Some((idx, expanded)) = stack.pop() {
            if memo.contains_key(&idx) {
                continue;
            }
            let here = NodeRef::new(idx, false);
            if !self.touches(idx, vars) {
                memo.insert(idx, here);
                continue;
            }
            match self.nodes[idx as usize] {
                Node::False => {
                    memo.insert(idx, here);
                }
                Node::Var(v) => {
                    memo.insert(idx, leaf(v).unwrap_or(here));
                }
                Node::And(a, b) => {
                    if expanded {
                        let na = lift(memo[&a.index()], a);
                        let nb = lift(memo[&b.index()], b);
                        let r = self.mk_and(na, nb);
                        memo.insert(idx, r);
                    } else {
                        stack.push((idx, true));
                        stack.push((a.index(), false));
                        stack.push((b.index(), false));
                    }
                }
            }
        }
        lift(memo[&f.index()], f)
    }

    /// Evaluates `f` under `pi`; every support variable must be assigned.
    pub fn eval(&self, f: NodeRef, pi: &Assignment) -> Result<bool, AigError> {
        self.check(f);
        let mut memo: HashMap<u32, bool> = HashMap::new();
        let mut stack = vec![(f.index(), false)];
        while let Some((idx, expanded)) = stack.pop() {
            if memo.contains_key(&idx) {
                continue;
            }
            match self.nodes[idx as usize] {
                Node::False => {
                    memo.insert(idx, false);
                }
                Node::Var(v) => {
                    let val = pi.get(v).ok_or(AigError::Unassigned(v))?;
                    memo.insert(idx, val);
                }
                Node::And(a, b) => {
                    if expanded {
                        let va = memo[&a.index()] ^ a.is_complemented();
                        let vb = memo[&b.index()] ^ b.is_complemented();
                        memo.insert(idx, va && vb);
                    } else {
                        stack.push((idx, true));
                        stack.push((a.index(), false));
                        stack.push((b.index(), false));
                    }
                }
            }
        }
        Ok(memo[&f.index()] ^ f.is_complemented())
    }

    /// Number of distinct AND nodes reachable from `f`. Leaves and the
    /// constant are not counted; shared nodes count once.
    pub fn node_count(&self, f: NodeRef) -> usize {
        self.node_count_many(&[f])
    }

    /// Distinct AND nodes in the union of the cones of `roots`.
    pub fn node_count_many(&self, roots: &[NodeRef]) -> usize {
        self.cone(roots)
            .into_iter()
            .filter(|&i| matches!(self.nodes[i as usize], Node::And(..)))
            .count()
    }
}

fn lift(r: NodeRef, edge: NodeRef) -> NodeRef {
    if edge.is_complemented() {
        !r
    } else {
        r
    }
}

fn merge_sorted(a: &[VarId], b: &[VarId]) -> Vec<VarId> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}
