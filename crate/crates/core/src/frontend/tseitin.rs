//! Tseitin encoding of AIG roots into CNF.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::aig::{AigManager, Node, NodeRef, VarId};

/// Clause set over variables `1..=num_vars`; literals are signed DIMACS ints.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Cnf {
    pub num_vars: u32,
    pub clauses: Vec<Vec<i32>>,
}

impl Cnf {
    pub fn new() -> Cnf {
        Cnf::default()
    }

    pub fn new_var(&mut self) -> i32 {
        self.num_vars += 1;
        self.num_vars as i32
    }

    pub fn add_clause(&mut self, lits: impl Into<Vec<i32>>) {
        let lits = lits.into();
        debug_assert!(lits.iter().all(|&l| l != 0 && l.unsigned_abs() <= self.num_vars));
        self.clauses.push(lits);
    }

    /// `model[v]` is the value of variable `v`; index 0 is unused.
    pub fn satisfied_by(&self, model: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter()
                .any(|&l| model.get(l.unsigned_abs() as usize).copied().unwrap_or(false) == (l > 0))
        })
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = String::with_capacity(16 * self.clauses.len() + 32);
        let _ = writeln!(out, "p cnf {} {}", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                let _ = write!(out, "{} ", l);
            }
            out.push_str("0\n");
        }
        out
    }
}

/// Incremental encoder: each AND node gets one auxiliary variable and the
/// three defining clauses `t → a`, `t → b`, `a ∧ b → t`. Nodes already
/// encoded are reused, so a static core can be encoded once and cloned.
#[derive(Clone, Debug, Default)]
pub struct TseitinEncoder {
    cnf: Cnf,
    node_lit: HashMap<u32, i32>,
    inputs: BTreeMap<VarId, i32>,
}

impl TseitinEncoder {
    pub fn new() -> TseitinEncoder {
        TseitinEncoder::default()
    }

    pub fn cnf(&self) -> &Cnf {
        &self.cnf
    }

    pub fn into_cnf(self) -> Cnf {
        self.cnf
    }

    /// CNF variable of every AIG leaf encoded so far.
    pub fn inputs(&self) -> &BTreeMap<VarId, i32> {
        &self.inputs
    }

    /// Makes sure `v` has a CNF variable even if no encoded root uses it.
    pub fn declare_input(&mut self, v: VarId) -> i32 {
        if let Some(&l) = self.inputs.get(&v) {
            return l;
        }
        let l = self.cnf.new_var();
        self.inputs.insert(v, l);
        l
    }

    /// Returns a literal equivalent to `r`.
    pub fn encode(&mut self, mgr: &AigManager, r: NodeRef) -> i32 {
        let mut stack = vec![(r.index(), false)];
        while let Some((idx, expanded)) = stack.pop() {
            if self.node_lit.contains_key(&idx) {
                continue;
            }
            match mgr.node_at(idx) {
                Node::False => {
                    let c = self.cnf.new_var();
                    self.cnf.add_clause([-c]);
                    self.node_lit.insert(idx, c);
                }
                Node::Var(v) => {
                    let l = self.declare_input(v);
                    self.node_lit.insert(idx, l);
                }
                Node::And(a, b) => {
                    if expanded {
                        let la = self.lit(a);
                        let lb = self.lit(b);
                        let t = self.cnf.new_var();
                        self.cnf.add_clause([-t, la]);
                        self.cnf.add_clause([-t, lb]);
                        self.cnf.add_clause([-la, -lb, t]);
                        self.node_lit.insert(idx, t);
                    } else {
                        stack.push((idx, true));
                        stack.push((a.index(), false));
                        stack.push((b.index(), false));
                    }
                }
            }
        }
        self.lit(r)
    }

    fn lit(&self, r: NodeRef) -> i32 {
        let l = self.node_lit[&r.index()];
        if r.is_complemented() {
            -l
        } else {
            l
        }
    }

    /// Adds the constraint that `r` holds.
    pub fn assert_root(&mut self, mgr: &AigManager, r: NodeRef) {
        match r {
            NodeRef::TRUE => {}
            NodeRef::FALSE => self.cnf.clauses.push(Vec::new()),
            _ => {
                let l = self.encode(mgr, r);
                self.cnf.add_clause([l]);
            }
        }
    }
}

/// Encodes the conjunction of `roots`, each asserted true.
pub fn tseitin_cnf(mgr: &AigManager, roots: &[NodeRef]) -> (Cnf, BTreeMap<VarId, i32>) {
    let mut enc = TseitinEncoder::new();
    for &r in roots {
        enc.assert_root(mgr, r);
    }
    let TseitinEncoder { cnf, inputs, .. } = enc;
    (cnf, inputs)
}
