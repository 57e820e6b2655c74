use std::collections::HashMap;

use super::{AigManager, Node, NodeRef, VarId};

#[derive(Clone, Copy)]
enum Op {
    Zero,
    Leaf(VarId),
    And(Slot, Slot),
}

#[derive(Clone, Copy)]
struct Slot {
    at: usize,
    mask: u64,
}

/// 64-way bit-parallel evaluator over a fixed set of roots.
///
/// The cone is computed once; each [`Simulator::run`] call evaluates 64
/// input patterns at a time.
pub struct Simulator {
    ops: Vec<Op>,
    values: Vec<u64>,
    roots: Vec<Slot>,
    inputs: Vec<VarId>,
}

impl Simulator {
    pub fn new(mgr: &AigManager, roots: &[NodeRef]) -> Simulator {
        let order = mgr.cone(roots);
        let pos: HashMap<u32, usize> = order.iter().enumerate().map(|(s, &i)| (i, s)).collect();
        let slot = |r: NodeRef| Slot {
            at: pos[&r.index()],
            mask: if r.is_complemented() { u64::MAX } else { 0 },
        };
        let mut inputs = Vec::new();
        let ops = order
            .iter()
            .map(|&i| match mgr.nodes[i as usize] {
                Node::False => Op::Zero,
                Node::Var(v) => {
                    inputs.push(v);
                    Op::Leaf(v)
                }
                Node::And(a, b) => Op::And(slot(a), slot(b)),
            })
            .collect();
        Simulator {
            values: vec![0; order.len()],
            ops,
            roots: roots.iter().map(|&r| slot(r)).collect(),
            inputs,
        }
    }

    /// Leaf variables appearing in the cone.
    pub fn inputs(&self) -> &[VarId] {
        &self.inputs
    }

    /// Evaluates all roots; `pattern(v)` gives the 64 values of leaf `v`.
    pub fn run(&mut self, mut pattern: impl FnMut(VarId) -> u64) -> Vec<u64> {
        for s in 0..self.ops.len() {
            self.values[s] = match self.ops[s] {
                Op::Zero => 0,
                Op::Leaf(v) => pattern(v),
                Op::And(a, b) => self.get(a) & self.get(b),
            };
        }
        self.roots.iter().map(|&r| self.get(r)).collect()
    }

    fn get(&self, s: Slot) -> u64 {
        self.values[s.at] ^ s.mask
    }
}

/// Standard pattern for the `bit`-th enumerated variable within a 64-row
/// block: row `r` of the block has the variable set iff bit `bit` of `r` is.
pub fn block_pattern(bit: usize) -> u64 {
    const PATTERNS: [u64; 6] = [
        0xAAAA_AAAA_AAAA_AAAA,
        0xCCCC_CCCC_CCCC_CCCC,
        0xF0F0_F0F0_F0F0_F0F0,
        0xFF00_FF00_FF00_FF00,
        0xFFFF_0000_FFFF_0000,
        0xFFFF_FFFF_0000_0000,
    ];
    PATTERNS[bit]
}
