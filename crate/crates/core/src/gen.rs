//! Seeded random factored instances.
//!
//! Existentials are `x1..xn` with ids `1..=n`, free variables `y1..ym` with
//! ids `n+1..=n+m`. A factor is either a clause or an arbitrary
//! non-constant function of its variables.

use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aig::{AigManager, NodeRef, VarId};
use crate::frontend::FactoredSpec;

#[derive(Clone, Copy, Debug)]
pub struct GenParams {
    pub max_n: usize,
    pub max_m: usize,
    pub max_r: usize,
    pub max_width: usize,
    pub min_width: usize,
    /// Number of existentials forced into every factor (capped by its width).
    pub forced_x: usize,
    /// Chance that a factor is a clause rather than a tabulated function.
    pub clause_prob: f64,
}

impl Default for GenParams {
    fn default() -> GenParams {
        GenParams { max_n: 6, max_m: 6, max_r: 10, max_width: 4, min_width: 3, forced_x: 3, clause_prob: 0.8 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GenFactor {
    /// Literals as (0-based variable index, polarity).
    Clause(Vec<(usize, bool)>),
    /// Row `r` gives the value when `vars[j]` equals bit `j` of `r`.
    Table { vars: Vec<usize>, bits: Vec<bool> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomInstance {
    pub n: usize,
    pub m: usize,
    pub factors: Vec<GenFactor>,
}

/// Instance `index` of the stream for `seed`. Each index uses its own
/// ChaCha stream, so instances do not depend on how many were drawn before.
pub fn random_instance(seed: u64, index: u64, params: &GenParams) -> RandomInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let n = rng.gen_range(1..=params.max_n.max(1));
    let m = rng.gen_range(0..=params.max_m);
    let r = rng.gen_range(1..=params.max_r.max(1));
    let total = n + m;
    let factors = (0..r)
        .map(|_| {
            let hi = params.max_width.clamp(1, total);
            let w = rng.gen_range(params.min_width.clamp(1, hi)..=hi);
            let fx = params.forced_x.min(w).min(n);
            let mut vars = sample(&mut rng, n, fx).into_vec();
            let others: Vec<usize> = (0..total).filter(|v| !vars.contains(v)).collect();
            vars.extend(sample(&mut rng, others.len(), w - fx).into_iter().map(|k| others[k]));
            vars.sort_unstable();
            if rng.gen_bool(params.clause_prob) {
                GenFactor::Clause(vars.into_iter().map(|v| (v, rng.gen_bool(0.5))).collect())
            } else {
                let bits = loop {
                    let bits: Vec<bool> = (0..1 << w).map(|_| rng.gen_bool(0.5)).collect();
                    if bits.iter().any(|&b| b) && bits.iter().any(|&b| !b) {
                        break bits;
                    }
                };
                GenFactor::Table { vars, bits }
            }
        })
        .collect();
    RandomInstance { n, m, factors }
}

impl RandomInstance {
    fn var_id(&self, v: usize) -> VarId {
        VarId(v as u32 + 1)
    }

    fn var_name(&self, v: usize) -> String {
        if v < self.n {
            format!("x{}", v + 1)
        } else {
            format!("y{}", v - self.n + 1)
        }
    }

    /// Builds the spec directly, without going through a text format.
    pub fn to_spec(&self) -> FactoredSpec {
        let mut mgr = AigManager::new();
        for v in 0..self.n + self.m {
            mgr.set_name(self.var_id(v), self.var_name(v));
        }
        let factors = self
            .factors
            .iter()
            .map(|f| match f {
                GenFactor::Clause(lits) => {
                    let ls: Vec<NodeRef> = lits
                        .iter()
                        .map(|&(v, pos)| {
                            let l = mgr.mk_var(self.var_id(v));
                            if pos {
                                l
                            } else {
                                !l
                            }
                        })
                        .collect();
                    mgr.mk_big_or(ls)
                }
                GenFactor::Table { vars, bits } => {
                    let leaves: Vec<NodeRef> = vars.iter().map(|&v| mgr.mk_var(self.var_id(v))).collect();
                    shannon_aig(&mut mgr, &leaves, bits)
                }
            })
            .collect();
        let x_order = (0..self.n).map(|v| self.var_id(v)).collect();
        let y_vars = (self.n..self.n + self.m).map(|v| self.var_id(v)).collect();
        FactoredSpec::new(mgr, factors, x_order, y_vars)
    }

    pub fn to_fctr(&self) -> String {
        let mut out = String::new();
        for v in 0..self.n + self.m {
            let kind = if v < self.n { 'x' } else { 'y' };
            let _ = writeln!(out, "var {} : {};", self.var_name(v), kind);
        }
        for f in &self.factors {
            let body = match f {
                GenFactor::Clause(lits) => lits
                    .iter()
                    .map(|&(v, pos)| format!("{}{}", if pos { "" } else { "!" }, self.var_name(v)))
                    .collect::<Vec<_>>()
                    .join(" | "),
                GenFactor::Table { vars, bits } => {
                    let names: Vec<String> = vars.iter().map(|&v| self.var_name(v)).collect();
                    shannon_text(&names, bits)
                }
            };
            let _ = writeln!(out, "{};", body);
        }
        out
    }

    /// QDIMACS rendering. Tabulated factors become one clause per falsifying
    /// row, so the factor count differs from [`RandomInstance::to_spec`].
    pub fn to_qdimacs(&self) -> String {
        let mut clauses: Vec<Vec<i64>> = Vec::new();
        for f in &self.factors {
            match f {
                GenFactor::Clause(lits) => {
                    clauses.push(lits.iter().map(|&(v, pos)| if pos { v as i64 + 1 } else { -(v as i64 + 1) }).collect())
                }
                GenFactor::Table { vars, bits } => {
                    for (row, _) in bits.iter().enumerate().filter(|(_, &b)| !b) {
                        clauses.push(
                            vars.iter()
                                .enumerate()
                                .map(|(j, &v)| if row >> j & 1 == 1 { -(v as i64 + 1) } else { v as i64 + 1 })
                                .collect(),
                        );
                    }
                }
            }
        }
        let mut out = format!("p cnf {} {}\n", self.n + self.m, clauses.len());
        if self.m > 0 {
            let ys: Vec<String> = (self.n + 1..=self.n + self.m).map(|v| v.to_string()).collect();
            let _ = writeln!(out, "a {} 0", ys.join(" "));
        }
        let xs: Vec<String> = (1..=self.n).map(|v| v.to_string()).collect();
        let _ = writeln!(out, "e {} 0", xs.join(" "));
        for c in clauses {
            let lits: Vec<String> = c.iter().map(|l| l.to_string()).collect();
            let _ = writeln!(out, "{} 0", lits.join(" "));
        }
        out
    }
}

/// Splits on the last variable first, so `bits[..half]` is its 0-cofactor.
fn shannon_aig(mgr: &mut AigManager, leaves: &[NodeRef], bits: &[bool]) -> NodeRef {
    if bits.iter().all(|&b| b) {
        return NodeRef::TRUE;
    }
    if bits.iter().all(|&b| !b) {
        return NodeRef::FALSE;
    }
    let (&top, rest) = leaves.split_last().expect("non-constant table has a variable");
    let half = bits.len() / 2;
    let lo = shannon_aig(mgr, rest, &bits[..half]);
    let hi = shannon_aig(mgr, rest, &bits[half..]);
    let a = mgr.mk_and(top, hi);
    let b = mgr.mk_and(!top, lo);
    mgr.mk_or(a, b)
}

fn shannon_text(names: &[String], bits: &[bool]) -> String {
    if bits.iter().all(|&b| b) {
        return "1".into();
    }
    if bits.iter().all(|&b| !b) {
        return "0".into();
    }
    let (top, rest) = names.split_last().expect("non-constant table has a variable");
    let half = bits.len() / 2;
    let lo = shannon_text(rest, &bits[..half]);
    let hi = shannon_text(rest, &bits[half..]);
    format!("({} & {} | !{} & {})", top, hi, top, lo)
}
