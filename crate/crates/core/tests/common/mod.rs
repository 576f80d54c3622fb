//! Independent reference simulator for the integration tests.
//!
//! States are sparse maps from per-register values to amplitudes, so none of
//! the library's index arithmetic is reused.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use qnokey::statevector::QuantumState;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[derive(Debug, Clone)]
pub struct Sim {
    pub regs: Vec<(String, usize)>,
    pub amps: BTreeMap<Vec<u64>, C64>,
}

impl Sim {
    pub fn message(amps: &[C64]) -> Self {
        let width = amps.len().trailing_zeros() as usize;
        let amps = amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(m, a)| (vec![m as u64], *a))
            .collect();
        Self { regs: vec![("I".into(), width)], amps }
    }

    fn pos(&self, reg: &str) -> usize {
        self.regs.iter().position(|(n, _)| n == reg).unwrap_or_else(|| panic!("no register {reg}"))
    }

    pub fn attach(&mut self, name: &str, width: usize) {
        self.regs.push((name.into(), width));
        self.amps = std::mem::take(&mut self.amps)
            .into_iter()
            .map(|(mut k, a)| {
                k.push(0);
                (k, a)
            })
            .collect();
    }

    pub fn oracle(&mut self, table: &[u64], src: &str, tgt: &str) {
        let (s, t) = (self.pos(src), self.pos(tgt));
        self.amps = std::mem::take(&mut self.amps)
            .into_iter()
            .map(|(mut k, a)| {
                k[t] ^= table[k[s] as usize];
                (k, a)
            })
            .collect();
    }

    pub fn xor_const(&mut self, reg: &str, mask: u64) {
        let p = self.pos(reg);
        self.amps = std::mem::take(&mut self.amps)
            .into_iter()
            .map(|(mut k, a)| {
                k[p] ^= mask;
                (k, a)
            })
            .collect();
    }

    pub fn permute(&mut self, table: &[u64], reg: &str) {
        let p = self.pos(reg);
        self.amps = std::mem::take(&mut self.amps)
            .into_iter()
            .map(|(mut k, a)| {
                k[p] = table[k[p] as usize];
                (k, a)
            })
            .collect();
    }

    pub fn hadamard(&mut self, reg: &str) {
        let p = self.pos(reg);
        let w = self.regs[p].1;
        let scale = (1u64 << w) as f64;
        let mut out: BTreeMap<Vec<u64>, C64> = BTreeMap::new();
        for (k, a) in &self.amps {
            for m in 0..1u64 << w {
                let sign = if (k[p] & m).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                let mut key = k.clone();
                key[p] = m;
                *out.entry(key).or_default() += a * sign / scale.sqrt();
            }
        }
        out.retain(|_, a| a.norm_sqr() > 1e-30);
        self.amps = out;
    }

    pub fn zero_prob(&self, reg: &str) -> f64 {
        let p = self.pos(reg);
        self.amps.iter().filter(|(k, _)| k[p] == 0).map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Projects `reg` onto zero and renormalizes; returns the probability.
    pub fn project_zero(&mut self, reg: &str) -> f64 {
        let p = self.pos(reg);
        let prob = self.zero_prob(reg);
        self.amps.retain(|k, _| k[p] == 0);
        if prob > 0.0 {
            for a in self.amps.values_mut() {
                *a /= prob.sqrt();
            }
        }
        prob
    }

    /// Removes a register that must read zero everywhere.
    pub fn drop_cleared(&mut self, reg: &str) {
        let p = self.pos(reg);
        assert!(self.amps.keys().all(|k| k[p] == 0), "register {reg} not cleared");
        self.regs.remove(p);
        self.amps = std::mem::take(&mut self.amps)
            .into_iter()
            .map(|(mut k, a)| {
                k.remove(p);
                (k, a)
            })
            .collect();
    }

    /// Largest amplitude difference to a library state with the same
    /// register names (in any order), including weight the library puts
    /// outside this state's support.
    pub fn distance(&self, state: &QuantumState) -> f64 {
        let names: Vec<&str> = state.layout().registers().iter().map(|r| r.name.as_str()).collect();
        let mut mine: Vec<&str> = self.regs.iter().map(|(n, _)| n.as_str()).collect();
        let mut theirs = names.clone();
        mine.sort();
        theirs.sort();
        if mine != theirs {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        let mut covered = 0.0;
        for (k, a) in &self.amps {
            let values: Vec<(&str, u64)> = self.regs.iter().zip(k).map(|((n, _), v)| (n.as_str(), *v)).collect();
            let b = state.amplitude(&values).expect("register values in range");
            worst = worst.max((a - b).norm());
            covered += b.norm_sqr();
        }
        worst.max((1.0 - covered).abs())
    }

    /// Dense vector over the registers in this simulator's order.
    pub fn dense(&self) -> Vec<C64> {
        let total: usize = self.regs.iter().map(|(_, w)| w).sum();
        let mut out = vec![C64::new(0.0, 0.0); 1 << total];
        for (k, a) in &self.amps {
            let idx = self.regs.iter().zip(k).fold(0usize, |acc, ((_, w), v)| (acc << w) | *v as usize);
            out[idx] = *a;
        }
        out
    }
}
