//! Universal all-to-all encode: the prepare-and-shoot algorithm.
//!
//! The scheduling is fixed per (K, p); only the coding coefficients depend on
//! the matrix, so the same program shape computes `x * C` for every square
//! `C`. The prepare phase runs K windowed binomial broadcasts in parallel so
//! that processor `k` ends up holding the inputs of the `m` processors behind
//! it. The shoot phase initializes per-destination partial combinations and
//! accumulates them along K parallel reduce trees with stride `m`. Window
//! tiling covers `n*m >= K` indices, so each processor finally subtracts the
//! doubly-counted terms locally.

use crate::error::{Error, Result};
use crate::field::{Elem, FieldCtx};
use crate::matrix::Mat;
use crate::netsim::{ceil_log, Chunk, CostProfile, Memory, Message, NetParams, Program};

/// Phase-length selection for prepare-and-shoot.
///
/// Invariants: `m*n >= K`, `(n-1)*m < K`, and `tp + ts = ceil(log_{p+1} K)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhasePlan {
    /// Prepare rounds.
    pub tp: u32,
    /// Shoot rounds.
    pub ts: u32,
    /// Prepare window size `(p+1)^tp`.
    pub m: usize,
    /// Shoot window count `(p+1)^ts`.
    pub n: usize,
    /// Overlap `n*m - K`, always `< m`.
    pub delta: usize,
}

/// Balanced split of `ceil(log_{p+1} K)` rounds between the phases, repaired
/// by shifting rounds from shoot to prepare until `(n-1)*m < K` holds. The
/// repair always terminates: `ts = 0` gives `n = 1` and `(n-1)*m = 0`.
pub fn choose_phase_lengths(k: usize, ports: usize) -> PhasePlan {
    assert!(k >= 2);
    let base = ports + 1;
    // Largest L with (p+1)^L < K.
    let mut l = 0u32;
    while pow(base, l + 1) < k {
        l += 1;
    }
    let (mut tp, mut ts) = if l.is_multiple_of(2) {
        (l / 2 + 1, l / 2)
    } else {
        (l.div_ceil(2), l.div_ceil(2))
    };
    loop {
        let m = pow(base, tp);
        let n = pow(base, ts);
        if (n - 1) * m < k {
            debug_assert!(k <= n * m);
            return PhasePlan {
                tp,
                ts,
                m,
                n,
                delta: n * m - k,
            };
        }
        tp += 1;
        ts -= 1;
    }
}

fn pow(base: usize, e: u32) -> usize {
    base.pow(e)
}

fn trivial_plan() -> PhasePlan {
    PhasePlan {
        tp: 0,
        ts: 0,
        m: 1,
        n: 1,
        delta: 0,
    }
}

/// `(a - b) mod n` without going negative.
fn sub_mod(a: usize, b: usize, n: usize) -> usize {
    (a + n - b % n) % n
}

/// Receive window of processor `k`: the indices `{k - l mod K : l < m}` whose
/// inputs the prepare phase delivers to `k` (distinct residues; the window
/// covers everything once `m >= K`).
pub fn receive_window(k: usize, plan: &PhasePlan, procs: usize) -> Vec<usize> {
    (0..plan.m.min(procs))
        .map(|l| sub_mod(k, l, procs))
        .collect()
}

/// Summation window of processor `k`: the `n` stride-`m` sources whose
/// partial packets the shoot phase accumulates into `k`.
pub fn sum_window(k: usize, plan: &PhasePlan, procs: usize) -> Vec<usize> {
    (0..plan.n).map(|l| sub_mod(k, l * plan.m, procs)).collect()
}

const W_BASE_OFFSET: u64 = 1 << 32;

fn w_key(dst: usize) -> u64 {
    W_BASE_OFFSET + dst as u64
}

/// The prepare-and-shoot program for a square coefficient matrix.
pub struct PrepareShoot {
    ctx: FieldCtx,
    coeffs: Mat,
    procs: usize,
    ports: usize,
    plan: PhasePlan,
}

pub fn prepare_and_shoot(coeffs: Mat, ports: usize) -> Result<PrepareShoot> {
    if coeffs.rows() != coeffs.cols() {
        return Err(Error::ShapeMismatch(format!(
            "all-to-all encode needs a square matrix, got {}x{}",
            coeffs.rows(),
            coeffs.cols()
        )));
    }
    let procs = coeffs.rows();
    let plan = if procs == 1 {
        trivial_plan()
    } else {
        choose_phase_lengths(procs, ports)
    };
    Ok(PrepareShoot {
        ctx: coeffs.ctx().clone(),
        coeffs,
        procs,
        ports,
        plan,
    })
}

impl PrepareShoot {
    pub fn plan(&self) -> &PhasePlan {
        &self.plan
    }

    /// Initializes the per-destination packets from the window of inputs the
    /// prepare phase delivered:
    /// `w[k, k + l*m] = sum_off C[k-off, k+l*m] * x[k-off]` over the `m`
    /// window offsets (with multiplicity if the window wraps; the final
    /// correction accounts for exactly that).
    fn init_shoot_packets(&self, proc: usize, mem: &mut Memory) {
        let kk = self.procs;
        let width = mem.expect(proc as u64).len();
        // Window inputs by offset, fetched once.
        let window: Vec<(usize, &Vec<Elem>)> = (0..self.plan.m)
            .map(|off| {
                let r = sub_mod(proc, off, kk);
                (r, mem.get(r as u64).expect("prepare window incomplete"))
            })
            .collect();
        let mut packets = Vec::with_capacity(self.plan.n);
        for l in 0..self.plan.n {
            let dst = (proc + l * self.plan.m) % kk;
            let mut acc = vec![Elem::ZERO; width];
            for &(r, x) in &window {
                self.ctx.vec_add_scaled(&mut acc, self.coeffs[(r, dst)], x);
            }
            packets.push((w_key(dst), acc));
        }
        for (key, acc) in packets {
            mem.insert(key, acc);
        }
    }

    /// Members of the subtree rooted at `root` in shoot round `t` (1-based):
    /// the destinations whose packets must still flow through `root`.
    fn shoot_tree(&self, root: usize, t: u32) -> Vec<usize> {
        let stride = self.plan.m * pow(self.ports + 1, t);
        let count = self.plan.n / pow(self.ports + 1, t);
        (0..count)
            .map(|j| (root + j * stride) % self.procs)
            .collect()
    }
}

impl Program for PrepareShoot {
    fn num_procs(&self) -> usize {
        self.procs
    }

    fn rounds(&self) -> usize {
        (self.plan.tp + self.plan.ts) as usize
    }

    fn init(&self, proc: usize, input: &[Elem]) -> Memory {
        let mut mem = Memory::new();
        mem.insert(proc as u64, input.to_vec());
        if self.plan.tp == 0 {
            self.init_shoot_packets(proc, &mut mem);
        }
        mem
    }

    fn send(&self, round: usize, proc: usize, mem: &Memory) -> Vec<(usize, Vec<Chunk>)> {
        let kk = self.procs;
        if round <= self.plan.tp as usize {
            // Prepare: forward the entire memory with stride (p+1)^(t-1).
            // Ascending strides keep every round-t message at exactly
            // (p+1)^(t-1) elements even when the window m exceeds K (repaired
            // plans), where the descending order would collide with itself
            // mid-phase; the delivered window is the same either way.
            let step = pow(self.ports + 1, round as u32 - 1);
            let chunks: Vec<Chunk> = mem
                .iter()
                .filter(|(&key, _)| key < W_BASE_OFFSET)
                .map(|(&key, data)| Chunk {
                    key,
                    data: data.clone(),
                })
                .collect();
            let mut dsts = Vec::new();
            for rho in 1..=self.ports {
                let dst = (proc + rho * step) % kk;
                if dst != proc && !dsts.contains(&dst) {
                    dsts.push(dst);
                }
            }
            dsts.into_iter().map(|d| (d, chunks.clone())).collect()
        } else {
            // Shoot: bundle the packets of the receiver's remaining subtree.
            let t = round as u32 - self.plan.tp;
            let step = self.plan.m * pow(self.ports + 1, t - 1);
            let mut out = Vec::new();
            for rho in 1..=self.ports {
                let dst = (proc + rho * step) % kk;
                debug_assert_ne!(dst, proc, "shoot stride wrapped to self");
                let chunks: Vec<Chunk> = self
                    .shoot_tree(dst, t)
                    .into_iter()
                    .map(|r| Chunk {
                        key: w_key(r),
                        data: mem.expect(w_key(r)).clone(),
                    })
                    .collect();
                out.push((dst, chunks));
            }
            out
        }
    }

    fn receive(&self, round: usize, proc: usize, mem: &mut Memory, inbox: &[Message]) {
        if round <= self.plan.tp as usize {
            for msg in inbox {
                for chunk in &msg.chunks {
                    if !mem.contains(chunk.key) {
                        mem.insert(chunk.key, chunk.data.clone());
                    }
                }
            }
            if round == self.plan.tp as usize {
                self.init_shoot_packets(proc, mem);
            }
        } else {
            for msg in inbox {
                for chunk in &msg.chunks {
                    let mut acc = mem.remove(chunk.key).expect("unknown shoot packet");
                    self.ctx.vec_add_into(&mut acc, &chunk.data);
                    mem.insert(chunk.key, acc);
                }
            }
        }
    }

    fn finalize(&self, proc: usize, mem: Memory) -> Vec<Elem> {
        let kk = self.procs;
        let mut out = mem.expect(w_key(proc)).clone();
        // Subtract the doubly-covered terms: window tiling counts the last
        // `delta = n*m - K` offsets twice, and those inputs are already local.
        for off in 0..self.plan.delta {
            let r = sub_mod(proc, off, kk);
            let coeff = self.coeffs[(r, proc)];
            let x = mem.get(r as u64).expect("correction term not local");
            let scaled = self.ctx.vec_scale(coeff, x);
            for (o, s) in out.iter_mut().zip(&scaled) {
                *o = self.ctx.sub(*o, *s);
            }
        }
        out
    }
}

/// Per-round message sizes of prepare-and-shoot: the prepare memory grows
/// (p+1)-fold per round, the shoot bundles shrink (p+1)-fold.
pub fn universal_profile(k: usize, ports: usize, width: usize) -> CostProfile {
    if k <= 1 {
        return CostProfile::empty();
    }
    let plan = choose_phase_lengths(k, ports);
    let mut mt = Vec::new();
    for t in 1..=plan.tp {
        mt.push(width * pow(ports + 1, t - 1));
    }
    for t in 1..=plan.ts {
        mt.push(width * (plan.n / pow(ports + 1, t)));
    }
    CostProfile::from_mt(mt)
}

/// Closed-form cost of prepare-and-shoot for a K-processor encode (width 1):
/// `C1 = ceil(log_{p+1} K)` and
/// `C2 = ((p+1)^Tp - 1)/p + ((p+1)^Ts - 1)/p` for the selected plan.
pub fn predicted_cost_universal(k: usize, ports: usize, params: &NetParams) -> (usize, usize, f64) {
    if k <= 1 {
        return (0, 0, 0.0);
    }
    let plan = choose_phase_lengths(k, ports);
    let c1 = (plan.tp + plan.ts) as usize;
    let c2 = (plan.m - 1) / ports + (plan.n - 1) / ports;
    (c1, c2, crate::netsim::cost_from_counts(c1, c2, params))
}

/// Lower bounds for any universal all-to-all encode algorithm:
/// `C1 >= ceil(log_{p+1} K)` and the counting bound on `C2`, the smallest
/// integer `T` with `p^2 T^2 - p(p-2) T + 2(1-K) >= 0`, evaluated exactly.
pub fn lower_bounds(k: usize, ports: usize) -> (usize, usize) {
    assert!(k >= 2);
    let c1 = ceil_log(ports + 1, k);
    let p = ports as i128;
    let kk = k as i128;
    let mut t: i128 = 0;
    while p * p * t * t - p * (p - 2) * t + 2 * (1 - kk) < 0 {
        t += 1;
    }
    (c1, t as usize)
}

/// Dissemination bound for a specific matrix: a row with no zero entry forces
/// its input to reach every processor, so `C1, C2 >= ceil(log_{p+1} K)`.
/// Returns `None` when no row qualifies.
pub fn dissemination_bound(coeffs: &Mat, ports: usize) -> Option<usize> {
    let k = coeffs.rows();
    let full_row = (0..k).any(|i| (0..coeffs.cols()).all(|j| !coeffs[(i, j)].is_zero()));
    full_row.then(|| ceil_log(ports + 1, k))
}
