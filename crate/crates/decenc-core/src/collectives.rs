//! Binomial-tree one-to-all broadcast and its dual all-to-one reduce.
//!
//! Both are expressed as [`Program`]s over local processor indices `0..n`
//! (embed them in a [`crate::netsim::Parallel`] to address physical ids) and
//! finish in `ceil(log_{p+1} N)` rounds with every round moving full
//! `W`-element payloads. The reduce schedule is the broadcast tree with the
//! communication order reversed and entrywise field addition as the combiner.
//!
//! The binomial tree moves whole payloads and is the right tool for the
//! small-`W` messages the encoding phases exchange. For wide payloads,
//! pipelined schedules that segment the vector do better; with
//! `b = ceil(log2 q)` bits per element, the best known one-port variant
//! costs `(sqrt((ceil(log2 N) - 1)*alpha) + sqrt(beta*b*W))^2`, and a
//! multi-port schedule segmenting into `m` packets costs
//! `(ceil(m/p) + ceil(log_{p+1} N)) * (alpha + beta*ceil(W*b/m))`. Neither
//! is implemented here; every cost claim in this crate is evaluated with
//! the binomial formula below.

use crate::field::{Elem, FieldCtx};
use crate::netsim::{ceil_log, Chunk, CostProfile, Memory, Message, NetParams, Program};

/// An ordered processor group with a designated root (broadcaster or reduce
/// sink), in the caller's id space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSpec {
    pub members: Vec<usize>,
    pub root: usize,
}

impl GroupSpec {
    pub fn new(members: Vec<usize>, root: usize) -> GroupSpec {
        assert!(members.contains(&root), "root must be a group member");
        let mut sorted = members.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), members.len(), "duplicate group member");
        GroupSpec { members, root }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Index of the root within the member list.
    pub fn root_position(&self) -> usize {
        self.members
            .iter()
            .position(|&m| m == self.root)
            .expect("root is a member")
    }
}

/// Splits `len` into `groups` parts, as balanced as possible, sizes assigned
/// largest-first (the remainder goes to the leading parts); empty parts are
/// dropped.
fn split_balanced(len: usize, groups: usize) -> Vec<usize> {
    let base = len / groups;
    let rem = len % groups;
    (0..groups)
        .map(|i| base + usize::from(i < rem))
        .filter(|&s| s > 0)
        .collect()
}

/// Per-round `(sender, receiver)` edges of the binomial broadcast over tree
/// positions `0..n`, position 0 being the root. Recursive (p+1)-way
/// splitting: each segment holder keeps the largest sub-segment and sends to
/// the representative (first position) of each other sub-segment.
fn broadcast_edges(n: usize, ports: usize) -> Vec<Vec<(usize, usize)>> {
    let rounds = broadcast_rounds(n, ports);
    let mut segments = vec![(0usize, n)];
    let mut out = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let mut edges = Vec::new();
        let mut next = Vec::new();
        for (start, len) in segments {
            if len <= 1 {
                next.push((start, len));
                continue;
            }
            let mut off = start;
            for (i, size) in split_balanced(len, ports + 1).into_iter().enumerate() {
                if i > 0 {
                    edges.push((start, off));
                }
                next.push((off, size));
                off += size;
            }
        }
        out.push(edges);
        segments = next;
    }
    out
}

const PAYLOAD: u64 = 0;

/// Tree position of each local processor: the root takes position 0, the
/// rest keep their relative order.
fn tree_order(n: usize, root: usize) -> Vec<usize> {
    let mut order = vec![root];
    order.extend((0..n).filter(|&m| m != root));
    order
}

/// One-to-all broadcast over local processors `0..n`: after
/// `ceil(log_{p+1} n)` rounds every member holds the root's payload.
pub struct Broadcast {
    /// `member_at[pos]` = local processor at tree position `pos`.
    member_at: Vec<usize>,
    position_of: Vec<usize>,
    rounds_edges: Vec<Vec<(usize, usize)>>,
}

pub fn broadcast_program(n: usize, root: usize, ports: usize) -> Broadcast {
    assert!(root < n);
    let member_at = tree_order(n, root);
    let mut position_of = vec![0; n];
    for (pos, &m) in member_at.iter().enumerate() {
        position_of[m] = pos;
    }
    Broadcast {
        member_at,
        position_of,
        rounds_edges: broadcast_edges(n, ports),
    }
}

impl Program for Broadcast {
    fn num_procs(&self) -> usize {
        self.member_at.len()
    }

    fn rounds(&self) -> usize {
        self.rounds_edges.len()
    }

    fn init(&self, _proc: usize, input: &[Elem]) -> Memory {
        // Non-root inputs are placeholders of the right width; deliveries
        // overwrite them.
        let mut mem = Memory::new();
        mem.insert(PAYLOAD, input.to_vec());
        mem
    }

    fn send(&self, round: usize, proc: usize, mem: &Memory) -> Vec<(usize, Vec<Chunk>)> {
        let pos = self.position_of[proc];
        self.rounds_edges[round - 1]
            .iter()
            .filter(|&&(s, _)| s == pos)
            .map(|&(_, r)| {
                (
                    self.member_at[r],
                    vec![Chunk {
                        key: PAYLOAD,
                        data: mem.expect(PAYLOAD).clone(),
                    }],
                )
            })
            .collect()
    }

    fn receive(&self, _round: usize, _proc: usize, mem: &mut Memory, inbox: &[Message]) {
        for m in inbox {
            mem.insert(PAYLOAD, m.chunks[0].data.clone());
        }
    }

    fn finalize(&self, _proc: usize, mem: Memory) -> Vec<Elem> {
        mem.expect(PAYLOAD).clone()
    }
}

/// All-to-one reduce with entrywise field addition: the broadcast schedule
/// reversed, accumulating every member's payload into the root.
pub struct Reduce {
    ctx: FieldCtx,
    member_at: Vec<usize>,
    position_of: Vec<usize>,
    rounds_edges: Vec<Vec<(usize, usize)>>,
}

pub fn reduce_program(n: usize, root: usize, ctx: &FieldCtx, ports: usize) -> Reduce {
    assert!(root < n);
    let member_at = tree_order(n, root);
    let mut position_of = vec![0; n];
    for (pos, &m) in member_at.iter().enumerate() {
        position_of[m] = pos;
    }
    // Round t of the reduce runs broadcast round (R - t + 1) with the edge
    // direction flipped.
    let rounds_edges = broadcast_edges(n, ports)
        .into_iter()
        .rev()
        .map(|edges| edges.into_iter().map(|(s, r)| (r, s)).collect())
        .collect();
    Reduce {
        ctx: ctx.clone(),
        member_at,
        position_of,
        rounds_edges,
    }
}

impl Program for Reduce {
    fn num_procs(&self) -> usize {
        self.member_at.len()
    }

    fn rounds(&self) -> usize {
        self.rounds_edges.len()
    }

    fn init(&self, _proc: usize, input: &[Elem]) -> Memory {
        let mut mem = Memory::new();
        mem.insert(PAYLOAD, input.to_vec());
        mem
    }

    fn send(&self, round: usize, proc: usize, mem: &Memory) -> Vec<(usize, Vec<Chunk>)> {
        let pos = self.position_of[proc];
        self.rounds_edges[round - 1]
            .iter()
            .filter(|&&(s, _)| s == pos)
            .map(|&(_, r)| {
                (
                    self.member_at[r],
                    vec![Chunk {
                        key: PAYLOAD,
                        data: mem.expect(PAYLOAD).clone(),
                    }],
                )
            })
            .collect()
    }

    fn receive(&self, _round: usize, _proc: usize, mem: &mut Memory, inbox: &[Message]) {
        for m in inbox {
            let acc = mem.remove(PAYLOAD).expect("reduce accumulator");
            mem.insert(PAYLOAD, self.ctx.vec_add(&acc, &m.chunks[0].data));
        }
    }

    fn finalize(&self, _proc: usize, mem: Memory) -> Vec<Elem> {
        mem.expect(PAYLOAD).clone()
    }
}

pub fn broadcast_rounds(n_group: usize, ports: usize) -> usize {
    if n_group <= 1 {
        0
    } else {
        ceil_log(ports + 1, n_group)
    }
}

/// Closed-form binomial broadcast cost:
/// `(alpha + beta*ceil(log2 q)*W) * ceil(log_{p+1} N)`.
pub fn cost_broadcast(n_group: usize, width: usize, params: &NetParams) -> f64 {
    let rounds = broadcast_rounds(n_group, params.ports);
    (params.alpha + params.beta * f64::from(crate::netsim::bits_per_elem(params.q)) * width as f64)
        * rounds as f64
}

/// Predicted per-round sizes: full payload every round.
pub fn broadcast_profile(n_group: usize, width: usize, ports: usize) -> CostProfile {
    CostProfile::from_mt(vec![width; broadcast_rounds(n_group, ports)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldCtx;
    use crate::netsim::{run, NetParams};
    use crate::rng::SplitMix64;

    fn params(n: usize, ports: usize, q: u64, width: usize) -> NetParams {
        NetParams::new(n, ports, 1.0, 1.0, q, width)
    }

    #[test]
    fn broadcast_reaches_everyone_and_matches_closed_form() {
        let ctx = FieldCtx::new(13).unwrap();
        for n in 1..=64 {
            for ports in [1usize, 2, 3] {
                let prog = broadcast_program(n, 0, ports);
                let payload = vec![ctx.elem(7), ctx.elem(11)];
                let mut inputs = vec![vec![ctx.zero(); 2]; n];
                inputs[0] = payload.clone();
                let p = params(n, ports, 13, 2);
                let report = run(&prog, &p, &inputs).unwrap();
                for out in &report.outputs {
                    assert_eq!(out, &payload, "n={n} p={ports}");
                }
                let rounds = broadcast_rounds(n, ports);
                assert_eq!(report.c1, rounds);
                assert_eq!(report.c2, 2 * rounds);
                assert_eq!(report.mt, vec![2; rounds]);
                assert_eq!(report.cost, cost_broadcast(n, 2, &p));
            }
        }
    }

    #[test]
    fn reduce_sums_all_payloads_into_the_root() {
        let ctx = FieldCtx::new(13).unwrap();
        let mut rng = SplitMix64::new(5);
        for n in 1..=64 {
            for ports in [1usize, 2, 3] {
                let prog = reduce_program(n, 0, &ctx, ports);
                let inputs: Vec<Vec<Elem>> =
                    (0..n).map(|_| vec![ctx.elem(rng.next_u64())]).collect();
                let expected = inputs.iter().fold(ctx.zero(), |acc, v| ctx.add(acc, v[0]));
                let report = run(&prog, &params(n, ports, 13, 1), &inputs).unwrap();
                assert_eq!(report.outputs[0], vec![expected], "n={n} p={ports}");
                assert_eq!(report.c1, broadcast_rounds(n, ports));
                assert_eq!(report.c2, broadcast_rounds(n, ports));
            }
        }
    }

    #[test]
    fn reduce_example_three_members_two_ports() {
        let ctx = FieldCtx::new(13).unwrap();
        let prog = reduce_program(3, 0, &ctx, 2);
        let inputs = vec![vec![ctx.elem(5)], vec![ctx.elem(7)], vec![ctx.elem(4)]];
        let report = run(&prog, &params(3, 2, 13, 1), &inputs).unwrap();
        assert_eq!(report.c1, 1);
        assert_eq!(report.outputs[0], vec![ctx.elem(3)]);
    }

    #[test]
    fn all_zero_reduce_and_singletons() {
        let ctx = FieldCtx::new(13).unwrap();
        let prog = reduce_program(4, 0, &ctx, 1);
        let inputs = vec![vec![ctx.zero()]; 4];
        let report = run(&prog, &params(4, 1, 13, 1), &inputs).unwrap();
        assert_eq!(report.outputs[0], vec![ctx.zero()]);

        let prog = reduce_program(1, 0, &ctx, 1);
        let report = run(&prog, &params(1, 1, 13, 1), &[vec![ctx.elem(9)]]).unwrap();
        assert_eq!(report.c1, 0);
        assert_eq!(report.outputs[0], vec![ctx.elem(9)]);
    }

    #[test]
    fn broadcast_round_examples() {
        assert_eq!(broadcast_rounds(4, 1), 2);
        assert_eq!(broadcast_rounds(1, 1), 0);
        assert_eq!(broadcast_rounds(9, 2), 2);
        assert_eq!(broadcast_rounds(7, 1), 3);
    }

    #[test]
    fn cost_broadcast_examples() {
        let p = NetParams::new(7, 1, 1.0, 1.0, 13, 1);
        assert_eq!(cost_broadcast(7, 1, &p), 15.0);
        assert_eq!(cost_broadcast(1, 1, &p), 0.0);
        let p = NetParams::new(4, 3, 0.0, 1.0, 2, 2);
        assert_eq!(cost_broadcast(4, 2, &p), 2.0);
    }

    #[test]
    fn nontrivial_root_index() {
        let ctx = FieldCtx::new(13).unwrap();
        let prog = broadcast_program(5, 3, 1);
        let mut inputs = vec![vec![ctx.zero()]; 5];
        inputs[3] = vec![ctx.elem(6)];
        let report = run(&prog, &NetParams::new(5, 1, 1.0, 1.0, 13, 1), &inputs).unwrap();
        for out in &report.outputs {
            assert_eq!(out, &vec![ctx.elem(6)]);
        }
    }

    #[test]
    fn reduce_into_nontrivial_root() {
        let ctx = FieldCtx::new(13).unwrap();
        let prog = reduce_program(6, 4, &ctx, 2);
        let inputs: Vec<Vec<Elem>> = (0..6).map(|i| vec![ctx.elem(i as u64)]).collect();
        let report = run(&prog, &params(6, 2, 13, 1), &inputs).unwrap();
        assert_eq!(report.outputs[4], vec![ctx.elem(15 % 13)]);
    }
}
