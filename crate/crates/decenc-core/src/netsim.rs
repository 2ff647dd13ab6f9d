//! Deterministic round-synchronous p-port message-passing simulator.
//!
//! A [`Program`] is a fixed per-processor schedule plus coding scheme: it
//! declares its round count up front, computes each round's outgoing messages
//! from the pre-round state, and absorbs the messages delivered at the end of
//! the round. The simulator enforces the port constraint (at most `p` sends
//! and `p` receives per processor per round) and records the cost metrics:
//! `C1` rounds, per-round maximum message sizes `m_t` counted in field
//! elements, `C2 = sum(m_t)`, and `C = alpha*C1 + beta*ceil(log2 q)*C2`.

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::{Error, PortViolationKind, Result};
use crate::field::Elem;

/// Parameters of the p-port round model.
#[derive(Debug, Clone, PartialEq)]
pub struct NetParams {
    /// Processor count.
    pub n: usize,
    /// Ports per processor.
    pub ports: usize,
    /// Startup cost per round.
    pub alpha: f64,
    /// Per-bit transfer cost.
    pub beta: f64,
    /// Field modulus (only `ceil(log2 q)` enters the cost).
    pub q: u64,
    /// Payload width: field elements per logical symbol.
    pub width: usize,
}

impl NetParams {
    pub fn new(n: usize, ports: usize, alpha: f64, beta: f64, q: u64, width: usize) -> NetParams {
        assert!(n >= 1 && ports >= 1 && width >= 1);
        assert!(alpha >= 0.0 && beta >= 0.0);
        NetParams {
            n,
            ports,
            alpha,
            beta,
            q,
            width,
        }
    }
}

/// Bits needed to carry one element of GF(q): `ceil(log2 q)`.
pub fn bits_per_elem(q: u64) -> u32 {
    assert!(q >= 2);
    64 - (q - 1).leading_zeros()
}

/// Smallest `r` with `base^r >= n`.
pub fn ceil_log(base: usize, n: usize) -> usize {
    assert!(base >= 2 && n >= 1);
    let mut r = 0;
    let mut reach = 1usize;
    while reach < n {
        reach = reach.saturating_mul(base);
        r += 1;
    }
    r
}

/// One keyed run of field elements inside a message. The key identifies the
/// logical value for the receiver (the schedule fixes what arrives when, so
/// keys are bookkeeping, not transmitted data).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    pub key: u64,
    pub data: Vec<Elem>,
}

/// A point-to-point message sent within one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub src: usize,
    pub dst: usize,
    pub round: usize,
    pub chunks: Vec<Chunk>,
}

impl Message {
    /// Number of field elements carried; this is what `m_t` counts.
    pub fn payload_len(&self) -> usize {
        self.chunks.iter().map(|c| c.data.len()).sum()
    }
}

/// Per-processor local state: a key-value store of element vectors.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Memory {
    slots: BTreeMap<u64, Vec<Elem>>,
}

impl Memory {
    pub fn new() -> Memory {
        Memory::default()
    }

    pub fn from_input(input: &[Elem]) -> Memory {
        let mut m = Memory::new();
        m.insert(0, input.to_vec());
        m
    }

    pub fn get(&self, key: u64) -> Option<&Vec<Elem>> {
        self.slots.get(&key)
    }

    pub fn expect(&self, key: u64) -> &Vec<Elem> {
        self.slots.get(&key).expect("missing memory slot")
    }

    pub fn insert(&mut self, key: u64, data: Vec<Elem>) {
        self.slots.insert(key, data);
    }

    pub fn remove(&mut self, key: u64) -> Option<Vec<Elem>> {
        self.slots.remove(&key)
    }

    pub fn contains(&self, key: u64) -> bool {
        self.slots.contains_key(&key)
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&u64, &Vec<Elem>)> {
        self.slots.iter()
    }
}

/// A deterministic per-processor, per-round behavior executable by [`run`].
///
/// Round numbers are 1-based. `send` must compute outgoing messages from the
/// pre-round state; deliveries happen at the end of the round via `receive`,
/// which is invoked for every processor every round (possibly with an empty
/// inbox). Implementations must consult the `round` argument rather than
/// [`Message::round`], which combinators do not rewrite.
pub trait Program: Send + Sync {
    fn num_procs(&self) -> usize;

    /// Statically known round count; the simulator runs exactly this many.
    fn rounds(&self) -> usize;

    fn init(&self, proc: usize, input: &[Elem]) -> Memory;

    /// At most `p` outgoing `(destination, chunks)` pairs.
    fn send(&self, round: usize, proc: usize, mem: &Memory) -> Vec<(usize, Vec<Chunk>)>;

    fn receive(&self, round: usize, proc: usize, mem: &mut Memory, inbox: &[Message]);

    /// The processor's output symbol(s) once all rounds have run.
    fn finalize(&self, proc: usize, mem: Memory) -> Vec<Elem>;
}

/// Measured outcome of one simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    /// Rounds used.
    pub c1: usize,
    /// Per-round maximum message size, in field elements.
    pub mt: Vec<usize>,
    /// `sum(mt)`.
    pub c2: usize,
    /// `alpha*C1 + beta*ceil(log2 q)*C2`.
    pub cost: f64,
    /// Per-processor result vectors.
    pub outputs: Vec<Vec<Elem>>,
    /// Always empty on a successful run; violations abort with an error.
    pub violations: Vec<String>,
}

/// Evaluates `alpha*C1 + beta*ceil(log2 q)*C2` for a finished run.
pub fn cost_of(report: &RunReport, params: &NetParams) -> f64 {
    cost_from_counts(report.c1, report.c2, params)
}

pub fn cost_from_counts(c1: usize, c2: usize, params: &NetParams) -> f64 {
    params.alpha * c1 as f64 + params.beta * f64::from(bits_per_elem(params.q)) * c2 as f64
}

pub fn run(prog: &dyn Program, params: &NetParams, inputs: &[Vec<Elem>]) -> Result<RunReport> {
    run_with_trace(prog, params, inputs, None)
}

/// Like [`run`], optionally dumping one line-delimited record per message:
/// `{"round":t,"src":s,"dst":d,"len":n}`. Trace write failures are ignored.
pub fn run_with_trace(
    prog: &dyn Program,
    params: &NetParams,
    inputs: &[Vec<Elem>],
    mut trace: Option<&mut dyn Write>,
) -> Result<RunReport> {
    let n = prog.num_procs();
    if params.n != n || inputs.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "program over {n} processors, params.n = {}, {} input vectors",
            params.n,
            inputs.len()
        )));
    }
    let mut mems: Vec<Memory> = inputs
        .iter()
        .enumerate()
        .map(|(k, input)| prog.init(k, input))
        .collect();

    let rounds = prog.rounds();
    let mut mt = Vec::with_capacity(rounds);
    for t in 1..=rounds {
        let mut msgs: Vec<Message> = Vec::new();
        for (k, mem) in mems.iter().enumerate() {
            let outs = prog.send(t, k, mem);
            if outs.len() > params.ports {
                return Err(Error::PortViolation {
                    round: t,
                    proc: k,
                    kind: PortViolationKind::TooManySends,
                });
            }
            for (dst, chunks) in outs {
                debug_assert!(dst != k, "self-send from {k} at round {t}");
                debug_assert!(dst < n);
                let msg = Message {
                    src: k,
                    dst,
                    round: t,
                    chunks,
                };
                debug_assert!(msg.payload_len() >= 1, "empty message");
                msgs.push(msg);
            }
        }
        // Lexicographic (src, dst) order keeps runs reproducible.
        msgs.sort_by_key(|m| (m.src, m.dst));

        let mut in_degree = vec![0usize; n];
        for m in &msgs {
            in_degree[m.dst] += 1;
            if in_degree[m.dst] > params.ports {
                return Err(Error::PortViolation {
                    round: t,
                    proc: m.dst,
                    kind: PortViolationKind::TooManyReceives,
                });
            }
        }

        mt.push(msgs.iter().map(Message::payload_len).max().unwrap_or(0));
        if let Some(w) = trace.as_deref_mut() {
            for m in &msgs {
                let _ = writeln!(
                    w,
                    "{{\"round\":{},\"src\":{},\"dst\":{},\"len\":{}}}",
                    t,
                    m.src,
                    m.dst,
                    m.payload_len()
                );
            }
        }

        let mut inboxes: Vec<Vec<Message>> = vec![Vec::new(); n];
        for m in msgs {
            inboxes[m.dst].push(m);
        }
        for (k, mem) in mems.iter_mut().enumerate() {
            prog.receive(t, k, mem, &inboxes[k]);
        }
    }

    let outputs: Vec<Vec<Elem>> = mems
        .into_iter()
        .enumerate()
        .map(|(k, mem)| prog.finalize(k, mem))
        .collect();
    let c2 = mt.iter().sum();
    let cost = cost_from_counts(rounds, c2, params);
    Ok(RunReport {
        c1: rounds,
        mt,
        c2,
        cost,
        outputs,
        violations: Vec::new(),
    })
}

// ---------------------------------------------------------------------------
// Cost profiles
// ---------------------------------------------------------------------------

/// Predicted per-round maximum message sizes of a schedule. Profiles compose
/// the same way programs do: concatenation for sequencing, elementwise max
/// for lock-step parallel instances.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CostProfile {
    pub mt: Vec<usize>,
}

impl CostProfile {
    pub fn empty() -> CostProfile {
        CostProfile::default()
    }

    pub fn from_mt(mt: Vec<usize>) -> CostProfile {
        CostProfile { mt }
    }

    pub fn c1(&self) -> usize {
        self.mt.len()
    }

    pub fn c2(&self) -> usize {
        self.mt.iter().sum()
    }

    pub fn then(mut self, other: &CostProfile) -> CostProfile {
        self.mt.extend_from_slice(&other.mt);
        self
    }

    pub fn alongside(mut self, other: &CostProfile) -> CostProfile {
        if other.mt.len() > self.mt.len() {
            self.mt.resize(other.mt.len(), 0);
        }
        for (a, &b) in self.mt.iter_mut().zip(&other.mt) {
            *a = (*a).max(b);
        }
        self
    }

    pub fn cost(&self, params: &NetParams) -> f64 {
        cost_from_counts(self.c1(), self.c2(), params)
    }
}

// ---------------------------------------------------------------------------
// Combinators
// ---------------------------------------------------------------------------

/// Disjoint sub-programs running lock-step on subsets of the processors.
///
/// All parts start at round 1; parts with fewer rounds stay silent until the
/// longest one finishes. Processors not assigned to any part idle through the
/// phase and pass their input along unchanged.
pub struct Parallel {
    n: usize,
    rounds: usize,
    parts: Vec<Part>,
    assignment: Vec<Option<(usize, usize)>>,
}

struct Part {
    prog: Box<dyn Program>,
    members: Vec<usize>,
    local_of: BTreeMap<usize, usize>,
}

impl Parallel {
    pub fn new(n: usize, parts: Vec<(Box<dyn Program>, Vec<usize>)>) -> Parallel {
        let mut assignment: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut built = Vec::with_capacity(parts.len());
        let mut rounds = 0;
        for (pi, (prog, members)) in parts.into_iter().enumerate() {
            assert_eq!(
                prog.num_procs(),
                members.len(),
                "part size does not match its member list"
            );
            let mut local_of = BTreeMap::new();
            for (local, &phys) in members.iter().enumerate() {
                assert!(phys < n, "member {phys} outside processor range");
                assert!(
                    assignment[phys].is_none(),
                    "processor {phys} assigned to two parts"
                );
                assignment[phys] = Some((pi, local));
                local_of.insert(phys, local);
            }
            rounds = rounds.max(prog.rounds());
            built.push(Part {
                prog,
                members,
                local_of,
            });
        }
        Parallel {
            n,
            rounds,
            parts: built,
            assignment,
        }
    }
}

impl Program for Parallel {
    fn num_procs(&self) -> usize {
        self.n
    }

    fn rounds(&self) -> usize {
        self.rounds
    }

    fn init(&self, proc: usize, input: &[Elem]) -> Memory {
        match self.assignment[proc] {
            Some((pi, local)) => self.parts[pi].prog.init(local, input),
            None => Memory::from_input(input),
        }
    }

    fn send(&self, round: usize, proc: usize, mem: &Memory) -> Vec<(usize, Vec<Chunk>)> {
        let Some((pi, local)) = self.assignment[proc] else {
            return Vec::new();
        };
        let part = &self.parts[pi];
        if round > part.prog.rounds() {
            return Vec::new();
        }
        part.prog
            .send(round, local, mem)
            .into_iter()
            .map(|(dst, chunks)| (part.members[dst], chunks))
            .collect()
    }

    fn receive(&self, round: usize, proc: usize, mem: &mut Memory, inbox: &[Message]) {
        let Some((pi, local)) = self.assignment[proc] else {
            debug_assert!(inbox.is_empty(), "message delivered to idle processor");
            return;
        };
        let part = &self.parts[pi];
        if round > part.prog.rounds() {
            debug_assert!(inbox.is_empty());
            return;
        }
        let translated: Vec<Message> = inbox
            .iter()
            .map(|m| Message {
                src: *part
                    .local_of
                    .get(&m.src)
                    .expect("cross-part message delivery"),
                dst: local,
                round: m.round,
                chunks: m.chunks.clone(),
            })
            .collect();
        part.prog.receive(round, local, mem, &translated);
    }

    fn finalize(&self, proc: usize, mem: Memory) -> Vec<Elem> {
        match self.assignment[proc] {
            Some((pi, local)) => self.parts[pi].prog.finalize(local, mem),
            None => mem.expect(0).clone(),
        }
    }
}

/// Local recoding applied between phases of a [`Sequence`]:
/// `(processor, phase output) -> next phase input`.
pub type Recode = Box<dyn Fn(usize, Vec<Elem>) -> Vec<Elem> + Send + Sync>;

/// Phases executed back to back over the same processor set. Phase `i+1` is
/// initialized from phase `i`'s finalized outputs, optionally recoded locally
/// (recoding is free: it sends nothing).
///
/// `recodes` has one slot per phase boundary plus the outermost two: index 0
/// is applied to the program input, index `i+1` after phase `i`.
pub struct Sequence {
    n: usize,
    phases: Vec<Box<dyn Program>>,
    recodes: Vec<Option<Recode>>,
    starts: Vec<usize>,
    total_rounds: usize,
}

impl Sequence {
    pub fn new(n: usize, phases: Vec<Box<dyn Program>>, recodes: Vec<Option<Recode>>) -> Sequence {
        assert!(!phases.is_empty());
        assert_eq!(recodes.len(), phases.len() + 1);
        let mut starts = Vec::with_capacity(phases.len());
        let mut acc = 0;
        for ph in &phases {
            assert_eq!(ph.num_procs(), n, "phase processor count mismatch");
            starts.push(acc);
            acc += ph.rounds();
        }
        Sequence {
            n,
            phases,
            recodes,
            starts,
            total_rounds: acc,
        }
    }

    /// Sequence with identity recodes everywhere.
    pub fn plain(n: usize, phases: Vec<Box<dyn Program>>) -> Sequence {
        let recodes = (0..phases.len() + 1).map(|_| None).collect();
        Sequence::new(n, phases, recodes)
    }

    fn end_of(&self, i: usize) -> usize {
        self.starts[i] + self.phases[i].rounds()
    }

    /// Index of the phase active at 1-based global round `t`.
    fn active(&self, t: usize) -> usize {
        debug_assert!(t >= 1 && t <= self.total_rounds);
        for i in 0..self.phases.len() {
            if self.starts[i] < t && t <= self.end_of(i) {
                return i;
            }
        }
        unreachable!("round {t} outside all phases")
    }

    fn recode(&self, slot: usize, proc: usize, v: Vec<Elem>) -> Vec<Elem> {
        match &self.recodes[slot] {
            Some(f) => f(proc, v),
            None => v,
        }
    }

    /// Hands state from `phase` to every immediately following phase whose
    /// rounds end at the same global round `t`.
    fn advance(&self, mut phase: usize, t: usize, proc: usize, mem: &mut Memory) {
        while phase + 1 < self.phases.len() && self.end_of(phase) == t {
            let taken = std::mem::take(mem);
            let out = self.phases[phase].finalize(proc, taken);
            let fed = self.recode(phase + 1, proc, out);
            *mem = self.phases[phase + 1].init(proc, &fed);
            phase += 1;
        }
    }
}

impl Program for Sequence {
    fn num_procs(&self) -> usize {
        self.n
    }

    fn rounds(&self) -> usize {
        self.total_rounds
    }

    fn init(&self, proc: usize, input: &[Elem]) -> Memory {
        let fed = self.recode(0, proc, input.to_vec());
        let mut mem = self.phases[0].init(proc, &fed);
        self.advance(0, 0, proc, &mut mem);
        mem
    }

    fn send(&self, round: usize, proc: usize, mem: &Memory) -> Vec<(usize, Vec<Chunk>)> {
        let i = self.active(round);
        self.phases[i].send(round - self.starts[i], proc, mem)
    }

    fn receive(&self, round: usize, proc: usize, mem: &mut Memory, inbox: &[Message]) {
        let i = self.active(round);
        self.phases[i].receive(round - self.starts[i], proc, mem, inbox);
        if self.end_of(i) == round {
            self.advance(i, round, proc, mem);
        }
    }

    fn finalize(&self, proc: usize, mem: Memory) -> Vec<Elem> {
        let last = self.phases.len() - 1;
        let out = self.phases[last].finalize(proc, mem);
        self.recode(last + 1, proc, out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldCtx;

    /// One round; processor 0 sends `sends` copies of its element to 1.
    struct OneShot {
        sends: usize,
    }

    impl Program for OneShot {
        fn num_procs(&self) -> usize {
            2
        }
        fn rounds(&self) -> usize {
            1
        }
        fn init(&self, _proc: usize, input: &[Elem]) -> Memory {
            Memory::from_input(input)
        }
        fn send(&self, _round: usize, proc: usize, mem: &Memory) -> Vec<(usize, Vec<Chunk>)> {
            if proc == 0 {
                (0..self.sends)
                    .map(|_| {
                        (
                            1,
                            vec![Chunk {
                                key: 0,
                                data: mem.expect(0).clone(),
                            }],
                        )
                    })
                    .collect()
            } else {
                Vec::new()
            }
        }
        fn receive(&self, _round: usize, _proc: usize, mem: &mut Memory, inbox: &[Message]) {
            for m in inbox {
                mem.insert(1, m.chunks[0].data.clone());
            }
        }
        fn finalize(&self, proc: usize, mem: Memory) -> Vec<Elem> {
            if proc == 1 {
                mem.expect(1).clone()
            } else {
                mem.expect(0).clone()
            }
        }
    }

    struct Silent {
        n: usize,
    }

    impl Program for Silent {
        fn num_procs(&self) -> usize {
            self.n
        }
        fn rounds(&self) -> usize {
            0
        }
        fn init(&self, _proc: usize, input: &[Elem]) -> Memory {
            Memory::from_input(input)
        }
        fn send(&self, _: usize, _: usize, _: &Memory) -> Vec<(usize, Vec<Chunk>)> {
            Vec::new()
        }
        fn receive(&self, _: usize, _: usize, _: &mut Memory, _: &[Message]) {}
        fn finalize(&self, _proc: usize, mem: Memory) -> Vec<Elem> {
            mem.expect(0).clone()
        }
    }

    fn params(n: usize, ports: usize) -> NetParams {
        NetParams::new(n, ports, 1.0, 1.0, 13, 1)
    }

    #[test]
    fn single_message_run() {
        let ctx = FieldCtx::new(13).unwrap();
        let prog = OneShot { sends: 1 };
        let inputs = vec![vec![ctx.elem(7)], vec![ctx.elem(0)]];
        let report = run(&prog, &params(2, 1), &inputs).unwrap();
        assert_eq!(report.c1, 1);
        assert_eq!(report.mt, vec![1]);
        assert_eq!(report.c2, 1);
        assert_eq!(report.outputs[1], vec![ctx.elem(7)]);
        assert!(report.violations.is_empty());
    }

    #[test]
    fn empty_program_costs_nothing() {
        let ctx = FieldCtx::new(13).unwrap();
        let prog = Silent { n: 3 };
        let inputs = vec![vec![ctx.elem(1)]; 3];
        let report = run(&prog, &params(3, 1), &inputs).unwrap();
        assert_eq!((report.c1, report.c2), (0, 0));
        assert_eq!(report.cost, 0.0);
    }

    #[test]
    fn too_many_sends_is_a_port_violation() {
        let ctx = FieldCtx::new(13).unwrap();
        let prog = OneShot { sends: 2 };
        let inputs = vec![vec![ctx.elem(7)], vec![ctx.elem(0)]];
        let err = run(&prog, &params(2, 1), &inputs).unwrap_err();
        assert_eq!(
            err,
            Error::PortViolation {
                round: 1,
                proc: 0,
                kind: PortViolationKind::TooManySends
            }
        );
    }

    #[test]
    fn cost_formula_examples() {
        let p = NetParams::new(2, 1, 10.0, 1.0, 13, 1);
        assert_eq!(cost_from_counts(2, 3, &p), 32.0);
        assert_eq!(cost_from_counts(0, 0, &p), 0.0);
        let p2 = NetParams::new(2, 1, 0.0, 1.0, 2, 1);
        assert_eq!(cost_from_counts(7, 5, &p2), 5.0);
    }

    #[test]
    fn bits_per_elem_values() {
        assert_eq!(bits_per_elem(2), 1);
        assert_eq!(bits_per_elem(13), 4);
        assert_eq!(bits_per_elem(16), 4);
        assert_eq!(bits_per_elem(17), 5);
        assert_eq!(bits_per_elem(257), 9);
    }

    #[test]
    fn ceil_log_values() {
        assert_eq!(ceil_log(2, 1), 0);
        assert_eq!(ceil_log(2, 7), 3);
        assert_eq!(ceil_log(2, 8), 3);
        assert_eq!(ceil_log(3, 9), 2);
        assert_eq!(ceil_log(4, 5), 2);
    }

    #[test]
    fn runs_are_deterministic() {
        let ctx = FieldCtx::new(13).unwrap();
        let prog = OneShot { sends: 1 };
        let inputs = vec![vec![ctx.elem(9)], vec![ctx.elem(2)]];
        let a = run(&prog, &params(2, 1), &inputs).unwrap();
        let b = run(&prog, &params(2, 1), &inputs).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn trace_records_every_message() {
        let ctx = FieldCtx::new(13).unwrap();
        let prog = OneShot { sends: 1 };
        let inputs = vec![vec![ctx.elem(7)], vec![ctx.elem(0)]];
        let mut buf = Vec::new();
        run_with_trace(&prog, &params(2, 1), &inputs, Some(&mut buf)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "{\"round\":1,\"src\":0,\"dst\":1,\"len\":1}\n");
    }

    #[test]
    fn profile_composition() {
        let a = CostProfile::from_mt(vec![1, 2]);
        let b = CostProfile::from_mt(vec![4]);
        assert_eq!(a.clone().then(&b).mt, vec![1, 2, 4]);
        assert_eq!(a.clone().alongside(&b).mt, vec![4, 2]);
        assert_eq!(a.c1(), 2);
        assert_eq!(a.c2(), 3);
    }

    #[test]
    fn parallel_passes_idle_processors_through() {
        let ctx = FieldCtx::new(13).unwrap();
        let par = Parallel::new(3, vec![(Box::new(OneShot { sends: 1 }), vec![2, 0])]);
        // Physical 2 is local 0 (sender), physical 0 is local 1, physical 1 idles.
        let inputs = vec![vec![ctx.elem(5)], vec![ctx.elem(6)], vec![ctx.elem(7)]];
        let report = run(&par, &params(3, 1), &inputs).unwrap();
        assert_eq!(report.outputs[0], vec![ctx.elem(7)]);
        assert_eq!(report.outputs[1], vec![ctx.elem(6)]);
        assert_eq!(report.outputs[2], vec![ctx.elem(7)]);
    }

    #[test]
    fn sequence_chains_zero_round_phases() {
        let ctx = FieldCtx::new(13).unwrap();
        let double = |_k: usize, v: Vec<Elem>| vec![Elem::default(); v.len()];
        let _ = double;
        let c = ctx.clone();
        let seq = Sequence::new(
            2,
            vec![Box::new(Silent { n: 2 }), Box::new(Silent { n: 2 })],
            vec![
                None,
                Some(Box::new(move |_p, v: Vec<Elem>| {
                    v.iter().map(|&e| c.add(e, c.one())).collect()
                })),
                None,
            ],
        );
        assert_eq!(seq.rounds(), 0);
        let inputs = vec![vec![ctx.elem(3)], vec![ctx.elem(12)]];
        let report = run(&seq, &params(2, 1), &inputs).unwrap();
        assert_eq!(report.outputs[0], vec![ctx.elem(4)]);
        assert_eq!(report.outputs[1], vec![ctx.elem(0)]);
    }
}
