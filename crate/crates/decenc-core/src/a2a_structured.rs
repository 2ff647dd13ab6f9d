//! Structured all-to-all encode for Vandermonde matrices.
//!
//! Two schedules: a permuted-DFT encode for `K = P^H` with `K | q-1`, built
//! from `H` levels of size-`P` group encodes driven by a tree of field
//! elements, and draw-and-loose for general evaluation-point grids
//! `omega_{i,j} = alpha_i * beta_{j'}`, which factors a `K = M*Z` Vandermonde
//! computation into column-wise universal encodes of `V_M` (draw) followed by
//! row-wise permuted-DFT encodes of size `Z` (loose). Both run backwards to
//! compute inverses at the same cost.

use crate::a2a_universal::{prepare_and_shoot, universal_profile};
use crate::error::{Error, Result};
use crate::field::{digit_reverse, Elem, FieldCtx};
use crate::matrix::Mat;
use crate::netsim::{Chunk, CostProfile, Memory, Message, NetParams, Parallel, Program, Sequence};

// ---------------------------------------------------------------------------
// Element tree
// ---------------------------------------------------------------------------

/// The tree of field elements behind the permuted-DFT levels. Level `h`
/// holds `P^h` values; the vertex with base-P digit number `v` hosts
/// `beta^(v * K / P^h)`. Every child is a distinct P-th root of its parent,
/// the root hosts 1, and the leaves host the powers of `beta`.
pub struct ElementTree {
    radix: u64,
    levels: Vec<Vec<Elem>>,
}

impl ElementTree {
    pub fn new(ctx: &FieldCtx, k: usize, radix: u64, depth: u32) -> Result<ElementTree> {
        if radix < 2 && depth > 0 {
            return Err(Error::BadShape(format!("radix {radix} too small")));
        }
        if radix.checked_pow(depth) != Some(k as u64) {
            return Err(Error::BadShape(format!("K = {k} is not {radix}^{depth}")));
        }
        let beta = ctx.root_of_unity(k as u64)?;
        let mut levels = Vec::with_capacity(depth as usize + 1);
        for h in 0..=depth {
            let count = radix.pow(h);
            let stride = k as u64 / radix.pow(h);
            let level: Vec<Elem> = (0..count).map(|v| ctx.pow(beta, v * stride)).collect();
            levels.push(level);
        }
        let tree = ElementTree { radix, levels };
        tree.assert_invariants(ctx, beta);
        Ok(tree)
    }

    fn assert_invariants(&self, ctx: &FieldCtx, beta: Elem) {
        assert_eq!(self.levels[0][0], ctx.one(), "tree root must host 1");
        for h in 1..self.levels.len() {
            let parent_count = self.levels[h - 1].len() as u64;
            for (v, &gamma) in self.levels[h].iter().enumerate() {
                // Children carry the parent's digits plus a leading digit,
                // so the parent index is v mod P^(h-1).
                let parent = self.levels[h - 1][v % parent_count as usize];
                assert_eq!(
                    ctx.pow(gamma, self.radix),
                    parent,
                    "child^P must equal parent"
                );
            }
        }
        let last = self.levels.len() - 1;
        for (v, &gamma) in self.levels[last].iter().enumerate() {
            assert_eq!(gamma, ctx.pow(beta, v as u64), "leaf must host beta^k");
        }
    }

    pub fn value(&self, level: u32, vertex: usize) -> Elem {
        self.levels[level as usize][vertex]
    }
}

// ---------------------------------------------------------------------------
// Single-round full exchange (P = p+1 group encode)
// ---------------------------------------------------------------------------

/// All-to-all encode for a group of `P = p+1` processors in one round: every
/// member sends its symbol to the other `p` members and combines locally.
pub struct FullExchange {
    ctx: FieldCtx,
    coeffs: Mat,
}

impl FullExchange {
    pub fn new(coeffs: Mat) -> FullExchange {
        assert_eq!(coeffs.rows(), coeffs.cols());
        FullExchange {
            ctx: coeffs.ctx().clone(),
            coeffs,
        }
    }
}

impl Program for FullExchange {
    fn num_procs(&self) -> usize {
        self.coeffs.rows()
    }

    fn rounds(&self) -> usize {
        if self.coeffs.rows() > 1 {
            1
        } else {
            0
        }
    }

    fn init(&self, proc: usize, input: &[Elem]) -> Memory {
        let mut mem = Memory::new();
        mem.insert(proc as u64, input.to_vec());
        mem
    }

    fn send(&self, _round: usize, proc: usize, mem: &Memory) -> Vec<(usize, Vec<Chunk>)> {
        let data = mem.expect(proc as u64).clone();
        (0..self.coeffs.rows())
            .filter(|&d| d != proc)
            .map(|d| {
                (
                    d,
                    vec![Chunk {
                        key: proc as u64,
                        data: data.clone(),
                    }],
                )
            })
            .collect()
    }

    fn receive(&self, _round: usize, _proc: usize, mem: &mut Memory, inbox: &[Message]) {
        for m in inbox {
            for chunk in &m.chunks {
                mem.insert(chunk.key, chunk.data.clone());
            }
        }
    }

    fn finalize(&self, proc: usize, mem: Memory) -> Vec<Elem> {
        let width = mem.expect(proc as u64).len();
        let mut out = vec![Elem::ZERO; width];
        for rho in 0..self.coeffs.rows() {
            let coeff = self.coeffs[(rho, proc)];
            self.ctx
                .vec_add_scaled(&mut out, coeff, mem.expect(rho as u64));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Permuted-DFT program
// ---------------------------------------------------------------------------

/// Group encode used at every DFT level: a dedicated one-round exchange when
/// the radix equals `p+1`, nested prepare-and-shoot otherwise.
fn group_encode(coeffs: Mat, radix: u64, ports: usize) -> Result<Box<dyn Program>> {
    if radix == (ports + 1) as u64 {
        Ok(Box::new(FullExchange::new(coeffs)))
    } else {
        Ok(Box::new(prepare_and_shoot(coeffs, ports)?))
    }
}

/// All-to-all encode computing the digit-reversed DFT matrix (forward) or its
/// inverse. Processor `k` ends with the polynomial evaluation at
/// `beta^reverse(k)`.
pub fn permuted_dft_program(
    ctx: &FieldCtx,
    k: usize,
    radix: u64,
    depth: u32,
    ports: usize,
    inverse: bool,
) -> Result<Sequence> {
    let tree = ElementTree::new(ctx, k, radix, depth)?;
    let mut phases: Vec<Box<dyn Program>> = Vec::new();
    let order: Vec<u32> = if inverse {
        (1..=depth).rev().collect()
    } else {
        (1..=depth).collect()
    };
    for h in order {
        phases.push(Box::new(dft_level(
            ctx, k, radix, depth, h, ports, inverse, &tree,
        )?));
    }
    if phases.is_empty() {
        // K = 1: the identity encode, zero rounds.
        phases.push(Box::new(prepare_and_shoot(Mat::identity(ctx, 1), ports)?));
    }
    Ok(Sequence::plain(k, phases))
}

/// One DFT level: processors whose reversed indices agree outside digit `h`
/// form groups of `P`; each group encodes a P-point Vandermonde matrix on the
/// `P` children of the shared element-tree vertex.
#[allow(clippy::too_many_arguments)]
fn dft_level(
    ctx: &FieldCtx,
    k: usize,
    radix: u64,
    depth: u32,
    h: u32,
    ports: usize,
    inverse: bool,
    tree: &ElementTree,
) -> Result<Parallel> {
    let p_usize = radix as usize;
    let below = radix.pow(h - 1); // P^(h-1)
    let above = k as u64 / radix.pow(h); // P^(H-h)
    let mut parts: Vec<(Box<dyn Program>, Vec<usize>)> = Vec::new();
    for hi in 0..above {
        for low in 0..below {
            let mut members = Vec::with_capacity(p_usize);
            let mut points = Vec::with_capacity(p_usize);
            for c in 0..radix {
                let rev_index = hi * radix.pow(h) + c * below + low;
                members.push(digit_reverse(rev_index, radix, depth)? as usize);
                points.push(tree.value(h, (c * below + low) as usize));
            }
            let mut coeffs = Mat::vandermonde(ctx, &points, p_usize)?;
            if inverse {
                coeffs = coeffs.inverse()?;
            }
            parts.push((group_encode(coeffs, radix, ports)?, members));
        }
    }
    Ok(Parallel::new(k, parts))
}

// ---------------------------------------------------------------------------
// Omega grids and draw-and-loose
// ---------------------------------------------------------------------------

/// Structured evaluation-point descriptor: `K = M * Z` points
/// `omega_{i,j} = alpha_i * beta_{j'}` with `alpha_i = g^phi(i)`,
/// `beta_{j'} = g^(j'(q-1)/Z)`, `Z = P^H`, and `j'` the digit reversal of `j`.
#[derive(Debug, Clone)]
pub struct OmegaGrid {
    ctx: FieldCtx,
    radix: u64,
    depth: u32,
    z: usize,
    m: usize,
    phi: Vec<u64>,
    alphas: Vec<Elem>,
    betas: Vec<Elem>,
    points: Vec<Elem>,
}

impl OmegaGrid {
    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn radix(&self) -> u64 {
        self.radix
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Column count `Z = P^H`.
    pub fn z(&self) -> usize {
        self.z
    }

    /// Row count `M = K / Z`.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn phi(&self) -> &[u64] {
        &self.phi
    }

    pub fn alphas(&self) -> &[Elem] {
        &self.alphas
    }

    /// `beta` powers indexed by the reversed column index `j'`.
    pub fn betas(&self) -> &[Elem] {
        &self.betas
    }

    /// Grid-ordered evaluation points: `points[i*Z + j] = omega_{i,j}`.
    pub fn points(&self) -> &[Elem] {
        &self.points
    }

    /// The Vandermonde matrix this grid's draw-and-loose program computes.
    pub fn vandermonde(&self) -> Result<Mat> {
        Mat::vandermonde(&self.ctx, &self.points, self.points.len())
    }
}

/// Builds the grid for `K` processors and radix `P`: `H` is maximal with
/// `P^H | gcd(K, q-1)`. `phi` defaults to the identity map.
pub fn make_omega_grid(
    ctx: &FieldCtx,
    k: usize,
    radix: u64,
    phi: Option<Vec<u64>>,
) -> Result<OmegaGrid> {
    if radix < 2 {
        return Err(Error::BadShape(format!("radix {radix} too small")));
    }
    let qm1 = ctx.modulus() - 1;
    if k == 0 || k as u64 > qm1 {
        return Err(Error::BadShape(format!(
            "K = {k} does not fit in GF({})",
            ctx.modulus()
        )));
    }
    let mut depth = 0u32;
    while {
        let next = radix.checked_pow(depth + 1);
        matches!(next, Some(z) if (k as u64).is_multiple_of(z) && qm1.is_multiple_of(z))
    } {
        depth += 1;
    }
    let z = radix.pow(depth) as usize;
    let m = k / z;
    let phi_bound = qm1 / z as u64;
    let phi = phi.unwrap_or_else(|| (0..m as u64).collect());
    if phi.len() != m {
        return Err(Error::BadShape(format!(
            "phi table has {} entries, expected {m}",
            phi.len()
        )));
    }
    for &v in &phi {
        if v >= phi_bound {
            return Err(Error::PhiOutOfRange {
                value: v,
                bound: phi_bound,
            });
        }
    }
    let mut sorted = phi.clone();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::PhiNotInjective(w[0]));
    }

    let g = ctx.generator();
    let alphas: Vec<Elem> = phi.iter().map(|&e| ctx.pow(g, e)).collect();
    let betas: Vec<Elem> = (0..z as u64)
        .map(|jr| ctx.pow(g, jr * qm1 / z as u64))
        .collect();
    let mut points = Vec::with_capacity(k);
    for &alpha in &alphas {
        for j in 0..z as u64 {
            let jr = digit_reverse(j, radix, depth)?;
            points.push(ctx.mul(alpha, betas[jr as usize]));
        }
    }
    let mut check = points.clone();
    check.sort();
    check.dedup();
    if check.len() != points.len() {
        return Err(Error::DuplicatePoints);
    }
    Ok(OmegaGrid {
        ctx: ctx.clone(),
        radix,
        depth,
        z,
        m,
        phi,
        alphas,
        betas,
        points,
    })
}

/// Draw-and-loose: column-wise universal encodes of `V_M`, a local scaling by
/// `alpha_i^j`, then row-wise permuted-DFT encodes of size `Z`. Computes the
/// Vandermonde matrix on the grid points (in grid order), or its inverse when
/// `inverse` is set, by running the stages backwards.
pub fn draw_and_loose_program(grid: &OmegaGrid, ports: usize, inverse: bool) -> Result<Sequence> {
    let ctx = grid.ctx.clone();
    let (m, z) = (grid.m, grid.z);
    let k = m * z;

    let vm_points: Vec<Elem> = grid.alphas.iter().map(|&a| ctx.pow(a, z as u64)).collect();
    let mut vm = Mat::vandermonde(&ctx, &vm_points, m)?;
    if inverse {
        vm = vm.inverse()?;
    }

    let mut draw_parts: Vec<(Box<dyn Program>, Vec<usize>)> = Vec::new();
    for j in 0..z {
        let members: Vec<usize> = (0..m).map(|i| i * z + j).collect();
        draw_parts.push((Box::new(prepare_and_shoot(vm.clone(), ports)?), members));
    }
    let draw = Parallel::new(k, draw_parts);

    let mut loose_parts: Vec<(Box<dyn Program>, Vec<usize>)> = Vec::new();
    for i in 0..m {
        let members: Vec<usize> = (0..z).map(|j| i * z + j).collect();
        loose_parts.push((
            Box::new(permuted_dft_program(
                &ctx, z, grid.radix, grid.depth, ports, inverse,
            )?),
            members,
        ));
    }
    let loose = Parallel::new(k, loose_parts);

    // Scaling by alpha_i^j between the stages (inverted for the inverse run).
    let scale_ctx = ctx.clone();
    let alphas = grid.alphas.clone();
    let scale: crate::netsim::Recode = Box::new(move |proc: usize, v: Vec<Elem>| {
        let (i, j) = (proc / z, proc % z);
        let mut factor = scale_ctx.pow(alphas[i], j as u64);
        if inverse {
            factor = scale_ctx.inv(factor).expect("alpha powers are nonzero");
        }
        scale_ctx.vec_scale(factor, &v)
    });

    let phases: Vec<Box<dyn Program>> = if inverse {
        vec![Box::new(loose), Box::new(draw)]
    } else {
        vec![Box::new(draw), Box::new(loose)]
    };
    Ok(Sequence::new(k, phases, vec![None, Some(scale), None]))
}

// ---------------------------------------------------------------------------
// Cost prediction
// ---------------------------------------------------------------------------

/// Per-round sizes of one permuted-DFT level.
fn level_profile(radix: u64, ports: usize, width: usize) -> CostProfile {
    if radix == (ports + 1) as u64 {
        CostProfile::from_mt(vec![width])
    } else {
        universal_profile(radix as usize, ports, width)
    }
}

/// Per-round sizes of a permuted-DFT encode of `depth` levels.
pub fn dft_profile(radix: u64, depth: u32, ports: usize, width: usize) -> CostProfile {
    let mut out = CostProfile::empty();
    for _ in 0..depth {
        out = out.then(&level_profile(radix, ports, width));
    }
    out
}

/// Per-round sizes of draw-and-loose on a grid (forward order; the inverse
/// run permutes rounds without changing the totals).
pub fn structured_profile(grid: &OmegaGrid, ports: usize, width: usize) -> CostProfile {
    universal_profile(grid.m, ports, width).then(&dft_profile(grid.radix, grid.depth, ports, width))
}

/// Closed-form draw-and-loose cost for width-1 payloads; matches the measured
/// run exactly.
pub fn predicted_cost_structured(
    grid: &OmegaGrid,
    ports: usize,
    params: &NetParams,
) -> (usize, usize, f64) {
    let profile = structured_profile(grid, ports, 1);
    (
        profile.c1(),
        profile.c2(),
        crate::netsim::cost_from_counts(profile.c1(), profile.c2(), params),
    )
}

// ---------------------------------------------------------------------------
// Grid detection
// ---------------------------------------------------------------------------

/// Brute-force search for an omega-grid factorization of an ordered point
/// list: radix candidates up to 8, depth maximal first. Returns the grid
/// whose materialized points equal the input elementwise, or `None`.
pub fn detect_omega_grid(points: &[Elem], ctx: &FieldCtx, _ports: usize) -> Option<OmegaGrid> {
    let k = points.len();
    if k == 0 || points.iter().any(|p| p.is_zero()) {
        return None;
    }
    let qm1 = ctx.modulus() - 1;
    if k as u64 > qm1 {
        return None;
    }
    // Discrete logs by one pass over the generator's powers.
    let mut dlog = std::collections::BTreeMap::new();
    let mut pw = ctx.one();
    for e in 0..qm1 {
        dlog.entry(pw).or_insert(e);
        pw = ctx.mul(pw, ctx.generator());
    }

    let try_candidate = |radix: u64, depth: u32| -> Option<OmegaGrid> {
        let z = radix.pow(depth) as usize;
        let m = k / z;
        let phi_bound = qm1 / z as u64;
        let mut phi = Vec::with_capacity(m);
        for i in 0..m {
            let alpha = points[i * z];
            let e = *dlog.get(&alpha)?;
            if e >= phi_bound {
                return None;
            }
            phi.push(e);
        }
        let grid = make_omega_grid(ctx, k, radix, Some(phi)).ok()?;
        (grid.points() == points).then_some(grid)
    };

    if k == 1 {
        return try_candidate(2, 0);
    }
    let mut best: Option<OmegaGrid> = None;
    for radix in 2u64..=8 {
        let mut depth = 0u32;
        while {
            let next = radix.checked_pow(depth + 1);
            matches!(next, Some(z) if (k as u64).is_multiple_of(z) && qm1.is_multiple_of(z))
        } {
            depth += 1;
        }
        for d in (1..=depth).rev() {
            if let Some(grid) = try_candidate(radix, d) {
                let better = match &best {
                    Some(b) => grid.z() > b.z(),
                    None => true,
                };
                if better {
                    best = Some(grid);
                }
                break;
            }
        }
    }
    best
}
