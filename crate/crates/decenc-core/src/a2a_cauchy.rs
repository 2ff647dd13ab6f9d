//! All-to-all encode for the Cauchy-like blocks of systematic GRS and
//! Lagrange generator matrices.
//!
//! Each block factors as `diag^-1 * V_alpha^-1 * V_beta * diag`, so the
//! encode is: scale locally, run an inverse-Vandermonde all-to-all encode,
//! run a forward Vandermonde encode, scale locally again. Each Vandermonde
//! stage independently picks draw-and-loose when its point list carries an
//! omega-grid structure and falls back to universal prepare-and-shoot
//! otherwise; correctness is dispatch-independent, only cost varies.

use crate::a2a_structured::{detect_omega_grid, dft_profile, draw_and_loose_program, OmegaGrid};
use crate::a2a_universal::{prepare_and_shoot, universal_profile};
use crate::error::{Error, Result};
use crate::field::{Elem, FieldCtx};
use crate::matrix::Mat;
use crate::netsim::{CostProfile, NetParams, Program, Recode, Sequence};
use crate::rng::SplitMix64;

/// The diagonals of the block decomposition for the stacked (K >= R) case:
/// `phi[s] = u[mR+s] * prod_{j outside block m} (alpha[mR+s] - alpha[j])` and
/// `psi[r] = v[r] * prod_{j outside block m} (beta[r] - alpha[j])`.
pub fn phi_psi_diagonals(
    ctx: &FieldCtx,
    alphas: &[Elem],
    betas: &[Elem],
    u: &[Elem],
    v: &[Elem],
    block: usize,
) -> Result<(Vec<Elem>, Vec<Elem>)> {
    let k = alphas.len();
    let r = betas.len();
    assert_eq!(u.len(), k);
    assert_eq!(v.len(), r);
    let lo = block * r;
    let hi = lo + r;
    assert!(hi <= k, "block {block} out of range");
    let outside: Vec<Elem> = (0..k)
        .filter(|&j| j < lo || j >= hi)
        .map(|j| alphas[j])
        .collect();

    let mut phi = Vec::with_capacity(r);
    for s in 0..r {
        let mut acc = u[lo + s];
        for &aj in &outside {
            acc = ctx.mul(acc, ctx.sub(alphas[lo + s], aj));
        }
        if acc.is_zero() {
            return Err(Error::ZeroScalar(s));
        }
        phi.push(acc);
    }
    let mut psi = Vec::with_capacity(r);
    for (rr, &b) in betas.iter().enumerate() {
        let mut acc = v[rr];
        for &aj in &outside {
            acc = ctx.mul(acc, ctx.sub(b, aj));
        }
        if acc.is_zero() {
            return Err(Error::ZeroScalar(rr));
        }
        psi.push(acc);
    }
    Ok((phi, psi))
}

/// One square Cauchy-like block ready to encode: the program computes
/// `x * diag(left)^-1 * V(alphas)^-1 * V(betas) * diag(right)`.
#[derive(Debug, Clone)]
pub struct CauchyBlockSpec {
    pub ctx: FieldCtx,
    pub size: usize,
    /// Points of the inverse-Vandermonde stage.
    pub alphas: Vec<Elem>,
    /// Points of the forward Vandermonde stage.
    pub betas: Vec<Elem>,
    /// Left diagonal; inputs are scaled by its entrywise inverse.
    pub left: Vec<Elem>,
    /// Right diagonal; outputs are scaled by it.
    pub right: Vec<Elem>,
}

impl CauchyBlockSpec {
    /// Block `m` of the stacked (K >= R) decomposition:
    /// `A_m = (V_{alpha,m} Phi_m)^-1 V_beta Psi`.
    pub fn stacked_block(
        ctx: &FieldCtx,
        alphas: &[Elem],
        betas: &[Elem],
        u: &[Elem],
        v: &[Elem],
        block: usize,
    ) -> Result<CauchyBlockSpec> {
        let r = betas.len();
        let (phi, psi) = phi_psi_diagonals(ctx, alphas, betas, u, v, block)?;
        Ok(CauchyBlockSpec {
            ctx: ctx.clone(),
            size: r,
            alphas: alphas[block * r..(block + 1) * r].to_vec(),
            betas: betas.to_vec(),
            left: phi,
            right: psi,
        })
    }

    /// Block `m` of the concatenated (K < R) decomposition:
    /// `A_m = (V_alpha P)^-1 V_{beta,m} Q_m` with `P = diag(u)`,
    /// `Q_m = diag(v)` restricted to the block.
    pub fn concat_block(
        ctx: &FieldCtx,
        alphas: &[Elem],
        betas: &[Elem],
        u: &[Elem],
        v: &[Elem],
        block: usize,
    ) -> Result<CauchyBlockSpec> {
        let k = alphas.len();
        let lo = block * k;
        let hi = lo + k;
        assert!(hi <= betas.len(), "block {block} out of range");
        if let Some(i) = u.iter().position(|e| e.is_zero()) {
            return Err(Error::ZeroScalar(i));
        }
        if let Some(i) = v[lo..hi].iter().position(|e| e.is_zero()) {
            return Err(Error::ZeroScalar(i));
        }
        Ok(CauchyBlockSpec {
            ctx: ctx.clone(),
            size: k,
            alphas: alphas.to_vec(),
            betas: betas[lo..hi].to_vec(),
            left: u.to_vec(),
            right: v[lo..hi].to_vec(),
        })
    }

    /// The block matrix itself, for oracle comparisons:
    /// `diag(left)^-1 V(alphas)^-1 V(betas) diag(right)`.
    pub fn block_matrix(&self) -> Result<Mat> {
        let va = Mat::vandermonde(&self.ctx, &self.alphas, self.size)?;
        let vb = Mat::vandermonde(&self.ctx, &self.betas, self.size)?;
        let left_inv: Result<Vec<Elem>> = self.left.iter().map(|&e| self.ctx.inv(e)).collect();
        Ok(va
            .inverse()?
            .scale_rows(&left_inv?)
            .matmul(&vb)?
            .scale_cols(&self.right))
    }
}

enum StageDispatch {
    Structured(OmegaGrid),
    Universal,
}

fn dispatch_stage(points: &[Elem], ctx: &FieldCtx, ports: usize) -> StageDispatch {
    match detect_omega_grid(points, ctx, ports) {
        Some(grid) if grid.depth() >= 1 => StageDispatch::Structured(grid),
        _ => StageDispatch::Universal,
    }
}

/// Four-stage encode of a Cauchy-like block; see the module docs. Output of
/// processor `s` is coordinate `s` of `x * A_m`.
pub fn cauchy_block_program(spec: &CauchyBlockSpec, ports: usize) -> Result<Sequence> {
    let ctx = spec.ctx.clone();
    let b = spec.size;

    let inverse_stage: Box<dyn Program> = match dispatch_stage(&spec.alphas, &ctx, ports) {
        StageDispatch::Structured(grid) => Box::new(draw_and_loose_program(&grid, ports, true)?),
        StageDispatch::Universal => {
            let va = Mat::vandermonde(&ctx, &spec.alphas, b)?;
            Box::new(prepare_and_shoot(va.inverse()?, ports)?)
        }
    };
    let forward_stage: Box<dyn Program> = match dispatch_stage(&spec.betas, &ctx, ports) {
        StageDispatch::Structured(grid) => Box::new(draw_and_loose_program(&grid, ports, false)?),
        StageDispatch::Universal => {
            let vb = Mat::vandermonde(&ctx, &spec.betas, b)?;
            Box::new(prepare_and_shoot(vb, ports)?)
        }
    };

    let pre_ctx = ctx.clone();
    let left_inv: Result<Vec<Elem>> = spec.left.iter().map(|&e| ctx.inv(e)).collect();
    let left_inv = left_inv?;
    let pre: Recode =
        Box::new(move |proc: usize, v: Vec<Elem>| pre_ctx.vec_scale(left_inv[proc], &v));
    let post_ctx = ctx.clone();
    let right = spec.right.clone();
    let post: Recode =
        Box::new(move |proc: usize, v: Vec<Elem>| post_ctx.vec_scale(right[proc], &v));

    Ok(Sequence::new(
        b,
        vec![inverse_stage, forward_stage],
        vec![Some(pre), None, Some(post)],
    ))
}

/// Per-round sizes of the block encode, mirroring the stage dispatch. The
/// inverse stage runs draw-and-loose backwards, so its profile is the loose
/// rounds followed by the draw rounds.
pub fn cauchy_profile(spec: &CauchyBlockSpec, ports: usize, width: usize) -> CostProfile {
    let stage = |points: &[Elem], backwards: bool| match dispatch_stage(points, &spec.ctx, ports) {
        StageDispatch::Structured(grid) => {
            let draw = universal_profile(grid.m(), ports, width);
            let loose = dft_profile(grid.radix(), grid.depth(), ports, width);
            if backwards {
                loose.then(&draw)
            } else {
                draw.then(&loose)
            }
        }
        StageDispatch::Universal => universal_profile(spec.size, ports, width),
    };
    stage(&spec.alphas, true).then(&stage(&spec.betas, false))
}

/// Closed-form block-encode cost (width 1); matches the measured run exactly.
pub fn predicted_cost_cauchy(
    spec: &CauchyBlockSpec,
    ports: usize,
    params: &NetParams,
) -> (usize, usize, f64) {
    let profile = cauchy_profile(spec, ports, 1);
    (
        profile.c1(),
        profile.c2(),
        crate::netsim::cost_from_counts(profile.c1(), profile.c2(), params),
    )
}

/// GRS code parameters produced by [`design_grs_points`]:
/// `(alphas, betas, u, v)`.
pub type GrsParams = (Vec<Elem>, Vec<Elem>, Vec<Elem>, Vec<Elem>);

/// Experiment helper: GRS evaluation points drawn as per-block omega grids
/// from disjoint generator-exponent ranges, so every block of the resulting
/// code encodes with draw-and-loose. Falls back to plain sequential points
/// when the sizes do not divide. Scalars `u`, `v` are random nonzero.
pub fn design_grs_points(
    ctx: &FieldCtx,
    k: usize,
    r: usize,
    ports: usize,
    rng: &mut SplitMix64,
) -> Result<GrsParams> {
    let q = ctx.modulus();
    if k == 0 || r == 0 || (k + r) as u64 > q - 1 {
        return Err(Error::BadShape(format!(
            "K + R = {} does not fit in GF({q})",
            k + r
        )));
    }
    let (alphas, betas) = design_structured(ctx, k, r, (ports + 1) as u64)
        .unwrap_or_else(|| sequential_points(ctx, k, r));
    let u: Vec<Elem> = (0..k).map(|_| ctx.elem(1 + rng.below(q - 1))).collect();
    let v: Vec<Elem> = (0..r).map(|_| ctx.elem(1 + rng.below(q - 1))).collect();
    Ok((alphas, betas, u, v))
}

/// Per-block grids of size `min(K, R)` over disjoint phi ranges: the exponent
/// ranges keep the subgroup cosets, and hence all K+R points, disjoint.
fn design_structured(
    ctx: &FieldCtx,
    k: usize,
    r: usize,
    radix: u64,
) -> Option<(Vec<Elem>, Vec<Elem>)> {
    let q = ctx.modulus();
    let block = k.min(r);
    let big = k.max(r);
    if !big.is_multiple_of(block) {
        return None;
    }
    let groups = big / block + 1;
    let mut depth = 0u32;
    while {
        let next = radix.checked_pow(depth + 1);
        matches!(next, Some(z) if (block as u64).is_multiple_of(z) && (q - 1).is_multiple_of(z))
    } {
        depth += 1;
    }
    if depth == 0 {
        return None;
    }
    let z = radix.pow(depth);
    let rows = block as u64 / z;
    if groups as u64 * rows > (q - 1) / z {
        return None;
    }
    let mut group_points = Vec::with_capacity(groups);
    for g in 0..groups as u64 {
        let phi: Vec<u64> = (0..rows).map(|i| g * rows + i).collect();
        let grid = crate::a2a_structured::make_omega_grid(ctx, block, radix, Some(phi)).ok()?;
        group_points.push(grid.points().to_vec());
    }
    if k >= r {
        let betas = group_points.pop().expect("at least one group");
        Some((group_points.concat(), betas))
    } else {
        let alphas = group_points.remove(0);
        Some((alphas, group_points.concat()))
    }
}

fn sequential_points(ctx: &FieldCtx, k: usize, r: usize) -> (Vec<Elem>, Vec<Elem>) {
    let alphas: Vec<Elem> = (1..=k as u64).map(|v| ctx.elem(v)).collect();
    let betas: Vec<Elem> = (k as u64 + 1..=(k + r) as u64)
        .map(|v| ctx.elem(v))
        .collect();
    (alphas, betas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netsim::{run, NetParams};

    fn params(n: usize, ports: usize, q: u64, width: usize) -> NetParams {
        NetParams::new(n.max(1), ports, 1.0, 1.0, q, width)
    }

    fn elems(ctx: &FieldCtx, vs: &[u64]) -> Vec<Elem> {
        vs.iter().map(|&v| ctx.elem(v)).collect()
    }

    fn distinct_points(ctx: &FieldCtx, count: usize, rng: &mut SplitMix64) -> Vec<Elem> {
        let mut pool: Vec<u64> = (0..ctx.modulus()).collect();
        rng.shuffle(&mut pool);
        pool[..count].iter().map(|&v| ctx.elem(v)).collect()
    }

    fn nonzero_scalars(ctx: &FieldCtx, count: usize, rng: &mut SplitMix64) -> Vec<Elem> {
        (0..count)
            .map(|_| ctx.elem(1 + rng.below(ctx.modulus() - 1)))
            .collect()
    }

    #[test]
    fn diagonal_example_by_hand() {
        let ctx = FieldCtx::new(13).unwrap();
        let (phi, psi) = phi_psi_diagonals(
            &ctx,
            &elems(&ctx, &[1, 2, 3, 4]),
            &elems(&ctx, &[5, 6]),
            &elems(&ctx, &[1, 1, 1, 1]),
            &elems(&ctx, &[1, 1]),
            0,
        )
        .unwrap();
        assert_eq!(phi, elems(&ctx, &[6, 2]));
        assert_eq!(psi, elems(&ctx, &[2, 6]));
    }

    #[test]
    fn single_block_diagonals_are_the_scalars() {
        let ctx = FieldCtx::new(13).unwrap();
        let u = elems(&ctx, &[3, 5]);
        let v = elems(&ctx, &[7, 11]);
        let (phi, psi) = phi_psi_diagonals(
            &ctx,
            &elems(&ctx, &[1, 2]),
            &elems(&ctx, &[3, 4]),
            &u,
            &v,
            0,
        )
        .unwrap();
        assert_eq!(phi, u);
        assert_eq!(psi, v);
    }

    #[test]
    fn stacked_decomposition_matches_systematic_blocks() {
        // 20 random parameter sets: the decomposed product equals the
        // corresponding row block of the slow systematic construction.
        let ctx = FieldCtx::new(257).unwrap();
        let mut rng = SplitMix64::new(70);
        for _ in 0..20 {
            let r = 1 + rng.below(4) as usize;
            let m_blocks = 1 + rng.below(4) as usize;
            let k = r * m_blocks;
            let pts = distinct_points(&ctx, k + r, &mut rng);
            let (alphas, betas) = pts.split_at(k);
            let u = nonzero_scalars(&ctx, k, &mut rng);
            let v = nonzero_scalars(&ctx, r, &mut rng);
            let full = Mat::systematic_grs(&ctx, alphas, betas, &u, &v).unwrap();
            for block in 0..m_blocks {
                let spec =
                    CauchyBlockSpec::stacked_block(&ctx, alphas, betas, &u, &v, block).unwrap();
                let got = spec.block_matrix().unwrap();
                let expect = full.row_block(block * r, r);
                assert_eq!(got, expect, "K={k} R={r} block={block}");
            }
        }
    }

    #[test]
    fn concat_decomposition_matches_systematic_blocks() {
        let ctx = FieldCtx::new(257).unwrap();
        let mut rng = SplitMix64::new(71);
        for _ in 0..20 {
            let k = 1 + rng.below(4) as usize;
            let m_blocks = 1 + rng.below(4) as usize;
            let r = k * m_blocks;
            let pts = distinct_points(&ctx, k + r, &mut rng);
            let (alphas, betas) = pts.split_at(k);
            let u = nonzero_scalars(&ctx, k, &mut rng);
            let v = nonzero_scalars(&ctx, r, &mut rng);
            let full = Mat::systematic_grs(&ctx, alphas, betas, &u, &v).unwrap();
            for block in 0..m_blocks {
                let spec =
                    CauchyBlockSpec::concat_block(&ctx, alphas, betas, &u, &v, block).unwrap();
                let got = spec.block_matrix().unwrap();
                let expect = full.col_block(block * k, k);
                assert_eq!(got, expect, "K={k} R={r} block={block}");
            }
        }
    }

    #[test]
    fn block_program_matches_oracle() {
        let ctx = FieldCtx::new(13).unwrap();
        let mut rng = SplitMix64::new(5);
        let alphas = elems(&ctx, &[1, 2, 3, 4]);
        let betas = elems(&ctx, &[5, 6]);
        let ones2 = elems(&ctx, &[1, 1]);
        let ones4 = elems(&ctx, &[1, 1, 1, 1]);
        let spec =
            CauchyBlockSpec::stacked_block(&ctx, &alphas, &betas, &ones4, &ones2, 0).unwrap();
        let prog = cauchy_block_program(&spec, 1).unwrap();
        let inputs: Vec<Vec<Elem>> = (0..2).map(|_| vec![ctx.elem(rng.next_u64())]).collect();
        let report = run(&prog, &params(2, 1, 13, 1), &inputs).unwrap();
        let x: Vec<Elem> = inputs.iter().map(|v| v[0]).collect();
        let full = Mat::systematic_grs(&ctx, &alphas, &betas, &ones4, &ones2).unwrap();
        let expect = full.row_block(0, 2).matvec(&x).unwrap();
        assert_eq!(report.outputs[0], vec![expect[0]]);
        assert_eq!(report.outputs[1], vec![expect[1]]);
        // Two single-round 2x2 Vandermonde stages.
        assert_eq!((report.c1, report.c2), (2, 2));
        let (c1, c2, cost) = predicted_cost_cauchy(&spec, 1, &params(2, 1, 13, 1));
        assert_eq!((report.c1, report.c2, report.cost), (c1, c2, cost));
    }

    #[test]
    fn lagrange_block_is_plain_cauchy_like() {
        let ctx = FieldCtx::new(13).unwrap();
        let mut rng = SplitMix64::new(6);
        let alphas = elems(&ctx, &[1, 2, 3]);
        let betas = elems(&ctx, &[5, 6, 7]);
        let ones = elems(&ctx, &[1, 1, 1]);
        let spec = CauchyBlockSpec::stacked_block(&ctx, &alphas, &betas, &ones, &ones, 0).unwrap();
        let prog = cauchy_block_program(&spec, 1).unwrap();
        let inputs: Vec<Vec<Elem>> = (0..3).map(|_| vec![ctx.elem(rng.next_u64())]).collect();
        let report = run(&prog, &params(3, 1, 13, 1), &inputs).unwrap();
        let x: Vec<Elem> = inputs.iter().map(|v| v[0]).collect();
        let expect = Mat::cauchy_like(&ctx, &alphas, &betas, &ones, &ones)
            .unwrap()
            .matvec(&x)
            .unwrap();
        for s in 0..3 {
            assert_eq!(report.outputs[s], vec![expect[s]]);
        }
    }

    #[test]
    fn unit_block_is_pure_scaling() {
        let ctx = FieldCtx::new(13).unwrap();
        let spec = CauchyBlockSpec::stacked_block(
            &ctx,
            &elems(&ctx, &[2]),
            &elems(&ctx, &[5]),
            &elems(&ctx, &[3]),
            &elems(&ctx, &[4]),
            0,
        )
        .unwrap();
        let prog = cauchy_block_program(&spec, 1).unwrap();
        let inputs = vec![vec![ctx.elem(7)]];
        let report = run(&prog, &params(1, 1, 13, 1), &inputs).unwrap();
        assert_eq!((report.c1, report.c2), (0, 0));
        let expect = spec.block_matrix().unwrap().matvec(&[ctx.elem(7)]).unwrap();
        assert_eq!(report.outputs[0], vec![expect[0]]);
        let (c1, c2, cost) = predicted_cost_cauchy(&spec, 1, &params(1, 1, 13, 1));
        assert_eq!((c1, c2, cost), (0, 0, 0.0));
    }

    #[test]
    fn structured_points_dispatch_to_draw_and_loose() {
        // Designed points give both stages omega grids; the round count is
        // twice a single Vandermonde stage and the costs match the profile.
        let ctx = FieldCtx::new(13).unwrap();
        let mut rng = SplitMix64::new(8);
        let (alphas, betas, u, v) = design_grs_points(&ctx, 6, 6, 2, &mut rng).unwrap();
        assert!(detect_omega_grid(&alphas, &ctx, 2).is_some());
        assert!(detect_omega_grid(&betas, &ctx, 2).is_some());
        let spec = CauchyBlockSpec::stacked_block(&ctx, &alphas, &betas, &u, &v, 0).unwrap();
        let prog = cauchy_block_program(&spec, 2).unwrap();
        let inputs: Vec<Vec<Elem>> = (0..6).map(|_| vec![ctx.elem(rng.next_u64())]).collect();
        let p = params(6, 2, 13, 1);
        let report = run(&prog, &p, &inputs).unwrap();
        let x: Vec<Elem> = inputs.iter().map(|v| v[0]).collect();
        let expect = spec.block_matrix().unwrap().matvec(&x).unwrap();
        for s in 0..6 {
            assert_eq!(report.outputs[s], vec![expect[s]]);
        }
        // Single draw-and-loose stage on this grid takes (2, 2).
        assert_eq!((report.c1, report.c2), (4, 4));
        let (c1, c2, cost) = predicted_cost_cauchy(&spec, 2, &p);
        assert_eq!((report.c1, report.c2, report.cost), (c1, c2, cost));
        let profile = cauchy_profile(&spec, 2, 1);
        assert_eq!(report.mt, profile.mt);
    }

    #[test]
    fn round_count_doubles_the_single_stage() {
        let ctx = FieldCtx::new(257).unwrap();
        let mut rng = SplitMix64::new(9);
        for (k, r, ports) in [(4usize, 4usize, 1usize), (8, 4, 1), (3, 9, 2)] {
            let pts = distinct_points(&ctx, k + r, &mut rng);
            let (alphas, betas) = pts.split_at(k);
            let u = nonzero_scalars(&ctx, k, &mut rng);
            let v = nonzero_scalars(&ctx, r, &mut rng);
            let b = k.min(r);
            let spec = if k >= r {
                CauchyBlockSpec::stacked_block(&ctx, alphas, betas, &u, &v, 0).unwrap()
            } else {
                CauchyBlockSpec::concat_block(&ctx, alphas, betas, &u, &v, 0).unwrap()
            };
            let prog = cauchy_block_program(&spec, ports).unwrap();
            let inputs: Vec<Vec<Elem>> = (0..b).map(|_| vec![ctx.elem(rng.next_u64())]).collect();
            let report = run(&prog, &params(b, ports, 257, 1), &inputs).unwrap();
            let single = crate::netsim::ceil_log(ports + 1, b);
            assert_eq!(report.c1, 2 * single, "K={k} R={r} p={ports}");
            let x: Vec<Elem> = inputs.iter().map(|v| v[0]).collect();
            let expect = spec.block_matrix().unwrap().matvec(&x).unwrap();
            for s in 0..b {
                assert_eq!(report.outputs[s], vec![expect[s]]);
            }
        }
    }

    #[test]
    fn designed_points_are_globally_distinct() {
        let mut rng = SplitMix64::new(10);
        for (q, k, r, ports) in [
            (13u64, 6usize, 3usize, 2usize),
            (13, 6, 6, 2),
            (257, 12, 4, 1),
            (257, 4, 12, 1),
            (257, 5, 3, 1),
        ] {
            let ctx = FieldCtx::new(q).unwrap();
            let (alphas, betas, u, v) = design_grs_points(&ctx, k, r, ports, &mut rng).unwrap();
            assert_eq!(alphas.len(), k);
            assert_eq!(betas.len(), r);
            assert_eq!(u.len(), k);
            assert_eq!(v.len(), r);
            let mut all: Vec<Elem> = alphas.clone();
            all.extend_from_slice(&betas);
            let len = all.len();
            all.sort();
            all.dedup();
            assert_eq!(all.len(), len, "q={q} K={k} R={r}");
        }
    }
}
