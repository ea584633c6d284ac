//! Certified global optimization of the penalized problem via its big-M
//! mixed-integer formulation
//!
//! ```text
//! min G(beta) + lambda0 sum_i z_i   s.t. |beta_i| <= M z_i, z_i in {0,1}
//! ```
//!
//! solved by a built-in branch-and-bound routine whose nodes only branch on
//! a designated integrality set `I`: the binaries outside `I` are relaxed to
//! `[0,1]`, and eliminating them in closed form (`z_i = |beta_i|/M`) turns
//! every node relaxation into a box-constrained convex problem with an extra
//! `lambda0/M` l1 weight on the free coordinates, solvable by proximal
//! coordinate descent. The integrality generation loop starts from `I =
//! Supp(warm start)` and grows `I` by the most fractional indicators until
//! the relaxed solution comes out integral, which certifies optimality for
//! the full problem.
//!
//! Upper bounds always come from feasible coefficient vectors; lower bounds
//! are node-relaxation optima solved to a tolerance well below the gap
//! tolerance.

use serde::Serialize;

use crate::cd::{
    cd_fit, convex_box_solve, ConvexBoxProblem, Diagnostics, FitOptions, Solution,
};
use crate::data::Dataset;
use crate::loss::{
    coordinate_lipschitz, mean_loss, LossKind, PenaltyParams, LIPSCHITZ_FLOOR,
};
use crate::Result;

/// The partial-integrality problem instance handed to the solver.
#[derive(Clone, Debug)]
pub struct MipProblem<'a> {
    pub data: &'a Dataset,
    pub kind: LossKind,
    pub lam: PenaltyParams,
    /// Big-M bound; must dominate the sup-norm of some optimal solution for
    /// the certificate to apply to the unbounded problem.
    pub big_m: f64,
    /// Sorted set of coordinates whose indicators are binary.
    pub integrality: Vec<usize>,
}

#[derive(Clone, Copy, Debug)]
pub struct MipOptions {
    /// Certified-gap target `(UB - LB)/LB`.
    pub gap_tol: f64,
    /// Total cap on solved node relaxations; integrality generation hands
    /// each inner branch-and-bound call the remaining allowance.
    pub node_budget: usize,
    /// `z` entries within this distance of {0,1} count as integral.
    pub integrality_tol: f64,
    /// Coefficient tolerance of the node-relaxation solver; kept well below
    /// `gap_tol` so relaxation values are trustworthy bounds.
    pub relax_tol: f64,
    pub relax_max_cycles: usize,
    pub max_iga_iters: usize,
    /// Integrality indices added per IGA iteration (largest fractional z).
    pub max_add_per_iter: usize,
    /// Alternative expansion rule: add every fractional `z_i >= tau`.
    pub frac_cutoff: Option<f64>,
    /// Big-M override; `None` derives it from the warm start.
    pub big_m: Option<f64>,
}

impl Default for MipOptions {
    fn default() -> Self {
        MipOptions {
            gap_tol: 1e-6,
            node_budget: 10_000,
            integrality_tol: 1e-6,
            relax_tol: 1e-8,
            relax_max_cycles: 50_000,
            max_iga_iters: 100,
            max_add_per_iter: 10,
            frac_cutoff: None,
            big_m: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MipStatus {
    Optimal,
    GapReached,
    BudgetExhausted,
}

#[derive(Clone, Debug, Serialize)]
pub struct MipResult {
    pub beta: Vec<(usize, f64)>,
    /// Indicator vector: binary on the integrality set, `|beta_i|/M`
    /// elsewhere.
    pub z: Vec<f64>,
    pub upper_bound: f64,
    pub lower_bound: f64,
    /// `(UB - LB)/LB`.
    pub gap: f64,
    pub nodes_explored: usize,
    pub iga_iterations: usize,
    pub status: MipStatus,
    pub big_m: f64,
}

fn guarded_gap(ub: f64, lb: f64) -> f64 {
    if lb > 0.0 {
        ((ub - lb) / lb).max(0.0)
    } else if ub.abs() <= 1e-12 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Big-M from a warm start: `1.2 * ||beta||_inf`, falling back to 1.0 with a
/// warning when the warm start is the zero vector (no scale information).
pub fn choose_big_m(warm: &Solution) -> f64 {
    let max_abs = warm.max_abs();
    if max_abs == 0.0 {
        log::warn!("zero warm start gives no scale for big-M; falling back to M = 1.0");
        1.0
    } else {
        1.2 * max_abs
    }
}

/// One branch-and-bound node: partial fixing of the integrality set, the
/// node relaxation's solution (used to warm start children), and its bound.
#[derive(Clone, Debug)]
pub struct MipNode {
    /// `fixed[t]` fixes `integrality[t]`; `None` leaves it relaxed.
    pub fixed: Vec<Option<bool>>,
    pub lower_bound: f64,
    pub relax_beta: Vec<f64>,
    pub depth: usize,
}

#[derive(Clone, Debug)]
pub struct RelaxOutcome {
    pub beta: Vec<f64>,
    /// Full-length indicators: fixed values on fixed coordinates,
    /// `|beta_i|/M` on everything else.
    pub z: Vec<f64>,
    /// Valid lower bound for every completion of the node (the relaxation's
    /// objective, including the `lambda0` charge of z-fixed-to-one
    /// coordinates).
    pub bound: f64,
    pub converged: bool,
}

/// Solves the convex node relaxation: free coordinates carry the extra
/// `lambda0/M` l1 weight from eliminating their box-linked indicator,
/// fixed-one coordinates a flat `lambda0` charge, fixed-zero coordinates are
/// pinned at zero. Coefficients live in `[-M, M]`.
pub fn solve_relaxation(
    prob: &MipProblem,
    fixed: &[Option<bool>],
    warm: &[f64],
    opts: &MipOptions,
) -> RelaxOutcome {
    let p = prob.data.p();
    assert_eq!(fixed.len(), prob.integrality.len());
    let m = prob.big_m;
    let lam = &prob.lam;

    let mut l1_eff = vec![lam.lambda1 + lam.lambda0 / m; p];
    let mut frozen_zero = vec![false; p];
    let mut fixed_one_count = 0usize;
    for (t, &i) in prob.integrality.iter().enumerate() {
        match fixed[t] {
            Some(false) => frozen_zero[i] = true,
            Some(true) => {
                l1_eff[i] = lam.lambda1;
                fixed_one_count += 1;
            }
            None => {}
        }
    }

    let lhat: Vec<f64> = coordinate_lipschitz(prob.kind, prob.data)
        .into_iter()
        .map(|l| (1.05 * l).max(LIPSCHITZ_FLOOR))
        .collect();
    let box_prob = ConvexBoxProblem {
        d: prob.data,
        kind: prob.kind,
        l1_eff,
        lambda2: lam.lambda2,
        box_bound: m,
        frozen_zero,
    };
    let solve = convex_box_solve(&box_prob, warm, &lhat, opts.relax_tol, opts.relax_max_cycles);
    if !solve.converged {
        log::warn!(
            "node relaxation hit its cycle cap (kkt residual {:.3e}); the parent bound is kept for this node",
            solve.kkt_residual
        );
    }

    let mut z = vec![0.0; p];
    for j in 0..p {
        z[j] = solve.beta[j].abs() / m;
    }
    for (t, &i) in prob.integrality.iter().enumerate() {
        if let Some(v) = fixed[t] {
            z[i] = if v { 1.0 } else { 0.0 };
        }
    }

    RelaxOutcome {
        beta: solve.beta,
        z,
        bound: solve.objective + lam.lambda0 * fixed_one_count as f64,
        converged: solve.converged,
    }
}

/// The partial-integrality objective of a feasible `(beta, z)` pair where
/// `z` is binary on the integrality set.
fn pmio_value(prob: &MipProblem, beta: &[f64], z: &[f64]) -> f64 {
    let scores = prob.data.scores_dense(beta);
    let g = mean_loss(prob.kind, &scores, prob.data.y());
    let lam = &prob.lam;
    let l1: f64 = beta.iter().map(|b| b.abs()).sum();
    let l2: f64 = beta.iter().map(|b| b * b).sum();
    g + lam.lambda1 * l1 + lam.lambda2 * l2 + lam.lambda0 * z.iter().sum::<f64>()
}

struct QueueEntry {
    bound: f64,
    seq: usize,
    node: MipNode,
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound && self.seq == other.seq
    }
}
impl Eq for QueueEntry {}
impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // reversed: BinaryHeap pops the max, we want the smallest bound,
        // ties by insertion order
        other
            .bound
            .total_cmp(&self.bound)
            .then(other.seq.cmp(&self.seq))
    }
}

/// Best-bound-first branch and bound on the partial-integrality problem.
/// The incumbent must be feasible for the big-M formulation; it is clipped
/// to the box and re-evaluated otherwise.
pub fn branch_and_bound(
    prob: &MipProblem,
    incumbent: &Solution,
    opts: &MipOptions,
) -> MipResult {
    let warm = incumbent.dense();
    branch_and_bound_from(prob, incumbent, &warm, opts)
}

fn branch_and_bound_from(
    prob: &MipProblem,
    incumbent: &Solution,
    root_warm: &[f64],
    opts: &MipOptions,
) -> MipResult {
    let p = prob.data.p();
    let m = prob.big_m;
    let in_i = {
        let mut mask = vec![false; p];
        for &i in &prob.integrality {
            mask[i] = true;
        }
        mask
    };

    // incumbent: clip into the box and evaluate the PMIO objective honestly
    let mut best_beta: Vec<f64> = incumbent
        .dense()
        .iter()
        .map(|b| b.clamp(-m, m))
        .collect();
    let mut best_z: Vec<f64> = (0..p)
        .map(|j| {
            if in_i[j] {
                if best_beta[j] != 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                best_beta[j].abs() / m
            }
        })
        .collect();
    let mut ub = pmio_value(prob, &best_beta, &best_z);

    let mut heap = std::collections::BinaryHeap::new();
    let mut seq = 0usize;
    // nodes_explored counts solved node relaxations (root included)
    let mut nodes_explored = 0usize;
    let mut lb = 0.0f64;

    // Solves one node; integral nodes immediately become incumbent
    // candidates, branchable nodes are queued unless dominated.
    let mut close_or_push = |fixed: Vec<Option<bool>>,
                             warm: &[f64],
                             parent_bound: f64,
                             depth: usize,
                             ub: &mut f64,
                             best_beta: &mut Vec<f64>,
                             best_z: &mut Vec<f64>,
                             heap: &mut std::collections::BinaryHeap<QueueEntry>,
                             nodes_explored: &mut usize|
     -> f64 {
        let relax = solve_relaxation(prob, &fixed, warm, opts);
        *nodes_explored += 1;
        let bound = if relax.converged {
            relax.bound.max(parent_bound)
        } else {
            parent_bound
        };

        let is_fractional = prob.integrality.iter().enumerate().any(|(t, &i)| {
            fixed[t].is_none() && {
                let z = (relax.beta[i].abs() / m).clamp(0.0, 1.0);
                z.min(1.0 - z) > opts.integrality_tol
            }
        });

        if !is_fractional {
            // integral: round the indicators, zero the matching epsilon
            // coefficients, and evaluate the candidate honestly
            let mut cand_beta = relax.beta.clone();
            let mut cand_z = vec![0.0; p];
            for j in 0..p {
                cand_z[j] = (cand_beta[j].abs() / m).clamp(0.0, 1.0);
            }
            for (t, &i) in prob.integrality.iter().enumerate() {
                cand_z[i] = match fixed[t] {
                    Some(true) => 1.0,
                    Some(false) => 0.0,
                    None => {
                        if cand_z[i] > 0.5 {
                            1.0
                        } else {
                            cand_beta[i] = 0.0;
                            0.0
                        }
                    }
                };
            }
            let value = pmio_value(prob, &cand_beta, &cand_z);
            if value < *ub {
                *ub = value;
                *best_beta = cand_beta;
                *best_z = cand_z;
            }
            return bound;
        }

        if bound < *ub - 1e-9 {
            seq += 1;
            heap.push(QueueEntry {
                bound,
                seq,
                node: MipNode {
                    fixed,
                    lower_bound: bound,
                    relax_beta: relax.beta,
                    depth,
                },
            });
        }
        bound
    };

    let root_fixed = vec![None; prob.integrality.len()];
    let root_bound = close_or_push(
        root_fixed,
        root_warm,
        0.0,
        0,
        &mut ub,
        &mut best_beta,
        &mut best_z,
        &mut heap,
        &mut nodes_explored,
    );
    lb = lb.max(root_bound).min(ub);

    let mut status = MipStatus::Optimal;
    let mut drained = true;

    while let Some(entry) = heap.pop() {
        let node = entry.node;
        lb = lb.max(node.lower_bound).min(ub);
        if node.lower_bound >= ub - 1e-9 {
            // best-bound-first: every remaining node is dominated within
            // the pruning slack
            lb = lb.max(ub - 1e-9).min(ub);
            drained = false;
            break;
        }
        if guarded_gap(ub, lb) <= opts.gap_tol {
            drained = false;
            break;
        }
        if nodes_explored >= opts.node_budget {
            status = MipStatus::BudgetExhausted;
            drained = false;
            break;
        }

        // queued nodes always have a fractional indicator: branch on the
        // most fractional one, ties to the lower index
        let mut branch_t = 0usize;
        let mut best_frac = -1.0f64;
        for (t, &i) in prob.integrality.iter().enumerate() {
            if node.fixed[t].is_none() {
                let z = (node.relax_beta[i].abs() / m).clamp(0.0, 1.0);
                let frac = z.min(1.0 - z);
                if frac > best_frac {
                    best_frac = frac;
                    branch_t = t;
                }
            }
        }

        for fix_val in [false, true] {
            let mut fixed = node.fixed.clone();
            fixed[branch_t] = Some(fix_val);
            close_or_push(
                fixed,
                &node.relax_beta,
                node.lower_bound,
                node.depth + 1,
                &mut ub,
                &mut best_beta,
                &mut best_z,
                &mut heap,
                &mut nodes_explored,
            );
        }
    }

    if drained {
        // every leaf was pruned (bound >= UB - 1e-9 at prune time, and UB
        // only decreases afterwards) or closed at a value >= the final UB
        lb = lb.max(ub - 1e-9).min(ub);
    }
    let gap = guarded_gap(ub, lb);
    if status != MipStatus::BudgetExhausted && gap > opts.gap_tol {
        status = MipStatus::GapReached;
    }

    let beta_sparse: Vec<(usize, f64)> = best_beta
        .iter()
        .enumerate()
        .filter(|(_, b)| **b != 0.0)
        .map(|(j, b)| (j, *b))
        .collect();
    MipResult {
        beta: beta_sparse,
        z: best_z,
        upper_bound: ub,
        lower_bound: lb,
        gap,
        nodes_explored,
        iga_iterations: 0,
        status,
        big_m: m,
    }
}

/// Integrality generation: solve the partial-integrality problem with `I`
/// initialized to the warm start's support, polish every relaxed solution
/// into a feasible upper bound, and grow `I` by the largest fractional
/// indicators until the indicators come out integral (optimality for the
/// full problem) or the gap target / budget is hit.
pub fn iga_solve(
    d: &Dataset,
    kind: LossKind,
    lam: &PenaltyParams,
    warm: &Solution,
    opts: &MipOptions,
) -> Result<MipResult> {
    let m = opts.big_m.unwrap_or_else(|| choose_big_m(warm));

    // clip the warm start into the box and audit it
    let clipped: Vec<(usize, f64)> = warm
        .beta
        .iter()
        .map(|&(j, b)| (j, b.clamp(-m, m)))
        .collect();
    let mut best_full = Solution::from_sparse(d, kind, lam, clipped, Diagnostics::default());
    let mut ub = best_full.objectives.penalized;
    let mut lb = 0.0f64;
    let mut i_set: Vec<usize> = best_full.support();
    let mut root_warm = best_full.dense();

    let polish_opts = FitOptions {
        rel_tol: 1e-10,
        max_full_cycles: 10_000,
        ..FitOptions::default()
    };

    let mut nodes_total = 0usize;
    let mut result_z = vec![0.0; d.p()];
    let mut status = MipStatus::BudgetExhausted;
    let mut iga_iterations = 0usize;

    for iter in 1..=opts.max_iga_iters {
        iga_iterations = iter;
        let remaining_nodes = opts.node_budget.saturating_sub(nodes_total);
        if remaining_nodes == 0 {
            status = MipStatus::BudgetExhausted;
            break;
        }
        let prob = MipProblem {
            data: d,
            kind,
            lam: *lam,
            big_m: m,
            integrality: i_set.clone(),
        };
        let inner_opts = MipOptions {
            node_budget: remaining_nodes,
            ..*opts
        };
        let bnb = branch_and_bound_from(&prob, &best_full, &root_warm, &inner_opts);
        nodes_total += bnb.nodes_explored;
        debug_assert!(
            bnb.lower_bound >= lb - 1e-9,
            "lower bound regressed across IGA iterations"
        );
        lb = lb.max(bnb.lower_bound);
        result_z = bnb.z.clone();

        // polish the relaxed solution into a full-problem feasible candidate
        let mut dense = vec![0.0; d.p()];
        for &(j, b) in &bnb.beta {
            dense[j] = b;
        }
        let in_i = {
            let mut mask = vec![false; d.p()];
            for &i in &i_set {
                mask[i] = true;
            }
            mask
        };
        let rounded: Vec<(usize, f64)> = dense
            .iter()
            .enumerate()
            .filter(|(j, b)| {
                **b != 0.0 && (in_i[*j] || b.abs() > opts.integrality_tol * m)
            })
            .map(|(j, b)| (j, *b))
            .collect();
        let seed = Solution::from_sparse(d, kind, lam, rounded, Diagnostics::default());
        let polished = cd_fit(d, kind, lam, Some(&seed), &polish_opts);
        if polished.objectives.penalized < ub && polished.max_abs() <= m {
            ub = polished.objectives.penalized;
            best_full = polished;
        }
        root_warm = dense;

        let fractional: Vec<(usize, f64)> = (0..d.p())
            .filter(|j| !in_i[*j])
            .map(|j| (j, result_z[j]))
            .filter(|(_, z)| *z > opts.integrality_tol && *z < 1.0 - opts.integrality_tol)
            .collect();

        // with fully integral indicators the partial-integrality incumbent
        // is itself feasible for the full problem; its audited value is a
        // valid upper bound even when unboxed polishing is rejected
        if fractional.is_empty() {
            let cand_beta: Vec<(usize, f64)> = bnb
                .beta
                .iter()
                .copied()
                .filter(|(j, b)| in_i[*j] || b.abs() > opts.integrality_tol * m)
                .collect();
            let candidate =
                Solution::from_sparse(d, kind, lam, cand_beta, Diagnostics::default());
            if candidate.objectives.penalized < ub {
                ub = candidate.objectives.penalized;
                best_full = candidate;
            }
        }

        let gap = guarded_gap(ub, lb);
        if fractional.is_empty() && bnb.status == MipStatus::Optimal {
            status = MipStatus::Optimal;
            break;
        }
        if gap <= opts.gap_tol {
            status = MipStatus::GapReached;
            break;
        }
        if bnb.status == MipStatus::BudgetExhausted || iter == opts.max_iga_iters {
            status = MipStatus::BudgetExhausted;
            break;
        }

        // expand the integrality set
        let mut ranked = fractional;
        ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        let added: Vec<usize> = match opts.frac_cutoff {
            Some(tau) => {
                let cut: Vec<usize> = ranked
                    .iter()
                    .filter(|(_, z)| *z >= tau)
                    .map(|(j, _)| *j)
                    .collect();
                if cut.is_empty() {
                    ranked.iter().take(1).map(|(j, _)| *j).collect()
                } else {
                    cut
                }
            }
            None => ranked
                .iter()
                .take(opts.max_add_per_iter)
                .map(|(j, _)| *j)
                .collect(),
        };
        i_set.extend(added);
        i_set.sort_unstable();
        i_set.dedup();
    }

    if best_full.max_abs() >= m * (1.0 - 1e-6) && best_full.support_size() > 0 {
        log::warn!(
            "big-M bound is active at the reported solution (max |beta| = {}, M = {m}); the certificate may not cover the unbounded problem",
            best_full.max_abs()
        );
    }

    let gap = guarded_gap(ub, lb);
    Ok(MipResult {
        beta: best_full.beta.clone(),
        z: result_z,
        upper_bound: ub,
        lower_bound: lb,
        gap,
        nodes_explored: nodes_total,
        iga_iterations,
        status,
        big_m: m,
    })
}
