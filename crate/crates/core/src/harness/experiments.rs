use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{reseed, trial_seed, ExperimentConfig, ExperimentKind, LemmaChoice, OperatorChoice};
use super::report::{Report, TrialRow};
use super::HarnessError;
use crate::dyadic::{
    expectation_over_shifts, level_averages, DyadicGrid, GridFunction, GridShape, ProductFunction, ProductShape,
    ShiftMode,
};
use crate::exponents::{
    derived_scales, offdiag_targets, preceq_star, reciprocal_sum, Exponent, ExponentVector, VectorKind,
};
use crate::norms::{lp, mixed_norm, nested_seq_norm};
use crate::operators::{
    block_square_function, random_shift, sparse_form, sparse_stopping, square_function, tensor_apply, Maximal,
    ShiftForm,
};
use crate::weights::{
    a_infinity_report, ap_constant, apr_constant, generate_weight, mixed_class_constants, multilinear_ap_constant,
    multilinear_constant, tensor_weight, BaseMeasure, CubeFamily, FamilyMode, Weight,
};

/// Exponents resolved and checked once per run.
#[derive(Clone, Debug)]
enum Plan {
    Offdiag { p: Exponent, r: Exponent, q: Exponent },
    Multilinear { p: ExponentVector, r: ExponentVector, p_all: Exponent },
    Sparse { r: ExponentVector },
    Lemma { p: Exponent },
    Mz { p: ExponentVector, p_all: Exponent },
    Tensor { p: ExponentVector, q: ExponentVector, weighted: bool },
}

fn bad(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

fn open_range(name: &str, e: &Exponent, allow_inf: bool) -> Result<(), HarnessError> {
    let ok = if e.is_infinite() { allow_inf } else { e.to_f64() > 1.0 };
    if ok {
        Ok(())
    } else {
        let hi = if allow_inf { "∞]" } else { "∞)" };
        Err(bad(format!("{name} = {e} must lie in (1, {hi}")))
    }
}

fn bilinear(name: &str, v: &ExponentVector) -> Result<(), HarnessError> {
    if v.len() != 2 {
        return Err(bad(format!("{name} = {v} must have 2 entries (bilinear operators)")));
    }
    Ok(())
}

/// Checks the config and resolves its exponents before any numerics.
fn plan(cfg: &ExperimentConfig) -> Result<Plan, HarnessError> {
    let opts = &cfg.options;
    if opts.complexities.is_empty() {
        return Err(bad("options.complexities must be nonempty"));
    }
    if !(opts.fill > 0.0 && opts.fill <= 1.0) {
        return Err(bad(format!("options.fill = {} must lie in (0, 1]", opts.fill)));
    }
    if let Some(ShiftMode::MonteCarlo { samples: 0, .. }) = opts.shift_mode {
        return Err(bad("options.shift_mode needs samples ≥ 1"));
    }
    match cfg.experiment {
        ExperimentKind::TensorMixedNorm => {
            cfg.grid.factors()?;
        }
        _ => {
            cfg.grid.shape()?;
        }
    }
    let depth = cfg.grid.l;
    if opts.complexities.iter().flatten().any(|&k| k + 1 > depth)
        && matches!(
            cfg.experiment,
            ExperimentKind::OffdiagRatio
                | ExperimentKind::MultilinearExtrapolate
                | ExperimentKind::SparseDomination
                | ExperimentKind::TensorMixedNorm
        )
    {
        return Err(bad(format!("complexities must satisfy k + 1 ≤ L = {depth}")));
    }
    Ok(match cfg.experiment {
        ExperimentKind::OffdiagRatio => {
            let (p0, r0, q0) = (cfg.scalar("p0")?, cfg.scalar("r0")?, cfg.scalar("q0")?);
            let p = cfg.scalar("p")?;
            let t = offdiag_targets(&p0, &r0, &q0, &p)?;
            if t.r.inv() < p.inv() {
                return Err(bad(format!("r = {} > p = {p}: the class A_(p,r) needs r ≤ p", t.r)));
            }
            Plan::Offdiag { p, r: t.r, q: t.q }
        }
        ExperimentKind::MultilinearExtrapolate => {
            let p = cfg.vector("p", VectorKind::P)?;
            let r = cfg.vector("r", VectorKind::R)?;
            bilinear("p", &p)?;
            if !preceq_star(&r, &p)? {
                derived_scales(&p, &r)?;
                return Err(bad(format!("r = {r} is not ⪯⋆ p = {p}")));
            }
            let p_all = reciprocal_sum(p.iter());
            Plan::Multilinear { p, r, p_all }
        }
        ExperimentKind::SparseDomination => {
            let r = cfg.vector_or("r", VectorKind::R, Some("1,1,1"))?;
            if r.len() != 3 {
                return Err(bad(format!("r = {r} must have 3 entries")));
            }
            Plan::Sparse { r }
        }
        ExperimentKind::LemmaRatio => match opts.lemma {
            LemmaChoice::Mz => {
                let p = cfg.vector_or("p", VectorKind::P, Some("3,3"))?;
                bilinear("p", &p)?;
                for e in p.iter() {
                    open_range("p_i", e, true)?;
                }
                let p_all = reciprocal_sum(p.iter());
                if p_all.is_infinite() {
                    return Err(bad("1/p = 1/p₁ + 1/p₂ must be > 0"));
                }
                Plan::Mz { p, p_all }
            }
            LemmaChoice::LowerSf => {
                let p = cfg.scalar_or("p", "2")?;
                if p.is_infinite() {
                    return Err(bad("p = ∞ is outside 0 < p < ∞"));
                }
                Plan::Lemma { p }
            }
            LemmaChoice::BlockSf | LemmaChoice::Paraproduct => {
                let p = cfg.scalar_or("p", "2")?;
                open_range("p", &p, false)?;
                Plan::Lemma { p }
            }
        },
        ExperimentKind::TensorMixedNorm => {
            let p = cfg.vector("p", VectorKind::P)?;
            let q = match cfg.exponents.get("q") {
                Some(_) => cfg.vector("q", VectorKind::P)?,
                None => p.clone(),
            };
            bilinear("p", &p)?;
            bilinear("q", &q)?;
            let weighted = p == q && p.iter().all(|e| !e.is_infinite() && e.to_f64() > 1.0);
            Plan::Tensor { p, q, weighted }
        }
    })
}

/// Runs the checks of [`run_experiment`] without any numerics.
pub fn validate(cfg: &ExperimentConfig) -> Result<(), HarnessError> {
    plan(cfg).map(|_| ())
}

fn family(cfg: &ExperimentConfig, grid: &DyadicGrid) -> CubeFamily {
    match cfg.options.family {
        Some(mode) => CubeFamily::with_mode(mode, grid),
        None => CubeFamily::default_for(grid),
    }
}

fn family_name(cfg: &ExperimentConfig, shape: GridShape) -> &'static str {
    match cfg.options.family {
        Some(mode) => mode.name(),
        None if shape.d * shape.depth as usize <= 12 => FamilyMode::AllDiscrete.name(),
        None => FamilyMode::Dyadic.name(),
    }
}

fn weight(cfg: &ExperimentConfig, grid: &DyadicGrid, rng: &mut ChaCha8Rng) -> Result<Weight, HarnessError> {
    Ok(generate_weight(&reseed(&cfg.weight_gen, rng.gen()), grid)?.weight)
}

fn input(cfg: &ExperimentConfig, shape: GridShape, rng: &mut ChaCha8Rng) -> GridFunction {
    if cfg.options.constant_input {
        GridFunction::constant(shape, 1.0)
    } else {
        GridFunction::from_fn(shape, |_| rng.gen_range(-1.0..1.0))
    }
}

fn omega_code(grid: &DyadicGrid) -> u64 {
    grid.omega.iter().flatten().fold(0u64, |a, &b| (a << 1) | b as u64)
}

/// A generator fixed by the trial seed and the lattice, so `E_ω` sees one draw per `ω`.
fn lattice_rng(seed: u64, grid: &DyadicGrid) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ omega_code(grid).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn shift_mode(cfg: &ExperimentConfig, seed: u64) -> ShiftMode {
    match cfg.options.shift_mode {
        Some(ShiftMode::MonteCarlo { samples, seed: s }) => ShiftMode::MonteCarlo { samples, seed: s.wrapping_add(seed) },
        Some(ShiftMode::Exact) => ShiftMode::Exact,
        None => ShiftMode::MonteCarlo { samples: 8, seed },
    }
}

fn complexity(cfg: &ExperimentConfig, trial: usize) -> [u32; 3] {
    let c = &cfg.options.complexities;
    c[trial % c.len()]
}

fn run_trial(cfg: &ExperimentConfig, plan: &Plan, trial: usize) -> Result<TrialRow, HarnessError> {
    let seed = trial_seed(cfg.seed, trial);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let row = |constant: f64, lhs: f64, rhs: f64| Ok(TrialRow::new(trial, seed, constant, lhs, rhs));
    let opts = &cfg.options;
    if let Plan::Tensor { p, q, weighted } = plan {
        let (s1, s2) = cfg.grid.factors()?;
        let (g1, g2) = (DyadicGrid::random(s1, &mut rng), DyadicGrid::random(s2, &mut rng));
        let kappa = complexity(cfg, trial);
        let form = ShiftForm::ALL[trial % 3];
        let a = random_shift(&g1, kappa, form, opts.fill, 1.0, &mut rng)?.operator();
        let b = random_shift(&g2, kappa, ShiftForm::ALL[(trial + 1) % 3], opts.fill, 1.0, &mut rng)?.operator();
        let ps = ProductShape::new(s1, s2);
        let mut f = || {
            if opts.constant_input {
                ProductFunction::constant(ps, 1.0)
            } else {
                ProductFunction::from_fn(ps, |_, _| rng.gen_range(-1.0..1.0))
            }
        };
        let (f1, f2) = (f(), f());
        let (w1, w2, constant) = if *weighted {
            let (fam1, fam2) = (family(cfg, &g1), family(cfg, &g2));
            let w1 = tensor_weight(&weight(cfg, &g1, &mut rng)?, &weight(cfg, &g2, &mut rng)?);
            let w2 = tensor_weight(&weight(cfg, &g1, &mut rng)?, &weight(cfg, &g2, &mut rng)?);
            let c = mixed_class_constants(&w1, &w2, p, &fam1, &fam2)?.max();
            (w1, w2, c)
        } else {
            (ProductFunction::constant(ps, 1.0), ProductFunction::constant(ps, 1.0), 1.0)
        };
        let out = tensor_apply(&a, &b, &f1, &f2)?;
        let (p_all, q_all) = (reciprocal_sum(p.iter()), reciprocal_sum(q.iter()));
        let lhs = mixed_norm(&out.mul(&w1).mul(&w2), &p_all, &q_all);
        let rhs = mixed_norm(&f1.mul(&w1), p.get(0), q.get(0)) * mixed_norm(&f2.mul(&w2), p.get(1), q.get(1));
        return row(constant, lhs, rhs);
    }

    let shape = cfg.grid.shape()?;
    let grid = DyadicGrid::random(shape, &mut rng);
    let fam = family(cfg, &grid);
    let leb = BaseMeasure::lebesgue(shape);
    match plan {
        Plan::Offdiag { p, r, q } => {
            let w = weight(cfg, &grid, &mut rng)?;
            let g = input(cfg, shape, &mut rng);
            let f = if opts.f_equals_g {
                g.clone()
            } else {
                match opts.operator {
                    OperatorChoice::Identity => g.clone(),
                    OperatorChoice::Maximal => Maximal::new(fam.clone(), None).apply(&g),
                    OperatorChoice::Shift => {
                        let spec =
                            random_shift(&grid, complexity(cfg, trial), ShiftForm::NoncancelSlot2, opts.fill, 1.0, &mut rng)?;
                        spec.apply(&g, &GridFunction::constant(shape, 1.0)).abs()
                    }
                }
            };
            let constant = apr_constant(&w, p, r, &leb, &fam)?.constant;
            row(constant, lp(&f.mul(&w), q.to_f64()), lp(&g.mul(&w), p.to_f64()))
        }
        Plan::Multilinear { p, r, p_all } => {
            let ws = [weight(cfg, &grid, &mut rng)?, weight(cfg, &grid, &mut rng)?];
            let (f1, f2) = (input(cfg, shape, &mut rng), input(cfg, shape, &mut rng));
            let spec = random_shift(&grid, complexity(cfg, trial), ShiftForm::ALL[trial % 3], opts.fill, 1.0, &mut rng)?;
            let out = spec.apply(&f1, &f2);
            let constant = multilinear_constant(&ws, p, r, &fam)?.constant;
            let lhs = lp(&out.mul(&ws[0]).mul(&ws[1]), p_all.to_f64());
            let rhs = lp(&f1.mul(&ws[0]), p.get(0).to_f64()) * lp(&f2.mul(&ws[1]), p.get(1).to_f64());
            row(constant, lhs, rhs)
        }
        Plan::Sparse { r } => {
            let kappa = complexity(cfg, trial);
            let spec = random_shift(&grid, kappa, ShiftForm::ALL[trial % 3], opts.fill, 1.0, &mut rng)?;
            let fs = [input(cfg, shape, &mut rng), input(cfg, shape, &mut rng), input(cfg, shape, &mut rng)];
            let sparse = sparse_stopping(&grid, &fs)?;
            let lambda = sparse_form(&sparse, r, &fs[..2], &fs[2])?.value;
            let constant = (spec.max_complexity() + 1) as f64;
            let lhs = spec.operator().trilinear(&fs[0], &fs[1], &fs[2]).abs();
            row(constant, lhs, constant * lambda)
        }
        Plan::Lemma { p } => {
            let w = weight(cfg, &grid, &mut rng)?;
            let pf = p.to_f64();
            let nu = w.pow(pf);
            let mode = shift_mode(cfg, seed);
            let g = input(cfg, shape, &mut rng);
            let (constant, lhs, rhs) = match opts.lemma {
                LemmaChoice::LowerSf => {
                    let mean = g.integral();
                    let g = g.map(|v| v - mean);
                    let sq = expectation_over_shifts(shape, mode, |om| square_function(&g, om))?;
                    (a_infinity_report(&nu, &leb, &fam)?.0, lp(&g.mul(&w), pf), lp(&sq.mul(&w), pf))
                }
                LemmaChoice::BlockSf => {
                    let k = opts.block_k;
                    let sq = expectation_over_shifts(shape, mode, |om| {
                        let m = Maximal::new(CubeFamily::dyadic(om), None);
                        block_square_function(&g, om, k, &m).expect("maximal lives on the same grid").powf(2.0)
                    })?;
                    let lhs = lp(&sq.map(f64::sqrt).mul(&w), pf);
                    (ap_constant(&nu, p, &leb, &fam)?.constant, lhs, lp(&g.mul(&w), pf))
                }
                _ => {
                    let fill = opts.fill;
                    let sq = expectation_over_shifts(shape, mode, |om| paraproduct_square(&g, om, fill, seed))?;
                    let lhs = lp(&sq.map(f64::sqrt).mul(&w), pf);
                    (ap_constant(&nu, p, &leb, &fam)?.constant, lhs, lp(&g.mul(&w), pf))
                }
            };
            row(constant, lhs, rhs)
        }
        Plan::Mz { p, p_all } => {
            let ws = [weight(cfg, &grid, &mut rng)?, weight(cfg, &grid, &mut rng)?];
            // f_{1,i,k}, f_{2,j,k} with i, j, k ∈ {0, 1}
            let f1: Vec<GridFunction> = (0..4).map(|_| input(cfg, shape, &mut rng)).collect();
            let f2: Vec<GridFunction> = (0..4).map(|_| input(cfg, shape, &mut rng)).collect();
            let kappa = complexity(cfg, trial);
            let depth = shape.depth;
            let kappa = kappa.map(|k| k.min(depth.saturating_sub(1)));
            let fill = opts.fill;
            let e = expectation_over_shifts(shape, shift_mode(cfg, seed), |om| {
                let mut lr = lattice_rng(seed, om);
                let t = random_shift(om, kappa, ShiftForm::ALL[trial % 3], fill, 1.0, &mut lr).expect("valid complexity");
                let mut acc = GridFunction::zeros(shape);
                for k in 0..2 {
                    for i in 0..2 {
                        for j in 0..2 {
                            let v = t.apply(&f1[2 * i + k], &f2[2 * j + k]);
                            acc = acc.zip_with(&v, |a, b| a + b * b);
                        }
                    }
                }
                acc.map(f64::sqrt)
            })?;
            let (two, four): (Exponent, Exponent) = (Exponent::int(2), Exponent::int(4));
            let nested = |fs: &[GridFunction]| {
                GridFunction::from_fn(shape, |c| {
                    let rows: Vec<Vec<f64>> = (0..2).map(|k| (0..2).map(|i| fs[2 * i + k].values()[c]).collect()).collect();
                    nested_seq_norm(&rows, &four, &two)
                })
            };
            let constant = multilinear_ap_constant(&ws, p, &fam)?.constant;
            let lhs = lp(&e.mul(&ws[0]).mul(&ws[1]), p_all.to_f64());
            let rhs = lp(&nested(&f1).mul(&ws[0]), p.get(0).to_f64()) * lp(&nested(&f2).mul(&ws[1]), p.get(1).to_f64());
            row(constant, lhs, rhs)
        }
        Plan::Tensor { .. } => unreachable!("handled above"),
    }
}

/// `Σ_I |γ_I ⟨g⟩_I|² 1_I/|I|` with `|γ_I| = fill·U_I·(|I|/L)^{1/2}`, `U_I` uniform on `[0,1]`;
/// the Carleson norm of `γ` is at most `fill`.
fn paraproduct_square(g: &GridFunction, grid: &DyadicGrid, fill: f64, seed: u64) -> GridFunction {
    let mut rng = lattice_rng(seed, grid);
    let depth = grid.depth();
    let d = grid.d() as i32;
    let mut acc = GridFunction::zeros(g.shape());
    for level in 0..depth {
        let avgs = level_averages(g, grid, level);
        let vol = 2f64.powi(-d * level as i32);
        let gamma2: Vec<f64> = avgs
            .iter()
            .map(|_| {
                let u: f64 = rng.gen_range(0.0..=1.0);
                fill * fill * u * u * vol / depth as f64
            })
            .collect();
        let labels = grid.level_labels(level);
        for (c, a) in acc.values_mut().iter_mut().enumerate() {
            let i = labels[c];
            *a += gamma2[i] * avgs[i] * avgs[i] / vol;
        }
    }
    acc
}

/// Runs every trial (in parallel) and assembles the report in trial order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let plan = plan(cfg)?;
    let rows: Vec<TrialRow> =
        (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, &plan, t)).collect::<Result<_, _>>()?;
    let shape = match cfg.experiment {
        ExperimentKind::TensorMixedNorm => cfg.grid.factors()?.0,
        _ => cfg.grid.shape()?,
    };
    let mut notes = Vec::new();
    match &plan {
        Plan::Offdiag { p, r, q } => notes.push(format!("target exponents p = {p}, r = {r}, q = {q}")),
        Plan::Sparse { .. } => notes.push("rhs = (max complexity + 1)·Λ_S over the stopping family".into()),
        Plan::Tensor { weighted: false, .. } => notes.push("unweighted run: weights ≡ 1, constant 1".into()),
        _ => {}
    }
    Ok(Report::new(cfg, rows, family_name(cfg, shape), notes))
}
