//! Evolutionary circuit design over a fixed all-to-all capacitive scaffold,
//! plus the fabrication-resilience Monte Carlo.
//!
//! A genome fixes the number of islands and carries, for every island pair,
//! a mandatory capacitor plus optional inductor and junction flags with
//! their component values. Values persist while a flag is off, so toggling
//! a device back on restores the previous value. Search proceeds by
//! truncation selection with elitism, mode-block crossover, and single-edit
//! mutation; every genome that enters the population is validity-checked
//! (no frozen or free modes). A gradient-descent fine-tuning pass and a
//! component-spread Monte Carlo close the loop.

use crate::error::{Error, Result};
use crate::netlist::{build_matrices, classify_modes, hamiltonian_spec, Bias, Branch, CircuitNetlist};
use crate::optim::{gradient_descent, GradientDescentOptions, OptimResult};
use crate::quantize::{assemble, QuantizeOptions};
use crate::spectrum::{self, SpectrumOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use rayon::prelude::*;

/// Cost assigned to genomes whose evaluation fails (solver non-convergence
/// or similar); large but finite so selection can move away from them.
const PENALTY_COST: f64 = 1e12;

/// Fabrication bounds on component values. Values are clamped to these
/// intervals during initialization, mutation, and fine-tuning.
#[derive(Debug, Clone, Copy)]
pub struct Bounds {
    /// Capacitance interval in fF.
    pub c_ff: (f64, f64),
    /// Inductance interval in nH.
    pub l_nh: (f64, f64),
    /// Josephson energy interval in GHz.
    pub e_j_ghz: (f64, f64),
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { c_ff: (5.0, 150.0), l_nh: (10.0, 500.0), e_j_ghz: (1.0, 50.0) }
    }
}

impl Bounds {
    fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in
            [("c_ff", self.c_ff), ("l_nh", self.l_nh), ("e_j_ghz", self.e_j_ghz)]
        {
            if !(lo > 0.0 && lo < hi) {
                return Err(Error::Configuration(format!("invalid {name} bounds")));
            }
        }
        Ok(())
    }
}

/// One scaffold branch: capacitor always present, inductor and junction
/// behind presence flags. The `l_nh` and `e_j_ghz` values are kept even
/// while their flags are off.
#[derive(Debug, Clone, PartialEq)]
pub struct GenomeBranch {
    pub c_ff: f64,
    pub has_l: bool,
    pub l_nh: f64,
    pub has_jj: bool,
    pub e_j_ghz: f64,
}

/// Circuit candidate: island count plus one [`GenomeBranch`] per island
/// pair `(i, j)` with `i < j`, island 0 being the reference.
#[derive(Debug, Clone, PartialEq)]
pub struct Genome {
    pub n_islands: usize,
    pub branches: Vec<GenomeBranch>,
}

/// Number of island pairs on an `n`-island all-to-all scaffold.
fn n_pairs(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Enumerate island pairs in the fixed genome order.
fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

impl Genome {
    /// Decode into a netlist. Every scaffold branch is emitted (the
    /// capacitor is always physical); closure branches are left to the
    /// default largest-inductance selection.
    pub fn decode(&self) -> CircuitNetlist {
        let branches = pairs(self.n_islands)
            .zip(&self.branches)
            .map(|((i, j), g)| {
                let mut b = Branch::capacitive(i, j, g.c_ff);
                if g.has_l {
                    b = b.with_inductor(g.l_nh);
                }
                if g.has_jj {
                    b = b.with_junction(g.e_j_ghz);
                }
                b
            })
            .collect();
        CircuitNetlist { n_nodes: self.n_islands, reference: 0, branches, closure: vec![] }
    }

    /// True when the decoded netlist passes validation, yields only
    /// charge-like or flux-like modes, and admits a closure assignment and
    /// a Hamiltonian specification.
    pub fn is_valid(&self) -> bool {
        let net = self.decode();
        if net.validate().is_err() {
            return false;
        }
        let Ok(m) = build_matrices(&net) else { return false };
        if !classify_modes(&net).iter().all(|k| k.is_valid()) {
            return false;
        }
        if net.resolve_closure().is_err() {
            return false;
        }
        hamiltonian_spec(&net, &m, Bias::default()).is_ok()
    }
}

/// Draw a random genome on the scaffold, retrying until it decodes to a
/// valid netlist.
pub fn random_genome(
    n_islands: usize,
    bounds: &Bounds,
    rng: &mut impl Rng,
    retries: usize,
) -> Result<Genome> {
    for _ in 0..retries.max(1) {
        let branches = (0..n_pairs(n_islands))
            .map(|_| GenomeBranch {
                c_ff: rng.gen_range(bounds.c_ff.0..bounds.c_ff.1),
                has_l: rng.gen_bool(0.4),
                l_nh: rng.gen_range(bounds.l_nh.0..bounds.l_nh.1),
                has_jj: rng.gen_bool(0.5),
                e_j_ghz: rng.gen_range(bounds.e_j_ghz.0..bounds.e_j_ghz.1),
            })
            .collect();
        let g = Genome { n_islands, branches };
        if g.is_valid() {
            return Ok(g);
        }
    }
    Err(Error::Evolve("could not draw a valid genome within the retry budget".into()))
}

/// One weighted scalar target; the cost contribution is
/// `weight * ((value - target) / max(|target|, eps))^2`.
#[derive(Debug, Clone, Copy)]
pub struct WeightedTarget {
    pub target: f64,
    pub weight: f64,
}

impl WeightedTarget {
    fn cost(&self, value: f64) -> f64 {
        let scale = self.target.abs().max(1e-9);
        let r = (value - self.target) / scale;
        self.weight * r * r
    }
}

/// Weighted-target cost function evaluated on the spectrum at a fixed bias
/// point. Dispersion penalties are linear in the frequency shifts and only
/// computed when their weights are positive (each costs an extra solve).
#[derive(Debug, Clone)]
pub struct FitnessSpec {
    /// Qubit transition target in GHz.
    pub omega_01: Option<WeightedTarget>,
    /// Signed 1-3 leakage anharmonicity target `w_3 - 2 w_1` in GHz.
    pub anharmonicity: Option<WeightedTarget>,
    /// Target for the largest per-mode drive element `|<1|n_m|0>|`.
    pub drive_element: Option<WeightedTarget>,
    /// Penalty weight per GHz of `|w01(phi + 0.02 pi) - w01(phi)|`.
    pub flux_dispersion_weight: f64,
    /// Penalty weight per GHz of `|w01(ng + 1/2) - w01(ng)|`.
    pub charge_dispersion_weight: f64,
    /// Hard constraint on the number of circuit modes.
    pub mode_count: Option<usize>,
    pub ng_ext: f64,
    pub phi_ext: f64,
    pub quantize: QuantizeOptions,
    /// Eigensolver tolerance for fitness evaluations.
    pub tol: f64,
}

impl FitnessSpec {
    /// Goals for a three-mode qubit around the given transition frequency:
    /// leakage anharmonicity of a third of the qubit frequency, near-half
    /// drive matrix element, and suppressed bias dispersions, evaluated at
    /// the half-flux working point with reduced cutoffs.
    pub fn qubit_goals(omega_01_ghz: f64) -> Self {
        FitnessSpec {
            omega_01: Some(WeightedTarget { target: omega_01_ghz, weight: 1.0 }),
            anharmonicity: Some(WeightedTarget { target: omega_01_ghz / 3.0, weight: 1.0 }),
            drive_element: Some(WeightedTarget { target: 0.4, weight: 1.0 }),
            flux_dispersion_weight: 10.0,
            charge_dispersion_weight: 10.0,
            mode_count: Some(3),
            ng_ext: 0.0,
            phi_ext: std::f64::consts::PI,
            quantize: QuantizeOptions { charge_cutoff: 5, fock_cutoff: 8, ..Default::default() },
            tol: 1e-8,
        }
    }

    /// Single-target spec for a plain resonance frequency (no dispersion
    /// penalties, any mode count).
    pub fn resonance_goal(omega_01_ghz: f64, quantize: QuantizeOptions) -> Self {
        FitnessSpec {
            omega_01: Some(WeightedTarget { target: omega_01_ghz, weight: 1.0 }),
            anharmonicity: None,
            drive_element: None,
            flux_dispersion_weight: 0.0,
            charge_dispersion_weight: 0.0,
            mode_count: None,
            ng_ext: 0.0,
            phi_ext: 0.0,
            quantize,
            tol: 1e-9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let weights = [
            self.omega_01.map(|t| t.weight),
            self.anharmonicity.map(|t| t.weight),
            self.drive_element.map(|t| t.weight),
            Some(self.flux_dispersion_weight),
            Some(self.charge_dispersion_weight),
        ];
        if weights.iter().flatten().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::Configuration("fitness weights must be nonnegative".into()));
        }
        let active = self.omega_01.is_some()
            || self.anharmonicity.is_some()
            || self.drive_element.is_some()
            || self.flux_dispersion_weight > 0.0
            || self.charge_dispersion_weight > 0.0;
        if !active {
            return Err(Error::Configuration("fitness spec has no active target".into()));
        }
        Ok(())
    }

    /// Evaluate the cost of a genome (lower is better). Fails on solver
    /// problems; the search loop maps failures to a penalty cost.
    pub fn evaluate(&self, genome: &Genome) -> Result<f64> {
        let net = genome.decode();
        if let Some(m) = self.mode_count {
            if net.n_modes() != m {
                return Ok(PENALTY_COST);
            }
        }
        let sys = assemble(&net, &self.quantize)?;
        let n_keep = if self.anharmonicity.is_some() { 4 } else { 2 };
        let opts = SpectrumOptions { n_keep, tol: self.tol, seed: 7 };
        let spec = spectrum::analyze(&sys, self.ng_ext, self.phi_ext, &opts)?;
        let w01 = spec.transitions[1];

        let mut cost = 0.0;
        if let Some(t) = self.omega_01 {
            cost += t.cost(w01);
        }
        if let Some(t) = self.anharmonicity {
            cost += t.cost(spec.alpha);
        }
        if let Some(t) = self.drive_element {
            let best = spec
                .n_elements
                .iter()
                .map(|m| m[(1, 0)].norm())
                .fold(0.0f64, f64::max);
            cost += t.cost(best);
        }
        if self.flux_dispersion_weight > 0.0 {
            let shifted = sys.eigens(
                self.ng_ext,
                self.phi_ext + 0.02 * std::f64::consts::PI,
                2,
                self.tol,
                opts.seed,
            )?;
            let w = shifted.values[1] - shifted.values[0];
            cost += self.flux_dispersion_weight * (w - w01).abs();
        }
        if self.charge_dispersion_weight > 0.0 {
            let shifted = sys.eigens(self.ng_ext + 0.5, self.phi_ext, 2, self.tol, opts.seed)?;
            let w = shifted.values[1] - shifted.values[0];
            cost += self.charge_dispersion_weight * (w - w01).abs();
        }
        Ok(cost)
    }

    /// Evaluation with solver failures mapped to [`PENALTY_COST`].
    pub fn penalized_cost(&self, genome: &Genome) -> f64 {
        self.evaluate(genome).unwrap_or(PENALTY_COST)
    }
}

/// Search configuration. `n_cull` individuals are replaced each generation
/// by offspring of the surviving `population - n_cull`.
#[derive(Debug, Clone)]
pub struct EvolveConfig {
    pub n_islands: usize,
    pub population: usize,
    pub generations: usize,
    /// Probability that an offspring receives one mutation edit.
    pub mutation_probability: f64,
    /// Number of individuals replaced per generation.
    pub n_cull: usize,
    /// Validity retries for genome draws, crossover, and mutation.
    pub retry_budget: usize,
    pub seed: u64,
    pub bounds: Bounds,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            n_islands: 4,
            population: 24,
            generations: 60,
            mutation_probability: 0.6,
            n_cull: 12,
            retry_budget: 64,
            seed: 1,
            bounds: Bounds::default(),
        }
    }
}

/// Best and mean cost of one evaluated generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationStats {
    pub best_cost: f64,
    pub mean_cost: f64,
}

#[derive(Debug, Clone)]
pub struct EvolveResult {
    pub best: Genome,
    pub best_cost: f64,
    pub history: Vec<GenerationStats>,
}

/// Mode-block crossover. Each non-reference island inherits its branch to
/// the reference island from one randomly chosen parent; an interior branch
/// follows its endpoints when they agree on a parent and is drawn at random
/// otherwise. The offspring is not validity-checked here.
pub fn crossover(a: &Genome, b: &Genome, rng: &mut impl Rng) -> Genome {
    assert_eq!(a.n_islands, b.n_islands, "crossover requires matching scaffolds");
    let n = a.n_islands;
    // from_a[i]: island i inherits from parent a (island 0 is the reference
    // and owns no block; its entry is unused)
    let from_a: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    let branches = pairs(n)
        .enumerate()
        .map(|(k, (i, j))| {
            let use_a = if i == 0 {
                from_a[j]
            } else if from_a[i] == from_a[j] {
                from_a[i]
            } else {
                rng.gen_bool(0.5)
            };
            if use_a { a.branches[k].clone() } else { b.branches[k].clone() }
        })
        .collect();
    Genome { n_islands: n, branches }
}

/// Crossover with validity retries; `None` when the budget is exhausted.
pub fn crossover_valid(
    a: &Genome,
    b: &Genome,
    rng: &mut impl Rng,
    retries: usize,
) -> Option<Genome> {
    for _ in 0..retries.max(1) {
        let g = crossover(a, b, rng);
        if g.is_valid() {
            return Some(g);
        }
    }
    None
}

/// With probability `p`, apply one edit: either toggle one presence flag or
/// multiply one stored value by a lognormal factor (sigma = 0.2) clamped to
/// the bounds. Edits producing an invalid genome are redrawn; if the retry
/// budget runs out the genome is returned unchanged.
pub fn mutate(
    genome: &Genome,
    p: f64,
    bounds: &Bounds,
    rng: &mut impl Rng,
    retries: usize,
) -> Genome {
    if p <= 0.0 || !rng.gen_bool(p.min(1.0)) {
        return genome.clone();
    }
    let factor = LogNormal::new(0.0, 0.2).expect("valid lognormal");
    for _ in 0..retries.max(1) {
        let mut g = genome.clone();
        let idx = rng.gen_range(0..g.branches.len());
        let b = &mut g.branches[idx];
        if rng.gen_bool(0.5) {
            if rng.gen_bool(0.5) {
                b.has_l = !b.has_l;
            } else {
                b.has_jj = !b.has_jj;
            }
        } else {
            let f = factor.sample(rng);
            match rng.gen_range(0..3) {
                0 => b.c_ff = (b.c_ff * f).clamp(bounds.c_ff.0, bounds.c_ff.1),
                1 => b.l_nh = (b.l_nh * f).clamp(bounds.l_nh.0, bounds.l_nh.1),
                _ => b.e_j_ghz = (b.e_j_ghz * f).clamp(bounds.e_j_ghz.0, bounds.e_j_ghz.1),
            }
        }
        if g.is_valid() {
            return g;
        }
    }
    genome.clone()
}

/// Run the evolutionary search. Fitness evaluations within a generation run
/// in parallel and use no randomness, so a fixed seed gives a bit-identical
/// history. The best individual always survives (elitism), making the best
/// cost nonincreasing across generations.
pub fn evolve(config: &EvolveConfig, fitness: &FitnessSpec) -> Result<EvolveResult> {
    if config.population < 4 {
        return Err(Error::Configuration("population must be at least 4".into()));
    }
    if config.n_cull == 0 || config.n_cull >= config.population {
        return Err(Error::Configuration("n_cull must be in 1..population".into()));
    }
    if config.generations == 0 {
        return Err(Error::Configuration("need at least one generation".into()));
    }
    if !(0.0..=1.0).contains(&config.mutation_probability) {
        return Err(Error::Configuration("mutation probability must be in [0, 1]".into()));
    }
    if config.n_islands < 2 {
        return Err(Error::Configuration("need at least two islands".into()));
    }
    config.bounds.validate()?;
    fitness.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut population: Vec<Genome> = (0..config.population)
        .map(|_| random_genome(config.n_islands, &config.bounds, &mut rng, config.retry_budget))
        .collect::<Result<_>>()
        .map_err(|_| Error::Evolve("population initialization failed".into()))?;

    let mut history = Vec::with_capacity(config.generations);
    let mut best: Option<(Genome, f64)> = None;
    for gen in 0..config.generations {
        let costs: Vec<f64> =
            population.par_iter().map(|g| fitness.penalized_cost(g)).collect();
        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&i, &j| costs[i].total_cmp(&costs[j]).then(i.cmp(&j)));
        let gen_best = costs[order[0]];
        history.push(GenerationStats {
            best_cost: gen_best,
            mean_cost: costs.iter().sum::<f64>() / costs.len() as f64,
        });
        if best.as_ref().map_or(true, |(_, c)| gen_best < *c) {
            best = Some((population[order[0]].clone(), gen_best));
        }
        if gen + 1 == config.generations {
            break;
        }

        let survivors: Vec<Genome> = order[..config.population - config.n_cull]
            .iter()
            .map(|&i| population[i].clone())
            .collect();
        let mut next = survivors.clone();
        while next.len() < config.population {
            let pa = &survivors[rng.gen_range(0..survivors.len())];
            let pb = &survivors[rng.gen_range(0..survivors.len())];
            let child = crossover_valid(pa, pb, &mut rng, config.retry_budget)
                .unwrap_or_else(|| pa.clone());
            next.push(mutate(
                &child,
                config.mutation_probability,
                &config.bounds,
                &mut rng,
                config.retry_budget,
            ));
        }
        population = next;
    }

    let (best, best_cost) = best.expect("at least one generation ran");
    Ok(EvolveResult { best, best_cost, history })
}

/// Gradient-descent fine-tuning of the continuous parameters of a genome at
/// fixed topology. Only active values (capacitances always, inductances and
/// Josephson energies behind raised flags) are optimized, each within its
/// fabrication bound. Returns the tuned genome and the optimizer report.
pub fn fine_tune(
    genome: &Genome,
    fitness: &FitnessSpec,
    bounds: &Bounds,
) -> Result<(Genome, OptimResult)> {
    fitness.validate()?;
    bounds.validate()?;
    if !genome.is_valid() {
        return Err(Error::Evolve("fine_tune requires a valid genome".into()));
    }

    // slot k -> (branch index, component selector)
    let mut slots: Vec<(usize, usize)> = Vec::new();
    let mut x0: Vec<f64> = Vec::new();
    let mut slot_bounds: Vec<(f64, f64)> = Vec::new();
    for (bi, b) in genome.branches.iter().enumerate() {
        slots.push((bi, 0));
        x0.push(b.c_ff);
        slot_bounds.push(bounds.c_ff);
        if b.has_l {
            slots.push((bi, 1));
            x0.push(b.l_nh);
            slot_bounds.push(bounds.l_nh);
        }
        if b.has_jj {
            slots.push((bi, 2));
            x0.push(b.e_j_ghz);
            slot_bounds.push(bounds.e_j_ghz);
        }
    }

    // optimize in normalized coordinates (scale factors on the starting
    // values) so the line search sees comparable magnitudes across fF, nH,
    // and GHz parameters
    let scaled_bounds: Vec<(f64, f64)> =
        slot_bounds.iter().zip(&x0).map(|((lo, hi), v)| (lo / v, hi / v)).collect();
    let apply = |s: &[f64]| {
        let mut g = genome.clone();
        for ((&(bi, kind), &f), &v0) in slots.iter().zip(s).zip(&x0) {
            let v = f * v0;
            match kind {
                0 => g.branches[bi].c_ff = v,
                1 => g.branches[bi].l_nh = v,
                _ => g.branches[bi].e_j_ghz = v,
            }
        }
        g
    };

    let opts = GradientDescentOptions {
        fd_step: 1e-5,
        initial_step: 2.0,
        cost_tolerance: 1e-10,
        max_iterations: 200,
    };
    let s0 = vec![1.0; x0.len()];
    let mut result =
        gradient_descent(|s| fitness.penalized_cost(&apply(s)), &s0, &scaled_bounds, &opts)?;
    let tuned = apply(&result.x);
    result.x = result.x.iter().zip(&x0).map(|(f, v0)| f * v0).collect();
    Ok((tuned, result))
}

/// Mean and sample standard deviation of one observable over the Monte
/// Carlo samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean: f64,
    pub std: f64,
}

fn stats(values: &[f64]) -> Stats {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Stats { mean, std }
}

/// Observables of one perturbed circuit instance (all in GHz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResilienceSample {
    /// Signed 1-3 leakage anharmonicity `w_3 - 2 w_1`.
    pub alpha: f64,
    /// Signed 1-2 anharmonicity `w_2 - 2 w_1`.
    pub eta: f64,
    /// `|w01(phi + 0.02 pi) - w01(phi)|`.
    pub flux_dispersion: f64,
    /// `|w01(ng + 1/2) - w01(ng)|`.
    pub charge_dispersion: f64,
}

/// Per-sample observables plus aggregates for one relative component
/// spread.
#[derive(Debug, Clone)]
pub struct ResilienceEntry {
    pub sigma: f64,
    pub n_samples: usize,
    /// Draws rejected for nonpositive values or invalid spectra and redrawn.
    pub n_resampled: usize,
    pub samples: Vec<ResilienceSample>,
    pub alpha: Stats,
    pub eta: Stats,
    pub flux_dispersion: Stats,
    pub charge_dispersion: Stats,
}

/// Fabrication-resilience Monte Carlo over a list of relative spreads.
#[derive(Debug, Clone)]
pub struct PerturbationStudy {
    pub ng_ext: f64,
    pub phi_ext: f64,
    pub entries: Vec<ResilienceEntry>,
}

fn perturb_netlist(
    base: &CircuitNetlist,
    sigma: f64,
    rng: &mut impl Rng,
) -> Option<CircuitNetlist> {
    let mut net = base.clone();
    for b in &mut net.branches {
        let draw = |v: f64, rng: &mut dyn rand::RngCore| -> Option<f64> {
            if sigma == 0.0 {
                return Some(v);
            }
            let d = Normal::new(v, sigma * v).ok()?;
            let s = d.sample(rng);
            (s > 0.0).then_some(s)
        };
        b.c_ff = draw(b.c_ff, rng)?;
        if let Some(l) = b.l_nh {
            b.l_nh = Some(draw(l, rng)?);
        }
        if let Some(ej) = b.e_j_ghz {
            b.e_j_ghz = Some(draw(ej, rng)?);
        }
    }
    net.validate().is_ok().then_some(net)
}

/// Sample fabrication spread: every capacitance, inductance, and Josephson
/// energy is drawn independently from `Normal(value, sigma * value)`
/// truncated to positive values, and the qubit observables are recomputed
/// at the given bias point. Samples are deterministic under a fixed seed
/// (one RNG stream per sample) and evaluated in parallel.
pub fn resilience_study(
    netlist: &CircuitNetlist,
    sigmas: &[f64],
    n_samples: usize,
    seed: u64,
    quantize: &QuantizeOptions,
    ng_ext: f64,
    phi_ext: f64,
) -> Result<PerturbationStudy> {
    netlist.validate()?;
    if n_samples == 0 {
        return Err(Error::Configuration("need at least one sample".into()));
    }
    if sigmas.iter().any(|s| *s < 0.0 || !s.is_finite()) {
        return Err(Error::Configuration("spreads must be nonnegative".into()));
    }
    let tol = 1e-9;

    let mut entries = Vec::with_capacity(sigmas.len());
    for (si, &sigma) in sigmas.iter().enumerate() {
        let samples: Vec<(ResilienceSample, usize)> = (0..n_samples)
            .into_par_iter()
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream((si * n_samples + k) as u64);
                let mut rejected = 0usize;
                loop {
                    if rejected > 200 {
                        return Err(Error::Evolve(format!(
                            "sample at sigma {sigma} kept failing after 200 redraws"
                        )));
                    }
                    let Some(net) = perturb_netlist(netlist, sigma, &mut rng) else {
                        rejected += 1;
                        continue;
                    };
                    let eval = || -> Result<ResilienceSample> {
                        let sys = assemble(&net, quantize)?;
                        let sol = sys.eigens(ng_ext, phi_ext, 4, tol, 7)?;
                        let w = |i: usize| sol.values[i] - sol.values[0];
                        let alpha = w(3) - 2.0 * w(1);
                        let eta = w(2) - 2.0 * w(1);
                        let f = sys.eigens(
                            ng_ext,
                            phi_ext + 0.02 * std::f64::consts::PI,
                            2,
                            tol,
                            7,
                        )?;
                        let c = sys.eigens(ng_ext + 0.5, phi_ext, 2, tol, 7)?;
                        Ok(ResilienceSample {
                            alpha,
                            eta,
                            flux_dispersion: (f.values[1] - f.values[0] - w(1)).abs(),
                            charge_dispersion: (c.values[1] - c.values[0] - w(1)).abs(),
                        })
                    };
                    match eval() {
                        Ok(sample) => return Ok((sample, rejected)),
                        Err(_) => rejected += 1,
                    }
                }
            })
            .collect::<Result<_>>()?;

        let n_resampled = samples.iter().map(|s| s.1).sum();
        let samples: Vec<ResilienceSample> = samples.into_iter().map(|s| s.0).collect();
        let col = |f: fn(&ResilienceSample) -> f64| -> Vec<f64> {
            samples.iter().map(f).collect()
        };
        entries.push(ResilienceEntry {
            sigma,
            n_samples,
            n_resampled,
            alpha: stats(&col(|s| s.alpha)),
            eta: stats(&col(|s| s.eta)),
            flux_dispersion: stats(&col(|s| s.flux_dispersion)),
            charge_dispersion: stats(&col(|s| s.charge_dispersion)),
            samples,
        });
    }
    Ok(PerturbationStudy { ng_ext, phi_ext, entries })
}
