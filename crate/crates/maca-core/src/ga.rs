//! Genetic search over rule vectors.
//!
//! The genome of a candidate is the concatenated 8-bit truth tables of its
//! per-cell rules (8n bits). Fitness scores how purely the candidate's
//! attractor basins separate a labeled training set: every basin votes its
//! majority label and fitness is the fraction of patterns matching their
//! basin's vote. Selection is fitness-proportional, reproduction is
//! single-point crossover plus independent bit-flip mutation, and the top
//! slice of every generation survives unchanged.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ca::{BoundaryMode, CAState, RuleNumber, RuleVector, DEFAULT_STEP_BUDGET};
use crate::classifier::{attractor_route_key, ClassId, LabeledPattern};
use crate::diagnostics::{entropy, mutual_information, spacetime_run};
use crate::error::{Error, Result};

/// Rows in the spacetime run measured for each generation's best candidate.
const DIAGNOSTIC_STEPS: usize = 256;

/// Additive floor keeping roulette selection defined when all fitnesses
/// are zero.
const SELECTION_EPSILON: f64 = 1e-6;

/// A rule vector under evolution, with its fitness memoized once scored.
#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    pub rules: RuleVector,
    pub fitness: Option<f64>,
}

impl Chromosome {
    pub fn new(rules: RuleVector) -> Self {
        Self {
            rules,
            fitness: None,
        }
    }

    pub fn genome_len(&self) -> usize {
        8 * self.rules.len()
    }

    /// Genome bits, most significant bit of each rule first, so the genome
    /// string of a cell reads as its rule number in binary.
    pub fn genome_bits(&self) -> Vec<bool> {
        let mut bits = Vec::with_capacity(self.genome_len());
        for rule in self.rules.rules() {
            for k in (0..8).rev() {
                bits.push((rule.value() >> k) & 1 == 1);
            }
        }
        bits
    }

    pub fn from_genome_bits(bits: &[bool]) -> Result<Self> {
        if bits.is_empty() || !bits.len().is_multiple_of(8) {
            return Err(Error::InvalidParameter(format!(
                "genome length {} is not a positive multiple of 8",
                bits.len()
            )));
        }
        let rules = bits
            .chunks(8)
            .map(|chunk| RuleNumber(chunk.iter().fold(0u8, |acc, &b| (acc << 1) | b as u8)))
            .collect();
        Ok(Self::new(RuleVector::new(rules)?))
    }
}

/// Population controls for [`evolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaParams {
    /// NP, the constant population size.
    pub population_size: usize,
    /// Fraction of the population copied unchanged each generation.
    pub elite_fraction: f64,
    /// Per-bit flip probability during mutation.
    pub mutation_bit_rate: f64,
    /// Fraction of each new generation built by mutating elite members.
    pub mutant_share: f64,
    pub max_generations: usize,
    /// Evolution stops once the best fitness reaches this value.
    pub target_fitness: f64,
    pub rng_seed: u64,
    /// Rule vectors force-inserted verbatim into the initial population.
    #[serde(default)]
    pub seed_candidates: Vec<RuleVector>,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            population_size: 50,
            elite_fraction: 0.1,
            mutation_bit_rate: 0.02,
            mutant_share: 0.10,
            max_generations: 100,
            target_fitness: 1.0,
            rng_seed: 0,
            seed_candidates: Vec::new(),
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::InvalidParameter(
                "population_size must be at least 2".into(),
            ));
        }
        if !(self.elite_fraction > 0.0 && self.elite_fraction <= 1.0) {
            return Err(Error::InvalidParameter(
                "elite_fraction must lie in (0, 1]".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.mutation_bit_rate) {
            return Err(Error::InvalidParameter(
                "mutation_bit_rate must lie in [0, 1]".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.mutant_share) {
            return Err(Error::InvalidParameter(
                "mutant_share must lie in [0, 1]".into(),
            ));
        }
        if self.mutant_share + self.elite_fraction > 1.0 {
            return Err(Error::InvalidParameter(
                "mutant_share + elite_fraction must not exceed 1".into(),
            ));
        }
        if self.max_generations == 0 {
            return Err(Error::InvalidParameter(
                "max_generations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Per-generation record of an evolution run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationTrace {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub entropy: f64,
    pub mutual_information: f64,
}

/// Builds the seeded initial population: uniform random rule numbers per
/// cell, with `seed_candidates` overwriting the leading members verbatim.
pub fn init_population(params: &GaParams, n: usize) -> Result<Vec<Chromosome>> {
    params.validate()?;
    if n == 0 {
        return Err(Error::InvalidParameter("cell count must be >= 1".into()));
    }
    if params.seed_candidates.len() > params.population_size {
        return Err(Error::InvalidParameter(format!(
            "{} seed candidates exceed population size {}",
            params.seed_candidates.len(),
            params.population_size
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let mut population = Vec::with_capacity(params.population_size);
    for _ in 0..params.population_size {
        let rules = RuleVector::new((0..n).map(|_| RuleNumber(rng.gen::<u8>())).collect())?;
        population.push(Chromosome::new(rules));
    }
    for (slot, candidate) in params.seed_candidates.iter().enumerate() {
        if candidate.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: candidate.len(),
            });
        }
        population[slot] = Chromosome::new(candidate.clone());
    }
    Ok(population)
}

/// Per-class tallies of one group: (class, multiplicity, earliest input
/// position). The position feeds the first-seen tie-break.
type ClassStats = Vec<(ClassId, usize, usize)>;

/// Training set folded to its distinct bit patterns. Per distinct pattern
/// and class it keeps the multiplicity and the earliest input position, so
/// basin votes (and their first-seen tie-break) match the unfolded set
/// exactly while each attractor is traced only once per evaluation.
struct DistinctPatterns {
    entries: Vec<(CAState, ClassStats)>,
    total: usize,
    width: usize,
}

impl DistinctPatterns {
    fn build(patterns: &[LabeledPattern]) -> Result<Self> {
        if patterns.is_empty() {
            return Err(Error::InvalidParameter(
                "training set must not be empty".into(),
            ));
        }
        let width = patterns[0].bits.len();
        let mut index: HashMap<CAState, usize> = HashMap::new();
        let mut entries: Vec<(CAState, ClassStats)> = Vec::new();
        for (pos, pattern) in patterns.iter().enumerate() {
            if pattern.bits.len() != width {
                return Err(Error::DimensionMismatch {
                    expected: width,
                    got: pattern.bits.len(),
                });
            }
            let slot = *index.entry(pattern.bits.clone()).or_insert_with(|| {
                entries.push((pattern.bits.clone(), Vec::new()));
                entries.len() - 1
            });
            let stats = &mut entries[slot].1;
            match stats
                .iter_mut()
                .find(|(label, _, _)| *label == pattern.label)
            {
                Some((_, count, _)) => *count += 1,
                None => stats.push((pattern.label, 1, pos)),
            }
        }
        Ok(Self {
            entries,
            total: patterns.len(),
            width,
        })
    }

    /// Majority-purity score of `rules` on the folded set.
    fn score(&self, rules: &RuleVector, boundary: BoundaryMode) -> Result<f64> {
        if rules.len() != self.width {
            return Err(Error::DimensionMismatch {
                expected: self.width,
                got: rules.len(),
            });
        }
        // basin key -> per-class (count, earliest input position)
        let mut basins: HashMap<CAState, ClassStats> = HashMap::new();
        for (bits, stats) in &self.entries {
            let key = attractor_route_key(bits, rules, boundary, DEFAULT_STEP_BUDGET)?;
            let acc = basins.entry(key).or_default();
            for &(label, count, first) in stats {
                match acc.iter_mut().find(|(l, _, _)| *l == label) {
                    Some((_, c, f)) => {
                        *c += count;
                        *f = (*f).min(first);
                    }
                    None => acc.push((label, count, first)),
                }
            }
        }
        let mut correct = 0usize;
        for acc in basins.values() {
            // Majority label; ties go to the class seen earliest in input
            // order.
            let &(_, majority_count, _) = acc
                .iter()
                .max_by(|a, b| a.1.cmp(&b.1).then(b.2.cmp(&a.2)))
                .unwrap();
            correct += majority_count;
        }
        Ok(correct as f64 / self.total as f64)
    }
}

/// Majority-purity fitness of `rules` on a labeled training set, in [0, 1].
///
/// Patterns are distributed into attractor basins; each basin votes its
/// majority label (ties to the first-seen class in input order) and the
/// score is the fraction of patterns matching their basin's vote.
pub fn fitness(
    rules: &RuleVector,
    patterns: &[LabeledPattern],
    boundary: BoundaryMode,
) -> Result<f64> {
    DistinctPatterns::build(patterns)?.score(rules, boundary)
}

/// Single-point crossover at `locus` (a genome bit index in `0..=8n`).
pub fn crossover(a: &Chromosome, b: &Chromosome, locus: usize) -> Result<(Chromosome, Chromosome)> {
    if a.rules.len() != b.rules.len() {
        return Err(Error::DimensionMismatch {
            expected: a.rules.len(),
            got: b.rules.len(),
        });
    }
    let len = a.genome_len();
    if locus > len {
        return Err(Error::InvalidParameter(format!(
            "crossover locus {locus} out of range 0..={len}"
        )));
    }
    let bits_a = a.genome_bits();
    let bits_b = b.genome_bits();
    let mut first = bits_a[..locus].to_vec();
    first.extend_from_slice(&bits_b[locus..]);
    let mut second = bits_b[..locus].to_vec();
    second.extend_from_slice(&bits_a[locus..]);
    Ok((
        Chromosome::from_genome_bits(&first)?,
        Chromosome::from_genome_bits(&second)?,
    ))
}

/// Flips each genome bit independently with probability `rate`.
pub fn mutate<R: Rng>(c: &Chromosome, rate: f64, rng: &mut R) -> Chromosome {
    let bits: Vec<bool> = c
        .genome_bits()
        .into_iter()
        .map(|bit| if rng.gen::<f64>() < rate { !bit } else { bit })
        .collect();
    Chromosome::from_genome_bits(&bits).expect("genome length preserved")
}

/// Runs the full evolution loop and returns the best chromosome ever seen
/// together with one trace row per evaluated generation.
pub fn evolve(
    patterns: &[LabeledPattern],
    params: &GaParams,
    boundary: BoundaryMode,
) -> Result<(Chromosome, Vec<GenerationTrace>)> {
    params.validate()?;
    let distinct = DistinctPatterns::build(patterns)?;
    let n = distinct.width;
    let np = params.population_size;

    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    // Fixed start state for the per-generation diagnostics, drawn from its
    // own stream so breeding randomness does not shift with it.
    let mut diag_rng = ChaCha8Rng::seed_from_u64(params.rng_seed ^ 0x9e37_79b9_7f4a_7c15);
    let diag_start = CAState::random(n, &mut diag_rng);

    let elite_count = ((params.elite_fraction * np as f64).floor() as usize).max(1);
    let mutant_count = ((params.mutant_share * np as f64).round() as usize).min(np - elite_count);

    let mut population = init_population(params, n)?;
    let mut best_ever: Option<Chromosome> = None;
    let mut trace = Vec::new();

    for generation in 0..params.max_generations {
        assert_eq!(population.len(), np, "population size must stay constant");
        for member in &mut population {
            if member.fitness.is_none() {
                member.fitness = Some(distinct.score(&member.rules, boundary)?);
            }
        }
        // Rank best-first; stable sort keeps ties in insertion order.
        population.sort_by(|a, b| b.fitness.unwrap().partial_cmp(&a.fitness.unwrap()).unwrap());

        let best = &population[0];
        if best_ever
            .as_ref()
            .is_none_or(|prev| best.fitness.unwrap() > prev.fitness.unwrap())
        {
            best_ever = Some(best.clone());
        }
        let mean = population.iter().map(|c| c.fitness.unwrap()).sum::<f64>() / np as f64;
        let run = spacetime_run(&best.rules, &diag_start, boundary, DIAGNOSTIC_STEPS)?;
        trace.push(GenerationTrace {
            generation,
            best_fitness: best.fitness.unwrap(),
            mean_fitness: mean,
            entropy: entropy(&run),
            mutual_information: if n >= 2 {
                mutual_information(&run)?
            } else {
                0.0
            },
        });

        if best.fitness.unwrap() >= params.target_fitness
            || generation + 1 == params.max_generations
        {
            break;
        }

        // Elites survive unchanged, a mutant share is bred from them, and
        // roulette-selected crossover fills the rest.
        let mut next: Vec<Chromosome> = population[..elite_count].to_vec();
        for k in 0..mutant_count {
            let parent = &population[k % elite_count];
            next.push(mutate(parent, params.mutation_bit_rate, &mut rng));
        }
        let weights: Vec<f64> = population
            .iter()
            .map(|c| c.fitness.unwrap() + SELECTION_EPSILON)
            .collect();
        let total_weight: f64 = weights.iter().sum();
        let pick = |rng: &mut ChaCha8Rng| -> usize {
            let mut u = rng.gen::<f64>() * total_weight;
            for (i, w) in weights.iter().enumerate() {
                u -= w;
                if u <= 0.0 {
                    return i;
                }
            }
            np - 1
        };
        while next.len() < np {
            let pa = pick(&mut rng);
            let pb = pick(&mut rng);
            let locus = rng.gen_range(0..=8 * n);
            let (o1, o2) = crossover(&population[pa], &population[pb], locus)?;
            next.push(o1);
            if next.len() < np {
                next.push(o2);
            }
        }
        population = next;
    }

    Ok((best_ever.unwrap(), trace))
}
