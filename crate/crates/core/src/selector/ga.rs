use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{SelectionProblem, SelectionResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population_size: usize,
    pub crossover_prob: f64,
    /// Per-bit flip probability.
    pub mutation_prob: f64,
    pub generations: usize,
    pub tournament_size: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 50,
            crossover_prob: 0.8,
            mutation_prob: 0.05,
            generations: 200,
            tournament_size: 3,
            restarts: 5,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if self.population_size < 2 {
            return Err(Error::Config("population_size must be >= 2".into()));
        }
        if !prob(self.crossover_prob) || !prob(self.mutation_prob) {
            return Err(Error::Config("probabilities must lie in [0, 1]".into()));
        }
        if self.generations < 1 {
            return Err(Error::Config("generations must be >= 1".into()));
        }
        if self.tournament_size < 2 {
            return Err(Error::Config("tournament_size must be >= 2".into()));
        }
        if self.restarts < 1 {
            return Err(Error::Config("restarts must be >= 1".into()));
        }
        Ok(())
    }
}

/// Inclusion bitstring over a candidate pool, packed into 64-bit words.
/// Bit `i` set means candidate `i` is a distractor.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Genome {
    len: usize,
    words: Vec<u64>,
}

impl Genome {
    pub fn from_bits(bits: &[bool]) -> Genome {
        let mut words = vec![0u64; word_count(bits.len())];
        for (i, _) in bits.iter().enumerate().filter(|(_, &b)| b) {
            words[i / 64] |= 1 << (i % 64);
        }
        Genome {
            len: bits.len(),
            words,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        count_ones(&self.words)
    }

    /// Selected candidates in pool order.
    pub fn decode(&self, candidates: &[usize]) -> Vec<usize> {
        let mut out = Vec::new();
        decode_into(&self.words, candidates, &mut out);
        out
    }

    /// Clears randomly chosen surplus ones, or sets randomly chosen zeros,
    /// until exactly `ones` bits are set.
    pub fn repair<R: Rng>(&mut self, ones: usize, rng: &mut R) {
        repair(&mut self.words, self.len, ones, rng);
    }
}

fn word_count(len: usize) -> usize {
    len.div_ceil(64).max(1)
}

fn count_ones(words: &[u64]) -> usize {
    words.iter().map(|w| w.count_ones() as usize).sum()
}

fn decode_into(words: &[u64], candidates: &[usize], out: &mut Vec<usize>) {
    out.clear();
    for (wi, &word) in words.iter().enumerate() {
        let mut w = word;
        while w != 0 {
            let b = w.trailing_zeros() as usize;
            out.push(candidates[wi * 64 + b]);
            w &= w - 1;
        }
    }
}

/// Position of the `rank`-th bit equal to `value` among the first `len`.
fn nth_position(words: &[u64], len: usize, value: bool, mut rank: usize) -> usize {
    for (wi, &word) in words.iter().enumerate() {
        let valid = if (wi + 1) * 64 <= len {
            u64::MAX
        } else {
            (1u64 << (len - wi * 64)) - 1
        };
        let mut w = if value { word } else { !word } & valid;
        let c = w.count_ones() as usize;
        if rank < c {
            for _ in 0..rank {
                w &= w - 1;
            }
            return wi * 64 + w.trailing_zeros() as usize;
        }
        rank -= c;
    }
    unreachable!("rank exceeds matching bit count")
}

fn repair<R: Rng>(words: &mut [u64], len: usize, ones: usize, rng: &mut R) {
    let mut count = count_ones(words);
    while count > ones {
        let p = nth_position(words, len, true, rng.gen_range(0..count));
        words[p / 64] &= !(1 << (p % 64));
        count -= 1;
    }
    while count < ones {
        let p = nth_position(words, len, false, rng.gen_range(0..len - count));
        words[p / 64] |= 1 << (p % 64);
        count += 1;
    }
}

/// Independent per-bit flips with probability `p`, drawn as geometric gaps
/// between flipped positions.
fn mutate<R: Rng>(words: &mut [u64], len: usize, p: f64, rng: &mut R) {
    if p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        for i in 0..len {
            words[i / 64] ^= 1 << (i % 64);
        }
        return;
    }
    let log_q = (-p).ln_1p();
    let mut pos = 0usize;
    loop {
        let u: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
        let gap = (u.ln() / log_q).floor();
        if gap >= (len - pos) as f64 {
            return;
        }
        pos += gap as usize;
        words[pos / 64] ^= 1 << (pos % 64);
        pos += 1;
        if pos >= len {
            return;
        }
    }
}

/// `parent1[..point] + parent2[point..]`.
fn crossover(child: &mut [u64], p1: &[u64], p2: &[u64], point: usize) {
    for (w, slot) in child.iter_mut().enumerate() {
        let lo = w * 64;
        *slot = if point >= lo + 64 {
            p1[w]
        } else if point <= lo {
            p2[w]
        } else {
            let mask = (1u64 << (point - lo)) - 1;
            (p1[w] & mask) | (p2[w] & !mask)
        };
    }
}

struct RestartOutcome {
    distractors: Vec<usize>,
    objective: f64,
    converged_at: usize,
}

pub(super) fn run(problem: &SelectionProblem<'_>, config: &GaConfig) -> Result<SelectionResult> {
    config.validate()?;
    let outcomes: Vec<RestartOutcome> = (0..config.restarts)
        .into_par_iter()
        .map(|restart| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(restart as u64);
            evolve(problem, config, &mut rng)
        })
        .collect();
    let best = outcomes
        .into_iter()
        .reduce(|a, b| {
            let better = b.objective < a.objective
                || (b.objective == a.objective && b.distractors < a.distractors);
            if better {
                b
            } else {
                a
            }
        })
        .expect("restarts >= 1");
    problem.finish(best.distractors, config.generations, best.converged_at)
}

fn evolve(problem: &SelectionProblem<'_>, config: &GaConfig, rng: &mut ChaCha8Rng) -> RestartOutcome {
    let candidates = problem.candidates();
    let len = candidates.len();
    let ones = problem.distractor_count();
    let size = config.population_size;
    let wc = word_count(len);

    let mut decoded = Vec::with_capacity(ones);
    let mut fitness = |g: &[u64]| {
        decode_into(g, candidates, &mut decoded);
        problem.objective_fast(&decoded)
    };

    let mut population = vec![0u64; size * wc];
    for g in population.chunks_mut(wc) {
        for p in rand::seq::index::sample(rng, len, ones) {
            g[p / 64] |= 1 << (p % 64);
        }
    }
    let mut next = vec![0u64; size * wc];
    let mut scores: Vec<f64> = population.chunks(wc).map(&mut fitness).collect();

    let argmin = |scores: &[f64]| {
        (1..scores.len()).fold(0, |best, i| if scores[i] < scores[best] { i } else { best })
    };
    let mut best_idx = argmin(&scores);
    let mut best = (population[best_idx * wc..][..wc].to_vec(), scores[best_idx]);
    let mut converged_at = 0;

    for generation in 1..=config.generations {
        // Elitism: the current best survives unchanged in slot 0.
        next[..wc].copy_from_slice(&population[best_idx * wc..][..wc]);
        for slot in 1..size {
            let p1 = tournament(&scores, config.tournament_size, rng);
            let p2 = tournament(&scores, config.tournament_size, rng);
            let (g1, g2) = (&population[p1 * wc..][..wc], &population[p2 * wc..][..wc]);
            let child = &mut next[slot * wc..][..wc];
            if len >= 2 && rng.gen_bool(config.crossover_prob) {
                crossover(child, g1, g2, rng.gen_range(1..len));
            } else if rng.gen_bool(0.5) {
                child.copy_from_slice(g1);
            } else {
                child.copy_from_slice(g2);
            }
            mutate(child, len, config.mutation_prob, rng);
            repair(child, len, ones, rng);
        }
        std::mem::swap(&mut population, &mut next);
        debug_assert!(population.chunks(wc).all(|g| count_ones(g) == ones));
        for (score, g) in scores.iter_mut().zip(population.chunks(wc)) {
            *score = fitness(g);
        }
        best_idx = argmin(&scores);
        if scores[best_idx] < best.1 {
            best.0.copy_from_slice(&population[best_idx * wc..][..wc]);
            best.1 = scores[best_idx];
            converged_at = generation;
        }
    }

    let mut distractors = Vec::with_capacity(ones);
    decode_into(&best.0, candidates, &mut distractors);
    RestartOutcome {
        distractors,
        objective: best.1,
        converged_at,
    }
}

fn tournament<R: Rng>(scores: &[f64], size: usize, rng: &mut R) -> usize {
    let mut winner = rng.gen_range(0..scores.len());
    for _ in 1..size {
        let challenger = rng.gen_range(0..scores.len());
        if scores[challenger] < scores[winner] {
            winner = challenger;
        }
    }
    winner
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SimilarityGraph;
    use crate::selector::{exhaustive_select, ga_select};

    fn random_graph(n: usize, seed: u64) -> SimilarityGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut w = vec![1.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v: f64 = rng.gen();
                w[i * n + j] = v;
                w[j * n + i] = v;
            }
        }
        SimilarityGraph::new((0..n).map(|i| format!("c{i}")).collect(), w).unwrap()
    }

    #[test]
    fn repair_hits_exact_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for len in [1usize, 10, 64, 65, 130] {
            for ones in [0, 1, len / 2, len] {
                for _ in 0..20 {
                    let bits: Vec<bool> = (0..len).map(|_| rng.gen_bool(0.5)).collect();
                    let mut g = Genome::from_bits(&bits);
                    g.repair(ones, &mut rng);
                    assert_eq!(g.count_ones(), ones);
                    assert!(g.words.iter().enumerate().all(|(w, &x)| {
                        (0..64).all(|b| w * 64 + b < len || x >> b & 1 == 0)
                    }));
                }
            }
        }
    }

    #[test]
    fn crossover_takes_prefix_then_suffix() {
        let a = Genome::from_bits(&[true; 70]);
        let b = Genome::from_bits(&[false; 70]);
        for point in [1, 5, 63, 64, 65, 69] {
            let mut child = vec![0u64; 2];
            crossover(&mut child, &a.words, &b.words, point);
            let g = Genome { len: 70, words: child };
            assert!((0..70).all(|i| g.bit(i) == (i < point)), "point {point}");
        }
    }

    #[test]
    fn mutation_rate_matches_probability() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let len = 100;
        let trials = 4000;
        let mut flips = 0;
        for _ in 0..trials {
            let mut w = vec![0u64; 2];
            mutate(&mut w, len, 0.05, &mut rng);
            flips += count_ones(&w);
        }
        let rate = flips as f64 / (len * trials) as f64;
        // sd of the rate is sqrt(0.05 * 0.95 / 400000) ~ 3.4e-4
        assert!((rate - 0.05).abs() < 1.5e-3, "rate {rate}");
        let mut w = vec![0u64];
        mutate(&mut w, 10, 1.0, &mut rng);
        assert_eq!(count_ones(&w), 10);
        mutate(&mut w, 10, 0.0, &mut rng);
        assert_eq!(count_ones(&w), 10);
    }

    #[test]
    fn config_validation() {
        assert!(GaConfig::default().validate().is_ok());
        let bad = [
            GaConfig { population_size: 1, ..GaConfig::default() },
            GaConfig { crossover_prob: 1.5, ..GaConfig::default() },
            GaConfig { mutation_prob: -0.1, ..GaConfig::default() },
            GaConfig { generations: 0, ..GaConfig::default() },
            GaConfig { tournament_size: 1, ..GaConfig::default() },
            GaConfig { restarts: 0, ..GaConfig::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn five_classes_four_options_matches_oracle() {
        for seed in 0..10 {
            let g = random_graph(5, seed);
            let ga = ga_select(&g, 0, 4, 1.0, &GaConfig::default().with_seed(seed)).unwrap();
            let exact = exhaustive_select(&g, 0, 4, 1.0).unwrap();
            assert_eq!(ga.option_set, exact.option_set);
            assert_eq!(ga.stats, exact.stats);
        }
    }

    #[test]
    fn dominant_triple_is_selected() {
        let n = 8;
        let triple = [2usize, 5, 6];
        let mut w = vec![1.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let low = (i == 0 || triple.contains(&i)) && (j == 0 || triple.contains(&j));
                    w[i * n + j] = if low { 0.01 } else { 0.95 };
                }
            }
        }
        let g = SimilarityGraph::new((0..n).map(|i| format!("c{i}")).collect(), w).unwrap();
        let res = ga_select(&g, 0, 4, 1.0, &GaConfig::default().with_seed(3)).unwrap();
        assert_eq!(res.option_set.distractors(), &triple);
        assert_eq!(res.stats.variance, 0.0);
        assert_eq!(res.stats.s_value, 0.01);
    }

    #[test]
    fn errors_on_bad_arguments() {
        let g = random_graph(5, 0);
        let cfg = GaConfig::default();
        assert!(ga_select(&g, 0, 6, 0.0, &cfg).is_err());
        assert!(ga_select(&g, 9, 3, 0.0, &cfg).is_err());
        assert!(ga_select(&g, 0, 1, 0.0, &cfg).is_err());
        assert!(ga_select(&g, 0, 3, -1.0, &cfg).is_err());
        let bad = GaConfig { generations: 0, ..GaConfig::default() };
        assert!(ga_select(&g, 0, 3, 0.0, &bad).is_err());
    }

    #[test]
    fn seeded_runs_are_identical() {
        let g = random_graph(15, 4);
        let cfg = GaConfig::default().with_seed(99);
        let a = ga_select(&g, 3, 7, 0.5, &cfg).unwrap();
        let b = ga_select(&g, 3, 7, 0.5, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.stats.objective.to_bits(), b.stats.objective.to_bits());
        assert!(a.converged_at <= a.generations_run);
    }

    #[test]
    fn all_classes_as_options() {
        let g = random_graph(6, 2);
        let res = ga_select(&g, 1, 6, 1.0, &GaConfig::default()).unwrap();
        assert_eq!(res.option_set.distractors(), &[0, 2, 3, 4, 5]);
    }

    #[test]
    fn pools_wider_than_one_word() {
        let g = random_graph(80, 8);
        let res = ga_select(&g, 0, 4, 1.0, &GaConfig { generations: 30, ..GaConfig::default() }).unwrap();
        assert_eq!(res.option_set.distractors().len(), 3);
        assert!(res.option_set.distractors().iter().all(|&d| d != 0 && d < 80));
    }
}
