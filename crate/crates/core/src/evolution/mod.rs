//! Cultural evolution over agents that carry a gene, the (pool tag,
//! attitude) pair their strategy was drawn from.
//!
//! One generation: every agent plays `games_per_agent` games, one per
//! independent random partition of the population into groups. Agents are
//! ranked by mean normalized payoff; the top `elites` survive unchanged and
//! every other slot copies a parent's gene with probability proportional to
//! fitness, mutates it, and draws a fresh strategy from the gene's pool.

mod io;

use std::fmt;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::game::{play_game, welfare_bounds, GameKind, GameParams, ParamsTemplate, WelfareBounds};
use crate::seed;
use crate::strategy::{Attitude, Strategy, StrategyPool};

pub use io::{read_history_csv, write_history_csv, write_summary_csv, write_summary_json, HistoryCsvRow};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Gene {
    pub pool_tag: String,
    pub attitude: Attitude,
}

impl Gene {
    pub fn new(pool_tag: impl Into<String>, attitude: Attitude) -> Self {
        Gene {
            pool_tag: pool_tag.into(),
            attitude,
        }
    }

    pub fn of_pool(pool: &StrategyPool) -> Self {
        Gene::new(pool.gene_tag.clone(), pool.attitude)
    }
}

impl fmt::Display for Gene {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.pool_tag, self.attitude)
    }
}

/// Pools addressable by gene.
#[derive(Clone, Debug)]
pub struct GeneRegistry {
    pools: Vec<StrategyPool>,
}

impl GeneRegistry {
    pub fn new(pools: Vec<StrategyPool>) -> Result<Self> {
        for (i, p) in pools.iter().enumerate() {
            if pools[..i].iter().any(|q| Gene::of_pool(q) == Gene::of_pool(p)) {
                return Err(Error::params(format!("gene {} is registered twice", Gene::of_pool(p))));
            }
        }
        Ok(GeneRegistry { pools })
    }

    pub fn genes(&self) -> Vec<Gene> {
        self.pools.iter().map(Gene::of_pool).collect()
    }

    pub fn pool(&self, gene: &Gene) -> Result<&StrategyPool> {
        self.pools
            .iter()
            .find(|p| p.gene_tag == gene.pool_tag && p.attitude == gene.attitude)
            .ok_or_else(|| Error::UnregisteredGene(gene.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub kind: GameKind,
    pub params: ParamsTemplate,
    pub genes: Vec<Gene>,
    pub population: usize,
    pub group_size: usize,
    pub games_per_agent: usize,
    pub elites: usize,
    pub mutation_rate: f64,
    /// Mutation draws among the other genes only.
    pub mutation_excludes_current: bool,
    pub dominance_threshold: f64,
    pub max_generations: usize,
    pub master_seed: u64,
    pub exec: Exec,
}

impl EvolutionConfig {
    /// Population 512, 4 games per agent, 64 elites, 10% mutation, stop at
    /// 75% dominance or 200 generations.
    pub fn new(kind: GameKind, genes: Vec<Gene>, group_size: usize, master_seed: u64) -> Self {
        EvolutionConfig {
            kind,
            params: ParamsTemplate::default(),
            genes,
            population: 512,
            group_size,
            games_per_agent: 4,
            elites: 64,
            mutation_rate: 0.10,
            mutation_excludes_current: true,
            dominance_threshold: 0.75,
            max_generations: 200,
            master_seed,
            exec: Exec::default(),
        }
    }

    pub fn game_params(&self) -> GameParams {
        self.params.for_size(self.group_size)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::params(m));
        if self.genes.is_empty() {
            return bad("no genes configured".into());
        }
        if self.group_size < 2 || !self.population.is_multiple_of(self.group_size) || self.population == 0 {
            return bad(format!(
                "population {} must be a positive multiple of group_size {} (>= 2)",
                self.population, self.group_size
            ));
        }
        if self.elites >= self.population {
            return bad(format!("elites {} must be < population {}", self.elites, self.population));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return bad(format!("mutation_rate {} outside [0, 1]", self.mutation_rate));
        }
        if !(self.dominance_threshold > 0.0 && self.dominance_threshold <= 1.0) {
            return bad(format!("dominance_threshold {} outside (0, 1]", self.dominance_threshold));
        }
        if self.games_per_agent == 0 || self.max_generations == 0 {
            return bad("games_per_agent and max_generations must be >= 1".into());
        }
        for (i, g) in self.genes.iter().enumerate() {
            if self.genes[..i].contains(g) {
                return bad(format!("gene {g} listed twice"));
            }
        }
        self.game_params().validate(self.kind)
    }
}

/// One agent: an index into the configured genes and a member of that
/// gene's pool.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Agent {
    pub gene: usize,
    pub member: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub agent: Agent,
    /// Mean normalized payoff over this generation's games.
    pub fitness: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    /// Counts aligned with the configured genes.
    pub gene_frequencies: Vec<usize>,
    pub mean_welfare: f64,
    pub welfare_efficiency: f64,
}

/// Everything observable about one generation's games.
#[derive(Clone, Debug, PartialEq)]
pub struct GenerationPlay {
    /// `games_per_agent` partitions, each a list of groups of agent indices.
    pub partitions: Vec<Vec<Vec<usize>>>,
    pub individuals: Vec<Individual>,
    pub games_played: Vec<usize>,
    /// Mean welfare of each game, in partition then group order.
    pub game_welfare: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Threshold,
    MaxGenerations,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionResult {
    pub winner: Gene,
    pub terminated_by: Termination,
    pub generations_run: usize,
    pub history: Vec<GenerationStats>,
    pub genes: Vec<Gene>,
}

impl EvolutionResult {
    pub fn final_efficiency(&self) -> f64 {
        self.history.last().map_or(0.0, |s| s.welfare_efficiency)
    }
}

/// Share of the welfare gap captured: `(mean - min) / (max - min)`.
/// Clamped to `[0, 1]` only when the bounds are approximate.
pub fn welfare_efficiency(mean_welfare: f64, bounds: &WelfareBounds) -> Result<f64> {
    let gap = bounds.max - bounds.min;
    if gap == 0.0 {
        return Err(Error::Undefined(format!(
            "welfare efficiency needs max > min, both are {}",
            bounds.max
        )));
    }
    let e = (mean_welfare - bounds.min) / gap;
    Ok(if bounds.approximate { e.clamp(0.0, 1.0) } else { e })
}

/// A population with its configuration resolved against the registry.
pub struct Evolution<'a> {
    config: &'a EvolutionConfig,
    pools: Vec<&'a StrategyPool>,
    params: GameParams,
    bounds: WelfareBounds,
}

impl<'a> Evolution<'a> {
    pub fn new(config: &'a EvolutionConfig, registry: &'a GeneRegistry) -> Result<Self> {
        config.validate()?;
        let pools = config
            .genes
            .iter()
            .map(|g| registry.pool(g))
            .collect::<Result<Vec<_>>>()?;
        let params = config.game_params();
        let bounds = welfare_bounds(config.kind, &params)?;
        if bounds.max == bounds.min {
            return Err(Error::params("welfare bounds coincide; efficiency is undefined"));
        }
        Ok(Evolution {
            config,
            pools,
            params,
            bounds,
        })
    }

    pub fn bounds(&self) -> WelfareBounds {
        self.bounds
    }

    fn strategy(&self, a: Agent) -> &'a Strategy {
        &self.pools[a.gene].members[a.member]
    }

    fn draw_member(&self, gene: usize, rng: &mut impl Rng) -> usize {
        rng.random_range(0..self.pools[gene].len())
    }

    /// Genes split as evenly as possible (agent `i` gets gene `i mod G`),
    /// each with a random member of its pool.
    pub fn initial_population(&self) -> Vec<Agent> {
        let mut rng = seed::stream(self.config.master_seed, &[seed::TAG_INIT]);
        let g = self.config.genes.len();
        (0..self.config.population)
            .map(|i| {
                let gene = i % g;
                Agent {
                    gene,
                    member: self.draw_member(gene, &mut rng),
                }
            })
            .collect()
    }

    /// Independent uniform partitions into groups of `group_size`.
    pub fn partitions(&self, generation: usize) -> Vec<Vec<Vec<usize>>> {
        (0..self.config.games_per_agent)
            .map(|p| {
                let mut rng = seed::stream(
                    self.config.master_seed,
                    &[seed::TAG_PARTITION, generation as u64, p as u64],
                );
                let mut order: Vec<usize> = (0..self.config.population).collect();
                order.shuffle(&mut rng);
                order.chunks(self.config.group_size).map(<[usize]>::to_vec).collect()
            })
            .collect()
    }

    pub fn play_generation(&self, population: &[Agent], generation: usize) -> Result<GenerationPlay> {
        let partitions = self.partitions(generation);
        let groups: Vec<&Vec<usize>> = partitions.iter().flatten().collect();
        let results = self.config.exec.try_map(groups.len(), |gi| {
            let seats: Vec<&Strategy> = groups[gi].iter().map(|&i| self.strategy(population[i])).collect();
            let s = seed::derive(self.config.master_seed, &[seed::TAG_GAME, generation as u64, gi as u64]);
            play_game(self.config.kind, &self.params, &seats, s)
        })?;
        let n = population.len();
        let mut total = vec![0.0; n];
        let mut games_played = vec![0usize; n];
        let mut game_welfare = Vec::with_capacity(results.len());
        for (group, result) in groups.iter().zip(&results) {
            for (&agent, &payoff) in group.iter().zip(&result.normalized) {
                total[agent] += payoff;
                games_played[agent] += 1;
            }
            game_welfare.push(result.mean_welfare);
        }
        let individuals = population
            .iter()
            .zip(total.iter().zip(&games_played))
            .map(|(&agent, (&t, &g))| Individual {
                agent,
                fitness: t / g as f64,
            })
            .collect();
        Ok(GenerationPlay {
            partitions,
            individuals,
            games_played,
            game_welfare,
        })
    }

    pub fn stats(&self, play: &GenerationPlay, generation: usize) -> Result<GenerationStats> {
        let mut gene_frequencies = vec![0usize; self.config.genes.len()];
        for ind in &play.individuals {
            gene_frequencies[ind.agent.gene] += 1;
        }
        let mean_welfare = play.game_welfare.iter().sum::<f64>() / play.game_welfare.len() as f64;
        Ok(GenerationStats {
            generation,
            gene_frequencies,
            mean_welfare,
            welfare_efficiency: welfare_efficiency(mean_welfare, &self.bounds)?,
        })
    }

    /// Agent indices ordered from fittest down; equal fitness is ordered by a
    /// seeded shuffle.
    pub fn ranking(&self, play: &GenerationPlay, generation: usize) -> Vec<usize> {
        let mut rng = seed::stream(self.config.master_seed, &[seed::TAG_RANK, generation as u64]);
        let mut order: Vec<usize> = (0..play.individuals.len()).collect();
        order.shuffle(&mut rng);
        order.sort_by(|&a, &b| {
            play.individuals[b]
                .fitness
                .total_cmp(&play.individuals[a].fitness)
        });
        order
    }

    /// Next population. Elites keep their slot; every other slot is refilled
    /// from a fitness-proportional parent. Returns the elite indices too.
    pub fn reproduce(&self, play: &GenerationPlay, generation: usize) -> Result<(Vec<Agent>, Vec<usize>)> {
        let ranking = self.ranking(play, generation);
        let elites: Vec<usize> = ranking[..self.config.elites].to_vec();
        let mut is_elite = vec![false; play.individuals.len()];
        for &e in &elites {
            is_elite[e] = true;
        }
        let fitness: Vec<f64> = play.individuals.iter().map(|i| i.fitness).collect();
        let parents = if fitness.iter().all(|&f| f == 0.0) {
            None
        } else {
            Some(WeightedIndex::new(&fitness).map_err(|e| Error::params(format!("fitness weights: {e}")))?)
        };
        let genes = self.config.genes.len();
        let mut rng = seed::stream(self.config.master_seed, &[seed::TAG_REPRODUCE, generation as u64]);
        let mut next = Vec::with_capacity(play.individuals.len());
        for (slot, ind) in play.individuals.iter().enumerate() {
            if is_elite[slot] {
                next.push(ind.agent);
                continue;
            }
            let parent = match &parents {
                Some(w) => w.sample(&mut rng),
                None => rng.random_range(0..fitness.len()),
            };
            let mut gene = play.individuals[parent].agent.gene;
            if rng.random_bool(self.config.mutation_rate) {
                gene = if self.config.mutation_excludes_current && genes > 1 {
                    let other = rng.random_range(0..genes - 1);
                    if other >= gene {
                        other + 1
                    } else {
                        other
                    }
                } else if self.config.mutation_excludes_current {
                    gene
                } else {
                    rng.random_range(0..genes)
                };
            }
            next.push(Agent {
                gene,
                member: self.draw_member(gene, &mut rng),
            });
        }
        Ok((next, elites))
    }

    /// Plays one generation and produces the next population.
    pub fn run_generation(
        &self,
        population: &[Agent],
        generation: usize,
    ) -> Result<(Vec<Agent>, GenerationStats)> {
        let play = self.play_generation(population, generation)?;
        let stats = self.stats(&play, generation)?;
        let (next, _) = self.reproduce(&play, generation)?;
        Ok((next, stats))
    }

    fn dominant(&self, frequencies: &[usize]) -> bool {
        let cut = self.config.dominance_threshold * self.config.population as f64;
        frequencies.iter().any(|&f| f as f64 >= cut)
    }

    /// Plurality gene; ties are broken by a seeded draw.
    fn plurality(&self, frequencies: &[usize], generation: usize) -> usize {
        let top = *frequencies.iter().max().unwrap_or(&0);
        let tied: Vec<usize> = (0..frequencies.len()).filter(|&g| frequencies[g] == top).collect();
        if tied.len() == 1 {
            return tied[0];
        }
        let mut rng = seed::stream(self.config.master_seed, &[seed::TAG_RANK, generation as u64, u64::MAX]);
        tied[rng.random_range(0..tied.len())]
    }

    /// Generation `g` is played and recorded, then the run stops if the
    /// population that played it is dominated by one gene or `g` was the
    /// last allowed generation.
    pub fn run(&self) -> Result<EvolutionResult> {
        let mut population = self.initial_population();
        let mut history = Vec::new();
        for g in 0..self.config.max_generations {
            let play = self.play_generation(&population, g)?;
            let stats = self.stats(&play, g)?;
            let dominant = self.dominant(&stats.gene_frequencies);
            let last = g + 1 == self.config.max_generations;
            history.push(stats);
            if dominant || last {
                let freq = &history[g].gene_frequencies;
                return Ok(EvolutionResult {
                    winner: self.config.genes[self.plurality(freq, g)].clone(),
                    terminated_by: if dominant {
                        Termination::Threshold
                    } else {
                        Termination::MaxGenerations
                    },
                    generations_run: g + 1,
                    history,
                    genes: self.config.genes.clone(),
                });
            }
            population = self.reproduce(&play, g)?.0;
        }
        unreachable!("max_generations >= 1 is validated")
    }
}

pub fn run_evolution(config: &EvolutionConfig, registry: &GeneRegistry) -> Result<EvolutionResult> {
    Evolution::new(config, registry)?.run()
}

/// One column of the batch table: winner counts per gene plus run summaries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub game: GameKind,
    pub group_size: usize,
    pub runs: usize,
    pub genes: Vec<Gene>,
    pub wins: Vec<usize>,
    pub threshold_reached: usize,
    pub average_generations: f64,
    pub mean_final_efficiency: f64,
}

impl BatchSummary {
    pub fn column_name(&self) -> String {
        format!("{}_n{}", self.game.short_name(), self.group_size)
    }
}

/// `run_count` independent runs; run `r` uses master seed
/// `derive(config.master_seed, [run, r])`.
pub fn batch_runs(config: &EvolutionConfig, registry: &GeneRegistry, run_count: usize) -> Result<(BatchSummary, Vec<EvolutionResult>)> {
    if run_count == 0 {
        return Err(Error::params("run_count must be >= 1"));
    }
    config.validate()?;
    let results = config.exec.try_map(run_count, |r| {
        let cfg = EvolutionConfig {
            master_seed: seed::derive(config.master_seed, &[seed::TAG_RUN, r as u64]),
            ..config.clone()
        };
        run_evolution(&cfg, registry)
    })?;
    let mut wins = vec![0usize; config.genes.len()];
    for res in &results {
        let g = config.genes.iter().position(|g| *g == res.winner).expect("winner is a configured gene");
        wins[g] += 1;
    }
    let runs = results.len() as f64;
    let summary = BatchSummary {
        game: config.kind,
        group_size: config.group_size,
        runs: run_count,
        genes: config.genes.clone(),
        wins,
        threshold_reached: results.iter().filter(|r| r.terminated_by == Termination::Threshold).count(),
        average_generations: results.iter().map(|r| r.generations_run as f64).sum::<f64>() / runs,
        mean_final_efficiency: results.iter().map(EvolutionResult::final_efficiency).sum::<f64>() / runs,
    };
    Ok((summary, results))
}

#[cfg(test)]
mod tests;
