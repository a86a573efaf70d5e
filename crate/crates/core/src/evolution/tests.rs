use super::*;
use crate::strategy::{make_reference, Reference};

fn pool(tag: &str, att: Attitude, r: Reference, size: usize) -> StrategyPool {
    StrategyPool::uniform(tag, att, make_reference(r, 4).unwrap(), size).unwrap()
}

fn cd_registry() -> GeneRegistry {
    GeneRegistry::new(vec![
        pool("alld", Attitude::Exploitative, Reference::AllD, 16),
        pool("allc", Attitude::Collective, Reference::AllC, 16),
    ])
    .unwrap()
}

fn small(kind: GameKind, registry: &GeneRegistry, seed: u64) -> EvolutionConfig {
    let mut c = EvolutionConfig::new(kind, registry.genes(), 4, seed);
    c.population = 64;
    c.elites = 8;
    c.max_generations = 30;
    c
}

fn assert_invariants(evo: &Evolution, config: &EvolutionConfig, pop: &[Agent], g: usize) -> Vec<Agent> {
    let play = evo.play_generation(pop, g).unwrap();
    assert!(play.games_played.iter().all(|&k| k == config.games_per_agent));
    for part in &play.partitions {
        let mut seen = vec![false; config.population];
        for group in part {
            assert_eq!(group.len(), config.group_size);
            for &i in group {
                assert!(!seen[i]);
                seen[i] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }
    let stats = evo.stats(&play, g).unwrap();
    assert_eq!(stats.gene_frequencies.iter().sum::<usize>(), config.population);
    assert!(play.individuals.iter().all(|i| i.fitness >= 0.0));
    let (next, elites) = evo.reproduce(&play, g).unwrap();
    assert_eq!(next.len(), config.population);
    assert_eq!(elites.len(), config.elites);
    let worst_elite = elites.iter().map(|&e| play.individuals[e].fitness).fold(f64::INFINITY, f64::min);
    for (i, ind) in play.individuals.iter().enumerate() {
        if elites.contains(&i) {
            assert_eq!(next[i], ind.agent);
        } else {
            assert!(ind.fitness <= worst_elite);
        }
    }
    next
}

#[test]
fn bookkeeping_every_generation() {
    let reg = GeneRegistry::new(vec![
        pool("alld", Attitude::Exploitative, Reference::AllD, 16),
        pool("rnd", Attitude::Exploitative, Reference::Rnd(0.5), 16),
        pool("cc", Attitude::Collective, Reference::CC(2), 16),
    ])
    .unwrap();
    for kind in GameKind::ALL {
        let mut config = small(kind, &reg, 11);
        config.population = 32;
        config.elites = 5;
        let evo = Evolution::new(&config, &reg).unwrap();
        let mut pop = evo.initial_population();
        for g in 0..15 {
            pop = assert_invariants(&evo, &config, &pop, g);
        }
    }
}

#[test]
fn population_of_eight_plays_four_games_each() {
    let reg = cd_registry();
    let mut config = small(GameKind::PublicGoods, &reg, 2);
    config.population = 8;
    config.elites = 2;
    let evo = Evolution::new(&config, &reg).unwrap();
    let play = evo.play_generation(&evo.initial_population(), 0).unwrap();
    assert_eq!(play.games_played, vec![4; 8]);
    assert_eq!(play.game_welfare.len(), 8);
}

#[test]
fn single_gene_stays_single_without_mutation() {
    let reg = cd_registry();
    let mut config = small(GameKind::PublicGoods, &reg, 5);
    config.genes = vec![Gene::new("allc", Attitude::Collective)];
    config.mutation_rate = 0.0;
    config.dominance_threshold = 1.0;
    config.max_generations = 1;
    let evo = Evolution::new(&config, &reg).unwrap();
    let (next, _) = evo.run_generation(&evo.initial_population(), 0).unwrap();
    assert!(next.iter().all(|a| a.gene == 0));
    let r = evo.run().unwrap();
    assert_eq!(r.terminated_by, Termination::Threshold);
    assert_eq!(r.generations_run, 1);
    assert_eq!(r.history.len(), 1);
}

#[test]
fn extinct_genes_never_return_without_mutation() {
    let reg = GeneRegistry::new(vec![
        pool("alld", Attitude::Exploitative, Reference::AllD, 4),
        pool("allc", Attitude::Collective, Reference::AllC, 4),
        pool("rnd", Attitude::Collective, Reference::Rnd(0.5), 4),
    ])
    .unwrap();
    let mut config = small(GameKind::PublicGoods, &reg, 9);
    config.population = 24;
    config.elites = 3;
    config.mutation_rate = 0.0;
    let evo = Evolution::new(&config, &reg).unwrap();
    let mut pop = evo.initial_population();
    let mut extinct = [false; 3];
    for g in 0..40 {
        let (next, _) = evo.run_generation(&pop, g).unwrap();
        for (gene, dead) in extinct.iter_mut().enumerate() {
            let alive = next.iter().any(|a| a.gene == gene);
            assert!(!(*dead && alive));
            *dead |= !alive;
        }
        pop = next;
    }
}

#[test]
fn defectors_outearn_cooperators_in_mixed_groups() {
    let d = make_reference(Reference::AllD, 4).unwrap();
    let c = make_reference(Reference::AllC, 4).unwrap();
    let p = GameParams::new(4);
    for n_d in 1..4 {
        let seats: Vec<&Strategy> = (0..4).map(|i| if i < n_d { &d } else { &c }).collect();
        let r = play_game(GameKind::PublicGoods, &p, &seats, 0).unwrap();
        assert!((r.normalized[0] - r.normalized[3] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn defector_share_does_not_shrink_on_average() {
    let reg = cd_registry();
    let mut total = 0usize;
    let runs = 100;
    for s in 0..runs {
        let config = small(GameKind::PublicGoods, &reg, s);
        let evo = Evolution::new(&config, &reg).unwrap();
        let pop = evo.initial_population();
        assert_eq!(pop.iter().filter(|a| a.gene == 0).count(), 32);
        let (next, _) = evo.run_generation(&pop, 0).unwrap();
        total += next.iter().filter(|a| a.gene == 0).count();
    }
    assert!(total as f64 / runs as f64 >= 32.0, "{}", total as f64 / runs as f64);
}

#[test]
fn all_cooperator_groups_match_hypergeometric_rate() {
    // 8 of 16 agents carry the cooperator gene; C(8,4)/C(16,4) = 70/1820.
    let reg = cd_registry();
    let mut config = small(GameKind::PublicGoods, &reg, 21);
    config.population = 16;
    config.elites = 2;
    let evo = Evolution::new(&config, &reg).unwrap();
    let pop = evo.initial_population();
    let p = 70.0 / 1820.0;
    let mut hits = 0usize;
    let mut groups = 0usize;
    for g in 0..2000 {
        for part in evo.partitions(g) {
            for group in part {
                groups += 1;
                hits += usize::from(group.iter().all(|&i| pop[i].gene == 1));
            }
        }
    }
    let expected = p * groups as f64;
    let sd = (groups as f64 * p * (1.0 - p)).sqrt();
    assert!((hits as f64 - expected).abs() < 4.0 * sd, "{hits} vs {expected} (sd {sd})");
}

#[test]
fn forced_mutation_keeps_neutral_genes_balanced() {
    // Identical pools make fitness neutral; with mutation certain every
    // offspring flips its parent's gene. The head count of gene 0 then
    // follows X' - N/2 ~ -(N - 2E)/N (X - N/2) + noise of variance N/4,
    // so its long-run mean sits at N/2.
    let reg = GeneRegistry::new(vec![
        pool("a", Attitude::Collective, Reference::AllC, 8),
        pool("b", Attitude::Collective, Reference::Rnd(1.0), 8),
    ])
    .unwrap();
    let mut config = small(GameKind::PublicGoods, &reg, 4);
    config.mutation_rate = 1.0;
    let evo = Evolution::new(&config, &reg).unwrap();
    let mut pop = evo.initial_population();
    let n = config.population as f64;
    let rho = -(n - 2.0 * config.elites as f64) / n;
    let stationary_var = (n / 4.0) / (1.0 - rho * rho);
    let t = 400;
    let mut sum = 0.0;
    for g in 0..t {
        let (next, stats) = evo.run_generation(&pop, g).unwrap();
        sum += stats.gene_frequencies[0] as f64;
        assert!((stats.gene_frequencies[0] as f64 - n / 2.0).abs() <= 5.0 * stationary_var.sqrt());
        pop = next;
    }
    let mean = sum / t as f64;
    let se = (stationary_var / t as f64 * (1.0 + rho) / (1.0 - rho)).sqrt();
    assert!((mean - n / 2.0).abs() <= 3.0 * se, "mean {mean}, se {se}");
}

#[test]
fn efficiency_values() {
    let b = WelfareBounds {
        min: 1.0,
        max: 2.0,
        approximate: false,
    };
    assert_eq!(welfare_efficiency(2.0, &b).unwrap(), 1.0);
    assert_eq!(welfare_efficiency(1.0, &b).unwrap(), 0.0);
    assert_eq!(welfare_efficiency(1.5, &b).unwrap(), 0.5);
    assert_eq!(welfare_efficiency(2.5, &b).unwrap(), 1.5);
    let approx = WelfareBounds { approximate: true, ..b };
    assert_eq!(welfare_efficiency(2.5, &approx).unwrap(), 1.0);
    let flat = WelfareBounds { min: 1.0, max: 1.0, approximate: false };
    assert!(welfare_efficiency(1.0, &flat).is_err());
}

#[test]
fn all_defect_generation_has_zero_efficiency() {
    let reg = cd_registry();
    let mut config = small(GameKind::PublicGoods, &reg, 1);
    config.genes = vec![Gene::new("alld", Attitude::Exploitative)];
    let r = run_evolution(&config, &reg).unwrap();
    assert_eq!(r.history[0].mean_welfare, 1.0);
    assert_eq!(r.history[0].welfare_efficiency, 0.0);
}

#[test]
fn deterministic_and_exec_independent() {
    let reg = GeneRegistry::new(vec![
        pool("rnd", Attitude::Exploitative, Reference::Rnd(0.4), 16),
        pool("cd", Attitude::Collective, Reference::CD(1), 16),
    ])
    .unwrap();
    for kind in GameKind::ALL {
        let mut config = small(kind, &reg, 77);
        config.max_generations = 8;
        config.exec = Exec::Sequential;
        let a = run_evolution(&config, &reg).unwrap();
        config.exec = Exec::Parallel;
        let b = run_evolution(&config, &reg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, run_evolution(&config, &reg).unwrap());
    }
}

#[test]
fn winner_is_plurality_and_max_generations_respected() {
    let reg = cd_registry();
    let mut config = small(GameKind::CollectiveRisk, &reg, 3);
    config.dominance_threshold = 1.0;
    config.mutation_rate = 0.5;
    config.max_generations = 5;
    let r = run_evolution(&config, &reg).unwrap();
    assert_eq!(r.terminated_by, Termination::MaxGenerations);
    assert_eq!(r.history.len(), 5);
    let last = &r.history[4].gene_frequencies;
    let w = r.genes.iter().position(|g| *g == r.winner).unwrap();
    assert_eq!(last[w], *last.iter().max().unwrap());
}

#[test]
fn batch_partitions_runs() {
    let reg = cd_registry();
    let mut config = small(GameKind::PublicGoods, &reg, 8);
    config.max_generations = 10;
    let (s, results) = batch_runs(&config, &reg, 6).unwrap();
    assert_eq!(s.wins.iter().sum::<usize>(), 6);
    assert_eq!(results.len(), 6);
    let (one, _) = batch_runs(&config, &reg, 1).unwrap();
    assert_eq!(one.wins.iter().sum::<usize>(), 1);
    config.genes.truncate(1);
    let (single, _) = batch_runs(&config, &reg, 3).unwrap();
    assert_eq!(single.wins, vec![3]);
    assert_eq!(single.threshold_reached, 3);
    assert!(batch_runs(&config, &reg, 0).is_err());
}

#[test]
fn config_errors() {
    let reg = cd_registry();
    let base = small(GameKind::PublicGoods, &reg, 0);
    let mut c = base.clone();
    c.population = 30;
    assert!(Evolution::new(&c, &reg).is_err());
    let mut c = base.clone();
    c.elites = 64;
    assert!(Evolution::new(&c, &reg).is_err());
    let mut c = base.clone();
    c.mutation_rate = 1.5;
    assert!(Evolution::new(&c, &reg).is_err());
    let mut c = base.clone();
    c.dominance_threshold = 0.0;
    assert!(Evolution::new(&c, &reg).is_err());
    let mut c = base;
    c.genes.push(Gene::new("nope", Attitude::Collective));
    assert!(matches!(Evolution::new(&c, &reg), Err(Error::UnregisteredGene(_))));
}
