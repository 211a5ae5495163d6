//! One-off scan for scenario seeds satisfying the strict strategy ordering.

use snowball_core::engine::{
    build_start_set, run_strategy, snowball_step, Direction, Query, SearchConfig, StrategyId,
};
use snowball_core::corpus::PubType;
use snowball_core::screening::{Decider, Verdict};
use snowball_core::synthgen::{generate, GenParams};

fn main() {
    let query = Query::new(
        vec!["collaboration".into()],
        (2010, 2014),
        [PubType::Journal, PubType::Conference].into(),
    )
    .unwrap();
    let config = SearchConfig::new(2014);

    let mut found = 0;
    for seed in 0..400u64 {
        let params = GenParams {
            n_articles: 140,
            year_range: (1995, 2014),
            relevant_fraction: 0.3,
            mean_out_degree: 3.0,
            homophily: 0.8,
            preferential_exponent: 1.0,
            borderline_fraction: 0.1,
            seed,
        };
        let (graph, oracle) = generate(&params).unwrap();
        let Ok(start) = build_start_set(&graph, &query, &oracle, &config) else {
            continue;
        };
        if start.included.is_empty() {
            continue;
        }
        let count = |strategy: StrategyId| {
            run_strategy(&graph, &start, strategy, &oracle, &config)
                .unwrap()
                .1
                .included
                .len()
        };
        let s1 = count(StrategyId::S1BsFsFull);
        let s2 = count(StrategyId::S2BsParFs);
        let s3 = count(StrategyId::S3BsThenFs);
        let s4 = count(StrategyId::S4FsThenBs);
        let alt = count(StrategyId::AltBsFirst);

        let seen: std::collections::BTreeSet<_> = start.candidates.iter().cloned().collect();
        let verdict_include = |ids: &[snowball_core::ArticleId]| {
            let Decider::Verdicts(v) = &oracle else { unreachable!() };
            ids.iter()
                .filter(|id| v.get(*id) == Some(&Verdict::Include))
                .count()
        };
        let b1 = verdict_include(
            &snowball_step(&graph, &start.included, Direction::Backward, &seen, &config).unwrap(),
        );
        let f1 = verdict_include(
            &snowball_step(&graph, &start.included, Direction::Forward, &seen, &config).unwrap(),
        );

        let ok = s1 > s3 && s3 > s2 && s1 > s4 && b1 > f1 && s3 <= alt && alt <= s1;
        if ok {
            println!(
                "seed {seed}: start={} S1={s1} S2={s2} S3={s3} S4={s4} ALT={alt} b1={b1} f1={f1}",
                start.included.len()
            );
            found += 1;
            if found >= 15 {
                break;
            }
        }
    }
}
